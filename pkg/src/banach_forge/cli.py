"""``banach-forge`` command line.

Exit codes: 0 ok, 2 parse error, 3 shape error, 4 budget exhausted,
5 certificate failure (1 for anything else, e.g. a locked run).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report as rpt
from .category import Chain, chain_of, l1_chain, linf_chain, trivial_chain
from .errors import BanachForgeError, BadInput, BudgetExhausted, ParseError
from .formats import parse_operator, parse_space, parse_spaces, read_text
from .fraisse import (ComplexityBudget, GenericRun, budget_for_epoch, effective_cap, extend_generic,
                      verify_condition_A)
from .manifest import (_mat, atomic_write, canonical_json, load_run, read_manifest, run_lock, save_run,
                       verify_run_dir)
from .rational import fmt, parse_rational
from .spaces import Operator, norm
from .universal import back_and_forth, embed_chain


def _rational(text: str):
    try:
        return parse_rational(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# --- norm -----------------------------------------------------------------

def cmd_norm(args) -> int:
    space = parse_space(read_text(args.space))
    fields = " ".join(args.vector).split()
    x = tuple(parse_rational(f) for f in fields)
    print(fmt(norm(space, x)))
    return 0


# --- generic --------------------------------------------------------------

def _generic_report(run: GenericRun, directory) -> None:
    budgets = [budget_for_epoch(k, run.cap) for k, _ in run.completed_epochs]
    audits = [(b, verify_condition_A(run, b)) for b in budgets]
    payload = {
        "seed": run.seed, "cap": run.cap.to_dict(), "epoch": run.epoch,
        "stages": [{"stage": k, "dim": s.dim, "vertices": len(s.vertices), "max_denominator": s.max_denominator()}
                   for k, s in enumerate(run.stages)],
        "condition_A": [{"budget": b.to_dict(), "pending": a.pending, "realized": a.realized,
                         "frontier": a.frontier} for b, a in audits],
        "ledger": {"size": len(run.ledger), "pending": len(run.pending())},
    }
    stages = [(k, s.dim, len(s.vertices), s.max_denominator()) for k, s in enumerate(run.stages)]
    ledger = [(r.index, r.stage, r.origin, r.status, r.realized_stage, r.epoch, r.enqueued_step, r.realized_step,
               r.arrow.target.dim) for r in run.ledger]
    rpt.write_report(directory, payload, {
        "stages": (["stage", "dim", "vertices", "max_denominator"], stages),
        "ledger": (["index", "stage", "origin", "status", "realized_stage", "epoch", "enqueued_step",
                    "realized_step", "target_dim"], ledger),
    }, [("stage_dims.png", lambda p: rpt.plot_stage_dims(run, p)),
        ("balls.png", lambda p: rpt.plot_balls(run, p))])


def cmd_generic(args) -> int:
    if args.steps < 0:
        raise BadInput("--steps must be nonnegative")
    cap = effective_cap(ComplexityBudget(args.budget_dim, args.budget_den, args.budget_vertices))
    out = Path(args.out)
    with run_lock(out):
        if (out / "manifest.json").exists():
            run = load_run(out)
            if run.seed != args.seed or run.cap != cap:
                raise BadInput(f"{out} holds a run with a different seed or budget; refusing to resume")
        else:
            run = GenericRun.fresh(args.seed, cap)
            save_run(run, out)
        try:
            while run.step < args.steps:
                run = extend_generic(run, 1)
                save_run(run, out)
        finally:
            save_run(run, out)
    print(f"stages: {len(run.stages)}  dims: {' '.join(str(s.dim) for s in run.stages)}")
    print(f"epoch: {run.epoch}  ledger: {len(run.ledger)}  pending: {len(run.pending())}")
    if args.report:
        _generic_report(run, args.report)
    return 0


# --- embed ----------------------------------------------------------------

def load_chain(source: str) -> Chain:
    """``linf:N``, ``l1:N``, ``trivial:N`` or a file of space blocks (first must be dim 0)."""
    for prefix, maker in (("linf:", linf_chain), ("l1:", l1_chain), ("trivial:", trivial_chain)):
        if source.startswith(prefix):
            try:
                return maker(int(source[len(prefix):]))
            except ValueError:
                raise ParseError(f"bad chain length in {source!r}") from None
    spaces = parse_spaces(read_text(source))
    if not spaces:
        raise ParseError(f"{source}: no space blocks")
    return chain_of(spaces)


def _print_certificate(cert) -> None:
    for c in cert.checks:
        print(c)
    print(f"{'OK' if cert.ok else 'FAILED'}: {len(cert.checks) - len(cert.failures())}/{len(cert.checks)} checks pass")


def ladder_to_json(ladder) -> dict:
    return {"ks": list(ladder.ks), "e": [_mat(e.matrix) for e in ladder.es], "R": [_mat(R.matrix) for R in ladder.Rs],
            "certificates": [c.to_dict() for c in ladder.certificates], "cauchy": ladder.cauchy().to_dict()}


def _ladder_rows(ladder):
    rows = []
    for n, c in enumerate(ladder.certificates):
        get = lambda prefix: next(x for x in c.checks if x.name.startswith(prefix))
        rows.append((n, ladder.ks[n], ladder.ks[n + 1], get("(1)").value, get("(2)").value, get("(3)").value,
                     get("(2)").bound))
    return rows


def cmd_embed(args) -> int:
    chain = load_chain(args.chain)
    with run_lock(args.run):
        run = load_run(args.run)
        ladder = embed_chain(run, chain, args.stages)
        save_run(ladder.run, args.run)
        cert = ladder.certificate.merged("embed_chain", ladder.cauchy())
        name = Path(args.chain).name.replace(":", "_")
        atomic_write(Path(args.run) / "embeddings" / f"{name}.json", canonical_json(ladder_to_json(ladder)))
    _print_certificate(cert)
    if args.report:
        rows = _ladder_rows(ladder)
        series = [(label, [(r[0], r[col], r[6]) for r in rows]) for label, col in (("(1)", 3), ("(2)", 4), ("(3)", 5))]
        rpt.write_report(args.report, ladder_to_json(ladder), {
            "ladder": (["n", "k_n", "k_n+1", "defect_1", "defect_2", "defect_3", "bound_2^-n"], rows),
            "checks": (["name", "value", "relation", "bound", "passed"],
                       [(c.name, c.value, c.relation, c.bound, c.passed) for c in cert.checks]),
        }, [("ladder.png", lambda p: rpt.plot_bounds(series, p, "embedding ladder"))])
    return 0 if cert.ok else 5


# --- bnf ------------------------------------------------------------------

def state_to_json(state) -> dict:
    return {"eps": fmt(state.eps), "eps0": fmt(state.eps0), "schedule": [fmt(e) for e in state.eps_n],
            "A": list(state.a_idx), "B": list(state.b_idx),
            "f": [_mat(f.matrix) for f in state.fs], "g": [_mat(g.matrix) for g in state.gs],
            "drift": fmt(state.drift()), "certificates": [c.to_dict() for c in state.certificates]}


def cmd_bnf(args) -> int:
    """Inputs are read only; the extended runs and the state go under --out."""
    runA, runB = load_run(args.runA), load_run(args.runB)
    A, B = runA.stages[args.a], runB.stages[args.b]
    if args.h:
        _, h = parse_operator(read_text(args.h), {"A": A, "B": B})
    elif A.dim == B.dim == 0:
        h = Operator.zero(A, B)
    elif A == B:
        h = Operator.identity(A).retarget(codomain=B)
    else:
        raise BadInput("--h is required unless the seed stages are trivial or equal")
    state = back_and_forth(runA, runB, h, args.eps, args.stages, a=args.a, b=args.b)
    out = Path(args.out) if args.out else Path(args.runA) / "bnf"
    with run_lock(out):
        save_run(state.runP, out / "runA")
        save_run(state.runK, out / "runB")
        atomic_write(out / "state.json", canonical_json(state_to_json(state)))
    cert = state.certificate
    _print_certificate(cert)
    print(f"drift: {fmt(state.drift())}  eps - eps0: {fmt(state.eps - state.eps0)}")
    if args.report:
        rows = []
        for n in range(len(state.gs)):
            c = state.certificates[n + 1]
            d5 = next(x for x in c.checks if x.name.startswith("(5)")).value
            d6 = next(x for x in c.checks if x.name.startswith("(6)")).value
            rows.append((n, state.a_idx[n], state.b_idx[n], state.eps_n[n], d5, d6))
        series = [("(5)", [(r[0], r[4], r[3]) for r in rows]), ("(6)", [(r[0], r[5], r[3]) for r in rows])]
        rpt.write_report(args.report, state_to_json(state), {
            "stages": (["n", "A_index", "B_index", "eps_n", "defect_5", "defect_6"], rows),
        }, [("schedule.png", lambda p: rpt.plot_bounds(series, p, "back and forth"))])
    return 0 if cert.ok else 5


# --- verify ---------------------------------------------------------------

def cmd_verify(args) -> int:
    rep = verify_run_dir(args.run)
    for f in rep.failures:
        print(f"FAIL {f}")
    print(f"{'OK' if rep.ok else 'FAILED'}: {rep.checked} checks, {len(rep.failures)} failures")
    if args.report:
        m = read_manifest(args.run)
        rpt.write_report(args.report, {"run": str(args.run), "seed": m["seed"], "checked": rep.checked,
                                       "failures": rep.failures},
                         {"failures": (["failure"], [(f,) for f in rep.failures])})
    return 0 if rep.ok else 5


# --- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="banach-forge", description="Exact polyhedral Banach space constructions.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norm", help="exact norm of a vector")
    s.add_argument("space")
    s.add_argument("vector", nargs="+", help='coordinates, e.g. "1/2 1/3"')
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("generic", help="build or resume a generic run")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--budget-dim", type=int, default=3)
    s.add_argument("--budget-den", type=int, default=2)
    s.add_argument("--budget-vertices", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_generic)

    s = sub.add_parser("embed", help="embed a chain into a run")
    s.add_argument("--run", required=True)
    s.add_argument("--chain", required=True, help="linf:N, l1:N, trivial:N or a file of space blocks")
    s.add_argument("--stages", type=int, required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("bnf", help="back and forth between two runs")
    s.add_argument("--runA", required=True)
    s.add_argument("--runB", required=True)
    s.add_argument("--eps", type=_rational, required=True)
    s.add_argument("--stages", type=int, required=True)
    s.add_argument("--h", help="operator file 'operator h A B'")
    s.add_argument("--a", type=int, default=0, help="stage of runA holding the domain of h")
    s.add_argument("--b", type=int, default=0, help="stage of runB holding the codomain of h")
    s.add_argument("--out")
    s.add_argument("--report")
    s.set_defaults(func=cmd_bnf)

    s = sub.add_parser("verify", help="re-verify a run directory")
    s.add_argument("--run", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return exc.exit_code
    except BanachForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
