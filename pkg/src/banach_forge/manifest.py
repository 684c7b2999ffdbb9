"""On-disk run directories.

Layout::

    DIR/manifest.json        seed, budget cap, epoch state, queue, ledger, digests
    DIR/stages/U<k>.space    stage spaces
    DIR/bonds/e<k>.op        bond embedding U_k -> U_{k+1}
    DIR/bonds/p<k>.op        bond projection U_{k+1} -> U_k

Rationals in JSON are ``"p/q"`` strings.  Stage and bond files never
change once written, so saving after each stage only adds files and
rewrites the manifest (atomically, via rename).
"""
from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from .category import Certificate, Check, KArrow, verify_karrow
from .errors import (BanachForgeError, CertificateFailure, DimensionMismatch, ParseError)
from .fraisse import ComplexityBudget, GenericRun, Requirement, arrow_key
from .formats import dump_operator, dump_space, parse_operator, parse_space, read_text
from .rational import Matrix, fmt, parse_rational
from .spaces import Operator, PolyBanachSpace

FORMAT = "banach-forge-run/1"


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _mat(m: Matrix) -> list:
    return [[fmt(x) for x in r] for r in m.rows]


def _unmat(rows, nrows: int, ncols: int, where: str) -> Matrix:
    try:
        out = [tuple(parse_rational(x) for x in r) for r in rows]
    except (TypeError, AttributeError):
        raise ParseError(f"{where}: matrix entries must be 'p/q' strings") from None
    if len(out) != nrows or any(len(r) != ncols for r in out):
        raise DimensionMismatch(f"{where}: expected a {nrows}x{ncols} matrix")
    return Matrix(out, ncols=ncols)


def _space_json(s: PolyBanachSpace) -> dict:
    return {"dim": s.dim, "vertices": [[fmt(c) for c in v] for v in s.vertices]}


def _space_from_json(d: dict, where: str) -> PolyBanachSpace:
    try:
        verts = tuple(tuple(parse_rational(c) for c in v) for v in d["vertices"])
        return PolyBanachSpace(int(d["dim"]), verts)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{where}: malformed space ({exc})") from None


def _requirement_json(r: Requirement) -> dict:
    out = {
        "index": r.index, "stage": r.stage, "origin": r.origin, "status": r.status, "epoch": r.epoch,
        "enqueued_step": r.enqueued_step, "queue_length": r.queue_length,
        "target": _space_json(r.arrow.target),
        "f_embed": _mat(r.arrow.embed.matrix), "f_proj": _mat(r.arrow.proj.matrix),
    }
    if r.realized:
        out.update({"realized_stage": r.realized_stage, "realized_step": r.realized_step,
                    "g_embed": _mat(r.g.embed.matrix), "g_proj": _mat(r.g.proj.matrix),
                    "certificate": r.certificate.to_dict()})
    out["sha256"] = sha256(canonical_json(out).encode())
    return out


def _entry_digest_ok(r: dict) -> bool:
    body = {k: v for k, v in r.items() if k != "sha256"}
    return sha256(canonical_json(body).encode()) == r.get("sha256")


def _certificate_from_json(d: dict) -> Certificate:
    def dec(x):
        return x if isinstance(x, bool) else parse_rational(x) if "/" in x or x.lstrip("-").isdigit() else x
    checks = tuple(Check(c["name"], dec(c["value"]), c["relation"], dec(c["bound"])) for c in d["checks"])
    return Certificate(d["claim"], checks, tuple(d.get("notes", ())))


def run_to_json(run: GenericRun) -> tuple:
    """(manifest dict, {relative path: file text}) for ``run``."""
    files, stages, bonds = {}, [], []
    for k, s in enumerate(run.stages):
        rel = f"stages/U{k}.space"
        files[rel] = dump_space(s, f"U{k}")
        stages.append({"name": f"U{k}", "file": rel, "sha256": sha256(files[rel].encode())})
    for k, b in enumerate(run.bonds):
        entry = {"from": k, "to": k + 1}
        for part, op in (("embed", b.embed), ("proj", b.proj)):
            rel = f"bonds/{part[0]}{k}.op"
            dom, cod = (f"U{k}", f"U{k + 1}") if part == "embed" else (f"U{k + 1}", f"U{k}")
            files[rel] = dump_operator(op, f"{part}_{k}_{k + 1}", dom, cod)
            entry[part] = {"file": rel, "sha256": sha256(files[rel].encode())}
        bonds.append(entry)
    ledger = [_requirement_json(r) for r in run.ledger]
    manifest = {
        "format": FORMAT,
        "seed": run.seed,
        "cap": run.cap.to_dict(),
        "epoch": run.epoch,
        "completed_epochs": [list(e) for e in run.completed_epochs],
        "stages": stages,
        "bonds": bonds,
        "queue": list(run.queue),
        "ledger": ledger,
        "ledger_sha256": sha256(canonical_json(ledger).encode()),
    }
    return manifest, files


def save_run(run: GenericRun, directory) -> Path:
    d = Path(directory)
    manifest, files = run_to_json(run)
    for rel, text in files.items():
        p = d / rel
        if not p.exists() or p.read_text(encoding="utf-8") != text:
            atomic_write(p, text)
    atomic_write(d / "manifest.json", canonical_json(manifest))
    return d / "manifest.json"


def read_manifest(directory) -> dict:
    p = Path(directory) / "manifest.json"
    if not p.exists():
        raise ParseError(f"{p}: no manifest")
    try:
        m = json.loads(read_text(p))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON ({exc})") from None
    if m.get("format") != FORMAT:
        raise ParseError(f"{p}: unknown format tag {m.get('format')!r}")
    return m


def load_run(directory) -> GenericRun:
    d = Path(directory)
    m = read_manifest(d)
    stages = []
    for k, s in enumerate(m["stages"]):
        try:
            stages.append(parse_space(read_text(d / s["file"]), canonical=True).renamed(f"U{k}"))
        except BanachForgeError as exc:
            raise type(exc)(f"stage {k}: {s['file']}: {exc}") from None
    by_name = {f"U{k}": s for k, s in enumerate(stages)}
    bonds = []
    for b in m["bonds"]:
        ops = []
        for part in ("embed", "proj"):
            try:
                ops.append(parse_operator(read_text(d / b[part]["file"]), by_name)[1])
            except BanachForgeError as exc:
                raise type(exc)(f"stage {b['from']}: {b[part]['file']}: {exc}") from None
        bonds.append(KArrow(*ops))
    ledger = []
    for r in m["ledger"]:
        U = stages[r["stage"]]
        Y = _space_from_json(r["target"], f"requirement #{r['index']}")
        where = f"requirement #{r['index']}"
        f = KArrow(Operator(U, Y, _unmat(r["f_embed"], Y.dim, U.dim, where)),
                   Operator(Y, U, _unmat(r["f_proj"], U.dim, Y.dim, where)))
        extra = {}
        if r["status"] == "realized":
            V = stages[r["realized_stage"]]
            g = KArrow(Operator(Y, V, _unmat(r["g_embed"], V.dim, Y.dim, where)),
                       Operator(V, Y, _unmat(r["g_proj"], Y.dim, V.dim, where)))
            extra = dict(realized_stage=r["realized_stage"], g=g, realized_step=r["realized_step"],
                         certificate=_certificate_from_json(r["certificate"]))
        ledger.append(Requirement(r["index"], r["stage"], f, arrow_key(r["stage"], f), r["epoch"],
                                  r["enqueued_step"], r["queue_length"], r["origin"], r["status"], **extra))
    cap = ComplexityBudget(**m["cap"])
    return GenericRun(tuple(stages), tuple(bonds), tuple(ledger), tuple(m["queue"]), m["seed"], cap,
                      m["epoch"], tuple(tuple(e) for e in m["completed_epochs"]))


# --- verification ---------------------------------------------------------

@dataclass
class VerifyReport:
    failures: list
    checked: int

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_run_dir(directory) -> VerifyReport:
    """Re-derive every claim of a run directory from its files.

    Failures are strings naming the stage (or requirement) and the
    condition that did not hold.  Digest mismatches are reported, and the
    semantic checks still run on whatever the files now contain.
    """
    d = Path(directory)
    m = read_manifest(d)
    failures, checked = [], 0
    for k, s in enumerate(m["stages"]):
        checked += 1
        if sha256((d / s["file"]).read_bytes()) != s["sha256"]:
            failures.append(f"stage {k}: digest mismatch in {s['file']}")
    for b in m["bonds"]:
        for part in ("embed", "proj"):
            checked += 1
            if sha256((d / b[part]["file"]).read_bytes()) != b[part]["sha256"]:
                failures.append(f"stage {b['from']}: bond {b['from']}->{b['to']} {part}: digest mismatch in {b[part]['file']}")
    checked += 1
    if sha256(canonical_json(m["ledger"]).encode()) != m.get("ledger_sha256"):
        failures.append("ledger: digest mismatch")
    for r in m["ledger"]:
        checked += 1
        if not _entry_digest_ok(r):
            failures.append(f"stage {r.get('stage')}: requirement #{r.get('index')} digest mismatch")
    try:
        run = load_run(d)
    except BanachForgeError as exc:
        failures.append(f"parse: {exc}")
        return VerifyReport(failures, checked)
    if run.stages[0].dim != 0:
        failures.append("stage 0: U_0 is not the trivial space")
    for k, b in enumerate(run.bonds):
        checked += 1
        try:
            c = verify_karrow(b)
            failures += [f"stage {k}: bond {k}->{k + 1} {x}" for x in c.failures()]
        except (CertificateFailure, DimensionMismatch) as exc:
            failures.append(f"stage {k}: bond {k}->{k + 1} {type(exc).__name__}: {exc}")
    N = len(run.stages)
    for n in range(N):
        for mm in range(n + 1, N):
            checked += 1
            b = run.bond(n, mm)
            if b.proj.matrix @ b.embed.matrix != Matrix.identity(run.stages[n].dim):
                failures.append(f"stage {n}: coherence P^{mm}_{n} o e^{mm}_{n} != id")
    for r in run.ledger:
        if not r.realized:
            continue
        checked += 1
        b = run.bond(r.stage, r.realized_stage)
        if r.g.embed.matrix @ r.arrow.embed.matrix != b.embed.matrix:
            failures.append(f"stage {r.stage}: requirement #{r.index} embed(g o f) != bond {r.stage}->{r.realized_stage}")
        if r.arrow.proj.matrix @ r.g.proj.matrix != b.proj.matrix:
            failures.append(f"stage {r.stage}: requirement #{r.index} proj(g o f) != bond {r.stage}->{r.realized_stage}")
        try:
            failures += [f"stage {r.stage}: requirement #{r.index} arrow g {x}" for x in verify_karrow(r.g).failures()]
        except (CertificateFailure, DimensionMismatch) as exc:
            failures.append(f"stage {r.stage}: requirement #{r.index} arrow g {type(exc).__name__}: {exc}")
        if not r.certificate.ok:
            failures.append(f"stage {r.stage}: requirement #{r.index} stored certificate records a failure")
    return VerifyReport(failures, checked)


# --- locking --------------------------------------------------------------

class RunLocked(BanachForgeError):
    exit_code = 1


@contextmanager
def run_lock(directory):
    """Exclusive writer lock on a run directory; stale locks of dead processes are taken over."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lock = d / ".lock"
    while True:
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            break
        except FileExistsError:
            try:
                pid = int(lock.read_text() or 0)
            except (OSError, ValueError):
                pid = 0
            if pid and _alive(pid):
                raise RunLocked(f"{d} is locked by process {pid}") from None
            lock.unlink(missing_ok=True)
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True
