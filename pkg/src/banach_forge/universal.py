"""Embedding monotone-FDD chains into a generic run, the extension
property (E), one-step improvement, and back-and-forth between two runs.

Everything here works on finite prefixes: operators land in run stages,
and every inequality a construction claims is recomputed exactly and
stored as a :class:`Certificate`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .category import (Certificate, Chain, Check, KArrow, compose_k, matrix_identity_check)
from .constructions import amalgamate, return_law
from .errors import BadInput, BadSeedIsometry, ChainInvalid, DomainMismatch, HypothesisFailed
from .fraisse import GenericRun, extend_generic, realize
from .rational import ONE, ZERO, Matrix, Q, fmt
from .spaces import (Operator, PolyBanachSpace, isometry_via_left_inverse, lower_isometry_bound,
                     op_norm)


def _stage_index(run: GenericRun, space: PolyBanachSpace, hint: int | None = None) -> int:
    if hint is not None:
        if run.stages[hint] != space:
            raise DomainMismatch(f"operator does not land in stage {hint}")
        return hint
    for k in range(len(run.stages) - 1, -1, -1):
        if run.stages[k] == space:
            return k
    raise DomainMismatch("space is not a stage of the run")


def _defect(A: Operator, B: Operator):
    """||A - B|| for two maps with the same domain and codomain dimensions."""
    return op_norm(Operator(A.domain, A.codomain, A.matrix - B.matrix))


# --- embedding ladders ----------------------------------------------------

@dataclass(frozen=True)
class EmbeddingLadder:
    run: GenericRun
    chain: Chain
    ks: tuple
    es: tuple  # e_n : X_n -> U_{k_n}
    Rs: tuple  # R_n : U_{k_n} -> X_n
    certificates: tuple  # one per induction step n -> n+1

    @property
    def certificate(self) -> Certificate:
        first, *rest = self.certificates or (Certificate("embed_chain", ()),)
        return first.merged("embed_chain", *rest, prefix=False)

    def cauchy(self) -> Certificate:
        """||e_n|X_m - e_m|| < sum_{k=m}^{n-1} 2^-k, and the same for R."""
        checks = []
        for n in range(len(self.es)):
            for m in range(n):
                bound = sum((Q(1, 2 ** k) for k in range(m, n)), ZERO)
                xb, ub = self.chain.bond(m, n), self.run.bond(self.ks[m], self.ks[n])
                de = _defect(self.es[n] @ xb.embed, ub.embed @ self.es[m])
                dR = _defect(self.Rs[n] @ ub.embed, xb.embed @ self.Rs[m])
                checks.append(Check(f"||e_{n}|X_{m} - e_{m}||", de, "<", bound))
                checks.append(Check(f"||R_{n}|U_k{m} - R_{m}||", dR, "<", bound))
        return Certificate("ladder_cauchy", tuple(checks))


def embed_chain(run: GenericRun, chain: Chain, stages: int) -> EmbeddingLadder:
    """Operators e_n : X_n -> U_{k_n}, R_n : U_{k_n} -> X_n for n <= stages.

    Step n -> n+1: the return law on (e_n, R_n) with eps_n = 2^-(n+1)
    gives (i, S) : X_n -> W and (j, T) : U_{k_n} -> W; amalgamating (i, S)
    with the chain bond adds (l, G) : X_{n+1} -> W'; realizing the arrow
    U_{k_n} -> W' in the run gives (g, H) : W' -> U_{k_{n+1}}, and
    e_{n+1} = g l, R_{n+1} = G H.
    """
    if stages < 0:
        raise ValueError("stages must be nonnegative")
    if len(chain.stages) < stages + 1:
        raise ChainInvalid(f"chain has {len(chain.stages)} stages, {stages + 1} needed")
    if chain.stages[0].dim != 0:
        raise ChainInvalid("the chain must start at the trivial space")
    if not chain.check().ok:
        raise ChainInvalid("chain certificate fails")
    X0, U0 = chain.stages[0], run.stages[0]
    ks, es, Rs, certs = [0], [Operator.zero(X0, U0)], [Operator.zero(U0, X0)], []
    for n in range(stages):
        e, R, k = es[n], Rs[n], ks[n]
        eps_n = Q(1, 2 ** (n + 1))
        rl = return_law(e, R, eps_n)
        iS, jT = rl.iP, rl.jQ
        am = amalgamate(iS, chain.bonds[n], verify_inputs=False)
        W = am.space
        lift = KArrow(am.xv.embed.retarget(codomain=W), am.xv.proj.retarget(domain=W))
        lG = KArrow(am.yv.embed.retarget(codomain=W), am.yv.proj.retarget(domain=W))
        req = compose_k(jT, lift)
        m, gH, run = realize(run, k, req)
        g, H = gH.embed, gH.proj
        e1, R1 = g @ lG.embed, lG.proj @ H
        bound = Q(1, 2 ** n)
        xb, ub = chain.bonds[n], run.bond(k, m)
        ident = Operator.identity(chain.stages[n + 1])
        checks = (
            Check(f"k_{n + 1} > k_{n}", m > k, "==", True),
            Check(f"(1) ||R_{n + 1} e_{n + 1} - id||", _defect(R1 @ e1, ident), "<", Q(1, 2 ** (n + 1))),
            Check(f"(2) ||e_{n + 1}|X_{n} - e_{n}||", _defect(e1 @ xb.embed, ub.embed @ e), "<", bound),
            Check(f"(3) ||R_{n + 1}|U_k{n} - R_{n}||", _defect(R1 @ ub.embed, xb.embed @ R), "<", bound),
            Check(f"(5) ||j e_{n} - i||", _defect(jT.embed @ e, iS.embed), "<", bound),
            matrix_identity_check(f"(6) l|X_{n} = i", (lG.embed @ xb.embed).matrix, (lift.embed @ iS.embed).matrix),
            matrix_identity_check("(7) Q o G = S", (xb.proj @ lG.proj).matrix, (iS.proj @ lift.proj).matrix),
            matrix_identity_check(f"T H = P^{m}_{k}", (req.proj @ H).matrix, ub.proj.matrix),
            Check(f"e_{n + 1} isometric", isometry_via_left_inverse(e1, R1) or e1.domain.dim == 0, "==", True),
        )
        certs.append(Certificate(f"embed_chain step {n}", checks,
                                 (f"realized at stage {m} of the run",)).merged(
            f"embed_chain step {n}", rl.certificate))
        ks.append(m)
        es.append(e1)
        Rs.append(R1)
    return EmbeddingLadder(run, chain, tuple(ks), tuple(es), tuple(Rs), tuple(certs))


# --- property (E) ---------------------------------------------------------

@dataclass(frozen=True)
class Extension:
    """g : F -> U_M with a 1-bounded left inverse ``left`` : U_M -> F.

    ``t = g o left`` is the complementation witness for g[F].
    """

    run: GenericRun
    stage: int
    g: Operator
    left: Operator
    certificate: Certificate

    @property
    def arrow(self) -> KArrow:
        return KArrow(self.g, self.left)

    @property
    def t(self) -> Operator:
        return self.g @ self.left


def _extension_certificate(claim, E_in_F, i, eps, g, left, bond) -> Certificate:
    t = g @ left
    iso = isometry_via_left_inverse(g, left) or g.domain.dim == 0
    checks = (
        Check("op_norm(g)", op_norm(g), "<=", ONE),
        Check("lower_isometry_bound(g)", ONE if iso else lower_isometry_bound(g), ">=", 1 - eps),
        Check("||g|E - i||", _defect(g @ E_in_F.embed, bond.embed @ i), "<", eps),
        Check("op_norm(t)", op_norm(t), "<=", ONE),
        Check("||t g - g||", _defect(t @ g, g), "<=", eps),
    )
    return Certificate(claim, checks)


def _raise_to(run: GenericRun, n: int, at_least_dim: int | None = None):
    """Smallest stage index m >= n (extending the run if needed) with dim > at_least_dim."""
    if at_least_dim is None:
        return n, run
    while True:
        for m in range(n, len(run.stages)):
            if run.stages[m].dim > at_least_dim:
                return m, run
        run = extend_generic(run, 1)


def extend_property_E(run: GenericRun, E_in_F: KArrow, i: Operator, eps, proj: Operator | None = None,
                      stage: int | None = None, grow_beyond: int | None = None) -> Extension:
    """An eps-isometric g : F -> U_M with ||g|E - i|| < eps and a 1-bounded
    t : U_M -> g[F] moving g[F] by at most eps.

    ``i`` must be an isometric embedding of E into a stage with a supplied
    1-bounded projection ``proj`` (proj o i = id).  With ``grow_beyond`` the
    target stage is pushed past that dimension.
    """
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be strictly positive")
    if proj is None:
        raise BadInput("the image of i needs a supplied projection")
    if E_in_F.source != i.domain:
        raise DomainMismatch("i is not defined on E")
    n = _stage_index(run, i.codomain, stage)
    ip = KArrow(i, proj)
    if (proj.matrix @ i.matrix) != Matrix.identity(i.domain.dim) or op_norm(proj) > 1 or op_norm(i) > 1:
        raise BadInput("(i, proj) is not a projection-embedding pair")
    F = E_in_F.target
    if F.dim == E_in_F.source.dim:
        # E = F up to the inclusion: g = i o inclusion^-1
        g, left, M = i @ E_in_F.proj, E_in_F.embed @ proj, n
    else:
        am = amalgamate(ip, E_in_F, verify_inputs=False)
        V = am.space
        xv = KArrow(am.xv.embed.retarget(codomain=V), am.xv.proj.retarget(domain=V))
        fv = KArrow(am.yv.embed.retarget(codomain=V), am.yv.proj.retarget(domain=V))
        m, gH, run = realize(run, n, xv)
        g, left, M = gH.embed @ fv.embed, fv.proj @ gH.proj, m
    M2, run = _raise_to(run, M, grow_beyond)
    if M2 != M:
        b = run.bond(M, M2)
        g, left, M = b.embed @ g, left @ b.proj, M2
    cert = _extension_certificate("property_E", E_in_F, i, eps, g, left, run.bond(n, M))
    return Extension(run, M, g, left, cert)


# --- one-step improvement -------------------------------------------------

def one_step_improve(run: GenericRun, E_in_F: KArrow, f: Operator, eps, delta, back: Operator | None = None,
                     stage: int | None = None) -> Extension:
    """Turn a (<eps)-embedding f : E -> U_N into a delta-embedding g : F -> U_M.

    ``back`` : U_N -> E witnesses the (1,<eps)-complementation of f[E]
    through ||back o f - id_E||.  The slack eta is the larger of that
    quantity and 1 - lower_isometry_bound(f); it must be < eps.
    """
    eps, delta = Q(eps), Q(delta)
    if delta <= 0 or eps <= 0:
        raise ValueError("eps and delta must be strictly positive")
    if back is None:
        raise BadInput("a 1-bounded back map witnessing complementation is required")
    if f.domain != E_in_F.source:
        raise DomainMismatch("f is not defined on E")
    N = _stage_index(run, f.codomain, stage)
    nf, nb = op_norm(f), op_norm(back)
    if nf > 1 or nb > 1:
        raise HypothesisFailed(f"f and back must be 1-bounded (norms {fmt(nf)}, {fmt(nb)})", value=max(nf, nb))
    comp = _defect(back @ f, Operator.identity(f.domain))
    lib = lower_isometry_bound(f)
    eta = max(comp, 1 - lib)
    if eta >= eps:
        raise HypothesisFailed(f"slack {fmt(eta)} is not below eps = {fmt(eps)}", value=eta)
    rl = return_law(f, back, eta)
    am = amalgamate(rl.iP, E_in_F, verify_inputs=False)
    V = am.space
    a = KArrow(am.xv.embed.retarget(codomain=V), am.xv.proj.retarget(domain=V))
    k = KArrow(am.yv.embed.retarget(codomain=V), am.yv.proj.retarget(domain=V))
    A_in_V = compose_k(rl.jQ, a)
    U = run.stages[N]
    ext = extend_property_E(run, A_in_V, Operator.identity(U), min(eps - eta, delta),
                            proj=Operator.identity(U), stage=N)
    g, left = ext.g @ k.embed, k.proj @ ext.left
    run, M = ext.run, ext.stage
    cert = _extension_certificate("one_step_improve", E_in_F, f, eps, g, left, run.bond(N, M))
    extra = (
        Check("slack eta", eta, "<", eps),
        Check("delta-isometry: lower_isometry_bound(g)", cert.value("lower_isometry_bound(g)"), ">=", 1 - delta),
        Check("(1,delta) witness: ||t g - g||", cert.value("||t g - g||"), "<=", delta),
    )
    cert = Certificate(cert.claim, cert.checks + extra, (f"eta = {fmt(eta)}",)).merged(
        cert.claim, ext.certificate, rl.certificate)
    return Extension(run, M, g, left, cert)


# --- back and forth -------------------------------------------------------

def schedule(eps, stages: int, eps0=None) -> tuple:
    """(eps_0, eps_1, ..., eps_stages) with eps_0 = eps0 and eps_n = (eps - eps0)/2^(n+2)."""
    eps = Q(eps)
    eps0 = eps / 2 if eps0 is None else Q(eps0)
    return (eps0,) + tuple((eps - eps0) / 2 ** (n + 2) for n in range(1, stages + 1))


@dataclass(frozen=True)
class BackAndForthState:
    runP: GenericRun
    runK: GenericRun
    eps: object
    eps0: object
    eps_n: tuple
    a_idx: tuple  # A_n = runP.stages[a_idx[n]]
    b_idx: tuple  # B_n = runK.stages[b_idx[n]]
    fs: tuple  # f_n : A_n -> B_n
    gs: tuple  # g_n : B_n -> A_{n+1}
    certificates: tuple = field(default=())

    @property
    def certificate(self) -> Certificate:
        first, *rest = self.certificates
        return first.merged("back_and_forth", *rest, prefix=False)

    def drift(self):
        """Sum over n of ||f_n|A_{n-1} - f_{n-1}||."""
        total = ZERO
        for n in range(1, len(self.fs)):
            bp = self.runP.bond(self.a_idx[n - 1], self.a_idx[n])
            bk = self.runK.bond(self.b_idx[n - 1], self.b_idx[n])
            total += _defect(self.fs[n] @ bp.embed, bk.embed @ self.fs[n - 1])
        return total


def _inverse_isometry(h: Operator) -> Operator:
    if h.domain.dim != h.codomain.dim:
        raise BadSeedIsometry("h is not bijective (dimensions differ)")
    if h.matrix.rank() < h.domain.dim:
        raise BadSeedIsometry("h is not bijective (singular matrix)")
    inv = Operator(h.codomain, h.domain, h.matrix.inverse()) if h.domain.dim else Operator.zero(h.codomain, h.domain)
    if op_norm(h) > 1 or op_norm(inv) > 1:
        raise BadSeedIsometry(f"h is not an isometry (||h|| = {fmt(op_norm(h))}, ||h^-1|| = {fmt(op_norm(inv))})")
    return inv


def back_and_forth(runP: GenericRun, runK: GenericRun, h: Operator, eps, stages: int,
                   a: int | None = None, b: int | None = None, eps0=None) -> BackAndForthState:
    """Alternating extensions f_n : A_n -> B_n, g_n : B_n -> A_{n+1}.

    f_0 = h; g_n comes from (E) in runP applied to B_n with E = A_n
    embedded by f_n, and f_{n+1} from (E) in runK with E = B_n embedded
    by g_n.  Stages are forced to grow strictly in both runs.
    """
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be strictly positive")
    if stages < 0:
        raise ValueError("stages must be nonnegative")
    sched = schedule(eps, stages, eps0)
    eps0 = sched[0]
    if not 0 < eps0 < eps:
        raise ValueError("eps0 must lie strictly between 0 and eps")
    ai = _stage_index(runP, h.domain, a)
    bi = _stage_index(runK, h.codomain, b)
    f, f_left = h, _inverse_isometry(h)
    a_idx, b_idx, fs, gs, certs = [ai], [bi], [f], [], []
    tail = 2 * sum(sched[1:], ZERO) + 2 * sched[-1]
    certs.append(Certificate("schedule", (
        Check("eps_0 < eps", eps0, "<", eps),
        Check("strictly decreasing", all(x > y for x, y in zip(sched, sched[1:])), "==", True),
        Check("2 sum eps_n + 2 eps_S", tail, "<", eps - eps0),
        Check("(0) f_0 extends h", f.matrix == h.matrix, "==", True),
    )))
    for n in range(stages):
        A, B = runP.stages[a_idx[n]], runK.stages[b_idx[n]]
        en = sched[n]
        # g_n : B_n -> A_{n+1}
        extP = extend_property_E(runP, KArrow(f, f_left), Operator.identity(A), en, proj=Operator.identity(A),
                                 stage=a_idx[n], grow_beyond=A.dim)
        runP, g, g_left = extP.run, extP.g, extP.left
        a_idx.append(extP.stage)
        bp = runP.bond(a_idx[n], a_idx[n + 1])
        # f_{n+1} : A_{n+1} -> B_{n+1}
        extK = extend_property_E(runK, KArrow(g, g_left), Operator.identity(B), sched[n + 1],
                                 proj=Operator.identity(B), stage=b_idx[n], grow_beyond=B.dim)
        runK, f_next, f_next_left = extK.run, extK.g, extK.left
        b_idx.append(extK.stage)
        bk = runK.bond(b_idx[n], b_idx[n + 1])
        checks = (
            Check(f"(1)-(3) A_{n} < A_{n + 1}", runP.stages[a_idx[n + 1]].dim > A.dim, "==", True),
            Check(f"(1)-(3) B_{n} < B_{n + 1}", runK.stages[b_idx[n + 1]].dim > B.dim, "==", True),
            Check(f"(4) f_{n} isometric", isometry_via_left_inverse(f, f_left) or f.domain.dim == 0, "==", True),
            Check(f"(4) g_{n} isometric", isometry_via_left_inverse(g, g_left) or g.domain.dim == 0, "==", True),
            Check(f"(5) ||g_{n} f_{n} - id||", _defect(g @ f, bp.embed), "<", en),
            Check(f"(6) ||f_{n + 1} g_{n} - id||", _defect(f_next @ g, bk.embed), "<", en),
        )
        certs.append(Certificate(f"back_and_forth stage {n}", checks).merged(
            f"back_and_forth stage {n}", extP.certificate, extK.certificate))
        gs.append(g)
        fs.append(f_next)
        f, f_left = f_next, f_next_left
    state = BackAndForthState(runP, runK, eps, eps0, sched, tuple(a_idx), tuple(b_idx), tuple(fs), tuple(gs))
    drift = state.drift()
    certs.append(Certificate("drift", (Check("sum ||f_n|A_{n-1} - f_{n-1}||", drift, "<", eps - eps0),)))
    return BackAndForthState(runP, runK, eps, eps0, sched, tuple(a_idx), tuple(b_idx), tuple(fs), tuple(gs),
                             tuple(certs))
