"""The amalgam norm X (+)_f Y, its universal property, the return law,
projection-compatible amalgamation, and the two rationalization steps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import gmpy2

from .category import (Certificate, Check, KArrow, LArrow, matrix_identity_check, verify_karrow)
from .errors import (BudgetExhausted, CertificateFailure, DomainMismatch, HypothesisFailed,
                     NotEpsIsometry, NotKArrow)
from .rational import ONE, ZERO, Matrix, Q, fmt, vscale
from .spaces import (Operator, PolyBanachSpace, isometry_via_left_inverse,
                     lower_isometry_bound_with_witness, norm, op_norm, op_norm_with_witness)

#: stand-in for eps = 0 where a strictly positive eps is required
EPS_FLOOR = Q(1, 2 ** 20)


@dataclass(frozen=True)
class OplusResult:
    space: PolyBanachSpace
    i: Operator
    j: Operator
    f: Operator
    eps: object
    certificate: Certificate


@dataclass(frozen=True)
class AmalgamResult:
    space: PolyBanachSpace
    xv: KArrow  # (i', P') : X -> V
    yv: KArrow  # (j', Q') : Y -> V
    certificate: Certificate


class ReturnLaw(NamedTuple):
    space: PolyBanachSpace
    iP: KArrow
    jQ: KArrow
    certificate: Certificate
    oplus: OplusResult


def _expected_norm(space: PolyBanachSpace):
    return ONE if space.dim else ZERO


def oplus_f(X: PolyBanachSpace, Y: PolyBanachSpace, f: Operator, eps) -> OplusResult:
    """X (+) Y normed so that the unit ball is conv(B_X x 0, 0 x B_Y, G),
    G = {(w, -f w) : w in B_X / eps}."""
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be strictly positive")
    if f.domain != X or f.codomain != Y:
        raise DomainMismatch("f does not map X to Y")
    nf, wf = op_norm_with_witness(f)
    if nf > 1:
        raise NotEpsIsometry(f"f has norm {fmt(nf)} > 1", witness=wf, value=nf)
    lib, wl = lower_isometry_bound_with_witness(f)
    if lib < 1 - eps:
        raise NotEpsIsometry(f"f shrinks a unit vector to {fmt(lib)} < 1 - eps", witness=wl, value=lib)
    a, b = X.dim, Y.dim
    zx, zy = (ZERO,) * a, (ZERO,) * b
    inv = 1 / eps
    pts = [v + zy for v in X.vertices] + [zx + u for u in Y.vertices]
    pts += [vscale(inv, v) + vscale(-inv, f.matrix.apply(v)) for v in X.vertices]
    W = PolyBanachSpace.from_points(pts, dim=a + b, name=f"{X.name or 'X'}+f{Y.name or 'Y'}")
    i = Operator(X, W, Matrix.block([[Matrix.identity(a)], [Matrix.zeros(b, a)]]))
    j = Operator(Y, W, Matrix.block([[Matrix.zeros(a, b)], [Matrix.identity(b)]]))
    # y + f(x) is a 1-bounded left inverse of j
    back_y = Operator(W, Y, Matrix.block([[f.matrix, Matrix.identity(b)]]))
    lib_i = lower_isometry_bound_with_witness(i)[0]
    j_iso = isometry_via_left_inverse(j, back_y)
    defect = op_norm(j @ f - i)
    checks = (
        Check("op_norm(i)", op_norm(i), "==", _expected_norm(X)),
        Check("lower_isometry_bound(i)", lib_i, "==", ONE),
        Check("op_norm(j)", op_norm(j), "==", _expected_norm(Y)),
        Check("lower_isometry_bound(j)", ONE if j_iso else ZERO, "==", ONE),
        Check("||j o f - i||", defect, "<=", eps),
    )
    cert = Certificate("oplus_f", checks, ("lower bound of j from the left inverse (x, y) -> y + f(x)",))
    return OplusResult(W, i, j, f, eps, cert)


def factor_through_oplus(res: OplusResult, k: Operator, l: Operator) -> tuple[Operator, Certificate]:
    """The unique h : X (+)_f Y -> V with h o i = k and h o j = l."""
    X, Y, W = res.i.domain, res.j.domain, res.space
    if k.domain != X or l.domain != Y or k.codomain != l.codomain:
        raise DomainMismatch("k and l must map X and Y into a common space")
    V = k.codomain
    nk, nl = op_norm(k), op_norm(l)
    if nk > 1 or nl > 1:
        raise HypothesisFailed(f"k, l must be 1-bounded (norms {fmt(nk)}, {fmt(nl)})", value=max(nk, nl))
    gap = op_norm(l @ res.f - k)
    if gap > res.eps:
        raise HypothesisFailed(f"||l o f - k|| = {fmt(gap)} exceeds eps = {fmt(res.eps)}", value=gap)
    h = Operator(W, V, Matrix.block([[k.matrix, l.matrix]]))
    nh, wh = op_norm_with_witness(h)
    checks = (
        matrix_identity_check("h o i = k", (h @ res.i).matrix, k.matrix),
        matrix_identity_check("h o j = l", (h @ res.j).matrix, l.matrix),
        Check("||l o f - k||", gap, "<=", res.eps),
        Check("op_norm(h)", nh, "<=", ONE),
    )
    cert = Certificate("factor_through_oplus", checks)
    if not cert.ok:
        raise CertificateFailure("factorization failed its certificate", witness=wh, value=nh)
    return h, cert


def return_law(f: Operator, T: Operator, eps) -> ReturnLaw:
    """Projection-embedding pairs (i, P) : X -> W and (j, Q) : Y -> W on
    W = X (+)_f Y with P i = id, Q j = id, P j = T, Q i = f."""
    eps = Q(eps)
    X, Y = f.domain, f.codomain
    if T.domain != Y or T.codomain != X:
        raise DomainMismatch("T must map the codomain of f back to its domain")
    nf, nT = op_norm(f), op_norm(T)
    if nf > 1 or nT > 1:
        raise HypothesisFailed(f"f and T must be 1-bounded (norms {fmt(nf)}, {fmt(nT)})", value=max(nf, nT))
    delta = op_norm(T @ f - Operator.identity(X))
    if delta > eps:
        raise HypothesisFailed(f"||T o f - id|| = {fmt(delta)} exceeds eps = {fmt(eps)}", value=delta)
    eps_used = eps if eps > 0 else EPS_FLOOR
    lib = lower_isometry_bound_with_witness(f)[0]
    res = oplus_f(X, Y, f, eps_used)
    P, _ = factor_through_oplus(res, Operator.identity(X), T)
    Qm, _ = factor_through_oplus(res, f, Operator.identity(Y))
    iP, jQ = KArrow(res.i, P), KArrow(res.j, Qm)
    c1, c2 = verify_karrow(iP), verify_karrow(jQ)
    checks = (
        Check("||T o f - id||", delta, "<=", eps),
        Check("lower_isometry_bound(f)", lib, ">=", 1 - eps),
        matrix_identity_check("P o i = id", (P @ res.i).matrix, Matrix.identity(X.dim)),
        matrix_identity_check("Q o j = id", (Qm @ res.j).matrix, Matrix.identity(Y.dim)),
        matrix_identity_check("P o j = T", (P @ res.j).matrix, T.matrix),
        matrix_identity_check("Q o i = f", (Qm @ res.i).matrix, f.matrix),
    )
    notes = () if eps > 0 else (f"eps = 0 replaced by floor {fmt(EPS_FLOOR)} for the amalgam norm",)
    cert = Certificate("return_law", checks, notes).merged(
        "return_law", res.certificate, Certificate("(i,P)", c1.checks), Certificate("(j,Q)", c2.checks))
    return ReturnLaw(res.space, iP, jQ, cert, res)


def amalgamate(zx: KArrow, zy: KArrow, verify_inputs: bool = True) -> AmalgamResult:
    """Pushout of (i, P) : Z -> X and (j, Q) : Z -> Y.

    V = (X (+) Y) / {(iz, -jz)} with the quotient of the l_1-sum norm,
    presented in coordinates X (+) ker Q via [(x, y)] -> (x + iQy, L(y - jQy)).
    In these coordinates i' and P' are the coordinate inclusion and projection.
    """
    if zx.source != zy.source:
        raise DomainMismatch("the two arrows do not share a domain")
    notes = []
    if verify_inputs:
        verify_karrow(zx)
        verify_karrow(zy)
    else:
        notes.append("input arrows taken as certified by the caller")
    X, Y, Z = zx.target, zy.target, zx.source
    i, P = zx.embed.matrix, zx.proj.matrix
    j, Qm = zy.embed.matrix, zy.proj.matrix
    a, b = X.dim, Y.dim
    K, free = Qm.nullspace()
    r = len(free)
    L = (Matrix.identity(b) - (j @ Qm)).submatrix(rows=free)
    n = a + r
    iQ = i @ Qm  # a x b
    i_new = Matrix.block([[Matrix.identity(a)], [Matrix.zeros(r, a)]])
    P_new = Matrix.block([[Matrix.identity(a), Matrix.zeros(a, r)]])
    j_new = Matrix.block([[iQ], [L]])
    Q_new = Matrix.block([[j @ P, K]])
    pts = [tuple(v) + (ZERO,) * r for v in X.vertices]
    pts += [j_new.apply(u) for u in Y.vertices]
    V = PolyBanachSpace.from_points(pts, dim=n, name="V")
    xv = KArrow(Operator(X, V, i_new), Operator(V, X, P_new))
    yv = KArrow(Operator(Y, V, j_new), Operator(V, Y, Q_new))
    cx, cy = verify_karrow(xv), verify_karrow(yv)
    checks = (
        matrix_identity_check("i' o i = j' o j", i_new @ i, j_new @ j),
        matrix_identity_check("P o P' = Q o Q'", P @ P_new, Qm @ Q_new),
        matrix_identity_check("j o P = Q' o i'", j @ P, Q_new @ i_new),
        matrix_identity_check("i o Q = P' o j'", iQ, P_new @ j_new),
        Check("dim V", V.dim, "==", a + b - Z.dim),
    )
    cert = Certificate("amalgamate", checks, tuple(notes)).merged(
        "amalgamate", Certificate("(i',P')", cx.checks), Certificate("(j',Q')", cy.checks))
    return AmalgamResult(V, xv, yv, cert)


# --- rationalization ------------------------------------------------------

def _round_sym(x, d: int):
    """Nearest multiple of 1/d, rounding halves away from zero (odd symmetric)."""
    s = -1 if x < 0 else 1
    y = abs(x) * d
    return Q(s * int(gmpy2.floor(y + Q(1, 2))), d)


def round_ball(space: PolyBanachSpace, lo, hi, d: int) -> PolyBanachSpace:
    """A ball W with vertex denominators dividing ``d`` and lo*B <= W <= hi*B.

    Scaled copies t*B for t in a ladder across (lo, hi) are rounded to the
    1/d grid and accepted once both containments check out exactly.
    """
    lo, hi = Q(lo), Q(hi)
    for num in (4, 2, 6, 3, 5, 1, 7):
        t = lo + (hi - lo) * Q(num, 8)
        pts = [tuple(_round_sym(t * c, d) for c in v) for v in space.vertices]
        try:
            W = PolyBanachSpace.from_points(pts, dim=space.dim)
        except Exception:
            continue
        if all(norm(space, w) <= hi for w in W.half_vertices) and \
                all(norm(W, vscale(lo, v)) <= 1 for v in space.half_vertices):
            return W
    raise BudgetExhausted(f"denominator budget {d} is too coarse for a sandwich between {fmt(lo)} and {fmt(hi)}")


def rationalize_space(E: PolyBanachSpace, eps, max_denominator: int | None = None):
    """V with (1-eps)||x|| <= ||x||_V <= ||x|| and the pair e = id, P = (1-eps) id.

    Returns ``(V, LArrow(e, P), certificate)``.
    """
    eps = Q(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    notes = []
    if max_denominator is None or E.is_rational(max_denominator):
        V = E.renamed(f"{E.name}_rat" if E.name else "")
        notes.append("input already within the denominator budget; ball kept")
    else:
        V = round_ball(E, ONE, 1 / (1 - eps), max_denominator)
    n = E.dim
    e = Operator(E, V, Matrix.identity(n))
    P = Operator(V, E, Matrix.identity(n).scale(1 - eps))
    # ||x||_E <= c ||x||_V with c = max over V-vertices of ||w||_E; lower bound of e is 1/c
    c = max((norm(E, w) for w in V.half_vertices), default=ONE)
    checks = (
        Check("op_norm(e)", op_norm(e), "<=", ONE),
        Check("op_norm(P)", op_norm(P), "<=", ONE),
        Check("sandwich constant max ||w||_E over B_V", c, "<=", 1 / (1 - eps)),
        Check("lower_isometry_bound(e)", 1 / c, ">=", 1 - eps),
        Check("||P o e - id_E||", op_norm(P @ e - Operator.identity(E)), "<=", eps),
        Check("max denominator of V", V.max_denominator(), "<=",
              max_denominator if max_denominator is not None else V.max_denominator()),
    )
    return V, LArrow(e, P), Certificate("rationalize_space", checks, tuple(notes))


def rationalize_arrow(V: PolyBanachSpace, eP: KArrow, eps, max_denominator: int | None = None):
    """From (e, P) : V -> E build W with ||x||_E <= ||x||_W <= (1+eps)||x||_E,
    the pair (f, T) = ((1+eps)^-1 id, id) : E -> W and (i, Q) = (e, P) : V -> W.

    Returns ``(LArrow(f, T), KArrow(i, Q), certificate)``.
    """
    eps = Q(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if eP.source != V:
        raise DomainMismatch("arrow does not start at V")
    try:
        verify_karrow(eP)
    except CertificateFailure as exc:
        raise NotKArrow(f"input is not a projection-embedding pair: {exc}", witness=exc.witness) from exc
    E = eP.target
    notes = []
    if max_denominator is None or E.is_rational(max_denominator):
        G0 = E
        notes.append("E already within the denominator budget; G0 = B_E")
    else:
        G0 = round_ball(E, 1 / (1 + eps), ONE, max_denominator)
    image = [eP.embed.matrix.apply(v) for v in V.vertices]
    W = PolyBanachSpace.from_points(list(G0.vertices) + image, dim=E.dim, name="W")
    if max_denominator is not None and not W.is_rational(max_denominator):
        notes.append(f"W carries denominators up to {W.max_denominator()} from the image of B_V")
    n = E.dim
    T = Operator(W, E, Matrix.identity(n))
    f = Operator(E, W, Matrix.identity(n).scale(1 / (1 + eps)))
    i = eP.embed.retarget(codomain=W)
    Qm = eP.proj.retarget(domain=W)
    iQ = KArrow(i, Qm)
    ck = verify_karrow(iQ)
    checks = (
        Check("op_norm(T)  [||x||_E <= ||x||_W]", op_norm(T), "<=", ONE),
        Check("op_norm(f)  [||x||_W <= (1+eps)||x||_E]", op_norm(f), "<=", ONE),
        matrix_identity_check("P o T = Q", (eP.proj @ T).matrix, Qm.matrix),
        Check("||f o e - i||", op_norm(f @ eP.embed - i), "<=", eps),
    )
    cert = Certificate("rationalize_arrow", checks, tuple(notes)).merged("rationalize_arrow",
                                                                       Certificate("(i,Q)", ck.checks))
    return LArrow(f, T), iQ, cert
