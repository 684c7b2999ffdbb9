"""Seeded generators of random rational spaces, operators and arrows."""
import random

from banach_forge.category import KArrow, coordinate_arrow
from banach_forge.rational import ZERO, Matrix, Q
from banach_forge.spaces import Operator, PolyBanachSpace, op_norm


def rat(rng, lo=-2, hi=2, den=4):
    d = rng.randint(1, den)
    return Q(rng.randint(lo * d, hi * d), d)


def random_space(rng, dim, npts=None, den=4):
    """Symmetric hull of random points plus scaled unit vectors (keeps it full-dimensional)."""
    if dim == 0:
        return PolyBanachSpace.trivial()
    npts = rng.randint(1, 4) if npts is None else npts
    pts = []
    for k in range(dim):
        e = [ZERO] * dim
        e[k] = Q(rng.randint(1, 4), rng.randint(1, 2))
        pts.append(e)
    for _ in range(npts):
        p = [rat(rng, den=den) for _ in range(dim)]
        if any(p):
            pts.append(p)
    return PolyBanachSpace.from_points(pts, dim=dim)


def random_matrix(rng, rows, cols, den=3):
    return Matrix([[rat(rng, den=den) for _ in range(cols)] for _ in range(rows)], ncols=cols)


def random_invertible(rng, n):
    while True:
        A = random_matrix(rng, n, n)
        if A.rank() == n:
            return A


def one_bounded(rng, X, Y):
    """A random operator X -> Y scaled to norm exactly 1 (or zero)."""
    T = Operator(X, Y, random_matrix(rng, Y.dim, X.dim))
    n = op_norm(T)
    return T.scale(1 / n) if n else T


def random_karrow(rng, Z, extra):
    """(e, P) : Z -> X with dim X = dim Z + extra, in a random basis of X.

    The ball of X in adapted coordinates is conv({(v,0)} u {(x_i, z_i)})
    with x_i in B_Z, so [I 0] is 1-bounded and [I;0] is isometric; a random
    change of basis A then hides the coordinate structure.
    """
    k, n = Z.dim, Z.dim + extra
    pts = [tuple(v) + (ZERO,) * extra for v in Z.vertices]
    for j in range(extra):
        z = [ZERO] * extra
        z[j] = Q(rng.randint(1, 3), rng.randint(1, 2))
        t = Q(rng.randint(0, 2), 2)
        x = tuple(t * c for c in rng.choice(Z.vertices)) if k else ()
        pts.append(x + tuple(z))
    for _ in range(rng.randint(0, 2)):
        if not extra:
            break
        t = Q(rng.randint(0, 3), 3)
        x = tuple(t * c for c in rng.choice(Z.vertices)) if k else ()
        pts.append(x + tuple(rat(rng, -1, 1, 2) for _ in range(extra)))
    X0 = PolyBanachSpace.from_points(pts, dim=n)
    base = coordinate_arrow(Z, X0)
    A = random_invertible(rng, n) if n else Matrix.identity(0)
    X = PolyBanachSpace.from_points([A.apply(v) for v in X0.vertices], dim=n)
    Ainv = A.inverse() if n else A
    return KArrow(Operator(Z, X, A @ base.embed.matrix), Operator(X, Z, base.proj.matrix @ Ainv))


def random_eps_isometry(rng, X, eps, extra=None):
    """(f, T, e, P): f an eps-isometry X -> Y = (1 - s) e + s' N, T = P.

    With s = eps/2 and ||s' N|| = s, ||f|| <= 1 and lower bound >= 1 - eps.
    """
    extra = rng.randint(0, 2) if extra is None else extra
    eP = random_karrow(rng, X, extra)
    e, P = eP.embed, eP.proj
    Y = e.codomain
    s = Q(eps) / 2
    N = Operator(X, Y, random_matrix(rng, Y.dim, X.dim))
    nN = op_norm(N)
    f = e.scale(1 - s) + (N.scale(s / nN) if nN else N)
    return f, P, e, P


def rng_for(*key):
    return random.Random(":".join(str(k) for k in key))





def random_factor_pair(rng, f, eps, codim=None):
    """(k, l) into a random V with ||k||, ||l|| <= 1 and ||l f - k|| <= eps.

    k = (1 - t) l f + t K' with t = eps/2 and ||K'|| <= 1 gives ||l f - k|| <= 2t.
    """
    X, Y = f.domain, f.codomain
    V = random_space(rng, rng.randint(1, 3) if codim is None else codim)
    l = one_bounded(rng, Y, V)
    K = one_bounded(rng, X, V)
    t = Q(eps) / 2
    return (l @ f).scale(1 - t) + K.scale(t), l
