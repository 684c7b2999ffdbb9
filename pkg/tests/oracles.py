"""Independent brute-force oracles, kept free of the package's LP and hull code."""
import itertools

from banach_forge.rational import Matrix, Q, dot


def brute_facets(vertices, dim):
    """Facet normals a (a . x <= 1) from every dim-subset of vertices spanning a supporting hyperplane."""
    out = set()
    for sub in itertools.combinations(vertices, dim):
        M = Matrix(list(sub), ncols=dim)
        if M.rank() < dim:
            continue
        a = M.inverse().apply([1] * dim)  # rows: v . a = 1
        if all(dot(a, v) <= 1 for v in vertices):
            out.add(tuple(a))
    return out


def facet_norm(facets, x):
    """Gauge as the largest facet functional, the ray from 0 leaves the ball through that facet."""
    return max([dot(a, x) for a in facets] + [Q(0)])
