"""Independent brute-force oracles shared by the test modules.

Deliberately dumb implementations (plain loops, subset enumeration)
whose correctness is obvious by inspection; the library must agree with
them on small instances.
"""

import itertools

import numpy as np


def polytope_vertex_minimum(cost, mu, nu):
    """Transportation-polytope oracle: every vertex of the polytope is a
    basic solution supported on a spanning tree of the complete
    bipartite support graph; enumerate them all and take the best cost.
    """
    rows = [i for i in range(len(mu)) if mu[i] > 0]
    cols = [j for j in range(len(nu)) if nu[j] > 0]
    m, n = len(rows), len(cols)
    edges = list(itertools.product(range(m), range(n)))
    best = np.inf
    for tree in itertools.combinations(edges, m + n - 1):
        deg = {}
        for i, j in tree:
            deg[("r", i)] = deg.get(("r", i), 0) + 1
            deg[("c", j)] = deg.get(("c", j), 0) + 1
        if len(deg) != m + n:
            continue  # not spanning
        need_r = {i: mu[rows[i]] for i in range(m)}
        need_c = {j: nu[cols[j]] for j in range(n)}
        remaining = list(tree)
        plan = {}
        ok = True
        while remaining:
            for k, (i, j) in enumerate(remaining):
                if deg[("r", i)] == 1:
                    x = need_r[i]
                    plan[(i, j)] = x
                    need_c[j] -= x
                    need_r[i] = 0.0
                    break
                if deg[("c", j)] == 1:
                    x = need_c[j]
                    plan[(i, j)] = x
                    need_r[i] -= x
                    need_c[j] = 0.0
                    break
            else:
                ok = False  # a cycle survived: not a tree
                break
            deg[("r", i)] -= 1
            deg[("c", j)] -= 1
            remaining.pop(k)
        if not ok or any(v < -1e-12 for v in plan.values()):
            continue
        val = sum(v * cost[rows[i], cols[j]] for (i, j), v in plan.items())
        best = min(best, val)
    return best


def brute_iso_defect(X, Y):
    """Enumerate every map X -> Y with plain loops."""
    best = np.inf
    for combo in itertools.product(range(Y.n), repeat=X.n):
        dis = max(
            abs(Y.dist[combo[i], combo[j]] - X.dist[i, j])
            for i in range(X.n) for j in range(X.n)
        )
        cover = max(
            min(Y.dist[combo[i], y] for i in range(X.n))
            for y in range(Y.n)
        )
        best = min(best, max(dis, cover))
    return best


def brute_prokhorov(space, mu, nu, tol=1e-9):
    """Subset-enumeration oracle for the Prokhorov distance (n <= 10)."""
    n = space.n
    d = space.dist
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    subsets = [
        [i for i in range(n) if mask >> i & 1] for mask in range(1, 1 << n)
    ]

    def feasible(eps):
        for A in subsets:
            fat = set()
            for a in A:
                fat.update(np.nonzero(d[a] < eps)[0])
            if sum(mu[i] for i in A) > sum(nu[i] for i in fat) + eps + tol:
                return False
            if sum(nu[i] for i in A) > sum(mu[i] for i in fat) + eps + tol:
                return False
        return True

    lo, hi = 0.0, max(float(d.max()), float(mu.sum()), float(nu.sum()), tol)
    if not feasible(hi):
        hi *= 2
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi
