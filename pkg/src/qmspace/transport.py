"""Exact optimal transport with asymmetric costs on finite spaces.

The order-p transport distance uses the asymmetric cost d(x, y)^p and is
itself a quasi-metric on probability vectors.  Solves are exact linear
programs with a post-solve complementary-slackness certificate; order-1
problems also expose the Kantorovich-Rubinstein dual over asymmetric
1-Lipschitz potentials f(y) - f(x) <= d(x, y).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, lil_matrix
from scipy.sparse.csgraph import dijkstra

from .core import MeasuredSpace, QuasiMetricSpace, SpaceError

__all__ = [
    "TransportProblem",
    "Coupling",
    "DynamicalPlan",
    "Interpolation",
    "BoundReport",
    "wasserstein",
    "kr_dual",
    "asymmetry_bound_check",
    "dynamical_plan",
    "interpolate",
    "geodesy_check",
    "default_hop_radius",
]

MARGINAL_TOL = 1e-9
MASS_TOL = 1e-12
DUALITY_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class TransportProblem:
    """Source/target probability vectors over one space, with order p."""

    space: QuasiMetricSpace
    mu: np.ndarray
    nu: np.ndarray
    p: float = 1.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        n = self.space.n
        if mu.shape != (n,) or nu.shape != (n,):
            raise SpaceError("marginals must match the space size")
        if np.any(mu < 0) or np.any(nu < 0):
            raise SpaceError("marginals must be nonnegative")
        if abs(mu.sum() - 1.0) > MASS_TOL or abs(nu.sum() - 1.0) > MASS_TOL:
            raise SpaceError("marginals must sum to 1")
        if self.p < 1:
            raise SpaceError("order p must be >= 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)


@dataclass(frozen=True, eq=False)
class Coupling:
    """Nonnegative joint matrix with prescribed marginals."""

    matrix: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.matrix, dtype=float)
        if np.any(pi < -MARGINAL_TOL):
            raise SpaceError("coupling must be nonnegative")
        if (np.abs(pi.sum(axis=1) - self.mu).max() > MARGINAL_TOL
                or np.abs(pi.sum(axis=0) - self.nu).max() > MARGINAL_TOL):
            raise SpaceError("coupling marginals do not match")
        object.__setattr__(self, "matrix", np.maximum(pi, 0.0))


@dataclass(frozen=True, eq=False)
class DynamicalPlan:
    """Coupling plus a near-shortest directed chain for each support pair."""

    space: QuasiMetricSpace
    coupling: Coupling
    chains: dict  # (i, j) -> tuple of point indices
    chain_tol: float


@dataclass(frozen=True, eq=False)
class Interpolation:
    """Probability vectors mu_t along a dynamical plan."""

    ts: tuple
    measures: tuple  # of np.ndarray


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tolerance: float
    details: dict = field(default_factory=dict)


def _solve_lp(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray):
    """Exact transportation LP; returns (optimal value, plan matrix)."""
    n, m = cost.shape
    keep_r = np.nonzero(mu > 0)[0]
    keep_c = np.nonzero(nu > 0)[0]
    c = cost[np.ix_(keep_r, keep_c)]
    a, b = mu[keep_r], nu[keep_c]
    nr, nc = len(a), len(b)

    nvar = nr * nc
    eq = lil_matrix((nr + nc - 1, nvar))
    rhs = np.empty(nr + nc - 1)
    for i in range(nr):
        eq[i, i * nc:(i + 1) * nc] = 1.0
        rhs[i] = a[i]
    for j in range(nc - 1):  # last column constraint is redundant
        eq[nr + j, j::nc] = 1.0
        rhs[nr + j] = b[j]
    res = linprog(
        c.ravel(), A_eq=csr_matrix(eq), b_eq=rhs,
        bounds=(0, None), method="highs",
    )
    if not res.success:
        raise SpaceError(f"transport LP failed: {res.message}")
    plan_small = res.x.reshape(nr, nc)

    # complementary-slackness certificate from the equality duals
    duals = np.asarray(res.eqlin.marginals)
    u = duals[:nr]
    v = np.concatenate([duals[nr:], [0.0]])
    reduced = c - u[:, None] - v[None, :]
    if reduced.min() < -1e-7:
        raise SpaceError("LP optimality certificate failed: negative reduced cost")
    if np.abs(plan_small * reduced).max() > 1e-6:
        raise SpaceError("LP optimality certificate failed: slackness violated")

    plan = np.zeros_like(cost)
    plan[np.ix_(keep_r, keep_c)] = plan_small
    return float(res.fun), plan


def wasserstein(prob: TransportProblem) -> tuple[float, Coupling]:
    """Order-p transport distance and an optimal coupling (exact LP)."""
    if np.allclose(prob.mu, prob.nu, atol=MASS_TOL):
        return 0.0, Coupling(np.diag(prob.mu), prob.mu, prob.nu)
    cost = prob.space.dist ** prob.p
    value, plan = _solve_lp(cost, prob.mu, prob.nu)
    # clean tiny negative / marginal drift from the solver
    plan = np.maximum(plan, 0.0)
    return float(max(value, 0.0) ** (1.0 / prob.p)), Coupling(plan, prob.mu, prob.nu)


def kr_dual(prob: TransportProblem) -> tuple[float, np.ndarray]:
    """Kantorovich-Rubinstein dual of an order-1 problem.

    Maximizes sum(psi * nu) - sum(psi * mu) over potentials with
    psi[j] - psi[i] <= d(i, j); strong duality makes the optimum equal
    the primal distance.
    """
    if prob.p != 1:
        raise SpaceError("the Kantorovich-Rubinstein dual requires p = 1")
    n = prob.space.n
    d = prob.space.dist
    rows = []
    cols = []
    vals = []
    ub = []
    r = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rows += [r, r]
            cols += [j, i]
            vals += [1.0, -1.0]
            ub.append(d[i, j])
            r += 1
    A_ub = csr_matrix((vals, (rows, cols)), shape=(r, n))
    obj = -(prob.nu - prob.mu)  # linprog minimizes
    res = linprog(
        obj, A_ub=A_ub, b_ub=np.asarray(ub),
        bounds=(None, None), method="highs",
    )
    if not res.success:
        raise SpaceError(f"dual LP failed: {res.message}")
    psi = np.asarray(res.x)
    psi -= psi[0]  # fix the constant gauge
    return float(-res.fun), psi


def asymmetry_bound_check(mspace: MeasuredSpace, mu, nu, p: float, q: float,
                          theta_fn, tol: float = 1e-9) -> BoundReport:
    """Check the reversed-order transport bound against the theta bound.

    Compares W_q(nu, mu) with Theta(W_p(delta_star, mu) + W_p(mu, nu))
    times W_p(mu, nu).  Requires 1 <= q <= p and a basepoint.
    """
    if q > p:
        raise SpaceError("requires q <= p")
    if mspace.basepoint is None:
        raise SpaceError("measured space needs a basepoint")
    space = mspace.space
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    delta = np.zeros(space.n)
    delta[mspace.basepoint] = 1.0

    w_p_star_mu, _ = wasserstein(TransportProblem(space, delta, mu, p))
    w_p_mu_nu, _ = wasserstein(TransportProblem(space, mu, nu, p))
    w_q_nu_mu, _ = wasserstein(TransportProblem(space, nu, mu, q))

    theta = float(theta_fn(w_p_star_mu + w_p_mu_nu))
    rhs = theta * w_p_mu_nu
    slack = rhs - w_q_nu_mu
    return BoundReport(
        lhs=w_q_nu_mu, rhs=rhs, slack=slack, passed=slack >= -tol,
        tolerance=tol,
        details={
            "theta": theta,
            "w_p_star_mu": w_p_star_mu,
            "w_p_mu_nu": w_p_mu_nu,
            "p": p,
            "q": q,
        },
    )


def default_hop_radius(space: QuasiMetricSpace) -> float:
    """1.5x the largest nearest-out-neighbor distance: every point can hop."""
    d = space.dist + np.diag(np.full(space.n, np.inf))
    return 1.5 * float(d.min(axis=1).max())


def dynamical_plan(space: QuasiMetricSpace, coupling: Coupling,
                   chain_tol: float = 0.5,
                   hop_radius: float | None = None) -> DynamicalPlan:
    """Attach a near-shortest directed chain to every support pair.

    Chains live on the hop graph of forward distances below hop_radius;
    a pair whose best chain exceeds d(i, j) * (1 + chain_tol) means the
    sampling is not approximately geodesic at this resolution and raises.
    """
    if hop_radius is None:
        hop_radius = default_hop_radius(space)
    d = space.dist
    n = space.n
    hops = (d < hop_radius) & ~np.eye(n, dtype=bool)
    graph = csr_matrix(np.where(hops, d, 0.0))

    pi = coupling.matrix
    sources = np.nonzero(pi.sum(axis=1) > MASS_TOL)[0]
    dist_out, pred = dijkstra(graph, directed=True,
                              indices=sources, return_predecessors=True)
    chains = {}
    for si, i in enumerate(sources):
        for j in np.nonzero(pi[i] > MASS_TOL)[0]:
            if i == j:
                chains[(int(i), int(j))] = (int(i),)
                continue
            length = dist_out[si, j]
            if not np.isfinite(length) or length > d[i, j] * (1 + chain_tol) + MASS_TOL:
                raise SpaceError(
                    f"no chain from {i} to {j} within tolerance: best "
                    f"{length:.6g} vs direct {d[i, j]:.6g}"
                )
            path = [int(j)]
            while path[-1] != i:
                path.append(int(pred[si, path[-1]]))
            chains[(int(i), int(j))] = tuple(reversed(path))
    return DynamicalPlan(space, coupling, chains, chain_tol)


def interpolate(plan: DynamicalPlan, ts) -> Interpolation:
    """Push the plan mass along chains: mu_t sits at the chain vertex
    whose cumulative length is nearest to t * (total length), ties to
    the earlier vertex."""
    ts = [float(t) for t in ts]
    for t in ts:
        if not 0.0 <= t <= 1.0:
            raise SpaceError(f"interpolation time {t} outside [0, 1]")
    n = plan.space.n
    d = plan.space.dist
    measures = [np.zeros(n) for _ in ts]
    pi = plan.coupling.matrix
    for (i, j), chain in plan.chains.items():
        mass = pi[i, j]
        if len(chain) == 1:
            for m in measures:
                m[i] += mass
            continue
        cum = np.concatenate(
            [[0.0], np.cumsum([d[a, b] for a, b in zip(chain, chain[1:])])]
        )
        total = cum[-1]
        for k, t in enumerate(ts):
            idx = int(np.argmin(np.abs(cum - t * total)))
            measures[k][chain[idx]] += mass
    return Interpolation(tuple(ts), tuple(measures))


def geodesy_check(space: QuasiMetricSpace, interp: Interpolation,
                  p: float = 2.0) -> BoundReport:
    """Residual of the constant-speed property along an interpolation.

    Compares W_p(mu_s, mu_t) with (t - s) * W_p(mu_0, mu_1) over all
    sampled time pairs; reports the worst absolute and relative residual.
    """
    ts = interp.ts
    ms = interp.measures
    order = np.argsort(ts)
    ts = [ts[i] for i in order]
    ms = [ms[i] for i in order]
    base, _ = wasserstein(TransportProblem(space, ms[0], ms[-1], p))
    span = ts[-1] - ts[0]
    worst = 0.0
    for a in range(len(ts)):
        for b in range(a + 1, len(ts)):
            w, _ = wasserstein(TransportProblem(space, ms[a], ms[b], p))
            frac = (ts[b] - ts[a]) / span if span > 0 else 0.0
            worst = max(worst, abs(w - frac * base))
    rel = worst / base if base > 0 else 0.0
    return BoundReport(
        lhs=worst, rhs=0.0, slack=-worst, passed=True, tolerance=0.0,
        details={"abs_residual": worst, "rel_residual": rel, "w_endpoints": base},
    )
