"""Independent verification machinery.

Nothing here participates in set propagation: these are the cross-checks.
Feasible-factor sampling, witness-recording simulators, a brute-force
membership test for low dimensions, an interval-arithmetic single-step
baseline, and point-cloud sampling for 2-D projections.

All randomness flows through a caller-supplied ``numpy.random.Generator``
(PCG64 via ``numpy.random.default_rng(seed)``), so traces are reproducible
across platforms; artifact writers record the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, Infeasible, ShapeMismatch
from .factors import FactorAssignment
from .learning import MonomialBasis
from .sets import (
    CPZ,
    CPMZ,
    FEASIBILITY_TOL,
    constraint_residual_values,
    eval_point_values,
    _monomials_single,
)

# ---------------------------------------------------------------------------
# feasible-factor sampling


def _residual_and_jacobian(S: CPZ | CPMZ, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked constraint defect r and its Jacobian at the given factor values."""
    if isinstance(S, CPZ):
        terms = S.A  # (rows, q)
        rhs = S.b
    else:
        terms = S.vec_constraints().T  # (nc*na, q)
        rhs = S.B.flatten(order="F")
    R = np.asarray(S.R, dtype=np.int64)
    p, q = R.shape
    powers = np.power(vals[:, None], R)  # (p, q)
    mono = np.prod(powers, axis=0) if p else np.ones(q)
    r = terms @ mono - rhs
    jac = np.zeros((rhs.shape[0], p))
    for k in range(p):
        others = np.prod(np.delete(powers, k, axis=0), axis=0) if p > 1 else np.ones(q)
        ek = R[k]
        deriv = np.where(ek > 0, ek * np.power(vals[k], np.maximum(ek - 1, 0)), 0.0)
        jac[:, k] = terms @ (others * deriv)
    return r, jac


def _refine_to_constraints(S: CPZ | CPMZ, vals: np.ndarray, iters: int, tol: float) -> np.ndarray:
    """Projected Gauss-Newton on the residual norm, clipped to the factor box."""
    vals = vals.copy()
    r, jac = _residual_and_jacobian(S, vals)
    best = np.linalg.norm(r)
    for _ in range(iters):
        if best <= tol:
            break
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        scale = 1.0
        improved = False
        for _ in range(30):  # backtracking with step shrink 0.5
            cand = np.clip(vals + scale * step, -1.0, 1.0)
            r_cand, jac_cand = _residual_and_jacobian(S, cand)
            norm_cand = np.linalg.norm(r_cand)
            if norm_cand < best:
                vals, r, jac, best = cand, r_cand, jac_cand, norm_cand
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return vals


def sample_feasible(
    S: CPZ | CPMZ,
    rng: np.random.Generator,
    budget: int = 1000,
    refine_iters: int = 200,
    tol: float = FEASIBILITY_TOL,
) -> FactorAssignment:
    """A factor assignment with constraint residual <= tol.

    Unconstrained sets sample uniformly.  Constrained sets use rejection
    restarts refined by projected local least squares; exhausting the budget
    raises Infeasible, which is inconclusive for emptiness.
    """
    p = S.num_factors
    constrained = (S.num_constraints if isinstance(S, CPZ) else S.B.size) > 0
    if not constrained:
        return FactorAssignment(dict(zip(S.ids, rng.uniform(-1.0, 1.0, p))))
    for _ in range(budget):
        vals = _refine_to_constraints(S, rng.uniform(-1.0, 1.0, p), refine_iters, tol)
        if constraint_residual_values(S, vals) <= tol:
            return FactorAssignment(dict(zip(S.ids, vals)))
    raise Infeasible(f"no feasible assignment found within {budget} restarts")


def sample_feasible_values(S, rng, **kwargs) -> np.ndarray:
    """Like :func:`sample_feasible` but returning values in id order."""
    return sample_feasible(S, rng, **kwargs).values_for(S.ids)


# ---------------------------------------------------------------------------
# witness traces


@dataclass
class WitnessTrace:
    """A rollout together with every factor value that produced it.

    ``noise_values`` holds one vector per step in the factor order of the
    noise set; ``initial_values`` / ``input_values`` are None when the
    corresponding quantity was a fixed point rather than a set sample.
    Replaying the recorded values through the same evaluation code
    reproduces ``states`` bit-for-bit.
    """

    states: list[np.ndarray]
    initial_values: np.ndarray | None
    input_values: list[np.ndarray | None]
    noise_values: list[np.ndarray]
    seed: int | None = None
    noise_matrix_values: dict[str, np.ndarray] = field(default_factory=dict)

    def to_json(self) -> str:
        def arr(a):
            return None if a is None else [float(v) for v in np.asarray(a).reshape(-1)]

        return json.dumps(
            {
                "states": [arr(s) for s in self.states],
                "initial_values": arr(self.initial_values),
                "input_values": [arr(v) for v in self.input_values],
                "noise_values": [arr(v) for v in self.noise_values],
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "WitnessTrace":
        data = json.loads(text)
        conv = lambda v: None if v is None else np.array(v, dtype=float)
        return cls(
            states=[np.array(s, dtype=float) for s in data["states"]],
            initial_values=conv(data["initial_values"]),
            input_values=[conv(v) for v in data["input_values"]],
            noise_values=[np.array(v, dtype=float) for v in data["noise_values"]],
            seed=data.get("seed"),
        )


def save_trace(path, trace: WitnessTrace) -> None:
    Path(path).write_text(trace.to_json())


def load_trace(path) -> WitnessTrace:
    return WitnessTrace.from_json(Path(path).read_text())


def _draw(value, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray | None]:
    """Fixed vectors pass through; sets are sampled with the values recorded."""
    if isinstance(value, CPZ):
        if value.num_constraints:
            vals = sample_feasible_values(value, rng)
        else:
            vals = rng.uniform(-1.0, 1.0, value.num_factors)
        return eval_point_values(value, vals), vals
    return np.asarray(value, dtype=float).reshape(-1), None


def simulate_lti(Phi, Gamma, x0, inputs, Zw: CPZ, rng: np.random.Generator, seed: int | None = None) -> WitnessTrace:
    """Roll out x+ = Phi x + Gamma u + w with every draw recorded."""
    Phi = np.asarray(Phi, dtype=float)
    Gamma = np.asarray(Gamma, dtype=float)
    state, init_vals = _draw(x0, rng)
    states = [state]
    input_vals: list[np.ndarray | None] = []
    noise_vals: list[np.ndarray] = []
    for u_spec in inputs:
        u, uv = _draw(u_spec, rng)
        w_sigma = rng.uniform(-1.0, 1.0, Zw.num_factors)
        w = eval_point_values(Zw, w_sigma)
        state = Phi @ states[-1] + Gamma @ u + w
        states.append(state)
        input_vals.append(uv)
        noise_vals.append(w_sigma)
    return WitnessTrace(states, init_vals, input_vals, noise_vals, seed)


def replay_lti(trace: WitnessTrace, Phi, Gamma, x0, inputs, Zw: CPZ) -> list[np.ndarray]:
    """Recompute the rollout from recorded factors with identical arithmetic."""
    Phi = np.asarray(Phi, dtype=float)
    Gamma = np.asarray(Gamma, dtype=float)
    state = (
        eval_point_values(x0, trace.initial_values)
        if isinstance(x0, CPZ)
        else np.asarray(x0, dtype=float).reshape(-1)
    )
    states = [state]
    for k, u_spec in enumerate(inputs):
        u = (
            eval_point_values(u_spec, trace.input_values[k])
            if isinstance(u_spec, CPZ)
            else np.asarray(u_spec, dtype=float).reshape(-1)
        )
        w = eval_point_values(Zw, trace.noise_values[k])
        state = Phi @ states[-1] + Gamma @ u + w
        states.append(state)
    return states


def simulate_poly(
    Theta, basis: MonomialBasis, x0, inputs, Zw: CPZ, rng: np.random.Generator, seed: int | None = None
) -> WitnessTrace:
    """Roll out x+ = Theta h([x; u]) + w with every draw recorded."""
    Theta = np.asarray(Theta, dtype=float)
    state, init_vals = _draw(x0, rng)
    states = [state]
    input_vals: list[np.ndarray | None] = []
    noise_vals: list[np.ndarray] = []
    for u_spec in inputs:
        u, uv = _draw(u_spec, rng)
        w_sigma = rng.uniform(-1.0, 1.0, Zw.num_factors)
        w = eval_point_values(Zw, w_sigma)
        state = Theta @ basis.evaluate(np.concatenate([states[-1], u])) + w
        states.append(state)
        input_vals.append(uv)
        noise_vals.append(w_sigma)
    return WitnessTrace(states, init_vals, input_vals, noise_vals, seed)


def replay_poly(trace: WitnessTrace, Theta, basis: MonomialBasis, x0, inputs, Zw: CPZ) -> list[np.ndarray]:
    Theta = np.asarray(Theta, dtype=float)
    state = (
        eval_point_values(x0, trace.initial_values)
        if isinstance(x0, CPZ)
        else np.asarray(x0, dtype=float).reshape(-1)
    )
    states = [state]
    for k, u_spec in enumerate(inputs):
        u = (
            eval_point_values(u_spec, trace.input_values[k])
            if isinstance(u_spec, CPZ)
            else np.asarray(u_spec, dtype=float).reshape(-1)
        )
        w = eval_point_values(Zw, trace.noise_values[k])
        state = Theta @ basis.evaluate(np.concatenate([states[-1], u])) + w
        states.append(state)
    return states


# ---------------------------------------------------------------------------
# brute-force membership on a factor grid


def _grid_axes(p: int, resolution: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, resolution)


def _as_vector_set(S: CPZ | CPMZ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flattened (c, G, E, A, b, R) view; matrix sets are vectorized column-major."""
    if isinstance(S, CPZ):
        return S.c, S.G, np.asarray(S.E, np.int64), S.A, S.b, np.asarray(S.R, np.int64)
    c = S.C.flatten(order="F")
    G = S.vec_generators().T
    A = S.vec_constraints().T
    b = S.B.flatten(order="F")
    return c, G, np.asarray(S.E, np.int64), A, b, np.asarray(S.R, np.int64)


def _grid_scan(S: CPZ | CPMZ, resolution: int, budget: int):
    """Yield (points, residuals) over the full factor grid, chunked."""
    c, G, E, A, b, R = _as_vector_set(S)
    p = E.shape[0]
    if p > 4:
        raise BudgetExceeded(f"{p} factors exceed the brute-force limit of 4")
    total = resolution**p if p else 1
    if total > budget:
        raise BudgetExceeded(f"{total} grid points exceed budget {budget}")
    axes = [_grid_axes(p, resolution)] * p
    if p == 0:
        yield c[:, None], np.array([np.linalg.norm(A @ np.ones(A.shape[1]) - b) if A.size else 0.0])
        return
    mesh = np.meshgrid(*axes, indexing="ij")
    V = np.stack([m.reshape(-1) for m in mesh])  # (p, total)
    chunk = max(1, min(total, 1_000_000))
    for start in range(0, total, chunk):
        vals = V[:, start : start + chunk]
        monoE = np.ones((E.shape[1], vals.shape[1]))
        for k in range(p):
            monoE *= np.power(vals[k][None, :], E[k][:, None])
        points = c[:, None] + G @ monoE
        if A.shape[1]:
            monoR = np.ones((R.shape[1], vals.shape[1]))
            for k in range(p):
                monoR *= np.power(vals[k][None, :], R[k][:, None])
            residuals = np.linalg.norm(A @ monoR - b[:, None], axis=0)
        else:
            residuals = np.zeros(vals.shape[1])
        yield points, residuals


def membership_bruteforce(
    S: CPZ | CPMZ,
    point,
    tol: float,
    resolution: int = 201,
    budget: int = 2**27,
    feasibility_tol: float = FEASIBILITY_TOL,
) -> bool:
    """Grid search for a feasible assignment evaluating within tol of point.

    Resolution-limited: a False answer near the boundary is inconclusive.
    """
    target = np.asarray(point, dtype=float).reshape(-1)
    for points, residuals in _grid_scan(S, resolution, budget):
        feasible = residuals <= feasibility_tol
        if not feasible.any():
            continue
        dist = np.linalg.norm(points[:, feasible] - target[:, None], axis=0)
        if (dist <= tol).any():
            return True
    return False


def min_residual_grid(S: CPZ | CPMZ, resolution: int = 201, budget: int = 2**27) -> float:
    """Minimum constraint residual over the factor grid (emptiness indicator)."""
    best = np.inf
    for _, residuals in _grid_scan(S, resolution, budget):
        best = min(best, float(residuals.min()))
    return best


# ---------------------------------------------------------------------------
# interval arithmetic baseline (single propagation step)


def _interval_pow(lo: float, hi: float, e: int) -> tuple[float, float]:
    if e == 0:
        return 1.0, 1.0
    if e % 2 == 1:
        return lo**e, hi**e
    if lo >= 0:
        return lo**e, hi**e
    if hi <= 0:
        return hi**e, lo**e
    return 0.0, max(lo**e, hi**e)


def _interval_mul(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(products), max(products)


def interval_monomials(z_lo: np.ndarray, z_hi: np.ndarray, basis: MonomialBasis) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise interval enclosure of h(z) over a box."""
    lo = np.zeros(basis.size)
    hi = np.zeros(basis.size)
    for j, exps in enumerate(basis.exponents):
        acc = (1.0, 1.0)
        for var, e in enumerate(exps):
            if e:
                acc = _interval_mul(acc, _interval_pow(float(z_lo[var]), float(z_hi[var]), int(e)))
        lo[j], hi[j] = acc
    return lo, hi


def interval_baseline_poly(
    theta_lo,
    theta_hi,
    z_lo,
    z_hi,
    basis: MonomialBasis,
    w_lo,
    w_hi,
) -> tuple[np.ndarray, np.ndarray]:
    """One interval-arithmetic propagation step: [Theta] * h([z]) + [w].

    Used only as a conservatism yardstick; always an outer box.
    """
    theta_lo = np.asarray(theta_lo, dtype=float)
    theta_hi = np.asarray(theta_hi, dtype=float)
    if theta_lo.shape != theta_hi.shape:
        raise ShapeMismatch("interval matrix bounds must share a shape")
    h_lo, h_hi = interval_monomials(np.asarray(z_lo, float), np.asarray(z_hi, float), basis)
    n_x = theta_lo.shape[0]
    out_lo = np.array(w_lo, dtype=float).copy()
    out_hi = np.array(w_hi, dtype=float).copy()
    for i in range(n_x):
        for j in range(basis.size):
            lo, hi = _interval_mul((theta_lo[i, j], theta_hi[i, j]), (h_lo[j], h_hi[j]))
            out_lo[i] += lo
            out_hi[i] += hi
    return out_lo, out_hi


# ---------------------------------------------------------------------------
# projection point clouds


def boundary_cloud(
    S: CPZ,
    dims: Sequence[int],
    samples: int,
    rng: np.random.Generator,
    feasible_budget: int = 50,
) -> np.ndarray:
    """Sampled feasible evaluations projected to two coordinates.

    Half the draws push a random subset of factors to +/-1 so hull estimates
    approach corners quickly.  Visualization-grade only: the cloud is never
    used for soundness claims.
    """
    if len(dims) != 2:
        raise ShapeMismatch("exactly two projection dimensions required")
    if samples < 100:
        raise ShapeMismatch("at least 100 samples required")
    p = S.num_factors
    constrained = S.num_constraints > 0
    points = []
    if not constrained:
        V = rng.uniform(-1.0, 1.0, (p, samples))
        snap = rng.random((p, samples)) < 0.5
        signs = np.where(rng.random((p, samples)) < 0.5, -1.0, 1.0)
        half = samples // 2
        V[:, half:] = np.where(snap[:, half:], signs[:, half:], V[:, half:])
        from .sets import eval_point_many

        pts = eval_point_many(S, V)
        return pts[list(dims), :].T
    for _ in range(samples):
        try:
            vals = sample_feasible_values(S, rng, budget=feasible_budget)
        except Infeasible:
            continue
        points.append(eval_point_values(S, vals)[list(dims)])
    return np.array(points) if points else np.zeros((0, 2))


def cloud_hull_area(points: np.ndarray) -> float:
    """Area of the convex hull of a 2-D point cloud (0 for degenerate clouds)."""
    from scipy.spatial import ConvexHull, QhullError

    if points.shape[0] < 3:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0
