"""Acceptance verification suite.

Each criterion is an independent check with its own seeded randomness; the
suite is shared between the pytest acceptance module and the CLI ``verify``
experiment.  The ``CZREACH_THREADS`` environment variable caps the worker
pool used by :func:`run_all`.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import experiments as ex
from .algebra import (
    add_exact,
    cartesian_exact,
    hadamard_exact,
    intersect_cpmz,
    map_linear,
    merge_id,
    mul_cpmz_cpz,
    pow_exact,
    project,
    reduce as reduce_order,
)
from .errors import Infeasible
from .factors import FactorAssignment, fresh_ids
from .learning import concat_noise, model_set_lti, model_set_poly, refine
from .oracle import (
    boundary_cloud,
    cloud_hull_area,
    interval_baseline_poly,
    membership_bruteforce,
    min_residual_grid,
    sample_feasible,
    simulate_lti,
    simulate_poly,
)
from .reach import ReachConfig, factor_id_audit, run_lti, run_poly_data, run_poly_model
from .sets import (
    CPZ,
    CPMZ,
    MatrixZonotope,
    constraint_residual,
    eval_matrix,
    eval_point,
    eval_point_many,
    interval_hull,
    interval_hull_matrix,
    lift,
    monomials_many,
    new_cpmz,
    new_cpz,
    _monomials_single,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


# ---------------------------------------------------------------------------
# randomized operand construction (always feasible at a known assignment)


def _mono_values(R: np.ndarray, vals: np.ndarray) -> np.ndarray:
    return _monomials_single(np.asarray(R, dtype=np.int64), vals)


def _random_cpz(rng, pool, sigma, n, max_h=6, allow_constraints=True) -> tuple[CPZ, np.ndarray]:
    take = rng.random(len(pool)) < 0.7
    ids = [fid for fid, t in zip(pool, take) if t]
    if not ids:
        ids = [pool[int(rng.integers(0, len(pool)))]]
    p = len(ids)
    h = int(rng.integers(0, max_h + 1))
    E = rng.integers(0, 4, size=(p, h))
    G = rng.normal(size=(n, h))
    c = rng.normal(size=n)
    vals = np.array([sigma[fid] for fid in sorted(ids)])
    A = b = R = None
    if allow_constraints and rng.random() < 0.6:
        n_c = int(rng.integers(1, 4))
        q = int(rng.integers(1, 4))
        A = rng.normal(size=(n_c, q))
        R = rng.integers(0, 4, size=(p, q))
        S_tmp = new_cpz(c, G, E, A, np.zeros(n_c), R, ids)
        b = S_tmp.A @ _mono_values(S_tmp.R, vals)
        return new_cpz(c, G, E, A, b, R, ids), vals
    return new_cpz(c, G, E, A, b, R, ids), vals


def _random_cpmz(rng, pool, sigma, shape, max_g=4) -> tuple[CPMZ, np.ndarray]:
    take = rng.random(len(pool)) < 0.7
    ids = [fid for fid, t in zip(pool, take) if t]
    if not ids:
        ids = [pool[int(rng.integers(0, len(pool)))]]
    p = len(ids)
    g = int(rng.integers(0, max_g + 1))
    m, n = shape
    C = rng.normal(size=(m, n))
    G = rng.normal(size=(g, m, n))
    E = rng.integers(0, 4, size=(p, g))
    vals = np.array([sigma[fid] for fid in sorted(ids)])
    A = B = R = None
    if rng.random() < 0.6:
        q = int(rng.integers(1, 3))
        nc, na = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        A = rng.normal(size=(q, nc, na))
        R = rng.integers(0, 4, size=(p, q))
        Y_tmp = new_cpmz(C, G, E, A, np.zeros((nc, na)), R, ids)
        mono = _mono_values(Y_tmp.R, vals)
        B = np.tensordot(mono, Y_tmp.A, axes=(0, 0)) if q else np.zeros((nc, na))
        return new_cpmz(C, G, E, A, B, R, ids), vals
    return new_cpmz(C, G, E, A, B, R, ids), vals


def _assignment_for(S, sigma) -> FactorAssignment:
    return FactorAssignment({fid: sigma[fid] for fid in S.ids})


# ---------------------------------------------------------------------------
# criterion 1: pointwise algebraic exactness


def _criterion_exactness() -> tuple[bool, str]:
    rng = np.random.default_rng(101)
    tol = 1e-10
    cases = 1000
    worst = {op: 0.0 for op in ("mul", "add", "cart", "had", "pow", "project", "linear")}
    for _ in range(cases):
        pool = fresh_ids(int(rng.integers(2, 7)))
        sigma = {fid: float(rng.uniform(-1, 1)) for fid in pool}
        n = int(rng.integers(1, 6))

        Y, _ = _random_cpmz(rng, pool, sigma, (int(rng.integers(1, 6)), n))
        P, _ = _random_cpz(rng, pool, sigma, n)
        out = mul_cpmz_cpz(Y, P)
        lhs = eval_point(out, _assignment_for(out, sigma))
        rhs = eval_matrix(Y, _assignment_for(Y, sigma)) @ eval_point(P, _assignment_for(P, sigma))
        worst["mul"] = max(worst["mul"], float(np.abs(lhs - rhs).max(initial=0.0)))

        P1, _ = _random_cpz(rng, pool, sigma, n)
        P2, _ = _random_cpz(rng, pool, sigma, n)
        v1 = eval_point(P1, _assignment_for(P1, sigma))
        v2 = eval_point(P2, _assignment_for(P2, sigma))

        out = add_exact(P1, P2)
        worst["add"] = max(
            worst["add"], float(np.abs(eval_point(out, _assignment_for(out, sigma)) - (v1 + v2)).max(initial=0.0))
        )
        out = cartesian_exact(P1, P2)
        worst["cart"] = max(
            worst["cart"],
            float(np.abs(eval_point(out, _assignment_for(out, sigma)) - np.concatenate([v1, v2])).max(initial=0.0)),
        )
        out = hadamard_exact(P1, P2)
        worst["had"] = max(
            worst["had"], float(np.abs(eval_point(out, _assignment_for(out, sigma)) - v1 * v2).max(initial=0.0))
        )
        e = int(rng.integers(0, 4))
        out = pow_exact(P1, e)
        worst["pow"] = max(
            worst["pow"], float(np.abs(eval_point(out, _assignment_for(out, sigma)) - v1**e).max(initial=0.0))
        )
        k = int(rng.integers(1, n + 1))
        idx = list(rng.choice(n, size=k, replace=False))
        out = project(P1, idx)
        worst["project"] = max(
            worst["project"], float(np.abs(eval_point(out, _assignment_for(out, sigma)) - v1[idx]).max(initial=0.0))
        )
        M = rng.normal(size=(int(rng.integers(1, 4)), n))
        out = map_linear(M, P1)
        worst["linear"] = max(
            worst["linear"], float(np.abs(eval_point(out, _assignment_for(out, sigma)) - M @ v1).max(initial=0.0))
        )
    bad = {op: w for op, w in worst.items() if w > tol}
    detail = ", ".join(f"{op}={w:.1e}" for op, w in worst.items())
    return not bad, f"{cases} operand pairs per operation; worst deviations: {detail}"


# ---------------------------------------------------------------------------
# criterion 2: block-size accounting


def _criterion_accounting() -> tuple[bool, str]:
    rng = np.random.default_rng(202)
    deviations = 0
    for _ in range(200):
        pool = fresh_ids(int(rng.integers(2, 7)))
        sigma = {fid: float(rng.uniform(-1, 1)) for fid in pool}
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))

        Y, _ = _random_cpmz(rng, pool, sigma, (m, n))
        P, _ = _random_cpz(rng, pool, sigma, n)
        out = mul_cpmz_cpz(Y, P)
        g, hP = Y.num_generators, P.num_generators
        ok = out.num_generators == g + hP + g * hP
        ok &= out.num_constraint_terms == Y.num_constraint_terms + P.num_constraint_terms
        nc_na = Y.constraint_shape[0] * Y.constraint_shape[1]
        ok &= out.num_constraints == nc_na + P.num_constraints

        P1, _ = _random_cpz(rng, pool, sigma, n)
        P2, _ = _random_cpz(rng, pool, sigma, n)
        h1, h2 = P1.num_generators, P2.num_generators
        ok &= hadamard_exact(P1, P2).num_generators == h1 + h2 + h1 * h2
        ok &= add_exact(P1, P2).num_generators == h1 + h2
        cart = cartesian_exact(P1, P2)
        ok &= cart.num_generators == h1 + h2 and cart.dim == P1.dim + P2.dim

        pool2 = fresh_ids(3)
        sigma2 = {fid: float(rng.uniform(-1, 1)) for fid in pool2}
        Y2, _ = _random_cpmz(rng, pool2, sigma2, (m, n))
        inter = intersect_cpmz(Y, Y2)
        ok &= inter.num_generators == Y.num_generators
        ok &= inter.num_constraint_terms == (
            Y.num_constraint_terms + Y2.num_constraint_terms + Y.num_generators + Y2.num_generators
        )
        nc2_na2 = Y2.constraint_shape[0] * Y2.constraint_shape[1]
        ok &= inter.constraint_shape == (nc_na + nc2_na2 + m * n, 1)
        if not ok:
            deviations += 1
    return deviations == 0, f"200 randomized cases; {deviations} block-size deviations"


# ---------------------------------------------------------------------------
# criterion 3: identifier-merge fidelity on the worked 3-D pair


def _criterion_merge_fidelity() -> tuple[bool, str]:
    P1 = new_cpz(
        [0, 2, 1],
        [[0, 1], [3, 2], [1, 5]],
        [[4, 1], [0, 2]],
        [[1, 2], [0, 0], [3, 4]],
        [2, 0, 2],
        [[4, 2], [0, 2]],
        ids=[1, 2],
    )
    P2 = new_cpz(
        [3, 3, 4],
        [[2, 2], [3, 0], [1, 4]],
        [[3, 2], [3, 0]],
        [[1, 3], [2, 4]],
        [2, 5],
        [[2, 0], [2, 3]],
        ids=[1, 3],
    )
    pair = merge_id(P1, P2)
    expected = {
        "ids": (1, 2, 3),
        "E1": np.array([[4, 1], [0, 2], [0, 0]]),
        "R1": np.array([[4, 2], [0, 2], [0, 0]]),
        "E2": np.array([[3, 2], [0, 0], [3, 0]]),
        "R2": np.array([[2, 0], [0, 0], [2, 3]]),
    }
    ok = (
        pair.shared_id == expected["ids"]
        and np.array_equal(pair.first.E, expected["E1"])
        and np.array_equal(pair.first.R, expected["R1"])
        and np.array_equal(pair.second.E, expected["E2"])
        and np.array_equal(pair.second.R, expected["R2"])
    )
    return ok, "merged exponent and constraint-exponent matrices match the worked instance entry-for-entry"


# ---------------------------------------------------------------------------
# criterion 4: linear model-set witness


def _criterion_lti_witness() -> tuple[bool, str]:
    started = time.perf_counter()
    truth = np.hstack([ex.PHI_5D, ex.GAMMA_5D])
    U = ex.lti_input_set()
    Zw = ex.lti_noise_set(correlated=False)  # five independent generators, radius 0.005
    failures = 0
    worst = 0.0
    for trial in range(50):
        rng = np.random.default_rng(4000 + trial)
        data = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=100, rng=rng)
        Mw = concat_noise(Zw, data.batch.size)
        model = model_set_lti(data.batch, Mw)
        witness = ex.model_witness_assignment(model, {"batch0": data.noise_values})
        err = float(np.abs(eval_matrix(model.set, witness) - truth).max())
        worst = max(worst, err)
        if err > 1e-8:
            failures += 1
    elapsed = time.perf_counter() - started
    ok = failures == 0 and elapsed < 5.0
    return ok, f"50 noise realizations at T=100; worst witness error {worst:.2e}; {elapsed:.2f}s (budget 5s)"


# ---------------------------------------------------------------------------
# criterion 5: polynomial model-set witness and noise-free recovery


def _criterion_poly_witness() -> tuple[bool, str]:
    basis = ex.poly_basis()
    U = ex.poly_input_set()
    rng = np.random.default_rng(500)
    Zw = ex.poly_noise_set(7e-3, correlated=False)
    data = ex.generate_poly_data(ex.THETA_2D, basis, U, Zw, transitions=140, rng=rng, trajectory_length=7)
    Mw = concat_noise(Zw, data.batch.size)
    model = model_set_poly(data.batch, basis, Mw)
    witness = ex.model_witness_assignment(model, {"batch0": data.noise_values})
    err_noisy = float(np.abs(eval_matrix(model.set, witness) - ex.THETA_2D).max())

    from .sets import singleton

    zero = singleton(np.zeros(2))
    data0 = ex.generate_poly_data(ex.THETA_2D, basis, U, zero, transitions=140, rng=rng, trajectory_length=7)
    model0 = model_set_poly(data0.batch, basis, concat_noise(zero, data0.batch.size))
    err_clean = float(np.abs(model0.set.C - ex.THETA_2D).max())
    singleton_ok = model0.set.num_generators == 0
    ok = err_noisy <= 1e-8 and err_clean <= 1e-8 and singleton_ok
    return ok, (
        f"T=140 witness error {err_noisy:.2e}; noise-free singleton recovery error {err_clean:.2e} "
        f"(generators={model0.set.num_generators})"
    )


# ---------------------------------------------------------------------------
# criterion 6: intersection correctness and refinement nesting


def _interval_mz(center: float, radius: float) -> CPMZ:
    return lift(MatrixZonotope(np.array([[center]]), np.array([[[radius]]])))


def _sample_hull(S: CPMZ, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mono = monomials_many(np.asarray(S.E, np.int64), V, exact=True)
    flat = S.vec_generators().T @ mono + S.C.flatten(order="F")[:, None]
    return flat.min(axis=1), flat.max(axis=1)


def _criterion_intersection() -> tuple[bool, str]:
    rng = np.random.default_rng(600)
    notes = []
    ok = True

    inter = intersect_cpmz(_interval_mz(1.0, 1.0), _interval_mz(2.0, 1.0))  # [0,2] and [1,3]
    for value, expect in ((1.0, True), (1.5, True), (2.0, True), (0.5, False), (2.5, False)):
        got = membership_bruteforce(inter, [value], tol=1e-6, resolution=201)
        if got is not expect:
            ok = False
            notes.append(f"membership({value}) = {got}")
    lo = hi = None
    from .oracle import _grid_scan

    vals = []
    for points, residuals in _grid_scan(inter, 201, 2**27):
        feas = residuals <= 1e-9
        if feas.any():
            vals.append(points[0, feas])
    allv = np.concatenate(vals)
    lo, hi = float(allv.min()), float(allv.max())
    if not (1.0 - 1e-6 <= lo <= 1.02 and 1.98 <= hi <= 2.0 + 1e-6):
        ok = False
        notes.append(f"feasible grid range [{lo:.4f},{hi:.4f}] vs [1,2]")

    disjoint = intersect_cpmz(_interval_mz(0.5, 0.5), _interval_mz(2.5, 0.5))  # [0,1] and [2,3]
    gap = min_residual_grid(disjoint, resolution=201)
    if gap <= 0.1:
        ok = False
        notes.append(f"disjoint residual floor {gap:.3f}")

    Y = lift(MatrixZonotope(rng.normal(size=(2, 2)), rng.normal(size=(3, 2, 2))))
    self_inter = intersect_cpmz(Y, lift(MatrixZonotope(Y.C, np.array(Y.G))))
    for _ in range(20):
        s1 = rng.uniform(-1, 1, 3)
        sig = FactorAssignment(dict(zip(self_inter.ids, np.concatenate([s1, s1]))))
        if constraint_residual(self_inter, sig) > 1e-9:
            ok = False
            notes.append("self-intersection witness infeasible")
            break
        if np.abs(eval_matrix(self_inter, sig) - eval_matrix(Y, FactorAssignment(dict(zip(Y.ids, s1))))).max() > 1e-9:
            ok = False
            notes.append("self-intersection evaluation mismatch")
            break

    # two-batch refinement nesting, linear and polynomial
    worst_restrict = 0.0
    hull_violation = 0.0
    for kind in ("lti", "poly"):
        rng_k = np.random.default_rng(61 if kind == "lti" else 62)
        if kind == "lti":
            U, Zw = ex.lti_input_set(), ex.lti_noise_set(correlated=True)
            d0 = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng_k)
            d1 = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng_k)
            m0 = model_set_lti(d0.batch, concat_noise(Zw, 6), "b0")
            m1 = model_set_lti(d1.batch, concat_noise(Zw, 6), "b1")
        else:
            basis = ex.poly_basis()
            U, Zw = ex.poly_input_set(), ex.poly_noise_set(7e-3, correlated=True)
            d0 = ex.generate_poly_data(ex.THETA_2D, basis, U, Zw, transitions=5, rng=rng_k, trajectory_length=5)
            d1 = ex.generate_poly_data(ex.THETA_2D, basis, U, Zw, transitions=5, rng=rng_k, trajectory_length=5)
            m0 = model_set_poly(d0.batch, basis, concat_noise(Zw, 5), "b0")
            m1 = model_set_poly(d1.batch, basis, concat_noise(Zw, 5), "b1")
        refined = refine(m0, m1)
        post_samples = []
        for _ in range(100):
            sig = sample_feasible(refined.set, rng_k, budget=20)
            vals = sig.values_for(refined.set.ids)
            post_samples.append(vals)
            for operand in (m0, m1):
                sub = FactorAssignment({fid: sig[fid] for fid in operand.set.ids})
                worst_restrict = max(worst_restrict, constraint_residual(operand.set, sub))
                gap = np.abs(eval_matrix(operand.set, sub) - eval_matrix(refined.set, sig)).max()
                worst_restrict = max(worst_restrict, float(gap))
        V_post = np.stack(post_samples, axis=1)
        post_lo, post_hi = _sample_hull(refined.set, V_post)
        for operand in (m0, m1):
            idx = [refined.set.ids.index(fid) for fid in operand.set.ids]
            V_restrict = V_post[idx]
            V_own = rng_k.uniform(-1, 1, (operand.set.num_factors, 500))
            lo1, hi1 = _sample_hull(operand.set, np.hstack([V_restrict, V_own]))
            hull_violation = max(
                hull_violation,
                float(np.maximum(lo1 - post_lo, post_hi - hi1).max()),
            )
    if worst_restrict > 1e-9:
        ok = False
        notes.append(f"restriction residual {worst_restrict:.2e}")
    if hull_violation > 1e-6:
        ok = False
        notes.append(f"hull nesting violated by {hull_violation:.2e}")
    detail = "; ".join(notes) if notes else (
        f"interval instances verified at grid 201; refinement nesting holds "
        f"(restriction defect {worst_restrict:.1e}, hull margin {hull_violation:.1e})"
    )
    return ok, detail


# ---------------------------------------------------------------------------
# criterion 7: end-to-end witness propagation


def _witness_errors(result, traces, model_assignment) -> tuple[float, float]:
    worst_err = 0.0
    worst_resid = 0.0
    for step in range(1, len(result.sets)):
        S = result.sets[step]
        V = np.stack(
            [ex.propagation_witness(result, tr, model_assignment, step).values_for(S.ids) for tr in traces],
            axis=1,
        )
        pts = eval_point_many(S, V)
        target = np.stack([tr.states[step] for tr in traces], axis=1)
        worst_err = max(worst_err, float(np.abs(pts - target).max()))
        if S.num_constraints:
            mono = monomials_many(np.asarray(S.R, np.int64), V, exact=True)
            worst_resid = max(worst_resid, float(np.linalg.norm(S.A @ mono - S.b[:, None], axis=0).max()))
    return worst_err, worst_resid


def _criterion_witness_propagation() -> tuple[bool, str]:
    started = time.perf_counter()
    tol = 1e-8
    lines = []
    ok = True

    # linear, nonconvex initial set, N = 5, refinement burst before the first step
    rng = np.random.default_rng(700)
    U, Zw = ex.lti_input_set(), ex.lti_noise_set(correlated=True)
    offline = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng)
    online = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng)
    cfg = ReachConfig(ex.lti_initial_nonconvex(), U, Zw, horizon=5, batch_length=6)
    res = run_lti(cfg, offline.batch, online=[online.transitions])
    factor_id_audit(res)
    mw = ex.model_witness_assignment(
        res.model_history[-1], {"batch0": offline.noise_values, "batch1": online.noise_values}
    )
    traces = [simulate_lti(ex.PHI_5D, ex.GAMMA_5D, res.sets[0], res.inputs_used, Zw, rng) for _ in range(500)]
    err, resid = _witness_errors(res, traces, mw)
    ok &= err <= tol and resid <= 1e-7
    lines.append(f"linear N=5: err {err:.1e} resid {resid:.1e} gens {res.sets[-1].num_generators}")

    # polynomial model-based, both initial sets, N = 3
    basis = ex.poly_basis()
    Up, Zp = ex.poly_input_set(), ex.poly_noise_set(0.7e-4, correlated=True)
    for label, init in (("convex", ex.poly_initial_convex()), ("nonconvex", ex.poly_initial_nonconvex())):
        rng = np.random.default_rng(710)
        cfgp = ReachConfig(init, Up, Zp, horizon=3, batch_length=5)
        resp = run_poly_model(cfgp, ex.THETA_2D, basis)
        traces = [simulate_poly(ex.THETA_2D, basis, resp.sets[0], resp.inputs_used, Zp, rng) for _ in range(500)]
        err, resid = _witness_errors(resp, traces, None)
        ok &= err <= tol and resid <= 1e-7
        lines.append(f"model-based {label} N=3: err {err:.1e}")

    # polynomial data-driven, both scenarios, N = 3
    for label, init, radius, with_refine in (
        ("small-noise convex", ex.poly_initial_convex(), 0.7e-5, False),
        ("large-noise nonconvex", ex.poly_initial_nonconvex(), 7e-3, True),
    ):
        rng = np.random.default_rng(720)
        Zd = ex.poly_noise_set(radius, correlated=True)
        data = ex.generate_poly_data(ex.THETA_2D, basis, Up, Zd, transitions=7, rng=rng, trajectory_length=7)
        online_data = None
        online_arg = None
        noise_by_batch = {"batch0": data.noise_values}
        if with_refine:
            online_data = ex.generate_poly_data(ex.THETA_2D, basis, Up, Zd, transitions=7, rng=rng, trajectory_length=7)
            online_arg = [online_data.transitions]
            noise_by_batch["batch1"] = online_data.noise_values
        cfgd = ReachConfig(init, Up, Zd, horizon=3, batch_length=5)
        resd = run_poly_data(cfgd, data.batch, basis, online=online_arg)
        factor_id_audit(resd)
        mw = ex.model_witness_assignment(resd.model_history[-1], noise_by_batch)
        traces = [simulate_poly(ex.THETA_2D, basis, resd.sets[0], resd.inputs_used, Zd, rng) for _ in range(500)]
        err, resid = _witness_errors(resd, traces, mw)
        ok &= err <= tol and resid <= 1e-7
        lines.append(f"data-driven {label} N=3: err {err:.1e} gens {resd.sets[-1].num_generators}")

    elapsed = time.perf_counter() - started
    ok = ok and elapsed <= 120.0
    return ok, f"500 trajectories per run; {'; '.join(lines)}; {elapsed:.1f}s (budget 120s)"


# ---------------------------------------------------------------------------
# criterion 8: conservatism against the interval baseline


def _criterion_conservatism() -> tuple[bool, str]:
    rng = np.random.default_rng(800)
    basis = ex.poly_basis()
    U = ex.poly_input_set()
    Zw = ex.poly_noise_set(0.7e-5, correlated=True)
    data = ex.generate_poly_data(ex.THETA_2D, basis, U, Zw, transitions=140, rng=rng, trajectory_length=7)
    init = ex.poly_initial_convex()
    cfg = ReachConfig(init, U, Zw, horizon=1, batch_length=5)
    res = run_poly_data(cfg, data.batch, basis)
    R1 = res.sets[1]

    theta_lo, theta_hi = interval_hull_matrix(res.model_history[0].set)
    z0 = cartesian_exact(init, res.inputs_used[0])
    z_lo, z_hi = interval_hull(z0)
    w_lo, w_hi = interval_hull(res.noise_used[0])
    box_lo, box_hi = interval_baseline_poly(theta_lo, theta_hi, z_lo, z_hi, basis, w_lo, w_hi)
    box_area = float(np.prod(box_hi - box_lo))

    cloud = boundary_cloud(R1, (0, 1), 20000, rng)
    hull_area = cloud_hull_area(cloud)
    inside = (
        (cloud[:, 0] >= box_lo[0] - 1e-7)
        & (cloud[:, 0] <= box_hi[0] + 1e-7)
        & (cloud[:, 1] >= box_lo[1] - 1e-7)
        & (cloud[:, 1] <= box_hi[1] + 1e-7)
    ).all()
    ok = hull_area <= 0.95 * box_area and bool(inside)
    ratio = hull_area / box_area if box_area else float("inf")
    return ok, (
        f"first-step sampled hull area {hull_area:.3e} vs interval box {box_area:.3e} "
        f"(ratio {ratio:.3f}, need <= 0.95); cloud inside box: {inside}"
    )


# ---------------------------------------------------------------------------
# criterion 9: reduction soundness


def _criterion_reduction() -> tuple[bool, str]:
    rng = np.random.default_rng(900)
    U, Zw = ex.lti_input_set(), ex.lti_noise_set(correlated=True)
    offline = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng)
    cfg = ReachConfig(ex.lti_initial_nonconvex(), U, Zw, horizon=3, batch_length=6)
    res = run_lti(cfg, offline.batch)
    S = res.sets[-1]
    order = max(S.dim, S.num_generators // 2)
    reduced = reduce_order(S, order)
    dropped = S.num_generators - (order - S.dim)
    lo, hi = interval_hull(reduced)

    V = rng.uniform(-1.0, 1.0, (S.num_factors, 10_000))
    pts = eval_point_many(S, V)
    outside = int(((pts < lo[:, None] - 1e-9) | (pts > hi[:, None] + 1e-9)).any(axis=0).sum())
    ok = outside == 0 and reduced.num_generators <= order and dropped >= S.num_generators // 2
    return ok, (
        f"reduced {S.num_generators} -> {reduced.num_generators} generators (dropped {dropped}); "
        f"{outside} of 10000 witness points escaped the enclosure"
    )


# ---------------------------------------------------------------------------
# criterion 10: CLI determinism


def _criterion_determinism() -> tuple[bool, str]:
    config = {
        "schema_version": 1,
        "experiment": "lti-demo",
        "seed": 0,
        "horizon": 2,
        "batch_length": 6,
        "system": {"type": "lti", "Phi": ex.PHI_5D.tolist(), "Gamma": ex.GAMMA_5D.tolist()},
        "initial_set": {"c": [1.0] * 5, "G": (0.1 * np.eye(5)).tolist(), "E": ex.E0_NONCONVEX_5D.tolist()},
        "input_set": {"c": [10.0], "G": [[0.25]]},
        "noise_set": {"c": [0.0] * 5, "G": [[0.005]] * 5},
        "data": {"offline_transitions": 6, "x0_low": [0.9] * 5, "x0_high": [1.1] * 5},
        "projections": [[0, 1]],
        "cloud_samples": 100,
    }
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config))
        payloads = []
        for run in ("a", "b"):
            out = tmp_path / run
            proc = subprocess.run(
                [sys.executable, "-m", "czreach.cli", "--config", str(cfg_path), "--out", str(out)],
                capture_output=True,
                text=True,
            )
            if proc.returncode != 0:
                return False, f"cli exited with {proc.returncode}: {proc.stdout} {proc.stderr}"
            payloads.append((out / "sets.json").read_bytes())
    ok = payloads[0] == payloads[1]
    return ok, f"two seeded runs produced {'byte-identical' if ok else 'DIFFERENT'} sets.json ({len(payloads[0])} bytes)"


# ---------------------------------------------------------------------------
# registry


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "algebraic-exactness", _criterion_exactness),
    (2, "block-size-accounting", _criterion_accounting),
    (3, "identifier-merge-fidelity", _criterion_merge_fidelity),
    (4, "linear-model-witness", _criterion_lti_witness),
    (5, "polynomial-model-witness", _criterion_poly_witness),
    (6, "intersection-refinement", _criterion_intersection),
    (7, "witness-propagation", _criterion_witness_propagation),
    (8, "conservatism-vs-interval-baseline", _criterion_conservatism),
    (9, "reduction-soundness", _criterion_reduction),
    (10, "cli-determinism", _criterion_determinism),
]


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            started = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crash is a failure, not an abort
                passed, detail = False, f"raised {type(exc).__name__}: {exc}"
            return CriterionResult(num, name, passed, detail, time.perf_counter() - started)
    raise KeyError(f"no criterion {number}")


def _worker_count() -> int:
    env = os.environ.get("CZREACH_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run_all(workers: int | None = None) -> list[CriterionResult]:
    workers = workers or _worker_count()
    numbers = [num for num, _, _ in CRITERIA]
    if workers <= 1:
        return [run_criterion(n) for n in numbers]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_criterion, numbers))


def format_report(results: list[CriterionResult]) -> str:
    lines = []
    for r in sorted(results, key=lambda r: r.number):
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status} {r.number:2d} {r.name:<36s} ({r.seconds:7.2f}s)  {r.detail}")
    total = sum(r.seconds for r in results)
    verdict = "ALL CRITERIA PASSED" if all(r.passed for r in results) else "SOME CRITERIA FAILED"
    lines.append(f"{verdict} in {total:.1f}s")
    return "\n".join(lines) + "\n"
