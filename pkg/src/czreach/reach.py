"""Reachability engines built on the exact algebra.

Three drivers are provided:

* :func:`run_lti` — data-driven propagation for linear dynamics with online
  model refinement (model set times stacked state/input set, plus noise).
* :func:`run_poly_model` — model-based propagation for polynomial dynamics
  by evaluating the monomial map at the set level.
* :func:`run_poly_data` — data-driven polynomial propagation with online
  refinement of the coefficient set.

Every step is algebraically exact.  Representation growth is controlled by
explicit, exact compaction (merging duplicate exponent columns); optional
order reduction is the single over-approximating knob and is off by
default.  Noise and input sets receive fresh factor ids each step so that
independent draws are never correlated through shared factors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    add_exact,
    cartesian_exact,
    hadamard_compacted,
    hadamard_exact,
    map_linear,
    mul_cpmz_cpz,
    pow_compacted,
    pow_exact,
    project,
    reduce as reduce_order,
)
from .errors import CapacityExceeded, ShapeMismatch
from .factors import FactorId
from .learning import (
    DataBatch,
    ModelSet,
    MonomialBasis,
    concat_noise,
    model_set_lti,
    model_set_poly,
    numerical_rank,
    refine,
    regressor_matrix,
)
from .sets import CPZ, compact, id_groups_disjoint, new_cpz, ones_singleton, relabel_fresh, to_dict

Transition = tuple[np.ndarray, np.ndarray, np.ndarray]  # (x_prev, u_prev, x_next)


@dataclass(frozen=True)
class ReachConfig:
    """Inputs shared by all drivers.

    ``input_set`` may be a single template (fresh ids per step unless
    ``constant_input``) or an explicit per-step list.  ``reduction_order``
    of None means exact mode.  ``compact`` applies exact representation
    cleanup after each operation and never changes the represented sets.
    """

    initial_set: CPZ
    input_set: CPZ | Sequence[CPZ]
    noise_set: CPZ
    horizon: int
    batch_length: int
    reduction_order: int | None = None
    seed: int = 0
    compact: bool = True
    constant_input: bool = False
    generator_budget: int = 60_000_000
    chunk_cols: int = 4_000_000

    def __post_init__(self):
        if self.horizon < 1:
            raise ShapeMismatch("horizon must be at least 1")

    def input_for_step(self, k: int) -> CPZ:
        if isinstance(self.input_set, CPZ):
            if self.constant_input:
                return self.input_set
            return relabel_fresh(self.input_set)
        return self.input_set[k]


@dataclass
class ReachResult:
    """Reachable sets plus everything a witness check needs to replay them."""

    sets: list[CPZ]
    model_history: list[ModelSet]
    stats: list[dict]
    inputs_used: list[CPZ] = field(default_factory=list)
    noise_used: list[CPZ] = field(default_factory=list)

    def to_json_dict(self, seed: int | None = None) -> dict:
        return {
            "schema_version": 1,
            "rng": "numpy-pcg64",
            "seed": seed,
            "sets": [to_dict(s) for s in self.sets],
            "stats": [dict(row) for row in self.stats],
        }


def _record(stats: list[dict], step: int, S: CPZ, started: float) -> None:
    stats.append(
        {
            "step": step,
            "generators": S.num_generators,
            "constraints": S.num_constraints,
            "factors": S.num_factors,
            "millis": (time.perf_counter() - started) * 1000.0,
        }
    )


def _guard(S: CPZ, budget: int) -> CPZ:
    if S.num_generators > budget:
        raise CapacityExceeded(
            f"{S.num_generators} generators exceed the configured budget {budget}; "
            "enable reduction or shorten the horizon"
        )
    return S


def factor_id_audit(result: ReachResult) -> None:
    """Check the id discipline: initial, per-step input/noise and model
    batches must live in pairwise disjoint factor spaces."""
    groups: list[list[FactorId]] = [list(result.sets[0].ids)]
    groups += [list(s.ids) for s in result.inputs_used]
    groups += [list(s.ids) for s in result.noise_used]
    for model in result.model_history[-1:]:
        for blocks in model.noise_blocks.values():
            groups.append([fid for block in blocks for fid in block])
    if not id_groups_disjoint(groups):
        raise ShapeMismatch("factor-id audit failed: some id appears in two injection groups")


# ---------------------------------------------------------------------------
# linear dynamics


def step_lti(model: ModelSet | object, Rk: CPZ, Uk: CPZ, Zw_fresh: CPZ) -> CPZ:
    """One time update: model set times [Rk x Uk], plus fresh noise."""
    cpmz = model.set if isinstance(model, ModelSet) else model
    return add_exact(mul_cpmz_cpz(cpmz, cartesian_exact(Rk, Uk)), Zw_fresh)


def run_lti(
    cfg: ReachConfig,
    offline: DataBatch,
    online: Sequence[Sequence[Transition]] | None = None,
) -> ReachResult:
    """Offline model identification, then N exact propagation steps with
    interleaved refinement whenever a full-rank batch of ``batch_length``
    transitions has accumulated."""
    n_x = offline.n_x
    n_u = offline.n_u
    if cfg.batch_length < n_x + n_u:
        raise ShapeMismatch(f"batch_length {cfg.batch_length} below {n_x + n_u}")
    Mw0 = concat_noise(cfg.noise_set, offline.size)
    model = model_set_lti(offline, Mw0, batch_id="batch0")
    models = [model]

    sets = [cfg.initial_set]
    stats: list[dict] = []
    inputs_used: list[CPZ] = []
    noise_used: list[CPZ] = []
    buf_x_prev: list[np.ndarray] = []
    buf_u_prev: list[np.ndarray] = []
    buf_x_next: list[np.ndarray] = []
    batch_counter = 1

    for k in range(cfg.horizon):
        started = time.perf_counter()
        if online is not None and k < len(online):
            for x_prev, u_prev, x_next in online[k]:
                buf_x_prev.append(np.asarray(x_prev, dtype=float).reshape(-1))
                buf_u_prev.append(np.asarray(u_prev, dtype=float).reshape(-1))
                buf_x_next.append(np.asarray(x_next, dtype=float).reshape(-1))
        if len(buf_x_prev) >= cfg.batch_length:
            D = np.vstack([np.array(buf_x_prev).T, np.array(buf_u_prev).T])
            if numerical_rank(D) == n_x + n_u:
                batch = DataBatch(np.array(buf_x_next).T, np.array(buf_x_prev).T, np.array(buf_u_prev).T)
                Mw = concat_noise(cfg.noise_set, batch.size)
                incoming = model_set_lti(batch, Mw, batch_id=f"batch{batch_counter}")
                batch_counter += 1
                model = refine(model, incoming)
                models.append(model)
                buf_x_prev, buf_u_prev, buf_x_next = [], [], []

        Uk = cfg.input_for_step(k)
        Zk = relabel_fresh(cfg.noise_set)
        nxt = step_lti(model, sets[-1], Uk, Zk)
        if cfg.compact:
            nxt = compact(nxt)
        if cfg.reduction_order is not None:
            nxt = reduce_order(nxt, cfg.reduction_order)
        nxt = _guard(nxt, cfg.generator_budget)
        sets.append(nxt)
        inputs_used.append(Uk)
        noise_used.append(Zk)
        _record(stats, k + 1, nxt, started)
    return ReachResult(sets, models, stats, inputs_used, noise_used)


# ---------------------------------------------------------------------------
# polynomial dynamics


def monomial_image(
    Zk: CPZ,
    basis: MonomialBasis,
    compact_mode: bool = False,
    chunk_cols: int = 4_000_000,
    budget: int | None = None,
) -> CPZ:
    """Exact image h(Zk) of the stacked state/input set under the monomial map.

    Coordinate sets are extracted by projection, raised to their exponents
    with all factors shared, multiplied elementwise and stacked; for every
    feasible assignment the evaluation equals h applied to the evaluated
    point.  ``compact_mode`` routes the products through chunked exact
    compaction so intermediate representations stay bounded.
    """
    if basis.variables != Zk.dim:
        raise ShapeMismatch(f"basis over {basis.variables} variables, set has dimension {Zk.dim}")
    had = (lambda a, b: hadamard_compacted(a, b, chunk_cols, budget)) if compact_mode else hadamard_exact
    pw = (lambda s, e: pow_compacted(s, e, chunk_cols, budget)) if compact_mode else pow_exact
    coords = [project(Zk, [l]) for l in range(Zk.dim)]
    if compact_mode:
        coords = [compact(c) for c in coords]
    monomial_sets = []
    for exps in basis.exponents:
        factor_sets = ones_singleton(1)
        for l, e in enumerate(exps):
            if e == 0:
                continue
            factor_sets = had(factor_sets, pw(coords[l], int(e)))
        monomial_sets.append(factor_sets)
    out = monomial_sets[0]
    for nxt in monomial_sets[1:]:
        out = cartesian_exact(out, nxt)
    if compact_mode:
        out = compact(out)
    return out


def run_poly_model(cfg: ReachConfig, Theta, basis: MonomialBasis) -> ReachResult:
    """Model-based polynomial propagation: Theta h(Rk x Uk) plus fresh noise."""
    Theta = np.asarray(Theta, dtype=float)
    if Theta.shape[1] != basis.size:
        raise ShapeMismatch(f"coefficient matrix has {Theta.shape[1]} columns, basis has {basis.size}")
    sets = [cfg.initial_set]
    stats: list[dict] = []
    inputs_used: list[CPZ] = []
    noise_used: list[CPZ] = []
    for k in range(cfg.horizon):
        started = time.perf_counter()
        Uk = cfg.input_for_step(k)
        Zk = cartesian_exact(sets[-1], Uk)
        image = monomial_image(Zk, basis, cfg.compact, cfg.chunk_cols, cfg.generator_budget)
        noise = relabel_fresh(cfg.noise_set)
        nxt = add_exact(map_linear(Theta, image), noise)
        if cfg.compact:
            nxt = compact(nxt)
        if cfg.reduction_order is not None:
            nxt = reduce_order(nxt, cfg.reduction_order)
        nxt = _guard(nxt, cfg.generator_budget)
        sets.append(nxt)
        inputs_used.append(Uk)
        noise_used.append(noise)
        _record(stats, k + 1, nxt, started)
    return ReachResult(sets, [], stats, inputs_used, noise_used)


def run_poly_data(
    cfg: ReachConfig,
    offline: DataBatch,
    basis: MonomialBasis,
    online: Sequence[Sequence[Transition]] | None = None,
) -> ReachResult:
    """Data-driven polynomial propagation with online coefficient-set refinement.

    Online transitions accumulate into regressor columns; once at least
    ``batch_length`` columns are present and the regressor has full row
    rank, a fresh model set is intersected into the current one and the
    buffers reset."""
    if cfg.batch_length < basis.size:
        raise ShapeMismatch(f"batch_length {cfg.batch_length} below basis size {basis.size}")
    Mw0 = concat_noise(cfg.noise_set, offline.size)
    model = model_set_poly(offline, basis, Mw0, batch_id="batch0")
    models = [model]

    sets = [cfg.initial_set]
    stats: list[dict] = []
    inputs_used: list[CPZ] = []
    noise_used: list[CPZ] = []
    buf: list[Transition] = []
    batch_counter = 1

    for k in range(cfg.horizon):
        started = time.perf_counter()
        if online is not None and k < len(online):
            for tr in online[k]:
                buf.append(tr)
        if len(buf) >= cfg.batch_length:
            batch = DataBatch(
                np.array([t[2] for t in buf]).T,
                np.array([t[0] for t in buf]).T,
                np.array([t[1] for t in buf]).T,
            )
            if numerical_rank(regressor_matrix(batch, basis)) == basis.size:
                Mw = concat_noise(cfg.noise_set, batch.size)
                incoming = model_set_poly(batch, basis, Mw, batch_id=f"batch{batch_counter}")
                batch_counter += 1
                model = refine(model, incoming)
                models.append(model)
                buf = []

        Uk = cfg.input_for_step(k)
        Zk = cartesian_exact(sets[-1], Uk)
        image = monomial_image(Zk, basis, cfg.compact, cfg.chunk_cols, cfg.generator_budget)
        noise = relabel_fresh(cfg.noise_set)
        nxt = add_exact(mul_cpmz_cpz(model.set, image), noise)
        if cfg.compact:
            nxt = compact(nxt)
        if cfg.reduction_order is not None:
            nxt = reduce_order(nxt, cfg.reduction_order)
        nxt = _guard(nxt, cfg.generator_budget)
        sets.append(nxt)
        inputs_used.append(Uk)
        noise_used.append(noise)
        _record(stats, k + 1, nxt, started)
    return ReachResult(sets, models, stats, inputs_used, noise_used)
