"""Core set representations.

Two families of sets are provided:

* ``CPZ`` — a vector-valued set of points
  ``c + sum_i (prod_k a_k^E[k,i]) G[:,i]`` over factors ``a_k`` in [-1, 1]
  subject to polynomial equality constraints
  ``sum_i (prod_k a_k^R[k,i]) A[:,i] = b``.
* ``CPMZ`` — the matrix-valued analogue with matrix offset, matrix
  generators and matrix constraint terms.

A plain zonotope is a CPZ whose exponent matrix is the identity pattern and
whose constraint blocks are empty; a constrained zonotope additionally has
``R`` equal to the identity pattern.  The matrix-valued specializations are
analogous.  ``lift`` converts those classic representations losslessly.

All values are immutable after construction and operations are pure, so
everything here is safe to share across threads.  The only shared state in
the package is the factor-id allocator in :mod:`czreach.factors`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    MissingFactor,
    NegativeExponent,
    NotDivisible,
    ShapeMismatch,
)
from .factors import FactorAssignment, FactorId, fresh_ids

#: absolute tolerance on the constraint residual norm below which an
#: assignment counts as feasible
FEASIBILITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# array helpers


def _as_float_matrix(value, rows: int | None, cols: int | None, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be a matrix, got ndim={arr.ndim}")
    if rows is not None and arr.shape[0] != rows:
        raise ShapeMismatch(f"{name} has {arr.shape[0]} rows, expected {rows}")
    if cols is not None and arr.shape[1] != cols:
        raise ShapeMismatch(f"{name} has {arr.shape[1]} columns, expected {cols}")
    return arr


def _smallest_int_dtype(max_value: int) -> np.dtype:
    if max_value <= np.iinfo(np.int8).max:
        return np.dtype(np.int8)
    if max_value <= np.iinfo(np.int16).max:
        return np.dtype(np.int16)
    if max_value <= np.iinfo(np.int32).max:
        return np.dtype(np.int32)
    return np.dtype(np.int64)


def _as_exponent_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(value)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be a matrix, got ndim={arr.ndim}")
    if arr.shape != (rows, cols):
        raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {(rows, cols)}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise NegativeExponent(f"{name} must contain integers")
        arr = rounded.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise NegativeExponent(f"{name} contains a negative exponent")
    dtype = _smallest_int_dtype(int(arr.max()) if arr.size else 0)
    return arr.astype(dtype)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


def _check_ids(ids: Sequence[FactorId], rows: int) -> tuple[FactorId, ...]:
    ids = tuple(int(i) for i in ids)
    if len(ids) != rows:
        raise ShapeMismatch(f"{len(ids)} ids for {rows} exponent rows")
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"id list {ids} has repeats")
    if any(i <= 0 for i in ids):
        raise DuplicateId("factor ids must be positive integers")
    return ids


def _sort_perm(ids: tuple[FactorId, ...]) -> np.ndarray | None:
    """Permutation that sorts ids ascending, or None if already sorted."""
    if all(a < b for a, b in zip(ids, ids[1:])):
        return None
    return np.argsort(np.asarray(ids, dtype=np.int64), kind="stable")


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class CPZ:
    """Constrained polynomial zonotope in R^n.

    Use :func:`new_cpz` to construct with validation.  Ids are stored sorted
    ascending (exponent rows permuted to match) so that structurally equal
    sets compare equal.
    """

    c: np.ndarray
    G: np.ndarray
    E: np.ndarray
    A: np.ndarray
    b: np.ndarray
    R: np.ndarray
    ids: tuple[FactorId, ...]

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def num_generators(self) -> int:
        return self.G.shape[1]

    @property
    def num_factors(self) -> int:
        return len(self.ids)

    @property
    def num_constraints(self) -> int:
        """Number of scalar constraint equations (rows of A)."""
        return self.A.shape[0]

    @property
    def num_constraint_terms(self) -> int:
        """Number of constraint summands (columns of A and R)."""
        return self.A.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPZ):
            return NotImplemented
        return self.ids == other.ids and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("c", "G", "E", "A", "b", "R")
        )

    def __hash__(self):
        return hash((self.ids, self.c.tobytes(), self.G.tobytes(), self.E.tobytes()))


@dataclass(frozen=True)
class CPMZ:
    """Constrained polynomial matrix zonotope in R^(m x n).

    ``G`` stacks the generator matrices as a (gamma, m, n) array and ``A``
    stacks the constraint matrices as a (q, n_c, n_a) array; the number of
    constraint terms q is free (it need not equal gamma).
    """

    C: np.ndarray
    G: np.ndarray
    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    R: np.ndarray
    ids: tuple[FactorId, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.C.shape  # type: ignore[return-value]

    @property
    def num_generators(self) -> int:
        return self.G.shape[0]

    @property
    def num_factors(self) -> int:
        return len(self.ids)

    @property
    def num_constraint_terms(self) -> int:
        return self.A.shape[0]

    @property
    def constraint_shape(self) -> tuple[int, int]:
        return self.B.shape  # type: ignore[return-value]

    def vec_generators(self) -> np.ndarray:
        """Column-major vectorizations of the generators, as rows (gamma, m*n)."""
        g, m, n = self.G.shape
        return self.G.transpose(0, 2, 1).reshape(g, m * n)

    def vec_constraints(self) -> np.ndarray:
        q, nc, na = self.A.shape
        return self.A.transpose(0, 2, 1).reshape(q, nc * na)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPMZ):
            return NotImplemented
        return self.ids == other.ids and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("C", "G", "E", "A", "B", "R")
        )

    def __hash__(self):
        return hash((self.ids, self.C.tobytes(), self.G.tobytes(), self.E.tobytes()))


def new_cpz(c, G=None, E=None, A=None, b=None, R=None, ids: Sequence[FactorId] | None = None) -> CPZ:
    """Validated CPZ constructor; empty blocks may be passed as None."""
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.shape[0]
    G = _as_float_matrix(G if G is not None else np.zeros((n, 0)), n, None, "G")
    h = G.shape[1]
    if ids is None:
        ids = ()
    p = len(tuple(ids))
    E = _as_exponent_matrix(E if E is not None else np.zeros((p, h), dtype=np.int64), p, h, "E")
    A = _as_float_matrix(A if A is not None else np.zeros((0, 0)), None, None, "A")
    b = np.asarray(b, dtype=float).reshape(-1) if b is not None else np.zeros(A.shape[0])
    if b.shape[0] != A.shape[0]:
        raise ShapeMismatch(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
    q = A.shape[1]
    R = _as_exponent_matrix(R if R is not None else np.zeros((p, q), dtype=np.int64), p, q, "R")
    ids = _check_ids(ids, E.shape[0])
    perm = _sort_perm(ids)
    if perm is not None:
        ids = tuple(ids[i] for i in perm)
        E = E[perm, :]
        R = R[perm, :]
    return CPZ(_frozen(c), _frozen(G), _frozen(E), _frozen(A), _frozen(b), _frozen(R), ids)


def new_cpmz(C, G=None, E=None, A=None, B=None, R=None, ids: Sequence[FactorId] | None = None) -> CPMZ:
    """Validated CPMZ constructor.

    ``G`` may be a (gamma, m, n) array or a sequence of (m, n) matrices and
    ``A`` a (q, n_c, n_a) array or sequence of (n_c, n_a) matrices.
    """
    C = _as_float_matrix(C, None, None, "C")
    m, n = C.shape
    if G is None:
        G = np.zeros((0, m, n))
    G = np.asarray(G, dtype=float)
    if G.ndim == 2 and G.size == 0:
        G = G.reshape(0, m, n)
    if G.ndim != 3 or G.shape[1:] != (m, n):
        raise ShapeMismatch(f"generators have shape {G.shape}, expected (*, {m}, {n})")
    gamma = G.shape[0]
    if ids is None:
        ids = ()
    p = len(tuple(ids))
    E = _as_exponent_matrix(E if E is not None else np.zeros((p, gamma), dtype=np.int64), p, gamma, "E")
    if B is None:
        B = np.zeros((0, 0))
    B = _as_float_matrix(B, None, None, "B")
    if A is None:
        A = np.zeros((0,) + B.shape)
    A = np.asarray(A, dtype=float)
    if A.ndim == 2 and A.size == 0:
        A = A.reshape((0,) + B.shape)
    if A.ndim != 3 or A.shape[1:] != B.shape:
        raise ShapeMismatch(f"constraint terms have shape {A.shape}, expected (*, {B.shape[0]}, {B.shape[1]})")
    q = A.shape[0]
    R = _as_exponent_matrix(R if R is not None else np.zeros((p, q), dtype=np.int64), p, q, "R")
    ids = _check_ids(ids, E.shape[0])
    perm = _sort_perm(ids)
    if perm is not None:
        ids = tuple(ids[i] for i in perm)
        E = E[perm, :]
        R = R[perm, :]
    return CPMZ(_frozen(C), _frozen(G), _frozen(E), _frozen(A), _frozen(B), _frozen(R), ids)


# ---------------------------------------------------------------------------
# classic representations, lifted losslessly into the polynomial family


@dataclass(frozen=True)
class Zonotope:
    c: np.ndarray
    G: np.ndarray
    ids: tuple[FactorId, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).reshape(-1))
        object.__setattr__(self, "G", _as_float_matrix(self.G, self.c.shape[0], None, "G"))


@dataclass(frozen=True)
class ConstrainedZonotope:
    c: np.ndarray
    G: np.ndarray
    A: np.ndarray
    b: np.ndarray
    ids: tuple[FactorId, ...] | None = None


@dataclass(frozen=True)
class MatrixZonotope:
    C: np.ndarray
    G: np.ndarray  # (gamma, m, n)
    ids: tuple[FactorId, ...] | None = None


@dataclass(frozen=True)
class ConstrainedMatrixZonotope:
    C: np.ndarray
    G: np.ndarray  # (gamma, m, n)
    A: np.ndarray  # (gamma, n_c, n_a)
    B: np.ndarray
    ids: tuple[FactorId, ...] | None = None


def lift(x) -> CPZ | CPMZ:
    """Lossless conversion into the polynomial representation.

    The exponent pattern (and constraint-exponent pattern where constraints
    exist) becomes the size-matched identity; fresh ids are allocated when
    the input carries none.
    """
    if isinstance(x, (CPZ, CPMZ)):
        return x
    if isinstance(x, Zonotope):
        h = x.G.shape[1]
        ids = list(x.ids) if x.ids is not None else fresh_ids(h)
        return new_cpz(x.c, x.G, np.eye(h, dtype=np.int64), ids=ids)
    if isinstance(x, ConstrainedZonotope):
        G = np.asarray(x.G, dtype=float)
        h = G.shape[1]
        A = np.asarray(x.A, dtype=float)
        if A.shape[1] != h:
            raise ShapeMismatch("constrained zonotope A must have one column per generator")
        ids = list(x.ids) if x.ids is not None else fresh_ids(h)
        eye = np.eye(h, dtype=np.int64)
        return new_cpz(x.c, G, eye, A, x.b, eye, ids=ids)
    if isinstance(x, MatrixZonotope):
        G = np.asarray(x.G, dtype=float)
        gamma = G.shape[0]
        ids = list(x.ids) if x.ids is not None else fresh_ids(gamma)
        return new_cpmz(x.C, G, np.eye(gamma, dtype=np.int64), ids=ids)
    if isinstance(x, ConstrainedMatrixZonotope):
        G = np.asarray(x.G, dtype=float)
        gamma = G.shape[0]
        A = np.asarray(x.A, dtype=float)
        if A.shape[0] != gamma:
            raise ShapeMismatch("constrained matrix zonotope needs one constraint term per generator")
        ids = list(x.ids) if x.ids is not None else fresh_ids(gamma)
        eye = np.eye(gamma, dtype=np.int64)
        return new_cpmz(x.C, G, eye, A, x.B, eye, ids=ids)
    raise TypeError(f"cannot lift {type(x).__name__}")


def relabel_fresh(S: CPZ | CPMZ) -> CPZ | CPMZ:
    """Same arrays, freshly allocated ids (row order preserved)."""
    ids = fresh_ids(S.num_factors)
    if isinstance(S, CPZ):
        return new_cpz(S.c, S.G, S.E, S.A, S.b, S.R, ids)
    return new_cpmz(S.C, S.G, S.E, S.A, S.B, S.R, ids)


# ---------------------------------------------------------------------------
# evaluation


def _monomials_single(E: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """prod_k vals[k]^E[k,i] for every column i, by direct products."""
    p, cols = E.shape
    if cols == 0:
        return np.zeros(0)
    if p == 0:
        return np.ones(cols)
    return np.prod(np.power(vals[:, None], E), axis=0)


def monomials_many(E: np.ndarray, V: np.ndarray, exact: bool | None = None) -> np.ndarray:
    """Monomial values for many assignments at once.

    ``V`` is (p, m) with one assignment per column; the result is (cols, m).
    The fast path uses exponentials of log magnitudes with exact handling of
    zeros and signs; accuracy is ~1e-12 relative, which is why exactness
    tests at 1e-10 evaluate assignments one at a time instead.
    """
    p, cols = E.shape
    m = V.shape[1]
    if cols == 0:
        return np.zeros((0, m))
    if p == 0:
        return np.ones((cols, m))
    if exact is None:
        exact = p * cols * m <= 2_000_000
    if exact:
        out = np.ones((cols, m))
        for k in range(p):
            out *= np.power(V[k][None, :], E[k][:, None])
        return out
    Et = E.T.astype(np.float64)
    absV = np.abs(V)
    zero = absV == 0.0
    logs = np.log(np.where(zero, 1.0, absV))
    mags = np.exp(Et @ logs)
    parity = (np.mod(Et, 2.0) @ (V < 0).astype(np.float64)) % 2.0
    mags[parity > 0.5] *= -1.0
    killed = (Et @ zero.astype(np.float64)) > 0.5
    mags[killed] = 0.0
    return mags


def eval_point(S: CPZ, assignment: FactorAssignment) -> np.ndarray:
    """Evaluate the defining sum at an assignment (constraints not checked)."""
    vals = assignment.values_for(S.ids)
    if S.num_generators == 0:
        return S.c.copy()
    return S.c + S.G @ _monomials_single(S.E, vals)


def eval_point_values(S: CPZ, vals: np.ndarray) -> np.ndarray:
    """Like :func:`eval_point` but with values given in id order."""
    if S.num_generators == 0:
        return S.c.copy()
    return S.c + S.G @ _monomials_single(S.E, np.asarray(vals, dtype=float))


def eval_point_many(S: CPZ, V: np.ndarray, chunk: int = 2_000_000) -> np.ndarray:
    """Evaluate at many assignments; V is (p, m) in id order, result (n, m).

    Generator columns are processed in chunks so that arbitrarily large
    representations evaluate within bounded memory.
    """
    V = np.asarray(V, dtype=float)
    m = V.shape[1]
    out = np.repeat(S.c[:, None], m, axis=1)
    h = S.num_generators
    for start in range(0, h, max(1, chunk // max(1, m))):
        stop = min(h, start + max(1, chunk // max(1, m)))
        mono = monomials_many(S.E[:, start:stop], V)
        out += S.G[:, start:stop] @ mono
    return out


def eval_matrix(Y: CPMZ, assignment: FactorAssignment) -> np.ndarray:
    """Evaluate the matrix-valued defining sum at an assignment."""
    vals = assignment.values_for(Y.ids)
    return eval_matrix_values(Y, vals)


def eval_matrix_values(Y: CPMZ, vals: np.ndarray) -> np.ndarray:
    if Y.num_generators == 0:
        return Y.C.copy()
    mono = _monomials_single(Y.E, np.asarray(vals, dtype=float))
    return Y.C + np.tensordot(mono, Y.G, axes=(0, 0))


def constraint_residual(S: CPZ | CPMZ, assignment: FactorAssignment) -> float:
    """Norm of the constraint defect at an assignment; zero iff feasible."""
    vals = assignment.values_for(S.ids)
    return constraint_residual_values(S, vals)


def constraint_residual_values(S: CPZ | CPMZ, vals: np.ndarray) -> float:
    vals = np.asarray(vals, dtype=float)
    if isinstance(S, CPZ):
        if S.num_constraints == 0:
            return 0.0
        mono = _monomials_single(S.R, vals)
        return float(np.linalg.norm(S.A @ mono - S.b))
    if S.B.size == 0 and S.num_constraint_terms == 0:
        return 0.0
    mono = _monomials_single(S.R, vals)
    total = np.tensordot(mono, S.A, axes=(0, 0)) if S.num_constraint_terms else np.zeros_like(S.B)
    return float(np.linalg.norm(total - S.B))


def is_feasible(S: CPZ | CPMZ, assignment: FactorAssignment, tol: float = FEASIBILITY_TOL) -> bool:
    return constraint_residual(S, assignment) <= tol


# ---------------------------------------------------------------------------
# vectorization helpers


def vec(M) -> np.ndarray:
    """Column-major vectorization (stacks columns)."""
    return np.asarray(M, dtype=float).flatten(order="F")


def reshape_convert(B, n_c: int) -> np.ndarray:
    """Inverse of :func:`vec` for a known row count ``n_c``."""
    B = np.asarray(B, dtype=float).reshape(-1)
    if n_c <= 0:
        raise NotDivisible("row count must be positive")
    if B.shape[0] % n_c != 0:
        raise NotDivisible(f"length {B.shape[0]} not divisible by {n_c}")
    return B.reshape((n_c, B.shape[0] // n_c), order="F")


# ---------------------------------------------------------------------------
# interval hull (sound outer box; exact for plain zonotopes)


def interval_hull(S: CPZ) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate bounds c +/- sum|G|; every point of S lies inside."""
    radius = np.abs(S.G).sum(axis=1) if S.num_generators else np.zeros(S.dim)
    return S.c - radius, S.c + radius


def interval_hull_matrix(Y: CPMZ) -> tuple[np.ndarray, np.ndarray]:
    radius = np.abs(Y.G).sum(axis=0) if Y.num_generators else np.zeros(Y.shape)
    return Y.C - radius, Y.C + radius


# ---------------------------------------------------------------------------
# compaction (exact representation rewrites; never applied implicitly)


def _dedup_columns(E: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge duplicate exponent columns, summing the paired value columns.

    ``values`` has one column per exponent column; rows are free.  Returns
    deduplicated (E, values) with columns in lexicographic order.
    """
    cols = E.shape[1]
    if cols <= 1:
        return E, values
    order = np.lexsort(E[::-1])
    Es = E[:, order]
    boundaries = np.empty(cols, dtype=bool)
    boundaries[0] = True
    boundaries[1:] = np.any(Es[:, 1:] != Es[:, :-1], axis=0)
    starts = np.flatnonzero(boundaries)
    Vs = np.add.reduceat(values[:, order], starts, axis=1)
    return Es[:, starts], Vs


def compact(S: CPZ, drop_unused_factors: bool = True) -> CPZ:
    """Exact representation cleanup.

    Drops zero generator columns, folds constant (all-zero-exponent) columns
    into the offset, merges generator columns with identical exponent
    columns, applies the analogous rewrites to the constraint blocks, and
    optionally drops factors that appear nowhere.  The represented set is
    unchanged; every assignment evaluates identically.
    """
    c, G, E, A, b, R = S.c, S.G, S.E, S.A, S.b, S.R
    if G.shape[1]:
        const = ~E.any(axis=0) if E.shape[0] else np.ones(G.shape[1], dtype=bool)
        if const.any():
            c = c + G[:, const].sum(axis=1)
            G, E = G[:, ~const], E[:, ~const]
        E, G = _dedup_columns(E, G)
        keep = np.abs(G).any(axis=0)
        G, E = G[:, keep], E[:, keep]
    if A.shape[1]:
        const = ~R.any(axis=0) if R.shape[0] else np.ones(A.shape[1], dtype=bool)
        if const.any():
            b = b - A[:, const].sum(axis=1)
            A, R = A[:, ~const], R[:, ~const]
        R, A = _dedup_columns(R, A)
        keep = np.abs(A).any(axis=0)
        A, R = A[:, keep], R[:, keep]
    ids = S.ids
    if drop_unused_factors and len(ids):
        used = E.any(axis=1) | R.any(axis=1)
        if not used.all():
            E, R = E[used], R[used]
            ids = tuple(i for i, u in zip(ids, used) if u)
    return new_cpz(c, G, E, A, b, R, ids)


def compact_matrix(Y: CPMZ, drop_unused_factors: bool = True) -> CPMZ:
    """Matrix-valued analogue of :func:`compact`."""
    C, G, E, A, B, R = Y.C, Y.G, Y.E, Y.A, Y.B, Y.R
    if G.shape[0]:
        const = ~E.any(axis=0) if E.shape[0] else np.ones(G.shape[0], dtype=bool)
        if const.any():
            C = C + G[const].sum(axis=0)
            G, E = G[~const], E[:, ~const]
        flat = G.reshape(G.shape[0], -1).T
        E, flat = _dedup_columns(E, flat)
        G = flat.T.reshape(-1, *Y.shape)
        keep = np.abs(G).reshape(G.shape[0], -1).any(axis=1)
        G, E = G[keep], E[:, keep]
    if A.shape[0]:
        const = ~R.any(axis=0) if R.shape[0] else np.ones(A.shape[0], dtype=bool)
        if const.any():
            B = B - A[const].sum(axis=0)
            A, R = A[~const], R[:, ~const]
        flat = A.reshape(A.shape[0], -1).T
        R, flat = _dedup_columns(R, flat)
        A = flat.T.reshape(-1, *Y.constraint_shape)
        keep = np.abs(A).reshape(A.shape[0], -1).any(axis=1)
        A, R = A[keep], R[:, keep]
    ids = Y.ids
    if drop_unused_factors and len(ids):
        used = E.any(axis=1) | R.any(axis=1)
        if not used.all():
            E, R = E[used], R[used]
            ids = tuple(i for i, u in zip(ids, used) if u)
    return new_cpmz(C, G, E, A, B, R, ids)


# ---------------------------------------------------------------------------
# serialization (JSON-compatible dicts; bit-exact for finite doubles)


def _int_rows(M: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in row] for row in M]


def _float_rows(M: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in M]


def to_dict(S: CPZ | CPMZ) -> dict:
    if isinstance(S, CPZ):
        return {
            "c": [float(v) for v in S.c],
            "G": _float_rows(S.G),
            "E": _int_rows(S.E),
            "A": _float_rows(S.A),
            "b": [float(v) for v in S.b],
            "R": _int_rows(S.R),
            "id": list(S.ids),
        }
    return {
        "C": _float_rows(S.C),
        "Glist": [_float_rows(g) for g in S.G],
        "E": _int_rows(S.E),
        "Alist": [_float_rows(a) for a in S.A],
        "B": _float_rows(S.B),
        "R": _int_rows(S.R),
        "id": list(S.ids),
    }


def _matrix_from(rows, width_hint: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        arr = arr.reshape((len(rows), width_hint if len(rows) else 0))
    return arr


def from_dict(data: dict) -> CPZ | CPMZ:
    ids = [int(i) for i in data.get("id", [])]
    if "Glist" in data:
        C = np.asarray(data["C"], dtype=float)
        glist = data.get("Glist", [])
        G = np.asarray(glist, dtype=float) if glist else np.zeros((0,) + C.shape)
        B = np.asarray(data.get("B", []), dtype=float)
        if B.size == 0:
            B = B.reshape(0, 0)
        alist = data.get("Alist", [])
        A = np.asarray(alist, dtype=float) if alist else np.zeros((0,) + B.shape)
        E = _matrix_from(data.get("E", []), G.shape[0])
        R = _matrix_from(data.get("R", []), A.shape[0])
        return new_cpmz(C, G, E, A, B, R, ids)
    c = np.asarray(data["c"], dtype=float)
    G = _matrix_from(data.get("G", []), 0)
    if G.shape[0] == 0:
        G = np.zeros((c.shape[0], 0))
    A = _matrix_from(data.get("A", []), 0)
    b = np.asarray(data.get("b", []), dtype=float)
    E = _matrix_from(data.get("E", []), G.shape[1])
    R = _matrix_from(data.get("R", []), A.shape[1])
    return new_cpz(c, G, E, A, b, R, ids)


# ---------------------------------------------------------------------------
# small constructors used across the package


def singleton(point) -> CPZ:
    """The one-point set {point}."""
    return new_cpz(np.asarray(point, dtype=float))


def ones_singleton(n: int) -> CPZ:
    return singleton(np.ones(n))


def id_groups_disjoint(groups: Iterable[Iterable[FactorId]]) -> bool:
    seen: set[FactorId] = set()
    for group in groups:
        ids = set(group)
        if ids & seen:
            return False
        seen |= ids
    return True
