"""Exact set operations on constrained polynomial (matrix) zonotopes.

Every operation here except :func:`reduce` is algebraically exact: the
output representation denotes precisely the image of the operand sets under
the corresponding map.  The operational test for this is pointwise: for any
assignment feasible for the merged operands, evaluating the output equals
applying the scalar/vector/matrix operation to the evaluated operands.

Outputs are never compacted implicitly; identical exponent columns are kept
so that block sizes match the constructive definitions exactly.  Use
:func:`czreach.sets.compact` explicitly where representation growth matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, IndexOutOfRange, ShapeMismatch
from .factors import FactorId, fresh_ids
from .sets import (
    CPZ,
    CPMZ,
    _dedup_columns,
    _smallest_int_dtype,
    compact,
    new_cpmz,
    new_cpz,
    ones_singleton,
    vec,
)

# ---------------------------------------------------------------------------
# identifier merging


@dataclass(frozen=True)
class MergedPair:
    """Two sets rewritten over a common factor-id vector.

    Both members carry identical ids and denote exactly the same sets as the
    inputs; exponent rows for factors absent from an input are zero.
    """

    first: CPZ | CPMZ
    second: CPZ | CPMZ
    shared_id: tuple[FactorId, ...]


def _expand_rows(M: np.ndarray, ids: tuple[FactorId, ...], union: list[FactorId]) -> np.ndarray:
    """Embed rows indexed by ``ids`` into the row space of ``union``."""
    out = np.zeros((len(union), M.shape[1]), dtype=M.dtype)
    lookup = {fid: k for k, fid in enumerate(ids)}
    for row, fid in enumerate(union):
        k = lookup.get(fid)
        if k is not None:
            out[row] = M[k]
    return out


def _rebuild(S: CPZ | CPMZ, E: np.ndarray, R: np.ndarray, ids: list[FactorId]) -> CPZ | CPMZ:
    if isinstance(S, CPZ):
        return new_cpz(S.c, S.G, E, S.A, S.b, R, ids)
    return new_cpmz(S.C, S.G, E, S.A, S.B, R, ids)


def merge_id(S1: CPZ | CPMZ, S2: CPZ | CPMZ) -> MergedPair:
    """Align two sets on the union of their factor ids.

    The union vector appends to ``S1.ids`` those ids of ``S2`` not already
    present; both outputs are then stored in canonical (sorted) id order.
    """
    union = list(S1.ids) + [i for i in S2.ids if i not in set(S1.ids)]
    E1 = _expand_rows(S1.E, S1.ids, union)
    R1 = _expand_rows(S1.R, S1.ids, union)
    E2 = _expand_rows(S2.E, S2.ids, union)
    R2 = _expand_rows(S2.R, S2.ids, union)
    first = _rebuild(S1, E1, R1, union)
    second = _rebuild(S2, E2, R2, union)
    return MergedPair(first, second, first.ids)


# ---------------------------------------------------------------------------
# block assembly helpers


def _sum_columns(EA: np.ndarray, EB: np.ndarray) -> np.ndarray:
    """All pairwise column sums EA[:,i] + EB[:,j], i-major."""
    rows = EA.shape[0]
    maxv = int(EA.max() if EA.size else 0) + int(EB.max() if EB.size else 0)
    dtype = _smallest_int_dtype(maxv)
    out = EA.astype(dtype)[:, :, None] + EB.astype(dtype)[:, None, :]
    return out.reshape(rows, EA.shape[1] * EB.shape[1])


def _blkdiag(A1: np.ndarray, A2: np.ndarray) -> np.ndarray:
    r1, c1 = A1.shape
    r2, c2 = A2.shape
    out = np.zeros((r1 + r2, c1 + c2))
    out[:r1, :c1] = A1
    out[r1:, c1:] = A2
    return out


# ---------------------------------------------------------------------------
# multiplication of a matrix set with a vector set


def mul_cpmz_cpz(Y: CPMZ, P: CPZ) -> CPZ:
    """Exact product {Y p : Y in Y, p in P} as a CPZ.

    Output blocks: center C c, generators [G_i c | C G_P | G_i G_P[:,j]],
    exponents [E_Y | E_P | pairwise column sums], vectorized matrix
    constraints of Y stacked over the vector constraints of P.  Generator
    count is gamma + h_P + gamma * h_P.
    """
    m, n = Y.shape
    if P.dim != n:
        raise ShapeMismatch(f"matrix set has {n} columns, vector set has dimension {P.dim}")
    Yb, Pb = (pair := merge_id(Y, P)).first, pair.second
    gamma, hP = Yb.num_generators, Pb.num_generators

    center = Yb.C @ Pb.c
    g_yc = np.tensordot(Yb.G, Pb.c, axes=(2, 0)).T if gamma else np.zeros((m, 0))
    g_cg = Yb.C @ Pb.G
    if gamma and hP:
        cross = np.einsum("gmn,nh->ghm", Yb.G, Pb.G)
        g_f = cross.reshape(gamma * hP, m).T
        e_f = _sum_columns(Yb.E, Pb.E)
    else:
        g_f = np.zeros((m, gamma * hP))
        e_f = np.zeros((len(pair.shared_id), gamma * hP), dtype=np.int64)
    G = np.hstack([g_yc, g_cg, g_f])
    E = np.hstack([Yb.E.astype(np.int64), Pb.E.astype(np.int64), e_f.astype(np.int64)])

    vecA = Yb.vec_constraints()  # (qY, nc*na)
    A = _blkdiag(vecA.T, Pb.A)
    b = np.concatenate([vec(Yb.B) if Yb.B.size else np.zeros(0), Pb.b])
    R = np.hstack([Yb.R.astype(np.int64), Pb.R.astype(np.int64)])
    return new_cpz(center, G, E, A, b, R, pair.shared_id)


# ---------------------------------------------------------------------------
# addition, Cartesian product, elementwise product


def add_exact(P1: CPZ, P2: CPZ) -> CPZ:
    """Dependency-preserving Minkowski sum: pointwise p1 + p2 over shared factors."""
    if P1.dim != P2.dim:
        raise ShapeMismatch(f"dimension {P1.dim} vs {P2.dim}")
    S1, S2 = (pair := merge_id(P1, P2)).first, pair.second
    return new_cpz(
        S1.c + S2.c,
        np.hstack([S1.G, S2.G]),
        np.hstack([S1.E.astype(np.int64), S2.E.astype(np.int64)]),
        _blkdiag(S1.A, S2.A),
        np.concatenate([S1.b, S2.b]),
        np.hstack([S1.R.astype(np.int64), S2.R.astype(np.int64)]),
        pair.shared_id,
    )


def cartesian_exact(P1: CPZ, P2: CPZ) -> CPZ:
    """Exact stacked product: pointwise [p1; p2] with dependencies preserved."""
    S1, S2 = (pair := merge_id(P1, P2)).first, pair.second
    return new_cpz(
        np.concatenate([S1.c, S2.c]),
        _blkdiag(S1.G, S2.G),
        np.hstack([S1.E.astype(np.int64), S2.E.astype(np.int64)]),
        _blkdiag(S1.A, S2.A),
        np.concatenate([S1.b, S2.b]),
        np.hstack([S1.R.astype(np.int64), S2.R.astype(np.int64)]),
        pair.shared_id,
    )


def hadamard_exact(P1: CPZ, P2: CPZ) -> CPZ:
    """Exact elementwise product: pointwise p1 * p2 entrywise.

    Generator count is h1 + h2 + h1 * h2 with cross column k = h2*(i-1)+j
    carrying G1[:,i] * G2[:,j] under the exponent-sum column.
    """
    if P1.dim != P2.dim:
        raise ShapeMismatch(f"dimension {P1.dim} vs {P2.dim}")
    S1, S2 = (pair := merge_id(P1, P2)).first, pair.second
    n = S1.dim
    h1, h2 = S1.num_generators, S2.num_generators
    g_1c = S1.G * S2.c[:, None]
    g_c2 = S1.c[:, None] * S2.G
    if h1 and h2:
        g_f = np.einsum("ni,nj->nij", S1.G, S2.G).reshape(n, h1 * h2)
        e_f = _sum_columns(S1.E, S2.E)
    else:
        g_f = np.zeros((n, h1 * h2))
        e_f = np.zeros((len(pair.shared_id), h1 * h2), dtype=np.int64)
    return new_cpz(
        S1.c * S2.c,
        np.hstack([g_1c, g_c2, g_f]),
        np.hstack([S1.E.astype(np.int64), S2.E.astype(np.int64), e_f.astype(np.int64)]),
        _blkdiag(S1.A, S2.A),
        np.concatenate([S1.b, S2.b]),
        np.hstack([S1.R.astype(np.int64), S2.R.astype(np.int64)]),
        pair.shared_id,
    )


def pow_exact(P: CPZ, e: int) -> CPZ:
    """Elementwise power with all factors shared: exactly {p**e : p in P}.

    ``e = 0`` yields the all-ones singleton (empty-product convention).
    """
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    if e == 0:
        return ones_singleton(P.dim)
    out = P
    for _ in range(e - 1):
        out = hadamard_exact(out, P)
    return out


# ---------------------------------------------------------------------------
# projection and constant linear maps


def project(S: CPZ, indices) -> CPZ:
    """Coordinate selection; exact, constraints unchanged (0-based indices)."""
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise IndexOutOfRange(f"indices {idx} are not distinct")
    for i in idx:
        if not 0 <= i < S.dim:
            raise IndexOutOfRange(f"index {i} outside 0..{S.dim - 1}")
    return new_cpz(S.c[idx], S.G[idx, :], S.E, S.A, S.b, S.R, S.ids)


def map_linear(M, S: CPZ) -> CPZ:
    """Exact image under a constant matrix: {M s : s in S}."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != S.dim:
        raise ShapeMismatch(f"matrix shape {M.shape} does not act on dimension {S.dim}")
    return new_cpz(M @ S.c, M @ S.G, S.E, S.A, S.b, S.R, S.ids)


def affine_cpmz(K, Y: CPMZ, L) -> CPMZ:
    """Exact image {(K - Y) L : Y in Y}; exponents, constraints, ids unchanged."""
    K = np.asarray(K, dtype=float)
    L = np.asarray(L, dtype=float)
    if K.shape != Y.shape:
        raise ShapeMismatch(f"offset shape {K.shape} vs set shape {Y.shape}")
    if L.ndim != 2 or L.shape[0] != Y.shape[1]:
        raise ShapeMismatch(f"right factor shape {L.shape} does not conform to {Y.shape}")
    C = (K - Y.C) @ L
    G = -np.einsum("gmn,nr->gmr", Y.G, L) if Y.num_generators else np.zeros((0,) + C.shape)
    return new_cpmz(C, G, Y.E, Y.A, Y.B, Y.R, Y.ids)


# ---------------------------------------------------------------------------
# intersection of matrix sets


def _relabel_collisions(Y: CPMZ, taken: set[FactorId]) -> CPMZ:
    colliding = [i for i in Y.ids if i in taken]
    if not colliding:
        return Y
    replacement = dict(zip(colliding, fresh_ids(len(colliding))))
    ids = [replacement.get(i, i) for i in Y.ids]
    return new_cpmz(Y.C, Y.G, Y.E, Y.A, Y.B, Y.R, ids)


def intersect_cpmz(Y1: CPMZ, Y2: CPMZ) -> CPMZ:
    """Exact intersection of two matrix sets of equal shape.

    The output keeps Y1's offset and generators; equality with a member of
    Y2 is enforced through fully vectorized constraints (one column each),
    stacking Y1's constraints, Y2's constraints and the coupling rows
    vec(sum_i m_i G1_i) - vec(sum_j m_j G2_j) = vec(C2 - C1).  Factor spaces
    are treated as independent: any id collision in Y2 is relabeled fresh.
    """
    if Y1.shape != Y2.shape:
        raise ShapeMismatch(f"shape {Y1.shape} vs {Y2.shape}")
    Y2 = _relabel_collisions(Y2, set(Y1.ids))
    m, n = Y1.shape
    p1, p2 = Y1.num_factors, Y2.num_factors
    g1, g2 = Y1.num_generators, Y2.num_generators
    q1, q2 = Y1.num_constraint_terms, Y2.num_constraint_terms

    vecA1 = Y1.vec_constraints()
    vecA2 = Y2.vec_constraints()
    vecG1 = Y1.vec_generators()
    vecG2 = Y2.vec_generators()
    r1, r2, r3 = vecA1.shape[1], vecA2.shape[1], m * n
    rows = r1 + r2 + r3
    cols = q1 + q2 + g1 + g2

    A_hat = np.zeros((rows, cols))
    A_hat[:r1, :q1] = vecA1.T
    A_hat[r1 : r1 + r2, q1 : q1 + q2] = vecA2.T
    A_hat[r1 + r2 :, q1 + q2 : q1 + q2 + g1] = vecG1.T
    A_hat[r1 + r2 :, q1 + q2 + g1 :] = -vecG2.T
    B_hat = np.concatenate(
        [
            vec(Y1.B) if Y1.B.size else np.zeros(r1),
            vec(Y2.B) if Y2.B.size else np.zeros(r2),
            vec(Y2.C - Y1.C),
        ]
    ).reshape(rows, 1)

    R_hat = np.zeros((p1 + p2, cols), dtype=np.int64)
    R_hat[:p1, :q1] = Y1.R
    R_hat[p1:, q1 : q1 + q2] = Y2.R
    R_hat[:p1, q1 + q2 : q1 + q2 + g1] = Y1.E
    R_hat[p1:, q1 + q2 + g1 :] = Y2.E

    E_hat = np.zeros((p1 + p2, g1), dtype=np.int64)
    E_hat[:p1] = Y1.E

    ids = list(Y1.ids) + list(Y2.ids)
    return new_cpmz(Y1.C, Y1.G, E_hat, A_hat.T[:, :, None], B_hat, R_hat, ids)


# ---------------------------------------------------------------------------
# over-approximating order reduction (the only non-exact operation)


def reduce(S: CPZ, max_generators: int) -> CPZ:
    """Enclose S by a set with at most ``max_generators`` generator columns.

    Disabled by default everywhere; the output CONTAINS the input.  The
    smallest-norm columns (ties by lower index) are folded into an
    axis-aligned interval emitted as fresh independent unit-exponent
    generators.  Factors left without any generator appearance are removed;
    constraint terms mentioning a removed factor are dropped together with
    every constraint row they touch (a pure relaxation).
    """
    n = S.dim
    if max_generators < n:
        raise ValueError(f"max_generators={max_generators} below dimension {n}")
    h = S.num_generators
    if h <= max_generators:
        return S
    keep_count = max_generators - n
    norms = np.linalg.norm(S.G, axis=0)
    order = np.lexsort((np.arange(h), norms))  # ascending norm, ties by index
    dropped = np.zeros(h, dtype=bool)
    dropped[order[: h - keep_count]] = True

    radius = np.abs(S.G[:, dropped]).sum(axis=1)
    G_kept = S.G[:, ~dropped]
    E_kept = S.E[:, ~dropped]

    if S.num_factors:
        removed = S.E[:, dropped].any(axis=1) & ~E_kept.any(axis=1)
    else:
        removed = np.zeros(0, dtype=bool)
    A, b, R = S.A, S.b, S.R
    if removed.any() and S.num_constraint_terms:
        bad_cols = R[removed].any(axis=0)
        if bad_cols.any():
            bad_rows = np.abs(A[:, bad_cols]).any(axis=1)
            A = A[~bad_rows][:, ~bad_cols]
            b = b[~bad_rows]
            R = R[:, ~bad_cols]
    keep_factor = ~removed
    ids_kept = tuple(i for i, keep in zip(S.ids, keep_factor) if keep)
    E_kept = E_kept[keep_factor]
    R = R[keep_factor]

    new = fresh_ids(n)
    p_old = len(ids_kept)
    E_out = np.zeros((p_old + n, keep_count + n), dtype=np.int64)
    E_out[:p_old, :keep_count] = E_kept
    E_out[p_old:, keep_count:] = np.eye(n, dtype=np.int64)
    G_out = np.hstack([G_kept, np.diag(radius)])
    R_out = np.vstack([R, np.zeros((n, R.shape[1]), dtype=np.int64)])
    return new_cpz(S.c, G_out, E_out, A, b, R_out, list(ids_kept) + new)


# ---------------------------------------------------------------------------
# compacted fast paths (exact: operation followed by explicit compaction,
# built chunkwise so huge intermediates never materialize)


def hadamard_compacted(P1: CPZ, P2: CPZ, chunk_cols: int = 4_000_000, budget: int | None = None) -> CPZ:
    """compact(hadamard_exact(P1, P2)) without materializing h1*h2 columns."""
    if P1.dim != P2.dim:
        raise ShapeMismatch(f"dimension {P1.dim} vs {P2.dim}")
    S1, S2 = (pair := merge_id(P1, P2)).first, pair.second
    same = S1 is S2 or (S1 == S2)
    n = S1.dim
    h1, h2 = S1.num_generators, S2.num_generators
    if h1 * h2 <= chunk_cols:
        return compact(hadamard_exact(P1, P2))

    maxv = int(S1.E.max() if S1.E.size else 0) + int(S2.E.max() if S2.E.size else 0)
    dtype = _smallest_int_dtype(maxv)
    E1 = S1.E.astype(dtype)
    E2 = S2.E.astype(dtype)
    rows = E1.shape[0]

    acc_E = [np.hstack([E1, E2])]
    acc_G = [np.hstack([S1.G * S2.c[:, None], S1.c[:, None] * S2.G])]
    acc_cols = acc_E[0].shape[1]

    def _flush():
        nonlocal acc_E, acc_G, acc_cols
        E_all = np.hstack(acc_E)
        G_all = np.hstack(acc_G)
        E_d, G_d = _dedup_columns(E_all, G_all)
        acc_E, acc_G = [E_d], [G_d]
        acc_cols = E_d.shape[1]
        if budget is not None and acc_cols > budget:
            raise CapacityExceeded(f"compacted product exceeds {budget} generator columns")

    block = max(1, chunk_cols // max(1, h2))
    for start in range(0, h1, block):
        stop = min(h1, start + block)
        j0 = start if same else 0  # symmetric half when squaring a set
        e_blk = (E1[:, start:stop, None] + E2[:, None, j0:]).reshape(rows, -1)
        g_blk = np.einsum("ni,nj->nij", S1.G[:, start:stop], S2.G[:, j0:]).reshape(n, -1)
        if same:
            # off-diagonal pairs appear twice in the literal product
            width = h2 - j0
            scale = np.full((stop - start, width), 2.0)
            for local_i, i in enumerate(range(start, stop)):
                scale[local_i, : max(0, i - j0)] = 0.0  # j < i handled by symmetry
                scale[local_i, i - j0] = 1.0
            g_blk = g_blk * scale.reshape(1, -1)
            nz = scale.reshape(-1) != 0.0
            e_blk, g_blk = e_blk[:, nz], g_blk[:, nz]
        e_blk, g_blk = _dedup_columns(e_blk, g_blk)
        acc_E.append(e_blk)
        acc_G.append(g_blk)
        acc_cols += e_blk.shape[1]
        if acc_cols > 3 * chunk_cols:
            _flush()
    _flush()

    raw = new_cpz(
        S1.c * S2.c,
        acc_G[0],
        acc_E[0].astype(np.int64),
        _blkdiag(S1.A, S2.A),
        np.concatenate([S1.b, S2.b]),
        np.hstack([S1.R.astype(np.int64), S2.R.astype(np.int64)]),
        pair.shared_id,
    )
    return compact(raw)


def pow_compacted(P: CPZ, e: int, chunk_cols: int = 4_000_000, budget: int | None = None) -> CPZ:
    """compact(pow_exact(P, e)) with chunked intermediates."""
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    if e == 0:
        return ones_singleton(P.dim)
    out = P
    for _ in range(e - 1):
        out = hadamard_compacted(out, P, chunk_cols=chunk_cols, budget=budget)
    return out
