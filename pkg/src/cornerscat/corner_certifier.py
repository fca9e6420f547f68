"""Exact certification of Taylor-coefficient rigidity at a right corner.

Setting: two Helmholtz-type fields u, v on a neighbourhood of a
right-angle corner (the two half-axes Gamma1 = {x2=0, x1>0} and
Gamma2 = {x1=0, x2>0}), with distinct nonzero potentials q1 != q2,
whose difference w = u - v is divergence free and has vanishing
tangential trace and vanishing curl trace on both half-axes.  Writing
the Taylor coefficients of the components of w as a^(j)_{n,m}
(j in {1,2} the component, n/m the degrees in x1/x2), these data are
equivalent to an infinite linear system over the coefficients:

* fourth-order recursion (from eliminating one field between the two
  Helmholtz recursions), for each component j and all n, m >= 0:

      (m+4)(m+3)(m+2)(m+1) a_{n,m+4} + (n+4)(n+3)(n+2)(n+1) a_{n+4,m}
    + 2 (n+2)(n+1)(m+2)(m+1) a_{n+2,m+2}
    + (q1+q2) [ (n+2)(n+1) a_{n+2,m} + (m+2)(m+1) a_{n,m+2} ]
    + q1 q2 a_{n,m} = 0

* divergence-free condition:  (n+1) a^(1)_{n+1,m} = -(m+1) a^(2)_{n,m+1}
* tangential trace:           a^(1)_{n,0} = 0,  a^(2)_{0,m} = 0
* curl trace:                 (n+1) a^(2)_{n+1,0} = a^(1)_{n,1},
                              a^(2)_{1,m} = (m+1) a^(1)_{0,m+1}

The rigidity statement is that the only solution is a == 0.  This
module truncates the system at a chosen total degree M and computes
its exact nullspace: the truncation provably forces all coefficients
of total order <= M-4 to vanish (the guaranteed margin), which is
what `certify_vanishing` checks and reports.

It also generates, from the same recursion, the small square "proof
matrices" whose rank/determinant facts carry the induction over odd
and even orders, plus the one-parameter odd-order families that play
the role of would-be counterexamples.

Note on degeneracy: besides q1 == q2 (which breaks the reconstruction
of u and v from their difference), q1*q2 == 0 is rejected as well.
With one potential equal to zero the rigidity genuinely fails - e.g.
the harmonic field w = (x2, x1) is divergence- and curl-free with
vanishing tangential trace on both half-axes - so certification pairs
must keep the zeroth-order closure term q1*q2 alive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .exact_linalg import (
    QMatrix,
    as_rational,
    rational,
    sparse_nullspace,
    sparse_rref,
)

_ZERO = rational(0)
_ONE = rational(1)

#: Fixed seeded list of generic certification pairs (q1, q2); all
#: entries nonzero and pairwise-distinct within each pair.
DEFAULT_PAIRS = (
    ("1", "2"),
    ("2", "3"),
    ("3", "5"),
    ("7/2", "1/3"),
    ("5/7", "9/2"),
)


class DegeneratePair(ValueError):
    """q1 == q2 (or a zero potential) breaks the certification setup."""


class BadOrder(ValueError):
    """Truncation order outside the operation's validity range."""


class CoefficientIndex(NamedTuple):
    """Index triple of a^(j)_{n,m}: component j in {1,2}, degrees n, m."""

    j: int
    n: int
    m: int


@dataclass(frozen=True)
class WavenumberPair:
    """Two distinct nonzero rational potentials (q1, q2)."""

    q1: object
    q2: object

    @staticmethod
    def of(q1, q2) -> "WavenumberPair":
        return WavenumberPair(as_rational(q1), as_rational(q2))

    def validate(self):
        if self.q1 == self.q2:
            raise DegeneratePair(f"q1 == q2 == {self.q1}")
        if self.q1 == 0 or self.q2 == 0:
            raise DegeneratePair(
                "zero potential: rigidity fails for q1*q2 == 0 "
                "(harmonic counterexample w = (x2, x1))"
            )


@dataclass(frozen=True)
class CoefficientGrid:
    """Map CoefficientIndex -> rational, truncated at total degree `order`."""

    order: int
    values: dict

    def __post_init__(self):
        for idx in self.values:
            if idx.n + idx.m > self.order:
                raise ValueError(f"index {idx} exceeds order {self.order}")

    def get(self, j: int, n: int, m: int):
        return self.values.get(CoefficientIndex(j, n, m), _ZERO)


@dataclass(frozen=True)
class TruncatedSystem:
    """Dense truncated relation system with column and row provenance.

    row_tags entries are (kind, j, n, m) where kind is one of
    "tangential_trace", "curl_trace", "divergence", "fourth_order" and
    (j, n, m) identifies the generating substitution.
    """

    matrix: QMatrix
    column_index: tuple  # position -> CoefficientIndex
    row_tags: tuple


@dataclass(frozen=True)
class CertificateReport:
    M: int
    pairs: tuple
    n_unknowns: int
    rank: int
    nullity: int
    guaranteed_vanishing_order: int
    verdict: str  # "certified" | "refuted" | "inconclusive"
    witness: Optional[tuple] = None  # ((CoefficientIndex, value), ...) if refuted

    def to_json_dict(self) -> dict:
        out = {
            "M": self.M,
            "pairs": [
                [
                    int(p.q1.numerator),
                    int(p.q1.denominator),
                    int(p.q2.numerator),
                    int(p.q2.denominator),
                ]
                for p in self.pairs
            ],
            "n_unknowns": self.n_unknowns,
            "rank": self.rank,
            "nullity": self.nullity,
            "guaranteed_vanishing_order": self.guaranteed_vanishing_order,
            "verdict": self.verdict,
        }
        if self.witness is not None:
            out["witness"] = [
                [idx.j, idx.n, idx.m, f"{v.numerator}/{v.denominator}"]
                for idx, v in self.witness
            ]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


# ---------------------------------------------------------------------------
# Row generation
# ---------------------------------------------------------------------------


def _column_key(idx: CoefficientIndex):
    # Order columns by total degree, then x1-degree, then component:
    # keeps the truncated matrix banded (each fourth-order row spans at
    # most five consecutive degree blocks).
    return (idx.n + idx.m, idx.n, idx.j)


def fourth_order_row(j: int, n: int, m: int, q1, q2) -> dict:
    """The fourth-order recursion row generated by (j, n, m)."""
    s = q1 + q2
    p = q1 * q2
    row = {
        CoefficientIndex(j, n, m + 4): rational(
            (m + 4) * (m + 3) * (m + 2) * (m + 1)
        ),
        CoefficientIndex(j, n + 4, m): rational(
            (n + 4) * (n + 3) * (n + 2) * (n + 1)
        ),
        CoefficientIndex(j, n + 2, m + 2): rational(
            2 * (n + 2) * (n + 1) * (m + 2) * (m + 1)
        ),
    }
    if s:
        row[CoefficientIndex(j, n + 2, m)] = s * ((n + 2) * (n + 1))
        row[CoefficientIndex(j, n, m + 2)] = s * ((m + 2) * (m + 1))
    if p:
        row[CoefficientIndex(j, n, m)] = p
    return row


def _relation_rows(M: int, q1, q2):
    """All truncated relation rows as (tag, sparse row) pairs.

    Deterministic order: tangential trace, curl trace, divergence,
    fourth-order recursion - the latter two by increasing n+m then n.
    """
    out = []
    # Tangential trace on the two half-axes.
    for n in range(M + 1):
        out.append(
            (("tangential_trace", 1, n, 0), {CoefficientIndex(1, n, 0): _ONE})
        )
    for m in range(M + 1):
        out.append(
            (("tangential_trace", 2, 0, m), {CoefficientIndex(2, 0, m): _ONE})
        )
    # Curl trace on the two half-axes.
    for n in range(M):
        out.append(
            (
                ("curl_trace", 2, n, 0),
                {
                    CoefficientIndex(2, n + 1, 0): rational(n + 1),
                    CoefficientIndex(1, n, 1): -_ONE,
                },
            )
        )
    for m in range(M):
        out.append(
            (
                ("curl_trace", 1, 0, m),
                {
                    CoefficientIndex(2, 1, m): _ONE,
                    CoefficientIndex(1, 0, m + 1): rational(-(m + 1)),
                },
            )
        )
    # Divergence-free condition.
    for total in range(M):
        for n in range(total + 1):
            m = total - n
            out.append(
                (
                    ("divergence", 0, n, m),
                    {
                        CoefficientIndex(1, n + 1, m): rational(n + 1),
                        CoefficientIndex(2, n, m + 1): rational(m + 1),
                    },
                )
            )
    # Fourth-order recursion.
    for total in range(max(M - 3, 0)):
        for n in range(total + 1):
            m = total - n
            for j in (1, 2):
                out.append(
                    (("fourth_order", j, n, m), fourth_order_row(j, n, m, q1, q2))
                )
    return out


def build_truncated_system(M: int, pair: WavenumberPair) -> TruncatedSystem:
    """Assemble the dense truncated system at total degree M."""
    if M < 4:
        raise BadOrder(f"M must be >= 4, got {M}")
    pair.validate()
    columns = sorted(
        (
            CoefficientIndex(j, n, total - n)
            for total in range(M + 1)
            for n in range(total + 1)
            for j in (1, 2)
        ),
        key=_column_key,
    )
    col_of = {idx: k for k, idx in enumerate(columns)}
    tagged = _relation_rows(M, pair.q1, pair.q2)
    flat = []
    for _, row in tagged:
        dense = [_ZERO] * len(columns)
        for idx, v in row.items():
            dense[col_of[idx]] = v
        flat.extend(dense)
    matrix = QMatrix(len(tagged), len(columns), tuple(flat))
    return TruncatedSystem(
        matrix=matrix,
        column_index=tuple(columns),
        row_tags=tuple(tag for tag, _ in tagged),
    )


# ---------------------------------------------------------------------------
# Per-order reduction of the trace/divergence relations.
#
# The tangential-trace, curl-trace and divergence rows couple only
# coefficients of a single total degree K.  Solving those exactly per
# degree expresses all 2(K+1) order-K coefficients over a small set of
# free parameters; the fourth-order rows then act on parameters alone,
# which keeps high truncation orders cheap without changing the system
# being certified.
# ---------------------------------------------------------------------------


def _order_columns(K: int):
    return [CoefficientIndex(j, n, K - n) for n in range(K + 1) for j in (1, 2)]


def _order_relation_rows(K: int):
    """Trace/divergence rows touching only total degree K."""
    rows = []
    rows.append({CoefficientIndex(1, K, 0): _ONE})
    rows.append({CoefficientIndex(2, 0, K): _ONE})
    if K >= 1:
        rows.append(
            {
                CoefficientIndex(2, K, 0): rational(K),
                CoefficientIndex(1, K - 1, 1): -_ONE,
            }
        )
        rows.append(
            {
                CoefficientIndex(2, 1, K - 1): _ONE,
                CoefficientIndex(1, 0, K): rational(-K),
            }
        )
        for n in range(K):
            m = K - 1 - n
            rows.append(
                {
                    CoefficientIndex(1, n + 1, m): rational(n + 1),
                    CoefficientIndex(2, n, m + 1): rational(m + 1),
                }
            )
    return rows


def _order_basis(K: int, preferred_free: Optional[Sequence[CoefficientIndex]] = None):
    """Solve the order-K trace/divergence relations exactly.

    Returns (params, expr): `params` is the list of free coefficient
    indices (equal to `preferred_free` when given), and `expr` maps
    every order-K coefficient index to a sparse dict
    {param position -> rational} expressing it over the parameters.
    """
    columns = _order_columns(K)
    if preferred_free:
        pref = list(preferred_free)
        pref_set = set(pref)
        ordered = [c for c in columns if c not in pref_set] + pref
    else:
        ordered = sorted(columns, key=_column_key, reverse=True)
        pref = None
    col_of = {idx: k for k, idx in enumerate(ordered)}
    rows = [
        {col_of[idx]: v for idx, v in row.items()} for row in _order_relation_rows(K)
    ]
    pivots, pivot_rows, _ = sparse_rref(rows, len(ordered))
    pivot_set = set(pivots)
    free_cols = [c for c in range(len(ordered)) if c not in pivot_set]
    params = [ordered[c] for c in free_cols]
    if pref is not None and params != pref:
        raise BadOrder(
            f"order {K}: preferred parameters {pref} are not a valid free set "
            f"(got {params})"
        )
    pos_of = {c: p for p, c in enumerate(free_cols)}
    expr = {}
    for p, idx in enumerate(params):
        expr[idx] = {p: _ONE}
    for pc, prow in zip(pivots, pivot_rows):
        expr[ordered[pc]] = {
            pos_of[c]: -v for c, v in prow.items() if c != pc and v
        }
    return params, expr


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def certify_vanishing(M: int, pairs: Sequence[WavenumberPair]) -> CertificateReport:
    """Exact nullspace check of the truncated system for each pair.

    Certified iff, for every pair, every nullspace basis vector of the
    truncated system vanishes on all coordinates of total order
    <= M - 4 (the guaranteed margin of the truncation).
    """
    if M < 6:
        raise BadOrder(f"certification needs M >= 6, got {M}")
    if not pairs:
        raise ValueError("need at least one wavenumber pair")
    for pair in pairs:
        pair.validate()

    # Per-degree parametrisation of the trace/divergence relations is
    # pair independent; compute once.
    per_order = [_order_basis(K) for K in range(M + 1)]
    param_cols = []  # global param position -> (order K, CoefficientIndex)
    offset = [0] * (M + 1)
    for K, (params, _) in enumerate(per_order):
        offset[K] = len(param_cols)
        param_cols.extend((K, idx) for idx in params)
    n_params = len(param_cols)
    n_unknowns = (M + 1) * (M + 2)
    n_eliminated = n_unknowns - n_params

    def param_row(j, n, m, q1, q2):
        row = {}
        for idx, coeff in fourth_order_row(j, n, m, q1, q2).items():
            K = idx.n + idx.m
            _, expr = per_order[K]
            for p, v in expr[idx].items():
                g = offset[K] + p
                acc = row.get(g, _ZERO) + coeff * v
                if acc:
                    row[g] = acc
                elif g in row:
                    del row[g]
        return row

    low_cols = {
        g for g, (K, _) in enumerate(param_cols) if K <= M - 4
    }

    rank = nullity = None
    verdict = "certified"
    witness = None
    witness_pair = None
    for pair in pairs:
        rows = []
        for total in range(M - 3):
            for n in range(total + 1):
                for j in (1, 2):
                    rows.append(param_row(j, n, total - n, pair.q1, pair.q2))
        pivots, pivot_rows, _ = sparse_rref(rows, n_params)
        pair_rank = n_eliminated + len(pivots)
        pair_nullity = n_params - len(pivots)
        if rank is None:
            rank, nullity = pair_rank, pair_nullity
        elif (pair_rank, pair_nullity) != (rank, nullity):
            verdict = "inconclusive"

        # A free low-order column, or a pivot row that ties a low-order
        # pivot to a surviving free column, betrays a nonvanishing
        # low-order coefficient in the nullspace.
        bad_free = None
        pivot_set = set(pivots)
        for g in range(n_params):
            if g in pivot_set:
                continue
            if g in low_cols:
                bad_free = g
                break
            for pc, prow in zip(pivots, pivot_rows):
                if pc in low_cols and prow.get(g):
                    bad_free = g
                    break
            if bad_free is not None:
                break
        if bad_free is not None and verdict != "inconclusive":
            verdict = "refuted"
            vec = {bad_free: _ONE}
            for pc, prow in zip(pivots, pivot_rows):
                v = prow.get(bad_free)
                if v:
                    vec[pc] = -v
            witness = _expand_param_vector(vec, param_cols, per_order, offset, M)
            witness_pair = pair
            break

    return CertificateReport(
        M=M,
        pairs=tuple(pairs),
        n_unknowns=n_unknowns,
        rank=rank,
        nullity=nullity,
        guaranteed_vanishing_order=M - 4,
        verdict=verdict,
        witness=witness,
    )


def _expand_param_vector(vec, param_cols, per_order, offset, M):
    """Expand a parameter-space vector to full coefficient values."""
    out = []
    for K in range(M + 1):
        params, expr = per_order[K]
        base = offset[K]
        local = {
            p: vec[base + p] for p in range(len(params)) if vec.get(base + p)
        }
        if not local:
            continue
        for idx, combo in expr.items():
            acc = _ZERO
            for p, c in combo.items():
                if p in local:
                    acc += c * local[p]
            if acc:
                out.append((idx, acc))
    out.sort(key=lambda iv: _column_key(iv[0]))
    return tuple(out)


# ---------------------------------------------------------------------------
# Order-restricted families and proof matrices
# ---------------------------------------------------------------------------


def odd_family_value(Mp: int, j: int, n: int, m: int):
    """The one-parameter odd-order family at parameter value 1.

    For odd order Mp, the trace/divergence relations restricted to
    degree Mp admit (after closure, see `order_family_nullity`) exactly
    one family: a^(1)_{n,m} = (-1)^((m-1)/2) C(Mp, m) for odd m,
    a^(2)_{n,m} = (-1)^(m/2) C(Mp, m) for even m, all else zero.
    """
    if n + m != Mp:
        return _ZERO
    if j == 1 and m % 2 == 1:
        sign = -1 if ((m - 1) // 2) % 2 else 1
        return rational(sign * _binom(Mp, m))
    if j == 2 and m % 2 == 0:
        sign = -1 if (m // 2) % 2 else 1
        return rational(sign * _binom(Mp, m))
    return _ZERO


def _binom(n, k):
    from math import comb

    return comb(n, k)


def order_family_nullity(M: int, with_leading_closure: bool = True):
    """Nullity and basis of the order-M restricted relation system.

    Restricts the trace/divergence relations to couple only order-M
    coefficients.  With `with_leading_closure` (the default) the
    fourth-order recursion rows generated at level M-4 are imposed as
    well, restricted to their order-M (leading) terms - lower orders
    being zero by the induction the proof runs on.  Returns
    (nullity, basis) with the basis as CoefficientGrids at order M.
    """
    if M < 3:
        raise BadOrder(f"M must be >= 3, got {M}")
    columns = sorted(_order_columns(M), key=_column_key, reverse=True)
    col_of = {idx: k for k, idx in enumerate(columns)}
    rows = [
        {col_of[idx]: v for idx, v in row.items()} for row in _order_relation_rows(M)
    ]
    if with_leading_closure and M >= 4:
        level = M - 4
        for n in range(level + 1):
            m = level - n
            for j in (1, 2):
                full = fourth_order_row(j, n, m, _ONE, _ONE)
                restricted = {
                    col_of[idx]: v
                    for idx, v in full.items()
                    if idx.n + idx.m == M
                }
                rows.append(restricted)
    pivots, pivot_rows, _ = sparse_rref(rows, len(columns))
    basis_sparse = sparse_nullspace(pivots, pivot_rows, len(columns))
    basis = [
        CoefficientGrid(
            order=M, values={columns[c]: v for c, v in vec.items() if v}
        )
        for vec in basis_sparse
    ]
    return len(basis), basis


def _chain_parameters(M: int):
    """The proof's free-parameter positions at order M.

    Returns (c_positions, b_positions): the c-chain couples a^(2) with
    even x2-degree to a^(1) with odd x2-degree; the b-chain is the
    complementary one.  Valid for M >= 6.
    """
    if M < 6:
        raise BadOrder(f"chain parameters defined for M >= 6, got {M}")
    if M % 2 == 1:
        c = [CoefficientIndex(2, M, 0)]
        c += [
            CoefficientIndex(1, M - 2 * k - 1, 2 * k + 1)
            for k in range(1, (M - 5) // 2 + 1)
        ]
        c += [CoefficientIndex(1, 0, M)]
        b = [CoefficientIndex(1, M - 2 * k, 2 * k) for k in range(1, (M - 3) // 2 + 1)]
    else:
        c = [CoefficientIndex(2, M, 0)]
        c += [
            CoefficientIndex(1, M - 2 * k - 1, 2 * k + 1)
            for k in range(1, (M - 4) // 2 + 1)
        ]
        b = [CoefficientIndex(1, M - 2 * k, 2 * k) for k in range(1, (M - 4) // 2 + 1)]
        b += [CoefficientIndex(1, 0, M)]
    return c, b


def _leading_param_row(M: int, j: int, n: int, m: int, expr, n_c: int, n_b: int):
    """Order-M leading terms of the level-(M-4) row (j,n,m) over (c, b).

    Also verifies, exactly, that the (q1+q2)-weighted middle terms
    cancel on the odd family at order M-2 (which is why these proof
    rows carry no dependence on the potentials).
    """
    assert n + m == M - 4
    full = fourth_order_row(j, n, m, _ONE, _ONE)
    c_part = [_ZERO] * n_c
    b_part = [_ZERO] * n_b
    mid_check = _ZERO
    for idx, coeff in full.items():
        total = idx.n + idx.m
        if total == M:
            for p, v in expr[idx].items():
                if p < n_c:
                    c_part[p] += coeff * v
                else:
                    b_part[p - n_c] += coeff * v
        elif total == M - 2:
            mid_check += coeff * odd_family_value(M - 2, idx.j, idx.n, idx.m)
    return c_part, b_part, mid_check


def _order_M_expression(M: int):
    c_pos, b_pos = _chain_parameters(M)
    _, expr = _order_basis(M, preferred_free=c_pos + b_pos)
    return c_pos, b_pos, expr


def build_proof_matrix_odd(M: int):
    """The odd-order c-chain proof system (A_M, B_M at unit parameter).

    Rows come from substituting (n, m, j) = (M-4, 0, 2), (M-5, 1, 1)
    and (M-2k-5, 2k+1, 1) for k = 1..(M-5)/2 into the fourth-order
    recursion, keeping order-M terms over the c parameters; the
    right-hand side is the value of the same substitution on the
    order-(M-4) odd family at unit parameter.
    """
    if M % 2 == 0 or M < 7:
        raise BadOrder(f"odd proof matrix needs odd M >= 7, got {M}")
    c_pos, b_pos, expr = _order_M_expression(M)
    n_c, n_b = len(c_pos), len(b_pos)
    row_specs = [(M - 4, 0, 2), (M - 5, 1, 1)]
    row_specs += [(M - 2 * k - 5, 2 * k + 1, 1) for k in range(1, (M - 5) // 2 + 1)]
    flat = []
    rhs = []
    for n, m, j in row_specs:
        c_part, b_part, mid = _leading_param_row(M, j, n, m, expr, n_c, n_b)
        if any(b_part) or mid != 0:
            raise AssertionError(
                f"odd proof row ({j},{n},{m}) leaks outside the c-chain"
            )
        flat.extend(c_part)
        rhs.append(odd_family_value(M - 4, j, n, m))
    return QMatrix(len(row_specs), n_c, tuple(flat)), rhs


def build_G_tilde(M: int) -> QMatrix:
    """The odd-order b-chain proof matrix (square, size (M-3)/2).

    Rows from (n, m, j) = (M-2k-4, 2k, 1) for k = 0..(M-5)/2, order-M
    terms over the b parameters.
    """
    if M % 2 == 0 or M < 7:
        raise BadOrder(f"b-chain proof matrix needs odd M >= 7, got {M}")
    c_pos, b_pos, expr = _order_M_expression(M)
    n_c, n_b = len(c_pos), len(b_pos)
    flat = []
    for k in range((M - 5) // 2 + 1):
        n, m, j = M - 2 * k - 4, 2 * k, 1
        c_part, b_part, mid = _leading_param_row(M, j, n, m, expr, n_c, n_b)
        if any(c_part) or mid != 0:
            raise AssertionError(
                f"b-chain proof row ({j},{n},{m}) leaks outside the b-chain"
            )
        flat.extend(b_part)
    return QMatrix(n_b, n_b, tuple(flat))


def build_even_matrices(M: int):
    """The even-order proof matrices (A for the c-chain, A~ for the b-chain).

    A rows: (n, m, j) = (M-4, 0, 2), (M-5, 1, 1) and (M-2k-5, 2k+1, 1)
    for k = 1..(M-6)/2.  A~ rows: (2k, M-2k-4, 1) for k = 0..(M-4)/2.
    Both square of size M/2 - 1.
    """
    if M % 2 == 1 or M < 6:
        raise BadOrder(f"even proof matrices need even M >= 6, got {M}")
    c_pos, b_pos, expr = _order_M_expression(M)
    n_c, n_b = len(c_pos), len(b_pos)
    a_specs = [(M - 4, 0, 2), (M - 5, 1, 1)]
    a_specs += [(M - 2 * k - 5, 2 * k + 1, 1) for k in range(1, (M - 6) // 2 + 1)]
    flat_a = []
    for n, m, j in a_specs:
        c_part, b_part, _ = _leading_param_row(M, j, n, m, expr, n_c, n_b)
        if any(b_part):
            raise AssertionError(f"even c-chain row ({j},{n},{m}) leaks")
        flat_a.extend(c_part)
    flat_at = []
    for k in range((M - 4) // 2 + 1):
        n, m, j = 2 * k, M - 2 * k - 4, 1
        c_part, b_part, _ = _leading_param_row(M, j, n, m, expr, n_c, n_b)
        if any(c_part):
            raise AssertionError(f"even b-chain row ({j},{n},{m}) leaks")
        flat_at.extend(b_part)
    A = QMatrix(len(a_specs), n_c, tuple(flat_a))
    A_tilde = QMatrix((M - 4) // 2 + 1, n_b, tuple(flat_at))
    return A, A_tilde


# ---------------------------------------------------------------------------
# Field reconstruction
# ---------------------------------------------------------------------------


def reconstruct_uv(grid: CoefficientGrid, pair: WavenumberPair):
    """Recover the two fields' coefficient grids from their difference.

    v^(j)_{n,m} = [(n+1)(n+2) a_{n+2,m} + (m+1)(m+2) a_{n,m+2}
                   + q1 a_{n,m}] / (q2 - q1),
    u analogously with q2 in place of q1; both defined for
    n + m <= order - 2, and u - v = a there exactly.
    """
    if pair.q1 == pair.q2:
        raise DegeneratePair(f"q1 == q2 == {pair.q1}")
    denom = pair.q2 - pair.q1
    order = grid.order - 2
    u_vals = {}
    v_vals = {}
    for total in range(max(order + 1, 0)):
        for n in range(total + 1):
            m = total - n
            for j in (1, 2):
                lap = (n + 1) * (n + 2) * grid.get(j, n + 2, m) + (m + 1) * (
                    m + 2
                ) * grid.get(j, n, m + 2)
                a = grid.get(j, n, m)
                v = (lap + pair.q1 * a) / denom
                u = (lap + pair.q2 * a) / denom
                idx = CoefficientIndex(j, n, m)
                if v:
                    v_vals[idx] = v
                if u:
                    u_vals[idx] = u
    return (
        CoefficientGrid(order=max(order, 0), values=u_vals),
        CoefficientGrid(order=max(order, 0), values=v_vals),
    )
