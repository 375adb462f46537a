"""Quality parameters of digital nets.

The t-value is obtained from the minimum weight of a nonzero dual element,
``t = alpha m - mu_alpha(P^perp) + 1``.  An independent rank test over the
generating-matrix rows cross-checks it on small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import SearchSpaceTooLarge
from .gf import rank_mod
from .netcore import (
    DEFAULT_GUARD,
    DigitalNetSpec,
    _combos,
    coordinate_shapes,
    dual_enumerate,
    dual_min_weight,
)
from .weights import NRT, WeightSpec, as_multi_index, digit_terms, weight

__all__ = [
    "TValueReport",
    "TypePQ",
    "WeightSpec",
    "weight",
    "t_value",
    "rank_oracle",
    "t_rank_oracle",
    "type_pq",
    "in_T_geq",
    "count_dual_by_weight",
    "count_pairs_not_T",
    "verify_equidistribution",
    "check_bounds",
]


@dataclass(frozen=True)
class TValueReport:
    """Outcome of a t-value computation.

    When ``exact`` is false, ``t`` is an upper bound taken from ``bound_source``
    and ``mu_min`` is the matching lower bound on the minimum dual weight.
    """

    t: int
    mu_min: int
    method: str
    exact: bool
    weight_kind: str
    alpha: int = 1
    truncated: bool = False
    witness: tuple[int, ...] | None = None
    bound_source: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TypePQ:
    p: int
    q: int


def t_from_mu(mu: int, m: int, alpha: int = 1) -> int:
    return alpha * m - mu + 1


def t_value(
    spec: DigitalNetSpec,
    w: WeightSpec = NRT,
    guard: int = DEFAULT_GUARD,
    tolerant: bool = False,
    fallback_t: int | None = None,
    fallback_source: str = "trivial",
) -> TValueReport:
    """Exact (t or t_alpha) value by minimum-weight dual search.

    With ``tolerant=True`` a tripped guard yields ``fallback_t`` (default:
    the trivial bound ``alpha m``) flagged ``exact=False`` instead of raising.
    """
    alpha = w.alpha
    truncated = alpha > 1 and spec.n < alpha * spec.m
    try:
        mu, wit = dual_min_weight(spec, w, guard)
    except SearchSpaceTooLarge:
        if not tolerant:
            raise
        t_up = alpha * spec.m if fallback_t is None else min(fallback_t, alpha * spec.m)
        src = fallback_source if fallback_t is not None and fallback_t <= alpha * spec.m else "trivial"
        mu_low = alpha * spec.m - t_up + 1
        return TValueReport(t_up, mu_low, "bound", False, w.kind, alpha, truncated, None, src)
    return TValueReport(t_from_mu(mu, spec.m, alpha), mu, "dual-search", True, w.kind, alpha, truncated, wit)


def _rows_independent(spec: DigitalNetSpec, rows: list[tuple[int, int]]) -> bool:
    """Rows given as (coordinate, 1-based position); positions beyond n are zero rows."""
    if not rows:
        return True
    if any(a > spec.n for _, a in rows) or len(rows) > spec.m:
        return False
    R = np.stack([spec.matrices[j][a - 1] for j, a in rows])
    return rank_mod(R, spec.b) == len(rows)


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cuts + (total + parts - 1,):
            out.append(c - prev - 1)
            prev = c
        yield tuple(out)


def rank_oracle(spec: DigitalNetSpec, rho: int, w: WeightSpec = NRT, guard: int = 2**20) -> bool:
    """Whether every admissible row selection of weight ``rho`` is linearly independent.

    NRT: for every composition ``d_1 + ... + d_s = rho`` the first ``d_j`` rows
    of each ``C_j`` together are independent.  Dick(alpha): for every choice of
    at most alpha leading positions per coordinate with weight sum <= rho, those
    rows plus (for full selections) all rows below them are independent.
    """
    if rho <= 0:
        return True
    if w.alpha == 1:
        count = math.comb(rho + spec.s - 1, spec.s - 1)
        if count > guard:
            raise SearchSpaceTooLarge(f"{count} compositions exceed guard {guard}")
        for comp in _compositions(rho, spec.s):
            rows = [(j, a) for j, d in enumerate(comp) for a in range(1, d + 1)]
            if not _rows_independent(spec, rows):
                return False
        return True
    alpha = w.alpha
    shapes = coordinate_shapes(alpha, rho)
    seen = 0
    for combo in _combos(shapes, spec.s, 1, rho):
        seen += 1
        if seen > guard:
            raise SearchSpaceTooLarge(f"row selections exceed guard {guard}")
        rows = []
        for j, (_, pat) in enumerate(combo):
            rows.extend((j, a) for a in pat)
            if len(pat) == alpha:
                rows.extend((j, a) for a in range(1, pat[-1]))
        if not _rows_independent(spec, rows):
            return False
    return True


def t_rank_oracle(spec: DigitalNetSpec, w: WeightSpec = NRT, guard: int = 2**20) -> int:
    """t from the largest independent weight ``rho``: ``t = alpha m - rho``."""
    rho = 0
    while rank_oracle(spec, rho + 1, w, guard):
        rho += 1
    return w.alpha * spec.m - rho


# --- type (p, q) -------------------------------------------------------------


def type_pq(k: int, l: int, b: int) -> TypePQ:
    """Numbers of leading digit terms to strip from k and l to reach a common remainder.

    Terms are compared from the least significant end; the longest common run
    of identical (position, digit) terms is kept.
    """
    tk, tl = digit_terms(k, b), digit_terms(l, b)
    L = 0
    while L < len(tk) and L < len(tl) and tk[-1 - L] == tl[-1 - L]:
        L += 1
    return TypePQ(len(tk) - L, len(tl) - L)


def in_T_geq(kvec, lvec, alpha: int, b: int) -> bool:
    """Whether some coordinate has type sum ``p_j + q_j >= alpha``."""
    kv, lv = as_multi_index(kvec), as_multi_index(lvec)
    for k, l in zip(kv, lv):
        t = type_pq(k, l, b)
        if t.p + t.q >= alpha:
            return True
    return False


# --- dual counting -----------------------------------------------------------


def count_dual_by_weight(spec: DigitalNetSpec, w: WeightSpec, z: int, guard: int = DEFAULT_GUARD) -> int:
    """Exact number of nonzero dual elements of weight exactly ``z``."""
    if z < 1:
        return 0
    return sum(1 for k in dual_enumerate(spec, w, z, guard) if weight(k, w, spec.b) == z)


def dual_count_bound(z: int, mu: int, s: int, b: int) -> int:
    """Upper bound ``b^(z - mu + 1) (z + 1)^(s - 1)`` on NRT-weight-z dual elements (0 below mu)."""
    if z < mu:
        return 0
    return b ** (z - mu + 1) * (z + 1) ** (s - 1)


def count_pairs_not_T(spec: DigitalNetSpec, z: int, alpha: int, guard: int = DEFAULT_GUARD) -> int:
    """Pairs of nonzero dual elements with ``mu_1(k) + mu_1(l) = z`` outside ``T_{>= alpha}``."""
    if z < 2:
        return 0
    duals = dual_enumerate(spec, NRT, z - 1, guard)
    by_w: dict[int, list] = {}
    for k in duals:
        by_w.setdefault(weight(k, NRT, spec.b), []).append(k)
    pairs = sum(len(by_w.get(u, ())) * len(by_w.get(z - u, ())) for u in range(1, z))
    if pairs > guard:
        raise SearchSpaceTooLarge(f"{pairs} pairs exceed guard {guard}")
    count = 0
    for u in range(1, z):
        for k in by_w.get(u, ()):
            for l in by_w.get(z - u, ()):
                if not in_T_geq(k, l, alpha, spec.b):
                    count += 1
    return count


# --- equidistribution --------------------------------------------------------


def verify_equidistribution(spec: DigitalNetSpec, t: int, points=None) -> bool:
    """Every elementary box of volume ``b^(t-m)`` holds exactly ``b^t`` points."""
    from .netcore import generate_points

    if t >= spec.m:
        return True
    if t < 0:
        return False
    ps = generate_points(spec) if points is None else points
    b, s, n = spec.b, spec.s, ps.n
    total = spec.m - t
    digits = ps.digits.astype(np.int64)
    for comp in _compositions(total, s):
        if any(c > n for c in comp):
            return False
        box = np.zeros(ps.N, dtype=np.int64)
        for j, c in enumerate(comp):
            for i in range(c):
                box = box * b + digits[:, j, i]
        counts = np.bincount(box, minlength=b**total)
        if np.any(counts != b**t):
            return False
    return True


# --- analytic bounds ----------------------------------------------------------


def interlacing_bound(alpha: int, m: int, t: int, s: int) -> int:
    """``t_alpha <= alpha min(m, t + floor(s (alpha - 1) / 2))`` for nets interlaced from a (t, m, alpha s)-net."""
    return alpha * min(m, t + (s * (alpha - 1)) // 2)


def propagation_bound(t_beta: int, alpha: int, beta: int) -> int:
    """``t_alpha <= ceil(t_beta alpha / beta)`` for alpha <= beta."""
    return -(-t_beta * alpha // beta)


def interpolation_holds(k, alpha: int, beta: int, b: int) -> bool:
    """``mu_alpha >= (alpha-1)/(beta-1) mu_beta + (beta-alpha)/(beta-1) mu_1`` (exact rationals)."""
    kv = as_multi_index(k)
    ma = weight(kv, WeightSpec(alpha), b)
    mb = weight(kv, WeightSpec(beta), b)
    m1 = weight(kv, NRT, b)
    rhs = Fraction(alpha - 1, beta - 1) * mb + Fraction(beta - alpha, beta - 1) * m1
    return ma >= rhs


@dataclass
class BoundVerdicts:
    propagation: list[tuple[int, int, int, int, bool]] = field(default_factory=list)
    interlacing: list[tuple[int, int, int, bool]] = field(default_factory=list)
    interpolation: list[tuple[tuple[int, ...], int, int, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v[-1] for v in self.propagation + self.interlacing + self.interpolation)


def check_bounds(
    reports: dict[int, TValueReport],
    m: int | None = None,
    s: int | None = None,
    underlying_t: int | None = None,
    interlace_alpha: int | None = None,
    sample_indices: Sequence = (),
    b: int = 2,
    interpolation_pairs: Sequence[tuple[int, int]] = ((2, 3), (2, 4), (3, 4)),
) -> BoundVerdicts:
    """Check the propagation rule, the interlacing bound and the weight interpolation inequality.

    ``reports`` maps alpha to an exact report for the same net.  The
    interlacing bound is checked for every alpha <= ``interlace_alpha`` when
    the underlying t-value is known; for smaller orders it follows from the
    propagation rule.
    """
    out = BoundVerdicts()
    exact = {a: r for a, r in reports.items() if r.exact}
    for a, beta in itertools.combinations(sorted(exact), 2):
        bound = propagation_bound(exact[beta].t, a, beta)
        out.propagation.append((a, beta, exact[a].t, bound, exact[a].t <= bound))
    if underlying_t is not None and interlace_alpha and m is not None and s is not None:
        lb = interlacing_bound(interlace_alpha, m, underlying_t, s)
        if interlace_alpha in exact:
            r = exact[interlace_alpha]
            out.interlacing.append((interlace_alpha, r.t, lb, r.t <= lb))
    for k in sample_indices:
        for a, beta in interpolation_pairs:
            out.interpolation.append((as_multi_index(k), a, beta, interpolation_holds(k, a, beta, b)))
    return out
