"""Discrepancy and worst-case error engines.

Kernel worst-case errors use the double-sum formula

    e^2 = int int K - (2/N) sum_x int K(x, .) + (1/N^2) sum_{x,y} K(x, y)

with the closed forms ``int K(x, .) = prod_j (1 - x_j^2)/2`` and
``int int K = 3^-s`` for the anchored kernel, and ``1`` and ``1`` for the
Sobolev kernel.  For the Sobolev kernel the constant part is removed
analytically before summation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bernoulli import bernoulli
from .errors import EmptyPointSet, InvalidInput, ProblemTooLarge, UnknownIntegrand
from .netcore import (
    DEFAULT_GUARD,
    DigitalNetSpec,
    PointSet,
    digital_shift,
    dual_enumerate,
    dual_min_weight,
    generate_points,
)
from .quality import type_pq
from .walsh import (
    ANCHORED,
    KernelId,
    kernel_walsh_diagonal,
    kernel_walsh_table,
    sobolev_decay_constant,
)
from .weights import NRT, top_position

__all__ = [
    "bernoulli",
    "kernel_eval",
    "worst_case_error",
    "worst_case_error_sq",
    "l2_discrepancy",
    "local_discrepancy",
    "star_discrepancy_exact",
    "shift_avg_wce_empirical",
    "shift_avg_wce_dual",
    "wce_dual_double",
    "integrate",
    "convergence_study",
    "ErrorBracket",
    "ShiftAverage",
    "StudyConfig",
    "StudyResult",
]

BLOCK_ELEMENTS = 1 << 22
STAR_GUARD = 10**8


def _coords(ps) -> np.ndarray:
    if isinstance(ps, PointSet):
        return ps.to_float()
    x = np.asarray(ps, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


# --- kernels -----------------------------------------------------------------


def _kernel_minus_one_1d(kernel: KernelId, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``K_alpha(x, y) - 1`` for the Sobolev kernel, broadcasting."""
    a = kernel.alpha
    out = np.zeros(np.broadcast(x, y).shape)
    for r in range(1, a + 1):
        out += bernoulli(r, x) * bernoulli(r, y) / math.factorial(r) ** 2
    sign = 1.0 if a % 2 == 1 else -1.0
    out += sign * bernoulli(2 * a, np.abs(x - y)) / math.factorial(2 * a)
    return out


def kernel_1d(kernel: KernelId, x, y) -> np.ndarray:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if kernel.kind == "anchored":
        return np.minimum(1.0 - x, 1.0 - y)
    return 1.0 + _kernel_minus_one_1d(kernel, x, y)


def kernel_eval(kernel: KernelId, x, y) -> float:
    """Product over coordinates of the 1-D kernel at real vectors ``x, y``."""
    x, y = np.atleast_1d(np.asarray(x, dtype=np.float64)), np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise InvalidInput("points differ in dimension")
    return float(np.prod(kernel_1d(kernel, x, y)))


def kernel_mean_1d(kernel: KernelId, x) -> np.ndarray:
    """``int_0^1 K(x, y) dy`` per coordinate."""
    x = np.asarray(x, dtype=np.float64)
    if kernel.kind == "anchored":
        return (1.0 - x * x) / 2.0
    return np.ones_like(x)


def kernel_total(kernel: KernelId, s: int) -> float:
    return 3.0**-s if kernel.kind == "anchored" else 1.0


# --- worst-case error ----------------------------------------------------------


def _pair_sum(kernel: KernelId, X: np.ndarray, Y: np.ndarray) -> float:
    """``sum_{x in X, y in Y} K(x, y)`` (anchored) or ``sum (K - 1)`` (Sobolev), blockwise."""
    N, s = X.shape
    rows = max(1, BLOCK_ELEMENTS // max(1, Y.shape[0] * s))
    parts = []
    for i in range(0, N, rows):
        Xi = X[i : i + rows]
        if kernel.kind == "anchored":
            prod = np.ones((Xi.shape[0], Y.shape[0]))
            for j in range(s):
                prod *= 1.0 - np.maximum(Xi[:, j, None], Y[None, :, j])
            parts.append(float(np.sum(prod)))
        else:
            # Q_j = Q_{j-1} + a_j (1 + Q_{j-1}), a_j = K_j - 1
            Q = np.zeros((Xi.shape[0], Y.shape[0]))
            for j in range(s):
                aj = _kernel_minus_one_1d(kernel, Xi[:, j, None], Y[None, :, j])
                Q = Q + aj * (1.0 + Q)
            parts.append(float(np.sum(Q)))
    return math.fsum(parts)


def worst_case_error_sq(kernel: KernelId, ps) -> float:
    """Squared worst-case error of the equal-weight rule on ``ps``."""
    X = _coords(ps)
    N, s = X.shape
    if N == 0:
        raise EmptyPointSet("worst-case error of an empty point set")
    S2 = _pair_sum(kernel, X, X)
    if kernel.kind == "anchored":
        S1 = math.fsum(np.prod(kernel_mean_1d(kernel, X), axis=1))
        return 3.0**-s - 2.0 * S1 / N + S2 / N**2
    return S2 / N**2


def worst_case_error(kernel: KernelId, ps) -> float:
    return math.sqrt(max(worst_case_error_sq(kernel, ps), 0.0))


def l2_discrepancy(ps) -> float:
    """L2 star discrepancy (anchored-kernel worst-case error)."""
    return worst_case_error(ANCHORED, ps)


def local_discrepancy(ps, y) -> float:
    """``#{x in [0, y)} / N - prod_j y_j`` with strict inequalities."""
    X = _coords(ps)
    if X.shape[0] == 0:
        raise EmptyPointSet("local discrepancy of an empty point set")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    inside = np.all(X < y[None, :], axis=1)
    return float(inside.mean() - np.prod(y))


def star_discrepancy_exact(ps, guard: float = STAR_GUARD) -> float:
    """Exact ``sup_y |local discrepancy|`` over the critical grid.

    Candidate corners take each coordinate from the point coordinates or 1;
    open and closed box counts come from an s-dimensional histogram.
    """
    X = _coords(ps)
    N, s = X.shape
    if N == 0:
        raise EmptyPointSet("star discrepancy of an empty point set")
    grids, idx = [], []
    for j in range(s):
        g = np.unique(np.append(X[:, j], 1.0))
        grids.append(g)
        idx.append(np.searchsorted(g, X[:, j]))
    cells = math.prod(len(g) for g in grids)
    if cells * s > guard:
        raise ProblemTooLarge(f"critical grid has {cells} corners (guard {guard:g})")
    H = np.zeros([len(g) for g in grids], dtype=np.int64)
    np.add.at(H, tuple(idx), 1)
    closed, opened = H, H
    for ax in range(s):
        closed = np.cumsum(closed, axis=ax)
        # exclusive prefix sums count points strictly below the corner
        opened = np.cumsum(opened, axis=ax)
        pad = np.zeros_like(np.take(opened, [0], axis=ax))
        opened = np.concatenate([pad, np.delete(opened, -1, axis=ax)], axis=ax)
    vol = np.ones([1] * s)
    for j, g in enumerate(grids):
        shape = [1] * s
        shape[j] = len(g)
        vol = vol * g.reshape(shape)
    return float(max(np.max(vol - opened / N), np.max(closed / N - vol)))


# --- shift averages ------------------------------------------------------------


@dataclass(frozen=True)
class ShiftAverage:
    mean: float
    stderr: float
    R: int
    seed: int | None
    shift_digits: int


def default_shift_digits(b: int, n: int) -> int:
    """Largest digit count with ``b^d < 2^53`` (float-exact), at least ``n``."""
    d = 1
    while b ** (d + 1) < 2**53:
        d += 1
    return max(n, d)


def random_shifts(R: int, s: int, digits: int, b: int, seed: int) -> np.ndarray:
    """Digitwise uniform shifts from a counter-based generator, shape ``(R, s, digits)``."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.integers(0, b, size=(R, s, digits), dtype=np.int64)


def shift_avg_wce_empirical(
    kernel: KernelId,
    spec: DigitalNetSpec | PointSet,
    R: int = 32,
    seed: int = 0,
    shift_digits: int | None = None,
    shifts: np.ndarray | None = None,
) -> ShiftAverage:
    """Mean and standard error of ``e^2(P + delta)`` over ``R`` random digital shifts.

    Shifts carry ``shift_digits`` digits (default: as many as a double
    resolves), so they approximate uniform shifts rather than shifts on the
    point grid.  Explicit ``shifts`` of shape ``(R, s, d)`` override sampling.
    """
    ps = generate_points(spec) if isinstance(spec, DigitalNetSpec) else spec
    if ps.N == 0:
        raise EmptyPointSet("no points to shift")
    if shifts is None:
        if R < 1:
            raise InvalidInput("need at least one shift")
        d = default_shift_digits(ps.b, ps.n) if shift_digits is None else max(shift_digits, ps.n)
        shifts = random_shifts(R, ps.s, d, ps.b, seed)
    else:
        shifts = np.asarray(shifts)
        R, d = shifts.shape[0], shifts.shape[2]
        seed = None
    base = ps.with_precision(max(d, ps.n))
    if d < base.n:
        shifts = np.concatenate([shifts, np.zeros((R, ps.s, base.n - d), dtype=np.int64)], axis=2)
    vals = np.array([worst_case_error_sq(kernel, digital_shift(base, shifts[i])) for i in range(R)])
    stderr = float(vals.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0
    return ShiftAverage(float(vals.mean()), stderr, R, seed, base.n)


@dataclass(frozen=True)
class ErrorBracket:
    """Certified enclosure ``lower <= value <= upper`` of a truncated dual sum.

    ``partial`` is the truncated sum itself and ``tail`` the bound on what the
    truncation omits.
    """

    lower: float
    upper: float
    cutoff: int
    partial: float
    tail: float

    def contains(self, v: float, slack: float = 1e-12) -> bool:
        return self.lower - slack <= v <= self.upper + slack

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "cutoff": self.cutoff}


def decay_constant(kernel: KernelId, b: int) -> float:
    """Per-coordinate constant D with ``|K^(k, l)| <= D b^(-mu_1(k) - mu_1(l))``.

    Anchored: 1/3 (binary only).  Sobolev: the closed-form constant, raised to
    1 because the (0, 0) coefficient equals 1.
    """
    if kernel.kind == "anchored":
        if b != 2:
            raise InvalidInput("the anchored-kernel decay constant is available for b = 2 only")
        return 1.0 / 3.0
    return max(1.0, sobolev_decay_constant(kernel.alpha, b))


def _series_tail(term: Callable[[int], float], start: int, ratio_ok: Callable[[int], float]) -> float:
    """``sum_{z >= start} term(z)`` for an eventually geometric positive series."""
    z = start
    parts = []
    while True:
        t = term(z)
        parts.append(t)
        q = ratio_ok(z)
        if q < 1 and z > start + 50 and t * q / (1 - q) < 1e-18 * max(math.fsum(parts), 1e-300):
            parts.append(t * q / (1 - q))
            break
        z += 1
        if z > start + 20000:
            raise AssertionError("series tail did not converge")
    return math.fsum(parts)


def shift_avg_wce_dual(kernel: KernelId, spec: DigitalNetSpec, cutoff: int, guard: int = DEFAULT_GUARD) -> ErrorBracket:
    """Bracket for ``sum_{k in dual \\ 0} K^(k, k)`` (the shift-averaged e^2).

    The enumerated part covers ``mu_1(k) <= cutoff``; the tail combines the
    coefficient decay with the count bound ``b^(z - mu + 1)(z + 1)^(s - 1)``.
    """
    b, s = spec.b, spec.s
    D = decay_constant(kernel, b)
    mu, _ = dual_min_weight(spec, NRT, guard)
    lower = 0.0
    if cutoff >= mu:
        diag = kernel_walsh_diagonal(kernel, b, cutoff)
        terms = []
        for k in dual_enumerate(spec, NRT, cutoff, guard):
            terms.append(math.prod(float(diag[kj]) for kj in k))
        lower = math.fsum(terms)
    start = max(cutoff + 1, mu)

    def term(z: int) -> float:
        return D**s * b ** (-z - mu + 1.0) * (z + 1.0) ** (s - 1)

    def ratio(z: int) -> float:
        return ((z + 2.0) / (z + 1.0)) ** (s - 1) / b

    tail = _series_tail(term, start, ratio)
    return ErrorBracket(lower, lower + tail, cutoff, lower, tail)


# --- pair counts outside T for the double-sum tail -----------------------------


@functools.lru_cache(maxsize=16)
def _pair_count_table(theta: int, b: int, cmax: int) -> np.ndarray:
    """``N[c, d]``: 1-D pairs (k, l) with ``mu_1 = (c, d)`` and type sum < theta.

    The common lowest-term suffix r of k and l has top position w; the parts
    above it carry p and q terms whose lowest terms differ.
    """
    T = [1] + [(b - 1) * b ** (w - 1) for w in range(1, cmax + 1)]

    def A(p: int, c: int, w: int) -> int:
        if p == 0:
            return int(c == w)
        if c <= w:
            return 0
        return math.comb(c - w - 1, p - 1) * (b - 1) ** p

    def M(p: int, q: int, c: int, d: int, wmin: int) -> int:
        return sum(T[w] * A(p, c, w) * A(q, d, w) for w in range(wmin, min(c, d) + 1))

    out = np.zeros((cmax + 1, cmax + 1), dtype=object)
    for c in range(cmax + 1):
        for d in range(cmax + 1):
            tot = 0
            for p in range(theta):
                for q in range(theta - p):
                    v = M(p, q, c, d, 0)
                    if p >= 1 and q >= 1:
                        v -= M(p - 1, q - 1, c, d, 1)
                    tot += v
            out[c, d] = tot
    return out


def pair_tail_bound(kernel: KernelId, b: int, s: int, cutoff: int, extra: int = 60) -> float:
    """Bound on ``sum |K^(k, l)|`` over pairs outside T with ``mu_1(k) + mu_1(l) > cutoff``.

    Uses the decay bound per coordinate and exact counts of 1-D pairs of each
    weight outside T; dual membership is not used, so the bound is loose but
    valid for every net.  Pairs with a coordinate weight above ``cutoff + extra``
    are covered by ``N(c, d) <= theta^2 b^(theta-1) (max+1)^(theta-1) b^min(c, d)``.
    """
    D = decay_constant(kernel, b)
    theta = kernel.sparsity_threshold
    cmax = cutoff + extra
    Nt = _pair_count_table(theta, b, cmax)
    g = np.zeros(2 * cmax + 1)
    for c in range(cmax + 1):
        for d in range(cmax + 1):
            if Nt[c, d]:
                g[c + d] += float(Nt[c, d]) * float(b) ** -(c + d)

    def crude(M: int) -> float:
        return theta**2 * float(b) ** (theta - 1) * (M + 1.0) ** (theta - 1) * (2 * M + 1.0) * float(b) ** -M

    def ratio(M: int) -> float:
        return ((M + 2.0) / (M + 1.0)) ** (theta - 1) * (2 * M + 3.0) / (2 * M + 1.0) / b

    beta = _series_tail(crude, cmax + 1, ratio)
    conv = np.ones(1)
    for _ in range(s):
        conv = np.convolve(conv, g)
    within = math.fsum(conv[cutoff + 1 :].tolist())
    mass = math.fsum(g.tolist())
    return D**s * (within + s * beta * (mass + beta) ** (s - 1))


def wce_dual_double(
    kernel: KernelId,
    spec: DigitalNetSpec,
    cutoff: int,
    guard: int = DEFAULT_GUARD,
    skip_T: bool = True,
) -> ErrorBracket:
    """Bracket for ``e^2 = sum_{k, l in dual \\ 0} K^(k, l)``.

    Pairs with ``mu_1(k) + mu_1(l) <= cutoff`` are summed exactly; those in
    ``T_{>= theta}`` are skipped when ``skip_T`` (their coefficients vanish).
    ``lower = max(0, partial - tail)`` and ``upper = partial + tail``.
    """
    b, s = spec.b, spec.s
    theta = kernel.sparsity_threshold
    mu, _ = dual_min_weight(spec, NRT, guard)
    partial = 0.0
    if cutoff >= 2 * mu:
        duals = dual_enumerate(spec, NRT, cutoff - mu, guard)
        r = max(top_position(kj, b) for k in duals for kj in k)
        table = kernel_walsh_table(kernel, b, r)
        wts = [sum(top_position(kj, b) for kj in k) for k in duals]
        terms = []
        type_cache: dict[tuple[int, int], int] = {}
        for k, wk in zip(duals, wts):
            for l, wl in zip(duals, wts):
                if wk + wl > cutoff:
                    continue
                if skip_T:
                    hit = False
                    for kj, lj in zip(k, l):
                        key = (kj, lj)
                        if key not in type_cache:
                            t = type_pq(kj, lj, b)
                            type_cache[key] = t.p + t.q
                        if type_cache[key] >= theta:
                            hit = True
                            break
                    if hit:
                        continue
                v = 1.0 + 0j
                for kj, lj in zip(k, l):
                    v *= table[kj, lj]
                terms.append(v.real)
        partial = math.fsum(terms)
    tail = pair_tail_bound(kernel, b, s, cutoff)
    return ErrorBracket(max(0.0, partial - tail), partial + tail, cutoff, partial, tail)


# --- integrands ----------------------------------------------------------------


@dataclass(frozen=True)
class Integrand:
    name: str
    func: Callable[..., np.ndarray]
    exact: Callable[..., float]
    doc: str = ""


INTEGRANDS: dict[str, Integrand] = {
    "constant": Integrand(
        "constant",
        lambda X, c=1.0: np.full(X.shape[0], float(c)),
        lambda s, c=1.0: float(c),
        "f = c",
    ),
    "monomial": Integrand(
        "monomial",
        lambda X, c=2: np.prod(X**c, axis=1),
        lambda s, c=2: float((c + 1.0) ** -s),
        "f = prod_j x_j^c",
    ),
    "quad_gamma": Integrand(
        "quad_gamma",
        lambda X, gamma=1.0: np.prod(1.0 + gamma * (X**2 - 1.0 / 3.0), axis=1),
        lambda s, gamma=1.0: 1.0,
        "f = prod_j (1 + gamma (x_j^2 - 1/3))",
    ),
}


def _integrand(name: str) -> Integrand:
    try:
        return INTEGRANDS[name]
    except KeyError:
        raise UnknownIntegrand(f"unknown integrand {name!r}; known: {sorted(INTEGRANDS)}") from None


def integrate(f: str, ps, **params) -> float:
    """Equal-weight average of a registered integrand over ``ps``."""
    X = _coords(ps)
    if X.shape[0] == 0:
        raise EmptyPointSet("cannot average over an empty point set")
    vals = _integrand(f).func(X, **params)
    return math.fsum(vals.tolist()) / X.shape[0]


def exact_integral(f: str, s: int, **params) -> float:
    return _integrand(f).exact(s, **params)


# --- convergence studies ----------------------------------------------------------


METRICS = ("l2", "star", "wce", "wce_shift", "integration", "mc_integration")


@dataclass(frozen=True)
class StudyConfig:
    """A sweep over m of one metric on one construction.

    ``construction`` is a descriptor dictionary without ``m``; ``s`` is the
    underlying dimension (before interlacing).  ``R`` and ``seed`` drive the
    shifted and Monte Carlo metrics.
    """

    construction: dict
    metric: str
    m_values: tuple[int, ...]
    kernel: str = "anchored"
    alpha: int = 1
    R: int = 32
    seed: int = 0
    integrand: str = "monomial"
    integrand_params: dict = field(default_factory=dict)
    replicas: int = 128

    def __post_init__(self):
        if self.metric not in METRICS:
            raise InvalidInput(f"metric must be one of {METRICS}, got {self.metric!r}")
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))

    def kernel_id(self) -> KernelId:
        return KernelId(self.kernel, self.alpha) if self.kernel == "sobolev" else ANCHORED

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StudyRow:
    m: int
    N: int
    metric: str
    value: float
    stderr: float | None = None


@dataclass
class StudyResult:
    rows: list[StudyRow]
    slope: float | None
    base: int
    config: StudyConfig | None = None

    def to_csv(self, header_comments: Sequence[str] = ()) -> str:
        lines = [f"# {c}" for c in header_comments]
        lines.append("m,N,metric,value,stderr")
        for r in self.rows:
            se = "" if r.stderr is None else f"{r.stderr:.17g}"
            lines.append(f"{r.m},{r.N},{r.metric},{r.value:.17g},{se}")
        return "\n".join(lines) + "\n"


def fit_slope(ms: Sequence[int], values: Sequence[float], b: int, window: str = "top-half") -> float | None:
    """Least-squares slope of ``log_b(value)`` against m on the top half of the range."""
    pairs = [(m, v) for m, v in zip(ms, values)]
    if window == "top-half":
        pairs = pairs[len(pairs) // 2 :]
    pairs = [(m, v) for m, v in pairs if v > 0]
    if len(pairs) < 2:
        return None
    x = np.array([p[0] for p in pairs], dtype=np.float64)
    y = np.log(np.array([p[1] for p in pairs])) / math.log(b)
    return float(np.polyfit(x, y, 1)[0])


def _mc_rms(cfg: StudyConfig, m: int, b: int, s: int) -> tuple[float, float]:
    ig = _integrand(cfg.integrand)
    exact = ig.exact(s, **cfg.integrand_params)
    ss = np.random.SeedSequence([cfg.seed, m])
    rng = np.random.Generator(np.random.Philox(ss))
    N = b**m
    errs = np.empty(cfg.replicas)
    for i in range(cfg.replicas):
        X = rng.random((N, s))
        errs[i] = ig.func(X, **cfg.integrand_params).mean() - exact
    sq = errs**2
    rms = math.sqrt(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(cfg.replicas) / (2 * rms)) if cfg.replicas > 1 and rms > 0 else 0.0
    return rms, se


def convergence_study(cfg: StudyConfig) -> StudyResult:
    """Evaluate the metric for each m and fit the decay slope."""
    from .constructions import Descriptor, build_spec

    rows: list[StudyRow] = []
    base = int(cfg.construction.get("b", 2))
    ker = cfg.kernel_id()
    for m in cfg.m_values:
        desc = Descriptor.from_json({**cfg.construction, "m": m})
        s_final = desc.dimension
        N = desc.b**m
        stderr = None
        if cfg.metric == "mc_integration":
            value, stderr = _mc_rms(cfg, m, desc.b, s_final)
        else:
            spec = build_spec(desc)
            if cfg.metric == "l2":
                value = l2_discrepancy(generate_points(spec))
            elif cfg.metric == "star":
                value = star_discrepancy_exact(generate_points(spec))
            elif cfg.metric == "wce":
                value = worst_case_error(ker, generate_points(spec))
            elif cfg.metric == "wce_shift":
                sa = shift_avg_wce_empirical(ker, spec, cfg.R, cfg.seed)
                value = math.sqrt(max(sa.mean, 0.0))
                stderr = sa.stderr / (2 * value) if value > 0 else 0.0
            else:
                ps = generate_points(spec)
                value = abs(integrate(cfg.integrand, ps, **cfg.integrand_params) - exact_integral(cfg.integrand, s_final, **cfg.integrand_params))
        rows.append(StudyRow(m, N, cfg.metric, float(value), stderr))
    slope = fit_slope([r.m for r in rows], [r.value for r in rows], base)
    return StudyResult(rows, slope, base, cfg)
