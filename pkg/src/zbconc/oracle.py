"""Ground truth for checking the bounds.

Exact class enumeration, seeded Monte Carlo with Clopper-Pearson
intervals, a numerical Chernoff optimizer, and domination reports that
line tails up against bounds.

Monte Carlo work is split into fixed-size chunks, chunk ``k`` seeded
from ``SeedSequence(seed).spawn(...)[k]``; the worker count only decides
how chunks are scheduled, so results do not depend on it.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import permstat
from .bounds import BoundKind
from .errors import DomainError
from .permstat import CAPS, EnumerationCaps, PermLaw, SquareMatrix
from .zerobias import DiscreteDist, _check_zero_bias_source

DEFAULT_LEVEL = 0.999
MC_CHUNK = 1 << 16
DOMINATION_SLACK = 1e-12


def _tail_tol(t: float) -> float:
    # count deviations equal to t up to rounding, which can only raise the tail
    return 1e-9 * (1.0 + abs(t))


@dataclass(frozen=True)
class TailEstimate:
    point: float
    ci_low: float
    ci_high: float
    trials: int
    method: str

    def __post_init__(self):
        if not (self.ci_low <= self.point <= self.ci_high):
            raise ValueError("TailEstimate needs ci_low <= point <= ci_high")

    @property
    def half_width(self) -> float:
        return max(self.point - self.ci_low, self.ci_high - self.point)


# -- exact enumeration -------------------------------------------------------

def _class_deviations(A: SquareMatrix, law: PermLaw, caps: EnumerationCaps):
    mu = permstat.law_mean(A, law)
    out = []
    for perms, w in permstat.enumerate_law(law, caps):
        out.append((np.sort(permstat.hoeffding_stats(A, perms) - mu), w))
    return out


def exact_tails(A: SquareMatrix, law: PermLaw, ts: Sequence[float],
                caps: EnumerationCaps = CAPS) -> list[TailEstimate]:
    """Exact P(Y - mu >= t) for each ``t``, with mixtures weighted per class."""
    classes = _class_deviations(A, law, caps)
    trials = sum(dev.size for dev, _ in classes)
    out = []
    for t in ts:
        t = float(t)
        parts = []
        for dev, w in classes:
            hits = dev.size - np.searchsorted(dev, t - _tail_tol(t), side="left")
            parts.append(w * hits / dev.size)
        p = min(math.fsum(parts), 1.0)
        out.append(TailEstimate(p, p, p, trials, "exact"))
    return out


def exact_tail(A: SquareMatrix, law: PermLaw, t: float,
               caps: EnumerationCaps = CAPS) -> TailEstimate:
    return exact_tails(A, law, [t], caps)[0]


def exact_moments(A: SquareMatrix, law: PermLaw,
                  caps: EnumerationCaps = CAPS) -> tuple[float, float]:
    """Mean and variance of Y over the enumerated law."""
    values = [(permstat.hoeffding_stats(A, perms), w) for perms, w in permstat.enumerate_law(law, caps)]
    mean = math.fsum(w * math.fsum(y) / y.size for y, w in values)
    var = math.fsum(w * math.fsum((y - mean) ** 2) / y.size for y, w in values)
    return mean, var


def exact_support(A: SquareMatrix, law: PermLaw, caps: EnumerationCaps = CAPS) -> tuple[float, float]:
    """Smallest and largest deviation Y - mu with positive probability."""
    classes = _class_deviations(A, law, caps)
    return (min(float(d[0]) for d, _ in classes), max(float(d[-1]) for d, _ in classes))


# -- Monte Carlo -------------------------------------------------------------

def clopper_pearson(k: int, n: int, level: float = DEFAULT_LEVEL) -> tuple[float, float]:
    alpha = 1.0 - level
    low = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, n - k + 1))
    high = 1.0 if k == n else float(stats.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return low, high


def _chunk_sizes(trials: int, chunk: int) -> list[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def mc_tail(A: SquareMatrix, law: PermLaw, t: float, trials: int, seed: int,
            level: float = DEFAULT_LEVEL, workers: int = 1, chunk: int = MC_CHUNK) -> TailEstimate:
    return mc_tails(A, law, [t], trials, seed, level, workers, chunk)[0]


def mc_tails(A: SquareMatrix, law: PermLaw, ts: Sequence[float], trials: int, seed: int,
             level: float = DEFAULT_LEVEL, workers: int = 1,
             chunk: int = MC_CHUNK) -> list[TailEstimate]:
    """Monte Carlo P(Y - mu >= t) from one shared set of seeded draws."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    mu = permstat.law_mean(A, law)
    thresholds = np.array([float(t) - _tail_tol(float(t)) for t in ts])
    sizes = _chunk_sizes(trials, chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(k: int) -> np.ndarray:
        rng = np.random.default_rng(seeds[k])
        dev = permstat.hoeffding_stats(A, permstat.sample_many(law, rng, sizes[k])) - mu
        return (dev[:, None] >= thresholds[None, :]).sum(axis=0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(len(sizes))))
    else:
        counts = [run(k) for k in range(len(sizes))]
    hits = np.sum(counts, axis=0, dtype=np.int64) if counts else np.zeros(len(ts), dtype=np.int64)
    out = []
    for k in hits.tolist():
        low, high = clopper_pearson(k, trials, level)
        out.append(TailEstimate(k / trials, low, high, trials, "monte_carlo"))
    return out


# -- Chernoff ----------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def chernoff_oracle(d: DiscreteDist, t: float) -> float:
    """inf over s >= 0 of exp(-s t) E[exp(s Y)] for mean-zero ``d``.

    The log objective is convex in s: a coarse log-spaced scan brackets
    the minimizer, golden-section search refines it. When ``t`` reaches
    the top atom the infimum is the limit as s grows, ``P(Y = t)``, or
    zero beyond it.
    """
    _check_zero_bias_source(d)
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0, got {t!r}")
    top = float(d.values[-1])
    if t > top + 1e-12 * max(1.0, abs(top)):
        return 0.0
    if t >= top - 1e-12 * max(1.0, abs(top)):
        return float(d.probs[-1])
    if t == 0:
        return 1.0
    log_p = np.log(d.probs)

    def g(s: float) -> float:
        return float(logsumexp(log_p + s * d.values)) - s * t

    spread = float(d.values[-1] - d.values[0])
    grid = np.concatenate(([0.0], np.logspace(-8, 4, 241) / spread))
    vals = np.array([g(s) for s in grid])
    i = int(np.argmin(vals))
    while i == grid.size - 1:
        # minimizer lies past the grid; g grows without bound since t < top
        grid = np.append(grid, grid[-1] * 2.0)
        vals = np.append(vals, g(grid[-1]))
        i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[i + 1]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(200):
        if hi - lo <= 1e-13 * (1.0 + hi):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = g(x2)
    best = min(f1, f2, float(vals[i]), 0.0)
    return math.exp(best)


# -- domination --------------------------------------------------------------

@dataclass(frozen=True)
class DominationRow:
    t: float
    kind: str
    bound: Optional[float]
    tail: float
    ci_low: float
    ci_high: float
    satisfied: Optional[bool]
    margin: Optional[float]

    COLUMNS = ("t", "kind", "bound", "tail", "ci_low", "ci_high", "satisfied", "margin")


@dataclass
class DominationReport:
    rows: list[DominationRow]
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.satisfied is not False for r in self.rows)

    @property
    def violations(self) -> list[DominationRow]:
        return [r for r in self.rows if r.satisfied is False]

    def row_dicts(self) -> list[dict]:
        return [{k: getattr(r, k) for k in DominationRow.COLUMNS} for r in self.rows]

    def to_json(self) -> dict:
        return {**self.meta, "passed": self.passed, "rows": self.row_dicts()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(DominationRow.COLUMNS)
        for row in self.row_dicts():
            writer.writerow([format_cell(row[k]) for k in DominationRow.COLUMNS])
        return buf.getvalue()


def format_cell(value) -> str:
    """CSV text that round-trips to the same value JSON carries."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def validate_domination(A: SquareMatrix, law: PermLaw, t_grid: Sequence[float],
                        kinds: Sequence[BoundKind | str], *, method: str = "exact",
                        trials: int = 10**5, seed: int | None = None,
                        level: float = DEFAULT_LEVEL, workers: int = 1,
                        caps: EnumerationCaps = CAPS, bound_scale: float = 1.0) -> DominationReport:
    """Compare P(Y - mu >= t) with each bound on a grid of ``t``.

    With ``method="monte_carlo"`` the upper Clopper-Pearson limit stands
    in for the tail. ``bound_scale`` multiplies every bound and exists
    only for negative-control runs.
    """
    kinds = [BoundKind(k) for k in kinds]
    params = permstat.bound_params(A, law)
    if method == "exact":
        tails = exact_tails(A, law, t_grid, caps)
    elif method == "monte_carlo":
        if seed is None:
            raise DomainError("Monte Carlo validation needs an explicit seed")
        tails = mc_tails(A, law, t_grid, trials, seed, level, workers)
    else:
        raise DomainError(f"unknown method {method!r}")
    rows = []
    for t, tail in zip(t_grid, tails):
        observed = tail.point if tail.method == "exact" else tail.ci_high
        for kind in kinds:
            value = permstat.tail_bound(A, law, float(t), kind)
            if not value.applicable:
                rows.append(DominationRow(float(t), kind.value, None, tail.point,
                                          tail.ci_low, tail.ci_high, None, None))
                continue
            bound = value.clamped * bound_scale
            rows.append(DominationRow(float(t), kind.value, bound, tail.point, tail.ci_low,
                                      tail.ci_high, observed <= bound + DOMINATION_SLACK,
                                      bound - observed))
    meta = {
        "mu": permstat.law_mean(A, law),
        "method": method,
        "classes": [{"weight": p.weight, "sigma2": p.sigma2, "c": p.c,
                     "cycle_type": None if p.cycle_type is None else list(p.cycle_type.f)}
                    for p in params],
    }
    return DominationReport(rows, meta)


# -- random-matrix experiment ------------------------------------------------

@dataclass(frozen=True)
class ExpectedVarianceResult:
    mean_sigma2: float
    se_sigma2: float
    target_sigma2: float
    mean_mu: float
    se_mu: float
    target_mu: float

    @staticmethod
    def _z(mean, se, target):
        if se == 0:
            return 0.0 if mean == target else math.inf
        return (mean - target) / se

    @property
    def z_sigma2(self) -> float:
        return self._z(self.mean_sigma2, self.se_sigma2, self.target_sigma2)

    @property
    def z_mu(self) -> float:
        return self._z(self.mean_mu, self.se_mu, self.target_mu)

    def to_dict(self) -> dict:
        return {**asdict(self), "z_sigma2": self.z_sigma2, "z_mu": self.z_mu}


def batch_moments_uniform(entries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """mu_A and sigma_A^2 for a stack of matrices shaped (reps, n, n)."""
    n = entries.shape[-1]
    row = entries.mean(axis=2, keepdims=True)
    col = entries.mean(axis=1, keepdims=True)
    grand = entries.mean(axis=(1, 2), keepdims=True)
    sigma2 = ((entries - row - col + grand) ** 2).sum(axis=(1, 2)) / (n - 1)
    return n * grand[:, 0, 0], sigma2


def expected_variance_experiment(n: int, entry_dist: DiscreteDist | str, reps: int,
                                 seed: int) -> ExpectedVarianceResult:
    """Average mu_A and sigma_A^2 over matrices with iid entries in [0, 1].

    ``entry_dist`` is ``"uniform01"`` or a DiscreteDist supported in
    [0, 1]. Targets are n E[U] and (n - 1) Var(U).
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(entry_dist, str):
        if entry_dist != "uniform01":
            raise DomainError(f"unknown entry distribution {entry_dist!r}")
        mean_u, var_u = 0.5, 1.0 / 12.0
        entries = rng.random((reps, n, n))
    else:
        if entry_dist.values[0] < 0 or entry_dist.values[-1] > 1:
            raise DomainError("entry distribution must be supported in [0, 1]")
        mean_u = math.fsum(entry_dist.probs * entry_dist.values)
        var_u = math.fsum(entry_dist.probs * (entry_dist.values - mean_u) ** 2)
        entries = rng.choice(entry_dist.values, size=(reps, n, n), p=entry_dist.probs)
    mu, sigma2 = batch_moments_uniform(entries)

    def se(x):
        return float(x.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf

    return ExpectedVarianceResult(
        mean_sigma2=float(sigma2.mean()), se_sigma2=se(sigma2), target_sigma2=(n - 1) * var_u,
        mean_mu=float(mu.mean()), se_mu=se(mu), target_mu=n * mean_u,
    )
