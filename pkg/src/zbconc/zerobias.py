"""Exact zero-bias distributions of finite discrete mean-zero variables.

For mean-zero ``Y`` with variance ``sigma2`` the zero-biased law has
density ``E[Y 1{Y > y}] / sigma2``, which for an atomic ``Y`` is
constant between consecutive atoms. Everything here is computed in
closed form from the atoms: moments, moment generating functions, the
CDF and its inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResourceError

MEAN_TOL = 1e-10
MASS_TOL = 1e-12
MERGE_TOL = 1e-12
CONVOLVE_CAP = 10**6


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Finite atomic distribution with strictly increasing support."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise DomainError("values and probs must be equal-length non-empty vectors")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(probs))):
            raise DomainError("atoms must be finite")
        if np.any(probs <= 0):
            raise DomainError("probabilities must be > 0")
        if abs(math.fsum(probs) - 1.0) > MASS_TOL:
            raise DomainError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if np.any(np.diff(values) <= 0):
            raise DomainError("support values must be strictly increasing")
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]]) -> "DiscreteDist":
        """Build from unordered ``(value, prob)`` pairs, merging repeats."""
        merged: dict[float, float] = {}
        for value, prob in atoms:
            merged[float(value)] = merged.get(float(value), 0.0) + float(prob)
        values = sorted(merged)
        return cls(np.array(values), np.array([merged[v] for v in values]))

    @classmethod
    def uniform(cls, values: Iterable[float]) -> "DiscreteDist":
        values = sorted(float(v) for v in values)
        return cls(np.array(values), np.full(len(values), 1.0 / len(values)))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.probs, other.probs))

    def __repr__(self):
        return f"DiscreteDist({self.atoms!r})"

    def to_json(self) -> dict:
        return {"atoms": [[v, p] for v, p in self.atoms]}

    @classmethod
    def from_json(cls, obj: dict | str) -> "DiscreteDist":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            atoms = obj["atoms"]
        except (KeyError, TypeError):
            raise DomainError('distribution JSON must look like {"atoms": [[value, prob], ...]}')
        return cls.from_atoms(atoms)


@dataclass(frozen=True, eq=False)
class PiecewiseDensity:
    """Density ``densities[j]`` on ``(breakpoints[j], breakpoints[j+1])``."""

    breakpoints: np.ndarray
    densities: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        d = np.asarray(self.densities, dtype=float)
        if b.ndim != 1 or d.ndim != 1 or b.size != d.size + 1 or d.size == 0:
            raise DomainError("need k+1 breakpoints for k densities, k >= 1")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(d))):
            raise DomainError("breakpoints and densities must be finite")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if np.any(d < 0):
            raise DomainError("densities must be non-negative")
        mass = math.fsum(d * np.diff(b))
        if abs(mass - 1.0) > MASS_TOL:
            raise DomainError(f"density integrates to {mass!r}, not 1")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "densities", d)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def segment_masses(self) -> np.ndarray:
        return self.densities * np.diff(self.breakpoints)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseDensity):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.densities, other.densities))

    def allclose(self, other: "PiecewiseDensity", atol: float = 1e-12) -> bool:
        return (self.breakpoints.shape == other.breakpoints.shape
                and np.allclose(self.breakpoints, other.breakpoints, rtol=0, atol=atol)
                and np.allclose(self.densities, other.densities, rtol=0, atol=atol))

    def __repr__(self):
        return (f"PiecewiseDensity(breakpoints={self.breakpoints.tolist()!r}, "
                f"densities={self.densities.tolist()!r})")

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "densities": self.densities.tolist()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "PiecewiseDensity":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(np.array(obj["breakpoints"], dtype=float), np.array(obj["densities"], dtype=float))


def moments(d: DiscreteDist) -> tuple[float, float, float]:
    """Mean, variance and third central moment."""
    mean = math.fsum(d.probs * d.values)
    centered = d.values - mean
    var = math.fsum(d.probs * centered**2)
    third = math.fsum(d.probs * centered**3)
    return mean, var, third


def raw_moment(d: DiscreteDist, k: int) -> float:
    return math.fsum(d.probs * d.values**k)


def center(d: DiscreteDist) -> DiscreteDist:
    """Shift by the exact mean so the result can be zero-biased."""
    mean = moments(d)[0]
    return DiscreteDist(d.values - mean, d.probs.copy())


def mgf(d: DiscreteDist, s: float) -> float:
    return math.fsum(d.probs * np.exp(s * d.values))


def mgf_deriv(d: DiscreteDist, s: float) -> float:
    return math.fsum(d.probs * d.values * np.exp(s * d.values))


def _check_zero_bias_source(d: DiscreteDist) -> float:
    mean, var, _ = moments(d)
    if abs(mean) > MEAN_TOL:
        raise DomainError(f"zero-bias source must have mean 0, got {mean!r} (see center())")
    if len(d) < 2 or var <= 0:
        raise DomainError("zero-bias source must have positive variance")
    return var


def zero_bias_transform(d: DiscreteDist) -> PiecewiseDensity:
    """The ``d``-zero biased law as an exact piecewise-constant density."""
    var = _check_zero_bias_source(d)
    weighted = d.probs * d.values
    # E[Y 1{Y > y}] on each gap, taken from whichever tail has less cancellation
    upper = np.array([math.fsum(weighted[j + 1:]) for j in range(len(d) - 1)])
    lower = np.array([-math.fsum(weighted[: j + 1]) for j in range(len(d) - 1)])
    tail = np.where(np.abs(upper) < np.abs(lower), upper, lower)
    dens = np.clip(tail, 0.0, None) / var
    # absorb rounding so the density is exactly normalized
    widths = np.diff(d.values)
    dens = dens / math.fsum(dens * widths)
    return PiecewiseDensity(d.values.copy(), dens)


def cdf(p: PiecewiseDensity, x) -> np.ndarray:
    """Piecewise-linear CDF of ``p`` evaluated at ``x``."""
    x = np.asarray(x, dtype=float)
    b = p.breakpoints
    cum = np.concatenate(([0.0], np.cumsum(p.segment_masses)))
    cum[-1] = 1.0
    j = np.clip(np.searchsorted(b, x, side="right") - 1, 0, p.densities.size - 1)
    out = cum[j] + p.densities[j] * (x - b[j])
    return np.clip(np.where(x <= b[0], 0.0, np.where(x >= b[-1], 1.0, out)), 0.0, 1.0)


def inverse_cdf(p: PiecewiseDensity, u) -> np.ndarray:
    """Closed-form quantile function; zero-density gaps are skipped."""
    u = np.asarray(u, dtype=float)
    b = p.breakpoints
    masses = p.segment_masses
    cum = np.concatenate(([0.0], np.cumsum(masses)))
    cum[-1] = 1.0
    live = np.flatnonzero(masses > 0)
    # last live segment whose left cumulative mass is <= u
    k = np.clip(np.searchsorted(cum[live], u, side="right") - 1, 0, live.size - 1)
    j = live[k]
    x = b[j] + (u - cum[j]) / p.densities[j]
    return np.clip(x, b[j], b[j + 1])


def sample_zero_bias(p: PiecewiseDensity, rng: np.random.Generator, size=None):
    """Inverse-CDF draws from ``p``; a float when ``size`` is None."""
    u = rng.random(size)
    x = inverse_cdf(p, u)
    return float(x) if size is None else x


def moment_zero_bias(p: PiecewiseDensity, k: int) -> float:
    """E[(Y*)^k] by integrating each segment exactly."""
    b = p.breakpoints
    return math.fsum(p.densities * (b[1:] ** (k + 1) - b[:-1] ** (k + 1)) / (k + 1))


def mgf_zero_bias(p: PiecewiseDensity, s: float) -> float:
    """E[exp(s Y*)] as the sum of segment integrals d (e^{s b1} - e^{s b0}) / s."""
    b0 = p.breakpoints[:-1]
    width = np.diff(p.breakpoints)
    if s == 0:
        return math.fsum(p.densities * width)
    return math.fsum(p.densities * np.exp(s * b0) * np.expm1(s * width) / s)


def scale(d: DiscreteDist, a: float) -> DiscreteDist:
    if a == 0 or not math.isfinite(a):
        raise DomainError("scale factor must be finite and non-zero")
    values = a * d.values
    probs = d.probs
    if a < 0:
        values, probs = values[::-1], probs[::-1]
    return DiscreteDist(values.copy(), probs.copy())


def scale_density(p: PiecewiseDensity, a: float) -> PiecewiseDensity:
    if a == 0 or not math.isfinite(a):
        raise DomainError("scale factor must be finite and non-zero")
    b = a * p.breakpoints
    dens = p.densities / abs(a)
    if a < 0:
        b, dens = b[::-1], dens[::-1]
    return PiecewiseDensity(b.copy(), dens.copy())


def convolve(components: Sequence[DiscreteDist], cap: int = CONVOLVE_CAP) -> DiscreteDist:
    """Exact law of the sum of independent components.

    Values closer than ``MERGE_TOL`` are merged after every step.
    """
    if not components:
        raise DomainError("need at least one component")
    total = 1
    for comp in components:
        total *= len(comp)
    if total > cap:
        raise ResourceError(f"product of support sizes {total} exceeds cap {cap}")
    values, probs = components[0].values, components[0].probs
    for comp in components[1:]:
        v = (values[:, None] + comp.values[None, :]).ravel()
        q = (probs[:, None] * comp.probs[None, :]).ravel()
        order = np.argsort(v, kind="stable")
        v, q = v[order], q[order]
        # start a new atom wherever the gap to the previous value exceeds the tolerance
        starts = np.concatenate(([True], np.diff(v) > MERGE_TOL))
        group = np.cumsum(starts) - 1
        values = v[starts]
        probs = np.bincount(group, weights=q)
    probs = probs / math.fsum(probs)
    return DiscreteDist(values, probs)


@dataclass(frozen=True)
class CouplingSample:
    y: float
    ystar: float
    replaced_index: int


def _index_weights(components: Sequence[DiscreteDist]) -> np.ndarray:
    variances = np.array([_check_zero_bias_source(comp) for comp in components])
    return variances / math.fsum(variances)


def sample_coupling(components: Sequence[DiscreteDist], rng: np.random.Generator,
                    size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``size`` independent draws of the replace-one-summand coupling.

    Each summand is drawn independently, an index ``I`` is drawn with
    ``P(I = i) = sigma_i^2 / sigma^2``, and ``X_I`` is swapped for an
    independent draw from its own zero-biased law. Returns arrays
    ``(y, ystar, index)``.
    """
    if not components:
        raise DomainError("need at least one component")
    weights = _index_weights(components)
    densities = [zero_bias_transform(comp) for comp in components]
    draws = np.empty((size, len(components)))
    for i, comp in enumerate(components):
        draws[:, i] = rng.choice(comp.values, size=size, p=comp.probs)
    index = rng.choice(len(components), size=size, p=weights)
    replacement = np.empty(size)
    for i, dens in enumerate(densities):
        hit = index == i
        replacement[hit] = sample_zero_bias(dens, rng, int(hit.sum()))
    y = draws.sum(axis=1)
    ystar = y - draws[np.arange(size), index] + replacement
    return y, ystar, index


def sum_coupling(components: Sequence[DiscreteDist], rng: np.random.Generator) -> CouplingSample:
    y, ystar, index = sample_coupling(components, rng, 1)
    return CouplingSample(float(y[0]), float(ystar[0]), int(index[0]))
