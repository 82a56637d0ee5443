"""Hoeffding's permutation statistic ``Y = sum_i a[i, pi(i)]``.

Covers matrix functionals, exact moment formulas for the uniform law on
S_n and for laws uniform on a cycle type, the coupling constants that
feed the zero-bias tail bounds, cycle-type bookkeeping, class
enumeration and exact samplers.

Permutations are 0-based integer image vectors internally; the JSON
wire format is 1-based.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from . import bounds
from .bounds import BoundKind, BoundValue
from .errors import ConsistencyError, DomainError, ResourceError, UnsupportedError

SYMMETRY_TOL = 1e-12
VARIANCE_FORMS_RTOL = 1e-9


class SquareMatrix:
    """Real n x n array with the row, column and off-diagonal means cached."""

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"matrix must be square, got shape {a.shape}")
        if a.shape[0] < 2:
            raise DomainError("matrix must be at least 2 x 2")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix entries must be finite")
        a.setflags(write=False)
        self.entries = a
        self.n = a.shape[0]

    def __repr__(self):
        return f"SquareMatrix({self.entries.tolist()!r})"

    @cached_property
    def row_means(self) -> np.ndarray:
        return self.entries.mean(axis=1)

    @cached_property
    def col_means(self) -> np.ndarray:
        return self.entries.mean(axis=0)

    @cached_property
    def grand_mean(self) -> float:
        return float(self.entries.mean())

    @cached_property
    def off_diagonal_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1) - np.diag(self.entries)

    @cached_property
    def off_row_means(self) -> np.ndarray:
        """Off-diagonal row sums divided by n - 2 (not n - 1)."""
        if self.n < 3:
            raise DomainError("off-diagonal means need n >= 3")
        return self.off_diagonal_sums / (self.n - 2)

    @cached_property
    def off_grand_mean(self) -> float:
        if self.n < 3:
            raise DomainError("off-diagonal means need n >= 3")
        return float(self.off_diagonal_sums.sum()) / ((self.n - 1) * (self.n - 2))

    @cached_property
    def is_symmetric(self) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.T)) <= SYMMETRY_TOL)

    @cached_property
    def off_diagonal_centered(self) -> np.ndarray:
        """a_ij - a_io - a_jo + a_oo, with zeros on the diagonal."""
        aio = self.off_row_means
        centered = self.entries - aio[:, None] - aio[None, :] + self.off_grand_mean
        np.fill_diagonal(centered, 0.0)
        return centered

    @classmethod
    def from_csv(cls, text: str) -> "SquareMatrix":
        rows = [row for row in csv.reader(io.StringIO(text)) if row and any(x.strip() for x in row)]
        try:
            return cls([[float(x) for x in row] for row in rows])
        except ValueError as exc:
            raise DomainError(f"bad matrix CSV: {exc}") from exc

    @classmethod
    def from_json(cls, obj: dict | str) -> "SquareMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            m = cls(obj["entries"])
        except (KeyError, TypeError) as exc:
            raise DomainError('matrix JSON must look like {"n": ..., "entries": [[...]]}') from exc
        if "n" in obj and obj["n"] != m.n:
            raise DomainError(f"declared n={obj['n']} but entries are {m.n} x {m.n}")
        return m

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist()}

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in self.entries)


@dataclass(frozen=True)
class CycleType:
    """Counts ``f[q-1]`` of q-cycles, with ``sum q f_q = n``."""

    f: tuple[int, ...]

    def __post_init__(self):
        f = tuple(int(x) for x in self.f)
        if not f or any(x < 0 for x in f):
            raise DomainError("cycle type entries must be non-negative integers")
        total = sum((q + 1) * x for q, x in enumerate(f))
        if total != len(f):
            raise DomainError(f"cycle type {f} has sum q f_q = {total}, not n = {len(f)}")
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return len(self.f)

    def count(self, q: int) -> int:
        return self.f[q - 1]

    @property
    def lengths(self) -> list[int]:
        """Cycle lengths in non-decreasing order."""
        return [q + 1 for q, x in enumerate(self.f) for _ in range(x)]

    @classmethod
    def from_lengths(cls, lengths: Sequence[int], n: int | None = None) -> "CycleType":
        n = sum(lengths) if n is None else n
        f = [0] * n
        for q in lengths:
            if q < 1 or q > n:
                raise DomainError(f"cycle length {q} out of range for n = {n}")
            f[q - 1] += 1
        return cls(tuple(f))

    @classmethod
    def involution(cls, n: int) -> "CycleType":
        if n < 2 or n % 2:
            raise DomainError("fixed point free involutions need even n >= 2")
        return cls.from_lengths([2] * (n // 2), n)

    @classmethod
    def long_cycle(cls, n: int) -> "CycleType":
        return cls.from_lengths([n], n)

    @property
    def is_involution(self) -> bool:
        return self.n % 2 == 0 and self.count(2) == self.n // 2

    def class_size(self) -> int:
        """Number of permutations with this cycle type."""
        denom = 1
        for q, x in enumerate(self.f, start=1):
            denom *= q**x * math.factorial(x)
        return math.factorial(self.n) // denom

    def __str__(self):
        return ",".join(map(str, self.f))


@dataclass(frozen=True)
class UniformSn:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")


@dataclass(frozen=True)
class FpfInvolution:
    n: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise DomainError("fixed point free involutions need even n >= 2")

    @property
    def cycle_type(self) -> CycleType:
        return CycleType.involution(self.n)


@dataclass(frozen=True)
class UniformCycleType:
    f: CycleType

    @property
    def n(self) -> int:
        return self.f.n


@dataclass(frozen=True)
class ConstantOnCycleType:
    """Mixture of cycle-type-uniform laws with weights rho_f."""

    weights: Mapping[CycleType, float] = field(hash=False)

    def __post_init__(self):
        if not self.weights:
            raise DomainError("mixture needs at least one cycle type")
        sizes = {f.n for f in self.weights}
        if len(sizes) != 1:
            raise DomainError("all cycle types in a mixture must share n")
        if any(not (w >= 0) for w in self.weights.values()):
            raise DomainError("mixture weights must be non-negative")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {total!r}, not 1")
        # deterministic iteration order regardless of insertion order
        ordered = dict(sorted(((f, float(w)) for f, w in self.weights.items() if w > 0),
                              key=lambda kv: kv[0].f))
        object.__setattr__(self, "weights", ordered)

    @property
    def n(self) -> int:
        return next(iter(self.weights)).n


PermLaw = Union[UniformSn, FpfInvolution, UniformCycleType, ConstantOnCycleType]


def law_classes(law: PermLaw) -> list[tuple[CycleType | None, float]]:
    """(cycle type, weight) components; ``None`` stands for all of S_n."""
    if isinstance(law, UniformSn):
        return [(None, 1.0)]
    if isinstance(law, FpfInvolution):
        return [(law.cycle_type, 1.0)]
    if isinstance(law, UniformCycleType):
        return [(law.f, 1.0)]
    if isinstance(law, ConstantOnCycleType):
        return list(law.weights.items())
    raise TypeError(f"not a permutation law: {law!r}")


def describe_law(law: PermLaw) -> dict:
    if isinstance(law, UniformSn):
        return {"law": "uniform", "n": law.n}
    if isinstance(law, FpfInvolution):
        return {"law": "fpf-involution", "n": law.n}
    if isinstance(law, UniformCycleType):
        return {"law": "cycle-type", "n": law.n, "f": list(law.f.f)}
    return {"law": "mixture", "n": law.n,
            "weights": [[list(f.f), w] for f, w in law.weights.items()]}


# -- statistic and functionals ---------------------------------------------

def check_permutation(p: Sequence[int], n: int | None = None) -> np.ndarray:
    p = np.asarray(p)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise DomainError(f"permutation must be a length-{n} vector")
    if not np.array_equal(np.sort(p), np.arange(p.size)):
        raise DomainError("permutation must be a bijection of {0, ..., n-1}")
    return p.astype(np.intp)


def hoeffding_stat(A: SquareMatrix, p: Sequence[int]) -> float:
    p = check_permutation(p, A.n)
    return math.fsum(A.entries[np.arange(A.n), p])


def hoeffding_stats(A: SquareMatrix, perms: np.ndarray) -> np.ndarray:
    """Vectorized statistic over rows of ``perms``."""
    perms = np.asarray(perms)
    if perms.ndim != 2 or perms.shape[1] != A.n:
        raise DomainError(f"expected permutations of length {A.n}")
    return A.entries[np.arange(A.n)[None, :], perms].sum(axis=1)


def variance_forms_uniform(A: SquareMatrix) -> tuple[float, float]:
    """sigma_A^2 from raw second moments and from doubly centered entries."""
    a, n = A.entries, A.n
    ri, cj, g = A.row_means, A.col_means, A.grand_mean
    raw_form = (np.sum(a**2) - n * np.sum(ri**2) - n * np.sum(cj**2) + n * n * g**2) / (n - 1)
    centered_form = np.sum((a - ri[:, None] - cj[None, :] + g) ** 2) / (n - 1)
    return float(raw_form), float(centered_form)


def moments_uniform(A: SquareMatrix) -> tuple[float, float]:
    """Mean and variance of Y under the uniform law on S_n.

    The variance is computed two ways (raw second moments and squared
    doubly centered entries); disagreement raises ConsistencyError.
    """
    raw_form, centered_form = variance_forms_uniform(A)
    # the raw form cancels terms of size sum(a^2), so measure error against that
    scale = max(abs(centered_form), float(np.sum(A.entries**2)) / (A.n - 1))
    if abs(raw_form - centered_form) > VARIANCE_FORMS_RTOL * scale:
        raise ConsistencyError(f"variance forms disagree: {raw_form!r} vs {centered_form!r}")
    return float(A.n * A.grand_mean), centered_form


def sup_norm_centered(A: SquareMatrix) -> float:
    """max_ij |a_ij - a_i.|, the row-centered sup norm."""
    return float(np.max(np.abs(A.entries - A.row_means[:, None])))


def a_o(A: SquareMatrix) -> float:
    """max over i != j of |a_ij - a_io - a_jo + a_oo|."""
    if A.n < 3:
        raise DomainError("a_o needs n >= 3")
    return float(np.max(np.abs(A.off_diagonal_centered)))


def _require_cycle_formula(A: SquareMatrix, f: CycleType) -> None:
    if f.n != A.n:
        raise DomainError(f"cycle type is for n = {f.n}, matrix has n = {A.n}")
    if A.n < 4:
        raise DomainError("cycle-type moment formulas need n >= 4")
    if not A.is_symmetric:
        raise DomainError("cycle-type moment formulas need a symmetric matrix")
    if f.count(1) != 0:
        raise DomainError("cycle-type moment formulas need f_1 = 0 (no fixed points)")


def moments_cycle_type(A: SquareMatrix, f: CycleType) -> tuple[float, float]:
    """Mean and variance of Y when pi is uniform on cycle type ``f``."""
    _require_cycle_formula(A, f)
    n = A.n
    mu = (n - 2) * A.off_grand_mean
    total = float(np.sum(A.off_diagonal_centered**2))
    sigma2 = (1.0 / (n - 1) + 2.0 * f.count(2) / (n * (n - 3))) * total
    return float(mu), sigma2


def variance_involution(A: SquareMatrix) -> float:
    n = A.n
    _require_cycle_formula(A, CycleType.involution(n))
    return 2.0 * (n - 2) / ((n - 1) * (n - 3)) * float(np.sum(A.off_diagonal_centered**2))


def variance_no_two_cycles(A: SquareMatrix) -> float:
    _require_cycle_formula(A, CycleType.long_cycle(A.n))
    return float(np.sum(A.off_diagonal_centered**2)) / (A.n - 1)


def law_mean(A: SquareMatrix, law: PermLaw) -> float:
    """The centering used for tails: mu_A for S_n, (n - 2) a_oo otherwise."""
    _check_law_size(A, law)
    if isinstance(law, UniformSn):
        return A.n * A.grand_mean
    return (A.n - 2) * A.off_grand_mean


def _check_law_size(A: SquareMatrix, law: PermLaw) -> None:
    if law.n != A.n:
        raise DomainError(f"law is for n = {law.n}, matrix has n = {A.n}")


def law_moments(A: SquareMatrix, law: PermLaw) -> tuple[float, float]:
    """Formula mean and variance of Y under ``law``."""
    _check_law_size(A, law)
    if isinstance(law, UniformSn):
        return moments_uniform(A)
    mu = law_mean(A, law)
    # mixture components share the mean, so the variance is the weighted average
    var = math.fsum(w * moments_cycle_type(A, f)[1] for f, w in law_classes(law))
    return mu, var


# -- coupling constants and bounds -----------------------------------------

@dataclass(frozen=True)
class BoundParams:
    """(sigma2, c) for one cycle class of a law, with its weight."""

    weight: float
    sigma2: float
    c: float
    cycle_type: CycleType | None


def _class_params(A: SquareMatrix, f: CycleType) -> tuple[float, float]:
    if A.n < 5:
        raise DomainError("cycle-type coupling constants need n >= 5")
    _require_cycle_formula(A, f)
    if f.is_involution:
        c = 24.0 * a_o(A)
    elif f.count(2) == 0:
        c = 40.0 * a_o(A)
    else:
        raise UnsupportedError(
            f"no coupling constant is known for cycle type {f} (2-cycles mixed with longer cycles)")
    return moments_cycle_type(A, f)[1], c


def bound_params(A: SquareMatrix, law: PermLaw) -> list[BoundParams]:
    _check_law_size(A, law)
    if isinstance(law, UniformSn):
        if A.n < 3:
            raise DomainError("the uniform-law coupling constant needs n >= 3")
        params = [BoundParams(1.0, moments_uniform(A)[1], 8.0 * sup_norm_centered(A), None)]
    else:
        params = [BoundParams(w, *_class_params(A, f), f) for f, w in law_classes(law)]
    for p in params:
        if p.sigma2 <= 0:
            raise DomainError("variance of Y is zero; tail bounds are trivial and not reported")
    return params


def coupling_constant(A: SquareMatrix, law: PermLaw) -> float:
    """8 ||a|| for S_n, 24 a_o for involutions, 40 a_o when f_1 = f_2 = 0."""
    _check_law_size(A, law)
    if isinstance(law, UniformSn):
        if A.n < 3:
            raise DomainError("the uniform-law coupling constant needs n >= 3")
        return 8.0 * sup_norm_centered(A)
    if isinstance(law, ConstantOnCycleType):
        raise DomainError("a mixture has one constant per cycle type; use bound_params")
    return _class_params(A, law_classes(law)[0][0])[1]


def tail_bound(A: SquareMatrix, law: PermLaw, t: float, kind: BoundKind | str,
               a: float = bounds.ZERO_BIAS_BERNSTEIN_A) -> BoundValue:
    """Bound on P(Y - mu >= t) for Hoeffding's statistic under ``law``.

    Mixtures get the weighted sum of per-class bounds. The Bernstein form
    takes the summand bound as half the coupling constant, so with
    ``a = 4`` it reproduces the one-sided bound.
    """
    kind = BoundKind(kind)
    if kind not in bounds.COUPLING_KINDS:
        raise DomainError(f"{kind.value} does not follow from a zero-bias coupling of Y")
    raw = []
    for p in bound_params(A, law):
        c = p.c / 2.0 if kind is BoundKind.BERNSTEIN else p.c
        value = bounds.evaluate(kind, p.sigma2, c, t, a)
        if not value.applicable:
            return BoundValue.not_applicable(kind)
        raw.append(p.weight * value.raw)
    return BoundValue.from_raw(kind, math.fsum(raw))


# -- cycle types -------------------------------------------------------------

def cycles_of(p: Sequence[int]) -> list[list[int]]:
    p = check_permutation(p)
    seen = np.zeros(p.size, dtype=bool)
    cycles = []
    for start in range(p.size):
        if seen[start]:
            continue
        cycle = []
        j = start
        while not seen[j]:
            seen[j] = True
            cycle.append(j)
            j = int(p[j])
        cycles.append(cycle)
    return cycles


def cycle_type_of(p: Sequence[int]) -> CycleType:
    p = check_permutation(p)
    return CycleType.from_lengths([len(c) for c in cycles_of(p)], p.size)


def from_cycles(cycles: Sequence[Sequence[int]], n: int) -> np.ndarray:
    """Image vector from 0-based cycles; unlisted points are fixed."""
    p = np.arange(n)
    for cycle in cycles:
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            p[a] = b
    return check_permutation(p, n)


def enumerate_cycle_types(n: int) -> list[CycleType]:
    """All cycle types of S_n, in lexicographic order of the count vector."""
    if n < 1:
        raise DomainError("n must be >= 1")
    out = []

    def rec(q: int, remaining: int, counts: list[int]):
        if q == 0:
            if remaining == 0:
                out.append(CycleType(tuple(counts)))
            return
        for x in range(remaining // q + 1):
            counts[q - 1] = x
            rec(q - 1, remaining - q * x, counts)
        counts[q - 1] = 0

    rec(n, n, [0] * n)
    return sorted(out, key=lambda f: f.f)


# -- exact enumeration -------------------------------------------------------

@dataclass
class EnumerationCaps:
    uniform_max_n: int = 9
    involution_max_n: int = 10
    class_size: int = 10**6


CAPS = EnumerationCaps()


def _iter_class(f: CycleType) -> Iterator[tuple[int, ...]]:
    """Each permutation of type ``f`` exactly once.

    The cycle through the smallest unused point is chosen first: pick
    its length among the remaining ones, then an ordered choice of the
    other points on it.
    """
    n = f.n

    def rec(perm: list[int], unused: list[int], lengths: Counter):
        if not unused:
            yield tuple(perm)
            return
        first, rest = unused[0], unused[1:]
        for q in sorted(k for k, v in lengths.items() if v > 0):
            lengths[q] -= 1
            for others in itertools.permutations(rest, q - 1):
                cycle = (first,) + others
                for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                    perm[a] = b
                taken = set(others)
                yield from rec(perm, [x for x in rest if x not in taken], lengths)
            lengths[q] += 1

    yield from rec(list(range(n)), list(range(n)), Counter(f.lengths))


def enumerate_class(f: CycleType, caps: EnumerationCaps = CAPS) -> np.ndarray:
    size = f.class_size()
    if f.is_involution:
        if f.n > caps.involution_max_n:
            raise ResourceError(f"involution enumeration capped at n = {caps.involution_max_n}")
    elif size > caps.class_size:
        raise ResourceError(f"class of size {size} exceeds cap {caps.class_size}")
    out = np.array(list(_iter_class(f)), dtype=np.intp).reshape(size, f.n)
    return out


def enumerate_sn(n: int, caps: EnumerationCaps = CAPS) -> np.ndarray:
    if n > caps.uniform_max_n:
        raise ResourceError(f"S_n enumeration capped at n = {caps.uniform_max_n}")
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)


def enumerate_law(law: PermLaw, caps: EnumerationCaps = CAPS) -> list[tuple[np.ndarray, float]]:
    """(all permutations of a class, class weight) for each law component."""
    out = []
    for f, w in law_classes(law):
        perms = enumerate_sn(law.n, caps) if f is None else enumerate_class(f, caps)
        out.append((perms, w))
    return out


# -- samplers ----------------------------------------------------------------

def _cut_into_cycles(arrangements: np.ndarray, lengths: Sequence[int]) -> np.ndarray:
    size, n = arrangements.shape
    images = np.empty_like(arrangements)
    rows = np.arange(size)
    start = 0
    for q in lengths:
        for k in range(q):
            src = arrangements[:, start + k]
            dst = arrangements[:, start + (k + 1) % q]
            images[rows, src] = dst
        start += q
    return images


def _sequential_matchings(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    images = np.empty((size, n), dtype=np.intp)
    rows = np.arange(size)
    remaining = np.tile(np.arange(n), (size, 1))
    while remaining.shape[1]:
        m = remaining.shape[1]
        first = remaining[:, 0]
        pick = rng.integers(1, m, size=size)
        partner = remaining[rows, pick]
        images[rows, first] = partner
        images[rows, partner] = first
        keep = np.ones((size, m), dtype=bool)
        keep[:, 0] = False
        keep[rows, pick] = False
        remaining = remaining[keep].reshape(size, m - 2)
    return images


def _sample_class(f: CycleType | None, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    if size == 0:
        return np.empty((0, n), dtype=np.intp)
    if f is None:
        return rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
    if f.is_involution:
        return _sequential_matchings(rng, size, n)
    arrangements = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
    return _cut_into_cycles(arrangements, f.lengths)


def sample_many(law: PermLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent draws from ``law`` as rows of image vectors.

    S_n uses an unbiased shuffle; fixed point free involutions match the
    smallest unmatched point to a uniform unmatched partner; other cycle
    types cut a uniform arrangement into consecutive blocks of the cycle
    lengths (non-decreasing) and close each block into a cycle.
    """
    classes = law_classes(law)
    if len(classes) == 1:
        return _sample_class(classes[0][0], law.n, rng, size)
    which = rng.choice(len(classes), size=size, p=np.array([w for _, w in classes]))
    out = np.empty((size, law.n), dtype=np.intp)
    for i, (f, _) in enumerate(classes):
        hit = which == i
        out[hit] = _sample_class(f, law.n, rng, int(hit.sum()))
    return out


def sample(law: PermLaw, rng: np.random.Generator) -> np.ndarray:
    return sample_many(law, rng, 1)[0]


# -- wire formats ------------------------------------------------------------

def permutation_to_json(p: Sequence[int]) -> list[int]:
    return [int(x) + 1 for x in p]


def permutation_from_json(obj: Sequence[int] | str) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return check_permutation(np.asarray(obj, dtype=np.intp) - 1)


def cycle_type_from_json(obj: Sequence[int] | str) -> CycleType:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return CycleType(tuple(obj))


def parse_law(spec: str, n: int | None = None) -> PermLaw:
    """Parse a law string.

    Accepted forms: ``uniform``, ``fpf-involution``, ``cycle-type:0,0,1,1``
    and ``mixture:0,3,0,0,0,0@0.5;0,0,0,0,0,1@0.5``. The first two need
    ``n``; the others carry it in the cycle types.
    """
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name in ("uniform", "uniform-sn", "sn"):
        if n is None:
            raise DomainError("law 'uniform' needs n")
        return UniformSn(n)
    if name in ("fpf-involution", "involution"):
        if n is None:
            raise DomainError("law 'fpf-involution' needs n")
        return FpfInvolution(n)
    try:
        if name == "cycle-type":
            f = CycleType(tuple(int(x) for x in arg.split(",")))
            law: PermLaw = UniformCycleType(f)
        elif name == "mixture":
            weights = {}
            for part in arg.split(";"):
                types, _, w = part.partition("@")
                weights[CycleType(tuple(int(x) for x in types.split(",")))] = float(w)
            law = ConstantOnCycleType(weights)
        else:
            raise DomainError(f"unknown law {spec!r}")
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse law {spec!r}: {exc}") from exc
    if n is not None and law.n != n:
        raise DomainError(f"law is for n = {law.n}, expected n = {n}")
    return law
