"""Estimators and checks over sample tables and hole dumps.

Covers the quantitative questions the simulator feeds: power-law growth
exponent of the hole count, tan-point frequency decay, a second-moment
tail bound, the n^{3/4} threshold fraction, a descriptive one-sample KS
normality check, and connected-component statistics of hole sets.

Caveats, deliberate:

* Regressions use natural log throughout; slopes are base-invariant, the
  intercept is reported but never asserted against.
* The KS check standardizes by sample moments and uses the plain
  asymptotic Kolmogorov distribution (no Lilliefors correction), matching
  how the figure it reproduces was computed. It is descriptive, not a
  calibrated hypothesis test.
* Tan-point decay is estimated from per-step frequencies (tan_total/n),
  which shifts the power law's constant but not its exponent - only the
  exponent is meaningful here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Sequence

from .montecarlo import SampleTable

__all__ = [
    "RegressionFit",
    "KsResult",
    "ComponentStats",
    "PaleyZygmundCheck",
    "ols_loglog",
    "ks_normal",
    "ks_pvalue",
    "paley_zygmund_check",
    "tan_point_exponent",
    "theorem_fraction",
    "hole_components",
]


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    m: int

    def as_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value, "m": self.m}


@dataclass(frozen=True)
class PaleyZygmundCheck:
    theta: float
    empirical_prob: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.empirical_prob >= self.bound

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "empirical_prob": self.empirical_prob,
            "bound": self.bound,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class ComponentStats:
    hole_sizes: tuple
    complement_sizes: Optional[tuple]

    def as_dict(self) -> dict:
        return {
            "hole_sizes": list(self.hole_sizes),
            "complement_sizes": (
                None if self.complement_sizes is None else list(self.complement_sizes)
            ),
        }


def ols_loglog(pairs: Sequence[tuple]) -> RegressionFit:
    """Ordinary least squares of ln(y) on ln(x).

    Exact on exact power laws: y = e^b * x^a recovers slope a, intercept b,
    r^2 = 1 to floating-point accuracy.
    """
    if len({x for x, _ in pairs}) < 2:
        raise ValueError("regression needs at least 2 distinct abscissae")
    for x, y in pairs:
        if x <= 0:
            raise ValueError(f"abscissa must be positive, got {x}")
        if y <= 0:
            raise ValueError(f"ordinate must be positive, got {y} (log undefined)")
    xs = [math.log(x) for x, _ in pairs]
    ys = [math.log(y) for _, y in pairs]
    m = len(xs)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionFit(slope=slope, intercept=intercept, r_squared=r_squared, n_points=m)


def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def ks_pvalue(statistic: float, m: int) -> float:
    """Asymptotic Kolmogorov p-value at x = sqrt(m) * D.

    Alternating series 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2), truncated
    once a term drops below 1e-12 (truncation error is below the first
    omitted term). For x -> 0 the value saturates at 1.
    """
    if not 0.0 <= statistic <= 1.0:
        raise ValueError(f"KS statistic must be in [0,1], got {statistic}")
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    x = math.sqrt(m) * statistic
    if x < 1e-8:
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_normal(samples: Sequence[float]) -> KsResult:
    """One-sample KS check against the standard normal, after standardizing.

    The sample is centered and scaled by its own mean and (ddof=1) standard
    deviation; D is the sup distance between the empirical CDF and the
    standard normal CDF, evaluated at the order statistics from both sides.
    """
    m = len(samples)
    if m < 2:
        raise ValueError(f"need at least 2 samples, got {m}")
    mean = sum(samples) / m
    var = sum((s - mean) ** 2 for s in samples) / (m - 1)
    if var == 0.0:
        raise ValueError("degenerate sample: zero standard deviation")
    sd = math.sqrt(var)
    z = sorted((s - mean) / sd for s in samples)
    d = 0.0
    for i, zi in enumerate(z, start=1):
        cdf = _std_normal_cdf(zi)
        d = max(d, i / m - cdf, cdf - (i - 1) / m)
    return KsResult(statistic=d, p_value=ks_pvalue(d, m), m=m)


def paley_zygmund_check(samples: Sequence[float], theta: float) -> PaleyZygmundCheck:
    """Empirical P(S > theta * mean(S)) against the (1-theta)^2 / 2 bound."""
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must be in (0,1), got {theta}")
    if not samples:
        raise ValueError("samples must be nonempty")
    mean = sum(samples) / len(samples)
    exceed = sum(1 for s in samples if s > theta * mean)
    return PaleyZygmundCheck(
        theta=theta,
        empirical_prob=exceed / len(samples),
        bound=(1.0 - theta) ** 2 / 2.0,
    )


def tan_point_exponent(table: SampleTable) -> RegressionFit:
    """Log-log slope of the mean per-step tan-point frequency against n.

    The per-run frequency tan_total/n averages n correlated per-step
    indicators; if the per-step probability decays like n^-a, the averaged
    proxy keeps exponent -a and only the constant shifts.
    """
    pairs = table.tan_rate_pairs()
    if len(pairs) < 2:
        raise ValueError("need tan counts at >= 2 distinct n values")
    return ols_loglog(pairs)


def theorem_fraction(samples: Sequence[float], n: int, delta: float) -> float:
    """Fraction of samples at or above delta * n^(3/4)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not samples:
        raise ValueError("samples must be nonempty")
    threshold = delta * n**0.75
    return sum(1 for s in samples if s >= threshold) / len(samples)


def _neighbor_offsets(dim: int, diagonal: bool) -> list:
    if not diagonal:
        offsets = []
        for axis in range(dim):
            for sign in (1, -1):
                off = [0] * dim
                off[axis] = sign
                offsets.append(tuple(off))
        return offsets
    return [off for off in product((-1, 0, 1), repeat=dim) if any(off)]


def _component_sizes(sites: set, dim: int, offsets: list) -> list:
    sizes = []
    remaining = set(sites)
    while remaining:
        start = remaining.pop()
        size = 1
        queue = deque([start])
        while queue:
            site = queue.popleft()
            for off in offsets:
                nb = tuple(c + o for c, o in zip(site, off))
                if nb in remaining:
                    remaining.discard(nb)
                    size += 1
                    queue.append(nb)
        sizes.append(size)
    return sorted(sizes, reverse=True)


def hole_components(
    holes: Iterable,
    visited: Optional[Iterable] = None,
    diagonal: bool = False,
) -> ComponentStats:
    """Connected-component sizes of a hole set (and of trail minus holes).

    Adjacency is the lattice's own 2d-neighbor connectivity; ``diagonal``
    switches to the Moore neighborhood for exploration. When ``visited`` is
    supplied it must contain every hole; complement components are computed
    within visited minus holes.
    """
    hole_set = {tuple(s) for s in holes}
    if not hole_set:
        raise ValueError("holes must be nonempty")
    dim = len(next(iter(hole_set)))
    offsets = _neighbor_offsets(dim, diagonal)
    complement_sizes = None
    if visited is not None:
        visited_set = {tuple(s) for s in visited}
        if not hole_set <= visited_set:
            stray = sorted(hole_set - visited_set)[:3]
            raise ValueError(f"holes not contained in visited sites, e.g. {stray}")
        complement_sizes = tuple(_component_sizes(visited_set - hole_set, dim, offsets))
    return ComponentStats(
        hole_sizes=tuple(_component_sizes(hole_set, dim, offsets)),
        complement_sizes=complement_sizes,
    )
