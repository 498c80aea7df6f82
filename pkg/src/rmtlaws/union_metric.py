"""Coupling metric on a disjoint union of finite-dimensional spaces.

Points of the union carry a space index n and coordinates in R^{d_n}. The
distance between two points is the base-space distance of their images under
the maps phi_n, plus a separation term: ``min(eps_n, rho_n(x, y))`` inside
one space and ``max(eps_{s(x)}, eps_{s(y)})`` across spaces. With eps_0 = 0
and eps_n decreasing to 0, a sequence can approach a point of S_0 from
ever-later spaces while staying a bounded distance away from any point of
S_k, k > 0, that lives in a different space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .seeding import derive_seed, make_rng

Coords = tuple[float, ...]


class InvalidPointError(ValueError):
    pass


@dataclass(frozen=True)
class TaggedPoint:
    space_index: int
    coords: Coords

    def __post_init__(self):
        if self.space_index < 0:
            raise InvalidPointError("space index must be nonnegative")
        object.__setattr__(self, "coords", tuple(float(c) for c in np.ravel(self.coords)))


def euclidean(n: int, x: Coords, y: Coords) -> float:
    return math.dist(x, y)


def harmonic_epsilon(n: int) -> float:
    return 0.0 if n == 0 else 1.0 / n


@dataclass(frozen=True)
class UnionSpace:
    """The family (S_n, rho_n, phi_n, eps_n).

    ``dims`` is either a finite sequence (the family has ``len(dims)``
    spaces) or a rule ``n -> d_n`` for an unbounded family. The default map
    truncates or zero-pads to ``d_0`` coordinates.
    """

    dims: Sequence[int] | Callable[[int], int]
    metric: Callable[[int, Coords, Coords], float] = euclidean
    mapping: Callable[[int, Coords], Coords] | None = None
    epsilon: Callable[[int], float] = harmonic_epsilon
    _dim_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def n_spaces(self) -> int | None:
        return None if callable(self.dims) else len(self.dims)

    def dim(self, n: int) -> int:
        if n in self._dim_cache:
            return self._dim_cache[n]
        if callable(self.dims):
            d = int(self.dims(n))
        else:
            if not 0 <= n < len(self.dims):
                raise InvalidPointError(f"space {n} not in a family of {len(self.dims)} spaces")
            d = int(self.dims[n])
        if d < 1:
            raise ValueError(f"dimension of space {n} must be positive, got {d}")
        self._dim_cache[n] = d
        return d

    def eps(self, n: int) -> float:
        return 0.0 if n == 0 else float(self.epsilon(n))

    def validate(self, x: TaggedPoint) -> None:
        if len(x.coords) != self.dim(x.space_index):
            raise InvalidPointError(
                f"point in space {x.space_index} has {len(x.coords)} coords, "
                f"expected {self.dim(x.space_index)}"
            )

    def phi(self, x: TaggedPoint) -> Coords:
        if x.space_index == 0:
            return x.coords
        if self.mapping is not None:
            image = tuple(float(c) for c in self.mapping(x.space_index, x.coords))
            if len(image) != self.dim(0):
                raise ValueError(f"phi_{x.space_index} returned {len(image)} coords, expected {self.dim(0)}")
            return image
        d0 = self.dim(0)
        c = x.coords[:d0]
        return c + (0.0,) * (d0 - len(c))

    def rho(self, n: int, x: Coords, y: Coords) -> float:
        return float(self.metric(n, x, y))

    def check_epsilons(self, upto: int) -> None:
        """Raise unless eps_0 = 0 < eps_n and eps strictly decreases on 1..upto."""
        prev = math.inf
        for n in range(1, upto + 1):
            e = self.eps(n)
            if not 0 < e < prev:
                raise ValueError(f"eps must be positive and strictly decreasing; fails at n={n}")
            prev = e


def delta_terms(space: UnionSpace, x: TaggedPoint, y: TaggedPoint) -> tuple[float, float]:
    """The image term rho_0(phi x, phi y) and the separation term, separately."""
    space.validate(x)
    space.validate(y)
    image = space.rho(0, space.phi(x), space.phi(y))
    sx, sy = x.space_index, y.space_index
    if sx == sy:
        sep = min(space.eps(sx), space.rho(sx, x.coords, y.coords))
    else:
        sep = max(space.eps(sx), space.eps(sy))
    return image, sep


def delta(space: UnionSpace, x: TaggedPoint, y: TaggedPoint) -> float:
    image, sep = delta_terms(space, x, y)
    return image + sep


class TraceRow(NamedTuple):
    space_index: int
    delta_value: float
    rho0_value: float


def convergence_trace(space: UnionSpace, seq: Sequence[TaggedPoint], limit: TaggedPoint) -> list[TraceRow]:
    """Per term: (s(x_n), delta(x_n, limit), rho_0(phi(x_n), phi(limit)))."""
    space.validate(limit)
    target = space.phi(limit)
    rows = []
    for x in seq:
        image, sep = delta_terms(space, x, limit)
        rows.append(TraceRow(x.space_index, image + sep, space.rho(0, space.phi(x), target)))
    return rows


# ---------------------------------------------------------------------------
# randomized axiom checks
# ---------------------------------------------------------------------------

PATTERNS = ("xxx", "xxz", "xzz", "xzx", "xyz")


@dataclass
class AxiomReport:
    count: int
    max_triangle_violation: float = 0.0
    max_symmetry_violation: float = 0.0
    zero_distance_failures: int = 0
    identity_failures: int = 0
    pattern_counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (
            self.max_triangle_violation <= 1e-12
            and self.max_symmetry_violation == 0.0
            and self.zero_distance_failures == 0
            and self.identity_failures == 0
        )

    def csv_line(self) -> str:
        return f"{self.max_triangle_violation!r},{self.max_symmetry_violation!r},{self.zero_distance_failures}"


def _indices_for(pattern: str, n_spaces: int, rng) -> tuple[int, int, int]:
    if n_spaces == 1 or pattern == "xxx":
        k = int(rng.integers(n_spaces))
        return k, k, k
    a, b = (int(v) for v in rng.choice(n_spaces, size=2, replace=False))
    if pattern == "xxz":
        return a, a, b
    if pattern == "xzz":
        return a, b, b
    if pattern == "xzx":
        return a, b, a
    if n_spaces < 3:
        return a, b, a
    a, b, c = (int(v) for v in rng.choice(n_spaces, size=3, replace=False))
    return a, b, c


def _random_point(space: UnionSpace, n: int, rng, anchor: TaggedPoint | None) -> TaggedPoint:
    d = space.dim(n)
    scale = 10.0 ** rng.uniform(-3, 1)
    mode = rng.random()
    if anchor is not None and mode < 0.15 and anchor.space_index == n:
        return anchor  # exact repeat
    if anchor is not None and mode < 0.35:
        # same image as the anchor, possibly nudged
        base = np.array(space.phi(anchor))
        coords = np.zeros(d)
        k = min(d, base.size)
        coords[:k] = base[:k]
        if mode >= 0.25:
            coords = coords + rng.normal(size=d) * scale * 1e-3
        return TaggedPoint(n, tuple(coords))
    return TaggedPoint(n, tuple(rng.normal(size=d) * scale))


def metric_axiom_suite(space: UnionSpace, sampler_seed: int, count: int,
                       n_spaces: int | None = None) -> AxiomReport:
    """Sample ``count`` triples covering every space-index pattern and check the axioms.

    Patterns cycle through all-equal, s(x)=s(y)!=s(z), s(x)!=s(y)=s(z),
    s(x)=s(z)!=s(y) and pairwise distinct indices.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    n_spaces = n_spaces or space.n_spaces
    if n_spaces is None:
        raise ValueError("an unbounded family needs n_spaces for sampling")
    rng = make_rng(derive_seed(sampler_seed, 0, "metric-axioms"))
    report = AxiomReport(count=count)
    for r in range(count):
        pattern = PATTERNS[r % len(PATTERNS)]
        i, j, k = _indices_for(pattern, n_spaces, rng)
        x = _random_point(space, i, rng, None)
        y = _random_point(space, j, rng, x)
        z = _random_point(space, k, rng, y if rng.random() < 0.5 else x)
        report.pattern_counts[pattern] = report.pattern_counts.get(pattern, 0) + 1
        dxy, dyz, dxz = delta(space, x, y), delta(space, y, z), delta(space, x, z)
        report.max_triangle_violation = max(report.max_triangle_violation, dxz - dxy - dyz)
        for p, q, dpq in ((x, y, dxy), (y, z, dyz), (x, z, dxz)):
            report.max_symmetry_violation = max(report.max_symmetry_violation, abs(dpq - delta(space, q, p)))
            if dpq == 0.0 and p != q:
                report.zero_distance_failures += 1
        for p in (x, y, z):
            if delta(space, p, p) != 0.0:
                report.identity_failures += 1
    return report


def parse_dims_rule(rule: str, n_spaces: int, seed: int = 0) -> list[int]:
    """Dimensions for a family of ``n_spaces`` spaces.

    ``"3"`` gives every space dimension 3; ``"2,5,1"`` lists them (cycled if
    shorter); ``"1-8"`` draws each dimension uniformly from 1..8 using ``seed``.
    """
    rule = rule.strip()
    if "-" in rule and "," not in rule:
        lo, hi = (int(v) for v in rule.split("-"))
        if not 1 <= lo <= hi:
            raise ValueError(f"bad dimension range {rule!r}")
        rng = make_rng(derive_seed(seed, 0, "dims"))
        return [int(v) for v in rng.integers(lo, hi + 1, size=n_spaces)]
    values = [int(v) for v in rule.split(",") if v.strip()]
    if not values or min(values) < 1:
        raise ValueError(f"bad dimension rule {rule!r}")
    return [values[n % len(values)] for n in range(n_spaces)]
