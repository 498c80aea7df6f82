"""Limiting spectral laws: closed forms, transform solvers, inversion and CLT formulas.

All transforms accept a scalar or an array of points in the open upper half
plane and return values of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensembles import EntryLaw, SpikedConfig
from .spectra import AtomicDistribution, DomainError, _check_upper

__all__ = [
    "SolverSettings",
    "CltConstants",
    "NonConvergenceError",
    "DomainViolationError",
    "SingularityError",
    "semicircle_stieltjes",
    "semicircle_derivative",
    "semicircle_density",
    "semicircle_cdf",
    "marchenko_pastur_density",
    "solve_silverstein",
    "solve_deformed_wigner",
    "invert_stieltjes",
    "transform_derivative",
    "clt_mean_a",
    "clt_cov_b",
    "spiked_limit_description",
    "NumericCDF",
    "limit_cdf",
]


class NonConvergenceError(RuntimeError):
    pass


class DomainViolationError(DomainError):
    pass


class SingularityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 100_000
    damping: float = 0.5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class SolveInfo:
    residual: float
    iterations: int


@dataclass(frozen=True)
class CltConstants:
    sigma2: float = 1.0
    kappa: int = 2
    beta: float = 0.0

    def __post_init__(self):
        if self.kappa not in (1, 2):
            raise ValueError("kappa must be 1 (complex) or 2 (real)")

    @classmethod
    def for_law(cls, law: EntryLaw | str, diag_variance: float = 1.0) -> "CltConstants":
        law = EntryLaw.parse(law)
        return cls(sigma2=diag_variance, kappa=law.kappa, beta=law.beta)


# ---------------------------------------------------------------------------
# semicircle and Marchenko-Pastur closed forms
# ---------------------------------------------------------------------------


def semicircle_stieltjes(z):
    """Root of s^2 + z s + 1 = 0 with Im s > 0.

    Written as -2 / (z + sqrt(z-2) sqrt(z+2)); the product of principal
    roots selects the Herglotz branch on all of C+ and the form avoids
    cancellation for large |z|.
    """
    z = _check_upper(z)
    s = -2.0 / (z + np.sqrt(z - 2.0) * np.sqrt(z + 2.0))
    return s if s.ndim else complex(s)


def semicircle_derivative(z):
    """s'(z) = -s / (2s + z), by implicit differentiation of s^2 + z s + 1 = 0."""
    s = semicircle_stieltjes(z)
    return -s / (2.0 * s + np.asarray(z, dtype=complex))


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)


def semicircle_cdf(x):
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * np.pi) + np.arcsin(xc / 2.0) / np.pi
    val = np.where(x <= -2.0, 0.0, np.where(x >= 2.0, 1.0, val))
    return val if val.ndim else float(val)


def marchenko_pastur_density(x, y: float):
    """Continuous part of the Marchenko-Pastur law with ratio y (variance 1)."""
    x = np.asarray(x, dtype=float)
    a, b = (1 - math.sqrt(y)) ** 2, (1 + math.sqrt(y)) ** 2
    inside = (x > a) & (x < b)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2 * np.pi * xi * y)
    return out


# ---------------------------------------------------------------------------
# fixed-point solvers
# ---------------------------------------------------------------------------


def _atoms(H: AtomicDistribution) -> tuple[np.ndarray, np.ndarray]:
    if np.any(H.locations < 0):
        raise ValueError("H must be supported on [0, inf)")
    return H.weights, H.locations


def _iterate(update: Callable, residual: Callable, x0: np.ndarray, settings: SolverSettings):
    """Fixed-point iteration with per-point damping engaged on oscillation.

    Converged points are frozen; the loop ends when every point satisfies
    ``residual <= tol``. Callers supply residuals scaled by max(1, |value|)
    so that near a pole of the transform the tolerance stays above
    double-precision roundoff.
    """
    x = x0.copy()
    step = np.full(x.shape, np.inf)
    rising = np.zeros(x.shape, dtype=int)
    alpha = np.ones(x.shape)
    active = np.ones(x.shape, dtype=bool)
    for it in range(1, settings.max_iter + 1):
        xa = x[active]
        new = update(xa, active)
        delta = np.abs(new - xa)
        rising_a = np.where(delta > step[active], rising[active] + 1, 0)
        alpha_a = np.where(rising_a >= 2, settings.damping, alpha[active])
        x[active] = xa + alpha_a * (new - xa)
        step[active] = delta
        rising[active] = rising_a
        alpha[active] = alpha_a
        done = delta <= settings.tol * np.maximum(1.0, np.abs(xa))
        if np.any(done):
            idx = np.flatnonzero(active)[done]
            ok = residual(x[idx], idx) <= settings.tol
            active[idx[ok]] = False
        if not active.any():
            return x, it
    raise NonConvergenceError(
        f"fixed point not reached within {settings.max_iter} iterations "
        f"({int(active.sum())} points outstanding)"
    )


def _silverstein_rhs(m, z, y, w, t):
    return np.sum(w / (t * (1 - y - y * z[..., None] * m[..., None]) - z[..., None]), axis=-1)


def solve_silverstein(H: AtomicDistribution, y: float, z, settings: SolverSettings | None = None,
                      full_output: bool = False):
    """Stieltjes transform m(z) of the LSD of (1/n) T^{1/2} X X^* T^{1/2}.

    Solves m = sum_k w_k / (tau_k (1 - y - y z m) - z) for m in
    D_y = {m : -(1-y)/z + y m in C+}. The iteration runs on the companion
    variable e = -(1-y)/z + y m, which satisfies
    e = 1 / (-z + y sum_k w_k tau_k / (1 + tau_k e)) and is mapped into C+
    by that update; m is recovered as (e + (1-y)/z) / y. The starting point
    e = -1/z corresponds to m = -1/z, the exact solution for H = delta_0.
    """
    settings = settings or SolverSettings()
    if not y > 0:
        raise ValueError("y must be positive")
    w, t = _atoms(H)
    z = _check_upper(z)
    zf = np.atleast_1d(z).ravel()

    def to_m(e, idx):
        return (e + (1 - y) / zf[idx]) / y

    def update(e, active):
        zz = zf[active]
        return 1.0 / (-zz + y * np.sum(w * t / (1 + t * e[:, None]), axis=-1))

    def residual(e, idx):
        m = to_m(e, idx)
        return np.abs(m - _silverstein_rhs(m, zf[idx], y, w, t)) / np.maximum(1.0, np.abs(m))

    e, iters = _iterate(update, residual, -1.0 / zf, settings)
    idx = np.arange(zf.size)
    m = to_m(e, idx)
    res = residual(e, idx)
    companion = -(1 - y) / zf + y * m
    if np.any(~(companion.imag > 0)) or np.any(~(m.imag > 0)):
        raise DomainViolationError("Silverstein solution left D_y")
    m = m.reshape(z.shape)
    out = m if m.ndim else complex(m)
    if full_output:
        return out, SolveInfo(float(res.max()), iters)
    return out


def solve_deformed_wigner(H: AtomicDistribution, z, settings: SolverSettings | None = None,
                          full_output: bool = False):
    """Return ``(s, g)`` solving g = sum_k w_k t_k / (-z - t_k g), s = -(1 + g^2)/z.

    The iteration starts from g = 0, the solution for H = delta_0.
    """
    settings = settings or SolverSettings()
    w, t = _atoms(H)
    z = _check_upper(z)
    zf = np.atleast_1d(z).ravel()

    def rhs(g, zz):
        return np.sum(w * t / (-zz[:, None] - t * g[:, None]), axis=-1)

    def update(g, active):
        return rhs(g, zf[active])

    def residual(g, idx):
        return np.abs(g - rhs(g, zf[idx])) / np.maximum(1.0, np.abs(g))

    g, iters = _iterate(update, residual, np.zeros(zf.shape, dtype=complex), settings)
    res = residual(g, np.arange(zf.size))
    if np.any(g.imag < -settings.tol):
        raise DomainViolationError("deformed-Wigner solution has Im g < 0")
    s = -(1.0 + g * g) / zf
    s, g = s.reshape(z.shape), g.reshape(z.shape)
    out = (s, g) if s.ndim else (complex(s), complex(g))
    if full_output:
        return out, SolveInfo(float(res.max()), iters)
    return out


# ---------------------------------------------------------------------------
# inversion and differentiation
# ---------------------------------------------------------------------------


def invert_stieltjes(transform: Callable, x_grid, v: float, richardson: bool = False) -> np.ndarray:
    """Poisson-smoothed density (1/pi) Im m(x + iv) on ``x_grid``.

    With ``richardson=True`` returns 2 rho_v - rho_{2v}, which cancels the
    O(v) smoothing bias.
    """
    if not v > 0:
        raise ValueError("v must be positive")
    x = np.asarray(x_grid, dtype=float)
    rho = np.imag(transform(x + 1j * v)) / np.pi
    if richardson:
        rho2 = np.imag(transform(x + 2j * v)) / np.pi
        return 2.0 * rho - rho2
    return rho


def transform_derivative(transform: Callable, z, h: float | None = None):
    """Central difference (m(z+h) - m(z-h)) / 2h along the real direction.

    Default step h = 1e-5 * max(1, |z|).
    """
    z = np.asarray(z, dtype=complex)
    if h is None:
        h = 1e-5 * np.maximum(1.0, np.abs(z))
    d = (np.asarray(transform(z + h)) - np.asarray(transform(z - h))) / (2.0 * h)
    return d if np.ndim(d) else complex(d)


# ---------------------------------------------------------------------------
# CLT mean and covariance functions for Wigner linear statistics
# ---------------------------------------------------------------------------


def _check_region(z, v0: float):
    z = _check_upper(z)
    if np.any(np.abs(z.imag) < v0):
        raise DomainViolationError(f"z must satisfy |Im z| >= v0 = {v0}")
    return z


def _a(z, c: CltConstants):
    s = semicircle_stieltjes(z)
    sp = semicircle_derivative(z)
    return (1 + sp) * s ** 3 * (c.sigma2 - 1 + (c.kappa - 1) * sp + c.beta * s ** 2)


def clt_mean_a(z, c: CltConstants, v0: float = 0.5):
    """Return ``(a(z), a'(z))``; a'(z) is the limiting mean of n[s'_n - s'_sc]."""
    z = _check_region(z, v0)
    a = _a(z, c)
    ap = transform_derivative(lambda u: _a(u, c), z)
    return (a, ap) if np.ndim(a) else (complex(a), complex(ap))


def _b(z1, z2, c: CltConstants):
    # every product is formed symmetrically so b(z1, z2) == b(z2, z1) bit for bit
    ss = semicircle_stieltjes(z1) * semicircle_stieltjes(z2)
    gap = 1 - ss
    if np.any(np.abs(gap) < 1e-8):
        raise SingularityError("1 - s(z1) s(z2) vanishes")
    return (semicircle_derivative(z1) * semicircle_derivative(z2)) * (
        c.sigma2 - c.kappa + 2 * c.beta * ss + c.kappa / gap ** 2
    )


def clt_cov_b(z1, z2, c: CltConstants, v0: float = 0.5):
    """Return ``(b(z1, z2), d^2 b / dz1 dz2)``; the latter is the limiting covariance.

    The mixed derivative uses nested central differences with steps
    h_k = 1e-4 * max(1, |z_k|).
    """
    z1 = _check_region(z1, v0)
    z2 = _check_region(z2, v0)
    b = _b(z1, z2, c)
    h1 = 1e-4 * np.maximum(1.0, np.abs(z1))
    h2 = 1e-4 * np.maximum(1.0, np.abs(z2))
    d2 = (
        _b(z1 + h1, z2 + h2, c) - _b(z1 + h1, z2 - h2, c)
        - _b(z1 - h1, z2 + h2, c) + _b(z1 - h1, z2 - h2, c)
    ) / (4 * h1 * h2)
    return (b, d2) if np.ndim(b) else (complex(b), complex(d2))


# ---------------------------------------------------------------------------
# spiked covariance fluctuations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockLaw:
    """Gaussian symmetric block whose ordered eigenvalues are the limit of sqrt(n)(D_j - lambda_j I)."""

    eigenvalue: float
    size: int
    diag_variance: float
    offdiag_variance: float

    def sample_ordered(self, draws: int, rng: np.random.Generator) -> np.ndarray:
        """``draws``-by-``size`` array of eigenvalues, each row descending."""
        from .seeding import polar_normal

        d = self.size
        g = polar_normal(rng, (draws, d, d))
        upper = np.triu(g, 1) * math.sqrt(self.offdiag_variance)
        diag = np.einsum("kii->ki", g) * math.sqrt(self.diag_variance)
        m = upper + np.swapaxes(upper, 1, 2)
        m[:, np.arange(d), np.arange(d)] = diag
        return np.linalg.eigvalsh(m)[:, ::-1]


def spiked_limit_description(config: SpikedConfig) -> list[BlockLaw]:
    return [
        BlockLaw(lam, d, 2 * lam * lam, lam * lam)
        for lam, d in zip(config.eigenvalues, config.multiplicities)
    ]


# ---------------------------------------------------------------------------
# numeric CDF of a law known through its Stieltjes transform
# ---------------------------------------------------------------------------


class NumericCDF:
    """CDF assembled from a tabulated density plus explicit atoms.

    Evaluation interpolates the cumulative trapezoid integral linearly. Atoms
    are exposed as jump points so :func:`spectra.ks_distance` stays exact.
    """

    def __init__(self, x: np.ndarray, density: np.ndarray, atoms: dict[float, float] | None = None):
        self.x = np.asarray(x, dtype=float)
        dens = np.clip(np.asarray(density, dtype=float), 0.0, None)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(self.x))))
        self.atoms = dict(sorted((atoms or {}).items()))
        continuous_mass = 1.0 - sum(self.atoms.values())
        self.raw_mass = float(cum[-1])
        self.cum = cum * (continuous_mass / cum[-1]) if cum[-1] > 0 else cum
        self.jumps = np.array(list(self.atoms), dtype=float)

    def _atom_part(self, x, strict: bool):
        out = np.zeros(np.shape(x))
        for loc, mass in self.atoms.items():
            out = out + mass * ((x > loc) if strict else (x >= loc))
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        val = np.interp(x, self.x, self.cum, left=0.0, right=self.cum[-1]) + self._atom_part(x, False)
        return val if val.ndim else float(val)

    def left(self, x):
        x = np.asarray(x, dtype=float)
        val = np.interp(x, self.x, self.cum, left=0.0, right=self.cum[-1]) + self._atom_part(x, True)
        return val if val.ndim else float(val)

    __call__ = cdf


def limit_cdf(transform: Callable, lo: float, hi: float, v: float = 1e-3, points: int | None = None,
              atoms: dict[float, float] | None = None) -> NumericCDF:
    """Numeric CDF from a Stieltjes transform by inversion at fixed ``v``.

    Known atoms (location -> mass) are removed from the smoothed density as
    Cauchy bumps and added back as exact jumps. The total continuous mass is
    renormalised to ``1 - sum(atoms)``, absorbing the Cauchy tails that fall
    outside ``[lo, hi]``.
    """
    if points is None:
        points = int(math.ceil((hi - lo) / v)) + 1
    x = np.linspace(lo, hi, points)
    dens = invert_stieltjes(transform, x, v)
    for loc, mass in (atoms or {}).items():
        dens = dens - mass * v / (np.pi * ((x - loc) ** 2 + v * v))
    return NumericCDF(x, dens, atoms)


def smoothed_limit_cdf(transform: Callable, x_grid, v: float) -> np.ndarray:
    """CDF of the Poisson-smoothed law on an increasing grid covering the support.

    Cumulative trapezoid of (1/pi) Im m(x + iv). The Cauchy tail mass that
    falls outside the grid is split evenly between the two ends.
    """
    x = np.asarray(x_grid, dtype=float)
    rho = invert_stieltjes(transform, x, v)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x))))
    return cum + 0.5 * (1.0 - cum[-1])


def silverstein_cdf(H: AtomicDistribution, y: float, v: float = 1e-3,
                    settings: SolverSettings | None = None) -> NumericCDF:
    """LSD of the sample covariance model as a :class:`NumericCDF`."""
    top = float(H.locations.max()) * (1 + math.sqrt(y)) ** 2
    margin = 0.05 * max(top, 1.0)
    zero_mass = max(H.mass_at(0.0), 1.0 - 1.0 / y, 0.0)
    atoms = {0.0: zero_mass} if zero_mass > 0 else None
    if top == 0.0:
        return NumericCDF(np.array([-1.0, 1.0]), np.zeros(2), {0.0: 1.0})
    return limit_cdf(lambda z: solve_silverstein(H, y, z, settings), -margin, top + margin, v, atoms=atoms)


def deformed_wigner_cdf(H: AtomicDistribution, v: float = 1e-3,
                        settings: SolverSettings | None = None) -> NumericCDF:
    """LSD of the deformed Wigner model as a :class:`NumericCDF`."""
    edge = 2.0 * float(H.locations.max())
    if edge == 0.0:
        return NumericCDF(np.array([-1.0, 1.0]), np.zeros(2), {0.0: 1.0})
    zero_mass = H.mass_at(0.0)
    atoms = {0.0: zero_mass} if zero_mass > 0 else None
    margin = 0.05 * edge + 0.05
    return limit_cdf(lambda z: solve_deformed_wigner(H, z, settings)[0], -edge - margin, edge + margin, v,
                     atoms=atoms)
