"""Empirical spectral distributions, step CDFs, KS distance, Stieltjes transforms."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .tridiagonal import symmetric_eigenvalues

HERMITIAN_RTOL = 1e-12


class NotHermitianError(ValueError):
    """Raised when a matrix handed to the eigensolver is not Hermitian."""


class DomainError(ValueError):
    """Raised for a transform argument outside the open upper half plane."""


def _check_upper(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(~(z.imag > 0)):
        raise DomainError("Stieltjes transforms need Im z > 0")
    return z


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


class _StepCDF:
    """Shared evaluation for distributions with finitely many atoms."""

    _points: np.ndarray  # sorted jump locations
    _cum: np.ndarray  # cumulative mass at each jump location

    @property
    def jumps(self) -> np.ndarray:
        return self._points

    def cdf(self, x):
        idx = np.searchsorted(self._points, x, side="right")
        return np.concatenate(([0.0], self._cum))[idx]

    def left(self, x):
        """Left limit F(x-)."""
        idx = np.searchsorted(self._points, x, side="left")
        return np.concatenate(([0.0], self._cum))[idx]

    __call__ = cdf


@dataclass(frozen=True, eq=False)
class EmpiricalSpectrum(_StepCDF):
    """Sorted eigenvalues of one matrix, viewed as the ESD step function."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.sort(np.asarray(self.eigenvalues, dtype=float).ravel())
        if not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite")
        if lam.size == 0:
            raise ValueError("empty spectrum")
        object.__setattr__(self, "eigenvalues", lam)
        pts, counts = np.unique(lam, return_counts=True)
        object.__setattr__(self, "_points", pts)
        object.__setattr__(self, "_cum", np.cumsum(counts) / lam.size)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def stieltjes(self, z):
        return stieltjes_of_spectrum(self, z)

    def stieltjes_derivative(self, z):
        """Exact derivative (1/n) sum (lambda_i - z)^-2."""
        z = _check_upper(z)
        return _resolvent_mean(self.eigenvalues, z, power=2)

    def smoothed_cdf(self, x, v: float, chunk: int = 1024):
        """ESD convolved with the Cauchy kernel of width ``v``: mean of 1/2 + arctan((x - lambda_i)/v)/pi."""
        if not v > 0:
            raise ValueError("v must be positive")
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, chunk):
            xx = flat[start:start + chunk, None]
            out[start:start + chunk] = 0.5 + np.mean(np.arctan((xx - self.eigenvalues[None, :]) / v), axis=1) / np.pi
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eigenvalue"])
        for lam in self.eigenvalues:
            w.writerow([repr(float(lam))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class AtomicDistribution(_StepCDF):
    """Finite atomic probability measure: ``sum_k weights[k] * delta(locations[k])``."""

    weights: np.ndarray
    locations: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        x = np.atleast_1d(np.asarray(self.locations, dtype=float))
        if w.shape != x.shape or w.size == 0:
            raise ValueError("weights and locations must be non-empty and aligned")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {float(w.sum())!r}, not 1")
        if not np.all(np.isfinite(x)):
            raise ValueError("atom locations must be finite")
        # merge repeated locations, keep ascending order
        pts, inv = np.unique(x, return_inverse=True)
        merged = np.zeros(pts.size)
        np.add.at(merged, inv, w)
        object.__setattr__(self, "weights", merged)
        object.__setattr__(self, "locations", pts)
        object.__setattr__(self, "_points", pts)
        object.__setattr__(self, "_cum", np.cumsum(merged))

    @classmethod
    def point_mass(cls, location: float) -> "AtomicDistribution":
        return cls([1.0], [location])

    @classmethod
    def parse(cls, text: str) -> "AtomicDistribution":
        """Parse ``"0.5:1.0,0.5:4.0"`` (comma-separated ``weight:location``)."""
        weights, locations = [], []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                w, x = item.split(":")
                weights.append(float(w))
                locations.append(float(x))
            except ValueError as exc:
                raise ValueError(f"bad spectrum atom {item!r}; expected weight:location") from exc
        return cls(weights, locations)

    def format(self) -> str:
        return ",".join(f"{float(w)!r}:{float(x)!r}" for w, x in zip(self.weights, self.locations))

    def mean(self) -> float:
        return float(self.weights @ self.locations)

    def mass_at(self, location: float) -> float:
        hit = self.locations == location
        return float(self.weights[hit].sum())

    def apportion(self, count: int) -> np.ndarray:
        """Largest-remainder split of ``count`` slots; returns the slot values ascending."""
        quotas = self.weights * count
        base = np.floor(quotas).astype(int)
        short = count - base.sum()
        order = np.argsort(-(quotas - base), kind="stable")
        base[order[:short]] += 1
        return np.repeat(self.locations, base)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.choice(self.locations, size=count, p=self.weights)

    def stieltjes(self, z):
        z = _check_upper(z)
        return np.sum(self.weights / (self.locations - z[..., None]), axis=-1)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def eigenvalues_symmetric(matrix, method: str = "lapack", check: bool = True) -> EmpiricalSpectrum:
    """All eigenvalues of a Hermitian matrix, ascending.

    ``method="lapack"`` calls ``numpy.linalg.eigvalsh``; ``"householder-ql"``
    uses the in-house Householder + implicit QL solver.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}")
    if check:
        scale = np.max(np.abs(a)) if a.size else 0.0
        asym = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
        if asym > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
            raise NotHermitianError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
    if method == "lapack":
        lam = np.linalg.eigvalsh(a)
    elif method == "householder-ql":
        lam = symmetric_eigenvalues(a)
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    return EmpiricalSpectrum(lam)


def esd_cdf(spec: EmpiricalSpectrum, x):
    """(1/n) * #{lambda_i <= x}."""
    return spec.cdf(x)


def _resolvent_mean(lam: np.ndarray, z: np.ndarray, power: int = 1, chunk: int = 2048):
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, chunk):
        zz = flat[start:start + chunk, None]
        out[start:start + chunk] = np.mean((lam[None, :] - zz) ** (-power), axis=1)
    return out.reshape(z.shape) if z.ndim else complex(out[0])


def stieltjes_of_spectrum(spec: EmpiricalSpectrum, z):
    """(1/n) sum_i 1/(lambda_i - z) for Im z > 0."""
    z = _check_upper(z)
    return _resolvent_mean(spec.eigenvalues, z)


def _cdf_parts(F) -> tuple[Callable, Callable, np.ndarray]:
    if hasattr(F, "jumps"):
        return F.cdf if hasattr(F, "cdf") else F, F.left, np.asarray(F.jumps, dtype=float)
    return F, F, np.empty(0)


def ks_distance(F, G) -> float:
    """sup_x |F(x) - G(x)|, exact for step CDFs.

    Each argument is either an object with ``cdf``, ``left`` and ``jumps``
    (a step or step-plus-continuous CDF) or a plain continuous callable. At
    least one argument must carry jump points. Between consecutive jump
    points of the union one CDF is flat and the other is monotone, so the
    supremum is attained at a jump point or as a left limit there.
    """
    f, f_left, fj = _cdf_parts(F)
    g, g_left, gj = _cdf_parts(G)
    pts = np.union1d(fj, gj)
    if pts.size == 0:
        raise ValueError("ks_distance needs at least one step CDF")
    right = np.abs(np.asarray(f(pts), dtype=float) - np.asarray(g(pts), dtype=float))
    left = np.abs(np.asarray(f_left(pts), dtype=float) - np.asarray(g_left(pts), dtype=float))
    return float(max(right.max(), left.max()))


def cdf_table_csv(F, xs: Iterable[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "F"])
    f = F.cdf if hasattr(F, "cdf") else F
    for x in xs:
        w.writerow([repr(float(x)), repr(float(f(x)))])
    return buf.getvalue()
