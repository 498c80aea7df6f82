"""Seeded generators for the random-matrix models.

All generators are pure functions of their config: the same config (seed
included) returns a bit-identical matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed, make_rng, polar_normal
from .spectra import AtomicDistribution


class InsufficientSampleError(ValueError):
    pass


class EntryLaw(str, enum.Enum):
    """Standardized entry distributions: mean 0, E|w|^2 = 1."""

    GAUSS_REAL = "gauss-real"
    GAUSS_COMPLEX = "gauss-complex"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, text: str | "EntryLaw") -> "EntryLaw":
        if isinstance(text, cls):
            return text
        aliases = {
            "gaussian-real": cls.GAUSS_REAL,
            "gaussian-complex": cls.GAUSS_COMPLEX,
            "uniform-standardized": cls.UNIFORM,
        }
        key = str(text).strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)

    @property
    def is_complex(self) -> bool:
        return self is EntryLaw.GAUSS_COMPLEX

    @property
    def kappa(self) -> int:
        return 1 if self.is_complex else 2

    @property
    def abs_fourth_moment(self) -> float:
        """E|w|^4 for the off-diagonal law."""
        return {
            EntryLaw.GAUSS_REAL: 3.0,
            EntryLaw.GAUSS_COMPLEX: 2.0,
            EntryLaw.RADEMACHER: 1.0,
            EntryLaw.UNIFORM: 9.0 / 5.0,
        }[self]

    @property
    def beta(self) -> float:
        """E(|w|^2 - 1)^2 - kappa."""
        return self.abs_fourth_moment - 1.0 - self.kappa

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self is EntryLaw.GAUSS_REAL:
            return polar_normal(rng, shape)
        if self is EntryLaw.GAUSS_COMPLEX:
            shape = (shape,) if np.isscalar(shape) else tuple(shape)
            z = polar_normal(rng, (2,) + shape) * math.sqrt(0.5)
            return z[0] + 1j * z[1]
        if self is EntryLaw.RADEMACHER:
            return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
        r3 = math.sqrt(3.0)
        return rng.uniform(-r3, r3, size=shape)

    def draw_real(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Real standardized draws (used for Hermitian diagonals)."""
        law = EntryLaw.GAUSS_REAL if self.is_complex else self
        return law.draw(rng, shape)


# ---------------------------------------------------------------------------
# configs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WignerConfig:
    n: int
    entry_law: EntryLaw = EntryLaw.GAUSS_REAL
    diag_variance: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entry_law", EntryLaw.parse(self.entry_law))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.diag_variance > 0:
            raise ValueError("diag_variance must be positive")


@dataclass(frozen=True)
class CovarianceConfig:
    """(1/n) T^{1/2} X X^* T^{1/2} with X p-by-n and spec(T) drawn from ``population_spectrum``.

    ``t_mode="apportion"`` fills T deterministically by largest remainder;
    ``"iid"`` draws its eigenvalues independently from the spectrum.
    """

    p: int
    n: int
    population_spectrum: AtomicDistribution
    entry_law: EntryLaw = EntryLaw.GAUSS_REAL
    seed: int = 0
    t_mode: str = "apportion"

    def __post_init__(self):
        object.__setattr__(self, "entry_law", EntryLaw.parse(self.entry_law))
        if self.p < 1 or self.n < 1:
            raise ValueError("p and n must be >= 1")
        if np.any(self.population_spectrum.locations < 0):
            raise ValueError("population spectrum atoms must be nonnegative")
        if self.t_mode not in ("apportion", "iid"):
            raise ValueError(f"unknown t_mode {self.t_mode!r}")

    @property
    def y(self) -> float:
        return self.p / self.n


@dataclass(frozen=True)
class DeformedConfig:
    """n^{-1/2} T^{1/2} W T^{1/2} with W an unscaled Wigner draw (n-by-n)."""

    n: int
    population_spectrum: AtomicDistribution
    entry_law: EntryLaw = EntryLaw.GAUSS_REAL
    diag_variance: float = 1.0
    seed: int = 0
    t_mode: str = "apportion"

    def __post_init__(self):
        object.__setattr__(self, "entry_law", EntryLaw.parse(self.entry_law))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if np.any(self.population_spectrum.locations < 0):
            raise ValueError("population spectrum atoms must be nonnegative")
        if self.t_mode not in ("apportion", "iid"):
            raise ValueError(f"unknown t_mode {self.t_mode!r}")


@dataclass(frozen=True)
class SpikedConfig:
    """Gaussian sample with covariance V diag(lambda_j I_{d_j}) V'."""

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]
    n: int
    rotation: np.ndarray | None = field(default=None, compare=False)
    seed: int = 0

    def __post_init__(self):
        lam = tuple(float(v) for v in self.eigenvalues)
        mult = tuple(int(v) for v in self.multiplicities)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "multiplicities", mult)
        if len(lam) != len(mult) or not lam:
            raise ValueError("eigenvalues and multiplicities must align")
        if any(a <= b for a, b in zip(lam, lam[1:])) or lam[-1] < 0:
            raise ValueError("eigenvalues must be strictly decreasing and nonnegative")
        if any(m < 1 for m in mult):
            raise ValueError("multiplicities must be positive")
        if self.rotation is not None:
            v = np.asarray(self.rotation, dtype=float)
            if v.shape != (self.dim, self.dim):
                raise ValueError("rotation has the wrong shape")
            if np.max(np.abs(v.T @ v - np.eye(self.dim))) > 1e-10:
                raise ValueError("rotation is not orthogonal")
            object.__setattr__(self, "rotation", v)

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def population_diagonal(self) -> np.ndarray:
        return np.repeat(self.eigenvalues, self.multiplicities)

    def population_covariance(self) -> np.ndarray:
        lam = np.diag(self.population_diagonal())
        if self.rotation is None:
            return lam
        v = self.rotation
        return v @ lam @ v.T

    def group_slices(self) -> list[slice]:
        """Index ranges of each eigenvalue group among descending eigenvalues."""
        out, start = [], 0
        for m in self.multiplicities:
            out.append(slice(start, start + m))
            start += m
        return out


def haar_orthogonal(d: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    rng = make_rng(derive_seed(seed, 0, "haar"))
    q, r = np.linalg.qr(polar_normal(rng, (d, d)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _wigner_unscaled(n: int, law: EntryLaw, diag_variance: float, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    off = law.draw(rng, iu[0].size)
    diag = law.draw_real(rng, n) * math.sqrt(diag_variance)
    w = np.zeros((n, n), dtype=complex if law.is_complex else float)
    w[iu] = off
    w = w + w.conj().T
    w[np.diag_indices(n)] = diag
    return w


def sample_wigner(config: WignerConfig) -> np.ndarray:
    """Hermitian n-by-n matrix with entries w_ij / sqrt(n)."""
    rng = make_rng(derive_seed(config.seed, 0, "wigner"))
    w = _wigner_unscaled(config.n, config.entry_law, config.diag_variance, rng)
    return w / math.sqrt(config.n)


def _population_diagonal(spectrum: AtomicDistribution, count: int, mode: str, seed: int) -> np.ndarray:
    if mode == "apportion":
        return spectrum.apportion(count)
    return spectrum.sample(make_rng(derive_seed(seed, 0, "population")), count)


def sample_sample_covariance(config: CovarianceConfig) -> np.ndarray:
    """B = (1/n) T^{1/2} X X^* T^{1/2}, exactly Hermitian."""
    t = _population_diagonal(config.population_spectrum, config.p, config.t_mode, config.seed)
    rng = make_rng(derive_seed(config.seed, 0, "covariance"))
    x = config.entry_law.draw(rng, (config.p, config.n))
    y = np.sqrt(t)[:, None] * x
    b = (y @ y.conj().T) / config.n
    return 0.5 * (b + b.conj().T)


def sample_deformed_wigner(config: DeformedConfig) -> np.ndarray:
    """n^{-1/2} T^{1/2} W T^{1/2}; the scaling lives inside :func:`sample_wigner`."""
    t = _population_diagonal(config.population_spectrum, config.n, config.t_mode, config.seed)
    w = sample_wigner(WignerConfig(config.n, config.entry_law, config.diag_variance, config.seed))
    root = np.sqrt(t)
    return np.outer(root, root) * w


def sample_spiked(config: SpikedConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(S_n, Sigma)`` with S_n the (n-1)-normalized centered sample covariance."""
    if config.n <= 1:
        raise InsufficientSampleError("the sample covariance needs n >= 2")
    rng = make_rng(derive_seed(config.seed, 0, "spiked"))
    z = polar_normal(rng, (config.n, config.dim))
    x = z * np.sqrt(config.population_diagonal())[None, :]
    if config.rotation is not None:
        x = x @ config.rotation.T
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / (config.n - 1)
    s = 0.5 * (s + s.T)
    return s, config.population_covariance()


def wick_covariance(sigma, i: int, j: int, s: int, t: int) -> float:
    """Cov(X_i X_j, X_s X_t) for a centered Gaussian vector with covariance ``sigma``.

    Indices are zero-based.
    """
    sig = np.asarray(sigma, dtype=float)
    d = sig.shape[0]
    for k in (i, j, s, t):
        if not 0 <= k < d:
            raise IndexError(f"index {k} out of range for dimension {d}")
    return float(sig[i, s] * sig[j, t] + sig[i, t] * sig[j, s])
