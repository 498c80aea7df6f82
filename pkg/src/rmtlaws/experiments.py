"""Monte Carlo experiments tying generators, spectra and limit laws together.

Each experiment is a pure function of its arguments. Replicate ``r`` uses a
generator seeded by ``derive_seed(master_seed, r, tag)``; replicates may run in
worker processes, and results are always folded in replicate order, so serial
and parallel runs emit byte-identical CSV.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import laws
from .ensembles import (
    CovarianceConfig,
    DeformedConfig,
    EntryLaw,
    SpikedConfig,
    WignerConfig,
    sample_deformed_wigner,
    sample_sample_covariance,
    sample_spiked,
    sample_wigner,
)
from .seeding import derive_seed, make_rng
from .spectra import AtomicDistribution, EmpiricalSpectrum, eigenvalues_symmetric, ks_distance

DEFAULTS_VERSION = "1"


@dataclass(frozen=True)
class Tolerances:
    """Finite-n pass thresholds (version ``DEFAULTS_VERSION``)."""

    ks_wigner: float = 0.05
    ks_covariance: float = 0.06
    ks_deformed: float = 0.08
    spiked_variance_rel: float = 0.15
    spiked_block_ks: float = 0.08
    spiked_cross_corr: float = 0.1
    clt_se_multiple: float = 3.0
    psd_floor: float = -1e-10


DEFAULTS = Tolerances()


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

CSV_HEADER = ("record", "group", "replicate", "statistic", "value", "se", "theory", "passed")


@dataclass(frozen=True)
class Row:
    group: str
    replicate: int
    statistic: str
    value: float


@dataclass(frozen=True)
class Summary:
    group: str
    statistic: str
    value: float
    se: float | None = None
    theory: float | None = None
    passed: bool | None = None


@dataclass
class ExperimentReport:
    experiment_name: str
    master_seed: int
    rows: list[Row]
    summary: list[Summary]
    wall_time: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return all(s.passed is not False for s in self.summary)

    def criterion(self, group: str, statistic: str) -> Summary:
        for s in self.summary:
            if s.group == group and s.statistic == statistic:
                return s
        raise KeyError((group, statistic))

    def values(self, group: str, statistic: str) -> np.ndarray:
        return np.array([r.value for r in self.rows if r.group == group and r.statistic == statistic])

    def to_csv(self) -> str:
        """CSV text; ``wall_time`` is left out so reruns are byte-identical."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(("row", r.group, r.replicate, r.statistic, _fmt(r.value), "", "", ""))
        for s in self.summary:
            w.writerow(("summary", s.group, "", s.statistic, _fmt(s.value), _fmt(s.se), _fmt(s.theory),
                        "" if s.passed is None else int(s.passed)))
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def rows_from_csv(text: str) -> list[Row]:
    reader = csv.DictReader(io.StringIO(text))
    return [
        Row(d["group"], int(d["replicate"]), d["statistic"], float(d["value"]))
        for d in reader if d["record"] == "row"
    ]


def _map_ordered(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


# ---------------------------------------------------------------------------
# LSD experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleConfig:
    """One matrix model for the LSD experiment.

    ``kind`` is ``"wigner"``, ``"covariance"`` or ``"deformed"``; ``y`` is
    p/n for the covariance model and ``spectrum`` is H for the covariance
    and deformed models.
    """

    kind: str = "wigner"
    entry_law: EntryLaw = EntryLaw.GAUSS_REAL
    diag_variance: float = 1.0
    spectrum: AtomicDistribution | None = None
    y: float = 0.5
    t_mode: str = "apportion"
    eigen_method: str = "lapack"

    def __post_init__(self):
        object.__setattr__(self, "entry_law", EntryLaw.parse(self.entry_law))
        if self.kind not in ("wigner", "covariance", "deformed"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind != "wigner" and self.spectrum is None:
            object.__setattr__(self, "spectrum", AtomicDistribution.point_mass(1.0))

    def draw(self, n: int, seed: int) -> np.ndarray:
        if self.kind == "wigner":
            return sample_wigner(WignerConfig(n, self.entry_law, self.diag_variance, seed))
        if self.kind == "covariance":
            p = max(1, int(round(self.y * n)))
            return sample_sample_covariance(CovarianceConfig(p, n, self.spectrum, self.entry_law, seed, self.t_mode))
        return sample_deformed_wigner(DeformedConfig(n, self.spectrum, self.entry_law, self.diag_variance,
                                                     seed, self.t_mode))

    def spectrum_of(self, matrix: np.ndarray) -> EmpiricalSpectrum:
        spec = eigenvalues_symmetric(matrix, self.eigen_method)
        if self.kind != "covariance":
            return spec
        # nonnegative definite: roundoff-level eigenvalues are exact zeros
        lam = spec.eigenvalues.copy()
        lam[np.abs(lam) <= 1e-10 * max(np.abs(lam).max(), 1e-300)] = 0.0
        return EmpiricalSpectrum(lam)

    def limit(self, v: float = 1e-3):
        if self.kind == "wigner":
            return laws.semicircle_cdf
        if self.kind == "covariance":
            return laws.silverstein_cdf(self.spectrum, self.y, v)
        return laws.deformed_wigner_cdf(self.spectrum, v)

    def ks_threshold(self, tol: Tolerances) -> float:
        return {"wigner": tol.ks_wigner, "covariance": tol.ks_covariance, "deformed": tol.ks_deformed}[self.kind]


def smoothed_ks(spec: EmpiricalSpectrum, transform: Callable, lo: float, hi: float, v: float = 1e-3,
                points: int | None = None) -> float:
    """KS distance between the Cauchy-smoothed ESD and the smoothed limit, both at width ``v``.

    Both CDFs are continuous, so the supremum is taken over a grid of
    spacing v/2 on ``[lo, hi]``.
    """
    if points is None:
        points = int(math.ceil(2 * (hi - lo) / v)) + 1
    x = np.linspace(lo, hi, points)
    return float(np.max(np.abs(spec.smoothed_cdf(x, v) - laws.smoothed_limit_cdf(transform, x, v))))


def _lsd_replicate(task):
    ensemble, n, rep, seed, limit = task
    matrix = ensemble.draw(n, derive_seed(seed, rep, f"lsd-n{n}"))
    return ks_distance(ensemble.spectrum_of(matrix), limit)


def summarize_lsd(rows: Sequence[Row], sizes: Sequence[int], ks_threshold: float,
                  median_proxy: bool = False) -> list[Summary]:
    """Per-size KS summaries and the decrease checks.

    ``median_proxy`` adds a median-KS decrease check, the finite-sample
    stand-in for convergence in probability (random population spectrum).
    """
    out = []
    means, ses, medians = [], [], []
    for n in sizes:
        ks = np.array([r.value for r in rows if r.group == f"n={n}" and r.statistic == "ks"])
        m, se = _mean_se(ks)
        means.append(m)
        ses.append(se)
        medians.append(float(np.median(ks)))
        out.append(Summary(f"n={n}", "mean_ks", m, se))
        out.append(Summary(f"n={n}", "median_ks", medians[-1]))
    for k in range(1, len(sizes)):
        band = math.sqrt(np.nan_to_num(ses[k - 1]) ** 2 + np.nan_to_num(ses[k]) ** 2)
        out.append(Summary(f"n={sizes[k - 1]}->{sizes[k]}", "mean_ks_decrease", means[k - 1] - means[k],
                           band, passed=means[k] <= means[k - 1] + band))
        if median_proxy:
            out.append(Summary(f"n={sizes[k - 1]}->{sizes[k]}", "median_ks_decrease",
                               medians[k - 1] - medians[k], passed=medians[k] <= medians[k - 1]))
    out.append(Summary(f"n={sizes[-1]}", "ks_below_threshold", means[-1], theory=ks_threshold,
                       passed=means[-1] < ks_threshold))
    return out


def run_lsd_experiment(ensemble: EnsembleConfig, sizes: Sequence[int], reps: int, seed: int,
                       workers: int = 1, tolerances: Tolerances = DEFAULTS, v: float = 1e-3) -> ExperimentReport:
    """Mean KS distance between ESDs and the limit law, for each matrix size."""
    sizes = [int(n) for n in sizes]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be increasing")
    start = time.perf_counter()
    limit = ensemble.limit(v)
    tasks = [(ensemble, n, r, seed, limit) for n in sizes for r in range(reps)]
    ks = _map_ordered(_lsd_replicate, tasks, workers)
    rows = [Row(f"n={t[1]}", t[2], "ks", float(k)) for t, k in zip(tasks, ks)]
    summary = summarize_lsd(rows, sizes, ensemble.ks_threshold(tolerances),
                            median_proxy=ensemble.kind != "wigner" and ensemble.t_mode == "iid")
    return ExperimentReport(f"lsd-{ensemble.kind}", seed, rows, summary, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# spiked covariance fluctuations
# ---------------------------------------------------------------------------


def _spiked_replicate(task):
    config, rep, seed = task
    s, _ = sample_spiked(replace(config, seed=derive_seed(seed, rep, "spiked")))
    lam = np.linalg.eigvalsh(s)[::-1]
    pop = config.population_diagonal()
    return math.sqrt(config.n) * (lam - pop)


def block_law_samples(config: SpikedConfig, draws: int, seed: int) -> list[np.ndarray]:
    """Ordered eigenvalues of each limiting Gaussian block (nested Monte Carlo)."""
    out = []
    for j, block in enumerate(laws.spiked_limit_description(config)):
        rng = make_rng(derive_seed(seed, j, "spiked-block"))
        out.append(block.sample_ordered(draws, rng))
    return out


class _Sample:
    """Empirical CDF of a 1-D sample with the step-CDF interface."""

    def __init__(self, values):
        self._spec = EmpiricalSpectrum(values)

    jumps = property(lambda self: self._spec.jumps)

    def cdf(self, x):
        return self._spec.cdf(x)

    def left(self, x):
        return self._spec.left(x)


def summarize_spiked(rows: Sequence[Row], config: SpikedConfig, block_draws: list[np.ndarray],
                     tol: Tolerances) -> list[Summary]:
    out = []
    stats = {}
    for j, (sl, block) in enumerate(zip(config.group_slices(), laws.spiked_limit_description(config))):
        for k, t in enumerate(range(sl.start, sl.stop)):
            name = f"l{t + 1}"
            x = np.array([r.value for r in rows if r.statistic == name])
            stats[(j, name)] = x
            if block.size == 1:
                theory = block.diag_variance
            else:
                theory = float(np.var(block_draws[j][:, k], ddof=1))
            var = float(np.var(x, ddof=1))
            # se of a sample variance under normality
            se = var * math.sqrt(2.0 / (x.size - 1))
            ok = abs(var - theory) <= tol.spiked_variance_rel * theory if theory > 0 else var == 0.0
            out.append(Summary(f"group={j + 1}", f"var_{name}", var, se, theory, ok))
            if block.size > 1:
                ks = ks_distance(_Sample(x), _Sample(block_draws[j][:, k]))
                out.append(Summary(f"group={j + 1}", f"ks_{name}", ks, theory=tol.spiked_block_ks,
                                   passed=ks <= tol.spiked_block_ks))
    keys = sorted(stats)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            (ja, na), (jb, nb) = keys[a], keys[b]
            if ja == jb:
                continue
            xa, xb = stats[keys[a]], stats[keys[b]]
            if np.std(xa) == 0 or np.std(xb) == 0:
                continue
            corr = float(np.corrcoef(xa, xb)[0, 1])
            out.append(Summary(f"groups={ja + 1},{jb + 1}", f"corr_{na}_{nb}", corr,
                               1.0 / math.sqrt(xa.size), 0.0, abs(corr) <= tol.spiked_cross_corr))
    return out


def run_spiked_experiment(config: SpikedConfig, reps: int, seed: int, workers: int = 1,
                          block_draws: int = 100_000, tolerances: Tolerances = DEFAULTS) -> ExperimentReport:
    """sqrt(n)(l_t - lambda_j) per replicate against the limiting block laws."""
    if reps < 100:
        raise ValueError("the spiked experiment needs reps >= 100")
    start = time.perf_counter()
    tasks = [(config, r, seed) for r in range(reps)]
    fluct = _map_ordered(_spiked_replicate, tasks, workers)
    rows = [Row("all", r, f"l{t + 1}", float(v)) for r, f in enumerate(fluct) for t, v in enumerate(f)]
    draws = block_law_samples(config, block_draws, seed)
    summary = summarize_spiked(rows, config, draws, tolerances)
    return ExperimentReport("spiked", seed, rows, summary, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# CLT for the derivative of the Stieltjes transform
# ---------------------------------------------------------------------------


def _clt_replicate(task):
    n, law, diag_variance, z_points, rep, seed, eigen_method = task
    w = sample_wigner(WignerConfig(n, law, diag_variance, derive_seed(seed, rep, "clt")))
    spec = eigenvalues_symmetric(w, eigen_method)
    z = np.asarray(z_points, dtype=complex)
    return n * (spec.stieltjes_derivative(z) - laws.semicircle_derivative(z))


def clt_theory(z_points: Sequence[complex], constants: laws.CltConstants, v0: float):
    z = np.asarray(z_points, dtype=complex)
    _, mean = laws.clt_mean_a(z, constants, v0)
    cov = np.empty((z.size, z.size), dtype=complex)
    for i in range(z.size):
        for j in range(z.size):
            cov[i, j] = laws.clt_cov_b(z[i], z[j], constants, v0)[1]
    return np.atleast_1d(mean), cov


def summarize_clt(rows: Sequence[Row], z_points: Sequence[complex], constants: laws.CltConstants,
                  v0: float, tol: Tolerances) -> list[Summary]:
    labels = [format_complex(z) for z in z_points]
    lookup = {(r.group, r.statistic, r.replicate): r.value for r in rows}
    xi = np.array([
        [complex(lookup[lab, "xi_re", r], lookup[lab, "xi_im", r]) for lab in labels]
        for r in sorted({row.replicate for row in rows})
    ])
    reps = xi.shape[0]
    mean_th, cov_th = clt_theory(z_points, constants, v0)
    k = tol.clt_se_multiple
    out = []
    centered = xi - xi.mean(axis=0)
    for i, lab in enumerate(labels):
        for part, fn in (("re", np.real), ("im", np.imag)):
            m, se = _mean_se(fn(xi[:, i]))
            th = float(fn(mean_th[i]))
            out.append(Summary(f"z={lab}", f"mean_{part}", m, se, th, abs(m - th) <= k * se))
    for i in range(len(labels)):
        for j in range(i, len(labels)):
            prod = centered[:, i] * centered[:, j] * reps / (reps - 1)
            for part, fn in (("re", np.real), ("im", np.imag)):
                m, se = _mean_se(fn(prod))
                th = float(fn(cov_th[i, j]))
                out.append(Summary(f"z={labels[i]};{labels[j]}", f"cov_{part}", m, se, th, abs(m - th) <= k * se))
    stacked = np.concatenate([xi.real, xi.imag], axis=1)
    min_eig = float(np.linalg.eigvalsh(np.cov(stacked, rowvar=False)).min())
    out.append(Summary("all", "cov_min_eigenvalue", min_eig, theory=tol.psd_floor, passed=min_eig >= tol.psd_floor))
    return out


def run_clt_experiment(n: int, reps: int, z_points: Sequence[complex], entry_law: EntryLaw | str, seed: int,
                       diag_variance: float = 1.0, v0: float = 0.5, workers: int = 1,
                       tolerances: Tolerances = DEFAULTS, eigen_method: str = "lapack") -> ExperimentReport:
    """xi_n(z) = n[s'_ESD(z) - s'_sc(z)] against the limiting mean a'(z) and covariance d2b."""
    law = EntryLaw.parse(entry_law)
    if reps < 200:
        raise ValueError("the CLT experiment needs reps >= 200")
    z_points = [complex(z) for z in z_points]
    constants = laws.CltConstants.for_law(law, diag_variance)
    clt_theory(z_points, constants, v0)  # region check before any sampling
    start = time.perf_counter()
    tasks = [(n, law, diag_variance, tuple(z_points), r, seed, eigen_method) for r in range(reps)]
    xis = _map_ordered(_clt_replicate, tasks, workers)
    labels = [format_complex(z) for z in z_points]
    rows = []
    for r, xi in enumerate(xis):
        for lab, v in zip(labels, np.atleast_1d(xi)):
            rows.append(Row(lab, r, "xi_re", float(v.real)))
            rows.append(Row(lab, r, "xi_im", float(v.imag)))
    summary = summarize_clt(rows, z_points, constants, v0, tolerances)
    return ExperimentReport("clt", seed, rows, summary, time.perf_counter() - start)
