import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rmtlaws.ensembles import WignerConfig, sample_wigner
from rmtlaws.laws import semicircle_cdf
from rmtlaws.spectra import (
    AtomicDistribution,
    DomainError,
    EmpiricalSpectrum,
    NotHermitianError,
    cdf_table_csv,
    eigenvalues_symmetric,
    esd_cdf,
    ks_distance,
    stieltjes_of_spectrum,
)
from rmtlaws.tridiagonal import householder_tridiagonal, tridiagonal_ql

METHODS = ("lapack", "householder-ql")


def random_hermitian(n, seed, complex_=False):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    if complex_:
        a = a + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


# -- eigenvalues --------------------------------------------------------------


@pytest.mark.parametrize("method", METHODS)
def test_small_closed_forms(method):
    np.testing.assert_allclose(eigenvalues_symmetric(np.diag([3.0, 1.0, 2.0]), method).eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(eigenvalues_symmetric([[0.0, 1.0], [1.0, 0.0]], method).eigenvalues, [-1, 1],
                               atol=1e-15)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("complex_", [False, True])
def test_trace_and_frobenius_identities(method, complex_):
    a = random_hermitian(50, 1, complex_)
    lam = eigenvalues_symmetric(a, method).eigenvalues
    norm = np.linalg.norm(a)
    assert abs(lam.sum() - np.trace(a).real) <= 1e-9 * norm
    assert abs(np.sum(lam**2) - norm**2) <= 1e-9 * norm**2
    assert np.all(np.diff(lam) >= 0)


@pytest.mark.parametrize("complex_", [False, True])
def test_inhouse_solver_matches_lapack_and_residuals(complex_):
    a = random_hermitian(120, 2, complex_)
    ours = eigenvalues_symmetric(a, "householder-ql").eigenvalues
    np.testing.assert_allclose(ours, np.linalg.eigvalsh(a), atol=1e-11)
    # residual spot checks with recomputed eigenvectors
    w, v = np.linalg.eigh(a)
    norm = np.linalg.norm(a, 2)
    for k in (0, 37, 119):
        assert abs(ours[k] - w[k]) < 1e-10 * norm
        assert np.linalg.norm(a @ v[:, k] - ours[k] * v[:, k]) <= 1e-8 * norm


def test_tridiagonal_reduction_preserves_spectrum():
    a = random_hermitian(30, 3)
    d, e = householder_tridiagonal(a)
    t = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    np.testing.assert_allclose(np.linalg.eigvalsh(t), np.linalg.eigvalsh(a), atol=1e-12)
    np.testing.assert_allclose(tridiagonal_ql(d, e), np.linalg.eigvalsh(a), atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        eigenvalues_symmetric([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitianError):
        eigenvalues_symmetric(np.ones((2, 3)))
    # asymmetry below 1e-12 relative is tolerated
    a = np.array([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
    eigenvalues_symmetric(a)


def test_one_by_one():
    assert eigenvalues_symmetric([[4.5]], "householder-ql").eigenvalues.tolist() == [4.5]


# -- ESD ------------------------------------------------------------------------


def test_esd_cdf_examples():
    spec = EmpiricalSpectrum([3.0, 1.0, 2.0])
    assert esd_cdf(spec, 2.0) == pytest.approx(2 / 3)
    assert esd_cdf(spec, -10.0) == 0.0
    assert esd_cdf(spec, 10.0) == 1.0
    tied = EmpiricalSpectrum([1.0, 2.0, 2.0, 2.0, 5.0])
    assert esd_cdf(tied, 2.0) - tied.left(2.0) == pytest.approx(3 / 5)
    assert esd_cdf(tied, 2.0) == pytest.approx(4 / 5)


@given(arrays(float, st.integers(1, 40), elements=st.floats(-1e3, 1e3)),
       st.lists(st.floats(-2e3, 2e3), min_size=2, max_size=20))
def test_esd_cdf_monotone(lam, xs):
    spec = EmpiricalSpectrum(lam)
    xs = np.sort(xs)
    vals = esd_cdf(spec, xs)
    assert np.all(np.diff(vals) >= 0)
    assert esd_cdf(spec, lam.max()) == 1.0


def test_spectrum_rejects_nonfinite():
    with pytest.raises(ValueError):
        EmpiricalSpectrum([1.0, np.nan])


# -- KS -------------------------------------------------------------------------


def test_ks_examples():
    spec = EmpiricalSpectrum([0.1, 0.5, 0.9])
    assert ks_distance(spec, spec) == 0.0
    assert ks_distance(AtomicDistribution.point_mass(0.0), AtomicDistribution.point_mass(1.0)) == 1.0


def test_ks_against_continuous_uses_left_limits():
    # single atom at 0 vs uniform(-1, 1): F jumps 0 -> 1 at 0 where G = 1/2
    uni = lambda x: np.clip((np.asarray(x) + 1) / 2, 0, 1)  # noqa: E731
    assert ks_distance(EmpiricalSpectrum([0.0]), uni) == pytest.approx(0.5)
    assert ks_distance(uni, EmpiricalSpectrum([0.0])) == pytest.approx(0.5)


def test_goe_against_semicircle():
    lam = eigenvalues_symmetric(sample_wigner(WignerConfig(1000, seed=7)))
    assert ks_distance(lam, semicircle_cdf) < 0.05


steps = arrays(float, st.integers(1, 15), elements=st.floats(-5, 5)).map(EmpiricalSpectrum)


@settings(max_examples=200)
@given(steps, steps, steps)
def test_ks_symmetric_and_triangle(f, g, h):
    fg, gh, fh = ks_distance(f, g), ks_distance(g, h), ks_distance(f, h)
    assert fg == ks_distance(g, f)
    assert 0 <= fh <= 1
    assert fh <= fg + gh + 1e-12


# -- Stieltjes ---------------------------------------------------------------


def test_stieltjes_examples():
    assert stieltjes_of_spectrum(EmpiricalSpectrum([0.0]), 1j) == pytest.approx(1j)
    assert stieltjes_of_spectrum(EmpiricalSpectrum([-1.0, 1.0]), 1j) == pytest.approx(0.5j)
    spec = EmpiricalSpectrum(np.linspace(-3, 4, 11))
    for y in (1e2, 1e3, 1e4):
        assert abs(stieltjes_of_spectrum(spec, 1j * y) - 1j / y) <= 4.0 / y**2


def test_stieltjes_domain():
    with pytest.raises(DomainError):
        stieltjes_of_spectrum(EmpiricalSpectrum([0.0]), 1.0 + 0j)
    with pytest.raises(DomainError):
        stieltjes_of_spectrum(EmpiricalSpectrum([0.0]), [1j, -1j])


def test_stieltjes_derivative_is_exact():
    spec = EmpiricalSpectrum([-1.0, 0.5, 2.0])
    z = 0.3 + 0.7j
    h = 1e-5
    fd = (spec.stieltjes(z + h) - spec.stieltjes(z - h)) / (2 * h)
    assert spec.stieltjes_derivative(z) == pytest.approx(fd, abs=1e-9)


@given(arrays(float, st.integers(1, 30), elements=st.floats(-50, 50)),
       st.floats(-100, 100), st.floats(1e-3, 100))
def test_herglotz_and_bound(lam, u, v):
    m = stieltjes_of_spectrum(EmpiricalSpectrum(lam), complex(u, v))
    assert m.imag > 0
    assert abs(m) <= 1 / v * (1 + 1e-12)


def test_vectorized_stieltjes_matches_scalar():
    spec = EmpiricalSpectrum(np.arange(5.0))
    zs = np.array([1j, 2 + 0.5j, -1 + 3j])
    np.testing.assert_allclose(spec.stieltjes(zs), [spec.stieltjes(z) for z in zs])


# -- atomic distributions and CSV ---------------------------------------------


def test_atomic_distribution_parse_and_apportion():
    h = AtomicDistribution.parse("0.5:1.0,0.5:4.0")
    assert h.mean() == pytest.approx(2.5)
    assert h.format() == "0.5:1.0,0.5:4.0"
    counts = sorted(h.apportion(7).tolist().count(v) for v in (1.0, 4.0))
    assert counts == [3, 4]
    assert h.apportion(800).tolist().count(4.0) == 400
    with pytest.raises(ValueError):
        AtomicDistribution.parse("0.5:1.0,0.4:4.0")
    with pytest.raises(ValueError):
        AtomicDistribution.parse("1.0:inf")


def test_atomic_merges_duplicate_locations():
    h = AtomicDistribution.parse("0.25:1,0.25:1,0.5:3")
    assert h.mass_at(1.0) == pytest.approx(0.5)
    assert len(h.jumps) == 2


def test_csv_output():
    spec = EmpiricalSpectrum([2.0, -1.5])
    assert spec.to_csv() == "eigenvalue\n-1.5\n2.0\n"
    assert cdf_table_csv(spec, [0.0, 3.0]) == "x,F\n0.0,0.5\n3.0,1.0\n"


def test_smoothed_cdf():
    spec = EmpiricalSpectrum([-1.0, 0.0, 2.0])
    assert spec.smoothed_cdf(0.0, 1e-3) == pytest.approx(0.5, abs=1e-3)
    assert spec.smoothed_cdf(0.0, 1e-9) == pytest.approx(0.5, abs=1e-6)  # half of the atom at 0
    assert spec.smoothed_cdf(1.0, 1e-9) == pytest.approx(2 / 3)
    xs = np.linspace(-5, 5, 101)
    assert np.all(np.diff(spec.smoothed_cdf(xs, 0.1)) > 0)
    with pytest.raises(ValueError):
        spec.smoothed_cdf(0.0, 0.0)
