import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_vortex.biphoton import (MIXED, POSITION, AnalyticFormError, BiphotonState, PhaseMatchSpec, PumpSpec,
                                      SchmidtTruncationWarning, amplitude_map, apply_apertures,
                                      entanglement_entropy, pair_mixed_analytic, pair_mixed_numeric, pair_position,
                                      partial_fourier_numeric, prob_map, psi_mixed, psi_position, sample_counts,
                                      schmidt_decompose, schmidt_from_amplitude)
from nonlocal_vortex.gauss_modes import BeamGeometry, hg_1d
from nonlocal_vortex.grid import Axis
from nonlocal_vortex.io import read_csv

GOLDEN = Path(__file__).parent / "data" / "mixed_sigma2_delta1.csv"
HG10 = BiphotonState.hg10()
GAUSS = BiphotonState.gaussian()
coord = st.floats(-4, 4)


def test_specs_validate():
    with pytest.raises(ValueError):
        PumpSpec((2, 0))
    with pytest.raises(ValueError):
        PumpSpec((1, 0), width=0)
    with pytest.raises(ValueError):
        PhaseMatchSpec(-1)


@given(coord, coord, coord)
def test_anti_sum_node(x1, y1, y2):
    assert psi_position(HG10, (x1, y1), (-x1, y2)) == 0


@given(coord, coord, coord, coord)
def test_exchange_symmetry(x1, y1, x2, y2):
    for state in (HG10, GAUSS, BiphotonState.hg10(2.0, 0.7)):
        assert psi_position(state, (x1, y1), (x2, y2)) == pytest.approx(psi_position(state, (x2, y2), (x1, y1)))


def test_gaussian_pump_factorizes():
    # exp(-(a+b)^2/4s^2) exp(-(a-b)^2/4s^2) = exp(-a^2/2s^2) exp(-b^2/2s^2)
    a, b = np.meshgrid(np.linspace(-4, 4, 33), np.linspace(-4, 4, 33), indexing="ij")
    for s in (0.5, 1.0, 2.5):
        g = BeamGeometry(s / math.sqrt(2))
        np.testing.assert_allclose(pair_position(0, a, b, s, s), hg_1d(0, a, g) * hg_1d(0, b, g), atol=1e-14)


def test_mixed_core_is_null():
    assert psi_mixed(HG10, (0, 0.3), (0, -0.2)) == 0


def test_mixed_quadrant_phase():
    # with the exp(-i q x) kernel the mixed amplitude goes as (x1 - i q2)
    for a in (0.3, 1.0, 2.0):
        d = np.angle(psi_mixed(HG10, (a, 0), (0, 0))) - np.angle(psi_mixed(HG10, (0, 0), (a, 0)))
        assert d == pytest.approx(math.pi / 2)
        num = psi_mixed(HG10, (0, 0), (a, 0), numeric=False)
        ref = pair_mixed_analytic(1, 0.0, a, HG10.sigma) * pair_mixed_analytic(0, 0.0, 0.0, HG10.sigma)
        assert num == pytest.approx(ref)


@given(coord, coord)
def test_mixed_modulus_swap(x, q):
    assert abs(psi_mixed(HG10, (x, 0), (q, 0))) == pytest.approx(abs(psi_mixed(HG10, (q, 0), (x, 0))), abs=1e-14)


@given(st.floats(0, 3), st.floats(0, 2 * math.pi))
def test_mixed_map_rotational_symmetry(r, t):
    p0 = abs(pair_mixed_analytic(1, r, 0.0, HG10.sigma)) ** 2
    p = abs(pair_mixed_analytic(1, r * math.cos(t), r * math.sin(t), HG10.sigma)) ** 2
    assert p == pytest.approx(p0, abs=1e-14)


def test_unmatched_widths_need_numeric():
    s = BiphotonState.hg10(2.0, 1.0)
    with pytest.raises(AnalyticFormError):
        psi_mixed(s, (0.1, 0), (0.2, 0))
    assert abs(psi_mixed(s, (0.1, 0), (0.2, 0), numeric=True)) > 0


def test_numeric_oracle_matches_closed_form():
    ax = Axis.centered(128, 6 * HG10.sigma)
    num = partial_fourier_numeric(HG10, ax, ax)
    x1, q2 = np.meshgrid(ax.coords, num.coords(1), indexing="ij")
    ref = pair_mixed_analytic(1, x1, q2, HG10.sigma)
    assert np.abs(num.values - ref).max() <= 1e-6 * np.abs(ref).max()


def test_numeric_fft_matches_quadrature_unmatched():
    s = BiphotonState.hg10(2.0, 1.0)
    ax = Axis.centered(128, 12.0)
    num = partial_fourier_numeric(s, ax, ax)
    x1, q2 = np.meshgrid(ax.coords[::9], num.coords(1)[::9], indexing="ij")
    quad = pair_mixed_numeric(1, x1, q2, 2.0, 1.0)
    assert np.abs(num.values[::9, ::9] - quad).max() <= 1e-9 * np.abs(quad).max()


@pytest.mark.parametrize("state", [HG10, GAUSS, BiphotonState.hg10(2.0, 1.0), BiphotonState.gaussian(1.0, 3.0)])
@pytest.mark.parametrize("plane", [POSITION, MIXED])
def test_maps_normalized(state, plane):
    cmap = prob_map(state, plane)
    assert cmap.integral() == pytest.approx(1.0, abs=1e-6)
    assert np.all(cmap.values >= 0)


def test_map_paths():
    assert prob_map(HG10, MIXED).meta["path"] == "analytic"
    assert prob_map(BiphotonState.hg10(2.0, 1.0), MIXED).meta["path"] == "numeric"


def test_sigma2delta_regression_snapshot():
    meta, ref = read_csv(GOLDEN)
    cmap = prob_map(BiphotonState.hg10(2.0, 1.0), MIXED, n=64)
    assert meta["axis1"].endswith(f"n={cmap.axis1.axis.n}")
    np.testing.assert_allclose(cmap.values, ref, rtol=0, atol=1e-10 * ref.max())


def test_apertures_preserve_integral_and_fill_core():
    cmap = prob_map(HG10, MIXED)
    smooth = apply_apertures(cmap, 0.3, 0.5)
    assert smooth.integral() == pytest.approx(cmap.integral(), rel=1e-6)
    assert smooth.value_at(0, 0) > cmap.value_at(0, 0)
    assert apply_apertures(cmap).values is not cmap.values
    np.testing.assert_array_equal(apply_apertures(cmap).values, cmap.values)


def test_schmidt_analytic():
    sp = schmidt_decompose(HG10)
    np.testing.assert_allclose(sp.coefficients, [1 / math.sqrt(2)] * 2, atol=1e-12)
    assert sp.entropy() == pytest.approx(1.0)
    assert schmidt_decompose(GAUSS).coefficients.tolist() == [1.0]


def test_schmidt_svd_matches_analytic_for_matched_widths():
    amp = amplitude_map(HG10, POSITION, n=256)
    s, _ = schmidt_from_amplitude(amp.values, amp.cell_volume)
    np.testing.assert_allclose(s[:2], [1 / math.sqrt(2)] * 2, atol=1e-9)
    assert s[2] < 1e-9


@pytest.mark.parametrize("sigma,delta", [(2.0, 1.0), (1.0, 3.0), (1.5, 1.2)])
def test_gaussian_schmidt_geometric_series(sigma, delta):
    # two-width Gaussian pair: s_n = sqrt(1 - mu^2) mu^n, mu = |sigma - delta| / (sigma + delta)
    mu = abs(sigma - delta) / (sigma + delta)
    with pytest.warns(SchmidtTruncationWarning) if mu > 0.3 else _nowarn():
        sp = schmidt_decompose(BiphotonState.gaussian(sigma, delta), cutoff=6)
    ref = math.sqrt(1 - mu * mu) * mu ** np.arange(len(sp.coefficients))
    np.testing.assert_allclose(sp.coefficients, ref, atol=1e-9)


class _nowarn:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_schmidt_cutoff_validation():
    with pytest.raises(ValueError):
        schmidt_decompose(BiphotonState.hg10(2.0, 1.0), cutoff=1)


def test_entropy_values():
    assert entanglement_entropy([1.0]) == 0.0
    assert entanglement_entropy([0.5] * 4) == pytest.approx(2.0)


def test_sample_counts_statistics():
    cmap = prob_map(HG10, MIXED, n=64)
    n = 200_000
    counts = sample_counts(cmap, n, seed=7)
    assert counts.values.dtype.kind == "i"
    assert abs(counts.values.sum() - n) < 5 * math.sqrt(n)
    mean = cmap.values * cmap.cell_area * n
    # Poisson: chi-square per degree of freedom near 1 over well-populated cells
    m = mean > 50
    chi2 = np.mean((counts.values[m] - mean[m]) ** 2 / mean[m])
    assert 0.8 < chi2 < 1.2


def test_sample_counts_deterministic():
    cmap = prob_map(HG10, MIXED, n=32)
    a = sample_counts(cmap, 10_000, seed=3).values
    b = sample_counts(cmap, 10_000, seed=3).values
    c = sample_counts(cmap, 10_000, seed=4).values
    np.testing.assert_array_equal(a, b)
    assert np.any(a != c)
    with pytest.raises(ValueError):
        sample_counts(cmap, 0, seed=1)
