import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_vortex.biphoton import MIXED, POSITION, BiphotonState, prob_map
from nonlocal_vortex.gauss_modes import BeamGeometry, hg_1d
from nonlocal_vortex.grid import Axis, FieldGrid
from nonlocal_vortex.optics import (IDENTITY, FourierStage, GaussianMask, ImagingStage, MapMeasurement,
                                    MaskWarning, OpticalChannel, SlitGeometry, apply_fourier_stage,
                                    apply_imaging_stage, apply_mask, run_channel_pair)

LAM = 884e-6  # mm


def gauss_field(w, n=256, half=None, order=0):
    ax = Axis.centered(n, half or 10 * w)
    return FieldGrid((ax,), hg_1d(order, ax.coords, BeamGeometry(w)))


def test_fourier_stage_gaussian_waist():
    w_in, f = 0.25, 150.0
    out = apply_fourier_stage(gauss_field(w_in), f, LAM)
    w_out = LAM * f / (2 * math.pi * w_in)
    ref = hg_1d(0, out.coords(0), BeamGeometry(w_out))
    np.testing.assert_allclose(out.values, ref, atol=1e-9 * np.abs(ref).max())
    assert out.meta["quadratic_phase_dropped"] == 1
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)


def test_fourier_stage_first_order_profile():
    w_in, f = 0.1, 50.0
    out = apply_fourier_stage(gauss_field(w_in, order=1), f, LAM)
    w_out = LAM * f / (2 * math.pi * w_in)
    ref = -1j * hg_1d(1, out.coords(0), BeamGeometry(w_out))
    np.testing.assert_allclose(out.values, ref, atol=1e-9 * np.abs(ref).max())


def test_two_fourier_stages_invert():
    ax = Axis.centered(256, 3.0)
    vals = hg_1d(0, ax.coords - 0.4, BeamGeometry(0.2)) + 0.3 * hg_1d(1, ax.coords, BeamGeometry(0.3))
    fld = FieldGrid((ax,), vals)
    ch = OpticalChannel((FourierStage(100.0, LAM), FourierStage(100.0, LAM)))
    out = ch.apply(fld)
    x = out.coords(0)
    ref = hg_1d(0, -x - 0.4, BeamGeometry(0.2)) + 0.3 * hg_1d(1, -x, BeamGeometry(0.3))
    np.testing.assert_allclose(out.values, ref, atol=1e-9)
    assert out.meta["quadratic_phase_dropped"] == 2
    assert ch.representation == "position"


def test_fourier_stage_onto_fixed_axis():
    det = Axis.symmetric(101, 0.5)
    out = FourierStage(150.0, LAM, det).apply(gauss_field(0.25))
    w_out = LAM * 150.0 / (2 * math.pi * 0.25)
    np.testing.assert_allclose(out.values, hg_1d(0, det.coords, BeamGeometry(w_out)), atol=1e-9)


def test_imaging_identity():
    fld = gauss_field(1.0, order=2)
    out = apply_imaging_stage(fld, 1.0)
    np.testing.assert_array_equal(out.values, fld.values)
    assert out.axes == fld.axes


def test_telescope_shrinks_width_and_preserves_norm():
    w = 0.3
    fld = gauss_field(w)
    st_ = ImagingStage.telescope(150.0, 50.0)
    assert st_.signed_magnification == pytest.approx(-1 / 3)
    out = st_.apply(fld)
    assert out.norm2() == pytest.approx(fld.norm2(), abs=1e-9)
    np.testing.assert_allclose(out.values, hg_1d(0, out.coords(0), BeamGeometry(w / 3)), atol=1e-12)


def test_double_inversion_identity():
    ax = Axis.centered(64, 4.0)
    fld = FieldGrid((ax,), hg_1d(1, ax.coords - 0.5))
    out = apply_imaging_stage(apply_imaging_stage(fld, 1.0, True), 1.0, True)
    np.testing.assert_allclose(out.values, fld.values)
    assert out.axes[0].start == pytest.approx(ax.start)


def test_wide_mask_is_all_pass():
    fld = gauss_field(1.0)
    out = apply_mask(fld, GaussianMask(1e6))
    np.testing.assert_allclose(out.values, fld.values, atol=1e-9)
    assert out.meta["surviving_fraction"] == pytest.approx(1.0, abs=1e-9)


def test_slit_mask_on_constant_field():
    ax = Axis(-1.0, 1.0, 2001)
    out = apply_mask(FieldGrid((ax,), np.ones(ax.n)), SlitGeometry(0.1, 0.4))
    x = ax.coords
    inside = (np.abs(x + 0.2) < 0.049) | (np.abs(x - 0.2) < 0.049)
    outside = (np.abs(np.abs(x) - 0.2) > 0.051)
    assert np.all(out.values[inside] == 1) and np.all(out.values[outside] == 0)
    assert np.sum(out.values.real) * ax.step == pytest.approx(0.2, rel=1e-9)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_gaussian_mask_product_rule(w1, w2):
    fld = gauss_field(w1, n=512, half=12 * max(w1, w2))
    out = apply_mask(fld, GaussianMask(w2))
    w = (w1 ** -2 + w2 ** -2) ** -0.5
    shape = np.exp(-0.5 * (fld.coords(0) / w) ** 2)
    np.testing.assert_allclose(out.values, out.values[256] * shape, atol=1e-12)
    # |field|^2 integrates to a length proportional to the width
    assert out.meta["surviving_fraction"] == pytest.approx(w / w1, rel=1e-9)


def test_mask_warns_when_misaligned():
    with pytest.warns(MaskWarning):
        apply_mask(gauss_field(0.1, half=10.0), GaussianMask(0.1, center=5.0))


def test_slits_must_not_overlap():
    with pytest.raises(ValueError):
        SlitGeometry(0.2, 0.1)
    with pytest.raises(ValueError):
        OpticalChannel((SlitGeometry(0.1, 0.2), SlitGeometry(0.1, 0.3)))


def test_channel_composition_associative():
    a = OpticalChannel((ImagingStage(0.5),))
    b = OpticalChannel((GaussianMask(0.8), FourierStage(100.0, LAM)))
    c = OpticalChannel((ImagingStage.telescope(150.0, 50.0),))
    fld = gauss_field(1.0, n=128, half=10.0)
    left = a.then(b).then(c).apply(fld)
    right = a.then(b.then(c)).apply(fld)
    np.testing.assert_array_equal(left.values, right.values)
    seq = c.apply(b.apply(a.apply(fld)))
    np.testing.assert_allclose(left.values, seq.values)


def test_pullback_inverts_imaging():
    ch = OpticalChannel((ImagingStage(0.25), ImagingStage.telescope(150.0, 50.0)))
    x, factor = ch.pullback(-0.1)
    assert x == pytest.approx(1.2)
    assert factor == pytest.approx(1 / math.sqrt(0.25 / 3))
    with pytest.raises(ValueError):
        OpticalChannel((FourierStage(1.0, 1.0),)).pullback(0.0)


def test_lens_channel_reproduces_mixed_map():
    state = BiphotonState.hg10()
    ch2 = OpticalChannel((FourierStage.dimensionless(),))
    via = run_channel_pair(state, IDENTITY, ch2, MapMeasurement())
    direct = prob_map(state, MIXED, via.axis1.axis, via.axis2.axis)
    assert via.axis2.representation == "wavevector"
    np.testing.assert_allclose(via.values, direct.values, atol=1e-9 * direct.values.max())


def test_identity_channels_reproduce_position_map():
    state = BiphotonState.hg10(2.0, 1.0)
    via = run_channel_pair(state, IDENTITY, IDENTITY, MapMeasurement())
    direct = prob_map(state, POSITION, via.axis1.axis, via.axis2.axis)
    np.testing.assert_allclose(via.values, direct.values, atol=1e-15)
