import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmpkit import FmrParams, SampleGeometry, UnsaturatedError, fmr_frequency, internal_field
from cmpkit.fmr import fmr_frequency_masked, fmr_sweep

SPHERE = FmrParams.from_diagonal(1 / 3, 1 / 3, 1 / 3)
FILM = FmrParams.from_diagonal(0.0, 0.0, 1.0)


def test_sphere_example():
    assert fmr_frequency(0.1, SPHERE) == pytest.approx(2.8, abs=1e-12)


def test_thin_film_kittel_limit():
    assert fmr_frequency(0.3, FILM) == pytest.approx(28 * (0.3 - 0.176), abs=1e-12)


def test_reference_slab_value():
    # hand evaluation with the four-digit centre factors 0.88097, 0.03373, 0.08530
    ms = 0.176
    hand = 28 * np.sqrt((0.15 + (0.88097 - 0.08530) * ms) * (0.15 + (0.03373 - 0.08530) * ms))
    assert fmr_frequency(0.15, FmrParams()) == pytest.approx(hand, abs=2e-4)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5.0, 5.0))
def test_sphere_is_gamma_h_everywhere(h):
    assert fmr_frequency(h, SPHERE) == pytest.approx(28 * abs(h), abs=1e-12)


def test_even_in_field_and_monotone():
    p = FmrParams()
    h = np.linspace(0.02, 1.0, 400)
    f = fmr_frequency(h, p)
    assert np.allclose(fmr_frequency(-h, p), f, rtol=0, atol=0)
    assert np.all(np.diff(f) > 0)


def test_unsaturated_raises_with_field():
    with pytest.raises(UnsaturatedError) as info:
        fmr_frequency(0.1, FILM)
    assert info.value.field == pytest.approx(0.1)
    with pytest.raises(UnsaturatedError) as info:
        fmr_frequency(np.array([0.3, 0.05, 0.2]), FILM)
    assert info.value.field == pytest.approx(0.05)


def test_masked_and_sweep():
    f = fmr_frequency_masked([0.05, 0.3], FILM)
    assert np.isnan(f[0]) and f[1] == pytest.approx(3.472)
    fields, freqs = fmr_sweep(0.0, 0.4, 5, FILM)
    assert fields.shape == freqs.shape == (5,)
    assert np.isnan(freqs[:2]).all() and np.isfinite(freqs[2:]).all()


def test_offdiagonal_term_only_off_centre():
    geom = SampleGeometry((1.0, 2.0, 3.0))
    centred = FmrParams(geom)
    from cmpkit import demag_tensor
    off = FmrParams(geom, demag_tensor(geom, (0.5, 1.2, 0.4)))
    assert abs(off.demag[0, 1]) > 1e-3
    t = off.demag.components
    ms = geom.saturation_field
    no_cross = 28 * np.sqrt((0.5 + (t[0, 0] - t[2, 2]) * ms) * (0.5 + (t[1, 1] - t[2, 2]) * ms))
    assert fmr_frequency(0.5, off) < no_cross
    c = centred.demag.components
    plain = 28 * np.sqrt((0.5 + (c[0, 0] - c[2, 2]) * ms) * (0.5 + (c[1, 1] - c[2, 2]) * ms))
    assert fmr_frequency(0.5, centred) == pytest.approx(plain, rel=1e-14)


def test_internal_field_mode():
    p = FmrParams()
    assert internal_field(0.2, p) == pytest.approx(0.2 - p.demag[2, 2] * 0.176)
    assert fmr_frequency(0.3, p, "internal") < fmr_frequency(0.3, p)
    with pytest.raises(ValueError):
        fmr_frequency(0.3, p, "bogus")


def test_bias_axis_changes_transverse_pair():
    px = FmrParams(SampleGeometry((1.0, 2.0, 3.0), bias_axis="x"))
    pz = FmrParams(SampleGeometry((1.0, 2.0, 3.0), bias_axis="z"))
    assert fmr_frequency(1.0, px) != pytest.approx(fmr_frequency(1.0, pz))


def test_averaged_constructor():
    p = FmrParams.averaged(SampleGeometry.reference_slab(), 16)
    assert p.demag.eval_point == "volume-averaged"
    assert p.gamma_ghz_per_t == pytest.approx(28.0)


def test_internal_field_examples():
    bare = FmrParams.from_diagonal(0.5, 0.5, 0.0)
    assert internal_field(0.3, bare) == 0.3
    slabish = FmrParams.from_diagonal(0.88, 0.0863, 0.0337)
    assert internal_field(0.2, slabish) == pytest.approx(0.19407, abs=5e-6)
    assert internal_field(0.1, SPHERE) == pytest.approx(0.04133, abs=5e-6)
