import numpy as np
import pytest

from src.engine.errors import AsymmetryError, LayoutError
from src.spectral.fourier import (
    Layout,
    Spectrum,
    amplitude_phase,
    dft2,
    from_amplitude_phase,
    idft2,
    shift,
    unshift,
)


def naive_dft2(x):
    """Direct double sum, written as the two DFT matrices."""
    m, n = x.shape
    rows = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    cols = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return rows @ x @ cols


SEEDS = range(50)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("shape", [(8, 8), (9, 7)])
def test_matches_direct_summation(seed, shape):
    x = np.random.default_rng(seed).uniform(size=shape)
    np.testing.assert_allclose(dft2(x).values, naive_dft2(x), atol=1e-9)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("shape", [(8, 8), (9, 7), (2, 3, 9, 7)])
def test_inverse_recovers_input(seed, shape):
    x = np.random.default_rng(seed).uniform(size=shape)
    np.testing.assert_allclose(idft2(dft2(x)), x, atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("shape", [(8, 8), (9, 7), (6, 10)])
def test_parseval(seed, shape):
    x = np.random.default_rng(seed).standard_normal(shape)
    f = dft2(x).values
    assert np.sum(x**2) == pytest.approx(np.sum(np.abs(f) ** 2) / x.size, rel=1e-9)


@pytest.mark.parametrize("shape", [(8, 8), (9, 7)])
def test_dc_moves_to_center(shape):
    x = np.full(shape, 0.25)
    centered = shift(dft2(x)).values
    h, w = shape
    assert centered[h // 2, w // 2] == pytest.approx(0.25 * h * w)
    assert np.count_nonzero(np.abs(centered) > 1e-9) == 1


@pytest.mark.parametrize("shape", [(8, 8), (9, 7), (5, 6)])
def test_unshift_inverts_shift(rng, shape):
    spec = dft2(rng.uniform(size=shape))
    back = unshift(shift(spec))
    assert back.layout is Layout.NATURAL
    np.testing.assert_array_equal(back.values, spec.values)


def test_layout_errors(rng):
    natural = dft2(rng.uniform(size=(4, 4)))
    centered = shift(natural)
    with pytest.raises(LayoutError):
        idft2(centered)
    with pytest.raises(LayoutError):
        shift(centered)
    with pytest.raises(LayoutError):
        unshift(natural)


def test_asymmetric_spectrum_rejected():
    values = np.zeros((4, 4), dtype=complex)
    values[0, 1] = 1.0
    with pytest.raises(AsymmetryError):
        idft2(Spectrum(values, Layout.NATURAL))


def test_amplitude_phase_round_trip(rng):
    spec = dft2(rng.uniform(size=(3, 8, 8)))
    amplitude, phase = amplitude_phase(spec)
    assert np.all(amplitude >= 0)
    assert np.all(np.abs(phase) <= np.pi)
    np.testing.assert_allclose(from_amplitude_phase(amplitude, phase).values, spec.values, atol=1e-9)
