"""2D DFT / inverse DFT, center shifting, and amplitude/phase decomposition.

Conventions:
    F(u,v) = Σ_m Σ_n x(m,n) · exp(-j2π(um/M + vn/N))            (no forward scaling)
    x(m,n) = 1/(MN) · Σ_u Σ_v F(u,v) · exp(+j2π(um/M + vn/N))
The centered layout moves the DC bin from (0,0) to (⌊H/2⌋, ⌊W/2⌋).

All functions act on the last two axes, so a (C, H, W) image or an
(N, C, H, W) stack is transformed channel by channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.engine.errors import AsymmetryError, LayoutError

ASYMMETRY_TOLERANCE = 1e-6


class Layout(str, Enum):
    NATURAL = "natural"
    CENTERED = "centered"


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray  # complex, (..., H, W)
    layout: Layout


def dft2(channel: np.ndarray) -> Spectrum:
    """Forward transform of a real (..., H, W) array, natural layout."""
    x = np.asarray(channel, dtype=np.float64)
    return Spectrum(np.fft.fft2(x, axes=(-2, -1)), Layout.NATURAL)


def idft2(spectrum: Spectrum, tolerance: float = ASYMMETRY_TOLERANCE) -> np.ndarray:
    """Inverse transform; the imaginary residue is checked, then discarded."""
    if spectrum.layout is not Layout.NATURAL:
        raise LayoutError("idft2 needs a natural-layout spectrum; call unshift() first")
    x = np.fft.ifft2(spectrum.values, axes=(-2, -1))
    residue = float(np.abs(x.imag).max()) if x.size else 0.0
    if residue > tolerance:
        raise AsymmetryError(f"inverse transform has imaginary residue {residue:.3e} > {tolerance:.0e}")
    return np.ascontiguousarray(x.real)


def shift(spectrum: Spectrum) -> Spectrum:
    """Natural → centered: rotate each axis by ⌊extent/2⌋."""
    if spectrum.layout is not Layout.NATURAL:
        raise LayoutError("shift expects a natural-layout spectrum")
    return Spectrum(np.fft.fftshift(spectrum.values, axes=(-2, -1)), Layout.CENTERED)


def unshift(spectrum: Spectrum) -> Spectrum:
    """Centered → natural; exact inverse of shift for odd and even extents."""
    if spectrum.layout is not Layout.CENTERED:
        raise LayoutError("unshift expects a centered spectrum")
    return Spectrum(np.fft.ifftshift(spectrum.values, axes=(-2, -1)), Layout.NATURAL)


def amplitude_phase(spectrum: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Polar form: |F(u,v)| and φ(u,v) with F = |F|·exp(jφ)."""
    return np.abs(spectrum.values), np.angle(spectrum.values)


def from_amplitude_phase(amplitude: np.ndarray, phase: np.ndarray, layout: Layout = Layout.NATURAL) -> Spectrum:
    return Spectrum(amplitude * np.exp(1j * phase), Layout(layout))
