"""Radial low-pass masks, filtered images, and frequency-swapped (merged) images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.engine.errors import ShapeMismatchError
from src.spectral.fourier import Spectrum, dft2, idft2, shift, unshift, Layout


@dataclass(frozen=True)
class FilterMask:
    """Binary pass mask in centered layout."""

    mask: np.ndarray  # bool (H, W)
    bandwidth: float
    center: tuple[int, int]

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    @property
    def is_full(self) -> bool:
        return bool(self.mask.all())

    @property
    def passed(self) -> int:
        return int(self.mask.sum())

    def complement(self) -> "FilterMask":
        return FilterMask(~self.mask, self.bandwidth, self.center)


def mask_center(h: int, w: int) -> tuple[int, int]:
    return h // 2, w // 2


def radial_distance(h: int, w: int) -> np.ndarray:
    """Euclidean distance of every centered-layout bin from the DC bin."""
    cu, cv = mask_center(h, w)
    u = np.arange(h)[:, None] - cu
    v = np.arange(w)[None, :] - cv
    return np.sqrt(u * u + v * v)


def lowpass_mask(h: int, w: int, bandwidth: float) -> FilterMask:
    """Pass bins with r < B/2; once B/2 reaches the farthest bin every bin passes.

    The radial rule is symmetric under (u, v) -> (-u, -v), so masked
    reconstructions of real images stay real.
    """
    if bandwidth < 0:
        raise ValueError(f"bandwidth must be >= 0, got {bandwidth}")
    r = radial_distance(h, w)
    passed = r < bandwidth / 2.0
    if bandwidth > 0 and bandwidth / 2.0 >= r.max():
        passed[:] = True
    return FilterMask(passed, float(bandwidth), mask_center(h, w))


def highpass_mask(h: int, w: int, bandwidth: float) -> FilterMask:
    return lowpass_mask(h, w, bandwidth).complement()


def _masked_inverse(spectrum: Spectrum, mask: np.ndarray) -> np.ndarray:
    return idft2(unshift(Spectrum(spectrum.values * mask, Layout.CENTERED)))


def _apply_mask(image: np.ndarray, fmask: FilterMask, clamp: bool) -> np.ndarray:
    x = np.asarray(image, dtype=np.float64)
    if fmask.is_full:
        out = x.copy()
    elif fmask.is_empty:
        out = np.zeros_like(x)
    else:
        out = _masked_inverse(shift(dft2(x)), fmask.mask)
    return np.clip(out, 0.0, 1.0) if clamp else out


def apply_lowpass(image: np.ndarray, bandwidth: float, clamp: bool = True) -> np.ndarray:
    """x_filtered = F⁻¹(L_B ∘ F(x)) per channel; clamp=False returns the raw reconstruction."""
    x = np.asarray(image)
    h, w = x.shape[-2:]
    return _apply_mask(x, lowpass_mask(h, w, bandwidth), clamp)


def apply_highpass(image: np.ndarray, bandwidth: float, clamp: bool = False) -> np.ndarray:
    """The mask complement of apply_lowpass; lowpass + highpass reconstructs x (pre-clamp)."""
    x = np.asarray(image)
    h, w = x.shape[-2:]
    return _apply_mask(x, highpass_mask(h, w, bandwidth), clamp)


def merge_frequencies(inner: np.ndarray, outer: np.ndarray, bandwidth: float, clamp: bool = True) -> np.ndarray:
    """In-band spectrum from `inner`, out-of-band spectrum from `outer`."""
    a = np.asarray(inner, dtype=np.float64)
    b = np.asarray(outer, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError("merge_frequencies", f"inner {a.shape} vs outer {b.shape}")
    h, w = a.shape[-2:]
    fmask = lowpass_mask(h, w, bandwidth)

    if fmask.is_full:
        out = a.copy()
    elif fmask.is_empty:
        out = b.copy()
    else:
        m = fmask.mask
        merged = shift(dft2(a)).values * m + shift(dft2(b)).values * ~m
        out = idft2(unshift(Spectrum(merged, Layout.CENTERED)))
    return np.clip(out, 0.0, 1.0) if clamp else out
