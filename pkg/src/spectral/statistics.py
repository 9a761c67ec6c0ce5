"""Average log-amplitude spectra, difference maps, and radial band summaries."""

from __future__ import annotations

import numpy as np

from src.engine.errors import EmptySetError, ShapeMismatchError
from src.spectral.filters import radial_distance
from src.spectral.fourier import amplitude_phase, dft2, shift

LOG_FLOOR = 1e-12


def mean_log_amplitude(images: np.ndarray, floor: float = LOG_FLOOR) -> np.ndarray:
    """Mean over images and channels of log(|F(u,v)| + floor), centered layout, (H, W)."""
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 4:
        raise ShapeMismatchError("mean_log_amplitude", f"expected (N, C, H, W), got {x.shape}")
    if len(x) == 0:
        raise EmptySetError("mean_log_amplitude: empty image set")
    amplitude, _ = amplitude_phase(shift(dft2(x)))
    return np.log(amplitude + floor).mean(axis=(0, 1))


def spectrum_difference(adv_set: np.ndarray, nat_set: np.ndarray) -> np.ndarray:
    """log|adv| − log|nat| averaged over each set; positive where adversarial amplitude is larger."""
    adv = np.asarray(adv_set)
    nat = np.asarray(nat_set)
    if adv.shape[1:] != nat.shape[1:]:
        raise ShapeMismatchError("spectrum_difference", f"{adv.shape} vs {nat.shape}")
    return mean_log_amplitude(adv) - mean_log_amplitude(nat)


def annulus_mean(grid: np.ndarray, r_min: float, r_max: float = np.inf) -> float:
    """Mean of a centered map over r_min < r ≤ r_max."""
    h, w = grid.shape
    r = radial_distance(h, w)
    band = (r > r_min) & (r <= r_max)
    if not band.any():
        raise EmptySetError(f"annulus ({r_min}, {r_max}] contains no bins")
    return float(grid[band].mean())


def radial_bands(h: int, w: int, count: int = 4) -> list[np.ndarray]:
    """`count` equal-width radius bands from the center out to the farthest corner."""
    r = radial_distance(h, w)
    edges = np.linspace(0.0, r.max(), count + 1)
    bands = []
    for i in range(count):
        lo, hi = edges[i], edges[i + 1]
        band = (r >= lo) & (r < hi) if i < count - 1 else (r >= lo) & (r <= hi)
        bands.append(band)
    return bands


def annulus_means(grid: np.ndarray, count: int = 4) -> list[float]:
    """Mean of the map in each radius band, innermost first."""
    h, w = grid.shape
    return [float(grid[band].mean()) if band.any() else 0.0 for band in radial_bands(h, w, count)]
