"""Wavenumber-domain (Fourier plane-wave) channel model.

Each array gets a lattice of integer wavenumber samples, a semi-unitary basis of
array response vectors and a vector of per-sample standard deviations. A channel
between Alice and a receiver u is then

    H_u = Phi_u diag(sigma_u) G_u diag(sigma_A) Phi_A^H

with G_u i.i.d. CN(0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from holosec.geometry import ArrayGeometry, local_positions


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class WavenumberLattice:
    """Integer wavenumber samples ``(l_x, l_y)`` in row-major order (l_y slow)."""

    m_x: int
    m_y: int

    @property
    def points(self) -> np.ndarray:
        lx = np.arange(-self.m_x, self.m_x)
        ly = np.arange(-self.m_y, self.m_y)
        gy, gx = np.meshgrid(ly, lx, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    @property
    def size(self) -> int:
        return 4 * self.m_x * self.m_y


def build_lattice(geom: ArrayGeometry) -> WavenumberLattice:
    """Symmetric lattice ``{-m, ..., m-1}`` per axis with ``m = ceil(L / lambda)``.

    Points whose cell misses the unit disk stay in the lattice and get zero variance.
    """
    m_x, m_y = geom.half_counts
    return WavenumberLattice(m_x, m_y)


def build_basis(
    geom: ArrayGeometry,
    lattice: WavenumberLattice,
    positions: np.ndarray | None = None,
) -> np.ndarray:
    """Matrix of array response vectors, shape ``(N, n)``.

    Column k is ``exp(j * k_vec . c_n) / sqrt(N)`` with
    ``k_vec = (2 pi l_x / L_x, 2 pi l_y / L_y, gamma)``. ``positions`` defaults to
    the element coordinates relative to the first element.
    """
    pos = local_positions(geom) if positions is None else np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ShapeError(f"positions must have shape (N, 3), got {pos.shape}")
    z = pos[:, 2]
    if np.ptp(z) > 1e-12 * max(1.0, np.abs(z).max()):
        raise ValueError("array is not planar: element z-coordinates differ")

    lx_len, ly_len = (a * geom.wavelength for a in geom.aperture)
    pts = lattice.points
    kx = 2.0 * np.pi * pts[:, 0] / lx_len
    ky = 2.0 * np.pi * pts[:, 1] / ly_len
    kappa = 2.0 * np.pi / geom.wavelength
    # Evanescent samples get gamma = 0; with constant z this term is a per-column phase anyway.
    gamma = np.sqrt(np.maximum(kappa**2 - kx**2 - ky**2, 0.0))
    phase = np.outer(pos[:, 0], kx) + np.outer(pos[:, 1], ky) + np.outer(z, gamma)
    return np.exp(1j * phase) / np.sqrt(pos.shape[0])


def _inner_y(x: float, y0: float, y1: float) -> float:
    # Closed-form integral of 1/sqrt(1 - x^2 - y^2) over y in [y0, y1] within the disk.
    s2 = 1.0 - x * x
    if s2 <= 0.0:
        return 0.0
    s = math.sqrt(s2)
    lo = min(max(y0, -s), s)
    hi = min(max(y1, -s), s)
    if hi <= lo:
        return 0.0
    return math.asin(hi / s) - math.asin(lo / s)


def cell_variance(x0: float, x1: float, y0: float, y1: float, tol: float = 1e-11) -> float:
    """Power of the isotropic half-space spectrum over ``[x0,x1] x [y0,y1]``.

    Returns ``(1/4pi) * integral of 1_D / sqrt(1 - x^2 - y^2)``; exactly zero if the
    rectangle does not meet the unit disk.
    """
    # Closest point of the rectangle to the origin decides disk intersection.
    cx = min(max(0.0, x0), x1)
    cy = min(max(0.0, y0), y1)
    if cx * cx + cy * cy >= 1.0:
        return 0.0
    a, b = max(x0, -1.0), min(x1, 1.0)
    if b <= a:
        return 0.0
    # The inner integral has kinks where the chord half-length meets |y0| or |y1|.
    breaks = {0.0}
    for yb in (y0, y1):
        if abs(yb) < 1.0:
            xb = math.sqrt(1.0 - yb * yb)
            breaks.update((xb, -xb))
    pts = sorted(p for p in breaks if a < p < b)
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(_inner_y, lo, hi, args=(y0, y1), epsabs=tol, epsrel=1e-13, limit=200)
        total += val
    return total / (4.0 * math.pi)


def angular_variance(l_x: int, l_y: int, geom: ArrayGeometry) -> float:
    """Variance sigma^2(l_x, l_y) of one wavenumber sample of ``geom``."""
    lx_len, ly_len = geom.aperture
    return cell_variance(l_x / lx_len, (l_x + 1) / lx_len, l_y / ly_len, (l_y + 1) / ly_len)


@lru_cache(maxsize=64)
def _variances(m_x: int, m_y: int, lx_len: float, ly_len: float) -> np.ndarray:
    # Cached on the aperture: sweeps reuse the same handful of geometries.
    out = np.empty(4 * m_x * m_y)
    k = 0
    for ly in range(-m_y, m_y):
        for lx in range(-m_x, m_x):
            out[k] = cell_variance(lx / lx_len, (lx + 1) / lx_len, ly / ly_len, (ly + 1) / ly_len)
            k += 1
    out.setflags(write=False)
    return out


def lattice_variances(geom: ArrayGeometry, lattice: WavenumberLattice | None = None) -> np.ndarray:
    """sigma^2 for every lattice point, in lattice order."""
    lattice = lattice or build_lattice(geom)
    lx_len, ly_len = geom.aperture
    return _variances(lattice.m_x, lattice.m_y, round(lx_len, 12), round(ly_len, 12))


def build_sigma_vector(geom: ArrayGeometry, lattice: WavenumberLattice | None = None) -> np.ndarray:
    """Entries ``sqrt(N) * sigma(l_x, l_y)``; their squares sum to N/2."""
    return np.sqrt(geom.n_elements * lattice_variances(geom, lattice))


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Deterministic part of one node's channel description."""

    geometry: ArrayGeometry
    lattice: WavenumberLattice
    basis: np.ndarray
    sigma: np.ndarray

    @property
    def delta(self) -> np.ndarray:
        return np.diag(self.sigma)

    @property
    def n_elements(self) -> int:
        return self.basis.shape[0]

    @property
    def n_samples(self) -> int:
        return self.basis.shape[1]


def spectral_model(geom: ArrayGeometry) -> SpectralModel:
    lattice = build_lattice(geom)
    basis = build_basis(geom, lattice)
    basis.setflags(write=False)
    sigma = build_sigma_vector(geom, lattice)
    return SpectralModel(geom, lattice, basis, sigma)


def draw_small_scale(rng: np.random.Generator, n_rx: int, n_tx: int) -> np.ndarray:
    """i.i.d. circularly-symmetric CN(0, 1) matrix."""
    z = rng.standard_normal((n_rx, n_tx, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def corrupt_csi(g: np.ndarray, xi: float, rng: np.random.Generator) -> np.ndarray:
    """Gauss-Markov estimate ``sqrt(1 - xi^2) g + xi E`` with fresh E ~ CN(0, 1)."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
    err = draw_small_scale(rng, *g.shape)
    return math.sqrt(1.0 - xi * xi) * g + xi * err


def assemble_channel(tx: SpectralModel, rx: SpectralModel, g: np.ndarray) -> np.ndarray:
    """Antenna-domain channel ``Phi_rx diag(s_rx) g diag(s_tx) Phi_tx^H``."""
    if g.shape != (rx.n_samples, tx.n_samples):
        raise ShapeError(
            f"small-scale matrix has shape {g.shape}, expected {(rx.n_samples, tx.n_samples)}"
        )
    inner = rx.sigma[:, None] * g * tx.sigma[None, :]
    return rx.basis @ inner @ tx.basis.conj().T


def large_scale_gain(distance_m: float, exponent: float, array_gain: float) -> float:
    """Path-loss coefficient ``d^-eta * Lambda``."""
    if distance_m <= 0.0:
        raise ValueError(f"distance must be positive, got {distance_m!r}")
    return distance_m ** (-exponent) * array_gain


@dataclass
class ChannelRealization:
    """One Alice-to-receiver draw: true and (optionally) estimated small-scale fading."""

    g: np.ndarray
    zeta: float
    g_hat: np.ndarray | None = None
    error: np.ndarray | None = None

    @property
    def designer_g(self) -> np.ndarray:
        return self.g if self.g_hat is None else self.g_hat


def draw_realization(
    rng: np.random.Generator,
    tx: SpectralModel,
    rx: SpectralModel,
    zeta: float,
    xi: float = 0.0,
) -> ChannelRealization:
    """Draw G and, when ``xi > 0``, its corrupted estimate.

    Both the true matrix and the error matrix are always drawn so the random
    stream stays aligned across CSI-error settings.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
    g = draw_small_scale(rng, rx.n_samples, tx.n_samples)
    err = draw_small_scale(rng, rx.n_samples, tx.n_samples)
    if xi == 0.0:
        return ChannelRealization(g, zeta)
    g_hat = math.sqrt(1.0 - xi * xi) * g + xi * err
    return ChannelRealization(g, zeta, g_hat, err)
