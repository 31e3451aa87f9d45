"""Holographic uniform planar arrays.

Intra-array coordinates are expressed in wavelengths (only positions over
wavelength enter the array phases). The reference position is in meters and is
used for the large-scale path loss only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Integer-valued apertures such as 20 * 0.25 must not round up.
_CEIL_TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """A UPA with ``n_x * n_y`` elements on a square grid.

    Parameters
    ----------
    n_x, n_y : int
        Element counts along the x and y axes.
    spacing : float
        Inter-element spacing in wavelengths, in (0, 1/2].
    reference : tuple of float
        Position of the first element in meters.
    wavelength : float
        Unit length used for phase computations (1.0: everything in wavelengths).
    """

    n_x: int
    n_y: int
    spacing: float = 0.25
    reference: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))
    wavelength: float = 1.0

    def __post_init__(self) -> None:
        if int(self.n_x) != self.n_x or self.n_x < 1:
            raise ValueError(f"n_x must be a positive integer, got {self.n_x!r}")
        if int(self.n_y) != self.n_y or self.n_y < 1:
            raise ValueError(f"n_y must be a positive integer, got {self.n_y!r}")
        if not 0.0 < self.spacing <= 0.5:
            raise ValueError(f"spacing must lie in (0, 0.5] wavelengths, got {self.spacing!r}")
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        ref = tuple(float(v) for v in self.reference)
        if len(ref) != 3:
            raise ValueError(f"reference must be a 3D position, got {self.reference!r}")
        object.__setattr__(self, "reference", ref)

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y

    @property
    def aperture(self) -> tuple[float, float]:
        """Aperture lengths (L_x, L_y) in wavelengths."""
        return self.n_x * self.spacing, self.n_y * self.spacing

    @property
    def half_counts(self) -> tuple[int, int]:
        """Number of wavenumber samples per half axis, ceil(L / lambda)."""
        lx, ly = self.aperture
        return (
            math.ceil(lx / self.wavelength - _CEIL_TOL),
            math.ceil(ly / self.wavelength - _CEIL_TOL),
        )

    def with_spacing(self, spacing: float) -> "ArrayGeometry":
        return ArrayGeometry(self.n_x, self.n_y, spacing, self.reference, self.wavelength)

    def with_reference(self, reference) -> "ArrayGeometry":
        return ArrayGeometry(self.n_x, self.n_y, self.spacing, tuple(reference), self.wavelength)


def antenna_positions(geom: ArrayGeometry) -> np.ndarray:
    """Element coordinates, shape ``(N, 3)``, in wavelength units.

    Element ``n`` (0-based) sits at ``reference + spacing * [n mod n_x, n // n_x, 0]``.
    The reference is taken as-is, so callers that only care about phases should
    pass a geometry whose reference is also expressed in wavelengths.
    """
    n = np.arange(geom.n_elements)
    step = geom.spacing * geom.wavelength
    pos = np.empty((geom.n_elements, 3))
    pos[:, 0] = geom.reference[0] + step * (n % geom.n_x)
    pos[:, 1] = geom.reference[1] + step * (n // geom.n_x)
    pos[:, 2] = geom.reference[2]
    return pos


def local_positions(geom: ArrayGeometry) -> np.ndarray:
    """Element coordinates relative to the first element (wavelength units)."""
    return antenna_positions(geom.with_reference((0.0, 0.0, 0.0)))


def distance(a: ArrayGeometry, b: ArrayGeometry) -> float:
    """Distance in meters between the first elements of two arrays."""
    return float(np.linalg.norm(np.subtract(a.reference, b.reference)))
