"""Classical (Lumer-Giles) semi-inner-product spaces on C^d.

Convention used throughout the package: ``[x, y]`` is linear in the second
argument and conjugate-homogeneous in the first, matching the module-valued
pairing.  Two families are provided:

* ``Hilbert(d)``: the standard inner product ``sum(conj(x_i) * y_i)``.
* ``LpGiles(d, p)``: the Giles pairing on l^p,

      [x, y] = sum(conj(sgn x_i) |x_i|^(p-1) y_i) / ||x||_p^(p-2)

  with ``sgn(0) = 0`` and ``[0, y] = 0``.  It satisfies ``[x, x] = ||x||_p^2``
  and is not conjugate-symmetric unless ``p == 2``.

The array-level methods ``pairing`` and ``norm`` broadcast over leading batch
axes; the module constructions call them directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructuralError


@dataclass(frozen=True)
class Hilbert:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise StructuralError(f"dimension must be >= 1, got {self.d!r}")

    def pairing(self, x, y):
        return np.sum(np.conj(x) * y, axis=-1)

    def norm(self, x):
        return np.sqrt(np.sum(np.abs(x) ** 2, axis=-1))

    def functional(self, x):
        """Coefficients ``c`` with ``[x, y] = sum(c * y)``."""
        return np.conj(x)

    def label(self):
        return f"hilbert({self.d})"


@dataclass(frozen=True)
class LpGiles:
    d: int
    p: float

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise StructuralError(f"dimension must be >= 1, got {self.d!r}")
        p = float(self.p)
        if not (np.isfinite(p) and p > 1):
            raise StructuralError(f"the Giles pairing needs 1 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)

    def norm(self, x):
        return np.sum(np.abs(x) ** self.p, axis=-1) ** (1.0 / self.p)

    def _weights(self, x):
        ax = np.abs(x)
        sgn = np.divide(x, ax, out=np.zeros_like(x, dtype=complex), where=ax > 0)
        return np.conj(sgn) * ax ** (self.p - 1)

    def functional(self, x):
        """Coefficients ``c`` with ``[x, y] = sum(c * y)``."""
        nrm = self.norm(x)
        denom = np.where(nrm > 0, nrm, 1.0) ** (self.p - 2)
        c = self._weights(x) / np.expand_dims(denom, -1)
        return np.where(np.expand_dims(nrm > 0, -1), c, 0.0)

    def pairing(self, x, y):
        nrm = self.norm(x)
        num = np.sum(self._weights(x) * y, axis=-1)
        denom = np.where(nrm > 0, nrm, 1.0) ** (self.p - 2)
        return np.where(nrm > 0, num / denom, 0.0)

    def label(self):
        return f"lp({self.d},{self.p:g})"


SipSpaceDescriptor = Hilbert | LpGiles


@dataclass(frozen=True)
class SipVector:
    """A vector of a classical s.i.p. space."""

    space: Hilbert | LpGiles
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex)
        if c.shape != (self.space.d,):
            raise StructuralError(f"{self.space.label()} needs {self.space.d} coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


def vector(space, coords) -> SipVector:
    return SipVector(space, coords)


def _coords(space, v):
    if isinstance(v, SipVector):
        if v.space != space:
            raise StructuralError(f"vector of {v.space.label()} used in {space.label()}")
        return v.coords
    c = np.asarray(v, dtype=complex)
    if c.shape[-1:] != (space.d,):
        raise StructuralError(f"{space.label()} needs {space.d} coordinates")
    return c


def sip(space, x, y) -> complex:
    """Semi-inner product ``[x, y]`` (linear in ``y``)."""
    return complex(space.pairing(_coords(space, x), _coords(space, y)))


def sip_norm(space, x) -> float:
    """``sqrt(Re [x, x])``; the l^p norm for ``LpGiles``."""
    return float(np.sqrt(max(sip(space, x, x).real, 0.0)))


def sip_continuity_probe(space, x, y, t_grid) -> list:
    """``Re [x + t y, y]`` for each ``t`` of a strictly decreasing positive grid."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise DomainError("empty t grid")
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise DomainError("t grid must be positive and strictly decreasing")
    xc, yc = _coords(space, x), _coords(space, y)
    vals = space.pairing(xc[None, :] + t[:, None] * yc[None, :], yc[None, :])
    return [float(v) for v in vals.real]
