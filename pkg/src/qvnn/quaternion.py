"""Scalar quaternion arithmetic.

A quaternion q = w + x i + y j + z k is stored as four floats. The product
follows the Hamilton rules

    i^2 = j^2 = k^2 = ijk = -1,
    ij = -ji = k,   jk = -kj = i,   ik = -ki = j (hence ki = -j),

which makes multiplication noncommutative. Every quaternion also splits into
an ordered pair of complex numbers, q = (w + x i) + (y + z i) j; that pairing
is the bridge to the complex-matrix embeddings used elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    # ---- construction helpers -------------------------------------------------

    @staticmethod
    def from_pair(c1: complex, c2: complex) -> "Quaternion":
        """Recompose from the complex pair (w + x i, y + z i)."""
        return Quaternion(c1.real, c1.imag, c2.real, c2.imag)

    @staticmethod
    def from_real(value: float) -> "Quaternion":
        return Quaternion(float(value), 0.0, 0.0, 0.0)

    # ---- algebra --------------------------------------------------------------

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        if not isinstance(other, Quaternion):
            return NotImplemented
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y + a.y * b.w - a.x * b.z + a.z * b.x,
            a.w * b.z + a.z * b.w + a.x * b.y - a.y * b.x,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def modulus(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x
                         + self.y * self.y + self.z * self.z)

    def decompose(self) -> tuple[complex, complex]:
        """Split into the complex pair (w + x i, y + z i); recompose is bit-exact."""
        return complex(self.w, self.x), complex(self.y, self.z)

    # ---- misc -----------------------------------------------------------------

    def components(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def is_close(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (abs(self.w - other.w) <= tol and abs(self.x - other.x) <= tol
                and abs(self.y - other.y) <= tol and abs(self.z - other.z) <= tol)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"Quaternion({self.w:g}, {self.x:g}, {self.y:g}, {self.z:g})"


ZERO = Quaternion(0.0, 0.0, 0.0, 0.0)
ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
