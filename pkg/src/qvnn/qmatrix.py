"""Quaternion matrices stored as complex pairs, plus the embedding tool chain.

A quaternion matrix A = W + X i + Y j + Z k is kept as the ordered pair of
complex matrices (A1, A2) with A = A1 + A2 j, A1 = W + X i, A2 = Y + Z i.
In this representation

    A* = A1^H - A2^T j                     (conjugate transpose)
    AB = (A1 B1 - A2 conj(B2)) + (A1 B2 + A2 conj(B1)) j

and a square A embeds into a complex matrix of twice the size,

    chi(A) = [[A1, -A2], [conj(A2), conj(A1)]],

which is multiplicative and *-preserving, so Hermitian-ness and eigenvalue
signs transfer. A complex Hermitian H = S + i T embeds again into the real
symmetric [[S, -T], [T, S]]. Definiteness of a Hermitian quaternion matrix is
*defined* through these two embeddings; that definition is cross-checked
against quadratic-form signs in the test suite.

Quaternion n-vectors use the same pairing and are passed around as complex
arrays of shape (2, n): row 0 is the (w + x i) part, row 1 the (y + z i) part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StructureError
from .quaternion import Quaternion

# Structure violations up to this relative size are repaired silently;
# anything larger is rejected as a genuine structure error.
HERMITIAN_REPAIR_TOL = 1e-12
# Eigenvalues within this relative band of zero make a matrix "degenerate".
DEFINITENESS_TOL = 1e-10
# Allowed relative imaginary residue when collapsing a Hermitian form to a real.
QUADFORM_IMAG_TOL = 1e-10


class QuatMatrix:
    """Dense quaternion matrix held as the complex pair (a1, a2)."""

    __slots__ = ("a1", "a2")

    def __init__(self, a1: np.ndarray, a2: np.ndarray):
        a1 = np.asarray(a1, dtype=np.complex128)
        a2 = np.asarray(a2, dtype=np.complex128)
        if a1.ndim != 2 or a1.shape != a2.shape:
            raise ShapeError(f"component shapes differ: {a1.shape} vs {a2.shape}")
        self.a1 = a1
        self.a2 = a2

    # ---- constructors ---------------------------------------------------------

    @classmethod
    def from_components(cls, w, x, y, z) -> "QuatMatrix":
        w, x, y, z = (np.asarray(m, dtype=float) for m in (w, x, y, z))
        return cls(w + 1j * x, y + 1j * z)

    @classmethod
    def from_real(cls, m) -> "QuatMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m.astype(np.complex128), np.zeros_like(m, dtype=np.complex128))

    @classmethod
    def from_entries(cls, entries) -> "QuatMatrix":
        """Build from a nested sequence of Quaternion scalars."""
        rows = len(entries)
        cols = len(entries[0])
        w = np.empty((rows, cols))
        x = np.empty((rows, cols))
        y = np.empty((rows, cols))
        z = np.empty((rows, cols))
        for r in range(rows):
            if len(entries[r]) != cols:
                raise ShapeError("ragged entry rows")
            for c in range(cols):
                q = entries[r][c]
                w[r, c], x[r, c], y[r, c], z[r, c] = q.w, q.x, q.y, q.z
        return cls.from_components(w, x, y, z)

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "QuatMatrix":
        cols = rows if cols is None else cols
        return cls(np.zeros((rows, cols), dtype=np.complex128),
                   np.zeros((rows, cols), dtype=np.complex128))

    @classmethod
    def identity(cls, n: int) -> "QuatMatrix":
        return cls(np.eye(n, dtype=np.complex128),
                   np.zeros((n, n), dtype=np.complex128))

    # ---- basic queries ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.a1.shape

    @property
    def rows(self) -> int:
        return self.a1.shape[0]

    @property
    def cols(self) -> int:
        return self.a1.shape[1]

    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.a1.real.copy(), self.a1.imag.copy(),
                self.a2.real.copy(), self.a2.imag.copy())

    def entry(self, r: int, c: int) -> Quaternion:
        return Quaternion.from_pair(complex(self.a1[r, c]), complex(self.a2[r, c]))

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.a1) ** 2 + np.abs(self.a2) ** 2)))

    def max_abs(self) -> float:
        if self.a1.size == 0:
            return 0.0
        return float(max(np.max(np.abs(self.a1)), np.max(np.abs(self.a2))))

    # ---- algebra ---------------------------------------------------------------

    def __add__(self, other: "QuatMatrix") -> "QuatMatrix":
        self._check_same_shape(other)
        return QuatMatrix(self.a1 + other.a1, self.a2 + other.a2)

    def __sub__(self, other: "QuatMatrix") -> "QuatMatrix":
        self._check_same_shape(other)
        return QuatMatrix(self.a1 - other.a1, self.a2 - other.a2)

    def __neg__(self) -> "QuatMatrix":
        return QuatMatrix(-self.a1, -self.a2)

    def __mul__(self, scalar) -> "QuatMatrix":
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return QuatMatrix(self.a1 * scalar, self.a2 * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "QuatMatrix") -> "QuatMatrix":
        if not isinstance(other, QuatMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        b1, b2 = other.a1, other.a2
        return QuatMatrix(self.a1 @ b1 - self.a2 @ np.conj(b2),
                          self.a1 @ b2 + self.a2 @ np.conj(b1))

    def conj_transpose(self) -> "QuatMatrix":
        return QuatMatrix(self.a1.conj().T, -self.a2.T)

    @property
    def H(self) -> "QuatMatrix":
        return self.conj_transpose()

    def scale_rows(self, d: np.ndarray) -> "QuatMatrix":
        """Left-multiply by a real diagonal matrix given as a vector."""
        d = np.asarray(d, dtype=float).reshape(-1, 1)
        return QuatMatrix(d * self.a1, d * self.a2)

    def scale_cols(self, d: np.ndarray) -> "QuatMatrix":
        d = np.asarray(d, dtype=float).reshape(1, -1)
        return QuatMatrix(self.a1 * d, self.a2 * d)

    def _check_same_shape(self, other: "QuatMatrix") -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    # ---- structure -------------------------------------------------------------

    def hermitian_violation(self) -> float:
        """Max-abs deviation of (a1, a2) from (Hermitian, skew-symmetric)."""
        if self.rows != self.cols:
            raise ShapeError("hermitian check needs a square matrix")
        dev1 = np.max(np.abs(self.a1 - self.a1.conj().T)) if self.a1.size else 0.0
        dev2 = np.max(np.abs(self.a2 + self.a2.T)) if self.a2.size else 0.0
        return float(max(dev1, dev2))

    def is_hermitian(self, tol: float = HERMITIAN_REPAIR_TOL) -> bool:
        scale = max(1.0, self.max_abs())
        return self.hermitian_violation() <= tol * scale

    def complex_embed(self) -> np.ndarray:
        """The 2r x 2c complex image [[A1, -A2], [conj(A2), conj(A1)]]."""
        top = np.hstack([self.a1, -self.a2])
        bot = np.hstack([np.conj(self.a2), np.conj(self.a1)])
        return np.vstack([top, bot])

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"QuatMatrix(shape={self.shape})"


class HermitianQuatMatrix(QuatMatrix):
    """Quaternion matrix with A = A*, i.e. a1 Hermitian and a2 skew-symmetric.

    Inputs violating the structure by at most HERMITIAN_REPAIR_TOL relative to
    the matrix scale are symmetrized; larger violations raise StructureError.
    """

    __slots__ = ()

    def __init__(self, a1: np.ndarray, a2: np.ndarray):
        super().__init__(a1, a2)
        if self.rows != self.cols:
            raise ShapeError("Hermitian matrix must be square")
        scale = max(1.0, self.max_abs())
        violation = self.hermitian_violation()
        if violation > HERMITIAN_REPAIR_TOL * scale:
            raise StructureError(
                f"structure violation {violation:.3e} exceeds "
                f"{HERMITIAN_REPAIR_TOL * scale:.3e}")
        self.a1 = (self.a1 + self.a1.conj().T) / 2.0
        self.a2 = (self.a2 - self.a2.T) / 2.0

    @classmethod
    def from_quat(cls, m: QuatMatrix) -> "HermitianQuatMatrix":
        return cls(m.a1, m.a2)

    @classmethod
    def from_real_diag(cls, d: np.ndarray) -> "HermitianQuatMatrix":
        d = np.asarray(d, dtype=float)
        return cls(np.diag(d).astype(np.complex128),
                   np.zeros((d.size, d.size), dtype=np.complex128))


# ---- embeddings and spectra ---------------------------------------------------


def real_embed(h: np.ndarray, tol: float = HERMITIAN_REPAIR_TOL) -> np.ndarray:
    """Embed a complex Hermitian matrix S + iT as the real symmetric [[S,-T],[T,S]].

    The spectrum is preserved with doubled multiplicities. Non-Hermitian input
    beyond ``tol`` (relative) is a precondition failure.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError("real_embed needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    if np.max(np.abs(h - h.conj().T)) > tol * scale:
        raise StructureError("real_embed input is not Hermitian within tolerance")
    s = (h.real + h.real.T) / 2.0
    t = (h.imag - h.imag.T) / 2.0
    return np.block([[s, -t], [t, s]])


def hermitian_eigvals(h: HermitianQuatMatrix) -> np.ndarray:
    """Sorted eigenvalues of the real embedding (each quaternion eigenvalue x4)."""
    return np.linalg.eigvalsh(real_embed(h.complex_embed()))


@dataclass(frozen=True)
class DefinitenessReport:
    kind: str  # positive_definite | negative_definite | indefinite | semidefinite_degenerate
    min_eig: float
    max_eig: float


def definiteness(h: HermitianQuatMatrix) -> DefinitenessReport:
    """Classify a Hermitian quaternion matrix through the real embedding."""
    eigs = hermitian_eigvals(h)
    lo, hi = float(eigs[0]), float(eigs[-1])
    tol = DEFINITENESS_TOL * max(1.0, abs(lo), abs(hi))
    if lo > tol:
        kind = "positive_definite"
    elif hi < -tol:
        kind = "negative_definite"
    elif lo < -tol and hi > tol:
        kind = "indefinite"
    else:
        kind = "semidefinite_degenerate"
    return DefinitenessReport(kind, lo, hi)


def spectral_norm(m: QuatMatrix) -> float:
    """Largest singular value, computed on the complex embedding."""
    if m.a1.size == 0:
        return 0.0
    return float(np.linalg.norm(m.complex_embed(), 2))


def hermitian_sqrt(h: HermitianQuatMatrix) -> HermitianQuatMatrix:
    """Principal square root of a positive semidefinite Hermitian quaternion matrix.

    Computed on the complex embedding; the unique PSD root of the embedding is
    itself the embedding of a quaternion matrix, so the pair can be read back
    off the blocks.
    """
    n = h.rows
    emb = h.complex_embed()
    w, v = np.linalg.eigh(emb)
    scale = max(1.0, float(abs(w[-1])))
    if w[0] < -1e-10 * scale:
        raise StructureError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    a1 = (root[:n, :n] + root[n:, n:].conj()) / 2.0
    a2 = -(root[:n, n:] - root[n:, :n].conj()) / 2.0
    out = HermitianQuatMatrix(a1, a2)
    if np.max(np.abs(out.complex_embed() - root)) > 1e-8 * scale:
        raise StructureError("square root does not round-trip through the embedding")
    return out


# ---- quaternion vectors as complex pairs ---------------------------------------


def qv_from_components(comp: np.ndarray) -> np.ndarray:
    """(n, 4) real array of [w, x, y, z] rows -> (2, n) complex pair."""
    comp = np.asarray(comp, dtype=float)
    if comp.ndim != 2 or comp.shape[1] != 4:
        raise ShapeError("expected an (n, 4) component array")
    return np.stack([comp[:, 0] + 1j * comp[:, 1], comp[:, 2] + 1j * comp[:, 3]])

def qv_components(v: np.ndarray) -> np.ndarray:
    """(2, n) complex pair -> (n, 4) real array of [w, x, y, z] rows."""
    v = np.asarray(v, dtype=np.complex128)
    return np.stack([v[0].real, v[0].imag, v[1].real, v[1].imag], axis=1)

def qv_zeros(n: int) -> np.ndarray:
    return np.zeros((2, n), dtype=np.complex128)


def mat_vec(m: QuatMatrix, v: np.ndarray) -> np.ndarray:
    """Quaternion matrix times quaternion vector, both in pair representation."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (2, m.cols):
        raise ShapeError(f"vector shape {v.shape} does not fit matrix {m.shape}")
    return np.stack([m.a1 @ v[0] - m.a2 @ np.conj(v[1]),
                     m.a1 @ v[1] + m.a2 @ np.conj(v[0])])


def qv_conj_dot(u: np.ndarray, v: np.ndarray) -> Quaternion:
    """u* v = sum_i conj(u_i) v_i as a quaternion scalar."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape or u.shape[0] != 2:
        raise ShapeError("pair-form vectors of equal length required")
    # conj(u_i) v_i expanded through (u1 + u2 j)* (v1 + v2 j)
    c1 = np.sum(np.conj(u[0]) * v[0] + u[1] * np.conj(v[1]))
    c2 = np.sum(np.conj(u[0]) * v[1] - u[1] * np.conj(v[0]))
    return Quaternion.from_pair(complex(c1), complex(c2))


def qv_modulus(v: np.ndarray) -> np.ndarray:
    """Entrywise quaternion modulus of a pair-form vector."""
    v = np.asarray(v, dtype=np.complex128)
    return np.sqrt(np.abs(v[0]) ** 2 + np.abs(v[1]) ** 2)


def qv_embed(v: np.ndarray) -> np.ndarray:
    """Pair-form vector -> the 2n complex vector [v1; conj(v2)].

    This is the first column of the complex embedding of v as an n x 1 matrix,
    so quadratic forms satisfy x* H x = qv_embed(x)^H chi(H) qv_embed(x).
    """
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([v[0], np.conj(v[1])])


def quadform(h: HermitianQuatMatrix, v: np.ndarray) -> float:
    """Real value of the Hermitian form v* H v.

    Evaluated in quaternion arithmetic; the i/j/k residue must vanish to
    QUADFORM_IMAG_TOL relative to the form's magnitude.
    """
    s = qv_conj_dot(v, mat_vec(h, v))
    resid = max(abs(s.x), abs(s.y), abs(s.z))
    if resid > QUADFORM_IMAG_TOL * max(1.0, abs(s.w)):
        raise StructureError(f"quadratic form has non-real residue {resid:.3e}")
    return s.w


# ---- random generation ----------------------------------------------------------


def random_quat_matrix(rng: np.random.Generator, rows: int, cols: int | None = None,
                       scale: float = 1.0) -> QuatMatrix:
    cols = rows if cols is None else cols
    comps = rng.standard_normal((4, rows, cols)) * scale
    return QuatMatrix.from_components(*comps)


def random_hermitian(rng: np.random.Generator, n: int,
                     scale: float = 1.0) -> HermitianQuatMatrix:
    g = random_quat_matrix(rng, n, n, scale)
    s = g + g.conj_transpose()
    return HermitianQuatMatrix(s.a1 * 0.5, s.a2 * 0.5)


def random_hermitian_pd(rng: np.random.Generator, n: int, scale: float = 1.0,
                        floor: float = 0.1) -> HermitianQuatMatrix:
    g = random_quat_matrix(rng, n, n, scale)
    p = g @ g.conj_transpose() + QuatMatrix.identity(n) * floor
    return HermitianQuatMatrix(p.a1, p.a2)


# ---- JSON text format ------------------------------------------------------------


def qmat_to_json(m: QuatMatrix) -> dict:
    """Row-major {"rows", "cols", "entries": [[w, x, y, z], ...]} payload."""
    w, x, y, z = m.components()
    entries = [[float(w[r, c]), float(x[r, c]), float(y[r, c]), float(z[r, c])]
               for r in range(m.rows) for c in range(m.cols)]
    return {"rows": m.rows, "cols": m.cols, "entries": entries}


def qmat_from_json(payload: dict) -> QuatMatrix:
    from .errors import InputError

    try:
        rows = int(payload["rows"])
        cols = int(payload["cols"])
        entries = payload["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed quaternion matrix payload: {exc}") from None
    if rows < 0 or cols < 0 or len(entries) != rows * cols:
        raise InputError(f"expected {rows * cols} entries, got {len(entries)}")
    comp = np.empty((rows * cols, 4))
    for idx, ent in enumerate(entries):
        if len(ent) != 4:
            raise InputError(f"entry {idx} does not have 4 components")
        comp[idx] = [float(c) for c in ent]
    comp = comp.reshape(rows, cols, 4)
    return QuatMatrix.from_components(comp[:, :, 0], comp[:, :, 1],
                                      comp[:, :, 2], comp[:, :, 3])
