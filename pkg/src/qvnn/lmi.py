"""Assembly of the delay-dependent stability criterion as quaternion LMIs.

The criterion is feasibility of three strict matrix inequalities in 18
quaternion decision matrices: two positivity couplings

    [[R1, U], [U*, R1]] > 0,      [[R2, V], [V*, R2]] > 0,

and an 11 x 11 block matrix Omega < 0 whose rows/columns correspond to the
augmented state

    (x(t), x'(t), x(t - delta), x(t - d1(t)), x(t - d(t)), x(t - d1),
     x(t - d), f(x(t)), f(x(t - d1(t))), f(x(t - d(t))), int_{t-delta}^t x).

M1, M2, M3 are positive diagonal; P1..P3, Q1..Q6, R1, R2 are Hermitian
positive definite; U, V, S1, S2 are unconstrained. All constraints are
homogeneous (zero constant term), so certificates scale freely.

Only the upper block triangle is authored below; the lower one is the mirror.
Unlisted blocks are identically zero. Everything here is linear in the
decision variables, which the lowering pass exploits to extract coefficient
matrices by sweeping unit vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError
from .model import NetworkModel
from .qmatrix import (
    HermitianQuatMatrix,
    QuatMatrix,
    hermitian_eigvals,
    qmat_from_json,
    qmat_to_json,
)

DIAG_NAMES = ("m1", "m2", "m3")
HERMITIAN_NAMES = ("p1", "p2", "p3", "q1", "q2", "q3", "q4", "q5", "q6", "r1", "r2")
GENERAL_NAMES = ("u", "v", "s1", "s2")

# (row, col) of every authored upper-triangle block of Omega, 1-based.
OMEGA_UPPER_INDICES = (
    (1, 1), (1, 4), (1, 6), (1, 8), (1, 10), (1, 11),
    (2, 2), (2, 3), (2, 8), (2, 10),
    (3, 3), (3, 8), (3, 10),
    (4, 4), (4, 6),
    (5, 5), (5, 6), (5, 7),
    (6, 6), (6, 7),
    (7, 7),
    (8, 8), (8, 11),
    (9, 9),
    (10, 10), (10, 11),
    (11, 11),
)


@dataclass
class DecisionVars:
    """One full set of decision matrices for a network of size n."""

    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    p1: HermitianQuatMatrix
    p2: HermitianQuatMatrix
    p3: HermitianQuatMatrix
    q1: HermitianQuatMatrix
    q2: HermitianQuatMatrix
    q3: HermitianQuatMatrix
    q4: HermitianQuatMatrix
    q5: HermitianQuatMatrix
    q6: HermitianQuatMatrix
    r1: HermitianQuatMatrix
    r2: HermitianQuatMatrix
    u: QuatMatrix
    v: QuatMatrix
    s1: QuatMatrix
    s2: QuatMatrix

    @property
    def n(self) -> int:
        return self.m1.shape[0]

    def scaled(self, factor: float) -> "DecisionVars":
        def h(m):
            return HermitianQuatMatrix(m.a1 * factor, m.a2 * factor)

        def g(m):
            return QuatMatrix(m.a1 * factor, m.a2 * factor)

        return DecisionVars(
            m1=self.m1 * factor, m2=self.m2 * factor, m3=self.m3 * factor,
            p1=h(self.p1), p2=h(self.p2), p3=h(self.p3),
            q1=h(self.q1), q2=h(self.q2), q3=h(self.q3),
            q4=h(self.q4), q5=h(self.q5), q6=h(self.q6),
            r1=h(self.r1), r2=h(self.r2),
            u=g(self.u), v=g(self.v), s1=g(self.s1), s2=g(self.s2))

    # ---- flat real vector form ---------------------------------------------

    @staticmethod
    def num_scalars(n: int) -> int:
        # 3n diagonal entries, 11 Hermitian matrices (n^2 + n(n-1) reals each),
        # 4 unconstrained matrices (4 n^2 reals each).
        return 3 * n + 11 * (2 * n * n - n) + 16 * n * n

    @classmethod
    def from_vector(cls, vec: np.ndarray, n: int) -> "DecisionVars":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (cls.num_scalars(n),):
            raise ShapeError(f"expected {cls.num_scalars(n)} scalars, got {vec.shape}")
        pos = 0

        def take(k):
            nonlocal pos
            out = vec[pos:pos + k]
            pos += k
            return out

        diags = {name: take(n).copy() for name in DIAG_NAMES}
        herms = {}
        for name in HERMITIAN_NAMES:
            a1 = np.zeros((n, n), dtype=np.complex128)
            a2 = np.zeros((n, n), dtype=np.complex128)
            for i in range(n):
                a1[i, i] = take(1)[0]
            for i in range(n):
                for j in range(i + 1, n):
                    re, im = take(2)
                    a1[i, j] = complex(re, im)
                    a1[j, i] = complex(re, -im)
            for i in range(n):
                for j in range(i + 1, n):
                    re, im = take(2)
                    a2[i, j] = complex(re, im)
                    a2[j, i] = complex(-re, -im)
            herms[name] = HermitianQuatMatrix(a1, a2)
        gens = {}
        for name in GENERAL_NAMES:
            a1 = (take(n * n) + 1j * take(n * n)).reshape(n, n)
            a2 = (take(n * n) + 1j * take(n * n)).reshape(n, n)
            gens[name] = QuatMatrix(a1, a2)
        assert pos == vec.size
        return cls(**diags, **herms, **gens)

    def to_vector(self) -> np.ndarray:
        n = self.n
        parts = [np.asarray(getattr(self, name), dtype=float) for name in DIAG_NAMES]
        for name in HERMITIAN_NAMES:
            m = getattr(self, name)
            parts.append(np.real(np.diag(m.a1)))
            upper1, upper2 = [], []
            for i in range(n):
                for j in range(i + 1, n):
                    upper1 += [m.a1[i, j].real, m.a1[i, j].imag]
                    upper2 += [m.a2[i, j].real, m.a2[i, j].imag]
            parts.append(np.asarray(upper1))
            parts.append(np.asarray(upper2))
        for name in GENERAL_NAMES:
            m = getattr(self, name)
            parts += [m.a1.real.ravel(), m.a1.imag.ravel(),
                      m.a2.real.ravel(), m.a2.imag.ravel()]
        return np.concatenate([p for p in parts if p.size])

    # ---- JSON certificate payload --------------------------------------------

    def to_json(self) -> dict:
        doc = {name: [float(v) for v in getattr(self, name)] for name in DIAG_NAMES}
        for name in HERMITIAN_NAMES + GENERAL_NAMES:
            doc[name] = qmat_to_json(getattr(self, name))
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "DecisionVars":
        try:
            diags = {name: np.asarray([float(v) for v in doc[name]])
                     for name in DIAG_NAMES}
            herms = {name: HermitianQuatMatrix.from_quat(qmat_from_json(doc[name]))
                     for name in HERMITIAN_NAMES}
            gens = {name: qmat_from_json(doc[name]) for name in GENERAL_NAMES}
        except KeyError as exc:
            raise InputError(f"certificate is missing field {exc}") from None
        return cls(**diags, **herms, **gens)


@dataclass(frozen=True)
class VarSpec:
    """Where one scalar of the flat vector lives inside the decision matrices."""

    matrix: str
    component: str  # "diag" | "a1" | "a2"
    row: int
    col: int
    part: str       # "re" | "im"


def var_map(n: int) -> list[VarSpec]:
    out = []
    for name in DIAG_NAMES:
        out += [VarSpec(name, "diag", i, i, "re") for i in range(n)]
    for name in HERMITIAN_NAMES:
        out += [VarSpec(name, "a1", i, i, "re") for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                out += [VarSpec(name, "a1", i, j, "re"), VarSpec(name, "a1", i, j, "im")]
        for i in range(n):
            for j in range(i + 1, n):
                out += [VarSpec(name, "a2", i, j, "re"), VarSpec(name, "a2", i, j, "im")]
    for name in GENERAL_NAMES:
        for comp in ("a1", "a2"):
            for part in ("re", "im"):
                out += [VarSpec(name, comp, i, j, part)
                        for i in range(n) for j in range(n)]
    assert len(out) == DecisionVars.num_scalars(n)
    return out


# ---- block assembly --------------------------------------------------------------


def assemble_blocks(num_blocks: int, n: int,
                    upper: dict[tuple[int, int], QuatMatrix]) -> HermitianQuatMatrix:
    """Place upper-triangle blocks (1-based indices) and mirror them exactly."""
    dim = num_blocks * n
    a1 = np.zeros((dim, dim), dtype=np.complex128)
    a2 = np.zeros((dim, dim), dtype=np.complex128)
    for (bi, bj), blk in upper.items():
        if not (1 <= bi <= bj <= num_blocks):
            raise ShapeError(f"block index ({bi},{bj}) outside upper triangle")
        if blk.shape != (n, n):
            raise ShapeError(f"block ({bi},{bj}) has shape {blk.shape}")
        r = slice((bi - 1) * n, bi * n)
        c = slice((bj - 1) * n, bj * n)
        if bi == bj:
            # exact symmetrization so the final structure check is tolerance-free
            a1[r, c] = (blk.a1 + blk.a1.conj().T) / 2.0
            a2[r, c] = (blk.a2 - blk.a2.T) / 2.0
        else:
            a1[r, c] = blk.a1
            a2[r, c] = blk.a2
            a1[c, r] = blk.a1.conj().T
            a2[c, r] = -blk.a2.T
    return HermitianQuatMatrix(a1, a2)


def _cdiag(model: NetworkModel) -> np.ndarray:
    return model.c_diag


def omega_upper_blocks(model: NetworkModel,
                       dv: DecisionVars) -> dict[tuple[int, int], QuatMatrix]:
    """The 27 authored blocks of Omega, keyed by 1-based (row, col)."""
    c = _cdiag(model)
    g = model.gamma_diag
    a, b = model.a_mat, model.b_mat
    delta, d1, d2 = model.delta, model.d1_bound, model.d2_bound
    mu1, mu = model.mu1, model.mu
    p1, p2, p3 = dv.p1, dv.p2, dv.p3
    q1, q2, q3, q4, q5, q6 = dv.q1, dv.q2, dv.q3, dv.q4, dv.q5, dv.q6
    r1, r2, u, v, s1, s2 = dv.r1, dv.r2, dv.u, dv.v, dv.s1, dv.s2

    def gdiag(m):
        return QuatMatrix.from_real(np.diag(g * m * g))

    def mdiag(m):
        return QuatMatrix.from_real(np.diag(m))

    s1h, s2h = s1.H, s2.H
    blocks = {
        (1, 1): (-p1.scale_cols(c) - p1.scale_rows(c) + p2 + (delta * delta) * p3
                 + q1 + q3 + q5 + q6 - r1 + gdiag(dv.m1)),
        (1, 4): r1 - u.H,
        (1, 6): u.H,
        (1, 8): p1 @ a,
        (1, 10): p1 @ b,
        (1, 11): p1.scale_rows(c).scale_cols(c),
        (2, 2): (d1 * d1) * r1 + (d2 * d2) * r2 - s1 - s1h,
        (2, 3): -s1h.scale_cols(c) - s2,
        (2, 8): s1h @ a,
        (2, 10): s1h @ b,
        (3, 3): -p2 - s2.scale_rows(c) - s2h.scale_cols(c),
        (3, 8): s2h @ a,
        (3, 10): s2h @ b,
        (4, 4): (-(1.0 - mu1) * q1 - r1 - r1.H + u + u.H + gdiag(dv.m2)),
        (4, 6): r1 - u.H,
        (5, 5): (-(1.0 - mu) * q3 - r2 - r2.H + v + v.H + gdiag(dv.m3)),
        (5, 6): r2.H - v,
        (5, 7): r2 - v.H,
        (6, 6): -q5 - r1 - r2,
        (6, 7): v.H,
        (7, 7): -q6 - r2,
        (8, 8): q2 + q4 - mdiag(dv.m1),
        (8, 11): -(a.H @ p1).scale_cols(c),
        (9, 9): -(1.0 - mu1) * q2 - mdiag(dv.m2),
        (10, 10): -(1.0 - mu) * q4 - mdiag(dv.m3),
        (10, 11): -(b.H @ p1).scale_cols(c),
        (11, 11): -p3,
    }
    assert tuple(sorted(blocks)) == tuple(sorted(OMEGA_UPPER_INDICES))
    return blocks


def assemble_omega(model: NetworkModel, dv: DecisionVars) -> HermitianQuatMatrix:
    return assemble_blocks(11, model.n, omega_upper_blocks(model, dv))


def assemble_coupling(r: HermitianQuatMatrix, w: QuatMatrix) -> HermitianQuatMatrix:
    """The positivity coupling [[R, W], [W*, R]] as one Hermitian matrix."""
    return assemble_blocks(2, r.rows, {(1, 1): r, (1, 2): w, (2, 2): r})


@dataclass(frozen=True)
class QuatConstraint:
    name: str
    sense: str  # "pd" (matrix > 0) or "nd" (matrix < 0)
    matrix: HermitianQuatMatrix


def quat_constraints(model: NetworkModel, dv: DecisionVars) -> list[QuatConstraint]:
    """Every constraint of the criterion, evaluated at the given variables."""
    cons = [
        QuatConstraint("coupling_r1_u", "pd", assemble_coupling(dv.r1, dv.u)),
        QuatConstraint("coupling_r2_v", "pd", assemble_coupling(dv.r2, dv.v)),
        QuatConstraint("omega", "nd", assemble_omega(model, dv)),
    ]
    for name in HERMITIAN_NAMES:
        cons.append(QuatConstraint(f"{name}_pd", "pd", getattr(dv, name)))
    for name in DIAG_NAMES:
        cons.append(QuatConstraint(f"{name}_pos", "pd",
                                   HermitianQuatMatrix.from_real_diag(getattr(dv, name))))
    return cons


@dataclass(frozen=True)
class ConstraintScore:
    name: str
    sense: str
    min_eig: float
    max_eig: float

    @property
    def margin(self) -> float:
        """Distance to violation: min-eig for > 0 constraints, -max-eig for < 0."""
        return self.min_eig if self.sense == "pd" else -self.max_eig


@dataclass(frozen=True)
class CertificateReport:
    valid: bool
    required_margin: float
    worst_margin: float
    scores: tuple[ConstraintScore, ...]


def verify_certificate(model: NetworkModel, dv: DecisionVars,
                       margin: float) -> CertificateReport:
    """Independent quaternion-level check that dv satisfies every strict LMI.

    Eigenvalues come from the real embedding of each assembled constraint; the
    certificate is valid iff every strictness margin reaches ``margin``.
    """
    scores = []
    for con in quat_constraints(model, dv):
        eigs = hermitian_eigvals(con.matrix)
        scores.append(ConstraintScore(con.name, con.sense,
                                      float(eigs[0]), float(eigs[-1])))
    worst = min(s.margin for s in scores)
    return CertificateReport(valid=bool(worst >= margin), required_margin=margin,
                             worst_margin=worst, scores=tuple(scores))
