"""Lowering quaternion LMIs to a real semidefinite feasibility problem.

Every constraint of the criterion is linear in the flat decision vector, so
its coefficient matrices are recovered exactly by evaluating the assembly at
unit vectors. Lowering then happens in two mechanical steps applied to each
coefficient: the complex embedding chi (size doubles, Hermitian-ness and
definiteness preserved) and the real embedding of a complex Hermitian matrix
(size doubles again, spectrum preserved with doubled multiplicity). No block
formula is ever rewritten by hand at the lower levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ShapeError
from .lmi import DecisionVars, VarSpec, quat_constraints
from .lmi import var_map as build_var_map
from .model import NetworkModel
from .qmatrix import HermitianQuatMatrix, real_embed


@dataclass
class QuatAffineLmi:
    """A constraint  constant + sum_i x_i * coeff_i  (sense 'pd': > 0, 'nd': < 0)."""

    name: str
    sense: str
    constant: HermitianQuatMatrix
    coeffs: list[HermitianQuatMatrix]

    def evaluate(self, x: np.ndarray) -> HermitianQuatMatrix:
        a1 = self.constant.a1.copy()
        a2 = self.constant.a2.copy()
        for xi, coeff in zip(x, self.coeffs):
            if xi != 0.0:
                a1 += xi * coeff.a1
                a2 += xi * coeff.a2
        return HermitianQuatMatrix(a1, a2)


@dataclass
class ComplexAffineLmi:
    name: str
    sense: str
    constant: np.ndarray          # complex Hermitian (d, d)
    coeffs: np.ndarray            # complex (num_vars, d, d)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.tensordot(np.asarray(x, dtype=float),
                                            self.coeffs, axes=1)


@dataclass
class AffineLmi:
    """Real symmetric affine constraint of a standard SDP."""

    name: str
    sense: str
    constant: np.ndarray          # real symmetric (d, d)
    coeffs: np.ndarray            # real (num_vars, d, d)

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.tensordot(np.asarray(x, dtype=float),
                                            self.coeffs, axes=1)

    def oriented(self) -> tuple[np.ndarray, np.ndarray]:
        """(constant, coeffs) negated if needed so the constraint reads > 0."""
        sign = 1.0 if self.sense == "pd" else -1.0
        return sign * self.constant, sign * self.coeffs


@dataclass
class StandardSdp:
    """max-margin feasibility data: find x with every oriented LMI > 0."""

    num_vars: int
    lmis: list[AffineLmi]
    var_map: list[VarSpec] = field(default_factory=list)

    def __post_init__(self):
        for lmi in self.lmis:
            if lmi.coeffs.shape[0] != self.num_vars:
                raise ShapeError(f"constraint {lmi.name} has "
                                 f"{lmi.coeffs.shape[0]} coefficient matrices, "
                                 f"expected {self.num_vars}")
        if self.var_map and len(self.var_map) != self.num_vars:
            raise ShapeError("variable map length does not match num_vars")

    def is_homogeneous(self, tol: float = 0.0) -> bool:
        return all(np.max(np.abs(lmi.constant)) <= tol for lmi in self.lmis)


def build_quat_system(model: NetworkModel) -> tuple[list[QuatAffineLmi], list[VarSpec]]:
    """Extract the affine structure of every constraint by a unit-vector sweep."""
    n = model.n
    num = DecisionVars.num_scalars(n)
    zero_cons = quat_constraints(model, DecisionVars.from_vector(np.zeros(num), n))
    for con in zero_cons:
        if con.matrix.max_abs() != 0.0:
            raise InputError(f"constraint {con.name} is not homogeneous")
    systems = [QuatAffineLmi(con.name, con.sense, con.matrix, []) for con in zero_cons]
    basis = np.zeros(num)
    for idx in range(num):
        basis[idx] = 1.0
        cons = quat_constraints(model, DecisionVars.from_vector(basis, n))
        basis[idx] = 0.0
        for sys_lmi, con in zip(systems, cons):
            sys_lmi.coeffs.append(con.matrix)
    return systems, build_var_map(n)


def lower_to_complex(qsys: list[QuatAffineLmi]) -> list[ComplexAffineLmi]:
    out = []
    for lmi in qsys:
        coeffs = np.stack([c.complex_embed() for c in lmi.coeffs]) if lmi.coeffs \
            else np.zeros((0, 2 * lmi.constant.rows, 2 * lmi.constant.rows),
                          dtype=np.complex128)
        out.append(ComplexAffineLmi(lmi.name, lmi.sense,
                                    lmi.constant.complex_embed(), coeffs))
    return out


def lower_to_real(csys: list[ComplexAffineLmi],
                  var_map: list[VarSpec]) -> StandardSdp:
    lmis = []
    num_vars = len(var_map)
    for lmi in csys:
        if lmi.coeffs.shape[0] != num_vars:
            raise ShapeError(f"constraint {lmi.name} does not match the variable map")
        coeffs = np.stack([real_embed(c) for c in lmi.coeffs]) if num_vars else \
            np.zeros((0, 2 * lmi.constant.shape[0], 2 * lmi.constant.shape[0]))
        lmis.append(AffineLmi(lmi.name, lmi.sense, real_embed(lmi.constant), coeffs))
    return StandardSdp(num_vars=num_vars, lmis=lmis, var_map=var_map)


def build_sdp(model: NetworkModel) -> StandardSdp:
    """Model -> real standard-form SDP, via the quaternion and complex stages."""
    qsys, var_map = build_quat_system(model)
    return lower_to_real(lower_to_complex(qsys), var_map)
