"""Max-margin semidefinite feasibility by a log-det barrier Newton method.

The problem solved is

    maximize t   subject to   G_k(x) - t I >= 0  for every constraint k,
                              |x_i| <= trust_radius,

where G_k(x) = C_k + sum_i x_i A_ki (constraints declared negative-definite
are negated first so everything reads "> 0"). Strict feasibility of the
original system is equivalent to a positive optimal t; for homogeneous
systems x = 0 always achieves t = 0, so "infeasible" here always means
"no margin above the tolerance", never an empty domain.

The barrier subproblem for weight mu,

    minimize  -t/mu - sum_k log det(G_k(x) - t I)
              - sum_i [log(R - x_i) + log(R + x_i)],

is centered by damped Newton steps; mu shrinks geometrically. The box term
makes the Hessian strictly positive definite, keeps iterates bounded, and
pins the scale of the otherwise homogeneous problem. The classical barrier
bound gives  t_opt - t(mu) <= nu * mu  with nu the total cone dimension, so
the outer loop stops once nu * mu is far below the margin tolerance.

A WARNING for readers comparing with production interior-point codes: this is
a feasibility engine, not a general-purpose SDP solver. It has no dual
iterates, no infeasibility certificates, and no presolve beyond
``scale_problem``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError
from .lowering import StandardSdp

_SEED_RETRIES = 5
_ARMIJO_SLOPE = 0.25
_MIN_STEP = 1e-13


@dataclass(frozen=True)
class SolverConfig:
    margin_tolerance: float = 1e-6
    newton_tolerance: float = 1e-9
    max_outer_iters: int = 60
    max_newton_iters: int = 100
    barrier_shrink: float = 0.2
    trust_radius: float = 1.0
    seed: int = 0


@dataclass
class OuterRecord:
    iteration: int
    barrier_weight: float
    t: float
    min_eig: float
    newton_steps: int


@dataclass
class FeasibilityResult:
    status: str                      # feasible | infeasible_at_tolerance | numerical_failure
    margin: float                    # best certified t
    x: np.ndarray | None
    per_constraint_min_eig: dict[str, float]
    iterations: int                  # total Newton steps
    outer_rounds: int
    wall_time: float
    seed_used: int = 0
    trace: list[OuterRecord] = field(default_factory=list)


@dataclass
class ScalingRecord:
    """Per-variable factors applied by scale_problem; maps solutions back."""

    factors: np.ndarray
    dropped: tuple[int, ...]

    def map_back(self, x_scaled: np.ndarray) -> np.ndarray:
        return np.asarray(x_scaled, dtype=float) / self.factors

    def map_to_scaled(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) * self.factors


def scale_problem(sdp: StandardSdp) -> tuple[StandardSdp, ScalingRecord]:
    """Rescale each variable's coefficient matrices to unit Frobenius order.

    The feasibility classification is unchanged (the map x_i = x_scaled_i / s_i
    is a bijection and leaves constraint values pointwise identical); variables
    whose coefficients vanish in every constraint are recorded as dropped.
    """
    m = sdp.num_vars
    norms = np.zeros(m)
    for lmi in sdp.lmis:
        if m:
            norms = np.maximum(norms,
                               np.linalg.norm(lmi.coeffs.reshape(m, -1), axis=1))
    dropped = tuple(int(i) for i in np.nonzero(norms == 0.0)[0])
    factors = np.where(norms == 0.0, 1.0, norms)
    from .lowering import AffineLmi
    lmis = [AffineLmi(l.name, l.sense, l.constant.copy(),
                      l.coeffs / factors[:, None, None]) for l in sdp.lmis]
    scaled = StandardSdp(num_vars=m, lmis=lmis, var_map=sdp.var_map)
    return scaled, ScalingRecord(factors=factors, dropped=dropped)


def _oriented_system(sdp: StandardSdp, allow_constant: bool):
    consts, coeffs, names = [], [], []
    for lmi in sdp.lmis:
        c, a = lmi.oriented()
        if a.size and np.max(np.abs(a - np.transpose(a, (0, 2, 1)))) > 1e-12:
            raise InputError(f"constraint {lmi.name} has non-symmetric coefficients")
        consts.append((c + c.T) / 2.0)
        coeffs.append(a)
        names.append(lmi.name)
    if not allow_constant and any(np.max(np.abs(c)) > 0 for c in consts):
        raise InputError("system has constant terms; pass allow_constant=True "
                         "only for explicitly inhomogeneous test problems")
    return consts, coeffs, names


def _eval_blocks(consts, coeffs_aug, z):
    return [c + np.tensordot(z, a, axes=1) for c, a in zip(consts, coeffs_aug)]


def _try_cholesky(mat):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


def _in_domain(consts, coeffs_aug, z, radius, m):
    if np.any(np.abs(z[:m]) >= radius):
        return None
    chols = []
    for s in _eval_blocks(consts, coeffs_aug, z):
        l = _try_cholesky(s)
        if l is None:
            return None
        chols.append(l)
    return chols


def _barrier_value(chols, z, radius, m, mu):
    logdets = sum(2.0 * np.sum(np.log(np.diag(l))) for l in chols)
    box = np.sum(np.log(radius - z[:m])) + np.sum(np.log(radius + z[:m]))
    return -z[m] / mu - logdets - box


def _grad_hess(consts, coeffs_aug, z, radius, m, mu):
    """Gradient and Hessian of the barrier objective at an interior point z."""
    nvar = m + 1
    grad = np.zeros(nvar)
    hess = np.zeros((nvar, nvar))
    grad[m] -= 1.0 / mu
    for c, a in zip(consts, coeffs_aug):
        s = c + np.tensordot(z, a, axes=1)
        l = _try_cholesky(s)
        if l is None:
            return None, None
        w = scipy.linalg.cho_solve((l, True), np.eye(s.shape[0]), check_finite=False)
        prods = np.matmul(w[None, :, :], a)          # S^-1 A_i, batched
        grad -= np.trace(prods, axis1=1, axis2=2)
        flat = prods.reshape(nvar, -1)
        flat_t = prods.transpose(0, 2, 1).reshape(nvar, -1)
        hess += flat @ flat_t.T
    xs = z[:m]
    grad[:m] += 1.0 / (radius - xs) - 1.0 / (radius + xs)
    idx = np.arange(m)
    hess[idx, idx] += 1.0 / (radius - xs) ** 2 + 1.0 / (radius + xs) ** 2
    return grad, (hess + hess.T) / 2.0


def _newton_center(consts, coeffs_aug, z, radius, m, mu, cfg, chols):
    """Damped Newton minimization of the barrier subproblem. Returns (z, steps)."""
    steps = 0
    for _ in range(cfg.max_newton_iters):
        grad, hess = _grad_hess(consts, coeffs_aug, z, radius, m, mu)
        if grad is None or not np.all(np.isfinite(grad)):
            raise NumericalError("barrier gradient evaluation left the domain")
        reg = 0.0
        for _attempt in range(60):
            try:
                factor = scipy.linalg.cho_factor(
                    hess + reg * np.eye(m + 1), check_finite=False)
                break
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                trace_scale = max(np.trace(hess) / (m + 1), 1.0)
                reg = 2.0 * reg if reg > 0 else 1e-12 * trace_scale
        else:
            raise NumericalError("Hessian factorization failed despite regularization")
        direction = scipy.linalg.cho_solve(factor, -grad, check_finite=False)
        decrement = float(-grad @ direction)
        if not np.isfinite(decrement) or decrement < 0:
            raise NumericalError("Newton decrement is not finite")
        if decrement / 2.0 <= cfg.newton_tolerance:
            return z, steps, chols
        f0 = _barrier_value(chols, z, radius, m, mu)
        alpha = 1.0
        accepted = False
        while alpha > _MIN_STEP:
            cand = z + alpha * direction
            cand_chols = _in_domain(consts, coeffs_aug, cand, radius, m)
            if cand_chols is not None:
                f1 = _barrier_value(cand_chols, cand, radius, m, mu)
                if f1 <= f0 - _ARMIJO_SLOPE * alpha * decrement:
                    z, chols = cand, cand_chols
                    accepted = True
                    break
            alpha *= 0.5
        steps += 1
        if not accepted:
            # stalled line search: treat the current point as centered enough
            return z, steps, chols
    return z, steps, chols


def _constraint_min_eigs(consts, coeffs, names, x):
    out = {}
    for c, a, name in zip(consts, coeffs, names):
        g = c + (np.tensordot(x, a, axes=1) if a.shape[0] else 0.0)
        out[name] = float(np.linalg.eigvalsh(g)[0])
    return out


def solve_feasibility(sdp: StandardSdp, config: SolverConfig | None = None,
                      allow_constant: bool = False) -> FeasibilityResult:
    """Run the barrier method, retrying from fresh seeds on numerical failure.

    The reported margin is the best t reached on the central path; it is
    nondecreasing across outer rounds. Fixed seeds give identical runs.
    """
    cfg = config or SolverConfig()
    consts, coeffs, names = _oriented_system(sdp, allow_constant)
    m = sdp.num_vars
    dims = [c.shape[0] for c in consts]
    coeffs_aug = [np.concatenate([a, -np.eye(d)[None]], axis=0)
                  for a, d in zip(coeffs, dims)]
    nu = sum(dims) + 2 * m
    gap_target = min(0.05 * cfg.margin_tolerance, 1e-8)
    start = time.perf_counter()

    last_error = None
    for attempt in range(_SEED_RETRIES):
        seed = cfg.seed + attempt
        rng = np.random.default_rng(seed)
        x0 = 0.1 * cfg.trust_radius * rng.uniform(-1.0, 1.0, size=m)
        base_eig = min(float(np.linalg.eigvalsh(
            c + np.tensordot(x0, a, axes=1))[0]) for c, a in zip(consts, coeffs)) \
            if consts else 0.0
        t0 = base_eig - max(1.0, 0.1 * abs(base_eig))
        z = np.concatenate([x0, [t0]])
        chols = _in_domain(consts, coeffs_aug, z, cfg.trust_radius, m)
        if chols is None:
            last_error = NumericalError("could not find an interior starting point")
            continue
        try:
            # center the barrier weight so the start is balanced in t
            pull = sum(float(np.trace(scipy.linalg.cho_solve((l, True),
                       np.eye(l.shape[0]), check_finite=False))) for l in chols)
            mu = 1.0 / max(pull, 1e-12)
            best_t, best_x = -np.inf, None
            trace: list[OuterRecord] = []
            total_steps = 0
            outer = 0
            while outer < cfg.max_outer_iters:
                z, steps, chols = _newton_center(
                    consts, coeffs_aug, z, cfg.trust_radius, m, mu, cfg, chols)
                total_steps += steps
                outer += 1
                t_now = float(z[m])
                if t_now > best_t:
                    best_t, best_x = t_now, z[:m].copy()
                min_eig = min(float(np.linalg.eigvalsh(
                    c + np.tensordot(z[:m], a, axes=1))[0])
                    for c, a in zip(consts, coeffs)) if consts else 0.0
                trace.append(OuterRecord(outer, mu, t_now, min_eig, steps))
                if nu * mu <= gap_target:
                    break
                mu *= cfg.barrier_shrink
            status = ("feasible" if best_t >= cfg.margin_tolerance
                      else "infeasible_at_tolerance")
            return FeasibilityResult(
                status=status, margin=best_t, x=best_x,
                per_constraint_min_eig=_constraint_min_eigs(consts, coeffs, names,
                                                            best_x),
                iterations=total_steps, outer_rounds=outer,
                wall_time=time.perf_counter() - start, seed_used=seed, trace=trace)
        except NumericalError as exc:
            last_error = exc
            continue
    return FeasibilityResult(
        status="numerical_failure", margin=-np.inf, x=None,
        per_constraint_min_eig={},
        iterations=0, outer_rounds=0, wall_time=time.perf_counter() - start,
        seed_used=cfg.seed, trace=[])


@dataclass
class ProjectionResult:
    found: bool
    x: np.ndarray
    margin: float
    iterations: int


def alternating_projection_oracle(sdp: StandardSdp, target_margin: float,
                                  max_iters: int = 400, seed: int = 0,
                                  allow_constant: bool = False) -> ProjectionResult:
    """Second-opinion feasibility search by alternating projections.

    Alternates between the eigenvalue clip of every constraint block onto
    {S : S >= target_margin I} and the least-squares preimage in x. Declares
    success only when the raw constraint margin reaches half the target, so a
    positive answer always survives independent re-verification at that level.
    """
    if target_margin <= 0:
        raise InputError("target margin must be positive")
    consts, coeffs, names = _oriented_system(sdp, allow_constant)
    m = sdp.num_vars
    if m == 0:
        margin = min(float(np.linalg.eigvalsh(c)[0]) for c in consts)
        return ProjectionResult(margin >= 0.5 * target_margin, np.zeros(0), margin, 0)
    em = np.concatenate([a.reshape(m, -1) for a in coeffs], axis=1)   # (m, D)
    cvec = np.concatenate([c.ravel() for c in consts])
    gram = em @ em.T
    # tiny ridge: zero-coefficient variables would otherwise make gram singular
    gram += 1e-12 * max(1.0, float(np.trace(gram)) / m) * np.eye(m)
    factor = scipy.linalg.cho_factor(gram, check_finite=False)
    rng = np.random.default_rng(seed)
    x = 0.1 * rng.standard_normal(m)
    margin = -np.inf
    for it in range(1, max_iters + 1):
        projected = []
        for c, a in zip(consts, coeffs):
            s = c + np.tensordot(x, a, axes=1)
            w, v = np.linalg.eigh(s)
            projected.append((v * np.maximum(w, target_margin)) @ v.T)
        y = np.concatenate([p.ravel() for p in projected])
        x = scipy.linalg.cho_solve(factor, em @ (y - cvec), check_finite=False)
        margin = min(float(np.linalg.eigvalsh(
            c + np.tensordot(x, a, axes=1))[0]) for c, a in zip(consts, coeffs))
        if margin >= 0.5 * target_margin:
            return ProjectionResult(True, x, margin, it)
    return ProjectionResult(False, x, margin, max_iters)
