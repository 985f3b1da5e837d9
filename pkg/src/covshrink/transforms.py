"""
psi, chi and S transforms of the auto-correlation matrix A

For a Toeplitz A the large-T eigenvalue distribution is the law of its spectral density H(omega)
with omega uniform (Szegő), hence psi_A(z) = mean_omega[z H / (1 - z H)]. The mean over the uniform
grid is the trapezoid rule, spectrally accurate for the smooth periodic H of a VARMA process.
chi_A is the functional inverse of psi_A: closed form for the identity and the exponential decay,
complex Newton iteration with homotopy continuation otherwise. Close to the cut of psi the trapezoid
rule no longer resolves the poles of the integrand; a chi that only exists there is reported as an
evaluation error instead of returning a root of the discretization.
"""

import logging
import math
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, field_validator

from covshrink import config
from covshrink.datagen import spectral_density
from covshrink.exceptions import InversionError, TransformEvaluationError
from covshrink.model.processes import AutoModel, ExpDecayAuto, IdentityAuto

logger = logging.getLogger(__name__)

# memory budget of one quadrature block (complex entries)
_BLOCK_ENTRIES = 2**22


class TransformContext(BaseModel):
    """
    Transform evaluation settings for one auto-correlation model
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    model: AutoModel
    quadrature_points: int = config.QUADRATURE_POINTS
    newton_tol: float = config.NEWTON_TOL
    newton_max_iter: int = config.NEWTON_MAX_ITER

    @field_validator("quadrature_points")
    @classmethod
    def check_quadrature_points(cls, value: int) -> int:
        if value < 1024 or value & (value - 1):
            raise ValueError(f"quadrature_points must be a power of two >= 1024, got {value}")
        return value

    @field_validator("newton_tol")
    @classmethod
    def check_newton_tol(cls, value: float) -> float:
        if not 0 < value <= 1e-10:
            raise ValueError(f"newton_tol must be in (0, 1e-10], got {value}")
        return value

    @cached_property
    def density(self) -> NDArray[np.float64]:
        """
        spectral density on the quadrature grid, unit mean
        """
        return spectral_density(self.model, self.quadrature_points)


def _as_complex(values: ArrayLike) -> tuple[NDArray[np.complex128], bool]:
    array = np.asarray(values, dtype=np.complex128)
    return array.reshape(-1), array.ndim == 0


def _restore(values: NDArray[np.complex128], scalar: bool, shape: tuple) -> NDArray[np.complex128] | complex:
    return complex(values[0]) if scalar else values.reshape(shape)


def _quadrature(
    density: NDArray[np.float64], z: NDArray[np.complex128]
) -> tuple[NDArray[np.complex128], NDArray[np.complex128], NDArray[np.float64]]:
    """
    psi(z), psi'(z) and the distance min_omega |1 - z H(omega)| to the poles
    """
    psi_values = np.empty(z.shape, dtype=np.complex128)
    dpsi_values = np.empty(z.shape, dtype=np.complex128)
    distance = np.empty(z.shape, dtype=np.float64)
    block = max(1, _BLOCK_ENTRIES // density.size)
    for start in range(0, z.size, block):
        chunk = z[start : start + block]
        denominator = 1.0 - chunk[:, None] * density[None, :]
        distance[start : start + block] = np.min(np.abs(denominator), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            inverse = 1.0 / denominator
            psi_values[start : start + block] = np.mean(inverse, axis=1) - 1.0
            dpsi_values[start : start + block] = np.mean(density[None, :] * inverse**2, axis=1)
    return psi_values, dpsi_values, distance


def psi(ctx: TransformContext, z: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    psi-transform psi_A(z) = sum_k m_k z^k of the auto-correlation matrix
    :param ctx: transform context
    :param z: complex argument(s)
    :return: psi_A(z)
    """
    shape = np.shape(z)
    values, scalar = _as_complex(z)
    if isinstance(ctx.model, IdentityAuto):
        distance = np.abs(1.0 - values)
        result = values / np.where(distance == 0, 1.0, 1.0 - values)
    else:
        result, _, distance = _quadrature(ctx.density, values)
    if values.size and np.min(distance) < config.POLE_TOL:
        index = int(np.argmin(distance))
        raise TransformEvaluationError(complex(values[index]), float(distance[index]))
    return _restore(result, scalar, shape)


def dpsi(ctx: TransformContext, z: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    derivative of the psi-transform
    """
    shape = np.shape(z)
    values, scalar = _as_complex(z)
    if isinstance(ctx.model, IdentityAuto):
        distance = np.abs(1.0 - values)
        result = 1.0 / np.where(distance == 0, 1.0, 1.0 - values) ** 2
    else:
        _, result, distance = _quadrature(ctx.density, values)
    if values.size and np.min(distance) < config.POLE_TOL:
        index = int(np.argmin(distance))
        raise TransformEvaluationError(complex(values[index]), float(distance[index]))
    return _restore(result, scalar, shape)


def exp_decay_psi(model: ExpDecayAuto, z: ArrayLike) -> NDArray[np.complex128]:
    """
    closed form psi(z) = -z / (sqrt(z - r1) sqrt(z - r2)) of the exponential decay in the large-T limit,
    r1,2 = gamma -+ sqrt(gamma^2 - 1); analytic off the real segment [r1, r2] with psi(z) ~ z at 0
    """
    gamma = model.gamma
    root = math.sqrt(gamma**2 - 1.0)
    values = np.asarray(z, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -values / (np.sqrt(values - (gamma - root)) * np.sqrt(values - (gamma + root)))


def _chi_exp_decay(model: ExpDecayAuto, u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """
    chi(u) = 1 / (gamma + w), w^2 = gamma^2 - 1 + 1/u^2
    Both signs of w solve the squared equation, the branch is chosen per point as the one
    that inverts the closed form psi.
    """
    gamma = model.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.sqrt(gamma**2 - 1.0 + 1.0 / u**2)
        candidates = np.stack((1.0 / (gamma + w), 1.0 / (gamma - w)))
        residuals = np.abs(exp_decay_psi(model, candidates) - u[None, :])
    residuals = np.where(np.isfinite(residuals), residuals, np.inf)
    residuals = np.where(candidates.imag < -1e-14 * np.abs(candidates), residuals + 1.0, residuals)
    choice = np.argmin(residuals, axis=0)
    return np.take_along_axis(candidates, choice[None, :], axis=0)[0]


def _newton(
    ctx: TransformContext, u: NDArray[np.complex128], start: NDArray[np.complex128]
) -> tuple[NDArray[np.complex128], NDArray[np.float64]]:
    """
    vectorized Newton iteration on psi(z) = u, z kept in the closed upper half-plane
    :return: iterates and final residuals (inf where a pole was hit)
    """
    z = start.copy()
    residual = np.full(u.shape, np.inf)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(ctx.newton_max_iter):
        index = np.flatnonzero(active)
        if index.size == 0:
            break
        psi_values, dpsi_values, distance = _quadrature(ctx.density, z[index])
        difference = psi_values - u[index]
        current = np.where(distance < config.POLE_TOL, np.inf, np.abs(difference))
        residual[index] = current
        done = current < ctx.newton_tol
        active[index[done]] = False
        stuck = ~np.isfinite(current)
        active[index[stuck]] = False
        moving = ~(done | stuck)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = difference[moving] / dpsi_values[moving]
        previous = z[index[moving]]
        proposal = previous - step
        # never cross the real axis, where the poles of psi live
        proposal = np.where(proposal.imag < 0, proposal.real + 0.5j * previous.imag, proposal)
        z[index[moving]] = np.where(np.isfinite(proposal), proposal, previous)
    return z, residual


def _unresolved(ctx: TransformContext, z: NDArray[np.complex128], u: NDArray[np.complex128]) -> NDArray[np.bool_]:
    """
    points where the quadrature does not resolve psi: next to a node pole, or psi on every other node
    disagrees with psi on the full grid. Roots of the discretized psi there are artifacts of the poles
    on the cut [1 / max H, 1 / min H].
    """
    fine, _, distance = _quadrature(ctx.density, z)
    coarse, _, _ = _quadrature(ctx.density[::2], z)
    with np.errstate(invalid="ignore"):
        disagree = ~(np.abs(fine - coarse) <= config.RESOLUTION_TOL * (1.0 + np.abs(u)))
    return disagree | (distance < config.POLE_TOL)


def _solve(
    ctx: TransformContext, u: NDArray[np.complex128], start: NDArray[np.complex128]
) -> tuple[NDArray[np.complex128], NDArray[np.bool_], NDArray[np.bool_], NDArray[np.float64]]:
    """
    Newton from the given start, accepting only converged roots the quadrature resolves
    :return: iterates, accepted mask, unresolved mask and residuals
    """
    z, residual = _newton(ctx, u, start)
    unresolved = _unresolved(ctx, z, u)
    accepted = (residual < ctx.newton_tol) & ~unresolved
    return z, accepted, unresolved, residual


def _continuation(ctx: TransformContext, u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """
    follow chi along s * u for s from 0 to 1, all points at once; a point halves its step whenever
    Newton stalls or lands on an unresolved root
    """
    s = np.zeros(u.shape)
    z = np.zeros(u.shape, dtype=np.complex128)
    step = np.full(u.shape, config.CONTINUATION_STEP)
    near_cut = np.zeros(u.shape, dtype=bool)
    residual = np.full(u.shape, np.inf)
    running = np.ones(u.shape, dtype=bool)
    while np.any(running):
        index = np.flatnonzero(running)
        s_next = np.minimum(1.0, s[index] + step[index])
        target = s_next * u[index]
        with np.errstate(divide="ignore", invalid="ignore"):
            start = np.where(s[index] == 0.0, target / (1.0 + target), z[index])
        solution, accepted, unresolved, residuals = _solve(ctx, target, start)
        moved, stalled = index[accepted], index[~accepted]
        s[moved] = s_next[accepted]
        z[moved] = solution[accepted]
        step[moved] = np.minimum(2.0 * step[moved], config.CONTINUATION_MAX_STEP)
        step[stalled] /= 2.0
        near_cut[stalled] = unresolved[~accepted]
        residual[stalled] = residuals[~accepted]
        running = (s < 1.0) & (step >= config.CONTINUATION_MIN_STEP)
    failed = np.flatnonzero(s < 1.0)
    if failed.size:
        position = failed[0]
        logger.debug(f"Continuation reached s={s[position]:.4f} for u={complex(u[position])}")
        if near_cut[position]:
            _, _, distance = _quadrature(ctx.density, z[position : position + 1])
            raise TransformEvaluationError(complex(z[position]), float(distance[0]))
        raise InversionError(complex(u[position]), float(residual[position]), ctx.newton_max_iter)
    return z


def _chi_numeric(ctx: TransformContext, u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    result = np.zeros(u.shape, dtype=np.complex128)
    index = np.flatnonzero(u != 0)
    if index.size == 0:
        return result
    target = u[index]
    solution, accepted, _, _ = _solve(ctx, target, target / (1.0 + target))
    result[index] = solution
    failed = np.flatnonzero(~accepted)
    if failed.size:
        logger.debug(f"Newton from u / (1 + u) failed for {failed.size} of {index.size} points, using continuation")
        result[index[failed]] = _continuation(ctx, target[failed])
    return result


def chi(ctx: TransformContext, u: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    chi-transform, the functional inverse of psi
    Lower half-plane arguments follow from chi(conj u) = conj chi(u).
    :param ctx: transform context
    :param u: complex argument(s)
    :return: chi_A(u)
    :raises TransformEvaluationError: chi_A(u) lies on the cut where the quadrature cannot resolve psi
    :raises InversionError: Newton and continuation did not converge
    """
    shape = np.shape(u)
    values, scalar = _as_complex(u)
    lower = values.imag < 0
    upper = np.where(lower, np.conj(values), values)
    model = ctx.model
    if isinstance(model, IdentityAuto):
        result = upper / (upper + 1.0)
    elif isinstance(model, ExpDecayAuto):
        result = _chi_exp_decay(model, upper)
    else:
        result = _chi_numeric(ctx, upper)
    result = np.where(lower, np.conj(result), result)
    return _restore(result, scalar, shape)


def s_transform(ctx: TransformContext, u: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    S-transform S_A(u) = (1 + u) / u * chi_A(u)
    """
    shape = np.shape(u)
    values, scalar = _as_complex(u)
    if np.any(values == 0) or np.any(values == -1):
        raise ValueError("S-transform is undefined at u = 0 and u = -1")
    chi_values = np.asarray(chi(ctx, values), dtype=np.complex128).reshape(-1)
    return _restore((1.0 + values) / values * chi_values, scalar, shape)
