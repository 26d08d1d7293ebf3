"""Steady states of a drive-frame Liouvillian and the derived read-outs.

Two independent routes are provided: the null vector of the generator
(primary) and long-time propagation from the Gibbs state through a
squaring cascade of ``expm(L dt)`` (oracle and fallback).

Polarizations are reported as ``p(lower Zeeman level) - p(upper)``, so
both are positive at thermal equilibrium. The enhancement is the ratio
of steady-state to equilibrium nuclear polarization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .engine import Liouvillian
from .linalg import (
    CMatrix,
    DegenerateSteadyStateError,
    expm,
    herm_eig,
    null_vector,
    unvec,
    vec,
)
from .model import OPS, dissipator_rates, thermal_state

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10


class SteadyStateError(RuntimeError):
    status = "non-converged"


class NonConvergenceError(SteadyStateError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NonPhysicalStateError(SteadyStateError):
    """Steady state has a negative eigenvalue beyond tolerance."""


@dataclass(frozen=True)
class SteadyState:
    rho: CMatrix
    residual: float
    method: Literal["null-space", "propagation"]
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Observables:
    enhancement: float
    electron_polarization: float
    nuclear_polarization: float
    populations_x100: tuple[float, float, float, float]


def _normalize(rho: CMatrix) -> CMatrix:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _check_positive(rho: CMatrix, tol: float) -> float:
    min_eig = float(herm_eig(rho)[0][0])
    if min_eig < -tol:
        raise NonPhysicalStateError(f"steady state has eigenvalue {min_eig:.3e} < -{tol:g}")
    return min_eig


def steady_by_nullspace(L: Liouvillian, tol: float = 1e-12) -> SteadyState:
    """Null vector of L, Hermitian-symmetrized and trace-normalized."""
    v, raw_residual, null_dim = null_vector(L.matrix, tol)
    rho = unvec(v)
    tr = np.trace(rho)
    if abs(tr) == 0.0:
        raise NonPhysicalStateError("null vector is traceless")
    rho = _normalize(rho / tr)
    min_eig = _check_positive(rho, POSITIVITY_TOL)
    residual = float(np.linalg.norm(L.matrix @ vec(rho)))
    return SteadyState(
        rho=rho,
        residual=residual,
        method="null-space",
        info={"null_dimension": null_dim, "raw_residual": raw_residual, "min_eigenvalue": min_eig},
    )


def default_t_max(L: Liouvillian) -> float:
    """100 / (slowest nonzero dissipator rate), or 1 s without dissipation."""
    if L.flags.include_dissipators:
        slowest = dissipator_rates(L.params).min_nonzero()
        if slowest:
            return 100.0 / slowest
    return 1.0


def steady_by_propagation(
    L: Liouvillian,
    t_max: float | None = None,
    tol: float = 1e-15,
    accept_tol: float = 1e-9,
    max_squarings: int = 200,
) -> SteadyState:
    """Propagate the Gibbs state with a doubling time step until ``t_max``.

    Stops early once ``|L rho| <= tol |L|``. At ``t_max`` the state is
    accepted if ``|L rho| <= accept_tol |L|``.
    """
    mat = L.matrix
    rho0 = thermal_state(L.params)
    norm = float(np.linalg.norm(mat, 2))
    if norm == 0.0:
        return SteadyState(rho=rho0, residual=0.0, method="propagation", info={"squarings": 0, "time": 0.0})
    if t_max is None:
        t_max = default_t_max(L)

    dt = 1.0 / norm
    step = expm(mat * dt)
    v = vec(rho0)
    t = 0.0
    squarings = 0
    residual = float(np.linalg.norm(mat @ v))
    while True:
        v = step @ v
        t += dt
        residual = float(np.linalg.norm(mat @ v))
        if residual <= tol * norm or t >= t_max:
            break
        if squarings >= max_squarings:
            break
        step = step @ step
        dt *= 2.0
        squarings += 1

    rho = _normalize(unvec(v))
    residual = float(np.linalg.norm(mat @ vec(rho)))
    if residual > accept_tol * norm:
        raise NonConvergenceError(
            f"propagation reached t={t:.3e} s with residual {residual:.3e}", residual
        )
    min_eig = _check_positive(rho, POSITIVITY_TOL)
    return SteadyState(
        rho=rho,
        residual=residual,
        method="propagation",
        info={"squarings": squarings, "time": t, "t_max": t_max, "min_eigenvalue": min_eig},
    )


def solve_steady_state(
    L: Liouvillian,
    method: Literal["null-space", "propagation"] = "null-space",
    tol: float = 1e-12,
) -> SteadyState:
    """Null-space solve with propagation fallback on degeneracy."""
    if method == "propagation":
        return steady_by_propagation(L)
    try:
        return steady_by_nullspace(L, tol)
    except DegenerateSteadyStateError as exc:
        logger.info("null-space solve degenerate (%s); falling back to propagation", exc)
        try:
            ss = steady_by_propagation(L)
        except SteadyStateError as fallback_exc:
            fallback_exc.status = "degenerate"
            raise
        ss.info["fallback_from"] = "null-space"
        ss.info["null_dimension"] = exc.null_dimension
        return ss


def electron_polarization(rho: CMatrix) -> float:
    return float(-2.0 * np.trace(rho @ OPS.Sz).real)


def nuclear_polarization(rho: CMatrix) -> float:
    return float(-2.0 * np.trace(rho @ OPS.Iz).real)


def observables(ss: SteadyState | CMatrix, rho_eq: CMatrix) -> Observables:
    rho = ss.rho if isinstance(ss, SteadyState) else np.asarray(ss)
    p_eq = nuclear_polarization(rho_eq)
    if abs(p_eq) < 1e-300:
        raise ZeroDivisionError("equilibrium nuclear polarization vanishes")
    p_ss = nuclear_polarization(rho)
    pops = tuple(float(x) for x in 100.0 * np.real(np.diag(rho)))
    return Observables(
        enhancement=p_ss / p_eq,
        electron_polarization=electron_polarization(rho),
        nuclear_polarization=p_ss,
        populations_x100=pops,
    )
