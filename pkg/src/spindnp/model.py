"""Two-spin (nucleus + electron) model in the microwave drive frame.

Basis ordering is ``|nucleus, electron>`` with ``index = 2*n + e`` and
``0 = up, 1 = down`` for each factor, so ``I_z = sz (x) 1`` and
``S_z = 1 (x) sz``. Levels 1..4 used in population read-outs are
``|uu>, |ud>, |du>, |dd>`` (nucleus first).

All frequencies are angular and stored in rad/s, times in seconds and
temperature in kelvin. Conversions from the MHz / ns user units happen in
:func:`SpinParams.from_user_units` only.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .linalg import CMatrix, kron

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

TWO_PI_MHZ = 2.0 * math.pi * 1e6  # rad/s per MHz of omega/2pi
ELECTRON_NUCLEAR_RATIO = 1e3

_FREQUENCY_FIELDS = ("omega_e", "omega_n", "omega_1", "omega_d", "omega_EL", "omega_NL")


@dataclass(frozen=True)
class SpinParams:
    """Physical inputs in canonical units (rad/s, s, K, rad).

    The microwave offset ``delta_omega = omega_e - omega_mu`` is stored
    directly; ``omega_mu`` is derived from it so the relation is exact.
    ``omega_e`` defaults to ``1e3 * omega_n``.
    """

    omega_n: float
    omega_e: float | None = None
    delta_omega: float = 0.0
    omega_1: float = 0.0
    omega_d: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    omega_EL: float = 0.0
    omega_NL: float = 0.0
    tau_c: float = 1e-9
    temperature: float = 65.0

    def __post_init__(self):
        if self.omega_e is None:
            object.__setattr__(self, "omega_e", ELECTRON_NUCLEAR_RATIO * self.omega_n)
        for name in _FREQUENCY_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("delta_omega", "theta", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (self.tau_c > 0 and math.isfinite(self.tau_c)):
            raise ValueError(f"tau_c must be > 0, got {self.tau_c!r}")
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be > 0, got {self.temperature!r}")

    @property
    def omega_mu(self) -> float:
        return self.omega_e - self.delta_omega

    @property
    def detuning(self) -> float:
        """Carrier detuning ``omega_mu - omega_e`` (= ``-delta_omega``)."""
        return -self.delta_omega

    def replace(self, **changes) -> "SpinParams":
        """Return a copy with fields overridden.

        Accepts ``omega_mu`` or ``detuning`` as aliases that set
        ``delta_omega``.
        """
        if "omega_mu" in changes:
            omega_e = changes.get("omega_e", self.omega_e)
            changes["delta_omega"] = omega_e - changes.pop("omega_mu")
        if "detuning" in changes:
            changes["delta_omega"] = -changes.pop("detuning")
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_user_units(
        cls,
        omega_n_mhz: float = 300.0,
        omega_e_mhz: float | None = None,
        detuning_mhz: float = 0.0,
        omega_1_mhz: float = 8.0,
        omega_d_mhz: float = 3.0,
        theta_rad: float = math.pi / 3,
        phi_rad: float = 0.0,
        omega_el_mhz: float = 10.0,
        omega_nl_mhz: float = 0.2,
        tau_c_ns: float = 1.0,
        temperature_k: float = 65.0,
    ) -> "SpinParams":
        """Build from omega/2pi in MHz, tau_c in ns. Defaults are the reference set."""
        return cls(
            omega_n=omega_n_mhz * TWO_PI_MHZ,
            omega_e=None if omega_e_mhz is None else omega_e_mhz * TWO_PI_MHZ,
            delta_omega=-detuning_mhz * TWO_PI_MHZ,
            omega_1=omega_1_mhz * TWO_PI_MHZ,
            omega_d=omega_d_mhz * TWO_PI_MHZ,
            theta=theta_rad,
            phi=phi_rad,
            omega_EL=omega_el_mhz * TWO_PI_MHZ,
            omega_NL=omega_nl_mhz * TWO_PI_MHZ,
            tau_c=tau_c_ns * 1e-9,
            temperature=temperature_k,
        )

    def at_transition(self, which: Literal["zq", "dq", "oe"]) -> "SpinParams":
        """Place the carrier on a transition.

        ``zq``: omega_mu = omega_e - omega_n (delta_omega = +omega_n);
        ``dq``: omega_mu = omega_e + omega_n (delta_omega = -omega_n);
        ``oe``: on the electron resonance.
        """
        offsets = {"zq": self.omega_n, "dq": -self.omega_n, "oe": 0.0}
        if which not in offsets:
            raise ValueError(f"unknown transition {which!r}")
        return self.replace(delta_omega=offsets[which])


def reference_params() -> SpinParams:
    """Reference parameter set with the carrier on the electron resonance."""
    return SpinParams.from_user_units()


# -- operators --------------------------------------------------------------

@dataclass(frozen=True)
class SpinOperators:
    """Spin-1/2 operators on the 4-dim nucleus (x) electron space."""

    Iz: CMatrix
    Ip: CMatrix
    Im: CMatrix
    Sz: CMatrix
    Sp: CMatrix
    Sm: CMatrix
    Sx: CMatrix
    Sy: CMatrix
    identity: CMatrix


def build_operators() -> SpinOperators:
    sz = np.diag([0.5, -0.5]).astype(np.complex128)
    sp = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    sm = sp.T.copy()
    one = np.eye(2, dtype=np.complex128)
    Sp = kron(one, sp)
    Sm = kron(one, sm)
    return SpinOperators(
        Iz=kron(sz, one),
        Ip=kron(sp, one),
        Im=kron(sm, one),
        Sz=kron(one, sz),
        Sp=Sp,
        Sm=Sm,
        Sx=0.5 * (Sp + Sm),
        Sy=-0.5j * (Sp - Sm),
        identity=np.eye(4, dtype=np.complex128),
    )


OPS = build_operators()

LEVEL_LABELS = ("|uu>", "|ud>", "|du>", "|dd>")


def dipolar_coefficient(theta: float, phi: float) -> complex:
    """C = -3/4 sin(2 theta) exp(-i phi)."""
    return -0.75 * math.sin(2.0 * theta) * complex(math.cos(phi), -math.sin(phi))


def dipolar_hamiltonian(p: SpinParams) -> CMatrix:
    c = dipolar_coefficient(p.theta, p.phi)
    return p.omega_d * (c * OPS.Ip @ OPS.Sz + c.conjugate() * OPS.Im @ OPS.Sz)


def effective_hamiltonian(p: SpinParams) -> CMatrix:
    """Static drive-frame H_eff = omega_1 S_x + dipolar term."""
    return p.omega_1 * OPS.Sx + dipolar_hamiltonian(p)


def shift_hamiltonian(p: SpinParams) -> CMatrix:
    """H_shift = delta_omega S_z + omega_n I_z."""
    return p.delta_omega * OPS.Sz + p.omega_n * OPS.Iz


@dataclass(frozen=True)
class FrequencyComponent:
    """One term ``operator * exp(i frequency t)`` of H_eff in the interaction frame."""

    operator: CMatrix
    frequency: float
    kind: Literal["drive", "dipolar"]
    label: str


def frequency_components(p: SpinParams) -> list[FrequencyComponent]:
    """Interaction-frame decomposition of H_eff, in Hermitian-conjugate pairs.

    Zero-amplitude pairs are dropped.
    """
    comps: list[FrequencyComponent] = []
    if p.omega_1 != 0.0:
        half = 0.5 * p.omega_1
        comps.append(FrequencyComponent(half * OPS.Sp, p.delta_omega, "drive", "S+"))
        comps.append(FrequencyComponent(half * OPS.Sm, -p.delta_omega, "drive", "S-"))
    c = dipolar_coefficient(p.theta, p.phi)
    if p.omega_d != 0.0 and c != 0:
        comps.append(FrequencyComponent(p.omega_d * c * OPS.Ip @ OPS.Sz, p.omega_n, "dipolar", "I+Sz"))
        comps.append(
            FrequencyComponent(p.omega_d * c.conjugate() * OPS.Im @ OPS.Sz, -p.omega_n, "dipolar", "I-Sz")
        )
    return comps


def interaction_frame_heff(p: SpinParams, t: float) -> CMatrix:
    """H_eff(t) rotated by exp(i H_shift t); used as a cross-check only."""
    comps = frequency_components(p)
    out = np.zeros((4, 4), dtype=np.complex128)
    for comp in comps:
        out += comp.operator * np.exp(1j * comp.frequency * t)
    return out


# -- thermal quantities -----------------------------------------------------

@dataclass(frozen=True)
class ThermalContext:
    beta_hbar_omega_e: float
    beta_hbar_omega_n: float
    Z_e: float
    Z_n: float


def thermal_context(p: SpinParams) -> ThermalContext:
    xe = HBAR * p.omega_e / (K_B * p.temperature)
    xn = HBAR * p.omega_n / (K_B * p.temperature)
    return ThermalContext(
        beta_hbar_omega_e=xe,
        beta_hbar_omega_n=xn,
        Z_e=2.0 * math.cosh(0.5 * xe),
        Z_n=2.0 * math.cosh(0.5 * xn),
    )


def thermal_state(p: SpinParams) -> CMatrix:
    """Gibbs state exp(-beta hbar (omega_e S_z + omega_n I_z)) / Z."""
    ctx = thermal_context(p)
    energies = np.real(np.diag(ctx.beta_hbar_omega_e * OPS.Sz + ctx.beta_hbar_omega_n * OPS.Iz))
    weights = np.exp(-(energies - energies.min()))
    return np.diag(weights / weights.sum()).astype(np.complex128)


@dataclass(frozen=True)
class DissipatorRates:
    """Lindblad rates (1/s). ``down`` relaxes toward the lower Zeeman level."""

    electron_down: float
    electron_up: float
    nuclear_down: float
    nuclear_up: float

    def min_nonzero(self) -> float | None:
        rates = [r for r in dataclasses.astuple(self) if r > 0]
        return min(rates) if rates else None


def dissipator_rates(p: SpinParams, ctx: ThermalContext | None = None) -> DissipatorRates:
    if ctx is None:
        ctx = thermal_context(p)
    ge = p.omega_EL ** 2 * p.tau_c
    gn = p.omega_NL ** 2 * p.tau_c
    return DissipatorRates(
        electron_down=ge * math.exp(0.5 * ctx.beta_hbar_omega_e) / ctx.Z_e,
        electron_up=ge * math.exp(-0.5 * ctx.beta_hbar_omega_e) / ctx.Z_e,
        nuclear_down=gn * math.exp(0.5 * ctx.beta_hbar_omega_n) / ctx.Z_n,
        nuclear_up=gn * math.exp(-0.5 * ctx.beta_hbar_omega_n) / ctx.Z_n,
    )
