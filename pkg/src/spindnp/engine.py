"""Assembly of the time-independent drive-frame Liouvillian.

The generator has three groups of terms, each switchable through
:class:`TermFlags`:

* first order: ``-i [H_shift + H_eff, rho]``
* second order: ``-sum J(w_k) [A_j, [A_k, rho]]`` over secular pairs of
  interaction-frame components, with ``J(w) = tau_c / (1 + i w tau_c)``
* environment: electron and nuclear Lindblad dissipators.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .linalg import CMatrix, commutator_super, lindblad_super
from .model import (
    OPS,
    FrequencyComponent,
    SpinParams,
    ThermalContext,
    dissipator_rates,
    effective_hamiltonian,
    frequency_components,
    shift_hamiltonian,
    thermal_context,
)

SUPER_DIM = 16


@dataclass(frozen=True)
class TermFlags:
    include_first_order: bool = True
    include_second_order_dipolar: bool = True
    include_second_order_drive: bool = True
    include_cross_pairs: bool = False
    include_dissipators: bool = True

    # short names used by the CLI and in metadata
    _ALIASES = {
        "first_order": "include_first_order",
        "second_order_dipolar": "include_second_order_dipolar",
        "dipolar": "include_second_order_dipolar",
        "second_order_drive": "include_second_order_drive",
        "did": "include_second_order_drive",
        "cross_pairs": "include_cross_pairs",
        "dissipators": "include_dissipators",
    }

    @classmethod
    def full(cls) -> "TermFlags":
        return cls()

    @classmethod
    def none(cls) -> "TermFlags":
        return cls(False, False, False, False, False)

    @classmethod
    def from_names(cls, names) -> "TermFlags":
        """Flags with exactly the named terms switched on.

        ``"full"`` expands to the default set.
        """
        if isinstance(names, str):
            names = [n for n in (s.strip() for s in names.split(",")) if n]
        on = {}
        for name in names:
            if name == "full":
                on.update({f.name: getattr(cls.full(), f.name) for f in fields(cls)})
                continue
            key = cls._ALIASES.get(name, name)
            if key not in {f.name for f in fields(cls)}:
                raise ValueError(f"unknown term flag {name!r}")
            on[key] = True
        return cls(**{f.name: on.get(f.name, False) for f in fields(cls)})

    def names(self) -> list[str]:
        return [f.name.removeprefix("include_") for f in fields(self) if getattr(self, f.name)]

    def to_dict(self) -> dict[str, bool]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ablation presets: coherent + environment, then with the drive second-order term
FIRST_ORDER_ONLY = TermFlags(True, False, False, False, True)
FIRST_ORDER_WITH_DRIVE = TermFlags(True, False, True, False, True)


@dataclass(frozen=True)
class Liouvillian:
    matrix: CMatrix
    flags: TermFlags
    params: SpinParams


def kernel_weight(tau_c: float, omega: float) -> complex:
    """Integral of exp(-tau/tau_c) exp(-i omega tau) over tau in [0, inf)."""
    if tau_c <= 0:
        raise ValueError("tau_c must be positive")
    return tau_c / (1.0 + 1j * omega * tau_c)


_CONJUGATE_LABEL = {"S+": "S-", "S-": "S+", "I+Sz": "I-Sz", "I-Sz": "I+Sz"}


def _is_auto_pair(a: FrequencyComponent, b: FrequencyComponent) -> bool:
    return _CONJUGATE_LABEL.get(a.label) == b.label


def secular_pairs(
    components: list[FrequencyComponent], flags: TermFlags, sec_tol: float = 0.0
) -> list[tuple[FrequencyComponent, FrequencyComponent]]:
    """(outer, inner) component pairs retained by the secular rule and the flags."""
    pairs = []
    for outer in components:
        for inner in components:
            if abs(outer.frequency + inner.frequency) > sec_tol:
                continue
            if _is_auto_pair(outer, inner):
                wanted = (
                    flags.include_second_order_drive
                    if inner.kind == "drive"
                    else flags.include_second_order_dipolar
                )
            else:
                wanted = flags.include_cross_pairs
            if wanted:
                pairs.append((outer, inner))
    return pairs


def second_order_superoperator(
    components: list[FrequencyComponent],
    tau_c: float,
    flags: TermFlags = TermFlags(),
    sec_tol: float = 0.0,
) -> CMatrix:
    out = np.zeros((SUPER_DIM, SUPER_DIM), dtype=np.complex128)
    for outer, inner in secular_pairs(components, flags, sec_tol):
        weight = kernel_weight(tau_c, inner.frequency)
        out -= weight * (commutator_super(outer.operator) @ commutator_super(inner.operator))
    return out


def dissipator_superoperator(p: SpinParams, ctx: ThermalContext | None = None) -> CMatrix:
    rates = dissipator_rates(p, ctx)
    return (
        rates.electron_down * lindblad_super(OPS.Sm)
        + rates.electron_up * lindblad_super(OPS.Sp)
        + rates.nuclear_down * lindblad_super(OPS.Im)
        + rates.nuclear_up * lindblad_super(OPS.Ip)
    )


def first_order_superoperator(p: SpinParams) -> CMatrix:
    return -1j * commutator_super(shift_hamiltonian(p) + effective_hamiltonian(p))


def assemble(p: SpinParams, flags: TermFlags = TermFlags(), sec_tol: float = 0.0) -> Liouvillian:
    """Drive-frame generator with the selected terms."""
    mat = np.zeros((SUPER_DIM, SUPER_DIM), dtype=np.complex128)
    if flags.include_first_order:
        mat += first_order_superoperator(p)
    if (
        flags.include_second_order_dipolar
        or flags.include_second_order_drive
        or flags.include_cross_pairs
    ):
        mat += second_order_superoperator(frequency_components(p), p.tau_c, flags, sec_tol)
    if flags.include_dissipators:
        mat += dissipator_superoperator(p, thermal_context(p))
    return Liouvillian(matrix=mat, flags=flags, params=p)
