import numpy as np
import pytest

from spindnp.model import SpinParams

ACCEPTANCE_LINES: list[str] = []


def random_params(rng: np.random.Generator) -> SpinParams:
    """Draw within +-50% of the reference set, detuning anywhere in the sweep window."""
    f = lambda: rng.uniform(0.5, 1.5)  # noqa: E731
    return SpinParams.from_user_units(
        omega_n_mhz=300.0 * f(),
        omega_1_mhz=8.0 * f(),
        omega_d_mhz=3.0 * f(),
        theta_rad=np.pi / 3 * f(),
        phi_rad=rng.uniform(0, 2 * np.pi),
        omega_el_mhz=10.0 * f(),
        omega_nl_mhz=0.2 * f(),
        tau_c_ns=1.0 * f(),
        temperature_k=65.0 * f(),
        detuning_mhz=rng.uniform(-350.0, 350.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def trace_norm(a) -> float:
    return float(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T))).sum())


def superop_from_map(fn, dim: int = 4) -> np.ndarray:
    """Column-stacking superoperator of a linear map, built basis element by basis element."""
    cols = []
    for j in range(dim):
        for i in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            cols.append(fn(e).reshape(-1, order="F"))
    return np.array(cols).T


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
