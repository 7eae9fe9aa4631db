"""Shared test utilities."""

from __future__ import annotations

import numpy as np

from qassert import StateVector, basis_index, from_amplitudes, states_equal_up_to_global_phase


def sv(terms: dict[str, complex]) -> StateVector:
    """State from {ket label: amplitude}; labels read qubit 0 first."""
    n = len(next(iter(terms)))
    amps = np.zeros(1 << n, dtype=np.complex128)
    for label, coef in terms.items():
        amps[basis_index(label)] = coef
    return from_amplitudes(amps)


def assert_same_state(actual: StateVector, expected: StateVector, tol: float = 1e-12):
    """Equality up to global phase, with a readable failure message."""
    assert states_equal_up_to_global_phase(actual, expected, tol), (
        f"states differ beyond tol={tol}:\n"
        f"  actual:   {actual.amps}\n"
        f"  expected: {expected.amps}"
    )


def binomial_4sigma(p: float, n: int) -> float:
    """4-sigma half-width for an empirical frequency of a Bernoulli(p) mean."""
    return 4.0 * np.sqrt(p * (1.0 - p) / n)
