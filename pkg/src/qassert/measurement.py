"""Computational-basis measurement: Born-rule sampling, projection, post-selection.

Measurement projects the state onto the observed branch and renormalizes
by the branch's true probability mass, so the projected state is exact.
Branches with probability below BRANCH_PROBABILITY_FLOOR are treated as
impossible rather than renormalized numerical dust.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import NORM_TOLERANCE, InvariantViolationError, StateVector

BRANCH_PROBABILITY_FLOOR = 1e-12

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(value: int) -> int:
    """splitmix64 finalizer; avalanches all 64 bits of the input."""
    value &= _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return value ^ (value >> 31)


class RngStream:
    """Deterministic counter-based random stream (splitmix64).

    The same seed always yields the same sample sequence.  Per-shot
    streams come from :meth:`for_shot`, which mixes (master_seed,
    shot_index), so shots are reproducible regardless of execution order.
    """

    __slots__ = ("seed", "_counter")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._counter = self.seed

    def next_u64(self) -> int:
        self._counter = (self._counter + _GOLDEN) & _MASK64
        return _mix64(self._counter)

    def next_float(self) -> float:
        """Uniform float64 in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    @classmethod
    def for_shot(cls, master_seed: int, shot_index: int) -> RngStream:
        return cls(_mix64((master_seed & _MASK64) ^ _mix64(shot_index)))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


@dataclass(frozen=True)
class MeasurementRecord:
    """One measurement outcome plus its Born-rule probability at that moment."""

    qubit: int
    outcome: int
    probability_of_outcome: float


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.num_qubits:
        raise ValueError(f"qubit {q} out of range for {state.num_qubits}-qubit state")


def _branch_probabilities(amps: np.ndarray, q: int) -> tuple[float, float]:
    view = amps.reshape(-1, 2, 1 << q)
    b0 = view[:, 0, :]
    b1 = view[:, 1, :]
    p0 = float(np.sum(b0.real**2 + b0.imag**2))
    p1 = float(np.sum(b1.real**2 + b1.imag**2))
    return p0, p1


def prob_one(state: StateVector, q: int) -> float:
    """Born-rule probability that measuring qubit q yields 1."""
    _check_qubit(state, q)
    return _branch_probabilities(state.amps, q)[1]


def prob_zero(state: StateVector, q: int) -> float:
    """Born-rule probability that measuring qubit q yields 0."""
    _check_qubit(state, q)
    return _branch_probabilities(state.amps, q)[0]


def _measure_inplace(amps: np.ndarray, q: int, rng: RngStream) -> tuple[int, float]:
    """Sample qubit q, project amps in place, and renormalize.

    Returns (outcome, branch probability).  Shared with the shot runner;
    the sampling convention is: outcome 1 iff the next uniform < P(1).
    """
    p0, p1 = _branch_probabilities(amps, q)
    if abs(p0 + p1 - 1.0) > NORM_TOLERANCE:
        raise InvariantViolationError(
            f"state norm drifted before measurement: sum |amp|^2 = {p0 + p1!r}"
        )
    outcome = 1 if rng.next_float() < p1 else 0
    branch = p1 if outcome else p0
    if branch <= 0.0:
        raise InvariantViolationError("measurement projected onto an empty branch")
    view = amps.reshape(-1, 2, 1 << q)
    view[:, 1 - outcome, :] = 0.0
    amps *= 1.0 / np.sqrt(branch)
    return outcome, branch


def measure(
    state: StateVector, q: int, rng: RngStream
) -> tuple[MeasurementRecord, StateVector]:
    """Measure qubit q, returning the record and the projected state."""
    _check_qubit(state, q)
    amps = state.amps.copy()
    outcome, branch = _measure_inplace(amps, q, rng)
    record = MeasurementRecord(qubit=q, outcome=outcome, probability_of_outcome=branch)
    return record, StateVector(state.num_qubits, amps, copy=False)


def sample_measurements(
    state: StateVector, q: int, shots: int, master_seed: int, *, shot_offset: int = 0
) -> dict[int, int]:
    """Outcome counts from measuring qubit q of a freshly prepared `state`,
    once per shot.

    Shot i draws from ``RngStream.for_shot(master_seed, shot_offset + i)``
    and applies the same sampling rule as :func:`measure`; preparation is
    deterministic, so only the Born draw varies between shots.
    """
    _check_qubit(state, q)
    if shots < 0:
        raise ValueError(f"shots must be non-negative, got {shots}")
    p0, p1 = _branch_probabilities(state.amps, q)
    if abs(p0 + p1 - 1.0) > NORM_TOLERANCE:
        raise InvariantViolationError(
            f"state norm drifted before measurement: sum |amp|^2 = {p0 + p1!r}"
        )
    ones = 0
    for i in range(shots):
        if RngStream.for_shot(master_seed, shot_offset + i).next_float() < p1:
            ones += 1
    return {0: shots - ones, 1: ones}


def postselect(state: StateVector, q: int, bit: int) -> StateVector | None:
    """Project qubit q onto `bit` and renormalize, ignoring the Born dice.

    Returns None when the branch carries probability below
    BRANCH_PROBABILITY_FLOOR (the branch is impossible).
    """
    _check_qubit(state, q)
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    probs = _branch_probabilities(state.amps, q)
    branch = probs[bit]
    if branch < BRANCH_PROBABILITY_FLOOR:
        return None
    amps = state.amps.copy()
    view = amps.reshape(-1, 2, 1 << q)
    view[:, 1 - bit, :] = 0.0
    amps *= 1.0 / np.sqrt(branch)
    return StateVector(state.num_qubits, amps, copy=False)
