"""Stochastic Pauli error injection emulating noisy hardware.

Errors are applied as random unitaries on the statevector (trajectory
style): after each gate, every touched qubit is flipped with probability
gate_flip_p (or hit with a uniformly chosen X/Y/Z when depolarizing is
set), and recorded measurement bits are flipped with readout_flip_p.

Draw-order contract: a uniform is consumed per touched qubit only when
gate_flip_p > 0, one extra uniform when a depolarizing error fires, and
one per recorded bit only when readout_flip_p > 0.  A model with all
probabilities zero therefore consumes no randomness and is bit-identical
to running without a model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measurement import RngStream
from .state import Gate, StateVector, _apply_gate_inplace


@dataclass(frozen=True)
class NoiseModel:
    gate_flip_p: float = 0.0
    readout_flip_p: float = 0.0
    depolarizing: bool = False

    def __post_init__(self):
        for name in ("gate_flip_p", "readout_flip_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p!r}")


def _gate_noise_inplace(
    amps: np.ndarray,
    num_qubits: int,
    touched: Sequence[int],
    model: NoiseModel,
    rng: RngStream,
) -> None:
    p = model.gate_flip_p
    if p <= 0.0:
        return
    for q in touched:
        if rng.next_float() < p:
            if model.depolarizing:
                r = rng.next_float()
                name = "x" if r < 1.0 / 3.0 else ("y" if r < 2.0 / 3.0 else "z")
            else:
                name = "x"
            _apply_gate_inplace(amps, num_qubits, Gate(name, (q,)))


def apply_gate_noise(
    state: StateVector, touched: Sequence[int], model: NoiseModel, rng: RngStream
) -> StateVector:
    """Independently corrupt each touched qubit with probability gate_flip_p."""
    for q in touched:
        if not 0 <= q < state.num_qubits:
            raise ValueError(
                f"qubit {q} out of range for {state.num_qubits}-qubit state"
            )
    amps = state.amps.copy()
    _gate_noise_inplace(amps, state.num_qubits, touched, model, rng)
    return StateVector(state.num_qubits, amps, copy=False)


def apply_readout_noise(bit: int, model: NoiseModel, rng: RngStream) -> int:
    """Flip a recorded measurement bit with probability readout_flip_p."""
    p = model.readout_flip_p
    if p > 0.0 and rng.next_float() < p:
        return bit ^ 1
    return bit
