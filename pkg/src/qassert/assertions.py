"""Ancilla-based runtime assertion gadgets and their analytic oracles.

Each gadget allocates one fresh ancilla qubit, entangles it with the
target qubits through a short gate sequence, and measures the ancilla at
the end; a result of 1 signals an assertion error.  Because only the
ancilla is measured, a target state that satisfies the assertion is left
untouched (the ancilla disentangles), which is what makes the checks safe
to run mid-circuit.

Three checks are provided:

* classical value: CNOT the target into an ancilla prepared as the
  expected bit; the ancilla reads target XOR expected.
* entanglement (GHZ-type correlation): CNOT every target into the
  ancilla, padding to an even CNOT count; the ancilla accumulates the
  targets' parity.  With an odd target count the last target's CNOT is
  duplicated and cancels itself, so the check covers the parity of all
  targets but the last - a component differing only on that qubit is not
  detected.  See the README for this soundness gap.
* uniform superposition: checks the target against |+>.  On failure the
  target is still forced to an equal-magnitude superposition, so the
  check is destructive for states that do not satisfy it.

The oracles below predict the ancilla statistics and the post-measurement
target state analytically, straight from the input amplitudes; tests pit
them against gate-level simulation of the same gadgets.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .measurement import BRANCH_PROBABILITY_FLOOR
from .state import Gate, StateVector, apply_gate, cnot, h, ket, tensor

ANCILLA = -1
"""Placeholder operand marking the gadget's ancilla before it has an index."""


class AssertionKind(Enum):
    CLASSICAL_EQUALS = "classical"
    ENTANGLED = "entangled"
    UNIFORM_SUPERPOSITION = "superposition"


@dataclass(frozen=True)
class AssertionSpec:
    """What is asserted about which qubits.

    `expected` is the asserted bit for CLASSICAL_EQUALS, the asserted
    parity for ENTANGLED (0 checks a|0...0> + b|1...1>, 1 the odd-parity
    analogue), and None for UNIFORM_SUPERPOSITION (always asserts |+>).
    """

    kind: AssertionKind
    targets: tuple[int, ...]
    expected: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"assertion targets must be distinct: {self.targets}")
        if self.kind is AssertionKind.ENTANGLED:
            if len(self.targets) < 2:
                raise ValueError("entanglement assertion needs at least 2 targets")
            if self.expected not in (0, 1):
                raise ValueError("entanglement assertion needs a parity bit of 0 or 1")
        else:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind.value} assertion takes exactly 1 target")
            if self.kind is AssertionKind.CLASSICAL_EQUALS:
                if self.expected not in (0, 1):
                    raise ValueError("classical assertion needs an expected bit of 0 or 1")
            elif self.expected is not None:
                raise ValueError("superposition assertion takes no expected value")


@dataclass(frozen=True)
class AssertionGadget:
    """Ancilla preparation plus the gate sequence implementing one check.

    Gates reference the ancilla through the ANCILLA placeholder; bind()
    substitutes the concrete index once the ancilla is allocated.  The
    ancilla measurement is implicit at the end: 1 means assertion error.
    """

    ancilla_init: int
    gates: tuple[Gate, ...]

    def bind(self, ancilla: int) -> tuple[Gate, ...]:
        if ancilla < 0:
            raise ValueError(f"ancilla index must be non-negative, got {ancilla}")
        return tuple(
            Gate(g.name, tuple(ancilla if q == ANCILLA else q for q in g.qubits))
            for g in self.gates
        )

    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.name == "cnot")


def build_classical_assertion(q: int, expected: int) -> AssertionGadget:
    """Check that qubit q equals the classical bit `expected`.

    The ancilla is prepared as `expected` and receives CNOT(q -> ancilla),
    so it reads q XOR expected: 0 on success.  On a superposed input the
    ancilla measurement projects q onto a classical state, and the error
    probability equals the amplitude weight of the wrong branch.
    """
    spec = AssertionSpec(AssertionKind.CLASSICAL_EQUALS, (q,), expected)
    return AssertionGadget(ancilla_init=spec.expected, gates=(cnot(q, ANCILLA),))


def build_entanglement_assertion(targets, parity: int) -> AssertionGadget:
    """Check GHZ-type correlation (XOR of the targets) against `parity`.

    One CNOT per target feeds the ancilla; an odd target count gets the
    last CNOT duplicated so the total is even and the ancilla disentangles
    from a valid input.
    """
    spec = AssertionSpec(AssertionKind.ENTANGLED, tuple(targets), parity)
    gates = [cnot(t, ANCILLA) for t in spec.targets]
    if len(spec.targets) % 2:
        gates.append(cnot(spec.targets[-1], ANCILLA))
    return AssertionGadget(ancilla_init=spec.expected, gates=tuple(gates))


def build_superposition_assertion(q: int) -> AssertionGadget:
    """Check that qubit q is in the uniform superposition |+>."""
    return AssertionGadget(
        ancilla_init=0,
        gates=(cnot(q, ANCILLA), h(q), h(ANCILLA), cnot(q, ANCILLA)),
    )


def build_gadget(spec: AssertionSpec) -> AssertionGadget:
    if spec.kind is AssertionKind.CLASSICAL_EQUALS:
        return build_classical_assertion(spec.targets[0], spec.expected)
    if spec.kind is AssertionKind.ENTANGLED:
        return build_entanglement_assertion(spec.targets, spec.expected)
    return build_superposition_assertion(spec.targets[0])


def apply_gadget(state: StateVector, gadget: AssertionGadget) -> StateVector:
    """Run a gadget's gates against `state` with a fresh ancilla appended.

    The ancilla becomes qubit ``state.num_qubits`` of the returned joint
    pre-measurement state; measuring it (1 = error) completes the check.
    """
    anc = state.num_qubits
    joint = tensor(state, ket("1" if gadget.ancilla_init else "0"))
    for gate in gadget.bind(anc):
        joint = apply_gate(joint, gate)
    return joint


def _check_targets(spec: AssertionSpec, state: StateVector) -> None:
    for t in spec.targets:
        if not 0 <= t < state.num_qubits:
            raise ValueError(
                f"assertion target {t} out of range for {state.num_qubits}-qubit state"
            )


def _error_mask(spec: AssertionSpec, num_qubits: int) -> np.ndarray:
    """Boolean mask over basis indices whose components trip the assertion."""
    idx = np.arange(1 << num_qubits)
    if spec.kind is AssertionKind.CLASSICAL_EQUALS:
        return ((idx >> spec.targets[0]) & 1) != spec.expected
    # ENTANGLED: with an odd target count the duplicated CNOT cancels, so
    # the measured parity covers all targets but the last.
    effective = spec.targets if len(spec.targets) % 2 == 0 else spec.targets[:-1]
    parity = np.zeros(idx.shape, dtype=np.int64)
    for t in effective:
        parity ^= (idx >> t) & 1
    return parity != spec.expected


def predicted_error_probability(spec: AssertionSpec, state: StateVector) -> float:
    """Exact probability that the gadget's ancilla measures 1 on `state`.

    Computed directly from the input amplitudes, independently of any gate
    simulation: classical and entanglement checks sum the amplitude weight
    of the offending components; the superposition check evaluates
    |a - b|^2 / (|a + b|^2 + |a - b|^2), which is half the weight of the
    difference between the target's 0- and 1-branches.
    """
    _check_targets(spec, state)
    amps = state.amps
    if spec.kind is AssertionKind.UNIFORM_SUPERPOSITION:
        view = amps.reshape(-1, 2, 1 << spec.targets[0])
        diff = view[:, 0, :] - view[:, 1, :]
        return 0.5 * float(np.sum(diff.real**2 + diff.imag**2))
    mask = _error_mask(spec, state.num_qubits)
    weights = amps.real**2 + amps.imag**2
    return float(np.sum(weights[mask]))


def predicted_pass_state(spec: AssertionSpec, state: StateVector) -> StateVector | None:
    """Post-measurement state of the input register given the ancilla read 0.

    Spectator qubits ride along unchanged.  Returns None when the pass
    branch carries probability below BRANCH_PROBABILITY_FLOOR.
    """
    _check_targets(spec, state)
    if spec.kind is AssertionKind.UNIFORM_SUPERPOSITION:
        q = spec.targets[0]
        new = state.amps.copy()
        view = new.reshape(-1, 2, 1 << q)
        mean = (view[:, 0, :] + view[:, 1, :]) / 2.0
        prob = 2.0 * float(np.sum(mean.real**2 + mean.imag**2))
        if prob < BRANCH_PROBABILITY_FLOOR:
            return None
        view[:, 0, :] = mean
        view[:, 1, :] = mean
    else:
        mask = _error_mask(spec, state.num_qubits)
        new = state.amps.copy()
        new[mask] = 0.0
        prob = float(np.sum(new.real**2 + new.imag**2))
        if prob < BRANCH_PROBABILITY_FLOOR:
            return None
    new *= 1.0 / np.sqrt(prob)
    return StateVector(state.num_qubits, new, copy=False)
