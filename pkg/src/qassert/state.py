"""Dense statevector core: states, gates, and unitary gate application.

Bit convention
--------------
Qubit 0 is the least-significant bit of a basis index: basis state
``|i>`` assigns qubit ``q`` the bit ``(i >> q) & 1``.  Ket labels read
left to right starting at qubit 0, so ``ket("10")`` places qubit 0 in
|1> and qubit 1 in |0> (basis index 1).

Global phase is never canonicalized; compare states with
:func:`states_equal_up_to_global_phase` rather than element-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-10

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

GATE_ARITY = {"h": 1, "x": 1, "y": 1, "z": 1, "s": 1, "cnot": 2}


class InvariantViolationError(RuntimeError):
    """An internal simulator invariant (normalization, finiteness) broke."""


@dataclass(frozen=True)
class Gate:
    """A named gate with concrete qubit operands (control first for cnot)."""

    name: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        arity = GATE_ARITY.get(self.name)
        if arity is None:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.qubits) != arity:
            raise ValueError(
                f"{self.name} expects {arity} operand(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} operands must be distinct: {self.qubits}")


def h(q: int) -> Gate:
    return Gate("h", (q,))


def x(q: int) -> Gate:
    return Gate("x", (q,))


def y(q: int) -> Gate:
    return Gate("y", (q,))


def z(q: int) -> Gate:
    return Gate("z", (q,))


def s(q: int) -> Gate:
    return Gate("s", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (control, target))


class StateVector:
    """Immutable n-qubit pure state holding ``2**num_qubits`` amplitudes.

    The amplitude array is write-protected after construction; operations
    return fresh states, so values can be shared freely across shots.
    """

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps, *, copy: bool = True):
        if not isinstance(num_qubits, int) or not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(
                f"num_qubits must be an integer in [1, {MAX_QUBITS}], got {num_qubits!r}"
            )
        arr = np.array(amps, dtype=np.complex128, copy=copy)
        if arr.shape != (1 << num_qubits,):
            raise ValueError(
                f"expected {1 << num_qubits} amplitudes for {num_qubits} qubits, "
                f"got shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise InvariantViolationError("non-finite amplitude in state vector")
        norm_sq = float(np.sum(arr.real**2 + arr.imag**2))
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"state is not normalized: sum |amp|^2 = {norm_sq!r}")
        arr.setflags(write=False)
        self.num_qubits = num_qubits
        self.amps = arr

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def probabilities(self) -> np.ndarray:
        """|amplitude|**2 for each basis index."""
        return self.amps.real**2 + self.amps.imag**2

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


def new_basis_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    """Computational-basis state |basis_index> on num_qubits qubits."""
    if not isinstance(num_qubits, int) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be an integer in [1, {MAX_QUBITS}], got {num_qubits!r}"
        )
    dim = 1 << num_qubits
    if not isinstance(basis_index, int) or not 0 <= basis_index < dim:
        raise ValueError(
            f"basis_index must be an integer in [0, {dim}), got {basis_index!r}"
        )
    amps = np.zeros(dim, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps, copy=False)


def from_amplitudes(amps, *, normalize: bool = False) -> StateVector:
    """Build a state from a full amplitude array (length must be a power of two)."""
    arr = np.asarray(amps, dtype=np.complex128)
    size = arr.size
    if size < 2 or size & (size - 1):
        raise ValueError(f"amplitude count must be a power of two >= 2, got {size}")
    if normalize:
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        arr = arr / norm
    return StateVector(size.bit_length() - 1, arr)


_KET_CHARS = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (_INV_SQRT2, _INV_SQRT2),
    "-": (_INV_SQRT2, -_INV_SQRT2),
}


def basis_index(label: str) -> int:
    """Basis index of a classical ket label; leftmost character is qubit 0."""
    idx = 0
    for pos, ch in enumerate(label):
        if ch == "1":
            idx |= 1 << pos
        elif ch != "0":
            raise ValueError(f"classical ket labels use only 0/1, got {label!r}")
    return idx


def ket(label: str) -> StateVector:
    """Product state from a ket label over the characters 0, 1, +, -.

    The leftmost character is qubit 0 (the least-significant index bit),
    matching this package's ket-printing order.
    """
    if not label:
        raise ValueError("empty ket label")
    amps = np.array([1.0], dtype=np.complex128)
    for ch in label:
        try:
            pair = _KET_CHARS[ch]
        except KeyError:
            raise ValueError(f"unknown ket character {ch!r} in {label!r}") from None
        amps = np.kron(np.array(pair, dtype=np.complex128), amps)
    return StateVector(len(label), amps, copy=False)


def tensor(first: StateVector, second: StateVector) -> StateVector:
    """Joint state with `second`'s qubits appended above `first`'s.

    Qubits of `first` keep their indices; qubit q of `second` becomes
    qubit ``first.num_qubits + q``.
    """
    n = first.num_qubits + second.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"tensor product would exceed {MAX_QUBITS} qubits")
    return StateVector(n, np.kron(second.amps, first.amps), copy=False)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply a gate's unitary, returning a new state.

    Raises InvariantViolationError if the result drifts off unit norm by
    more than NORM_TOLERANCE; a gate application must never do that.
    """
    n = state.num_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    amps = state.amps.copy()
    _apply_gate_inplace(amps, n, gate)
    norm_sq = float(np.sum(amps.real**2 + amps.imag**2))
    if abs(norm_sq - 1.0) > NORM_TOLERANCE:
        raise InvariantViolationError(
            f"gate {gate.name} broke normalization: sum |amp|^2 = {norm_sq!r}"
        )
    return StateVector(n, amps, copy=False)


def _apply_h(amps: np.ndarray, n: int, q: int) -> None:
    view = amps.reshape(-1, 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = (a0 + a1) * _INV_SQRT2
    view[:, 1, :] = (a0 - a1) * _INV_SQRT2


def _apply_x(amps: np.ndarray, n: int, q: int) -> None:
    view = amps.reshape(-1, 2, 1 << q)
    tmp = view[:, 0, :].copy()
    view[:, 0, :] = view[:, 1, :]
    view[:, 1, :] = tmp


def _apply_y(amps: np.ndarray, n: int, q: int) -> None:
    view = amps.reshape(-1, 2, 1 << q)
    a0 = view[:, 0, :].copy()
    view[:, 0, :] = view[:, 1, :] * -1j
    view[:, 1, :] = a0 * 1j


def _apply_z(amps: np.ndarray, n: int, q: int) -> None:
    view = amps.reshape(-1, 2, 1 << q)
    view[:, 1, :] *= -1.0


def _apply_s(amps: np.ndarray, n: int, q: int) -> None:
    view = amps.reshape(-1, 2, 1 << q)
    view[:, 1, :] *= 1j


def _apply_cnot(amps: np.ndarray, n: int, control: int, target: int) -> None:
    # Swap the target-bit slices within the control=1 subspace.
    psi = amps.reshape((2,) * n)
    c_axis = n - 1 - control
    t_axis = n - 1 - target
    sel = [slice(None)] * n
    sel[c_axis] = 1
    sub = psi[tuple(sel)]
    sub_t_axis = t_axis - 1 if c_axis < t_axis else t_axis
    sl0 = [slice(None)] * (n - 1)
    sl1 = [slice(None)] * (n - 1)
    sl0[sub_t_axis] = 0
    sl1[sub_t_axis] = 1
    tmp = sub[tuple(sl0)].copy()
    sub[tuple(sl0)] = sub[tuple(sl1)]
    sub[tuple(sl1)] = tmp


_KERNELS = {
    "h": _apply_h,
    "x": _apply_x,
    "y": _apply_y,
    "z": _apply_z,
    "s": _apply_s,
    "cnot": _apply_cnot,
}


def _apply_gate_inplace(amps: np.ndarray, n: int, gate: Gate) -> None:
    """In-place kernel shared by apply_gate and the shot runner."""
    _KERNELS[gate.name](amps, n, *gate.qubits)


def states_equal_up_to_global_phase(
    s1: StateVector, s2: StateVector, tol: float = 1e-12
) -> bool:
    """True iff s1 = c * s2 element-wise within tol for some unit scalar c."""
    if s1.num_qubits != s2.num_qubits:
        raise ValueError(
            f"qubit counts differ: {s1.num_qubits} vs {s2.num_qubits}"
        )
    k = int(np.argmax(np.abs(s2.amps)))
    phase = s1.amps[k] * np.conj(s2.amps[k])
    mag = abs(phase)
    c = phase / mag if mag > 0.0 else 1.0
    return bool(np.max(np.abs(s1.amps - c * s2.amps)) <= tol)


def fidelity(s1: StateVector, s2: StateVector) -> float:
    """Squared overlap |<s1|s2>|^2; 1 means the same physical state."""
    if s1.num_qubits != s2.num_qubits:
        raise ValueError(
            f"qubit counts differ: {s1.num_qubits} vs {s2.num_qubits}"
        )
    return float(abs(np.vdot(s1.amps, s2.amps)) ** 2)


def factor_out_qubit(
    state: StateVector, q: int, tol: float = 1e-12
) -> tuple[int, StateVector]:
    """Strip qubit q when it sits in a definite classical state.

    Returns (bit, state of the remaining qubits).  Raises ValueError when
    more than `tol` probability mass lies in the other branch, i.e. the
    qubit is still in superposition or entangled.
    """
    n = state.num_qubits
    if not 0 <= q < n:
        raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    if n == 1:
        raise ValueError("cannot factor the only qubit out of a 1-qubit state")
    view = state.amps.reshape(-1, 2, 1 << q)
    w0 = float(np.sum(view[:, 0, :].real ** 2 + view[:, 0, :].imag ** 2))
    w1 = float(np.sum(view[:, 1, :].real ** 2 + view[:, 1, :].imag ** 2))
    bit = 1 if w1 > w0 else 0
    if min(w0, w1) > tol:
        raise ValueError(
            f"qubit {q} is not in a definite classical state "
            f"(branch weights {w0!r}, {w1!r})"
        )
    sub = view[:, bit, :].reshape(-1) / np.sqrt(w1 if bit else w0)
    return bit, StateVector(n - 1, sub, copy=False)


def format_state(state: StateVector, precision: int = 4, cutoff: float = 1e-9) -> str:
    """Human-readable ket expansion, e.g. ``0.7071|00> + 0.7071|11>``."""
    n = state.num_qubits
    terms = []
    for i, amp in enumerate(state.amps):
        if abs(amp) <= cutoff:
            continue
        label = "".join(str((i >> p) & 1) for p in range(n))
        re_, im = amp.real, amp.imag
        if abs(im) <= cutoff:
            coef = f"{re_:.{precision}g}"
        elif abs(re_) <= cutoff:
            coef = f"{im:.{precision}g}j"
        else:
            coef = f"({re_:.{precision}g}{im:+.{precision}g}j)"
        terms.append(f"{coef}|{label}>")
    return " + ".join(terms) if terms else "0"
