"""Shot execution, statistics aggregation, and post-selection reports.

Shots are independent: shot i draws randomness from
``RngStream.for_shot(master_seed, shot_offset + i)``, and statistics
merge commutatively, so a run can be split across workers (or calls, via
`shot_offset` and `merge_statistics`) without changing the result.

A shot "passes" when every assertion creg (``__assert_*``) reads 0.
Post-selection keeps only passing shots; `compute_filter_report` compares
the error rate before and after that filter.

Internally two equivalent executors exist: a numpy kernel, and a compiled
plain-list kernel for circuits of at most _LIST_KERNEL_MAX_QUBITS qubits
where interpreter-level arithmetic beats numpy call overhead.  Both
follow the same randomness draw order, so results stay deterministic for
a fixed circuit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .lang import ASSERT_CREG_PREFIX, Circuit, GateInstr
from .measurement import (
    BRANCH_PROBABILITY_FLOOR,
    RngStream,
    _branch_probabilities,
    _measure_inplace,
)
from .noise import NoiseModel, _gate_noise_inplace, apply_readout_noise
from .state import NORM_TOLERANCE, InvariantViolationError, StateVector, _apply_gate_inplace

_LIST_KERNEL_MAX_QUBITS = 7
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ShotRecord:
    """Classical bits of one shot: creg values plus pass/fail per assertion."""

    creg_values: dict[str, int]
    assertion_outcomes: dict[str, str]


@dataclass(frozen=True)
class RunStatistics:
    """Aggregated shot outcomes.

    counts is keyed by the creg bitstring in declaration order (all
    cregs, assertion cregs included).
    """

    total_shots: int
    creg_names: tuple[str, ...]
    assertion_labels: tuple[str, ...]
    counts: dict[str, int]
    assertion_fail_counts: dict[str, int]

    @property
    def data_creg_names(self) -> tuple[str, ...]:
        return tuple(
            c for c in self.creg_names if not c.startswith(ASSERT_CREG_PREFIX)
        )

    def data_positions(self) -> tuple[int, ...]:
        return tuple(
            i for i, c in enumerate(self.creg_names)
            if not c.startswith(ASSERT_CREG_PREFIX)
        )

    def assertion_positions(self) -> tuple[int, ...]:
        return tuple(
            i for i, c in enumerate(self.creg_names)
            if c.startswith(ASSERT_CREG_PREFIX)
        )


@dataclass(frozen=True)
class FilterReport:
    """Error rates before and after discarding assertion-failing shots.

    filtered_error_rate and relative_reduction are None when undefined
    (no passing shots / zero raw error rate).
    """

    raw_error_rate: float
    filtered_error_rate: float | None
    relative_reduction: float | None
    kept_fraction: float


def _compile(circuit: Circuit):
    """Flatten instructions into (ops, creg names); ops are
    ("g", Gate) or ("m", qubit, creg slot)."""
    circuit.validate()
    if circuit.has_assertions():
        raise ValueError(
            "circuit still contains assertion statements; run lower_assertions first"
        )
    creg_names = circuit.creg_names
    creg_slot = {name: i for i, name in enumerate(creg_names)}
    ops = []
    for instr in circuit.instructions:
        if isinstance(instr, GateInstr):
            ops.append(("g", instr.gate))
        else:
            ops.append(("m", instr.qubit, creg_slot[instr.creg]))
    return ops, creg_names


def _run_ops_numpy(amps, num_qubits, ops, rng, model, bits) -> None:
    gate_noise = model is not None and model.gate_flip_p > 0.0
    readout_noise = model is not None and model.readout_flip_p > 0.0
    for op in ops:
        if op[0] == "g":
            gate = op[1]
            _apply_gate_inplace(amps, num_qubits, gate)
            if gate_noise:
                _gate_noise_inplace(amps, num_qubits, gate.qubits, model, rng)
        else:
            outcome, _ = _measure_inplace(amps, op[1], rng)
            if readout_noise:
                outcome = apply_readout_noise(outcome, model, rng)
            bits[op[2]] = outcome


def _qubit_tables(num_qubits: int):
    """Per-qubit (pairs, zeros, ones) index tables for the list kernel."""
    dim = 1 << num_qubits
    tables = []
    for q in range(num_qubits):
        mask = 1 << q
        zeros = [i for i in range(dim) if not i & mask]
        ones = [i | mask for i in zeros]
        tables.append((list(zip(zeros, ones)), zeros, ones))
    return tables


def _compile_list(ops, num_qubits: int, tables):
    """Specialize ops into index-table steps for the list kernel."""
    dim = 1 << num_qubits
    steps = []
    for op in ops:
        if op[0] == "g":
            gate = op[1]
            if gate.name == "cnot":
                control, target = gate.qubits
                cm, tm = 1 << control, 1 << target
                swaps = [
                    (i, i | tm) for i in range(dim) if (i & cm) and not (i & tm)
                ]
                steps.append(("cnot", swaps, gate.qubits))
            else:
                q = gate.qubits[0]
                pairs, _, ones = tables[q]
                table = ones if gate.name in ("z", "s") else pairs
                steps.append((gate.name, table, gate.qubits))
        else:
            _, q, slot = op
            _, zeros, ones = tables[q]
            steps.append(("m", slot, zeros, ones))
    return steps


def _list_pauli(st, pauli: str, tables, q: int) -> None:
    pairs, _, ones = tables[q]
    if pauli == "x":
        for i, j in pairs:
            st[i], st[j] = st[j], st[i]
    elif pauli == "y":
        for i, j in pairs:
            a0 = st[i]
            st[i] = st[j] * -1j
            st[j] = a0 * 1j
    else:
        for i in ones:
            st[i] = -st[i]


def _run_ops_list(st, steps, rng, model, bits, tables) -> None:
    # Mirrors _run_ops_numpy, including the randomness draw order.
    gate_p = model.gate_flip_p if model is not None else 0.0
    readout_p = model.readout_flip_p if model is not None else 0.0
    depolarizing = model.depolarizing if model is not None else False
    for step in steps:
        kind = step[0]
        if kind == "m":
            _, slot, zeros, ones = step
            p0 = 0.0
            for i in zeros:
                a = st[i]
                p0 += a.real * a.real + a.imag * a.imag
            p1 = 0.0
            for i in ones:
                a = st[i]
                p1 += a.real * a.real + a.imag * a.imag
            if abs(p0 + p1 - 1.0) > NORM_TOLERANCE:
                raise InvariantViolationError(
                    f"state norm drifted before measurement: sum |amp|^2 = {p0 + p1!r}"
                )
            outcome = 1 if rng.next_float() < p1 else 0
            branch = p1 if outcome else p0
            if branch <= 0.0:
                raise InvariantViolationError(
                    "measurement projected onto an empty branch"
                )
            scale = 1.0 / math.sqrt(branch)
            kill, keep = (zeros, ones) if outcome else (ones, zeros)
            for i in kill:
                st[i] = 0j
            for i in keep:
                st[i] *= scale
            if readout_p > 0.0 and rng.next_float() < readout_p:
                outcome ^= 1
            bits[slot] = outcome
            continue
        table = step[1]
        if kind == "h":
            for i, j in table:
                a0 = st[i]
                a1 = st[j]
                st[i] = (a0 + a1) * _INV_SQRT2
                st[j] = (a0 - a1) * _INV_SQRT2
        elif kind in ("x", "cnot"):
            for i, j in table:
                st[i], st[j] = st[j], st[i]
        elif kind == "y":
            for i, j in table:
                a0 = st[i]
                st[i] = st[j] * -1j
                st[j] = a0 * 1j
        elif kind == "z":
            for i in table:
                st[i] = -st[i]
        else:  # "s"
            for i in table:
                st[i] *= 1j
        if gate_p > 0.0:
            for q in step[2]:
                if rng.next_float() < gate_p:
                    if depolarizing:
                        r = rng.next_float()
                        pauli = "x" if r < 1.0 / 3.0 else ("y" if r < 2.0 / 3.0 else "z")
                    else:
                        pauli = "x"
                    _list_pauli(st, pauli, tables, q)


def _split_deterministic_prefix(ops, num_qubits, model):
    """Pre-apply the gates before the first measurement when they are pure.

    Without gate noise the pre-measurement evolution is deterministic, so
    it can run once and be copied per shot.  With gate noise every shot
    must replay it.
    """
    if model is not None and model.gate_flip_p > 0.0:
        prefix_len = 0
    else:
        prefix_len = 0
        while prefix_len < len(ops) and ops[prefix_len][0] == "g":
            prefix_len += 1
    base = np.zeros(1 << num_qubits, dtype=np.complex128)
    base[0] = 1.0
    for op in ops[:prefix_len]:
        _apply_gate_inplace(base, num_qubits, op[1])
    return base, ops[prefix_len:]


def run_shots(
    circuit: Circuit,
    shots: int,
    master_seed: int,
    model: NoiseModel | None = None,
    *,
    shot_offset: int = 0,
) -> RunStatistics:
    """Execute a lowered circuit `shots` times and aggregate the outcomes.

    Deterministic given (circuit, shots, master_seed, model, shot_offset).
    """
    if shots < 0:
        raise ValueError(f"shots must be non-negative, got {shots}")
    ops, creg_names = _compile(circuit)
    n = circuit.num_qubits
    base, rest = _split_deterministic_prefix(ops, n, model)

    use_list = n <= _LIST_KERNEL_MAX_QUBITS
    if use_list:
        tables = _qubit_tables(n)
        steps = _compile_list(rest, n, tables)
        base_list = base.tolist()
    else:
        buf = np.empty_like(base)

    assertion_labels = circuit.assertion_labels
    assert_slots = [
        (label, creg_names.index(ASSERT_CREG_PREFIX + label))
        for label in assertion_labels
    ]

    counts: dict[str, int] = {}
    fail_counts = {label: 0 for label in assertion_labels}
    bits = [0] * len(creg_names)
    for i in range(shots):
        rng = RngStream.for_shot(master_seed, shot_offset + i)
        if use_list:
            st = base_list.copy()
            _run_ops_list(st, steps, rng, model, bits, tables)
        else:
            np.copyto(buf, base)
            _run_ops_numpy(buf, n, rest, rng, model, bits)
        key = "".join("01"[b] for b in bits)
        counts[key] = counts.get(key, 0) + 1
        for label, slot in assert_slots:
            if bits[slot]:
                fail_counts[label] += 1
    return RunStatistics(
        total_shots=shots,
        creg_names=creg_names,
        assertion_labels=assertion_labels,
        counts=counts,
        assertion_fail_counts=fail_counts,
    )


def run_single(
    circuit: Circuit,
    master_seed: int,
    model: NoiseModel | None = None,
    *,
    shot_index: int = 0,
) -> tuple[ShotRecord, StateVector]:
    """Execute one shot and return its record plus the final state.

    Reproduces exactly shot `shot_index` of a run_shots call with the
    same master seed.
    """
    ops, creg_names = _compile(circuit)
    n = circuit.num_qubits
    bits = [0] * len(creg_names)
    rng = RngStream.for_shot(master_seed, shot_index)
    if n <= _LIST_KERNEL_MAX_QUBITS:
        tables = _qubit_tables(n)
        steps = _compile_list(ops, n, tables)
        st = [0j] * (1 << n)
        st[0] = 1.0 + 0j
        _run_ops_list(st, steps, rng, model, bits, tables)
        amps = np.array(st, dtype=np.complex128)
    else:
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        _run_ops_numpy(amps, n, ops, rng, model, bits)
    creg_values = dict(zip(creg_names, bits))
    outcomes = {
        label: "fail" if creg_values[ASSERT_CREG_PREFIX + label] else "pass"
        for label in circuit.assertion_labels
    }
    return ShotRecord(creg_values, outcomes), StateVector(n, amps, copy=False)


def merge_statistics(a: RunStatistics, b: RunStatistics) -> RunStatistics:
    """Combine two runs of the same circuit; aggregation is commutative."""
    if a.creg_names != b.creg_names or a.assertion_labels != b.assertion_labels:
        raise ValueError("cannot merge statistics from different circuits")
    counts = dict(a.counts)
    for key, cnt in b.counts.items():
        counts[key] = counts.get(key, 0) + cnt
    fails = {
        label: a.assertion_fail_counts[label] + b.assertion_fail_counts[label]
        for label in a.assertion_labels
    }
    return RunStatistics(
        total_shots=a.total_shots + b.total_shots,
        creg_names=a.creg_names,
        assertion_labels=a.assertion_labels,
        counts=counts,
        assertion_fail_counts=fails,
    )


def exact_distribution(circuit: Circuit) -> dict[str, float]:
    """Exact noiseless outcome distribution over creg bitstrings.

    Enumerates measurement branches recursively with their analytic
    probabilities instead of sampling; branches below
    BRANCH_PROBABILITY_FLOOR are dropped.
    """
    ops, creg_names = _compile(circuit)
    n = circuit.num_qubits
    results: dict[str, float] = {}
    bits = [0] * len(creg_names)

    def walk(amps: np.ndarray, start: int, prob: float) -> None:
        i = start
        while i < len(ops):
            op = ops[i]
            if op[0] == "g":
                _apply_gate_inplace(amps, n, op[1])
                i += 1
                continue
            q, slot = op[1], op[2]
            p0, p1 = _branch_probabilities(amps, q)
            for outcome, p in ((0, p0), (1, p1)):
                if p < BRANCH_PROBABILITY_FLOOR:
                    continue
                branch = amps.copy()
                view = branch.reshape(-1, 2, 1 << q)
                view[:, 1 - outcome, :] = 0.0
                branch *= 1.0 / np.sqrt(p)
                bits[slot] = outcome
                walk(branch, i + 1, prob * p)
            return
        key = "".join("01"[b] for b in bits)
        results[key] = results.get(key, 0.0) + prob

    initial = np.zeros(1 << n, dtype=np.complex128)
    initial[0] = 1.0
    walk(initial, 0, 1.0)
    return results


def compute_filter_report(
    stats: RunStatistics, expected: Callable[[str], bool]
) -> FilterReport:
    """Raw vs post-selection-filtered error rates.

    `expected` judges the data bitstring (non-assertion cregs, declaration
    order); the filter keeps shots whose assertion cregs all read 0.
    """
    total = stats.total_shots
    if total <= 0:
        raise ValueError("cannot report on empty statistics")
    data_pos = stats.data_positions()
    assert_pos = stats.assertion_positions()
    errors = passing = passing_errors = 0
    for bitstring, count in stats.counts.items():
        ok = expected("".join(bitstring[i] for i in data_pos))
        passes = all(bitstring[i] == "0" for i in assert_pos)
        if not ok:
            errors += count
        if passes:
            passing += count
            if not ok:
                passing_errors += count
    raw = errors / total
    kept = passing / total
    if passing == 0:
        filtered = None
        reduction = None
    else:
        filtered = passing_errors / passing
        reduction = (raw - filtered) / raw if raw > 0 else None
    return FilterReport(
        raw_error_rate=raw,
        filtered_error_rate=filtered,
        relative_reduction=reduction,
        kept_fraction=kept,
    )


def _pct(value: float) -> str:
    return f"{value * 100:.4g}%"


def _row_meaning(
    bitstring: str,
    stats: RunStatistics,
    expected: Iterable[str] | None,
) -> str:
    assert_pos = stats.assertion_positions()
    parts = []
    if assert_pos:
        failed = [
            stats.creg_names[i][len(ASSERT_CREG_PREFIX):]
            for i in assert_pos
            if bitstring[i] == "1"
        ]
        parts.append(
            "assertion error (" + ", ".join(failed) + ")" if failed
            else "no assertion error"
        )
    tag = ""
    if expected is not None:
        data = "".join(bitstring[i] for i in stats.data_positions())
        ok = data in set(expected)
        parts.append("expected data" if ok else "unexpected data")
        if assert_pos:
            failed_any = any(bitstring[i] == "1" for i in assert_pos)
            if failed_any and ok:
                tag = " (potential false positive)"
            elif not failed_any and not ok:
                tag = " (false negative)"
    return ", ".join(parts) + tag if parts else ""


def _render_table(
    stats: RunStatistics,
    report: FilterReport | None,
    expected: Iterable[str] | None,
    meta: Mapping | None,
) -> str:
    lines = []
    if meta:
        for key in sorted(meta):
            lines.append(f"# {key}: {meta[key]}")
    lines.append(f"shots: {stats.total_shots}")
    if stats.creg_names:
        lines.append("cregs: " + " ".join(stats.creg_names))
        width = max(len("outcome"), len(stats.creg_names))
        lines.append(f"{'outcome':<{width}}  {'count':>10}  {'%':>8}  meaning")
        for bitstring in sorted(stats.counts):
            count = stats.counts[bitstring]
            pct = _pct(count / stats.total_shots) if stats.total_shots else "-"
            meaning = _row_meaning(bitstring, stats, expected)
            lines.append(f"{bitstring:<{width}}  {count:>10}  {pct:>8}  {meaning}")
    if stats.assertion_labels:
        lines.append("assertion failures:")
        for label in stats.assertion_labels:
            count = stats.assertion_fail_counts[label]
            rate = _pct(count / stats.total_shots) if stats.total_shots else "-"
            lines.append(f"  {label}: {count} ({rate})")
    if report is not None:
        lines.append("post-selection filter:")
        lines.append(f"  raw error rate:      {_pct(report.raw_error_rate)}")
        if report.filtered_error_rate is None:
            lines.append("  filtered error rate: undefined (no passing shots)")
        else:
            lines.append(f"  filtered error rate: {_pct(report.filtered_error_rate)}")
        if report.relative_reduction is not None:
            lines.append(f"  relative reduction:  {_pct(report.relative_reduction)}")
        lines.append(f"  kept fraction:       {_pct(report.kept_fraction)}")
    return "\n".join(lines) + "\n"


def _render_json(
    stats: RunStatistics,
    report: FilterReport | None,
    expected: Iterable[str] | None,
    meta: Mapping | None,
) -> str:
    total = stats.total_shots
    doc = {
        "total_shots": total,
        "cregs": list(stats.creg_names),
        "data_cregs": list(stats.data_creg_names),
        "assertion_labels": list(stats.assertion_labels),
        "counts": dict(sorted(stats.counts.items())),
        "rates": {k: v / total for k, v in sorted(stats.counts.items())} if total else {},
        "assertion_fail_counts": dict(stats.assertion_fail_counts),
        "expected": sorted(expected) if expected is not None else None,
        "filter": None,
        "meta": dict(meta) if meta else {},
    }
    if report is not None:
        doc["filter"] = {
            "raw_error_rate": report.raw_error_rate,
            "filtered_error_rate": report.filtered_error_rate,
            "relative_reduction": report.relative_reduction,
            "kept_fraction": report.kept_fraction,
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_report(
    stats: RunStatistics,
    report: FilterReport | None = None,
    format: str = "table",
    expected: Iterable[str] | None = None,
    meta: Mapping | None = None,
) -> str:
    """Render statistics as an aligned table or a deterministic JSON document."""
    if format == "table":
        return _render_table(stats, report, expected, meta)
    if format == "json":
        return _render_json(stats, report, expected, meta)
    raise ValueError(f"unknown report format {format!r}")
