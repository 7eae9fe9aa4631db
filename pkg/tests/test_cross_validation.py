"""Randomized cross-validation against the dense-matrix reference.

Seeded random circuits (gates, mid-circuit measurements, assertions) are
generated as source text, pushed through parse -> lower -> simulate, and
checked against the independent matrix oracle.  This is the wide net
behind the hand-picked corpus cases.
"""

import random

import pytest

from qassert import (
    exact_distribution,
    lower_assertions,
    parse,
    pretty_print,
    run_shots,
)

from helpers import binomial_4sigma
from oracles import brute_force_distribution, l1_distance

GATES_1Q = ["h", "x", "y", "z", "s"]


def random_source(rng: random.Random, num_qubits: int, length: int,
                  allow_assertions: bool = True) -> str:
    lines = [f"qubits {num_qubits}"]
    measured = 0
    assertions = 0
    for _ in range(length):
        roll = rng.random()
        if roll < 0.55:
            lines.append(f"{rng.choice(GATES_1Q)} {rng.randrange(num_qubits)}")
        elif roll < 0.75 and num_qubits >= 2:
            c, t = rng.sample(range(num_qubits), 2)
            lines.append(f"cnot {c} {t}")
        elif roll < 0.85 and allow_assertions and assertions < 2:
            kind = rng.randrange(3)
            if kind == 0:
                lines.append(
                    f"assert_classical {rng.randrange(num_qubits)} == {rng.randrange(2)}"
                )
            elif kind == 1 and num_qubits >= 2:
                k = rng.randint(2, num_qubits)
                targets = rng.sample(range(num_qubits), k)
                lines.append(
                    "assert_entangled "
                    + " ".join(map(str, targets))
                    + f" parity {rng.randrange(2)}"
                )
            else:
                lines.append(f"assert_superposition {rng.randrange(num_qubits)}")
            assertions += 1
        else:
            lines.append(f"measure {rng.randrange(num_qubits)} -> c{measured}")
            measured += 1
    # Guarantee at least one recorded bit so distributions are non-trivial.
    lines.append(f"measure 0 -> c{measured}")
    return "\n".join(lines) + "\n"


@pytest.mark.parametrize("case", range(30))
def test_random_circuits_match_matrix_oracle(case):
    rng = random.Random(1000 + case)
    source = random_source(rng, num_qubits=rng.randint(1, 3), length=rng.randint(1, 8))
    lowered = lower_assertions(parse(source))
    if lowered.num_qubits > 4:
        pytest.skip("matrix oracle kept to <= 4 qubits")
    fast = exact_distribution(lowered)
    reference = brute_force_distribution(lowered)
    assert l1_distance(fast, reference) < 1e-10, source


@pytest.mark.parametrize("case", range(30))
def test_random_circuits_round_trip(case):
    rng = random.Random(2000 + case)
    source = random_source(rng, num_qubits=rng.randint(1, 5), length=rng.randint(0, 12))
    circuit = parse(source)
    assert parse(pretty_print(circuit)) == circuit
    lowered = lower_assertions(circuit)
    assert parse(pretty_print(lowered)) == lowered


@pytest.mark.parametrize("case", range(5))
def test_random_circuit_sampling_tracks_exact_distribution(case):
    rng = random.Random(3000 + case)
    source = random_source(rng, num_qubits=2, length=6)
    lowered = lower_assertions(parse(source))
    dist = exact_distribution(lowered)
    shots = 20_000
    stats = run_shots(lowered, shots, 500 + case)
    assert sum(stats.counts.values()) == shots
    for key, p in dist.items():
        freq = stats.counts.get(key, 0) / shots
        assert abs(freq - p) < binomial_4sigma(p, shots) + 1e-9, (source, key)
    # No outcomes outside the analytic support.
    assert set(stats.counts) <= set(dist)


def test_parser_never_crashes_on_garbage():
    from qassert import ParseError

    rng = random.Random(4)
    alphabet = "qubits measure assert_classical -> == 01 h x # \n\t abc _"
    for _ in range(300):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(80)))
        try:
            parse(text)
        except ParseError:
            pass  # the only acceptable failure mode


def test_larger_register_numpy_path():
    # 12 qubits stays on the numpy executor end to end.
    lines = ["qubits 12"] + [f"h {q}" for q in range(12)] + ["cnot 0 11",
             "measure 0 -> a", "measure 11 -> b"]
    circuit = parse("\n".join(lines) + "\n")
    stats = run_shots(circuit, 500, 1)
    assert sum(stats.counts.values()) == 500
    assert set(stats.counts) <= {"00", "01", "10", "11"}
