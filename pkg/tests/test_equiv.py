"""Probabilistic branching bisimilarity, minimization, label matching."""

import random

import numpy as np
import pytest

from cqpkit import qstate
from cqpkit.equiv import (
    EquivalenceVerdict,
    bisimulation_partition,
    branching_bisim,
    check_equivalence,
    labels_match,
    minimize,
    plts_isomorphic,
)
from cqpkit.semantics import (
    DEFAULT_TEST_QUBITS,
    PLTS,
    TAU,
    CommLabel,
    PLTSEdge,
    PLTSState,
    ProbLabel,
    QubitSlot,
    explore,
    initial_configuration,
)
from support import SQ2, insert_tau, random_plts


def dm_of(amps) -> qstate.DensityMatrix:
    amps = np.asarray(amps, dtype=complex)
    return qstate.DensityMatrix(1, np.outer(amps, amps.conj()))


def out_qubit(channel, dm, name="b"):
    return CommLabel("out", channel, name, (QubitSlot(0),), dm)


def chain(*labels, kinds=None) -> PLTS:
    """A linear PLTS initial -> ... -> terminal over the given labels."""
    states = [PLTSState(i, "nondet") for i in range(len(labels) + 1)]
    states[-1].terminal = True
    edges = [PLTSEdge(i, lbl, i + 1) for i, lbl in enumerate(labels)]
    return PLTS(states, edges, 0)


# ---------------------------------------------------------------------------
# Label matching
# ---------------------------------------------------------------------------

def test_qubit_outputs_match_by_density_matrix():
    psi = np.array([0.6, 0.8j])
    direct = out_qubit(1, dm_of(psi))
    teleported = out_qubit(1, dm_of(psi * np.exp(1j * 0.7)))  # same up to phase
    assert labels_match(direct, teleported)


def test_classical_values_must_agree():
    a = CommLabel("out", 0, "c", (0,))
    b = CommLabel("out", 0, "c", (1,))
    assert not labels_match(a, b)
    assert labels_match(a, CommLabel("out", 0, "c", (0,)))


def test_orthogonal_qubit_payloads_differ():
    zero = out_qubit(1, dm_of([1, 0]))
    plus = out_qubit(1, dm_of([SQ2, SQ2]))
    assert not labels_match(zero, plus)


def test_tau_matches_only_tau():
    assert labels_match(TAU, TAU)
    assert not labels_match(TAU, CommLabel("out", 0, "c", (0,)))


def test_explicit_density_matrix_override():
    a = out_qubit(0, dm_of([1, 0]))
    b = out_qubit(0, dm_of([0, 1]))
    assert not labels_match(a, b)
    same = dm_of([SQ2, SQ2])
    assert labels_match(a, b, q1=same, q2=same)


# ---------------------------------------------------------------------------
# The flagship equivalence
# ---------------------------------------------------------------------------

def test_teleport_equals_identity(teleport_program, identity_program):
    program_t, sigs_t = teleport_program
    program_i, sigs_i = identity_program
    verdict = check_equivalence(
        program_t, "Teleport", program_i, "Identity", sigs_t, sigs_i
    )
    assert verdict == EquivalenceVerdict(True)


def test_any_plts_equivalent_to_itself(teleport_program):
    program, signatures = teleport_program
    config = initial_configuration(program, "Teleport", signatures=signatures)
    plts = explore(config, alphabet={0: [(DEFAULT_TEST_QUBITS[0],)]})
    assert branching_bisim(plts, plts).equivalent


def test_coin_vs_deterministic_probability_witness(coin_program):
    program, signatures = coin_program
    verdict = check_equivalence(
        program, "Coin", program, "DetZero", signatures, signatures
    )
    assert not verdict.equivalent
    assert verdict.witness.kind == "probability"
    low, high = sorted(
        [verdict.witness.left_probability, verdict.witness.right_probability]
    )
    assert abs(low - 0.5) <= 1e-9 and abs(high - 1.0) <= 1e-9


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------

def test_minimize_compresses_tau_chain():
    plts = chain(TAU, TAU, TAU)
    small = minimize(plts)
    assert len(small.states) == 2
    assert branching_bisim(plts, small).equivalent


def test_minimized_teleport_and_identity_have_same_shape(
    teleport_program, identity_program
):
    program_t, sigs_t = teleport_program
    program_i, sigs_i = identity_program
    alphabet = {0: [(DEFAULT_TEST_QUBITS[2],)]}
    plts_t = explore(
        initial_configuration(program_t, "Teleport", signatures=sigs_t), alphabet=alphabet
    )
    plts_i = explore(
        initial_configuration(
            program_i, "Identity", external_channels=["a", "b"], signatures=sigs_i
        ),
        alphabet=alphabet,
    )
    assert plts_isomorphic(minimize(plts_t), minimize(plts_i))


def test_minimize_idempotent_on_generated_pool():
    rng = random.Random(31)
    for _ in range(20):
        plts = random_plts(rng)
        small = minimize(plts)
        again = minimize(small)
        assert plts_isomorphic(small, again)


def test_every_plts_equivalent_to_its_minimization(teleport_program):
    rng = random.Random(8)
    pool = [random_plts(rng) for _ in range(10)]
    program, signatures = teleport_program
    pool.append(
        explore(
            initial_configuration(program, "Teleport", signatures=signatures),
            alphabet={0: [(DEFAULT_TEST_QUBITS[1],)]},
        )
    )
    for plts in pool:
        assert branching_bisim(plts, minimize(plts)).equivalent


# ---------------------------------------------------------------------------
# Relation properties on generated systems
# ---------------------------------------------------------------------------

def test_bisimilarity_is_an_equivalence_relation():
    rng = random.Random(12345)
    pool = [random_plts(rng) for _ in range(30)]
    for plts in pool:
        assert branching_bisim(plts, plts).equivalent  # reflexive
    results = {}
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            forward = branching_bisim(pool[i], pool[j]).equivalent
            backward = branching_bisim(pool[j], pool[i]).equivalent
            assert forward == backward  # symmetric
            results[(i, j)] = forward
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            for k in range(j + 1, len(pool)):
                if results[(i, j)] and results[(j, k)]:
                    assert results[(i, k)]  # transitive


def test_tau_prefix_insertion_preserves_equivalence():
    # Insertion points are live nondeterministic states: a terminated
    # process is observably stopped, and probabilistic states are the
    # encoding of a single measurement transition, not configurations.
    rng = random.Random(54321)
    checked = 0
    while checked < 20:
        plts = random_plts(rng)
        live = [s.id for s in plts.states if not s.terminal and s.kind == "nondet"]
        if not live:
            continue
        target = rng.choice(live)
        padded = insert_tau(plts, target)
        assert branching_bisim(plts, padded).equivalent, (
            f"tau before state {target} was not inert"
        )
        checked += 1


def test_probability_perturbation_breaks_equivalence():
    """Shifting >= 1e-3 of mass between observably different branches must
    be detected; the branches carry different classical outputs."""
    rng = random.Random(999)

    def coin_like(p: float, pad_left: int, pad_right: int) -> PLTS:
        states = [PLTSState(0, "nondet"), PLTSState(1, "prob")]
        edges = [PLTSEdge(0, TAU, 1)]

        def branch(prob, value, pad):
            entry = len(states)
            states.append(PLTSState(entry, "nondet"))
            edges.append(PLTSEdge(1, ProbLabel(prob), entry))
            current = entry
            for _ in range(pad):
                nxt = len(states)
                states.append(PLTSState(nxt, "nondet"))
                edges.append(PLTSEdge(current, TAU, nxt))
                current = nxt
            final = len(states)
            states.append(PLTSState(final, "nondet", True))
            edges.append(PLTSEdge(current, CommLabel("out", 0, "c", (value,)), final))

        branch(p, 0, pad_left)
        branch(1.0 - p, 1, pad_right)
        return PLTS(states, edges, 0)

    for _ in range(10):
        p = rng.uniform(0.2, 0.8)
        pads = (rng.randint(0, 2), rng.randint(0, 2))
        base = coin_like(p, *pads)
        same = coin_like(p, rng.randint(0, 2), rng.randint(0, 2))
        bumped = coin_like(p + 1e-3, *pads)
        assert branching_bisim(base, same).equivalent
        assert not branching_bisim(base, bumped).equivalent


def test_orthogonal_output_state_breaks_equivalence():
    original = chain(out_qubit(0, dm_of([1, 0])))
    swapped = chain(out_qubit(0, dm_of([0, 1])))
    verdict = branching_bisim(original, swapped)
    assert not verdict.equivalent


def test_near_identical_probabilities_within_tolerance_match():
    a = PLTS(
        [PLTSState(0, "nondet"), PLTSState(1, "prob"), PLTSState(2, "nondet", True),
         PLTSState(3, "nondet", True)],
        [
            PLTSEdge(0, TAU, 1),
            PLTSEdge(1, ProbLabel(0.5), 2),
            PLTSEdge(1, ProbLabel(0.5), 3),
        ],
        0,
    )
    b = PLTS(
        [PLTSState(0, "nondet"), PLTSState(1, "prob"), PLTSState(2, "nondet", True),
         PLTSState(3, "nondet", True)],
        [
            PLTSEdge(0, TAU, 1),
            PLTSEdge(1, ProbLabel(0.5 + 1e-8), 2),
            PLTSEdge(1, ProbLabel(0.5 - 1e-8), 3),
        ],
        0,
    )
    assert branching_bisim(a, b).equivalent


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------

def test_partition_blocks_disjoint_and_exhaustive(teleport_program):
    program, signatures = teleport_program
    plts = explore(
        initial_configuration(program, "Teleport", signatures=signatures),
        alphabet={0: [(DEFAULT_TEST_QUBITS[0],)]},
    )
    partition = bisimulation_partition([plts])
    seen = set()
    for block in partition.blocks:
        assert not (seen & block)
        seen |= block
    assert seen == set(range(len(plts.states)))


def test_partition_separates_terminal_states():
    plts = chain(TAU, CommLabel("out", 0, "c", (1,)))
    partition = bisimulation_partition([plts])
    block_of = partition.block_of()
    terminal = [s.id for s in plts.states if s.terminal]
    live = [s.id for s in plts.states if not s.terminal]
    for t in terminal:
        for l in live:
            assert block_of[t] != block_of[l]


# ---------------------------------------------------------------------------
# Driver-level behaviour
# ---------------------------------------------------------------------------

def test_interface_mismatch_rejected(teleport_program, coin_program):
    program_t, sigs_t = teleport_program
    program_c, sigs_c = coin_program
    with pytest.raises(ValueError):
        check_equivalence(program_t, "Teleport", program_c, "Coin", sigs_t, sigs_c)


def test_witness_reports_instantiation(teleport_program, identity_program):
    # Break teleportation by dropping a correction case; the witness should
    # say which injected input exposed it.
    from cqpkit.syntax import parse_program
    from cqpkit.typecheck import parse_signatures

    broken_src = """
//: Alice : Qbit, ^[Qbit], ^[Bit,Bit]
//: Bob : Qbit, ^[Bit,Bit], ^[Qbit]
//: Teleport : ^[Qbit], ^[Qbit]
Alice(q, in, out) = in?[u] . {u,q *= CNot} . {u *= H} . out![measure u,q] . 0
Bob(y, in, out) = in?[r] . out![y] . 0
Teleport(a, b) = (qbit x,y) {x *= H} . {x,y *= CNot} . (new c) (Alice(x,a,c) | Bob(y,c,b))
"""
    broken = parse_program(broken_src)
    broken_sigs = parse_signatures(broken_src)
    program_i, sigs_i = identity_program
    verdict = check_equivalence(
        broken, "Teleport", program_i, "Identity", broken_sigs, sigs_i
    )
    assert not verdict.equivalent
    assert verdict.witness.instantiation is not None
    assert "a<-" in verdict.witness.instantiation
