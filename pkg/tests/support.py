"""Shared oracles and generators for the test suite.

Everything here recomputes expected values by routes independent of the
package's own computation paths: explicit matrix expansion instead of
tensor reshaping, explicit index loops instead of einsum-style transposes,
and direct construction of transition systems.
"""

from __future__ import annotations

import random

import numpy as np

from cqpkit.semantics import (
    PLTS,
    TAU,
    CommLabel,
    PLTSEdge,
    PLTSState,
    ProbLabel,
)
from cqpkit.syntax import (
    BitLit,
    Call,
    FixedGate,
    GateAction,
    Input,
    MeasureExpr,
    NewChannel,
    Nil,
    Output,
    Parallel,
    ProcessDef,
    ProcessTerm,
    Program,
    QbitAlloc,
    SigmaGate,
    TupleExpr,
    Var,
    substitute,
)
from cqpkit.typecheck import BIT, QBIT, ChannelType

SQ2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) * SQ2
CNOT4 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


# ---------------------------------------------------------------------------
# Linear-algebra oracles
# ---------------------------------------------------------------------------

def random_state_amps(rng: np.random.Generator, n: int) -> np.ndarray:
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return amps / np.linalg.norm(amps)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def expand_gate_matrix(gate_matrix: np.ndarray, targets, n: int) -> np.ndarray:
    """Expand a k-qubit gate to the full 2^n matrix by explicit index walks.

    targets[0] is the most significant bit of the gate's local index; qubit
    0 is the least significant bit of the global index.
    """
    dim = 2**n
    k = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> q) & 1 for q in range(n)]
        lin = 0
        for t in targets:
            lin = (lin << 1) | bits[t]
        for lout in range(2**k):
            amp = gate_matrix[lout, lin]
            if amp == 0:
                continue
            obits = list(bits)
            for j, t in enumerate(targets):
                obits[t] = (lout >> (k - 1 - j)) & 1
            row = sum(b << q for q, b in enumerate(obits))
            full[row, col] += amp
    return full


def apply_gate_oracle(amps: np.ndarray, gate_matrix: np.ndarray, targets, n: int) -> np.ndarray:
    return expand_gate_matrix(gate_matrix, targets, n) @ amps


def rdm_oracle(amps: np.ndarray, n: int, keep: int) -> np.ndarray:
    """Single-qubit reduced density matrix by explicit index splitting."""
    m = np.zeros((2, 2 ** (n - 1)), dtype=complex)
    for idx, a in enumerate(amps):
        b = (idx >> keep) & 1
        low = idx & ((1 << keep) - 1)
        high = idx >> (keep + 1)
        m[b, (high << keep) | low] += a
    return m @ m.conj().T


def teleport_branches_oracle(psi: np.ndarray):
    """Walk the teleportation circuit with explicit full matrices.

    Qubit layout matches the package's execution of the corpus program:
    x = qubit 0, y = qubit 1 (the entangled pair), u = qubit 2 (the input).
    Returns, per measurement result (u_bit, x_bit): the branch probability,
    the post-measurement state, and the pure state left on y.
    """
    bell = np.array([1, 0, 0, 1], dtype=complex) * SQ2  # (|x=0,y=0> + |x=1,y=1>)/sqrt(2)
    state = np.kron(psi, bell)  # u occupies the high bit
    state = apply_gate_oracle(state, CNOT4, [2, 0], 3)  # CNot, control u, target x
    state = apply_gate_oracle(state, H2, [2], 3)  # H on u
    branches = {}
    for u_bit in (0, 1):
        for x_bit in (0, 1):
            projected = state.copy()
            for idx in range(8):
                if ((idx >> 2) & 1) != u_bit or (idx & 1) != x_bit:
                    projected[idx] = 0.0
            prob = float(np.sum(np.abs(projected) ** 2))
            post = projected / np.sqrt(prob)
            y_vec = np.array(
                [post[(u_bit << 2) | (b << 1) | x_bit] for b in (0, 1)], dtype=complex
            )
            branches[(u_bit, x_bit)] = (prob, post, y_vec)
    return branches


def derive_correction_table():
    """Find, per measurement branch, which Pauli correction restores the
    input on two generic states; the unique answer is the sigma table."""
    candidates = {"I": I2, "X": X2, "Z": Z2, "ZX": Z2 @ X2}
    rng = np.random.default_rng(1234)
    probes = [random_state_amps(rng, 1), random_state_amps(rng, 1)]
    table = {}
    for branch in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        working = None
        for name, mat in candidates.items():
            ok = True
            for psi in probes:
                _prob, _post, y_vec = teleport_branches_oracle(psi)[branch]
                fixed = mat @ y_vec
                if abs(abs(np.vdot(fixed, psi)) - 1.0) > 1e-9:
                    ok = False
                    break
            if ok:
                working = name
                break
        assert working is not None, f"no correction restores branch {branch}"
        table[branch] = working
    return table


# ---------------------------------------------------------------------------
# PLTS generators
# ---------------------------------------------------------------------------

def _label_pool():
    return [
        CommLabel("out", 0, "c", (0,)),
        CommLabel("out", 0, "c", (1,)),
        CommLabel("out", 1, "d", (0,)),
        CommLabel("in", 0, "c", (1,)),
    ]


def random_plts(rng: random.Random, min_states: int = 3, max_states: int = 8) -> PLTS:
    """A random finite acyclic PLTS alternating nondeterministic and
    probabilistic states, with probabilities summing to one."""
    n = rng.randint(min_states, max_states)
    states = [PLTSState(i, "nondet") for i in range(n)]
    edges = []
    pool = _label_pool()
    for i in range(n - 1):
        fanout = rng.randint(1, 2)
        for _ in range(fanout):
            dst = rng.randint(i + 1, n - 1)
            if rng.random() < 0.25 and dst < n - 1:
                # Insert a probabilistic node splitting between two targets.
                pid = len(states)
                states.append(PLTSState(pid, "prob"))
                other = rng.randint(dst, n - 1)
                p = rng.choice([0.5, 0.25, 0.75])
                edges.append(PLTSEdge(i, TAU, pid))
                if other == dst:
                    edges.append(PLTSEdge(pid, ProbLabel(1.0), dst))
                else:
                    edges.append(PLTSEdge(pid, ProbLabel(p), dst))
                    edges.append(PLTSEdge(pid, ProbLabel(1.0 - p), other))
            else:
                label = rng.choice(pool + [TAU])
                edges.append(PLTSEdge(i, label, dst))
    with_out = {e.src for e in edges}
    for s in states:
        s.terminal = s.id not in with_out
    return PLTS(states, edges, 0)


def insert_tau(plts: PLTS, target: int) -> PLTS:
    """Route every edge into ``target`` through a fresh tau-prefixed state."""
    new_id = len(plts.states)
    states = [PLTSState(s.id, s.kind, s.terminal, s.config) for s in plts.states]
    states.append(PLTSState(new_id, "nondet", False))
    edges = [
        PLTSEdge(e.src, e.label, new_id if e.dst == target else e.dst) for e in plts.edges
    ]
    edges.append(PLTSEdge(new_id, TAU, target))
    initial = new_id if plts.initial == target else plts.initial
    return PLTS(states, edges, initial)


# ---------------------------------------------------------------------------
# Random process terms (untyped, for name-handling laws)
# ---------------------------------------------------------------------------

_NAMES = ("a", "b", "c", "x", "y", "z", "w")


def random_expression(rng: random.Random) -> object:
    roll = rng.random()
    if roll < 0.45:
        return Var(name=rng.choice(_NAMES))
    if roll < 0.65:
        return BitLit(value=rng.randint(0, 1))
    if roll < 0.85:
        k = rng.randint(1, 2)
        names = rng.sample(_NAMES, k)
        return MeasureExpr(names=tuple(names))
    return TupleExpr(items=(BitLit(value=0), Var(name=rng.choice(_NAMES))))


def random_term(rng: random.Random, depth: int = 3) -> ProcessTerm:
    if depth <= 0 or rng.random() < 0.2:
        return rng.choice(
            [Nil(), Call(process="P", args=tuple(rng.sample(_NAMES, rng.randint(0, 2))))]
        )
    roll = rng.random()
    cont = random_term(rng, depth - 1)
    if roll < 0.2:
        binders = tuple(rng.sample(_NAMES, rng.randint(1, 2)))
        return Input(channel=rng.choice(_NAMES), binders=binders, continuation=cont)
    if roll < 0.4:
        payload = tuple(random_expression(rng) for _ in range(rng.randint(1, 2)))
        return Output(channel=rng.choice(_NAMES), payload=payload, continuation=cont)
    if roll < 0.55:
        gate = (
            FixedGate(name=rng.choice(["H", "X", "Z", "I"]))
            if rng.random() < 0.8
            else SigmaGate(index_var=rng.choice(_NAMES))
        )
        return GateAction(targets=(rng.choice(_NAMES),), gate=gate, continuation=cont)
    if roll < 0.7:
        binders = tuple(rng.sample(_NAMES, rng.randint(1, 2)))
        return QbitAlloc(binders=binders, continuation=cont)
    if roll < 0.8:
        return NewChannel(binder=rng.choice(_NAMES), continuation=cont)
    return Parallel(left=cont, right=random_term(rng, depth - 1))


def alpha_variant(term: ProcessTerm, rng: random.Random, salt: list | None = None) -> ProcessTerm:
    """Consistently rename bound names, leaving free names alone."""
    if salt is None:
        salt = [0]

    def rename(binders, cont):
        mapping = {}
        fresh = []
        for b in binders:
            salt[0] += 1
            nb = f"r{salt[0]}"
            mapping[b] = nb
            fresh.append(nb)
        return tuple(fresh), substitute(cont, mapping)

    if isinstance(term, Input):
        binders, cont = rename(term.binders, term.continuation)
        return Input(
            channel=term.channel, binders=binders, continuation=alpha_variant(cont, rng, salt)
        )
    if isinstance(term, QbitAlloc):
        binders, cont = rename(term.binders, term.continuation)
        return QbitAlloc(binders=binders, continuation=alpha_variant(cont, rng, salt))
    if isinstance(term, NewChannel):
        binders, cont = rename((term.binder,), term.continuation)
        return NewChannel(binder=binders[0], continuation=alpha_variant(cont, rng, salt))
    if isinstance(term, Output):
        return Output(
            channel=term.channel,
            payload=term.payload,
            continuation=alpha_variant(term.continuation, rng, salt),
        )
    if isinstance(term, GateAction):
        return GateAction(
            targets=term.targets,
            gate=term.gate,
            continuation=alpha_variant(term.continuation, rng, salt),
        )
    if isinstance(term, Parallel):
        return Parallel(
            left=alpha_variant(term.left, rng, salt),
            right=alpha_variant(term.right, rng, salt),
        )
    return term


# ---------------------------------------------------------------------------
# Random well-typed programs
# ---------------------------------------------------------------------------

def random_typed_program(rng: random.Random):
    """A single-definition program that is well-typed by construction.

    Parameters are channels only (so the definition can be driven as an
    entry point); qubits are allocated inside and threaded linearly.
    """
    chans = {}
    for i in range(rng.randint(1, 2)):
        chans[f"c{i}"] = ChannelType((QBIT,)) if rng.random() < 0.5 else ChannelType((BIT,))
    counter = [0]

    def gen(qubits: list[str], depth: int) -> ProcessTerm:
        if depth <= 0 or rng.random() < 0.15:
            return Nil()
        moves = ["alloc", "input"]
        if qubits:
            moves += ["gate", "gate"]
            if any(ct == ChannelType((QBIT,)) for ct in chans.values()):
                moves.append("send_qubit")
            if any(ct == ChannelType((BIT,)) for ct in chans.values()):
                moves.append("send_measure")
        if any(ct == ChannelType((BIT,)) for ct in chans.values()):
            moves.append("send_bit")
        if depth >= 2 and rng.random() < 0.3:
            moves.append("parallel")
        move = rng.choice(moves)
        if move == "alloc" and len(qubits) < 3:
            counter[0] += 1
            q = f"q{counter[0]}"
            return QbitAlloc(binders=(q,), continuation=gen(qubits + [q], depth - 1))
        if move == "gate" and qubits:
            target = rng.choice(qubits)
            return GateAction(
                targets=(target,),
                gate=FixedGate(name=rng.choice(["H", "X", "Z", "I"])),
                continuation=gen(qubits, depth - 1),
            )
        if move == "send_qubit" and qubits:
            ch = rng.choice([c for c, t in chans.items() if t == ChannelType((QBIT,))])
            q = rng.choice(qubits)
            rest = [x for x in qubits if x != q]
            return Output(
                channel=ch, payload=(Var(name=q),), continuation=gen(rest, depth - 1)
            )
        if move == "send_measure" and qubits:
            ch = rng.choice([c for c, t in chans.items() if t == ChannelType((BIT,))])
            q = rng.choice(qubits)
            rest = [x for x in qubits if x != q]
            return Output(
                channel=ch,
                payload=(MeasureExpr(names=(q,)),),
                continuation=gen(rest, depth - 1),
            )
        if move == "send_bit":
            ch = rng.choice([c for c, t in chans.items() if t == ChannelType((BIT,))])
            return Output(
                channel=ch,
                payload=(BitLit(value=rng.randint(0, 1)),),
                continuation=gen(qubits, depth - 1),
            )
        if move == "input":
            ch = rng.choice(list(chans))
            counter[0] += 1
            binder = f"v{counter[0]}"
            got_qubit = chans[ch] == ChannelType((QBIT,))
            inner = gen(qubits + [binder] if got_qubit else qubits, depth - 1)
            return Input(channel=ch, binders=(binder,), continuation=inner)
        if move == "parallel":
            keep = [q for q in qubits if rng.random() < 0.5]
            rest = [q for q in qubits if q not in keep]
            return Parallel(left=gen(keep, depth - 1), right=gen(rest, depth - 1))
        return Nil()

    body = gen([], rng.randint(2, 5))
    params = tuple(chans)
    program = Program((ProcessDef("Gen", params, body),))
    signatures = {"Gen": tuple(chans[p] for p in params)}
    return program, signatures
