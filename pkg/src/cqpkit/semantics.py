"""Executable operational semantics over process configurations.

A configuration pairs a global quantum state with a running process term
plus the bindings from source names to runtime values (qubit ids, classical
bits, channel ids). ``step`` enumerates every enabled transition of a
configuration; ``explore`` closes a configuration under ``step`` into a
finite probabilistic labelled transition system (PLTS) whose states
alternate between nondeterministic choice and probability distributions;
``run_sampled`` walks one seeded path for simulation.

Communication is synchronous (handshake), as in pi-calculus. A measurement
sitting inside an output payload is forced first as an internal
probabilistic step; the send then carries the classical result.

External interactions happen on visible channels only. Inputs are
instantiated from a finite alphabet of injectable values; qubit inputs come
from a small test set of single-qubit states. Outputs carrying qubits are
labelled with the reduced density matrix of the transmitted qubits, which
is all an observer can see of them.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass

import numpy as np

from . import qstate
from .qstate import DEFAULT_QUBIT_CAP, DensityMatrix, StateVector
from .syntax import (
    BitLit,
    Call,
    Expression,
    FixedGate,
    GateAction,
    Hole,
    Input,
    MeasureExpr,
    NewChannel,
    Nil,
    Output,
    Parallel,
    ProcessTerm,
    Program,
    QbitAlloc,
    SigmaGate,
    TupleExpr,
    Var,
    free_names,
    substitute,
)
from .typecheck import BitType, ChannelType, QbitType

DEFAULT_MAX_STATES = 20000


class SemanticsError(Exception):
    pass


class OwnershipViolation(SemanticsError):
    """A qubit is referenced by two parallel components (dynamic no-cloning)."""


class RuntimeProcessError(SemanticsError):
    """Unbound name, arity mismatch, or ill-formed value hit at runtime."""


class ExplorationLimitError(SemanticsError):
    def __init__(self, max_states: int):
        super().__init__(f"bounded exploration exceeded the state cap of {max_states}")
        self.max_states = max_states


# ---------------------------------------------------------------------------
# Runtime values and labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitVal:
    qid: int


@dataclass(frozen=True)
class ChannelVal:
    cid: int


@dataclass(frozen=True)
class TestQubit:
    """A named single-qubit state injectable on an external channel."""

    name: str
    amp0: complex
    amp1: complex


_S = 1.0 / np.sqrt(2.0)

DEFAULT_TEST_QUBITS = (
    TestQubit("|0>", 1.0, 0.0),
    TestQubit("|1>", 0.0, 1.0),
    TestQubit("|+>", _S, _S),
    TestQubit("|i>", _S, complex(0.0, _S)),
)

BASIS_TEST_QUBITS = DEFAULT_TEST_QUBITS[:2]


@dataclass(frozen=True)
class Tau:
    def __repr__(self):
        return "tau"


TAU = Tau()


@dataclass(frozen=True)
class ProbLabel:
    probability: float


@dataclass(frozen=True)
class QubitSlot:
    """Marks a qubit position in an output label; content lives in qubit_dm."""

    index: int


@dataclass(frozen=True, eq=False)
class CommLabel:
    kind: str  # "in" | "out"
    channel: int
    channel_name: str
    values: tuple
    qubit_dm: DensityMatrix | None = None


def render_value(v) -> str:
    if isinstance(v, TestQubit):
        return v.name
    if isinstance(v, QubitSlot):
        return "qubit"
    if isinstance(v, ChannelVal):
        return f"#chan{v.cid}"
    if isinstance(v, tuple):
        return "(" + ",".join(str(b) for b in v) + ")"
    return str(v)


def render_label(label) -> str:
    if isinstance(label, Tau):
        return "tau"
    if isinstance(label, ProbLabel):
        return f"prob {label.probability:.6f}"
    if isinstance(label, CommLabel):
        op = "?" if label.kind == "in" else "!"
        vals = ",".join(render_value(v) for v in label.values)
        rendered = f"{label.channel_name}{op}[{vals}]"
        if label.qubit_dm is not None:
            entries = ";".join(
                f"{z.real:.4f}{z.imag:+.4f}i" for z in label.qubit_dm.matrix.reshape(-1)
            )
            rendered += f"<{entries}>"
        return rendered
    raise TypeError(f"not a label: {label!r}")


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Configuration:
    """Snapshot of one run: quantum state, name bindings, remaining term.

    Treated as immutable; every step produces fresh copies. ``channel_names``
    maps visible channel ids (assigned positionally from the entry call) to
    their display names; hidden channels get ids from ``next_channel``.
    """

    qstate: StateVector
    bindings: dict
    term: ProcessTerm
    channel_names: dict[int, str]
    next_channel: int
    next_fresh: int
    program: Program
    qubit_cap: int = DEFAULT_QUBIT_CAP

    def is_visible(self, cid: int) -> bool:
        return cid in self.channel_names

    def display_channel(self, cid: int) -> str:
        return self.channel_names.get(cid, f"#chan{cid}")

    def ownership(self) -> dict[int, tuple]:
        """Derived map from qubit id to the owning component's tree path."""
        owners: dict[int, tuple] = {}

        def walk(term: ProcessTerm, path: tuple):
            if isinstance(term, Parallel):
                walk(term.left, path + (0,))
                walk(term.right, path + (1,))
                return
            for name in free_names(term):
                v = self.bindings.get(name)
                if isinstance(v, QubitVal):
                    owners.setdefault(v.qid, path)

        walk(self.term, ())
        return owners

    def check_ownership(self):
        """Raise OwnershipViolation if a qubit is shared across a parallel split."""

        def qubits_of(term: ProcessTerm) -> set[int]:
            return {
                self.bindings[n].qid
                for n in free_names(term)
                if isinstance(self.bindings.get(n), QubitVal)
            }

        def walk(term: ProcessTerm):
            if isinstance(term, Parallel):
                shared = qubits_of(term.left) & qubits_of(term.right)
                if shared:
                    raise OwnershipViolation(
                        f"qubit id(s) {sorted(shared)} bound under two parallel components"
                    )
                walk(term.left)
                walk(term.right)

        walk(self.term)


@dataclass(frozen=True)
class Transition:
    """One enabled move: a label and a distribution over successor configs."""

    label: object
    outcomes: tuple  # of (probability, Configuration)


@dataclass(frozen=True)
class TraceStep:
    label: object
    probability: float | None
    config: Configuration


def initial_configuration(
    program: Program,
    entry: str | Call,
    external_channels=None,
    signatures: dict | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> Configuration:
    """Instantiate an entry call with its channel parameters bound to fresh
    visible channel ids (numbered by parameter position)."""
    if isinstance(entry, Call):
        entry_name = entry.process
        external_channels = list(entry.args)
    else:
        entry_name = entry
    try:
        d = program.definition(entry_name)
    except KeyError:
        raise RuntimeProcessError(f"unknown process {entry_name!r}") from None
    if external_channels is None:
        external_channels = list(d.params)
    if len(external_channels) != len(d.params):
        raise RuntimeProcessError(
            f"{entry_name!r} takes {len(d.params)} argument(s), got {len(external_channels)}"
        )
    if signatures is not None and entry_name in signatures:
        for p, t in zip(d.params, signatures[entry_name]):
            if not isinstance(t, ChannelType):
                raise RuntimeProcessError(
                    f"entry parameter {p!r} of {entry_name!r} is not a channel"
                )
    bindings = {}
    channel_names = {}
    mapping = {}
    for i, (param, ext) in enumerate(zip(d.params, external_channels)):
        bindings[ext] = ChannelVal(i)
        channel_names[i] = ext
        mapping[param] = ext
    term = substitute(d.body, mapping)
    return Configuration(
        qstate=StateVector.empty(),
        bindings=bindings,
        term=term,
        channel_names=channel_names,
        next_channel=len(external_channels),
        next_fresh=0,
        program=program,
        qubit_cap=qubit_cap,
    )


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

def _components(term: ProcessTerm, path=()):
    if isinstance(term, Parallel):
        yield from _components(term.left, path + (0,))
        yield from _components(term.right, path + (1,))
    else:
        yield path, term


def _rebuild(term: ProcessTerm, path: tuple, new_sub: ProcessTerm) -> ProcessTerm:
    if not path:
        return new_sub
    assert isinstance(term, Parallel)
    if path[0] == 0:
        return Parallel(left=_rebuild(term.left, path[1:], new_sub), right=term.right)
    return Parallel(left=term.left, right=_rebuild(term.right, path[1:], new_sub))


def _simplify(term: ProcessTerm) -> ProcessTerm:
    """Drop finished components: (0 | P) and (P | 0) collapse to P."""
    if isinstance(term, Parallel):
        left = _simplify(term.left)
        right = _simplify(term.right)
        if isinstance(left, Nil):
            return right
        if isinstance(right, Nil):
            return left
        return Parallel(left=left, right=right)
    return term


def _lookup(config: Configuration, name: str):
    try:
        return config.bindings[name]
    except KeyError:
        raise RuntimeProcessError(f"unbound name {name!r} at runtime") from None


def _channel_id(config: Configuration, name: str) -> int:
    v = _lookup(config, name)
    if not isinstance(v, ChannelVal):
        raise RuntimeProcessError(f"{name!r} is not a channel at runtime")
    return v.cid


def _qubit_ids(config: Configuration, names) -> list[int]:
    qids = []
    for n in names:
        v = _lookup(config, n)
        if not isinstance(v, QubitVal):
            raise RuntimeProcessError(f"{n!r} is not a qubit at runtime")
        qids.append(v.qid)
    if len(set(qids)) != len(qids):
        raise OwnershipViolation(f"gate or measurement lists the same qubit twice: {qids}")
    return qids


def _eval_slots(config: Configuration, exprs) -> list:
    """Evaluate fully-forced payload expressions into a flat slot list."""
    slots = []
    for e in exprs:
        if isinstance(e, BitLit):
            slots.append(e.value)
        elif isinstance(e, Var):
            v = _lookup(config, e.name)
            if isinstance(v, tuple):
                slots.extend(v)
            else:
                slots.append(v)
        elif isinstance(e, TupleExpr):
            slots.extend(_eval_slots(config, e.items))
        elif isinstance(e, MeasureExpr):
            raise RuntimeProcessError("unforced measurement in payload")
        else:
            raise TypeError(f"not an expression: {e!r}")
    return slots


def _payload_has_measure(exprs) -> bool:
    for e in exprs:
        if isinstance(e, MeasureExpr):
            return True
        if isinstance(e, TupleExpr) and _payload_has_measure(e.items):
            return True
    return False


def _force_first_measure(exprs):
    """Replace the leftmost MeasureExpr with a placeholder filled per outcome.

    Returns (names, rebuild) where rebuild(bits) is the payload with the
    measured result spliced in as literals.
    """
    for i, e in enumerate(exprs):
        if isinstance(e, MeasureExpr):
            names = e.names

            def rebuild(bits, i=i, exprs=exprs):
                lit = (
                    BitLit(value=bits[0])
                    if len(bits) == 1
                    else TupleExpr(items=tuple(BitLit(value=b) for b in bits))
                )
                return tuple(exprs[:i]) + (lit,) + tuple(exprs[i + 1 :])

            return names, rebuild
        if isinstance(e, TupleExpr) and _payload_has_measure(e.items):
            names, inner = _force_first_measure(e.items)

            def rebuild(bits, i=i, exprs=exprs, inner=inner):
                return (
                    tuple(exprs[:i])
                    + (TupleExpr(items=inner(bits)),)
                    + tuple(exprs[i + 1 :])
                )

            return names, rebuild
    raise ValueError("no measurement in payload")


def _advance(
    config: Configuration,
    path: tuple,
    new_head: ProcessTerm,
    *,
    qvec: StateVector | None = None,
    new_bindings: dict | None = None,
    next_channel: int | None = None,
    next_fresh: int | None = None,
) -> Configuration:
    bindings = config.bindings if new_bindings is None else new_bindings
    term = _simplify(_rebuild(config.term, path, new_head))
    out = dataclasses.replace(
        config,
        qstate=config.qstate if qvec is None else qvec,
        bindings=bindings,
        term=term,
        next_channel=config.next_channel if next_channel is None else next_channel,
        next_fresh=config.next_fresh if next_fresh is None else next_fresh,
    )
    out.check_ownership()
    return out


def _bind_received(
    config: Configuration, binders, values, cont: ProcessTerm
) -> tuple[ProcessTerm, dict, int]:
    """Bind received slot values to (freshened) binders inside ``cont``."""
    if len(binders) == len(values):
        pairs = list(zip(binders, values))
    elif len(binders) == 1 and len(values) > 1 and all(isinstance(v, int) for v in values):
        pairs = [(binders[0], tuple(values))]
    else:
        raise RuntimeProcessError(
            f"input binds {len(binders)} name(s) but {len(values)} value(s) arrived"
        )
    bindings = dict(config.bindings)
    fresh = config.next_fresh
    mapping = {}
    for binder, value in pairs:
        runtime_name = f"{binder}~{fresh}"
        fresh += 1
        mapping[binder] = runtime_name
        bindings[runtime_name] = value
    return substitute(cont, mapping), bindings, fresh


def _gate_for(config: Configuration, ref) -> qstate.Gate:
    if isinstance(ref, FixedGate):
        return qstate.standard_gate(ref.name)
    if isinstance(ref, SigmaGate):
        v = _lookup(config, ref.index_var)
        if not (isinstance(v, tuple) and len(v) == 2 and all(b in (0, 1) for b in v)):
            raise RuntimeProcessError(
                f"sigma index {ref.index_var!r} must hold a two-bit value, got {v!r}"
            )
        return qstate.sigma_correction(v)
    raise TypeError(f"not a gate reference: {ref!r}")


def step(config: Configuration, alphabet: dict | None = None) -> list[Transition]:
    """Enumerate all enabled transitions in a fixed, deterministic order.

    ``alphabet`` maps visible channel ids to the value tuples the
    environment may inject on them; without it, external inputs stay
    disabled (they simply do not fire).

    Call unfolding is prioritized: while any component head is a call, the
    only enabled transition is unfolding the first one. Unfolding touches
    neither the quantum state nor any channel, so it commutes with every
    other transition and the reduction is invisible to branching
    bisimilarity; it just keeps the interleaving of pure rewrites out of
    the state space.
    """
    alphabet = alphabet or {}
    transitions: list[Transition] = []
    comps = list(_components(config.term))

    for path, head in comps:
        if isinstance(head, Call):
            d = config.program.definition(head.process)
            body = substitute(d.body, dict(zip(d.params, head.args)))
            cfg = _advance(config, path, body)
            return [Transition(TAU, ((1.0, cfg),))]

    for path, head in comps:
        if isinstance(head, Nil):
            continue
        if isinstance(head, Hole):
            raise RuntimeProcessError("cannot execute a context hole")

        if isinstance(head, QbitAlloc):
            count = len(head.binders)
            qvec = qstate.alloc_qubits(config.qstate, count, cap=config.qubit_cap)
            bindings = dict(config.bindings)
            fresh = config.next_fresh
            mapping = {}
            base = config.qstate.num_qubits
            for i, binder in enumerate(head.binders):
                runtime_name = f"{binder}~{fresh}"
                fresh += 1
                mapping[binder] = runtime_name
                bindings[runtime_name] = QubitVal(base + i)
            cont = substitute(head.continuation, mapping)
            cfg = _advance(
                config, path, cont, qvec=qvec, new_bindings=bindings, next_fresh=fresh
            )
            transitions.append(Transition(TAU, ((1.0, cfg),)))
            continue

        if isinstance(head, NewChannel):
            bindings = dict(config.bindings)
            fresh = config.next_fresh
            runtime_name = f"{head.binder}~{fresh}"
            bindings[runtime_name] = ChannelVal(config.next_channel)
            cont = substitute(head.continuation, {head.binder: runtime_name})
            cfg = _advance(
                config,
                path,
                cont,
                new_bindings=bindings,
                next_channel=config.next_channel + 1,
                next_fresh=fresh + 1,
            )
            transitions.append(Transition(TAU, ((1.0, cfg),)))
            continue

        if isinstance(head, GateAction):
            qids = _qubit_ids(config, head.targets)
            gate = _gate_for(config, head.gate)
            qvec = qstate.apply_gate(config.qstate, gate, qids)
            cfg = _advance(config, path, head.continuation, qvec=qvec)
            transitions.append(Transition(TAU, ((1.0, cfg),)))
            continue

        if isinstance(head, Output):
            if _payload_has_measure(head.payload):
                names, rebuild_payload = _force_first_measure(head.payload)
                qids = _qubit_ids(config, names)
                outcomes = qstate.measure(config.qstate, qids)
                dist = []
                for o in outcomes:
                    new_head = Output(
                        channel=head.channel,
                        payload=rebuild_payload(o.result),
                        continuation=head.continuation,
                        pos=head.pos,
                    )
                    cfg = _advance(config, path, new_head, qvec=o.post_state)
                    dist.append((o.probability, cfg))
                transitions.append(Transition(TAU, tuple(dist)))
                continue
            cid = _channel_id(config, head.channel)
            if config.is_visible(cid):
                slots = _eval_slots(config, head.payload)
                label_values = []
                sent_qubits = []
                for v in slots:
                    if isinstance(v, QubitVal):
                        label_values.append(QubitSlot(len(sent_qubits)))
                        sent_qubits.append(v.qid)
                    else:
                        label_values.append(v)
                dm = (
                    qstate.reduced_density_matrix(config.qstate, sent_qubits)
                    if sent_qubits
                    else None
                )
                label = CommLabel(
                    "out", cid, config.display_channel(cid), tuple(label_values), dm
                )
                cfg = _advance(config, path, head.continuation)
                transitions.append(Transition(label, ((1.0, cfg),)))
            continue

        if isinstance(head, Input):
            cid = _channel_id(config, head.channel)
            if config.is_visible(cid) and cid in alphabet:
                for value_tuple in alphabet[cid]:
                    qvec = config.qstate
                    runtime_values = []
                    label_values = []
                    for v in value_tuple:
                        if isinstance(v, TestQubit):
                            qvec = qstate.append_qubit(
                                qvec, v.amp0, v.amp1, cap=config.qubit_cap
                            )
                            runtime_values.append(QubitVal(qvec.num_qubits - 1))
                            label_values.append(v)
                        else:
                            runtime_values.append(v)
                            label_values.append(v)
                    tmp = dataclasses.replace(config, qstate=qvec)
                    cont, bindings, fresh = _bind_received(
                        tmp, head.binders, runtime_values, head.continuation
                    )
                    cfg = _advance(
                        tmp, path, cont, new_bindings=bindings, next_fresh=fresh
                    )
                    label = CommLabel(
                        "in", cid, config.display_channel(cid), tuple(label_values)
                    )
                    transitions.append(Transition(label, ((1.0, cfg),)))
            continue

        raise TypeError(f"not a process term: {head!r}")

    # Internal synchronous communication between any two parallel components
    # sharing a channel, hidden or visible.
    for i, (out_path, out_head) in enumerate(comps):
        if not isinstance(out_head, Output) or _payload_has_measure(out_head.payload):
            continue
        out_cid = _channel_id(config, out_head.channel)
        for j, (in_path, in_head) in enumerate(comps):
            if i == j or not isinstance(in_head, Input):
                continue
            if _channel_id(config, in_head.channel) != out_cid:
                continue
            values = _eval_slots(config, out_head.payload)
            cont, bindings, fresh = _bind_received(
                config, in_head.binders, values, in_head.continuation
            )
            term = _rebuild(config.term, out_path, out_head.continuation)
            term = _simplify(_rebuild(term, in_path, cont))
            cfg = dataclasses.replace(
                config, bindings=bindings, term=term, next_fresh=fresh
            )
            cfg.check_ownership()
            transitions.append(Transition(TAU, ((1.0, cfg),)))

    return transitions


# ---------------------------------------------------------------------------
# Canonical configuration keys (deduplication)
# ---------------------------------------------------------------------------

def canonical_key(config: Configuration) -> tuple:
    """Discrete part of configuration identity: the term serialized with
    positional names for binders and a first-occurrence numbering of hidden
    channels. Configurations with equal keys are merged when their quantum
    states agree up to global phase."""
    hidden: dict[int, str] = {}
    counter = [0]

    def value_token(v) -> str:
        if isinstance(v, QubitVal):
            return f"q{v.qid}"
        if isinstance(v, ChannelVal):
            if config.is_visible(v.cid):
                return f"C{v.cid}"
            return hidden.setdefault(v.cid, f"h{len(hidden)}")
        if isinstance(v, tuple):
            return "(" + ",".join(str(b) for b in v) + ")"
        return f"b{v}"

    def name_token(name: str, env: dict) -> str:
        if name in env:
            return env[name]
        if name in config.bindings:
            return value_token(config.bindings[name])
        return f"?{name}"

    def expr_token(e: Expression, env: dict) -> str:
        if isinstance(e, Var):
            return name_token(e.name, env)
        if isinstance(e, BitLit):
            return f"b{e.value}"
        if isinstance(e, MeasureExpr):
            return "m(" + ",".join(name_token(n, env) for n in e.names) + ")"
        if isinstance(e, TupleExpr):
            return "(" + ",".join(expr_token(x, env) for x in e.items) + ")"
        raise TypeError(f"not an expression: {e!r}")

    def bind_all(binders, env: dict) -> dict:
        env = dict(env)
        for b in binders:
            counter[0] += 1
            env[b] = f"v{counter[0]}"
        return env

    def ser(term: ProcessTerm, env: dict) -> str:
        if isinstance(term, Nil):
            return "0"
        if isinstance(term, Hole):
            return "HOLE"
        if isinstance(term, Input):
            env2 = bind_all(term.binders, env)
            return (
                f"in({name_token(term.channel, env)};{len(term.binders)};"
                f"{ser(term.continuation, env2)})"
            )
        if isinstance(term, Output):
            payload = ",".join(expr_token(e, env) for e in term.payload)
            return f"out({name_token(term.channel, env)};{payload};{ser(term.continuation, env)})"
        if isinstance(term, GateAction):
            gate = (
                term.gate.name
                if isinstance(term.gate, FixedGate)
                else f"sigma[{name_token(term.gate.index_var, env)}]"
            )
            targets = ",".join(name_token(t, env) for t in term.targets)
            return f"act({targets};{gate};{ser(term.continuation, env)})"
        if isinstance(term, QbitAlloc):
            env2 = bind_all(term.binders, env)
            return f"qbit({len(term.binders)};{ser(term.continuation, env2)})"
        if isinstance(term, NewChannel):
            env2 = bind_all((term.binder,), env)
            return f"new({ser(term.continuation, env2)})"
        if isinstance(term, Parallel):
            return f"par({ser(term.left, env)}|{ser(term.right, env)})"
        if isinstance(term, Call):
            args = ",".join(name_token(a, env) for a in term.args)
            return f"call({term.process};{args})"
        raise TypeError(f"not a process term: {term!r}")

    return (config.qstate.num_qubits, ser(config.term, {}))


# ---------------------------------------------------------------------------
# PLTS construction
# ---------------------------------------------------------------------------

@dataclass
class PLTSState:
    id: int
    kind: str  # "nondet" | "prob"
    terminal: bool = False
    config: Configuration | None = None


@dataclass
class PLTSEdge:
    src: int
    label: object
    dst: int


@dataclass
class PLTS:
    states: list[PLTSState]
    edges: list[PLTSEdge]
    initial: int

    def successors(self) -> dict[int, list[PLTSEdge]]:
        out: dict[int, list[PLTSEdge]] = {s.id: [] for s in self.states}
        for e in self.edges:
            out[e.src].append(e)
        return out

    def dump_json(self) -> str:
        states = [
            {"id": s.id, "kind": s.kind, "terminal": s.terminal} for s in self.states
        ]
        edges = []
        for e in self.edges:
            if isinstance(e.label, ProbLabel):
                edges.append(
                    {
                        "src": e.src,
                        "label": "prob",
                        "p": round(e.label.probability, 12),
                        "dst": e.dst,
                    }
                )
            else:
                edges.append({"src": e.src, "label": render_label(e.label), "dst": e.dst})
        return json.dumps(
            {"states": states, "edges": edges, "initial": self.initial}, indent=2
        )


def explore(
    config: Configuration,
    max_states: int = DEFAULT_MAX_STATES,
    alphabet: dict | None = None,
    collect_merged: list | None = None,
) -> PLTS:
    """Breadth-first closure of a configuration under ``step``.

    Configurations equal up to bound-name renaming, hidden-channel
    bijection, and global phase are merged. Transitions with more than one
    outcome go through an intermediate probabilistic state.

    ``collect_merged``, if supplied, receives a (kept, dropped) pair for
    every configuration that deduplication merged into an existing state;
    tests use it to spot-check that merged configurations behave alike.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    states: list[PLTSState] = []
    edges: list[PLTSEdge] = []
    buckets: dict[tuple, list[int]] = {}
    prob_cache: dict[tuple, int] = {}
    queue: list[int] = []

    def intern(cfg: Configuration) -> int:
        key = canonical_key(cfg)
        for sid in buckets.get(key, []):
            known = states[sid].config
            if qstate.states_equal_up_to_global_phase(known.qstate, cfg.qstate):
                if collect_merged is not None and known is not cfg:
                    collect_merged.append((known, cfg))
                return sid
        if len(states) >= max_states:
            raise ExplorationLimitError(max_states)
        sid = len(states)
        states.append(PLTSState(sid, "nondet", config=cfg))
        buckets.setdefault(key, []).append(sid)
        queue.append(sid)
        return sid

    initial = intern(config)
    head = 0
    while head < len(queue):
        sid = queue[head]
        head += 1
        cfg = states[sid].config
        transitions = step(cfg, alphabet)
        if not transitions:
            states[sid].terminal = True
            continue
        for t in transitions:
            if len(t.outcomes) == 1:
                dst = intern(t.outcomes[0][1])
                edges.append(PLTSEdge(sid, t.label, dst))
                continue
            dist = tuple(
                (round(p, 12), intern(child)) for p, child in t.outcomes
            )
            pid = prob_cache.get(dist)
            if pid is None:
                if len(states) >= max_states:
                    raise ExplorationLimitError(max_states)
                pid = len(states)
                states.append(PLTSState(pid, "prob"))
                prob_cache[dist] = pid
                for p, child in dist:
                    edges.append(PLTSEdge(pid, ProbLabel(p), child))
            edges.append(PLTSEdge(sid, t.label, pid))

    return PLTS(states, edges, initial)


def run_sampled(
    config: Configuration,
    seed: int,
    alphabet: dict | None = None,
    max_steps: int | None = None,
) -> list[TraceStep]:
    """One seeded path: the first enabled transition in enumeration order,
    with probabilistic outcomes resolved by a deterministic PRNG."""
    rng = random.Random(seed)
    trace: list[TraceStep] = []
    current = config
    while max_steps is None or len(trace) < max_steps:
        transitions = step(current, alphabet)
        if not transitions:
            break
        t = transitions[0]
        if len(t.outcomes) == 1:
            probability = None
            current = t.outcomes[0][1]
        else:
            draw = rng.random()
            cumulative = 0.0
            probability, current = t.outcomes[-1]
            for p, child in t.outcomes:
                cumulative += p
                if draw <= cumulative:
                    probability, current = p, child
                    break
        trace.append(TraceStep(t.label, probability, current))
    return trace


# ---------------------------------------------------------------------------
# External-input alphabets
# ---------------------------------------------------------------------------

def input_used_channels(program: Program, entry_name: str) -> set[int]:
    """Entry channel positions on which the program can ever perform input.

    Channels are tracked positionally through (non-recursive) calls;
    channels received as payload are not tracked.
    """
    used: set[int] = set()
    seen: set[tuple] = set()

    def walk_def(name: str, args_abs: tuple):
        key = (name, args_abs)
        if key in seen:
            return
        seen.add(key)
        d = program.definition(name)
        walk(d.body, dict(zip(d.params, args_abs)))

    def walk(term: ProcessTerm, env: dict):
        if isinstance(term, (Nil, Hole)):
            return
        if isinstance(term, Input):
            pos = env.get(term.channel)
            if pos is not None:
                used.add(pos)
            env2 = dict(env)
            for b in term.binders:
                env2[b] = None
            walk(term.continuation, env2)
            return
        if isinstance(term, Output):
            walk(term.continuation, env)
            return
        if isinstance(term, GateAction):
            walk(term.continuation, env)
            return
        if isinstance(term, (QbitAlloc, NewChannel)):
            binders = term.binders if isinstance(term, QbitAlloc) else (term.binder,)
            env2 = dict(env)
            for b in binders:
                env2[b] = None
            walk(term.continuation, env2)
            return
        if isinstance(term, Parallel):
            walk(term.left, env)
            walk(term.right, env)
            return
        if isinstance(term, Call):
            walk_def(term.process, tuple(env.get(a) for a in term.args))
            return
        raise TypeError(f"not a process term: {term!r}")

    d = program.definition(entry_name)
    walk_def(entry_name, tuple(range(len(d.params))))
    return used


def slot_values(slot_type, test_qubits) -> list:
    if isinstance(slot_type, QbitType):
        return list(test_qubits)
    if isinstance(slot_type, BitType):
        return [0, 1]
    raise RuntimeProcessError(
        f"cannot enumerate external inputs for payload type {slot_type}"
    )


def channel_value_tuples(channel_type: ChannelType, test_qubits) -> list[tuple]:
    """All injectable value tuples for one channel, as a cartesian product."""
    pools = [slot_values(t, test_qubits) for t in channel_type.payload]
    tuples = [()]
    for pool in pools:
        tuples = [t + (v,) for t in tuples for v in pool]
    return tuples
