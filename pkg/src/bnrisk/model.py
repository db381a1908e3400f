"""Core model types: variables, schemas, DAGs, CPTs and the joint factorization.

A :class:`BayesianNetwork` couples a :class:`NetworkSchema` (ordered variable
and state declarations), a :class:`Dag`, and one :class:`Cpt` per node. The
joint probability of a total assignment is the product of the local
conditionals. All indexing is positional and lexicographic: state ``k`` of a
variable is the ``k``-th declared state label, and the row of a CPT for a
parent configuration is the mixed-radix index of the parent state tuple with
the first parent most significant. That ordering is part of the persisted
model contract.

All types are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._kernels import mixed_radix_strides

#: Partial map of variable name -> state index.
Evidence = Mapping[str, int]

#: Total map of variable name -> state index (checked at use sites).
Assignment = Mapping[str, int]


@dataclass(frozen=True)
class Variable:
    """A categorical variable with an ordered list of state labels."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise ValueError(f"variable {self.name!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate state labels")

    @property
    def cardinality(self) -> int:
        return len(self.states)


class NetworkSchema:
    """Ordered collection of variables; the ordering fixes all index maps."""

    def __init__(self, variables: Iterable[Variable]):
        self.variables: tuple[Variable, ...] = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in schema")
        self._index = {v.name: i for i, v in enumerate(self.variables)}
        self.cardinalities = np.array([v.cardinality for v in self.variables], dtype=np.int64)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, NetworkSchema) and self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def variable(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def state_index(self, name: str, label: str) -> int:
        var = self.variable(name)
        try:
            return var.states.index(label)
        except ValueError:
            raise ValueError(f"unknown state {label!r} for variable {name!r}") from None

    def joint_size(self) -> int:
        return int(np.prod(self.cardinalities))

    def coerce_evidence(self, evidence: Mapping[str, object]) -> dict[str, int]:
        """Normalize {var: state label or index} to {var: state index}."""
        out: dict[str, int] = {}
        for name, value in evidence.items():
            var = self.variable(name)
            if isinstance(value, str):
                out[name] = self.state_index(name, value)
            else:
                idx = int(value)
                if not 0 <= idx < var.cardinality:
                    raise ValueError(f"state index {idx} out of range for {name!r}")
                out[name] = idx
        return out


@dataclass(frozen=True)
class Dag:
    """Directed acyclic structure over a schema's variable names.

    ``nodes`` keeps the schema order; ``arcs`` is a frozen set of
    (parent, child) pairs. Construction rejects self-loops and endpoints
    outside ``nodes`` but tolerates cycles so that :func:`validate_dag` can
    report them as data; operations that require acyclicity check it.
    """

    nodes: tuple[str, ...]
    arcs: frozenset[tuple[str, str]]

    def __init__(self, nodes: Iterable[str], arcs: Iterable[tuple[str, str]] = ()):
        object.__setattr__(self, "nodes", tuple(nodes))
        arcs = frozenset((str(p), str(c)) for p, c in arcs)
        node_set = set(self.nodes)
        for p, c in arcs:
            if p == c:
                raise ValueError(f"self-loop {p}->{c}")
            if p not in node_set or c not in node_set:
                raise ValueError(f"arc endpoint not in node set: {p}->{c}")
        object.__setattr__(self, "arcs", arcs)

    def parents(self, node: str) -> tuple[str, ...]:
        """Parents of ``node`` in node-declaration order (the CPT row order)."""
        order = {n: i for i, n in enumerate(self.nodes)}
        ps = [p for p, c in self.arcs if c == node]
        return tuple(sorted(ps, key=order.__getitem__))

    def children(self, node: str) -> tuple[str, ...]:
        order = {n: i for i, n in enumerate(self.nodes)}
        cs = [c for p, c in self.arcs if p == node]
        return tuple(sorted(cs, key=order.__getitem__))

    def topological_order(self) -> tuple[str, ...]:
        order = topological_order(self.nodes, self.arcs)
        if order is None:
            raise ValueError("graph contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        return topological_order(self.nodes, self.arcs) is not None


def topological_order(
    nodes: Sequence[str], arcs: Iterable[tuple[str, str]]
) -> tuple[str, ...] | None:
    """Kahn's algorithm; returns None if the arc set contains a cycle.

    Deterministic: among ready nodes the one earliest in ``nodes`` wins.
    """
    nodes = list(nodes)
    indeg = {n: 0 for n in nodes}
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for p, c in arcs:
        indeg[c] += 1
        children[p].append(c)
    out: list[str] = []
    ready = [n for n in nodes if indeg[n] == 0]
    while ready:
        n = ready.pop(0)
        out.append(n)
        ready_new = []
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready_new.append(c)
        if ready_new:
            pos = {name: i for i, name in enumerate(nodes)}
            ready = sorted(ready + ready_new, key=pos.__getitem__)
    if len(out) != len(nodes):
        return None
    return tuple(out)


def find_cycle(nodes: Sequence[str], arcs: Iterable[tuple[str, str]]) -> list[str] | None:
    """Return one directed cycle as a node path [a, b, ..., a], or None."""
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for p, c in arcs:
        children[p].append(c)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    stack: list[str] = []

    def dfs(n: str) -> list[str] | None:
        color[n] = GRAY
        stack.append(n)
        for c in sorted(children[n]):
            if color[c] == GRAY:
                i = stack.index(c)
                return stack[i:] + [c]
            if color[c] == WHITE:
                found = dfs(c)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in nodes:
        if color[n] == WHITE:
            found = dfs(n)
            if found:
                return found
    return None


@dataclass(frozen=True)
class ArcConstraints:
    """Arcs that a learned structure must contain (required) or avoid (forbidden)."""

    required: frozenset[tuple[str, str]] = field(default_factory=frozenset)
    forbidden: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "required", frozenset(tuple(a) for a in self.required))
        object.__setattr__(self, "forbidden", frozenset(tuple(a) for a in self.forbidden))
        overlap = self.required & self.forbidden
        if overlap:
            raise ValueError(f"arcs both required and forbidden: {sorted(overlap)}")
        nodes = sorted({n for arc in self.required for n in arc})
        if nodes and topological_order(nodes, self.required) is None:
            raise ValueError("required arcs alone contain a cycle")

    def allows(self, dag: Dag) -> bool:
        return self.required <= dag.arcs and not (self.forbidden & dag.arcs)


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table for one node.

    ``table`` has one row per parent configuration (lexicographic over the
    parents' state indices, first parent most significant) and one column per
    node state. Rows are probability vectors.
    """

    node: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        table = np.ascontiguousarray(self.table, dtype=np.float64)
        if table.ndim != 2:
            raise ValueError(f"CPT for {self.node!r} must be 2-D (rows x states)")
        if np.any(table < 0):
            raise ValueError(f"CPT for {self.node!r} has negative entries")
        sums = table.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-12):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(
                f"CPT row {bad} for {self.node!r} sums to {sums[bad]!r}, not 1"
            )
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n_states(self) -> int:
        return self.table.shape[1]

    def row_index(self, parent_states: Sequence[int], cards: Sequence[int]) -> int:
        strides = mixed_radix_strides(np.asarray(cards, dtype=np.int64))
        return int(np.dot(np.asarray(parent_states, dtype=np.int64), strides))


class BayesianNetwork:
    """Schema + DAG + one CPT per node; defines the joint factorization."""

    def __init__(self, schema: NetworkSchema, dag: Dag, cpts: Iterable[Cpt]):
        self.schema = schema
        self.dag = dag
        self.cpts: dict[str, Cpt] = {}
        for cpt in cpts:
            if cpt.node in self.cpts:
                raise ValueError(f"duplicate CPT for node {cpt.node!r}")
            self.cpts[cpt.node] = cpt
        if set(dag.nodes) != set(schema.names):
            raise ValueError("DAG nodes do not match schema variables")
        if not dag.is_acyclic():
            raise ValueError("DAG contains a cycle")
        if set(self.cpts) != set(schema.names):
            missing = sorted(set(schema.names) - set(self.cpts))
            raise ValueError(f"missing CPTs for {missing}")
        for name in schema.names:
            cpt = self.cpts[name]
            expected = dag.parents(name)
            if cpt.parents != expected:
                raise ValueError(
                    f"CPT parents {cpt.parents} for {name!r} do not match DAG parents {expected}"
                )
            q = int(np.prod([schema.cardinality(p) for p in cpt.parents])) if cpt.parents else 1
            if cpt.table.shape != (q, schema.cardinality(name)):
                raise ValueError(
                    f"CPT for {name!r} has shape {cpt.table.shape}, expected {(q, schema.cardinality(name))}"
                )

    def joint_size(self) -> int:
        return self.schema.joint_size()

    def cpt_row(self, node: str, assignment: Assignment) -> np.ndarray:
        """The CPT row of ``node`` selected by the parents' values in ``assignment``."""
        cpt = self.cpts[node]
        if not cpt.parents:
            return cpt.table[0]
        cards = [self.schema.cardinality(p) for p in cpt.parents]
        states = [assignment[p] for p in cpt.parents]
        return cpt.table[cpt.row_index(states, cards)]


@dataclass(frozen=True)
class DagViolation:
    kind: str  # "cycle" | "unknown-node" | "duplicate-arc" | "self-loop"
    detail: str


def validate_dag(dag: Dag, schema: NetworkSchema) -> list[DagViolation]:
    """Check Dag invariants against a schema; an empty list means ok.

    Violations are data, not failures: callers decide what to do with them.
    ``Dag`` construction already rejects self-loops and duplicate arcs (the
    arc set deduplicates), so those kinds surface only for hand-built inputs
    routed through :func:`validate_arc_list`.
    """
    violations: list[DagViolation] = []
    for n in dag.nodes:
        if n not in schema:
            violations.append(DagViolation("unknown-node", f"node {n!r} not in schema"))
    for p, c in sorted(dag.arcs):
        for endpoint in (p, c):
            if endpoint not in dag.nodes:
                violations.append(
                    DagViolation("unknown-node", f"arc endpoint {endpoint!r} not declared")
                )
    cycle = find_cycle(dag.nodes, dag.arcs)
    if cycle is not None:
        violations.append(DagViolation("cycle", "->".join(cycle)))
    return violations


def validate_arc_list(
    nodes: Sequence[str], arcs: Sequence[tuple[str, str]], schema: NetworkSchema
) -> list[DagViolation]:
    """Like :func:`validate_dag` but for a raw arc list that may carry
    duplicates, self-loops, or unknown endpoints."""
    violations: list[DagViolation] = []
    known = set(nodes)
    seen: set[tuple[str, str]] = set()
    clean: list[tuple[str, str]] = []
    for p, c in arcs:
        if p == c:
            violations.append(DagViolation("self-loop", f"{p}->{c}"))
            continue
        if (p, c) in seen:
            violations.append(DagViolation("duplicate-arc", f"{p}->{c}"))
            continue
        seen.add((p, c))
        bad = False
        for endpoint in (p, c):
            if endpoint not in known:
                violations.append(DagViolation("unknown-node", f"unknown node {endpoint!r}"))
                bad = True
        if not bad:
            clean.append((p, c))
    for n in nodes:
        if n not in schema:
            violations.append(DagViolation("unknown-node", f"node {n!r} not in schema"))
    cycle = find_cycle(list(nodes), clean)
    if cycle is not None:
        violations.append(DagViolation("cycle", "->".join(cycle)))
    return violations


def joint_probability(net: BayesianNetwork, assignment: Assignment) -> float:
    """Probability of a total assignment under the network's factorization.

    Accumulates in log space so that long products of small conditionals do
    not underflow; a single zero factor short-circuits to exactly 0.0.
    """
    missing = [n for n in net.schema.names if n not in assignment]
    if missing:
        raise ValueError(f"assignment is not total; missing {missing}")
    log_p = 0.0
    for name in net.schema.names:
        state = assignment[name]
        card = net.schema.cardinality(name)
        if not 0 <= state < card:
            raise ValueError(f"state index {state} out of range for {name!r}")
        p = net.cpt_row(name, assignment)[state]
        if p == 0.0:
            return 0.0
        log_p += math.log(p)
    return math.exp(log_p)


# --- the fourteen-variable colorectal-cancer reference network -------------

_REFERENCE_LEVELS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("v_sex", ("female", "male")),
    ("v_age", ("(24,34]", "(34,44]", "(44,54]", "(54,64]")),
    ("v_SES", ("1", "2", "3")),
    ("v_BMI", ("underweight", "normal", "overweight", "obese")),
    ("v_PA", ("1", "2")),
    ("v_SD", ("short", "normal", "excessive")),
    ("v_alc", ("low", "high")),
    ("v_smok", ("non-smoker", "ex-smoker", "smoker")),
    ("v_anx", ("yes", "no")),
    ("v_dep", ("yes", "no")),
    ("v_hypten", ("yes", "no")),
    ("v_hypchol", ("yes", "no")),
    ("v_diab", ("yes", "no")),
    ("v_CRC", ("yes", "no")),
)

_REFERENCE_PARENTS: dict[str, tuple[str, ...]] = {
    "v_sex": (),
    "v_age": (),
    "v_SES": ("v_sex", "v_age"),
    "v_SD": ("v_sex", "v_age"),
    "v_PA": ("v_sex", "v_age", "v_SD", "v_SES"),
    "v_dep": ("v_sex", "v_age", "v_SES"),
    "v_smok": ("v_sex", "v_age", "v_PA"),
    "v_alc": ("v_sex", "v_age", "v_smok"),
    "v_BMI": ("v_sex", "v_age", "v_PA", "v_smok"),
    "v_anx": ("v_sex", "v_SD", "v_smok", "v_dep"),
    "v_hypchol": ("v_sex", "v_age", "v_PA", "v_smok", "v_BMI", "v_alc"),
    "v_diab": ("v_sex", "v_age", "v_PA", "v_BMI"),
    "v_hypten": ("v_age", "v_PA", "v_smok", "v_BMI", "v_alc", "v_diab"),
    "v_CRC": ("v_sex", "v_age", "v_alc", "v_smok", "v_hypchol", "v_hypten", "v_diab"),
}


def reference_crc_network() -> tuple[NetworkSchema, Dag]:
    """The fourteen-variable colorectal-cancer schema and structure.

    Variable codes and state orders follow the published coding table; the
    parent sets follow the published factorization of the joint distribution.
    """
    schema = NetworkSchema(Variable(name, states) for name, states in _REFERENCE_LEVELS)
    arcs = [(p, child) for child, parents in _REFERENCE_PARENTS.items() for p in parents]
    dag = Dag(schema.names, arcs)
    return schema, dag
