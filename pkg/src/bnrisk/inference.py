"""Exact inference: variable elimination, an enumeration oracle, sampling.

:func:`query` answers conditional queries by variable elimination with a
min-fill ordering; :func:`brute_force_query` answers the same queries by
materializing the full joint table and summing, and exists as an independent
cross-check (guarded to joint spaces of at most 2**25 states).
:func:`forward_sample` draws complete rows ancestrally for synthetic-data
generation. Factors renormalize at every elimination step and the running
log-normalization is folded back into the reported evidence probability, so
deep networks with rare evidence do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._kernels import categorical_rows, mixed_radix_strides
from .data import Dataset
from .model import BayesianNetwork, Dag, Evidence, NetworkSchema

JOINT_STATE_LIMIT = 1 << 25


class ImpossibleEvidenceError(ValueError):
    """The evidence has probability zero under the network."""


class OracleInfeasibleError(ValueError):
    """The joint state space is too large for enumeration."""


@dataclass(frozen=True)
class QueryResult:
    target: str
    distribution: np.ndarray
    evidence_probability: float

    def __post_init__(self):
        dist = np.ascontiguousarray(self.distribution, dtype=np.float64)
        if abs(float(dist.sum()) - 1.0) > 1e-9:
            raise ValueError(f"distribution sums to {dist.sum()!r}, not 1")
        dist.setflags(write=False)
        object.__setattr__(self, "distribution", dist)


@dataclass
class Factor:
    """Dense table over an ordered variable scope (axes follow the scope)."""

    scope: tuple[str, ...]
    values: np.ndarray


def _align(f: Factor, union: tuple[str, ...]) -> np.ndarray:
    """View of ``f.values`` broadcastable over the union scope."""
    pos = {v: i for i, v in enumerate(union)}
    order = sorted(range(len(f.scope)), key=lambda i: pos[f.scope[i]])
    vals = f.values.transpose(order) if f.scope else f.values
    present = {f.scope[i] for i in order}
    slicer = tuple(slice(None) if v in present else None for v in union)
    return vals[slicer]


def _multiply(a: Factor, b: Factor, schema: NetworkSchema) -> Factor:
    union = tuple(sorted(set(a.scope) | set(b.scope), key=schema.index))
    return Factor(union, _align(a, union) * _align(b, union))


def _sum_out(f: Factor, var: str) -> Factor:
    ax = f.scope.index(var)
    scope = f.scope[:ax] + f.scope[ax + 1 :]
    return Factor(scope, f.values.sum(axis=ax))


def _reduce_evidence(f: Factor, evidence: Mapping[str, int]) -> Factor:
    for var in [v for v in f.scope if v in evidence]:
        ax = f.scope.index(var)
        f = Factor(f.scope[:ax] + f.scope[ax + 1 :], np.take(f.values, evidence[var], axis=ax))
    return f


def _cpt_factor(net: BayesianNetwork, node: str) -> Factor:
    cpt = net.cpts[node]
    scope = cpt.parents + (node,)
    shape = tuple(net.schema.cardinality(v) for v in scope)
    return Factor(scope, cpt.table.reshape(shape))


def _min_fill_order(elim: set[str], factors: Sequence[Factor]) -> list[str]:
    """Greedy min-fill elimination order, ties broken lexicographically."""
    neighbors: dict[str, set[str]] = {}
    for f in factors:
        for v in f.scope:
            neighbors.setdefault(v, set()).update(u for u in f.scope if u != v)
    remaining = set(elim)
    order: list[str] = []
    while remaining:
        best = None
        for v in sorted(remaining):
            nbrs = [u for u in neighbors.get(v, ()) if u in neighbors]
            fill = 0
            for i, u in enumerate(nbrs):
                for w in nbrs[i + 1 :]:
                    if w not in neighbors[u]:
                        fill += 1
            if best is None or fill < best[0]:
                best = (fill, v)
        v = best[1]
        nbrs = [u for u in neighbors.pop(v) if u in neighbors]
        for u in nbrs:
            neighbors[u].discard(v)
            neighbors[u].update(w for w in nbrs if w != u)
        remaining.discard(v)
        order.append(v)
    return order


def _check_evidence(schema: NetworkSchema, evidence: Mapping[str, int], target: str) -> dict[str, int]:
    if target not in schema:
        raise KeyError(f"unknown variable {target!r}")
    ev = {}
    for name, value in evidence.items():
        if name not in schema:
            raise KeyError(f"unknown variable {name!r}")
        if name == target:
            raise ValueError("target variable cannot appear in the evidence")
        if not 0 <= int(value) < schema.cardinality(name):
            raise ValueError(f"state index {value} out of range for {name!r}")
        ev[name] = int(value)
    return ev


def query(net: BayesianNetwork, evidence: Evidence, target: str) -> QueryResult:
    """Exact p(target | evidence) by variable elimination."""
    schema = net.schema
    ev = _check_evidence(schema, evidence, target)
    factors = [_reduce_evidence(_cpt_factor(net, node), ev) for node in schema.names]
    elim = {v for v in schema.names if v != target and v not in ev}
    log_norm = 0.0
    order = _min_fill_order(elim, factors)
    for v in order:
        group = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        prod = reduce(lambda a, b: _multiply(a, b, schema), group)
        summed = _sum_out(prod, v)
        total = float(summed.values.sum())
        if total <= 0.0:
            raise ImpossibleEvidenceError("impossible evidence")
        summed.values = summed.values / total
        log_norm += math.log(total)
        factors.append(summed)
    prod = reduce(lambda a, b: _multiply(a, b, schema), factors)
    if prod.scope != (target,):
        prod = Factor((target,), _align(prod, (target,)) * np.ones(schema.cardinality(target)))
    vec = np.asarray(prod.values, dtype=np.float64)
    z = float(vec.sum())
    p_evidence = math.exp(log_norm) * z
    if p_evidence <= 0.0 or z <= 0.0:
        raise ImpossibleEvidenceError("impossible evidence")
    return QueryResult(target, vec / z, min(p_evidence, 1.0))


class JointTable:
    """Full joint distribution as a dense array; exact queries by summation.

    Built by broadcasting every CPT over the joint state space (axes in
    schema order), independently of the elimination machinery, so it doubles
    as the enumeration oracle. Also the fast path for workloads that issue
    thousands of queries against one fixed network.
    """

    def __init__(self, net: BayesianNetwork, limit: int = JOINT_STATE_LIMIT):
        size = net.joint_size()
        if size > limit:
            raise OracleInfeasibleError(
                f"oracle infeasible: {size} joint states exceeds limit {limit}"
            )
        self.schema = net.schema
        shape = tuple(int(c) for c in net.schema.cardinalities)
        arr = np.ones(shape, dtype=np.float64)
        names = net.schema.names
        for node in names:
            cpt = net.cpts[node]
            axes = cpt.parents + (node,)
            nd = cpt.table.reshape(tuple(net.schema.cardinality(v) for v in axes))
            order = sorted(range(len(axes)), key=lambda i: net.schema.index(axes[i]))
            nd = nd.transpose(order)
            present = set(axes)
            slicer = tuple(slice(None) if v in present else None for v in names)
            arr = arr * nd[slicer]
        self.array = arr
        self.flat = arr.reshape(-1)
        self.strides = mixed_radix_strides(net.schema.cardinalities)

    def probability(self, evidence: Mapping[str, int]) -> float:
        idx = tuple(
            evidence.get(name, slice(None)) for name in self.schema.names
        )
        sub = self.array[idx]
        return float(sub.sum()) if getattr(sub, "ndim", 0) else float(sub)

    def conditional(self, evidence: Evidence, target: str) -> QueryResult:
        ev = _check_evidence(self.schema, evidence, target)
        idx = tuple(ev.get(name, slice(None)) for name in self.schema.names)
        sub = self.array[idx]
        remaining = [n for n in self.schema.names if n not in ev]
        t_ax = remaining.index(target)
        other = tuple(i for i in range(sub.ndim) if i != t_ax)
        vec = sub.sum(axis=other) if other else np.asarray(sub, dtype=np.float64)
        p_evidence = float(vec.sum())
        if p_evidence <= 0.0:
            raise ImpossibleEvidenceError("impossible evidence")
        return QueryResult(target, vec / p_evidence, min(p_evidence, 1.0))

    def row_scores(self, codes: np.ndarray, target: str) -> tuple[np.ndarray, np.ndarray]:
        """Per-row p(target states, row evidence) for complete-evidence rows.

        ``codes`` holds one column per schema variable; the target column is
        ignored. Returns (mass matrix (n, K), evidence probability vector).
        """
        t = self.schema.index(target)
        k = int(self.schema.cardinalities[t])
        other = [j for j in range(len(self.schema)) if j != t]
        base = codes[:, other].astype(np.int64) @ self.strides[other]
        gather = self.flat[base[:, None] + self.strides[t] * np.arange(k)]
        return gather, gather.sum(axis=1)


def brute_force_query(net: BayesianNetwork, evidence: Evidence, target: str) -> QueryResult:
    """Enumeration oracle: condition the materialized joint by summation."""
    return JointTable(net).conditional(evidence, target)


def forward_sample(
    net: BayesianNetwork, n: int, seed, year: int = 0, name: str = "synthetic"
) -> Dataset:
    """Draw ``n`` complete rows ancestrally (topological order over the DAG).

    Deterministic for a fixed seed: uniforms are drawn per node in topological
    order and mapped through cumulative CPT rows.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    schema = net.schema
    rng = np.random.default_rng(seed)
    codes = np.zeros((n, len(schema)), dtype=np.int16)
    for node in net.dag.topological_order():
        j = schema.index(node)
        cpt = net.cpts[node]
        if cpt.parents:
            cols = [schema.index(p) for p in cpt.parents]
            cards = schema.cardinalities[cols]
            cfg = codes[:, cols].astype(np.int64) @ mixed_radix_strides(cards)
        else:
            cfg = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(cpt.table, axis=1)
        u = rng.random(n)
        codes[:, j] = categorical_rows(cum, cfg, u)
    years = np.full(n, year, dtype=np.int32)
    return Dataset(schema, codes, years, name)


def is_d_separated(
    dag: Dag, x: Iterable[str], y: Iterable[str], z: Iterable[str] = ()
) -> bool:
    """Decide whether node sets ``x`` and ``y`` are d-separated by ``z``.

    Classic ancestral moral graph test: keep the ancestors of x, y, z, marry
    co-parents, drop directions, remove z, and check graph separation.
    """
    x, y, z = set(x), set(y), set(z)
    if (x & y) or (x & z) or (y & z):
        raise ValueError("x, y, z must be disjoint")
    known = set(dag.nodes)
    for n in x | y | z:
        if n not in known:
            raise KeyError(f"unknown node {n!r}")

    parents: dict[str, set[str]] = {n: set() for n in dag.nodes}
    for p, c in dag.arcs:
        parents[c].add(p)

    relevant = set()
    frontier = list(x | y | z)
    while frontier:
        n = frontier.pop()
        if n in relevant:
            continue
        relevant.add(n)
        frontier.extend(parents[n])

    adj: dict[str, set[str]] = {n: set() for n in relevant}
    for c in relevant:
        ps = [p for p in parents[c] if p in relevant]
        for p in ps:
            adj[p].add(c)
            adj[c].add(p)
        for i, p in enumerate(ps):
            for q in ps[i + 1 :]:
                adj[p].add(q)
                adj[q].add(p)

    blocked = z
    seen = set()
    frontier = [n for n in x if n not in blocked]
    while frontier:
        n = frontier.pop()
        if n in seen:
            continue
        seen.add(n)
        if n in y:
            return False
        frontier.extend(u for u in adj[n] if u not in blocked and u not in seen)
    return True
