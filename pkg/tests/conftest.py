"""Shared fixtures: small reference nets, random-network generator, oracles."""

from __future__ import annotations

from itertools import product

import numpy as np
import pytest

import bnrisk as b
from bnrisk.params import initial_posterior


def make_net(variables, arcs, tables):
    """Build a network from {name: states}, arc list, {name: (Q, K) rows}."""
    schema = b.NetworkSchema([b.Variable(n, tuple(s)) for n, s in variables])
    dag = b.Dag(schema.names, arcs)
    cpts = [b.Cpt(n, dag.parents(n), np.asarray(tables[n], dtype=float)) for n in schema.names]
    return b.BayesianNetwork(schema, dag, cpts)


@pytest.fixture
def t2_net():
    """Two binary nodes: p(A=1)=0.3, p(B=1|A=0)=0.2, p(B=1|A=1)=0.6."""
    return make_net(
        [("A", ("0", "1")), ("B", ("0", "1"))],
        [("A", "B")],
        {"A": [[0.7, 0.3]], "B": [[0.8, 0.2], [0.4, 0.6]]},
    )


@pytest.fixture
def chain3_net():
    """A->B->C with p(child = parent) = 0.9."""
    flip = [[0.9, 0.1], [0.1, 0.9]]
    return make_net(
        [("A", ("0", "1")), ("B", ("0", "1")), ("C", ("0", "1"))],
        [("A", "B"), ("B", "C")],
        {"A": [[0.5, 0.5]], "B": flip, "C": flip},
    )


def random_network(rng: np.random.Generator, max_nodes=6, max_states=4, arc_prob=0.4):
    """Random small network: random DAG over a random topological order,
    CPT rows drawn from a flat Dirichlet."""
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"X{i}" for i in range(n)]
    cards = rng.integers(2, max_states + 1, size=n)
    order = rng.permutation(n)
    arcs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < arc_prob:
                arcs.append((names[order[i]], names[order[j]]))
    schema = b.NetworkSchema([b.Variable(names[i], tuple(str(s) for s in range(cards[i]))) for i in range(n)])
    dag = b.Dag(schema.names, arcs)
    cpts = []
    for i, name in enumerate(names):
        parents = dag.parents(name)
        q = int(np.prod([schema.cardinality(p) for p in parents])) if parents else 1
        rows = rng.dirichlet(np.ones(cards[i]), size=q)
        cpts.append(b.Cpt(name, parents, rows))
    return b.BayesianNetwork(schema, dag, cpts)


def enumeration_conditional(net, evidence, target):
    """Literal oracle: sum joint_probability over every completion."""
    schema = net.schema
    free = [n for n in schema.names if n not in evidence and n != target]
    k = schema.cardinality(target)
    mass = np.zeros(k)
    for t_state in range(k):
        for combo in product(*[range(schema.cardinality(v)) for v in free]):
            a = dict(evidence)
            a[target] = t_state
            a.update(zip(free, combo))
            mass[t_state] += b.joint_probability(net, a)
    p_ev = mass.sum()
    return mass / p_ev, p_ev


@pytest.fixture(scope="session")
def reference_model():
    """Posterior for the 14-variable network: marginal prior + 50k synthetic rows."""
    schema, dag = b.reference_crc_network()
    marg = {v.name: b.POPULATION_MARGINALS.normalized(v.name) for v in schema.variables}
    prior = b.build_prior(marg, b.PUBLISHED_ALPHA)
    post0 = initial_posterior(prior, schema, dag)
    generator = b.posterior_mean_network(post0)
    ds = b.forward_sample(generator, 50_000, seed=2012, year=2012)
    return b.fit(post0, ds)


@pytest.fixture(scope="session")
def reference_positives(reference_model):
    """Synthetic positive cases drawn from the fitted reference model."""
    schema = reference_model.schema
    net = b.posterior_mean_network(reference_model)
    ds = b.forward_sample(net, 300_000, seed=77)
    yes = schema.state_index("v_CRC", "yes")
    pos = ds.select(ds.column("v_CRC") == yes, name="positives")
    assert pos.n_rows >= 100
    return b.Dataset(schema, pos.codes[:100], pos.years[:100], "positives")
