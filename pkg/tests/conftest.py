import itertools
import random

import pytest

from phyloag import parse_newick
from phyloag.exactalg import Rat


@pytest.fixture
def tree3():
    return parse_newick("(1,(2,3));")


@pytest.fixture
def tree4():
    return parse_newick("((1,2),(3,4));")


@pytest.fixture
def tree5():
    return parse_newick("((1,2),(3,(4,5)));")


def brute_force_eval(model, params, leaf_states):
    """Direct summation over all hidden-node assignments, no circuit.

    Independent oracle for the joint-probability map: iterates the full state
    space of the internal nodes and multiplies template entries.
    """
    tree = model.tree
    k = model.k
    hidden = [] if model.no_hidden else tree.internal_nodes()
    weights = model.root.weights(k)
    state = {leaf: s for leaf, s in zip(tree.leaves, leaf_states)}
    total = Rat(0)
    for assign in itertools.product(range(k), repeat=len(hidden)):
        state.update(zip(hidden, assign))
        w = weights[state[tree.root]]
        term = Rat(w) if isinstance(w, (Rat, int)) else Rat(params[w])
        for eid, (p, c) in enumerate(tree.edges):
            term *= Rat(params[model.templates[eid][state[p]][state[c]]])
        total += term
    return total


def random_rat(rng):
    return Rat(rng.randint(1, 97), rng.randint(1, 97))


def random_params(symbols, seed):
    rng = random.Random(seed)
    return {s: random_rat(rng) for s in symbols}


def stochastic_jc_params(tree, k, seed=0, denom_base=17):
    """Row-stochastic Jukes-Cantor parameter values, one rate per edge."""
    params = {}
    from phyloag.models import edge_letter
    for eid in range(tree.num_edges):
        letter = edge_letter(eid)
        a1 = Rat(1, denom_base + 2 * eid)
        params[f"{letter}1"] = a1
        params[f"{letter}0"] = 1 - (k - 1) * a1
    return params
