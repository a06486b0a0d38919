import itertools

import pytest

from phyloag import expand_map, make_model, parse_newick
from phyloag.exactalg import Poly, Rat
from phyloag import paramap

from conftest import brute_force_eval, random_params, stochastic_jc_params


def test_three_leaf_general_markov_terms(tree3):
    """Free-root k=2 map on (1,(2,3)): each coordinate is the sum over the
    two root states and two internal states of pi * a * b * c * d."""
    m = make_model(tree3, "general-markov", root_mode="free", k=2)
    jm = expand_map(m)
    for i, j, k in itertools.product(range(2), repeat=3):
        expected = Poly()
        for r in range(2):
            for t in range(2):
                expected = expected + (Poly.var(f"pi{r}")
                                       * Poly.var(f"a{r}{i}")
                                       * Poly.var(f"b{r}{t}")
                                       * Poly.var(f"c{t}{j}")
                                       * Poly.var(f"d{t}{k}"))
        flat = paramap.LeafPattern((i, j, k)).flat_index(2)
        assert jm.coordinate(flat) == expected
        assert jm.coordinate(flat).num_terms() == 4


def test_degree_profile(tree3):
    free = expand_map(make_model(tree3, "general-markov", root_mode="free",
                                 k=2))
    assert paramap.degree_profile(free) == tree3.num_edges + 1 == 5
    uni = expand_map(make_model(tree3, "general-markov", k=2))
    assert paramap.degree_profile(uni) == 4
    one = expand_map(make_model(parse_newick("(1);"), "general-markov",
                                root_mode="free", k=2))
    assert paramap.degree_profile(one) == 2


def test_identity_transitions_propagate_root(tree3):
    m = make_model(tree3, "jc-binary", root_mode="free")
    jm = expand_map(m)
    params = {"pi0": Rat(2, 3), "pi1": Rat(1, 3)}
    for eid in range(tree3.num_edges):
        from phyloag.models import edge_letter
        params[f"{edge_letter(eid)}0"] = Rat(1)
        params[f"{edge_letter(eid)}1"] = Rat(0)
    vec = jm.eval(params)
    assert vec[0] == Rat(2, 3)
    assert vec[-1] == Rat(1, 3)
    assert all(v == 0 for v in vec[1:-1])


def test_maximal_mixing_uniform(tree4):
    m = make_model(tree4, "jc-dna")
    params = {}
    from phyloag.models import edge_letter
    for eid in range(tree4.num_edges):
        params[f"{edge_letter(eid)}0"] = Rat(1, 4)
        params[f"{edge_letter(eid)}1"] = Rat(1, 4)
    vec = expand_map(m).eval(params)
    assert all(v == Rat(1, 256) for v in vec)


@pytest.mark.parametrize("nwk, kind, root, k", [
    ("(1,(2,3));", "jc-dna", "uniform", None),
    ("(1,(2,3));", "kimura3", "uniform", None),
    ("((1,2),(3,4));", "general-markov", "free", 2),
    ("(1,2,3);", "reversible", "uniform", 3),
])
def test_circuit_matches_expansion(nwk, kind, root, k):
    tree = parse_newick(nwk)
    m = make_model(tree, kind, root_mode=root, k=k)
    jm = expand_map(m)
    for seed in range(5):
        params = random_params(m.symbols, seed)
        via_circuit = jm.eval(params)
        for i, v in enumerate(via_circuit):
            assert v == jm.coordinate(i).eval(params)


def test_circuit_matches_brute_force_oracle():
    # every k=2 shape with up to 4 leaves
    shapes = ["(1);", "(1,2);", "(1,(2,3));", "(1,2,3);",
              "((1,2),(3,4));", "(1,(2,(3,4)));", "(1,2,3,4);"]
    for nwk in shapes:
        tree = parse_newick(nwk)
        m = make_model(tree, "general-markov", root_mode="free", k=2)
        jm = expand_map(m)
        params = random_params(m.symbols, hash(nwk) % 1000)
        vec = jm.eval(params)
        for i, states in enumerate(itertools.product(range(2),
                                                     repeat=tree.num_leaves)):
            assert vec[i] == brute_force_eval(m, params, states)


def test_float_mode_close(tree3):
    m = make_model(tree3, "jc-binary")
    jm = expand_map(m)
    params = stochastic_jc_params(tree3, 2)
    exact = jm.eval(params)
    approx = jm.eval({s: float(v) for s, v in params.items()}, mode="float")
    for a, b in zip(exact, approx):
        assert abs(float(a) - b) < 1e-12


def test_op_counts_homogeneous(tree3):
    m = make_model(tree3, "homogeneous", root_mode="free", k=2,
                   homogeneous_base="general-markov")
    jm = expand_map(m)
    mul, add = jm.circuit.op_counts(jm.circuit.outputs[0])
    assert (mul, add) == (10, 3)
    emul, eadd = paramap.expanded_op_count(jm.coordinate(0))
    assert (emul, eadd) == (16, 3)


def test_op_count_monotone():
    for nwk, kind, k in [("(1,(2,3));", "jc-binary", None),
                         ("((1,2),(3,4));", "general-markov", 2)]:
        tree = parse_newick(nwk)
        jm = expand_map(make_model(tree, kind, k=k))
        for i in range(jm.num_coordinates):
            mul, _ = jm.circuit.op_counts(jm.circuit.outputs[i])
            emul, _ = paramap.expanded_op_count(jm.coordinate(i))
            assert mul <= emul


def test_symmetry_classes_jc_dna(tree3):
    jm = expand_map(make_model(tree3, "jc-dna"))
    classes = paramap.symmetry_classes(jm)
    assert [len(c) for c in classes] == [4, 12, 12, 12, 24]
    assert classes[0][0] == 0
    # deterministic: class order by smallest flat index
    firsts = [c[0] for c in classes]
    assert firsts == sorted(firsts)


def test_symmetry_classes_generic_are_singletons(tree3):
    jm = expand_map(make_model(tree3, "general-markov", k=2))
    assert all(len(c) == 1 for c in paramap.symmetry_classes(jm))


def test_accumulated_sum_is_one(tree3):
    m = make_model(tree3, "jc-dna")
    jm = expand_map(m)
    acc = paramap.accumulate_classes(jm)
    params = stochastic_jc_params(tree3, 4)
    total = sum((p.eval(params) for p in acc), Rat(0))
    assert total == 1


def test_multihomogeneous_per_edge(tree4):
    from phyloag.exactalg import VARS
    jm = expand_map(make_model(tree4, "jc-dna"))
    for i in (0, 17, 255):
        p = jm.coordinate(i)
        for mono in p.terms:
            # degree per edge symbol family, read off the leading letter
            by_edge = {}
            for vid, e in mono:
                letter = VARS.name(vid)[0]
                by_edge[letter] = by_edge.get(letter, 0) + e
            assert all(v == 1 for v in by_edge.values())
            assert len(by_edge) == tree4.num_edges


def test_no_hidden_monomial_map(tree3):
    m = make_model(tree3, "jc-binary", no_hidden=True)
    jm = expand_map(m)
    # one monomial per full assignment of all nodes
    for i in range(jm.num_coordinates):
        assert jm.coordinate(i).num_terms() == 1


def test_pattern_helpers(tree3):
    m = make_model(tree3, "jc-dna")
    assert paramap.pattern_label(m, (0, 1, 3)) == "ACT"
    assert paramap.parse_pattern(m, "ACT") == (0, 1, 3)
    assert paramap.pattern_of_flat(paramap.LeafPattern((0, 1, 3)).flat_index(4),
                                   3, 4) == (0, 1, 3)
