"""The joint-probability map of a (tree, model) pair.

Two synchronized representations: per-coordinate expanded polynomials (lazy)
and a shared factored circuit built by sum-product message passing up the
tree, with subexpression sharing by structural hashing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .exactalg import Poly, Rat
from . import models as _models

SYM = "sym"
CONST = "const"
ADD = "add"
MUL = "mul"


@dataclass(frozen=True)
class LeafPattern:
    states: tuple

    def flat_index(self, k):
        idx = 0
        for s in self.states:
            idx = idx * k + s
        return idx


def pattern_of_flat(idx, n, k):
    states = []
    for _ in range(n):
        states.append(idx % k)
        idx //= k
    return tuple(reversed(states))


def pattern_label(model, states):
    return "".join(_models.state_label(model, s) for s in states)


def parse_pattern(model, text):
    return tuple(_models.state_index(model, ch) for ch in text)


class Circuit:
    """DAG of +, x, constant and symbol nodes with one output per coordinate.

    Nodes are hash-consed: commutative children are sorted, so a0*a0 built
    twice is a single node.  Constants are free in the operation counters.
    """

    def __init__(self):
        self.ops = []        # (kind, payload) payload: name | Rat | child ids
        self._memo = {}
        self.outputs = {}    # flat coordinate index -> node id

    def _node(self, kind, payload):
        key = (kind, payload)
        nid = self._memo.get(key)
        if nid is None:
            nid = len(self.ops)
            self.ops.append((kind, payload))
            self._memo[key] = nid
        return nid

    def sym(self, name):
        return self._node(SYM, name)

    def const(self, value):
        return self._node(CONST, Rat(value))

    def add(self, children):
        children = tuple(sorted(children))
        if len(children) == 1:
            return children[0]
        return self._node(ADD, children)

    def mul(self, children):
        # drop unit constants, fold in a single constant factor
        flat = []
        for c in children:
            kind, payload = self.ops[c]
            if kind == CONST and payload == 1:
                continue
            flat.append(c)
        if not flat:
            return self.const(1)
        flat = tuple(sorted(flat))
        if len(flat) == 1:
            return flat[0]
        return self._node(MUL, flat)

    # -- traversal ---------------------------------------------------------

    def _reachable(self, nid):
        seen = set()
        stack = [nid]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            kind, payload = self.ops[v]
            if kind in (ADD, MUL):
                stack.extend(payload)
        return seen

    def op_counts(self, nid):
        """(multiplications, additions) for one output, shared nodes counted
        once; constants are free."""
        mults = adds = 0
        for v in self._reachable(nid):
            kind, payload = self.ops[v]
            if kind == ADD:
                adds += len(payload) - 1
            elif kind == MUL:
                priced = [c for c in payload if self.ops[c][0] != CONST]
                mults += max(len(priced) - 1, 0)
        return mults, adds

    def eval(self, assignment, mode="exact", outputs=None):
        """Evaluate outputs at a symbol assignment; exact mode uses Rat."""
        conv = (lambda x: Rat(x)) if mode == "exact" else float
        cache = {}

        def value(v):
            if v in cache:
                return cache[v]
            kind, payload = self.ops[v]
            if kind == SYM:
                if payload not in assignment:
                    raise KeyError(f"missing symbol {payload!r}")
                out = conv(assignment[payload])
            elif kind == CONST:
                out = conv(payload)
            elif kind == ADD:
                out = sum(value(c) for c in payload)
            else:
                out = conv(1)
                for c in payload:
                    out = out * value(c)
            cache[v] = out
            return out

        keys = sorted(self.outputs) if outputs is None else outputs
        return [value(self.outputs[i]) for i in keys]

    def jacobian(self, assignment, symbols):
        """Exact forward-mode derivatives of every output w.r.t. symbols.

        Returns (values, rows) where rows[i] is the dense gradient of output
        i in the given symbol order.
        """
        sym_pos = {s: j for j, s in enumerate(symbols)}
        cache = {}

        def fwd(v):
            if v in cache:
                return cache[v]
            kind, payload = self.ops[v]
            if kind == SYM:
                val = Rat(assignment[payload])
                grad = {}
                if payload in sym_pos:
                    grad[sym_pos[payload]] = Rat(1)
            elif kind == CONST:
                val, grad = Rat(payload), {}
            elif kind == ADD:
                val, grad = Rat(0), {}
                for c in payload:
                    cv, cg = fwd(c)
                    val += cv
                    for j, g in cg.items():
                        grad[j] = grad.get(j, Rat(0)) + g
            else:
                vals = []
                grads = []
                for c in payload:
                    cv, cg = fwd(c)
                    vals.append(cv)
                    grads.append(cg)
                val = Rat(1)
                for cv in vals:
                    val *= cv
                grad = {}
                for i, cg in enumerate(grads):
                    if not cg:
                        continue
                    rest = Rat(1)
                    for j2, cv in enumerate(vals):
                        if j2 != i:
                            rest *= cv
                    for j, g in cg.items():
                        grad[j] = grad.get(j, Rat(0)) + g * rest
            cache[v] = (val, grad)
            return cache[v]

        values, rows = [], []
        for i in sorted(self.outputs):
            val, grad = fwd(self.outputs[i])
            values.append(val)
            rows.append([grad.get(j, Rat(0)) for j in range(len(symbols))])
        return values, rows


class JointMap:
    """Joint-probability map of a model: lazy expanded polynomials per
    coordinate plus the shared circuit."""

    def __init__(self, model):
        self.model = model
        self.k = model.k
        self.n = model.tree.num_leaves
        # without hidden nodes every node is observed and indexes the output
        self.observed = sorted(model.tree.children) if model.no_hidden \
            else model.tree.leaves
        self._polys = {}
        self.circuit = build_circuit(model)

    @property
    def num_coordinates(self):
        return self.k ** len(self.observed)

    def coordinate(self, flat_index):
        """Expanded polynomial of one coordinate (cached)."""
        if flat_index not in self._polys:
            states = pattern_of_flat(flat_index, len(self.observed), self.k)
            self._polys[flat_index] = _expand_coordinate(
                self.model, states, self.observed)
        return self._polys[flat_index]

    def coordinates(self):
        return [self.coordinate(i) for i in range(self.num_coordinates)]

    def eval(self, params, mode="exact"):
        return self.circuit.eval(params, mode=mode)

    def jacobian(self, params, symbols=None):
        symbols = symbols or self.model.symbols
        _, rows = self.circuit.jacobian(params, symbols)
        return rows

    def symbols(self):
        return self.model.symbols


def _hidden_nodes(model):
    tree = model.tree
    if model.no_hidden:
        return []
    return tree.internal_nodes()


def _expand_coordinate(model, observed_states, observed=None):
    tree = model.tree
    k = model.k
    if observed is None:
        observed = tree.leaves
    state = {node: s for node, s in zip(observed, observed_states)}
    hidden = _hidden_nodes(model)
    weights = model.root.weights(k)
    out = Poly()
    for assign in itertools.product(range(k), repeat=len(hidden)):
        state.update(zip(hidden, assign))
        w = weights[state[tree.root]]
        term = Poly.const(w) if isinstance(w, Rat) else Poly.var(w)
        for eid, (p, c) in enumerate(tree.edges):
            term = term * Poly.var(model.templates[eid][state[p]][state[c]])
        out = out + term
    return out


def expand_map(model):
    """JointMap for the model (coordinates expand lazily on access)."""
    return JointMap(model)


def degree_profile(joint_map):
    """Common total degree of the coordinates (edge count plus one with a free
    root, edge count with a uniform root)."""
    degs = {joint_map.coordinate(i).degree()
            for i in range(joint_map.num_coordinates)}
    degs.discard(-1)
    if len(degs) != 1:
        raise ValueError(f"coordinates are not equigraded: {sorted(degs)}")
    return degs.pop()


def build_circuit(model):
    """Factored sum-product circuit, messages passed up the tree."""
    tree = model.tree
    k = model.k
    circ = Circuit()
    if model.no_hidden:
        return _build_circuit_no_hidden(model, circ)
    weights = model.root.weights(k)

    def message(node, node_state, leaf_states):
        """Factor for the subtree below `node` given its state."""
        factors = []
        for c in tree.children[node]:
            eid = tree.edge_id(node, c)
            tpl = model.templates[eid]
            if tree.is_leaf(c):
                factors.append(circ.sym(tpl[node_state][leaf_states[c]]))
            else:
                terms = []
                for t in range(k):
                    edge = circ.sym(tpl[node_state][t])
                    terms.append(circ.mul([edge, message(c, t, leaf_states)]))
                factors.append(circ.add(terms))
        return circ.mul(factors)

    n = tree.num_leaves
    for states in itertools.product(range(k), repeat=n):
        leaf_states = dict(zip(tree.leaves, states))
        terms = []
        for s in range(k):
            w = weights[s]
            wnode = circ.const(w) if isinstance(w, Rat) else circ.sym(w)
            body = message(tree.root, s, leaf_states)
            terms.append(circ.mul([wnode, body]))
        flat = LeafPattern(states).flat_index(k)
        circ.outputs[flat] = circ.add(terms)
    return circ


def _build_circuit_no_hidden(model, circ):
    # all nodes observed: one monomial per full state assignment
    tree = model.tree
    k = model.k
    weights = model.root.weights(k)
    nodes = sorted(tree.children)
    for states in itertools.product(range(k), repeat=len(nodes)):
        state = dict(zip(nodes, states))
        w = weights[state[tree.root]]
        factors = [circ.const(w) if isinstance(w, Rat) else circ.sym(w)]
        for eid, (p, c) in enumerate(tree.edges):
            factors.append(circ.sym(model.templates[eid][state[p]][state[c]]))
        flat = 0
        for v in nodes:
            flat = flat * k + state[v]
        circ.outputs[flat] = circ.mul(factors)
    return circ


def eval_map(joint_map, params, mode="exact"):
    """Coordinate vector (length k^n) via the circuit."""
    return joint_map.eval(params, mode=mode)


def expanded_op_count(poly):
    """(multiplications, additions) for naive evaluation of an expanded
    polynomial; powers count as repeated multiplication, unit coefficients are
    free."""
    mults = 0
    for m, c in poly.terms.items():
        deg = sum(e for _, e in m)
        mults += max(deg - 1, 0)
        if abs(c) != 1 and deg > 0:
            mults += 1
    adds = max(poly.num_terms() - 1, 0)
    return mults, adds


def symmetry_classes(joint_map):
    """Partition of flat coordinate indices by equality of the expanded
    polynomials, classes ordered by smallest member."""
    groups = {}
    for i in range(joint_map.num_coordinates):
        p = joint_map.coordinate(i)
        key = frozenset(p.terms.items())
        groups.setdefault(key, []).append(i)
    classes = sorted(groups.values(), key=lambda g: g[0])
    return classes


def accumulate_classes(joint_map, classes=None):
    """Per symmetry class, class size times the representative polynomial."""
    if classes is None:
        classes = symmetry_classes(joint_map)
    return [joint_map.coordinate(g[0]) * len(g) for g in classes]
