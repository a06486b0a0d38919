"""Rooted leaf-labeled trees: Newick parsing, edge splits and subforest
enumeration.

Edge ids are assigned 0..E-1 in pre-order from the root with children in
source order; every edge/indicator vector downstream of this module uses that
order.  Leaves keep their first-appearance order from the source text.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


class NewickError(ValueError):
    """Malformed Newick input; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Split:
    """Leaf bipartition induced by removing one edge."""

    edge: int
    below: frozenset
    above: frozenset


@dataclass(frozen=True)
class Subforest:
    """Edge-indicator vector of a subforest (one bit per edge id)."""

    indicator: tuple

    def edges(self):
        return [i for i, b in enumerate(self.indicator) if b]

    def __str__(self):
        return "".join(str(b) for b in self.indicator)


@dataclass
class Tree:
    """Rooted tree with ordered labeled leaves and pre-order edge ids."""

    root: int
    children: dict
    parent: dict
    edges: list            # list of (parent, child); index = edge id
    leaves: list           # leaf node ids in source order
    labels: dict           # leaf node id -> label
    source: str = ""
    _below: dict = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_leaves(self):
        return len(self.leaves)

    @property
    def leaf_labels(self):
        return [self.labels[v] for v in self.leaves]

    def nodes(self):
        return list(self.children)

    def internal_nodes(self):
        return [v for v in self.children if self.children[v]]

    def is_leaf(self, v):
        return not self.children[v]

    def edge_id(self, parent, child):
        return self.edges.index((parent, child))

    def child_of_edge(self, eid):
        return self.edges[eid][1]

    def leaves_below(self, v):
        """Set of leaf labels in the subtree under node v (cached)."""
        if v not in self._below:
            if self.is_leaf(v):
                self._below[v] = frozenset({self.labels[v]})
            else:
                acc = frozenset()
                for c in self.children[v]:
                    acc |= self.leaves_below(c)
                self._below[v] = acc
        return self._below[v]

    def is_binary(self):
        return all(len(self.children[v]) == 2 for v in self.internal_nodes())

    # -- layout ------------------------------------------------------------

    def node_x(self):
        """Horizontal drawing position: leaf index, internal = child mean."""
        x = {v: float(i) for i, v in enumerate(self.leaves)}

        def fill(v):
            if v not in x:
                x[v] = sum(fill(c) for c in self.children[v]) / len(self.children[v])
            return x[v]

        fill(self.root)
        return x

    def to_newick(self):
        def fmt(v):
            if self.is_leaf(v):
                return self.labels[v]
            return "(" + ",".join(fmt(c) for c in self.children[v]) + ")"

        return fmt(self.root) + ";"


def parse_newick(text):
    """Parse a Newick expression (terminated by ';') into a Tree.

    Leaf labels must be nonempty alphanumeric (plus '_' and '.') and unique.
    Raises NewickError with the offending position on malformed input.
    """
    s = text.strip()
    if not s.endswith(";"):
        raise NewickError("missing terminating ';'", len(text))
    s = s[:-1]
    children = {}
    parent = {}
    labels = {}
    leaves = []
    counter = itertools.count()

    def new_node():
        v = next(counter)
        children[v] = []
        return v

    pos = 0

    def parse_subtree():
        nonlocal pos
        v = new_node()
        if pos < len(s) and s[pos] == "(":
            pos += 1
            while True:
                c = parse_subtree()
                children[v].append(c)
                parent[c] = v
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    continue
                break
            if pos >= len(s) or s[pos] != ")":
                raise NewickError("unbalanced parentheses", pos)
            pos += 1
        else:
            start = pos
            while pos < len(s) and (s[pos].isalnum() or s[pos] in "_."):
                pos += 1
            label = s[start:pos]
            if not label:
                raise NewickError("empty subtree or missing label", start)
            if label in labels.values():
                raise NewickError(f"duplicate leaf label {label!r}", start)
            labels[v] = label
            leaves.append(v)
        return v

    root = parse_subtree()
    if pos != len(s):
        raise NewickError("trailing characters after tree", pos)

    edges = []

    def preorder(v):
        for c in children[v]:
            edges.append((v, c))
            preorder(c)

    preorder(root)
    return Tree(root=root, children=children, parent=parent, edges=edges,
                leaves=leaves, labels=labels, source=text.strip())


def read_newick(path):
    """One tree per file, UTF-8."""
    with open(path, encoding="utf-8") as fh:
        return parse_newick(fh.read())


def write_newick(tree, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(tree.to_newick() + "\n")


def edge_split(tree, edge):
    """Split of the leaf set induced by an edge; below = leaves under the
    child endpoint."""
    if not 0 <= edge < tree.num_edges:
        raise KeyError(f"unknown edge id {edge}")
    below = tree.leaves_below(tree.child_of_edge(edge))
    above = frozenset(tree.leaf_labels) - below
    return Split(edge=edge, below=below, above=above)


def is_subforest(tree, edge_set):
    """True when every degree-1 vertex of the edge-induced subgraph is a leaf
    of the original tree (the empty set qualifies)."""
    deg = {}
    for e in edge_set:
        p, c = tree.edges[e]
        deg[p] = deg.get(p, 0) + 1
        deg[c] = deg.get(c, 0) + 1
    return all(d != 1 or tree.is_leaf(v) for v, d in deg.items())


def enumerate_subforests(tree):
    """All subforests, ordered lexicographically by indicator vector.

    Recursive two-state enumeration: for each node, collect edge sets that are
    valid standalone versus valid once the parent edge is attached.
    """
    def collect(v):
        # returns (standalone, attachable): lists of frozensets of edge ids
        if tree.is_leaf(v):
            return [frozenset()], [frozenset()]
        options = []  # per child: list of (included?, edge set)
        for c in tree.children[v]:
            eid = tree.edge_id(v, c)
            c_stand, c_attach = collect(c)
            opts = [(0, s) for s in c_stand]
            opts += [(1, s | {eid}) for s in c_attach]
            options.append(opts)
        standalone, attachable = [], []
        for combo in itertools.product(*options):
            inc = sum(flag for flag, _ in combo)
            merged = frozenset().union(*(s for _, s in combo))
            if inc != 1:
                standalone.append(merged)
            if inc >= 1:
                attachable.append(merged)
        return standalone, attachable

    standalone, _ = collect(tree.root)
    E = tree.num_edges
    indicators = sorted(
        tuple(1 if e in s else 0 for e in range(E)) for s in standalone
    )
    return [Subforest(ind) for ind in indicators]


def display_edge_order(tree):
    """Edge ids sorted by the left-to-right position of the edge midpoint in
    the standard drawing (ties broken by pre-order id)."""
    x = tree.node_x()
    mids = [((x[p] + x[c]) / 2, i) for i, (p, c) in enumerate(tree.edges)]
    mids.sort()
    return [i for _, i in mids]


def fibonacci(m):
    a, b = 1, 1
    for _ in range(m - 1):
        a, b = b, a + b
    return a
