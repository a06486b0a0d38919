"""Model families: per-edge transition-matrix templates with parameter ties
and a root-distribution mode.

A template is a k x k array of parameter symbol names; repeating a symbol
encodes a tie.  The group element <-> state bijection for DNA is fixed as
A=(0,0), C=(0,1), G=(1,0), T=(1,1).
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass

from .exactalg import Rat, rat
from . import treecore

DNA = "ACGT"
KINDS = ("general-markov", "jc-binary", "jc-dna", "kimura2", "kimura3",
         "reversible", "homogeneous")

# Z2 x Z2 group structure on DNA states, identity first
GROUP_Z2Z2 = [(0, 0), (0, 1), (1, 0), (1, 1)]


def edge_letter(i):
    if i < 26:
        return string.ascii_lowercase[i]
    return f"e{i}"


@dataclass(frozen=True)
class RootSpec:
    mode: str                  # "uniform" | "free"
    symbols: tuple = ()

    def weights(self, k):
        """Root weight per state: Rat(1/k) in uniform mode, symbol names in
        free mode."""
        if self.mode == "uniform":
            return [Rat(1, k)] * k
        return list(self.symbols)


@dataclass
class ModelSpec:
    kind: str
    k: int
    tree: treecore.Tree
    templates: list            # per edge id: k x k list of symbol names
    root: RootSpec
    no_hidden: bool = False
    prefix: str = ""

    @property
    def symbols(self):
        """Distinct parameter symbols, deterministic order."""
        seen = []
        have = set()
        for tpl in self.templates:
            for row in tpl:
                for s in row:
                    if s not in have:
                        have.add(s)
                        seen.append(s)
        if self.root.mode == "free":
            for s in self.root.symbols:
                if s not in have:
                    have.add(s)
                    seen.append(s)
        return seen

    def is_group_based(self):
        return self.kind in ("jc-binary", "jc-dna", "kimura2", "kimura3")


def _template(kind, k, letter):
    if kind == "general-markov":
        return [[f"{letter}{i}{j}" for j in range(k)] for i in range(k)]
    if kind == "jc-binary":
        return [[f"{letter}0", f"{letter}1"], [f"{letter}1", f"{letter}0"]]
    if kind == "jc-dna":
        return [[f"{letter}0" if i == j else f"{letter}1" for j in range(4)]
                for i in range(4)]
    if kind in ("kimura2", "kimura3"):
        # cell (g, h) depends only on g + h in Z2 x Z2
        def idx(g, h):
            s = (g[0] ^ h[0], g[1] ^ h[1])
            i = GROUP_Z2Z2.index(s)
            if kind == "kimura2" and i == 3:
                i = 2   # tie the (1,1)-coset to the (1,0)-coset
            return i
        return [[f"{letter}{idx(g, h)}" for h in GROUP_Z2Z2] for g in GROUP_Z2Z2]
    if kind == "reversible":
        return [[f"{letter}{min(i, j)}{max(i, j)}" for j in range(k)]
                for i in range(k)]
    raise ValueError(f"unsupported model kind {kind!r}")


def make_model(tree, kind, root_mode="uniform", k=None, homogeneous_base=None,
               no_hidden=False, prefix=""):
    """Build a ModelSpec for a tree.

    kind selects the template family; k is implied except for general-markov,
    reversible and homogeneous.  homogeneous ties every edge to one shared
    template of the given base kind.  prefix is prepended to every symbol
    (used to keep mixture components disjoint).
    """
    base = kind
    if kind == "homogeneous":
        base = homogeneous_base or "general-markov"
    implied = {"jc-binary": 2, "jc-dna": 4, "kimura2": 4, "kimura3": 4}
    if base in implied:
        if k is not None and k != implied[base]:
            raise ValueError(f"{base} requires k={implied[base]}")
        k = implied[base]
    elif k is None:
        raise ValueError(f"kind {base!r} needs an explicit k")
    if base not in KINDS or base == "homogeneous":
        raise ValueError(f"unsupported model kind {kind!r}")

    if kind == "homogeneous":
        shared = _template(base, k, prefix + edge_letter(0))
        templates = [shared for _ in range(tree.num_edges)]
    else:
        templates = [_template(base, k, prefix + edge_letter(i))
                     for i in range(tree.num_edges)]

    if root_mode == "free":
        root = RootSpec("free", tuple(f"{prefix}pi{s}" for s in range(k)))
    elif root_mode == "uniform":
        root = RootSpec("uniform")
    else:
        raise ValueError(f"unsupported root mode {root_mode!r}")
    return ModelSpec(kind=kind, k=k, tree=tree, templates=templates,
                     root=root, no_hidden=no_hidden, prefix=prefix)


def parameter_count(model):
    """Number of distinct symbols, root symbols included when free."""
    return len(model.symbols)


def validate_stochastic(model, params):
    """Advisory report on row sums and entry ranges.

    Never raises on non-stochastic values; raises KeyError when a symbol is
    missing from params.
    """
    rows = []
    for eid, tpl in enumerate(model.templates):
        for i, row in enumerate(tpl):
            total = Rat(0)
            in_range = True
            for s in row:
                if s not in params:
                    raise KeyError(f"missing symbol {s!r}")
                v = Rat(params[s])
                total += v
                if not (0 <= v <= 1):
                    in_range = False
            rows.append({"edge": eid, "row": i, "sum": total,
                         "row_stochastic": total == 1 and in_range})
    report = {"rows": rows}
    if model.root.mode == "free":
        total = Rat(0)
        in_range = True
        for s in model.root.symbols:
            if s not in params:
                raise KeyError(f"missing symbol {s!r}")
            v = Rat(params[s])
            total += v
            if not (0 <= v <= 1):
                in_range = False
        report["root_sum"] = total
        report["root_stochastic"] = total == 1 and in_range
    report["stochastic"] = all(r["row_stochastic"] for r in rows) and \
        report.get("root_stochastic", True)
    return report


def state_index(model, symbol):
    """State index of a one-character state label ('0'/'1' or A/C/G/T)."""
    if model.k == 4:
        return DNA.index(symbol)
    return int(symbol)


def state_label(model, idx):
    return DNA[idx] if model.k == 4 else str(idx)


# -- model config JSON ------------------------------------------------------

def load_model_config(path_or_dict):
    """Model config: {newick, kind, root, k?, params?: {symbol: "num/den"}}."""
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict, encoding="utf-8") as fh:
            cfg = json.load(fh)
    tree = treecore.parse_newick(cfg["newick"])
    model = make_model(tree, cfg["kind"], root_mode=cfg.get("root", "uniform"),
                       k=cfg.get("k"),
                       homogeneous_base=cfg.get("homogeneous_base"))
    params = None
    if "params" in cfg:
        params = {sym: rat(val) for sym, val in cfg["params"].items()}
    return model, params


def dump_model_config(model, params=None):
    cfg = {"newick": model.tree.to_newick(), "kind": model.kind,
           "root": model.root.mode}
    if model.kind in ("general-markov", "reversible", "homogeneous"):
        cfg["k"] = model.k
    if params is not None:
        cfg["params"] = {s: str(Rat(v)) for s, v in params.items()}
    return cfg
