"""Flattenings, rank tests, vanishing checks, Jacobian-based dimensions,
exact interpolation of vanishing forms, and mixture (secant) maps."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import isqrt

from .exactalg import (Poly, Rat, mat_rank_nullspace, minors, normalize_poly)
from . import models as _models
from . import paramap as _paramap
from . import treecore

# modular elimination primes (below 2^31 so numpy int64 products stay exact)
_PRIMES = (2147483629, 2147483587, 2147483579, 2147483563, 2147483549,
           2147483543, 2147483497, 2147483489, 2147483477, 2147483423)


def random_rat(rng):
    """Random exact rational with numerator and denominator uniform in
    [1, 97]."""
    return Rat(rng.randint(1, 97), rng.randint(1, 97))


def random_point(symbols, rng):
    return {s: random_rat(rng) for s in symbols}


# ---------------------------------------------------------------------------
# flattenings


def symbolic_tensor(n, k, prefix="p", dna=False):
    """Coordinate symbols p_sigma as a flat list of Polys, leaf-major order."""
    out = []
    for states in itertools.product(range(k), repeat=n):
        if dna:
            name = prefix + "".join(_models.DNA[s] for s in states)
        else:
            name = prefix + "".join(str(s) for s in states)
        out.append(Poly.var(name))
    return out


def flatten(tensor, leaf_order, split, k=None):
    """Flattening matrix of a k^n tensor induced by a split of the leaf set.

    split is a (below, above) pair of leaf-label collections (or a
    treecore.Split); rows are indexed lexicographically by the states of the
    below leaves, columns by the above leaves, both in leaf order.
    """
    if isinstance(split, treecore.Split):
        below, above = split.below, split.above
    else:
        below, above = split
    below = [l for l in leaf_order if l in set(below)]
    above = [l for l in leaf_order if l in set(above)]
    if not below or not above:
        raise ValueError("trivial split")
    if set(below) | set(above) != set(leaf_order) or set(below) & set(above):
        raise ValueError("split is not a bipartition of the leaves")
    n = len(leaf_order)
    if k is None:
        k = round(len(tensor) ** (1.0 / n))
    pos = {l: i for i, l in enumerate(leaf_order)}
    mat = []
    for rstates in itertools.product(range(k), repeat=len(below)):
        row = []
        for cstates in itertools.product(range(k), repeat=len(above)):
            states = [0] * n
            for l, s in zip(below, rstates):
                states[pos[l]] = s
            for l, s in zip(above, cstates):
                states[pos[l]] = s
            flat = 0
            for s in states:
                flat = flat * k + s
            row.append(tensor[flat])
        mat.append(row)
    return mat


def dedup_matrix(mat):
    """Remove duplicate rows then duplicate columns, keeping first
    occurrences (used for symmetric specializations)."""
    seen = set()
    rows = []
    for row in mat:
        key = tuple(str(x) for x in row)
        if key not in seen:
            seen.add(key)
            rows.append(row)
    cols = []
    seen = set()
    for j in range(len(rows[0])):
        key = tuple(str(r[j]) for r in rows)
        if key not in seen:
            seen.add(key)
            cols.append(j)
    return [[r[j] for j in cols] for r in rows]


def hankel_matrix(prefix="p"):
    """The 3x3 symmetric-tensor matrix [[p0,p1,p2],[p1,p2,p3],[p2,p3,p4]]."""
    v = [Poly.var(f"{prefix}{i}") for i in range(5)]
    return [[v[0], v[1], v[2]], [v[1], v[2], v[3]], [v[2], v[3], v[4]]]


def rank_at_point(joint_map, split, params):
    """Exact rank of the flattening of the model point eval(params)."""
    tensor = joint_map.eval(params, mode="exact")
    labels = joint_map.model.tree.leaf_labels if hasattr(joint_map, "model") \
        else joint_map.leaf_labels
    mat = flatten(tensor, labels, split, k=joint_map.k)
    rank, _ = mat_rank_nullspace(mat)
    return rank


def variety_membership_minors(tensor, tree, r, k=None):
    """True iff every internal-edge flattening of the tensor has rank <= r."""
    labels = tree.leaf_labels
    result = True
    for eid in range(tree.num_edges):
        split = treecore.edge_split(tree, eid)
        if len(split.below) < 2 or len(split.above) < 2:
            continue
        mat = flatten(tensor, labels, split, k=k)
        rank, _ = mat_rank_nullspace(mat)
        if rank > r:
            result = False
    return result


# ---------------------------------------------------------------------------
# vanishing checks


def vanishing_check(form, coords, mode="randomized", rng=None, points=25,
                    return_witness=False):
    """Does a form in coordinate variables vanish on the image of the map?

    coords maps coordinate names to polynomials in the model parameters.
    Symbolic mode substitutes and expands (certain); randomized mode evaluates
    at `points` independent random exact rational parameter points and rejects
    with a witness on any nonzero value.
    """
    missing = form.variables() - set(coords)
    if missing:
        raise KeyError(f"form uses unknown coordinates {sorted(missing)}")
    if mode == "symbolic":
        ok = form.substitute(coords).is_zero()
        return (ok, None) if return_witness else ok
    rng = rng or random.Random(0)
    params = sorted(set().union(*[p.variables() for p in coords.values()]) or set())
    for _ in range(points):
        pt = random_point(params, rng)
        values = {name: p.eval(pt) for name, p in coords.items()}
        v = form.eval(values)
        if v != 0:
            return (False, pt) if return_witness else False
    return (True, None) if return_witness else True


# ---------------------------------------------------------------------------
# dimension via exact Jacobian rank


def _matrix_rank(rows):
    rank, _ = mat_rank_nullspace(rows)
    return rank


def jacobian_dimension(joint_map, rng=None, tries=3):
    """(affine rank, projective dimension) of the map's image.

    Exact Jacobian rank at `tries` random rational points, maximum taken;
    projective dimension is the affine rank minus one.
    """
    rng = rng or random.Random(0)
    symbols = joint_map.symbols()
    best = 0
    for _ in range(tries):
        pt = random_point(symbols, rng)
        rows = joint_map.jacobian(pt, symbols)
        best = max(best, _matrix_rank(rows))
        if best == len(symbols):
            break
    return best, best - 1


# ---------------------------------------------------------------------------
# mixtures


@dataclass
class MixtureMap:
    """Coordinate-wise sum of joint maps with disjoint parameter pools.

    Components keep their own root vectors; when every component has a
    uniform root an extra global weight symbol per component restores the
    mixing freedom.
    """

    components: list
    weight_symbols: tuple

    @property
    def k(self):
        return self.components[0].k

    @property
    def n(self):
        return self.components[0].n

    @property
    def num_coordinates(self):
        return self.components[0].num_coordinates

    def symbols(self):
        syms = []
        for c in self.components:
            syms.extend(c.model.symbols)
        syms.extend(self.weight_symbols)
        return syms

    def _weights(self, params):
        if not self.weight_symbols:
            return [Rat(1)] * len(self.components)
        return [Rat(params[w]) for w in self.weight_symbols]

    def eval(self, params, mode="exact"):
        weights = self._weights(params)
        acc = None
        for w, comp in zip(weights, self.components):
            vec = comp.eval(params, mode=mode)
            if mode != "exact":
                w = float(w)
            vec = [w * v for v in vec]
            acc = vec if acc is None else [a + b for a, b in zip(acc, vec)]
        return acc

    def coordinate(self, flat_index):
        total = Poly()
        for i, comp in enumerate(self.components):
            p = comp.coordinate(flat_index)
            if self.weight_symbols:
                p = p * Poly.var(self.weight_symbols[i])
            total = total + p
        return total

    def jacobian(self, params, symbols=None):
        symbols = symbols or self.symbols()
        pos = {s: j for j, s in enumerate(symbols)}
        weights = self._weights(params)
        ncols = len(symbols)
        rows = None
        for i, comp in enumerate(self.components):
            comp_syms = comp.model.symbols
            values, comp_rows = comp.circuit.jacobian(params, comp_syms)
            w = weights[i]
            block = []
            for out_idx, grad in enumerate(comp_rows):
                row = [Rat(0)] * ncols
                for s, g in zip(comp_syms, grad):
                    row[pos[s]] = w * g
                if self.weight_symbols:
                    row[pos[self.weight_symbols[i]]] = values[out_idx]
                block.append(row)
            if rows is None:
                rows = block
            else:
                rows = [[a + b for a, b in zip(r1, r2)]
                        for r1, r2 in zip(rows, block)]
        return rows


def mixture_map(components):
    """MixtureMap from JointMaps sharing leaf set and k.

    Components should be built with distinct symbol prefixes; global mixing
    weights s0..s_{m-1} are added when every component has a uniform root.
    """
    first = components[0]
    for comp in components[1:]:
        if comp.k != first.k or \
                comp.model.tree.leaf_labels != first.model.tree.leaf_labels:
            raise ValueError("mixture components must share leaf set and k")
    pools = [set(c.model.symbols) for c in components]
    for a, b in itertools.combinations(pools, 2):
        if a & b:
            raise ValueError("mixture components share parameter symbols; "
                             "build them with distinct prefixes")
    if len(components) > 1 and \
            all(c.model.root.mode == "uniform" for c in components):
        weights = tuple(f"s{i}" for i in range(len(components)))
    else:
        weights = ()
    return MixtureMap(components=components, weight_symbols=weights)


def make_mixture(tree, kind, m, root_mode="uniform", k=None):
    """Convenience constructor: m copies of a model with disjoint symbols."""
    comps = []
    for i in range(m):
        model = _models.make_model(tree, kind, root_mode=root_mode, k=k,
                                   prefix=f"x{i}" if m > 1 else "")
        comps.append(_paramap.expand_map(model))
    if m == 1:
        return comps[0]
    return mixture_map(comps)


def named_variety_check(tensor, which):
    """Membership in the rank-2 determinantal variety of one quartet split:
    all 3x3 minors of the corresponding 4x4 flattening vanish."""
    splits = {"(12)(34)": (("1", "2"), ("3", "4")),
              "(13)(24)": (("1", "3"), ("2", "4")),
              "(14)(23)": (("1", "4"), ("2", "3"))}
    if which not in splits:
        raise ValueError(f"unknown variety {which!r}")
    if len(tensor) != 16:
        raise ValueError("expected a 2x2x2x2 tensor (length 16)")
    mat = flatten(tensor, ["1", "2", "3", "4"], splits[which], k=2)
    return all(m == 0 or (isinstance(m, Poly) and m.is_zero())
               for m in minors(mat, 3))


# ---------------------------------------------------------------------------
# exact interpolation of vanishing forms


def _monomial_exponents(nvars, degree):
    """Exponent tuples of total degree == degree, deterministic order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def _mono_values_exact(coord_vals, exps):
    powers = []
    for j, v in enumerate(coord_vals):
        maxe = max(e[j] for e in exps)
        ps = [Rat(1)]
        for _ in range(maxe):
            ps.append(ps[-1] * v)
        powers.append(ps)
    out = []
    for e in exps:
        val = Rat(1)
        for j, d in enumerate(e):
            if d:
                val = val * powers[j][d]
        out.append(val)
    return out


def _crt_pair(a1, m1, a2, m2):
    # combine x = a1 mod m1, x = a2 mod m2
    inv = pow(m1 % m2, m2 - 2, m2)
    t = ((a2 - a1) * inv) % m2
    return a1 + m1 * t, m1 * m2


def _rat_reconstruct(a, m):
    """Rational p/q with p*q bounded by ~m/2 and p = a*q mod m, or None."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return Rat(r1, s1)


def _nullspace_mod_p(rows_fn, prime):
    """RREF nullspace mod p of the sample matrix; rows_fn(p) -> numpy array."""
    import numpy as np
    A = rows_fn(prime) % prime
    m, n = A.shape
    r = 0
    pivots = []
    for c in range(n):
        col = A[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]), prime - 2, prime)
        A[r] = (A[r] * inv) % prime
        col_vals = A[:, c].copy()
        col_vals[r] = 0
        A = (A - np.outer(col_vals, A[r])) % prime
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [0] * n
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-int(A[i, fc])) % prime
        basis.append(v)
    return basis, pivots, free


def interpolate_vanishing_forms(coords, degree, rng=None, extra_points=10,
                                verify_points=10, max_exact=200,
                                max_retries=3):
    """Exact basis of degree-d forms in the given coordinates vanishing on
    the model image.

    coords: list of (name, Poly-in-parameters) pairs.  Samples the map at
    #monomials + extra_points random exact rational points, computes an exact
    nullspace basis (direct elimination for small monomial counts, otherwise
    multi-modular elimination with rational reconstruction), normalizes each
    form, and re-verifies it at fresh random points before returning.
    """
    rng = rng or random.Random(0)
    names = [nm for nm, _ in coords]
    polys = [p for _, p in coords]
    params = sorted(set().union(*[p.variables() for p in polys]))
    exps = _monomial_exponents(len(coords), degree)
    nmono = len(exps)
    npoints = nmono + extra_points

    for attempt in range(max_retries):
        pts = [random_point(params, rng) for _ in range(npoints)]
        coord_vals = [[p.eval(pt) for p in polys] for pt in pts]
        if nmono <= max_exact:
            rows = [_mono_values_exact(cv, exps) for cv in coord_vals]
            _, basis = mat_rank_nullspace(rows)
        else:
            basis = _modular_nullspace(coord_vals, exps, rng)
            if basis is None:
                continue
        forms = []
        ok = True
        for vec in basis:
            form = Poly()
            for e, c in zip(exps, vec):
                if c == 0:
                    continue
                mono = Poly.const(c)
                for j, d in enumerate(e):
                    if d:
                        mono = mono * Poly.var(names[j], d)
                form = form + mono
            form = normalize_poly(form)
            if not _verify_form(form, dict(coords), params, rng,
                                verify_points):
                ok = False
                break
            forms.append(form)
        if ok:
            return forms
    raise RuntimeError("interpolation failed: insufficient sample rank after "
                       f"{max_retries} retries")


def _verify_form(form, coords, params, rng, points):
    for _ in range(points):
        pt = random_point(params, rng)
        values = {nm: p.eval(pt) for nm, p in coords.items()}
        if form.eval(values) != 0:
            return False
    return True


def _modular_nullspace(coord_vals, exps, rng, max_primes=8):
    """Multi-modular nullspace + CRT + rational reconstruction."""
    import numpy as np

    def rows_mod(prime):
        npoints = len(coord_vals)
        ncoords = len(coord_vals[0])
        C = np.zeros((npoints, ncoords), dtype=np.int64)
        for i, cv in enumerate(coord_vals):
            for j, v in enumerate(cv):
                num = int(v.numerator) % prime
                den = int(v.denominator) % prime
                C[i, j] = num * pow(den, prime - 2, prime) % prime
        maxes = [max(e[j] for e in exps) for j in range(ncoords)]
        powers = []
        for j in range(ncoords):
            ps = [np.ones(npoints, dtype=np.int64)]
            for _ in range(maxes[j]):
                ps.append(ps[-1] * C[:, j] % prime)
            powers.append(ps)
        A = np.ones((npoints, len(exps)), dtype=np.int64)
        for col, e in enumerate(exps):
            acc = np.ones(npoints, dtype=np.int64)
            for j, d in enumerate(e):
                if d:
                    acc = acc * powers[j][d] % prime
            A[:, col] = acc
        return A

    residues = None
    modulus = None
    ref_pivots = None
    for prime in _PRIMES[:max_primes]:
        basis, pivots, free = _nullspace_mod_p(rows_mod, prime)
        if residues is None:
            residues = [list(v) for v in basis]
            modulus = prime
            ref_pivots = pivots
        else:
            if pivots != ref_pivots or len(basis) != len(residues):
                continue  # unlucky prime
            for v, bv in zip(residues, basis):
                for i in range(len(v)):
                    v[i], _ = _crt_pair(v[i], modulus, bv[i], prime)
            modulus *= prime
        # try reconstruction
        recon = []
        good = True
        for v in residues:
            vec = []
            for a in v:
                r = _rat_reconstruct(a, modulus)
                if r is None:
                    good = False
                    break
                vec.append(r)
            if not good:
                break
            recon.append(vec)
        if good:
            return recon
    return None


def linear_relations(coords, rng=None):
    """Degree-1 vanishing forms (linear relations among coordinates)."""
    return interpolate_vanishing_forms(coords, 1, rng=rng)
