"""Group-based models in transformed coordinates on a quartet tree.

The discrete Fourier transform turns the Jukes-Cantor joint map into a
monomial map indexed by subforests.  From there the quadratic invariants
come out two independent ways: an exponent-lattice search and 2x2 minors
of the edge flattening matrices.  The demo checks they agree and then
reports the variety dimension.
"""

from phyloag import (expand_map, jacobian_dimension, make_model, monomial_map,
                     parse_newick)
from phyloag import fourier, treecore

tree = parse_newick("((1,2),(3,4));")
model = make_model(tree, "jc-dna")

subs = treecore.enumerate_subforests(tree)
print(f"subforests of {tree.to_newick()}: {len(subs)}")

mm = monomial_map(model)
print(f"monomial map: {len(mm.coord_names)} coordinates in "
      f"{len(mm.symbols)} transformed parameters")
print("first coordinates:", ", ".join(mm.coord_names[:4]), "...")
print()

lattice = fourier.binomials_up_to_degree(mm, 2)
minors = fourier.flattening_minors(tree)
print(f"degree-2 binomials from the exponent lattice: {len(lattice)}")
print(f"2x2 flattening minors: {len(minors)}")
as_sets = lambda forms: {frozenset(f.terms.items()) for f in forms}
print("routes agree:", as_sets(lattice) == as_sets(minors))
print()

amb, proj = jacobian_dimension(expand_map(model))
print(f"Jacobian rank {amb}, projective dimension {proj}")
