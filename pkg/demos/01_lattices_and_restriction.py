# coding: utf-8

# # Lattices and restricted lattices
#
# A color code lives on a colex: a simplicial complex whose vertices are
# properly colored with d+1 colors. Qubits sit on the top simplices. In 2D
# the standard example is the triangulation dual to the square-octagon
# tiling, and in 3D the bcc lattice.
#
# This notebook builds both, looks at their colorings, and then restricts
# them onto pairs of colors. The restricted lattices are ordinary toric-code
# lattices, which is what the decoder exploits.

# In[1]:

import itertools

import numpy as np

from colorcode import build, restrict
from colorcode.homology import color_code_basis, homology_basis
from colorcode.restriction import check_morphism, check_homology_isomorphism


# ## The square-octagon colex
#
# `L` counts unit cells along each direction of the torus.

# In[2]:

sq = build("sqoct", 8)
print(sq)
print("cells per dimension:", sq.counts)
print("Euler characteristic:", sq.euler_characteristic())


# Every triangle has one vertex of each color. Vertices of color R sit at the
# centers of the squares, the G and B vertices at the octagons.

# In[3]:

tri_colors = sq.colors[sq.simplices[2]]
print(np.sort(tri_colors, axis=1)[:5])
assert (np.sort(tri_colors, axis=1) == [0, 1, 2]).all()

deg = np.bincount(sq.simplices[2].ravel(), minlength=sq.n_cells(0))
for c, name in enumerate("RGB"):
    print(name, "vertex degrees:", sorted(set(deg[sq.colors == c].tolist())))


# ## Logical qubits
#
# The number of encoded qubits is the rank of the first homology of the
# colex seen through the color code checks. On a torus it is 4.

# In[4]:

print("logical qubits (2D):", color_code_basis(sq, 1).rank)


# ## Restriction
#
# Keeping only the vertices of colors R and G, with edges between them, and
# gluing a face onto the link of every removed B vertex gives the
# restricted lattice `L_RG`. For the square-octagon colex this is the
# 2-square lattice: a square lattice on the G vertices whose edges are each
# split in two by an R vertex.

# In[5]:

rg = restrict(sq, "RG")
rb = restrict(sq, "RB")
for rl in (rg, rb):
    print(rl.name, rl.counts, "betti_1 =", homology_basis(rl, 1).rank)


# The projection maps commute with the boundary maps. `check_morphism`
# pushes every basis chain both ways around the square and returns the
# cells where they disagree.

# In[6]:

print("morphism violations:", check_morphism(sq, rg))
print("betti numbers (restricted, parent):", check_homology_isomorphism(sq, rg))


# ## The 3D bcc colex
#
# Four colors, tetrahedra as qubits. Restricting onto two colors gives
# cubic or diamond lattices depending on which pair is kept.

# In[7]:

bcc = build("bcc", 4)
print(bcc, bcc.counts)
for C in itertools.combinations("RGBY", 2):
    rl = restrict(bcc, "".join(C))
    v, e, f = rl.counts
    print("".join(C), rl.counts, "vertex degree", 2 * e // v)


# Cubic lattices have degree 6 and the diamond lattice degree 4. With R as
# the shared color, the decoder uses `RG` (cubic) together with `RB` and
# `RY` (diamond).
