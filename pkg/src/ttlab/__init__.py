"""Triple trees: exact combinatorics of tree-decorated triangulated 3-spheres.

A triple tree is an outerplanar triangulation of a 2n-gon together with two
non-crossing pairings of its boundary edges, one gluing to a hierarchical
triangulation carrying a spanning tree with no edge in a 2-cycle and the
other gluing to an Apollonian (stacked) triangulation.  The package builds
the corresponding 3-dimensional triangulations, certifies their 3-sphere
topology through tree-avoiding local constructions and discrete Morse
gradients, enumerates the family exactly, and samples it by Markov chain
Monte Carlo.
"""

__version__ = "0.1.0"

FORMAT_VERSION = "ttlab/1"
