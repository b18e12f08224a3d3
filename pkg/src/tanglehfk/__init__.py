"""Combinatorial tangle invariants over GF(2).

Subpackage map:

* shadows: slice diagrams (shadows), elementary slices, concatenation.
* strands: generators, strand elements, differential, multiplication.
* gradings: homological and doubled Alexander gradings.
* wedge: mixed complexes of slice sequences and their typed structures.
* grids: bordered and closed planar grid models (independent oracle).
* tensor: box tensor pairing, reduction, sequence pairing.
* homology: GF(2) homology, factor stripping, Alexander polynomials.
* compiler: tangle words to slice sequences.
* cli: command line entry points.
"""

__version__ = "0.1.0"
