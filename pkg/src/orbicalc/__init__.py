"""orbicalc: exact verification workbench for equivariant K0 decompositions,
cyclic representation-ring idempotents, and skew group algebra centers."""

__version__ = "0.1.0"
