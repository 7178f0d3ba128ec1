"""voisinlab: numerical verification lab for the degree-16 self-map of the
variety of lines on a cubic fourfold, its discriminant quintics, singular
cubic surface taxonomy, E6 root-orbit counts, and monodromy."""

__version__ = "0.1.0"
