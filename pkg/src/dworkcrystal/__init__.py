"""p-adic unit-root crystals of Laurent polynomial families: Hasse-Witt matrices,
their Frobenius and connection limits, Cartier matrices, expansions, formal
group laws and point counts."""

__version__ = "0.1.0"
