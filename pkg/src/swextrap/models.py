"""Small reference models used by the invariant suites and tests."""
from __future__ import annotations

import numpy as np

from .hamiltonian import PAULI, LocalHamiltonian, ParamFamily
from .lattice import Lattice, chain

ZZ = np.kron(PAULI["Z"], PAULI["Z"])


def ising(lattice: Lattice, J: float = 1.0, hx: float = 0.0, hz: float = 0.0) -> LocalHamiltonian:
    """-J sum_<ij> Z_i Z_j - hx sum X_i - hz sum Z_i over nearest neighbours (distance 1)."""
    terms = {}
    for i in lattice.sites:
        terms[(i,)] = -hx * PAULI["X"] - hz * PAULI["Z"]
        for j in lattice.sites:
            if i < j and lattice.dist(i, j) == 1:
                terms[(i, j)] = -J * ZZ
    return LocalHamiltonian(lattice, terms)


def field(lattice: Lattice, pauli: str = "X", sites=None) -> LocalHamiltonian:
    sites = lattice.sites if sites is None else sites
    return LocalHamiltonian(lattice, {(i,): PAULI[pauli].astype(complex) for i in sites})


def tfim_family(n: int, J: float = 1.0, hx: float = 1.0, hz: float = 0.0, probe: str = "X") -> ParamFamily:
    """H(x) = ising(J, hx, hz) + x * sum_i probe_i on an open chain of n qubits."""
    lat = chain(n)
    return ParamFamily.linear(ising(lat, J, hx, hz), field(lat, probe))


def qubit_family(h0: str = "Z", v: str = "X") -> ParamFamily:
    """H(x) = h0 + x v on a single qubit."""
    lat = chain(1)
    return ParamFamily(lat, {(0,): [PAULI[h0].astype(complex), PAULI[v].astype(complex)]})
