"""Digital quantum simulation of spin models on two noisy backends.

Subpackages/modules:
    qcore        dense linear algebra and quantum primitives
    models       Pauli-string Hamiltonian IR and the spin-1 / Ising builders
    trotter      Suzuki-Trotter compiler and gate lowerings
    gatesim      gate-level noisy density-matrix backend (CNOT-native)
    devsim       pulse-level Lindblad backend (nanoresonators + transmon)
    experiments  experiment runner, sweeps, time series, CSV
    qasm         OpenQASM 2.0 export and the matching minimal reader
    config       YAML config loading/serialization
    service      FastAPI application exposing the runner
    cli          command-line client of the service
"""

__version__ = "0.1.0"
