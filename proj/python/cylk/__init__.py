"""Cylindrical K-functions and Poisson line cluster point processes.

Thin wrapper over the C++ core.
"""

try:
    from . import _cylk as _core
except ImportError:  # in-tree build: extension lives next to the package
    import _cylk as _core

DataError = _core.DataError
NumericError = _core.NumericError
csr_envelope = _core.csr_envelope
cylindrical_k = _core.cylindrical_k
directional_scan = _core.directional_scan
fgj = _core.fgj
fit_thomas = _core.fit_thomas
pcf_theoretical = _core.pcf_theoretical
ripley_k = _core.ripley_k
run_chain = _core.run_chain
simulate_plcpp = _core.simulate_plcpp
thomas_k_theoretical = _core.thomas_k_theoretical
__version__ = _core.__version__

__all__ = [
    "DataError",
    "NumericError",
    "csr_envelope",
    "cylindrical_k",
    "directional_scan",
    "fgj",
    "fit_thomas",
    "pcf_theoretical",
    "ripley_k",
    "run_chain",
    "simulate_plcpp",
    "thomas_k_theoretical",
]
