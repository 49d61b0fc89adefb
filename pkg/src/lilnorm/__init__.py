"""Normalizers for the law of the iterated logarithm without classical moments.

Modules: ``logscale`` (iterated logs), ``distmodel`` (laws and truncated
moments), ``klass`` (Klass' K and gamma_n), ``normalizer`` (slowly varying
h and Psi), ``conditions`` (limsup and moment tests), ``alpha0`` (cluster
radius), ``mcsim`` (partial-sum simulation), ``cli``.
"""

__version__ = "0.1.0"

from .distmodel import Gaussian, Rademacher, SymPareto, TailTable, feller_pruitt  # noqa: E402
from .klass import KlassEval  # noqa: E402
from .normalizer import Normalizer, SlowFunction, construct_psi_from_phi  # noqa: E402
from .conditions import analyze, corollary_check  # noqa: E402
from .alpha0 import NormSeqSpec, SigmaPolicy, alpha0_estimate  # noqa: E402
from .mcsim import SimConfig, cluster_histogram, run_sim  # noqa: E402

__all__ = [
    "Gaussian", "Rademacher", "SymPareto", "TailTable", "feller_pruitt", "KlassEval",
    "Normalizer", "SlowFunction", "construct_psi_from_phi", "analyze", "corollary_check",
    "NormSeqSpec", "SigmaPolicy", "alpha0_estimate", "SimConfig", "run_sim",
    "cluster_histogram",
]
