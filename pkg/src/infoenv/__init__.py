"""Information envelopes and capacity-delay-error tradeoffs of coded sources."""

from ._accel import backend
from .calculus import (EffectiveBandwidth, ConstantEB, PeriodicEB, EnvelopeParams,
                       LegendreCurve, TradeoffPoint, backlog_bound, compose_delay,
                       delay_bound, delay_bound_memoryless, delay_bound_sup,
                       information_envelope, legendre_arrival, legendre_service)
from .channels import GilbertElliott, ge_delay, ge_legendre
from .coders import (CodeBook, GroupedCode, LZModel, elias_delta_length, grouped_code,
                     huffman, ideal_lengths, lz_alpha, lz_delay, lz_model, sfe_lengths,
                     shannon_code, state_dependent_codes)
from .errors import (ConvergenceError, DomainError, InfoEnvError, ParameterError,
                     ReducibleChainError)
from .optimize import OptimizeResult, optimize_scalar
from .sources import (CategoricalSource, GeometricSource, MarkovSource, MarkovEB,
                      PoissonCount, alpha_categorical, alpha_geometric_ideal,
                      alpha_markov, alpha_markov_sup, alpha_variable_rate, categorical_eb,
                      entropy, entropy_rate_markov, extend_conditional, extend_group,
                      geometric_ideal_eb, poisson_eb, stationary)

__version__ = "0.1.0"
