"""Exception types shared across the toolkit."""


class InfoEnvError(Exception):
    """Base class for all toolkit errors."""


class DomainError(InfoEnvError, ValueError):
    """A parameter lies outside the domain where a quantity is finite/defined."""


class ParameterError(InfoEnvError, ValueError):
    """A free parameter (e.g. the slack rate delta) violates its constraints."""


class ReducibleChainError(InfoEnvError, ValueError):
    """A Markov chain that must be irreducible is not."""


class ConvergenceError(InfoEnvError, RuntimeError):
    """An iterative method did not converge within its iteration budget."""
