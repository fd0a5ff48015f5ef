"""Exception types shared across the engine.

Every error here signals a structural problem detected by exact arithmetic;
there are no tolerance-based failures anywhere.
"""


class EngineError(Exception):
    pass


class DimensionError(EngineError):
    """Shape mismatch between graded maps or spaces."""


class TruncationExceeded(EngineError):
    """A construction would produce content outside the configured
    degree window or beyond an arity/weight cap."""


class SchemaError(EngineError):
    """A definition file does not validate against its schema."""


class AxiomError(EngineError):
    """Axiom check failed in strict mode."""


class NotExact(EngineError):
    """A sequence claimed to be degreewise exact is not."""


class NotFreeModule(EngineError):
    """An operation requiring a free module got a non-free one."""


class IllDefinedQuotient(EngineError):
    """An induced map on a quotient failed its well-definedness
    assertion; indicates an engine bug, not a user error."""


class NoWitness(EngineError):
    """A homotopy/witness solve failed within the configured caps."""
