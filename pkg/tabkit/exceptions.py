"""Exceptions raised by tabkit.

Every error derives from :class:`TabkitError` and from the builtin exception that
best describes it, so callers may catch either.
"""


class TabkitError(Exception):
    """Base class for all tabkit errors."""


class TermStructureError(TabkitError, ValueError):
    """A term is malformed (arity mismatch, negative variable id, not a goal)."""


class ContractViolation(TabkitError, RuntimeError):
    """An operation was called outside of its documented precondition."""


class UnsupportedDesignError(ContractViolation):
    """The requested feature is not available under the chosen table-space design."""


class ConfigurationError(TabkitError, ValueError):
    """A configuration object holds an invalid value."""


class ThreadCapacityError(ConfigurationError):
    """A thread id exceeds the bucket-array capacity."""


class DuplicateRegistrationError(TabkitError, ValueError):
    """A tabled predicate was registered twice."""


class AllocatorExhausted(TabkitError, MemoryError):
    """The page allocator could not obtain a new page from the host."""


class DoubleFreeError(ContractViolation):
    """A block was freed twice (debug accounting mode)."""


class OwnershipError(ContractViolation):
    """A thread touched a page it does not own (debug accounting mode)."""


class TypePurityError(ContractViolation):
    """A block was interpreted as a structure type other than its page's."""


class ParameterError(TabkitError, ValueError):
    """Memory-model parameters violate their invariants."""


class ProgramError(TabkitError, ValueError):
    """A logic program is syntactically or structurally invalid."""


class ArithmeticTypeError(TabkitError, TypeError):
    """A non-numeric value reached an arithmetic builtin or an aggregating mode."""


class MissingBaseRunError(TabkitError, KeyError):
    """An overhead report lacks the NS single-thread base run of a benchmark."""
