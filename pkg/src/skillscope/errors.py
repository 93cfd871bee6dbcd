"""Exception hierarchy shared across the pipeline stages."""


class SkillscopeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(SkillscopeError):
    """Bad arguments, missing files, invalid configuration."""


class DataError(SkillscopeError):
    """Input data violates a contract (malformed records, empty corpus...)."""


class InvariantError(SkillscopeError):
    """An internal consistency check failed; names the violated invariant."""
