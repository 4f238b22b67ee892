"""Exception hierarchy shared by every tagchain module."""


class TagchainError(Exception):
    pass


class UsageError(TagchainError, ValueError):
    """A caller violated an operation's precondition."""


class MalformedMessage(TagchainError, ValueError):
    """A bit-string does not match the layout of the requested message kind."""


class EmptyBatchError(UsageError):
    pass


class RenewalRequired(UsageError):
    """The next timestamp for a tag would exceed its T_max; renew first."""


class RenewalSpaceExhausted(UsageError):
    pass


class ConsistencyError(TagchainError, RuntimeError):
    """Measured artifacts disagree with the cost table (the build is wrong)."""
