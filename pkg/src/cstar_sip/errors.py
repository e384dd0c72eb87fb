"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Operands belong to different algebras, spaces or modules, or have the wrong shape."""


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class PreconditionError(ValueError):
    """A theorem check was called on inputs that do not meet its hypothesis."""


class UsageError(ValueError):
    """Malformed configuration or command line; the CLI exits with status 2."""
