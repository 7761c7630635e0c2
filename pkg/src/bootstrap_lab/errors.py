"""Guard exceptions shared across modules."""


class GuardError(RuntimeError):
    """A configured resource guard (window pad, memory cap) was exceeded."""


class WindowBudgetError(GuardError):
    """An adaptive closure window hit its pad cap while still growing."""


class MemoryGuardError(GuardError):
    """A requested lattice would exceed the configured site cap."""
