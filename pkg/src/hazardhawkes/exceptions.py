"""Exception types raised across the package."""


class UnstableModelError(ValueError):
    """The kernel's integrated hazard is not strictly below one."""

    def __init__(self, ratio, message=None):
        self.ratio = float(ratio)
        if message is None:
            message = (
                f"unstable Hawkes model: branching ratio {self.ratio:.6g} "
                "must be strictly below 1"
            )
        super().__init__(message)


class UnsupportedKernelError(ValueError):
    """A simulator cannot handle the given kernel (fast path, thinning bound)."""


class InsufficientDataError(ValueError):
    """Too few events for the requested computation."""
