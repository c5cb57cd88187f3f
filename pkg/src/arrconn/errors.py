"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, LatticeCapError -> 3,
failed mathematical checks -> 1 (reported, not raised).
"""


class ArrConnError(Exception):
    """Base class for package errors."""


class InputError(ArrConnError):
    """Malformed file, string or argument."""


class PreconditionError(ArrConnError):
    """An operation was called outside its contract."""


class LatticeCapError(ArrConnError):
    """Hyperplane count exceeds the configured lattice cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"{count} hyperplanes exceed the lattice cap {cap}; "
            f"the intersection lattice may hold up to 2^{count} flats"
        )


class NormalDataError(ArrConnError):
    """A residue is not rank one or is nilpotent; carries the hyperplane id."""

    def __init__(self, hyperplane_id: str, reason: str):
        self.hyperplane_id = hyperplane_id
        self.reason = reason
        super().__init__(f"residue at {hyperplane_id}: {reason}")


class WeightZeroError(ArrConnError):
    """An operation requiring nonzero weights met a zero-weight flat."""
