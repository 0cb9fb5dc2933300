"""Exception types shared across the package.

Both carry the name of the module that raised them so the CLI can emit
module-tagged diagnostics and map them to distinct exit codes.
"""


class SteklovError(Exception):
    def __init__(self, message: str, module: str = "steklovlab"):
        super().__init__(message)
        self.module = module

    def tagged(self) -> str:
        return f"[{self.module}] {self}"


class ValidationError(SteklovError):
    """A precondition or configuration constraint was violated."""


class NumericalError(SteklovError):
    """A computation failed for numerical reasons (singularities, no convergence)."""
