"""Exception hierarchy shared by the simulator packages.

Input problems (bad decks, bad options, bad geometry) derive from ``InputError`` and
map to exit code 1 in the batch driver. Numerical failures inside a time step derive
from ``NumericalError`` and are turned into a failed step by the Newton driver.
``SimulationAbort`` ends a run (exit code 2).
"""

from typing import Any


class SimulatorError(Exception):
    """Base class for every error raised by the simulator."""


class InputError(SimulatorError):
    """Invalid user input: deck, schema, options or geometry."""


class DeckError(InputError):
    """Deck problem located at a file and line."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.path is None:
            return self.message
        if self.line is None:
            return f"{self.path}: {self.message}"
        return f"{self.path}:{self.line}: {self.message}"


class KeywordSchemaError(InputError):
    """Malformed or duplicate keyword schema document."""


class ConfigurationError(InputError):
    """Invalid solver, grid or equilibration configuration."""


class GeometryError(InputError):
    """Degenerate cell or face geometry."""


class NumericalError(SimulatorError):
    """Failure of a numerical kernel during a time step."""


class EvaluationError(NumericalError, ArithmeticError):
    """Function evaluated outside its domain.

    Attributes:
        function: Tag of the failing function (``"log"``, ``"div"``, ...)
    """

    def __init__(self, function: str, message: str):
        self.function = function
        super().__init__(f"{function}: {message}")


class FactorizationError(NumericalError):
    """Singular pivot block met during incomplete factorization."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"singular pivot block in block row {row}")


class WellSingularityError(NumericalError):
    """Singular well-equation block D_w."""

    def __init__(self, well: str):
        self.well = well
        super().__init__(f"well equations of '{well}' are singular")


class SimulationAbort(SimulatorError):
    """Run stopped because the time step fell below its minimum.

    Attributes:
        report: Details of the failing step (time, dt, last metrics)
    """

    def __init__(self, message: str, report: dict[str, Any] | None = None):
        self.report = report or {}
        super().__init__(message)
