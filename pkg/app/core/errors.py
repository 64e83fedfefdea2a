from typing import Optional


class QganError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(QganError, ValueError):
    pass


class DataFormatError(InvalidInputError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = f"{path or '<csv>'}:{line}" if line is not None else (path or "<csv>")
        super().__init__(f"{where}: {message}")


class ParameterFileError(InvalidInputError):
    pass


class NonFiniteLossError(QganError, ArithmeticError):
    def __init__(self, where: str, iteration: int, values):
        self.where = where
        self.iteration = iteration
        self.values = tuple(float(v) for v in values)
        super().__init__(f"non-finite loss in {where} at iteration {iteration}: {self.values}")
