class InputError(ValueError):
    """Malformed or inconsistent input file. Carries the file and line when known."""

    def __init__(self, path, lineno, message):
        self.path = str(path) if path is not None else None
        self.lineno = lineno
        self.message = message
        if self.path is None and lineno is None:
            super().__init__(message)
            return
        where = self.path or "<input>"
        if lineno is not None:
            where = f"{where}:{lineno}"
        super().__init__(f"{where}: {message}")


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


class NoConfidentExpert(ValueError):
    pass
