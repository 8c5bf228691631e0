"""Exception types shared across the package."""


class QlapError(Exception):
    """Base class for all package errors."""


class GraphFormatError(QlapError, ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoopError(GraphFormatError):
    pass


class DisconnectedGraph(QlapError):
    """Raised where a connected graph is required."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(
            f"graph has {components} connected components; partition each component separately"
        )


class ComponentSplitAdvised(DisconnectedGraph):
    """The quantum pipeline bisects connected graphs only."""


class OracleCapExceeded(QlapError):
    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(
            f"dense eigensolver refuses N={n} > cap {cap}; use `qlap estimate` for the "
            "quantum pipeline's resource estimate, or raise QLAP_ORACLE_CAP"
        )


class NotUnitary(QlapError, ValueError):
    pass


class NotNormalized(QlapError, ValueError):
    """Evolution or phase estimation was handed an unnormalized Laplacian."""


class PostSelectionStarved(QlapError):
    def __init__(self, target_bin: int, attempts: int):
        self.target_bin = target_bin
        self.attempts = attempts
        super().__init__(f"phase bin {target_bin} never observed in {attempts} attempts")


class UnsupportedK(QlapError):
    pass
