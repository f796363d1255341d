"""Exception hierarchy.

Every exception carries a short machine-readable ``code`` used by the CLI
for its one-line error output.
"""


class UrbanCentralityError(Exception):
    code = "ERROR"


class NetworkError(UrbanCentralityError, ValueError):
    """Invalid network definition (bad ids, self-loops, duplicate edges...)."""

    code = "NETWORK"


class DisconnectedNetworkError(NetworkError):
    code = "DISCONNECTED"

    def __init__(self, components):
        self.components = [list(c) for c in components]
        parts = "; ".join("{" + ", ".join(c) + "}" for c in self.components)
        super().__init__(
            f"network is not connected ({len(self.components)} components: {parts})"
        )


class ReducibleMatrixError(UrbanCentralityError, ValueError):
    """Matrix is not irreducible, so Perron-Frobenius does not apply."""

    code = "REDUCIBLE"


class ConvergenceError(UrbanCentralityError, RuntimeError):
    code = "NO_CONVERGENCE"

    def __init__(self, message, residual, history=None):
        self.residual = residual
        self.history = history
        super().__init__(f"{message} (last residual {residual:.3e})")


class InfeasibleModelError(UrbanCentralityError, ValueError):
    """Shifted model has no nonnegative solution (or is degenerate)."""

    code = "INFEASIBLE"

    def __init__(self, message, verdict=None, rho=None):
        self.verdict = verdict
        self.rho = rho
        if verdict is not None:
            self.code = verdict.name
        super().__init__(message)


class RankDeficiencyError(UrbanCentralityError, ValueError):
    code = "RANK_DEFICIENT"

    def __init__(self, message, unidentifiable=()):
        self.unidentifiable = list(unidentifiable)
        super().__init__(message)


class SingularSystemError(UrbanCentralityError, ValueError):
    code = "SINGULAR"


class StructuralError(UrbanCentralityError, ValueError):
    """Matrix fails a structural hypothesis (symmetry, full indecomposability)."""

    code = "STRUCTURAL"
