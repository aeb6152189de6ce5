"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed operator, invalid parameters, empty sector..."""


class NumericalError(RuntimeError):
    """A computation ran but its result cannot be trusted."""


class QuadratureError(NumericalError):
    def __init__(self, message: str, nodes: int):
        super().__init__(f"{message} (nodes={nodes})")
        self.nodes = nodes


class DegenerateGroundStateError(NumericalError):
    pass
