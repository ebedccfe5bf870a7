class DivaError(Exception):
    pass


class SchemaError(DivaError):
    pass


class StructuralError(DivaError):
    pass


class ParseError(DivaError):
    pass


class ConstraintError(DivaError):
    pass


class UnsatisfiableConstraintsError(ConstraintError):
    pass


class ConfigurationError(DivaError):
    pass


class SearchBudgetExceededError(DivaError):
    """Raised when the search asks for more candidate clusterings than the cap allows."""

    def __init__(self, constraint, cap):
        self.constraint = constraint
        self.cap = cap
        super().__init__(f"search budget exceeded: more than {cap} candidate clusterings for {constraint}")


class IntegrationError(DivaError):
    pass


class SynthSpecError(DivaError):
    pass
