"""Exception hierarchy shared by every stage of the pipeline."""


class RigidFoldError(Exception):
    """Base class for all errors raised by this package."""


class ModelParseError(RigidFoldError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ModelIndexError(ModelParseError):
    """A facet, edge or connection refers to an index that does not exist."""


class UnsupportedFeatureError(ModelParseError):
    pass


class OrientationError(RigidFoldError):
    def __init__(self, message, sheet=None, facet=None):
        self.sheet = sheet
        self.facet = facet
        super().__init__(message)


class GraphError(RigidFoldError):
    pass


class NonOrientableError(RigidFoldError):
    def __init__(self, message, hinge=None):
        self.hinge = hinge
        super().__init__(message)


class InvalidSheetError(RigidFoldError):
    def __init__(self, message, sheet=None):
        self.sheet = sheet
        super().__init__(message)


class DomainError(RigidFoldError, ValueError):
    """Numerical input outside the domain of a math routine."""


class SolverError(RigidFoldError):
    pass


class InitializationError(SolverError):
    pass


class GeneratorError(RigidFoldError, ValueError):
    pass
