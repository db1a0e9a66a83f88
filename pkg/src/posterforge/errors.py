"""Exception hierarchy. Every stage raises a subclass of PosterError."""


class PosterError(Exception):
    """base class for all pipeline failures"""


class InputError(PosterError):
    """bundle on disk is missing or malformed"""


class ConfigError(PosterError):
    pass


class TransportError(PosterError):
    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class FixtureError(PosterError):
    """fixture-mode lookup miss; never falls through to a live call"""

    def __init__(self, message, digest=None):
        super().__init__(message)
        self.digest = digest


class SchemaError(PosterError):
    """response failed JSON parsing or schema validation after all retries"""


class ValidationError(PosterError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ExtractionError(ValidationError):
    pass


class CurationError(ValidationError):
    pass


class BalancingError(ValidationError):
    pass


class AssemblyError(PosterError):
    pass


class PaletteError(PosterError):
    pass


class StylingError(PosterError):
    pass


class RenderError(PosterError):
    pass


class UnitError(RenderError):
    pass


class AggregationError(PosterError):
    pass


class StageError(PosterError):
    """wraps a failure with the name of the pipeline stage that raised it"""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
