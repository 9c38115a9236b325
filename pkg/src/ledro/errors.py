"""Exception hierarchy shared across the package."""


class LedroError(Exception):
    """Base class for all errors raised by ledro."""


class InvalidSpecError(LedroError, ValueError):
    pass


class DegenerateNormalizerError(LedroError, ZeroDivisionError):
    pass


class RegionSchemaError(LedroError, ValueError):
    pass


class OutOfRegionError(LedroError, ValueError):
    pass


class TemplateError(LedroError, ValueError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class ConfigError(LedroError, ValueError):
    pass


class SimulationError(LedroError, RuntimeError):
    pass


class SpiceParseError(LedroError, ValueError):
    def __init__(self, message, raw="", line=None):
        super().__init__(message)
        self.raw = raw
        self.line = line


class MeasureMissingError(SpiceParseError):
    def __init__(self, name, raw=""):
        super().__init__(f"measure {name!r} missing from simulator output", raw=raw)
        self.name = name


class GoodPointsNotFound(LedroError):
    def __init__(self, threshold, n_evaluated):
        super().__init__(
            f"no design among {n_evaluated} evaluations has gain above {threshold} dB; "
            "run the optimizer longer or lower the gain threshold"
        )
        self.threshold = threshold
        self.n_evaluated = n_evaluated


class RegionParseFailure(LedroError, ValueError):
    def __init__(self, message, response=""):
        super().__init__(message)
        self.response = response


class LlmTransportError(LedroError, RuntimeError):
    pass


class ComparisonError(LedroError, ValueError):
    pass


class RunLockedError(LedroError, RuntimeError):
    pass
