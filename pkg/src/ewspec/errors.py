"""Exception types raised by the library."""


class DeformationError(ValueError):
    """A deformation function is non-physical (f^2 < 0) or badly parameterized."""


class CutoffError(ValueError):
    """The Fock cutoff is too small for the requested state or operator."""


class SamplingError(ValueError):
    """A time grid under-samples the frequencies it is asked to resolve."""


class SingularConfigurationError(ValueError):
    """A closed form is evaluated at a pole or a degenerate point."""


class ConfigError(ValueError):
    """Invalid scenario configuration.

    ``field`` names the offending ``section.key`` and ``line`` its line number
    in the source document when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
