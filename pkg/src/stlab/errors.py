"""Exception hierarchy. Every error carries a module-qualified code."""


class StlabError(Exception):
    code = "stlab.error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        return f"[{self.code}] {self.args[0]}"


class StructuralError(StlabError):
    """Shapes or dimensions that do not fit together."""

    code = "structural"


class InvalidPairingError(StlabError):
    code = "pairing_core.invalid_pairing"


class RamifiedPrimeError(StlabError):
    code = "endo_galois.ramified_prime"


class UnlabelableError(StlabError):
    code = "endo_galois.unlabelable"


class UnknownElementError(StlabError):
    code = "twisted_lefschetz.unknown_element"


class BadReductionError(StlabError):
    code = "frobenius_counts.bad_reduction"


class SingularModelError(StlabError):
    code = "frobenius_counts.singular_model"


class DataCorruptionError(StlabError):
    code = "frobenius_counts.data_corruption"


class InvalidComponentError(StlabError):
    code = "compact_haar.invalid_component"


class InsufficientDataError(StlabError):
    code = "equidist_analysis.insufficient_data"


class ConfigError(StlabError):
    code = "cli.config"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
