"""Exception types shared by all modules.

The CLI maps these onto exit codes; see cli.py.
"""


class InputError(ValueError):
    """Malformed or ill-typed input (bad JSON, bad subset, sort clash, ...)."""


class FormulaError(InputError):
    """Lex/parse/sort error in a formula, carrying a source position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class CapExceeded(RuntimeError):
    """An open-family or formula-family cap was hit while materialising."""


class BudgetExceeded(RuntimeError):
    """An enumeration exceeded its caller-supplied budget."""


class BistabilityError(InputError):
    """A bi-orbit arrow set is not stable under the chosen pre/post actions."""


class NotModelPresented(InputError):
    """An operation requiring model-groupoid presentation got plain data."""


class CertificateError(RuntimeError):
    """A construction whose output must carry a passing certificate failed it."""


class OracleDisagreement(RuntimeError):
    """Two routes that are proven to coincide returned different answers.

    This is a bug sentinel, never a verdict: surfacing it loudly is the
    point of computing everything twice.
    """
