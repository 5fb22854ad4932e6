"""Exception hierarchy.

Every error carries a short machine-readable ``condition`` string that names
the violated rule; the CLI copies it into report diagnostics so failures can
be matched without parsing prose.
"""


class WeakCMError(Exception):
    """Base class for all library errors."""

    condition = "internal"

    def __init__(self, message=""):
        super().__init__(message or self.condition)


class InputError(WeakCMError):
    """Invalid input data (CLI exit code 1)."""

    condition = "invalid-input"


class MathError(WeakCMError):
    """Arithmetic impossibility or internal inconsistency (CLI exit code 2)."""

    condition = "math-error"


# ---------------------------------------------------------------- towers

class NotSquareFree(InputError):
    condition = "tower:square-free"


class FactorizationInconclusive(InputError):
    condition = "tower:square-free-inconclusive"


class WrongSign(InputError):
    condition = "tower:sign"


class SquareClassMismatch(InputError):
    condition = "tower:square-class"


class DegenerateBiquadratic(InputError):
    condition = "tower:degenerate-biquadratic"


class TowerMismatch(InputError):
    condition = "tower:mismatch"


class DivisionByZero(MathError):
    condition = "tower:division-by-zero"


class SingularMatrix(MathError):
    condition = "linalg:singular"


# ---------------------------------------------------------------- cmfield

class WrongCase(InputError):
    condition = "cmfield:wrong-case"


# ---------------------------------------------------------------- dodson

class InvalidTriple(InputError):
    condition = "dodson-triple:invalid"


class NotAdmissible(InputError):
    condition = "dodson-triple:not-admissible"


class BoundExceeded(InputError):
    condition = "dodson:bound-exceeded"


class InvalidCMType(InputError):
    condition = "dodson:invalid-cm-type"


class InvalidPartition(InputError):
    condition = "dodson:invalid-partition"


# ---------------------------------------------------------------- tausplit

class SingularTauBar(InputError):
    condition = "period-matrix:singular-tau-bar"


class NotFullSpan(InputError):
    condition = "period-matrix:span"


class ProperSubfield(InputError):
    condition = "period-matrix:proper-subfield"

    def __init__(self, message="", subfield_dim=None, subfield_basis=None):
        super().__init__(message)
        self.subfield_dim = subfield_dim
        self.subfield_basis = subfield_basis


class OddDimension(InputError):
    condition = "odd-dimension-exclusion"


class DegenerateP(InputError):
    condition = "period-matrix:degenerate-split"


# ---------------------------------------------------------------- hodge

class IncompatibleIdentifications(InputError):
    condition = "hodge:incompatible-identifications"


class NotWeakCM(InputError):
    condition = "hodge:not-weak-cm"


class NoTopForm(InputError):
    condition = "hodge:no-top-form"


class MultipleTopForms(InputError):
    condition = "hodge:multiple-top-forms"


class WrongWeight(InputError):
    condition = "hodge:wrong-weight"
