"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class TKError(Exception):
    code = "E_TK"

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context

    def as_dict(self):
        return {"code": self.code, "message": str(self), **{k: str(v) for k, v in self.context.items()}}


class InvariantError(TKError, ValueError):
    code = "E_INVARIANT"


class SchemaError(TKError, ValueError):
    code = "E_SCHEMA"


class ZeroDifferential(TKError, ValueError):
    code = "E_ZERO_DIFFERENTIAL"


class BlockMismatch(TKError, ValueError):
    code = "E_BLOCK_MISMATCH"


class NoAdmissibleGamma(TKError):
    code = "E_NO_GAMMA"


class GammaNotAdmissible(TKError, ValueError):
    code = "E_GAMMA_NOT_ADMISSIBLE"


class NotPolarizable(TKError, ValueError):
    code = "E_NOT_POLARIZABLE"


class NotSummable(TKError, ArithmeticError):
    code = "E_NOT_SUMMABLE"


class NotPeriodic(TKError, ValueError):
    code = "E_NOT_PERIODIC"


class ReconstructionUnsupported(TKError):
    code = "E_RECONSTRUCTION_UNSUPPORTED"


class NotSubmodule(TKError, ValueError):
    code = "E_NOT_SUBMODULE"
