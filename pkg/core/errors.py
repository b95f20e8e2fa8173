from __future__ import annotations


class ParaqedError(Exception):
    """base error; context is serialised into the cli error record"""

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def with_context(self, **extra) -> ParaqedError:
        """attach more context (e.g. the failing mode index) and return self"""
        self.context.update(extra)
        return self

    def to_record(self) -> dict:
        return {"error": type(self).__name__, "message": self.message, "context": self.context}


class InvalidParameters(ParaqedError, ValueError):
    """rejected problem parameters"""


class NonConvergence(ParaqedError):
    """special function evaluation could not meet its tolerance"""


class RootNotBracketed(ParaqedError):
    """quantization bracket failed after all expansions"""


class QuadratureFailure(ParaqedError):
    """adaptive quadrature error estimate above tolerance"""


class TruncationError(ParaqedError):
    """contour integral tail bound above tolerance"""


class ValidityWarning(UserWarning):
    """approximation used outside its regime of validity"""


class OutsideValidity(ValidityWarning):
    """field sample outside the radiation zone or the small-rate regime"""
