from typing import List, Optional


class SpryFedError(Exception):
    """Base exception for spryfed errors"""
    pass


class StructuralError(SpryFedError):
    """Exception raised when params, tangents or models disagree on names or shapes"""
    pass


class ArgumentError(SpryFedError, ValueError):
    """Exception raised for invalid arguments"""
    pass


class ProtocolError(SpryFedError):
    """Exception raised when the federation protocol is violated"""
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message
        super().__init__(f"Protocol Error {code}: {message}")


class ConfigValidationError(SpryFedError):
    """Exception raised when an experiment configuration fails validation"""
    def __init__(self, errors: List[str], source: Optional[str] = None):
        self.errors = errors
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"Invalid configuration{where}: " + "; ".join(errors))


class InsufficientDataError(SpryFedError):
    """Exception raised when a validation input is too short to analyse"""
    pass


class NonFiniteError(SpryFedError):
    """Exception raised when a NaN or Inf escapes a numeric operation"""
    pass
