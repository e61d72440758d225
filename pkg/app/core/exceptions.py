"""
Error hierarchy for the address clustering engine.

Every family carries the exit code the CLI reports for it; see docs/FORMATS.md.
"""

from typing import Optional


class AddressClusterError(Exception):
    """Base class for all errors raised by the application."""

    exit_code = 1


class ConfigError(AddressClusterError):
    exit_code = 2


# Codec errors

class CodecError(AddressClusterError):
    exit_code = 4


class TextSyntaxError(CodecError):
    """A line of the text format could not be parsed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BadMagic(CodecError):
    pass


class BadVersion(CodecError):
    pass


class TruncatedRecord(CodecError):
    """The binary stream ended in the middle of a record."""

    def __init__(self, ordinal: int, message: str = "stream truncated mid-record"):
        super().__init__(f"record {ordinal}: {message}")
        self.ordinal = ordinal


class DuplicateTxid(CodecError):
    def __init__(self, txid: bytes, line: Optional[int] = None, ordinal: Optional[int] = None):
        where = f"line {line}: " if line is not None else (f"record {ordinal}: " if ordinal is not None else "")
        super().__init__(f"{where}duplicate txid {txid.hex()}")
        self.txid = txid
        self.line = line
        self.ordinal = ordinal


# Validation errors

class ValidationError(AddressClusterError):
    exit_code = 5

    def __init__(self, message: str, line: Optional[int] = None, ordinal: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        elif ordinal is not None:
            message = f"record {ordinal}: {message}"
        super().__init__(message)
        self.line = line
        self.ordinal = ordinal


class ScriptArityViolation(ValidationError):
    pass


class CoinbaseShapeViolation(ValidationError):
    pass


class EmptyOutputs(ValidationError):
    pass


# Engine errors

class ResolutionError(AddressClusterError):
    exit_code = 6


class UnknownOutpoint(ResolutionError):
    def __init__(self, txid: bytes, vout: int):
        super().__init__(f"unknown outpoint {txid.hex()}:{vout}")
        self.txid = txid
        self.vout = vout


class DoubleSpend(ResolutionError):
    def __init__(self, txid: bytes, vout: int):
        super().__init__(f"outpoint already spent {txid.hex()}:{vout}")
        self.txid = txid
        self.vout = vout


class UnknownAddress(ResolutionError):
    pass


class NotARepresentative(ResolutionError):
    pass


class UnknownCluster(ResolutionError):
    pass


class SingleInputClusterViolation(AddressClusterError):
    """A transaction's inputs resolved to more than one cluster after clustering."""


# Snapshot errors

class SnapshotError(AddressClusterError):
    exit_code = 7


class CorruptSnapshot(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass


# Analytics and parameter errors

class AnalyticsError(AddressClusterError):
    exit_code = 8


class InvalidQ(AnalyticsError):
    pass


class EmptyRange(AnalyticsError):
    pass


class InvalidParams(AnalyticsError):
    pass


class MalformedTagFile(AddressClusterError):
    exit_code = 9
