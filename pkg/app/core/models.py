"""
Core chain-model types shared by every module.

Records are immutable once validated. Values are integer satoshis throughout and
addresses are opaque external-form strings; no script or key logic lives here.
"""

import enum
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

from app.core.exceptions import CoinbaseShapeViolation, EmptyOutputs, ScriptArityViolation, ValidationError

COINBASE_TXID = bytes(32)
COINBASE_VOUT = 0xFFFFFFFF


class ScriptKind(enum.IntEnum):
    # Values double as the binary codec's class tag.
    P2PK = 0
    P2PKH = 1
    P2SH_UNKNOWN = 2
    P2SH_KNOWN = 3
    MULTISIG = 4
    OP_RETURN = 5
    UNKNOWN = 6


_TEXT_TAGS = {
    ScriptKind.P2PK: "p2pk",
    ScriptKind.P2PKH: "p2pkh",
    ScriptKind.P2SH_UNKNOWN: "p2sh",
    ScriptKind.P2SH_KNOWN: "p2sh_known",
    ScriptKind.OP_RETURN: "op_return",
    ScriptKind.UNKNOWN: "unknown",
}
_KINDS_BY_TAG = {tag: kind for kind, tag in _TEXT_TAGS.items()}
_MULTISIG_TAG = re.compile(r"^ms\((\d+),(\d+)\)$")


@dataclass(frozen=True, slots=True)
class ScriptClass:
    """Pre-resolved script class of an output; m and n are set only for MULTISIG."""

    kind: ScriptKind
    m: int = 0
    n: int = 0

    def __post_init__(self):
        if self.kind is ScriptKind.MULTISIG:
            if not 1 <= self.m <= self.n:
                raise ValidationError(f"multisig requires 1 <= m <= n, got ms({self.m},{self.n})")
        elif self.m or self.n:
            raise ValidationError(f"{self.kind.name} takes no m/n parameters")

    @classmethod
    def multisig(cls, m: int, n: int) -> "ScriptClass":
        return cls(ScriptKind.MULTISIG, m, n)

    @classmethod
    def from_text(cls, tag: str) -> "ScriptClass":
        kind = _KINDS_BY_TAG.get(tag)
        if kind is not None:
            return _SIMPLE[kind]
        match = _MULTISIG_TAG.match(tag)
        if match is None:
            raise ValueError(f"unknown script class {tag!r}")
        return cls.multisig(int(match.group(1)), int(match.group(2)))

    def to_text(self) -> str:
        if self.kind is ScriptKind.MULTISIG:
            return f"ms({self.m},{self.n})"
        return _TEXT_TAGS[self.kind]

    def arity_ok(self, address_count: int) -> bool:
        """Whether an output of this class may carry address_count addresses."""
        kind = self.kind
        if kind is ScriptKind.OP_RETURN:
            return address_count == 0
        if kind is ScriptKind.MULTISIG:
            return address_count == self.n
        if kind is ScriptKind.UNKNOWN:
            return address_count <= 1
        if kind is ScriptKind.P2SH_KNOWN:
            # script-hash address first, then any resolved inner addresses
            return address_count >= 1
        return address_count == 1


_SIMPLE = {kind: ScriptClass(kind) for kind in _TEXT_TAGS}

P2PK = _SIMPLE[ScriptKind.P2PK]
P2PKH = _SIMPLE[ScriptKind.P2PKH]
P2SH_UNKNOWN = _SIMPLE[ScriptKind.P2SH_UNKNOWN]
P2SH_KNOWN = _SIMPLE[ScriptKind.P2SH_KNOWN]
OP_RETURN = _SIMPLE[ScriptKind.OP_RETURN]
UNKNOWN = _SIMPLE[ScriptKind.UNKNOWN]


class OutPoint(NamedTuple):
    txid: bytes
    vout: int

    @property
    def is_coinbase(self) -> bool:
        return self.vout == COINBASE_VOUT and self.txid == COINBASE_TXID


COINBASE_OUTPOINT = OutPoint(COINBASE_TXID, COINBASE_VOUT)


@dataclass(frozen=True, slots=True)
class TxOutputDecl:
    value: int
    script_class: ScriptClass
    addresses: Tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class TxRecord:
    txid: bytes
    timestamp: int
    ordinal: int
    inputs: Tuple[OutPoint, ...]
    outputs: Tuple[TxOutputDecl, ...]

    @property
    def is_coinbase(self) -> bool:
        return len(self.inputs) == 1 and self.inputs[0].is_coinbase


@dataclass(frozen=True, slots=True)
class MergeEvent:
    """One transaction that united k >= 2 clusters.

    component_sizes is ordered by the components' representatives; increases is
    component_sizes without one maximal element (the one with the smallest
    representative among ties).
    """

    tx_ordinal: int
    txid: bytes
    component_sizes: Tuple[int, ...]
    increases: Tuple[int, ...]
    representatives: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def resulting_size(self) -> int:
        return sum(self.component_sizes)

    @property
    def max_increase(self) -> int:
        return max(self.increases)

    def check(self) -> None:
        """Assert the merge arithmetic invariants."""
        sizes, increases = self.component_sizes, self.increases
        assert len(sizes) >= 2, "a merge unites at least two clusters"
        assert len(increases) == len(sizes) - 1
        assert sum(increases) == sum(sizes) - max(sizes)
        assert max(increases) <= max(sizes)


@dataclass(frozen=True, slots=True)
class BalanceRecord:
    current: int
    alltime_max: int


class TagCategory(str, enum.Enum):
    DARKNET_MARKET = "darknet-market"
    GAMBLING = "gambling"
    EXCHANGE = "exchange"
    MINING_POOL = "mining-pool"
    PAYMENT_PROCESSOR = "payment-processor"
    OTHER = "other"


@dataclass(frozen=True, slots=True)
class TagEntry:
    address: str
    label: str
    category: TagCategory


def validate(tx: TxRecord, line: Optional[int] = None) -> TxRecord:
    """Return tx unchanged if every record and output invariant holds."""
    ctx = {"line": line} if line is not None else {"ordinal": tx.ordinal}

    if len(tx.txid) != 32:
        raise ValidationError(f"txid must be 32 bytes, got {len(tx.txid)}", **ctx)
    if tx.timestamp < 0:
        raise ValidationError("timestamp must be non-negative", **ctx)
    if not tx.outputs:
        raise EmptyOutputs("transaction has no outputs", **ctx)

    sentinels = sum(1 for outpoint in tx.inputs if outpoint.is_coinbase)
    if sentinels:
        if sentinels != 1 or len(tx.inputs) != 1:
            raise CoinbaseShapeViolation("coinbase must have exactly one input, the sentinel", **ctx)
    elif not tx.inputs:
        raise CoinbaseShapeViolation("non-coinbase transaction has no inputs", **ctx)

    for outpoint in tx.inputs:
        if len(outpoint.txid) != 32 or not 0 <= outpoint.vout <= COINBASE_VOUT:
            raise ValidationError(f"malformed outpoint {outpoint.txid.hex()}:{outpoint.vout}", **ctx)

    for index, output in enumerate(tx.outputs):
        if output.value < 0:
            raise ValidationError(f"output {index} has negative value", **ctx)
        if not output.script_class.arity_ok(len(output.addresses)):
            raise ScriptArityViolation(
                f"output {index}: {output.script_class.to_text()} cannot carry {len(output.addresses)} address(es)",
                **ctx,
            )
    return tx
