"""
Per-transaction measures that bound the clustering series.
"""

from typing import Callable, Optional, Sequence

from app.core.exceptions import UnknownOutpoint
from app.core.models import OutPoint, ScriptKind, TxRecord

Resolver = Callable[[OutPoint], Optional[Sequence[int]]]


def addressable_output_count(tx: TxRecord) -> int:
    """Upper bound on the number of new addresses tx can introduce."""
    count = 0
    for output in tx.outputs:
        kind = output.script_class.kind
        if kind is ScriptKind.OP_RETURN:
            continue
        if kind is ScriptKind.MULTISIG:
            count += output.script_class.n
        elif kind is ScriptKind.P2SH_KNOWN:
            # script-hash address plus the resolved inner addresses
            count += len(output.addresses)
        elif kind is ScriptKind.UNKNOWN:
            count += 1 if output.addresses else 0
        else:
            count += 1
    return count


def is_nontrivial(tx: TxRecord, resolver: Resolver, strict: bool = True) -> bool:
    """True iff tx spends outputs assigned to at least two distinct addresses."""
    if tx.is_coinbase:
        return False
    seen = set()
    for outpoint in tx.inputs:
        addresses = resolver(outpoint)
        if addresses is None:
            if strict:
                raise UnknownOutpoint(outpoint.txid, outpoint.vout)
            continue
        seen.update(addresses)
        if len(seen) >= 2:
            return True
    return False
