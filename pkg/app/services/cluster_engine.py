"""
Incremental address clustering under the multi-input heuristic.

The engine consumes validated TxRecords in stream order. For every transaction
it resolves the spent outpoints, unites every address found across the
resolved inputs into one cluster, logs a MergeEvent when two or more distinct
clusters were united, and keeps per-address balances and per-transaction flags
for the analytics and graph modules.

Single writer: process_transaction must be called from one thread in stream
order; reads are allowed between transactions only.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import (
    DoubleSpend,
    DuplicateTxid,
    NotARepresentative,
    UnknownAddress,
    UnknownCluster,
    UnknownOutpoint,
)
from app.core.models import BalanceRecord, MergeEvent, OutPoint, ScriptClass, TxRecord

logger = logging.getLogger(__name__)

AddressRef = Union[str, int]


@dataclass(slots=True)
class OutpointEntry:
    addresses: Tuple[int, ...]
    value: int
    script_class: ScriptClass
    creating_ordinal: int
    spent: bool = False


class OutpointIndex:
    """Map from OutPoint to the output it names; spent entries are kept."""

    def __init__(self):
        self.entries: Dict[OutPoint, OutpointEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, outpoint: OutPoint) -> bool:
        return outpoint in self.entries

    def get(self, outpoint: OutPoint) -> Optional[OutpointEntry]:
        return self.entries.get(outpoint)


class ClusterState:
    """Disjoint-set forest over dense address ids.

    Union by size with path halving. The structural root of a component is an
    implementation detail; the observable representative is the minimum
    dense id of the component, kept as a label on the root.
    """

    __slots__ = ("parent", "size", "minimum", "num_clusters_ge2")

    def __init__(self):
        self.parent: List[int] = []
        self.size: List[int] = []
        self.minimum: List[int] = []
        self.num_clusters_ge2 = 0

    @property
    def num_addresses(self) -> int:
        return len(self.parent)

    def add(self) -> int:
        a = len(self.parent)
        self.parent.append(a)
        self.size.append(1)
        self.minimum.append(a)
        return a

    def root(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def representative(self, a: int) -> int:
        return self.minimum[self.root(a)]

    def unite(self, roots: Sequence[int], keep: int) -> int:
        """Attach every root in roots under keep (a member of roots, of maximal size)."""
        parent, size, minimum = self.parent, self.size, self.minimum
        ge2_before = 0
        for r in roots:
            if size[r] >= 2:
                ge2_before += 1
            if r != keep:
                parent[r] = keep
                size[keep] += size[r]
                if minimum[r] < minimum[keep]:
                    minimum[keep] = minimum[r]
        self.num_clusters_ge2 += 1 - ge2_before
        return keep

    def roots(self) -> Iterator[int]:
        for a, p in enumerate(self.parent):
            if a == p:
                yield a


@dataclass
class EngineLog:
    """Append-only per-transaction log; every list is indexed by ordinal.

    Spent-address and output allocations are stored as flat offset arrays:
    spend_addresses[spend_offsets[i]:spend_offsets[i + 1]] are the distinct
    addresses funding transaction i's resolved inputs.
    """

    txids: List[bytes] = field(default_factory=list)
    timestamps: List[int] = field(default_factory=list)
    is_coinbase: bytearray = field(default_factory=bytearray)
    is_nontrivial: bytearray = field(default_factory=bytearray)
    caused_merge: bytearray = field(default_factory=bytearray)
    new_address_count: List[int] = field(default_factory=list)
    addressable_output_count: List[int] = field(default_factory=list)
    input_count: List[int] = field(default_factory=list)
    addressed_input_count: List[int] = field(default_factory=list)

    spend_offsets: List[int] = field(default_factory=lambda: [0])
    spend_addresses: List[int] = field(default_factory=list)

    output_offsets: List[int] = field(default_factory=lambda: [0])
    output_values: List[int] = field(default_factory=list)
    output_addr_offsets: List[int] = field(default_factory=lambda: [0])
    output_addr_ids: List[int] = field(default_factory=list)

    merge_events: List[MergeEvent] = field(default_factory=list)
    reach2_ordinals: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.txids)

    def spent_addresses_of(self, ordinal: int) -> List[int]:
        return self.spend_addresses[self.spend_offsets[ordinal]:self.spend_offsets[ordinal + 1]]

    def outputs_of(self, ordinal: int) -> Iterator[Tuple[int, List[int]]]:
        """Yield (value, address ids) for each output of a transaction."""
        for o in range(self.output_offsets[ordinal], self.output_offsets[ordinal + 1]):
            yield self.output_values[o], self.output_addr_ids[self.output_addr_offsets[o]:self.output_addr_offsets[o + 1]]


class ClusterEngine:
    """Multi-input heuristic clusterer with merge-event and balance bookkeeping."""

    def __init__(self, strict: bool = True):
        self.strict = strict
        self.state = ClusterState()
        self.index = OutpointIndex()
        self.log = EngineLog()
        self.address_ids: Dict[str, int] = {}
        self.addresses: List[str] = []
        self.current_balance: List[int] = []
        self.max_balance: List[int] = []
        self.skipped_inputs = 0

    @property
    def tx_count(self) -> int:
        return len(self.log)

    # lookups

    def address_id(self, address: AddressRef) -> int:
        if isinstance(address, int):
            if 0 <= address < len(self.addresses):
                return address
            raise UnknownAddress(f"unknown address id {address}")
        dense = self.address_ids.get(address)
        if dense is None:
            raise UnknownAddress(f"unknown address {address!r}")
        return dense

    def find(self, address: AddressRef) -> int:
        """Representative (minimum dense id) of the address's cluster."""
        return self.state.representative(self.address_id(address))

    def _root_of_representative(self, representative: int) -> int:
        if not 0 <= representative < len(self.addresses):
            raise NotARepresentative(f"{representative} is not an address id")
        root = self.state.root(representative)
        if self.state.minimum[root] != representative:
            raise NotARepresentative(f"{representative} is not the representative of its cluster")
        return root

    def cluster_size(self, representative: int) -> int:
        return self.state.size[self._root_of_representative(representative)]

    def balance(self, address: AddressRef) -> BalanceRecord:
        dense = self.address_id(address)
        return BalanceRecord(self.current_balance[dense], self.max_balance[dense])

    def resolve_addresses(self, outpoint: OutPoint) -> Optional[Tuple[int, ...]]:
        entry = self.index.get(outpoint)
        return None if entry is None else entry.addresses

    def members(self, representative: int) -> List[int]:
        """Sorted dense ids of the cluster whose representative is given."""
        try:
            root = self._root_of_representative(representative)
        except NotARepresentative as e:
            raise UnknownCluster(str(e)) from e
        state = self.state
        return [a for a in range(len(self.addresses)) if state.root(a) == root]

    def cluster_sizes(self) -> Dict[int, int]:
        """Representative -> size for every cluster, ordered by representative."""
        state = self.state
        sizes = {state.minimum[r]: state.size[r] for r in state.roots()}
        return dict(sorted(sizes.items()))

    def representatives(self) -> List[int]:
        """Representative of every address, indexed by dense id."""
        state = self.state
        return [state.minimum[state.root(a)] for a in range(len(self.addresses))]

    # mutation

    def process_transaction(self, tx: TxRecord) -> Optional[MergeEvent]:
        """Apply one transaction. Raises before mutating anything on failure.

        tx must satisfy the arity rules of models.validate: the per-output
        address count then equals addressable_output_count.
        """
        entries = self.index.entries
        log = self.log
        ordinal = len(log.txids)
        txid = tx.txid

        if OutPoint(txid, 0) in entries:
            raise DuplicateTxid(txid, ordinal=ordinal)

        resolved: List[OutpointEntry] = []
        skipped = 0
        addressed_inputs = 0
        coinbase = tx.is_coinbase
        if not coinbase:
            inputs = tx.inputs
            pending = set() if len(inputs) > 1 else None
            for outpoint in inputs:
                entry = entries.get(outpoint)
                if entry is None:
                    if self.strict:
                        raise UnknownOutpoint(outpoint.txid, outpoint.vout)
                    skipped += 1
                    continue
                if entry.spent:
                    raise DoubleSpend(outpoint.txid, outpoint.vout)
                if pending is not None:
                    if outpoint in pending:
                        raise DoubleSpend(outpoint.txid, outpoint.vout)
                    pending.add(outpoint)
                if entry.addresses:
                    addressed_inputs += 1
                resolved.append(entry)
        if skipped:
            self.skipped_inputs += skipped
            logger.warning(f"Skipped {skipped} unresolvable input(s) of {txid.hex()}")

        # distinct input addresses, first-seen order; ids within one entry are already distinct
        if len(resolved) == 1:
            spent_addresses: Sequence[int] = resolved[0].addresses
        else:
            spent_addresses = list(dict.fromkeys(a for entry in resolved for a in entry.addresses))

        state = self.state
        event = None
        if len(spent_addresses) >= 2:
            root = state.root
            roots = list(dict.fromkeys(root(a) for a in spent_addresses))
            if len(roots) >= 2:
                event = self._merge(tx, ordinal, roots)

        current, maximum = self.current_balance, self.max_balance
        for entry in resolved:
            entry.spent = True
            value = entry.value
            for a in entry.addresses:
                current[a] -= value

        new_addresses = 0
        addressable = 0
        address_ids = self.address_ids
        output_values = log.output_values
        output_addr_ids = log.output_addr_ids
        output_addr_offsets = log.output_addr_offsets
        for vout, output in enumerate(tx.outputs):
            externals = output.addresses
            value = output.value
            addressable += len(externals)
            if len(externals) > 1:
                externals = dict.fromkeys(externals)
            ids = []
            for external in externals:
                dense = address_ids.get(external)
                if dense is None:
                    dense = state.add()
                    address_ids[external] = dense
                    self.addresses.append(external)
                    current.append(0)
                    maximum.append(0)
                    new_addresses += 1
                ids.append(dense)
                balance = current[dense] + value
                current[dense] = balance
                if balance > maximum[dense]:
                    maximum[dense] = balance
            ids = tuple(ids)
            entries[OutPoint(txid, vout)] = OutpointEntry(ids, value, output.script_class, ordinal)
            output_values.append(value)
            output_addr_ids.extend(ids)
            output_addr_offsets.append(len(output_addr_ids))

        log.txids.append(txid)
        log.timestamps.append(tx.timestamp)
        log.is_coinbase.append(1 if coinbase else 0)
        log.is_nontrivial.append(1 if len(spent_addresses) >= 2 else 0)
        log.caused_merge.append(1 if event is not None else 0)
        log.new_address_count.append(new_addresses)
        log.addressable_output_count.append(addressable)
        log.input_count.append(len(resolved))
        log.addressed_input_count.append(addressed_inputs)
        log.spend_addresses.extend(spent_addresses)
        log.spend_offsets.append(len(log.spend_addresses))
        log.output_offsets.append(len(log.output_values))
        return event

    def _merge(self, tx: TxRecord, ordinal: int, roots: List[int]) -> MergeEvent:
        state = self.state
        components = sorted((state.minimum[r], state.size[r], r) for r in roots)
        sizes = tuple(size for _, size, _ in components)
        largest = max(sizes)
        # ties: drop the component with the smallest representative
        drop = sizes.index(largest)
        keep_root = components[drop][2]
        increases = sizes[:drop] + sizes[drop + 1:]

        if largest == 1:
            self.log.reach2_ordinals.append(ordinal)
        state.unite(roots, keep_root)

        event = MergeEvent(
            tx_ordinal=ordinal,
            txid=tx.txid,
            component_sizes=sizes,
            increases=increases,
            representatives=tuple(rep for rep, _, _ in components),
        )
        event.check()
        self.log.merge_events.append(event)
        return event

    def process_stream(self, records: Iterable[TxRecord], progress_every: int = 0) -> int:
        """Process records in order; returns the number processed."""
        processed = 0
        for tx in records:
            self.process_transaction(tx)
            processed += 1
            if progress_every and processed % progress_every == 0:
                logger.info(
                    f"Processed {processed} transactions: {len(self.addresses)} addresses, "
                    f"{self.state.num_clusters_ge2} clusters with >= 2 addresses"
                )
        return processed
