"""
Seeded synthetic transaction stream generator.

Produces topologically consistent, validated streams for tests and desk-scale
experiments. Address reuse is modelled by sampling an existing address with
probability p_reuse for every output address slot. Optionally injects
private-key-import style transactions that co-spend two large clusters.
"""

import hashlib
import logging
from typing import Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel

from app.core.exceptions import InvalidParams
from app.core.models import (
    COINBASE_OUTPOINT,
    OP_RETURN,
    P2PKH,
    OutPoint,
    ScriptClass,
    TxOutputDecl,
    TxRecord,
    validate,
)

logger = logging.getLogger(__name__)


class SynthParams(BaseModel):
    """Generator parameters. Ranges are checked by validate_params."""

    seed: int = 42
    num_transactions: int = 10_000
    p_reuse: float = 0.0
    mean_inputs: float = 1.5
    mean_outputs: float = 2.0
    op_return_fraction: float = 0.0
    multisig_fraction: float = 0.0
    coinbase_interval: int = 10
    block_reward: int = 50 * 100_000_000
    start_time: int = 1_231_006_505
    mean_gap_seconds: float = 600.0
    large_merge_count: int = 0
    large_merge_size: int = 100


def validate_params(params: SynthParams) -> SynthParams:
    problems = []
    if not 0 <= params.seed < 2**64:
        problems.append("seed must fit in 64 bits")
    if params.num_transactions < 0:
        problems.append("num_transactions must be >= 0")
    if not 0.0 <= params.p_reuse <= 1.0:
        problems.append("p_reuse must lie in [0, 1]")
    if params.mean_inputs < 1.0 or params.mean_outputs < 1.0:
        problems.append("mean_inputs and mean_outputs must be >= 1")
    if params.op_return_fraction < 0 or params.multisig_fraction < 0:
        problems.append("output class fractions must be >= 0")
    if params.op_return_fraction + params.multisig_fraction > 1.0:
        problems.append("op_return_fraction + multisig_fraction must be <= 1")
    if params.coinbase_interval < 1:
        problems.append("coinbase_interval must be >= 1")
    if params.block_reward < 0:
        problems.append("block_reward must be >= 0")
    if params.start_time < 0 or params.mean_gap_seconds < 0:
        problems.append("start_time and mean_gap_seconds must be >= 0")
    if params.large_merge_count < 0:
        problems.append("large_merge_count must be >= 0")
    if params.large_merge_count:
        if params.large_merge_size < 2:
            problems.append("large_merge_size must be >= 2")
        if params.num_transactions < 4 * (params.large_merge_count + 1):
            problems.append("num_transactions too small for the requested large merges")
    if problems:
        raise InvalidParams("; ".join(problems))
    return params


class SyntheticChain:
    """Deterministic stream of TxRecords for a fixed SynthParams."""

    # fan-out coinbase, two consolidations, then the co-spend
    INJECTION_LENGTH = 4

    def __init__(self, params: SynthParams):
        self.params = validate_params(params)
        n, k = params.num_transactions, params.large_merge_count
        self._injection_starts = [((j + 1) * n) // (k + 1) for j in range(k)]
        self.injected_ordinals: List[int] = [start + self.INJECTION_LENGTH - 1 for start in self._injection_starts]

    def __iter__(self) -> Iterator[TxRecord]:
        return self._generate()

    # helpers

    def _txid(self, ordinal: int) -> bytes:
        return hashlib.sha256(b"tx" + self.params.seed.to_bytes(8, "little") + ordinal.to_bytes(8, "little")).digest()

    def _fresh_address(self) -> str:
        digest = hashlib.sha256(b"addr" + self.params.seed.to_bytes(8, "little") + self._address_counter.to_bytes(8, "little"))
        self._address_counter += 1
        return "1" + digest.hexdigest()[:33]

    def _address(self) -> str:
        if self._reuse_pool and self.params.p_reuse > 0 and self._rng.random() < self.params.p_reuse:
            return self._reuse_pool[int(self._rng.integers(len(self._reuse_pool)))]
        address = self._fresh_address()
        self._reuse_pool.append(address)
        return address

    def _split(self, total: int, parts: int) -> List[int]:
        if parts == 1:
            return [total]
        cuts = np.sort(self._rng.integers(0, total + 1, size=parts - 1))
        bounds = [0, *(int(c) for c in cuts), total]
        return [bounds[i + 1] - bounds[i] for i in range(parts)]

    def _output_classes(self, count: int) -> List[ScriptClass]:
        params = self.params
        classes = []
        for _ in range(count):
            u = self._rng.random()
            if u < params.op_return_fraction:
                classes.append(OP_RETURN)
            elif u < params.op_return_fraction + params.multisig_fraction:
                n = int(self._rng.integers(2, 4))
                classes.append(ScriptClass.multisig(int(self._rng.integers(1, n + 1)), n))
            else:
                classes.append(P2PKH)
        if all(cls is OP_RETURN for cls in classes):
            classes[-1] = P2PKH
        return classes

    def _make_outputs(self, total: int, count: int) -> Tuple[TxOutputDecl, ...]:
        classes = self._output_classes(count)
        spendable = [i for i, cls in enumerate(classes) if cls is not OP_RETURN]
        values = dict(zip(spendable, self._split(total, len(spendable))))
        outputs = []
        for i, cls in enumerate(classes):
            if cls is OP_RETURN:
                outputs.append(TxOutputDecl(0, OP_RETURN, ()))
            else:
                arity = cls.n if cls.n else 1
                outputs.append(TxOutputDecl(values[i], cls, tuple(self._address() for _ in range(arity))))
        return tuple(outputs)

    def _register(self, txid: bytes, outputs: Tuple[TxOutputDecl, ...]) -> None:
        for vout, output in enumerate(outputs):
            if output.addresses:
                self._utxos.append((OutPoint(txid, vout), output.value))

    def _take_utxo(self) -> Tuple[OutPoint, int]:
        index = int(self._rng.integers(len(self._utxos)))
        self._utxos[index], self._utxos[-1] = self._utxos[-1], self._utxos[index]
        return self._utxos.pop()

    def _tick(self) -> int:
        if self.params.mean_gap_seconds > 0:
            self._time += int(round(self._rng.exponential(self.params.mean_gap_seconds)))
        return self._time

    # transaction shapes

    def _coinbase(self, ordinal: int) -> TxRecord:
        txid = self._txid(ordinal)
        count = int(self._rng.geometric(1.0 / self.params.mean_outputs))
        outputs = self._make_outputs(self.params.block_reward, count)
        self._register(txid, outputs)
        return TxRecord(txid, self._tick(), ordinal, (COINBASE_OUTPOINT,), outputs)

    def _spend(self, ordinal: int) -> TxRecord:
        txid = self._txid(ordinal)
        wanted = int(self._rng.geometric(1.0 / self.params.mean_inputs))
        taken = [self._take_utxo() for _ in range(min(wanted, len(self._utxos)))]
        total = sum(value for _, value in taken)
        count = int(self._rng.geometric(1.0 / self.params.mean_outputs))
        outputs = self._make_outputs(total, count)
        self._register(txid, outputs)
        return TxRecord(txid, self._tick(), ordinal, tuple(outpoint for outpoint, _ in taken), outputs)

    def _injection(self, start: int) -> Iterator[TxRecord]:
        size = self.params.large_merge_size
        # Addresses made here stay out of the reuse pool so the two clusters
        # only meet in the final co-spend.
        fan_txid = self._txid(start)
        fresh = [self._fresh_address() for _ in range(2 * size)]
        share, remainder = divmod(self.params.block_reward, 2 * size)
        fan_outputs = tuple(
            TxOutputDecl(share + (remainder if i == 0 else 0), P2PKH, (address,)) for i, address in enumerate(fresh)
        )
        yield TxRecord(fan_txid, self._tick(), start, (COINBASE_OUTPOINT,), fan_outputs)

        heads = []
        for half in range(2):
            ordinal = start + 1 + half
            txid = self._txid(ordinal)
            members = range(half * size, (half + 1) * size)
            inputs = tuple(OutPoint(fan_txid, vout) for vout in members)
            value = sum(fan_outputs[vout].value for vout in members)
            # change back to a member address keeps the output inside the cluster
            outputs = (TxOutputDecl(value, P2PKH, (fresh[half * size],)),)
            heads.append((OutPoint(txid, 0), value))
            yield TxRecord(txid, self._tick(), ordinal, inputs, outputs)

        ordinal = start + 3
        txid = self._txid(ordinal)
        total = sum(value for _, value in heads)
        outputs = self._make_outputs(total, 1)
        self._register(txid, outputs)
        yield TxRecord(txid, self._tick(), ordinal, tuple(outpoint for outpoint, _ in heads), outputs)

    def _generate(self) -> Iterator[TxRecord]:
        params = self.params
        self._rng = np.random.default_rng(params.seed)
        self._utxos: List[Tuple[OutPoint, int]] = []
        self._reuse_pool: List[str] = []
        self._address_counter = 0
        self._time = params.start_time

        starts = set(self._injection_starts)
        ordinal = 0
        while ordinal < params.num_transactions:
            if ordinal in starts:
                for tx in self._injection(ordinal):
                    yield validate(tx)
                ordinal += self.INJECTION_LENGTH
                continue
            if ordinal % params.coinbase_interval == 0 or not self._utxos:
                tx = self._coinbase(ordinal)
            else:
                tx = self._spend(ordinal)
            yield validate(tx)
            ordinal += 1
        logger.debug(f"Generated {ordinal} synthetic transactions (seed={params.seed})")


def generate_synthetic(params: SynthParams) -> Iterator[TxRecord]:
    """Iterate the deterministic stream for params."""
    return iter(SyntheticChain(params))
