"""
Tests for the synthetic stream generator.
"""

import pytest

from conftest import run_engine, synth_records
from app.codec import SynthParams, SyntheticChain, encode_text
from app.codec.synthetic import validate_params
from app.core.exceptions import InvalidParams
from app.core.models import ScriptKind


def test_same_seed_same_stream():
    a = synth_records(seed=3, num_transactions=500, p_reuse=0.4)
    b = synth_records(seed=3, num_transactions=500, p_reuse=0.4)
    assert encode_text(a) == encode_text(b)


def test_different_seed_different_stream():
    assert encode_text(synth_records(seed=1, num_transactions=50)) != encode_text(synth_records(seed=2, num_transactions=50))


def test_stream_is_topologically_consistent():
    records = synth_records(seed=9, num_transactions=2000, p_reuse=0.5, mean_inputs=3.0, multisig_fraction=0.1)
    engine = run_engine(records, strict=True)
    assert engine.tx_count == 2000
    assert [tx.ordinal for tx in records] == list(range(2000))
    assert engine.skipped_inputs == 0


def test_coinbase_schedule():
    records = synth_records(seed=4, num_transactions=100, coinbase_interval=5)
    assert all(records[i].is_coinbase for i in range(0, 100, 5))
    assert records[0].is_coinbase


def test_output_class_mix():
    records = synth_records(seed=8, num_transactions=1000, op_return_fraction=0.2, multisig_fraction=0.2)
    kinds = {out.script_class.kind for tx in records for out in tx.outputs}
    assert {ScriptKind.P2PKH, ScriptKind.MULTISIG, ScriptKind.OP_RETURN} <= kinds
    for tx in records:
        assert any(out.addresses for out in tx.outputs)
        for out in tx.outputs:
            if out.script_class.kind is ScriptKind.OP_RETURN:
                assert out.value == 0


def test_value_is_conserved_in_spends():
    records = synth_records(seed=12, num_transactions=500)
    values = {}
    for tx in records:
        if not tx.is_coinbase:
            spent = sum(values.pop((o.txid, o.vout)) for o in tx.inputs)
            assert sum(out.value for out in tx.outputs) == spent
        for vout, out in enumerate(tx.outputs):
            if out.addresses:
                values[(tx.txid, vout)] = out.value


def test_injected_large_merges():
    chain = SyntheticChain(SynthParams(seed=21, num_transactions=400, large_merge_count=3, large_merge_size=20))
    records = list(chain)
    engine = run_engine(records)
    assert len(chain.injected_ordinals) == 3
    events = {e.tx_ordinal: e for e in engine.log.merge_events}
    for ordinal in chain.injected_ordinals:
        assert events[ordinal].component_sizes == (20, 20)
        assert events[ordinal].increases == (20,)


@pytest.mark.parametrize(
    "overrides",
    [
        {"p_reuse": 1.5},
        {"mean_inputs": 0.5},
        {"coinbase_interval": 0},
        {"op_return_fraction": 0.7, "multisig_fraction": 0.5},
        {"num_transactions": 10, "large_merge_count": 3},
        {"large_merge_count": 1, "large_merge_size": 1},
    ],
)
def test_invalid_params(overrides):
    with pytest.raises(InvalidParams):
        validate_params(SynthParams(**overrides))
