"""
Tests for the chain-model types and record validation.
"""

import pytest

from conftest import make_txid
from app.core.exceptions import CoinbaseShapeViolation, EmptyOutputs, ScriptArityViolation, ValidationError
from app.core.models import (
    COINBASE_OUTPOINT,
    OP_RETURN,
    P2PKH,
    P2SH_KNOWN,
    UNKNOWN,
    MergeEvent,
    OutPoint,
    ScriptClass,
    ScriptKind,
    TxOutputDecl,
    TxRecord,
    validate,
)


def _tx(inputs, outputs, txid="t"):
    return TxRecord(make_txid(txid), 1_300_000_000, 0, tuple(inputs), tuple(outputs))


@pytest.mark.parametrize("tag", ["p2pk", "p2pkh", "p2sh", "p2sh_known", "op_return", "unknown", "ms(2,3)"])
def test_script_class_text_tags(tag):
    assert ScriptClass.from_text(tag).to_text() == tag


def test_script_class_rejects_unknown_tag_and_bad_multisig():
    with pytest.raises(ValueError):
        ScriptClass.from_text("p2wpkh")
    with pytest.raises(ValidationError):
        ScriptClass.multisig(3, 2)
    with pytest.raises(ValidationError):
        ScriptClass.multisig(0, 2)


def test_binary_tags_match_kind_values():
    assert [kind.value for kind in ScriptKind] == list(range(7))


def test_arity_rules():
    assert P2PKH.arity_ok(1) and not P2PKH.arity_ok(2)
    assert OP_RETURN.arity_ok(0) and not OP_RETURN.arity_ok(1)
    assert UNKNOWN.arity_ok(0) and UNKNOWN.arity_ok(1)
    assert ScriptClass.multisig(1, 3).arity_ok(3) and not ScriptClass.multisig(1, 3).arity_ok(2)
    assert P2SH_KNOWN.arity_ok(1) and P2SH_KNOWN.arity_ok(3) and not P2SH_KNOWN.arity_ok(0)


def test_validate_accepts_coinbase():
    tx = _tx([COINBASE_OUTPOINT], [TxOutputDecl(50, P2PKH, ("a",))])
    assert validate(tx) is tx
    assert tx.is_coinbase


def test_validate_rejects_empty_outputs():
    with pytest.raises(EmptyOutputs):
        validate(_tx([COINBASE_OUTPOINT], []))


def test_validate_rejects_mixed_coinbase_inputs():
    tx = _tx([COINBASE_OUTPOINT, OutPoint(make_txid("x"), 0)], [TxOutputDecl(1, P2PKH, ("a",))])
    with pytest.raises(CoinbaseShapeViolation):
        validate(tx)


def test_validate_rejects_missing_inputs():
    with pytest.raises(CoinbaseShapeViolation):
        validate(_tx([], [TxOutputDecl(1, P2PKH, ("a",))]))


def test_validate_reports_line_on_arity_violation():
    tx = _tx([COINBASE_OUTPOINT], [TxOutputDecl(1, P2PKH, ("a", "b"))])
    with pytest.raises(ScriptArityViolation) as info:
        validate(tx, line=7)
    assert info.value.line == 7
    assert "line 7" in str(info.value)


def test_merge_event_arithmetic():
    event = MergeEvent(3, make_txid("m"), (1, 1, 2, 10), (1, 1, 2))
    event.check()
    assert event.resulting_size == 14
    assert event.max_increase == 2
