import numpy as np
import pytest

from spikeseq.errors import ParameterError
from spikeseq.spikeattn import (
    AttentionInputs,
    compare_attention,
    softmax_attention,
    wta_attention,
)


def _random_inputs(rng, n_q=4, n_k=6, d=8, d_v=5):
    return AttentionInputs(
        rng.normal(size=(n_q, d)), rng.normal(size=(n_k, d)), rng.normal(size=(n_k, d_v))
    )


def test_inputs_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        AttentionInputs(rng.normal(size=(2, 3)), rng.normal(size=(4, 5)), rng.normal(size=(4, 2)))
    with pytest.raises(ParameterError):
        AttentionInputs(rng.normal(size=(2, 3)), rng.normal(size=(4, 3)), rng.normal(size=(5, 2)))


def test_identical_keys_give_value_mean():
    rng = np.random.default_rng(1)
    key = rng.normal(size=8)
    keys = np.tile(key, (5, 1))
    values = rng.normal(size=(5, 3))
    inp = AttentionInputs(rng.normal(size=(3, 8)), keys, values)
    out = softmax_attention(inp)
    for row in out:
        assert np.allclose(row, values.mean(axis=0), atol=1e-12)


def test_low_temperature_saturates_to_best_value():
    rng = np.random.default_rng(2)
    inp = _random_inputs(rng)
    logits = inp.queries @ inp.keys.T
    out = softmax_attention(inp, temperature=1e-6)
    for q in range(inp.queries.shape[0]):
        assert np.allclose(out[q], inp.values[np.argmax(logits[q])], atol=1e-9)


def test_softmax_hand_case():
    # 2 queries, 3 keys in 1-D; hand-computed 3-term softmax
    q = np.array([[1.0], [2.0]])
    k = np.array([[0.0], [1.0], [-1.0]])
    v = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    out = softmax_attention(AttentionInputs(q, k, v), temperature=1.0)
    for qi, x in enumerate([1.0, 2.0]):
        w = np.exp([0.0, x, -x])
        w /= w.sum()
        expect = w @ v
        assert np.allclose(out[qi], expect, atol=1e-12)


def test_softmax_rows_sum_to_one_and_shift_invariant():
    rng = np.random.default_rng(3)
    inp = _random_inputs(rng)
    out = softmax_attention(inp)
    # shift every logit row by a constant: append a bias direction shared by
    # all keys and give the query weight there
    bias = np.ones((inp.keys.shape[0], 1))
    shifted = AttentionInputs(
        np.hstack([inp.queries, rng.normal(size=(inp.queries.shape[0], 1))]),
        np.hstack([inp.keys, bias]),
        inp.values,
    )
    assert np.allclose(softmax_attention(shifted), out, atol=1e-12)
    # weight rows are probability vectors: identity values expose them
    probe = AttentionInputs(inp.queries, inp.keys, np.eye(inp.keys.shape[0]))
    w = softmax_attention(probe)
    assert np.allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(w >= 0.0)


def test_wta_top1_equals_argmax_cosine_value():
    rng = np.random.default_rng(4)
    inp = _random_inputs(rng)
    res = wta_attention(inp, n_winners=1, threshold=-1.0)
    qn = inp.queries / np.linalg.norm(inp.queries, axis=1, keepdims=True)
    kn = inp.keys / np.linalg.norm(inp.keys, axis=1, keepdims=True)
    sims = qn @ kn.T
    for q in range(inp.queries.shape[0]):
        assert np.allclose(res.output[q], inp.values[np.argmax(sims[q])], atol=1e-12)


def test_wta_all_keys_no_threshold_is_similarity_weighted_mean():
    rng = np.random.default_rng(5)
    q = np.abs(rng.normal(size=(2, 8)))
    k = np.abs(rng.normal(size=(6, 8)))  # non-negative: sims all positive
    v = rng.normal(size=(6, 3))
    inp = AttentionInputs(q, k, v)
    res = wta_attention(inp, n_winners=6, threshold=-1.0)
    qn = q / np.linalg.norm(q, axis=1, keepdims=True)
    kn = k / np.linalg.norm(k, axis=1, keepdims=True)
    sims = qn @ kn.T
    for i in range(2):
        expect = (sims[i] / sims[i].sum()) @ v
        assert np.allclose(res.output[i], expect, atol=1e-12)


def test_wta_convex_combination_with_nonneg_threshold():
    rng = np.random.default_rng(6)
    for _ in range(50):
        inp = _random_inputs(rng, n_q=3, n_k=8)
        res = wta_attention(inp, n_winners=3, threshold=0.0)
        for q in range(3):
            if res.degenerate[q]:
                assert np.all(res.output[q] == 0.0)
                continue
            idx = res.winners[q]
            assert 1 <= idx.size <= 3
            # output must be reproducible as convex combination of those rows
            qn = inp.queries[q] / np.linalg.norm(inp.queries[q])
            kn = inp.keys[idx] / np.linalg.norm(inp.keys[idx], axis=1, keepdims=True)
            w = kn @ qn
            w = w / w.sum()
            assert np.all(w >= 0) and np.isclose(w.sum(), 1.0)
            assert np.allclose(res.output[q], w @ inp.values[idx], atol=1e-12)


def test_wta_nothing_passes_flags_zero_row():
    q = np.array([[1.0, 0.0]])
    k = np.array([[-1.0, 0.0]])
    v = np.array([[5.0]])
    res = wta_attention(AttentionInputs(q, k, v), n_winners=1, threshold=0.5)
    assert res.degenerate[0]
    assert np.all(res.output == 0.0)


def test_wta_parameter_validation():
    rng = np.random.default_rng(7)
    inp = _random_inputs(rng)
    with pytest.raises(ParameterError):
        wta_attention(inp, n_winners=0)
    with pytest.raises(ParameterError):
        wta_attention(inp, n_winners=99)
    with pytest.raises(ParameterError):
        softmax_attention(inp, temperature=0.0)


def test_unit_norm_agreement_is_total():
    rows = compare_attention(n_trials=300, seed=0, unit_norm=True)
    assert all(agree for *_, agree in rows)


def test_unnormalized_agreement_is_partial():
    rows = compare_attention(n_trials=300, seed=0, unit_norm=False)
    rate = np.mean([agree for *_, agree in rows])
    assert rate < 1.0
