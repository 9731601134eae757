import struct

import numpy as np
import pytest

from absgen import models as M
from absgen import tensor as T
from absgen.errors import ContractError, DimensionError, FormatError


def test_mlp_widths_halve_to_scalar():
    spec = M.build_mlp(1568)
    assert spec.widths == (1568, 784, 392, 196, 98, 49, 24, 12, 6, 3, 1)


def test_mlp_small_example():
    assert M.build_mlp(4).widths == (4, 2, 1)


def test_mlp_rejects_degenerate_input():
    with pytest.raises(ContractError):
        M.build_mlp(1)


def test_siamese_mlp_keeps_first_four_layers():
    assert M.build_siamese_mlp(784).widths == (784, 392, 196, 98, 49)
    assert M.build_siamese_mlp(784).head == "embedding"


def test_cnn_spatial_chain():
    assert M.cnn_spatial_chain((28, 28)) == [(28, 28), (14, 14), (7, 7), (3, 3), (1, 1)]
    assert M.cnn_spatial_chain((100, 100)) == [(100, 100), (50, 50), (25, 25), (12, 12), (6, 6)]


def test_cnn_rejects_tiny_images():
    with pytest.raises(ContractError):
        M.build_cnn(2, (8, 8))


def test_model_spec_rejects_unknown_fields():
    with pytest.raises(ContractError):
        M.ModelSpec(kind="rnn", output="probability")
    with pytest.raises(ContractError):
        M.ModelSpec(kind="mlp", output="distance")


def test_init_params_deterministic_per_seed():
    spec = M.build_mlp(16)
    a = M.init_params(spec, seed=11)
    b = M.init_params(spec, seed=11)
    c = M.init_params(spec, seed=12)
    assert all(np.array_equal(a[n].data, b[n].data) for n in a.names())
    assert any(not np.array_equal(a[n].data, c[n].data) for n in a.names())


def test_init_params_zero_biases_and_bounded_weights():
    spec = M.build_mlp(16)
    params = M.init_params(spec, seed=0)
    for name in params.names():
        if name.endswith(".b"):
            assert np.all(params[name].data == 0.0)
    w = params["fc0.w"]
    limit = np.sqrt(6.0 / (16 + 8))
    assert np.all(np.abs(w.data) <= limit)


def test_param_count_matches_init():
    for spec in (M.build_mlp(64), M.build_cnn(2, (16, 16)), M.build_siamese_cnn((16, 16))):
        assert M.param_count(spec) == M.init_params(spec, seed=0).count()


def test_check_params_match_flags_extra_and_missing():
    spec = M.build_mlp(8)
    params = M.init_params(spec, seed=0)
    M.check_params_match(spec, params)
    del params.tensors["fc0.b"]
    with pytest.raises(ContractError):
        M.check_params_match(spec, params)


def test_pair_example_validation():
    a = np.zeros((4, 4))
    with pytest.raises(DimensionError):
        M.PairExample(a, np.zeros((3, 3)), 0)
    with pytest.raises(ContractError):
        M.PairExample(a, a.copy(), 2)


# -- forwards --------------------------------------------------------------


def test_forward_pair_output_range_per_convention():
    rng = np.random.default_rng(0)
    a, b = rng.random((8, 8)), rng.random((8, 8))  # flatten to 64 each
    signed = M.build_mlp(128, output="signed_distance")
    out = M.forward_pair(signed, M.init_params(signed, 0), M.PairExample(a, b, 1))
    assert -1.0 <= out <= 1.0
    prob = M.build_mlp(128, output="probability")
    out = M.forward_pair(prob, M.init_params(prob, 0), M.PairExample(a, b, 1))
    assert 0.0 <= out <= 1.0


def test_forward_pair_order_sensitive_concatenation():
    rng = np.random.default_rng(1)
    spec = M.build_mlp(16)
    params = M.init_params(spec, 0)
    a, b = rng.random(8), rng.random(8)
    ab = M.forward_pair(spec, params, M.PairExample(a, b, 1))
    ba = M.forward_pair(spec, params, M.PairExample(b, a, 1))
    assert ab != ba  # concatenation fixes an order; scoring is not symmetric


def test_forward_pair_rejects_wrong_width():
    spec = M.build_mlp(16)
    params = M.init_params(spec, 0)
    with pytest.raises(DimensionError):
        M.forward_pair_batch(spec, params, np.zeros((1, 5)), np.zeros((1, 5)))


def test_forward_pair_rejects_embedding_head():
    spec = M.build_siamese_mlp(8)
    with pytest.raises(ContractError):
        M.forward_pair_batch(spec, M.init_params(spec, 0), np.zeros((1, 8)), np.zeros((1, 8)))


def test_siamese_distance_is_symmetric_and_zero_on_identical():
    rng = np.random.default_rng(2)
    spec = M.build_siamese_mlp(16)
    params = M.init_params(spec, 0)
    a, b = rng.random(16), rng.random(16)
    dab = M.forward_siamese(spec, params, M.PairExample(a, b, 1))
    dba = M.forward_siamese(spec, params, M.PairExample(b, a, 1))
    assert dab == dba
    assert dab > 0.0
    assert M.forward_siamese(spec, params, M.PairExample(a, a.copy(), 0)) == 0.0


def test_siamese_branches_share_weights():
    rng = np.random.default_rng(3)
    spec = M.build_siamese_mlp(8)
    params = M.init_params(spec, 0)
    a, b = rng.random(8), rng.random(8)
    before = M.forward_siamese(spec, params, M.PairExample(a, b, 1))
    params["fc0.w"].data += 0.5  # one shared tensor feeds both branches
    after = M.forward_siamese(spec, params, M.PairExample(a, b, 1))
    assert before != after


def test_cnn_pair_stacks_channels():
    spec = M.build_cnn(2, (16, 16))
    params = M.init_params(spec, 0)
    rng = np.random.default_rng(4)
    a = rng.random((3, 16, 16))
    out = M.forward_pair_batch(spec, params, a, a.copy())
    assert out.shape == (3,)
    assert np.all((out.data >= 0.0) & (out.data <= 1.0))


def test_make_scorer_signed_distance_scores_magnitude():
    rng = np.random.default_rng(5)
    spec = M.build_mlp(16)
    params = M.init_params(spec, 0)
    a, b = rng.random((4, 8)), rng.random((4, 8))
    scores = M.make_scorer(spec, params)(a, b)
    direct = M.forward_pair_batch(spec, params, a, b).data
    assert np.array_equal(scores, np.abs(direct))
    assert np.all(scores >= 0.0)


def test_make_scorer_probability_scores_raw_output():
    rng = np.random.default_rng(6)
    spec = M.build_mlp(16, output="probability")
    params = M.init_params(spec, 0)
    a, b = rng.random((4, 8)), rng.random((4, 8))
    scores = M.make_scorer(spec, params)(a, b)
    direct = M.forward_pair_batch(spec, params, a, b).data
    assert np.array_equal(scores, direct)


# -- losses ----------------------------------------------------------------


def test_loss_mse_value():
    loss = M.loss_mse(T.Tensor([1.0, -1.0]), np.array([0.0, 1.0]))
    assert loss.item() == pytest.approx((1.0 + 4.0) / 2.0)


def test_loss_bce_value_and_domain():
    loss = M.loss_bce(T.Tensor([0.8, 0.2]), np.array([1.0, 0.0]))
    assert loss.item() == pytest.approx(-np.log(0.8) / 2 - np.log(0.8) / 2)
    with pytest.raises(ContractError):
        M.loss_bce(T.Tensor([1.2]), np.array([1.0]))


def test_loss_bce_finite_at_hard_zero_and_one():
    loss = M.loss_bce(T.Tensor([0.0, 1.0]), np.array([1.0, 0.0]))
    assert np.isfinite(loss.item())


def test_loss_contrastive_pulls_identical_pushes_different():
    # identical pair (label 0): loss = e^2; different pair: max(0, 1-e)^2
    e = T.Tensor([0.3])
    assert M.loss_contrastive(e, np.array([0.0])).item() == pytest.approx(0.09)
    assert M.loss_contrastive(e, np.array([1.0])).item() == pytest.approx(0.49)
    far = T.Tensor([1.5])
    assert M.loss_contrastive(far, np.array([1.0])).item() == 0.0
    with pytest.raises(ContractError):
        M.loss_contrastive(T.Tensor([-0.1]), np.array([0.0]))
    with pytest.raises(ContractError):
        M.loss_contrastive(e, np.array([0.0]), margin=0.0)


def test_targets_for_conventions():
    signed = M.build_mlp(4, output="signed_distance")
    prob = M.build_mlp(4, output="probability")
    # identical pairs sit at 0; different pairs at +1 or -1 by ordering
    assert M.targets_for(signed, np.array([0, 1, -1])).tolist() == [0.0, 1.0, -1.0]
    assert M.targets_for(prob, np.array([0, 1, 0])).tolist() == [0.0, 1.0, 0.0]
    with pytest.raises(ContractError):
        M.targets_for(signed, np.array([0.5]))
    with pytest.raises(ContractError):
        M.targets_for(prob, np.array([-1.0]))


@pytest.mark.parametrize("seed", range(3))
def test_loss_gradients_check_out(seed):
    rng = np.random.default_rng(seed)
    spec = M.build_mlp(8)
    params = M.init_params(spec, seed)
    a, b = rng.random((6, 4)), rng.random((6, 4))
    labels = rng.integers(0, 2, 6).astype(float)

    def f():
        pred = M.forward_pair_batch(spec, params, a, b)
        return M.loss_mse(pred, M.targets_for(spec, labels))

    assert T.finite_difference_check(f, list(params.tensors.values())) < 1e-4


# -- serialization ---------------------------------------------------------


def test_params_file_header_and_exact_bytes(tmp_path):
    params = M.Params(tensors={"w": T.Tensor([1.5, -2.0], requires_grad=True)})
    path = tmp_path / "tiny.params"
    M.save_params(params, path)
    blob = path.read_bytes()
    expected = (
        b"ABSG"
        + struct.pack("<I", 1)
        + struct.pack("<I", 1) + b"w"
        + struct.pack("<I", 1) + struct.pack("<I", 2)
        + struct.pack("<d", 1.5) + struct.pack("<d", -2.0)
    )
    assert blob == expected


def test_params_round_trip_preserves_order_shapes_values(tmp_path):
    spec = M.build_cnn(2, (16, 16))
    params = M.init_params(spec, seed=9)
    path = tmp_path / "cnn.params"
    M.save_params(params, path)
    loaded = M.load_params(path)
    assert loaded.names() == params.names()
    for name in params.names():
        assert np.array_equal(loaded[name].data, params[name].data)
    M.check_params_match(spec, loaded)


def test_params_save_load_save_is_byte_stable(tmp_path):
    spec = M.build_mlp(32)
    params = M.init_params(spec, seed=1)
    p1, p2 = tmp_path / "a.params", tmp_path / "b.params"
    M.save_params(params, p1)
    M.save_params(M.load_params(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_params_rejects_bad_magic_and_version(tmp_path):
    bad = tmp_path / "bad.params"
    bad.write_bytes(b"NOPE" + struct.pack("<I", 1))
    with pytest.raises(FormatError):
        M.load_params(bad)
    bad.write_bytes(b"ABSG" + struct.pack("<I", 99))
    with pytest.raises(FormatError):
        M.load_params(bad)
