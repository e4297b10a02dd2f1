import numpy as np
import pytest

from hybrid_sac.errors import CheckpointDigestError, CheckpointError, ContractError, MalformedCheckpointError
from hybrid_sac.numgrad import (
    AdamState,
    MlpConfig,
    ParameterSet,
    Tape,
    adam_step,
    backward,
    check_gradients,
    init_params,
    load_checkpoint,
    make_rng,
    mlp_forward,
    save_checkpoint,
    stream_seed,
)
from hybrid_sac.numgrad import ops


def test_zero_and_identity_networks():
    cfg = MlpConfig(3, 2, hidden_sizes=(4,))
    zeros = init_params(cfg, 0)
    for name in zeros:
        zeros[name] = np.zeros_like(zeros[name])
    out, _ = mlp_forward(zeros, cfg, [1.0, -2.0, 0.5])
    assert np.array_equal(out.value, np.zeros(2))

    ident_cfg = MlpConfig(1, 1, hidden_sizes=())
    ident = ParameterSet({"l0.w": [[1.0]], "l0.b": [0.0]})
    out, _ = mlp_forward(ident, ident_cfg, [3.0])
    assert out.value.tolist() == [3.0]


def test_relu_net_matches_hand_forward_pass():
    cfg = MlpConfig(2, 1, hidden_sizes=(4,))
    params = init_params(cfg, 7)
    params["l0.b"] = np.array([0.1, -0.2, 0.3, -0.4])
    x = np.array([0.5, -1.5])
    out, _ = mlp_forward(params, cfg, x)
    hidden = np.maximum(x @ params["l0.w"] + params["l0.b"], 0.0)
    expected = hidden @ params["l1.w"] + params["l1.b"]
    assert np.allclose(out.value, expected, rtol=0, atol=1e-12)


def test_square_gradient_and_constant_gradient():
    params = ParameterSet({"w": np.array(3.0)})
    tape = Tape()
    pvars = tape.watch(params)
    grads = backward(ops.square(pvars["w"]))
    assert grads["w"] == pytest.approx(6.0)

    tape = Tape()
    pvars = tape.watch(params)
    grads = backward(tape.constant(5.0) + 0.0 * tape.constant(1.0), wrt=pvars)
    assert np.array_equal(grads["w"], np.zeros(()))


@pytest.mark.parametrize("activation", ["relu", "tanh"])
def test_random_net_gradients_match_finite_differences(activation):
    cfg = MlpConfig(3, 2, hidden_sizes=(5, 4), activation=activation)
    params = init_params(cfg, 3)
    rng = make_rng(3, "test")
    for name in params:
        if name.endswith(".b"):
            params[name] = rng.normal(0.0, 0.1, size=params[name].shape)
    x = rng.normal(size=(6, 3))
    proj = rng.normal(size=(6, 2))

    def fn(tape, pvars):
        from hybrid_sac.numgrad.nets import apply_mlp

        return ops.sum(apply_mlp(pvars, cfg, tape.constant(x)) * proj)

    result = check_gradients(fn, params)
    assert result.passed, result


def test_composite_ops_gradients():
    rng = make_rng(11, "ops")
    params = ParameterSet({"a": rng.normal(size=(4, 3)), "b": rng.normal(size=(4, 3))})
    index = np.array([0, 2, 1, 2])

    def fn(tape, pvars):
        a, b = pvars["a"], pvars["b"]
        terms = [
            ops.sum(ops.logsumexp(a, axis=1)),
            ops.sum(ops.log_softmax(b, axis=1) * ops.softmax(a, axis=1)),
            ops.sum(ops.pick(a, index)),
            ops.sum(ops.softplus(b) * ops.tanh(a)),
            ops.sum(ops.logaddexp(a, b)),
            ops.sum(ops.minimum(a, b)),
            ops.sum(ops.columns(ops.concat([a, b], axis=1), [0, 4, 4])),
            ops.sum(ops.norm(a, axis=1)),
        ]
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        return total

    assert check_gradients(fn, params).passed


def test_replay_reproduces_recorded_values_bitwise():
    cfg = MlpConfig(2, 3, hidden_sizes=(8,), activation="tanh")
    params = init_params(cfg, 1)
    out, tape = mlp_forward(params, cfg, make_rng(1, "x").normal(size=(5, 2)))
    ops.sum(ops.log_softmax(out))
    for recorded, replayed in zip(tape.values, tape.replay()):
        assert np.array_equal(recorded, replayed)


def test_operands_from_different_tapes_are_rejected():
    a = Tape().constant(1.0)
    b = Tape().constant(2.0)
    with pytest.raises(ContractError):
        ops.add(a, b)


def test_adam_first_step_and_zero_gradient():
    params = ParameterSet({"w": np.array([1.0, 2.0])})
    state = AdamState.for_params(params, learning_rate=3e-4)
    adam_step(state, params, {"w": np.array([1.0, 0.0])})
    delta = params["w"] - np.array([1.0, 2.0])
    assert delta[0] == pytest.approx(-3e-4 / (1.0 + 1e-8), rel=1e-12)
    assert delta[1] == 0.0

    before_m = state.first_moment["w"].copy()
    adam_step(state, params, {"w": np.zeros(2)})
    assert np.array_equal(params["w"], np.array([1.0, 2.0]) + delta)
    assert np.allclose(state.first_moment["w"], 0.9 * before_m)


def test_adam_converges_on_scalar_quadratic():
    params = ParameterSet({"x": np.array(5.0)})
    state = AdamState.for_params(params, learning_rate=0.05)
    distances = []
    for _ in range(400):
        adam_step(state, params, {"x": 2.0 * params["x"]})
        distances.append(abs(float(params["x"])))
    assert distances[-1] < 0.05
    assert distances[50] < distances[0]


def test_adam_rejects_incongruent_gradients():
    params = ParameterSet({"w": np.zeros(2)})
    with pytest.raises(ContractError):
        adam_step(AdamState.for_params(params), params, {"w": np.zeros(3)})


def test_init_params_deterministic_zero_bias_and_centered():
    cfg = MlpConfig(64, 64, hidden_sizes=(64,))
    a = init_params(cfg, 5)
    b = init_params(cfg, 5)
    assert a.bitwise_equal(b)
    assert all(not np.any(a[n]) for n in a if n.endswith(".b"))

    w = a["l0.w"].ravel()[:1000]
    limit = np.sqrt(6.0 / 128)
    stderr = limit / np.sqrt(3.0) / np.sqrt(w.size)
    assert abs(w.mean()) < 3 * stderr


def test_merge_rejects_duplicate_names():
    left = ParameterSet({"a.w": np.zeros(2)})
    merged = ParameterSet.merge([left, ParameterSet({"b.w": np.ones(1)})])
    assert merged.names() == ["a.w", "b.w"]
    with pytest.raises(ContractError):
        ParameterSet.merge([left, ParameterSet({"a.w": np.ones(2)})])


def test_streams_are_stable_and_distinct():
    a = make_rng(3, "replay").standard_normal(4)
    b = make_rng(3, "replay").standard_normal(4)
    c = make_rng(3, "warmup").standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert stream_seed(3, "eval-env") == stream_seed(3, "eval-env")
    assert stream_seed(3, "eval-env") != stream_seed(4, "eval-env")


def _sample_checkpoint(tmp_path):
    rng = make_rng(0, "ckpt")
    params = {"actor": ParameterSet({"l0.w": rng.normal(size=(3, 2)), "l0.b": rng.normal(size=2)})}
    opt = AdamState.for_params(params["actor"], learning_rate=1e-3)
    adam_step(opt, params["actor"], {"l0.w": rng.normal(size=(3, 2)), "l0.b": rng.normal(size=2)})
    path = save_checkpoint(tmp_path / "agent.hsac", params, {"actor": opt}, {"env": "grid_world", "lr": 1e-3})
    return path, params, opt


def test_checkpoint_round_trip_is_bitwise(tmp_path):
    path, params, opt = _sample_checkpoint(tmp_path)
    ckpt = load_checkpoint(path, expected_config={"env": "grid_world", "lr": 1e-3})
    assert ckpt.params["actor"].bitwise_equal(params["actor"])
    restored = ckpt.optimizers["actor"]
    assert restored.step_count == 1
    for name in opt.first_moment:
        assert np.array_equal(restored.first_moment[name], opt.first_moment[name])
        assert np.array_equal(restored.second_moment[name], opt.second_moment[name])


def test_truncated_checkpoint_is_malformed(tmp_path):
    path, _, _ = _sample_checkpoint(tmp_path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-9])
    with pytest.raises(MalformedCheckpointError):
        load_checkpoint(path)


def test_changed_config_is_a_digest_mismatch(tmp_path):
    path, _, _ = _sample_checkpoint(tmp_path)
    with pytest.raises(CheckpointDigestError):
        load_checkpoint(path, expected_config={"env": "grid_world", "lr": 3e-4})


def test_missing_checkpoint_is_explicit(tmp_path):
    with pytest.raises(CheckpointError, match="does not exist"):
        load_checkpoint(tmp_path / "nope.hsac")
