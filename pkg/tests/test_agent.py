import numpy as np
import pytest
from reference_sac import ReferenceSAC
from scipy import special, stats

from hybrid_sac.agent import HybridSAC, TrainingConfig, Trainer
from hybrid_sac.agent.networks import CriticNet
from hybrid_sac.agent.replay import Batch, ReplayBuffer, Transition
from hybrid_sac.agent.temperature import TemperatureState, default_target_entropies, temperature_update
from hybrid_sac.agent.updates import (
    CRITICS,
    actor_losses,
    continuous_policy_loss,
    critic_loss,
    critic_target,
    discrete_policy_loss,
    polyak_update,
)
from hybrid_sac.config import load_run_config
from hybrid_sac.envs.base import EnvSpec
from hybrid_sac.errors import ContractError
from hybrid_sac.numgrad import ParameterSet, Tape, make_rng
from hybrid_sac.numgrad import ops
from hybrid_sac.policykit import Bounds, HybridActionSpec
from hybrid_sac.policykit.spec import HybridAction
from hybrid_sac.service import cmd_eval

SMALL = TrainingConfig(hidden_sizes=(8, 8), batch_size=16, buffer_size=500, eval_interval=1000, eval_episodes=1)


def _forced_discrete_agent():
    spec = EnvSpec(
        name="single_choice",
        observation_dim=3,
        action_spec=HybridActionSpec(discrete=(1,), continuous=(2,)),
        bounds=(Bounds.symmetric(2),),
        max_episode_steps=10,
        reward_range=(-1.0, 1.0),
    )
    return HybridSAC("single_choice", spec, SMALL, seed=0)


def _random_batch(rng, n, obs_dim=3):
    return Batch(
        obs=rng.normal(size=(n, obs_dim)),
        discrete=np.zeros((n, 1), dtype=np.int64),
        continuous=rng.uniform(-1.0, 1.0, size=(n, 2)),
        reward=rng.normal(size=n),
        next_obs=rng.normal(size=(n, obs_dim)),
        done=(rng.random(n) < 0.1).astype(np.float64),
    )


def test_single_forced_discrete_action_reduces_to_standard_sac():
    agent = _forced_discrete_agent()
    reference = ReferenceSAC(agent)
    logits_before = {n: agent.params["actor"][n].copy() for n in agent.params["actor"].names() if n.startswith("logits.")}
    rng = make_rng(0, "equivalence-batches")

    for _ in range(100):
        batch = _random_batch(rng, 16)
        noise = agent.draw_noise(16)
        got = agent.update(batch, noise)
        want = reference.update(batch, noise.target[0], noise.actor[0])
        for key in ("q1_loss", "q2_loss", "actor_loss_c", "entropy_c", "alpha_c"):
            assert got[key] == pytest.approx(want[key], rel=1e-10, abs=1e-12), key
        assert got["actor_loss_d"] == 0.0
        assert got["alpha_d"] == 1.0

    for group in ("actor", "q1", "q2", "q1_target", "q2_target"):
        for name, value in agent.params[group].items():
            assert np.allclose(value, reference.params[group][name], rtol=1e-10, atol=1e-12), (group, name)
    for name, value in logits_before.items():
        assert np.array_equal(agent.params["actor"][name], value)


def test_critic_loss_only_touches_the_taken_action():
    critic = CriticNet(obs_dim=2, spec=HybridActionSpec(discrete=(3,), continuous=()), hidden_sizes=(4,))
    params = critic.init(0, "q1")
    batch = Batch(
        obs=np.array([[0.3, -0.7]]),
        discrete=np.array([[1]]),
        continuous=np.zeros((1, 0)),
        reward=np.zeros(1),
        next_obs=np.zeros((1, 2)),
        done=np.zeros(1),
    )
    loss, grads = critic_loss(critic, params, "q1", batch, np.array([5.0]))
    assert loss > 0.0
    bias = grads["q1/l1.b"]
    assert bias[0] == 0.0 and bias[2] == 0.0
    assert bias[1] != 0.0
    assert not np.any(grads["q1/l1.w"][:, [0, 2]])


def test_critic_target_stops_at_terminals_and_expects_over_discrete_actions():
    trainer = Trainer("grid_world", SMALL, seed=1)
    agent = trainer.agent
    rng = make_rng(1, "target-batch")
    batch = Batch(
        obs=rng.uniform(-1, 1, size=(4, 2)),
        discrete=np.array([[0], [1], [2], [3]]),
        continuous=np.zeros((4, 0)),
        reward=np.array([1.5, -2.0, 0.25, 9.0]),
        next_obs=rng.uniform(-1, 1, size=(4, 2)),
        done=np.ones(4),
    )
    targets = {c: agent.params[f"{c}_target"] for c in CRITICS}
    terminal = critic_target(batch, agent.actor, agent.params["actor"], agent.critic, targets, 0.3, 1.0, 0.99, [])
    assert np.array_equal(terminal, batch.reward)

    live = Batch(batch.obs, batch.discrete, batch.continuous, batch.reward, batch.next_obs, np.zeros(4))
    no_future = critic_target(live, agent.actor, agent.params["actor"], agent.critic, targets, 0.3, 1.0, 0.0, [])
    assert np.array_equal(no_future, batch.reward)

    got = critic_target(live, agent.actor, agent.params["actor"], agent.critic, targets, 0.3, 1.0, 0.9, [])
    tape = Tape()
    next_obs = tape.constant(batch.next_obs)
    logits = agent.actor.heads(tape.watch(agent.params["actor"]), next_obs).discrete[0].logits.value
    probs = special.softmax(logits, axis=-1)
    q = [agent.critic.q_values(tape.watch(targets[c]), next_obs, None, c).value for c in CRITICS]
    value = np.sum(probs * np.minimum(q[0], q[1]), axis=-1) - 0.3 * np.sum(probs * np.log(probs), axis=-1)
    assert np.allclose(got, batch.reward + 0.9 * value, rtol=1e-12)


def test_discrete_policy_loss_is_scaled_kl_to_the_soft_greedy_target():
    q = np.array([[1.0, 0.0]])
    target = special.softmax(q, axis=-1)
    assert target[0] == pytest.approx([0.7310586, 0.2689414], abs=1e-7)

    tape = Tape()
    pvars = tape.watch(ParameterSet({"logits": q.copy()}))
    matched = discrete_policy_loss(ops.log_softmax(pvars["logits"]), q, 1.0)
    assert float(matched.value) == pytest.approx(0.0, abs=1e-15)

    uniform = np.log(np.full((1, 2), 0.5))
    loss = discrete_policy_loss(tape.constant(uniform), q, 0.5)
    soft = special.softmax(q / 0.5, axis=-1)
    expected = 0.5 * np.sum(0.5 * (np.log(0.5) - np.log(soft)))
    assert float(loss.value) == pytest.approx(expected, rel=1e-12)


def test_continuous_policy_loss_weights_each_discrete_action():
    tape = Tape()
    loss = continuous_policy_loss(
        tape.constant([[-1.0, -2.0]]), tape.constant([[3.0, 1.0]]), np.array([[0.25, 0.75]]), 0.5
    )
    assert float(loss.value) == pytest.approx(-2.375)


def test_polyak_update():
    online = ParameterSet({"w": np.array([1.0, 2.0])})
    target = ParameterSet({"w": np.array([0.0, 0.0])})
    polyak_update(online, target, 1.0)
    assert np.array_equal(target["w"], online["w"])

    target = ParameterSet({"w": np.array([0.0, 0.0])})
    polyak_update(online, target, 0.005)
    assert np.allclose(target["w"], [0.005, 0.010])

    for _ in range(999):
        polyak_update(online, target, 0.005)
    assert np.allclose(online["w"] - target["w"], (1.0 - 0.005) ** 1000 * online["w"])


def test_temperature_update_fixed_point_and_direction():
    temps = TemperatureState.create(1.0, 0.5, -1.0, 0.01)
    temperature_update(temps, 0.5, -1.0)
    assert temps.alpha_d == 1.0 and temps.alpha_c == 1.0

    temperature_update(temps, 0.1, 0.0)
    assert temps.alpha_d > 1.0
    assert temps.alpha_c < 1.0

    frozen = TemperatureState.create(0.2, 0.5, -1.0, 0.01)
    temperature_update(frozen, 0.1, 0.0, tune_d=False, tune_c=False)
    assert frozen.alpha_d == pytest.approx(0.2) and frozen.alpha_c == pytest.approx(0.2)


def test_default_target_entropies():
    assert default_target_entropies(HybridActionSpec(discrete=(4,), continuous=())) == (pytest.approx(0.5 * np.log(4)), 0.0)
    assert default_target_entropies(HybridActionSpec(discrete=(2, 3), continuous=(2,)))[1] == -2.0


def test_update_ratio_schedules_fractional_updates():
    trainer = Trainer("grid_world", SMALL.replace(update_ratio=0.1, warmup_steps=0, batch_size=8), seed=0)
    records = [trainer.train_step() for _ in range(100)]
    assert sum(r.updates for r in records) == 10
    assert [r.step for r in records if r.updates] == list(range(10, 101, 10))

    warm = Trainer("grid_world", SMALL.replace(warmup_steps=50, batch_size=8), seed=0)
    assert sum(warm.train_step().updates for _ in range(40)) == 0

    double = Trainer("grid_world", SMALL.replace(update_ratio=2.0, warmup_steps=0, batch_size=8), seed=0)
    assert double.train_step().updates == 2


def test_same_seed_gives_identical_metrics_rows():
    config = SMALL.replace(warmup_steps=10, update_ratio=0.5, eval_interval=10, batch_size=8)

    def rows():
        return Trainer("platform_lite", config, seed=4).run(30)

    first, second = rows(), rows()
    assert len(first) == 3
    assert first == second


def test_checkpoint_round_trip_and_identical_next_update(tmp_path):
    trainer = Trainer("point_mass", SMALL.replace(warmup_steps=5, update_ratio=1.0, batch_size=8), seed=2)
    for _ in range(20):
        trainer.train_step()
    agent = trainer.agent
    path = agent.save(tmp_path / "agent.hsac")
    restored = HybridSAC.load(path)

    for name, pset in agent.params.items():
        assert restored.params[name].bitwise_equal(pset)
    assert restored.update_count == agent.update_count
    assert restored.alpha_c == agent.alpha_c

    batch = trainer.buffer.sample(8, make_rng(2, "check"))
    noise = agent.draw_noise(8)
    got, again = agent.update(batch, noise), restored.update(batch, noise)
    assert got.keys() == again.keys()
    for key in got:
        assert np.array_equal(got[key], again[key]), key
    for name, pset in agent.params.items():
        assert restored.params[name].bitwise_equal(pset)


def _grid_agent():
    return HybridSAC.for_env("grid_world", TrainingConfig(hidden_sizes=(2,)), seed=0)


def test_stochastic_acting_matches_policy_probabilities():
    agent = _grid_agent()
    obs = np.array([0.0, -0.5])
    tape = Tape()
    logits = agent.actor.heads(tape.watch(agent.params["actor"]), tape.constant(obs[None, :])).discrete[0].logits.value[0]
    probs = special.softmax(logits)

    n = 100_000
    actions = agent.act_batch(np.tile(obs, (n, 1)))
    counts = np.bincount([a.discrete[0] for a in actions], minlength=4)
    assert stats.chisquare(counts, n * probs).pvalue > 1e-4

    for name in agent.params["actor"].names():
        agent.params["actor"][name] = np.zeros_like(agent.params["actor"][name])
    agent.params["actor"]["logits.0.l0.b"] = np.array([0.0, 60.0, 0.0, 0.0])
    assert {a.discrete[0] for a in agent.act_batch(np.tile(obs, (1000, 1)))} == {1}
    assert agent.act(obs, "deterministic").discrete == (1,)


def test_hand_built_optimal_grid_policy_evaluates_to_the_oracle_return(tmp_path):
    agent = _grid_agent()
    actor = agent.params["actor"]
    for name in actor.names():
        actor[name] = np.zeros_like(actor[name])
    # hidden unit 0 fires until the right edge; RIGHT wins while it fires, UP after
    actor["trunk.l0.w"] = np.array([[-1.0, 0.0], [0.0, 0.0]])
    actor["trunk.l0.b"] = np.array([0.75, 0.0])
    actor["logits.0.l0.w"] = np.array([[10.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]])
    actor["logits.0.l0.b"] = np.array([0.0, 1.0, -10.0, -10.0])
    path = agent.save(tmp_path / "grid.hsac")

    config = load_run_config(command="eval", seeds=(0, 1))
    summary, report = cmd_eval(config, path, episodes=2, env_name="grid_world", out=tmp_path)
    assert summary.returns == [2.0, 2.0, 2.0, 2.0]
    assert summary.mean == 2.0
    assert summary.interval == (2.0, 2.0)
    assert "grid_world" in report
    assert (tmp_path / "eval_summary.csv").exists()


def test_logged_continuous_entropy_is_the_squashed_single_sample_estimate():
    agent = _forced_discrete_agent()
    batch = _random_batch(make_rng(0, "entropy-batch"), 16)
    noise = agent.draw_noise(16).actor
    step = actor_losses(
        batch, agent.actor, agent.params["actor"], agent.critic,
        {name: agent.params[name] for name in CRITICS}, 1.0, 0.5, noise,
    )

    tape = Tape()
    head = agent.actor.heads(tape.watch(agent.params["actor"]), tape.constant(batch.obs)).continuous[0]
    mean, log_std, eps = head.mean.value, head.log_std.value, noise[0]
    w = mean + np.exp(log_std) * eps
    base = np.sum(-0.5 * eps**2 - log_std - 0.5 * np.log(2.0 * np.pi), axis=-1)
    log_pi = base - np.sum(np.log1p(-np.tanh(w) ** 2), axis=-1)

    assert step.entropy_c == pytest.approx(-np.mean(log_pi), rel=1e-9, abs=1e-9)
    assert step.entropy_c_per_action.shape == (1,)
    assert step.entropy_c_per_action[0] == pytest.approx(step.entropy_c, rel=1e-12)


_REPLAY_SPEC = HybridActionSpec(discrete=(3,), continuous=(1,))


def _transition(i):
    return Transition(
        s=np.full(2, float(i)),
        a=HybridAction((i % 3,), (np.array([0.1 * i]),)),
        r=float(i),
        s_next=np.full(2, float(i + 1)),
        done=i % 4 == 0,
    )


def test_replay_buffer_overwrites_the_oldest_record_past_capacity():
    buffer = ReplayBuffer(5, obs_dim=2, spec=_REPLAY_SPEC)
    for i in range(3):
        buffer.add(_transition(i))
    assert len(buffer) == 3
    assert buffer.oldest_index() == 0

    for i in range(3, 7):
        buffer.add(_transition(i))
    assert len(buffer) == 5
    assert buffer.ptr == 2
    assert buffer.oldest_index() == 2
    assert buffer.reward.tolist() == [5.0, 6.0, 2.0, 3.0, 4.0]
    assert buffer.discrete[:, 0].tolist() == [2, 0, 2, 0, 1]
    assert np.array_equal(buffer.next_obs[0], np.full(2, 6.0))
    assert buffer.done.tolist() == [0.0, 0.0, 0.0, 0.0, 1.0]

    buffer.add(_transition(7))
    assert buffer.oldest_index() == buffer.ptr == 3
    assert buffer.reward[buffer.oldest_index()] == 3.0


def test_replay_buffer_samples_uniformly_from_stored_records():
    buffer = ReplayBuffer(10, obs_dim=2, spec=_REPLAY_SPEC)
    for i in range(4):
        buffer.add(_transition(i))
    partial = buffer.sample_indices(5000, make_rng(0, "replay-partial"))
    assert set(partial.tolist()) == {0, 1, 2, 3}

    for i in range(4, 13):
        buffer.add(_transition(i))
    n = 100_000
    idx = buffer.sample_indices(n, make_rng(0, "replay-full"))
    counts = np.bincount(idx, minlength=10)
    assert counts.shape == (10,)
    assert stats.chisquare(counts, np.full(10, n / 10)).pvalue > 1e-4

    batch = buffer.gather(idx[:8])
    assert np.array_equal(batch.reward, buffer.reward[idx[:8]])
    assert np.array_equal(batch.obs[:, 0], batch.reward)


def test_replay_buffer_rejects_empty_sampling_and_bad_transitions():
    buffer = ReplayBuffer(4, obs_dim=2, spec=_REPLAY_SPEC)
    with pytest.raises(ContractError):
        buffer.sample_indices(1, make_rng(0, "empty"))
    with pytest.raises(ContractError):
        buffer.sample(1, make_rng(0, "empty"))
    with pytest.raises(ContractError):
        buffer.add(Transition(np.zeros(2), HybridAction((3,), (np.zeros(1),)), 0.0, np.zeros(2), False))
    with pytest.raises(ContractError):
        buffer.add(Transition(np.zeros(2), HybridAction((0,), (np.zeros(1),)), float("nan"), np.zeros(2), False))
    assert len(buffer) == 0
    with pytest.raises(ContractError):
        ReplayBuffer(0, obs_dim=2, spec=_REPLAY_SPEC)


LEARNING = TrainingConfig(
    hidden_sizes=(64, 64),
    batch_size=64,
    buffer_size=20_000,
    update_ratio=1.0,
    warmup_steps=500,
    eval_interval=250,
    eval_episodes=2,
    actor_lr=1e-3,
    critic_lr=1e-3,
    alpha_lr=3e-3,
)


@pytest.mark.acceptance
def test_grid_world_is_solved_with_the_shortest_path():
    solved = []
    for seed in (0, 1, 2):
        rows = Trainer("grid_world", LEARNING, seed=seed).run(6000)
        solved.append(rows[-1]["episode_return_mean"] == pytest.approx(2.0))
    assert sum(solved) >= 2, solved


@pytest.mark.acceptance
@pytest.mark.parametrize("env_name, key", [("grid_world", "entropy_d"), ("point_mass", "entropy_c")])
def test_auto_tuned_temperature_tracks_the_target_entropy(env_name, key):
    trainer = Trainer(env_name, LEARNING, seed=0)
    rows = trainer.run(8000)
    target_d, target_c = default_target_entropies(trainer.agent.spec)
    target = target_d if key == "entropy_d" else target_c
    tail = np.mean([row[key] for row in rows[-10:]])
    assert tail == pytest.approx(target, abs=0.1)
