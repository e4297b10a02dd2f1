import numpy as np
import pytest

from hybrid_sac.envs import ENVIRONMENTS, make_env, oracle_return, scripted_policy
from hybrid_sac.errors import ConfigError, EnvironmentFault
from hybrid_sac.numgrad import make_rng
from hybrid_sac.policykit import HybridAction


def _platform_action(move, u):
    params = [np.zeros(1), np.zeros(1), np.zeros(1)]
    params[move][0] = u
    return HybridAction((move,), tuple(params))


def test_platform_reset_observation():
    env = make_env("platform_lite")
    obs = env.reset()
    assert obs.tolist() == [0.0, 0.30, 1.0, 0.0, 0.0]


def test_platform_run_and_fall_into_gap():
    env = make_env("platform_lite")
    env.reset()
    result = env.step(_platform_action(0, 1.0))
    assert env.position == pytest.approx(0.05)
    assert result.reward == pytest.approx(0.05)
    assert not result.done

    env.reset(options={"position": 0.28})
    result = env.step(_platform_action(1, 0.0))
    assert env.position == pytest.approx(0.36)
    assert result.done
    assert result.reward == 0.0
    assert result.info["fell"] is True


def test_platform_scripted_policy_finishes_the_course():
    env = make_env("platform_lite")
    assert oracle_return(env) == pytest.approx(1.0)


def test_drive_path_dynamics():
    env = make_env("drive_path")
    env.reset()
    rest = HybridAction((0,), (np.zeros(1), np.zeros(1)))
    result = env.step(rest)
    assert result.reward == 0.0
    assert env.speed == 0.0
    assert np.array_equal(env.position, np.zeros(2))

    env.reset()
    env.step(HybridAction((0,), (np.ones(1), np.zeros(1))))
    assert env.speed == pytest.approx(0.2)

    env.reset(options={"speed": 1.0})
    result = env.step(HybridAction((1,), (np.zeros(1), np.zeros(1))))
    assert env.speed == pytest.approx(0.6)
    assert result.info["hand_brake"] is True
    assert {"segment", "near_corner"} <= set(result.info)


def test_drive_path_script_brakes_near_the_first_corner():
    env = make_env("drive_path")
    policy = scripted_policy(env)
    env.reset()
    braked_near_corner = False
    total = 0.0
    for _ in range(env.spec.max_episode_steps):
        result = env.step(policy())
        total += result.reward
        braked_near_corner |= result.info["hand_brake"] and result.info["near_corner"]
        if result.done or result.truncated:
            break
    assert braked_near_corner
    assert np.isfinite(total)


def test_drive_path_brake_script_beats_the_no_brake_script():
    env = make_env("drive_path")
    with_brake = oracle_return(env)
    without_brake = oracle_return(env, use_brake=False)
    assert np.isfinite(without_brake)
    assert with_brake > without_brake


def test_grid_world_step_and_oracle():
    env = make_env("grid_world")
    env.reset()
    result = env.step(HybridAction((0,)))
    assert env.cell == (1, 0)
    assert result.reward == -1.0
    assert oracle_return(env) == pytest.approx(2.0)


def test_point_mass_at_goal_stays_put():
    env = make_env("point_mass")
    env.reset(options={"position": (0.0, 0.0), "velocity": (0.0, 0.0)})
    result = env.step(HybridAction((), (np.zeros(2),)))
    assert result.reward == 0.0
    assert np.array_equal(env.position, np.zeros(2))


def test_point_mass_pd_controller_beats_doing_nothing():
    env = make_env("point_mass")
    start = {"position": (1.0, -0.5)}
    pd = oracle_return(env, reset_options=start)
    env.reset(options=start)
    idle = 0.0
    while True:
        result = env.step(HybridAction((), (np.zeros(2),)))
        idle += result.reward
        if result.truncated:
            break
    assert pd > idle


def test_time_limit_is_truncation_not_termination():
    env = make_env("grid_world")
    env.reset()
    for _ in range(env.spec.max_episode_steps):
        result = env.step(HybridAction((2,)))
    assert result.truncated and not result.done
    with pytest.raises(EnvironmentFault):
        env.step(HybridAction((2,)))


@pytest.mark.parametrize("name", sorted(ENVIRONMENTS))
def test_same_seed_and_actions_give_identical_trajectories(name):
    def rollout():
        env = make_env(name, seed=3)
        rng = make_rng(3, "actions")
        observations = [env.reset(seed=11)]
        for _ in range(30):
            result = env.step(env.sample_action(rng))
            observations.append(result.observation)
            if result.done or result.truncated:
                break
        return np.stack(observations)

    assert np.array_equal(rollout(), rollout())


def test_nonconforming_action_is_an_environment_fault():
    env = make_env("platform_lite")
    env.reset()
    with pytest.raises(EnvironmentFault):
        env.step(HybridAction((5,), (np.zeros(1), np.zeros(1), np.zeros(1))))


def test_unknown_environment_names_the_key():
    with pytest.raises(ConfigError) as exc:
        make_env("cart-pole")
    assert exc.value.key == "env"
    assert make_env("Grid-World").spec.name == "grid_world"
