import io
import math
import random

import numpy as np
import pytest

from tinyrts.config import (BASE, RESOURCE, WORKER, MELEE_ATTACKER)
from tinyrts.engine.state import ATTACK, Command, GameState, NEUTRAL
from tinyrts.engine.view import visible_view
from tinyrts.agents import (
    C_ENEMY, C_HP, C_NEUTRAL, C_OWN, C_RESOURCE, NUM_CHANNELS,
    CheckpointError, CurriculumConfig, LinearPolicyModel, MctsConfig,
    TrainerConfig, actor_critic_update, curriculum_reset, featurize,
    frame_skip_wrap, mcts_decide, model_policy, random_policy,
    t_step_returns,
)
from tinyrts.games.actions import MiniRtsAction as A
from tinyrts.games.factory import new_game


# -- featurizer -----------------------------------------------------------

def test_featurize_worked_example(minirts_spec):
    """Unit at (3.4, 7.8) with 25/50 hp lands in cell (3, 8) with a 0.5
    HP fraction; resource plane is the constant min(res/1000, 1)."""
    s = GameState(minirts_spec, 0)
    u = s.add_unit(0, WORKER, 3.4, 7.8)
    u.hp = 25
    s.add_unit(1, MELEE_ATTACKER, 6.0, 5.0)  # inside the worker's sight
    s.add_unit(NEUTRAL, RESOURCE, 5.0, 9.0)
    s.resources[0] = 250
    t = featurize(visible_view(s, 0))
    assert t.shape == (NUM_CHANNELS, 20, 20) and t.dtype == np.float32
    assert t[C_OWN + WORKER, 8, 3] == 1.0
    assert t[C_HP, 8, 3] == pytest.approx(0.5)
    assert t[C_ENEMY + MELEE_ATTACKER, 5, 6] == 1.0
    assert t[C_NEUTRAL, 9, 5] == 1.0
    assert np.all(t[C_RESOURCE] == pytest.approx(0.25))
    assert t[C_OWN + WORKER].sum() == 1.0  # nothing smeared elsewhere


def test_featurize_respects_fog(minirts_spec):
    s = GameState(minirts_spec, 0)
    s.add_unit(0, WORKER, 2.0, 2.0)
    s.add_unit(1, MELEE_ATTACKER, 18.0, 18.0)  # far outside sight
    t = featurize(visible_view(s, 0))
    assert t[C_ENEMY:C_NEUTRAL].sum() == 0.0


def test_featurize_saturations(minirts_spec):
    s = GameState(minirts_spec, 0)
    s.resources[0] = 5000
    t = featurize(visible_view(s, 0))
    assert np.all(t[C_RESOURCE] == 1.0)
    assert t.min() >= 0.0 and t.max() <= 1.0


# -- model ----------------------------------------------------------------

def test_forward_invariants():
    m = LinearPolicyModel(12, 5, seed=1)
    x = np.random.default_rng(0).normal(size=12)
    pi, v = m.forward(x)
    assert pi.shape == (5,) and pi.sum() == pytest.approx(1.0)
    assert np.all(pi > 0) and -1.0 <= v <= 1.0
    # accepts unflattened input
    pi2, v2 = m.forward(x.reshape(3, 4))
    assert np.allclose(pi, pi2) and v == v2


def test_params_round_trip():
    m = LinearPolicyModel(7, 3, seed=2)
    p = m.get_params()
    assert p.size == m.num_params() == 3 * 7 + 3 + 7 + 1
    m2 = LinearPolicyModel(7, 3, seed=9)
    m2.set_params(p)
    assert np.array_equal(m2.get_params(), p)
    with pytest.raises(ValueError):
        m.set_params(p[:-1])


def test_checkpoint_round_trip():
    m = LinearPolicyModel(10, 4, seed=3)
    data = m.save_bytes()
    back = LinearPolicyModel.load_bytes(data)
    assert back.input_dim == 10 and back.arity == 4
    # float32 storage: equal to f4 precision
    assert np.allclose(back.get_params(), m.get_params(), atol=1e-6)
    x = np.linspace(-1, 1, 10)
    pi_a, _ = m.forward(x)
    pi_b, _ = back.forward(x)
    assert np.allclose(pi_a, pi_b, atol=1e-5)


def test_checkpoint_errors():
    m = LinearPolicyModel(6, 3)
    data = m.save_bytes()
    with pytest.raises(CheckpointError):
        LinearPolicyModel.load_bytes(b"JUNK" + data[4:])
    with pytest.raises(CheckpointError):
        LinearPolicyModel.load_bytes(data[:4] + b"\x07\x00" + data[6:])
    with pytest.raises(CheckpointError):
        LinearPolicyModel.load_bytes(data[:-8])
    with pytest.raises(CheckpointError):
        LinearPolicyModel.load_bytes(data[:10])


def test_gradient_matches_finite_differences():
    """Central finite differences over every parameter, with detached
    advantages so the loss is a plain function of the parameters."""
    rng = np.random.default_rng(7)
    m = LinearPolicyModel(5, 3, seed=7)
    states = rng.normal(size=(4, 5))
    actions = rng.integers(0, 3, size=4)
    returns = rng.normal(size=4)
    adv = np.array([float(returns[i] - m.forward(states[i])[1])
                    for i in range(4)])

    def loss_at(p):
        probe = LinearPolicyModel(5, 3)
        probe.set_params(p)
        l, _, _ = probe.loss_and_grad(states, actions, returns,
                                      advantages=adv)
        return l

    _, grad, _ = m.loss_and_grad(states, actions, returns, advantages=adv)
    p0 = m.get_params()
    eps = 1e-6
    worst = 0.0
    for k in range(p0.size):
        d = np.zeros_like(p0)
        d[k] = eps
        fd = (loss_at(p0 + d) - loss_at(p0 - d)) / (2 * eps)
        denom = max(abs(fd), abs(grad[k]), 1.0)
        worst = max(worst, abs(fd - grad[k]) / denom)
    assert worst < 1e-4


def test_zero_advantage_zero_weights_is_noop():
    m = LinearPolicyModel(4, 3, seed=1)
    states = np.ones((2, 4))
    _, grad, _ = m.loss_and_grad(states, [0, 1], [0.0, 0.0],
                                 value_weight=0.0, entropy_weight=0.0,
                                 advantages=np.zeros(2))
    assert np.allclose(grad, 0.0)


def test_entropy_bonus_pushes_toward_uniform():
    m = LinearPolicyModel(3, 4, seed=5)
    m.Wp *= 3.0  # start visibly peaked
    x = np.array([1.0, -0.5, 0.25])
    ent0 = None
    for _ in range(500):
        _, grad, diag = m.loss_and_grad(x[None], [0], [0.0],
                                        value_weight=0.0, entropy_weight=1.0,
                                        advantages=np.zeros(1))
        if ent0 is None:
            ent0 = diag["entropy"]
        m.apply_grad(grad, 0.1)
    pi, _ = m.forward(x)
    assert -(pi * np.log(pi)).sum() > ent0
    assert pi.max() < 0.30  # near uniform over 4 actions


# -- t-step returns and the update ---------------------------------------

def test_t_step_returns_recursive_oracle():
    rng = random.Random(3)
    for _ in range(50):
        t = rng.randrange(1, 9)
        rewards = [rng.uniform(-1, 1) for _ in range(t)]
        terminals = [rng.random() < 0.25 for _ in range(t)]
        boot = rng.uniform(-1, 1)
        gamma = rng.choice([0.9, 0.99, 1.0])

        def oracle(i):
            if i == t:
                return boot
            future = 0.0 if terminals[i] else oracle(i + 1)
            # terminal frames keep their own reward but nothing after
            return rewards[i] + gamma * (0.0 if terminals[i] else future)

        got = t_step_returns(rewards, terminals, boot, gamma)
        want = [oracle(i) for i in range(t)]
        assert np.allclose(got, want)


def test_t_step_returns_no_terminal_leak():
    got = t_step_returns([1.0, 1.0], [True, False], 10.0, 0.5)
    # frame 0 is terminal: return is just its reward
    assert got[0] == 1.0
    assert got[1] == 1.0 + 0.5 * 10.0


def test_actor_critic_update_moves_params():
    m = LinearPolicyModel(4, 3, seed=0)
    cfg = TrainerConfig(T=3, lr=0.01)
    rng = np.random.default_rng(0)
    batch = {
        "s": rng.normal(size=(2, 4, 4)),
        "a": rng.integers(0, 3, size=(2, 4)),
        "r": rng.normal(size=(2, 4)),
        "terminal": np.zeros((2, 4)),
    }
    before = m.get_params()
    diag = actor_critic_update(m, batch, cfg)
    assert diag["samples"] == 6  # (T+1=4 frames -> 3 decisions) x 2 rows
    assert not np.array_equal(before, m.get_params())


def test_actor_critic_skips_terminal_frames_and_clips():
    m = LinearPolicyModel(4, 3, seed=0)
    cfg = TrainerConfig(T=3, lr=1.0, grad_clip=1e-3)
    batch = {
        "s": np.ones((1, 4, 4)),
        "a": np.zeros((1, 4), dtype=int),
        "r": np.ones((1, 4)),
        "terminal": np.array([[0.0, 1.0, 0.0, 0.0]]),
    }
    before = m.get_params()
    diag = actor_critic_update(m, batch, cfg)
    assert diag["samples"] == 2  # frame 1 is terminal -> dropped
    moved = np.linalg.norm(m.get_params() - before)
    assert moved <= cfg.lr * cfg.grad_clip + 1e-12


def test_trainer_config_validation():
    with pytest.raises(ValueError):
        TrainerConfig(T=0)
    with pytest.raises(ValueError):
        TrainerConfig(gamma=0.0)
    with pytest.raises(ValueError):
        TrainerConfig(frame_skip=0)


# -- MCTS -----------------------------------------------------------------

def _small_cfg(**kw):
    base = dict(num_trees=1, rollouts_per_tree=12, rollout_cap=60,
                frame_skip=10)
    base.update(kw)
    return MctsConfig(**base)


def test_mcts_visit_conservation(minirts_spec):
    """Each simulation increments exactly one root child, so the summed
    root visits equal trees x rollouts."""
    s = new_game(minirts_spec, 1)
    _, visits = mcts_decide(s, 0, _small_cfg(), seed=4, return_visits=True)
    assert sum(visits) == 12
    _, visits = mcts_decide(s, 0, _small_cfg(num_trees=4, rollouts_per_tree=9),
                            seed=4, return_visits=True)
    assert sum(visits) == 36


def test_mcts_root_state_untouched(minirts_spec):
    from tinyrts.engine.state import state_hash
    s = new_game(minirts_spec, 1)
    h = state_hash(s)
    mcts_decide(s, 0, _small_cfg(), seed=0)
    assert state_hash(s) == h


def test_mcts_deterministic(minirts_spec):
    s = new_game(minirts_spec, 2)
    a = mcts_decide(s, 0, _small_cfg(rollouts_per_tree=20), seed=11)
    b = mcts_decide(s, 0, _small_cfg(rollouts_per_tree=20), seed=11)
    assert a == b


def test_mcts_rejects_terminal(minirts_spec):
    s = new_game(minirts_spec, 0)
    s.winner = 0
    with pytest.raises(ValueError):
        mcts_decide(s, 0, _small_cfg())


def test_mcts_finds_forced_win(minirts_spec):
    """Player 0 can kill the enemy base this ply; every other opening
    loses the race against an enemy attacker already chewing on the own
    base.  The search must pick an attacking action."""
    s = GameState(minirts_spec, 0)
    b0 = s.add_unit(0, BASE, 3.0, 10.0)
    b1 = s.add_unit(1, BASE, 16.0, 10.0)
    s.base_ids = [b0.id, b1.id]
    b0.hp = 45   # three enemy hits: dead at ticks 1/16/31 of any rollout
    b1.hp = 15   # one own hit
    s.add_unit(0, MELEE_ATTACKER, 15.0, 10.0)  # adjacent to the enemy base
    raider = s.add_unit(1, MELEE_ATTACKER, 4.0, 10.0)
    raider.cmd = ATTACK
    raider.tid = b0.id
    best = mcts_decide(s, 0, _small_cfg(rollouts_per_tree=150, rollout_cap=40),
                       seed=3)
    assert best in (A.ATTACK, A.ATTACK_IN_RANGE)


# -- curriculum -----------------------------------------------------------

def test_curriculum_progress_one_is_untouched(minirts_spec):
    for seed in range(5):
        state, k = curriculum_reset(minirts_spec, seed, 1.0)
        assert k == 0 and state.tick == 0


def test_curriculum_state_matches_k(minirts_spec):
    cfg = CurriculumConfig(k_max=400)
    for seed in range(5):
        state, k = curriculum_reset(minirts_spec, seed, 0.0, cfg)
        assert state.tick == k <= 400


def test_curriculum_scales_with_progress(minirts_spec):
    noop = CurriculumConfig(k_max=1000, control=lambda s, p: ())
    ks = {p: [curriculum_reset(minirts_spec, seed, p, noop)[1]
              for seed in range(60)] for p in (0.0, 0.25, 0.5)}
    assert all(k == 0 for k in ks[0.5])        # aid gone at half progress
    assert max(ks[0.25]) <= 500
    assert np.mean(ks[0.0]) > np.mean(ks[0.25]) > 0


def test_curriculum_mean_start(minirts_spec):
    """k ~ Uniform(0, 1000) at progress 0: strong-law check on the mean."""
    noop = CurriculumConfig(k_max=1000, control=lambda s, p: ())
    ks = [curriculum_reset(minirts_spec, seed, 0.0, noop)[1]
          for seed in range(400)]
    assert np.mean(ks) == pytest.approx(500, abs=45)  # 3 sigma for n=400
    assert min(ks) >= 0 and max(ks) < 1000


def test_curriculum_deterministic(minirts_spec):
    a = curriculum_reset(minirts_spec, 9, 0.0)
    b = curriculum_reset(minirts_spec, 9, 0.0)
    from tinyrts.engine.state import state_hash
    assert a[1] == b[1] and state_hash(a[0]) == state_hash(b[0])


def test_curriculum_rejects_bad_progress(minirts_spec):
    with pytest.raises(ValueError):
        curriculum_reset(minirts_spec, 0, -0.1)
    with pytest.raises(ValueError):
        curriculum_reset(minirts_spec, 0, 1.5)


# -- policies -------------------------------------------------------------

class _FakeState:
    def __init__(self, tick):
        self.tick = tick


def test_frame_skip_wrap_decision_frequency():
    calls = []

    def policy(state, player):
        calls.append(state.tick)
        return []

    wrapped = frame_skip_wrap(policy, 50)
    for t in range(4000):
        wrapped(_FakeState(t), 0)
    assert len(calls) == 80
    assert calls[:3] == [0, 50, 100]
    with pytest.raises(ValueError):
        frame_skip_wrap(policy, 0)
    assert frame_skip_wrap(policy, 1) is policy


def test_random_policy_deterministic(minirts_spec):
    s = new_game(minirts_spec, 1)
    a = random_policy(seed=3)(s, 0)
    b = random_policy(seed=3)(s, 0)
    assert a == b


def test_model_policy_runs(minirts_spec):
    m = LinearPolicyModel(NUM_CHANNELS * 400, 9, seed=0)
    feat = lambda st, p: featurize(visible_view(st, p))
    s = new_game(minirts_spec, 1)
    greedy = model_policy(m, feat, skip=50, greedy=True)
    sampled = model_policy(m, feat, skip=50, seed=1)
    assert greedy(s, 0) == greedy(s, 0)  # pure function of the state
    sampled(s, 0)
    s.tick = 7
    assert greedy(s, 0) == []  # off the decision schedule
