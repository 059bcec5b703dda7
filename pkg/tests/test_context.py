import threading
import time

import numpy as np
import pytest

from tinyrts.context import (
    Batch, BanditAdapter, Context, ContextConfig, ContextError,
    ContextStopped, CountingAdapter, KeySpec, RtsAdapter,
)
from tinyrts.games.ai import simple_ai


def _counting_ctx(n=8, m=4, history=3, length=10, base_seed=0, gpw=1):
    cfg = ContextConfig(num_games=n, batchsize=m, games_per_worker=gpw)
    return Context(cfg, lambda g: CountingAdapter(length=length),
                   base_seed=base_seed)


def _drain(ctx, cid, rounds, on_batch=None, action=0):
    for _ in range(rounds):
        batch = ctx.wait(cid)
        if on_batch is not None:
            on_batch(batch)
        batch.reply["a"][:] = action
        ctx.steps(batch)


# -- configuration & registration ----------------------------------------

def test_config_validation():
    with pytest.raises(ContextError):
        ContextConfig(num_games=0, batchsize=1)
    with pytest.raises(ContextError):
        ContextConfig(num_games=4, batchsize=5)
    with pytest.raises(ContextError):
        ContextConfig(num_games=4, batchsize=2, games_per_worker=0)
    ContextConfig(num_games=4, batchsize=4)  # M == N is legal


def test_register_after_start_rejected():
    ctx = _counting_ctx()
    ctx.register_consumer()
    ctx.start()
    try:
        with pytest.raises(ContextError):
            ctx.register_consumer()
        with pytest.raises(ContextError):
            ctx.start()
    finally:
        ctx.stop()


def test_start_without_consumer_rejected():
    with pytest.raises(ContextError):
        _counting_ctx().start()


def test_unrouted_game_rejected():
    ctx = _counting_ctx(n=4, m=1)
    ctx.register_consumer(routing=lambda g: g < 2)
    with pytest.raises(ContextError):
        ctx.start()


def test_wait_before_start_rejected():
    ctx = _counting_ctx()
    ctx.register_consumer()
    with pytest.raises(ContextError):
        ctx.wait(0)


def test_invalid_history_rejected():
    ctx = _counting_ctx()
    with pytest.raises(ContextError):
        ctx.register_consumer(history=0)


# -- batch contents -------------------------------------------------------

def test_batch_shapes_and_zero_padding():
    ctx = _counting_ctx(n=4, m=4, history=3)
    cid = ctx.register_consumer(history=3)
    ctx.start()
    try:
        batch = ctx.wait(cid)
        assert len(batch) == 4
        assert batch.buffers["s"].shape == (4, 3)
        assert batch.buffers["s"].dtype == np.dtype("<f4")
        # first decision of every episode: only the newest slot is filled
        assert np.array_equal(batch.buffers["s"],
                              [[0, 0, 1]] * 4)
        batch.reply["a"][:] = 0
        ctx.steps(batch)
        batch = ctx.wait(cid)
        assert np.array_equal(batch.buffers["s"], [[0, 1, 2]] * 4)
        batch.reply["a"][:] = 0
        ctx.steps(batch)
        batch = ctx.wait(cid)
        assert np.array_equal(batch.buffers["s"], [[1, 2, 3]] * 4)
        batch.reply["a"][:] = 0
        ctx.steps(batch)
    finally:
        ctx.stop()


def test_steps_twice_rejected():
    ctx = _counting_ctx(n=2, m=2)
    cid = ctx.register_consumer()
    ctx.start()
    try:
        batch = ctx.wait(cid)
        batch.reply["a"][:] = 0
        ctx.steps(batch)
        with pytest.raises(ContextError):
            ctx.steps(batch)
    finally:
        ctx.stop()


def test_missing_reply_key_rejected():
    ctx = _counting_ctx(n=2, m=2)
    cid = ctx.register_consumer()
    ctx.start()
    try:
        batch = ctx.wait(cid)
        del batch.reply["a"]
        with pytest.raises(ContextError):
            ctx.steps(batch)
    finally:
        ctx.stop()


# -- liveness, exactly-once, auto-reset -----------------------------------

def test_exactly_once_and_episode_progression():
    """Every (game, episode) must deliver the frame sequence 1..length
    exactly once, episodes counting up without gaps."""
    length = 10
    ctx = _counting_ctx(n=8, m=4, length=length)
    cid = ctx.register_consumer(history=1)
    seen = {}

    def collect(batch):
        s = batch.buffers["s"][:, -1]
        term = batch.buffers["terminal"][:, -1]
        r = batch.buffers["r"][:, -1]
        for i, g in enumerate(batch.game_ids):
            key = (g, batch.episodes[i])
            seen.setdefault(key, []).append(int(s[i]))
            if s[i] >= length:
                assert term[i] == 1.0 and r[i] == 1.0
            else:
                assert term[i] == 0.0 and r[i] == 0.0

    ctx.start()
    try:
        _drain(ctx, cid, 100, on_batch=collect)
    finally:
        ctx.stop()
    per_game_eps = {}
    for (g, ep), vals in seen.items():
        per_game_eps.setdefault(g, set()).add(ep)
        # in-order, duplicate-free prefix of 1..length
        assert vals == list(range(1, len(vals) + 1))
    assert set(per_game_eps) == set(range(8))
    for g, eps in per_game_eps.items():
        assert eps == set(range(len(eps)))  # no skipped episodes
        assert len(eps) >= 4                # games kept cycling


def test_multiplexed_workers_equivalent():
    """games_per_worker > 1 hosts several games per thread with the same
    delivery guarantees."""
    ctx = _counting_ctx(n=8, m=8, gpw=4)
    cid = ctx.register_consumer()
    got = []
    ctx.start()
    try:
        _drain(ctx, cid, 20, on_batch=lambda b: got.append(sorted(b.game_ids)))
    finally:
        ctx.stop()
    assert all(g == list(range(8)) for g in got)


def test_two_consumers_one_game():
    """Actor (T=1) and optimizer (T=6) both routed to every game: each
    decision blocks until both replied; histories differ per consumer."""
    ctx = _counting_ctx(n=2, m=2)
    actor = ctx.register_consumer(history=1)
    optim = ctx.register_consumer(history=6)
    ctx.start()
    try:
        for k in range(1, 8):
            ba = ctx.wait(actor)
            bo = ctx.wait(optim)
            assert ba.buffers["s"].shape == (2, 1)
            assert bo.buffers["s"].shape == (2, 6)
            assert ba.buffers["s"][0, -1] == bo.buffers["s"][0, -1]
            want = [max(0, k - j) for j in range(5, -1, -1)]
            assert list(bo.buffers["s"][0]) == want
            ba.reply["a"][:] = 0
            bo.reply["a"][:] = 0
            ctx.steps(ba)
            ctx.steps(bo)
    finally:
        ctx.stop()


def test_routing_split():
    """Disjoint routing: consumer 0 sees even games, consumer 1 odd."""
    ctx = _counting_ctx(n=4, m=2)
    even = ctx.register_consumer(routing=lambda g: g % 2 == 0)
    odd = ctx.register_consumer(routing=lambda g: g % 2 == 1)
    ctx.start()
    try:
        for _ in range(5):
            be = ctx.wait(even)
            assert all(g % 2 == 0 for g in be.game_ids)
            be.reply["a"][:] = 0
            ctx.steps(be)
            bo = ctx.wait(odd)
            assert all(g % 2 == 1 for g in bo.game_ids)
            bo.reply["a"][:] = 0
            ctx.steps(bo)
    finally:
        ctx.stop()


def test_stop_unblocks_wait():
    ctx = _counting_ctx(n=1, m=1)
    cid = ctx.register_consumer()
    ctx.start()
    first = ctx.wait(cid)  # hold the only decision hostage: next wait blocks
    outcome = []

    def waiter():
        try:
            ctx.wait(cid)
            outcome.append("batch")
        except ContextStopped:
            outcome.append("stopped")

    t = threading.Thread(target=waiter)
    t.start()
    time.sleep(0.2)
    ctx.stop()
    t.join(5)
    assert outcome == ["stopped"]
    assert not t.is_alive()


def test_stop_is_prompt():
    ctx = _counting_ctx(n=8, m=4)
    cid = ctx.register_consumer()
    ctx.start()
    _drain(ctx, cid, 3)
    t0 = time.time()
    ctx.stop()
    assert time.time() - t0 < 5.0
    assert not any(th.is_alive() for th in ctx._threads)


# -- isolation: hosted games equal standalone games -----------------------

def test_hosted_rts_games_match_standalone(minirts_spec):
    """The context must not perturb simulation: hash sequences of hosted
    games equal a serial rerun with the same seeds and replies."""
    decisions = 15
    base_seed = 40
    n = 2
    spec_keys = (KeySpec("hash", "u8"), "r", "terminal")
    cfg = ContextConfig(num_games=n, batchsize=1, input_spec=spec_keys)
    ctx = Context(cfg, lambda g: RtsAdapter(minirts_spec, simple_ai),
                  base_seed=base_seed)
    cid = ctx.register_consumer(history=1)
    hosted = {g: [] for g in range(n)}
    ctx.start()
    try:
        while min(len(v) for v in hosted.values()) < decisions:
            batch = ctx.wait(cid)
            g = batch.game_ids[0]
            hosted[g].append(int(batch.buffers["hash"][0, -1]))
            batch.reply["a"][:] = 0
            ctx.steps(batch)
    finally:
        ctx.stop()
    for g in range(n):
        solo = RtsAdapter(minirts_spec, simple_ai)
        solo.reset(base_seed + g)
        for k in range(decisions):
            solo.advance()
            frame = solo.extract({"hash": KeySpec("hash", "u8")})
            assert int(frame["hash"]) == hosted[g][k], (g, k)
            solo.apply({"a": 0})


# -- bandit adapter -------------------------------------------------------

def test_bandit_adapter_payoffs():
    b = BanditAdapter()
    wins = [0, 0]
    trials = 2000
    for arm in (0, 1):
        for i in range(trials):
            b.reset(i)
            b.advance()
            b.apply({"a": arm})
            assert b.terminal()
            b.advance()
            wins[arm] += b.extract({"r": None})["r"] == 1.0
    assert wins[0] / trials == pytest.approx(0.1, abs=0.03)
    assert wins[1] / trials == pytest.approx(0.9, abs=0.03)
