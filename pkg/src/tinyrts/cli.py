"""Operator command line: benchmark, match, train, replay.

Exit codes: 0 success, 2 usage/config error, 1 internal error.
Reports are printed both as human-readable text and as machine-parsable
`report key=value ...` line records.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from pathlib import Path

from .config import ConfigError, GAME_CODES, load_spec
from .engine.replay import ReplayLog, ReplayMismatchError, replay
from .engine.serialize import DecodeError
from .engine.state import MAP_H, MAP_W
from .engine.step import step
from .games.ai import RULE_AIS
from .games.factory import new_game
from .games.match import play_game, play_match
from .games.outcome import outcome

REFERENCE_TICKS_PER_SEC = 40000  # single-core frames/sec reference point


class UsageError(Exception):
    pass


def _report(name, **fields):
    parts = " ".join(f"{k}={v}" for k, v in fields.items())
    print(f"report {name} {parts}")


def _binomial_ci(wins, n):
    if n == 0:
        return (0.0, 0.0)
    p = wins / n
    half = 1.96 * math.sqrt(max(p * (1 - p), 1e-12) / n)
    return (max(0.0, p - half), min(1.0, p + half))


def _load_spec(game):
    if game not in GAME_CODES:
        raise UsageError(f"unknown game {game!r} (choose from "
                         f"{sorted(GAME_CODES)})")
    return load_spec(game)


def _make_policy(which, game_spec, skip, seed):
    """Player spec: simple | hitnrun | ctf | random | mcts | model:PATH."""
    from .agents import (LinearPolicyModel, MctsConfig, featurize,
                         frame_skip_wrap, mcts_policy, model_policy,
                         random_policy)
    from .engine.view import visible_view

    if which in RULE_AIS:
        return RULE_AIS[which]
    if which == "random":
        return frame_skip_wrap(random_policy(seed=seed), skip)
    if which == "mcts":
        return mcts_policy(MctsConfig(frame_skip=skip), seed=seed)
    if which.startswith("model:"):
        path = which[len("model:"):]
        try:
            model = LinearPolicyModel.load(path)
        except (OSError, Exception) as e:
            raise UsageError(f"cannot load model {path!r}: {e}") from e
        feat = lambda st, p: featurize(visible_view(st, p))
        return model_policy(model, feat, skip=skip, seed=seed, greedy=True)
    raise UsageError(f"unknown player spec {which!r}")


# -- benchmark --------------------------------------------------------

def cmd_benchmark(args):
    spec = _load_spec(args.game)
    if args.games == 0:
        _report("benchmark", game=args.game, games=0, ticks=0,
                ticks_per_sec=0)
        return 0
    ai = RULE_AIS["simple" if args.game == "minirts" else
                  "ctf" if args.game == "ctf" else "simple"]
    if args.game == "td":
        ai = lambda st, p: []
    for k in args.threads:
        ticks, wall = _bench_workers(spec, ai, k, args.games, args.ticks)
        rate = ticks / wall if wall > 0 else 0.0
        print(f"{args.game}: {k} worker(s): {ticks} ticks in {wall:.2f}s "
              f"-> {rate:,.0f} ticks/s aggregate, {rate / k:,.0f} per worker")
        _report("benchmark", game=args.game, workers=k, ticks=ticks,
                wall=round(wall, 3), ticks_per_sec=round(rate),
                per_worker=round(rate / k))
    print(f"(reference single-core target: {REFERENCE_TICKS_PER_SEC:,} ticks/s)")
    return 0


def _bench_one(spec, ai, games, tick_cap, seed0=0):
    ticks = 0
    for seed in range(seed0, seed0 + games):
        st = new_game(spec, seed)
        while not st.is_terminal() and st.tick < tick_cap:
            step(st, (ai(st, 0), ai(st, 1)))
        ticks += st.tick
    return ticks


def _bench_workers(spec, ai, k, games, tick_cap):
    if k == 1:
        t0 = time.perf_counter()
        ticks = _bench_one(spec, ai, games, tick_cap)
        return ticks, time.perf_counter() - t0
    import concurrent.futures as cf
    per = max(1, games // k)
    t0 = time.perf_counter()
    with cf.ProcessPoolExecutor(max_workers=k) as ex:
        futs = [ex.submit(_bench_one, spec, ai, per, tick_cap, i * per)
                for i in range(k)]
        ticks = sum(f.result() for f in futs)
    return ticks, time.perf_counter() - t0


# -- match ------------------------------------------------------------

def cmd_match(args):
    spec = _load_spec(args.game)
    p0 = _make_policy(args.p0, spec, args.skip0, args.seed)
    p1 = _make_policy(args.p1, spec, args.skip1, args.seed + 1)
    wins = [0, 0]
    ties = 0
    lengths = []
    t0 = time.perf_counter()
    for i in range(args.games):
        seed = args.seed + i
        record = args.replay_dir is not None
        st, log, _ = play_game(spec, seed, p0, p1, record=record)
        out = outcome(st)
        if out.decided:
            wins[out.winner] += 1
        else:
            ties += 1
        lengths.append(st.tick)
        if record:
            path = Path(args.replay_dir) / f"game_{seed}.elfr"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(log.to_bytes())
    wall = time.perf_counter() - t0
    n = args.games
    score0 = wins[0] + 0.5 * ties
    rate = score0 / n if n else 0.0
    lo, hi = _binomial_ci(score0, n)
    mean = statistics.mean(lengths) if lengths else 0.0
    std = statistics.pstdev(lengths) if len(lengths) > 1 else 0.0
    print(f"{args.p0} vs {args.p1} on {args.game}: "
          f"{wins[0]}W {wins[1]}L {ties}T of {n}")
    print(f"player-0 win rate {100 * rate:.1f}%  "
          f"(95% CI {100 * lo:.1f}-{100 * hi:.1f}%)")
    print(f"game length {mean:.0f} +- {std:.0f} ticks; {wall:.1f}s wall")
    _report("match", game=args.game, p0=args.p0, p1=args.p1, games=n,
            wins0=wins[0], wins1=wins[1], ties=ties,
            winrate0=round(rate, 4), ci_lo=round(lo, 4), ci_hi=round(hi, 4),
            mean_len=round(mean, 1), std_len=round(std, 1),
            wall=round(wall, 2))
    return 0


# -- train ------------------------------------------------------------

def cmd_train(args):
    import numpy as np
    from .agents import (CurriculumConfig, LinearPolicyModel, TrainerConfig,
                         actor_critic_update, curriculum_reset, featurize,
                         model_policy, NUM_CHANNELS)
    from .engine.view import visible_view
    from .games.actions import action_arity

    spec = _load_spec(args.game)
    if args.opponent not in RULE_AIS:
        raise UsageError(f"unknown opponent {args.opponent!r}")
    try:
        cfg = TrainerConfig(T=args.T, gamma=args.gamma, lr=args.lr,
                            frame_skip=args.frame_skip)
    except ValueError as e:
        raise UsageError(str(e)) from e
    opponent = RULE_AIS[args.opponent]
    arity = action_arity(spec.kind)
    feat = lambda st, p: featurize(visible_view(st, p))
    model = LinearPolicyModel(NUM_CHANNELS * MAP_W * MAP_H, arity,
                              seed=args.seed)
    import random as _random
    rng = _random.Random(args.seed)
    best_rate = -1.0

    def evaluate(n_games):
        pol = model_policy(model, feat, skip=cfg.frame_skip, greedy=True)
        w0, _, t, _ = play_match(spec, range(1000, 1000 + n_games),
                                 pol, opponent)
        return (w0 + 0.5 * t) / n_games

    update = 0
    while update < args.updates:
        progress = update / max(args.updates, 1)
        if args.curriculum == "on":
            st, _ = curriculum_reset(spec, rng.randrange(1 << 30), progress)
        else:
            st = new_game(spec, rng.randrange(1 << 30))
        frames = _collect_episode(st, model, feat, opponent, cfg, rng)
        for lo in range(0, max(len(frames) - cfg.T, 1), cfg.T):
            window = frames[lo:lo + cfg.T + 1]
            if len(window) < 2:
                break
            batch = {
                "s": np.stack([f[0] for f in window])[None],
                "a": np.array([[f[1] for f in window]]),
                "r": np.array([[f[2] for f in window]]),
                "terminal": np.array([[f[3] for f in window]]),
            }
            diag = actor_critic_update(model, batch, cfg)
            update += 1
            if update % args.log_interval == 0:
                print(f"metrics update={update} loss={diag['loss']:.4f} "
                      f"value_loss={diag['value_loss']:.4f} "
                      f"entropy={diag['entropy']:.4f}")
            if update >= args.updates:
                break
    if args.updates > 0 and args.eval_games > 0:
        rate = evaluate(args.eval_games)
        print(f"eval win rate {100 * rate:.1f}% over {args.eval_games} games")
        _report("train", updates=args.updates, eval_winrate=round(rate, 4))
        best_rate = rate
    model.save(args.out)
    print(f"model written to {args.out}")
    return 0


def _collect_episode(st, model, feat, opponent, cfg, rng, cap=4000):
    """Roll one episode with the current stochastic policy; returns a
    list of (features, action, reward, terminal) decision frames."""
    from .games.strategic import execute_strategic
    from .games.outcome import win_value

    frames = []
    me, opp = 0, 1
    while not st.is_terminal() and st.tick < cap:
        if st.tick % cfg.frame_skip == 0:
            x = feat(st, me)
            pi, _ = model.forward(x)
            a = rng.choices(range(len(pi)), weights=pi)[0]
            frames.append([x, a, 0.0, 0.0])
            cmds = (execute_strategic(st, me, a), opponent(st, opp))
        else:
            cmds = ((), opponent(st, opp))
        step(st, cmds)
    if frames:
        final = 2.0 * win_value(st, me) - 1.0 if st.is_terminal() else 0.0
        x = feat(st, me)
        frames.append([x, 0, final, 1.0])
    return frames


# -- replay -----------------------------------------------------------

def cmd_replay(args):
    data = Path(args.file).read_bytes()
    import struct as _struct
    if len(data) < 19 or data[:4] != b"ELFR":
        raise UsageError("corrupt replay: bad magic (offset 0)")
    try:
        # file header is 14 bytes, then the meta record: u32 len, u8
        # type, i32 game kind, i64 seed
        kind, = _struct.unpack_from("<i", data, 19)
    except _struct.error:
        raise UsageError("corrupt replay: missing meta record (offset 14)")
    from .config import GAME_NAMES
    if kind not in GAME_NAMES:
        raise UsageError(f"corrupt replay: bad game kind {kind} (offset 19)")
    spec = load_spec(GAME_NAMES[kind])
    try:
        log = ReplayLog.from_bytes(data, spec)
    except DecodeError as e:
        raise UsageError(f"corrupt replay: {e}")
    try:
        final = replay(log, verify=True)
        diverged = None
    except ReplayMismatchError as e:
        diverged = e.tick
        print(f"hash chain DIVERGED at tick {e.tick}: "
              f"expected {e.expected:016x} got {e.actual:016x}")
        if args.dump == "summary":
            _report("replay", file=args.file, diverged_at=e.tick)
            return 1
        raise
    if args.dump == "summary":
        out = outcome(final)
        print(f"seed {log.seed}  length {final.tick} ticks  "
              f"winner {'tie' if not out.decided else out.winner}")
        print("hash chain OK")
        _report("replay", file=args.file, seed=log.seed, length=final.tick,
                winner=-1 if not out.decided else out.winner)
        return 0
    if args.dump == "ticks":
        for tick, (c0, c1), h in log.ticks:
            if c0 or c1:
                print(f"tick {tick}: p0={list(c0)} p1={list(c1)} "
                      f"hash={h:016x}")
        print("hash chain OK")
        return 0
    if args.dump == "ascii":
        if args.at is None:
            raise UsageError("--dump ascii requires --at TICK")
        if not (0 <= args.at <= final.tick):
            raise UsageError(f"tick out of range (game length {final.tick})")
        st = new_game(spec, log.seed)
        for _, cmds, _ in log.ticks:
            if st.tick >= args.at:
                break
            step(st, cmds)
        _print_ascii(st)
        return 0
    raise UsageError(f"unknown dump mode {args.dump!r}")


_GLYPHS = "B$wXmrAFT e"


def _print_ascii(st):
    grid = [["." for _ in range(MAP_W)] for _ in range(MAP_H)]
    for u in st.units.values():
        cx, cy = int(u.x + 0.5), int(u.y + 0.5)
        if 0 <= cx < MAP_W and 0 <= cy < MAP_H:
            g = _GLYPHS[u.utype] if u.utype < len(_GLYPHS) else "?"
            grid[cy][cx] = g.upper() if u.player == 0 else g.lower()
    for (bx, by) in st.blocked or ():
        if grid[by][bx] == ".":
            grid[by][bx] = "#"
    print(f"tick {st.tick}  res {st.resources}  score {st.score}")
    for row in grid:
        print("".join(row))


# -- argument plumbing ------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="tinyrts",
                                description="tiny concurrent RTS platform")
    sub = p.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("benchmark", help="throughput benchmark")
    b.add_argument("--game", default="minirts")
    b.add_argument("--threads", type=int, nargs="+", default=[1])
    b.add_argument("--games", type=int, default=20)
    b.add_argument("--ticks", type=int, default=5000)
    b.set_defaults(fn=cmd_benchmark)

    m = sub.add_parser("match", help="AI vs AI matches")
    m.add_argument("--game", default="minirts")
    m.add_argument("--p0", default="simple")
    m.add_argument("--p1", default="simple")
    m.add_argument("--games", type=int, default=100)
    m.add_argument("--skip0", type=int, default=50)
    m.add_argument("--skip1", type=int, default=50)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--replay-dir", default=None)
    m.set_defaults(fn=cmd_match)

    t = sub.add_parser("train", help="actor-critic training")
    t.add_argument("--game", default="minirts")
    t.add_argument("--opponent", default="simple")
    t.add_argument("--updates", type=int, default=1000)
    t.add_argument("--T", type=int, default=6)
    t.add_argument("--gamma", type=float, default=0.99)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--frame-skip", type=int, dest="frame_skip", default=50)
    t.add_argument("--curriculum", choices=("on", "off"), default="on")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log-interval", type=int, default=100)
    t.add_argument("--eval-games", type=int, default=20)
    t.add_argument("--out", default="model.ckpt")
    t.set_defaults(fn=cmd_train)

    r = sub.add_parser("replay", help="replay inspection")
    r.add_argument("--file", required=True)
    r.add_argument("--dump", choices=("summary", "ticks", "ascii"),
                   default="summary")
    r.add_argument("--at", type=int, default=None)
    r.set_defaults(fn=cmd_replay)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args) or 0
    except (UsageError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as e:  # internal error contract
        import traceback
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
