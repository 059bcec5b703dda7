"""Game adapters: anything with reset/advance/extract/apply/terminal can
be hosted by the context.  The RTS adapter drives one engine game with a
scripted opponent; the toy adapters exist for tests and the learning
smoke loop."""

from __future__ import annotations

import random

import numpy as np

from ..config import GameSpec
from ..engine.state import state_hash
from ..engine.step import step
from ..games.factory import new_game
from ..games.actions import action_arity
from ..games.strategic import execute_strategic
from ..games.outcome import win_value, shaped_reward


class RtsAdapter:
    """Hosts one engine game.  Decision points arrive every frame_skip
    ticks for the controlled player; the opponent is a rule AI called
    every tick.  Reply key 'a' is a strategic action index."""

    def __init__(self, spec: GameSpec, opponent, player=0, featurizer=None,
                 max_ticks=None):
        self.spec = spec
        self.opponent = opponent
        self.player = player
        self.featurizer = featurizer
        self.max_ticks = max_ticks
        self.state = None
        self._prev = None
        self._cur_reward = 0.0

    def reset(self, seed):
        self.state = new_game(self.spec, seed)
        self._prev = None
        self._cur_reward = 0.0

    def advance(self):
        st = self.state
        skip = self.spec.frame_skip
        me = self.player
        opp = me ^ 1
        while not st.is_terminal():
            if st.tick % skip == 0 and st.tick > 0:
                break
            cmds = [(), ()]
            ocmds = self.opponent(st, opp)
            cmds[opp] = ocmds
            step(st, cmds)
            if self.max_ticks is not None and st.tick >= self.max_ticks:
                st.winner = 2
        # terminal states are decision points too: the consumer must see
        # the final reward/terminal flag
        if st.is_terminal():
            self._cur_reward = 2.0 * win_value(st, me) - 1.0   # +1 / 0 / -1
        elif self._prev is None:
            self._cur_reward = 0.0
        else:
            self._cur_reward = shaped_reward(self._prev, st, me)
        self._prev = st.clone()

    def extract(self, input_spec):
        st = self.state
        frame = {}
        for name in input_spec:
            if name == "s":
                if self.featurizer is None:
                    raise ValueError("input key 's' needs a featurizer")
                frame["s"] = self.featurizer(st, self.player)
            elif name == "r":
                frame["r"] = self._cur_reward
            elif name == "terminal":
                frame["terminal"] = 1.0 if st.is_terminal() else 0.0
            elif name == "hash":
                frame["hash"] = np.uint64(state_hash(st))
            elif name == "tick":
                frame["tick"] = float(st.tick)
            else:
                raise ValueError(f"unknown input key {name!r}")
        return frame

    def apply(self, reply):
        st = self.state
        if st.is_terminal():
            return
        me = self.player
        action = int(reply.get("a", 0))
        arity = action_arity(st.kind)
        cmds = [(), ()]
        cmds[me] = execute_strategic(st, me, action % arity)
        cmds[me ^ 1] = self.opponent(st, me ^ 1)
        step(st, cmds)

    def terminal(self):
        return self.state.is_terminal()


class CountingAdapter:
    """Deterministic toy game: T decision points then terminal.  Frames
    expose the running tick so tests can check ordering/history."""

    def __init__(self, length=10):
        self.length = length
        self.t = 0
        self.seed = 0

    def reset(self, seed):
        self.seed = seed
        self.t = 0

    def advance(self):
        if self.t < self.length:
            self.t += 1

    def extract(self, input_spec):
        frame = {}
        for name in input_spec:
            if name == "s":
                frame["s"] = float(self.t)
            elif name == "r":
                frame["r"] = 1.0 if self.t >= self.length else 0.0
            elif name == "terminal":
                frame["terminal"] = 1.0 if self.t >= self.length else 0.0
            else:
                frame[name] = 0.0
        return frame

    def apply(self, reply):
        pass

    def terminal(self):
        return self.t >= self.length


class BanditAdapter:
    """One-step two-armed bandit.  Arm 1 pays 1 with p=0.9, arm 0 with
    p=0.1; every episode is a single decision point."""

    def __init__(self, p_good=0.9, p_bad=0.1):
        self.p = (p_bad, p_good)
        self.rng = random.Random(0)
        self.done = False
        self.last_reward = 0.0

    def reset(self, seed):
        self.rng = random.Random(seed)
        self.done = False
        self.last_reward = 0.0

    def advance(self):
        pass

    def extract(self, input_spec):
        frame = {}
        for name in input_spec:
            if name == "s":
                frame["s"] = 1.0    # single featureless state
            elif name == "r":
                frame["r"] = self.last_reward
            elif name == "terminal":
                frame["terminal"] = 1.0 if self.done else 0.0
            else:
                frame[name] = 0.0
        return frame

    def apply(self, reply):
        arm = int(reply.get("a", 0)) & 1
        self.last_reward = 1.0 if self.rng.random() < self.p[arm] else 0.0
        self.done = True

    def terminal(self):
        return self.done
