"""Producer-consumer batching context.

N hosted games run on worker threads (producers).  Whenever a game
reaches a decision point, the worker publishes a frame to every consumer
the game is routed to and blocks until all of them have replied.  A
consumer calls wait() to collect a batch of M frames (with per-consumer
history length T) and steps() to deliver the replies and resume exactly
those games.

Threading contract: producers block on a per-decision rendezvous;
consumers block on a per-consumer ready queue; frames move by value;
wait()/steps() for one consumer id are called from a single thread at a
time, distinct consumers may run concurrently.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class ContextError(Exception):
    """Misuse of the context API."""


class ContextStopped(Exception):
    """Raised from wait() when the context shuts down.  An exception --
    not a sentinel value -- so a caller can never mistake it for a
    batch."""


@dataclass(frozen=True)
class KeySpec:
    """One key of the input or reply contract: name, dtype, frame shape."""
    name: str
    dtype: str = "f4"           # numpy dtype string, little-endian
    shape: tuple = ()

    def np_dtype(self):
        return np.dtype(self.dtype).newbyteorder("<")


def _spec_map(specs):
    out = {}
    for s in specs:
        if isinstance(s, str):
            s = KeySpec(s)
        out[s.name] = s
    return out


@dataclass
class ContextConfig:
    num_games: int
    batchsize: int
    input_spec: tuple = ("s", "r", "terminal")
    reply_spec: tuple = ("a",)
    games_per_worker: int = 1    # multiplex g games per worker for large N

    def __post_init__(self):
        if self.num_games <= 0 or self.batchsize <= 0:
            raise ContextError("num_games and batchsize must be positive")
        if self.batchsize > self.num_games:
            raise ContextError("batchsize M must not exceed num_games N")
        if self.games_per_worker <= 0:
            raise ContextError("games_per_worker must be positive")


class Batch:
    """M decision frames for one consumer.

    buffers: key -> ndarray of shape (M, T) + frame shape, zero-padded at
    episode start.  reply: key -> ndarray of shape (M,) + frame shape to
    be filled in before steps().
    """

    __slots__ = ("consumer_id", "game_ids", "episodes", "buffers", "reply",
                 "_points", "_used")

    def __init__(self, consumer_id, game_ids, episodes, buffers, reply, points):
        self.consumer_id = consumer_id
        self.game_ids = game_ids
        self.episodes = episodes
        self.buffers = buffers
        self.reply = reply
        self._points = points
        self._used = False

    def __len__(self):
        return len(self.game_ids)


class _Consumer:
    __slots__ = ("cid", "history", "routing")

    def __init__(self, cid, history, routing):
        self.cid = cid
        self.history = history
        self.routing = routing


class _Decision:
    """Rendezvous for one decision point of one game."""
    __slots__ = ("game", "episode", "event", "replies", "pending", "poison")

    def __init__(self, game, episode, pending):
        self.game = game
        self.episode = episode
        self.event = threading.Event()
        self.replies = {}
        self.pending = pending
        self.poison = False


class Context:
    def __init__(self, config: ContextConfig, make_adapter, base_seed=0):
        """make_adapter(game_index) -> GameAdapter for that slot."""
        self.config = config
        self.input_spec = _spec_map(config.input_spec)
        self.reply_spec = _spec_map(config.reply_spec)
        self.make_adapter = make_adapter
        self.base_seed = base_seed
        self.consumers = []
        self.started = False
        self.stopped = False
        self._lock = threading.Lock()
        self._cv = threading.Condition(self._lock)
        self._queues = {}        # cid -> deque of _Decision
        self._histories = {}     # (game, cid) -> deque of frames
        self._threads = []

    # -- registration -------------------------------------------------

    def register_consumer(self, history=1, routing=None):
        """routing: predicate game_index -> bool, None routes all games."""
        if self.started:
            raise ContextError("register_consumer after start")
        if history <= 0:
            raise ContextError("history length must be positive")
        cid = len(self.consumers)
        self.consumers.append(_Consumer(cid, history, routing))
        self._queues[cid] = deque()
        return cid

    def _routed(self, game):
        routed = [c for c in self.consumers
                  if c.routing is None or c.routing(game)]
        return routed

    # -- lifecycle ----------------------------------------------------

    def start(self):
        if self.started:
            raise ContextError("already started")
        if not self.consumers:
            raise ContextError("no consumer registered")
        for g in range(self.config.num_games):
            if not self._routed(g):
                raise ContextError(f"game {g} routes to no consumer")
        self.started = True
        n = self.config.num_games
        g = self.config.games_per_worker
        for lo in range(0, n, g):
            games = range(lo, min(lo + g, n))
            t = threading.Thread(target=self._worker, args=(list(games),),
                                 daemon=True)
            self._threads.append(t)
            t.start()

    def stop(self, timeout=10.0):
        with self._cv:
            self.stopped = True
            # poison every decision point still waiting for replies
            for q in self._queues.values():
                for dp in q:
                    dp.poison = True
                    dp.event.set()
                q.clear()
            self._cv.notify_all()
        for t in self._threads:
            t.join(timeout)

    # -- producer side ------------------------------------------------

    def _worker(self, games):
        adapters = {}
        episodes = {}
        for game in games:
            adapters[game] = self.make_adapter(game)
            adapters[game].reset(self.base_seed + game)
            episodes[game] = 0
            for c in self._routed(game):
                self._histories[(game, c.cid)] = deque(maxlen=c.history)
        # Every hosted game keeps one decision point in flight at a time;
        # the worker publishes for all of its games before collecting any
        # reply, otherwise a worker multiplexing g games could fill at
        # most one slot of a batch and starve consumers with M > workers.
        pending = {}  # game -> (decision, was_terminal)
        while not self.stopped:
            for game in games:
                if game not in pending:
                    pending[game] = self._publish(adapters[game], game,
                                                  episodes[game])
            # poll so shutdown can interrupt a rendezvous whose batch was
            # already handed to a consumer that will never reply
            next(iter(pending.values()))[0].event.wait(0.05)
            if self.stopped:
                return
            for game in [g for g, (dp, _) in pending.items()
                         if dp.event.is_set()]:
                dp, was_terminal = pending.pop(game)
                if dp.poison:
                    return
                self._apply(adapters[game], game, dp, was_terminal, episodes)

    def _publish(self, adapter, game, episode):
        """Advance one game to its next decision point and enqueue it for
        every routed consumer."""
        adapter.advance()
        was_terminal = adapter.terminal()
        frame = adapter.extract(self.input_spec)
        routed = self._routed(game)
        dp = _Decision(game, episode, len(routed))
        with self._cv:
            if self.stopped:
                dp.poison = True
                dp.event.set()
                return dp, was_terminal
            for c in routed:
                self._histories[(game, c.cid)].append(frame)
                self._queues[c.cid].append(dp)
            self._cv.notify_all()
        return dp, was_terminal

    def _apply(self, adapter, game, dp, was_terminal, episodes):
        reply = {}
        for cid in sorted(dp.replies):
            reply.update(dp.replies[cid])
        adapter.apply(reply)
        # a terminal frame is still delivered (it carries the final
        # reward); the episode resets only after consumers have seen it
        if was_terminal:
            episodes[game] += 1
            n = self.config.num_games
            adapter.reset(self.base_seed + game + n * episodes[game])
            for c in self._routed(game):
                self._histories[(game, c.cid)].clear()

    # -- consumer side ------------------------------------------------

    def wait(self, consumer_id) -> Batch:
        if not self.started:
            raise ContextError("context not started")
        c = self.consumers[consumer_id]
        m = self.config.batchsize
        q = self._queues[consumer_id]
        with self._cv:
            while True:
                if self.stopped:
                    raise ContextStopped()
                if len(q) >= m:
                    points = [q.popleft() for _ in range(m)]
                    histories = [list(self._histories[(dp.game, consumer_id)])
                                 for dp in points]
                    break
                self._cv.wait()
        return self._assemble(c, points, histories)

    def _assemble(self, c, points, histories):
        m = self.config.batchsize
        t = c.history
        buffers = {}
        for ks in self.input_spec.values():
            buf = np.zeros((m, t) + tuple(ks.shape), dtype=ks.np_dtype())
            for i, hist in enumerate(histories):
                # right-align: most recent frame last, zeros pad the front
                for j, frame in enumerate(hist[-t:]):
                    buf[i, t - len(hist[-t:]) + j] = frame[ks.name]
            buffers[ks.name] = buf
        reply = {ks.name: np.zeros((m,) + tuple(ks.shape), dtype=ks.np_dtype())
                 for ks in self.reply_spec.values()}
        return Batch(c.cid, [dp.game for dp in points],
                     [dp.episode for dp in points], buffers, reply, points)

    def steps(self, batch: Batch):
        if batch._used:
            raise ContextError("steps() called twice on the same batch")
        batch._used = True
        for name in self.reply_spec:
            if name not in batch.reply:
                raise ContextError(f"missing reply key {name!r}")
        cid = batch.consumer_id
        for i, dp in enumerate(batch._points):
            dp.replies[cid] = {name: batch.reply[name][i]
                               for name in self.reply_spec}
            dp.pending -= 1
            if dp.pending == 0:
                dp.event.set()
