import math

import pytest

from tinyrts.config import (BASE, RESOURCE, WORKER, ATHLETE, FLAG, TOWER,
                            TD_ENEMY)
from tinyrts.engine.state import (Command, APPLY_DAMAGE, FOLLOW_PATH, MOVE,
                                  NEUTRAL, TIE)
from tinyrts.engine.step import step
from tinyrts.games.ai import ctf_ai, simple_ai
from tinyrts.games.factory import GameInitError, new_game
from tinyrts.games.match import play_game
from tinyrts.games.outcome import outcome, shaped_reward, win_value
from tinyrts.games.strategic import execute_strategic
from tinyrts.games.actions import TD_IDLE


def _noop(state, player):
    return []


# -- factories ------------------------------------------------------------

def test_minirts_layout_invariants(minirts_spec):
    for seed in range(30):
        s = new_game(minirts_spec, seed)
        bases = [u for u in s.units.values() if u.utype == BASE]
        patches = [u for u in s.units.values() if u.utype == RESOURCE]
        workers = [u for u in s.units.values() if u.utype == WORKER]
        assert len(bases) == 2 and len(patches) == 2
        assert len(workers) in (2, 4)  # bonus worker is all-or-nothing
        assert sum(1 for w in workers if w.player == 0) == len(workers) // 2
        b0, b1 = sorted(bases, key=lambda u: u.player)
        assert math.dist((b0.x, b0.y), (b1.x, b1.y)) >= minirts_spec.min_base_distance
        assert s.resources == [100, 100]
        assert s.units[s.base_ids[0]].player == 0
        assert s.units[s.base_ids[1]].player == 1


def test_minirts_patches_start_full(minirts_spec):
    s = new_game(minirts_spec, 0)
    for u in s.units.values():
        if u.utype == RESOURCE:
            assert u.hp == minirts_spec.stats[RESOURCE].hp == 2000
            assert u.player == NEUTRAL


def test_minirts_seeds_differ(minirts_spec):
    pos = set()
    for seed in range(10):
        s = new_game(minirts_spec, seed)
        b = s.units[s.base_ids[0]]
        pos.add((b.x, b.y))
    assert len(pos) > 3


def test_ctf_layout_invariants(ctf_spec):
    for seed in range(20):
        s = new_game(ctf_spec, seed)
        flags = [u for u in s.units.values() if u.utype == FLAG]
        assert len(flags) == 1 and flags[0].player == NEUTRAL
        for p in (0, 1):
            n = sum(1 for u in s.units.values()
                    if u.player == p and u.utype == ATHLETE)
            assert n == ctf_spec.athletes_per_side
        f = flags[0]
        b0 = s.units[s.base_ids[0]]
        b1 = s.units[s.base_ids[1]]
        d0 = math.dist((f.x, f.y), (b0.x, b0.y))
        d1 = math.dist((f.x, f.y), (b1.x, b1.y))
        assert abs(d0 - d1) <= 1.0  # flag starts fair


def test_td_layout_invariants(td_spec):
    s = new_game(td_spec, 0)
    assert s.blocked and s.path
    assert s.path[0] == tuple(s.extra["spawner"])
    b = s.units[s.base_ids[0]]
    assert s.path[-1] == (int(b.x), int(b.y))
    # corridor cells are never walls, and consecutive cells are adjacent
    for a, c in zip(s.path, s.path[1:]):
        assert a not in s.blocked and abs(a[0] - c[0]) + abs(a[1] - c[1]) == 1


# -- mineral conservation -------------------------------------------------

def test_mineral_conservation(minirts_spec):
    """Deposited + carried + still-in-ground == initial 2000 per patch."""
    s = new_game(minirts_spec, 4)
    start = (s.resources[0] + s.resources[1]
             + sum(u.hp for u in s.units.values() if u.utype == RESOURCE))
    seen = set(s.units)
    spent = 0  # every unit created after setup was paid for at list price
    lost = 0   # minerals aboard workers that died mid-haul
    for _ in range(3000):
        carrying = {u.id: u.carry for u in s.units.values() if u.carry}
        cmds = (tuple(simple_ai(s, 0)), tuple(simple_ai(s, 1)))
        step(s, cmds)
        for uid, c in carrying.items():
            if uid not in s.units:
                lost += c
        for uid, u in s.units.items():
            if uid not in seen:
                seen.add(uid)
                spent += minirts_spec.stats[u.utype].cost
        if s.is_terminal():
            break
    now = (s.resources[0] + s.resources[1] + spent + lost
           + sum(u.hp for u in s.units.values() if u.utype == RESOURCE)
           + sum(u.carry for u in s.units.values()))
    assert now == start


# -- CTF rules ------------------------------------------------------------

def _ctf_with_carrier(ctf_spec, seed=1):
    s = new_game(ctf_spec, seed)
    flag = s.units[s.extra["flag_id"]]
    a = next(u for u in s.units.values()
             if u.player == 0 and u.utype == ATHLETE)
    a.x, a.y = flag.x, flag.y
    step(s)
    assert s.flag_carrier == a.id
    return s, a, flag


def test_ctf_pickup_and_carry_speed(ctf_spec):
    s, a, flag = _ctf_with_carrier(ctf_spec)
    x0, y0 = a.x, a.y
    step(s, ((Command(a.id, MOVE, tx=a.x + 5.0, ty=a.y),), ()))
    full = ctf_spec.stats[ATHLETE].speed
    assert math.dist((a.x, a.y), (x0, y0)) == pytest.approx(
        full * ctf_spec.flag_speed_factor)
    assert (flag.x, flag.y) == (a.x, a.y)  # flag rides along


def test_ctf_touchdown_scores_and_resets_flag(ctf_spec):
    s, a, flag = _ctf_with_carrier(ctf_spec)
    base = s.units[s.base_ids[0]]
    a.x, a.y = base.x + 1.0, base.y
    step(s)
    assert s.score[0] == 1 and s.flag_carrier == 0
    assert (flag.x, flag.y) == tuple(map(float, s.extra["flag_home"]))


def test_ctf_win_at_target_score(ctf_spec):
    s, a, flag = _ctf_with_carrier(ctf_spec)
    s.score[0] = ctf_spec.ctf_win_score - 1
    base = s.units[s.base_ids[0]]
    a.x, a.y = base.x + 1.0, base.y
    step(s)
    assert s.winner == 0


def test_ctf_carrier_death_drops_flag_and_respawns(ctf_spec):
    s, a, flag = _ctf_with_carrier(ctf_spec)
    fx, fy = a.x, a.y
    died = s.tick
    step(s, ((), (Command(kind=APPLY_DAMAGE, tid=a.id, amount=10 ** 6),)))
    assert a.id not in s.units and s.flag_carrier == 0
    assert (flag.x, flag.y) == (fx, fy)  # dropped where the carrier fell
    n_before = sum(1 for u in s.units.values()
                   if u.player == 0 and u.utype == ATHLETE)
    for _ in range(ctf_spec.respawn_delay + 1):
        step(s)
    n_after = sum(1 for u in s.units.values()
                  if u.player == 0 and u.utype == ATHLETE)
    assert n_after == n_before + 1
    assert s.tick - died >= ctf_spec.respawn_delay


def test_ctf_shaped_reward_tracks_carry(ctf_spec):
    s, a, flag = _ctf_with_carrier(ctf_spec)
    prev = s.clone()
    base = s.units[s.base_ids[0]]
    step(s, ((Command(a.id, MOVE, tx=base.x, ty=base.y),), ()))
    r = shaped_reward(prev, s, 0)
    assert r > 0  # moved the flag toward home
    assert shaped_reward(prev, s, 1) == 0.0


def test_ctf_ai_game_decides(ctf_spec):
    s, _, _ = play_game(ctf_spec, 3, ctf_ai, ctf_ai)
    assert s.winner in (0, 1)  # symmetric start, but ids break the tie


# -- TD rules -------------------------------------------------------------

def test_td_wave_schedule(td_spec):
    s = new_game(td_spec, 0)
    spawned_total = 0
    for _ in range(td_spec.td_wave_interval * 3 + 1):
        step(s)
    # waves at ticks 200/400/600 with sizes 2, 3, 4
    alive = sum(1 for u in s.units.values() if u.utype == TD_ENEMY)
    gone = s.extra["kills"] + s.extra["leaks"]
    assert s.extra["wave"] == 3
    assert alive + gone + s.extra["pending"] == 2 + 3 + 4


def test_td_tower_economy(td_spec):
    s = new_game(td_spec, 0)
    cap = lambda: 1 + s.extra["kills"] // td_spec.td_kills_per_tower
    assert cap() == 1
    wall = next(iter(s.blocked))
    cmds = execute_strategic(s, 0, wall[1] * 20 + wall[0])
    assert cmds  # first tower is affordable
    step(s, (cmds, ()))
    assert any(u.utype == TOWER for u in s.units.values())
    # a second tower is refused until 5 kills
    other = next(c for c in s.blocked
                 if abs(c[0] - wall[0]) + abs(c[1] - wall[1]) > 2)
    assert execute_strategic(s, 0, other[1] * 20 + other[0]) == []
    s.extra["kills"] = td_spec.td_kills_per_tower
    assert execute_strategic(s, 0, other[1] * 20 + other[0])


def test_td_tower_placement_rules(td_spec):
    s = new_game(td_spec, 0)
    corridor = s.path[len(s.path) // 2]
    assert execute_strategic(s, 0, corridor[1] * 20 + corridor[0]) == []
    assert execute_strategic(s, 0, TD_IDLE) == []
    assert execute_strategic(s, 1, TD_IDLE) == []  # attacker never places


def test_td_leak_rule(td_spec):
    """A creep dropped next to the base leaks (and is removed) once it
    touches the base's collision disc."""
    s = new_game(td_spec, 0)
    creep = s.add_unit(1, TD_ENEMY, float(s.path[-2][0]), float(s.path[-2][1]))
    creep.cmd = FOLLOW_PATH
    creep.progress = len(s.path) - 1
    leaks0 = s.extra["leaks"]
    for _ in range(30):
        step(s)
        if creep.id not in s.units:
            break
    assert s.extra["leaks"] == leaks0 + 1
    assert s.score[1] == 1


def test_td_loss_at_max_leaks(td_spec):
    s = new_game(td_spec, 0)
    s.extra["leaks"] = td_spec.td_max_leaks
    step(s)
    assert s.winner == 1


def test_td_defender_wins_without_leaks(td_spec):
    """Full game: greedy coverage placement clears all ten waves."""
    best_cells = sorted(
        (c for c in new_game(td_spec, 0).blocked),
        key=lambda c: -sum(1 for p in new_game(td_spec, 0).path
                           if math.dist(c, p) <= 4.6),
    )

    def defender(state, player):
        if state.tick % 10:
            return []
        for c in best_cells:
            cmds = execute_strategic(state, 0, c[1] * 20 + c[0])
            if cmds:
                return cmds
        return []

    s, _, _ = play_game(td_spec, 0, defender, _noop)
    assert s.winner == 0 and s.extra["leaks"] == 0


def test_td_no_towers_loses(td_spec):
    s, _, _ = play_game(td_spec, 0, _noop, _noop)
    assert s.winner == 1


def test_td_shaped_reward_penalizes_leaks(td_spec):
    s = new_game(td_spec, 0)
    prev = s.clone()
    s.extra["leaks"] = 3
    assert shaped_reward(prev, s, 0) == pytest.approx(-3 * td_spec.td_leak_penalty)
    assert shaped_reward(prev, s, 1) == 0.0


# -- outcome helpers ------------------------------------------------------

def test_outcome_and_win_value(minirts_spec):
    s = new_game(minirts_spec, 0)
    assert not outcome(s).decided
    assert win_value(s, 0) == 0.5
    s.winner = 1
    o = outcome(s)
    assert o.decided and o.winner == 1 and o.rewards == (-1.0, 1.0)
    assert win_value(s, 1) == 1.0 and win_value(s, 0) == 0.0
    s.winner = TIE
    assert outcome(s).rewards == (0.0, 0.0)
    assert win_value(s, 0) == 0.5


def test_minirts_shaped_reward_is_terminal_only(minirts_spec):
    s = new_game(minirts_spec, 0)
    prev = s.clone()
    step(s)
    assert shaped_reward(prev, s, 0) == 0.0
