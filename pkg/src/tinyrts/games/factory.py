"""Game setup: randomized initial states for the three games.

All randomness a game ever consumes is drawn here, from one seeded
generator, so that stepping is RNG-free and fully deterministic.
"""

from __future__ import annotations

import math
import random

from ..config import (MAP_W, MAP_H, BASE, RESOURCE, WORKER, ATHLETE, FLAG,
                      MINI_RTS, CTF, TD, GameSpec)
from ..engine.state import GameState, NEUTRAL
from ..engine.step import find_free_cell


class GameInitError(Exception):
    """No placeable layout found after bounded rejection sampling."""


MAX_PLACE_ATTEMPTS = 100


def new_game(spec: GameSpec, seed: int) -> GameState:
    if spec.kind == MINI_RTS:
        return _new_minirts(spec, seed)
    if spec.kind == CTF:
        return _new_ctf(spec, seed)
    return _new_td(spec, seed)


def attach_static(state: GameState) -> None:
    """Recompute fields derived from the spec (maze walls, path) that are
    not serialized with the state."""
    if state.kind == TD:
        blocked, path, _, _ = _parse_maze(state.spec.maze)
        state.blocked = blocked
        state.path = path


def _new_minirts(spec: GameSpec, seed: int) -> GameState:
    rng = random.Random(seed)
    min_d = spec.min_base_distance
    for _ in range(MAX_PLACE_ATTEMPTS):
        b0 = (rng.randrange(2, MAP_W - 2), rng.randrange(2, MAP_H - 2))
        b1 = (rng.randrange(2, MAP_W - 2), rng.randrange(2, MAP_H - 2))
        if math.dist(b0, b1) < min_d:
            continue
        state = GameState(spec, seed)
        state.resources = [100, 100]
        for p, (bx, by) in enumerate((b0, b1)):
            base = state.add_unit(p, BASE, float(bx), float(by))
            state.base_ids[p] = base.id
        ok = True
        for p, (bx, by) in enumerate((b0, b1)):
            # one mineral patch a short walk from each base, kept clearly
            # on the owner's side so the two economies never share a patch
            ex, ey = (b1 if p == 0 else b0)
            placed = False
            for _ in range(40):
                ang = rng.uniform(0, 2 * math.pi)
                r = rng.uniform(6.0, 9.0)
                rx = int(bx + r * math.cos(ang) + 0.5)
                ry = int(by + r * math.sin(ang) + 0.5)
                if not (0 <= rx <= MAP_W - 1 and 0 <= ry <= MAP_H - 1):
                    continue
                if math.dist((rx, ry), (ex, ey)) < r + 2.0:
                    continue
                cell = find_free_cell(state, rx, ry)
                if cell is not None:
                    state.add_unit(NEUTRAL, RESOURCE, cell[0], cell[1])
                    placed = True
                    break
            if not placed:
                ok = False
                break
            cell = find_free_cell(state, bx + 1, by)
            if cell is None:
                ok = False
                break
            state.add_unit(p, WORKER, cell[0], cell[1])
        if not ok:
            continue
        # occasional bonus worker, same coin for both players keeps balance
        if rng.random() < spec.bonus_unit_chance:
            for p in (0, 1):
                b = state.units[state.base_ids[p]]
                cell = find_free_cell(state, int(b.x), int(b.y))
                if cell is not None:
                    state.add_unit(p, WORKER, cell[0], cell[1])
        return state
    raise GameInitError(f"no valid Mini-RTS layout for seed {seed}")


def _new_ctf(spec: GameSpec, seed: int) -> GameState:
    rng = random.Random(seed)
    for _ in range(MAX_PLACE_ATTEMPTS):
        b0 = (rng.randrange(1, 6), rng.randrange(2, MAP_H - 2))
        b1 = (rng.randrange(MAP_W - 6, MAP_W - 1), rng.randrange(2, MAP_H - 2))
        # flag in a random place equidistant (within one cell) to both bases
        flag = None
        for _ in range(200):
            fx = rng.randrange(3, MAP_W - 3)
            fy = rng.randrange(1, MAP_H - 1)
            if abs(math.dist((fx, fy), b0) - math.dist((fx, fy), b1)) <= 1.0:
                flag = (fx, fy)
                break
        if flag is None:
            continue
        state = GameState(spec, seed)
        for p, (bx, by) in enumerate((b0, b1)):
            base = state.add_unit(p, BASE, float(bx), float(by))
            state.base_ids[p] = base.id
        f = state.add_unit(NEUTRAL, FLAG, float(flag[0]), float(flag[1]))
        state.extra["flag_id"] = f.id
        state.extra["flag_home"] = [flag[0], flag[1]]
        state.extra["respawn"] = []
        ok = True
        for p, (bx, by) in enumerate((b0, b1)):
            for _ in range(spec.athletes_per_side):
                ax = bx + rng.randrange(-2, 3)
                ay = by + rng.randrange(-2, 3)
                cell = find_free_cell(state, ax, ay)
                if cell is None:
                    ok = False
                    break
                state.add_unit(p, ATHLETE, cell[0], cell[1])
            if not ok:
                break
        if ok:
            return state
    raise GameInitError(f"no valid CTF layout for seed {seed}")


def _parse_maze(maze):
    blocked = set()
    path_cells = set()
    base = spawner = None
    for y, row in enumerate(maze):
        for x, ch in enumerate(row):
            if ch == "#":
                blocked.add((x, y))
            else:
                path_cells.add((x, y))
                if ch == "B":
                    base = (x, y)
                elif ch == "S":
                    spawner = (x, y)
    # walk the corridor from spawner to base
    path = [spawner]
    seen = {spawner}
    cur = spawner
    while cur != base:
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt in path_cells and nxt not in seen:
                path.append(nxt)
                seen.add(nxt)
                cur = nxt
                break
        else:
            raise ValueError("maze corridor is not connected")
    return frozenset(blocked), path, base, spawner


def _new_td(spec: GameSpec, seed: int) -> GameState:
    blocked, path, base, spawner = _parse_maze(spec.maze)
    state = GameState(spec, seed)
    state.blocked = blocked
    state.path = path
    b = state.add_unit(0, BASE, float(base[0]), float(base[1]))
    state.base_ids[0] = b.id
    state.extra["wave"] = 0
    state.extra["pending"] = 0
    state.extra["kills"] = 0
    state.extra["leaks"] = 0
    state.extra["spawner"] = [spawner[0], spawner[1]]
    return state
