"""The tick advance: command application, durative command execution,
collision-checked movement, combat, death resolution.

This is the hottest loop in the package; it deliberately trades niceness
for speed (one big function, cached locals, no per-tick allocation
beyond small lists).
"""

from __future__ import annotations

import math

from ..config import (MAP_W, MAP_H, BASE, RESOURCE, WORKER, BARRACKS,
                      MELEE_ATTACKER, RANGE_ATTACKER, FLAG, TD_ENEMY,
                      MINI_RTS, CTF, TD)
from .state import (GameState, Command, ONGOING, TIE, NEUTRAL,
                    IDLE, MOVE, ATTACK, GATHER, BUILD_STRUCT, PRODUCE,
                    HIT_AND_RUN, FOLLOW_PATH,
                    APPLY_DAMAGE, SPAWN_UNIT, REMOVE_UNIT, CHANGE_RESOURCE,
                    SET_POSITION, DURATIVE_KINDS)

# In-range means center distance <= attack_range + RANGE_SLACK, so a
# range-1 melee unit can hit across touching 0.5-radius footprints.
RANGE_SLACK = 0.6
INTERACT_RANGE = 2.0   # mine / deposit adjacency
SITE_RANGE = 1.3       # stop-distance when walking to a build site
MIN_SEP_SQ = 1.0       # squared center distance below which discs overlap

# Deterministic spiral used to find a free cell near a point.
SPIRAL = [(0, 0)]
for _r in range(1, 4):
    for _dx in range(-_r, _r + 1):
        for _dy in range(-_r, _r + 1):
            if max(abs(_dx), abs(_dy)) == _r:
                SPIRAL.append((_dx, _dy))

# Game-specific per-tick systems, keyed by game kind; registered by the
# games package so the engine stays game-agnostic.
GAME_SYSTEMS = {}


def find_free_cell(state, cx, cy, ignore_id=0, clearance=0.0):
    """First free integer cell near (cx, cy) in spiral order, or None.

    clearance > 0 additionally keeps that much distance from immobile
    units (buildings, resources) so new structures never pinch off a
    passable corridor between two footprints."""
    units = state.units
    blocked = state.blocked
    stats = state.spec.stats
    c2 = clearance * clearance
    for dx, dy in SPIRAL:
        x = cx + dx
        y = cy + dy
        if not (0 <= x <= MAP_W - 1 and 0 <= y <= MAP_H - 1):
            continue
        if blocked and (int(x + 0.5), int(y + 0.5)) in blocked:
            continue
        ok = True
        for v in units.values():
            if v.id == ignore_id or v.utype == FLAG:
                continue
            ddx = v.x - x
            ddy = v.y - y
            d2 = ddx * ddx + ddy * ddy
            if d2 < MIN_SEP_SQ:
                ok = False
                break
            if c2 and d2 < c2 and stats[v.utype].speed == 0.0:
                ok = False
                break
        if ok:
            return (float(x), float(y))
    return None


def _position_free(units, blocked, x, y, self_id):
    if not (0.0 <= x <= MAP_W - 1 and 0.0 <= y <= MAP_H - 1):
        return False
    if blocked and (int(x + 0.5), int(y + 0.5)) in blocked:
        return False
    for v in units.values():
        if v.id == self_id or v.utype == FLAG:
            continue
        dx = v.x - x
        dy = v.y - y
        if dx * dx + dy * dy < MIN_SEP_SQ:
            return False
    return True


def _can_slide(units, blocked, u, x, y, stats):
    """Like _position_free, but friendly mobile units pass through each
    other (greedy steering has no pathfinder, so commuter traffic would
    deadlock otherwise) and a unit already in contact with a blocker may
    keep moving as long as the move does not bring it any closer."""
    if not (0.0 <= x <= MAP_W - 1 and 0.0 <= y <= MAP_H - 1):
        return False
    if blocked and (int(x + 0.5), int(y + 0.5)) in blocked:
        return False
    for v in units.values():
        if v.id == u.id or v.utype == FLAG:
            continue
        if v.player == u.player and stats[v.utype].speed > 0.0:
            continue
        dx = v.x - x
        dy = v.y - y
        nd2 = dx * dx + dy * dy
        if nd2 < MIN_SEP_SQ:
            cx = v.x - u.x
            cy = v.y - u.y
            if nd2 <= cx * cx + cy * cy + 1e-12:
                return False
    return True


DETOUR_TICKS = 12


def _move_toward(state, u, tx, ty, speed):
    """One tick of straight-line steering with axis-aligned detours."""
    dx = tx - u.x
    dy = ty - u.y
    d = math.sqrt(dx * dx + dy * dy)
    if d <= 1e-9:
        return
    if d <= speed:
        nx, ny = tx, ty
    else:
        f = speed / d
        nx = u.x + dx * f
        ny = u.y + dy * f
    units = state.units
    blocked = state.blocked
    stats = state.spec.stats
    if u.detour == 0:
        if _can_slide(units, blocked, u, nx, ny, stats):
            u.x = nx
            u.y = ny
            return
        if _can_slide(units, blocked, u, nx, u.y, stats):
            u.x = nx
            return
        if _can_slide(units, blocked, u, u.x, ny, stats):
            u.y = ny
            return
        # fully blocked: commit to one sidestep direction for a stretch.
        # Re-deciding every tick lets tiny axis moves undo the sidestep
        # and units limit-cycle in place; commitment walks them around.
        u.detour = DETOUR_TICKS if (u.id & 1) else -DETOUR_TICKS
    # detour mode: head for the goal the moment the way clears, otherwise
    # keep sidestepping the committed way (flip if that side is walled).
    if _can_slide(units, blocked, u, nx, ny, stats):
        u.x = nx
        u.y = ny
        u.detour = 0
        return
    sign = 1 if u.detour > 0 else -1
    u.detour -= sign
    px = u.x - dy / d * speed * sign
    py = u.y + dx / d * speed * sign
    if _can_slide(units, blocked, u, px, py, stats):
        u.x = px
        u.y = py
        return
    px = u.x + dy / d * speed * sign
    py = u.y - dx / d * speed * sign
    if _can_slide(units, blocked, u, px, py, stats):
        u.x = px
        u.y = py
        u.detour = -sign * DETOUR_TICKS


def _move_away(state, u, fx, fy, speed):
    dx = u.x - fx
    dy = u.y - fy
    d = math.sqrt(dx * dx + dy * dy)
    if d <= 1e-9:
        dx, dy, d = 1.0, 0.0, 1.0
    f = speed / d
    nx = min(max(u.x + dx * f, 0.0), MAP_W - 1.0)
    ny = min(max(u.y + dy * f, 0.0), MAP_H - 1.0)
    units = state.units
    blocked = state.blocked
    stats = state.spec.stats
    if _can_slide(units, blocked, u, nx, ny, stats):
        u.x = nx
        u.y = ny
    elif _can_slide(units, blocked, u, nx, u.y, stats):
        u.x = nx
    elif _can_slide(units, blocked, u, u.x, ny, stats):
        u.y = ny


def step(state: GameState, commands=((), ())) -> GameState:
    """Advance the world by exactly one tick.

    commands: per-player sequences of Command.  Malformed commands are
    dropped (counted in state.dropped) rather than raised, so a buggy
    caller cannot break determinism.  Returns the same state object.
    """
    if state.winner != ONGOING:
        return state
    units = state.units
    stats = state.spec.stats
    resources = state.resources

    # -- 1. apply issued commands (last writer wins per unit) -------------
    for player, plist in enumerate(commands):
        for c in plist:
            k = c.kind
            if k in DURATIVE_KINDS:
                u = units.get(c.unit_id)
                if u is None or u.player != player:
                    state.dropped += 1
                    continue
                u.cmd = k
                u.phase = 0
                u.progress = 0
                u.tx = c.tx
                u.ty = c.ty
                u.tid = c.tid
                u.btype = c.btype
            elif k == APPLY_DAMAGE:
                t = units.get(c.tid)
                if t is None:
                    state.dropped += 1
                else:
                    t.hp -= c.amount
            elif k == SPAWN_UNIT:
                state.add_unit(c.amount, c.btype, c.tx, c.ty)
            elif k == REMOVE_UNIT:
                if units.pop(c.tid, None) is None:
                    state.dropped += 1
            elif k == CHANGE_RESOURCE:
                resources[player] = max(0, resources[player] + c.amount)
            elif k == SET_POSITION:
                u = units.get(c.unit_id)
                if u is None:
                    state.dropped += 1
                else:
                    u.x = c.tx
                    u.y = c.ty
            elif k != IDLE:
                state.dropped += 1

    # -- 2. advance durative commands ------------------------------------
    flag_factor = state.spec.flag_speed_factor
    for u in list(units.values()):
        if u.cooldown:
            u.cooldown -= 1
        cmd = u.cmd
        if cmd == IDLE:
            continue
        st = stats[u.utype]

        if cmd == MOVE:
            speed = st.speed
            if state.flag_carrier == u.id:
                speed *= flag_factor
            _move_toward(state, u, u.tx, u.ty, speed)
            dx = u.tx - u.x
            dy = u.ty - u.y
            if dx * dx + dy * dy <= 0.04:
                u.set_idle()

        elif cmd == ATTACK:
            t = units.get(u.tid)
            if t is None or t.hp <= 0:
                u.set_idle()
                continue
            rng = st.attack_range + RANGE_SLACK
            dx = t.x - u.x
            dy = t.y - u.y
            if dx * dx + dy * dy <= rng * rng:
                if u.cooldown == 0:
                    t.hp -= st.damage
                    u.cooldown = st.cooldown
            else:
                speed = st.speed
                if state.flag_carrier == u.id:
                    speed *= flag_factor
                _move_toward(state, u, t.x, t.y, speed)
                if u.cooldown == 0:
                    # opportunistic: clear whatever enemy is in reach while
                    # marching, so walls of units cannot stall an assault
                    enemy = u.player ^ 1
                    r2 = rng * rng
                    for v in units.values():
                        if v.player == enemy and v.hp > 0:
                            dx = v.x - u.x
                            dy = v.y - u.y
                            if dx * dx + dy * dy <= r2:
                                v.hp -= st.damage
                                u.cooldown = st.cooldown
                                break

        elif cmd == GATHER:
            if u.phase == 0:  # walk to the resource
                t = units.get(u.tid)
                if t is None:
                    t = _nearest_resource(state, u)
                    if t is None:
                        u.set_idle()
                        continue
                    u.tid = t.id
                dx = t.x - u.x
                dy = t.y - u.y
                if dx * dx + dy * dy <= INTERACT_RANGE * INTERACT_RANGE:
                    u.phase = 1
                    u.progress = 0
                else:
                    _move_toward(state, u, t.x, t.y, st.speed)
            elif u.phase == 1:  # mine
                t = units.get(u.tid)
                if t is None:
                    u.phase = 0
                    continue
                u.progress += 1
                if u.progress >= state.spec.mine_time:
                    take = min(state.spec.gather_amount, t.hp)
                    t.hp -= take
                    u.carry = take
                    u.phase = 2
                    u.progress = 0
            else:  # phase 2: haul back to base
                b = units.get(state.base_ids[u.player])
                if b is None:
                    u.set_idle()
                    continue
                dx = b.x - u.x
                dy = b.y - u.y
                if dx * dx + dy * dy <= INTERACT_RANGE * INTERACT_RANGE:
                    resources[u.player] += u.carry
                    u.carry = 0
                    u.phase = 0
                else:
                    _move_toward(state, u, b.x, b.y, st.speed)

        elif cmd == PRODUCE:
            bst = stats[u.btype]
            u.progress += 1
            if u.progress >= bst.build_time:
                if resources[u.player] >= bst.cost:
                    pos = find_free_cell(state, int(u.x + 0.5), int(u.y + 0.5))
                    if pos is not None:
                        resources[u.player] -= bst.cost
                        state.add_unit(u.player, u.btype, pos[0], pos[1])
                u.set_idle()

        elif cmd == BUILD_STRUCT:
            if u.phase == 0:  # walk near the site
                dx = u.tx - u.x
                dy = u.ty - u.y
                if dx * dx + dy * dy <= SITE_RANGE * SITE_RANGE:
                    u.phase = 1
                    u.progress = 0
                else:
                    _move_toward(state, u, u.tx, u.ty, st.speed)
            else:
                bst = stats[u.btype]
                u.progress += 1
                if u.progress >= bst.build_time:
                    if (resources[u.player] >= bst.cost
                            and _position_free(units, state.blocked, u.tx, u.ty, u.id)):
                        resources[u.player] -= bst.cost
                        state.add_unit(u.player, u.btype, u.tx, u.ty)
                    u.set_idle()

        elif cmd == HIT_AND_RUN:
            enemy = u.player ^ 1
            best = None
            best_d2 = st.sight * st.sight
            for v in units.values():
                if v.player == enemy and stats[v.utype].damage > 0:
                    dx = v.x - u.x
                    dy = v.y - u.y
                    d2 = dx * dx + dy * dy
                    if d2 < best_d2 or (d2 == best_d2 and best is not None and v.id < best.id):
                        best = v
                        best_d2 = d2
            rng = st.attack_range + RANGE_SLACK
            if best is not None:
                if u.cooldown == 0:
                    if best_d2 <= rng * rng:
                        best.hp -= st.damage
                        u.cooldown = st.cooldown
                    else:
                        _move_toward(state, u, best.x, best.y, st.speed)
                else:
                    _move_away(state, u, best.x, best.y, st.speed)
            else:
                b = units.get(state.base_ids[enemy])
                if b is None:
                    u.set_idle()
                    continue
                dx = b.x - u.x
                dy = b.y - u.y
                if dx * dx + dy * dy <= rng * rng:
                    if u.cooldown == 0:
                        b.hp -= st.damage
                        u.cooldown = st.cooldown
                else:
                    _move_toward(state, u, b.x, b.y, st.speed)

        elif cmd == FOLLOW_PATH:
            path = state.path
            if u.progress >= len(path):
                continue  # at the end; the TD system resolves the leak
            tx, ty = path[u.progress]
            dx = tx - u.x
            dy = ty - u.y
            if dx * dx + dy * dy <= 0.09:
                u.progress += 1
            else:
                _move_toward(state, u, float(tx), float(ty), st.speed)

    # -- 3. game-specific system (CTF flag logic, TD waves/towers) --------
    system = GAME_SYSTEMS.get(state.kind)
    if system is not None:
        system(state)

    # -- 4. death resolution ----------------------------------------------
    dead = [u for u in units.values() if u.hp <= 0]
    if dead:
        base_down = [False, False]
        for u in dead:
            del units[u.id]
            if u.utype == BASE and u.player in (0, 1):
                base_down[u.player] = True
            elif state.kind == TD and u.utype == TD_ENEMY:
                state.extra["kills"] = state.extra.get("kills", 0) + 1
                state.score[0] += 1
            elif state.kind == CTF:
                _ctf_on_death(state, u)
        if base_down[0] or base_down[1]:
            if base_down[0] and base_down[1]:
                state.winner = TIE
            elif base_down[0]:
                state.winner = 1
            else:
                state.winner = 0

    # -- 5. tick and safety cap -------------------------------------------
    state.tick += 1
    if state.winner == ONGOING and state.tick >= state.spec.max_ticks:
        state.winner = TIE
    return state


def _nearest_resource(state, u):
    best = None
    best_d2 = 1e18
    for v in state.units.values():
        if v.utype == RESOURCE:
            dx = v.x - u.x
            dy = v.y - u.y
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best = v
                best_d2 = d2
    return best


def _ctf_on_death(state, u):
    # Dropped flag stays where the carrier fell; athletes respawn at base
    # after the configured delay (handled by the CTF system).
    if state.flag_carrier == u.id:
        state.flag_carrier = 0
    if u.utype != BASE and u.player in (0, 1):
        q = state.extra.setdefault("respawn", [])
        q.extend((state.tick + state.spec.respawn_delay, u.player))
