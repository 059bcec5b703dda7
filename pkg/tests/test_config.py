import pytest

from tinyrts.config import (
    ConfigError, GameSpec, MINI_RTS, CTF, TD, WORKER, MELEE_ATTACKER,
    load_spec, parse_unit_stats,
)


def test_load_all_games():
    for name, kind in (("minirts", MINI_RTS), ("ctf", CTF), ("td", TD)):
        spec = load_spec(name)
        assert spec.kind == kind
        assert spec.frame_skip == 50
        assert spec.max_ticks > 0


def test_unknown_game_rejected():
    with pytest.raises(ConfigError):
        load_spec("chess")


def test_minirts_stat_table():
    spec = load_spec("minirts")
    w = spec.stats[WORKER]
    assert w.hp == 50 and w.cost == 50 and w.speed == pytest.approx(0.10)
    m = spec.stats[MELEE_ATTACKER]
    assert m.damage == 15 and m.attack_range == 1


def test_parse_rejects_negative_hp():
    bad = "[BASE]\nhp = -5\ndamage = 0\nspeed = 0\nattack_range = 0\n" \
          "cost = 0\nbuild_time = 0\ncooldown = 0\nsight = 1\n"
    with pytest.raises(ConfigError):
        parse_unit_stats(bad)


def test_parse_rejects_malformed_ini():
    with pytest.raises(ConfigError):
        parse_unit_stats("not an ini file [ at all")


def test_digest_differs_between_games():
    a = load_spec("minirts").digest()
    b = load_spec("ctf").digest()
    assert a != b and len(a) == len(b) == 8


def test_digest_stable():
    assert load_spec("minirts").digest() == load_spec("minirts").digest()
