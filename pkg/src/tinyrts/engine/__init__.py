from .state import (GameState, Unit, Command, state_hash, cell_of,
                    ONGOING, TIE, NEUTRAL,
                    IDLE, MOVE, ATTACK, GATHER, BUILD_STRUCT, PRODUCE,
                    HIT_AND_RUN, FOLLOW_PATH,
                    APPLY_DAMAGE, SPAWN_UNIT, REMOVE_UNIT, CHANGE_RESOURCE,
                    SET_POSITION)
from .step import step, find_free_cell, GAME_SYSTEMS, RANGE_SLACK
from .view import PlayerView, visible_view
from .serialize import (snapshot, restore, DecodeError, VersionError,
                        ConfigMismatchError)
from .replay import ReplayLog, ReplayMismatchError, replay
