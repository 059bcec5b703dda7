"""Incremental MCTS pilot: full-config games vs SIMPLE and HIT_N_RUN, appended to JSONL."""
import json, sys, time
from tinyrts.config import load_spec
from tinyrts.games.match import play_game
from tinyrts.games.outcome import win_value
from tinyrts.agents.mcts import MctsConfig, mcts_policy
from tinyrts.games.ai import simple_ai, hit_n_run_ai

out = sys.argv[1]
spec = load_spec("minirts")
cfg = MctsConfig(num_trees=8, rollouts_per_tree=100, frame_skip=50)
opps = [("simple", simple_ai), ("hitnrun", hit_n_run_ai)]
g = 0
while True:
    name, opp = opps[g % 2]
    seed = 1000 + g
    p0 = mcts_policy(cfg, seed=seed)
    t0 = time.time()
    st, _, _ = play_game(spec, seed, p0, opp)
    rec = {"opp": name, "seed": seed, "win": win_value(st, 0),
           "ticks": st.tick, "secs": round(time.time() - t0, 1)}
    with open(out, "a") as f:
        f.write(json.dumps(rec) + "\n")
    g += 1
