"""Walk through one short run of the line ensemble, event by event.

Starts a small ensemble from its stationary law, replays every
reproduction event in a window, and shows how the total tree length
moves: a deterministic upward drift of slope N between events, and a
downward jump at each event equal to the age of the line that exits
through the top level (plus a root correction when the exiting birth
time was the oldest one).
"""

import numpy as np

from kingman import lookdown, treelength
from kingman.rng import make_stream

N = 8
WINDOW = (0.0, 1.5)
SEED = 11


def main():
    stream = make_stream(SEED, 0)
    state = lookdown.sample_stationary_state(N, WINDOW[0], stream)
    log = lookdown.simulate_events(N, WINDOW, stream)
    path = treelength.build_path(state.copy(), log)

    print(f"ensemble of N={N} lines, window {WINDOW}, {log.n_events} events")
    print(f"initial length l(0) = {path.eval(np.array([0.0]))[0] :.6f}")
    print()
    print("  time     pair      jump      exit age  root fix")
    for ev_time, src, tgt, jump in zip(
        log.times, log.sources, log.targets, path.jumps()
    ):
        mark = "yes" if jump.root_corrected else ""
        print(
            f"  {ev_time:7.4f}  {src:>2d} -> {tgt:<2d}  "
            f"{-jump.magnitude:+9.4f}  {jump.exit_age:8.4f}  {mark}"
        )

    # Between events the length grows at slope exactly N: every one of the
    # N lines ages at unit speed.
    t_left = log.times[0]
    mid = 0.5 * (WINDOW[0] + t_left)
    v0, vm = path.eval(np.array([WINDOW[0], mid]))
    slope = (vm - v0) / (mid - WINDOW[0])
    print()
    print(f"drift slope before the first event: {slope:.12f} (exact N = {N})")

    total_jump = sum(j.magnitude for j in path.jumps())
    v_end = path.final_value
    drift = N * (WINDOW[1] - WINDOW[0])
    print(f"final length     {v_end:.6f}")
    print(f"identity check   l(0) + N*span - sum(jumps) "
          f"= {v0 + drift - total_jump:.6f}")

    # The same quantity, reconstructed independently from the final state
    # of a fresh replay of the identical event log (plus the drift from the
    # last event to the end of the window).
    replay = state.copy()
    for ev in log:
        replay.step(ev)
    tail = N * (WINDOW[1] - replay.now)
    print(f"replayed length  "
          f"{treelength.tree_length_of_state(replay) + tail:.6f}")


if __name__ == "__main__":
    main()
