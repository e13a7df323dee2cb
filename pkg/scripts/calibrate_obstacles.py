"""Report the largest per-wall and per-floor loss that still closes the
reference indoor links, next to the defaults the scenario loader uses.

    python3 scripts/calibrate_obstacles.py
"""

from backscatter_sim.experiments import calibrate_obstacle_defaults
from backscatter_sim.scenario import DEFAULT_FLOOR_DB, DEFAULT_WALL_DB, load_preset


def main() -> None:
    cases = [
        ("fig5-throughwall", "wall", DEFAULT_WALL_DB, "8 walls, receiver 30 m from the carrier"),
        ("fig11-floors-868", "floor", DEFAULT_FLOOR_DB, "4 floors above the tag"),
    ]
    for preset, kind, default, what in cases:
        limit = calibrate_obstacle_defaults(load_preset(preset), kind)
        ok = limit is not None and default <= limit
        print(
            f"{preset} ({what}): max {kind} loss {limit:.2f} dB, "
            f"default {default:.1f} dB -> {'closes' if ok else 'does NOT close'}"
        )


if __name__ == "__main__":
    main()
