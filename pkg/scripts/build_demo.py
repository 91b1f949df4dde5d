#!/usr/bin/env python3
"""Build a self-contained demo workspace for the CLI walkthrough.

Creates a pairs dataset, a replay fixture covering every prompt the full
pipeline issues (10 ablation conditions + confidence + rationale), a
fixture taxonomy, and a ready-to-run config. Everything replays offline.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from fixtures import build_replay_workspace  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("target", nargs="?", default="demo-workspace", type=Path)
    parser.add_argument("--pairs", type=int, default=50)
    args = parser.parse_args()

    workspace = build_replay_workspace(args.target.resolve(), n_pairs=args.pairs)
    print(f"demo workspace ready: {workspace.root}")
    print(f"  dataset : {workspace.pairs_path.name} ({args.pairs} pairs)")
    print(f"  fixture : {workspace.cache_path.name}")
    print(f"  config  : {workspace.config_path.name}")
    print()
    print("try:")
    print(f"  cpl ablate --config {workspace.config_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
