"""Run every scenario script through the CLI and summarize the outcome."""

import argparse
import io
import sys
from pathlib import Path

from ghost.cli import RunConfig, run

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--report", choices=("text", "json"), default="text")
    args = p.parse_args()
    failures = 0
    for script in sorted(SCENARIOS.glob("*.gs")):
        out, err = io.StringIO(), io.StringIO()
        code = run(RunConfig(str(script), report=args.report, seed=args.seed), out, err)
        failures += code != 0
        print(f"== {script.name}: exit {code}")
        print(out.getvalue().rstrip())
        if err.getvalue():
            print(err.getvalue().rstrip())
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
