"""``ghost SCRIPT [--trace=MODE] [--report=FMT] [--segments=DIR] [--seed=N]``

Exit codes: 0 all assertions passed, 1 an assertion failed, 2 runtime error,
3 lex/parse error or unreadable script.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import GhostError
from .runtime import Runtime, RuntimeConfig

TRACE_MODES = ("off", "interceptions", "all-sends")
REPORT_FORMATS = ("text", "json")
REPORT_KEYS = ("objects", "bytes_before", "bytes_after", "proxies", "interceptions",
               "swap_ins", "swap_outs")


@dataclass
class RunConfig:
    script: str
    trace: str = "off"
    report: str = "text"
    segments: str | None = None
    seed: int = 0


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: report[k] for k in REPORT_KEYS}, indent=2)
    return "\n".join(f"{k}: {report[k]}" for k in REPORT_KEYS)


def run(config: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    path = Path(config.script)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        print(f"ghost: cannot read {path}: {e}", file=err)
        return 3
    rt = Runtime(RuntimeConfig(trace_sends=config.trace == "all-sends",
                               segment_dir=config.segments, seed=config.seed))
    code = 0
    try:
        rt.run(text)
    except GhostError as e:
        print(f"{path}:{e}", file=err)
        code = e.exit_code
    if config.trace != "off":
        lines = list(rt.trace.lines(config.trace))
        Path(str(path) + ".trace").write_text("".join(line + "\n" for line in lines),
                                              encoding="utf-8")
    print(format_report(rt.report(), config.report), file=out)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghost", description="Run a proxy scenario script.")
    p.add_argument("script")
    p.add_argument("--trace", choices=TRACE_MODES, default="off")
    p.add_argument("--report", choices=REPORT_FORMATS, default="text")
    p.add_argument("--segments", default=None, help="directory for swapped-out graphs")
    p.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(RunConfig(args.script, args.trace, args.report, args.segments, args.seed))


if __name__ == "__main__":
    sys.exit(main())
