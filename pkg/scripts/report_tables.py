#!/usr/bin/env python3
"""Print the constraint-sweep tables for the shipped models.

One markdown table per model: Vanilla and head-fusion-heuristic baseline
rows, a P1 sweep over F_max in {1.1 .. 1.5, inf} and a P2 sweep over
P_max in {16 .. 256} kB.
"""

import io
import sys
from contextlib import redirect_stdout
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fuseplan import cli  # noqa: E402

MODELS = Path(__file__).resolve().parents[1] / "models"
P1_GRID = "1.1,1.2,1.3,1.4,1.5,inf"
P2_GRID = "16kB,32kB,64kB,128kB,256kB"


def main() -> int:
    for fname in sorted(MODELS.glob("*.json")):
        buf = io.StringIO()
        with redirect_stdout(buf):
            rc = cli.main(["sweep", str(fname), "--p1-grid", P1_GRID, "--p2-grid", P2_GRID])
        if rc != 0:
            print(f"sweep failed for {fname.name} (exit {rc})", file=sys.stderr)
            return rc
        print(f"## {fname.name}")
        print()
        print(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
