"""Driving the command-line interface on the bundled instance files.

Each instance is extended into a result file and then re-checked by the
verifier, which recomputes everything without trusting the construction.
"""

import json
import pathlib
import tempfile

from eppa import cli

here = pathlib.Path(__file__).parent / "instances"
with tempfile.TemporaryDirectory() as tmp:
    for inst in sorted(here.glob("*.json")):
        out = pathlib.Path(tmp) / inst.name
        code, report = cli.run(cli.build_parser().parse_args(["extend", str(inst), "--out", str(out)]))
        print(f"{inst.name}: extend exit {code}")
        code, report = cli.run(cli.build_parser().parse_args(["verify", str(inst), str(out)]))
        print(f"{inst.name}: verify exit {code}, {json.dumps(report['verification'])}")
