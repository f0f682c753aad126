"""Build the extension module and exercise it from Python.

Usage: python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "crates" / "core" / "tests" / "data"


def build_module(dest: pathlib.Path) -> None:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "spohnci-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libspohnci_py.so"
    shutil.copy(lib, dest / "spohnci_py.so")


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        build_module(tmp)
        sys.path.insert(0, str(tmp))
        import spohnci_py as sp

        inv = sp.invariants(3)
        assert (inv["degree"], inv["genus"]) == (8, 3), inv
        table = sp.invariants_table(9)
        assert (table[-1]["genus"], table[-1]["degree"]) == (1494879, 478670), table[-1]

        game = sp.Game.from_json((DATA / "paper_game.json").read_text())
        assert game.players == 3
        assert game.payoff(1, "211") == "6"
        assert game.ci_polynomials()[0].replace(" ", "") != ""

        witness = sp.degree_witness(game, 1)
        assert witness["degree"] == 8, witness

        count = sp.nash(game)["count"]
        assert (count["complex"], count["real"], count["totallyMixed"]) == (2, 0, 0), count
        two = sp.nash(sp.Game.random(3, 154, 10))
        assert len(two["points"]) == 2
        assert all(p["flags"]["inSimplex"] for p in two["points"])

        sample = sp.sample(game, ["1/2", "1", "2"])
        assert sample["points"], sample

        target = (DATA / "circle.json").read_text()
        encoded, cert = sp.encode(target)
        assert encoded.players == 7
        report = sp.verify(target, encoded, json.dumps(cert), [["3/5", "4/5"], ["0", "1"]])
        assert report["passed"], report

        assert "saturate" in sp.export_m2(game)
        code, out = sp.run(["table", "--max-n", "4", "--format", "csv"])
        assert code == 0 and out.startswith("n,genus,degree"), out
        code, _ = sp.run(["table", "--nope"])
        assert code == 2

        try:
            sp.Game.from_json('{"players": 3, "payoffs": []}')
        except sp.SpohnError as e:
            assert "InvalidGame" in str(e) or "Format" in str(e), e
        else:
            raise AssertionError("malformed game accepted")

    print("python smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
