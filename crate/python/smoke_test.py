"""Smoke test for the gbdkit extension.

Imports an installed `gbdkit` if there is one, otherwise loads the shared
library from target/{release,debug} (build it with `cargo build -p gbd-kit-py`).
"""

import importlib.util
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import gbdkit

        return gbdkit
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libgbdkit.so"
        if lib.exists():
            break
    else:
        sys.exit("libgbdkit.so not found; run `cargo build -p gbd-kit-py` first")
    tmp = Path(tempfile.mkdtemp())
    dest = tmp / "gbdkit.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("gbdkit", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    g = load()
    assert "renewal_shift" in g.families()

    b = g.Diagram.family("tridiag_B")
    assert b.incidence(0, (-1, 1), (-1, 1)) == [[2, 1, 0], [1, 2, 1], [0, 1, 2]]
    # 0 -> 0 in two steps: 2*2 + 1*1 + 1*1
    assert b.count_paths(0, 0, 0, 2) == 6
    # exact big integers: row sums are 4, so 4^40 paths leave vertex 0
    total = sum(b.count_paths(0, 0, v, 40) for v in range(-40, 41))
    assert total == 4**40, total

    interleaved = b.relabel('{"kind": "interleave"}')
    assert interleaved.incidence(0, (0, 3), (0, 3)) == g.Diagram.family("interleaved_Bprime").incidence(0, (0, 3), (0, 3))

    r = g.Diagram.family("renewal_shift")
    label, witness = r.irreducible(5, 2)
    assert label == "yes", witness
    label, cert = g.Diagram.family("shifted_Bsecond").irreducible(3, 1)
    assert label == "no" and "TriangularSupport" in cert, cert
    assert r.classify(1, 12)[0] == "completely_irreducible"
    assert b.period(0) == 1
    assert g.Diagram.family("parity_1").period(0) == 2

    star = g.Diagram.family("star_odometer")
    assert star.orbit_visits("vertical:5", [5])[0] == "yes"
    assert star.orbit_visits("vertical:5", [2])[0] == "no"

    dot = r.to_dot(1, 1, 5)
    assert dot.startswith("digraph gbd {") and dot.count("->") == 9

    spec = '{"family": "banded", "offsets": {"-1": 1, "0": 2, "1": 1}}'
    assert g.Diagram.from_spec(spec).incidence(3, (-2, 2), (-2, 2)) == b.incidence(3, (-2, 2), (-2, 2))
    try:
        g.Diagram.family("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family accepted")

    report = g.acceptance_report(quick=True)
    assert [r[0] for r in report] == [1, 2, 3, 4, 5]
    assert all(r[1] for r in report), report
    print("gbdkit smoke test ok:", len(report), "criteria passed")


if __name__ == "__main__":
    main()
