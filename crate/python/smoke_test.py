"""Smoke test for the spsat_py extension module.

Build the module first:  cargo build -p spsat-py
Then run:                python3 python/smoke_test.py
"""

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libspsat_py.so", "spsat_py.so", "libspsat_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("spsat_py library not found; run `cargo build -p spsat-py` first")
    tmp = Path(tempfile.mkdtemp(prefix="spsat_py_"))
    shutil.copy(built, tmp / "spsat_py.so")
    sys.path.insert(0, str(tmp))
    import spsat_py

    return spsat_py


def main():
    sp = load_module()

    # Formula construction and DIMACS round trip.
    f = sp.Formula.from_clauses(3, [[1, -2], [2, 3], [-1, 3]])
    assert f.n_vars == 3 and f.n_clauses == 3 and len(f) == 3
    assert f.clauses() == [[1, -2], [2, 3], [-1, 3]]
    g = sp.Formula.from_dimacs(f.to_dimacs())
    assert g.clauses() == f.clauses()
    print("formula round trip ok")

    try:
        sp.Formula.from_clauses(2, [[1, 0]])
    except ValueError:
        pass
    else:
        raise AssertionError("literal code 0 must be rejected")
    print("bad literal rejected ok")

    # Deterministic generation.
    a = sp.gen_ksat(100, 3.0, seed=7)
    b = sp.gen_ksat(100, 3.0, seed=7)
    assert a.to_dimacs() == b.to_dimacs()
    assert a.n_clauses == 300
    print("gen_ksat deterministic ok")

    # Exhaustive enumeration against a hand-countable formula: x1 or x2
    # excludes one of four points.
    tiny = sp.Formula.from_clauses(2, [[1, 2]])
    e = sp.enumerate(tiny)
    assert e.count == 3 and not e.stopped_early
    assert sorted(e.solutions) == [[False, True], [True, False], [True, True]]
    assert e.marginals == [2.0 / 3.0, 2.0 / 3.0]
    print("enumerate ok")

    # Both solver modes on an easy instance, assignments verified here.
    inst = sp.gen_ksat(300, 3.5, seed=11)
    for alg in ("sid", "sis"):
        r = sp.solve(inst, alg=alg, t=5, seed=3)
        assert r.sat, f"{alg} failed: {r!r}"
        assert sp.evaluate(inst, r.assignment)
        assert r.rounds > 0 and r.wall_s >= 0.0
    print("solve sid/sis ok")

    try:
        sp.solve(inst, alg="bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown alg must be rejected")
    print("bad alg rejected ok")

    # Local search alone at low density.
    w = sp.walksat(inst, seed=5)
    assert w.found and sp.evaluate(inst, w.assignment)
    assert w.flips > 0 and w.tries_used >= 1
    print("walksat ok")

    # Streamlining adds clauses without touching the originals.
    out, rounds, warning = sp.streamline(inst, rounds=3, seed=9)
    assert out.n_vars == inst.n_vars
    assert out.n_clauses >= inst.n_clauses
    assert rounds <= 3
    assert out.clauses()[: inst.n_clauses] == inst.clauses()
    print(f"streamline ok (rounds={rounds}, warning={warning})")

    # XOR encoding agrees with the exact parity check on small systems.
    for seed in range(20):
        xf, solvable = sp.gen_xor2(10, 0.8, seed=seed)
        assert (sp.enumerate(xf).count > 0) == solvable
    print("gen_xor2 parity agreement ok")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
