"""Smoke test for the vpprod_py extension.

    pip install -e crates/vpprod-py --no-build-isolation
    python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys
import tempfile

import vpprod_py as vp

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIX = ROOT / "crates" / "vpprod" / "fixtures"
DIV = (FIX / "div.rp").read_text()
MONO = (FIX / "monotonicity.prop").read_text()


def fake_solver(d, answer):
    p = pathlib.Path(d) / f"solver-{answer}"
    p.write_text(f"#!/bin/sh\necho {answer}\n")
    p.chmod(0o755)
    return f"fake={p}"


def main():
    prop = vp.HyperProperty(MONO)
    assert prop.k == 2, prop
    assert vp.HyperProperty(prop.to_text()).post == prop.post

    try:
        vp.HyperProperty("post: (<= q_1 q_2)")
    except vp.VpprodError as e:
        assert "property error" in str(e)
    else:
        raise AssertionError("missing copies accepted")

    lockstep = vp.enumerate(DIV, copies=2, max_len=8)
    shuffle = vp.enumerate(DIV, copies=2, max_len=8, shuffle=True)
    assert lockstep and set(map(tuple, lockstep)) <= set(map(tuple, shuffle))
    for mode in ("aut", "vpg", "generic"):
        same = vp.enumerate(DIV, copies=2, max_len=8, mode=mode)
        assert sorted(same) == sorted(lockstep), mode

    assert vp.dump_product(DIV, copies=2).startswith("vpg comps [1, 2]")
    assert vp.dump_product(DIV, copies=2, mode="aut").startswith("vpa comps [1, 2]")
    smt = vp.encode(DIV, prop)
    assert smt.count("(assert") > 0 and "(check-sat)" in smt
    assert vp.encode(DIV, MONO, mode="baseline:seq") != smt

    with tempfile.TemporaryDirectory() as d:
        for answer, verdict in (("sat", "verified"), ("unsat", "refuted")):
            r = vp.run(DIV, prop, solvers=[fake_solver(d, answer)], timeout=5)
            assert r["verdict"] == verdict, r
        r = vp.run(DIV, prop, mode="aut", solvers=[], emit_dir=str(pathlib.Path(d) / "out"))
        assert r["verdict"] == "unknown" and r["solver"] is None
        assert (pathlib.Path(d) / "out" / "problem.smt2").is_file()
        if shutil.which("z3"):
            r = vp.run(DIV, prop, timeout=60)
            assert r["verdict"] == "verified", r

    deps = "dep q := q + 1\ndep q := 0\n"
    ind = vp.check_independence(DIV, deps)
    assert ind["sound"] and ind["direction"] == "head", ind
    assert not ind["components"][0]["tail_independent"]

    try:
        vp.run(DIV, prop, reduction="(1,1)-lockstep(P1,", solvers=[])
    except vp.VpprodError as e:
        assert "reduction error" in str(e)
    else:
        raise AssertionError("bad reduction accepted")

    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
