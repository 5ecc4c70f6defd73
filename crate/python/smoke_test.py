"""Smoke test for the hjsolve_py extension.

Build and run from the repository root:

    cargo build --release -p hjsolve-py --features extension-module
    cp target/release/libhjsolve_py.so python/hjsolve_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hjsolve_py as hj  # noqa: E402


def main():
    ids = [i for i, _ in hj.list_examples()]
    assert ids == ["ex1", "ex2", "ex3", "ex4", "ex5"], ids

    # ex2+ keeps quadratic data quadratic, so φ(0, t) = g(0) = -1/2
    prob = hj.Problem("ex2", dim=2, sign="+")
    assert prob.mode == "lax" and prob.dim == 2
    sol = hj.solve_point(prob, [0.0, 0.0], 0.3)
    assert sol.converged, sol
    assert abs(sol.value + 0.5) < 1e-3, sol.value
    assert json.loads(sol.to_json())["mode"] == "lax"

    cfg = prob.default_config()
    cfg.ds = 0.01
    cfg.trials = 2
    again = hj.SolveConfig.from_json(cfg.to_json())
    assert again.ds == 0.01 and again.trials == 2
    sol2 = hj.solve_point(prob, [0.5, -1.0], 0.3, again)
    assert math.isfinite(sol2.value) and len(sol2.v_star) == 2

    # grid solve and the Lax-Friedrichs reference agree for transport
    ex1 = hj.Problem("ex1")
    assert ex1.mode == "linear-direct"
    (field,) = hj.solve_grid(ex1, 21, [0.12])
    assert field.shape == (21, 21) and field.source == "char"
    assert field.to_csv().splitlines()[0] == "x1,x2,t,value,converged,certificate_ok,trials_used,source"
    assert len(field.levelset()) > 0
    (ref,) = hj.lf_solve(ex1, 0.12, [0.12], dx=0.02)
    report = hj.compare(field, ref)
    assert report.median < 1e-2, report.to_json()
    assert report.failed_nodes == 0

    # high-dimensional point solve
    big = hj.Problem("ex1", dim=1024)
    far = hj.solve_point(big, [0.1] * 1024, 0.5)
    assert far.wall_time < 1.0 and math.isfinite(far.value)

    try:
        hj.Problem("ex9")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown example accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
