"""Smoke test for the pycisolve extension.

Build and install first:

    pip install --no-build-isolation -e crates/python
"""

import math
import os
import tempfile

import pycisolve

CONFIG = """
grid.n = 32
scheme.kind = a
scheme.eps = 1e-3
law.id = kinetic
law.params = 1.0, 1.0
init.preset = taylor_green
init.amplitude = 0.1
time.t_final = 0.1
"""


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok: {msg}")


def main():
    cfg = pycisolve.Config(CONFIG)
    check(cfg.n == 32 and cfg.scheme == "a", "config parses")

    try:
        pycisolve.Config(CONFIG, ["grid.n = 7"])
    except ValueError as e:
        check("grid.n" in str(e), "bad override raises ValueError")
    else:
        raise SystemExit("FAIL: odd grid accepted")

    report = cfg.run()
    check(report.failure is None, "scheme A run succeeds")
    check(abs(report.final_time - 0.1) < 1e-12, "run reaches t_final")
    check(max(report.div_norm) < 1e-8, "scheme A stays solenoidal")

    state = cfg.initial_state()
    b = pycisolve.simulate(state, "b", 0.05, "kinetic", 0.1, params=[1.0, 1.0])
    check(b.failure is None and b.penalty_constant() > 0, "scheme B run and penalty constant")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.cifd")
        report.final_state.write_dump(path, report.final_time)
        back, t = pycisolve.State.read_dump(path)
        check(back.distance(report.final_state) == 0.0 and t == report.final_time, "dump round trip")
        csv = os.path.join(tmp, "diag.csv")
        report.write_csv(csv)
        rows = pycisolve.read_diagnostics_csv(csv)
        check(len(rows) == len(report), "diagnostics CSV round trip")

    n = 16
    xs = [2 * math.pi * i / n for i in range(n)]
    vx = [math.cos(x) for x in xs for _ in xs]
    vy = [0.0] * (n * n)
    px, py = pycisolve.leray_project(n, vx, vy)
    check(max(abs(a) for a in px + py) < 1e-12, "pure gradient projects to zero")

    sym = pycisolve.analyze_symbol(1.0, [0.3, -0.2], 2.0, [1.0, 0.5])
    check(sym["hyperbolic"] and sym["max_imag"] < 1e-12, "symbol is hyperbolic")

    print("smoke test passed")


if __name__ == "__main__":
    main()
