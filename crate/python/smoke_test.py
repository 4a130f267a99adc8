"""Smoke test for the rkf extension module."""

import math
import sys

import rkf


def main():
    m = rkf.SystemModel([[0.5]], [[1.0]], [[0.5]], [[1.0]])
    flags = m.validate()
    assert flags["detectable"] and flags["stabilizable"], flags

    s = rkf.solve_dare(m)
    root = (-0.25 + math.sqrt(2.0625)) / 2.0
    assert abs(s["sigma"][0][0] - root) <= 1e-10, s
    assert abs(s["gain"][0][0] - 0.5 * root / (1.0 + root)) <= 1e-10, s

    f = rkf.run_filter(m, [[1.0], [1.0]])
    assert abs(f["cum_loss"] - 1.5625) <= 1e-12, f
    assert abs(f["losses"][0] - 1.0) <= 1e-12, f

    k = rkf.bound_constants(m)
    assert abs(k["r_bar"] - (1.0 + root)) <= 1e-10, k
    c = rkf.certify(m, v_t=2.0, w_t=1.0, xbar0_normsq=1.0, l_t=0.0)
    assert c["b1_applicable"] and c["B3"] > 0.0, c

    big = rkf.random_stable_system(4, 2, 3)
    assert (big.n, big.p) == (4, 2)
    trace = rkf.convergence_trace(big, 30)
    assert trace[30] < trace[0]

    config = big.to_config_text() + (
        '\n[drift]\nregime = "sublinear"\nbeta = 0.5\nseed = 3\n\n[run]\nt_rounds = 100\n'
    )
    rows = rkf.run_experiment(config)
    assert len(rows) == 100
    assert all(r["B3"] >= r["L"] for r in rows)
    assert rows == rkf.run_experiment(config)

    try:
        rkf.run_experiment(config.replace("t_rounds = 100", "t_rounds = 0"))
    except ValueError as e:
        assert "run.t_rounds" in str(e)
    else:
        raise AssertionError("t_rounds = 0 accepted")

    passed, checks = rkf.selftest()
    assert passed, checks

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
