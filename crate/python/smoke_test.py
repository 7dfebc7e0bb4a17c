"""Smoke test for the kerrpair_py extension.

Build and run from the repository root:

    cargo build --release -p kerrpair-python --features extension-module
    cp target/release/libkerrpair_py.so python/kerrpair_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import kerrpair_py as kp


def main():
    assert "paper_fig2" in kp.presets()
    p = kp.SystemParams.from_preset("paper_fig2")
    assert p.j == 2.0 and math.isclose(p.gamma1_prime(), 1.0)
    print(p)

    hep = kp.hep_location(p.j, p.gamma1_prime(), p.gamma_2)
    assert math.isclose(hep, 8.9, rel_tol=1e-12)

    ev = kp.subspace_eigenvalues(p.replace(gamma_tip=3.0), 2)
    assert len(ev) == 3 and all(isinstance(z, complex) for z in ev)

    q = p.with_protocol("track_upper_branch")
    a = kp.analytic_observables(q)
    s = kp.steady_state_statistics(q, cutoff=4)
    assert abs(a["g2"] - 0.2175) < 1e-3, a["g2"]
    assert abs(s["n1"] / a["n1"] - 1) < 0.01
    assert math.isclose(sum(s["p_m"]), 1.0, rel_tol=1e-9)

    grid = [0.1 * k for k in range(121)]
    sw = kp.sweep_loss(p, grid)
    cp = sw["critical_points"]
    print("critical points:", {k: round(v, 4) for k, v in cp.items() if v is not None})
    assert abs(cp["cp_q_down"] - 1.775) < 0.01 and abs(cp["cp_q_up"] - 6.561) < 0.01

    spec = kp.excitation_spectrum(p, [-6 + 0.012 * k for k in range(1001)])
    assert len(spec["peaks"]) == 2

    lep = kp.lep_locate(p, 0.0, 20.0)
    assert abs(lep["gamma_tip"] - hep) < 1e-3

    try:
        p.replace(gamma_2=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative loss accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
