use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn module_runs_from_python() {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(kerrpair_py::kerrpair_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("kp", m).unwrap();
        py.run(
            c"
p = kp.SystemParams.from_preset('paper_fig2')
assert abs(kp.hep_location(p.j, p.gamma1_prime(), p.gamma_2) - 8.9) < 1e-12
q = p.with_protocol('track_upper_branch')
a = kp.analytic_observables(q)
assert abs(a['g2'] - 0.21746014670872624) < 1e-10
assert abs(a['populations'][(1, 0)] - a['n1']) / a['n1'] < 1e-3
s = kp.steady_state_statistics(q, cutoff=3)
assert abs(s['g2'] / a['g2'] - 1) < 0.02
ev = kp.subspace_eigenvalues(p, 1)
assert len(ev) == 2 and abs(ev[0].imag + 0.275) < 1e-12
try:
    kp.steady_state_statistics(q, cutoff=99)
    raise AssertionError('oversized cutoff accepted')
except (ValueError, RuntimeError):
    pass
",
            Some(&globals),
            None,
        )
        .unwrap();
    });
}
