//! Drives the module through an embedded interpreter.

use pyo3::prelude::*;
use pyo3::types::PyDict;

use pyhopf::pyhopf;

fn run(code: &str) {
    Python::attach(|py| {
        let globals = PyDict::new(py);
        let c = std::ffi::CString::new(code).unwrap();
        py.run(&c, Some(&globals), None).unwrap_or_else(|e| panic!("{e}\n{code}"));
    });
}

fn setup() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        pyo3::append_to_inittab!(pyhopf);
        Python::initialize();
    });
}

#[test]
fn moduli_and_tensors() {
    setup();
    run(r#"
import pyhopf
m = pyhopf.Moduli(2.0, 4.0)
assert abs(m.k1 + m.k2 - 1.0) < 1e-15
assert abs(pyhopf.solve_phi(pyhopf.Moduli.round(), 3.0, 4.0) - 25.0) < 1e-12
t = pyhopf.tensors(m, 0.5 + 0.5j, 1.0)
h = t["hat"]
det = (h[0][0] * h[1][1] - h[0][1] * h[1][0]).real
assert abs(det * t["phi"] ** 2 * t["z"] ** 3 - 1.0) < 1e-9
try:
    pyhopf.Moduli(3.0, 2.0)
    raise AssertionError("accepted |alpha| > |beta|")
except ValueError:
    pass
"#);
}

#[test]
fn verify_and_flow() {
    setup();
    run(r#"
import pyhopf
reports = pyhopf.verify_suite(pyhopf.Moduli.round(), samples=50, fd_samples=5)
assert all(r["ok"] for r in reports)
assert any(not r["expected_pass"] for r in reports)
res = pyhopf.run_flow(pyhopf.Moduli.round(), n_u=8, n_sigma=8, t_max=0.1, monitor_cadence=0.05)
assert [round(r["t"], 12) for r in res.records] == [0.0, 0.05, 0.1]
assert len(res.phi) == 64
assert max(abs(p - pyhopf.exact_round_potential(0.1)) for p in res.phi) < 1e-12
"#);
}
