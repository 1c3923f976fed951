use pyo3::ffi::c_str;
use pyo3::prelude::*;
use pysympower::pysympower as module;

fn run(code: &std::ffi::CStr) {
    pyo3::append_to_inittab!(module);
    Python::attach(|py| {
        if let Err(e) = py.run(code, None, None) {
            e.display(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn python_round_trip_and_fit() {
    run(c_str!(
        r#"
import math, random
import pysympower as sp
rng = random.Random(3)
data = [math.exp(rng.gauss(0.0, 0.7)) for _ in range(24 * 24)]
s = sp.Signal(data, [24, 24, 1], "image")
t, p = sp.sym_power(s)
assert p.kind == "sympower" and 0.1 <= p.beta <= 10.0
assert abs(sp.skewness(t)) < abs(sp.skewness(s))
back = p.invert(t)
assert max(abs(x - y) for x, y in zip(back.data, s.data)) < 1e-9
t, p = sp.apply(s, "gamma0.5")
assert max(abs(x - y) for x, y in zip(p.invert(t).data, s.data)) < 1e-9
assert sp.psnr(s, s) == 200.0
try:
    sp.Signal([1.0, 2.0], [3], "synthetic")
    raise AssertionError("shape accepted")
except ValueError:
    pass
r = sp.fit(s, "scale1", iterations=50, width=16, hidden_layers=2)
assert len(r["psnr"]) == len(r["iterations"]) and r["iterations"][-1] == 50
assert r["reconstruction"].shape == [24, 24, 1]
"#
    ));
}
