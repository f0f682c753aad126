use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn module_round_trip() {
    Python::initialize();
    Python::attach(|py| {
        let module = PyModule::new(py, "spohnci_py").unwrap();
        spohnci_py::register(&module).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("sp", &module).unwrap();
        py.run(
            c"
inv = sp.invariants(4)
assert (inv['degree'], inv['genus']) == (30, 23), inv
g = sp.Game.random(3, 154, 10)
assert g.players == 3
assert len(sp.nash(g)['points']) == 2
assert sp.degree_witness(g, 1)['degree'] == 8
try:
    sp.Game.random(1, 0, 5)
    raise AssertionError('accepted one player')
except sp.SpohnError:
    pass
",
            Some(&globals),
            None,
        )
        .unwrap();
    });
}
