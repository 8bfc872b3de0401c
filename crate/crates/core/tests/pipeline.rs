use std::collections::BTreeMap;

use fsl::compile::{compile_function, data_register, measured_data_distribution};
use fsl::funcs::{builtin, sample, FunctionDef};
use fsl::sim::{classical_fidelity, sample as sample_shots};
use fsl::{Complex64, FanOut, FslError, FslPlan, GridFunction, Loader, NonPeriodic, Simulator, Statevector};

fn grid_state(g: &GridFunction) -> Statevector {
    Statevector::from_amplitudes(g.samples().to_vec()).unwrap()
}

fn def(name: &str) -> FunctionDef {
    builtin(name, &BTreeMap::new()).unwrap()
}

#[test]
fn reported_infidelity_matches_simulation() {
    let sim = Simulator::new(16);
    for (name, n, m) in [("xpowx", 8, 3), ("lorentzian", 7, 2), ("spiky", 6, 4), ("gaussian2d", 5, 2)] {
        let f = def(name);
        let g = sample(&f, n).unwrap();
        for loader in [Loader::Ucr, Loader::Schmidt] {
            let plan = FslPlan::new(f.dims, n, m).with_loader(loader);
            let (c, report) = compile_function(&g, &plan).unwrap();
            let out = sim.run_from_zero(&c).unwrap();
            let infid = 1.0 - out.fidelity(&grid_state(&g)).unwrap();
            assert!((infid - report.exact_infidelity).abs() < 1e-10, "{name}: {infid} vs {}", report.exact_infidelity);
            if let Some(bound) = report.analytic_bound {
                assert!(report.exact_infidelity <= bound);
            }
        }
    }
}

#[test]
fn filtered_infidelity_matches_simulation() {
    let g = sample(&def("piecewise"), 8).unwrap();
    let mut plan = FslPlan::new(1, 8, 4);
    let (_, raw) = compile_function(&g, &plan).unwrap();
    plan.filter = Some(1.0);
    let (c, report) = compile_function(&g, &plan).unwrap();
    let out = Simulator::new(8).run_from_zero(&c).unwrap();
    let infid = 1.0 - out.fidelity(&grid_state(&g)).unwrap();
    assert!((infid - report.exact_infidelity).abs() < 1e-10);
    // Damping the window only moves the state further from the samples.
    assert!(report.exact_infidelity >= raw.exact_infidelity);
}

#[test]
fn non_periodic_variants() {
    let f = def("tanh");
    let n = 6;
    let g = sample(&f, n).unwrap();
    let sim = Simulator::new(12);
    let target: Vec<f64> = g.samples().iter().map(|s| s.norm_sqr()).collect();

    let plan = FslPlan::new(1, n, 3);
    let (c, report) = compile_function(&g, &FslPlan { nonperiodic: Some(NonPeriodic::Disentangle), ..plan.clone() }).unwrap();
    assert_eq!(c.num_qubits(), n + 1);
    let out = sim.run_from_zero(&c).unwrap();
    let (p0, data) = data_register(&out).unwrap();
    assert!(p0 > 1.0 - 1e-10);
    let infid = 1.0 - data.fidelity(&grid_state(&g)).unwrap();
    assert!((infid - report.exact_infidelity).abs() < 1e-10);

    let (c, report) = compile_function(&g, &FslPlan { nonperiodic: Some(NonPeriodic::Measure), ..plan }).unwrap();
    assert!(report.post_processing.is_some());
    let dist = measured_data_distribution(&sim.run_from_zero(&c).unwrap());
    assert!(classical_fidelity(&dist, &target).unwrap() > 1.0 - 1e-6);
}

#[test]
fn fan_out_modes_agree() {
    let g = sample(&def("qho"), 9).unwrap();
    let sim = Simulator::new(12);
    let mut plan = FslPlan::new(1, 9, 2);
    let (tree, r1) = compile_function(&g, &plan).unwrap();
    plan.fan_out = FanOut::Sequential;
    let (seq, r2) = compile_function(&g, &plan).unwrap();
    assert_eq!((r1.depth_tree, r1.depth_sequential), (r2.depth_tree, r2.depth_sequential));
    assert!(r1.depth < r2.depth);
    let a = sim.run_from_zero(&tree).unwrap();
    let b = sim.run_from_zero(&seq).unwrap();
    assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-12);
}

#[test]
fn sqrt_mode_histogram_is_reproducible() {
    let g = sample(&def("bimodal_gaussian").with_sqrt_mode(true), 5).unwrap();
    let plan = FslPlan::new(1, 5, 2).with_loader(Loader::Schmidt);
    let (c, _) = compile_function(&g, &plan).unwrap();
    let out = Simulator::new(8).run_from_zero(&c).unwrap();
    let h1 = sample_shots(&out, 5000, 7).unwrap();
    let h2 = sample_shots(&out, 5000, 7).unwrap();
    assert_eq!(h1, h2);
    let target: Vec<f64> = g.samples().iter().map(|s| s.norm_sqr()).collect();
    assert!(classical_fidelity(&h1.distribution(32), &target).unwrap() >= 0.99);
}

#[test]
fn plan_errors() {
    let g = sample(&def("lorentzian"), 6).unwrap();
    let mut plan = FslPlan::new(1, 6, 6);
    assert!(matches!(compile_function(&g, &plan), Err(FslError::InvalidPlan(_))));
    plan.m = 2;
    plan.max_qubits = 5;
    assert!(matches!(compile_function(&g, &plan), Err(FslError::CapacityExceeded { requested: 6, capacity: 5 })));
    let wrong = FslPlan::new(1, 7, 2);
    assert!(matches!(compile_function(&g, &wrong), Err(FslError::DimensionMismatch { .. })));
    let raw = GridFunction::from_raw(1, 2, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
    assert!(matches!(compile_function(&raw, &FslPlan::new(1, 2, 1)), Err(FslError::NonUnitNorm(_))));
}
