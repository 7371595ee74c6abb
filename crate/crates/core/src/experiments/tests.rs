use super::*;

fn free_scan(l: usize, mu0: Vec<f64>, n: usize) -> Protocol {
    Protocol::new(ProtocolKind::SteadyScan, ModelSpec::free(l, 1.0, 0.0, 1.0)).with_sweep("mu0", mu0).with_samples(n, 11)
}

#[test]
fn seeds_are_stable_and_distinct() {
    assert_eq!(sample_seed(7, 2, 3), sample_seed(7, 2, 3));
    let mut seen: Vec<u64> = (0..4).flat_map(|g| (0..50).map(move |k| sample_seed(7, g, k))).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 200);
    assert_ne!(sample_seed(7, 0, 0), sample_seed(8, 0, 0));
}

#[test]
fn range_syntax() {
    let v = parse_range("0:4:0.25").unwrap();
    assert_eq!(v.len(), 17);
    assert_eq!((v[0], v[16]), (0.0, 4.0));
    assert_eq!(parse_range("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
    assert_eq!(parse_range("0:1:0.34").unwrap().len(), 4);
    assert_eq!(parse_range("3:-3:-3").unwrap(), vec![3.0, 0.0, -3.0]);
    assert_eq!(parse_range("2").unwrap(), vec![2.0]);
    assert_eq!(parse_range("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
    for bad in ["1:0:0.1", "0:1:0", "a:b:c", "1:2", "x", "0:1:nan"] {
        assert!(parse_range(bad).is_err(), "{bad}");
    }
}

#[test]
fn protocol_validation() {
    let mut p = free_scan(8, vec![0.0], 4);
    assert!(p.validate().is_ok());
    p.n_samples = 0;
    assert!(p.validate().is_err());
    let p = free_scan(8, vec![], 4);
    assert!(p.validate().is_err());
    let p = Protocol::new(ProtocolKind::SteadyScan, ModelSpec::free(8, 1.0, 0.0, 1.0)).with_sweep("mu", vec![1.0]);
    assert!(matches!(p.validate(), Err(Error::Config(_))));
    let p = free_scan(8, vec![0.0], 4).with_sizes(vec![]);
    assert!(p.validate().is_err());
}

#[test]
fn engine_and_cap_errors() {
    let mut p = Protocol::new(ProtocolKind::SteadyScan, ModelSpec::interacting(8, 1.0, 0.0, 2.0, 1.0)).with_samples(2, 0);
    p.engine = Engine::Gaussian;
    assert!(matches!(run_steady_scan(&p), Err(Error::UnsupportedModel(_))));
    p.engine = Engine::Auto;
    p.dim_cap = 64;
    assert!(matches!(run_steady_scan(&p), Err(Error::CapExceeded { .. })));
    let mut q = free_scan(8, vec![0.0], 2);
    q.nu = 1.5;
    assert!(matches!(run_steady_scan(&q), Err(Error::Config(_))));
}

#[test]
fn grid_order_and_csv_header() {
    let p = free_scan(8, parse_range("0:4:0.25").unwrap(), 3).with_sizes(vec![6, 8]);
    let r = run_steady_scan(&p).unwrap();
    assert_eq!(r.rows.len(), 34);
    assert_eq!((r.rows[0].l, r.rows[0].params[0]), (6, 0.0));
    assert_eq!((r.rows[17].l, r.rows[17].params[0]), (8, 0.0));
    let csv = r.to_csv_string().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "mu0,L,mean_var_density,mean_var,mean_dN,stderr,n_samples,seed,N0");
    assert_eq!(lines.count(), 34);
    for row in &r.rows {
        assert!((row.mean_var_density * row.l as f64 - row.mean_var).abs() < 1e-12);
        assert_eq!(row.n0, (row.l / 2) as f64);
    }
}

#[test]
fn reruns_are_bit_identical_across_thread_counts() {
    let p = free_scan(12, vec![0.0, 2.5], 16);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_steady_scan(&p).unwrap());
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_steady_scan(&p).unwrap());
    assert_eq!(one, three);
    assert_eq!(one.to_csv_string().unwrap(), run_steady_scan(&p).unwrap().to_csv_string().unwrap());
    assert_eq!(one.rows[0].var_samples, three.rows[0].var_samples);
}

#[test]
fn zero_pairing_gives_zero_variance_everywhere() {
    let models = [
        ModelSpec::free(8, 1.0, 0.0, 0.0),
        ModelSpec::interacting(8, 1.0, 0.5, 2.0, 0.0),
        ModelSpec::xxz(8, 1.0, 1.0, 0.0, 0.0),
        ModelSpec::spinful(6, 1.0, 0.0, 0.0),
        ModelSpec::transport(8, 1.0, 1.0, -2.0, 0.0, 0.0),
    ];
    for spec in models {
        for kind in [ProtocolKind::SteadyScan, ProtocolKind::FloquetScan] {
            for engine in [Engine::Auto, Engine::Ed] {
                let mut p = Protocol::new(kind, spec.clone()).with_samples(5, 1);
                p.engine = engine;
                let r = run(&p).unwrap();
                let RunOutput::Scan(r) = r else { panic!() };
                assert!(r.rows[0].var_samples.iter().all(|&v| v < 1e-12), "{:?} {kind:?} {engine:?}", spec.kind);
            }
        }
    }
}

#[test]
fn gaussian_and_ed_engines_agree_per_sample() {
    let cases = [
        (ProtocolKind::SteadyScan, ModelSpec::free(8, 1.0, 0.7, 1.0)),
        (ProtocolKind::FloquetScan, ModelSpec::free(8, 1.0, 3.0, 1.0)),
        (ProtocolKind::TransportScan, ModelSpec::transport(8, 1.0, 1.0, -2.0, 0.0, 1.0)),
        (ProtocolKind::FloquetScan, ModelSpec::spinful(4, 1.0, 1.0, 1.0)),
    ];
    for (kind, spec) in cases {
        let mut p = Protocol::new(kind, spec.clone()).with_samples(10, 5);
        p.engine = Engine::Gaussian;
        let RunOutput::Scan(g) = run(&p).unwrap() else { panic!() };
        p.engine = Engine::Ed;
        let RunOutput::Scan(e) = run(&p).unwrap() else { panic!() };
        let (g, e) = (&g.rows[0], &e.rows[0]);
        for k in 0..10 {
            assert!((g.var_samples[k] - e.var_samples[k]).abs() < 1e-8, "{kind:?} {:?}", spec.kind);
            assert!((g.dn_samples[k] - e.dn_samples[k]).abs() < 1e-8);
        }
        assert!(g.mean_var > 1e-3);
    }
}

#[test]
fn standard_error_shrinks_with_samples() {
    let se = |n| run_steady_scan(&free_scan(24, vec![1.0], n)).unwrap().rows[0].stderr;
    let ratio = se(1600) / se(400);
    assert!((ratio - 0.5).abs() < 0.15, "ratio {ratio}");
    assert_eq!(run_steady_scan(&free_scan(8, vec![1.0], 1)).unwrap().rows[0].stderr, 0.0);
}

#[test]
fn floquet_zero_periods_and_spin_conservation() {
    let mut p = Protocol::new(ProtocolKind::FloquetScan, ModelSpec::free(10, 1.0, 0.0, 1.0)).with_samples(4, 2);
    p.time = Some(0.0);
    assert!(run_floquet_scan(&p).unwrap().rows[0].var_samples.iter().all(|&v| v == 0.0));

    let p = Protocol::new(ProtocolKind::FloquetScan, ModelSpec::spinful(10, 1.0, 4.0, 1.0)).with_samples(6, 2);
    let row = &run_floquet_scan(&p).unwrap().rows[0];
    assert!(row.sz_drift.unwrap() < SZ_DRIFT_LIMIT);
    assert!(row.mean_var_density > 0.01);
    assert_eq!(row.n0, 10.0);
}

#[test]
fn transport_reports_window_and_right_half_charge() {
    let spec = ModelSpec::transport(16, 1.0, 1.0, -2.0, 0.0, 1.0);
    assert_eq!(frozen_window(&spec), (-6.0, 2.0));
    let mut p = Protocol::new(ProtocolKind::TransportScan, spec).with_sweep("mur", vec![0.0]).with_samples(4, 1);
    p.nu_r = 0.25;
    let r = run_transport_scan(&p).unwrap();
    assert_eq!(r.rows[0].n0, 2.0);
    assert_eq!(r.rows[0].frozen_window, Some((-6.0, 2.0)));
    assert!(r.to_csv_string().unwrap().starts_with("mur,L,mean_var_density,mean_var,mean_dN,stderr,n_samples,seed,N0,frozen_below,frozen_above\n"));
    let wrong = Protocol::new(ProtocolKind::TransportScan, ModelSpec::free(8, 1.0, 0.0, 1.0));
    assert!(run_transport_scan(&wrong).is_err());
}

#[test]
fn quench_conserves_energy_in_both_segments() {
    for (mu0, nu) in [(-2.2, 0.5), (-0.96, 0.25)] {
        let mut p = Protocol::new(ProtocolKind::QuenchEnergy, ModelSpec::free(60, 1.0, mu0, 1.0)).with_samples(1, 4);
        p.nu = nu;
        p.time_steps = 120;
        let q = run_quench_energy(&p).unwrap();
        assert_eq!(q.rows.len(), 121);
        assert_eq!(q.rows[60].t, 60.0);
        assert!(!q.rows[60].boundary_on && q.rows[61].boundary_on);
        let e0 = q.rows[0].energy;
        assert!(q.rows.iter().all(|r| (r.energy - e0).abs() < 1e-8));
        assert!(q.rows[..=60].iter().all(|r| (r.n - q.n0).abs() < 1e-9));
        let shift = (q.rows[120].n - q.n0).abs();
        if mu0 < -2.0 {
            assert!(shift < 1.0, "gapped shift {shift}");
        } else {
            assert!(shift > 0.05 * 60.0, "gapless shift {shift}");
        }
    }
    let p = free_scan(8, vec![0.0, 1.0], 1);
    assert!(run_quench_energy(&p).is_err());
}

#[test]
fn phase_diagram_labels_known_points() {
    let p = Protocol::new(ProtocolKind::PhaseDiagram2d, ModelSpec::interacting(10, 1.0, 0.0, 2.0, 1.0))
        .with_sweep("mu0", vec![2.0, 8.0])
        .with_sweep("U", vec![2.0])
        .with_sizes(vec![8, 10])
        .with_samples(30, 1);
    let d = run_phase_diagram(&p).unwrap();
    assert_eq!(d.cell(2.0, 2.0).unwrap().label, PhaseLabel::Fluctuating);
    assert_eq!(d.cell(8.0, 2.0).unwrap().label, PhaseLabel::Frozen);
    assert_eq!(d.cells.len(), 2);
    assert!(d.cells.iter().all(|c| c.densities.len() == 2 && c.growth.is_some()));
    let mut json = Vec::new();
    d.write_json(&mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["cells"][1]["label"], "frozen");
    assert_eq!(v["l_max"], 10);

    let one = Protocol::new(ProtocolKind::PhaseDiagram2d, ModelSpec::free(8, 1.0, 0.0, 1.0)).with_sweep("mu0", vec![0.0]);
    assert!(run_phase_diagram(&one).is_err());
}

#[test]
fn criterion_rows() {
    let p = Protocol::new(ProtocolKind::CriterionScan, ModelSpec::interacting(8, 1.0, 0.0, 2.0, 1.0)).with_sweep("mu0", vec![2.0, 8.0]);
    let mut p = p.with_samples(1, 3);
    p.max_pairs = 200;
    let c = criterion_scan(&p).unwrap();
    assert_eq!(c.rows.len(), 2);
    assert!(c.rows.iter().all(|r| r.n_pairs <= 200 && r.n_pairs <= r.n_qualifying && r.energy_tol == 0.1));
    assert!(c.rows[0].mean_element > c.rows[1].mean_element);
    let mut out = Vec::new();
    c.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("mu0,L,mean_element,n_pairs,n_qualifying,energy_tol,seed\n"));
}
