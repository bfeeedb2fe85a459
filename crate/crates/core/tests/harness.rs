use erkn::harness::{
    build_paper_system, longrun_series, run_convergence_with, run_longrun, EnergySeries,
    ExperimentConfig,
};
use erkn::integrator::{adjoint_roundtrip, check_symmetry, step, Builtin, StepWorkspace};
use erkn::phi::phi;
use erkn::{ErknError, ErknScheme, OscillatorySystem, State};
use rand::{Rng, SeedableRng};

fn random_state(rng: &mut impl Rng) -> State<f64> {
    let q = (0..5).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let p = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    State::new(q, p).unwrap()
}

#[test]
fn erkn3_modified_columns_equal_originals() {
    let mut cfg = ExperimentConfig::desk("ERKN3", "unused.csv");
    cfg.t_end = 100.0;
    let s = longrun_series(&cfg).unwrap().series;
    let pairs = [
        ("err_Hstar", "err_H"),
        ("err_Istar_I1+I3", "err_Imu_I1+I3"),
        ("err_Istar_I2", "err_Imu_I2"),
    ];
    for (a, b) in pairs {
        let (a, b) = (s.column(a).unwrap(), s.column(b).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14, "{x} vs {y}");
        }
    }
}

#[test]
fn first_row_is_zero_and_single_step_is_close() {
    let mut cfg = ExperimentConfig::desk("ERKN3", "unused.csv");
    cfg.t_end = 0.01;
    let s = longrun_series(&cfg).unwrap().series;
    assert_eq!(s.len(), 2);
    assert!(s.rows[0].iter().all(|v| *v == 0.0 && v.is_sign_positive()));
    assert!(s.column("err_H").unwrap()[1].abs() <= 0.1);

    let (sys, s0) = build_paper_system(70.0).unwrap();
    let s1 = step(
        &Builtin::Erkn3.scheme(),
        &sys,
        0.01,
        &s0,
        &mut StepWorkspace::new(),
    )
    .unwrap();
    assert!(s1.is_finite());
    let dh = sys.total_energy(&s1).unwrap() - sys.total_energy(&s0).unwrap();
    assert!(dh.abs() <= 0.1);
}

#[test]
fn roundtrip_on_benchmark_states() {
    let (sys, _) = build_paper_system(70.0).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let (erkn1, erkn3) = (Builtin::Erkn1.scheme(), Builtin::Erkn3.scheme());
    let mut generic = 0;
    for _ in 0..20 {
        let s = random_state(&mut rng);
        assert!(adjoint_roundtrip(&erkn3, &sys, 0.01, &s).unwrap() <= 1e-10);
        // the ERKN1 defect scales with the force 4 s^3; near s = 0 the step is a pure rotation
        let inner: f64 = [0.001, 1.0, 1.0, 1.0, 1.0]
            .iter()
            .zip(&s.q)
            .map(|(a, b)| a * b)
            .sum();
        if inner.abs() >= 0.2 {
            generic += 1;
            assert!(adjoint_roundtrip(&erkn1, &sys, 0.01, &s).unwrap() > 1e-6);
        }
    }
    assert!(generic >= 5);
}

#[test]
fn algebraic_and_operational_symmetry_agree() {
    let (sys, _) = build_paper_system(70.0).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let states: Vec<_> = (0..20).map(|_| random_state(&mut rng)).collect();
    for b in Builtin::ALL {
        let scheme = b.scheme();
        let algebraic = check_symmetry(&scheme).max_residual <= 1e-12;
        let operational = states
            .iter()
            .all(|s| adjoint_roundtrip(&scheme, &sys, 0.01, s).unwrap() <= 1e-9);
        assert_eq!(algebraic, operational, "{b}");
        assert_eq!(algebraic, b.expected_structure().0, "{b}");
    }
}

#[test]
fn broken_scheme_loses_order() {
    let broken = ErknScheme::new(
        "broken",
        0.5,
        |xi: f64| 1.0 + xi,
        |xi: f64| phi(2, xi).unwrap(),
    )
    .unwrap();
    let (sys, s0) = build_paper_system(10.0).unwrap();
    let r = run_convergence_with(&broken, &sys, &s0, &[0.02, 0.01, 0.005], 1.0).unwrap();
    assert!(r.slope.unwrap() < 1.5, "{r}");
}

#[test]
fn free_system_convergence_is_exact() {
    let (bench, s0) = build_paper_system(10.0).unwrap();
    let sys = OscillatorySystem::free(bench.epsilon(), bench.blocks().to_vec()).unwrap();
    for b in Builtin::ALL {
        let r = run_convergence_with(&b.scheme(), &sys, &s0, &[0.02, 0.01, 0.005], 1.0).unwrap();
        assert!(r.exact, "{r}");
        assert!(r.to_string().contains("exact"));
    }
}

#[test]
fn longrun_writes_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("erkn4.csv");
    let mut cfg = ExperimentConfig::desk("ERKN4", &path);
    cfg.t_end = 10.0;
    cfg.sample_every = 50;
    let out = run_longrun(&cfg).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "t,err_H,err_I,err_I1,err_I2,err_I3,err_Imu_I1+I3,err_Imu_I2,err_Hstar,err_Istar_I1+I3,err_Istar_I2\n"
    ));
    let back = EnergySeries::from_csv(&text).unwrap();
    assert_eq!(back, out.series);
    // steps 0, 50, ..., 1000
    assert_eq!(back.len(), 21);
    assert_eq!(back.times[20], 10.0);
}

#[test]
fn divergent_run_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blowup.csv");
    let mut cfg = ExperimentConfig::desk("ERKN3", &path);
    // a steep potential with large steps sends the slow coordinate off
    cfg.potential_coeffs = vec![10.0, 1.0, 1.0, 1.0, 1.0];
    cfg.h = 0.5;
    cfg.t_end = 500.0;
    cfg.sample_every = 1;
    let out = run_longrun(&cfg).unwrap();
    let Some(ErknError::Divergence { step }) = out.failure else {
        panic!("expected divergence, got {:?}", out.failure);
    };
    assert!(step >= 1);
    let back = EnergySeries::from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.len(), step);
}

#[test]
fn config_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "scheme_name = ERKN2\nepsilon_inv = 70\nh = 0.01\nt_end = 1\nsample_every = 10\n\
         lambda = 1, 1.4142135623730951, 2\noutput_path = out.csv\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_file(&cfg_path).unwrap();
    assert_eq!(cfg.n_steps().unwrap(), 100);
    assert_eq!(cfg.mu_list.len(), 2);
    assert!(matches!(
        ExperimentConfig::from_file(dir.path().join("missing.cfg")),
        Err(ErknError::Io(_))
    ));
}
