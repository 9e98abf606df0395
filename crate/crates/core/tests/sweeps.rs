use colsync::analysis::Method;
use colsync::export::sweep_csv;
use colsync::presets;
use colsync::*;

fn coherence_spec() -> SweepSpec {
    SweepSpec {
        base: presets::two_atom(1.0, 1.0, 0.0, 0.0).unwrap(),
        axis1: SweepAxis::linspace(ParamPath::Omega(1), 1.0, 1.14, 3).unwrap(),
        axis2: Some(SweepAxis::linspace(ParamPath::CouplingF(0, 1), 0.0, 0.1, 3).unwrap()),
        analysis: AnalysisConfig::default().with_method(Method::Spectral),
        reducer: Reducer::MeanL1Coherence,
    }
}

#[test]
fn independent_seeds_agree_within_three_standard_errors() {
    let spec = coherence_spec();
    let a = run_coherence_map(&spec, &EnsembleSpec { samples: 2000, seed: 1 }).unwrap();
    let b = run_coherence_map(&spec, &EnsembleSpec { samples: 2000, seed: 2 }).unwrap();
    let (sa, sb) = (a.std_errors.unwrap(), b.std_errors.unwrap());
    for k in 0..a.values.len() {
        let (ma, mb) = (a.values[k].unwrap(), b.values[k].unwrap());
        let se = (sa[k].unwrap().powi(2) + sb[k].unwrap().powi(2)).sqrt();
        assert!((ma - mb).abs() <= 3.0 * se, "cell {k}: {ma} vs {mb} (se {se})");
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let spec = coherence_spec();
    let e = EnsembleSpec { samples: 200, seed: 77 };
    let a = sweep_csv(&run_coherence_map(&spec, &e).unwrap());
    let b = sweep_csv(&run_coherence_map(&spec, &e).unwrap());
    assert_eq!(a, b);

    let pearson = SweepSpec {
        reducer: Reducer::FinalPearson { pair: (0, 1) },
        analysis: AnalysisConfig::default()
            .with_method(Method::Spectral)
            .with_final_time(60.0),
        ..spec
    };
    assert_eq!(
        sweep_csv(&run_sweep(&pearson).unwrap()),
        sweep_csv(&run_sweep(&pearson).unwrap())
    );
}

#[test]
fn thermal_corner_map_orders_as_expected() {
    // anti-sync needs small distance and low temperature
    let spec = SweepSpec {
        base: presets::two_atom(1.0, 1.0, 0.0, 0.0).unwrap(),
        axis1: SweepAxis::new(ParamPath::Nbar, vec![0.0, 1.0]).unwrap(),
        axis2: Some(SweepAxis::new(ParamPath::CouplingA(0, 1), vec![0.2, 1.0]).unwrap()),
        analysis: AnalysisConfig::default()
            .with_method(Method::Spectral)
            .with_final_time(150.0),
        reducer: Reducer::FinalPearson { pair: (0, 1) },
    };
    let res = run_sweep(&spec).unwrap();
    assert!(res.get(0, 1).unwrap() <= -0.95);
    assert!(res.get(1, 0).unwrap() >= -0.5);
    assert_eq!(res.verdicts[1], Some(SyncKind::AntiSynchronized));
}
