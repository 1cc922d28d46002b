mod common;

use rattleback::model::{self, Params, State};
use rattleback::simulate::{self, IntegratorConfig};

fn flat() -> Params {
    Params::from_principal(0.5, 0.6, 0.8, 0.3, [2.0, 1.0, 0.5], 1.0, 1.0).unwrap()
}

fn unit(g: [f64; 3]) -> [f64; 3] {
    let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    g.map(|x| x / n)
}

fn regression_states() -> Vec<(Params, State)> {
    vec![
        (flat(), State::new([0.1, -0.2, 1.5], unit([0.05, 0.03, 1.0])).unwrap()),
        (flat(), State::new([0.0, 0.4, -0.8], unit([-0.2, 0.1, 0.97])).unwrap()),
        (common::worked_example(), State::new([0.05, 0.0, 4.0], unit([0.02, -0.01, 1.0])).unwrap()),
    ]
}

#[test]
fn integrals_drift_below_tolerance() {
    for (p, x) in regression_states() {
        let tr = simulate::integrate(&x, &p, 50.0, &IntegratorConfig::default()).unwrap();
        assert!(tr.h_drift < 1e-8 && tr.l_drift < 1e-8, "{} {}", tr.h_drift, tr.l_drift);
        let e: Vec<f64> = tr.states.iter().map(|s| model::energy(s, &p).unwrap()).collect();
        assert!(e.iter().all(|v| ((v - e[0]) / e[0]).abs() < 1e-8));
    }
}

#[test]
fn default_tolerances_track_a_tight_run() {
    let (p, x) = regression_states().remove(0);
    let tr = simulate::integrate(&x, &p, 10.0, &IntegratorConfig::default()).unwrap();
    let ref_tr =
        simulate::integrate(&x, &p, 10.0, &IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-13, ..Default::default() })
            .unwrap();
    let (a, b) = (tr.last().to_array(), ref_tr.last().to_array());
    for k in 0..6 {
        assert!((a[k] - b[k]).abs() < 1e-7, "{k}: {} vs {}", a[k], b[k]);
    }
}

#[test]
fn reversal_on_one_side_only() {
    let cfg = IntegratorConfig::default();
    let pos = simulate::spin_reversal_probe(&flat(), 0.3, 0.02, 150.0, &cfg).unwrap();
    let neg = simulate::spin_reversal_probe(&flat(), -0.3, 0.02, 150.0, &cfg).unwrap();
    assert!(pos.events.is_empty());
    assert_eq!(neg.events.len(), 1);
    assert!(pos.min_gamma3 > 0.99 && neg.min_gamma3 > 0.99);
}

#[test]
fn tall_body_topples() {
    let cfg = IntegratorConfig::default();
    for w0 in [0.3, -0.3] {
        let probe = simulate::spin_reversal_probe(&common::worked_example(), w0, 0.02, 150.0, &cfg).unwrap();
        assert!(probe.min_gamma3 < 0.0, "{probe:?}");
    }
}

#[test]
fn equatorial_spin_manifold() {
    let p = flat();
    let x = State::new([0.0, 0.0, 0.7], [0.3f64.sin(), 0.3f64.cos(), 0.0]).unwrap();
    assert!(simulate::manifold_residual(&p, &x, 50.0, &IntegratorConfig::default()).unwrap() <= 1e-9);
}
