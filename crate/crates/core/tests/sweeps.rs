use squeeze_core::analysis::{default_tau_grid, sweep_persistence, BathConfig, Environment};
use squeeze_core::spectra::{LorentzianBath, Mode};
use squeeze_core::SystemParams;

fn config(label: &str, gamma_c: f64, lambda_c: f64) -> BathConfig {
    BathConfig {
        label: label.into(),
        environment: Environment::Structured,
        bath_a: LorentzianBath::new(Mode::A, 1e-3, 1e-2, 0.0).unwrap(),
        bath_c: LorentzianBath::new(Mode::C, gamma_c, lambda_c, 0.0).unwrap(),
    }
}

#[test]
fn persistence_sweep_shapes() {
    let configs = [
        config("matched", 1e-3, 1e-2),
        config("mismatched", 1.5e-3, 1.5e-2),
    ];
    let taus = default_tau_grid();
    let points = sweep_persistence(&SystemParams::default(), &configs, &taus, 1000.0, 0.01);
    let levels = |label: &str| -> Vec<f64> {
        points
            .iter()
            .filter(|p| p.label == label)
            .map(|p| p.outcome.as_ref().unwrap().s_db)
            .collect()
    };

    let matched = levels("matched");
    assert!(matched.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    let n = matched.len();
    assert!(
        (matched[n - 1] - matched[n - 2]).abs() < 1e-3,
        "no plateau: {matched:?}"
    );

    let mismatched = levels("mismatched");
    let best = mismatched
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    assert!(best > 0 && best < mismatched.len() - 1, "{mismatched:?}");
    assert!(matched[best] > mismatched[best]);
}
