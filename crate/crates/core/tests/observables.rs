use sso_core::cli_io::commands::grid_for;
use sso_core::cli_io::config::{Resolution, SolverSettings};
use sso_core::cli_io::solve_spec;
use sso_core::observables::moments;
use sso_core::{node_count, PotentialSpec};

fn ground(alpha: f64, resolution: Resolution) -> (f64, f64) {
    let settings = SolverSettings {
        resolution,
        ..SolverSettings::default()
    };
    let sol = solve_spec(&PotentialSpec::sep_modified(alpha), &settings, 1).unwrap();
    let r = moments(&sol.states[0], &sol.grid, 2).unwrap();
    (r.mu, r.central_moments[2])
}

/// The converged deep-well variance, checked by halving the grid spacing.
#[test]
fn deep_well_variance_is_grid_converged() {
    let spec = PotentialSpec::sep_modified(1e4);
    let h = grid_for(&spec, &SolverSettings::default(), 1).unwrap().h;
    let (mu, m2) = ground(1e4, Resolution::Spacing(h));
    let (mu_fine, m2_fine) = ground(1e4, Resolution::Spacing(h / 2.0));
    assert!((m2 - m2_fine).abs() <= 1e-6 * m2, "{m2} vs {m2_fine}");
    assert!((mu - mu_fine).abs() <= 1e-6 * mu);
    assert!((mu - 0.005).abs() < 5e-4, "mu = {mu}");
    // standard deviation about 0.06
    assert!((m2 - 0.0036).abs() < 1e-4, "m2 = {m2}");
}

#[test]
fn variance_grows_as_amplitude_drops() {
    let m2: Vec<f64> = [1e4, 1e3, 100.0, 10.0, 1.0]
        .iter()
        .map(|&a| ground(a, Resolution::Auto).1)
        .collect();
    assert!(m2.windows(2).all(|w| w[1] > w[0]), "{m2:?}");
    assert!((m2[1] - 0.011).abs() < 1e-3, "m2(1e3) = {}", m2[1]);
}

fn slope(ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ys.iter().enumerate().map(|(i, y)| (i as f64 - xm) * (y - ym)).sum();
    let sxx: f64 = (0..ys.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

#[test]
fn excited_state_statistics_in_the_deep_well() {
    let spec = PotentialSpec::sep_modified(1e4);
    let sol = solve_spec(&spec, &SolverSettings::default(), 48).unwrap();
    let stats: Vec<(f64, f64)> = sol
        .states
        .iter()
        .map(|psi| {
            let r = moments(psi, &sol.grid, 2).unwrap();
            (r.mu, r.central_moments[2])
        })
        .collect();
    let mu: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let m2: Vec<f64> = stats.iter().map(|s| s.1).collect();

    let (b, r2) = slope(&mu[..16]);
    assert!(b > 0.0 && r2 > 0.999, "slope {b}, r^2 {r2}");
    let peak = mu.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((16..40).contains(&peak), "mu peaks at n = {peak}");
    assert!(mu[47] < 0.0, "mu_47 = {}", mu[47]);
    assert!(m2.windows(2).all(|w| w[1] > w[0]));

    for (n, psi) in sol.states.iter().enumerate() {
        assert_eq!(node_count(psi), n);
    }
}
