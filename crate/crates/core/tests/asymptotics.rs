mod common;

use common::{e, ordered_state, state};
use peakon_core::asymptotics::*;
use peakon_core::flows::integrate;
use peakon_core::generate::GeometricProfile;
use peakon_core::lax::{lax_from_state, Permutation, Sector};
use peakon_core::ode::IntegratorConfig;
use peakon_core::spectral::lax_spectrum;
use peakon_core::{Config, Report, Spec, State};
use proptest::prelude::*;

fn cfg(t_end: f64) -> Config {
    IntegratorConfig { max_step: 1.0, ..IntegratorConfig::default() }.with_t_end(t_end)
}

fn spectrum(s: &State) -> Spec {
    lax_spectrum(&lax_from_state(s).unwrap().matrix, None).unwrap()
}

#[test]
fn two_peak_plus_sorting_and_scattering() {
    let s = state(&[1.0, -1.0], &[1.0, 1.0], Sector::Plus);
    let spec = spectrum(&s);
    let tr = integrate(&s, &cfg(100.0)).unwrap();
    let rep = sorting_check(&tr, &spec, &Sector::Plus, Thresholds::default()).unwrap();
    assert!((rep.rows[0].p_target - (1.0 + e(-1.0))).abs() < 1e-15);
    assert!(rep.max_momentum_residual <= 1e-4);
    let fit = scattering_fit(&tr, &spec, &Sector::Plus, (50.0, 100.0), Thresholds::default()).unwrap();
    assert!(fit.max_slope_residual.unwrap() <= 1e-3);
    for row in &fit.rows {
        assert!((row.speed_final - row.slope.unwrap()).abs() <= 1e-3);
    }
    let sep = separation_check(&tr);
    assert!(sep.separated);
    assert!(sep.series.last().unwrap().1 > sep.series[0].1);
}

#[test]
fn minus_geometric_reversed_limits() {
    let s = GeometricProfile::new(1.0, 0.6, 1.0).unwrap().state::<f64>(4, Sector::Minus).unwrap();
    let run = run_with_extension(&s, &cfg(100.0), 3200.0, Thresholds::default()).unwrap();
    assert_eq!(run.report.extension.as_ref().unwrap().outcome, ExtensionOutcome::Converged);
    assert!(run.report.max_momentum_residual <= 1e-3);
    let lambdas = &run.spectrum.lambdas;
    for (j, row) in run.report.rows.iter().enumerate() {
        assert_eq!(row.p_target, 2.0 * lambdas[3 - j]);
    }
}

#[test]
fn minus_five_peak_separates() {
    // r small enough makes the lowest eigenvalues nearly coincide; still interacting at t=200
    let s = GeometricProfile::new(1.0, 0.9, 2.0).unwrap().state::<f64>(5, Sector::Minus).unwrap();
    let tr = integrate(&s, &cfg(200.0)).unwrap();
    assert!(separation_check(&tr).separated);
}

#[test]
fn single_peak_vacuous_separation() {
    let s = state(&[0.0], &[1.0], Sector::Minus);
    let tr = integrate(&s, &cfg(5.0)).unwrap();
    let sep = separation_check(&tr);
    assert!(sep.separated && sep.series.is_empty());
}

#[test]
fn sublinear_trend_across_n() {
    let profile = GeometricProfile::new(1.0, 0.5, 1.0).unwrap();
    let mut runs = Vec::new();
    for n in [3, 4, 5] {
        let s = profile.state::<f64>(n, Sector::Minus).unwrap();
        let run = run_with_extension(&s, &cfg(400.0), 3200.0, Thresholds::default()).unwrap();
        let w = late_window(&run.trajectory);
        runs.push(TrendRun::from_trajectory(&run.trajectory, &run.spectrum, w).unwrap());
    }
    let table = sublinear_trend(&runs).unwrap();
    assert!(table.slope_decreasing && table.plateau_decreasing);
    for r in &table.runs {
        assert!((r.slope_q1 - r.lambda_min).abs() <= 1e-3);
    }
    assert!(sublinear_trend(&runs[..1]).is_err());
}

#[test]
fn permuted_three_peaks() {
    let perm = Permutation::from_one_based(&[3, 1, 2]).unwrap();
    let sector = Sector::PlusPerm { permutation: perm.clone() };
    let s = GeometricProfile::new(2.0, 0.5, 1.0).unwrap().state::<f64>(3, sector.clone()).unwrap();
    let out = permuted_sector_run(&s, &cfg(100.0), 800.0, Thresholds::default()).unwrap();
    let rep = &out.run.report;
    assert!(rep.max_momentum_residual <= 1e-3, "{}", rep.max_momentum_residual);
    assert!(rep.max_slope_residual.unwrap() <= 1e-3);
    // original index i carries λ_{π⁻¹(i)}
    let inv = perm.inverse();
    for (i, row) in rep.rows.iter().enumerate() {
        assert_eq!(row.slope_target, out.run.spectrum.lambdas[inv.apply(i)]);
    }
    assert!(out.relabeling_discrepancy <= 1e-10, "{}", out.relabeling_discrepancy);
}

#[test]
fn permuted_slopes_two_three_one() {
    let perm = Permutation::from_one_based(&[2, 3, 1]).unwrap();
    let sector = Sector::PlusPerm { permutation: perm };
    let s = GeometricProfile::new(2.0, 0.5, 1.0).unwrap().state::<f64>(3, sector.clone()).unwrap();
    let run = run_with_extension(&s, &cfg(100.0), 800.0, Thresholds::default()).unwrap();
    let fit = scattering_fit(&run.trajectory, &run.spectrum, &sector, late_window(&run.trajectory), Thresholds::default()).unwrap();
    assert!(fit.max_slope_residual.unwrap() <= 1e-3);
}

#[test]
fn identity_permutation_matches_plain_sector() {
    let s = GeometricProfile::new(1.0, 0.6, 1.0).unwrap().state::<f64>(3, Sector::Plus).unwrap();
    let sector = Sector::PlusPerm { permutation: Permutation::identity(3) };
    let sp = State { sector: sector.clone(), ..s.clone() };
    let a = run_with_extension(&s, &cfg(100.0), 400.0, Thresholds::default()).unwrap();
    let b = run_with_extension(&sp, &cfg(100.0), 400.0, Thresholds::default()).unwrap();
    assert_eq!(a.trajectory.times, b.trajectory.times);
    assert_eq!(a.report.max_momentum_residual, b.report.max_momentum_residual);
}

#[test]
fn offdiagonal_mass_decays_late() {
    for (sector, t) in [(Sector::Plus, 200.0), (Sector::Minus, 400.0)] {
        let s = GeometricProfile::new(1.0, 0.6, 1.0).unwrap().state::<f64>(4, sector).unwrap();
        let tr = integrate(&s, &cfg(t)).unwrap();
        let mass = offdiagonal_mass(&tr).unwrap();
        let tail = &mass[3 * mass.len() / 4..];
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn report_serializes() {
    let s = state(&[1.0, -1.0], &[1.0, 1.0], Sector::Plus);
    let tr = integrate(&s, &cfg(30.0)).unwrap();
    let rep = scattering_fit(&tr, &spectrum(&s), &Sector::Plus, (15.0, 30.0), Thresholds::default()).unwrap();
    let json = rep.to_json().unwrap();
    let back: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep);
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("j,p_final,p_target"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn permutation_equivariance(s in ordered_state(2, 5, Sector::Plus), seed in 0u64..1000) {
        // integrate then permute equals permute then integrate
        let n = s.n();
        let perm = peakon_core::generate::random_permutation(&mut peakon_core::generate::seeded_rng(seed), n);
        let sector = Sector::PlusPerm { permutation: perm.clone() };
        let permuted = s.unrelabeled(&sector);
        let a = integrate(&permuted, &cfg(5.0)).unwrap();
        let b = integrate(&s, &cfg(5.0)).unwrap();
        let relabeled = a.last().relabeled();
        for j in 0..n {
            prop_assert!((relabeled.q[j] - b.last().q[j]).abs() <= 1e-10);
            prop_assert!((relabeled.p[j] - b.last().p[j]).abs() <= 1e-10);
        }
    }
}
