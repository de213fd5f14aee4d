mod common;

use common::rel;
use ffgate::gate::{
    analytic_variances, cancellation_crossing, cancellation_level, gate_channel, ideal_output_variances, run_gate,
    spectral_sweep, sweep_transmittance, tune_ff_gain, Ancilla, FfAttenuation, Opa2Arm, Readout,
};
use ffgate::par::Execution;
use ffgate::{Error, GateConfig, GaussianState, SpectralModel};
use proptest::prelude::*;

const OUT_P: usize = 3;
const ANC_P: usize = 3;

fn vac() -> GaussianState {
    GaussianState::vacuum(1).unwrap()
}

/// Ancilla-p to output-p transfer coefficient at attenuation `a`.
fn leakage(cfg: &GateConfig, a: f64) -> f64 {
    gate_channel(cfg, Some(a), cfg.phase_error).unwrap().scale()[(OUT_P, ANC_P)].abs()
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn lossy(t: f64, gain_db: f64) -> GateConfig {
    GateConfig {
        transmittance: t,
        ancilla: Ancilla::Squeezed { r: 0.8 },
        ancilla_loss: 0.1,
        opa2: Opa2Arm::lumped(gain_db, 0.15),
        readout: Readout { loss: 0.21, gain_db: 20.7, explicit_gain: false },
        lower_arm_loss: 0.05,
        tap_loss: 0.02,
        displacement_r: 0.01,
        ff_attenuation: FfAttenuation::Auto,
        phase_error: 0.0,
        feedforward_enabled: true,
    }
}

#[test]
fn tuning_matches_numerical_minimizer() {
    for t in [0.2, 0.35, 0.5, 0.65, 0.8] {
        for gain_db in [28.4, 32.0, 36.0, 45.0, 60.0] {
            let mut wg = lossy(t, gain_db);
            wg.opa2 = Opa2Arm::waveguide(gain_db, 0.11, 0.05, 1.0);
            let mut coarse_tap = lossy(t, gain_db);
            coarse_tap.displacement_r = 0.05;
            for cfg in [lossy(t, gain_db), wg, coarse_tap] {
                let analytic = tune_ff_gain(&cfg).unwrap();
                let numeric = golden_section(|a| leakage(&cfg, a), 0.0, 1.0);
                assert!(rel(numeric, analytic) < 1e-9, "T={t} G={gain_db}: {numeric} vs {analytic}");
            }
        }
    }
}

#[test]
fn tuned_point_is_local_minimum() {
    for t in [0.3, 0.5, 0.62] {
        let cfg = GateConfig::experiment(t);
        let a = tune_ff_gain(&cfg).unwrap();
        let at = leakage(&cfg, a);
        assert!(at < 1e-12 * leakage(&cfg, 0.0), "residual {at}");
        for k in [0.99, 1.01] {
            assert!(leakage(&cfg, k * a) > at);
        }
    }
}

#[test]
fn infeasible_gain_reports_minimum() {
    let err = tune_ff_gain(&GateConfig::experiment(0.1)).unwrap_err();
    match err {
        Error::InfeasibleGain { required, min_gain_db } => {
            assert!(required > 1.0);
            // (1-R)(1-T) / (R T (1-l2)) at T = 0.1
            let expected = 10.0 * (0.99 * 0.9 / (0.01 * 0.1 * 0.85f64)).log10();
            assert!((min_gain_db - expected).abs() < 1e-9, "{min_gain_db}");
            assert!(err.to_string().contains("dB"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn huge_squeezing_reaches_pure_output() {
    for t in [0.3, 0.5, 0.8] {
        let cfg = GateConfig::lossless(t, 15.0, 80.0, 1e-4);
        let out = run_gate(&cfg, &vac()).unwrap();
        let (sm, sp) = ideal_output_variances(t, 15.0).unwrap();
        assert!((out.product - 1.0).abs() < 1e-3, "T={t}: product {}", out.product);
        assert!(rel(out.s_minus, sm) < 1e-3 && rel(out.s_plus, sp) < 1e-3);
        assert!(out.product >= 1.0 - 1e-9);
    }
}

#[test]
fn levels_monotone_in_transmittance() {
    let grid: Vec<f64> = (0..=17).map(|k| 0.15 + 0.05 * k as f64).collect();
    let rows = sweep_transmittance(&GateConfig::experiment(0.5), &grid, Execution::Sequential).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].s_plus_db < w[0].s_plus_db);
        assert!(w[1].s_minus_db > w[0].s_minus_db);
        assert!(w[1].analytic_s_plus_db < w[0].analytic_s_plus_db);
        assert!(w[1].analytic_s_minus_db > w[0].analytic_s_minus_db);
    }
}

#[test]
fn feedforward_reduces_product() {
    for t in [0.3, 0.4, 0.5, 0.62, 0.8] {
        let out = run_gate(&GateConfig::experiment(t), &vac()).unwrap();
        assert!(out.product < out.product_pre);
        let ana = analytic_variances(&GateConfig::experiment(t)).unwrap();
        assert!(ana.product < ana.product_pre);
    }
}

#[test]
fn full_transmission_leaves_only_the_tap() {
    let cfg = GateConfig::lossless(1.0, 0.7, 20.0, 0.01);
    let out = run_gate(&cfg, &GaussianState::squeezed_vacuum(0.4).unwrap()).unwrap();
    // the displacement beam splitter still taps off R of the output
    let through = |v: f64| 0.99 * v + 0.01;
    assert!(rel(out.s_plus, through(0.8f64.exp())) < 1e-12);
    assert!(rel(out.s_minus, through((-0.8f64).exp())) < 1e-12);
}

#[test]
fn cancellation_crossing_is_stable() {
    let cfg = GateConfig::lossless(0.5, 0.8, 30.0, 0.01);
    let exact = 2.0 * (1e-3f64.sqrt() / 2.0).asin();
    let coarse = cancellation_crossing(&cfg, -30.0, 10f64.to_radians(), 50).unwrap();
    let fine = cancellation_crossing(&cfg, -30.0, 10f64.to_radians(), 400).unwrap();
    assert!((coarse - exact).abs() < 1e-9, "{} deg", coarse.to_degrees());
    assert!((coarse - fine).abs() < 1e-12);
    assert!((coarse.to_degrees() - 1.8119).abs() < 1e-4);
    let one_degree = cancellation_level(&cfg, 1f64.to_radians()).unwrap();
    assert!((one_degree + 35.17).abs() < 0.01, "{one_degree}");
    assert!(cancellation_crossing(&cfg, -30.0, 1f64.to_radians(), 20).is_err());
}

#[test]
fn cancellation_independent_of_losses() {
    let phi = 0.02;
    let reference = 10.0 * (4.0 * (phi / 2.0f64).sin().powi(2)).log10();
    for t in [0.3, 0.6] {
        let level = cancellation_level(&lossy(t, 40.0), phi).unwrap();
        assert!((level - reference).abs() < 1e-9, "{level} vs {reference}");
    }
}

#[test]
fn spectrum_without_dispersion_is_flat() {
    let cfg = GateConfig::experiment(0.5);
    let grid: Vec<f64> = (1..=40).map(|k| k as f64 * 0.05e12).collect();
    let sp = spectral_sweep(&cfg, &SpectralModel::default(), &grid, Execution::Sequential).unwrap();
    for p in &sp.points {
        assert_eq!(p.s_plus, sp.points[0].s_plus);
        assert_eq!(p.s_minus, sp.points[0].s_minus);
    }
    assert!(rel(sp.band.s_plus, sp.points[0].s_plus) < 1e-14);
}

#[test]
fn delay_degrades_cancellation_with_frequency() {
    let cfg = GateConfig::experiment(0.5);
    let model = SpectralModel { delta_tau: 2.78e-15, ..SpectralModel::default() };
    let grid: Vec<f64> = (1..=100).map(|k| k as f64 * 0.02e12).collect();
    let sp = spectral_sweep(&cfg, &model, &grid, Execution::Sequential).unwrap();
    for w in sp.points.windows(2) {
        assert!(w[1].cancellation_db > w[0].cancellation_db);
    }
    let inside: Vec<_> = sp.points.iter().filter(|p| (0.1e12..=1.3e12).contains(&p.f)).collect();
    let mean = inside.iter().map(|p| p.s_plus).sum::<f64>() / inside.len() as f64;
    assert_eq!(sp.band.bins, inside.len());
    assert!(rel(sp.band.s_plus, mean) < 1e-14);
}

#[test]
fn empty_band_is_an_error() {
    let cfg = GateConfig::experiment(0.5);
    let err = spectral_sweep(&cfg, &SpectralModel::default(), &[0.01e12, 0.05e12], Execution::Sequential);
    assert!(matches!(err, Err(Error::EmptyBand(_))));
}

#[test]
fn sequential_and_parallel_agree() {
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.045).collect();
    let cfg = GateConfig::experiment(0.5);
    let seq = sweep_transmittance(&cfg, &grid[3..], Execution::Sequential).unwrap();
    let par = sweep_transmittance(&cfg, &grid[3..], Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn output_product_at_least_one(
        t in 0.05f64..=1.0,
        r in 0.0f64..2.5,
        l2 in 0.0f64..0.5,
        l3 in 0.0f64..0.5,
        lower in 0.0f64..0.3,
        anc_loss in 0.0f64..0.5,
        r_disp in 0.001f64..0.2,
        phase in -0.3f64..0.3,
    ) {
        let cfg = GateConfig {
            transmittance: t,
            ancilla: Ancilla::Squeezed { r },
            ancilla_loss: anc_loss,
            opa2: Opa2Arm::lumped(70.0, l2),
            readout: Readout { loss: l3, gain_db: 10.0, explicit_gain: false },
            lower_arm_loss: lower,
            tap_loss: 0.0,
            displacement_r: r_disp,
            ff_attenuation: FfAttenuation::Auto,
            phase_error: phase,
            feedforward_enabled: true,
        };
        let out = run_gate(&cfg, &vac()).unwrap();
        prop_assert!(out.product >= 1.0 - 1e-9, "product {}", out.product);
        prop_assert!(out.product_pre >= 1.0 - 1e-9);
    }

    #[test]
    fn explicit_readout_gain_cancels(t in 0.2f64..0.9, gain_db in 0.0f64..30.0) {
        let mut cfg = GateConfig::experiment(t);
        cfg.readout.gain_db = gain_db;
        if tune_ff_gain(&cfg).is_ok() {
            let a = ffgate::gate::run_gate_with_readout_gain(&cfg, &vac(), false).unwrap();
            let b = ffgate::gate::run_gate_with_readout_gain(&cfg, &vac(), true).unwrap();
            prop_assert!(rel(a.s_plus, b.s_plus) < 1e-9 && rel(a.s_minus, b.s_minus) < 1e-9);
        }
    }
}
