//! Parametric amplification in a lossy waveguide.
//!
//! A waveguide with gain per unit length `g`, field extinction coefficient
//! `alpha` and length `L` maps the quadratures as
//!
//! ```text
//! x_out = e^{-(g+alpha)L} x_in + sqrt(alpha (1 - e^{-2(g+alpha)L}) / (g+alpha)) x_vac
//! p_out = e^{(g-alpha)L}  p_in + sqrt(alpha (e^{2(g-alpha)L} - 1) / (g-alpha))  p_vac
//! ```
//!
//! [`slice_oracle`] rebuilds the same channel by composing `N` thin slices,
//! each an exact gain step followed by an exact loss step.

use crate::error::{invalid, Result};
use crate::gaussian::{from_db, GaussianChannel, VACUUM_VARIANCE};

/// Below this `|g - alpha| L` the p-noise uses its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaSpec {
    /// Parametric gain per unit length (1/m).
    pub gain_per_length: f64,
    /// Field extinction coefficient (1/m).
    pub extinction: f64,
    /// Waveguide length (m).
    pub length: f64,
}

impl OpaSpec {
    pub fn new(gain_per_length: f64, extinction: f64, length: f64) -> Result<Self> {
        let spec = Self { gain_per_length, extinction, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { gain_per_length: g, extinction: a, length: l } = *self;
        if !(g.is_finite() && a.is_finite() && l.is_finite()) {
            return invalid("OPA parameters must be finite");
        }
        if g < 0.0 || a < 0.0 {
            return invalid(format!("gain per length and extinction must be >= 0, got g={g}, alpha={a}"));
        }
        if l <= 0.0 {
            return invalid(format!("waveguide length must be > 0, got {l}"));
        }
        Ok(())
    }

    /// Net p-quadrature power gain `e^{2(g-alpha)L}`.
    pub fn p_power_gain(&self) -> f64 {
        (2.0 * (self.gain_per_length - self.extinction) * self.length).exp()
    }
}

/// Gain and loss as quoted for a packaged amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaGainLoss {
    /// p-quadrature power gain in dB.
    pub gain_db: f64,
    /// Effective propagation loss, `1 - efficiency`.
    pub effective_loss: f64,
}

impl OpaGainLoss {
    pub fn new(gain_db: f64, effective_loss: f64) -> Result<Self> {
        if !gain_db.is_finite() {
            return invalid("OPA gain must be finite");
        }
        if !(0.0..1.0).contains(&effective_loss) {
            return invalid(format!("effective loss must lie in [0, 1), got {effective_loss}"));
        }
        Ok(Self { gain_db, effective_loss })
    }
}

/// Diagonal single-mode block of an amplifier channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpaBlock {
    pub scale_x: f64,
    pub scale_p: f64,
    pub noise_x: f64,
    pub noise_p: f64,
}

impl OpaBlock {
    pub fn into_channel(self, num_modes: usize, mode: usize) -> Result<GaussianChannel> {
        GaussianChannel::single_mode(
            num_modes,
            mode,
            [[self.scale_x, 0.0], [0.0, self.scale_p]],
            [[self.noise_x, 0.0], [0.0, self.noise_p]],
        )
    }

    /// Largest relative difference over the four entries.
    pub fn max_relative_deviation(&self, reference: &OpaBlock) -> f64 {
        let pairs = [
            (self.scale_x, reference.scale_x),
            (self.scale_p, reference.scale_p),
            (self.noise_x, reference.noise_x),
            (self.noise_p, reference.noise_p),
        ];
        pairs.iter().map(|&(a, b)| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() }).fold(0.0, f64::max)
    }
}

/// `(e^{2 d L} - 1) / d`, continuous through `d = 0`.
fn growth_integral(d: f64, length: f64) -> f64 {
    let y = d * length;
    if y.abs() < SERIES_THRESHOLD {
        2.0 * length * (1.0 + y + 2.0 / 3.0 * y * y)
    } else {
        (2.0 * y).exp_m1() / d
    }
}

/// Closed-form single-mode block of the lossy amplifier.
pub fn lossy_opa_block(spec: &OpaSpec) -> Result<OpaBlock> {
    spec.validate()?;
    let OpaSpec { gain_per_length: g, extinction: a, length: l } = *spec;
    let sum = g + a;
    let noise_x = if sum == 0.0 { 0.0 } else { a * -(-2.0 * sum * l).exp_m1() / sum };
    let noise_p = a * growth_integral(g - a, l);
    Ok(OpaBlock {
        scale_x: (-sum * l).exp(),
        scale_p: ((g - a) * l).exp(),
        noise_x: VACUUM_VARIANCE * noise_x,
        noise_p: VACUUM_VARIANCE * noise_p,
    })
}

pub fn lossy_opa_channel(spec: &OpaSpec, num_modes: usize, mode: usize) -> Result<GaussianChannel> {
    lossy_opa_block(spec)?.into_channel(num_modes, mode)
}

/// Composition of `slices` thin gain-then-loss steps of length `L / slices`.
pub fn slice_oracle_block(spec: &OpaSpec, slices: usize) -> Result<OpaBlock> {
    spec.validate()?;
    if slices == 0 {
        return invalid("slice count must be >= 1");
    }
    let dz = spec.length / slices as f64;
    let (g, a) = (spec.gain_per_length, spec.extinction);
    let attenuation = (-a * dz).exp();
    let step_x = (-g * dz).exp() * attenuation;
    let step_p = (g * dz).exp() * attenuation;
    let step_noise = VACUUM_VARIANCE * -(-2.0 * a * dz).exp_m1();

    let mut block = OpaBlock { scale_x: 1.0, scale_p: 1.0, noise_x: 0.0, noise_p: 0.0 };
    for _ in 0..slices {
        block.scale_x *= step_x;
        block.scale_p *= step_p;
        block.noise_x = step_x * step_x * block.noise_x + step_noise;
        block.noise_p = step_p * step_p * block.noise_p + step_noise;
    }
    Ok(block)
}

pub fn slice_oracle(spec: &OpaSpec, slices: usize, num_modes: usize, mode: usize) -> Result<GaussianChannel> {
    slice_oracle_block(spec, slices)?.into_channel(num_modes, mode)
}

/// Equivalent input-side transmission of the anti-squeezed quadrature,
/// `eta = (g-alpha) e^{2(g-alpha)L} / (g e^{2(g-alpha)L} - alpha)`.
pub fn efficiency(spec: &OpaSpec) -> Result<f64> {
    decompose_loss_then_amp(spec).map(|(eta, _)| eta)
}

/// Factorizes the p-row as loss `eta` followed by an ideal gain `g_hat`,
/// with `eta * g_hat = e^{2(g-alpha)L}`.
pub fn decompose_loss_then_amp(spec: &OpaSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let (g, a) = (spec.gain_per_length, spec.extinction);
    let g_hat = 1.0 + g * growth_integral(g - a, spec.length);
    Ok((spec.p_power_gain() / g_hat, g_hat))
}

/// Reconstructs `(g, alpha)` at a fixed length from a quoted gain and
/// effective loss.
///
/// Only `gL` and `alpha L` are observable, so the length is a gauge choice.
/// With `d = g - alpha = ln(G) / 2L` fixed by the gain, the efficiency is
/// `G / (1 + g (G - 1) / d)`, which inverts in closed form for `g`.
pub fn spec_from_gain_loss(gl: &OpaGainLoss, length: f64) -> Result<OpaSpec> {
    if !(gl.gain_db > 0.0) || !gl.gain_db.is_finite() {
        return invalid(format!("gain must be > 0 dB, got {}", gl.gain_db));
    }
    if !(0.0..1.0).contains(&gl.effective_loss) {
        return invalid(format!("effective loss must lie in [0, 1), got {}", gl.effective_loss));
    }
    if !(length > 0.0) || !length.is_finite() {
        return invalid(format!("assumed length must be > 0, got {length}"));
    }
    let gain = from_db(gl.gain_db);
    let eta = 1.0 - gl.effective_loss;
    let d = gain.ln() / (2.0 * length);
    if gl.effective_loss == 0.0 {
        return OpaSpec::new(d, 0.0, length);
    }
    let g = (gain / eta - 1.0) * d / (gain - 1.0);
    OpaSpec::new(g, (g - d).max(0.0), length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{GaussianState, QuadratureSelector};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lossless_reduces_to_ideal_gain() {
        let spec = OpaSpec::new(1.3, 0.0, 0.8).unwrap();
        let ch = lossy_opa_channel(&spec, 1, 0).unwrap();
        let ideal = GaussianChannel::ideal_opa(1, (2.0 * 1.3 * 0.8f64).exp(), 0).unwrap();
        for (a, b) in ch.scale().iter().zip(ideal.scale().iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert!(ch.noise().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn no_gain_reduces_to_loss() {
        let spec = OpaSpec::new(0.0, 0.35, 1.4).unwrap();
        let ch = lossy_opa_channel(&spec, 1, 0).unwrap();
        let loss = GaussianChannel::loss(1, (-2.0 * 0.35 * 1.4f64).exp(), 0).unwrap();
        for (a, b) in ch.scale().iter().zip(loss.scale().iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in ch.noise().iter().zip(loss.noise().iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn balanced_gain_and_loss_on_vacuum() {
        let spec = OpaSpec::new(1.0, 1.0, 1.0).unwrap();
        let out = lossy_opa_channel(&spec, 1, 0).unwrap().apply(&GaussianState::vacuum(1).unwrap()).unwrap();
        let vp = out.shot_normalized_variance(QuadratureSelector::p(0)).unwrap();
        let vx = out.shot_normalized_variance(QuadratureSelector::x(0)).unwrap();
        assert!((vp - 3.0).abs() < 1e-12);
        let e4 = (-4.0f64).exp();
        assert!((vx - (e4 + (1.0 - e4) / 2.0)).abs() < 1e-12);
        assert!((vx - 0.5092).abs() < 1e-4);
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = lossy_opa_block(&OpaSpec::new(0.5 + 4e-7, 0.5, 1.0).unwrap()).unwrap();
        let above = lossy_opa_block(&OpaSpec::new(0.5 + 4e-6, 0.5, 1.0).unwrap()).unwrap();
        let exact = lossy_opa_block(&OpaSpec::new(0.5, 0.5, 1.0).unwrap()).unwrap();
        assert!(rel(exact.noise_p, 0.5 * 0.5 * 2.0) < 1e-15);
        assert!(rel(below.noise_p, exact.noise_p) < 1e-6);
        assert!(rel(above.noise_p, exact.noise_p) < 1e-5);
        // series vs expm1 across the switchover
        let a = 0.5 * growth_integral(9.9e-7, 1.0);
        let b = 0.5 * (2.0 * 1.01e-6f64).exp_m1() / 1.01e-6;
        assert!(rel(a, b) < 1e-6);
    }

    #[test]
    fn series_matches_expm1_near_threshold() {
        for d in [1e-7, 5e-7, 9.99e-7, -9.99e-7] {
            let series = growth_integral(d, 1.0);
            let direct = (2.0 * d).exp_m1() / d;
            assert!(rel(series, direct) < 1e-12, "{d}: {series} vs {direct}");
        }
    }

    #[test]
    fn single_slice_without_gain_is_loss() {
        let spec = OpaSpec::new(0.0, 0.7, 0.9).unwrap();
        let oracle = slice_oracle_block(&spec, 1).unwrap();
        let eta = (-2.0 * 0.7 * 0.9f64).exp();
        assert!((oracle.scale_x - eta.sqrt()).abs() < 1e-15);
        assert!((oracle.noise_p - 0.5 * (1.0 - eta)).abs() < 1e-15);
        assert!(slice_oracle_block(&spec, 0).is_err());
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency(&OpaSpec::new(2.0, 0.0, 1.0).unwrap()).unwrap(), 1.0);
        let g0 = efficiency(&OpaSpec::new(0.0, 0.5, 1.0).unwrap()).unwrap();
        assert!((g0 - (-1.0f64).exp()).abs() < 1e-15);
        let e3 = 3f64.exp();
        let eta = efficiency(&OpaSpec::new(2.0, 0.5, 1.0).unwrap()).unwrap();
        assert!((eta - 1.5 * e3 / (2.0 * e3 - 0.5)).abs() < 1e-14);
        assert!((eta - 0.7594).abs() < 1e-4);
        assert_eq!(efficiency(&OpaSpec::new(0.0, 0.0, 1.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn decomposition_examples() {
        let (eta, g_hat) = decompose_loss_then_amp(&OpaSpec::new(1.1, 0.0, 1.0).unwrap()).unwrap();
        assert!((eta - 1.0).abs() < 1e-15);
        assert!(rel(g_hat, (2.2f64).exp()) < 1e-14);

        let (eta, g_hat) = decompose_loss_then_amp(&OpaSpec::new(2.0, 0.5, 1.0).unwrap()).unwrap();
        assert!(rel(g_hat, 3f64.exp() / eta) < 1e-14);
        assert!((g_hat - 26.45).abs() < 0.01);

        let (eta, g_hat) = decompose_loss_then_amp(&OpaSpec::new(0.8, 0.8, 1.5).unwrap()).unwrap();
        assert!(rel(eta, 1.0 / (1.0 + 2.0 * 0.8 * 1.5)) < 1e-15);
        assert!(rel(g_hat, 1.0 + 2.0 * 0.8 * 1.5) < 1e-15);
    }

    #[test]
    fn gain_loss_inverse_lossless() {
        let spec = spec_from_gain_loss(&OpaGainLoss::new(6.02, 0.0).unwrap(), 2.0).unwrap();
        assert_eq!(spec.extinction, 0.0);
        assert!(rel(spec.gain_per_length, from_db(6.02).ln() / 4.0) < 1e-12);
        assert!((spec.gain_per_length - 2f64.ln() / 2.0).abs() < 1e-3);
    }

    #[test]
    fn gain_loss_rejects_bad_inputs() {
        assert!(spec_from_gain_loss(&OpaGainLoss { gain_db: 0.0, effective_loss: 0.1 }, 1.0).is_err());
        assert!(spec_from_gain_loss(&OpaGainLoss { gain_db: 10.0, effective_loss: 1.0 }, 1.0).is_err());
        assert!(spec_from_gain_loss(&OpaGainLoss { gain_db: 10.0, effective_loss: 0.1 }, 0.0).is_err());
        assert!(OpaGainLoss::new(10.0, 1.0).is_err());
        assert!(OpaSpec::new(-1.0, 0.0, 1.0).is_err());
        assert!(OpaSpec::new(1.0, 0.0, 0.0).is_err());
    }
}
