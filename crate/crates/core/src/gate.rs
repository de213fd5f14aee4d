//! The feedforward squeezing gate.
//!
//! Mode 0 carries the gate input, mode 1 the squeezed ancilla. After the
//! variable beam splitter the upper arm (mode 0) is amplified, attenuated
//! and phase shifted, then coupled into the lower arm (mode 1) through the
//! weak port of the displacement beam splitter. Mode 1 is the gate output
//! and is read out through the measurement amplifier.
//!
//! ```text
//!            ┌ tap ─ OPA2 loss ─ OPA2 ─ atten ─ phase ┐
//! in ──┐     │                                        R
//!      BS(T) ┤                                        ├── readout loss ── (OPA3) ── out
//! anc ─┘     └─────────────── lower-arm loss ─────────┘
//! ```

use serde::{Deserialize, Serialize};

use crate::analysis::{infer_loss_and_r, SqueezingPair};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{from_db, to_db, GaussianChannel, GaussianState, QuadratureSelector};
use crate::opa::{lossy_opa_channel, spec_from_gain_loss, OpaGainLoss, OpaSpec};
use crate::par::{map_ordered, Execution};

pub const MODES: usize = 2;
pub const MODE_UPPER: usize = 0;
pub const MODE_OUT: usize = 1;
const IDX_OUT_X: usize = 2 * MODE_OUT;
const IDX_OUT_P: usize = 2 * MODE_OUT + 1;
const IDX_ANC_P: usize = 2 * MODE_OUT + 1;

/// Reported when the residual ancilla noise is below double precision.
pub const CANCELLATION_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ancilla {
    /// Pure squeezed vacuum with squeezing parameter `r`.
    Squeezed { r: f64 },
    /// Measured shot-normalized levels; the state is rebuilt as a pure
    /// squeezer followed by the inferred lumped loss.
    Measured { s_minus: f64, s_plus: f64 },
}

/// Lossy waveguide description of OPA2, used instead of the lumped model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideSplit {
    pub coupling_loss: f64,
    pub propagation_loss: f64,
    /// Gauge length for the `(g, alpha)` reconstruction.
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opa2Arm {
    pub gain_db: f64,
    /// Total loss `l2`, applied before an ideal amplifier in the lumped model.
    pub loss: f64,
    pub waveguide: Option<WaveguideSplit>,
}

impl Opa2Arm {
    pub fn lumped(gain_db: f64, loss: f64) -> Self {
        Self { gain_db, loss, waveguide: None }
    }

    pub fn waveguide(gain_db: f64, coupling_loss: f64, propagation_loss: f64, length: f64) -> Self {
        Self {
            gain_db,
            loss: 1.0 - (1.0 - coupling_loss) * (1.0 - propagation_loss),
            waveguide: Some(WaveguideSplit { coupling_loss, propagation_loss, length }),
        }
    }
}

/// Measurement path: loss `l3`, optionally followed by an explicit ideal
/// amplifier. The amplifier scales signal and shot noise alike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub loss: f64,
    pub gain_db: f64,
    pub explicit_gain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FfAttenuation {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    pub transmittance: f64,
    pub ancilla: Ancilla,
    /// Ancilla-path loss before the variable beam splitter (`l1`).
    pub ancilla_loss: f64,
    pub opa2: Opa2Arm,
    pub readout: Readout,
    pub lower_arm_loss: f64,
    pub tap_loss: f64,
    /// Reflectance of the displacement beam splitter.
    pub displacement_r: f64,
    pub ff_attenuation: FfAttenuation,
    /// Phase error (rad) of the feedforward beam.
    pub phase_error: f64,
    pub feedforward_enabled: bool,
}

impl GateConfig {
    /// Measured experimental losses, lumped, with the measured ancilla (9.3 dB / 3.6 dB).
    pub fn experiment(transmittance: f64) -> Self {
        Self {
            transmittance,
            ancilla: Ancilla::Measured { s_minus: from_db(-3.6), s_plus: from_db(9.3) },
            ancilla_loss: 0.0,
            opa2: Opa2Arm::lumped(28.4, 0.15),
            readout: Readout { loss: 0.21, gain_db: 20.7, explicit_gain: false },
            lower_arm_loss: 0.0,
            tap_loss: 0.0,
            displacement_r: 0.01,
            ff_attenuation: FfAttenuation::Auto,
            phase_error: 0.0,
            feedforward_enabled: true,
        }
    }

    /// No losses anywhere, pure ancilla.
    pub fn lossless(transmittance: f64, r: f64, opa2_gain_db: f64, displacement_r: f64) -> Self {
        Self {
            transmittance,
            ancilla: Ancilla::Squeezed { r },
            ancilla_loss: 0.0,
            opa2: Opa2Arm::lumped(opa2_gain_db, 0.0),
            readout: Readout { loss: 0.0, gain_db: 0.0, explicit_gain: false },
            lower_arm_loss: 0.0,
            tap_loss: 0.0,
            displacement_r,
            ff_attenuation: FfAttenuation::Auto,
            phase_error: 0.0,
            feedforward_enabled: true,
        }
    }

    pub fn with_transmittance(mut self, t: f64) -> Self {
        self.transmittance = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.transmittance;
        if !(t > 0.0 && t <= 1.0) {
            return invalid(format!("gate transmittance T must lie in (0, 1], got {t}"));
        }
        let unit = |name: &str, v: f64| -> Result<()> {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                invalid(format!("{name} must lie in [0, 1), got {v}"))
            }
        };
        unit("ancilla loss", self.ancilla_loss)?;
        unit("OPA2 loss", self.opa2.loss)?;
        unit("OPA3 loss", self.readout.loss)?;
        unit("lower-arm loss", self.lower_arm_loss)?;
        unit("tap loss", self.tap_loss)?;
        if let Some(w) = self.opa2.waveguide {
            unit("OPA2 coupling loss", w.coupling_loss)?;
            unit("OPA2 propagation loss", w.propagation_loss)?;
            if !(w.length > 0.0) {
                return invalid("OPA2 waveguide length must be > 0");
            }
        }
        if !(self.displacement_r > 0.0 && self.displacement_r < 1.0) {
            return invalid(format!("displacement reflectance must lie in (0, 1), got {}", self.displacement_r));
        }
        if !self.opa2.gain_db.is_finite() || self.opa2.gain_db < 0.0 {
            return invalid(format!("OPA2 gain must be >= 0 dB, got {}", self.opa2.gain_db));
        }
        if !self.readout.gain_db.is_finite() || self.readout.gain_db < 0.0 {
            return invalid(format!("OPA3 gain must be >= 0 dB, got {}", self.readout.gain_db));
        }
        if let FfAttenuation::Fixed(a) = self.ff_attenuation {
            if !(0.0..=1.0).contains(&a) {
                return invalid(format!("feedforward attenuation must lie in [0, 1], got {a}"));
            }
        }
        if !self.phase_error.is_finite() {
            return invalid("phase error must be finite");
        }
        match self.ancilla {
            Ancilla::Squeezed { r } if !r.is_finite() => invalid("ancilla r must be finite"),
            Ancilla::Measured { s_minus, s_plus } if !(s_minus > 0.0 && s_plus > 0.0) => {
                invalid("measured ancilla levels must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Reconstructed waveguide for OPA2, when the split model is selected.
    pub fn opa2_spec(&self) -> Result<Option<OpaSpec>> {
        self.opa2
            .waveguide
            .map(|w| {
                let gl = OpaGainLoss::new(self.opa2.gain_db, w.propagation_loss)?;
                spec_from_gain_loss(&gl, w.length)
            })
            .transpose()
    }
}

/// Shot-normalized output levels with and without feedforward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateOutcome {
    pub s_plus: f64,
    pub s_minus: f64,
    pub product: f64,
    pub s_plus_pre: f64,
    pub s_minus_pre: f64,
    pub product_pre: f64,
}

impl GateOutcome {
    fn new(s_plus: f64, s_minus: f64, s_plus_pre: f64, s_minus_pre: f64) -> Self {
        Self {
            s_plus,
            s_minus,
            product: s_plus * s_minus,
            s_plus_pre,
            s_minus_pre,
            product_pre: s_plus_pre * s_minus_pre,
        }
    }
}

/// Ancilla state as it enters the variable beam splitter.
pub fn ancilla_state(config: &GateConfig) -> Result<GaussianState> {
    let squeezed = match config.ancilla {
        Ancilla::Squeezed { r } => GaussianState::squeezed_vacuum(r)?,
        Ancilla::Measured { s_minus, s_plus } => {
            let inf = infer_loss_and_r(&SqueezingPair::new(s_plus, s_minus)?)?;
            let sq = GaussianState::squeezed_vacuum(inf.r)?;
            GaussianChannel::loss(1, 1.0 - inf.loss, 0)?.apply(&sq)?
        }
    };
    GaussianChannel::loss(1, 1.0 - config.ancilla_loss, 0)?.apply(&squeezed)
}

/// Shot-normalized `(S+, S-)` of the ancilla at the gate.
pub fn ancilla_levels(config: &GateConfig) -> Result<SqueezingPair> {
    let st = ancilla_state(config)?;
    SqueezingPair::new(
        st.shot_normalized_variance(QuadratureSelector::p(0))?,
        st.shot_normalized_variance(QuadratureSelector::x(0))?,
    )
}

/// Upper-arm channels between the variable beam splitter and the attenuator.
fn upper_arm(config: &GateConfig) -> Result<Vec<GaussianChannel>> {
    let mut chain = vec![GaussianChannel::loss(MODES, 1.0 - config.tap_loss, MODE_UPPER)?];
    match (config.opa2.waveguide, config.opa2_spec()?) {
        (Some(w), Some(spec)) => {
            chain.push(GaussianChannel::loss(MODES, 1.0 - w.coupling_loss, MODE_UPPER)?);
            chain.push(lossy_opa_channel(&spec, MODES, MODE_UPPER)?);
        }
        _ => {
            chain.push(GaussianChannel::loss(MODES, 1.0 - config.opa2.loss, MODE_UPPER)?);
            chain.push(GaussianChannel::ideal_opa(MODES, from_db(config.opa2.gain_db), MODE_UPPER)?);
        }
    }
    Ok(chain)
}

/// `(pre-amplification transmission, p power gain)` of the upper arm.
fn upper_arm_p_factors(config: &GateConfig) -> Result<(f64, f64)> {
    let tap = 1.0 - config.tap_loss;
    Ok(match (config.opa2.waveguide, config.opa2_spec()?) {
        (Some(w), Some(spec)) => (tap * (1.0 - w.coupling_loss), spec.p_power_gain()),
        _ => (tap * (1.0 - config.opa2.loss), from_db(config.opa2.gain_db)),
    })
}

/// Power attenuation that cancels the ancilla p noise at the output:
/// `sqrt(a) sqrt(R) A sqrt(T) = sqrt(1-R) sqrt(1-l_low) sqrt(1-T)`, with
/// `A^2` the upper-arm p power gain including pre-amplifier losses.
pub fn tune_ff_gain(config: &GateConfig) -> Result<f64> {
    config.validate()?;
    if !config.feedforward_enabled {
        return invalid("feedforward gain tuning needs feedforward enabled");
    }
    let t = config.transmittance;
    let r = config.displacement_r;
    let (eta_pre, gain) = upper_arm_p_factors(config)?;
    let target = (1.0 - r) * (1.0 - config.lower_arm_loss) * (1.0 - t) / (r * t);
    let a = target / (eta_pre * gain);
    if a > 1.0 {
        return Err(Error::InfeasibleGain { required: a, min_gain_db: to_db(target / eta_pre)? });
    }
    Ok(a)
}

/// Attenuation actually used for the feedforward beam.
pub fn resolved_attenuation(config: &GateConfig) -> Result<f64> {
    match config.ff_attenuation {
        FfAttenuation::Fixed(a) => Ok(a),
        FfAttenuation::Auto => tune_ff_gain(config),
    }
}

/// Gate without the readout: variable beam splitter through displacement.
///
/// `attenuation = None` blocks the upper arm so only vacuum enters the weak
/// port. `phase` is the total rotation of the feedforward beam.
pub fn gate_channel(config: &GateConfig, attenuation: Option<f64>, phase: f64) -> Result<GaussianChannel> {
    config.validate()?;
    let mut chain = vec![GaussianChannel::beam_splitter(MODES, config.transmittance, MODE_UPPER, MODE_OUT)?];
    chain.extend(upper_arm(config)?);
    chain.push(GaussianChannel::loss(MODES, attenuation.unwrap_or(0.0), MODE_UPPER)?);
    chain.push(GaussianChannel::phase_rotation(MODES, phase, MODE_UPPER)?);
    chain.push(GaussianChannel::loss(MODES, 1.0 - config.lower_arm_loss, MODE_OUT)?);
    // weak port: out' = sqrt(R) upper + sqrt(1-R) out
    chain.push(GaussianChannel::beam_splitter(MODES, config.displacement_r, MODE_UPPER, MODE_OUT)?);
    GaussianChannel::chain(&chain)
}

fn readout_channel(readout: &Readout, explicit_gain: bool) -> Result<GaussianChannel> {
    let loss = GaussianChannel::loss(MODES, 1.0 - readout.loss, MODE_OUT)?;
    if explicit_gain {
        loss.then(&GaussianChannel::ideal_opa(MODES, from_db(readout.gain_db), MODE_OUT)?)
    } else {
        Ok(loss)
    }
}

/// Output levels `(S+, S-)` normalized to vacuum through the same readout.
fn read_out(
    config: &GateConfig,
    gate: &GaussianChannel,
    joint: &GaussianState,
    explicit_gain: bool,
) -> Result<(f64, f64)> {
    let readout = readout_channel(&config.readout, explicit_gain)?;
    let out = gate.then(&readout)?.apply(joint)?;
    let reference = readout.apply(&GaussianState::vacuum(MODES)?)?;
    let ratio = |sel: QuadratureSelector| -> Result<f64> { Ok(out.variance(sel)? / reference.variance(sel)?) };
    Ok((ratio(QuadratureSelector::p(MODE_OUT))?, ratio(QuadratureSelector::x(MODE_OUT))?))
}

fn run_with_phase(config: &GateConfig, input: &GaussianState, phase: f64, explicit_gain: bool) -> Result<GateOutcome> {
    config.validate()?;
    if input.num_modes() != 1 {
        return invalid(format!("gate input must be single-mode, got {} modes", input.num_modes()));
    }
    let joint = input.tensor(&ancilla_state(config)?);
    let blocked = gate_channel(config, None, phase)?;
    let (sp_pre, sm_pre) = read_out(config, &blocked, &joint, explicit_gain)?;
    if !config.feedforward_enabled {
        return Ok(GateOutcome::new(sp_pre, sm_pre, sp_pre, sm_pre));
    }
    let a = resolved_attenuation(config)?;
    let on = gate_channel(config, Some(a), phase)?;
    let (sp, sm) = read_out(config, &on, &joint, explicit_gain)?;
    Ok(GateOutcome::new(sp, sm, sp_pre, sm_pre))
}

/// Simulates the gate on a single-mode input.
pub fn run_gate(config: &GateConfig, input: &GaussianState) -> Result<GateOutcome> {
    run_with_phase(config, input, config.phase_error, config.readout.explicit_gain)
}

/// Same as [`run_gate`] with the readout amplifier forced on or off.
pub fn run_gate_with_readout_gain(
    config: &GateConfig,
    input: &GaussianState,
    explicit_gain: bool,
) -> Result<GateOutcome> {
    run_with_phase(config, input, config.phase_error, explicit_gain)
}

/// Ideal lossless gate output `(S-, S+) = (T + (1-T) e^{-2r}, 1/T)`.
pub fn ideal_output_variances(t: f64, r: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return invalid(format!("T must lie in (0, 1], got {t}"));
    }
    if !r.is_finite() {
        return invalid("r must be finite");
    }
    Ok((t + (1.0 - t) * (-2.0 * r).exp(), 1.0 / t))
}

/// Which ancilla squeezing enters the analytic prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AncillaConvention {
    /// The ancilla levels as configured.
    #[default]
    AsMeasured,
    /// Levels corrected for the readout loss `l3`, assuming the measured
    /// values already passed through it.
    ReadoutCorrected,
}

pub fn analytic_variances(config: &GateConfig) -> Result<GateOutcome> {
    analytic_variances_with(config, AncillaConvention::AsMeasured)
}

/// Lossy-gate prediction:
/// `S+ = (1-l3)(1/T + (1-T)/T * l2/(1-l2)) + l3`,
/// `S- = (1-l3)(T + (1-T) S-_anc) + l3`.
pub fn analytic_variances_with(config: &GateConfig, convention: AncillaConvention) -> Result<GateOutcome> {
    config.validate()?;
    let t = config.transmittance;
    let (l2, l3) = (config.opa2.loss, config.readout.loss);
    let mut anc = ancilla_levels(config)?;
    if convention == AncillaConvention::ReadoutCorrected {
        anc = SqueezingPair::new((anc.s_plus - l3) / (1.0 - l3), (anc.s_minus - l3) / (1.0 - l3))?;
    }
    let through = |v: f64| (1.0 - l3) * v + l3;
    let s_plus = through(1.0 / t + (1.0 - t) / t * l2 / (1.0 - l2));
    let s_minus = through(t + (1.0 - t) * anc.s_minus);
    let s_plus_pre = through(t + (1.0 - t) * anc.s_plus);
    Ok(GateOutcome::new(s_plus, s_minus, s_plus_pre, s_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "S_plus_dB")]
    pub s_plus_db: f64,
    #[serde(rename = "S_minus_dB")]
    pub s_minus_db: f64,
    pub product: f64,
    #[serde(rename = "S_plus_pre_dB")]
    pub s_plus_pre_db: f64,
    #[serde(rename = "S_minus_pre_dB")]
    pub s_minus_pre_db: f64,
    pub product_pre: f64,
    #[serde(rename = "analytic_S_plus_dB")]
    pub analytic_s_plus_db: f64,
    #[serde(rename = "analytic_S_minus_dB")]
    pub analytic_s_minus_db: f64,
}

pub fn sweep_point(config: &GateConfig, t: f64) -> Result<SweepRecord> {
    let cfg = config.with_transmittance(t);
    let sim = run_gate(&cfg, &GaussianState::vacuum(1)?)?;
    let ana = analytic_variances(&cfg)?;
    Ok(SweepRecord {
        t,
        s_plus_db: to_db(sim.s_plus)?,
        s_minus_db: to_db(sim.s_minus)?,
        product: sim.product,
        s_plus_pre_db: to_db(sim.s_plus_pre)?,
        s_minus_pre_db: to_db(sim.s_minus_pre)?,
        product_pre: sim.product_pre,
        analytic_s_plus_db: to_db(ana.s_plus)?,
        analytic_s_minus_db: to_db(ana.s_minus)?,
    })
}

/// One record per grid value, sorted ascending in `T`.
pub fn sweep_transmittance(config: &GateConfig, grid: &[f64], exec: Execution) -> Result<Vec<SweepRecord>> {
    let mut grid = grid.to_vec();
    if grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return invalid("every grid transmittance must lie in (0, 1]");
    }
    grid.sort_by(f64::total_cmp);
    map_ordered(&grid, exec, |&t| sweep_point(config, t)).into_iter().collect()
}

/// Residual ancilla anti-squeezing noise at the output with feedforward
/// on, relative to feedforward off, in dB.
///
/// The ancilla p quadrature reaches the output in both quadratures once the
/// feedforward beam is rotated, so the residual counts both:
/// `(c_pp^2 + c_xp^2) / c_pp,off^2`, where `c` are transfer coefficients
/// from ancilla p to output p and x. Equals `|1 - e^{i phi}|^2` for an exactly
/// tuned gate.
pub fn cancellation_level(config: &GateConfig, phase: f64) -> Result<f64> {
    let a = resolved_attenuation(config)?;
    let on = gate_channel(config, Some(a), phase)?;
    let off = gate_channel(config, None, phase)?;
    let c_pp = on.scale()[(IDX_OUT_P, IDX_ANC_P)];
    let c_xp = on.scale()[(IDX_OUT_X, IDX_ANC_P)];
    let c_off = off.scale()[(IDX_OUT_P, IDX_ANC_P)];
    if c_off == 0.0 {
        return invalid("no ancilla noise reaches the output without feedforward (T = 1)");
    }
    let ratio = (c_pp * c_pp + c_xp * c_xp) / (c_off * c_off);
    Ok(if ratio > 0.0 { to_db(ratio)?.max(CANCELLATION_FLOOR_DB) } else { CANCELLATION_FLOOR_DB })
}

/// Smallest phase error in `(0, max_phase]` at which the cancellation level
/// rises to `threshold_db`: bracketed on a uniform grid, then bisected.
pub fn cancellation_crossing(
    config: &GateConfig,
    threshold_db: f64,
    max_phase: f64,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 2 || !(max_phase > 0.0) {
        return invalid("crossing search needs >= 2 grid points and a positive range");
    }
    let f = |phi: f64| cancellation_level(config, phi).map(|l| l - threshold_db);
    let mut prev = (0.0, f(0.0)?);
    for k in 1..grid_points {
        let phi = max_phase * k as f64 / (grid_points - 1) as f64;
        let cur = (phi, f(phi)?);
        if prev.1 < 0.0 && cur.1 >= 0.0 {
            let (mut lo, mut hi) = (prev.0, cur.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = cur;
    }
    Err(Error::Infeasible(format!("cancellation level stays below {threshold_db} dB up to {max_phase} rad")))
}

/// Residual dispersion of the feedforward path and the analysis band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    /// Residual group delay (s).
    pub delta_tau: f64,
    /// Residual group-delay dispersion (s^2).
    pub gdd: f64,
    /// Bins with `|f|` below this (Hz) are excluded.
    pub mask_inner: f64,
    /// Bins with `|f|` above this (Hz) are excluded.
    pub mask_outer: f64,
}

impl Default for SpectralModel {
    fn default() -> Self {
        Self { delta_tau: 0.0, gdd: 0.0, mask_inner: 0.1e12, mask_outer: 1.3e12 }
    }
}

impl SpectralModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_tau.is_finite() && self.gdd.is_finite()) {
            return invalid("dispersion parameters must be finite");
        }
        if !(0.0 <= self.mask_inner && self.mask_inner < self.mask_outer) {
            return invalid(format!(
                "band masks need 0 <= inner < outer, got {} and {}",
                self.mask_inner, self.mask_outer
            ));
        }
        Ok(())
    }

    /// `phi(f) = 2 pi f delta_tau + gdd (2 pi f)^2 / 2`.
    pub fn phase(&self, f: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f;
        w * self.delta_tau + 0.5 * self.gdd * w * w
    }

    pub fn in_band(&self, f: f64) -> bool {
        (self.mask_inner..=self.mask_outer).contains(&f.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub f: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub cancellation_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandAverage {
    pub s_plus: f64,
    pub s_minus: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub points: Vec<SpectralPoint>,
    pub band: BandAverage,
}

/// Arithmetic mean of linear power over the in-band bins, both sidebands.
///
/// The model is symmetric in `±f`, so each positive bin stands for two.
pub fn band_average(points: &[SpectralPoint], model: &SpectralModel) -> Result<BandAverage> {
    let inside: Vec<&SpectralPoint> = points.iter().filter(|p| model.in_band(p.f)).collect();
    if inside.is_empty() {
        return Err(Error::EmptyBand(format!("no bins between {} Hz and {} Hz", model.mask_inner, model.mask_outer)));
    }
    let weight = 2.0 * inside.len() as f64;
    let s_plus = inside.iter().map(|p| 2.0 * p.s_plus).sum::<f64>() / weight;
    let s_minus = inside.iter().map(|p| 2.0 * p.s_minus).sum::<f64>() / weight;
    Ok(BandAverage { s_plus, s_minus, bins: inside.len() })
}

pub fn spectral_sweep(config: &GateConfig, model: &SpectralModel, f_grid: &[f64], exec: Execution) -> Result<Spectrum> {
    model.validate()?;
    if f_grid.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return invalid("spectral grid frequencies must be positive");
    }
    let vacuum = GaussianState::vacuum(1)?;
    let points: Vec<SpectralPoint> = map_ordered(f_grid, exec, |&f| {
        let phase = config.phase_error + model.phase(f);
        let out = run_with_phase(config, &vacuum, phase, config.readout.explicit_gain)?;
        let cancellation_db = if config.feedforward_enabled && config.transmittance < 1.0 {
            cancellation_level(config, phase)?
        } else {
            0.0
        };
        Ok(SpectralPoint { f, s_plus: out.s_plus, s_minus: out.s_minus, cancellation_db })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let band = band_average(&points, model)?;
    Ok(Spectrum { points, band })
}
