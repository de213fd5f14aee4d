//! Calibration arithmetic: loss inference from a squeezing pair, loss
//! budgets, path-length tolerances and the squeezing product.

use crate::error::{invalid, Error, Result};
use crate::gaussian::from_db;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

const DEGENERACY_TOL: f64 = 1e-12;
/// Pure states can round to a slightly negative loss.
const LOSS_ROUNDING_TOL: f64 = 1e-9;

/// Shot-noise-normalized anti-squeezing and squeezing levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingPair {
    pub s_plus: f64,
    pub s_minus: f64,
}

impl SqueezingPair {
    pub fn new(s_plus: f64, s_minus: f64) -> Result<Self> {
        if !(s_plus > 0.0 && s_minus > 0.0) || !s_plus.is_finite() || !s_minus.is_finite() {
            return invalid(format!("squeezing levels must be positive, got ({s_plus}, {s_minus})"));
        }
        Ok(Self { s_plus, s_minus })
    }

    /// From quoted magnitudes: `+a dB` anti-squeezing and `s dB` squeezing,
    /// where a squeezing of "3.6 dB" means `S- = 10^{-0.36}`. Signs are
    /// ignored.
    pub fn from_db_magnitudes(anti_squeezing_db: f64, squeezing_db: f64) -> Result<Self> {
        Self::new(from_db(anti_squeezing_db.abs()), from_db(-squeezing_db.abs()))
    }

    /// Levels of a squeezed vacuum `r` after a lumped loss `loss`.
    pub fn from_model(loss: f64, r: f64) -> Self {
        let t = 1.0 - loss;
        Self { s_plus: t * (2.0 * r).exp() + loss, s_minus: t * (-2.0 * r).exp() + loss }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossInference {
    pub loss: f64,
    pub r: f64,
    /// Max absolute difference between the forward model and the input pair.
    pub residual: f64,
}

/// Solves `S± = (1-L) e^{±2r} + L` for `(L, r)`.
pub fn infer_loss_and_r(pair: &SqueezingPair) -> Result<LossInference> {
    let (mut sp, mut sm) = (pair.s_plus, pair.s_minus);
    if sp < sm {
        std::mem::swap(&mut sp, &mut sm);
    }
    let denom = sp + sm - 2.0;
    if denom.abs() < DEGENERACY_TOL {
        return Err(Error::Degenerate(format!(
            "S+ + S- = 2 (got {sp}, {sm}); loss and squeezing are not identifiable"
        )));
    }
    if sm > 1.0 || sp < 1.0 {
        return Err(Error::InconsistentMeasurement(format!("levels ({sp}, {sm}) do not straddle shot noise")));
    }
    let mut loss = (sp * sm - 1.0) / denom;
    if (-LOSS_ROUNDING_TOL..0.0).contains(&loss) {
        loss = 0.0;
    }
    if !(0.0..1.0).contains(&loss) {
        return Err(Error::InconsistentMeasurement(format!("inferred loss {loss} outside [0, 1)")));
    }
    let r = 0.5 * ((sp - loss) / (1.0 - loss)).ln();
    let fwd = SqueezingPair::from_model(loss, r);
    let residual = (fwd.s_plus - sp).abs().max((fwd.s_minus - sm).abs());
    Ok(LossInference { loss, r, residual })
}

/// Ordered list of labelled transmittances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossBudget {
    items: Vec<(String, f64)>,
}

impl LossBudget {
    pub fn new(items: Vec<(String, f64)>) -> Result<Self> {
        for (label, t) in &items {
            if !(*t > 0.0 && *t <= 1.0) {
                return invalid(format!("transmittance of '{label}' must lie in (0, 1], got {t}"));
            }
        }
        Ok(Self { items })
    }

    pub fn from_transmittances(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().enumerate().map(|(i, &t)| (format!("stage {}", i + 1), t)).collect())
    }

    pub fn items(&self) -> &[(String, f64)] {
        &self.items
    }
}

/// Returns `(total transmittance, total loss)`.
pub fn loss_budget_product(budget: &LossBudget) -> Result<(f64, f64)> {
    if budget.items.is_empty() {
        return invalid("loss budget is empty");
    }
    let t: f64 = budget.items.iter().map(|(_, t)| t).product();
    Ok((t, 1.0 - t))
}

/// Path length corresponding to `tolerance_degrees` of phase at frequency `f`.
pub fn path_precision(frequency_hz: f64, tolerance_degrees: f64) -> Result<f64> {
    if !(frequency_hz > 0.0) || !(tolerance_degrees > 0.0) {
        return invalid("frequency and tolerance must be positive");
    }
    Ok(SPEED_OF_LIGHT / frequency_hz * tolerance_degrees / 360.0)
}

pub fn product_metric(pair: &SqueezingPair) -> f64 {
    pair.s_plus * pair.s_minus
}
