//! Gaussian states and Gaussian channels on `M` bosonic modes.
//!
//! A state is a mean vector of length `2M` and a `2M x 2M` covariance
//! matrix in `(x1, p1, x2, p2, ...)` ordering. A channel is an affine map
//! `cov -> X cov X^T + Y`, `mean -> X mean`, which covers symplectic
//! unitaries (`Y = 0`) as well as attenuation and lossy amplification.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Variance of either quadrature of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Absolute tolerance on symplectic eigenvalues (`nu >= 1/2 - tol`).
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Tolerance for the complete-positivity test of a channel.
pub const CP_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    P,
}

impl Axis {
    fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::P => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureSelector {
    pub mode: usize,
    pub axis: Axis,
}

impl QuadratureSelector {
    pub fn x(mode: usize) -> Self {
        Self { mode, axis: Axis::X }
    }

    pub fn p(mode: usize) -> Self {
        Self { mode, axis: Axis::P }
    }

    fn index(self) -> usize {
        2 * self.mode + self.axis.offset()
    }
}

/// Standard symplectic form, block diagonal with `[[0, 1], [-1, 0]]` blocks.
pub fn symplectic_form(num_modes: usize) -> Matrix {
    let n = 2 * num_modes;
    let mut omega = Matrix::zeros(n, n);
    for k in 0..num_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Shot-noise-normalized variance: `v / (1/2)`.
pub fn shot_normalized(variance: f64) -> f64 {
    variance / VACUUM_VARIANCE
}

/// `10 log10(ratio)`.
pub fn to_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return invalid(format!("dB conversion needs a positive finite ratio, got {ratio}"));
    }
    Ok(10.0 * ratio.log10())
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Row-major plain-text dump with 17 significant digits.
pub fn format_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite, got {v}"))
    }
}

fn check_mode(num_modes: usize, mode: usize) -> Result<()> {
    if mode < num_modes {
        Ok(())
    } else {
        invalid(format!("mode index {mode} out of range for {num_modes} modes"))
    }
}

/// Symmetric matrix square root of a positive definite matrix, or `None`
/// when an eigenvalue is not strictly positive.
fn sqrtm_spd(m: &Matrix) -> Option<Matrix> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    num_modes: usize,
    mean: Vector,
    cov: Matrix,
}

impl GaussianState {
    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return invalid("a state needs at least one mode");
        }
        let n = 2 * num_modes;
        Ok(Self { num_modes, mean: Vector::zeros(n), cov: Matrix::identity(n, n) * VACUUM_VARIANCE })
    }

    /// Single-mode squeezed vacuum with `Var(x) = e^{-2r}/2`, `Var(p) = e^{2r}/2`.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        check_finite("squeezing parameter r", r)?;
        let mut state = Self::vacuum(1)?;
        state.cov[(0, 0)] = VACUUM_VARIANCE * (-2.0 * r).exp();
        state.cov[(1, 1)] = VACUUM_VARIANCE * (2.0 * r).exp();
        Ok(state)
    }

    /// Builds a state from raw parts, rejecting asymmetric or unphysical
    /// covariance matrices.
    pub fn from_parts(mean: Vector, cov: Matrix) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 || !n.is_multiple_of(2) || cov.ncols() != n || mean.len() != n {
            return invalid(format!(
                "inconsistent state dimensions: mean {}, cov {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            ));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return invalid("state entries must be finite");
        }
        for i in 0..n {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL {
                    return invalid(format!("covariance not symmetric at ({i}, {j})"));
                }
            }
        }
        let state = Self { num_modes: n / 2, mean, cov };
        let nu = state.min_symplectic_eigenvalue();
        if nu < VACUUM_VARIANCE - state.physicality_tolerance() {
            return invalid(format!("unphysical covariance: minimum symplectic eigenvalue {nu}"));
        }
        Ok(state)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    /// Joint state of `self` (first modes) and `other` (following modes).
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n1, n2) = (self.mean.len(), other.mean.len());
        let mut mean = Vector::zeros(n1 + n2);
        mean.rows_mut(0, n1).copy_from(&self.mean);
        mean.rows_mut(n1, n2).copy_from(&other.mean);
        let mut cov = Matrix::zeros(n1 + n2, n1 + n2);
        cov.view_mut((0, 0), (n1, n1)).copy_from(&self.cov);
        cov.view_mut((n1, n1), (n2, n2)).copy_from(&other.cov);
        GaussianState { num_modes: self.num_modes + other.num_modes, mean, cov }
    }

    /// Marginal state of a single mode.
    pub fn reduced(&self, mode: usize) -> Result<GaussianState> {
        check_mode(self.num_modes, mode)?;
        Ok(GaussianState {
            num_modes: 1,
            mean: self.mean.rows(2 * mode, 2).into_owned(),
            cov: self.cov.view((2 * mode, 2 * mode), (2, 2)).into_owned(),
        })
    }

    pub fn variance(&self, sel: QuadratureSelector) -> Result<f64> {
        check_mode(self.num_modes, sel.mode)?;
        let i = sel.index();
        Ok(self.cov[(i, i)])
    }

    pub fn shot_normalized_variance(&self, sel: QuadratureSelector) -> Result<f64> {
        self.variance(sel).map(shot_normalized)
    }

    /// Symplectic eigenvalues in ascending order, one per mode.
    ///
    /// Computed as the singular values of `V^{1/2} Omega V^{1/2}`. Returns all
    /// zeros when the covariance is not positive definite, which is always
    /// unphysical.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let Some(root) = sqrtm_spd(&self.cov) else {
            return vec![0.0; self.num_modes];
        };
        let omega = symplectic_form(self.num_modes);
        let m = &root * omega * &root;
        let k = m.transpose() * &m;
        let mut ev: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.chunks(2).map(|pair| pair[0].max(pair[1]).max(0.0).sqrt()).collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `det(2 V)`, equal to 1 for pure states.
    pub fn normalized_determinant(&self) -> f64 {
        (&self.cov * 2.0).determinant()
    }

    /// Absolute 1e-9 plus a rounding allowance proportional to the
    /// covariance magnitude, since eigenvalue errors scale with `|V|`.
    pub fn physicality_tolerance(&self) -> f64 {
        PHYSICALITY_TOL + 64.0 * f64::EPSILON * max_abs(&self.cov)
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= VACUUM_VARIANCE - self.physicality_tolerance()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    num_modes: usize,
    scale: Matrix,
    noise: Matrix,
}

impl GaussianChannel {
    pub fn identity(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return invalid("a channel needs at least one mode");
        }
        let n = 2 * num_modes;
        Ok(Self { num_modes, scale: Matrix::identity(n, n), noise: Matrix::zeros(n, n) })
    }

    /// Builds a channel from raw matrices; no complete-positivity check is
    /// made here, see [`GaussianChannel::is_completely_positive`].
    pub fn from_parts(scale: Matrix, noise: Matrix) -> Result<Self> {
        let n = scale.nrows();
        if n == 0 || !n.is_multiple_of(2) || scale.ncols() != n || noise.shape() != (n, n) {
            return invalid("channel matrices must be square, even-sized and of equal shape");
        }
        Ok(Self { num_modes: n / 2, scale, noise })
    }

    /// Channel acting on one mode's `(x, p)` block, identity elsewhere.
    pub fn single_mode(num_modes: usize, mode: usize, scale: [[f64; 2]; 2], noise: [[f64; 2]; 2]) -> Result<Self> {
        check_mode(num_modes, mode)?;
        let mut ch = Self::identity(num_modes)?;
        for i in 0..2 {
            for j in 0..2 {
                ch.scale[(2 * mode + i, 2 * mode + j)] = scale[i][j];
                ch.noise[(2 * mode + i, 2 * mode + j)] = noise[i][j];
            }
        }
        Ok(ch)
    }

    /// Beam splitter with transmission `t`:
    /// `a' = sqrt(1-t) a - sqrt(t) b`, `b' = sqrt(t) a + sqrt(1-t) b`,
    /// identically on x and p.
    pub fn beam_splitter(num_modes: usize, t: f64, mode_a: usize, mode_b: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return invalid(format!("beam splitter transmission must lie in [0, 1], got {t}"));
        }
        check_mode(num_modes, mode_a)?;
        check_mode(num_modes, mode_b)?;
        if mode_a == mode_b {
            return invalid("beam splitter needs two distinct modes");
        }
        let (c, s) = ((1.0 - t).sqrt(), t.sqrt());
        let mut ch = Self::identity(num_modes)?;
        for q in 0..2 {
            let (ia, ib) = (2 * mode_a + q, 2 * mode_b + q);
            ch.scale[(ia, ia)] = c;
            ch.scale[(ia, ib)] = -s;
            ch.scale[(ib, ia)] = s;
            ch.scale[(ib, ib)] = c;
        }
        Ok(ch)
    }

    /// Phase-sensitive amplifier with p-quadrature power gain `gain >= 1`.
    pub fn ideal_opa(num_modes: usize, gain: f64, mode: usize) -> Result<Self> {
        if !gain.is_finite() || gain < 1.0 {
            return invalid(format!("OPA gain must be finite and >= 1, got {gain}"));
        }
        let g = gain.sqrt();
        Self::single_mode(num_modes, mode, [[1.0 / g, 0.0], [0.0, g]], [[0.0; 2]; 2])
    }

    /// Pure attenuation with power transmission `eta`.
    pub fn loss(num_modes: usize, eta: f64, mode: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return invalid(format!("loss transmission must lie in [0, 1], got {eta}"));
        }
        let s = eta.sqrt();
        let n = (1.0 - eta) * VACUUM_VARIANCE;
        Self::single_mode(num_modes, mode, [[s, 0.0], [0.0, s]], [[n, 0.0], [0.0, n]])
    }

    /// Rotation `a -> a e^{i theta}`.
    pub fn phase_rotation(num_modes: usize, theta: f64, mode: usize) -> Result<Self> {
        check_finite("phase rotation angle", theta)?;
        let (s, c) = theta.sin_cos();
        Self::single_mode(num_modes, mode, [[c, -s], [s, c]], [[0.0; 2]; 2])
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn scale(&self) -> &Matrix {
        &self.scale
    }

    pub fn noise(&self) -> &Matrix {
        &self.noise
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &GaussianChannel) -> Result<GaussianChannel> {
        if self.num_modes != next.num_modes {
            return invalid(format!("cannot compose channels on {} and {} modes", self.num_modes, next.num_modes));
        }
        let scale = &next.scale * &self.scale;
        let mut noise = &next.scale * &self.noise * next.scale.transpose() + &next.noise;
        noise = (&noise + noise.transpose()) * 0.5;
        Ok(GaussianChannel { num_modes: self.num_modes, scale, noise })
    }

    /// Composes a chain of channels applied in order.
    pub fn chain<'a>(channels: impl IntoIterator<Item = &'a GaussianChannel>) -> Result<GaussianChannel> {
        let mut iter = channels.into_iter();
        let Some(first) = iter.next() else {
            return invalid("empty channel chain");
        };
        iter.try_fold(first.clone(), |acc, ch| acc.then(ch))
    }

    /// Applies the channel; the result is checked for physicality.
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.num_modes != self.num_modes {
            return invalid(format!("channel acts on {} modes but state has {}", self.num_modes, state.num_modes));
        }
        let mean = &self.scale * &state.mean;
        let mut cov = &self.scale * &state.cov * self.scale.transpose() + &self.noise;
        cov = (&cov + cov.transpose()) * 0.5;
        let out = GaussianState { num_modes: state.num_modes, mean, cov };
        let nu = out.min_symplectic_eigenvalue();
        if nu < VACUUM_VARIANCE - out.physicality_tolerance() {
            return Err(Error::Internal(format!("channel output is unphysical: minimum symplectic eigenvalue {nu}")));
        }
        Ok(out)
    }

    /// `max |X Omega X^T - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.num_modes);
        max_abs(&(&self.scale * &omega * self.scale.transpose() - omega))
    }

    /// Smallest eigenvalue of `Y + (i/2)(Omega - X Omega X^T)`.
    ///
    /// The Hermitian matrix `A + iB` is positive semidefinite iff the real
    /// matrix `[[A, -B], [B, A]]` is.
    pub fn cp_min_eigenvalue(&self) -> f64 {
        let n = 2 * self.num_modes;
        let omega = symplectic_form(self.num_modes);
        let b = (&omega - &self.scale * &omega * self.scale.transpose()) * 0.5;
        let mut big = Matrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.noise);
        big.view_mut((n, n), (n, n)).copy_from(&self.noise);
        big.view_mut((0, n), (n, n)).copy_from(&(-&b));
        big.view_mut((n, 0), (n, n)).copy_from(&b);
        SymmetricEigen::new(big).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_completely_positive(&self) -> bool {
        self.cp_min_eigenvalue() >= -CP_TOL
    }
}
