//! Lévy triplets and jump-measure specifications.
//!
//! A triplet holds the data `(ℓ, Q, N, c)` of the Lévy-Khinchine form at one
//! frozen state: drift, diffusion, jump measure and killing rate. The jump
//! measure is either absent, a compound-Poisson spec, a symmetric stable
//! measure (per axis in d dimensions), or a generic one-dimensional density.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::quad::{self, DensityTail, QuadError};

/// Numerical tolerance for "exact" identities (symmetry, A3, conjugation).
pub const EXACT_TOL: f64 = 1e-10;
/// Symmetry tolerance for the diffusion matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum SymbolError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("invalid jump measure: {0}")]
    InvalidJumpSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
}

/// Distribution of a single compound-Poisson jump.
#[derive(Clone)]
pub enum JumpDistribution {
    /// All jumps equal a fixed vector (a Dirac mass away from the origin).
    PointMass(DVector<f64>),
    /// One-dimensional Gaussian jump size.
    Gaussian { mean: f64, std: f64 },
}

impl fmt::Debug for JumpDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpDistribution::PointMass(a) => write!(f, "PointMass({:?})", a.as_slice()),
            JumpDistribution::Gaussian { mean, std } => {
                write!(f, "Gaussian {{ mean: {mean}, std: {std} }}")
            }
        }
    }
}

impl JumpDistribution {
    pub fn dim(&self) -> usize {
        match self {
            JumpDistribution::PointMass(a) => a.len(),
            JumpDistribution::Gaussian { .. } => 1,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), SymbolError> {
        match self {
            JumpDistribution::PointMass(a) => {
                if a.len() != dim {
                    return Err(SymbolError::DimensionMismatch { expected: dim, got: a.len() });
                }
                if !a.iter().all(|v| v.is_finite()) {
                    return Err(SymbolError::InvalidJumpSpec("point mass not finite".into()));
                }
                if a.norm() == 0.0 {
                    return Err(SymbolError::InvalidJumpSpec(
                        "jump distribution has an atom at the origin".into(),
                    ));
                }
                Ok(())
            }
            JumpDistribution::Gaussian { mean, std } => {
                if dim != 1 {
                    return Err(SymbolError::Unsupported(
                        "Gaussian jump sizes are one-dimensional".into(),
                    ));
                }
                if !(std.is_finite() && *std > 0.0 && mean.is_finite()) {
                    return Err(SymbolError::InvalidJumpSpec("Gaussian jump needs std > 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Characteristic function `E[e^{i ξ' Y}]`.
    pub fn cf(&self, xi: &DVector<f64>) -> Complex64 {
        match self {
            JumpDistribution::PointMass(a) => (Complex64::i() * xi.dot(a)).exp(),
            JumpDistribution::Gaussian { mean, std } => {
                let x = xi[0];
                (Complex64::new(-0.5 * std * std * x * x, mean * x)).exp()
            }
        }
    }

    /// `E[Y 1_{|Y| <= 1}]`, the compensated first moment inside the unit ball.
    pub fn mean_in_unit_ball(&self) -> DVector<f64> {
        match self {
            JumpDistribution::PointMass(a) => {
                if a.norm() <= 1.0 {
                    a.clone()
                } else {
                    DVector::zeros(a.len())
                }
            }
            JumpDistribution::Gaussian { mean, std } => {
                let n = Normal::new(*mean, *std).expect("validated");
                let std_n = Normal::new(0.0, 1.0).unwrap();
                let lo = (-1.0 - mean) / std;
                let hi = (1.0 - mean) / std;
                let v = mean * (n.cdf(1.0) - n.cdf(-1.0))
                    - std * (std_n.pdf(hi) - std_n.pdf(lo));
                DVector::from_element(1, v)
            }
        }
    }

    /// Probability density at `y`, for variants that have one.
    pub fn density(&self, y: f64) -> Option<f64> {
        match self {
            JumpDistribution::PointMass(_) => None,
            JumpDistribution::Gaussian { mean, std } => {
                Some(Normal::new(*mean, *std).expect("validated").pdf(y))
            }
        }
    }
}

/// Generic one-dimensional Lévy density with integrability hints.
#[derive(Clone)]
pub struct GenericMeasure {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tail: DensityTail,
}

impl fmt::Debug for GenericMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenericMeasure {{ tail: {:?} }}", self.tail)
    }
}

impl GenericMeasure {
    /// Registers a density `y ↦ n(y)` on `ℝ∖{0}`. Nonnegativity is spot-checked
    /// and both Lévy integrability conditions are verified by quadrature.
    pub fn new<F>(density: F, tail: DensityTail) -> Result<Self, SymbolError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let m = GenericMeasure { density: Arc::new(density), tail };
        for k in -24..=24 {
            let y = 2.0f64.powi(k);
            for s in [y, -y] {
                let v = (m.density)(s);
                if !v.is_finite() || v < 0.0 {
                    return Err(SymbolError::InvalidJumpSpec(format!(
                        "density must be finite and nonnegative, got {v} at y = {s}"
                    )));
                }
            }
        }
        let tail_mass = m.tail_mass(1.0)?;
        if !tail_mass.is_finite() {
            return Err(SymbolError::InvalidJumpSpec("tail mass not finite".into()));
        }
        let small = m.second_moment_below(1.0)?;
        if !small.is_finite() {
            return Err(SymbolError::InvalidJumpSpec(
                "∫_{|y|<=1} y^2 n(y) dy is not finite".into(),
            ));
        }
        Ok(m)
    }

    pub fn density_at(&self, y: f64) -> f64 {
        (self.density)(y)
    }

    pub fn tail(&self) -> DensityTail {
        self.tail
    }

    /// `N({|y| > eps})`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64, SymbolError> {
        let d = self.density.clone();
        let (pos, _) = quad::integrate_tail(|y| d(y), eps, 1e-11)?;
        let d = self.density.clone();
        let (neg, _) = quad::integrate_tail(move |y| d(-y), eps, 1e-11)?;
        Ok(pos + neg)
    }

    /// `∫_{|y| <= eps} y^2 n(y) dy`.
    pub fn second_moment_below(&self, eps: f64) -> Result<f64, SymbolError> {
        let d = self.density.clone();
        let (pos, _) = quad::integrate_to_zero(move |y| y * y * d(y), eps, 1e-11)?;
        let d = self.density.clone();
        let (neg, _) = quad::integrate_to_zero(move |y| y * y * d(-y), eps, 1e-11)?;
        Ok(pos + neg)
    }

    /// `∫_{eps < |y| <= 1} y n(y) dy` (signed), zero when `eps >= 1`.
    pub fn first_moment_ring(&self, eps: f64) -> Result<f64, SymbolError> {
        if eps >= 1.0 {
            return Ok(0.0);
        }
        let d = &self.density;
        let (pos, _) = quad::adaptive_gk(|y| y * d(y), eps, 1.0, 1e-11, 1e-13)?;
        let (neg, _) = quad::adaptive_gk(|y| y * d(y), -1.0, -eps, 1e-11, 1e-13)?;
        Ok(pos + neg)
    }
}

/// The jump-measure component of a triplet.
#[derive(Debug, Clone)]
pub enum JumpMeasureSpec {
    /// No jumps.
    None,
    /// Finite activity: Poisson-many iid jumps per unit time.
    CompoundPoisson { rate: f64, jumps: JumpDistribution },
    /// Symmetric α-stable measure with scale γ on each coordinate axis,
    /// so the jump part of the symbol is `γ^α Σ_j |ξ_j|^α`.
    SymmetricStable { alpha: f64, scale: f64 },
    /// Arbitrary one-dimensional density.
    Generic(GenericMeasure),
}

/// `J(α) = ∫_0^∞ (1 - cos u) u^{-1-α} du`, the half-line normalization of the
/// stable Lévy density (`π/2` at `α = 1`).
pub fn stable_half_line_integral(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-9 {
        std::f64::consts::FRAC_PI_2
    } else {
        gamma(2.0 - alpha) * (std::f64::consts::FRAC_PI_2 * alpha).cos()
            / (alpha * (1.0 - alpha))
    }
}

/// Constant `k` with `n(y) = k |y|^{-1-α}` giving the symbol `γ^α |ξ|^α`.
pub fn stable_density_constant(alpha: f64, scale: f64) -> f64 {
    scale.powf(alpha) / (2.0 * stable_half_line_integral(alpha))
}

impl JumpMeasureSpec {
    fn validate(&self, dim: usize) -> Result<(), SymbolError> {
        match self {
            JumpMeasureSpec::None => Ok(()),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(SymbolError::InvalidJumpSpec(format!(
                        "compound-Poisson rate must be positive and finite, got {rate}"
                    )));
                }
                jumps.validate(dim)
            }
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(SymbolError::InvalidJumpSpec(format!(
                        "stable index must lie strictly in (0, 2), got {alpha}"
                    )));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(SymbolError::InvalidJumpSpec(format!(
                        "stable scale must be positive, got {scale}"
                    )));
                }
                Ok(())
            }
            JumpMeasureSpec::Generic(_) => {
                if dim != 1 {
                    return Err(SymbolError::Unsupported(
                        "generic jump densities are one-dimensional".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, JumpMeasureSpec::None)
    }

    /// Closed-form jump contribution to the symbol,
    /// `-∫ (e^{iξ'y} - 1 - iξ'y 1_{|y|<=1}) N(dy)`, when the family has one.
    pub fn lk_term_closed(&self, xi: &DVector<f64>) -> Option<Complex64> {
        match self {
            JumpMeasureSpec::None => Some(Complex64::new(0.0, 0.0)),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => {
                let phi = jumps.cf(xi);
                let m1 = jumps.mean_in_unit_ball();
                Some(rate * (1.0 - phi) + Complex64::new(0.0, rate * xi.dot(&m1)))
            }
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                let s: f64 = xi.iter().map(|x| x.abs().powf(*alpha)).sum();
                Some(Complex64::new(scale.powf(*alpha) * s, 0.0))
            }
            JumpMeasureSpec::Generic(_) => None,
        }
    }

    /// Jump contribution evaluated through the generic numeric route: exact
    /// sums for atomic measures, split-at-the-unit-ball quadrature for
    /// densities. Returns the value and an error estimate.
    pub fn lk_term_quadrature(&self, xi: &DVector<f64>) -> Result<(Complex64, f64), SymbolError> {
        match self {
            JumpMeasureSpec::None => Ok((Complex64::new(0.0, 0.0), 0.0)),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => match jumps {
                JumpDistribution::PointMass(a) => {
                    let t = xi.dot(a);
                    let cutoff = if a.norm() <= 1.0 { t } else { 0.0 };
                    let integrand =
                        Complex64::new(t.cos() - 1.0, t.sin() - cutoff);
                    Ok((-rate * integrand, 1e-16 * rate))
                }
                JumpDistribution::Gaussian { .. } => {
                    let rate = *rate;
                    let jumps = jumps.clone();
                    let density = move |y: f64| rate * jumps.density(y).expect("gaussian");
                    let tail = DensityTail { tail_exponent: 50.0, monotone_from: 2.0 };
                    let (v, e) = quad::lk_jump_integral_1d(&density, &tail, xi[0], 1e-10)?;
                    Ok((v, e))
                }
            },
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                let k = stable_density_constant(*alpha, *scale);
                let expo = -1.0 - alpha;
                let density = move |y: f64| k * y.abs().powf(expo);
                let tail = DensityTail { tail_exponent: 1.0 + alpha, monotone_from: 0.0 };
                let mut total = Complex64::new(0.0, 0.0);
                let mut err = 0.0;
                for j in 0..xi.len() {
                    let (v, e) = quad::lk_jump_integral_1d(&density, &tail, xi[j], 1e-10)?;
                    total += v;
                    err += e;
                }
                Ok((total, err))
            }
            JumpMeasureSpec::Generic(m) => {
                let density = |y: f64| m.density_at(y);
                let (v, e) = quad::lk_jump_integral_1d(&density, &m.tail(), xi[0], 1e-10)?;
                Ok((v, e))
            }
        }
    }

    /// `N({|y| > eps})`, the big-jump rate at truncation level `eps`.
    pub fn tail_mass(&self, eps: f64, dim: usize) -> Result<f64, SymbolError> {
        match self {
            JumpMeasureSpec::None => Ok(0.0),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => match jumps {
                JumpDistribution::PointMass(a) => {
                    Ok(if a.norm() > eps { *rate } else { 0.0 })
                }
                JumpDistribution::Gaussian { mean, std } => {
                    let n = Normal::new(*mean, *std).expect("validated");
                    Ok(rate * (1.0 - (n.cdf(eps) - n.cdf(-eps))))
                }
            },
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                let k = stable_density_constant(*alpha, *scale);
                Ok(dim as f64 * 2.0 * k * eps.powf(-alpha) / alpha)
            }
            JumpMeasureSpec::Generic(m) => m.tail_mass(eps),
        }
    }

    /// `∫_{|y| <= eps} y^2 N(dy)` per axis (scalar; the measures here are
    /// per-axis or one-dimensional, so the small-jump covariance is diagonal).
    pub fn second_moment_below(&self, eps: f64) -> Result<f64, SymbolError> {
        match self {
            JumpMeasureSpec::None => Ok(0.0),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => match jumps {
                JumpDistribution::PointMass(a) => {
                    Ok(if a.norm() <= eps { rate * a.norm_squared() } else { 0.0 })
                }
                JumpDistribution::Gaussian { mean, std } => {
                    let rate = *rate;
                    let (mean, std) = (*mean, *std);
                    let n = Normal::new(mean, std).expect("validated");
                    let (v, _) =
                        quad::adaptive_gk(|y| y * y * n.pdf(y), -eps, eps, 1e-10, 1e-13)?;
                    Ok(rate * v)
                }
            },
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                let k = stable_density_constant(*alpha, *scale);
                Ok(2.0 * k * eps.powf(2.0 - alpha) / (2.0 - alpha))
            }
            JumpMeasureSpec::Generic(m) => m.second_moment_below(eps),
        }
    }

    /// Compensation drift `b(eps) = -∫_{eps < |y| <= 1} y N(dy)` (per axis).
    pub fn compensation_drift(&self, eps: f64) -> Result<f64, SymbolError> {
        match self {
            JumpMeasureSpec::None => Ok(0.0),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => match jumps {
                JumpDistribution::PointMass(a) => {
                    let r = a.norm();
                    Ok(if r > eps && r <= 1.0 { -rate * a[0] } else { 0.0 })
                }
                JumpDistribution::Gaussian { mean, std } => {
                    if eps >= 1.0 {
                        return Ok(0.0);
                    }
                    let n = Normal::new(*mean, *std).expect("validated");
                    let (pos, _) = quad::adaptive_gk(|y| y * n.pdf(y), eps, 1.0, 1e-10, 1e-13)?;
                    let (neg, _) =
                        quad::adaptive_gk(|y| y * n.pdf(y), -1.0, -eps, 1e-10, 1e-13)?;
                    Ok(-rate * (pos + neg))
                }
            },
            // symmetric by construction
            JumpMeasureSpec::SymmetricStable { .. } => Ok(0.0),
            JumpMeasureSpec::Generic(m) => Ok(-m.first_moment_ring(eps)?),
        }
    }

    /// A stable fingerprint of the parameters, used for sampler caching.
    pub fn fingerprint(&self, hasher: &mut impl std::hash::Hasher) {
        use std::hash::Hash;
        match self {
            JumpMeasureSpec::None => 0u8.hash(hasher),
            JumpMeasureSpec::CompoundPoisson { rate, jumps } => {
                1u8.hash(hasher);
                rate.to_bits().hash(hasher);
                match jumps {
                    JumpDistribution::PointMass(a) => {
                        for v in a.iter() {
                            v.to_bits().hash(hasher);
                        }
                    }
                    JumpDistribution::Gaussian { mean, std } => {
                        mean.to_bits().hash(hasher);
                        std.to_bits().hash(hasher);
                    }
                }
            }
            JumpMeasureSpec::SymmetricStable { alpha, scale } => {
                2u8.hash(hasher);
                alpha.to_bits().hash(hasher);
                scale.to_bits().hash(hasher);
            }
            JumpMeasureSpec::Generic(m) => {
                3u8.hash(hasher);
                (Arc::as_ptr(&m.density) as *const () as usize).hash(hasher);
            }
        }
    }
}

/// Drift, diffusion, jump measure and killing rate at one frozen state.
#[derive(Debug, Clone)]
pub struct LevyTriplet {
    drift: DVector<f64>,
    diffusion: DMatrix<f64>,
    jumps: JumpMeasureSpec,
    killing: f64,
}

impl LevyTriplet {
    pub fn new(
        drift: DVector<f64>,
        diffusion: DMatrix<f64>,
        jumps: JumpMeasureSpec,
        killing: f64,
    ) -> Result<Self, SymbolError> {
        let d = drift.len();
        if diffusion.nrows() != d || diffusion.ncols() != d {
            return Err(SymbolError::DimensionMismatch { expected: d, got: diffusion.nrows() });
        }
        if !drift.iter().all(|v| v.is_finite()) || !diffusion.iter().all(|v| v.is_finite()) {
            return Err(SymbolError::InvalidTriplet("non-finite coefficients".into()));
        }
        let asym = (&diffusion - diffusion.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(SymbolError::InvalidTriplet(format!(
                "diffusion matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let eigs = diffusion.clone().symmetric_eigen().eigenvalues;
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -EXACT_TOL {
                return Err(SymbolError::InvalidTriplet(format!(
                    "diffusion matrix has eigenvalue {min:.3e} below -1e-10"
                )));
            }
        }
        if !(killing.is_finite() && killing >= 0.0) {
            return Err(SymbolError::InvalidTriplet(format!(
                "killing rate must be nonnegative, got {killing}"
            )));
        }
        jumps.validate(d)?;
        Ok(LevyTriplet { drift, diffusion, jumps, killing })
    }

    /// Pure-diffusion triplet with unit covariance.
    pub fn standard_brownian(dim: usize) -> Self {
        LevyTriplet {
            drift: DVector::zeros(dim),
            diffusion: DMatrix::identity(dim, dim),
            jumps: JumpMeasureSpec::None,
            killing: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    pub fn jumps(&self) -> &JumpMeasureSpec {
        &self.jumps
    }

    pub fn killing(&self) -> f64 {
        self.killing
    }

    /// Symbol value `c - iℓ'ξ + ξ'Qξ/2 + jump term` with the jump term taken
    /// from the closed form when the family has one, else from quadrature.
    pub fn symbol_value(&self, xi: &DVector<f64>) -> Result<Complex64, SymbolError> {
        let jump = match self.jumps.lk_term_closed(xi) {
            Some(v) => v,
            Option::None => self.jumps.lk_term_quadrature(xi)?.0,
        };
        Ok(self.local_part(xi) + jump)
    }

    /// Symbol value forcing the numeric route for the jump term.
    pub fn symbol_value_quadrature(&self, xi: &DVector<f64>) -> Result<Complex64, SymbolError> {
        let (jump, _) = self.jumps.lk_term_quadrature(xi)?;
        Ok(self.local_part(xi) + jump)
    }

    fn local_part(&self, xi: &DVector<f64>) -> Complex64 {
        let quad_form = 0.5 * xi.dot(&(&self.diffusion * xi));
        Complex64::new(self.killing + quad_form, -self.drift.dot(xi))
    }

    pub fn fingerprint_value(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in self.drift.iter() {
            v.to_bits().hash(&mut h);
        }
        for v in self.diffusion.iter() {
            v.to_bits().hash(&mut h);
        }
        self.killing.to_bits().hash(&mut h);
        self.jumps.fingerprint(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    // Frozen against an independent numerical evaluation of
    // ∫_0^∞ (1 - cos u) u^{-1-α} du.
    #[test]
    fn stable_normalization_matches_frozen_values() {
        let cases = [
            (0.5, 2.50662827463),
            (0.9, 1.65360054166),
            (1.0, std::f64::consts::FRAC_PI_2),
            (1.5, 1.67108551642),
            (1.9, 5.494959434),
        ];
        for (alpha, expected) in cases {
            let got = stable_half_line_integral(alpha);
            assert!(
                (got - expected).abs() < 1e-8 * expected,
                "J({alpha}) = {got}, want {expected}"
            );
        }
    }

    #[test]
    fn stable_quadrature_reproduces_power_symbol() {
        let spec = JumpMeasureSpec::SymmetricStable { alpha: 1.5, scale: 1.0 };
        for xi in [0.3, 1.0, 7.0] {
            let (v, _) = spec.lk_term_quadrature(&dvector![xi]).unwrap();
            let want = xi.abs().powf(1.5);
            assert!((v.re - want).abs() < 1e-7 * (1.0 + want), "got {v}, want {want}");
            assert!(v.im.abs() < 1e-8);
        }
    }

    // Point mass at 1 with rate 1: q(ξ) = (1 - e^{iξ}) + iξ, hand-evaluated at
    // ξ = π where it equals 2 + iπ.
    #[test]
    fn compound_poisson_point_mass_closed_and_quadrature_agree() {
        let spec = JumpMeasureSpec::CompoundPoisson {
            rate: 1.0,
            jumps: JumpDistribution::PointMass(dvector![1.0]),
        };
        let xi = dvector![std::f64::consts::PI];
        let closed = spec.lk_term_closed(&xi).unwrap();
        let (num, _) = spec.lk_term_quadrature(&xi).unwrap();
        assert!((closed.re - 2.0).abs() < 1e-14);
        assert!((closed.im - std::f64::consts::PI).abs() < 1e-14);
        assert!((closed - num).norm() < 1e-12);
    }

    #[test]
    fn gaussian_jump_truncated_mean_matches_quadrature() {
        let dist = JumpDistribution::Gaussian { mean: 0.3, std: 0.8 };
        let m1 = dist.mean_in_unit_ball()[0];
        let n = Normal::new(0.3, 0.8).unwrap();
        let (brute, _) = quad::adaptive_gk(|y| y * n.pdf(y), -1.0, 1.0, 1e-12, 1e-14).unwrap();
        assert!((m1 - brute).abs() < 1e-10, "closed {m1}, quadrature {brute}");
    }

    #[test]
    fn triplet_rejects_asymmetric_or_indefinite_diffusion() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(LevyTriplet::new(
            DVector::zeros(2),
            asym,
            JumpMeasureSpec::None,
            0.0
        )
        .is_err());

        let negdef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(LevyTriplet::new(
            DVector::zeros(2),
            negdef,
            JumpMeasureSpec::None,
            0.0
        )
        .is_err());

        assert!(LevyTriplet::new(
            DVector::zeros(1),
            DMatrix::identity(1, 1),
            JumpMeasureSpec::None,
            -1.0
        )
        .is_err());
    }

    #[test]
    fn jump_spec_rejects_bad_parameters() {
        assert!(JumpMeasureSpec::SymmetricStable { alpha: 2.0, scale: 1.0 }
            .validate(1)
            .is_err());
        assert!(JumpMeasureSpec::SymmetricStable { alpha: 0.0, scale: 1.0 }
            .validate(1)
            .is_err());
        assert!(JumpMeasureSpec::CompoundPoisson {
            rate: -1.0,
            jumps: JumpDistribution::PointMass(dvector![1.0]),
        }
        .validate(1)
        .is_err());
        assert!(JumpMeasureSpec::CompoundPoisson {
            rate: 1.0,
            jumps: JumpDistribution::PointMass(dvector![0.0]),
        }
        .validate(1)
        .is_err());
    }

    #[test]
    fn generic_measure_queries_match_power_law_closed_forms() {
        // n(y) = |y|^{-2.5}: tail mass 2 eps^{-1.5}/1.5, second moment 4 sqrt(eps).
        let m = GenericMeasure::new(
            |y: f64| y.abs().powf(-2.5),
            DensityTail { tail_exponent: 2.5, monotone_from: 0.0 },
        )
        .unwrap();
        let eps = 0.25;
        let tm = m.tail_mass(eps).unwrap();
        let want = 2.0 * eps.powf(-1.5) / 1.5;
        assert!((tm - want).abs() < 1e-7 * want, "tail mass {tm} vs {want}");
        let sm = m.second_moment_below(eps).unwrap();
        let want = 4.0 * eps.sqrt();
        assert!((sm - want).abs() < 1e-7 * want, "second moment {sm} vs {want}");
        // symmetric density: no compensation
        assert!(m.first_moment_ring(eps).unwrap().abs() < 1e-10);
    }

    #[test]
    fn generic_measure_rejects_non_levy_density() {
        // |y|^{-3.2} is not integrable against y^2 at the origin.
        let r = GenericMeasure::new(
            |y: f64| y.abs().powf(-3.2),
            DensityTail { tail_exponent: 3.2, monotone_from: 0.0 },
        );
        assert!(r.is_err());
    }
}
