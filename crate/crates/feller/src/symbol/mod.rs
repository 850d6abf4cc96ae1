//! State-dependent symbols `q(x, ξ)`.
//!
//! A symbol assigns to every state `x` a continuous negative definite function
//! of `ξ`, represented by its Lévy triplet and, when available, a closed-form
//! evaluator. Freezing the symbol at the current state is what turns one Euler
//! step into a Lévy increment, so everything downstream (sampling, stepping,
//! validation) consumes these objects.

mod checks;
mod triplet;

pub use checks::{
    check_condition_a2, check_condition_a3, check_structural, default_x_grid, default_xi_grid,
    self_check_closed_form, ConditionReport, ConditionTag, Witness,
};
pub use triplet::{
    stable_density_constant, stable_half_line_integral, GenericMeasure, JumpDistribution,
    JumpMeasureSpec, LevyTriplet, SymbolError, EXACT_TOL,
};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::quad::DensityTail;

/// Built-in family tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Brownian,
    StableLike,
    LevyConstant,
    SdeDriven,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Brownian => "brownian",
            Family::StableLike => "stable_like",
            Family::LevyConstant => "levy_constant",
            Family::SdeDriven => "sde_driven",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

type TripletFn = Arc<dyn Fn(&DVector<f64>) -> LevyTriplet + Send + Sync>;
type ClosedFormFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> Complex64 + Send + Sync>;

/// The map `x ↦ (triplet at x)` plus an optional closed-form evaluator.
///
/// Immutable after construction; evaluation is pure and safe to share across
/// threads.
#[derive(Clone)]
pub struct StateDependentSymbol {
    dim: usize,
    family: Family,
    name: String,
    params: Vec<(String, f64)>,
    triplet_at: Option<TripletFn>,
    closed_form: Option<ClosedFormFn>,
}

impl fmt::Debug for StateDependentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateDependentSymbol")
            .field("dim", &self.dim)
            .field("family", &self.family)
            .field("name", &self.name)
            .field("params", &self.params)
            .field("has_triplet", &self.triplet_at.is_some())
            .field("has_closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl StateDependentSymbol {
    /// Standard Brownian symbol `q(x, ξ) = |ξ|^2 / 2` in `dim` dimensions.
    pub fn brownian(dim: usize) -> Self {
        let triplet = LevyTriplet::standard_brownian(dim);
        StateDependentSymbol {
            dim,
            family: Family::Brownian,
            name: "brownian".into(),
            params: vec![("dim".into(), dim as f64)],
            triplet_at: Some(Arc::new(move |_x| triplet.clone())),
            closed_form: Some(Arc::new(|_x, xi: &DVector<f64>| {
                Complex64::new(0.5 * xi.norm_squared(), 0.0)
            })),
        }
    }

    /// Constant drift-diffusion symbol `q(ξ) = -i ℓ'ξ + ξ'Qξ/2`.
    pub fn brownian_with(drift: DVector<f64>, diffusion: DMatrix<f64>) -> Result<Self, SymbolError> {
        let dim = drift.len();
        let triplet = LevyTriplet::new(drift.clone(), diffusion.clone(), JumpMeasureSpec::None, 0.0)?;
        Ok(StateDependentSymbol {
            dim,
            family: Family::Brownian,
            name: "brownian_with".into(),
            params: vec![("dim".into(), dim as f64)],
            triplet_at: Some(Arc::new(move |_x| triplet.clone())),
            closed_form: Some(Arc::new(move |_x, xi: &DVector<f64>| {
                Complex64::new(0.5 * xi.dot(&(&diffusion * xi)), -drift.dot(xi))
            })),
        })
    }

    /// State-independent symbol from an explicit triplet.
    pub fn levy_constant(name: &str, triplet: LevyTriplet) -> Self {
        let dim = triplet.dim();
        let closed = if has_closed_jump(triplet.jumps()) {
            let t = triplet.clone();
            Some(Arc::new(move |_x: &DVector<f64>, xi: &DVector<f64>| {
                t.symbol_value(xi).expect("closed-form jump term cannot fail")
            }) as ClosedFormFn)
        } else {
            None
        };
        StateDependentSymbol {
            dim,
            family: Family::LevyConstant,
            name: name.into(),
            params: Vec::new(),
            triplet_at: Some(Arc::new(move |_x| triplet.clone())),
            closed_form: closed,
        }
    }

    /// Symmetric α-stable symbol `q(ξ) = γ^α Σ_j |ξ_j|^α`.
    pub fn symmetric_stable(dim: usize, alpha: f64, scale: f64) -> Result<Self, SymbolError> {
        let triplet = LevyTriplet::new(
            DVector::zeros(dim),
            DMatrix::zeros(dim, dim),
            JumpMeasureSpec::SymmetricStable { alpha, scale },
            0.0,
        )?;
        let mut sym = Self::levy_constant("symmetric_stable", triplet);
        sym.params = vec![("alpha".into(), alpha), ("gamma".into(), scale)];
        Ok(sym)
    }

    /// Cauchy symbol `q(ξ) = γ |ξ|` (α = 1).
    pub fn cauchy(scale: f64) -> Result<Self, SymbolError> {
        let mut sym = Self::symmetric_stable(1, 1.0, scale)?;
        sym.name = "cauchy".into();
        Ok(sym)
    }

    /// Compound-Poisson symbol `q(ξ) = λ(1 - φ(ξ)) + iλ ξ'E[Y 1_{|Y|<=1}]`.
    pub fn compound_poisson(rate: f64, jumps: JumpDistribution) -> Result<Self, SymbolError> {
        let dim = jumps.dim();
        let triplet = LevyTriplet::new(
            DVector::zeros(dim),
            DMatrix::zeros(dim, dim),
            JumpMeasureSpec::CompoundPoisson { rate, jumps },
            0.0,
        )?;
        let mut sym = Self::levy_constant("compound_poisson", triplet);
        sym.params = vec![("lambda".into(), rate)];
        Ok(sym)
    }

    /// Stable-like symbol `q(x, ξ) = γ^{α(x)} |ξ|^{α(x)}` in one dimension.
    ///
    /// The index function must take values in a compact subset of `(0, 2)`;
    /// this is spot-checked on a wide probe grid at construction.
    pub fn stable_like<F>(alpha: F, scale: f64) -> Result<Self, SymbolError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let alpha = Arc::new(alpha);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=400 {
            let x = -100.0 + i as f64 * 0.5;
            let a = alpha(x);
            if !(a > 0.0 && a < 2.0) {
                return Err(SymbolError::InvalidJumpSpec(format!(
                    "stable-like index must stay in (0, 2); alpha({x}) = {a}"
                )));
            }
            lo = lo.min(a);
            hi = hi.max(a);
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(SymbolError::InvalidJumpSpec(format!(
                "stable-like scale must be positive, got {scale}"
            )));
        }
        let a1 = alpha.clone();
        let a2 = alpha.clone();
        Ok(StateDependentSymbol {
            dim: 1,
            family: Family::StableLike,
            name: "stable_like".into(),
            params: vec![("alpha_min".into(), lo), ("alpha_max".into(), hi), ("gamma".into(), scale)],
            triplet_at: Some(Arc::new(move |x: &DVector<f64>| {
                LevyTriplet::new(
                    DVector::zeros(1),
                    DMatrix::zeros(1, 1),
                    JumpMeasureSpec::SymmetricStable { alpha: a1(x[0]), scale },
                    0.0,
                )
                .expect("index validated at construction")
            })),
            closed_form: Some(Arc::new(move |x: &DVector<f64>, xi: &DVector<f64>| {
                let a = a2(x[0]);
                Complex64::new(scale.powf(a) * xi[0].abs().powf(a), 0.0)
            })),
        })
    }

    /// The stable-like preset with index `((0.9 + x) ∧ 1.9) ∨ 0.9` and unit
    /// scale: nearly Brownian (with double speed) above `x = 1`, nearly Cauchy
    /// below `x = 0`.
    pub fn stable_like_preset() -> Self {
        let mut sym = Self::stable_like(|x: f64| (0.9 + x).min(1.9).max(0.9), 1.0)
            .expect("preset index is valid");
        sym.name = "stable_like_preset".into();
        sym
    }

    /// Test fixture: a symbol given only by a closed-form expression, with no
    /// triplet behind it. Not simulatable; used to exercise the checkers.
    pub fn from_closed_form<F>(dim: usize, name: &str, f: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> Complex64 + Send + Sync + 'static,
    {
        StateDependentSymbol {
            dim,
            family: Family::Custom,
            name: name.into(),
            params: Vec::new(),
            triplet_at: None,
            closed_form: Some(Arc::new(f)),
        }
    }

    /// Constant-killing fixture `q(x, ξ) = c`, the canonical A3 violation.
    pub fn with_killing(c: f64) -> Result<Self, SymbolError> {
        let triplet =
            LevyTriplet::new(DVector::zeros(1), DMatrix::zeros(1, 1), JumpMeasureSpec::None, c)?;
        let mut sym = Self::levy_constant("killing", triplet);
        sym.params = vec![("c".into(), c)];
        Ok(sym)
    }

    /// Generic one-dimensional pure-jump symbol from a Lévy density.
    pub fn generic_1d<F>(name: &str, density: F, tail: DensityTail) -> Result<Self, SymbolError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let measure = GenericMeasure::new(density, tail)?;
        let triplet = LevyTriplet::new(
            DVector::zeros(1),
            DMatrix::zeros(1, 1),
            JumpMeasureSpec::Generic(measure),
            0.0,
        )?;
        let mut sym = Self::levy_constant(name, triplet);
        sym.family = Family::LevyConstant;
        Ok(sym)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    pub fn has_triplet(&self) -> bool {
        self.triplet_at.is_some()
    }

    fn check_dims(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<(), SymbolError> {
        if x.len() != self.dim {
            return Err(SymbolError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if xi.len() != self.dim {
            return Err(SymbolError::DimensionMismatch { expected: self.dim, got: xi.len() });
        }
        Ok(())
    }

    /// Evaluate `q(x, ξ)`, preferring the closed form.
    pub fn eval(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<Complex64, SymbolError> {
        self.check_dims(x, xi)?;
        if let Some(f) = &self.closed_form {
            return Ok(f(x, xi));
        }
        let triplet = self.triplet(x)?;
        triplet.symbol_value(xi)
    }

    /// Evaluate `q(x, ξ)` through the Lévy-Khinchine numeric route, ignoring
    /// any closed form.
    pub fn eval_quadrature(
        &self,
        x: &DVector<f64>,
        xi: &DVector<f64>,
    ) -> Result<Complex64, SymbolError> {
        self.check_dims(x, xi)?;
        let triplet = self.triplet(x)?;
        triplet.symbol_value_quadrature(xi)
    }

    /// The frozen triplet at state `x`.
    pub fn triplet(&self, x: &DVector<f64>) -> Result<LevyTriplet, SymbolError> {
        if x.len() != self.dim {
            return Err(SymbolError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        match &self.triplet_at {
            Some(f) => Ok(f(x)),
            None => Err(SymbolError::Unsupported(format!(
                "symbol '{}' has no triplet representation",
                self.name
            ))),
        }
    }
}

fn has_closed_jump(jumps: &JumpMeasureSpec) -> bool {
    !matches!(jumps, JumpMeasureSpec::Generic(_))
}

/// Symbol of the Lévy-driven SDE `dX_t = f(X_{t-}) dZ_t`: the driving
/// exponent evaluated at `f(x)'ξ`, with the triplet pushed through `f(x)`.
///
/// The driver must be state-independent. Coefficient matrices `f(x)` are
/// `d×n`; the pushforward of the driving jump measure is supported for point
/// masses in any dimension and for scalar maps (`d = n = 1`) otherwise.
pub fn symbol_from_sde<F>(
    dim: usize,
    coeff: F,
    driver: &StateDependentSymbol,
) -> Result<StateDependentSymbol, SymbolError>
where
    F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
{
    if !matches!(driver.family(), Family::LevyConstant | Family::Brownian) {
        return Err(SymbolError::Unsupported(
            "driving exponent must be state-independent".into(),
        ));
    }
    let n = driver.dim();
    let probe = coeff(&DVector::zeros(dim));
    if probe.nrows() != dim || probe.ncols() != n {
        return Err(SymbolError::DimensionMismatch { expected: dim * n, got: probe.nrows() * probe.ncols() });
    }
    let driver_triplet = driver.triplet(&DVector::zeros(n))?;
    let coeff = Arc::new(coeff);

    let c1 = coeff.clone();
    let drv = driver.clone();
    let closed: ClosedFormFn = Arc::new(move |x: &DVector<f64>, xi: &DVector<f64>| {
        let fx = c1(x);
        let u = fx.transpose() * xi;
        drv.eval(&DVector::zeros(u.len()), &u)
            .expect("driver evaluation failed in closed form")
    });

    let c2 = coeff.clone();
    let name = format!("sde({})", driver.name());
    let triplet_at: TripletFn = Arc::new(move |x: &DVector<f64>| {
        let fx = c2(x);
        pushforward_triplet(&driver_triplet, &fx).expect("pushforward failed")
    });

    Ok(StateDependentSymbol {
        dim,
        family: Family::SdeDriven,
        name,
        params: Vec::new(),
        triplet_at: Some(triplet_at),
        closed_form: Some(closed),
    })
}

/// Push a constant driving triplet through the linear map `F`: drift picks up
/// the cutoff-correction term, diffusion becomes `F S F'`, and the jump
/// measure is the image under `y ↦ F y`.
fn pushforward_triplet(driver: &LevyTriplet, f: &DMatrix<f64>) -> Result<LevyTriplet, SymbolError> {
    let d = f.nrows();
    let mut drift = f * driver.drift();
    let diffusion = f * driver.diffusion() * f.transpose();

    let jumps = match driver.jumps() {
        JumpMeasureSpec::None => JumpMeasureSpec::None,
        JumpMeasureSpec::CompoundPoisson { rate, jumps } => match jumps {
            JumpDistribution::PointMass(a) => {
                let image = f * a;
                // cutoff correction: λ F a (1_{|Fa|<=1} - 1_{|a|<=1})
                let indicator =
                    (image.norm() <= 1.0) as i32 as f64 - (a.norm() <= 1.0) as i32 as f64;
                drift += rate * indicator * &image;
                if image.norm() == 0.0 {
                    JumpMeasureSpec::None
                } else {
                    JumpMeasureSpec::CompoundPoisson {
                        rate: *rate,
                        jumps: JumpDistribution::PointMass(image),
                    }
                }
            }
            JumpDistribution::Gaussian { mean, std } => {
                if d != 1 || f.ncols() != 1 {
                    return Err(SymbolError::Unsupported(
                        "Gaussian-jump drivers support scalar coefficient maps only".into(),
                    ));
                }
                let c = f[(0, 0)];
                if c == 0.0 {
                    JumpMeasureSpec::None
                } else {
                    let image = JumpDistribution::Gaussian { mean: c * mean, std: c.abs() * std };
                    // correction over the ring where the indicators differ
                    let lo = 1.0f64.min(1.0 / c.abs());
                    let hi = 1.0f64.max(1.0 / c.abs());
                    if hi > lo {
                        let nrm = statrs::distribution::Normal::new(*mean, *std).expect("valid");
                        use statrs::distribution::Continuous;
                        let sign = if c.abs() > 1.0 { -1.0 } else { 1.0 };
                        let (pos, _) =
                            crate::quad::adaptive_gk(|z| z * nrm.pdf(z), lo, hi, 1e-11, 1e-13)?;
                        let (neg, _) =
                            crate::quad::adaptive_gk(|z| z * nrm.pdf(z), -hi, -lo, 1e-11, 1e-13)?;
                        drift[0] += rate * c * sign * (pos + neg);
                    }
                    JumpMeasureSpec::CompoundPoisson { rate: *rate, jumps: image }
                }
            }
        },
        JumpMeasureSpec::SymmetricStable { alpha, scale } => {
            if d != 1 || f.ncols() != 1 {
                return Err(SymbolError::Unsupported(
                    "stable drivers support scalar coefficient maps only".into(),
                ));
            }
            let c = f[(0, 0)].abs();
            if c == 0.0 {
                JumpMeasureSpec::None
            } else {
                // symmetric: no cutoff correction
                JumpMeasureSpec::SymmetricStable { alpha: *alpha, scale: scale * c }
            }
        }
        JumpMeasureSpec::Generic(m) => {
            if d != 1 || f.ncols() != 1 {
                return Err(SymbolError::Unsupported(
                    "generic drivers support scalar coefficient maps only".into(),
                ));
            }
            let c = f[(0, 0)];
            if c == 0.0 {
                JumpMeasureSpec::None
            } else {
                let inner = m.clone();
                let ca = c.abs();
                let tail = DensityTail {
                    tail_exponent: inner.tail().tail_exponent,
                    monotone_from: inner.tail().monotone_from * ca,
                };
                // image density n(y/c)/|c|; correction over the indicator ring
                let ring = if ca > 1.0 {
                    let (v, _) = crate::quad::adaptive_gk(
                        |z: f64| z * inner.density_at(z),
                        1.0 / ca,
                        1.0,
                        1e-11,
                        1e-13,
                    )?;
                    let (w, _) = crate::quad::adaptive_gk(
                        |z: f64| z * inner.density_at(z),
                        -1.0,
                        -1.0 / ca,
                        1e-11,
                        1e-13,
                    )?;
                    -(v + w)
                } else if ca < 1.0 {
                    let (v, _) = crate::quad::adaptive_gk(
                        |z: f64| z * inner.density_at(z),
                        1.0,
                        1.0 / ca,
                        1e-11,
                        1e-13,
                    )?;
                    let (w, _) = crate::quad::adaptive_gk(
                        |z: f64| z * inner.density_at(z),
                        -1.0 / ca,
                        -1.0,
                        1e-11,
                        1e-13,
                    )?;
                    v + w
                } else {
                    0.0
                };
                drift[0] += c * ring;
                let measure = GenericMeasure::new(move |y: f64| inner.density_at(y / c) / ca, tail)?;
                JumpMeasureSpec::Generic(measure)
            }
        }
    };

    LevyTriplet::new(drift, diffusion, jumps, driver.killing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn brownian_symbol_is_half_norm_squared() {
        let sym = StateDependentSymbol::brownian(2);
        let q = sym.eval(&dvector![5.0, -3.0], &dvector![1.0, 0.0]).unwrap();
        assert!((q - c(0.5, 0.0)).norm() < 1e-15);
    }

    // α(2) = 1.9, so q(2, 3) = 3^{1.9} = 8.063626138566859.
    #[test]
    fn stable_like_preset_matches_power_value() {
        let sym = StateDependentSymbol::stable_like_preset();
        let q = sym.eval(&dvector![2.0], &dvector![3.0]).unwrap();
        assert!((q.re - 8.063626138566859).abs() < 1e-12, "got {}", q.re);
        assert!(q.im == 0.0);
    }

    #[test]
    fn stable_like_preset_clamps_index() {
        let sym = StateDependentSymbol::stable_like_preset();
        // α(-5) = 0.9 and α(7) = 1.9
        let q_lo = sym.eval(&dvector![-5.0], &dvector![2.0]).unwrap();
        let q_hi = sym.eval(&dvector![7.0], &dvector![2.0]).unwrap();
        assert!((q_lo.re - 2.0f64.powf(0.9)).abs() < 1e-12);
        assert!((q_hi.re - 2.0f64.powf(1.9)).abs() < 1e-12);
    }

    #[test]
    fn symbol_vanishes_at_zero_frequency_without_killing() {
        let syms = [
            StateDependentSymbol::brownian(1),
            StateDependentSymbol::stable_like_preset(),
            StateDependentSymbol::cauchy(1.0).unwrap(),
            StateDependentSymbol::compound_poisson(
                2.0,
                JumpDistribution::PointMass(dvector![1.0]),
            )
            .unwrap(),
        ];
        for sym in &syms {
            let q = sym.eval(&dvector![0.7], &dvector![0.0]).unwrap();
            assert!(q.norm() <= EXACT_TOL, "{}: q(x,0) = {q}", sym.name());
        }
    }

    #[test]
    fn killing_fixture_keeps_constant_value() {
        let sym = StateDependentSymbol::with_killing(1.0).unwrap();
        let q = sym.eval(&dvector![0.3], &dvector![0.0]).unwrap();
        assert!((q - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let sym = StateDependentSymbol::brownian(2);
        assert!(matches!(
            sym.eval(&dvector![0.0], &dvector![1.0, 0.0]),
            Err(SymbolError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sde_identity_driver_is_transparent() {
        let driver = StateDependentSymbol::brownian(1);
        let sym = symbol_from_sde(1, |_x| DMatrix::identity(1, 1), &driver).unwrap();
        for (x, xi) in [(0.0, 1.0), (4.0, -2.5), (-3.0, 0.3)] {
            let q = sym.eval(&dvector![x], &dvector![xi]).unwrap();
            assert!((q - c(0.5 * xi * xi, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn sde_constant_scaling_of_cauchy_exponent() {
        let driver = StateDependentSymbol::cauchy(1.0).unwrap();
        let sym = symbol_from_sde(1, |_x| DMatrix::from_element(1, 1, 2.0), &driver).unwrap();
        let q = sym.eval(&dvector![10.0], &dvector![3.0]).unwrap();
        assert!((q - c(6.0, 0.0)).norm() < 1e-13, "got {q}");
        // constant coefficient: closed form reduces exactly to ψ(f'ξ)
        let psi = driver.eval(&dvector![0.0], &dvector![6.0]).unwrap();
        assert!((q - psi).norm() < 1e-15);
    }

    // f(x) = x with ψ(u) = u²/2 gives q(x, ξ) = x²ξ²/2, and the pushed
    // triplet has diffusion x². Closed form is compared against the triplet
    // evaluation on the grid x ∈ {-2, 1, 3}, ξ ∈ {-1, 0.5, 4}.
    #[test]
    fn sde_linear_coefficient_squares_the_state() {
        let driver = StateDependentSymbol::brownian(1);
        let sym = symbol_from_sde(1, |x: &DVector<f64>| DMatrix::from_element(1, 1, x[0]), &driver)
            .unwrap();
        for x in [-2.0, 1.0, 3.0] {
            let triplet = sym.triplet(&dvector![x]).unwrap();
            assert!((triplet.diffusion()[(0, 0)] - x * x).abs() < 1e-14);
            for xi in [-1.0, 0.5, 4.0] {
                let q = sym.eval(&dvector![x], &dvector![xi]).unwrap();
                let want = 0.5 * x * x * xi * xi;
                assert!((q - c(want, 0.0)).norm() < 1e-12, "x={x} xi={xi}: {q}");
                let via_triplet = triplet.symbol_value(&dvector![xi]).unwrap();
                assert!((via_triplet - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sde_point_mass_pushforward_tracks_cutoff_change() {
        // atom at 0.8 pushed through c = 2 lands at 1.6, outside the ball:
        // the closed form ψ(cξ) and the pushed triplet must still agree.
        let driver = StateDependentSymbol::compound_poisson(
            1.5,
            JumpDistribution::PointMass(dvector![0.8]),
        )
        .unwrap();
        let sym = symbol_from_sde(1, |_x| DMatrix::from_element(1, 1, 2.0), &driver).unwrap();
        for xi in [0.4, -1.3, 2.0] {
            let q = sym.eval(&dvector![0.0], &dvector![xi]).unwrap();
            let via_triplet = sym
                .triplet(&dvector![0.0])
                .unwrap()
                .symbol_value(&dvector![xi])
                .unwrap();
            assert!((q - via_triplet).norm() < 1e-12, "xi={xi}: {q} vs {via_triplet}");
        }
    }

    #[test]
    fn sde_rejects_state_dependent_driver() {
        let driver = StateDependentSymbol::stable_like_preset();
        let r = symbol_from_sde(1, |_x| DMatrix::identity(1, 1), &driver);
        assert!(matches!(r, Err(SymbolError::Unsupported(_))));
    }
}
