//! Sampling one increment of the Lévy process attached to a frozen triplet.
//!
//! The contract is distributional: the returned variate over step `h` has
//! characteristic function `e^{-h q(ξ)}` where `q` is the triplet's symbol —
//! exactly for families with exact samplers (pure Gaussian, compound Poisson,
//! symmetric stable), and within a documented small-jump approximation for
//! truncated generic measures.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use thiserror::Error;

use crate::quad;
use crate::rng::RngStream;
use crate::symbol::{GenericMeasure, JumpDistribution, JumpMeasureSpec, LevyTriplet, SymbolError};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("killing rate must be zero for simulation, got {0}")]
    Killing(f64),
    #[error("diffusion matrix is not positive semidefinite")]
    NotPsd,
    #[error("stable index must lie strictly in (0, 2), got {0}")]
    StableIndex(f64),
    #[error("expected jumps per step {0:.3e} exceed 1e7; raise the truncation level")]
    JumpRateTooHigh(f64),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// How small jumps below the truncation level are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallJumpPolicy {
    /// Gaussian substitution when `sqrt(Σ(ε))/ε >= 0.3`, else dropped.
    Auto,
    Gaussian,
    Drop,
}

/// Tunables for sampler construction. The defaults implement the rules
/// documented on [`build_sampler`].
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    /// Truncation level override for generic measures.
    pub epsilon: Option<f64>,
    pub small_jump_policy: SmallJumpPolicy,
    /// Target expected big jumps per step when choosing ε.
    pub max_expected_jumps: f64,
    /// Gaussian-substitution criterion threshold on `sqrt(Σ(ε))/ε`.
    pub gaussian_criterion: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            epsilon: None,
            small_jump_policy: SmallJumpPolicy::Auto,
            max_expected_jumps: 50.0,
            gaussian_criterion: 0.3,
        }
    }
}

/// Sampling strategy actually selected at build time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Exact,
    TruncatedJump { epsilon: f64 },
}

enum JumpPlan {
    None,
    CompoundPoisson {
        rate: f64,
        dist: JumpDistribution,
        /// `-λ E[Y 1_{|Y|<=1}]`, applied per unit time.
        compensation: DVector<f64>,
    },
    StablePerAxis {
        alpha: f64,
        scale: f64,
    },
    Truncated(TruncatedPlan),
}

struct TruncatedPlan {
    epsilon: f64,
    big_rate: f64,
    /// `-∫_{ε<|y|<=1} y N(dy)`, applied per unit time.
    compensation: f64,
    /// Standard deviation per unit time of the Gaussian small-jump
    /// substitute; zero when small jumps are dropped.
    small_std: f64,
    table: InverseCdfTable,
}

/// Prepared sampler for one frozen triplet. Immutable after construction;
/// concurrent use requires each thread to own its `RngStream`.
pub struct IncrementSampler {
    dim: usize,
    drift: DVector<f64>,
    diffusion_factor: Option<DMatrix<f64>>,
    plan: JumpPlan,
    strategy: Strategy,
}

impl fmt::Debug for IncrementSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IncrementSampler")
            .field("dim", &self.dim)
            .field("strategy", &self.strategy)
            .finish()
    }
}

/// Builds a sampler for the triplet, selecting an exact strategy when the
/// family has one and a truncated-jump strategy for generic densities.
///
/// For truncated strategies the level ε is halved from 1 while the expected
/// big-jump count `h λ(ε)` stays within budget, floored once the residual
/// small-jump variance `Σ(ε)` is negligible. Small jumps are replaced by a
/// Gaussian with matching covariance when `sqrt(Σ(ε))/ε >= 0.3`, else dropped
/// and only their compensation drift is kept.
pub fn build_sampler(triplet: &LevyTriplet, h_hint: f64) -> Result<IncrementSampler, SamplerError> {
    build_sampler_with(triplet, h_hint, &SamplerConfig::default())
}

pub fn build_sampler_with(
    triplet: &LevyTriplet,
    h_hint: f64,
    config: &SamplerConfig,
) -> Result<IncrementSampler, SamplerError> {
    if triplet.killing() != 0.0 {
        return Err(SamplerError::Killing(triplet.killing()));
    }
    let dim = triplet.dim();
    let diffusion_factor = factor_diffusion(triplet.diffusion())?;

    let (plan, strategy) = match triplet.jumps() {
        JumpMeasureSpec::None => (JumpPlan::None, Strategy::Exact),
        JumpMeasureSpec::CompoundPoisson { rate, jumps } => {
            if rate * h_hint > 1e7 {
                return Err(SamplerError::JumpRateTooHigh(rate * h_hint));
            }
            let compensation = -*rate * jumps.mean_in_unit_ball();
            (
                JumpPlan::CompoundPoisson { rate: *rate, dist: jumps.clone(), compensation },
                Strategy::Exact,
            )
        }
        JumpMeasureSpec::SymmetricStable { alpha, scale } => {
            if !(*alpha > 0.0 && *alpha < 2.0) {
                return Err(SamplerError::StableIndex(*alpha));
            }
            (JumpPlan::StablePerAxis { alpha: *alpha, scale: *scale }, Strategy::Exact)
        }
        JumpMeasureSpec::Generic(measure) => {
            if dim != 1 {
                return Err(SamplerError::Unsupported(
                    "generic jump densities are one-dimensional".into(),
                ));
            }
            let plan = build_truncated_plan(triplet.jumps(), measure, h_hint, config)?;
            let strategy = Strategy::TruncatedJump { epsilon: plan.epsilon };
            (JumpPlan::Truncated(plan), strategy)
        }
    };

    Ok(IncrementSampler {
        dim,
        drift: triplet.drift().clone(),
        diffusion_factor,
        plan,
        strategy,
    })
}

fn build_truncated_plan(
    spec: &JumpMeasureSpec,
    measure: &GenericMeasure,
    h_hint: f64,
    config: &SamplerConfig,
) -> Result<TruncatedPlan, SamplerError> {
    let epsilon = match config.epsilon {
        Some(e) => {
            if !(e > 0.0 && e.is_finite()) {
                return Err(SamplerError::Unsupported(format!(
                    "truncation level must be positive, got {e}"
                )));
            }
            e
        }
        None => {
            let mut eps = 1.0f64;
            while eps > 1e-6 {
                let rate_next = spec.tail_mass(eps * 0.5, 1)?;
                let sigma2 = spec.second_moment_below(eps)?;
                if h_hint * rate_next > config.max_expected_jumps || sigma2 <= 1e-8 {
                    break;
                }
                eps *= 0.5;
            }
            eps
        }
    };

    let big_rate = spec.tail_mass(epsilon, 1)?;
    if big_rate * h_hint > 1e7 {
        return Err(SamplerError::JumpRateTooHigh(big_rate * h_hint));
    }
    let compensation = spec.compensation_drift(epsilon)?;
    let sigma2 = spec.second_moment_below(epsilon)?;
    let use_gaussian = match config.small_jump_policy {
        SmallJumpPolicy::Gaussian => true,
        SmallJumpPolicy::Drop => false,
        SmallJumpPolicy::Auto => sigma2.sqrt() / epsilon >= config.gaussian_criterion,
    };
    let small_std = if use_gaussian { sigma2.sqrt() } else { 0.0 };
    let table = InverseCdfTable::build(measure, epsilon)?;

    Ok(TruncatedPlan { epsilon, big_rate, compensation, small_std, table })
}

/// Cholesky factor of the diffusion matrix, falling back to a symmetric
/// eigendecomposition with eigenvalues in `[-1e-10, 0]` clipped to zero.
fn factor_diffusion(q: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>, SamplerError> {
    if q.iter().all(|v| *v == 0.0) {
        return Ok(None);
    }
    if let Some(chol) = q.clone().cholesky() {
        return Ok(Some(chol.l()));
    }
    let eig = q.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev < -1e-10 {
            return Err(SamplerError::NotPsd);
        }
        let s = ev.max(0.0).sqrt();
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    Ok(Some(scaled))
}

impl IncrementSampler {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Documented characteristic-function bias budget of the strategy.
    pub fn cf_bias_budget(&self) -> f64 {
        match self.strategy {
            Strategy::Exact => 0.0,
            Strategy::TruncatedJump { .. } => 1e-3,
        }
    }

    /// Big-jump rate `λ(ε)` of a truncated plan, zero otherwise.
    pub fn big_jump_rate(&self) -> f64 {
        match &self.plan {
            JumpPlan::Truncated(p) => p.big_rate,
            _ => 0.0,
        }
    }

    /// Draws one increment over step `h`.
    pub fn sample_increment(&self, h: f64, rng: &mut RngStream) -> DVector<f64> {
        assert!(h > 0.0, "step size must be positive");
        let mut x = h * &self.drift;

        if let Some(l) = &self.diffusion_factor {
            let z = DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|_| StandardNormal.sample(rng)),
            );
            x += h.sqrt() * (l * z);
        }

        match &self.plan {
            JumpPlan::None => {}
            JumpPlan::CompoundPoisson { rate, dist, compensation } => {
                let count = Poisson::new(rate * h).expect("positive rate").sample(rng) as u64;
                for _ in 0..count {
                    x += sample_jump(dist, rng);
                }
                x += h * compensation;
            }
            JumpPlan::StablePerAxis { alpha, scale } => {
                for j in 0..self.dim {
                    x[j] += sample_stable(*alpha, *scale, h, rng)
                        .expect("index validated at build time");
                }
            }
            JumpPlan::Truncated(plan) => {
                if plan.big_rate > 0.0 {
                    let count =
                        Poisson::new(plan.big_rate * h).expect("positive rate").sample(rng) as u64;
                    for _ in 0..count {
                        x[0] += plan.table.sample(rng);
                    }
                }
                x[0] += h * plan.compensation;
                if plan.small_std > 0.0 {
                    let z: f64 = StandardNormal.sample(rng);
                    x[0] += h.sqrt() * plan.small_std * z;
                }
            }
        }
        x
    }
}

fn sample_jump(dist: &JumpDistribution, rng: &mut RngStream) -> DVector<f64> {
    match dist {
        JumpDistribution::PointMass(a) => a.clone(),
        JumpDistribution::Gaussian { mean, std } => {
            let z: f64 = StandardNormal.sample(rng);
            DVector::from_element(1, mean + std * z)
        }
    }
}

/// Symmetric α-stable variate over step `h` with characteristic function
/// `e^{-h γ^α |ξ|^α}`, by the Chambers-Mallows-Stuck construction. The `α = 1`
/// case takes the Cauchy closed form, where the general formula degenerates.
pub fn sample_stable(
    alpha: f64,
    scale: f64,
    h: f64,
    rng: &mut RngStream,
) -> Result<f64, SamplerError> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(SamplerError::StableIndex(alpha));
    }
    let u = std::f64::consts::PI * (rng.random::<f64>() - 0.5);
    let std_variate = if alpha == 1.0 {
        u.tan()
    } else {
        let w: f64 = Exp1.sample(rng);
        let au = alpha * u;
        (au.sin() / u.cos().powf(1.0 / alpha))
            * (((u - au).cos() / w).powf((1.0 - alpha) / alpha))
    };
    Ok(scale * h.powf(1.0 / alpha) * std_variate)
}

/// Monotone-cubic inverse CDF of the normalized big-jump law `N|_{|y|>ε}`.
struct InverseCdfTable {
    neg_mass: f64,
    total_mass: f64,
    /// position as a monotone function of cumulative mass, per side
    neg: MonotoneCubic,
    pos: MonotoneCubic,
}

impl InverseCdfTable {
    fn build(measure: &GenericMeasure, epsilon: f64) -> Result<Self, SamplerError> {
        let pos = side_tabulation(|u| measure.density_at(u), epsilon)?;
        let neg = side_tabulation(|u| measure.density_at(-u), epsilon)?;
        let neg_mass = neg.0;
        let total_mass = neg.0 + pos.0;
        Ok(InverseCdfTable { neg_mass, total_mass, neg: neg.1, pos: pos.1 })
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        let t = rng.random::<f64>() * self.total_mass;
        if t < self.neg_mass {
            -self.neg.eval(t)
        } else {
            self.pos.eval(t - self.neg_mass)
        }
    }
}

/// Tabulates the cumulative mass of one side `u >= ε` on log-spaced knots and
/// returns (side mass, magnitude-from-cumulative interpolant).
fn side_tabulation<F>(density: F, epsilon: f64) -> Result<(f64, MonotoneCubic), SamplerError>
where
    F: Fn(f64) -> f64,
{
    let knots_per_cell = 8;
    let ratio = 2.0f64.powf(1.0 / knots_per_cell as f64);
    let mut us = vec![epsilon];
    let mut cums = vec![0.0f64];
    let mut acc = 0.0f64;
    let mut lo = epsilon;
    let mut zero_cells = 0;
    for cell in 0..220 {
        let mut cell_mass = 0.0;
        for _ in 0..knots_per_cell {
            let hi = lo * ratio;
            let (m, _) = quad::adaptive_gk(&density, lo, hi, 1e-10, 1e-14)
                .map_err(SymbolError::from)?;
            acc += m;
            cell_mass += m;
            us.push(hi);
            cums.push(acc);
            lo = hi;
        }
        if cell >= 3 && cell_mass <= 1e-12 * acc.max(1e-300) {
            if cell_mass == 0.0 {
                zero_cells += 1;
                if zero_cells >= 2 {
                    break;
                }
            } else {
                break;
            }
        }
    }
    // strictly increasing cumulative knots only
    let mut xs = Vec::with_capacity(cums.len());
    let mut ys = Vec::with_capacity(cums.len());
    for (c, u) in cums.iter().zip(us.iter()) {
        if xs.last().map_or(true, |last: &f64| *c > *last) {
            xs.push(*c);
            ys.push(*u);
        }
    }
    Ok((acc, MonotoneCubic::new(xs, ys)))
}

/// Fritsch-Butland monotone piecewise-cubic interpolant.
struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2, "interpolant needs at least two knots");
        let mut deltas = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            deltas.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = deltas[0];
        slopes[n - 1] = deltas[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (deltas[i - 1], deltas[i]);
            slopes[i] = if a * b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
        }
        MonotoneCubic { xs, ys, slopes }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = self.xs[hi] - self.xs[lo];
        let t = (x - self.xs[lo]) / w;
        let (y0, y1) = (self.ys[lo], self.ys[hi]);
        let (m0, m1) = (self.slopes[lo] * w, self.slopes[hi] * w);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::DensityTail;
    use crate::symbol::StateDependentSymbol;
    use nalgebra::dvector;

    fn brownian_triplet() -> LevyTriplet {
        LevyTriplet::standard_brownian(1)
    }

    #[test]
    fn brownian_dispatches_to_exact_without_jump_machinery() {
        let s = build_sampler(&brownian_triplet(), 0.1).unwrap();
        assert_eq!(s.strategy(), Strategy::Exact);
        assert_eq!(s.big_jump_rate(), 0.0);
    }

    #[test]
    fn stable_family_dispatches_to_exact() {
        let sym = StateDependentSymbol::symmetric_stable(1, 1.9, 1.0).unwrap();
        let t = sym.triplet(&dvector![0.0]).unwrap();
        let s = build_sampler(&t, 0.1).unwrap();
        assert_eq!(s.strategy(), Strategy::Exact);
    }

    #[test]
    fn killing_triplet_is_rejected() {
        let t = LevyTriplet::new(
            DVector::zeros(1),
            DMatrix::zeros(1, 1),
            JumpMeasureSpec::None,
            1.0,
        )
        .unwrap();
        assert!(matches!(build_sampler(&t, 0.1), Err(SamplerError::Killing(_))));
    }

    // λ(ε) oracle for n(y) = |y|^{-2.5}: the tail integral is 2 ε^{-1.5}/1.5.
    #[test]
    fn generic_power_density_reports_closed_form_rate() {
        let sym = StateDependentSymbol::generic_1d(
            "power",
            |y: f64| y.abs().powf(-2.5),
            DensityTail { tail_exponent: 2.5, monotone_from: 0.0 },
        )
        .unwrap();
        let t = sym.triplet(&dvector![0.0]).unwrap();
        let s = build_sampler(&t, 1.0).unwrap();
        let eps = match s.strategy() {
            Strategy::TruncatedJump { epsilon } => epsilon,
            _ => panic!("expected truncated strategy"),
        };
        let want = 2.0 * eps.powf(-1.5) / 1.5;
        let got = s.big_jump_rate();
        assert!((got - want).abs() < 1e-6 * want, "rate {got} vs {want} at eps {eps}");
        // default rule keeps the expected jumps per step within budget
        assert!(got * 1.0 <= 50.0 + 1e-9);
    }

    #[test]
    fn brownian_increment_moments() {
        let s = build_sampler(&brownian_triplet(), 0.25).unwrap();
        let mut rng = RngStream::new(1234, 0);
        let n = 100_000;
        let h = 0.25;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let v = s.sample_increment(h, &mut rng)[0];
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() <= 3.3 * 0.5 / (n as f64).sqrt(), "mean {mean}");
        assert!((0.245..=0.255).contains(&var), "variance {var}");
    }

    #[test]
    fn cauchy_empirical_cf_matches_exponent() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let mut sum_cos = 0.0;
        for _ in 0..n {
            let v = sample_stable(1.0, 1.0, 1.0, &mut rng).unwrap();
            sum_cos += v.cos();
        }
        let phi = sum_cos / n as f64;
        let want = (-1.0f64).exp();
        assert!((phi - want).abs() <= 3.3 / (n as f64).sqrt(), "phi {phi} want {want}");
    }

    #[test]
    fn stable_median_is_zero_by_symmetry() {
        let mut rng = RngStream::new(99, 3);
        let n = 100_000;
        let pos = (0..n)
            .filter(|_| sample_stable(1.0, 1.0, 1.0, &mut rng).unwrap() > 0.0)
            .count();
        let frac = pos as f64 / n as f64;
        // two-sided binomial bound at level well below 0.01
        assert!((frac - 0.5).abs() <= 3.3 * 0.5 / (n as f64).sqrt(), "frac {frac}");
    }

    #[test]
    fn stable_near_two_approaches_gaussian_variance() {
        let mut rng = RngStream::new(5, 1);
        let n = 100_000;
        let mut sumsq = 0.0;
        let mut sum = 0.0;
        for _ in 0..n {
            let v = sample_stable(1.999, 1.0, 1.0, &mut rng).unwrap();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // e^{-h ξ^2} at h=1 is N(0, 2)
        assert!((var - 2.0).abs() < 0.2, "variance {var}");
    }

    #[test]
    fn compound_poisson_zero_increment_fraction() {
        // λ = 2, h = 0.5, jumps δ_1: increment K - 1, zero iff K = 1,
        // P(K = 1) = e^{-1} for K ~ Poisson(1).
        let sym = StateDependentSymbol::compound_poisson(
            2.0,
            JumpDistribution::PointMass(dvector![1.0]),
        )
        .unwrap();
        let t = sym.triplet(&dvector![0.0]).unwrap();
        let s = build_sampler(&t, 0.5).unwrap();
        let mut rng = RngStream::new(2024, 0);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| s.sample_increment(0.5, &mut rng)[0].abs() < 1e-12)
            .count();
        let frac = zeros as f64 / n as f64;
        let p = (-1.0f64).exp();
        let tol = 3.3 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((frac - p).abs() <= tol, "zero fraction {frac} want {p}");
    }

    #[test]
    fn sampler_is_deterministic_per_stream() {
        let s = build_sampler(&brownian_triplet(), 0.1).unwrap();
        let mut a = RngStream::new(11, 4);
        let mut b = RngStream::new(11, 4);
        for _ in 0..100 {
            assert_eq!(s.sample_increment(0.1, &mut a), s.sample_increment(0.1, &mut b));
        }
    }

    #[test]
    fn stable_index_out_of_range_is_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_stable(2.0, 1.0, 1.0, &mut rng).is_err());
        assert!(sample_stable(0.0, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn monotone_cubic_is_monotone_and_interpolating() {
        let xs = vec![0.0, 0.4, 1.0, 2.5, 4.0];
        let ys = vec![1.0, 1.2, 2.0, 5.0, 5.5];
        let c = MonotoneCubic::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert!((c.eval(*x) - y).abs() < 1e-12);
        }
        let mut prev = c.eval(0.0);
        for i in 1..=400 {
            let v = c.eval(4.0 * i as f64 / 400.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
