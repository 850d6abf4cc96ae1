//! Adaptive Gauss-Kronrod quadrature and the split-at-the-unit-ball integrals
//! used to evaluate Lévy-Khinchine jump terms numerically.
//!
//! The jump part of a symbol is an integral of `e^{i ξ y} - 1 - i ξ y 1_{|y|<=1}`
//! against a measure that may blow up like `|y|^{-1-α}` at the origin and decay
//! like a power in the tail. The evaluators here handle both ends:
//!
//! - toward the origin, dyadic cells `[b/2^{k+1}, b/2^k]` are integrated until
//!   the cell contributions decay geometrically, and the remainder is completed
//!   by geometric extrapolation;
//! - in the tail, the non-oscillatory mass part is integrated the same way,
//!   while the oscillatory `cos(ξ y) n(y)` / `sin(ξ y) n(y)` parts are chunked
//!   at half-period width and truncated once the integration-by-parts bound
//!   `2 n(R)/|ξ|` drops below the requested tolerance.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a:.6e}, {b:.6e}]: estimated error {err:.3e}")]
    NonConvergence { a: f64, b: f64, err: f64 },
    #[error("integrand returned a non-finite value near y = {0:.6e}")]
    NonFinite(f64),
}

/// `1 - cos(t)` without cancellation for small `t`.
#[inline]
pub fn one_minus_cos(t: f64) -> f64 {
    let s = (0.5 * t).sin();
    2.0 * s * s
}

/// `sin(t) - t` without cancellation for small `t`.
#[inline]
pub fn sin_minus_arg(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let t2 = t * t;
        -t * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
    } else {
        t.sin() - t
    }
}

// 15-point Kronrod abscissae (positive half) and weights, 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One 15-point Gauss-Kronrod panel for a pair of integrands sharing their
/// abscissae. Returns (values, error estimates).
fn gk15_pair<F>(f: &F, a: f64, b: f64) -> ([f64; 2], [f64; 2])
where
    F: Fn(f64) -> [f64; 2],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = [WGK[7] * fc[0], WGK[7] * fc[1]];
    let mut gauss = [WG[3] * fc[0], WG[3] * fc[1]];

    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for c in 0..2 {
            let sum = lo[c] + hi[c];
            kronrod[c] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * sum;
            }
        }
    }

    let mut values = [0.0; 2];
    let mut errors = [0.0; 2];
    for c in 0..2 {
        values[c] = kronrod[c] * half;
        let diff = ((kronrod[c] - gauss[c]) * half).abs();
        errors[c] = diff;
        if !values[c].is_finite() {
            errors[c] = f64::INFINITY;
        }
    }
    (values, errors)
}

/// Integrate a pair over `[a, b]`, chunking at `max_chunk` so oscillatory
/// integrands never see more than about half a period per panel, and bisecting
/// any panel whose error estimate is out of proportion.
fn integrate_cell_pair<F>(f: &F, a: f64, b: f64, max_chunk: f64, scale: f64) -> ([f64; 2], [f64; 2])
where
    F: Fn(f64) -> [f64; 2],
{
    let n_chunks = (((b - a) / max_chunk).ceil() as usize).clamp(1, 4_000_000);
    let width = (b - a) / n_chunks as f64;
    let mut value = [0.0; 2];
    let mut error = [0.0; 2];
    for i in 0..n_chunks {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == n_chunks { b } else { lo + width };
        let (v, e) = refine_pair(f, lo, hi, scale, 0);
        for c in 0..2 {
            value[c] += v[c];
            error[c] += e[c];
        }
    }
    (value, error)
}

fn refine_pair<F>(f: &F, a: f64, b: f64, scale: f64, depth: u32) -> ([f64; 2], [f64; 2])
where
    F: Fn(f64) -> [f64; 2],
{
    let (v, e) = gk15_pair(f, a, b);
    let tol = 1e-13 * (scale + v[0].abs() + v[1].abs());
    if depth >= 24 || (e[0] <= tol && e[1] <= tol) {
        return (v, e);
    }
    let mid = 0.5 * (a + b);
    let (vl, el) = refine_pair(f, a, mid, scale, depth + 1);
    let (vr, er) = refine_pair(f, mid, b, scale, depth + 1);
    ([vl[0] + vr[0], vl[1] + vr[1]], [el[0] + er[0], el[1] + er[1]])
}

/// Plain adaptive Gauss-Kronrod on a finite interval. Returns (value, error).
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<(f64, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok((0.0, 0.0));
    }
    let wrapped = |y: f64| [f(y), 0.0];
    let mut segments: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15_pair(&wrapped, a, b);
    if !v[0].is_finite() {
        return Err(QuadError::NonFinite(0.5 * (a + b)));
    }
    segments.push((a, b, v[0], e[0]));

    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (sa, sb, _, _) = segments.swap_remove(idx);
        let mid = 0.5 * (sa + sb);
        for (lo, hi) in [(sa, mid), (mid, sb)] {
            let (v, e) = gk15_pair(&wrapped, lo, hi);
            if !v[0].is_finite() {
                return Err(QuadError::NonFinite(0.5 * (lo + hi)));
            }
            segments.push((lo, hi, v[0], e[0]));
        }
    }
    let total: f64 = segments.iter().map(|s| s.2).sum();
    let err: f64 = segments.iter().map(|s| s.3).sum();
    Err(QuadError::NonConvergence { a, b, err: err / total.abs().max(1.0) })
}

/// Integrate `f` over `(0, b]` where `f` may have an integrable singularity at
/// the origin. Dyadic cells toward zero plus geometric completion of the
/// remainder. Returns (value, error).
pub fn integrate_to_zero<F>(f: F, b: f64, rel_tol: f64) -> Result<(f64, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    let wrapped = |y: f64| [f(y), 0.0];
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut hi = b;
    let mut prev_cell: Option<f64> = None;
    let mut cell = 0.0;
    for k in 0..220 {
        let lo = hi * 0.5;
        let (v, e) = refine_pair(&wrapped, lo, hi, acc.abs(), 0);
        if !v[0].is_finite() {
            return Err(QuadError::NonFinite(lo));
        }
        cell = v[0];
        acc += cell;
        err += e[0];
        if k >= 6 && cell.abs() <= rel_tol * acc.abs().max(1e-300) {
            break;
        }
        prev_cell = Some(cell);
        hi = lo;
    }
    // Geometric completion: cell contributions of a power-law integrand decay
    // with a constant ratio, so the remainder is cell * rho / (1 - rho).
    if let Some(prev) = prev_cell {
        if prev != 0.0 {
            let rho = cell / prev;
            if rho > 0.0 && rho < 0.95 {
                let rem = cell * rho / (1.0 - rho);
                acc += rem;
                err += rem.abs() * 0.05;
            } else if rho >= 0.95 {
                return Err(QuadError::NonConvergence { a: 0.0, b, err: cell.abs() });
            }
        }
    }
    Ok((acc, err))
}

/// Integrate a decaying `f` over `[a, ∞)` by dyadic expansion with geometric
/// completion of the remainder. Returns (value, error).
pub fn integrate_tail<F>(f: F, a: f64, rel_tol: f64) -> Result<(f64, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    let wrapped = |y: f64| [f(y), 0.0];
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut lo = a;
    let mut prev_cell: Option<f64> = None;
    let mut cell = 0.0;
    for k in 0..1024 {
        let hi = lo * 2.0;
        let (v, e) = refine_pair(&wrapped, lo, hi, acc.abs(), 0);
        if !v[0].is_finite() {
            return Err(QuadError::NonFinite(lo));
        }
        cell = v[0];
        acc += cell;
        err += e[0];
        if k >= 4 && cell.abs() <= rel_tol * acc.abs().max(1e-300) {
            break;
        }
        prev_cell = Some(cell);
        lo = hi;
    }
    if let Some(prev) = prev_cell {
        if prev != 0.0 {
            let rho = cell / prev;
            if rho > 0.0 && rho < 0.95 {
                let rem = cell * rho / (1.0 - rho);
                acc += rem;
                err += rem.abs() * 0.05;
            } else if rho >= 0.95 {
                return Err(QuadError::NonConvergence { a, b: lo, err: cell.abs() });
            }
        }
    }
    Ok((acc, err))
}

/// Decay information for a one-dimensional Lévy density, used to bound
/// truncation errors in the oscillatory tail.
#[derive(Debug, Clone, Copy)]
pub struct DensityTail {
    /// `p` such that `n(y) ≈ c |y|^{-p}` for large `|y|` (`p > 1`). Densities
    /// that decay faster than any power may state a large value.
    pub tail_exponent: f64,
    /// `|y|` beyond which the density is monotone decreasing on each side.
    pub monotone_from: f64,
}

impl Default for DensityTail {
    fn default() -> Self {
        DensityTail { tail_exponent: 2.0, monotone_from: 1.0 }
    }
}

/// The jump contribution to a symbol for a one-dimensional density `n`:
///
/// `∫ (1 - cos(ξ y)) n(y) dy  -  i ∫ (sin(ξ y) - ξ y 1_{|y|<=1}) n(y) dy`
///
/// which equals `-∫ (e^{iξy} - 1 - iξy 1_{|y|<=1}) n(y) dy`. Returns the value
/// and an error estimate including truncation bounds.
pub fn lk_jump_integral_1d<F>(
    density: &F,
    tail: &DensityTail,
    xi: f64,
    tol_abs: f64,
) -> Result<(Complex64, f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    if xi == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let mut re = 0.0;
    let mut im_sin = 0.0; // accumulates ∫ (sin(ξy) - ξy 1_{|y|<=1}) n dy
    let mut err = 0.0;

    for side in [1.0f64, -1.0] {
        let n_side = |u: f64| density(side * u);

        // Inner ball (0, 1]: integrand is O(u^2) * n(u), dyadic toward zero.
        let (v, e) = inner_ball_side(&n_side, side * xi)?;
        re += v[0];
        im_sin += v[1];
        err += e;

        // Tail mass: ∫_1^∞ n contributes +mass to the real part.
        let (mass, me) = integrate_tail(&n_side, 1.0, 1e-12)?;
        re += mass;
        err += me;

        // Oscillatory tail parts: ∫ cos(ξ s u) n du and ∫ sin(ξ s u) n du.
        let (v, e) = oscillatory_tail_side(&n_side, side * xi, tail, tol_abs)?;
        re -= v[0];
        im_sin += v[1];
        err += e;
    }
    Ok((Complex64::new(re, -im_sin), err))
}

/// Dyadic integration over `(0, 1]` of `[(1-cos(t)) n, (sin(t)-t) n]` with
/// `t = xi_signed * u`, including oscillation chunking for large `|ξ|` and
/// geometric completion at the origin.
fn inner_ball_side<F>(n_side: &F, xi_signed: f64) -> Result<([f64; 2], f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    let integrand = |u: f64| {
        let nv = n_side(u);
        let t = xi_signed * u;
        [one_minus_cos(t) * nv, sin_minus_arg(t) * nv]
    };
    let max_chunk = (std::f64::consts::PI / xi_signed.abs()).min(1.0);

    let mut acc = [0.0f64; 2];
    let mut err = 0.0;
    let mut hi = 1.0f64;
    let mut prev: Option<[f64; 2]> = None;
    let mut cell = [0.0f64; 2];
    for k in 0..220 {
        let lo = hi * 0.5;
        let (v, e) = integrate_cell_pair(&integrand, lo, hi, max_chunk, acc[0].abs() + acc[1].abs());
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(QuadError::NonFinite(lo));
        }
        cell = v;
        acc[0] += v[0];
        acc[1] += v[1];
        err += e[0] + e[1];
        let small = cell[0].abs() + cell[1].abs()
            <= 1e-11 * (acc[0].abs() + acc[1].abs()).max(1e-300);
        // Only stop/extrapolate once the trig factors are in their power regime.
        if k >= 6 && small && xi_signed.abs() * hi < 0.5 {
            break;
        }
        prev = Some(cell);
        hi = lo;
    }
    if let Some(p) = prev {
        for c in 0..2 {
            if p[c] != 0.0 {
                let rho = cell[c] / p[c];
                if rho > 0.0 && rho < 0.95 {
                    let rem = cell[c] * rho / (1.0 - rho);
                    acc[c] += rem;
                    err += rem.abs() * 0.05;
                } else if rho >= 0.95 && cell[c].abs() > 1e-11 * acc[c].abs() {
                    return Err(QuadError::NonConvergence { a: 0.0, b: 1.0, err: cell[c].abs() });
                }
            }
        }
    }
    Ok((acc, err))
}

/// `[∫_1^R cos(t) n du, ∫_1^R sin(t) n du]` with `t = xi_signed * u`, marching
/// dyadic cells chunked at half-period width until the integration-by-parts
/// bound `2 n(R)/|ξ|` (or the remaining-mass model from the tail exponent)
/// falls below `tol_abs`.
fn oscillatory_tail_side<F>(
    n_side: &F,
    xi_signed: f64,
    tail: &DensityTail,
    tol_abs: f64,
) -> Result<([f64; 2], f64), QuadError>
where
    F: Fn(f64) -> f64,
{
    let integrand = |u: f64| {
        let nv = n_side(u);
        let t = xi_signed * u;
        [t.cos() * nv, t.sin() * nv]
    };
    let abs_xi = xi_signed.abs();
    let max_chunk = (std::f64::consts::PI / abs_xi).min(1.0);
    let p = tail.tail_exponent.max(1.05);

    let mut acc = [0.0f64; 2];
    let mut err = 0.0;
    let mut lo = 1.0f64;
    for _ in 0..1024 {
        let hi = lo * 2.0;
        let (v, e) = integrate_cell_pair(&integrand, lo, hi, max_chunk, acc[0].abs() + acc[1].abs());
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(QuadError::NonFinite(lo));
        }
        acc[0] += v[0];
        acc[1] += v[1];
        err += e[0] + e[1];

        let edge = n_side(hi).abs();
        let ibp_bound = if hi >= tail.monotone_from { 2.0 * edge / abs_xi } else { f64::INFINITY };
        let mass_bound = edge * hi / (p - 1.0);
        let trunc = ibp_bound.min(mass_bound);
        if trunc <= tol_abs {
            err += trunc;
            return Ok((acc, err));
        }
        lo = hi;
    }
    Err(QuadError::NonConvergence { a: 1.0, b: lo, err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk15_exact_on_polynomials() {
        let f = |y: f64| [y * y * y - 2.0 * y + 1.0, 0.0];
        let (v, _) = gk15_pair(&f, -1.0, 3.0);
        // ∫_{-1}^{3} (y^3 - 2y + 1) dy = 16
        assert!((v[0] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let (v, _) = adaptive_gk(|y| (50.0 * y).sin(), 0.0, PI, 1e-12, 1e-14).unwrap();
        let exact = (1.0 - (50.0 * PI).cos()) / 50.0;
        assert!((v - exact).abs() < 1e-10, "got {v}, want {exact}");
    }

    #[test]
    fn dyadic_integrates_inverse_sqrt_singularity() {
        let (v, _) = integrate_to_zero(|y| y.powf(-0.5), 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn tail_integrates_power_decay() {
        let (v, _) = integrate_tail(|y| y.powf(-2.5), 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn cancellation_free_helpers_match_series() {
        let t = 1e-9;
        assert!((one_minus_cos(t) - 0.5 * t * t).abs() < 1e-25);
        assert!((sin_minus_arg(t) + t * t * t / 6.0).abs() < 1e-34);
        assert!((sin_minus_arg(0.5) - (0.5f64.sin() - 0.5)).abs() < 1e-16);
    }

    // Oracle: for n(y) = |y|^{-2.5} restricted to |y| >= 1 (pure tail), the
    // real part is 2 ∫_1^∞ (1 - cos(ξ y)) y^{-2.5} dy, reproduced here by a
    // windowed brute-force adaptive evaluation.
    #[test]
    fn lk_tail_only_density_matches_brute_force() {
        let density = |y: f64| if y.abs() >= 1.0 { y.abs().powf(-2.5) } else { 0.0 };
        let tail = DensityTail { tail_exponent: 2.5, monotone_from: 1.0 };
        let xi = 3.0;
        let (val, _) = lk_jump_integral_1d(&density, &tail, xi, 1e-10).unwrap();

        let mut brute = 0.0;
        let mut lo = 1.0;
        while lo < 4.0e4 {
            let hi = (lo * 2.0).min(4.0e4);
            let (v, _) = adaptive_gk(
                |y: f64| one_minus_cos(xi * y) * y.powf(-2.5),
                lo,
                hi,
                1e-12,
                1e-14,
            )
            .unwrap();
            brute += v;
            lo = hi;
        }
        brute *= 2.0;
        assert!(
            (val.re - brute).abs() < 2e-5 * brute.abs(),
            "lk {} vs brute {}",
            val.re,
            brute
        );
        // symmetric density: imaginary part vanishes
        assert!(val.im.abs() < 1e-8);
    }
}
