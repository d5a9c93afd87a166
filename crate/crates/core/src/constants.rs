//! Closed-form constants of the s-concave Rényi entropy power inequalities
//! and numerical checks of the optimization steps behind them.
//!
//! For `λ` on the simplex the lower bound of the linearized inequality is
//! `F(λ) = A(λ) + (2/d)·Σ_k g_k(λ)`; the additive constant is `exp(min F)`,
//! attained at the uniform point. The exponent `α` of the modified inequality
//! comes from the supremum of `-F(λ)/H(λ)` over two-point weights, which sits
//! at `λ = 1/2` for orders above `r0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Smallest λ used on the open ratio grid, where `H(λ) > 0`.
pub const RATIO_GRID_START: f64 = 1e-6;

/// A point `λ` of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return domain("empty weight vector");
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return domain(format!("weights {lambdas:?} must be non-negative"));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("weights sum to {total}, not 1"));
        }
        Ok(Self(lambdas))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// The vertex `e_i` of the `n`-point simplex.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Uniform sample from the simplex via normalized exponential spacings.
    pub fn sample<R: Rng>(n: usize, rng: &mut R) -> Self {
        let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        Self(e.into_iter().map(|x| x / total).collect())
    }
}

impl TryFrom<Vec<f64>> for SimplexWeights {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexWeights> for Vec<f64> {
    fn from(w: SimplexWeights) -> Vec<f64> {
        w.0
    }
}

/// `r / (r - 1)`.
pub fn holder_conjugate(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) || r == 1.0 {
        return domain(format!("Hölder conjugate needs r > 0, r ≠ 1 (got {r})"));
    }
    Ok(r / (r - 1.0))
}

/// Shannon entropy `-Σ λ_i log λ_i` of the weights.
pub fn discrete_entropy(lam: &SimplexWeights) -> f64 {
    -lam.0
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l * l.ln())
        .sum::<f64>()
}

/// `(1+u) log(1+u)`, exact at `u = -1`.
fn xlog1p(u: f64) -> f64 {
    if u == -1.0 {
        0.0
    } else {
        (1.0 + u) * u.ln_1p()
    }
}

fn check_order_unit(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("r = {r} must lie in (0, 1)"));
    }
    holder_conjugate(r)
}

/// `r'[(1 - 1/r') log(1 - 1/r') - Σ_i (1 - λ_i/r') log(1 - λ_i/r')]`.
pub fn a_of_lambda(lam: &SimplexWeights, r: f64) -> Result<f64> {
    let rp = check_order_unit(r)?;
    let sum: f64 = lam.0.iter().map(|&l| xlog1p(-l / rp)).sum();
    Ok(rp * (xlog1p(-1.0 / rp) - sum))
}

fn check_s_r(s: f64, r: f64, dim: usize) -> Result<()> {
    if dim == 0 {
        return domain("dim must be positive");
    }
    let d = dim as f64;
    if !(s > -1.0 / d && s <= 0.0) {
        return domain(format!("s = {s}: s > −1/d required (and s ≤ 0)"));
    }
    if !(r > -s * d && r < 1.0) {
        return domain(format!(
            "r = {r}: r must exceed −sd = {} and be below 1",
            -s * d
        ));
    }
    Ok(())
}

fn log1p_checked(u: f64, what: &str) -> Result<f64> {
    if u <= -1.0 {
        return domain(format!(
            "log argument of {what} is not positive (r too close to −sd?)"
        ));
    }
    Ok(u.ln_1p())
}

/// `(1-n) r' log(1+ks) + (1-r') log(1+ks/r) + r' Σ_i (1-λ_i/r') log(1+ks(1-λ_i/r'))`.
pub fn g_k_of_lambda(lam: &SimplexWeights, r: f64, s: f64, k: usize, dim: usize) -> Result<f64> {
    check_s_r(s, r, dim)?;
    if !(1..=dim).contains(&k) {
        return domain(format!("k = {k} outside 1..={dim}"));
    }
    let rp = holder_conjugate(r)?;
    let ks = k as f64 * s;
    let n = lam.len() as f64;
    let mut total =
        (1.0 - n) * rp * log1p_checked(ks, "1+ks")? + (1.0 - rp) * log1p_checked(ks / r, "1+ks/r")?;
    for &l in &lam.0 {
        let w = 1.0 - l / rp;
        total += rp * w * log1p_checked(ks * w, "1+ks(1-λ/r')")?;
    }
    Ok(total)
}

/// `F(λ) = A(λ) + (2/d) Σ_k g_k(λ)`.
pub fn objective_f(lam: &SimplexWeights, s: f64, r: f64, dim: usize) -> Result<f64> {
    let mut f = a_of_lambda(lam, r)?;
    for k in 1..=dim {
        f += 2.0 / dim as f64 * g_k_of_lambda(lam, r, s, k, dim)?;
    }
    Ok(f)
}

/// Logarithm of the additive constant for `n` summands.
pub fn log_epi_constant(s: f64, r: f64, dim: usize, n: usize) -> Result<f64> {
    check_s_r(s, r, dim)?;
    if n < 2 {
        return domain(format!("n = {n} must be at least 2"));
    }
    let a = holder_conjugate(r)?.abs();
    let na = n as f64 * a;
    let mut bracket = 0.0;
    for k in 1..=dim {
        let ks = k as f64 * s;
        bracket += a * (n as f64 - 1.0) * log1p_checked(ks, "1+ks")?
            + (1.0 + a) * log1p_checked(ks / r, "1+ks/r")?
            - (1.0 + na) * log1p_checked(ks * (1.0 + 1.0 / na), "1+ks(1+1/(n|r'|))")?;
    }
    Ok(r.ln() / (1.0 - r) + (1.0 + na) * (1.0 / na).ln_1p() + 2.0 / dim as f64 * bracket)
}

/// Additive constant `c(s, r, d, n)` of the s-concave Rényi EPI.
/// `s = 0` gives the log-concave limit.
pub fn epi_constant(s: f64, r: f64, dim: usize, n: usize) -> Result<f64> {
    Ok(log_epi_constant(s, r, dim, n)?.exp())
}

/// `C(s) = (2/d) Σ_k [log(1+ks/r) + r log(1+ks) - (r+1) log(1+ks(r+1)/(2r))]`.
pub fn big_c_s(s: f64, r: f64, dim: usize) -> Result<f64> {
    check_s_r(s, r, dim)?;
    let mut total = 0.0;
    for k in 1..=dim {
        let ks = k as f64 * s;
        total += log1p_checked(ks / r, "1+ks/r")? + r * log1p_checked(ks, "1+ks")?
            - (r + 1.0) * log1p_checked(ks * (r + 1.0) / (2.0 * r), "1+ks(r+1)/(2r)")?;
    }
    Ok(2.0 / dim as f64 * total)
}

/// Lower end `r0` of the order window where the exponent `α` is proven.
pub fn exponent_threshold(s: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    if dim == 0 || !(s > -1.0 / d && s < 0.0) {
        return domain(format!("s = {s}: need −1/d < s < 0"));
    }
    let golden = 2.0 / (1.0 + 3f64.sqrt());
    Ok(1.0 / (1.0 - golden * (1.0 + 1.0 / (s * d))))
}

/// Exponent `α(s, r, d)` of the modified inequality `N(X+Y)^α ≥ N(X)^α + N(Y)^α`.
pub fn epi_exponent(s: f64, r: f64, dim: usize) -> Result<f64> {
    let r0 = exponent_threshold(s, dim)?;
    check_s_r(s, r, dim)?;
    if r <= r0 {
        return domain(format!("r = {r} must exceed r0 = {r0}"));
    }
    let num = r.ln() + (r + 1.0) * ((r + 1.0) / (2.0 * r)).ln() + big_c_s(s, r, dim)?;
    let alpha = 1.0 / (1.0 + num / ((1.0 - r) * std::f64::consts::LN_2));
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("α = {alpha} is not positive")));
    }
    Ok(alpha)
}

/// Every constant available at `(s, r, d, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub s: f64,
    pub r: f64,
    pub dim: usize,
    pub n: usize,
    pub r_prime: f64,
    pub c: f64,
    pub log_c: f64,
    pub big_c: f64,
    pub r0: f64,
    /// Only defined for `r > r0`.
    pub alpha: Option<f64>,
    pub c_at_most_one: bool,
}

impl ConstantBundle {
    pub fn compute(s: f64, r: f64, dim: usize, n: usize) -> Result<Self> {
        let log_c = log_epi_constant(s, r, dim, n)?;
        let r0 = exponent_threshold(s, dim)?;
        let alpha = if r > r0 {
            Some(epi_exponent(s, r, dim)?)
        } else {
            None
        };
        Ok(Self {
            s,
            r,
            dim,
            n,
            r_prime: holder_conjugate(r)?,
            c: log_c.exp(),
            log_c,
            big_c: big_c_s(s, r, dim)?,
            r0,
            alpha,
            c_at_most_one: log_c <= 0.0,
        })
    }
}

/// Result of searching the simplex for values of `F` below the uniform point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexMinReport {
    pub s: f64,
    pub r: f64,
    pub dim: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub min_found: f64,
    pub argmin: Vec<f64>,
    pub at_uniform: f64,
    pub log_c: f64,
}

impl SimplexMinReport {
    /// Uniform point is minimal and matches the closed-form constant.
    pub fn holds(&self) -> bool {
        self.at_uniform <= self.min_found + 1e-9
            && (self.at_uniform - self.log_c).abs() <= 1e-9 * self.log_c.abs().max(1.0)
    }
}

/// Evaluates `F` at the uniform point, all vertices and edge midpoints, and
/// `samples` seeded random points of the simplex.
pub fn verify_simplex_min(
    s: f64,
    r: f64,
    dim: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<SimplexMinReport> {
    if samples < 1000 {
        return domain(format!("samples = {samples}: need at least 1000"));
    }
    let log_c = log_epi_constant(s, r, dim, n)?;
    let at_uniform = objective_f(&SimplexWeights::uniform(n), s, r, dim)?;
    let mut candidates: Vec<SimplexWeights> =
        (0..n).map(|i| SimplexWeights::vertex(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0.0; n];
            v[i] = 0.5;
            v[j] = 0.5;
            candidates.push(SimplexWeights(v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.extend((0..samples).map(|_| SimplexWeights::sample(n, &mut rng)));
    let mut min_found = f64::INFINITY;
    let mut argmin = Vec::new();
    for lam in &candidates {
        let v = objective_f(lam, s, r, dim)?;
        if v < min_found {
            min_found = v;
            argmin = lam.0.clone();
        }
    }
    Ok(SimplexMinReport {
        s,
        r,
        dim,
        n,
        samples,
        seed,
        min_found,
        argmin,
        at_uniform,
        log_c,
    })
}

/// Per-`k` quantities from the monotonicity argument for `-g_k/H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostics {
    pub k: usize,
    /// Smallest forward difference of `-g_k/H` on the λ grid.
    pub min_diff_g_over_h: f64,
    pub min_diff_w1: f64,
    pub min_diff_w2: f64,
    /// `U(0) = a² + b² + 4ab` at `x = 0`.
    pub u_at_zero: f64,
    /// `(max U - min U) / |U(0)|` over `x ∈ [0, 1/(2|r'|)]`.
    pub u_relative_spread: f64,
    pub t_min: f64,
    /// `1/|r'| ≤ (2/(1+√3))(1/(k|s|) - 1)`.
    pub window_condition: bool,
}

/// Numerical companion to the proof that the sup defining `α` sits at `λ = 1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioDiagnostics {
    pub s: f64,
    pub r: f64,
    pub dim: usize,
    pub grid_pts: usize,
    pub r0: f64,
    pub above_r0: bool,
    /// Smallest forward difference of `-A/H` on the λ grid.
    pub min_diff_a_over_h: f64,
    /// Smallest forward difference of the full objective `-F/H`.
    pub min_diff_total: f64,
    pub per_k: Vec<KDiagnostics>,
    /// `(2/(1+√3))(1/(d|s|) - 1) < 1/|r'| < 1/(d|s|) - 1`, where no claim is made.
    pub in_open_range: bool,
    /// `Some(pass)` when `r > r0`, `None` otherwise.
    pub contracts_hold: Option<bool>,
}

fn min_forward_diff(v: &[f64]) -> f64 {
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the ratio, `W`, `T` and `U` diagnostics for two summands.
pub fn ratio_diagnostics(s: f64, r: f64, dim: usize, grid_pts: usize) -> Result<RatioDiagnostics> {
    check_s_r(s, r, dim)?;
    if grid_pts < 3 {
        return domain("grid_pts must be at least 3");
    }
    let r0 = exponent_threshold(s, dim)?;
    let a_abs = holder_conjugate(r)?.abs();
    let lambdas: Vec<f64> = (0..grid_pts)
        .map(|j| RATIO_GRID_START + (0.5 - RATIO_GRID_START) * j as f64 / (grid_pts - 1) as f64)
        .collect();
    let pair = |l: f64| SimplexWeights(vec![l, 1.0 - l]);
    let entropy = |l: f64| discrete_entropy(&pair(l));
    let neg_a_over_h = lambdas
        .iter()
        .map(|&l| Ok(-a_of_lambda(&pair(l), r)? / entropy(l)))
        .collect::<Result<Vec<f64>>>()?;
    let neg_f_over_h = lambdas
        .iter()
        .map(|&l| Ok(-objective_f(&pair(l), s, r, dim)? / entropy(l)))
        .collect::<Result<Vec<f64>>>()?;

    let golden = 2.0 / (1.0 + 3f64.sqrt());
    let x_end = 0.5 / a_abs;
    let xs: Vec<f64> = (0..grid_pts)
        .map(|j| x_end * j as f64 / (grid_pts - 1) as f64)
        .collect();
    let mut per_k = Vec::with_capacity(dim);
    for k in 1..=dim {
        let ks = k as f64 * s;
        let neg_g_over_h = lambdas
            .iter()
            .map(|&l| Ok(-g_k_of_lambda(&pair(l), r, s, k, dim)? / entropy(l)))
            .collect::<Result<Vec<f64>>>()?;
        let ab = |x: f64| {
            let y = 1.0 / a_abs - x;
            (1.0 + ks * (1.0 + x), 1.0 + ks * (1.0 + y), y)
        };
        let (mut w1, mut w2, mut u, mut t) = (vec![], vec![], vec![], vec![]);
        for &x in &xs {
            let (a, b, y) = ab(x);
            w1.push(x * y * (1.0 / a + 1.0 / b));
            w2.push(x * y * (1.0 / (a * a) + 1.0 / (b * b)));
            u.push(a * a + b * b + 4.0 * a * b - 2.0 * ks * ks * x * y);
            t.push(a * b * (a * a + b * b) - 2.0 * ks * ks * x * y * (a * a + a * b + b * b));
        }
        let (a0, b0, _) = ab(0.0);
        let u_at_zero = a0 * a0 + b0 * b0 + 4.0 * a0 * b0;
        let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
        per_k.push(KDiagnostics {
            k,
            min_diff_g_over_h: min_forward_diff(&neg_g_over_h),
            min_diff_w1: min_forward_diff(&w1),
            min_diff_w2: min_forward_diff(&w2),
            u_at_zero,
            u_relative_spread: (u_max - u_min) / u_at_zero.abs(),
            t_min: t.iter().copied().fold(f64::INFINITY, f64::min),
            window_condition: 1.0 / a_abs <= golden * (1.0 / (k as f64 * s.abs()) - 1.0),
        });
    }
    let outer = 1.0 / (dim as f64 * s.abs()) - 1.0;
    let min_diff_a_over_h = min_forward_diff(&neg_a_over_h);
    let above_r0 = r > r0;
    let contracts_hold = above_r0.then(|| {
        min_diff_a_over_h >= -1e-9
            && per_k.iter().all(|d| {
                d.min_diff_g_over_h >= -1e-9 && d.u_relative_spread <= 1e-9 && d.t_min >= -1e-9
            })
    });
    Ok(RatioDiagnostics {
        s,
        r,
        dim,
        grid_pts,
        r0,
        above_r0,
        min_diff_a_over_h,
        min_diff_total: min_forward_diff(&neg_f_over_h),
        per_k,
        in_open_range: golden * outer < 1.0 / a_abs && 1.0 / a_abs < outer,
        contracts_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> SimplexWeights {
        SimplexWeights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn conjugates() {
        assert_eq!(holder_conjugate(0.5).unwrap(), -1.0);
        assert_eq!(holder_conjugate(2.0).unwrap(), 2.0);
        assert!((holder_conjugate(0.75).unwrap() + 3.0).abs() < 1e-12);
        assert!(holder_conjugate(1.0).is_err());
    }

    #[test]
    fn discrete_entropies() {
        assert!((discrete_entropy(&w(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(discrete_entropy(&w(&[1.0, 0.0])), 0.0);
        assert!((discrete_entropy(&SimplexWeights::uniform(3)) - 3f64.ln()).abs() < 1e-15);
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn a_values() {
        let v = a_of_lambda(&w(&[0.5, 0.5]), 0.5).unwrap();
        let expected = 3.0 * 1.5f64.ln() - 2.0 * 2f64.ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v + 0.16989903679539742).abs() < 1e-14);
        assert!(a_of_lambda(&w(&[1.0, 0.0, 0.0]), 0.3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn g_vanishes_at_vertices_and_s_zero() {
        let e1 = w(&[0.0, 1.0, 0.0]);
        assert!(g_k_of_lambda(&e1, 0.5, -0.1, 1, 1).unwrap().abs() < 1e-15);
        let lam = w(&[0.2, 0.3, 0.5]);
        assert_eq!(g_k_of_lambda(&lam, 0.5, 0.0, 1, 1).unwrap(), 0.0);
        let a = g_k_of_lambda(&lam, 0.5, -0.1, 2, 2).unwrap();
        let b = g_k_of_lambda(&w(&[0.5, 0.2, 0.3]), 0.5, -0.1, 2, 2).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn epi_constant_values() {
        let limit = epi_constant(0.0, 0.5, 1, 2).unwrap();
        assert!((limit - 0.84375).abs() < 1e-14);
        let near = epi_constant(-1e-12, 0.5, 1, 2).unwrap();
        assert!((near - 0.84375).abs() < 1e-10);
        let c = epi_constant(-0.1, 0.5, 1, 2).unwrap();
        assert!((c - 0.742241441132701).abs() < 1e-13);
        assert!((epi_constant(-0.1, 0.5, 2, 3).unwrap() - 0.5784000812642761).abs() < 1e-13);
        assert!(epi_constant(-0.1, 0.05, 1, 2).is_err());
        assert!(epi_constant(-2.0, 0.5, 1, 2).is_err());
        // c equals exp(F) at the uniform point
        let f = objective_f(&SimplexWeights::uniform(2), -0.1, 0.5, 1).unwrap();
        assert!((f.exp() / c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_constants() {
        let expected = 2.0 * (0.8f64.ln() + 0.5 * 0.9f64.ln() - 1.5 * 0.85f64.ln());
        assert!((big_c_s(-0.1, 0.5, 1).unwrap() - expected).abs() < 1e-14);
        assert!(big_c_s(-1e-15, 0.5, 1).unwrap().abs() < 1e-13);
        let r0 = exponent_threshold(-0.1, 1).unwrap();
        assert!((r0 - 1.0 / (1.0 + 2.0 / (1.0 + 3f64.sqrt()) * 9.0)).abs() < 1e-15);
        assert!((r0 - 0.13178).abs() < 1e-5);
        assert!(exponent_threshold(-0.999, 1).unwrap() > 0.99);
        assert!(exponent_threshold(-1e-6, 1).unwrap() < 1e-5);
        assert!((epi_exponent(-0.1, 0.9, 1).unwrap() - 1.0604033590057744).abs() < 1e-12);
        assert!((epi_exponent(-0.1, 0.5, 1).unwrap() - 1.7545076798932004).abs() < 1e-12);
        assert!(epi_exponent(-0.1, 0.12, 1).is_err());
    }

    #[test]
    fn alpha_tends_to_one() {
        let mut prev = f64::INFINITY;
        for k in 3..7 {
            let a = epi_exponent(-1e-9, 1.0 - 10f64.powi(-k), 1).unwrap();
            assert!((a - 1.0).abs() < prev);
            prev = (a - 1.0).abs();
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn alpha_is_sup_at_half() {
        let half = w(&[0.5, 0.5]);
        let f = objective_f(&half, -0.1, 0.9, 1).unwrap();
        let sup = -f / discrete_entropy(&half);
        assert!((1.0 / (1.0 - sup) - epi_exponent(-0.1, 0.9, 1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn simplex_min_small() {
        let rep = verify_simplex_min(-0.1, 0.5, 1, 2, 1000, 7).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(rep.at_uniform <= 0.0);
        assert!(verify_simplex_min(-0.1, 0.5, 1, 2, 10, 7).is_err());
    }

    #[test]
    fn diagnostics_in_proof_range() {
        let d = ratio_diagnostics(-0.1, 0.9, 1, 1000).unwrap();
        assert_eq!(d.contracts_hold, Some(true), "{d:?}");
        let k1 = &d.per_k[0];
        assert!(k1.window_condition);
        let below = ratio_diagnostics(-0.1, 0.11, 1, 200).unwrap();
        assert_eq!(below.contracts_hold, None);
    }

    #[test]
    fn bundle_json() {
        let b = ConstantBundle::compute(-0.1, 0.5, 1, 2).unwrap();
        assert_eq!(b.r_prime, -1.0);
        assert!(b.alpha.is_some());
        let v = serde_json::to_value(&b).unwrap();
        assert!(v["c"].as_f64().unwrap() > 0.0);
    }
}
