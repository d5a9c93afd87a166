//! s-concavity certification on grids, the log-concavity of
//! `G(r) = C(r)·∫f^r`, and the entropy comparison it implies.
//!
//! A density is s-concave when `f(m) ≥ M_s(f(x), f(y))` for every midpoint
//! `m = (x+y)/2` with `f(x)f(y) > 0`, where `M_s` is the two-point s-mean.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::GridDensity;
use crate::entropy::{PowerIntegral, RenyiOrder};
use crate::error::{domain, Error, Result};

/// Default absolute tolerance on s-mean comparisons.
pub const CERT_TOL: f64 = 1e-9;

/// Concavity exponent `s` together with the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SConcaveParam {
    pub s: f64,
    pub dim: usize,
}

impl SConcaveParam {
    /// Any real `s`; use [`SConcaveParam::for_epi`] for the inequality range.
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        if s.is_nan() || dim == 0 {
            return domain("s must be a number and dim positive");
        }
        Ok(Self { s, dim })
    }

    /// Requires `-1/dim < s < 0`.
    pub fn for_epi(s: f64, dim: usize) -> Result<Self> {
        let p = Self::new(s, dim)?;
        if !(s > -1.0 / dim as f64 && s < 0.0) {
            return domain(format!("s = {s}: s > −1/d required and s < 0"));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
}

/// A triple of abscissae where the midpoint inequality was tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub midpoint: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub verdict: Verdict,
    /// Most negative `f(m) - M_s(f(x), f(y))` seen, or 0 when none is negative.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
}

impl CertReport {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Two-point s-mean with equal weights, including the limits
/// `s = 0` (geometric), `s = -∞` (min) and `s = +∞` (max).
pub fn s_mean(a: f64, b: f64, s: f64) -> f64 {
    if s == f64::NEG_INFINITY {
        a.min(b)
    } else if s == f64::INFINITY {
        a.max(b)
    } else if s == 0.0 {
        (a * b).sqrt()
    } else if s < 0.0 && (a == 0.0 || b == 0.0) {
        0.0
    } else if a == 0.0 || b == 0.0 {
        (0.5 * (a.powf(s) + b.powf(s))).powf(1.0 / s)
    } else {
        // stays accurate as s approaches 0
        let mean_m1 = 0.5 * ((s * a.ln()).exp_m1() + (s * b.ln()).exp_m1());
        (mean_m1.ln_1p() / s).exp()
    }
}

/// Midpoint test of s-concavity over all cell pairs of the same parity.
///
/// Positive cells must form one contiguous run; otherwise the report is a
/// refutation whose witness straddles a zero cell.
pub fn certify_s_concave(f: &GridDensity, s: f64, tol: f64) -> Result<CertReport> {
    if !(tol > 0.0) {
        return domain(format!("tolerance {tol} must be positive"));
    }
    if s.is_nan() {
        return domain("s is NaN");
    }
    let v = f.values();
    let (first, last) = f
        .positive_range()
        .ok_or_else(|| Error::InvalidGrid("no positive cells".into()))?;
    let margin = |i: usize, j: usize| v[(i + j) / 2] - s_mean(v[i], v[j], s);
    let witness = |i: usize, j: usize| Witness {
        x: f.center(i),
        y: f.center(j),
        midpoint: f.center((i + j) / 2),
        margin: margin(i, j),
    };

    if let Some(gap) = (first..=last).find(|&i| v[i] == 0.0) {
        let reach = (gap - first).max(last - gap);
        let pair = (1..=reach)
            .filter(|&k| k <= gap && gap + k <= last)
            .map(|k| (gap - k, gap + k))
            .find(|&(i, j)| v[i] > 0.0 && v[j] > 0.0)
            .unwrap_or((first, last));
        let w = witness(pair.0, pair.1);
        return Ok(CertReport {
            verdict: Verdict::Refuted,
            worst_margin: w.margin.min(0.0),
            witness: Some(w),
        });
    }

    // Compare in transformed space (f^s, or log f at s = 0) where the s-mean
    // is an arithmetic mean, and only evaluate the exact margin on failures.
    let t: Vec<f64> = v
        .iter()
        .map(|&x| {
            if s == 0.0 {
                x.ln()
            } else if s.is_finite() {
                x.powf(s)
            } else {
                x
            }
        })
        .collect();
    let suspicious = |i: usize, j: usize, m: usize| -> bool {
        if s.is_infinite() {
            return true;
        }
        let avg = 0.5 * (t[i] + t[j]);
        if s < 0.0 {
            t[m] > avg
        } else {
            t[m] < avg
        }
    };
    let mut worst = 0.0f64;
    let mut worst_pair = None;
    for i in first..=last {
        for j in (i + 2..=last).step_by(2) {
            let m = (i + j) / 2;
            if suspicious(i, j, m) {
                let mg = margin(i, j);
                if mg < worst {
                    worst = mg;
                    worst_pair = Some((i, j));
                }
            }
        }
    }
    let refuted = worst < -tol;
    Ok(CertReport {
        verdict: if refuted {
            Verdict::Refuted
        } else {
            Verdict::Certified
        },
        worst_margin: worst,
        witness: if refuted {
            worst_pair.map(|(i, j)| witness(i, j))
        } else {
            None
        },
    })
}

/// `C(r) = Π_{k=1..d} (r + k s)`.
pub fn c_of_r(r: f64, s: f64, dim: usize) -> f64 {
    (1..=dim).map(|k| r + k as f64 * s).product()
}

fn log_c_of_r(r: f64, s: f64, dim: usize) -> f64 {
    (1..=dim).map(|k| (r + k as f64 * s).ln()).sum()
}

fn check_r(r: f64, s: f64, dim: usize) -> Result<()> {
    let lo = (-s * dim as f64).max(0.0);
    if !(r > lo && r.is_finite()) {
        return domain(format!("r = {r} must exceed max(0, −sd) = {lo}"));
    }
    Ok(())
}

/// `G(r) = C(r)·∫f^r`.
pub fn g_function<F: PowerIntegral + ?Sized>(f: &F, s: f64, r: f64) -> Result<f64> {
    check_r(r, s, f.dim())?;
    Ok(c_of_r(r, s, f.dim()) * f.power_integral(r))
}

/// Smallest midpoint-concavity margin of `log G` over consecutive triples of
/// `r_grid` whose middle point bisects the outer two.
pub fn check_g_logconcave<F: PowerIntegral + ?Sized>(f: &F, s: f64, r_grid: &[f64]) -> Result<f64> {
    if r_grid.len() < 3 {
        return domain("need at least three orders");
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("orders must be strictly increasing");
    }
    let d = f.dim();
    let log_g = r_grid
        .iter()
        .map(|&r| {
            check_r(r, s, d)?;
            Ok(log_c_of_r(r, s, d) + f.power_integral(r).ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = f64::INFINITY;
    for k in 0..r_grid.len() - 2 {
        let (r1, r2, r3) = (r_grid[k], r_grid[k + 1], r_grid[k + 2]);
        if (r2 - 0.5 * (r1 + r3)).abs() > 1e-9 * r3.abs().max(1.0) {
            continue;
        }
        worst = worst.min(log_g[k + 1] - 0.5 * (log_g[k] + log_g[k + 2]));
    }
    if worst == f64::INFINITY {
        return domain("no equally spaced triple in the order grid");
    }
    Ok(worst)
}

/// `(h_q(f), h_r(f) + log[C(r)^{1/(1-r)} C(1)^{(q-r)/((1-q)(1-r))} / C(q)^{1/(1-q)}])`.
///
/// For s-concave `f` the first component dominates the second.
pub fn entropy_compare_bound<F: PowerIntegral + ?Sized>(
    f: &F,
    s: f64,
    r: f64,
    q: f64,
) -> Result<(f64, f64)> {
    let d = f.dim();
    let lo = -s * d as f64;
    if !(lo < r && r < q && q < 1.0) {
        return domain(format!(
            "need −sd < r < q < 1, got −sd = {lo}, r = {r}, q = {q}"
        ));
    }
    if !(r > 0.0) {
        return domain(format!("r = {r} must be positive"));
    }
    let correction = log_c_of_r(r, s, d) / (1.0 - r)
        + (q - r) / ((1.0 - q) * (1.0 - r)) * log_c_of_r(1.0, s, d)
        - log_c_of_r(q, s, d) / (1.0 - q);
    let lhs = f.renyi(RenyiOrder::finite(q)?)?;
    let rhs = f.renyi(RenyiOrder::finite(r)?)? + correction;
    Ok((lhs, rhs))
}

/// Random s-concave density on a grid of step `h`.
///
/// A random convex `φ` (quadratic plus two hinges) on `[-L, L]` is mapped to
/// `(1 + φ)^{1/s}` for `s < 0`, `e^{-φ}` for `s = 0` and `(1 - φ/K)^{1/s}` for
/// `s > 0`, with `K` keeping the support the whole interval. Heights are
/// scaled to at most 1 before normalizing.
pub fn random_s_concave<R: Rng>(s: f64, h: f64, rng: &mut R) -> Result<GridDensity> {
    if !s.is_finite() || !(h > 0.0) {
        return domain(format!("need finite s and h > 0 (s = {s}, h = {h})"));
    }
    let half = rng.gen_range(1.0..4.0);
    let quad = rng.gen_range(0.0..2.0);
    let (b1, b2) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
    let (t1, t2) = (rng.gen_range(-half..half), rng.gen_range(-half..half));
    let raw = move |x: f64| quad * x * x + b1 * (x - t1).max(0.0) + b2 * (t2 - x).max(0.0);
    let n = (2.0 * half / h).round().max(8.0) as usize;
    let step = 2.0 * half / n as f64;
    let mid = |i: usize| -half + (i as f64 + 0.5) * step;
    // shift so the grid minimum is 0: the peak value is 1 and nothing
    // underflows when |1/s| is large
    let low = (0..n).map(|i| raw(mid(i))).fold(f64::INFINITY, f64::min);
    let phi = move |x: f64| (raw(x) - low).max(0.0);
    let top = (0..=n)
        .map(|i| phi(-half + i as f64 * step))
        .fold(0.0, f64::max);
    let k = top * 1.1 + 0.5;
    let shape = move |x: f64| {
        let u = phi(x);
        if s < 0.0 {
            (1.0 + u).powf(1.0 / s)
        } else if s == 0.0 {
            (-u).exp()
        } else {
            ((k - u) / k).powf(1.0 / s)
        }
    };
    let values: Vec<f64> = (0..n).map(|i| shape(mid(i))).collect();
    GridDensity::normalized(-half, step, values)
}
