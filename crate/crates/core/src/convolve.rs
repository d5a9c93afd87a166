//! Convolution of grid densities and central-limit iteration.
//!
//! Small inputs are convolved by direct summation. Large inputs go through
//! FFT, with both operands split into magnitude bands first: an FFT product
//! carries an absolute error proportional to the operand norms, so convolving
//! bands separately keeps far tails accurate to many more digits than a
//! single FFT would. Rényi entropies of order below one weight those tails
//! heavily.

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::density::{moments, scale_density, unit_ball_volume, GridDensity};
use crate::entropy::{gaussian_renyi, renyi_entropy, GaussianSpec, RenyiOrder};
use crate::error::{domain, Error, Result};

/// Inputs with fewer cells than this are convolved by direct summation.
pub const DIRECT_CUTOFF: usize = 4096;

/// Largest supported number of doublings in [`clt_iterate`].
pub const MAX_DOUBLINGS: usize = 8;

/// Relative magnitudes separating the FFT bands.
const BAND_RATIOS: [f64; 5] = [1e-4, 1e-8, 1e-12, 1e-16, 1e-20];

/// Density of `X + Y` for independent `X ~ f`, `Y ~ g` on a common step.
pub fn convolve(f: &GridDensity, g: &GridDensity) -> Result<GridDensity> {
    let h = f.h();
    if (f.h() - g.h()).abs() > 1e-12 * h {
        return Err(Error::MismatchedSteps(f.h(), g.h()));
    }
    let raw = if f.len().max(g.len()) < DIRECT_CUTOFF {
        direct_convolve(f.values(), g.values())
    } else {
        banded_fft_convolve(f.values(), g.values())
    };
    let values = raw.into_iter().map(|v| v * h).collect();
    GridDensity::normalized(f.x0() + g.x0() + 0.5 * h, h, values)
}

/// `c_k = Σ_i a_i b_{k-i}`.
pub fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

/// Plain FFT convolution; negative round-off is clamped to zero.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let plan = FftPlan::new(a.len() + b.len() - 1);
    let fa = plan.forward(a);
    let fb = plan.forward(b);
    plan.product(&fa, &fb, 0.0)
}

/// FFT convolution of magnitude bands, each pair product cleaned of its own
/// round-off floor before summation.
pub fn banded_fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len() + b.len() - 1;
    let plan = FftPlan::new(n);
    let bands_a = split_bands(a);
    let same = std::ptr::eq(a, b);
    let spec_a: Vec<_> = bands_a
        .iter()
        .map(|(v, norm)| (plan.forward(v), *norm))
        .collect();
    let spec_b: Vec<_> = if same {
        Vec::new()
    } else {
        split_bands(b)
            .iter()
            .map(|(v, norm)| (plan.forward(v), *norm))
            .collect()
    };
    let spec_b = if same { &spec_a } else { &spec_b };
    let eps_log = 64.0 * f64::EPSILON * (plan.len as f64).log2().max(1.0);
    let mut out = vec![0.0; n];
    for (i, (sa, na)) in spec_a.iter().enumerate() {
        for (j, (sb, nb)) in spec_b.iter().enumerate() {
            if same && j < i {
                continue;
            }
            let weight = if same && j > i { 2.0 } else { 1.0 };
            let part = plan.product(sa, sb, eps_log * na * nb);
            for (o, p) in out.iter_mut().zip(part) {
                *o += weight * p;
            }
        }
    }
    out
}

/// Splits `a` into full-length copies holding one magnitude band each,
/// paired with the band's Euclidean norm. Empty bands are dropped.
fn split_bands(a: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let peak = a.iter().copied().fold(0.0, f64::max);
    let mut edges = vec![f64::INFINITY];
    edges.extend(BAND_RATIOS.iter().map(|r| r * peak));
    edges.push(0.0);
    edges
        .windows(2)
        .filter_map(|w| {
            let (hi, lo) = (w[0], w[1]);
            let band: Vec<f64> = a
                .iter()
                .map(|&v| if v > lo && v <= hi { v } else { 0.0 })
                .collect();
            let norm = band.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 0.0).then_some((band, norm))
        })
        .collect()
}

struct FftPlan {
    len: usize,
    out_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    fn new(out_len: usize) -> Self {
        let len = out_len.next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            len,
            out_len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    fn forward(&self, a: &[f64]) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for (z, &v) in buf.iter_mut().zip(a) {
            z.re = v;
        }
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform of `fa·fb`, zeroing entries at or below `floor`.
    fn product(&self, fa: &[Complex<f64>], fb: &[Complex<f64>], floor: f64) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = fa.iter().zip(fb).map(|(x, y)| x * y).collect();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf[..self.out_len]
            .iter()
            .map(|z| {
                let v = z.re * scale;
                if v > floor {
                    v
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// One doubling step: law of `(X + X')/√2` for i.i.d. copies, resampled
/// back onto the step of `f`.
pub fn clt_double(f: &GridDensity) -> Result<GridDensity> {
    let sum = convolve(f, f)?;
    let scaled = scale_density(&sum, std::f64::consts::FRAC_1_SQRT_2)?;
    Ok(scaled.resample(f.h())?.renormalized())
}

/// Densities of `Z_{2^k}` for `k = 0..=k_max`, after centering `f`.
pub fn clt_densities(f: &GridDensity, k_max: usize) -> Result<Vec<GridDensity>> {
    if k_max > MAX_DOUBLINGS {
        return domain(format!("k_max = {k_max} exceeds {MAX_DOUBLINGS}"));
    }
    let mut out = Vec::with_capacity(k_max + 1);
    let mut cur = f.centered();
    for _ in 0..k_max {
        let next = clt_double(&cur)?;
        out.push(cur);
        cur = next;
    }
    out.push(cur);
    Ok(out)
}

/// One row of a [`CltTrace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltEntry {
    pub n: u64,
    /// `h_r(Z_n)` for each order of the trace, in order.
    pub entropies: Vec<f64>,
    pub variance: f64,
}

/// Entropies of normalized sums along the doubling sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltTrace {
    pub orders: Vec<RenyiOrder>,
    pub entries: Vec<CltEntry>,
    /// Gaussian entropies with the variance of the base density.
    pub reference: Vec<f64>,
    pub sigma2: f64,
}

impl CltTrace {
    /// `|h_r(Z_n) - h_r(Z)|` along the trace for order index `j`.
    pub fn gaps(&self, j: usize) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| (e.entropies[j] - self.reference[j]).abs())
            .collect()
    }

    /// CSV rows `n,order,h_r,reference,gap`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "order", "h_r", "reference", "gap"])?;
        for e in &self.entries {
            for (j, o) in self.orders.iter().enumerate() {
                let h = e.entropies[j];
                let reference = self.reference[j];
                wtr.write_record([
                    e.n.to_string(),
                    o.to_string(),
                    h.to_string(),
                    reference.to_string(),
                    (h - reference).to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs `k_max` doublings of `f` and records the requested entropies.
pub fn clt_iterate(f: &GridDensity, k_max: usize, orders: &[RenyiOrder]) -> Result<CltTrace> {
    let (_, sigma2) = moments(f);
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::NonFinite(format!("variance {sigma2}")));
    }
    let gauss = GaussianSpec::new(1, sigma2)?;
    let reference = orders
        .iter()
        .map(|&o| gaussian_renyi(gauss, o))
        .collect::<Result<Vec<_>>>()?;
    let entries = clt_densities(f, k_max)?
        .iter()
        .enumerate()
        .map(|(k, rho)| {
            let entropies = orders
                .iter()
                .map(|&o| renyi_entropy(rho, o))
                .collect::<Result<Vec<_>>>()?;
            if let Some(bad) = entropies.iter().find(|h| !h.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "entropy {bad} at n = {}",
                    1u64 << k
                )));
            }
            Ok(CltEntry {
                n: 1 << k,
                entropies,
                variance: moments(rho).1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CltTrace {
        orders: orders.to_vec(),
        entries,
        reference,
        sigma2,
    })
}

/// True when `f` is even about its mass center and non-increasing away from
/// it. Comparisons are relative to the peak height.
pub fn is_symmetric_unimodal(f: &GridDensity, tol: f64) -> bool {
    let v = f.values();
    let n = v.len() as i64;
    let slack = tol * f.max_value();
    let (mean, _) = moments(f);
    // mirror index: cell i pairs with cell twice_c - i
    let twice_c = (2.0 * ((mean - f.x0()) / f.h() - 0.5)).round() as i64;
    let at = |i: i64| {
        if (0..n).contains(&i) {
            v[i as usize]
        } else {
            0.0
        }
    };
    for i in 0..n {
        if (at(i) - at(twice_c - i)).abs() > slack {
            return false;
        }
    }
    for i in 0..n - 1 {
        let (a, b) = (at(i), at(i + 1));
        // left of the center heights rise, right of it they fall
        if 2 * (i + 1) <= twice_c {
            if a > b + slack {
                return false;
            }
        } else if 2 * i >= twice_c && b > a + slack {
            return false;
        }
    }
    true
}

/// `c_d = 2d / ((2^d - 1) ω_d)`.
pub fn hoeffding_constant(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 * d / ((2f64.powi(dim as i32) - 1.0) * unit_ball_volume(dim))
}

/// Largest excess of `ρ_n(x)` over `c_d·exp(-(|x|-1)²/(2d²R²))` among cells
/// with `|x| > 2`; `-∞` when no cell qualifies.
pub fn hoeffding_tail_check(rho_n: &GridDensity, radius: f64, dim: usize) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) || dim == 0 {
        return domain("need R > 0 and dim ≥ 1");
    }
    if !is_symmetric_unimodal(rho_n, 1e-6) {
        return domain("ρ_n is not symmetric unimodal");
    }
    let c = hoeffding_constant(dim);
    let d = dim as f64;
    Ok(rho_n
        .centers()
        .zip(rho_n.values())
        .filter(|(x, _)| x.abs() > 2.0)
        .map(|(x, &v)| v - c * (-(x.abs() - 1.0).powi(2) / (2.0 * d * d * radius * radius)).exp())
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_gaussian, make_two_block, make_uniform};

    #[test]
    fn triangle_from_uniforms() {
        let u = make_uniform(0.0, 1.0, 1e-3).unwrap();
        let t = convolve(&u, &u).unwrap();
        assert!((t.mass() - 1.0).abs() < 1e-12);
        assert!((t.value_at(1.0) - 1.0).abs() < 1e-3);
        assert!((t.value_at(0.5) - 0.5).abs() < 1e-3);
        assert!((t.x0() - 0.0005).abs() < 1e-12);
        assert!(is_symmetric_unimodal(&t, 1e-9));
    }

    #[test]
    fn mismatched_steps_rejected() {
        let a = make_uniform(0.0, 1.0, 1e-2).unwrap();
        let b = make_uniform(0.0, 1.0, 2e-2).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::MismatchedSteps(..))));
    }

    #[test]
    fn direct_and_fft_agree() {
        let f = make_gaussian(1.0, 0.01, 8.0).unwrap();
        let g = make_two_block_with_offset();
        let a = direct_convolve(f.values(), g.values());
        let b = banded_fft_convolve(f.values(), g.values());
        let c = fft_convolve(f.values(), g.values());
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            assert!((x - y).abs() < 1e-10, "{x} {y}");
            assert!((x - z).abs() < 1e-10);
        }
    }

    fn make_two_block_with_offset() -> GridDensity {
        crate::density::make_two_block_with_step(0.01).unwrap()
    }

    #[test]
    fn banded_fft_resolves_tails() {
        // Gaussian tails reach far below double precision relative to the peak
        let f = make_gaussian(1.0, 0.05, 9.0).unwrap();
        let direct = direct_convolve(f.values(), f.values());
        let banded = banded_fft_convolve(f.values(), f.values());
        let plain = fft_convolve(f.values(), f.values());
        let peak = direct.iter().copied().fold(0.0, f64::max);
        for (x, y) in direct.iter().zip(&banded) {
            if *x > 1e-12 * peak {
                assert!((x - y).abs() <= 1e-6 * x, "{x} {y}");
            }
        }
        let low_order = |v: &[f64]| {
            v.iter()
                .filter(|&&x| x > 0.0)
                .map(|x| x.powf(0.25))
                .sum::<f64>()
        };
        let exact = low_order(&direct);
        assert!((low_order(&banded) / exact - 1.0).abs() < 1e-9);
        // a single FFT leaves round-off noise that dominates the low-order sum
        assert!((low_order(&plain) / exact - 1.0).abs() > 1e-6);
    }

    #[test]
    fn variance_adds() {
        let u = make_uniform(-1.0, 1.0, 1e-3).unwrap();
        let t = make_two_block();
        let t = t.resample(u.h()).unwrap();
        let (_, vu) = moments(&u);
        let (_, vt) = moments(&t);
        let (_, vs) = moments(&convolve(&u, &t).unwrap());
        assert!((vs - vu - vt).abs() < 1e-6);
    }

    #[test]
    fn clt_zero_doublings() {
        let f = make_two_block_with_step_centered();
        let trace = clt_iterate(&f, 0, &[RenyiOrder::Finite(2.0)]).unwrap();
        assert_eq!(trace.entries.len(), 1);
        assert_eq!(trace.entries[0].n, 1);
        let direct = renyi_entropy(&f, RenyiOrder::Finite(2.0)).unwrap();
        assert!((trace.entries[0].entropies[0] - direct).abs() < 1e-12);
        assert!(clt_iterate(&f, 9, &[RenyiOrder::Shannon]).is_err());
    }

    fn make_two_block_with_step_centered() -> GridDensity {
        crate::density::make_two_block_with_step(0.01)
            .unwrap()
            .centered()
    }

    #[test]
    fn clt_keeps_variance() {
        let s3 = 3f64.sqrt();
        let f = make_uniform(-s3, s3, 1e-2).unwrap();
        let (_, v0) = moments(&f);
        for rho in clt_densities(&f, 5).unwrap() {
            let (m, v) = moments(&rho);
            assert!(m.abs() < 1e-9);
            assert!((v - v0).abs() < 1e-4, "{v} vs {v0}");
        }
    }

    #[test]
    fn unimodality_detection() {
        assert!(!is_symmetric_unimodal(&make_two_block(), 1e-9));
        let g = make_gaussian(2.0, 0.01, 10.0).unwrap();
        assert!(is_symmetric_unimodal(&g, 1e-9));
    }

    #[test]
    fn hoeffding_constants() {
        assert!((hoeffding_constant(1) - 1.0).abs() < 1e-15);
        assert!((hoeffding_constant(2) - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn hoeffding_tail_on_uniform_sums() {
        let u = make_uniform(-1.0, 1.0, 1e-3).unwrap();
        let rhos = clt_densities(&u, 6).unwrap();
        assert_eq!(
            hoeffding_tail_check(&rhos[0], 1.0, 1).unwrap(),
            f64::NEG_INFINITY
        );
        for rho in [&rhos[1], &rhos[6]] {
            let excess = hoeffding_tail_check(rho, 1.0, 1).unwrap();
            assert!(excess <= 0.0, "{excess}");
        }
        assert!(hoeffding_tail_check(&make_two_block(), 1.0, 1).is_err());
    }
}
