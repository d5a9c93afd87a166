//! Couplings of a density with itself and the mass-transfer construction that
//! detects failures of (r-1)-concavity through an entropy gain.
//!
//! Start from the diagonal coupling `X̂ = Ŷ ~ f`. For a set `Λ` and a shift
//! `x0`, remove density `δ` from the diagonal over `Λ ± x0` and place it on
//! the two off-diagonal segments `(x - x0, x + x0)` and `(x + x0, x - x0)`,
//! `x ∈ Λ`. Both marginals stay equal to `f`, while the midpoint
//! `(X̂ + Ŷ)/2` gets density `f + δ(2·1_Λ - 1_{Λ+x0} - 1_{Λ-x0})`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolve::convolve;
use crate::density::{make_two_block, scale_density, GridDensity};
use crate::entropy::{entropy_power, renyi_entropy, RenyiOrder};
use crate::error::{domain, Error, Result};
use crate::sconcave::{certify_s_concave, s_mean, CERT_TOL};

/// Minimum number of cells in a reported shift set.
pub const MIN_SHIFT_CELLS: usize = 3;

/// Cells where the midpoint inequality of order `r - 1` fails for one shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSet {
    /// Shift in cells; `x0 = shift_cells · h`.
    pub shift_cells: usize,
    pub x0: f64,
    pub mask: Vec<bool>,
    /// Sum over the mask of `M_{r-1}(f(x-x0), f(x+x0)) - f(x)`.
    pub margin_total: f64,
}

impl ShiftSet {
    pub fn cells(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// Joint law of `(X̂, Ŷ)` after a mass transfer off the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferCoupling {
    pub base: GridDensity,
    pub shift_cells: usize,
    pub mask: Vec<bool>,
    pub delta: f64,
}

/// Parameters of a transfer, for export next to `f̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub x0: f64,
    pub shift_cells: usize,
    pub lambda_cells: usize,
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub delta: f64,
}

/// Density of `(X̂ + Ŷ)/2` under a [`TransferCoupling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixDensity {
    pub fhat: GridDensity,
}

impl TransferCoupling {
    pub fn x0(&self) -> f64 {
        self.shift_cells as f64 * self.base.h()
    }

    fn lam_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn summary(&self) -> TransferSummary {
        let cells: Vec<usize> = self.lam_cells().collect();
        let h = self.base.h();
        TransferSummary {
            x0: self.x0(),
            shift_cells: self.shift_cells,
            lambda_cells: cells.len(),
            lambda_start: cells
                .first()
                .map_or(f64::NAN, |&i| self.base.x0() + i as f64 * h),
            lambda_end: cells
                .last()
                .map_or(f64::NAN, |&i| self.base.x0() + (i + 1) as f64 * h),
            delta: self.delta,
        }
    }

    /// Diagonal heights after the transfer.
    pub fn diagonal(&self) -> Vec<f64> {
        let m = self.shift_cells;
        let mut d = self.base.values().to_vec();
        for i in self.lam_cells() {
            d[i + m] -= self.delta;
            d[i - m] -= self.delta;
        }
        d
    }

    /// Marginal densities of `X̂` and `Ŷ`, cell by cell.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.shift_cells;
        let mut x = self.diagonal();
        let mut y = x.clone();
        for i in self.lam_cells() {
            // first segment: X̂ = x - x0, Ŷ = x + x0; second one mirrored
            x[i - m] += self.delta;
            y[i + m] += self.delta;
            x[i + m] += self.delta;
            y[i - m] += self.delta;
        }
        (x, y)
    }

    /// True when both marginals reproduce the base density bit for bit.
    pub fn marginals_exact(&self) -> bool {
        let (x, y) = self.marginals();
        x == self.base.values() && y == self.base.values()
    }

    pub fn mix_density(&self) -> Result<MixDensity> {
        Ok(MixDensity {
            fhat: self.combination(0.5)?,
        })
    }

    /// Density of `λX̂ + (1-λ)Ŷ` on the base grid.
    pub fn combination(&self, lam: f64) -> Result<GridDensity> {
        check_weight(lam)?;
        let f = &self.base;
        let h = f.h();
        let mut mass: Vec<f64> = self.diagonal().iter().map(|v| v * h).collect();
        let offset = (1.0 - 2.0 * lam) * self.x0();
        if offset.abs() < 1e-12 * h {
            for i in self.lam_cells() {
                mass[i] += 2.0 * self.delta * h;
            }
        } else {
            for i in self.lam_cells() {
                let lo = f.x0() + i as f64 * h;
                for shift in [offset, -offset] {
                    deposit(
                        &mut mass,
                        f.x0(),
                        h,
                        lo + shift,
                        lo + shift + h,
                        self.delta * h,
                    );
                }
            }
        }
        GridDensity::normalized(f.x0(), h, mass.into_iter().map(|v| v / h).collect())
    }
}

fn check_weight(lam: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lam) {
        return domain(format!("weight λ = {lam} outside [0, 1]"));
    }
    Ok(())
}

/// Spreads `mass` uniformly over `[lo, hi]` into cells `[x0 + k h, x0 + (k+1) h)`.
/// A degenerate interval drops the mass into the cell containing `lo`.
fn deposit(cells: &mut [f64], x0: f64, h: f64, lo: f64, hi: f64, mass: f64) {
    let n = cells.len();
    let index = |x: f64| (((x - x0) / h).floor().max(0.0) as usize).min(n - 1);
    let width = hi - lo;
    if width <= 1e-12 * h {
        cells[index(0.5 * (lo + hi))] += mass;
        return;
    }
    let (a, b) = (index(lo), index(hi));
    if a == b {
        cells[a] += mass;
        return;
    }
    for (k, cell) in cells.iter_mut().enumerate().take(b + 1).skip(a) {
        let left = (x0 + k as f64 * h).max(lo);
        let right = (x0 + (k + 1) as f64 * h).min(hi);
        if right > left {
            *cell += mass * (right - left) / width;
        }
    }
}

/// Transfer on the two-block density with `Λ` the middle third, `x0 = 1/3`
/// and `δ = 1/2`; the midpoint law is uniform on `(0, 1)`.
pub fn canonical_transfer() -> Result<(TransferCoupling, MixDensity)> {
    let f = make_two_block();
    let third = f.len() / 3;
    let mask: Vec<bool> = (0..f.len())
        .map(|i| (third..2 * third).contains(&i))
        .collect();
    build_transfer(&f, third as f64 * f.h(), &mask, 0.5)
}

/// Canonical example: `(h_r(X̂ + Ŷ), h_r(2X))` for the two-block density,
/// where the transfer makes `X̂ + Ŷ` uniform on `(0, 2)`.
pub fn canonical_example(r: f64) -> Result<(f64, f64)> {
    let order = RenyiOrder::new(r)?;
    let (t, mix) = canonical_transfer()?;
    let f = t.base;
    let ln2 = std::f64::consts::LN_2;
    let h_sum = renyi_entropy(&mix.fhat, order)? + ln2;
    let h_diag = renyi_entropy(&f, order)? + ln2;
    Ok((h_sum, h_diag))
}

/// Margin `M_{r-1}(f(x-x0), f(x+x0)) - f(x)` at cell `i` for shift `m`, or
/// `None` when a translate falls outside the positive part of the grid.
fn violation(v: &[f64], i: usize, m: usize, s: f64) -> Option<f64> {
    if i < m || i + m >= v.len() {
        return None;
    }
    let (a, b) = (v[i - m], v[i + m]);
    (a > 0.0 && b > 0.0).then(|| s_mean(a, b, s) - v[i])
}

/// Scans shifts `x0 = m·h` for cells where `f(x) < M_{r-1}(f(x-x0), f(x+x0))`
/// beyond the certification tolerance.
///
/// For each shift the best connected run of violating cells is kept, cut to at
/// most `m` cells so that `Λ` and `Λ ± x0` are disjoint, then narrowed to
/// the sub-run with the largest first-order gain (see `trim_run`). Ranking
/// prefers sets where a nonzero δ is representable, then sets of at least
/// [`MIN_SHIFT_CELLS`] cells, then the largest first-order gain. Shorter runs are returned only when nothing longer exists, so
/// `None` means the density passes the midpoint test at every shift.
pub fn find_shift_set(f: &GridDensity, r: f64) -> Result<Option<ShiftSet>> {
    if !(r > 0.0 && r.is_finite()) || r == 1.0 {
        return domain(format!("order r = {r}: need r > 0 and r ≠ 1"));
    }
    let s = r - 1.0;
    let v = f.values();
    let n = v.len();
    let per_shift: Vec<Candidate> = (1..n)
        .into_par_iter()
        .filter_map(|m| {
            let margins: Vec<f64> = (0..n)
                .map(|i| match violation(v, i, m, s) {
                    Some(g) if g > CERT_TOL => g,
                    _ => 0.0,
                })
                .collect();
            let (start, len, _) = best_window(&margins, m)?;
            Some(trim_run(v, m, s, start, len))
        })
        .collect();
    let mut best: Option<Candidate> = None;
    for c in per_shift {
        // strict comparison keeps the smallest shift on ties
        if best.is_none_or(|b| c.rank() > b.rank()) {
            best = Some(c);
        }
    }
    Ok(best.map(|c| ShiftSet {
        shift_cells: c.m,
        x0: c.m as f64 * f.h(),
        mask: (0..n)
            .map(|i| (c.start..c.start + c.len).contains(&i))
            .collect(),
        margin_total: c.total,
    }))
}

/// Smallest `min f(Λ ± x0) / max f(Λ ± x0)` for which δ survives rounding
/// to the unit in the last place of the largest translate.
const MIN_CAP_RATIO: f64 = 1e-12;

/// Candidate set for one shift.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    m: usize,
    start: usize,
    len: usize,
    total: f64,
    score: f64,
    feasible: bool,
}

impl Candidate {
    fn rank(&self) -> (bool, bool, f64) {
        (self.feasible, self.len >= MIN_SHIFT_CELLS, self.score)
    }
}

/// Sub-run maximizing `min f(Λ ± x0) · Σ margin`, the first-order size of the
/// entropy gain. Cells whose translates sit deep in a tail would otherwise
/// force δ toward zero; sub-runs where δ cannot be represented next to the
/// largest translate rank below all others.
fn trim_run(v: &[f64], m: usize, s: f64, start: usize, len: usize) -> Candidate {
    let min_len = len.min(MIN_SHIFT_CELLS);
    let margin = |i: usize| violation(v, i, m, s).unwrap_or(0.0);
    let mut best: Option<Candidate> = None;
    for a in start..start + len {
        let (mut low, mut high, mut sum) = (f64::INFINITY, 0.0f64, 0.0);
        for b in a..start + len {
            low = low.min(v[b - m]).min(v[b + m]);
            high = high.max(v[b - m]).max(v[b + m]);
            sum += margin(b);
            let k = b + 1 - a;
            if k < min_len {
                continue;
            }
            let c = Candidate {
                m,
                start: a,
                len: k,
                total: sum,
                score: low * sum,
                feasible: low >= MIN_CAP_RATIO * high,
            };
            if best.is_none_or(|b| c.rank() > b.rank()) {
                best = Some(c);
            }
        }
    }
    best.expect("run has at least one cell")
}

/// Highest-sum window of at most `max_len` consecutive positive entries.
fn best_window(margins: &[f64], max_len: usize) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    let mut i = 0;
    while i < margins.len() {
        if margins[i] <= 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i < margins.len() && margins[i] > 0.0 {
            i += 1;
        }
        let run = &margins[start..i];
        let len = run.len().min(max_len);
        let mut sum: f64 = run[..len].iter().sum();
        let mut best_here = (0, sum);
        for k in len..run.len() {
            sum += run[k] - run[k - len];
            if sum > best_here.1 {
                best_here = (k + 1 - len, sum);
            }
        }
        if best.is_none_or(|b| best_here.1 > b.2) {
            best = Some((start + best_here.0, len, best_here.1));
        }
    }
    best
}

/// `∫ f̂^r - ∫ f^r` as a function of δ, differentiated: the first-order
/// change in the power integral of the mixture.
fn power_slope(f: &GridDensity, m: usize, mask: &[bool], r: f64, delta: f64) -> f64 {
    let v = f.values();
    let pw = |x: f64| {
        if x > 0.0 {
            x.powf(r - 1.0)
        } else if r > 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut slope = 0.0;
    for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        slope += 2.0 * pw(v[i] + 2.0 * delta) - pw(v[i + m] - delta) - pw(v[i - m] - delta);
    }
    r * f.h() * slope
}

/// Largest δ considered for a transfer: the smaller of `min f` over
/// `Λ ± x0` and the δ where the power integral of the mixture stops
/// improving.
pub fn delta_max(f: &GridDensity, set: &ShiftSet, r: f64) -> f64 {
    let m = set.shift_cells;
    let v = f.values();
    let cap = set
        .mask
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| v[i - m].min(v[i + m]))
        .fold(f64::INFINITY, f64::min);
    // sign(r-1)·slope increases in δ and starts negative for a violating set
    let sign = if r > 1.0 { 1.0 } else { -1.0 };
    let g = |d: f64| sign * power_slope(f, m, &set.mask, r, d);
    if g(cap) <= 0.0 {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * cap {
            break;
        }
    }
    lo
}

/// Largest power of two not exceeding the spacing of doubles near `x`.
fn ulp(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let exp = ((x.to_bits() >> 52) & 0x7ff) as i32 - 1023;
    2f64.powi(exp - 52)
}

/// Builds the transfer coupling and the density of `(X̂ + Ŷ)/2`.
///
/// `x0` must be a whole number of cells. δ is rounded down to a multiple of
/// the unit in the last place of the largest affected value, which makes
/// `(f - δ) + δ == f` exact and keeps both marginals equal to `f`.
pub fn build_transfer(
    f: &GridDensity,
    x0: f64,
    mask: &[bool],
    delta: f64,
) -> Result<(TransferCoupling, MixDensity)> {
    let n = f.len();
    if mask.len() != n {
        return Err(Error::InvalidTransfer(format!(
            "mask has {} cells, grid {n}",
            mask.len()
        )));
    }
    let steps = x0 / f.h();
    let m = steps.round();
    if !(m >= 1.0) || (steps - m).abs() > 1e-9 * m {
        return Err(Error::InvalidTransfer(format!(
            "x0 = {x0} is not a positive multiple of h"
        )));
    }
    let m = m as usize;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidTransfer(format!(
            "δ = {delta} must be non-negative"
        )));
    }
    let v = f.values();
    let mut role = vec![0u8; n];
    let lam: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    if lam.is_empty() {
        return Err(Error::InvalidTransfer("empty shift set".into()));
    }
    for &i in &lam {
        if i < m || i + m >= n {
            return Err(Error::InvalidTransfer(format!(
                "cell {i} ± {m} leaves the grid"
            )));
        }
        role[i] |= 1;
    }
    let mut top = 0.0f64;
    for &i in &lam {
        for j in [i - m, i + m] {
            if role[j] != 0 {
                return Err(Error::InvalidTransfer(
                    "Λ and its translates overlap".into(),
                ));
            }
            role[j] = 2;
            top = top.max(v[j]);
        }
    }
    let q = ulp(top);
    let delta = if q > 0.0 {
        (delta / q).floor() * q
    } else {
        delta
    };
    for &i in &lam {
        for j in [i - m, i + m] {
            if v[j] - delta < 0.0 {
                return Err(Error::InvalidTransfer(format!(
                    "δ = {delta} exceeds f = {} at cell {j}",
                    v[j]
                )));
            }
        }
    }
    let coupling = TransferCoupling {
        base: f.clone(),
        shift_cells: m,
        mask: mask.to_vec(),
        delta,
    };
    let mut values = v.to_vec();
    for &i in &lam {
        values[i] += 2.0 * delta;
        values[i - m] -= delta;
        values[i + m] -= delta;
    }
    // no renormalization: δ = 0 must give back f bit for bit
    let fhat = GridDensity::new(f.x0(), f.h(), values)?;
    Ok((coupling, MixDensity { fhat }))
}

/// `h_r(f̂) - h_r(f)`, summed only over cells where the two densities differ
/// so that small gains are not lost to cancellation.
pub fn entropy_gain(f: &GridDensity, fhat: &GridDensity, order: RenyiOrder) -> Result<f64> {
    if f.len() != fhat.len() || f.x0() != fhat.x0() || f.h() != fhat.h() {
        return domain("densities must share one grid");
    }
    let h = f.h();
    let changed = || {
        f.values()
            .iter()
            .zip(fhat.values())
            .filter(|(a, b)| a != b)
            .map(|(&a, &b)| (a, b))
    };
    match order {
        RenyiOrder::Finite(r) => {
            let pw = |x: f64| if x > 0.0 { x.powf(r) } else { 0.0 };
            let base: f64 = f.values().iter().map(|&x| pw(x)).sum::<f64>() * h;
            let diff: f64 = changed().map(|(a, b)| pw(b) - pw(a)).sum::<f64>() * h;
            Ok((diff / base).ln_1p() / (1.0 - r))
        }
        RenyiOrder::Shannon => {
            let xlx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
            Ok(-changed().map(|(a, b)| xlx(b) - xlx(a)).sum::<f64>() * h)
        }
        _ => Ok(renyi_entropy(fhat, order)? - renyi_entropy(f, order)?),
    }
}

/// A joint law of `(X, Y)` with both marginals equal to `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    /// `Y = X`
    Identical,
    Independent,
    /// Counter-monotone: `Y = F⁻¹(1 - F(X))`
    Antithetic,
    Transfer(TransferCoupling),
}

impl Coupling {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identical => "identical",
            Self::Independent => "independent",
            Self::Antithetic => "antithetic",
            Self::Transfer(_) => "transfer",
        }
    }
}

/// Density of `λX + (1-λ)Y` when `(X, Y)` follows `coupling` with marginals `f`.
pub fn combination_law(f: &GridDensity, coupling: &Coupling, lam: f64) -> Result<GridDensity> {
    check_weight(lam)?;
    match coupling {
        Coupling::Identical => Ok(f.clone()),
        Coupling::Independent => {
            if lam == 0.0 || lam == 1.0 {
                return Ok(f.clone());
            }
            let a = scale_density(f, lam)?;
            let b = scale_density(f, 1.0 - lam)?;
            let h = a.h().min(b.h());
            let a = if a.h() == h { a } else { a.resample(h)? };
            let b = if b.h() == h { b } else { b.resample(h)? };
            convolve(&a, &b)
        }
        Coupling::Antithetic => antithetic_law(f, lam),
        Coupling::Transfer(t) => {
            if t.base != *f {
                return domain("transfer coupling built on a different density");
            }
            t.combination(lam)
        }
    }
}

/// Exact pushforward of the uniform quantile variable through
/// `u ↦ λQ(u) + (1-λ)Q(1-u)`, which is piecewise linear.
fn antithetic_law(f: &GridDensity, lam: f64) -> Result<GridDensity> {
    let v = f.values();
    let h = f.h();
    let n = v.len();
    let mut cdf = Vec::with_capacity(n + 1);
    cdf.push(0.0);
    for &x in v {
        cdf.push(cdf.last().unwrap() + x * h);
    }
    let total = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|c| *c /= total);
    let quantile = |u: f64, probe: f64| -> f64 {
        // cell containing the probe point decides the linear piece
        let k = cdf.partition_point(|&c| c <= probe).clamp(1, n) - 1;
        let k = (k..n).find(|&j| v[j] > 0.0).unwrap_or(k);
        f.x0() + k as f64 * h + (u - cdf[k]) / (v[k] / total)
    };
    let mut breaks: Vec<f64> = cdf.iter().flat_map(|&c| [c, 1.0 - c]).collect();
    breaks.retain(|u| (0.0..=1.0).contains(u));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut mass = vec![0.0; n];
    for w in breaks.windows(2) {
        let (ua, ub) = (w[0], w[1]);
        if ub - ua <= 0.0 {
            continue;
        }
        let mid = 0.5 * (ua + ub);
        let z = |u: f64| lam * quantile(u, mid) + (1.0 - lam) * quantile(1.0 - u, 1.0 - mid);
        let (za, zb) = (z(ua), z(ub));
        deposit(&mut mass, f.x0(), h, za.min(zb), za.max(zb), ub - ua);
    }
    GridDensity::normalized(f.x0(), h, mass.into_iter().map(|m| m / h).collect())
}

/// Entropy excess of `λX + (1-λ)Y` over `X`, per coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupCouplingReport {
    pub order: RenyiOrder,
    pub lam: f64,
    pub excesses: Vec<(String, f64)>,
    pub worst_excess: f64,
}

fn require_certified(f: &GridDensity, s: f64) -> Result<RenyiOrder> {
    if !(s > -1.0) {
        return domain(format!("s = {s}: s > −1/d required"));
    }
    let rep = certify_s_concave(f, s, CERT_TOL)?;
    if !rep.is_certified() {
        return Err(Error::NotCertified(format!(
            "density is not {s}-concave (worst margin {})",
            rep.worst_margin
        )));
    }
    RenyiOrder::new(1.0 + s)
}

/// `max_coupling h_r(λX + (1-λ)Y) - h_r(X)` over the given couplings, with
/// `r = 1 + s`, for a certified s-concave `f`.
pub fn sup_coupling_check(
    f: &GridDensity,
    s: f64,
    lam: f64,
    couplings: &[Coupling],
) -> Result<SupCouplingReport> {
    let order = require_certified(f, s)?;
    let base = renyi_entropy(f, order)?;
    let excesses = couplings
        .iter()
        .map(|c| {
            let law = combination_law(f, c, lam)?;
            Ok((c.name().to_string(), renyi_entropy(&law, order)? - base))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_excess = excesses
        .iter()
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SupCouplingReport {
        order,
        lam,
        excesses,
        worst_excess,
    })
}

/// `(N_r(X + Y), 4 N_r(X))` with `r = 1 + s` for a certified s-concave `f`.
pub fn reverse_epi_bound(f: &GridDensity, s: f64, coupling: &Coupling) -> Result<(f64, f64)> {
    let order = require_certified(f, s)?;
    let mid = combination_law(f, coupling, 0.5)?;
    // N_r(X + Y) = N_r(2·(X+Y)/2) = 4 N_r((X+Y)/2) in one dimension
    let lhs = 4.0 * entropy_power(renyi_entropy(&mid, order)?, 1);
    let rhs = 4.0 * entropy_power(renyi_entropy(f, order)?, 1);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_gaussian, make_two_block_with_step, make_uniform};

    #[test]
    fn canonical_numbers() {
        for r in [0.7, 2.0] {
            let (h_sum, h_diag) = canonical_example(r).unwrap();
            assert!((h_sum - 2f64.ln()).abs() < 1e-4, "{h_sum}");
            assert!((h_diag - (4.0f64 / 3.0).ln()).abs() < 1e-4, "{h_diag}");
            assert!((h_sum - h_diag - 1.5f64.ln()).abs() < 1e-4);
        }
    }

    #[test]
    fn two_block_shift_set() {
        let f = make_two_block_with_step(0.01).unwrap();
        let set = find_shift_set(&f, 2.0).unwrap().expect("violation");
        let third = f.len() / 3;
        assert_eq!(set.shift_cells, third);
        assert!((set.x0 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(set.cells(), third);
        assert!(set.mask[third] && set.mask[2 * third - 1] && !set.mask[2 * third]);
    }

    #[test]
    fn no_shift_set_for_concave_shapes() {
        let u = make_uniform(0.0, 1.0, 0.01).unwrap();
        for r in [0.5, 2.0, 3.0] {
            assert!(find_shift_set(&u, r).unwrap().is_none());
        }
        let g = make_gaussian(1.0, 0.05, 6.0).unwrap();
        assert!(find_shift_set(&g, 0.5).unwrap().is_none());
    }

    #[test]
    fn transfer_identity_and_exact_marginals() {
        let f = make_two_block_with_step(0.01).unwrap();
        let set = find_shift_set(&f, 2.0).unwrap().unwrap();
        let (t, mix) = build_transfer(&f, set.x0, &set.mask, 0.0).unwrap();
        assert_eq!(mix.fhat, f);
        assert!(t.marginals_exact());
        let dmax = delta_max(&f, &set, 2.0);
        let (t, mix) = build_transfer(&f, set.x0, &set.mask, dmax / 4.0).unwrap();
        assert!(t.marginals_exact());
        assert!((mix.fhat.mass() - 1.0).abs() < 1e-12);
        let gain = entropy_gain(&f, &mix.fhat, RenyiOrder::Finite(2.0)).unwrap();
        assert!(gain > 0.0);
        assert!(build_transfer(&f, set.x0, &set.mask, 2.0).is_err());
        assert!(build_transfer(&f, set.x0 * 0.5 + 0.001, &set.mask, 0.1).is_err());
    }

    #[test]
    fn transfer_half_weight_matches_mix() {
        let f = make_two_block_with_step(0.01).unwrap();
        let set = find_shift_set(&f, 2.0).unwrap().unwrap();
        let (t, mix) = build_transfer(&f, set.x0, &set.mask, 0.3).unwrap();
        let law = combination_law(&f, &Coupling::Transfer(t.clone()), 0.5).unwrap();
        for (a, b) in law.values().iter().zip(mix.fhat.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        // λ = 0 and 1 return a marginal
        let law0 = t.combination(0.0).unwrap();
        assert!((law0.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antithetic_of_symmetric_is_concentrated() {
        let u = make_uniform(-1.0, 1.0, 0.01).unwrap();
        let law = combination_law(&u, &Coupling::Antithetic, 0.5).unwrap();
        assert!((law.mass() - 1.0).abs() < 1e-12);
        assert!(law.max_value() > 10.0);
        // at λ = 1 the law is f itself
        let law1 = combination_law(&u, &Coupling::Antithetic, 1.0).unwrap();
        for (a, b) in law1.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn reverse_epi_identical_equality() {
        let g = make_gaussian(1.0, 0.05, 8.0).unwrap();
        let (lhs, rhs) = reverse_epi_bound(&g, 0.0, &Coupling::Identical).unwrap();
        assert_eq!(lhs, rhs);
        let (lhs, rhs) = reverse_epi_bound(&g, 0.0, &Coupling::Independent).unwrap();
        assert!((lhs / rhs - 0.5).abs() < 1e-3);
    }

    #[test]
    fn sup_check_requires_certificate() {
        let f = make_two_block();
        let err = sup_coupling_check(&f, 0.0, 0.5, &[Coupling::Identical]).unwrap_err();
        assert!(matches!(err, Error::NotCertified(_)));
        let g = make_gaussian(1.0, 0.05, 8.0).unwrap();
        let rep = sup_coupling_check(&g, 0.0, 0.3, &[Coupling::Identical]).unwrap();
        assert_eq!(rep.worst_excess, 0.0);
    }
}
