//! Discretized probability densities.
//!
//! A [`GridDensity`] stores density heights at the centers of a uniform grid
//! of cells `[x0 + i·h, x0 + (i+1)·h)`. Every integral over a grid density is a
//! cell-centered midpoint sum. A [`RadialDensity`] stores the radial profile of
//! a spherically symmetric density on `R^d`; it only supports power integrals
//! (entropies), never convolution.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance on `Σ v·h = 1` accepted by [`GridDensity::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Tolerance on the mass of a [`RadialDensity`].
pub const RADIAL_NORMALIZATION_TOL: f64 = 1e-7;

/// Maximum number of base cells used for truncated Pareto grids.
pub const PARETO_CELL_BUDGET: usize = 200_000;

/// One-dimensional probability density sampled at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridDensity {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridDensity::new(raw.x0, raw.h, raw.values)
    }
}

fn check_cells(x0: f64, h: f64, values: &[f64]) -> Result<()> {
    if !x0.is_finite() {
        return Err(Error::InvalidGrid(format!("left edge {x0} is not finite")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("step {h} must be positive")));
    }
    if values.is_empty() {
        return Err(Error::InvalidGrid("no cells".into()));
    }
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidGrid(format!("value {v} at cell {i}")));
    }
    Ok(())
}

impl GridDensity {
    /// Builds a density from already normalized values.
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        check_cells(x0, h, &values)?;
        let mass = values.iter().sum::<f64>() * h;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidGrid(format!("mass {mass} is not 1")));
        }
        Ok(Self { x0, h, values })
    }

    /// Builds a density from non-negative heights, rescaling them to unit mass.
    pub fn normalized(x0: f64, h: f64, mut values: Vec<f64>) -> Result<Self> {
        check_cells(x0, h, &values)?;
        let mass = values.iter().sum::<f64>() * h;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "mass {mass} cannot be normalized"
            )));
        }
        let scale = 1.0 / mass;
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(Self { x0, h, values })
    }

    /// Samples `f` at `n` cell centers starting at `x0`, then normalizes.
    pub fn from_fn(x0: f64, h: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|i| f(x0 + (i as f64 + 0.5) * h)).collect();
        Self::normalized(x0, h, values)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.h
    }

    pub fn right_edge(&self) -> f64 {
        self.x0 + self.values.len() as f64 * self.h
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.center(i))
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Piecewise-constant evaluation; zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        if t < 0.0 {
            return 0.0;
        }
        self.values.get(t as usize).copied().unwrap_or(0.0)
    }

    /// Index range `[first, last]` of strictly positive cells.
    pub fn positive_range(&self) -> Option<(usize, usize)> {
        let first = self.values.iter().position(|&v| v > 0.0)?;
        let last = self.values.iter().rposition(|&v| v > 0.0)?;
        Some((first, last))
    }

    /// True when the positive cells form one contiguous run.
    pub fn has_contiguous_support(&self) -> bool {
        match self.positive_range() {
            Some((a, b)) => self.values[a..=b].iter().all(|&v| v > 0.0),
            None => false,
        }
    }

    /// Drops zero cells at both ends.
    pub fn trimmed(&self) -> Self {
        match self.positive_range() {
            Some((a, b)) => Self {
                x0: self.x0 + a as f64 * self.h,
                h: self.h,
                values: self.values[a..=b].to_vec(),
            },
            None => self.clone(),
        }
    }

    pub fn translated(&self, dx: f64) -> Self {
        Self {
            x0: self.x0 + dx,
            h: self.h,
            values: self.values.clone(),
        }
    }

    /// Law of `-X`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            x0: -self.right_edge(),
            h: self.h,
            values,
        }
    }

    /// Law of `X - E[X]`.
    pub fn centered(&self) -> Self {
        let (mean, _) = moments(self);
        self.translated(-mean)
    }

    /// Rescales the heights so the midpoint mass is exactly one again.
    pub fn renormalized(mut self) -> Self {
        let mass = self.mass();
        if mass > 0.0 {
            let s = 1.0 / mass;
            self.values.iter_mut().for_each(|v| *v *= s);
        }
        self
    }

    /// Conservative resampling onto a grid of step `h_new` whose cell edges sit
    /// at integer multiples of `h_new`.
    ///
    /// The density is treated as piecewise constant; each source cell hands its
    /// mass to the target cells it overlaps, in proportion to the overlap.
    pub fn resample(&self, h_new: f64) -> Result<Self> {
        if !(h_new > 0.0 && h_new.is_finite()) {
            return domain(format!("resampling step {h_new} must be positive"));
        }
        let src = self.trimmed();
        let n = src.values.len();
        let first = snap_index(src.x0 / h_new, f64::floor);
        let last = snap_index(src.right_edge() / h_new, f64::ceil);
        let m = (last - first).max(1) as usize;
        let mut out = vec![0.0; m];
        let target_edge = |k: usize| (first + k as i64) as f64 * h_new;
        let mut k = 0usize;
        for (i, &v) in src.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let lo = src.x0 + i as f64 * src.h;
            let hi = if i + 1 == n {
                src.right_edge()
            } else {
                src.x0 + (i + 1) as f64 * src.h
            };
            while k + 1 < m && target_edge(k + 1) <= lo {
                k += 1;
            }
            let mut j = k;
            loop {
                let a = lo.max(target_edge(j));
                let b = hi.min(target_edge(j + 1));
                if b > a {
                    out[j] += v * (b - a);
                }
                if j + 1 >= m || target_edge(j + 1) >= hi {
                    break;
                }
                j += 1;
            }
        }
        out.iter_mut().for_each(|v| *v /= h_new);
        Self::normalized(target_edge(0), h_new, out)
    }

    /// Writes `x,value` rows, one per cell center.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "value"])?;
        for (x, v) in self.centers().zip(&self.values) {
            wtr.write_record([x.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `x,value` rows written by [`GridDensity::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidGrid(format!("bad field {i} in {rec:?}")))
            };
            xs.push(parse(0)?);
            values.push(parse(1)?);
        }
        if xs.len() < 2 {
            return Err(Error::InvalidGrid("need at least two rows".into()));
        }
        let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (i, w) in xs.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "non-uniform spacing at row {i}"
                )));
            }
        }
        Self::new(xs[0] - 0.5 * h, h, values)
    }
}

fn snap_index(t: f64, round: fn(f64) -> f64) -> i64 {
    let nearest = t.round();
    if (t - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest as i64
    } else {
        round(t) as i64
    }
}

/// Uniform density on `[a, b]`.
///
/// The step is adjusted to `(b-a)/n` with `n = round((b-a)/h)` so both
/// endpoints are cell edges.
pub fn make_uniform(a: f64, b: f64, h: f64) -> Result<GridDensity> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let len = b - a;
    if !(h > 0.0) || h > len {
        return Err(Error::StepTooLarge { h, len });
    }
    let cells = len / h;
    if cells < 8.0 - 1e-9 {
        return Err(Error::InvalidGrid(format!(
            "only {cells:.3} cells on [{a}, {b}], need at least 8"
        )));
    }
    let n = cells.round() as usize;
    let step = len / n as f64;
    GridDensity::normalized(a, step, vec![1.0 / len; n])
}

/// The two-block density: 3/2 on (0,1/3) ∪ (2/3,1).
///
/// Uses a step near `h` that puts 1/3 and 2/3 on cell edges.
pub fn make_two_block_with_step(h: f64) -> Result<GridDensity> {
    if !(h > 0.0 && h <= 1.0 / 9.0) {
        return domain(format!("two-block step {h} must lie in (0, 1/9]"));
    }
    let third = ((1.0 / (3.0 * h)).round() as usize).max(1);
    let step = 1.0 / (3 * third) as f64;
    let values = (0..3 * third)
        .map(|i| {
            if (third..2 * third).contains(&i) {
                0.0
            } else {
                1.5
            }
        })
        .collect();
    GridDensity::normalized(0.0, step, values)
}

/// [`make_two_block_with_step`] at a step of about 1e-3.
pub fn make_two_block() -> GridDensity {
    make_two_block_with_step(1e-3).expect("default step is valid")
}

/// Gaussian `N(0, sigma2)` sampled on a symmetric grid truncated at
/// `±half_width_sigmas·σ`.
pub fn make_gaussian(sigma2: f64, h: f64, half_width_sigmas: f64) -> Result<GridDensity> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return domain(format!("variance {sigma2} must be positive"));
    }
    if !(h > 0.0 && half_width_sigmas > 0.0) {
        return domain("step and truncation width must be positive");
    }
    let sigma = sigma2.sqrt();
    let half = (half_width_sigmas * sigma / h).round().max(4.0) as usize;
    let x0 = -(half as f64) * h;
    GridDensity::from_fn(x0, h, 2 * half, |x| (-0.5 * x * x / sigma2).exp())
}

/// Law of `aX`: `x ↦ f(x/a)/a` on the grid scaled by `a`.
pub fn scale_density(f: &GridDensity, a: f64) -> Result<GridDensity> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("scale factor {a} must be positive"));
    }
    Ok(GridDensity {
        x0: a * f.x0,
        h: a * f.h,
        values: f.values.iter().map(|v| v / a).collect(),
    })
}

/// Midpoint-rule mean and variance.
pub fn moments(f: &GridDensity) -> (f64, f64) {
    let h = f.h();
    let mean = f.centers().zip(f.values()).map(|(x, v)| x * v).sum::<f64>() * h;
    let var = f
        .centers()
        .zip(f.values())
        .map(|(x, v)| (x - mean).powi(2) * v)
        .sum::<f64>()
        * h;
    (mean, var)
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Spherically symmetric density on `R^d`, stored as its radial profile at
/// radial cell centers `(i + 1/2)·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    dim: usize,
    h: f64,
    profile: Vec<f64>,
    unimodal: bool,
}

impl RadialDensity {
    /// Validates the profile; `unimodal` additionally requires a
    /// non-increasing profile.
    pub fn new(dim: usize, h: f64, profile: Vec<f64>, unimodal: bool) -> Result<Self> {
        let f = Self::unchecked(dim, h, profile, unimodal)?;
        let mass = f.mass();
        if (mass - 1.0).abs() > RADIAL_NORMALIZATION_TOL {
            return Err(Error::InvalidGrid(format!("radial mass {mass} is not 1")));
        }
        Ok(f)
    }

    /// Like [`RadialDensity::new`] but rescales the profile to unit mass.
    pub fn normalized(dim: usize, h: f64, profile: Vec<f64>, unimodal: bool) -> Result<Self> {
        let mut f = Self::unchecked(dim, h, profile, unimodal)?;
        let mass = f.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "radial mass {mass} cannot be normalized"
            )));
        }
        f.profile.iter_mut().for_each(|v| *v /= mass);
        Ok(f)
    }

    fn unchecked(dim: usize, h: f64, profile: Vec<f64>, unimodal: bool) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        check_cells(0.0, h, &profile)?;
        if unimodal && profile.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidGrid(
                "profile flagged unimodal is increasing".into(),
            ));
        }
        Ok(Self {
            dim,
            h,
            profile,
            unimodal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    pub fn is_unimodal(&self) -> bool {
        self.unimodal
    }

    pub fn radius(&self) -> f64 {
        self.profile.len() as f64 * self.h
    }

    /// `∫ f^r` in spherical coordinates; `r = 1` gives the mass.
    pub fn power_integral(&self, r: f64) -> f64 {
        self.radial_sum(|v| v.powf(r))
    }

    pub fn mass(&self) -> f64 {
        self.radial_sum(|v| v)
    }

    pub(crate) fn radial_sum(&self, g: impl Fn(f64) -> f64) -> f64 {
        let d = self.dim;
        let shell = d as f64 * unit_ball_volume(d);
        let sum: f64 = self
            .profile
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| {
                let rho = (i as f64 + 0.5) * self.h;
                g(v) * rho.powi(d as i32 - 1)
            })
            .sum();
        shell * sum * self.h
    }

    /// Uniform density on the ball of the given radius.
    pub fn uniform_ball(dim: usize, radius: f64, h: f64) -> Result<Self> {
        if !(radius > 0.0 && h > 0.0 && h < radius) {
            return domain("need 0 < h < radius");
        }
        let n = (radius / h).round() as usize;
        Self::normalized(dim, radius / n as f64, vec![1.0; n], true)
    }

    /// Full symmetric grid on `[-R, R]`; only defined for `dim = 1`.
    pub fn to_grid(&self) -> Result<GridDensity> {
        if self.dim != 1 {
            return domain(format!("grid conversion needs dim = 1, got {}", self.dim));
        }
        let mut values: Vec<f64> = self.profile.iter().rev().copied().collect();
        values.extend_from_slice(&self.profile);
        GridDensity::normalized(-self.radius(), self.h, values)
    }
}

/// Parameters of the truncated Pareto-type density
/// `C_R (1+|x|)^{-p} 1{|x| ≤ R}` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoTruncSpec {
    pub radius: f64,
    pub p: f64,
    pub dim: usize,
    /// Normalizing constant `C_R`.
    pub c_r: f64,
    /// Per-coordinate variance `σ_R²`; infinite when `R = ∞` and `p ≤ d + 2`.
    pub sigma2_r: f64,
}

impl ParetoTruncSpec {
    /// `radius` may be `f64::INFINITY`, which requires `p > dim`.
    pub fn new(radius: f64, p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        if !(radius > 0.0) {
            return domain(format!("truncation radius {radius} must be positive"));
        }
        if !(p > 0.0 && p.is_finite()) {
            return domain(format!("decay exponent {p} must be positive"));
        }
        if radius.is_infinite() && p <= dim as f64 {
            return domain(format!(
                "p = {p} ≤ dim = {dim}: untruncated density has infinite mass"
            ));
        }
        let d = dim as f64;
        let shell = d * unit_ball_volume(dim);
        let c_r = 1.0 / (shell * radial_moment(dim - 1, p, radius));
        let sigma2_r = if radius.is_infinite() && p <= d + 2.0 {
            f64::INFINITY
        } else {
            c_r * shell * radial_moment(dim + 1, p, radius) / d
        };
        Ok(Self {
            radius,
            p,
            dim,
            c_r,
            sigma2_r,
        })
    }

    /// Density value at distance `rho` from the origin.
    pub fn density(&self, rho: f64) -> f64 {
        if rho <= self.radius {
            self.c_r * (1.0 + rho).powf(-self.p)
        } else {
            0.0
        }
    }
}

/// `∫_0^R ρ^k (1+ρ)^{-p} dρ` via the binomial expansion of `(u-1)^k`.
pub(crate) fn radial_moment(k: usize, p: f64, radius: f64) -> f64 {
    let log_u = radius.ln_1p();
    let mut binom = 1.0;
    let mut total = 0.0;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let e = j as f64 - p + 1.0;
        let piece = if e.abs() < 1e-14 {
            log_u
        } else if radius.is_infinite() {
            if e < 0.0 {
                -1.0 / e
            } else {
                f64::INFINITY
            }
        } else {
            (e * log_u).exp_m1() / e
        };
        total += sign * binom * piece;
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    total
}

/// Builds the truncated Pareto-type density and its discretized radial
/// profile with step close to `h`.
pub fn make_pareto_trunc(
    radius: f64,
    p: f64,
    dim: usize,
    h: f64,
) -> Result<(ParetoTruncSpec, RadialDensity)> {
    if !radius.is_finite() {
        return domain("cannot discretize an untruncated density");
    }
    let spec = ParetoTruncSpec::new(radius, p, dim)?;
    if !(h > 0.0 && h <= radius / 1000.0 * (1.0 + 1e-12)) {
        return domain(format!(
            "step {h} must satisfy 0 < h ≤ R/1000 = {}",
            radius / 1000.0
        ));
    }
    let n = (radius / h).round() as usize;
    let step = radius / n as f64;
    let profile = (0..n)
        .map(|i| spec.density((i as f64 + 0.5) * step))
        .collect();
    let radial = RadialDensity::normalized(dim, step, profile, true)?;
    Ok((spec, radial))
}

/// Grid step used for the truncated Pareto family in one dimension:
/// `min(1e-3, R/1e5)`, coarsened so that `[-R, R]` holds at most
/// [`PARETO_CELL_BUDGET`] cells.
pub fn pareto_grid_step(radius: f64) -> f64 {
    let fine = (1e-3f64).min(radius / 1e5);
    fine.max(2.0 * radius / PARETO_CELL_BUDGET as f64)
}

/// One-dimensional truncated Pareto-type density on `[-R, R]` as a grid.
pub fn make_pareto_grid(radius: f64, p: f64, h: f64) -> Result<(ParetoTruncSpec, GridDensity)> {
    let (spec, radial) = make_pareto_trunc(radius, p, 1, h)?;
    Ok((spec, radial.to_grid()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_unit_interval() {
        let f = make_uniform(0.0, 1.0, 1e-3).unwrap();
        assert_eq!(f.len(), 1000);
        assert!(f.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((f.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_rejects_bad_intervals() {
        assert!(matches!(
            make_uniform(0.0, 1.0, 2.0),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(
            make_uniform(1.0, 1.0, 0.1),
            Err(Error::DegenerateInterval { .. })
        ));
        assert!(make_uniform(0.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn uniform_moments() {
        let s3 = 3f64.sqrt();
        let (m, v) = moments(&make_uniform(-s3, s3, 1e-3).unwrap());
        assert!(m.abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        let (m, v) = moments(&make_uniform(0.0, 1.0, 1e-3).unwrap());
        assert!((m - 0.5).abs() < 1e-6);
        assert!((v - 1.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn two_block_values() {
        let f = make_two_block();
        assert!((f.value_at(0.1) - 1.5).abs() < 1e-12);
        assert_eq!(f.value_at(0.5), 0.0);
        assert!((f.value_at(0.9) - 1.5).abs() < 1e-12);
        assert!((f.mass() - 1.0).abs() < 1e-9);
        assert!(!f.has_contiguous_support());
    }

    #[test]
    fn scaling_uniform() {
        let f = make_uniform(0.0, 1.0, 1e-2).unwrap();
        let g = scale_density(&f, 2.0).unwrap();
        assert!((g.right_edge() - 2.0).abs() < 1e-12);
        assert!(g.values().iter().all(|&v| (v - 0.5).abs() < 1e-12));
        assert_eq!(scale_density(&f, 1.0).unwrap(), f);
        assert!(scale_density(&f, 0.0).is_err());
        assert!(scale_density(&f, -1.0).is_err());
    }

    #[test]
    fn pareto_normalizer_closed_form() {
        let spec = ParetoTruncSpec::new(f64::INFINITY, 3.5, 1).unwrap();
        assert!((spec.c_r - 1.25).abs() < 1e-12);
        assert!((spec.sigma2_r - 8.0 / 3.0).abs() < 1e-12);
        assert!(ParetoTruncSpec::new(f64::INFINITY, 0.5, 1).is_err());
        assert!(ParetoTruncSpec::new(0.0, 3.5, 1).is_err());
        assert!(ParetoTruncSpec::new(-1.0, 3.5, 1).is_err());
        // p ≤ d + 2 leaves the untruncated variance infinite
        let heavy = ParetoTruncSpec::new(f64::INFINITY, 3.5, 2).unwrap();
        assert!(heavy.sigma2_r.is_infinite());
    }

    #[test]
    fn pareto_discretization_mass() {
        let (spec, radial) = make_pareto_trunc(10.0, 3.5, 1, 1e-3).unwrap();
        assert!((radial.mass() - 1.0).abs() < 1e-6);
        // discrete normalizer agrees with the analytic one to midpoint accuracy
        let scale = radial.profile()[0] / spec.density(0.5 * radial.h());
        assert!((scale - 1.0).abs() < 1e-5, "{scale}");
        let grid = radial.to_grid().unwrap();
        assert_eq!(grid.len(), 20_000);
        assert!((grid.x0() + 10.0).abs() < 1e-12);
        assert!(make_pareto_trunc(10.0, 3.5, 1, 0.1).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn resample_keeps_mass_and_mean() {
        let f = make_gaussian(1.0, 1e-2, 10.0).unwrap();
        let g = scale_density(&f, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let r = g.resample(1e-2).unwrap();
        assert!((r.mass() - 1.0).abs() < 1e-12);
        let (m, v) = moments(&r);
        assert!(m.abs() < 1e-12);
        assert!((v - 0.5).abs() < 1e-4);
        // a uniform density on aligned edges is reproduced exactly
        let u = make_uniform(0.0, 1.0, 0.01).unwrap();
        let fine = u.resample(0.005).unwrap();
        assert_eq!(fine.len(), 200);
        assert!(fine.values().iter().all(|&v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn json_rejects_negative_values() {
        let bad = r#"{"x0":0.0,"h":0.5,"values":[1.0,-0.1,1.1]}"#;
        assert!(serde_json::from_str::<GridDensity>(bad).is_err());
        let good = r#"{"x0":0.0,"h":0.5,"values":[1.0,1.0]}"#;
        let f: GridDensity = serde_json::from_str(good).unwrap();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let f = make_two_block_with_step(0.05).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = GridDensity::read_csv(buf.as_slice()).unwrap();
        assert_eq!(f.len(), g.len());
        assert!((f.x0() - g.x0()).abs() < 1e-12);
        assert!(f.values().iter().zip(g.values()).all(|(a, b)| a == b));
        let neg = "x,value\n0.5,1.0\n1.5,-0.2\n";
        assert!(GridDensity::read_csv(neg.as_bytes()).is_err());
    }
}
