//! End-to-end checks of Rényi entropy power inequalities on grid densities,
//! and the heavy-tailed experiment showing that no positive constant works
//! for small orders without a concavity assumption.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{discrete_entropy, holder_conjugate, SimplexWeights};
use crate::convolve::{clt_densities, convolve, MAX_DOUBLINGS};
use crate::density::{
    make_pareto_grid, pareto_grid_step, scale_density, GridDensity, ParetoTruncSpec,
};
use crate::entropy::{entropy_power, gaussian_renyi, renyi_entropy, GaussianSpec, RenyiOrder};
use crate::error::{domain, Result};

/// Relative slack on `ratio ≥ c`.
pub const EPI_REL_TOL: f64 = 1e-9;

/// Outcome of `N_r(X_1 + … + X_n) ≥ c Σ N_r(X_i)` on concrete densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiReport {
    pub order: RenyiOrder,
    pub entropies: Vec<f64>,
    pub sum_entropy: f64,
    pub powers: Vec<f64>,
    pub sum_power: f64,
    /// `N_r(sum) / Σ N_r(X_i)`.
    pub ratio: f64,
    pub constant_used: f64,
    pub pass: bool,
}

/// Brings every density onto the finest step among them.
pub fn common_grid(fs: &[GridDensity]) -> Result<Vec<GridDensity>> {
    if fs.is_empty() {
        return domain("no densities given");
    }
    let h = fs.iter().map(GridDensity::h).fold(f64::INFINITY, f64::min);
    fs.iter()
        .map(|f| {
            if (f.h() - h).abs() <= 1e-12 * h {
                Ok(f.clone())
            } else {
                f.resample(h)
            }
        })
        .collect()
}

/// Density of the sum of independent variables with the given densities.
pub fn convolve_all(fs: &[GridDensity]) -> Result<GridDensity> {
    let fs = common_grid(fs)?;
    let mut acc = fs[0].clone();
    for f in &fs[1..] {
        acc = convolve(&acc, f)?;
    }
    Ok(acc)
}

/// Compares `N_r` of the independent sum with `c` times the sum of powers.
pub fn epi_check(fs: &[GridDensity], order: RenyiOrder, c: f64) -> Result<EpiReport> {
    let fs = common_grid(fs)?;
    let entropies = fs
        .iter()
        .map(|f| renyi_entropy(f, order))
        .collect::<Result<Vec<_>>>()?;
    let powers: Vec<f64> = entropies.iter().map(|&h| entropy_power(h, 1)).collect();
    let sum_entropy = renyi_entropy(&convolve_all(&fs)?, order)?;
    let sum_power = entropy_power(sum_entropy, 1);
    let ratio = sum_power / powers.iter().sum::<f64>();
    Ok(EpiReport {
        order,
        entropies,
        sum_entropy,
        powers,
        sum_power,
        ratio,
        constant_used: c,
        pass: ratio >= c * (1.0 - EPI_REL_TOL),
    })
}

/// Density of `Σ √λ_i X_i`, dropping summands with `λ_i = 0`.
pub fn weighted_sum(fs: &[GridDensity], lam: &SimplexWeights) -> Result<GridDensity> {
    if fs.len() != lam.len() {
        return domain(format!("{} densities but {} weights", fs.len(), lam.len()));
    }
    let scaled = fs
        .iter()
        .zip(lam.lambdas())
        .filter(|(_, &l)| l > 0.0)
        .map(|(f, &l)| scale_density(f, l.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    convolve_all(&scaled)
}

/// `(h_r(Σ√λ_i X_i) - Σ λ_i h_r(X_i), (1/2)(log c / α + (1/α - 1) H(λ)))`.
pub fn linearized_check(
    fs: &[GridDensity],
    lam: &SimplexWeights,
    order: RenyiOrder,
    c: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if !(c > 0.0 && alpha > 0.0) {
        return domain("need c > 0 and α > 0");
    }
    let mut lhs = renyi_entropy(&weighted_sum(fs, lam)?, order)?;
    for (f, &l) in fs.iter().zip(lam.lambdas()) {
        if l > 0.0 {
            lhs -= l * renyi_entropy(f, order)?;
        }
    }
    let rhs = 0.5 * (c.ln() / alpha + (1.0 / alpha - 1.0) * discrete_entropy(lam));
    Ok((lhs, rhs))
}

/// Deficit in the entropic form of the sharp Young inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungDeficit {
    pub deficit: f64,
    /// Orders `r_i` with `λ_i = r'/r_i'`.
    pub orders: Vec<f64>,
    /// `h_r(X_i)` and `h_{r_i}(X_i)` compare as Jensen predicts for every `i`.
    pub jensen_ok: bool,
}

/// `r_i` solving `λ_i = r'/r_i'`; `λ_i = 0` maps to `r_i = 1`.
pub fn young_orders(lam: &SimplexWeights, r: f64) -> Result<Vec<f64>> {
    let rp = holder_conjugate(r)?;
    lam.lambdas()
        .iter()
        .map(|&l| {
            if l == 0.0 {
                return Ok(1.0);
            }
            let rip = rp / l;
            let ri = rip / (rip - 1.0);
            if !(ri > 0.0 && ri.is_finite()) {
                return domain(format!("derived order {ri} from λ = {l} is not positive"));
            }
            Ok(ri)
        })
        .collect()
}

/// `h_r(Σ√λ_i X_i) - Σ λ_i h_{r_i}(X_i) - (1/2) r' (log r / r - Σ log r_i / r_i)`.
pub fn info_young_deficit(
    fs: &[GridDensity],
    lam: &SimplexWeights,
    r: f64,
) -> Result<YoungDeficit> {
    let rp = holder_conjugate(r)?;
    let orders = young_orders(lam, r)?;
    let order = RenyiOrder::finite(r)?;
    let mut deficit = renyi_entropy(&weighted_sum(fs, lam)?, order)?;
    let mut jensen_ok = true;
    for ((f, &l), &ri) in fs.iter().zip(lam.lambdas()).zip(&orders) {
        if l == 0.0 {
            continue;
        }
        let h_ri = renyi_entropy(f, RenyiOrder::new(ri)?)?;
        deficit -= l * h_ri;
        let h_r = renyi_entropy(f, order)?;
        // r > 1 gives 1 < r_i ≤ r and h_r ≤ h_{r_i}; r < 1 reverses both
        let (order_ok, entropy_ok) = if r > 1.0 {
            (1.0 < ri && ri <= r * (1.0 + 1e-12), h_r <= h_ri + 1e-9)
        } else {
            (r * (1.0 - 1e-12) <= ri && ri < 1.0, h_r >= h_ri - 1e-9)
        };
        jensen_ok &= order_ok && entropy_ok;
    }
    let sum_ri: f64 = orders.iter().map(|&ri| ri.ln() / ri).sum();
    deficit -= 0.5 * rp * (r.ln() / r - sum_ri);
    Ok(YoungDeficit {
        deficit,
        orders,
        jensen_ok,
    })
}

/// `(N_r(X+Y)^α, N_r(X)^α + N_r(Y)^α)` for independent `X ~ f`, `Y ~ g`.
pub fn modified_epi_check(
    f: &GridDensity,
    g: &GridDensity,
    order: RenyiOrder,
    alpha: f64,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("α = {alpha} must be positive"));
    }
    let fs = common_grid(&[f.clone(), g.clone()])?;
    let sum = convolve(&fs[0], &fs[1])?;
    let n = |d: &GridDensity| -> Result<f64> { Ok(entropy_power(renyi_entropy(d, order)?, 1)) };
    let lhs = n(&sum)?.powf(alpha);
    let rhs = n(&fs[0])?.powf(alpha) + n(&fs[1])?.powf(alpha);
    Ok((lhs, rhs))
}

/// Smallest dimension `d` with `d > 2r/(1-r)`.
pub fn d_star(r: f64) -> Result<usize> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("r = {r} must lie in (0, 1)"));
    }
    Ok((2.0 * r / (1.0 - r)).floor() as usize + 1)
}

/// One truncation radius of the heavy-tailed experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub sigma2_r: f64,
    pub n_r_x1: f64,
    pub n_r_zn: f64,
    /// `N_r(Z_n) / N_r(X_1)`, an upper bound on the best EPI constant.
    pub cr_bound: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTable {
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub d_star: usize,
    pub sigma2_inf: f64,
    /// `(σ_∞² + 2) N_r(Z)` for a standard Gaussian `Z`.
    pub zn_bound: f64,
    pub rows: Vec<CounterexampleRow>,
}

impl CounterexampleTable {
    /// `cr_bound` decreases along the rows up to relative slack `rel`.
    pub fn is_decreasing(&self, rel: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].cr_bound <= w[0].cr_bound * (1.0 + rel))
    }

    /// CSV with columns `R,sigma2_R,N_r_X1,N_r_Zn,cr_bound,h`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["R", "sigma2_R", "N_r_X1", "N_r_Zn", "cr_bound", "h"])?;
        for row in &self.rows {
            wtr.write_record(
                [
                    row.radius,
                    row.sigma2_r,
                    row.n_r_x1,
                    row.n_r_zn,
                    row.cr_bound,
                    row.h,
                ]
                .map(|v| v.to_string()),
            )?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Validates the parameters of [`counterexample_experiment`].
pub fn check_counterexample_params(r: f64, p: f64, n: usize) -> Result<usize> {
    if !(r > 0.0 && r < 1.0 / 3.0) {
        return domain(format!("r = {r}: r ≥ 1/3 unsupported (needs d* > 1)"));
    }
    if !(p > 3.0 && p <= 1.0 / r) {
        return domain(format!("p = {p} must lie in (3, 1/r] = (3, {}]", 1.0 / r));
    }
    if !n.is_power_of_two() || n.trailing_zeros() as usize > MAX_DOUBLINGS {
        return domain(format!(
            "n = {n} must be a power of two up to 2^{MAX_DOUBLINGS}"
        ));
    }
    Ok(n.trailing_zeros() as usize)
}

/// For each truncation radius, compares `N_r` of one summand with `N_r` of
/// the normalized sum of `n` i.i.d. copies.
///
/// `h = None` uses [`pareto_grid_step`] per radius.
pub fn counterexample_experiment(
    r: f64,
    p: f64,
    radii: &[f64],
    n: usize,
    h: Option<f64>,
) -> Result<CounterexampleTable> {
    let k = check_counterexample_params(r, p, n)?;
    let order = RenyiOrder::finite(r)?;
    let sigma2_inf = ParetoTruncSpec::new(f64::INFINITY, p, 1)?.sigma2_r;
    let zn_bound =
        (sigma2_inf + 2.0) * entropy_power(gaussian_renyi(GaussianSpec::new(1, 1.0)?, order)?, 1);
    let rows = radii
        .par_iter()
        .map(|&radius| {
            let step = h.unwrap_or_else(|| pareto_grid_step(radius));
            let (spec, f) = make_pareto_grid(radius, p, step)?;
            let n_r_x1 = entropy_power(renyi_entropy(&f, order)?, 1);
            let zn = clt_densities(&f, k)?.pop().expect("at least one density");
            let n_r_zn = entropy_power(renyi_entropy(&zn, order)?, 1);
            Ok(CounterexampleRow {
                radius,
                sigma2_r: spec.sigma2_r,
                n_r_x1,
                n_r_zn,
                cr_bound: n_r_zn / n_r_x1,
                h: f.h(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CounterexampleTable {
        r,
        p,
        n,
        d_star: d_star(r)?,
        sigma2_inf,
        zn_bound,
        rows,
    })
}
