//! Rényi entropies of grid and radial densities, entropy powers, and the
//! Gaussian closed forms.

use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::density::{GridDensity, RadialDensity};
use crate::error::{Error, Result};

/// Order of a Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum RenyiOrder {
    /// log of the support measure
    Zero,
    /// `r > 0`, `r ≠ 1`
    Finite(f64),
    Shannon,
    /// `-log sup f`
    Infinity,
}

impl RenyiOrder {
    /// Maps `0`, `1` and `+∞` to their limiting tags.
    pub fn new(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(Self::Zero)
        } else if r == 1.0 {
            Ok(Self::Shannon)
        } else if r == f64::INFINITY {
            Ok(Self::Infinity)
        } else if r > 0.0 && r.is_finite() {
            Ok(Self::Finite(r))
        } else {
            Err(Error::InvalidOrder(format!("{r}")))
        }
    }

    /// A finite order other than 1.
    pub fn finite(r: f64) -> Result<Self> {
        match Self::new(r)? {
            o @ Self::Finite(_) => Ok(o),
            _ => Err(Error::InvalidOrder(format!(
                "{r} is not a finite order ≠ 0, 1"
            ))),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Finite(r) => r,
            Self::Shannon => 1.0,
            Self::Infinity => f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Finite(r) if !(r > 0.0 && r.is_finite() && r != 1.0) => {
                Err(Error::InvalidOrder(format!("finite({r})")))
            }
            _ => Ok(()),
        }
    }
}

impl TryFrom<f64> for RenyiOrder {
    type Error = Error;

    fn try_from(r: f64) -> Result<Self> {
        Self::new(r)
    }
}

impl From<RenyiOrder> for f64 {
    fn from(o: RenyiOrder) -> f64 {
        o.value()
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "0"),
            Self::Finite(r) => write!(f, "{r}"),
            Self::Shannon => write!(f, "1"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

/// Isotropic Gaussian `N(0, σ² I_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub dim: usize,
    pub sigma2: f64,
}

impl GaussianSpec {
    pub fn new(dim: usize, sigma2: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Domain(format!("variance {sigma2} must be positive")));
        }
        Ok(Self { dim, sigma2 })
    }
}

/// Entropy of a density given as (height, weight) cells, where the weight is
/// the measure of the cell.
fn weighted_entropy(cells: impl Iterator<Item = (f64, f64)> + Clone, order: RenyiOrder) -> f64 {
    let positive = cells.filter(|(v, _)| *v > 0.0);
    match order {
        RenyiOrder::Zero => positive.map(|(_, w)| w).sum::<f64>().ln(),
        RenyiOrder::Shannon => -positive.map(|(v, w)| v * v.ln() * w).sum::<f64>(),
        RenyiOrder::Infinity => -positive.map(|(v, _)| v).fold(0.0, f64::max).ln(),
        RenyiOrder::Finite(r) => {
            // factor out the peak so v^r neither overflows nor underflows
            let peak = positive.clone().map(|(v, _)| v).fold(0.0, f64::max);
            let sum: f64 = positive.map(|(v, w)| (v / peak).powf(r) * w).sum();
            (r * peak.ln() + sum.ln()) / (1.0 - r)
        }
    }
}

/// Rényi entropy of a grid density by the midpoint rule.
pub fn renyi_entropy(f: &GridDensity, order: RenyiOrder) -> Result<f64> {
    order.validate()?;
    let h = f.h();
    let cells = f.values().iter().map(move |&v| (v, h));
    Ok(weighted_entropy(cells, order))
}

/// Rényi entropy of a spherically symmetric density on `R^d`.
pub fn renyi_entropy_radial(f: &RadialDensity, order: RenyiOrder) -> Result<f64> {
    order.validate()?;
    let d = f.dim();
    let h = f.h();
    let shell = d as f64 * crate::density::unit_ball_volume(d);
    let cells = f.profile().iter().enumerate().map(move |(i, &v)| {
        let rho = (i as f64 + 0.5) * h;
        (v, shell * rho.powi(d as i32 - 1) * h)
    });
    Ok(weighted_entropy(cells, order))
}

/// Densities whose power integrals `∫ f^r` and entropies can be evaluated.
pub trait PowerIntegral {
    fn dim(&self) -> usize;

    /// `∫ f^r` over the support, for `r > 0`.
    fn power_integral(&self, r: f64) -> f64;

    fn renyi(&self, order: RenyiOrder) -> Result<f64>;
}

impl PowerIntegral for GridDensity {
    fn dim(&self) -> usize {
        1
    }

    fn power_integral(&self, r: f64) -> f64 {
        self.values()
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|v| v.powf(r))
            .sum::<f64>()
            * self.h()
    }

    fn renyi(&self, order: RenyiOrder) -> Result<f64> {
        renyi_entropy(self, order)
    }
}

impl PowerIntegral for RadialDensity {
    fn dim(&self) -> usize {
        RadialDensity::dim(self)
    }

    fn power_integral(&self, r: f64) -> f64 {
        RadialDensity::power_integral(self, r)
    }

    fn renyi(&self, order: RenyiOrder) -> Result<f64> {
        renyi_entropy_radial(self, order)
    }
}

/// Entropy power `exp(2h/d)`.
pub fn entropy_power(hval: f64, dim: usize) -> f64 {
    (2.0 * hval / dim as f64).exp()
}

/// Rényi entropy of `N(0, σ² I_d)`; `+∞` at order zero.
pub fn gaussian_renyi(g: GaussianSpec, order: RenyiOrder) -> Result<f64> {
    order.validate()?;
    let half_d = g.dim as f64 / 2.0;
    let base = half_d * (2.0 * PI * g.sigma2).ln();
    Ok(match order {
        RenyiOrder::Zero => f64::INFINITY,
        RenyiOrder::Finite(r) => base + half_d * r.ln() / (r - 1.0),
        RenyiOrder::Shannon => half_d * (2.0 * PI * E * g.sigma2).ln(),
        RenyiOrder::Infinity => base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_gaussian, make_two_block, make_uniform};

    #[test]
    fn order_tags() {
        assert_eq!(RenyiOrder::new(0.0).unwrap(), RenyiOrder::Zero);
        assert_eq!(RenyiOrder::new(1.0).unwrap(), RenyiOrder::Shannon);
        assert_eq!(
            RenyiOrder::new(f64::INFINITY).unwrap(),
            RenyiOrder::Infinity
        );
        assert!(RenyiOrder::new(-0.5).is_err());
        assert!(RenyiOrder::new(f64::NAN).is_err());
        assert!(RenyiOrder::finite(1.0).is_err());
        let f = make_uniform(0.0, 1.0, 0.01).unwrap();
        assert!(renyi_entropy(&f, RenyiOrder::Finite(1.0)).is_err());
    }

    #[test]
    fn uniform_all_orders_zero() {
        let f = make_uniform(0.0, 1.0, 1e-3).unwrap();
        for o in [0.0, 0.3, 1.0, 2.0, f64::INFINITY] {
            let h = renyi_entropy(&f, RenyiOrder::new(o).unwrap()).unwrap();
            assert!(h.abs() < 1e-12, "order {o}: {h}");
        }
    }

    #[test]
    fn two_block_entropy() {
        let f = make_two_block();
        let h = renyi_entropy(&f, RenyiOrder::Finite(2.0)).unwrap();
        assert!((h - (2.0f64 / 3.0).ln()).abs() < 1e-6);
        let h0 = renyi_entropy(&f, RenyiOrder::Zero).unwrap();
        assert!((h0 - (2.0f64 / 3.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn gaussian_grid_matches_closed_form() {
        let f = make_gaussian(1.0, 1e-3, 12.0).unwrap();
        let g = GaussianSpec::new(1, 1.0).unwrap();
        for o in [
            RenyiOrder::Finite(2.0),
            RenyiOrder::Shannon,
            RenyiOrder::Infinity,
        ] {
            let num = renyi_entropy(&f, o).unwrap();
            let exact = gaussian_renyi(g, o).unwrap();
            assert!((num - exact).abs() < 1e-6, "{o}: {num} vs {exact}");
        }
        assert!(
            (gaussian_renyi(g, RenyiOrder::Finite(2.0)).unwrap() - 1.265512123484645).abs() < 1e-12
        );
        assert!(
            (gaussian_renyi(g, RenyiOrder::Shannon).unwrap() - 1.4189385332046727).abs() < 1e-12
        );
        assert_eq!(gaussian_renyi(g, RenyiOrder::Zero).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gaussian_continuous_at_shannon() {
        let g = GaussianSpec::new(2, 1.0).unwrap();
        let shannon = gaussian_renyi(g, RenyiOrder::Shannon).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..7 {
            let eps = 10f64.powi(-k);
            let lo = gaussian_renyi(g, RenyiOrder::Finite(1.0 - eps)).unwrap();
            let hi = gaussian_renyi(g, RenyiOrder::Finite(1.0 + eps)).unwrap();
            let gap = (lo - shannon).abs().max((hi - shannon).abs());
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn entropy_powers() {
        assert_eq!(entropy_power(0.0, 1), 1.0);
        assert!((entropy_power(2f64.ln(), 1) - 4.0).abs() < 1e-12);
        assert!((entropy_power(2f64.ln(), 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn radial_uniform_disc() {
        let f = RadialDensity::uniform_ball(2, 1.0, 1e-4).unwrap();
        for o in [0.0, 0.5, 1.0, 3.0, f64::INFINITY] {
            let h = renyi_entropy_radial(&f, RenyiOrder::new(o).unwrap()).unwrap();
            assert!((h - PI.ln()).abs() < 1e-5, "order {o}: {h}");
        }
    }

    #[test]
    fn order_serializes_as_number() {
        let json = serde_json::to_string(&RenyiOrder::Finite(0.5)).unwrap();
        assert_eq!(json, "0.5");
        let o: RenyiOrder = serde_json::from_str("1.0").unwrap();
        assert_eq!(o, RenyiOrder::Shannon);
    }
}
