//! Static potential from summing the diagonalized cross term over field modes.
//!
//! Each mode `k` contributes `−2 λ(k)²/ω(k)` between the two masses, weighted
//! by the plane-wave phase `e^{ik·r}`. With `λ(k) = g/√(2ω(k))` the angular
//! average reduces this to a radial integral
//!
//! ```text
//! V(r) = −(1/2π²) ∫₀^{k_max} k² · g²/ω(k)² · sin(kr)/(kr) dk
//! ```
//!
//! For `ω = k` this is `−g² Si(k_max r)/(2π² r) → −g²/(4πr)`. For
//! `ω = √(k² + m²)` it tends to the Yukawa form `−g² e^{−mr}/(4πr)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of quadrature intervals per oscillation period `2π/r`.
pub const MIN_INTERVALS_PER_PERIOD: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dispersion {
    /// `ω = k`.
    Massless,
    /// `ω = √(k² + m²)`.
    Massive { mass: f64 },
}

impl Dispersion {
    pub fn omega(&self, k: f64) -> f64 {
        match self {
            Dispersion::Massless => k,
            Dispersion::Massive { mass } => (k * k + mass * mass).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub k_max: f64,
    /// Number of quadrature intervals on `[0, k_max]`; rounded up to even.
    pub n_k: usize,
    pub dispersion: Dispersion,
    /// Overall coupling, `λ(k) = g/√(2ω(k))`.
    pub g: f64,
}

impl ModeGrid {
    pub fn new(k_max: f64, n_k: usize, dispersion: Dispersion, g: f64) -> Result<Self> {
        let grid = Self { k_max, n_k, dispersion, g };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid fine enough for every `r ≤ r_max`, with twice the minimum
    /// resolution.
    pub fn resolved(k_max: f64, r_max: f64, dispersion: Dispersion, g: f64) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::InvalidParams(format!("r_max must be positive, got {r_max}")));
        }
        let n = (2.0 * MIN_INTERVALS_PER_PERIOD * k_max * r_max / (2.0 * std::f64::consts::PI)).ceil() as usize;
        Self::new(k_max, n.max(16), dispersion, g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_max > 0.0) || !self.k_max.is_finite() {
            return Err(Error::InvalidParams(format!("k_max must be positive, got {}", self.k_max)));
        }
        if self.n_k < 16 {
            return Err(Error::InvalidParams(format!("n_k must be at least 16, got {}", self.n_k)));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParams("g must be finite".into()));
        }
        if let Dispersion::Massive { mass } = self.dispersion {
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(Error::InvalidParams(format!("mass must be non-negative, got {mass}")));
            }
        }
        Ok(())
    }

    /// `λ(k) = g/√(2ω(k))`.
    pub fn coupling(&self, k: f64) -> f64 {
        self.g / (2.0 * self.dispersion.omega(k)).sqrt()
    }

    fn intervals(&self) -> usize {
        self.n_k + self.n_k % 2
    }

    /// Integrand `k² · 2λ(k)²/ω(k) · sin(kr)/(kr)`, with the `k → 0` limit
    /// taken analytically.
    fn integrand(&self, k: f64, r: f64) -> f64 {
        let weight = match self.dispersion {
            // k² g²/k² without the 0/0 at the origin
            Dispersion::Massless => self.g * self.g,
            Dispersion::Massive { .. } => {
                if k == 0.0 {
                    return 0.0;
                }
                let w = self.dispersion.omega(k);
                k * k * 2.0 * self.coupling(k).powi(2) / w
            }
        };
        let x = k * r;
        let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        weight * sinc
    }
}

/// Potential between two static masses at separation `r`, by composite Simpson
/// quadrature over the mode grid.
pub fn effective_potential(r: f64, grid: &ModeGrid) -> Result<f64> {
    grid.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!("r must be positive, got {r}")));
    }
    let n = grid.intervals();
    let h = grid.k_max / n as f64;
    let per_period = 2.0 * std::f64::consts::PI / (r * h);
    if per_period < MIN_INTERVALS_PER_PERIOD {
        return Err(Error::NumericalGuard {
            guard: "oscillation",
            detail: format!(
                "{per_period:.1} intervals per period of sin(kr) at r = {r}; need {MIN_INTERVALS_PER_PERIOD}, raise n_k"
            ),
        });
    }
    let mut sum = grid.integrand(0.0, r) + grid.integrand(grid.k_max, r);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * grid.integrand(i as f64 * h, r);
    }
    let integral = sum * h / 3.0;
    Ok(-integral / (2.0 * std::f64::consts::PI.powi(2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `log|V|` against `log r`.
pub fn fit_power_law(rs: &[f64], vs: &[f64]) -> Result<PowerLawFit> {
    if rs.len() != vs.len() {
        return Err(Error::InvalidData(format!("{} radii but {} values", rs.len(), vs.len())));
    }
    if rs.len() < 5 {
        return Err(Error::InvalidData(format!("need at least 5 points, got {}", rs.len())));
    }
    if rs.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidData("radii must be positive".into()));
    }
    let positive = vs[0] > 0.0;
    if vs.iter().any(|v| *v == 0.0 || !v.is_finite() || (*v > 0.0) != positive) {
        return Err(Error::InvalidData("values change sign or vanish".into()));
    }
    let x: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = vs.iter().map(|v| v.abs().ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 1e-24 * n {
        return Err(Error::InvalidData("radii have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    let sign = if positive { 1.0 } else { -1.0 };
    Ok(PowerLawFit { exponent: slope, prefactor: sign * intercept.exp(), r_squared })
}
