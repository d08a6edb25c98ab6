//! Adiabatic space-time localization observables (ASTLOs).
//!
//! The cutoff is the normalized primitive of a squared bump supported on
//! `(ε/2, ε)`: `χ' = w / Z` with `w = bump²`, hence `sqrt(χ') = bump / sqrt(Z)`
//! is smooth and compactly supported. `χ` itself is tabulated on `[0, ε]` and
//! read back with cubic Hermite interpolation; `χ'` and `sqrt(χ')` are exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fock::FockBasis;
use crate::operators::{second_quantize, DiagonalOperator};

/// Intervals on `[0, ε]`; the transition region `(ε/2, ε)` gets half of them.
pub const GRID_INTERVALS: usize = 8192;

// 8-point Gauss-Legendre on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

/// A member of the cutoff class: `χ = 0` below `ε/2`, `χ = 1` above `ε`,
/// nondecreasing, with `sqrt(χ')` smooth and supported in `(ε/2, ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffFunction {
    epsilon: f64,
    // ∫ w over the real line, in x units
    #[serde(skip)]
    norm: f64,
    #[serde(skip)]
    grid: Vec<f64>,
    #[serde(skip)]
    chi: Vec<f64>,
    #[serde(skip)]
    dchi: Vec<f64>,
    #[serde(skip)]
    sqrt_dchi: Vec<f64>,
    grid_points: usize,
}

impl CutoffFunction {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return invalid(format!("cutoff epsilon must be positive, got {epsilon}"));
        }
        let n = GRID_INTERVALS;
        let h = epsilon / n as f64;
        let grid: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();

        let half = epsilon / 2.0;
        let w = |x: f64| {
            let b = bump((x - half) / half);
            b * b
        };

        // Cumulative Gauss-Legendre per cell.
        let mut cumulative = vec![0.0; n + 1];
        for k in 0..n {
            let (a, b) = (grid[k], grid[k + 1]);
            let mid = 0.5 * (a + b);
            let rad = 0.5 * (b - a);
            let cell: f64 = GL_NODES
                .iter()
                .zip(GL_WEIGHTS.iter())
                .map(|(&z, &wt)| wt * w(mid + rad * z))
                .sum::<f64>()
                * rad;
            cumulative[k + 1] = cumulative[k] + cell;
        }
        let norm = cumulative[n];
        let mut chi: Vec<f64> = cumulative.iter().map(|c| c / norm).collect();
        let mid_index = 3 * n / 4;
        // exact endpoints and symmetry point
        for (k, c) in chi.iter_mut().enumerate() {
            if k <= n / 2 {
                *c = 0.0;
            }
        }
        chi[n] = 1.0;
        chi[mid_index] = 0.5;

        let dchi: Vec<f64> = grid.iter().map(|&x| w(x) / norm).collect();
        let sqrt_dchi: Vec<f64> = grid
            .iter()
            .map(|&x| bump((x - half) / half) / norm.sqrt())
            .collect();
        Ok(CutoffFunction {
            epsilon,
            norm,
            grid,
            chi,
            dchi,
            sqrt_dchi,
            grid_points: n + 1,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn tabulated_chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn tabulated_derivative(&self) -> &[f64] {
        &self.dchi
    }

    pub fn tabulated_sqrt_derivative(&self) -> &[f64] {
        &self.sqrt_dchi
    }

    pub fn value(&self, x: f64) -> f64 {
        let half = self.epsilon / 2.0;
        if x <= half {
            return 0.0;
        }
        if x >= self.epsilon {
            return 1.0;
        }
        let h = self.epsilon / GRID_INTERVALS as f64;
        let k = ((x / h).floor() as usize).min(GRID_INTERVALS - 1);
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let s = (x - x0) / h;
        let (y0, y1) = (self.chi[k], self.chi[k + 1]);
        let (m0, m1) = (self.derivative(x0) * h, self.derivative(x1) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        v.clamp(0.0, 1.0)
    }

    /// `χ'`.
    pub fn derivative(&self, x: f64) -> f64 {
        let half = self.epsilon / 2.0;
        let b = bump((x - half) / half);
        b * b / self.norm
    }

    /// `u = sqrt(χ')`.
    pub fn sqrt_derivative(&self, x: f64) -> f64 {
        let half = self.epsilon / 2.0;
        bump((x - half) / half) / self.norm.sqrt()
    }
}

/// Velocity bookkeeping: `κ = 2d|J|`, `ṽ = (v + κ)/2`, `ε = v - ṽ`, and the
/// adiabatic time `s = (R - r)/v` once radii are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityParams {
    pub j: f64,
    pub dim: usize,
    pub v: f64,
    pub kappa: f64,
    pub v_tilde: f64,
    pub epsilon: f64,
    pub s: Option<f64>,
}

impl VelocityParams {
    pub fn new(j: f64, dim: usize, v: f64) -> Result<Self> {
        let kappa = 2.0 * dim as f64 * j.abs();
        if !(v > kappa) {
            return invalid(format!("velocity v = {v} must exceed 2d|J| = {kappa}"));
        }
        let v_tilde = 0.5 * (v + kappa);
        Ok(VelocityParams {
            j,
            dim,
            v,
            kappa,
            v_tilde,
            epsilon: v - v_tilde,
            s: None,
        })
    }

    /// Fixes `s = (R - r)/v`.
    pub fn with_radii(self, r: f64, big_r: f64) -> Result<Self> {
        if !(big_r > r && r >= 0.0) {
            return invalid(format!("need R > r >= 0, got r = {r}, R = {big_r}"));
        }
        Ok(VelocityParams {
            s: Some((big_r - r) / self.v),
            ..self
        })
    }

    fn adiabatic_time(&self) -> Result<f64> {
        match self.s {
            Some(s) if s > 0.0 => Ok(s),
            _ => invalid("adiabatic time s not set; call with_radii first"),
        }
    }
}

/// `χ_{ts}(x) = χ((R - ṽt - |x|)/s)`, with `|x|` the distance to the origin.
pub fn eval_rescaled(
    chi: &CutoffFunction,
    vp: &VelocityParams,
    big_r: f64,
    t: f64,
    site_norm: f64,
) -> Result<f64> {
    let s = vp.adiabatic_time()?;
    Ok(chi.value((big_r - vp.v_tilde * t - site_norm) / s))
}

/// `dΓ(χ_{ts})` over the basis.
pub fn astlo_operator(
    basis: &Arc<FockBasis>,
    chi: &CutoffFunction,
    vp: &VelocityParams,
    big_r: f64,
    t: f64,
) -> Result<DiagonalOperator> {
    let lat = basis.lattice();
    let f = (0..lat.len())
        .map(|x| eval_rescaled(chi, vp, big_r, t, lat.norm(x)))
        .collect::<Result<Vec<f64>>>()?;
    second_quantize(basis, &f)
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub order: u32,
    pub pairs: usize,
    /// Smallest `C` with `|χ(x) - χ(y) - (x-y)u(x)u(y)| <= C (x-y)²` over the sample.
    pub remainder_constant: f64,
    /// Largest residual on pairs where it must vanish identically (`x = y`,
    /// or both points on the same flat side of the transition).
    pub max_violation: f64,
    /// Slope of `log|residual|` against `log|x - y|`, fitted within groups of
    /// pairs sharing a midpoint. `None` when no group has two usable pairs.
    pub fitted_exponent: Option<f64>,
}

/// Checks the first-order symmetrized expansion
/// `χ(x) - χ(y) = (x - y) u(x) u(y) + O((x - y)²)`.
///
/// For `order >= 2` the same first-order residual is checked for a bounded
/// `(x - y)²` coefficient; the higher symmetric terms are not built.
pub fn taylor_expansion_check(
    chi: &CutoffFunction,
    order: u32,
    pairs: &[(f64, f64)],
) -> Result<TaylorReport> {
    if order < 1 {
        return invalid("expansion order must be >= 1");
    }
    let eps = chi.epsilon();
    let mut remainder_constant = 0.0f64;
    let mut max_violation = 0.0f64;
    let mut groups: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();

    for &(x, y) in pairs {
        let h = x - y;
        let res = chi.value(x) - chi.value(y) - h * chi.sqrt_derivative(x) * chi.sqrt_derivative(y);
        let flat = (x >= eps && y >= eps) || (x <= eps / 2.0 && y <= eps / 2.0);
        if h == 0.0 || flat {
            max_violation = max_violation.max(res.abs());
            continue;
        }
        remainder_constant = remainder_constant.max(res.abs() / (h * h));
        if res != 0.0 {
            let key = (0.5 * (x + y) / eps * 1e9).round() as i64;
            groups
                .entry(key)
                .or_default()
                .push((h.abs().ln(), res.abs().ln()));
        }
    }

    // Fixed-effects regression: demean within each midpoint group.
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for pts in groups.values().filter(|g| g.len() >= 2) {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        for &(lx, ly) in pts {
            sxy += (lx - mx) * (ly - my);
            sxx += (lx - mx) * (lx - mx);
        }
    }
    let fitted_exponent = (sxx > 0.0).then(|| sxy / sxx);

    Ok(TaylorReport {
        order,
        pairs: pairs.len(),
        remainder_constant,
        max_violation,
        fitted_exponent,
    })
}

/// Pairs `(m + h/2, m - h/2)` for `centers` midpoints spread over the
/// interior of the transition region and `steps` geometric separations
/// between `ε/100` and `ε/10`.
pub fn structured_pairs(epsilon: f64, centers: usize, steps: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(centers * steps);
    for c in 0..centers {
        let m = epsilon * (0.6 + 0.3 * (c as f64 + 0.5) / centers as f64);
        for k in 0..steps {
            let frac = if steps == 1 { 0.0 } else { k as f64 / (steps - 1) as f64 };
            let h = epsilon * 0.01 * 10f64.powf(frac);
            out.push((m + h / 2.0, m - h / 2.0));
        }
    }
    out
}
