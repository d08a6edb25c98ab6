//! Invariant suites: exact operator identities, cutoff and ASTLO geometry,
//! and propagator consistency. Each check reports its measured value and the
//! bound it must respect.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::astlo::{astlo_operator, structured_pairs, taylor_expansion_check, CutoffFunction, VelocityParams};
use crate::dynamics::{
    complement, interaction_picture_check, projector, Method, Propagator, Truncate,
};
use crate::error::Result;
use crate::fock::FockBasis;
use crate::lattice::{ball, Lattice, SiteSet};
use crate::linalg::{self, max_abs, SpectralPropagator};
use crate::operators::{
    build_hamiltonian, build_hopping, commutator, commutator_expansion_residual, number_operator,
    HamiltonianParams,
};
use crate::states::spread_state;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::AtMost(limit),
            passed: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::AtLeast(limit),
            passed: value >= limit,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match self.bound {
            Bound::AtMost(l) => write!(f, "{status} {}: {:.3e} <= {:.1e}", self.name, self.value, l),
            Bound::AtLeast(l) => write!(f, "{status} {}: {:.4} >= {}", self.name, self.value, l),
        }
    }
}

/// Sector on which a suite runs.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSector {
    pub extents: Vec<i64>,
    pub n_tot: usize,
    pub n_max: usize,
}

impl SuiteSector {
    pub fn new(extents: &[i64], n_tot: usize, n_max: usize) -> Self {
        SuiteSector {
            extents: extents.to_vec(),
            n_tot,
            n_max,
        }
    }

    fn build(&self) -> Result<(Arc<FockBasis>, SiteSet)> {
        let lat = Arc::new(Lattice::new(self.extents.len(), &self.extents)?);
        let basis = Arc::new(FockBasis::enumerate(Arc::clone(&lat), self.n_tot, self.n_max)?);
        Ok((basis, SiteSet::all(lat)))
    }

    fn label(&self) -> String {
        let ext: Vec<String> = self.extents.iter().map(|e| e.to_string()).collect();
        format!("{} N={} cap={}", ext.join("x"), self.n_tot, self.n_max)
    }
}

/// Hermiticity, number conservation, the commutator expansion for random
/// site functions, projector complements, `Π^⊥ e^{itH̄} = Π^⊥`, and
/// commutation of truncated disjointly supported operators.
pub fn identity_suite(
    sector: &SuiteSector,
    params: &HamiltonianParams,
    seed: u64,
    random_functions: usize,
) -> Result<Vec<Check>> {
    let (basis, all) = sector.build()?;
    let lat = Arc::clone(all.lattice());
    let tag = sector.label();
    let mut out = Vec::new();

    let h = build_hamiltonian(&basis, &all, params)?;
    out.push(Check::at_most(format!("[{tag}] H - H^dagger"), h.hermiticity_defect(), 0.0));
    let n = number_operator(&basis, &all).to_sparse();
    out.push(Check::at_most(format!("[{tag}] [H, N]"), commutator(&h, &n)?.max_abs(), 0.0));

    let x = ball(&lat, lat.origin_index(), 1.0)?;
    let hx = build_hamiltonian(&basis, &x, params)?;
    let nx = number_operator(&basis, &x).to_sparse();
    out.push(Check::at_most(format!("[{tag}] [H_X, N_X]"), commutator(&hx, &nx)?.max_abs(), 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..random_functions {
        let g: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        worst = worst.max(commutator_expansion_residual(&basis, &g, params)?);
    }
    out.push(Check::at_most(
        format!("[{tag}] commutator expansion, {random_functions} random g"),
        worst,
        1e-12,
    ));

    let nu = 1.min(sector.n_max);
    let p = projector(&basis, &all, nu)?;
    let perp = complement(&p);
    let defect = p
        .values()
        .iter()
        .zip(perp.values())
        .map(|(a, b)| (a + b - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most(format!("[{tag}] Pi + Pi_perp - 1"), defect, 0.0));

    let hbar = h.truncate(&p)?;
    let spectral = SpectralPropagator::new(hbar.to_dense());
    let perp_d = perp.to_dense();
    let mut inv = 0.0f64;
    for t in [0.3, 1.0, 2.7] {
        inv = inv.max(max_abs(&(&perp_d * spectral.unitary(-t) - &perp_d)));
    }
    out.push(Check::at_most(format!("[{tag}] Pi_perp e^(itHbar) - Pi_perp"), inv, 1e-10));

    // two disjoint blocks at opposite ends of the site ordering
    let m = lat.len();
    let left = SiteSet::new(Arc::clone(&lat), 0..(m / 2).max(1))?;
    let right = SiteSet::new(Arc::clone(&lat), (m / 2).max(1)..m)?;
    let a = build_hamiltonian(&basis, &left, params)?.truncate(&p)?.to_dense();
    let b = build_hopping(&basis, &right, 0.7).truncate(&p)?.to_dense();
    out.push(Check::at_most(
        format!("[{tag}] [Abar, Bbar] disjoint supports"),
        max_abs(&linalg::commutator(&a, &b)),
        1e-12,
    ));
    Ok(out)
}

/// Cutoff sandwich, ASTLO geometric bounds over a radius/velocity grid, and
/// the order of the symmetrized expansion residual.
pub fn astlo_suite(sectors: &[SuiteSector], j: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let mut sandwich = 0.0f64;
    for eps in [0.25, 0.5, 1.0, 2.0] {
        let chi = CutoffFunction::new(eps)?;
        for (&x, _) in chi.grid().iter().zip(chi.tabulated_chi()) {
            for probe in [x, x - 0.5 * eps, x + 0.5 * eps] {
                let v = chi.value(probe);
                let lo = if probe >= eps { 1.0 } else { 0.0 };
                let hi = if probe >= eps / 2.0 { 1.0 } else { 0.0 };
                sandwich = sandwich.max(lo - v).max(v - hi);
            }
        }
    }
    out.push(Check::at_most("cutoff sandwich 1{x>=eps} <= chi <= 1{x>=eps/2}", sandwich.max(0.0), 1e-6));

    for sector in sectors {
        let (basis, all) = sector.build()?;
        let lat = Arc::clone(all.lattice());
        let d = lat.dim();
        let kappa = 2.0 * d as f64 * j.abs();
        let o = lat.origin_index();
        let mut violation = 0.0f64;
        let mut combos = 0;
        for &r in &[1.0, 1.5, 2.0] {
            for &big_r in &[3.0, 4.0] {
                for &mult in &[1.25, 2.0] {
                    let vp = VelocityParams::new(j, d, mult * kappa.max(0.5))?.with_radii(r, big_r)?;
                    let chi = CutoffFunction::new(vp.epsilon)?;
                    let s = vp.s.expect("radii set");
                    let n_big = number_operator(&basis, &ball(&lat, o, big_r)?);
                    let n_small = number_operator(&basis, &ball(&lat, o, r)?);
                    let at0 = astlo_operator(&basis, &chi, &vp, big_r, 0.0)?;
                    for (a, b) in at0.values().iter().zip(n_big.values()) {
                        violation = violation.max(a - b);
                    }
                    for frac in [0.0, 0.25, 0.5, 1.0] {
                        let op = astlo_operator(&basis, &chi, &vp, big_r, frac * s)?;
                        for (a, b) in op.values().iter().zip(n_small.values()) {
                            violation = violation.max(b - a);
                        }
                    }
                    combos += 1;
                }
            }
        }
        out.push(Check::at_most(
            format!("[{}] ASTLO geometric bounds over {combos} (r, R, v)", sector.label()),
            violation.max(0.0),
            1e-6,
        ));
    }

    let chi = CutoffFunction::new(1.0)?;
    let pairs = structured_pairs(1.0, 100, 10);
    let rep = taylor_expansion_check(&chi, 1, &pairs)?;
    out.push(Check::at_least(
        format!("symmetrized expansion residual exponent ({} pairs)", rep.pairs),
        rep.fitted_exponent.unwrap_or(f64::NAN),
        1.9,
    ));
    out.push(Check::at_most("symmetrized expansion exact cases", rep.max_violation, 1e-12));
    Ok(out)
}

/// Krylov against dense, unitarity, group law, and the interaction picture.
pub fn propagator_suite(
    sector: &SuiteSector,
    interaction_sector: &SuiteSector,
    params: &HamiltonianParams,
    times: &[f64],
) -> Result<Vec<Check>> {
    let (basis, all) = sector.build()?;
    let tag = sector.label();
    let j = params.j.abs().max(f64::MIN_POSITIVE);
    let h = build_hamiltonian(&basis, &all, params)?;
    let profile: Vec<f64> = (0..basis.sites()).map(|x| 1.0 + (x % 3) as f64).collect();
    let psi = spread_state(&basis, &profile, false)?;
    let dense = Propagator::new(h.clone(), Method::Dense);
    let krylov = Propagator::new(h, Method::Krylov { dim: 30, tol: 1e-10 });

    let mut out = Vec::new();
    let mut diff = 0.0f64;
    let mut unitarity = 0.0f64;
    for &jt in times {
        let t = jt / j;
        let a = dense.evolve(&psi, t)?;
        let k = krylov.evolve(&psi, t)?;
        diff = diff.max((a.vector().unwrap() - k.vector().unwrap()).norm());
        unitarity = unitarity.max((a.norm() - 1.0).abs()).max((k.norm() - 1.0).abs());
    }
    out.push(Check::at_most(format!("[{tag}] Krylov vs dense"), diff, 1e-8));

    let mut group = 0.0f64;
    let mut cur = psi.clone();
    let step = 0.25 / j;
    for n in 1..=8 {
        cur = krylov.evolve(&cur, step)?;
        unitarity = unitarity.max((cur.norm() - 1.0).abs());
        let direct = dense.evolve(&psi, n as f64 * step)?;
        group = group.max((cur.vector().unwrap() - direct.vector().unwrap()).norm());
    }
    out.push(Check::at_most(format!("[{tag}] unitarity per step"), unitarity, 1e-10));
    out.push(Check::at_most(format!("[{tag}] group law"), group, 1e-8));

    let (ib, iall) = interaction_sector.build()?;
    let rep = interaction_picture_check(&ib, &iall, 1, params, 1.0 / j)?;
    out.push(Check::at_most(
        format!("[{}] interaction picture, nu=1, Jt=1", interaction_sector.label()),
        rep.residual,
        1e-6,
    ));
    Ok(out)
}

/// The suites at the sizes used by `lrcone verify`.
pub fn default_suites(seed: u64, random_functions: usize) -> Result<Vec<Check>> {
    let params = HamiltonianParams::onsite(1.0, 0.8, 0.2);
    let small = SuiteSector::new(&[5], 2, 2);
    let mut out = identity_suite(&small, &params, seed, random_functions)?;
    out.extend(identity_suite(&SuiteSector::new(&[3, 3], 2, 2), &params, seed, random_functions)?);
    out.extend(astlo_suite(&[small.clone(), SuiteSector::new(&[5, 5], 2, 2)], params.j)?);
    out.extend(propagator_suite(&SuiteSector::new(&[6], 2, 2), &SuiteSector::new(&[4], 2, 2), &params, &[0.5, 1.0, 2.0])?);
    Ok(out)
}
