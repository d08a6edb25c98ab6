//! Initial states on a fixed-`N` sector and their number moments.

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fock::{FockBasis, Occupation};
use crate::lattice::{ball, SiteSet};
use crate::operators::{number_operator, same_basis, DenseMatrix, DiagonalOperator, C64};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum StateData {
    Pure(DVector<C64>),
    Mixed(DenseMatrix),
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    data: StateData,
}

impl QuantumState {
    pub fn pure(basis: Arc<FockBasis>, psi: DVector<C64>) -> Result<Self> {
        if psi.len() != basis.dim() {
            return invalid(format!(
                "state vector has length {}, basis has dimension {}",
                psi.len(),
                basis.dim()
            ));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return invalid(format!("state vector norm {norm} is not 1"));
        }
        Ok(QuantumState {
            basis,
            data: StateData::Pure(psi),
        })
    }

    pub fn mixed(basis: Arc<FockBasis>, rho: DenseMatrix) -> Result<Self> {
        let n = basis.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return invalid("density matrix shape does not match basis");
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return invalid(format!("density matrix trace {tr} is not 1"));
        }
        let herm = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > NORM_TOL {
            return invalid(format!("density matrix is not Hermitian (defect {herm:e})"));
        }
        let min_eig = crate::linalg::hermitian_eigenvalues(&rho)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -NORM_TOL {
            return invalid(format!("density matrix has negative eigenvalue {min_eig:e}"));
        }
        Ok(QuantumState {
            basis,
            data: StateData::Mixed(rho),
        })
    }

    pub(crate) fn from_parts_unchecked(basis: Arc<FockBasis>, data: StateData) -> Self {
        QuantumState { basis, data }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DenseMatrix {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(m) => m.clone(),
        }
    }

    /// Diagonal of `ρ` in the occupation basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Mixed(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    /// `‖ψ‖` for pure states, `Tr ρ` for mixed ones.
    pub fn norm(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm(),
            StateData::Mixed(m) => m.trace().re,
        }
    }

    /// `Tr[D ρ]` for a diagonal operator.
    pub fn expectation_diag(&self, op: &DiagonalOperator) -> Result<f64> {
        if !same_basis(op.basis(), &self.basis) {
            return invalid("operator and state live on different bases");
        }
        Ok(self
            .populations()
            .iter()
            .zip(op.values())
            .map(|(p, v)| p * v)
            .sum())
    }

    /// `Tr[N_X^η ρ]`.
    pub fn moment(&self, region: &SiteSet, eta: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return invalid(format!("moment order must be positive, got {eta}"));
        }
        let n = number_operator(&self.basis, region);
        Ok(self
            .populations()
            .iter()
            .zip(n.values())
            .map(|(p, &v)| p * v.powf(eta))
            .sum())
    }

    /// Sweeps `Tr[N_{B_r(x)}^ζ ρ] / (λ r^d)^ζ` over every site, integer radii
    /// up to the lattice diameter and integer `ζ <= η_max`.
    pub fn check_controlled_density(&self, lambda: f64, eta_max: f64) -> Result<DensityReport> {
        if !(lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        if !(eta_max >= 1.0) {
            return invalid(format!("eta_max must be >= 1, got {eta_max}"));
        }
        let lat = self.basis.lattice();
        let d = lat.dim() as i32;
        let diam = SiteSet::all(Arc::clone(lat)).diameter()?;
        let r_max = diam.ceil() as usize;
        let zeta_max = eta_max.floor() as u32;
        let pops = self.populations();

        let mut report = DensityReport {
            lambda,
            eta_max,
            worst_ratio: 0.0,
            witness: None,
            passed: true,
        };
        for x in 0..lat.len() {
            for r in 1..=r_max {
                let region = ball(lat, x, r as f64)?;
                let counts = number_operator(&self.basis, &region);
                for zeta in 1..=zeta_max {
                    let m: f64 = pops
                        .iter()
                        .zip(counts.values())
                        .map(|(p, &v)| p * v.powi(zeta as i32))
                        .sum();
                    let ratio = m / (lambda * (r as f64).powi(d)).powi(zeta as i32);
                    if ratio > report.worst_ratio {
                        report.worst_ratio = ratio;
                        report.witness = Some(DensityWitness {
                            site: lat.coord(x).to_vec(),
                            radius: r as f64,
                            zeta,
                            moment: m,
                        });
                    }
                }
            }
        }
        report.passed = report.worst_ratio <= 1.0 + 1e-12;
        Ok(report)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityWitness {
    pub site: Vec<i64>,
    pub radius: f64,
    pub zeta: u32,
    pub moment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub lambda: f64,
    pub eta_max: f64,
    pub worst_ratio: f64,
    pub witness: Option<DensityWitness>,
    pub passed: bool,
}

/// Basis vector of a single occupation configuration.
pub fn product_fock_state(basis: &Arc<FockBasis>, occ: &[Occupation]) -> Result<QuantumState> {
    let idx = match basis.rank(occ) {
        Ok(i) => i,
        Err(e) => return invalid(format!("occupation {occ:?} not in sector: {e}")),
    };
    let mut psi = DVector::zeros(basis.dim());
    psi[idx] = C64::new(1.0, 0.0);
    QuantumState::pure(Arc::clone(basis), psi)
}

/// All `N` bosons in the single-particle orbital `φ_x ∝ sqrt(p_x)`, projected
/// onto the capped sector and renormalized. With `mixed = true` the result is
/// the dephased mixture with the same populations.
///
/// Without a binding cap, `<n_x> = N p_x / Σ p`.
pub fn spread_state(basis: &Arc<FockBasis>, profile: &[f64], mixed: bool) -> Result<QuantumState> {
    if profile.len() != basis.sites() {
        return invalid(format!(
            "profile has {} weights, lattice has {} sites",
            profile.len(),
            basis.sites()
        ));
    }
    if profile.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return invalid("profile weights must be finite and nonnegative");
    }
    let total: f64 = profile.iter().sum();
    if total <= 0.0 {
        return invalid("profile weights are all zero");
    }
    let ln_phi: Vec<f64> = profile.iter().map(|&p| 0.5 * (p / total).ln()).collect();
    let ln_fact = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let ln_n_fact = ln_fact(basis.n_tot());

    // amplitude = sqrt(N! / Π n_x!) Π φ_x^{n_x}
    let amps: Vec<f64> = basis
        .states()
        .map(|occ| {
            let mut ln = 0.5 * ln_n_fact;
            for (x, &n) in occ.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                if profile[x] == 0.0 {
                    return 0.0;
                }
                ln += n as f64 * ln_phi[x] - 0.5 * ln_fact(n as usize);
            }
            ln.exp()
        })
        .collect();
    let norm2: f64 = amps.iter().map(|a| a * a).sum();
    if norm2 <= 0.0 {
        return invalid("profile cannot be realized within the occupation cap");
    }
    let scale = norm2.sqrt();
    if mixed {
        let pops: Vec<f64> = amps.iter().map(|a| a * a / norm2).collect();
        let rho = crate::linalg::real_diag(&pops);
        QuantumState::mixed(Arc::clone(basis), rho)
    } else {
        let psi = DVector::from_iterator(basis.dim(), amps.iter().map(|a| C64::new(a / scale, 0.0)));
        QuantumState::pure(Arc::clone(basis), psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::operators::site_number;

    fn basis(l: i64, n: usize, cap: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::enumerate(Arc::new(Lattice::chain(l).unwrap()), n, cap).unwrap())
    }

    #[test]
    fn product_state_examples() {
        let vac = basis(3, 0, 2);
        let s = product_fock_state(&vac, &[0, 0, 0]).unwrap();
        assert_eq!(s.vector().unwrap()[0], C64::new(1.0, 0.0));

        let b = basis(3, 2, 2);
        let s = product_fock_state(&b, &[2, 0, 0]).unwrap();
        let idx = b.rank(&[2, 0, 0]).unwrap();
        assert_eq!(s.populations()[idx], 1.0);
        assert!(product_fock_state(&b, &[1, 1, 1]).is_err());
    }

    #[test]
    fn spread_state_examples() {
        let b = basis(4, 2, 2);
        let single = spread_state(&b, &[0.0, 3.0, 0.0, 0.0], false).unwrap();
        let fock = product_fock_state(&b, &[0, 2, 0, 0]).unwrap();
        assert!((single.vector().unwrap() - fock.vector().unwrap()).norm() < 1e-14);

        let one = basis(5, 1, 1);
        let u = spread_state(&one, &[1.0; 5], false).unwrap();
        for x in 0..5 {
            let n = u.expectation_diag(&site_number(&one, x)).unwrap();
            assert!((n - 0.2).abs() < 1e-14);
        }

        let four = basis(4, 1, 1);
        let two = spread_state(&four, &[0.0, 1.0, 1.0, 0.0], false).unwrap();
        let occ: Vec<f64> = (0..4)
            .map(|x| two.expectation_diag(&site_number(&four, x)).unwrap())
            .collect();
        // direct: amplitude 1/sqrt2 on (0,1,0,0) and (0,0,1,0)
        assert!((occ[1] - 0.5).abs() < 1e-14 && (occ[2] - 0.5).abs() < 1e-14);
        assert_eq!(occ[0], 0.0);

        assert!(spread_state(&b, &[0.0; 4], false).is_err());
        assert!(spread_state(&b, &[1.0, -1.0, 0.0, 0.0], false).is_err());

        let mixed = spread_state(&b, &[1.0, 2.0, 1.0, 0.5], true).unwrap();
        assert!(!mixed.is_pure());
        assert!((mixed.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncapped_spread_matches_profile() {
        let b = basis(4, 3, 3);
        let p = [1.0, 2.0, 0.5, 0.5];
        let s = spread_state(&b, &p, false).unwrap();
        for x in 0..4 {
            let n = s.expectation_diag(&site_number(&b, x)).unwrap();
            assert!((n - 3.0 * p[x] / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_examples() {
        let vac = basis(3, 0, 1);
        let s = product_fock_state(&vac, &[0, 0, 0]).unwrap();
        let all = SiteSet::all(vac.lattice().clone());
        assert_eq!(s.moment(&all, 2.5).unwrap(), 0.0);

        let b = basis(3, 3, 3);
        let lat = b.lattice().clone();
        let s = spread_state(&b, &[1.0, 0.3, 2.0], false).unwrap();
        let all = SiteSet::all(lat.clone());
        assert!((s.moment(&all, 1.7).unwrap() - 3f64.powf(1.7)).abs() < 1e-12);

        let f = product_fock_state(&b, &[2, 1, 0]).unwrap();
        let x = SiteSet::new(lat, [0, 1]).unwrap();
        assert_eq!(f.moment(&x, 2.0).unwrap(), 9.0);
        assert!(f.moment(&x, 0.0).is_err());
    }

    #[test]
    fn controlled_density_examples() {
        let vac = basis(5, 0, 1);
        let s = product_fock_state(&vac, &[0; 5]).unwrap();
        assert!(s.check_controlled_density(0.01, 3.0).unwrap().passed);

        let one = basis(5, 1, 1);
        let s = product_fock_state(&one, &[0, 0, 1, 0, 0]).unwrap();
        assert!(s.check_controlled_density(1.0, 2.0).unwrap().passed);

        let four = basis(5, 4, 4);
        let s = product_fock_state(&four, &[0, 0, 4, 0, 0]).unwrap();
        let rep = s.check_controlled_density(1.0, 2.0).unwrap();
        assert!(!rep.passed);
        // r = 1, ζ = 2 gives 16 / 1; larger r only shrinks the ratio
        assert_eq!(rep.worst_ratio, 16.0);
        let w = rep.witness.unwrap();
        assert_eq!((w.radius, w.zeta), (1.0, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn first_moment_is_additive(p in proptest::collection::vec(0.1f64..2.0, 5), split in 1usize..4) {
                let b = basis(5, 3, 2);
                let lat = b.lattice().clone();
                let s = spread_state(&b, &p, false).unwrap();
                let left = SiteSet::new(lat.clone(), 0..split).unwrap();
                let right = SiteSet::new(lat.clone(), split..5).unwrap();
                let whole = SiteSet::all(lat);
                let sum = s.moment(&left, 1.0).unwrap() + s.moment(&right, 1.0).unwrap();
                prop_assert!((sum - s.moment(&whole, 1.0).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn density_check_monotone_in_lambda(p in proptest::collection::vec(0.0f64..2.0, 5), lam in 0.2f64..3.0, extra in 0.0f64..2.0) {
                prop_assume!(p.iter().sum::<f64>() > 0.1);
                let b = basis(5, 2, 2);
                let s = spread_state(&b, &p, false).unwrap();
                let lo = s.check_controlled_density(lam, 2.0).unwrap();
                let hi = s.check_controlled_density(lam + extra, 2.0).unwrap();
                prop_assert!(!lo.passed || hi.passed);
                prop_assert!(hi.worst_ratio <= lo.worst_ratio + 1e-12);
            }
        }
    }
}
