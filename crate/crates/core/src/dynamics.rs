//! Time evolution on a fixed-`N` sector.
//!
//! Small generators (dimension up to [`DENSE_STATE_THRESHOLD`]) are
//! propagated through a full eigendecomposition; larger ones through a
//! Lanczos-Krylov exponential with adaptive substeps. Heisenberg-picture
//! operators are always dense and limited by [`DEFAULT_DENSE_THRESHOLD`].

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::lattice::SiteSet;
use crate::linalg::{check_dense, operator_norm, SpectralPropagator};
pub use crate::linalg::DEFAULT_DENSE_THRESHOLD;
use crate::operators::{
    build_hamiltonian, build_hopping, build_potential, check_same_basis, DenseMatrix,
    DiagonalOperator, HamiltonianParams, SparseOperator, C64,
};
use crate::states::{QuantumState, StateData};

pub const DENSE_STATE_THRESHOLD: usize = 512;
pub const DEFAULT_KRYLOV_DIM: usize = 30;
pub const DEFAULT_KRYLOV_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SUBSTEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum Method {
    /// Dense below the state threshold, Krylov above.
    Auto,
    Dense,
    Krylov { dim: usize, tol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Auto
    }
}

/// Applies `e^{-itH}` to states.
#[derive(Debug)]
pub struct Propagator {
    generator: SparseOperator,
    method: Method,
    max_substeps: usize,
    spectral: OnceLock<SpectralPropagator>,
}

impl Propagator {
    pub fn new(generator: SparseOperator, method: Method) -> Self {
        Propagator {
            generator,
            method,
            max_substeps: DEFAULT_MAX_SUBSTEPS,
            spectral: OnceLock::new(),
        }
    }

    pub fn with_max_substeps(mut self, n: usize) -> Self {
        self.max_substeps = n;
        self
    }

    pub fn generator(&self) -> &SparseOperator {
        &self.generator
    }

    fn resolved(&self) -> Method {
        match self.method {
            Method::Auto if self.generator.dim() <= DENSE_STATE_THRESHOLD => Method::Dense,
            Method::Auto => Method::Krylov {
                dim: DEFAULT_KRYLOV_DIM,
                tol: DEFAULT_KRYLOV_TOL,
            },
            m => m,
        }
    }

    pub fn spectral(&self) -> &SpectralPropagator {
        self.spectral
            .get_or_init(|| SpectralPropagator::new(self.generator.to_dense()))
    }

    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        check_same_basis(state.basis(), self.generator.basis())?;
        let basis = Arc::clone(state.basis());
        if t == 0.0 {
            return Ok(state.clone());
        }
        let data = match state.data() {
            StateData::Pure(psi) => StateData::Pure(self.evolve_vector(psi, t)?),
            StateData::Mixed(rho) => {
                check_dense(rho.nrows(), DEFAULT_DENSE_THRESHOLD)?;
                StateData::Mixed(self.spectral().evolve_density(rho, t))
            }
        };
        Ok(QuantumState::from_parts_unchecked(basis, data))
    }

    pub fn evolve_vector(&self, psi: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        match self.resolved() {
            Method::Dense | Method::Auto => Ok(self.spectral().apply(psi, t)),
            Method::Krylov { dim, tol } => {
                let out = krylov_expm(&self.generator, psi.as_slice(), t, dim, tol, self.max_substeps)?;
                Ok(DVector::from_vec(out.vector))
            }
        }
    }
}

/// `e^{-itH} ψ`, choosing dense or Krylov by dimension.
pub fn evolve_state(h: &SparseOperator, state: &QuantumState, t: f64) -> Result<QuantumState> {
    Propagator::new(h.clone(), Method::Auto).evolve(state, t)
}

#[derive(Debug, Clone)]
pub struct KrylovOutput {
    pub vector: Vec<C64>,
    pub substeps: usize,
    pub max_error_estimate: f64,
}

/// `e^{-itH} v` by Lanczos with full reorthogonalization.
///
/// Each substep builds an `m`-dimensional Krylov space from the current
/// vector and takes the largest step `τ` whose a-posteriori error estimate
/// `β_m |e_m^T e^{-iτT_m} e_1| ‖v‖` stays below `tol ‖v‖`. Lucky breakdown
/// makes the step exact.
pub fn krylov_expm(
    h: &SparseOperator,
    v: &[C64],
    t: f64,
    m: usize,
    tol: f64,
    max_substeps: usize,
) -> Result<KrylovOutput> {
    if m < 2 {
        return invalid("Krylov dimension must be at least 2");
    }
    let n = v.len();
    let mut cur = v.to_vec();
    let mut done = 0.0f64;
    let mut substeps = 0usize;
    let mut max_err = 0.0f64;
    let total = t.abs();
    let sign = t.signum();
    let mut tau = total;

    while done < total {
        if substeps >= max_substeps {
            return Err(Error::NumericalFailure {
                message: "Krylov propagation exceeded the substep budget".into(),
                time: sign * done,
                substeps,
                error_estimate: max_err,
            });
        }
        let beta0 = crate::linalg::vec_norm(&cur);
        if beta0 == 0.0 {
            break;
        }
        let space = lanczos(h, &cur, beta0, m.min(n));
        let k = space.alphas.len();
        tau = tau.min(total - done);

        let tri = tridiagonal(&space.alphas, &space.betas[..k - 1]);
        let (eigenvalues, eigenvectors) = crate::linalg::symmetric_eigen(&tri);
        let step_coeffs = |tau: f64| -> DVector<C64> {
            // e^{-i τ T} e_1 = Q e^{-iτΛ} Q^T e_1
            let mut c = DVector::<C64>::zeros(k);
            for j in 0..k {
                let q1 = eigenvectors[(0, j)];
                let ph = C64::from_polar(q1, -sign * tau * eigenvalues[j]);
                for i in 0..k {
                    c[i] += eigenvectors[(i, j)] * ph;
                }
            }
            c
        };

        let (coeffs, err) = if space.breakdown {
            (step_coeffs(tau), 0.0)
        } else {
            let beta_m = space.betas[k - 1];
            let mut attempts = 0;
            loop {
                let c = step_coeffs(tau);
                let err = beta_m * c[k - 1].norm();
                if err <= tol || attempts > 60 {
                    if err > tol {
                        return Err(Error::NumericalFailure {
                            message: "Krylov step could not reach tolerance".into(),
                            time: sign * done,
                            substeps,
                            error_estimate: err * beta0,
                        });
                    }
                    break (c, err);
                }
                // standard step-size update, at least halving
                tau *= (0.9 * (tol / err).powf(1.0 / k as f64)).min(0.5);
                attempts += 1;
            }
        };
        max_err = max_err.max(err * beta0);

        let mut next = vec![C64::new(0.0, 0.0); n];
        for (j, q) in space.vectors.iter().enumerate() {
            let c = coeffs[j] * beta0;
            for (x, &qv) in next.iter_mut().zip(q) {
                *x += c * qv;
            }
        }
        cur = next;
        done += tau;
        substeps += 1;
        // let the next step try a little further
        tau *= 1.5;
    }
    Ok(KrylovOutput {
        vector: cur,
        substeps,
        max_error_estimate: max_err,
    })
}

struct KrylovSpace {
    vectors: Vec<Vec<C64>>,
    alphas: Vec<f64>,
    // betas[j] couples vectors j and j+1; the last one is β_m.
    betas: Vec<f64>,
    breakdown: bool,
}

fn lanczos(h: &SparseOperator, v: &[C64], beta0: f64, m: usize) -> KrylovSpace {
    let n = v.len();
    let mut vectors: Vec<Vec<C64>> = vec![v.iter().map(|z| z / beta0).collect()];
    let mut alphas = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let scale = h.max_abs().max(1.0);
    for j in 0..m {
        h.matvec_into(&vectors[j], &mut w);
        let alpha: f64 = vectors[j]
            .iter()
            .zip(&w)
            .map(|(q, x)| (q.conj() * x).re)
            .sum();
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &vectors {
                let proj: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, &qv) in w.iter_mut().zip(q) {
                    *x -= proj * qv;
                }
            }
        }
        let beta = crate::linalg::vec_norm(&w);
        betas.push(beta);
        if beta <= 1e-12 * scale {
            return KrylovSpace {
                vectors,
                alphas,
                betas,
                breakdown: true,
            };
        }
        if j + 1 < m {
            vectors.push(w.iter().map(|z| z / beta).collect());
        }
    }
    KrylovSpace {
        vectors,
        alphas,
        betas,
        breakdown: false,
    }
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

/// `e^{itH} A e^{-itH}`.
pub fn heisenberg(h: &SparseOperator, a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    check_dense(h.dim(), DEFAULT_DENSE_THRESHOLD)?;
    if a.nrows() != h.dim() || a.ncols() != h.dim() {
        return invalid("observable shape does not match the generator");
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    Ok(SpectralPropagator::new(h.to_dense()).heisenberg(a, t))
}

/// `Π_{Y,ν}`: 1 on states with at most `ν` bosons on every site of `Y`.
pub fn projector(basis: &Arc<FockBasis>, region: &SiteSet, nu: usize) -> Result<DiagonalOperator> {
    if nu > basis.n_max() {
        return invalid(format!(
            "truncation level {nu} exceeds the occupation cap {}; the projector would be the identity",
            basis.n_max()
        ));
    }
    let values = basis
        .states()
        .map(|occ| {
            if region.members().iter().all(|&x| occ[x] as usize <= nu) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(DiagonalOperator::new(Arc::clone(basis), values))
}

/// `1 - Π`.
pub fn complement(p: &DiagonalOperator) -> DiagonalOperator {
    p.map(|v| 1.0 - v)
}

/// Operators that can be sandwiched by a diagonal projector, `Ā = Π A Π`.
pub trait Truncate: Sized {
    fn truncate(&self, projector: &DiagonalOperator) -> Result<Self>;
}

impl Truncate for SparseOperator {
    fn truncate(&self, projector: &DiagonalOperator) -> Result<Self> {
        self.sandwich(projector)
    }
}

impl Truncate for DiagonalOperator {
    fn truncate(&self, projector: &DiagonalOperator) -> Result<Self> {
        self.sandwich(projector)
    }
}

impl Truncate for DenseMatrix {
    fn truncate(&self, projector: &DiagonalOperator) -> Result<Self> {
        let p = projector.values();
        if self.nrows() != p.len() || self.ncols() != p.len() {
            return invalid("projector dimension does not match operator");
        }
        Ok(DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| {
            self[(i, j)] * (p[i] * p[j])
        }))
    }
}

pub fn truncate<O: Truncate>(a: &O, projector: &DiagonalOperator) -> Result<O> {
    a.truncate(projector)
}

/// `H̄ = Π H Π` with `Π = Π_{Y,ν}`.
pub fn truncated_hamiltonian(
    basis: &Arc<FockBasis>,
    region: &SiteSet,
    y: &SiteSet,
    nu: usize,
    params: &HamiltonianParams,
) -> Result<SparseOperator> {
    let p = projector(basis, y, nu)?;
    build_hamiltonian(basis, region, params)?.truncate(&p)
}

/// `τ̄_t(A) = e^{itH̄} A e^{-itH̄}` with `H̄ = Π_{Y,ν} H Π_{Y,ν}`.
pub fn truncated_dynamics(
    basis: &Arc<FockBasis>,
    y: &SiteSet,
    nu: usize,
    params: &HamiltonianParams,
    a: &DenseMatrix,
    t: f64,
) -> Result<DenseMatrix> {
    let all = SiteSet::all(Arc::clone(basis.lattice()));
    let hbar = truncated_hamiltonian(basis, &all, y, nu, params)?;
    heisenberg(&hbar, a, t)
}

/// `τ^R_t(A)`: evolution generated by `H_{X[R]}`.
pub fn restricted_dynamics(
    basis: &Arc<FockBasis>,
    support: &SiteSet,
    radius: f64,
    params: &HamiltonianParams,
    a: &DenseMatrix,
    t: f64,
) -> Result<DenseMatrix> {
    let region = support.enlarge(radius)?;
    let h = build_hamiltonian(basis, &region, params)?;
    heisenberg(&h, a, t)
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionPictureReport {
    pub t: f64,
    pub steps: usize,
    /// `‖U_{0,t} - U_ode(t)‖` in operator norm.
    pub residual: f64,
    /// `‖Π^⊥ e^{itH̄} - Π^⊥‖`, zero in exact arithmetic.
    pub perp_invariance: f64,
}

/// Compares `U_{0,t} = e^{itH̄} e^{-itV̄}` with an RK4 solution of
/// `dU/dt = i U T̄_int(t)`, `T̄_int(t) = e^{itV̄} T̄ e^{-itV̄}`, `U(0) = 1`, on
/// the full lattice with `Π = Π_{Y,ν}`.
pub fn interaction_picture_check(
    basis: &Arc<FockBasis>,
    y: &SiteSet,
    nu: usize,
    params: &HamiltonianParams,
    t: f64,
) -> Result<InteractionPictureReport> {
    check_dense(basis.dim(), DEFAULT_DENSE_THRESHOLD)?;
    let all = SiteSet::all(Arc::clone(basis.lattice()));
    let p = projector(basis, y, nu)?;
    let tbar = build_hopping(basis, &all, params.j).truncate(&p)?.to_dense();
    let vbar = build_potential(basis, &all, params)?.truncate(&p)?;
    let hbar = truncated_hamiltonian(basis, &all, y, nu, params)?;

    let dim = basis.dim();
    let vdiag = vbar.values();
    let phase = |s: f64| DVector::from_iterator(dim, vdiag.iter().map(|&v| C64::from_polar(1.0, s * v)));

    let spectral = SpectralPropagator::new(hbar.to_dense());
    // e^{itH̄} = unitary(-t)
    let mut exact = spectral.unitary(-t);
    let back = phase(-t);
    for (j, mut col) in exact.column_iter_mut().enumerate() {
        col *= back[j];
    }

    let tnorm = operator_norm(&tbar).max(1e-300);
    let steps = ((t.abs() * tnorm * 400.0).ceil() as usize).max(64);
    let h = t / steps as f64;
    let generator = |s: f64| -> DenseMatrix {
        let (l, r) = (phase(s), phase(-s));
        DMatrix::from_fn(dim, dim, |i, j| tbar[(i, j)] * l[i] * r[j] * C64::new(0.0, 1.0))
    };
    let mut u = DenseMatrix::identity(dim, dim);
    for k in 0..steps {
        let s = k as f64 * h;
        let g0 = generator(s);
        let gm = generator(s + 0.5 * h);
        let g1 = generator(s + h);
        let k1 = &u * &g0;
        let k2 = (&u + &k1 * C64::new(0.5 * h, 0.0)) * &gm;
        let k3 = (&u + &k2 * C64::new(0.5 * h, 0.0)) * &gm;
        let k4 = (&u + &k3 * C64::new(h, 0.0)) * &g1;
        u += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    let residual = operator_norm(&(&exact - &u));

    let perp = crate::dynamics::complement(&p).to_dense();
    let perp_invariance = crate::linalg::max_abs(&(&perp * spectral.unitary(-t) - &perp));
    Ok(InteractionPictureReport {
        t,
        steps,
        residual,
        perp_invariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg::max_abs;
    use crate::operators::{number_operator, site_number};
    use crate::states::{product_fock_state, spread_state};

    fn setup(l: i64, n: usize, cap: usize) -> (Arc<FockBasis>, SiteSet) {
        let lat = Arc::new(Lattice::chain(l).unwrap());
        let b = Arc::new(FockBasis::enumerate(lat.clone(), n, cap).unwrap());
        (b, SiteSet::all(lat))
    }

    fn dist(a: &QuantumState, b: &QuantumState) -> f64 {
        (a.vector().unwrap() - b.vector().unwrap()).norm()
    }

    #[test]
    fn zero_time_is_identity() {
        let (b, all) = setup(5, 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 0.5, 0.0)).unwrap();
        let psi = spread_state(&b, &[1.0, 0.5, 0.0, 2.0, 1.0], false).unwrap();
        let out = evolve_state(&h, &psi, 0.0).unwrap();
        assert_eq!(dist(&out, &psi), 0.0);
        let a = site_number(&b, 2).to_dense();
        assert_eq!(heisenberg(&h, &a, 0.0).unwrap(), a);
    }

    #[test]
    fn diagonal_generator_only_adds_phase() {
        let (b, all) = setup(4, 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(0.0, 1.3, 0.2)).unwrap();
        let psi = product_fock_state(&b, &[0, 2, 0, 0]).unwrap();
        let out = evolve_state(&h, &psi, 1.7).unwrap();
        for (p, q) in out.populations().iter().zip(psi.populations()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn krylov_matches_dense() {
        let (b, all) = setup(6, 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 0.7, 0.1)).unwrap();
        let psi = spread_state(&b, &[1.0, 0.2, 0.0, 0.3, 1.0, 0.5], false).unwrap();
        let dense = Propagator::new(h.clone(), Method::Dense);
        let kry = Propagator::new(h, Method::Krylov { dim: 30, tol: 1e-10 });
        for t in [0.5, 1.0, 2.0] {
            let a = dense.evolve(&psi, t).unwrap();
            let k = kry.evolve(&psi, t).unwrap();
            assert!(dist(&a, &k) <= 1e-8);
        }
    }

    #[test]
    fn krylov_substeps_on_larger_space() {
        let (b, all) = setup(9, 3, 3);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 0.5, 0.0)).unwrap();
        let psi = spread_state(&b, &[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0], false).unwrap();
        let dense = Propagator::new(h.clone(), Method::Dense).evolve(&psi, 3.0).unwrap();
        let out = krylov_expm(&h, psi.vector().unwrap().as_slice(), 3.0, 12, 1e-10, 10_000).unwrap();
        assert!(out.substeps > 1);
        let diff: f64 = out
            .vector
            .iter()
            .zip(dense.vector().unwrap().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-8, "{diff}");
        let err = krylov_expm(&h, psi.vector().unwrap().as_slice(), 3.0, 4, 1e-10, 2);
        assert!(matches!(err, Err(Error::NumericalFailure { .. })));
    }

    #[test]
    fn heisenberg_invariants() {
        let (b, all) = setup(5, 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 0.8, 0.0)).unwrap();
        let n = number_operator(&b, &all).to_dense();
        assert!(max_abs(&(heisenberg(&h, &n, 1.3).unwrap() - &n)) < 1e-12);
        let a = site_number(&b, 1).to_dense();
        let at = heisenberg(&h, &a, 0.9).unwrap();
        assert!((operator_norm(&at) - operator_norm(&a)).abs() < 1e-9);
    }

    #[test]
    fn projector_examples() {
        let (b, all) = setup(2, 3, 3);
        let id = projector(&b, &all, 3).unwrap();
        assert!(id.values().iter().all(|&v| v == 1.0));
        let lat = all.lattice().clone();
        let p = projector(&b, &SiteSet::singleton(lat, 0).unwrap(), 2).unwrap();
        assert_eq!(p.values()[b.rank(&[3, 0]).unwrap()], 0.0);
        let perp = complement(&p);
        for (a, c) in p.values().iter().zip(perp.values()) {
            assert_eq!(a + c, 1.0);
        }
        assert!(projector(&b, &all, 4).is_err());
    }

    #[test]
    fn truncate_examples() {
        let (b, all) = setup(3, 3, 3);
        let p = projector(&b, &all, 1).unwrap();
        let n0 = site_number(&b, 0);
        let bar = n0.truncate(&p).unwrap();
        for (i, occ) in b.states().enumerate() {
            let want = if occ.iter().all(|&v| v <= 1) { occ[0] as f64 } else { 0.0 };
            assert_eq!(bar.values()[i], want);
        }
        let full = projector(&b, &all, 3).unwrap();
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(h.truncate(&full).unwrap().sub(&h).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn disjoint_truncated_operators_commute() {
        let (b, all) = setup(5, 3, 3);
        let lat = all.lattice().clone();
        let p = projector(&b, &all, 1).unwrap();
        // A = hop on {0,1}, B = hop on {3,4}
        let x = SiteSet::new(lat.clone(), [0, 1]).unwrap();
        let z = SiteSet::new(lat, [3, 4]).unwrap();
        let a = build_hopping(&b, &x, 1.0).truncate(&p).unwrap().to_dense();
        let bb = build_hopping(&b, &z, 0.4).truncate(&p).unwrap().to_dense();
        assert!(max_abs(&crate::linalg::commutator(&a, &bb)) <= 1e-12);
    }

    #[test]
    fn truncated_dynamics_examples() {
        let (b, all) = setup(4, 2, 2);
        let params = HamiltonianParams::onsite(1.0, 0.6, 0.0);
        let a = site_number(&b, 1).to_dense();
        let h = build_hamiltonian(&b, &all, &params).unwrap();
        let trunc = truncated_dynamics(&b, &all, 2, &params, &a, 0.8).unwrap();
        let full = heisenberg(&h, &a, 0.8).unwrap();
        assert!(max_abs(&(trunc - full)) < 1e-12);
        assert_eq!(truncated_dynamics(&b, &all, 1, &params, &a, 0.0).unwrap(), a);

        let hbar = truncated_hamiltonian(&b, &all, &all, 1, &params).unwrap();
        let perp = complement(&projector(&b, &all, 1).unwrap()).to_dense();
        let u = SpectralPropagator::new(hbar.to_dense()).unitary(-0.7);
        assert!(max_abs(&(&perp * u - &perp)) <= 1e-10);
    }

    #[test]
    fn restricted_dynamics_examples() {
        let (b, all) = setup(5, 2, 2);
        let lat = all.lattice().clone();
        let params = HamiltonianParams::onsite(1.0, 0.6, 0.2);
        let x = SiteSet::singleton(lat.clone(), 2).unwrap();
        let a = site_number(&b, 2).to_dense();
        let h = build_hamiltonian(&b, &all, &params).unwrap();
        let wide = restricted_dynamics(&b, &x, 10.0, &params, &a, 0.9).unwrap();
        assert!(max_abs(&(wide - heisenberg(&h, &a, 0.9).unwrap())) < 1e-12);
        let frozen = restricted_dynamics(&b, &x, 0.0, &params, &a, 0.9).unwrap();
        assert!(max_abs(&(&frozen - &a)) < 1e-12);
        let mid = restricted_dynamics(&b, &x, 1.0, &params, &a, 0.9).unwrap();
        assert!((operator_norm(&mid) - operator_norm(&a)).abs() < 1e-9);
    }

    #[test]
    fn interaction_picture_examples() {
        let (b, all) = setup(4, 2, 2);
        let params = HamiltonianParams::onsite(1.0, 0.9, 0.3);
        let r0 = interaction_picture_check(&b, &all, 1, &params, 0.0).unwrap();
        assert!(r0.residual < 1e-14);
        let r = interaction_picture_check(&b, &all, 1, &params, 1.0).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        assert!(r.perp_invariance <= 1e-10);
        let frozen = interaction_picture_check(&b, &all, 1, &params.with_j(0.0), 2.0).unwrap();
        assert!(frozen.residual < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn group_law_and_unitarity(t1 in -1.5f64..1.5, t2 in -1.5f64..1.5, u in 0.0f64..2.0, krylov in any::<bool>()) {
                let (b, all) = setup(5, 2, 2);
                let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, u, 0.0)).unwrap();
                let method = if krylov { Method::Krylov { dim: 8, tol: 1e-12 } } else { Method::Dense };
                let prop = Propagator::new(h, method);
                let psi = spread_state(&b, &[1.0, 0.0, 2.0, 0.5, 0.0], false).unwrap();
                let a = prop.evolve(&prop.evolve(&psi, t1).unwrap(), t2).unwrap();
                let c = prop.evolve(&psi, t1 + t2).unwrap();
                prop_assert!(dist(&a, &c) <= 1e-8);
                prop_assert!((a.norm() - 1.0).abs() <= 1e-10);
            }
        }
    }
}
