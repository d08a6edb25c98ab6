//! Sparse and diagonal operators over a [`FockBasis`].
//!
//! Bond sums run over ordered nearest-neighbour pairs, so `T_X` is Hermitian
//! without an explicit conjugate term and `V_X` counts each bond twice.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::{hop_in_place, FockBasis};
use crate::lattice::SiteSet;

pub type C64 = Complex64;
pub type DenseMatrix = DMatrix<C64>;

pub(crate) fn same_basis(a: &FockBasis, b: &FockBasis) -> bool {
    std::ptr::eq(a, b)
        || (a.dim() == b.dim()
            && a.n_tot() == b.n_tot()
            && a.n_max() == b.n_max()
            && **a.lattice() == **b.lattice())
}

pub(crate) fn check_same_basis(a: &FockBasis, b: &FockBasis) -> Result<()> {
    if same_basis(a, b) {
        Ok(())
    } else {
        invalid("operators act on different bases")
    }
}

/// Row-compressed complex matrix; columns within a row are strictly increasing.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<FockBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zero(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        SparseOperator {
            basis,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        DiagonalOperator::new(basis, vec![1.0; dim]).to_sparse()
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        basis: Arc<FockBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let dim = basis.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            *rows[i].entry(j).or_insert(C64::new(0.0, 0.0)) += v;
        }
        Self::from_rows(basis, rows)
    }

    fn from_rows(basis: Arc<FockBasis>, rows: Vec<BTreeMap<usize, C64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            basis,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            Arc::clone(&self.basis),
            self.entries().map(|(i, j, v)| (j, i, v.conj())),
        )
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &SparseOperator) -> Result<Self> {
        check_same_basis(&self.basis, &other.basis)?;
        Ok(Self::from_triplets(
            Arc::clone(&self.basis),
            self.entries().chain(other.entries()),
        ))
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &SparseOperator) -> Result<Self> {
        check_same_basis(&self.basis, &other.basis)?;
        let rows = (0..self.dim())
            .map(|i| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for (k, a) in self.row(i) {
                    for (j, b) in other.row(k) {
                        *acc.entry(j).or_insert(C64::new(0.0, 0.0)) += a * b;
                    }
                }
                acc
            })
            .collect();
        Ok(Self::from_rows(Arc::clone(&self.basis), rows))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    /// `P A P` for a diagonal 0/1 mask.
    pub fn sandwich(&self, mask: &DiagonalOperator) -> Result<Self> {
        check_same_basis(&self.basis, &mask.basis)?;
        Ok(Self::from_triplets(
            Arc::clone(&self.basis),
            self.entries()
                .map(|(i, j, v)| (i, j, v * mask.values[i] * mask.values[j])),
        ))
    }

    /// Diagonal part of the operator.
    pub fn diagonal(&self) -> DiagonalOperator {
        let values = (0..self.dim()).map(|i| self.get(i, i).re).collect();
        DiagonalOperator::new(Arc::clone(&self.basis), values)
    }

    /// Off-diagonal part.
    pub fn off_diagonal(&self) -> Self {
        Self::from_triplets(
            Arc::clone(&self.basis),
            self.entries().filter(|&(i, j, _)| i != j),
        )
    }
}

/// Real diagonal operator, e.g. `n_x`, `N_X`, `dΓ(f)`, `V_X`, or a projector.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    basis: Arc<FockBasis>,
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(basis: Arc<FockBasis>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), basis.dim());
        DiagonalOperator { basis, values }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_triplets(
            Arc::clone(&self.basis),
            self.values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, i, C64::new(v, 0.0))),
        )
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &v) in self.values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DiagonalOperator::new(
            Arc::clone(&self.basis),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(&self, other: &DiagonalOperator, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same_basis(&self.basis, &other.basis)?;
        Ok(DiagonalOperator::new(
            Arc::clone(&self.basis),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `P A P` for a diagonal 0/1 mask.
    pub fn sandwich(&self, mask: &DiagonalOperator) -> Result<Self> {
        self.zip_with(mask, |a, p| a * p * p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    /// `U n_x (n_x - 1) - mu n_x` per site.
    #[default]
    Onsite,
    /// `U n_x^{p/2} n_y^{p/2} - mu (n_x + n_y)` per ordered bond.
    Pairwise,
}

impl PotentialKind {
    pub fn label(self) -> &'static str {
        match self {
            PotentialKind::Onsite => "onsite",
            PotentialKind::Pairwise => "pairwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub j: f64,
    pub u: f64,
    pub mu: f64,
    #[serde(default)]
    pub form: PotentialKind,
    /// Exponent for the pairwise form; ignored for onsite.
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    2.0
}

impl HamiltonianParams {
    pub fn hopping_only(j: f64) -> Self {
        HamiltonianParams {
            j,
            u: 0.0,
            mu: 0.0,
            form: PotentialKind::Onsite,
            p: 2.0,
        }
    }

    pub fn onsite(j: f64, u: f64, mu: f64) -> Self {
        HamiltonianParams {
            j,
            u,
            mu,
            form: PotentialKind::Onsite,
            p: 2.0,
        }
    }

    pub fn pairwise(j: f64, u: f64, mu: f64, p: f64) -> Self {
        HamiltonianParams {
            j,
            u,
            mu,
            form: PotentialKind::Pairwise,
            p,
        }
    }

    pub fn with_j(self, j: f64) -> Self {
        HamiltonianParams { j, ..self }
    }
}

/// `T_X = J Σ_{x~y in X} b_x^† b_y`.
pub fn build_hopping(basis: &Arc<FockBasis>, region: &SiteSet, j: f64) -> SparseOperator {
    weighted_hops(basis, region, |_, _| j)
}

// Σ_{ordered x~y in X} w(x, y) b_x^† b_y
fn weighted_hops(
    basis: &Arc<FockBasis>,
    region: &SiteSet,
    weight: impl Fn(usize, usize) -> f64,
) -> SparseOperator {
    let edges = region.edges();
    let n_max = basis.n_max();
    let mut triplets = Vec::new();
    let mut scratch = vec![0; basis.sites()];
    for (col, occ) in basis.states().enumerate() {
        for &(x, y) in &edges {
            let w = weight(x, y);
            if w == 0.0 {
                continue;
            }
            scratch.copy_from_slice(occ);
            if let Some(amp) = hop_in_place(&mut scratch, x, y, n_max) {
                let row = basis.rank_unchecked(&scratch);
                triplets.push((row, col, C64::new(w * amp, 0.0)));
            }
        }
    }
    SparseOperator::from_triplets(Arc::clone(basis), triplets)
}

/// `V_X` in either potential form.
pub fn build_potential(
    basis: &Arc<FockBasis>,
    region: &SiteSet,
    params: &HamiltonianParams,
) -> Result<DiagonalOperator> {
    let (u, mu) = (params.u, params.mu);
    let values = match params.form {
        PotentialKind::Onsite => basis
            .states()
            .map(|occ| {
                region
                    .members()
                    .iter()
                    .map(|&x| {
                        let n = occ[x] as f64;
                        u * n * (n - 1.0) - mu * n
                    })
                    .sum()
            })
            .collect(),
        PotentialKind::Pairwise => {
            if !(params.p >= 1.0) {
                return invalid(format!("pairwise exponent p must be >= 1, got {}", params.p));
            }
            let half = params.p / 2.0;
            let edges = region.edges();
            basis
                .states()
                .map(|occ| {
                    edges
                        .iter()
                        .map(|&(x, y)| {
                            let (nx, ny) = (occ[x] as f64, occ[y] as f64);
                            u * nx.powf(half) * ny.powf(half) - mu * (nx + ny)
                        })
                        .sum()
                })
                .collect()
        }
    };
    Ok(DiagonalOperator::new(Arc::clone(basis), values))
}

/// `H_X = T_X + V_X`.
pub fn build_hamiltonian(
    basis: &Arc<FockBasis>,
    region: &SiteSet,
    params: &HamiltonianParams,
) -> Result<SparseOperator> {
    let t = build_hopping(basis, region, params.j);
    let v = build_potential(basis, region, params)?;
    t.add(&v.to_sparse())
}

/// `dΓ(f) = Σ_x f(x) n_x`.
pub fn second_quantize(basis: &Arc<FockBasis>, f: &[f64]) -> Result<DiagonalOperator> {
    if f.len() != basis.sites() {
        return invalid(format!(
            "site function has {} values, lattice has {} sites",
            f.len(),
            basis.sites()
        ));
    }
    let values = basis
        .states()
        .map(|occ| occ.iter().zip(f).map(|(&n, &w)| n as f64 * w).sum())
        .collect();
    Ok(DiagonalOperator::new(Arc::clone(basis), values))
}

/// `N_X`.
pub fn number_operator(basis: &Arc<FockBasis>, region: &SiteSet) -> DiagonalOperator {
    second_quantize(basis, &region.indicator()).expect("indicator spans the lattice")
}

/// `n_x`.
pub fn site_number(basis: &Arc<FockBasis>, site: usize) -> DiagonalOperator {
    let values = basis.states().map(|occ| occ[site] as f64).collect();
    DiagonalOperator::new(Arc::clone(basis), values)
}

/// `AB - BA`.
pub fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Largest entry of `[H, dΓ(g)] + J Σ_{x~y} (g(x) - g(y)) b_x^† b_y` on the
/// full lattice. Zero up to rounding when the commutator identity holds.
pub fn commutator_expansion_residual(
    basis: &Arc<FockBasis>,
    g: &[f64],
    params: &HamiltonianParams,
) -> Result<f64> {
    let all = SiteSet::all(Arc::clone(basis.lattice()));
    let h = build_hamiltonian(basis, &all, params)?;
    let dg = second_quantize(basis, g)?.to_sparse();
    let lhs = commutator(&h, &dg)?;
    let rhs = weighted_hops(basis, &all, |x, y| -params.j * (g[x] - g[y]));
    Ok(lhs.sub(&rhs)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn setup(ext: &[i64], n: usize, cap: usize) -> (Arc<FockBasis>, SiteSet) {
        let lat = Arc::new(Lattice::new(ext.len(), ext).unwrap());
        let b = Arc::new(FockBasis::enumerate(lat.clone(), n, cap).unwrap());
        (b, SiteSet::all(lat))
    }

    #[test]
    fn hopping_on_singleton_is_zero() {
        let (b, all) = setup(&[3], 2, 2);
        let x = SiteSet::singleton(all.lattice().clone(), 1).unwrap();
        assert_eq!(build_hopping(&b, &x, 1.0).nnz(), 0);
        assert_eq!(build_hopping(&b, &all, 0.0).nnz(), 0);
    }

    #[test]
    fn two_site_single_boson_hopping() {
        let (b, all) = setup(&[2], 1, 1);
        let t = build_hopping(&b, &all, 1.0).to_dense();
        // basis: (0,1), (1,0)
        assert_eq!(t[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(t[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(t[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(t[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn potential_examples() {
        let (b, all) = setup(&[2], 3, 3);
        let idx = b.rank(&[2, 1]).unwrap();
        let pair = build_potential(&b, &all, &HamiltonianParams::pairwise(0.0, 1.0, 0.0, 2.0)).unwrap();
        assert_eq!(pair.values()[idx], 4.0);
        let on = build_potential(&b, &all, &HamiltonianParams::onsite(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(on.values()[idx], 2.0);
        let bad = HamiltonianParams::pairwise(0.0, 1.0, 0.0, 0.5);
        assert!(build_potential(&b, &all, &bad).is_err());

        let (v, all) = setup(&[3], 0, 2);
        let z = build_potential(&v, &all, &HamiltonianParams::onsite(1.0, 3.0, 1.0)).unwrap();
        assert_eq!(z.values(), &[0.0]);
    }

    #[test]
    fn hamiltonian_limits() {
        let (b, all) = setup(&[4], 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::hopping_only(0.7)).unwrap();
        let t = build_hopping(&b, &all, 0.7);
        assert_eq!(h.sub(&t).unwrap().max_abs(), 0.0);

        let h0 = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(0.0, 1.0, 0.3)).unwrap();
        assert!(h0.is_diagonal());
    }

    #[test]
    fn hamiltonian_hermitian_and_number_conserving() {
        let (b, all) = setup(&[4], 2, 2);
        for params in [
            HamiltonianParams::onsite(1.0, 0.8, 0.2),
            HamiltonianParams::pairwise(-0.6, 1.1, 0.4, 3.0),
        ] {
            let h = build_hamiltonian(&b, &all, &params).unwrap();
            assert_eq!(h.hermiticity_defect(), 0.0);
            let n = number_operator(&b, &all).to_sparse();
            assert_eq!(commutator(&h, &n).unwrap().max_abs(), 0.0);

            // dense cross-check of the commutator
            let hd = h.to_dense();
            let nd = n.to_dense();
            let c = &hd * &nd - &nd * &hd;
            assert_eq!(c.iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
        }
    }

    #[test]
    fn local_number_conservation() {
        let (b, all) = setup(&[5], 2, 2);
        let lat = all.lattice().clone();
        let x = SiteSet::new(lat, [1, 2, 3]).unwrap();
        let params = HamiltonianParams::onsite(1.0, 0.5, 0.0);
        let hx = build_hamiltonian(&b, &x, &params).unwrap();
        let nx = number_operator(&b, &x).to_sparse();
        assert_eq!(commutator(&hx, &nx).unwrap().max_abs(), 0.0);
        let h = build_hamiltonian(&b, &all, &params).unwrap();
        assert!(commutator(&h, &nx).unwrap().max_abs() > 0.1);
    }

    #[test]
    fn second_quantize_examples() {
        let (b, all) = setup(&[3], 3, 3);
        let n = second_quantize(&b, &[1.0; 3]).unwrap();
        assert!(n.values().iter().all(|&v| v == 3.0));
        let idx = b.rank(&[1, 0, 2]).unwrap();
        let f = second_quantize(&b, &[0.3, 5.0, -1.5]).unwrap();
        assert_eq!(f.values()[idx], 0.3 + 2.0 * -1.5);
        let lat = all.lattice().clone();
        let ball = crate::lattice::ball(&lat, 0, 1.0).unwrap();
        let nb = number_operator(&b, &ball);
        assert_eq!(nb.values()[idx], 1.0);
        assert!(second_quantize(&b, &[1.0; 2]).is_err());
    }

    #[test]
    fn commutator_examples() {
        let (b, all) = setup(&[4], 2, 2);
        let h = build_hamiltonian(&b, &all, &HamiltonianParams::onsite(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(commutator(&h, &h).unwrap().max_abs(), 0.0);
        let g = second_quantize(&b, &[0.1, 0.7, -0.2, 1.0]).unwrap().to_sparse();
        let v = build_potential(&b, &all, &HamiltonianParams::onsite(1.0, 1.0, 0.3)).unwrap().to_sparse();
        assert_eq!(commutator(&g, &v).unwrap().max_abs(), 0.0);

        let (other, _) = setup(&[5], 2, 2);
        let z = SparseOperator::zero(other);
        assert!(commutator(&h, &z).is_err());
    }

    #[test]
    fn commutator_expansion_examples() {
        let (b, _) = setup(&[4], 2, 2);
        let params = HamiltonianParams::onsite(1.0, 0.9, 0.1);
        assert_eq!(commutator_expansion_residual(&b, &[2.0; 4], &params).unwrap(), 0.0);
        let r = commutator_expansion_residual(&b, &[0.0, 1.0, 0.0, 0.0], &params).unwrap();
        assert!(r <= 1e-12);

        let (b2, all2) = setup(&[3, 3], 2, 2);
        let ramp: Vec<f64> = all2.coords().iter().map(|c| 0.5 * c[0] as f64 - 0.25 * c[1] as f64).collect();
        let r = commutator_expansion_residual(&b2, &ramp, &params).unwrap();
        assert!(r <= 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn second_quantize_is_linear(
                f in proptest::collection::vec(-2.0f64..2.0, 4),
                g in proptest::collection::vec(-2.0f64..2.0, 4),
                a in -3.0f64..3.0,
                c in -3.0f64..3.0,
            ) {
                let (b, _) = setup(&[4], 3, 2);
                let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + c * y).collect();
                let lhs = second_quantize(&b, &combo).unwrap();
                let df = second_quantize(&b, &f).unwrap();
                let dg = second_quantize(&b, &g).unwrap();
                for i in 0..b.dim() {
                    let rhs = a * df.values()[i] + c * dg.values()[i];
                    prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-12);
                }
            }
        }
    }
}
