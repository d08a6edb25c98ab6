//! Light-cone experiments: moment propagation, state-dependent
//! Lieb-Robinson differences, commutator norms, and fits of their decay.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{projector, Propagator, Truncate, DEFAULT_DENSE_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::lattice::{ball, SiteSet};
use crate::linalg::{self, check_dense, SpectralPropagator};
pub use crate::linalg::{operator_norm, trace_norm};
use crate::operators::{
    build_hamiltonian, number_operator, site_number, DenseMatrix, HamiltonianParams,
};
use crate::states::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFlag {
    Ok,
    /// Grid point violates the propagation-bound hypotheses; not evaluated.
    OutsideRegime,
    /// Evaluated, but `R <= 2` lies below the radius the Lieb-Robinson bound covers.
    SmallRadius,
    /// `t = 0` moment on the outer ball `B_R`.
    InitialOuter,
    /// Occupation outside `B_R(x)`.
    Tail,
    /// Single-site occupation.
    Site,
    /// Full dynamics.
    Full,
    /// Truncated dynamics.
    Truncated,
    Term1,
    Term2,
    Term3,
    Term4,
    Term5,
    LadderSum,
    LadderDirect,
}

impl RecordFlag {
    pub fn label(self) -> &'static str {
        match self {
            RecordFlag::Ok => "ok",
            RecordFlag::OutsideRegime => "outside_regime",
            RecordFlag::SmallRadius => "small_radius",
            RecordFlag::InitialOuter => "initial_outer",
            RecordFlag::Tail => "tail",
            RecordFlag::Site => "site",
            RecordFlag::Full => "full",
            RecordFlag::Truncated => "truncated",
            RecordFlag::Term1 => "term1",
            RecordFlag::Term2 => "term2",
            RecordFlag::Term3 => "term3",
            RecordFlag::Term4 => "term4",
            RecordFlag::Term5 => "term5",
            RecordFlag::LadderSum => "ladder_sum",
            RecordFlag::LadderDirect => "ladder_direct",
        }
    }

    fn term(k: usize) -> Self {
        [
            RecordFlag::Term1,
            RecordFlag::Term2,
            RecordFlag::Term3,
            RecordFlag::Term4,
            RecordFlag::Term5,
        ][k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub site: Option<Vec<i64>>,
    pub r: Option<f64>,
    pub big_r: Option<f64>,
    pub t: f64,
    pub s: Option<f64>,
    pub eta: Option<f64>,
    pub nu: Option<usize>,
    /// `None` for skipped grid points.
    pub value: Option<f64>,
    pub flag: RecordFlag,
}

impl SweepRecord {
    fn new(t: f64, flag: RecordFlag) -> Self {
        SweepRecord {
            site: None,
            r: None,
            big_r: None,
            t,
            s: None,
            eta: None,
            nu: None,
            value: None,
            flag,
        }
    }

    fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

fn check_record_value(v: f64) -> Result<f64> {
    if !v.is_finite() || v < -1e-10 {
        return Err(Error::NumericalFailure {
            message: format!("measured value {v} is not a finite nonnegative number"),
            time: f64::NAN,
            substeps: 0,
            error_estimate: f64::NAN,
        });
    }
    Ok(v)
}

fn distinct_times(times: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut ts: Vec<f64> = times.collect();
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| a.to_bits() == b.to_bits());
    ts
}

fn evolve_all(prop: &Propagator, state: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
    times.par_iter().map(|&t| prop.evolve(state, t)).collect()
}

fn time_index(times: &[f64], t: f64) -> usize {
    times
        .iter()
        .position(|x| x.to_bits() == t.to_bits())
        .expect("time was registered")
}

/// Population on states where some site sits at the occupation cap. Zero
/// when the cap cannot bind (`n_max >= N_tot`).
pub fn cap_saturation_weight(state: &QuantumState) -> f64 {
    let basis = state.basis();
    if basis.n_max() >= basis.n_tot() {
        return 0.0;
    }
    let cap = basis.n_max() as u16;
    state
        .populations()
        .iter()
        .zip(basis.states())
        .filter(|(_, occ)| occ.iter().any(|&n| n >= cap))
        .map(|(p, _)| *p)
        .sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParticleSweepParams {
    pub eta: f64,
    pub v: f64,
    pub delta0: f64,
}

/// `Tr[N_{B_r(x)}^η ρ(t)]` for each `(r, R, t)` with `v|t| <= R - r` and
/// `R - r > max(1, δ₀ r)`; other points are flagged and skipped. One
/// [`RecordFlag::InitialOuter`] record per distinct `R` carries
/// `Tr[N_{B_R(x)}^η ρ]` at `t = 0`.
pub fn particle_sweep(
    prop: &Propagator,
    params: &HamiltonianParams,
    state: &QuantumState,
    center: usize,
    sweep: &ParticleSweepParams,
    grid: &[(f64, f64, f64)],
) -> Result<Vec<SweepRecord>> {
    let basis = state.basis();
    let lat = basis.lattice();
    let kappa = 2.0 * lat.dim() as f64 * params.j.abs();
    if !(sweep.v > kappa) {
        return invalid(format!("velocity v = {} must exceed 2d|J| = {kappa}", sweep.v));
    }
    if !(sweep.delta0 > 0.0 && sweep.delta0 < 1.0) {
        return invalid(format!("delta0 must lie in (0, 1), got {}", sweep.delta0));
    }
    if !(sweep.eta > 0.0) {
        return invalid(format!("eta must be positive, got {}", sweep.eta));
    }
    let admissible = |r: f64, big_r: f64, t: f64| {
        let gap = big_r - r;
        r >= 0.0 && gap > 1.0f64.max(sweep.delta0 * r) && sweep.v * t.abs() <= gap * (1.0 + 1e-12)
    };
    let times = distinct_times(
        grid.iter()
            .filter(|&&(r, big_r, t)| admissible(r, big_r, t))
            .map(|g| g.2),
    );
    let evolved = evolve_all(prop, state, &times)?;
    let site = lat.coord(center).to_vec();

    let mut out = Vec::with_capacity(grid.len());
    let mut outer_seen: Vec<u64> = Vec::new();
    for &(r, big_r, t) in grid {
        let mut rec = SweepRecord::new(t, RecordFlag::Ok);
        rec.site = Some(site.clone());
        rec.r = Some(r);
        rec.big_r = Some(big_r);
        rec.eta = Some(sweep.eta);
        if big_r > r {
            rec.s = Some((big_r - r) / sweep.v);
        }
        if !admissible(r, big_r, t) {
            rec.flag = RecordFlag::OutsideRegime;
            out.push(rec);
            continue;
        }
        let st = &evolved[time_index(&times, t)];
        let m = st.moment(&ball(lat, center, r)?, sweep.eta)?;
        out.push(rec.with_value(check_record_value(m)?));

        if !outer_seen.contains(&big_r.to_bits()) {
            outer_seen.push(big_r.to_bits());
            let mut init = SweepRecord::new(0.0, RecordFlag::InitialOuter);
            init.site = Some(site.clone());
            init.r = Some(big_r);
            init.big_r = Some(big_r);
            init.eta = Some(sweep.eta);
            let m0 = state.moment(&ball(lat, center, big_r)?, sweep.eta)?;
            out.push(init.with_value(check_record_value(m0)?));
        }
    }
    Ok(out)
}

/// `Σ_{y ∉ B_R(x)} <n_y>_t` for every radius and time.
pub fn escape_profile(
    prop: &Propagator,
    state: &QuantumState,
    center: usize,
    radii: &[f64],
    times: &[f64],
) -> Result<Vec<SweepRecord>> {
    let basis = state.basis();
    let lat = basis.lattice();
    let ts = distinct_times(times.iter().copied());
    let evolved = evolve_all(prop, state, &ts)?;
    let all = number_operator(basis, &SiteSet::all(Arc::clone(lat)));
    let site = lat.coord(center).to_vec();
    let mut out = Vec::new();
    for &t in times {
        let st = &evolved[time_index(&ts, t)];
        let total = st.expectation_diag(&all)?;
        for &big_r in radii {
            let inside = st.expectation_diag(&number_operator(basis, &ball(lat, center, big_r)?))?;
            let mut rec = SweepRecord::new(t, RecordFlag::Tail);
            rec.site = Some(site.clone());
            rec.r = Some(0.0);
            rec.big_r = Some(big_r);
            out.push(rec.with_value(check_record_value((total - inside).max(0.0))?));
        }
    }
    Ok(out)
}

/// `<n_y>_t` for every site `y`; `R` holds `|y - x|`.
pub fn site_profile(
    prop: &Propagator,
    state: &QuantumState,
    center: usize,
    times: &[f64],
) -> Result<Vec<SweepRecord>> {
    let basis = state.basis();
    let lat = basis.lattice();
    let ts = distinct_times(times.iter().copied());
    let evolved = evolve_all(prop, state, &ts)?;
    let mut out = Vec::new();
    for &t in times {
        let st = &evolved[time_index(&ts, t)];
        for y in 0..lat.len() {
            let n = st.expectation_diag(&site_number(basis, y))?;
            let mut rec = SweepRecord::new(t, RecordFlag::Site);
            rec.site = Some(lat.coord(y).to_vec());
            rec.r = Some(0.0);
            rec.big_r = Some(lat.distance(center, y));
            out.push(rec.with_value(check_record_value(n)?));
        }
    }
    Ok(out)
}

/// An operator together with its basis and the sites it acts on.
#[derive(Debug, Clone)]
pub struct LocalObservable {
    pub basis: Arc<FockBasis>,
    pub support: SiteSet,
    pub matrix: DenseMatrix,
}

impl LocalObservable {
    pub fn new(basis: &Arc<FockBasis>, support: SiteSet, matrix: DenseMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return invalid("observable shape does not match the basis");
        }
        Ok(LocalObservable {
            basis: Arc::clone(basis),
            support,
            matrix,
        })
    }

    pub fn site_number(basis: &Arc<FockBasis>, site: usize) -> Result<Self> {
        let support = SiteSet::singleton(Arc::clone(basis.lattice()), site)?;
        LocalObservable::new(basis, support, site_number(basis, site).to_dense())
    }

    /// `Π_{X,ν} N_X Π_{X,ν}`, or plain `N_X` for `nu = None`.
    pub fn truncated_number(basis: &Arc<FockBasis>, support: SiteSet, nu: Option<usize>) -> Result<Self> {
        let n = number_operator(basis, &support);
        let n = match nu {
            Some(nu) => n.truncate(&projector(basis, &support, nu)?)?,
            None => n,
        };
        LocalObservable::new(basis, support, n.to_dense())
    }

    /// `Π_{x,ν} n_x Π_{x,ν}`.
    pub fn truncated_site_number(basis: &Arc<FockBasis>, site: usize, nu: usize) -> Result<Self> {
        let support = SiteSet::singleton(Arc::clone(basis.lattice()), site)?;
        LocalObservable::truncated_number(basis, support, Some(nu))
    }

    fn check_number_conserving(&self) -> Result<()> {
        let nx = number_operator(&self.basis, &self.support).to_dense();
        let defect = linalg::max_abs(&linalg::commutator(&self.matrix, &nx));
        let scale = linalg::max_abs(&self.matrix).max(1.0);
        if defect > 1e-10 * scale {
            return invalid(format!(
                "observable does not commute with the particle number on its support (defect {defect:e})"
            ));
        }
        Ok(())
    }
}

fn dedup_sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| a.to_bits() == b.to_bits());
    xs
}

/// `‖(τ_t(A) - τ^R_t(A)) ρ‖₁` over a grid of `(R, t)`.
pub fn lr_sweep(
    params: &HamiltonianParams,
    state: &QuantumState,
    a: &LocalObservable,
    grid: &[(f64, f64)],
) -> Result<Vec<SweepRecord>> {
    let basis = state.basis();
    crate::operators::check_same_basis(basis, &a.basis)?;
    check_dense(basis.dim(), DEFAULT_DENSE_THRESHOLD)?;
    a.check_number_conserving()?;
    if grid.iter().any(|&(r, _)| !(r >= 0.0)) {
        return invalid("enlargement radii must be nonnegative");
    }
    let all = SiteSet::all(Arc::clone(basis.lattice()));
    let full = SpectralPropagator::new(build_hamiltonian(basis, &all, params)?.to_dense());
    let rho = state.density_matrix();

    let radii = dedup_sorted(grid.iter().map(|g| g.0).collect());
    let restricted: Vec<SpectralPropagator> = radii
        .par_iter()
        .map(|&r| {
            let region = a.support.enlarge(r)?;
            Ok(SpectralPropagator::new(build_hamiltonian(basis, &region, params)?.to_dense()))
        })
        .collect::<Result<_>>()?;

    let site = a.support.coords().into_iter().next();
    grid.par_iter()
        .map(|&(big_r, t)| {
            let k = radii.iter().position(|x| x.to_bits() == big_r.to_bits()).unwrap();
            let diff = full.heisenberg(&a.matrix, t) - restricted[k].heisenberg(&a.matrix, t);
            let value = trace_norm(&(diff * &rho));
            let flag = if big_r > 2.0 { RecordFlag::Ok } else { RecordFlag::SmallRadius };
            let mut rec = SweepRecord::new(t, flag);
            rec.site = site.clone();
            rec.big_r = Some(big_r);
            Ok(rec.with_value(check_record_value(value)?))
        })
        .collect()
}

/// Euclidean distance between two site sets.
pub fn separation(a: &SiteSet, b: &SiteSet) -> f64 {
    let lat = a.lattice();
    a.members()
        .iter()
        .flat_map(|&x| b.members().iter().map(move |&y| lat.distance(x, y)))
        .fold(f64::INFINITY, f64::min)
}

/// `‖[τ_t(A), B]‖` for each `B` and `t`, plus `‖[τ̄_t(Ā), B̄]‖` when a
/// truncation `(Y, ν)` is given. `R` holds the support separation.
pub fn commutator_lightcone(
    params: &HamiltonianParams,
    a: &LocalObservable,
    bs: &[LocalObservable],
    times: &[f64],
    truncation: Option<(&SiteSet, usize)>,
) -> Result<Vec<SweepRecord>> {
    let basis = &a.basis;
    check_dense(basis.dim(), DEFAULT_DENSE_THRESHOLD)?;
    for b in bs {
        crate::operators::check_same_basis(basis, &b.basis)?;
        if !a.support.is_disjoint(&b.support) {
            return invalid(format!(
                "observable supports {} and {} overlap",
                a.support, b.support
            ));
        }
    }
    let all = SiteSet::all(Arc::clone(basis.lattice()));
    let h = build_hamiltonian(basis, &all, params)?;
    let full = SpectralPropagator::new(h.to_dense());
    let trunc = match truncation {
        Some((y, nu)) => {
            let p = projector(basis, y, nu)?;
            let hbar = h.truncate(&p)?;
            let abar = a.matrix.truncate(&p)?;
            Some((p, SpectralPropagator::new(hbar.to_dense()), abar, nu))
        }
        None => None,
    };

    let jobs: Vec<(usize, f64)> = (0..bs.len())
        .flat_map(|k| times.iter().map(move |&t| (k, t)))
        .collect();
    let per_job: Vec<Vec<SweepRecord>> = jobs
        .par_iter()
        .map(|&(k, t)| {
            let b = &bs[k];
            let sep = separation(&a.support, &b.support);
            let site = b.support.coords().into_iter().next();
            let mut recs = Vec::with_capacity(2);

            let at = full.heisenberg(&a.matrix, t);
            let c = operator_norm(&linalg::commutator(&at, &b.matrix));
            let mut rec = SweepRecord::new(t, RecordFlag::Full);
            rec.site = site.clone();
            rec.r = Some(0.0);
            rec.big_r = Some(sep);
            recs.push(rec.with_value(check_record_value(c)?));

            if let Some((p, prop, abar, nu)) = &trunc {
                let at = prop.heisenberg(abar, t);
                let bbar = b.matrix.truncate(p)?;
                let c = operator_norm(&linalg::commutator(&at, &bbar));
                let mut rec = SweepRecord::new(t, RecordFlag::Truncated);
                rec.site = site;
                rec.r = Some(0.0);
                rec.big_r = Some(sep);
                rec.nu = Some(*nu);
                recs.push(rec.with_value(check_record_value(c)?));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FitMode {
    /// `log(value)` against `log(R - r)`.
    DecayInGap,
    /// `log(value)` against `R - r`.
    ExponentialDecay,
    /// Smallest gap with `value < threshold` at each time, then gap against `t`.
    FrontSpeed { threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub gap: f64,
    pub t: f64,
    pub value: f64,
}

impl FitPoint {
    /// Evaluated records as `(R - r, t, value)`; `r` defaults to 0.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a SweepRecord>) -> Vec<FitPoint> {
        records
            .into_iter()
            .filter_map(|rec| {
                let value = rec.value?;
                let gap = rec.big_r? - rec.r.unwrap_or(0.0);
                Some(FitPoint { gap, t: rec.t, value })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    pub dropped: usize,
}

pub const MIN_FIT_POINTS: usize = 4;

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

pub fn lightcone_fit(points: &[FitPoint], mode: FitMode) -> Result<LineFit> {
    let (xs, ys, dropped) = match mode {
        FitMode::DecayInGap | FitMode::ExponentialDecay => {
            let usable: Vec<&FitPoint> = points
                .iter()
                .filter(|p| p.value > 0.0 && p.value.is_finite() && p.gap > 0.0)
                .collect();
            let dropped = points.len() - usable.len();
            let xs: Vec<f64> = usable
                .iter()
                .map(|p| if mode == FitMode::DecayInGap { p.gap.ln() } else { p.gap })
                .collect();
            let ys: Vec<f64> = usable.iter().map(|p| p.value.ln()).collect();
            (xs, ys, dropped)
        }
        FitMode::FrontSpeed { threshold } => {
            if !(threshold > 0.0) {
                return invalid(format!("front threshold must be positive, got {threshold}"));
            }
            let mut by_time: BTreeMap<u64, (f64, Vec<&FitPoint>)> = BTreeMap::new();
            for p in points {
                by_time
                    .entry(order_key(p.t))
                    .or_insert_with(|| (p.t, Vec::new()))
                    .1
                    .push(p);
            }
            let (mut xs, mut ys, mut dropped) = (Vec::new(), Vec::new(), 0);
            for (_, (t, mut pts)) in by_time {
                pts.sort_by(|a, b| a.gap.total_cmp(&b.gap));
                match pts.iter().find(|p| p.value < threshold) {
                    Some(p) => {
                        xs.push(t);
                        ys.push(p.gap);
                    }
                    None => dropped += 1,
                }
            }
            (xs, ys, dropped)
        }
    };
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        used: xs.len(),
        dropped,
    })
}

// Monotone map from f64 to u64 so BTreeMap iterates in numeric order.
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub big_r: f64,
    pub nu: usize,
    pub t: f64,
    /// `‖ρ(M_{k-1} - M_k)‖₁` along
    /// `τ(A) → τ(Ā) → τ̄(Ā) → τ̄^R(Ā) → τ^R(Ā) → τ^R(A)`.
    pub terms: [f64; 5],
    pub sum: f64,
    /// `‖ρ(τ_t(A) - τ^R_t(A))‖₁`.
    pub direct: f64,
}

impl LadderReport {
    pub fn triangle_holds(&self) -> bool {
        self.sum + 1e-12 >= self.direct
    }

    pub fn records(&self, site: Option<Vec<i64>>) -> Vec<SweepRecord> {
        let base = |flag: RecordFlag, v: f64| {
            let mut rec = SweepRecord::new(self.t, flag);
            rec.site = site.clone();
            rec.big_r = Some(self.big_r);
            rec.nu = Some(self.nu);
            rec.with_value(v)
        };
        let mut out: Vec<SweepRecord> = self
            .terms
            .iter()
            .enumerate()
            .map(|(k, &v)| base(RecordFlag::term(k), v))
            .collect();
        out.push(base(RecordFlag::LadderSum, self.sum));
        out.push(base(RecordFlag::LadderDirect, self.direct));
        out
    }
}

/// Five-step decomposition of `τ_t(A) - τ^R_t(A)` through the truncated
/// dynamics with `Π = Π_{X[R+2],ν}`. Each term is the trace norm of `ρ` times
/// the step difference, which equals the supremum of `|Tr[ρ D B]|` over
/// `‖B‖ = 1`.
pub fn truncation_ladder(
    params: &HamiltonianParams,
    state: &QuantumState,
    a: &LocalObservable,
    big_r: f64,
    nu: usize,
    t: f64,
) -> Result<LadderReport> {
    let basis = state.basis();
    crate::operators::check_same_basis(basis, &a.basis)?;
    check_dense(basis.dim(), DEFAULT_DENSE_THRESHOLD)?;
    a.check_number_conserving()?;
    let lat = basis.lattice();
    let all = SiteSet::all(Arc::clone(lat));
    let region = a.support.enlarge(big_r)?;
    let p = projector(basis, &a.support.enlarge(big_r + 2.0)?, nu)?;

    let h = build_hamiltonian(basis, &all, params)?;
    let h_r = build_hamiltonian(basis, &region, params)?;
    let props = [
        SpectralPropagator::new(h.to_dense()),
        SpectralPropagator::new(h.truncate(&p)?.to_dense()),
        SpectralPropagator::new(h_r.truncate(&p)?.to_dense()),
        SpectralPropagator::new(h_r.to_dense()),
    ];
    let abar = a.matrix.truncate(&p)?;
    let chain = [
        props[0].heisenberg(&a.matrix, t),
        props[0].heisenberg(&abar, t),
        props[1].heisenberg(&abar, t),
        props[2].heisenberg(&abar, t),
        props[3].heisenberg(&abar, t),
        props[3].heisenberg(&a.matrix, t),
    ];
    let rho = state.density_matrix();
    let dual = |d: DenseMatrix| trace_norm(&(&rho * d));
    let mut terms = [0.0; 5];
    for k in 0..5 {
        terms[k] = check_record_value(dual(&chain[k] - &chain[k + 1]))?;
    }
    let direct = dual(&chain[0] - &chain[5]);
    Ok(LadderReport {
        big_r,
        nu,
        t,
        terms,
        sum: terms.iter().sum(),
        direct,
    })
}

/// Trace norm of `M ρ` where `ρ` is given as a state.
pub fn weighted_trace_norm(m: &DenseMatrix, state: &QuantumState) -> f64 {
    trace_norm(&(m * state.density_matrix()))
}
