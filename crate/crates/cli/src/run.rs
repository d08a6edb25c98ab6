//! Executes a loaded configuration and collects its records and summary.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use lrcone_core::diagnostics::{
    cap_saturation_weight, commutator_lightcone, escape_profile, lightcone_fit, lr_sweep,
    particle_sweep, site_profile, truncation_ladder, FitMode, FitPoint, LocalObservable,
    ParticleSweepParams, RecordFlag, SweepRecord,
};
use lrcone_core::dynamics::Propagator;
use lrcone_core::states::{product_fock_state, spread_state, DensityReport};
use lrcone_core::verify::{default_suites, Check};
use lrcone_core::{build_hamiltonian, Error, FockBasis, QuantumState, SiteSet};

use crate::config::{ExperimentKind, LoadedConfig, SchemaError, StateKind};

#[derive(Debug)]
pub enum RunError {
    Schema(SchemaError),
    Numerical(Error),
    Invariant(Vec<Check>),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Invariant(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Schema(e) => write!(f, "config error: {e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Invariant(failed) => {
                write!(f, "{} invariant check(s) failed", failed.len())?;
                for c in failed {
                    write!(f, "\n  {c}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for RunError {}

impl From<SchemaError> for RunError {
    fn from(e: SchemaError) -> Self {
        RunError::Schema(e)
    }
}

// Bad arguments that slip past validation are still the config's fault.
impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::NotFound(_) => RunError::Schema(SchemaError {
                path: String::new(),
                line: None,
                column: None,
                message: e.to_string(),
            }),
            other => RunError::Numerical(other),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapWeight {
    pub initial: f64,
    pub t_final: f64,
    pub at_t_final: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<SweepRecord>,
    pub basis: Option<Arc<FockBasis>>,
    pub density: Option<DensityReport>,
    pub cap_weight: Option<CapWeight>,
    pub checks: Vec<Check>,
    pub summary: Value,
}

pub fn build_state(loaded: &LoadedConfig, basis: &Arc<FockBasis>) -> Result<QuantumState, RunError> {
    let spec = loaded.config.state.as_ref().expect("validated");
    let state = match spec.kind {
        StateKind::Fock => product_fock_state(basis, spec.occupations.as_ref().expect("validated"))
            .map_err(|e| loaded.error_at("state.occupations", e.to_string()))?,
        StateKind::Spread => {
            let weights = spec.weights.clone().unwrap_or_else(|| vec![1.0; basis.sites()]);
            spread_state(basis, &weights, spec.mixed)
                .map_err(|e| loaded.error_at("state.weights", e.to_string()))?
        }
    };
    Ok(state)
}

fn observable(
    basis: &Arc<FockBasis>,
    site: usize,
    nu: Option<usize>,
) -> Result<LocalObservable, RunError> {
    let support = SiteSet::singleton(Arc::clone(basis.lattice()), site)?;
    Ok(LocalObservable::truncated_number(basis, support, nu)?)
}

fn fit_json(points: &[FitPoint], mode: FitMode) -> Value {
    match lightcone_fit(points, mode) {
        Ok(fit) => serde_json::to_value(fit).expect("serializable"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn distinct(xs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for x in xs {
        if !out.iter().any(|y| y.to_bits() == x.to_bits()) {
            out.push(x);
        }
    }
    out
}

/// Runs the experiment. `seed` overrides the config seed when given.
pub fn execute(loaded: &LoadedConfig, seed: Option<u64>) -> Result<RunOutput, RunError> {
    let cfg = &loaded.config;
    if cfg.experiment == ExperimentKind::Verify {
        let seed = seed.unwrap_or(cfg.seed);
        let random = cfg.verify.clone().unwrap_or_default().random_functions.max(1);
        let checks = default_suites(seed, random)?;
        let failed: Vec<Check> = checks.iter().filter(|c| !c.passed).cloned().collect();
        if !failed.is_empty() {
            return Err(RunError::Invariant(failed));
        }
        return Ok(RunOutput {
            records: Vec::new(),
            basis: None,
            density: None,
            cap_weight: None,
            summary: json!({ "checks_passed": checks.len() }),
            checks,
        });
    }

    let basis = loaded.basis()?;
    let lat = Arc::clone(basis.lattice());
    let params = loaded.hamiltonian()?;
    let state = build_state(loaded, &basis)?;
    let state_spec = cfg.state.as_ref().expect("validated");
    let density = match state_spec.lambda {
        Some(lambda) => {
            let report = state.check_controlled_density(lambda, state_spec.eta_max)?;
            if !report.passed {
                log::warn!(
                    "state violates the declared density control at lambda = {lambda} (worst ratio {})",
                    report.worst_ratio
                );
            }
            Some(report)
        }
        None => None,
    };

    let all = SiteSet::all(Arc::clone(&lat));
    let h = build_hamiltonian(&basis, &all, &params)?;
    let prop = Propagator::new(h, cfg.propagator.method());

    let (records, summary, t_final) = match cfg.experiment {
        ExperimentKind::Particle => {
            let p = cfg.particle.as_ref().expect("validated");
            let center = loaded.site(&lat, &p.x, "particle.x")?;
            let sweep = ParticleSweepParams {
                eta: p.eta,
                v: p.v,
                delta0: p.delta0,
            };
            let grid: Vec<(f64, f64, f64)> = p
                .r
                .iter()
                .flat_map(|&r| p.big_r.iter().flat_map(move |&rr| p.t.iter().map(move |&t| (r, rr, t))))
                .collect();
            let mut records = particle_sweep(&prop, &params, &state, center, &sweep, &grid)?;
            let skipped = records.iter().filter(|r| r.flag == RecordFlag::OutsideRegime).count();
            let mut summary = json!({
                "kappa": 2.0 * lat.dim() as f64 * params.j.abs(),
                "v": p.v,
                "outside_regime": skipped,
            });
            if !p.tail_radii.is_empty() && !p.tail_times.is_empty() {
                let tail = escape_profile(&prop, &state, center, &p.tail_radii, &p.tail_times)?;
                let points = FitPoint::from_records(&tail);
                summary["front_fit"] = fit_json(&points, FitMode::FrontSpeed { threshold: p.front_threshold });
                summary["front_threshold"] = json!(p.front_threshold);
                records.extend(tail);
            }
            if !p.site_times.is_empty() {
                records.extend(site_profile(&prop, &state, center, &p.site_times)?);
            }
            let t_final = p
                .t
                .iter()
                .chain(&p.tail_times)
                .chain(&p.site_times)
                .fold(0.0f64, |m, t| if t.abs() > m.abs() { *t } else { m });
            (records, summary, t_final)
        }
        ExperimentKind::Lr => {
            let s = cfg.lr.as_ref().expect("validated");
            let site = loaded.site(&lat, &s.x, "lr.x")?;
            let a = observable(&basis, site, s.nu_a)?;
            let grid: Vec<(f64, f64)> = s
                .big_r
                .iter()
                .flat_map(|&r| s.t.iter().map(move |&t| (r, t)))
                .collect();
            let records = lr_sweep(&params, &state, &a, &grid)?;
            let mut per_time = Vec::new();
            for t in distinct(s.t.iter().copied()) {
                let mut pts: Vec<&SweepRecord> = records.iter().filter(|r| r.t.to_bits() == t.to_bits()).collect();
                pts.sort_by(|a, b| a.big_r.unwrap().total_cmp(&b.big_r.unwrap()));
                let vals: Vec<f64> = pts.iter().map(|r| r.value.unwrap()).collect();
                let max_increase = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
                let points = FitPoint::from_records(pts.iter().copied());
                per_time.push(json!({
                    "t": t,
                    "max_increase_in_R": if vals.len() > 1 { json!(max_increase) } else { Value::Null },
                    "last_over_first": if vals.len() > 1 && vals[0] > 0.0 { json!(vals[vals.len() - 1] / vals[0]) } else { Value::Null },
                    "decay_fit": fit_json(&points, FitMode::DecayInGap),
                }));
            }
            let t_final = s.t.iter().fold(0.0f64, |m, t| if t.abs() > m.abs() { *t } else { m });
            (records, json!({ "per_time": per_time }), t_final)
        }
        ExperimentKind::Commutator => {
            let s = cfg.commutator.as_ref().expect("validated");
            let a_site = loaded.site(&lat, &s.a, "commutator.a")?;
            let a = observable(&basis, a_site, None)?;
            let bs = s
                .b
                .iter()
                .map(|b| observable(&basis, loaded.site(&lat, b, "commutator.b")?, None))
                .collect::<Result<Vec<_>, _>>()?;
            let truncation = s.nu.map(|nu| (&all, nu));
            let records = commutator_lightcone(&params, &a, &bs, &s.t, truncation)?;
            let mut fits = Vec::new();
            for flag in [RecordFlag::Full, RecordFlag::Truncated] {
                for t in distinct(s.t.iter().copied()) {
                    let pts = FitPoint::from_records(
                        records.iter().filter(|r| r.flag == flag && r.t.to_bits() == t.to_bits()),
                    );
                    if pts.is_empty() {
                        continue;
                    }
                    fits.push(json!({
                        "flag": flag.label(),
                        "t": t,
                        "exponential_fit": fit_json(&pts, FitMode::ExponentialDecay),
                    }));
                }
            }
            let t_final = s.t.iter().fold(0.0f64, |m, t| if t.abs() > m.abs() { *t } else { m });
            (records, json!({ "fits": fits }), t_final)
        }
        ExperimentKind::Ladder => {
            let s = cfg.ladder.as_ref().expect("validated");
            let site = loaded.site(&lat, &s.x, "ladder.x")?;
            let a = observable(&basis, site, s.nu_a)?;
            let coord = Some(lat.coord(site).to_vec());
            let mut records = Vec::new();
            let mut triangle = true;
            let mut shrink = Vec::new();
            for &big_r in &s.big_r {
                for &t in &s.t {
                    let mut reports = Vec::new();
                    for &nu in &s.nu {
                        let rep = truncation_ladder(&params, &state, &a, big_r, nu, t)?;
                        triangle &= rep.triangle_holds();
                        records.extend(rep.records(coord.clone()));
                        reports.push(rep);
                    }
                    reports.sort_by_key(|r| r.nu);
                    let strictly = |k: usize| reports.windows(2).all(|w| w[1].terms[k] < w[0].terms[k]);
                    shrink.push(json!({
                        "R": big_r,
                        "t": t,
                        "term1_decreasing_in_nu": strictly(0),
                        "term5_decreasing_in_nu": strictly(4),
                    }));
                }
            }
            let t_final = s.t.iter().fold(0.0f64, |m, t| if t.abs() > m.abs() { *t } else { m });
            (records, json!({ "triangle_holds": triangle, "nu_dependence": shrink }), t_final)
        }
        ExperimentKind::Verify => unreachable!("handled above"),
    };

    let evolved = prop.evolve(&state, t_final)?;
    let cap_weight = CapWeight {
        initial: cap_saturation_weight(&state),
        t_final,
        at_t_final: cap_saturation_weight(&evolved),
    };
    Ok(RunOutput {
        records,
        basis: Some(basis),
        density,
        cap_weight: Some(cap_weight),
        checks: Vec::new(),
        summary,
    })
}
