//! Experiment configuration files (TOML).
//!
//! Every table rejects unknown keys. Errors carry the key path and, when the
//! key exists in the source, its line and column.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use lrcone_core::dynamics::{Method, DEFAULT_KRYLOV_DIM, DEFAULT_KRYLOV_TOL};
use lrcone_core::{FockBasis, HamiltonianParams, Lattice, PotentialKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if !self.path.is_empty() {
            write!(f, "`{}`: ", self.path)?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Particle,
    Lr,
    Commutator,
    Ladder,
    Verify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Particle,
        ExperimentKind::Lr,
        ExperimentKind::Commutator,
        ExperimentKind::Ladder,
        ExperimentKind::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Particle => "particle",
            ExperimentKind::Lr => "lr",
            ExperimentKind::Commutator => "commutator",
            ExperimentKind::Ladder => "ladder",
            ExperimentKind::Verify => "verify",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub id: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub lattice: Option<LatticeSpec>,
    pub sector: Option<SectorSpec>,
    pub hamiltonian: Option<HamiltonianSpec>,
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub propagator: PropagatorSpec,
    pub particle: Option<ParticleSpec>,
    pub lr: Option<LrSpec>,
    pub commutator: Option<CommutatorSpec>,
    pub ladder: Option<LadderSpec>,
    pub verify: Option<VerifySpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub extents: Vec<i64>,
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub n_tot: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub j: f64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub form: PotentialKind,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    2.0
}

impl HamiltonianSpec {
    pub fn params(&self) -> HamiltonianParams {
        HamiltonianParams {
            j: self.j,
            u: self.u,
            mu: self.mu,
            form: self.form,
            p: self.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Fock,
    Spread,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    /// Site occupations for `fock`, in lattice order.
    pub occupations: Option<Vec<u16>>,
    /// Relative site weights for `spread`; uniform when absent.
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub mixed: bool,
    /// Declared density-control constant λ, checked before the run.
    pub lambda: Option<f64>,
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
}

fn default_eta_max() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSpec {
    #[serde(default)]
    pub method: MethodName,
    pub tol: Option<f64>,
    pub krylov_dim: Option<usize>,
}

impl PropagatorSpec {
    pub fn method(&self) -> Method {
        let dim = self.krylov_dim.unwrap_or(DEFAULT_KRYLOV_DIM);
        let tol = self.tol.unwrap_or(DEFAULT_KRYLOV_TOL);
        match self.method {
            MethodName::Auto => Method::Auto,
            MethodName::Dense => Method::Dense,
            MethodName::Krylov => Method::Krylov { dim, tol },
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    /// Center of the balls, as lattice coordinates.
    pub x: Vec<i64>,
    pub eta: f64,
    pub v: f64,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    /// The sweep grid is the product `r × big_r × t`.
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub big_r: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    /// Escaped weight outside `B_R(x)` on `tail_radii × tail_times`.
    #[serde(default)]
    pub tail_radii: Vec<f64>,
    #[serde(default)]
    pub tail_times: Vec<f64>,
    /// Per-site occupations at these times.
    #[serde(default)]
    pub site_times: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub front_threshold: f64,
}

fn default_delta0() -> f64 {
    0.5
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LrSpec {
    /// Support of the observable: a single site.
    pub x: Vec<i64>,
    /// Truncation level of `Π N_X Π`; the plain `N_X` when absent.
    pub nu_a: Option<usize>,
    pub big_r: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorSpec {
    pub a: Vec<i64>,
    pub b: Vec<Vec<i64>>,
    pub t: Vec<f64>,
    /// Adds the truncated dynamics with `Y = Λ` at this level.
    pub nu: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub x: Vec<i64>,
    pub nu_a: Option<usize>,
    pub big_r: Vec<f64>,
    pub nu: Vec<usize>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "default_random_functions")]
    pub random_functions: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            random_functions: default_random_functions(),
        }
    }
}

fn default_random_functions() -> usize {
    20
}

/// A parsed configuration together with its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub source: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn key_span(src: &str, path: &str) -> Option<Range<usize>> {
    let doc = toml::de::DeTable::parse(src).ok()?;
    let mut table = doc.get_ref();
    let mut parts = path.split('.').peekable();
    while let Some(part) = parts.next() {
        let (key, value) = table.get_key_value(part)?;
        if parts.peek().is_none() {
            return Some(key.span());
        }
        table = value.get_ref().as_table()?;
    }
    None
}

impl LoadedConfig {
    pub fn parse(source: &str) -> Result<Self, SchemaError> {
        let config: Config = toml::from_str(source).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let (l, c) = line_col(source, span.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            SchemaError {
                path: String::new(),
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        let loaded = LoadedConfig {
            config,
            source: source.to_string(),
        };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn read(path: &Path) -> Result<Self, SchemaError> {
        let source = std::fs::read_to_string(path).map_err(|e| SchemaError {
            path: String::new(),
            line: None,
            column: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&source)
    }

    /// A schema error anchored at `path` in the source.
    pub fn error_at(&self, path: &str, message: impl Into<String>) -> SchemaError {
        let pos = key_span(&self.source, path).map(|s| line_col(&self.source, s.start));
        SchemaError {
            path: path.to_string(),
            line: pos.map(|p| p.0),
            column: pos.map(|p| p.1),
            message: message.into(),
        }
    }

    fn require<'a, T>(&self, field: &'a Option<T>, path: &str) -> Result<&'a T, SchemaError> {
        field.as_ref().ok_or_else(|| SchemaError {
            path: path.to_string(),
            line: None,
            column: None,
            message: format!("missing table `[{path}]` required by experiment `{}`", self.config.experiment.name()),
        })
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>, SchemaError> {
        let spec = self.require(&self.config.lattice, "lattice")?;
        if let Some(d) = spec.d {
            if d != spec.extents.len() {
                return Err(self.error_at(
                    "lattice.d",
                    format!("d = {d} but {} extents were given", spec.extents.len()),
                ));
            }
        }
        Lattice::new(spec.extents.len(), &spec.extents)
            .map(Arc::new)
            .map_err(|e| self.error_at("lattice.extents", e.to_string()))
    }

    pub fn basis(&self) -> Result<Arc<FockBasis>, SchemaError> {
        let lat = self.lattice()?;
        let sector = self.require(&self.config.sector, "sector")?;
        FockBasis::enumerate(lat, sector.n_tot, sector.n_max)
            .map(Arc::new)
            .map_err(|e| self.error_at("sector", e.to_string()))
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianParams, SchemaError> {
        let spec = self.require(&self.config.hamiltonian, "hamiltonian")?;
        if !spec.j.is_finite() || !spec.u.is_finite() || !spec.mu.is_finite() {
            return Err(self.error_at("hamiltonian", "coefficients must be finite"));
        }
        if spec.form == PotentialKind::Pairwise && !(spec.p >= 1.0) {
            return Err(self.error_at("hamiltonian.p", format!("p must be at least 1, got {}", spec.p)));
        }
        Ok(spec.params())
    }

    pub fn site(&self, lat: &Lattice, coord: &[i64], path: &str) -> Result<usize, SchemaError> {
        if coord.len() != lat.dim() {
            return Err(self.error_at(
                path,
                format!("site {coord:?} has {} coordinates, lattice has d = {}", coord.len(), lat.dim()),
            ));
        }
        lat.index_of(coord)
            .ok_or_else(|| self.error_at(path, format!("site {coord:?} is outside the lattice")))
    }

    /// Checks that go beyond the shape of the file: required tables for the
    /// experiment kind, sites inside the lattice, positive grids, and
    /// `v > 2d|J|` for particle runs.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let cfg = &self.config;
        if cfg.id.is_empty() || cfg.id.contains(['/', '\\']) {
            return Err(self.error_at("id", "id must be a nonempty file-name-safe string"));
        }
        if cfg.experiment == ExperimentKind::Verify {
            return Ok(());
        }
        let basis = self.basis()?;
        let lat = basis.lattice();
        let params = self.hamiltonian()?;
        self.validate_state(&basis)?;
        if let Some(tol) = cfg.propagator.tol {
            if !(tol > 0.0) {
                return Err(self.error_at("propagator.tol", "tolerance must be positive"));
            }
        }
        if cfg.propagator.krylov_dim == Some(0) {
            return Err(self.error_at("propagator.krylov_dim", "Krylov dimension must be positive"));
        }
        let nonneg = |xs: &[f64], path: &str| -> Result<(), SchemaError> {
            match xs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                Some(x) => Err(self.error_at(path, format!("entries must be finite and nonnegative, got {x}"))),
                None => Ok(()),
            }
        };
        let nonempty = |xs: &[f64], path: &str| -> Result<(), SchemaError> {
            if xs.is_empty() {
                Err(self.error_at(path, "grid must not be empty"))
            } else {
                Ok(())
            }
        };
        let finite = |xs: &[f64], path: &str| -> Result<(), SchemaError> {
            match xs.iter().find(|x| !x.is_finite()) {
                Some(x) => Err(self.error_at(path, format!("entries must be finite, got {x}"))),
                None => Ok(()),
            }
        };
        match cfg.experiment {
            ExperimentKind::Particle => {
                let p = self.require(&cfg.particle, "particle")?;
                self.site(lat, &p.x, "particle.x")?;
                let kappa = 2.0 * lat.dim() as f64 * params.j.abs();
                if !(p.v > kappa) {
                    return Err(self.error_at(
                        "particle.v",
                        format!("velocity v = {} must exceed 2d|J| = {kappa}", p.v),
                    ));
                }
                if !(p.eta > 0.0) {
                    return Err(self.error_at("particle.eta", "eta must be positive"));
                }
                if !(p.delta0 > 0.0 && p.delta0 < 1.0) {
                    return Err(self.error_at("particle.delta0", "delta0 must lie in (0, 1)"));
                }
                if !(p.front_threshold > 0.0) {
                    return Err(self.error_at("particle.front_threshold", "threshold must be positive"));
                }
                nonneg(&p.r, "particle.r")?;
                nonneg(&p.big_r, "particle.big_r")?;
                finite(&p.t, "particle.t")?;
                nonneg(&p.tail_radii, "particle.tail_radii")?;
                finite(&p.tail_times, "particle.tail_times")?;
                finite(&p.site_times, "particle.site_times")?;
            }
            ExperimentKind::Lr => {
                let s = self.require(&cfg.lr, "lr")?;
                self.site(lat, &s.x, "lr.x")?;
                self.check_nu(s.nu_a, "lr.nu_a")?;
                nonempty(&s.big_r, "lr.big_r")?;
                nonneg(&s.big_r, "lr.big_r")?;
                nonempty(&s.t, "lr.t")?;
                finite(&s.t, "lr.t")?;
            }
            ExperimentKind::Commutator => {
                let s = self.require(&cfg.commutator, "commutator")?;
                let a = self.site(lat, &s.a, "commutator.a")?;
                if s.b.is_empty() {
                    return Err(self.error_at("commutator.b", "at least one site is required"));
                }
                for b in &s.b {
                    if self.site(lat, b, "commutator.b")? == a {
                        return Err(self.error_at("commutator.b", format!("site {b:?} overlaps the support of A")));
                    }
                }
                self.check_nu(s.nu, "commutator.nu")?;
                nonempty(&s.t, "commutator.t")?;
                finite(&s.t, "commutator.t")?;
            }
            ExperimentKind::Ladder => {
                let s = self.require(&cfg.ladder, "ladder")?;
                self.site(lat, &s.x, "ladder.x")?;
                self.check_nu(s.nu_a, "ladder.nu_a")?;
                if s.nu.is_empty() {
                    return Err(self.error_at("ladder.nu", "grid must not be empty"));
                }
                for &nu in &s.nu {
                    self.check_nu(Some(nu), "ladder.nu")?;
                }
                nonempty(&s.big_r, "ladder.big_r")?;
                nonneg(&s.big_r, "ladder.big_r")?;
                nonempty(&s.t, "ladder.t")?;
                finite(&s.t, "ladder.t")?;
            }
            ExperimentKind::Verify => {}
        }
        Ok(())
    }

    fn check_nu(&self, nu: Option<usize>, path: &str) -> Result<(), SchemaError> {
        let n_max = self.config.sector.as_ref().map_or(0, |s| s.n_max);
        match nu {
            Some(nu) if nu > n_max => Err(self.error_at(
                path,
                format!("truncation level {nu} exceeds the occupation cap {n_max}"),
            )),
            _ => Ok(()),
        }
    }

    fn validate_state(&self, basis: &FockBasis) -> Result<(), SchemaError> {
        let spec = self.require(&self.config.state, "state")?;
        let sites = basis.sites();
        match spec.kind {
            StateKind::Fock => {
                let occ = spec
                    .occupations
                    .as_ref()
                    .ok_or_else(|| self.error_at("state", "a fock state needs `occupations`"))?;
                if occ.len() != sites {
                    return Err(self.error_at(
                        "state.occupations",
                        format!("expected {sites} occupations, got {}", occ.len()),
                    ));
                }
                if spec.mixed {
                    return Err(self.error_at("state.mixed", "a fock state is always pure"));
                }
            }
            StateKind::Spread => {
                if let Some(w) = &spec.weights {
                    if w.len() != sites {
                        return Err(self.error_at(
                            "state.weights",
                            format!("expected {sites} weights, got {}", w.len()),
                        ));
                    }
                    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                        return Err(self.error_at("state.weights", "weights must be finite and nonnegative"));
                    }
                }
                if spec.occupations.is_some() {
                    return Err(self.error_at("state.occupations", "only fock states take occupations"));
                }
            }
        }
        if let Some(l) = spec.lambda {
            if !(l > 0.0) {
                return Err(self.error_at("state.lambda", "lambda must be positive"));
            }
        }
        if !(spec.eta_max > 0.0) {
            return Err(self.error_at("state.eta_max", "eta_max must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LR: &str = r#"
id = "t"
experiment = "lr"

[lattice]
extents = [6]

[sector]
n_tot = 2
n_max = 2

[hamiltonian]
j = 1.0
u = 0.5

[state]
kind = "spread"
mixed = true

[lr]
x = [0]
nu_a = 1
big_r = [1.0, 2.0]
t = [0.5]
"#;

    #[test]
    fn parses_minimal_lr() {
        let c = LoadedConfig::parse(LR).unwrap();
        assert_eq!(c.config.experiment, ExperimentKind::Lr);
        assert_eq!(c.basis().unwrap().dim(), 21);
        assert_eq!(c.hamiltonian().unwrap().form, PotentialKind::Onsite);
    }

    #[test]
    fn unknown_key_is_located() {
        let src = LR.replace("u = 0.5", "u = 0.5\nfoo = 1");
        let err = LoadedConfig::parse(&src).unwrap_err();
        assert_eq!(err.line, Some(15));
        assert!(err.message.contains("foo"), "{err}");
    }

    #[test]
    fn semantic_error_points_at_key() {
        let src = LR.replace("x = [0]", "x = [9]");
        let err = LoadedConfig::parse(&src).unwrap_err();
        assert_eq!(err.path, "lr.x");
        assert_eq!(err.line, Some(21));
        assert!(err.to_string().starts_with("line 21, column 1: `lr.x`"), "{err}");
    }

    #[test]
    fn missing_table_is_reported() {
        let src = LR.replace("[lr]", "[ladder]").replace("big_r = [1.0, 2.0]", "big_r = [1.0]\nnu = [1]");
        let err = LoadedConfig::parse(&src).unwrap_err();
        assert_eq!(err.path, "lr");
    }

    #[test]
    fn nu_above_cap_rejected() {
        let src = LR.replace("nu_a = 1", "nu_a = 3");
        assert_eq!(LoadedConfig::parse(&src).unwrap_err().path, "lr.nu_a");
    }
}
