//! Run configuration: JSON schema, validation and conversion into core objects.

use std::path::Path;
use std::sync::Arc;

use rothe_px_core::rothe::{Forcing, RunOptions};
use rothe_px_core::stabilization::{Sandwich, StabilizeOptions};
use rothe_px_core::{ExponentField, Mesh, MeshFunction, ReactionTerm, SolverOptions, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::expr::{FieldExpr, GrowthExpr, TimeProfile};
use crate::registry;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Interval { cells: usize },
    UnitSquare { cells: usize },
}

impl MeshSpec {
    pub fn cells(&self) -> usize {
        match self {
            Self::Interval { cells } | Self::UnitSquare { cells } => *cells,
        }
    }

    fn with_cells(&self, cells: usize) -> Self {
        match self {
            Self::Interval { .. } => Self::Interval { cells },
            Self::UnitSquare { .. } => Self::UnitSquare { cells },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub space: FieldExpr,
    #[serde(default)]
    pub time: TimeProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundsSpec {
    None,
    /// `|f(x, u)| ≤ L0(|u|)`
    TwoSided(GrowthExpr),
    /// `L1(u) ≤ f(x, u) ≤ L2(u)`
    Ordered { lower: GrowthExpr, upper: GrowthExpr },
}

/// `f(x, u) = g(x) + Σ c uᵏ`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSpec {
    pub source: FieldExpr,
    /// `[c, k]` pairs with integer `k ≥ 1`.
    pub terms: Vec<(f64, i32)>,
    pub bounds: BoundsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    None,
    Source(SourceSpec),
    Reaction(ReactionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub initial: FieldExpr,
    pub forcing: ForcingSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemKind {
    Evolution(EvolutionSpec),
    /// `−Δ_{p(x)} w = λ` for each level.
    Torsion { levels: Vec<f64> },
    /// `u − λΔ_{p(x)} u = g`
    Resolvent { lambda: f64, rhs: FieldExpr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub mesh: MeshSpec,
    pub exponent: FieldExpr,
    pub kind: ProblemKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SandwichSpec {
    Off,
    Auto,
    Mu(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeConfig {
    pub threshold: f64,
    pub sandwich: SandwichSpec,
}

impl Default for StabilizeConfig {
    fn default() -> Self {
        Self { threshold: 1e-5, sandwich: SandwichSpec::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Bundled problem id; exclusive with `problem`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    /// Overrides applied after registry expansion.
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seed: u64,
    /// Write `snapshot_<n>.csv` every this many steps (and at `N`); 0 disables snapshots.
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub stabilize: StabilizeConfig,
    #[serde(default = "default_refinements")]
    pub refinements: usize,
}

fn default_refinements() -> usize {
    3
}

impl RunConfig {
    pub fn inline(problem: ProblemSpec) -> Self {
        Self::with_source(None, Some(problem))
    }

    pub fn from_registry(id: &str) -> Self {
        Self::with_source(Some(id.to_owned()), None)
    }

    fn with_source(registry: Option<String>, problem: Option<ProblemSpec>) -> Self {
        Self {
            registry,
            problem,
            horizon: None,
            steps: None,
            cells: None,
            solver: SolverConfig::default(),
            seed: 0,
            snapshot_stride: 0,
            stabilize: StabilizeConfig::default(),
            refinements: default_refinements(),
        }
    }

    /// Replaces a registry id by its inline problem and folds the overrides into it.
    pub fn expand(&self) -> Result<Self, CliError> {
        let mut problem = match (&self.registry, &self.problem) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `registry` or `problem`, not both".into())),
            (None, None) => return Err(CliError::Config("missing `registry` or `problem`".into())),
            (Some(id), None) => registry::lookup(id)?.problem.expect("registry entries are inline"),
            (None, Some(p)) => p.clone(),
        };
        if let Some(cells) = self.cells {
            problem.mesh = problem.mesh.with_cells(cells);
        }
        if let ProblemKind::Evolution(ev) = &mut problem.kind {
            if let Some(t) = self.horizon {
                ev.horizon = t;
            }
            if let Some(n) = self.steps {
                ev.steps = n;
            }
        } else if self.horizon.is_some() || self.steps.is_some() {
            return Err(CliError::Config("`T` and `N` apply only to evolution problems".into()));
        }
        let out = Self { registry: None, problem: Some(problem), horizon: None, steps: None, cells: None, ..self.clone() };
        out.validate()?;
        Ok(out)
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem.as_ref().expect("expanded config")
    }

    fn validate(&self) -> Result<(), CliError> {
        let p = self.problem();
        if p.mesh.cells() == 0 {
            return Err(CliError::Config("cells must be ≥ 1".into()));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(CliError::Config("solver.tolerance must be positive".into()));
        }
        if self.solver.max_iterations == 0 {
            return Err(CliError::Config("solver.max_iterations must be ≥ 1".into()));
        }
        if !(self.stabilize.threshold > 0.0) {
            return Err(CliError::Config("stabilize.threshold must be positive".into()));
        }
        if let SandwichSpec::Mu(mu) = self.stabilize.sandwich {
            if !(mu > 0.0) {
                return Err(CliError::Config("stabilize.sandwich.mu must be positive".into()));
            }
        }
        match &p.kind {
            ProblemKind::Evolution(ev) => {
                if ev.steps == 0 {
                    return Err(CliError::Config("N must be ≥ 1".into()));
                }
                if !(ev.horizon > 0.0) || !ev.horizon.is_finite() {
                    return Err(CliError::Config("T must be positive".into()));
                }
                if let ForcingSpec::Reaction(r) = &ev.forcing {
                    if let Some(k) = r.terms.iter().map(|t| t.1).find(|&k| k < 1) {
                        return Err(CliError::Config(format!("reaction power {k} must be ≥ 1")));
                    }
                }
            }
            ProblemKind::Torsion { levels } => {
                if levels.is_empty() || levels.iter().any(|&l| !(l > 0.0)) {
                    return Err(CliError::Config("torsion levels must be a nonempty list of positive numbers".into()));
                }
            }
            ProblemKind::Resolvent { lambda, .. } => {
                if !(*lambda > 0.0) {
                    return Err(CliError::Config("lambda must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions<f64> {
        SolverOptions { max_iterations: self.solver.max_iterations, ..SolverOptions::default().with_tolerance(self.solver.tolerance) }
    }

    pub fn run_options(&self) -> RunOptions<f64> {
        RunOptions { solver: self.solver_options(), ..RunOptions::default() }
    }

    pub fn stabilize_options(&self) -> StabilizeOptions<f64> {
        StabilizeOptions {
            threshold: self.stabilize.threshold,
            sandwich: match self.stabilize.sandwich {
                SandwichSpec::Off => Sandwich::Off,
                SandwichSpec::Auto => Sandwich::Auto,
                SandwichSpec::Mu(mu) => Sandwich::Mu(mu),
            },
        }
    }

    pub fn evolution(&self) -> Result<&EvolutionSpec, CliError> {
        match &self.problem().kind {
            ProblemKind::Evolution(ev) => Ok(ev),
            _ => Err(CliError::Config("this subcommand needs an evolution problem".into())),
        }
    }
}

/// Parses a config, naming the offending key on schema errors.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Core objects built from an expanded problem.
pub struct Instance {
    pub mesh: Arc<Mesh<f64>>,
    pub exponent: ExponentField<f64>,
}

impl ProblemSpec {
    pub fn instance(&self) -> Result<Instance, CliError> {
        let mesh = match self.mesh {
            MeshSpec::Interval { cells } => Mesh::interval(cells),
            MeshSpec::UnitSquare { cells } => Mesh::unit_square(cells),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let dim = mesh.dimension();
        let exponent = ExponentField::from_fn(&mesh, |x| self.exponent.eval(x, dim)).map_err(|e| CliError::Config(format!("exponent: {e}")))?;
        Ok(Instance { mesh, exponent })
    }

    pub fn dimension(&self) -> usize {
        match self.mesh {
            MeshSpec::Interval { .. } => 1,
            MeshSpec::UnitSquare { .. } => 2,
        }
    }
}

impl EvolutionSpec {
    pub fn grid(&self) -> Result<TimeGrid<f64>, CliError> {
        TimeGrid::new(self.horizon, self.steps).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn initial(&self, mesh: &Arc<Mesh<f64>>) -> MeshFunction<f64> {
        let dim = mesh.dimension();
        MeshFunction::from_fn_dirichlet(mesh, |x| self.initial.eval(x, dim))
    }

    pub fn forcing(&self, dim: usize) -> Forcing<f64> {
        match &self.forcing {
            ForcingSpec::None => Forcing::none(),
            ForcingSpec::Source(s) => {
                let s = s.clone();
                Forcing::source(move |t, x| s.time.eval(t) * s.space.eval(x, dim))
            }
            ForcingSpec::Reaction(r) => Forcing::reaction(r.reaction(dim)),
        }
    }

    /// The forcing as a `u`-dependent term for stationary problems; sources must be time-independent.
    pub fn stationary_reaction(&self, dim: usize) -> Result<Arc<ReactionTerm<f64>>, CliError> {
        match &self.forcing {
            ForcingSpec::None => Ok(Arc::new(ReactionTerm::zero())),
            ForcingSpec::Source(s) if s.time == TimeProfile::Constant => {
                let space = s.space.clone();
                Ok(Arc::new(ReactionTerm::source("source", move |x| space.eval(x, dim))))
            }
            ForcingSpec::Source(_) => Err(CliError::Config("stationary problems need a time-independent source".into())),
            ForcingSpec::Reaction(r) => Ok(Arc::new(r.reaction(dim))),
        }
    }
}

impl ReactionSpec {
    pub fn reaction(&self, dim: usize) -> ReactionTerm<f64> {
        let g = self.source.clone();
        let f = ReactionTerm::polynomial(self.label(), move |x| g.eval(x, dim), self.terms.clone());
        match &self.bounds {
            BoundsSpec::None => f,
            BoundsSpec::TwoSided(l0) => {
                let l0 = l0.clone();
                f.with_two_sided_bound(move |v| l0.eval(v))
            }
            BoundsSpec::Ordered { lower, upper } => {
                let (l1, l2) = (lower.clone(), upper.clone());
                f.with_ordered_bounds(move |v| l1.eval(v), move |v| l2.eval(v))
            }
        }
    }

    fn label(&self) -> String {
        let mut s = String::from("g(x)");
        for (c, k) in &self.terms {
            s.push_str(&format!(" + {c}·u^{k}"));
        }
        s
    }

    /// `q` when `f(u) = u^q` (zero source, one positive term), the setting of the blow-up energy.
    pub fn pure_power(&self) -> Option<f64> {
        match (self.source == FieldExpr::Constant(0.0), self.terms.as_slice()) {
            (true, [(c, k)]) if *c == 1.0 && *k > 1 => Some(*k as f64),
            _ => None,
        }
    }
}
