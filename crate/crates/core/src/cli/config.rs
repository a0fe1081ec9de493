//! Run configuration: a TOML file with `[system]`, `[grid]`, `[experiment]`,
//! `[schedule]`, `[solver]` and `[output]` sections. Unknown keys are errors.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::oracle::LinearSpec;
use crate::registry::builtin_system;
use crate::solver::SolverOptions;
use crate::system::{DomainBox, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemChoice {
    Builtin { name: String },
    Linear(LinearConfig),
}

/// Scalar linear system `x = a·x + λ∫[b·x + c·G(ξ,s)·u]` on a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConfig {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub rho: f64,
    pub kernel: KernelShape,
    pub kernel_scale: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `G ≡ 1`.
    Constant,
    /// `G = exp(−‖ξ − s‖)`.
    ExpDistance,
    /// `G = cos(‖ξ − s‖)`.
    CosDistance,
}

impl KernelShape {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "constant" => Some(Self::Constant),
            "exp_distance" => Some(Self::ExpDistance),
            "cos_distance" => Some(Self::CosDistance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: SystemChoice,
    /// Grid cells per axis; a single entry applies to every axis.
    pub grid_cells: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub sample_count: usize,
    pub ensemble_cap: usize,
    pub family_samples: usize,
    pub seed: u64,
    /// `None`: estimated from averaged sampled controls.
    pub r_star: Option<f64>,
    pub tau_cap: Option<f64>,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub out_dir: PathBuf,
    pub emit: Emit,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| Error::validation(format!("config is not valid TOML: {}", e.message())))?;
        let mut root = Section::new("", root);
        let mut system = root.section("system")?;
        let mut grid = root.section("grid")?;
        let mut experiment = root.section("experiment")?;
        let mut schedule = root.section("schedule")?;
        let mut solver = root.section("solver")?;
        let mut output = root.section("output")?;
        root.finish()?;

        let system_choice = parse_system(&mut system)?;
        system.finish()?;

        let grid_cells = match grid.take("cells") {
            None => vec![256],
            Some(Value::Integer(n)) => vec![positive_usize("grid.cells", n)?],
            Some(Value::Array(items)) if !items.is_empty() => items
                .into_iter()
                .map(|v| match v {
                    Value::Integer(n) => positive_usize("grid.cells", n),
                    _ => Err(field_error("grid.cells", "must contain positive integers")),
                })
                .collect::<Result<_>>()?,
            Some(_) => return Err(field_error("grid.cells", "must be a positive integer or a list of them")),
        };
        grid.finish()?;

        let epsilons = match experiment.take("epsilons") {
            None => return Err(field_error("experiment.epsilons", "is missing")),
            Some(Value::Array(items)) if !items.is_empty() => {
                items.into_iter().map(|v| number("experiment.epsilons", v)).collect::<Result<Vec<_>>>()?
            }
            Some(_) => return Err(field_error("experiment.epsilons", "must be a nonempty list of numbers")),
        };
        if let Some(bad) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(field_error("experiment.epsilons", &format!("must be positive, found {bad}")));
        }
        let sample_count = experiment.usize_or("sample_count", 200)?;
        if sample_count == 0 {
            return Err(field_error("experiment.sample_count", "must be at least 1"));
        }
        let ensemble_cap = experiment.usize_or("ensemble_cap", 100_000)?;
        if ensemble_cap == 0 {
            return Err(field_error("experiment.ensemble_cap", "must be at least 1"));
        }
        let family_samples = experiment.usize_or("family_samples", 2000)?;
        let seed = experiment.usize_or("seed", 0)? as u64;
        experiment.finish()?;

        let r_star = schedule.positive_opt("r_star")?;
        let tau_cap = schedule.positive_opt("tau_cap")?;
        schedule.finish()?;

        let defaults = SolverOptions::default();
        let solver_tol = solver.positive_opt("tol")?.unwrap_or(defaults.tol);
        let solver_max_iter = solver.usize_or("max_iter", defaults.max_iter)?;
        if solver_max_iter == 0 {
            return Err(field_error("solver.max_iter", "must be at least 1"));
        }
        solver.finish()?;

        let out_dir = match output.take("dir") {
            None => PathBuf::from("results"),
            Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
            Some(_) => return Err(field_error("output.dir", "must be a nonempty string")),
        };
        let emit = Emit { csv: output.bool_or("csv", true)?, json: output.bool_or("json", true)?, svg: output.bool_or("svg", true)? };
        output.finish()?;

        Ok(Self {
            system: system_choice,
            grid_cells,
            epsilons,
            sample_count,
            ensemble_cap,
            family_samples,
            seed,
            r_star,
            tau_cap,
            solver_tol,
            solver_max_iter,
            out_dir,
            emit,
        })
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions { tol: self.solver_tol, max_iter: self.solver_max_iter }
    }

    pub fn build_system(&self) -> Result<SystemSpec> {
        match &self.system {
            SystemChoice::Builtin { name } => builtin_system(name),
            SystemChoice::Linear(cfg) => {
                let spec = cfg.spec()?;
                spec.validate()?;
                Ok(spec.system(&cfg.name))
            }
        }
    }

    /// Cells per axis for a domain of dimension `k`.
    pub fn cells_for(&self, k: usize) -> Result<Vec<usize>> {
        match self.grid_cells.len() {
            1 => Ok(vec![self.grid_cells[0]; k]),
            n if n == k => Ok(self.grid_cells.clone()),
            n => Err(field_error("grid.cells", &format!("has {n} entries for a {k}-dimensional domain"))),
        }
    }
}

impl LinearConfig {
    pub fn spec(&self) -> Result<LinearSpec> {
        let domain = DomainBox::new(self.lower.clone(), self.upper.clone())
            .map_err(|e| field_error("system.lower/system.upper", &e.to_string()))?;
        let c = self.kernel_scale;
        let kernel: crate::oracle::ControlGain = match self.kernel {
            KernelShape::Constant => Arc::new(move |_, _, out| out[0] = c),
            KernelShape::ExpDistance => Arc::new(move |xi, s, out| out[0] = c * (-dist(xi, s)).exp()),
            KernelShape::CosDistance => Arc::new(move |xi, s, out| out[0] = c * dist(xi, s).cos()),
        };
        Ok(LinearSpec {
            a: self.a,
            b: self.b,
            lambda: self.lambda,
            rho: self.rho,
            state_dim: 1,
            control_dim: 1,
            domain,
            kernel,
        })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn parse_system(sec: &mut Section) -> Result<SystemChoice> {
    let kind = match sec.take("kind") {
        None => "builtin".to_string(),
        Some(Value::String(s)) => s,
        Some(_) => return Err(field_error("system.kind", "must be \"builtin\" or \"linear\"")),
    };
    let name = match sec.take("name") {
        Some(Value::String(s)) if !s.is_empty() => Some(s),
        Some(_) => return Err(field_error("system.name", "must be a nonempty string")),
        None => None,
    };
    match kind.as_str() {
        "builtin" => {
            let name = name.ok_or_else(|| field_error("system.name", "is missing"))?;
            builtin_system(&name)?;
            Ok(SystemChoice::Builtin { name })
        }
        "linear" => {
            let kernel = match sec.take("kernel") {
                None => KernelShape::Constant,
                Some(Value::String(s)) => KernelShape::parse(&s).ok_or_else(|| {
                    field_error("system.kernel", "must be one of \"constant\", \"exp_distance\", \"cos_distance\"")
                })?,
                Some(_) => return Err(field_error("system.kernel", "must be a string")),
            };
            let lower = sec.numbers_or("lower", vec![0.0])?;
            let upper = sec.numbers_or("upper", vec![1.0])?;
            Ok(SystemChoice::Linear(LinearConfig {
                name: name.unwrap_or_else(|| "linear".into()),
                a: sec.number_or("a", 0.0)?,
                b: sec.number_or("b", 0.0)?,
                lambda: sec.required_number("lambda")?,
                rho: sec.positive_opt("rho")?.unwrap_or(1.0),
                kernel,
                kernel_scale: sec.number_or("kernel_scale", 1.0)?,
                lower,
                upper,
            }))
        }
        other => Err(field_error("system.kind", &format!("must be \"builtin\" or \"linear\", got \"{other}\""))),
    }
}

fn field_error(field: &str, problem: &str) -> Error {
    Error::Validation(format!("config field `{field}` {problem}"))
}

fn positive_usize(field: &str, n: i64) -> Result<usize> {
    if n <= 0 {
        return Err(field_error(field, &format!("must be positive, got {n}")));
    }
    Ok(n as usize)
}

fn number(field: &str, v: Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(x),
        Value::Integer(n) => Ok(n as f64),
        _ => Err(field_error(field, "must be a number")),
    }
}

/// A table plus its dotted path, consumed key by key so that leftovers can be
/// reported as unknown.
struct Section {
    path: String,
    table: Table,
}

impl Section {
    fn new(path: &str, table: Table) -> Self {
        Self { path: path.to_string(), table }
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn section(&mut self, key: &str) -> Result<Section> {
        match self.take(key) {
            None => Ok(Section::new(key, Table::new())),
            Some(Value::Table(t)) => Ok(Section::new(key, t)),
            Some(_) => Err(field_error(key, "must be a table")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(k) => Err(field_error(&self.field(k), "is not a recognised setting")),
        }
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let field = self.field(key);
        self.take(key).map_or(Ok(default), |v| number(&field, v))
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        let field = self.field(key);
        self.take(key).map_or_else(|| Err(field_error(&field, "is missing")), |v| number(&field, v))
    }

    fn positive_opt(&mut self, key: &str) -> Result<Option<f64>> {
        let field = self.field(key);
        match self.take(key) {
            None => Ok(None),
            Some(v) => {
                let x = number(&field, v)?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(field_error(&field, &format!("must be positive, got {x}")));
                }
                Ok(Some(x))
            }
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        let field = self.field(key);
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(n)) if n >= 0 => Ok(n as usize),
            Some(_) => Err(field_error(&field, "must be a nonnegative integer")),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        let field = self.field(key);
        match self.take(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(_) => Err(field_error(&field, "must be true or false")),
        }
    }

    fn numbers_or(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        let field = self.field(key);
        match self.take(key) {
            None => Ok(default),
            Some(Value::Array(items)) => items.into_iter().map(|v| number(&field, v)).collect(),
            Some(_) => Err(field_error(&field, "must be a list of numbers")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIN1: &str = r#"
[system]
name = "LIN1"

[grid]
cells = 128

[experiment]
epsilons = [0.4, 0.2, 0.1]
sample_count = 50
seed = 7

[schedule]
r_star = 0.5
"#;

    #[test]
    fn parses_builtin_config() {
        let c = RunConfig::parse(LIN1).unwrap();
        assert_eq!(c.system, SystemChoice::Builtin { name: "LIN1".into() });
        assert_eq!(c.epsilons, vec![0.4, 0.2, 0.1]);
        assert_eq!(c.grid_cells, vec![128]);
        assert_eq!(c.seed, 7);
        assert_eq!(c.r_star, Some(0.5));
        assert_eq!(c.tau_cap, None);
        assert_eq!(c.ensemble_cap, 100_000);
        assert!(c.emit.csv && c.emit.json && c.emit.svg);
    }

    #[test]
    fn missing_system_name_names_the_field() {
        let err = RunConfig::parse("[experiment]\nepsilons = [0.1]\n").unwrap_err();
        assert!(err.to_string().contains("system.name"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for (text, field) in [
            ("[system]\nname='LIN1'\n[experiment]\nepsilons=[0.1, -1.0]", "experiment.epsilons"),
            ("[system]\nname='LIN1'\n[experiment]\nepsilons=[0.1]\nsample_count=0", "experiment.sample_count"),
            ("[system]\nname='LIN1'\n[experiment]\nepsilons=[0.1]\ntypo=1", "experiment.typo"),
            ("[system]\nname='LIN1'\n[experiment]\nepsilons=[0.1]\n[grid]\ncells=0", "grid.cells"),
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.to_string().contains(field), "{text}: {err}");
        }
        assert!(matches!(
            RunConfig::parse("[system]\nname='NOPE'\n[experiment]\nepsilons=[0.1]"),
            Err(Error::UnknownSystem(_))
        ));
    }

    #[test]
    fn inline_linear_system() {
        let text = "[system]\nkind='linear'\na=0.1\nlambda=0.1\n[experiment]\nepsilons=[0.2]";
        let c = RunConfig::parse(text).unwrap();
        let sys = c.build_system().unwrap();
        assert_eq!(sys.name, "linear");
        assert_eq!(sys.gamma0_bound, 0.1);
        assert!(RunConfig::parse("[system]\nkind='linear'\n[experiment]\nepsilons=[0.2]")
            .unwrap_err()
            .to_string()
            .contains("system.lambda"));
    }
}
