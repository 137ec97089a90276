use std::collections::BTreeMap;
use std::path::Path;

use inattention::beliefs::Belief;
use inattention::costs::{
    make_cost, make_finite_psi, CostFamily, CostModel, CostSpec, FinitePsiModel,
};
use inattention::menus::{Act, Menu};
use inattention::solver::DEFAULT_PROBE_SEED;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::CliError;

/// Grid settings of a problem file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Beliefs that must be grid points.
    #[serde(default)]
    pub extra_knots: Vec<Vec<f64>>,
}

fn default_resolution() -> usize {
    129
}

fn default_seed() -> u64 {
    DEFAULT_PROBE_SEED
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            resolution: default_resolution(),
            extra_knots: Vec::new(),
        }
    }
}

/// A complete problem: states, prior, cost, named menus and grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub states: Vec<String>,
    pub prior: Vec<f64>,
    pub cost: CostSpec,
    pub menus: BTreeMap<String, Vec<Act>>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Seed for the probe directions of hyperplane sets.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// The cost of a problem: a single measure or a finite family.
pub enum Model {
    Separable(CostModel),
    Finite(FinitePsiModel),
}

impl Model {
    pub fn separable(&self, command: &str) -> Result<&CostModel, CliError> {
        match self {
            Model::Separable(m) => Ok(m),
            Model::Finite(_) => Err(CliError::new(
                "UsageError",
                format!("{command} needs a single measure of uncertainty, not a finite family"),
            )),
        }
    }
}

fn parse_error(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::new("ParseError", format!("{field}: {message}"))
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("IoError", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse and validate; errors name the offending field and, for syntax
    /// and type errors, the line and column.
    pub fn parse(text: &str) -> Result<ProblemFile, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let problem: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "document".to_string()
            } else {
                path
            };
            parse_error(&field, e.into_inner())
        })?;
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<(), CliError> {
        let n = self.states.len();
        if n < 2 {
            return Err(parse_error("states", "need at least two states"));
        }
        if self.prior.len() != n {
            return Err(parse_error(
                "prior",
                format!("{} weights for {n} states", self.prior.len()),
            ));
        }
        Belief::new(self.prior.clone()).map_err(|e| parse_error("prior", e))?;
        if self.menus.is_empty() {
            return Err(parse_error("menus", "no menus defined"));
        }
        for (name, acts) in &self.menus {
            if acts.is_empty() {
                return Err(parse_error(&format!("menus.{name}"), "menu is empty"));
            }
            for (i, a) in acts.iter().enumerate() {
                if a.utilities.len() != n {
                    return Err(parse_error(
                        &format!("menus.{name}[{i}].utilities"),
                        format!("{} utilities for {n} states", a.utilities.len()),
                    ));
                }
            }
        }
        self.knots()?;
        Ok(())
    }

    pub fn prior_belief(&self) -> Result<Belief, CliError> {
        Belief::new(self.prior.clone()).map_err(|e| parse_error("prior", e))
    }

    pub fn knots(&self) -> Result<Vec<Belief>, CliError> {
        self.grid
            .extra_knots
            .iter()
            .enumerate()
            .map(|(i, k)| {
                Belief::new(k.clone())
                    .map_err(|e| parse_error(&format!("grid.extra_knots[{i}]"), e))
            })
            .collect()
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let prior = self.prior_belief()?;
        let built = if self.cost.family == CostFamily::FiniteMax {
            make_finite_psi(&self.cost, &prior).map(Model::Finite)
        } else {
            make_cost(&self.cost, &prior).map(Model::Separable)
        };
        built.map_err(|e| parse_error("cost", format!("{}: {e}", e.kind())))
    }

    pub fn menu(&self, name: &str) -> Result<Menu, CliError> {
        let acts = self.menus.get(name).ok_or_else(|| {
            CliError::new(
                "UnknownMenu",
                format!(
                    "no menu named {name:?}; defined: {}",
                    self.menus.keys().cloned().collect::<Vec<_>>().join(", ")
                ),
            )
        })?;
        Menu::new(acts.clone()).map_err(|e| parse_error(&format!("menus.{name}"), e))
    }

    /// The two-state example with a kink at the prior and the acts
    /// `a = (-1.3125, 1.1875)` and `b = (1.1875, -1.3125)`.
    pub fn sec33() -> ProblemFile {
        let zero = Act::new("0", vec![0.0, 0.0]);
        let a = Act::new("a", vec![-1.3125, 1.1875]);
        let b = Act::new("b", vec![1.1875, -1.3125]);
        let mut menus = BTreeMap::new();
        menus.insert("zero".into(), vec![zero.clone()]);
        menus.insert("FA".into(), vec![zero.clone(), a.clone()]);
        menus.insert("FB".into(), vec![zero.clone(), b.clone()]);
        menus.insert("union".into(), vec![zero, a, b]);
        ProblemFile {
            states: vec!["w1".into(), "w2".into()],
            prior: vec![0.5, 0.5],
            cost: CostSpec::kinked_abs_quad(1.0, 1.0, None),
            menus,
            grid: GridSpec {
                resolution: 257,
                extra_knots: Vec::new(),
            },
            seed: DEFAULT_PROBE_SEED,
        }
    }

    /// Two measures, `0` and `(p̄ - ½)² - 0.1`, with the example acts scaled
    /// by four so that full information is optimal and the second binds.
    pub fn sec5() -> ProblemFile {
        let zero = Act::new("0", vec![0.0, 0.0]);
        let mut menus = BTreeMap::new();
        menus.insert("zero".into(), vec![zero.clone()]);
        menus.insert(
            "Fstar".into(),
            vec![
                zero,
                Act::new("4a", vec![-5.25, 4.75]),
                Act::new("4b", vec![4.75, -5.25]),
            ],
        );
        ProblemFile {
            states: vec!["w1".into(), "w2".into()],
            prior: vec![0.5, 0.5],
            cost: CostSpec::new(
                CostFamily::FiniteMax,
                json!({"components": [
                    {"type": "constant", "params": {"value": 0.0}},
                    {"type": "quadratic", "params": {"scale": 1.0}, "offset": -0.1}
                ]}),
            ),
            menus,
            grid: GridSpec {
                resolution: 129,
                extra_knots: Vec::new(),
            },
            seed: DEFAULT_PROBE_SEED,
        }
    }
}
