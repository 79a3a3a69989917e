//! JSON experiment configuration: parsing, validation, and resolution into
//! exact domain objects. Unknown keys are rejected; rationals are `"p/q"`
//! strings.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rational::{parse_rat, Rat};
use crate::space::{DiscreteSpace, JumpMeasure, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Moments,
    Converge,
    Oracle,
    Partitions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Fixed,
    Poissonized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    #[serde(default)]
    space: Option<RawSpace>,
    #[serde(default)]
    jump_measure: Option<RawJumpMeasure>,
    #[serde(default)]
    functions: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default)]
    words: Option<Vec<Vec<String>>>,
    /// Strictly increasing volume scale factors applied to the bulk cell.
    #[serde(default)]
    schedule: Option<Vec<String>>,
    /// rho in the particle-number rule N = round(rho * V).
    #[serde(default)]
    n_ratio: Option<String>,
    #[serde(default)]
    count_mode: Option<CountMode>,
    /// Explicit Poisson parameter; when absent, alpha = V.
    #[serde(default)]
    alpha: Option<String>,
    #[serde(default)]
    centered: Option<bool>,
    /// Ground-set size for partitions mode.
    #[serde(default)]
    partitions_n: Option<usize>,
    #[serde(default)]
    out: Option<String>,
    #[serde(default)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    cells: Vec<RawCell>,
    /// Cell whose mass is multiplied by the schedule's scale factors.
    #[serde(default)]
    bulk_cell: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    name: String,
    mass: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJumpMeasure {
    atoms: Vec<RawAtom>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    size: String,
    mass: String,
}

/// A fully validated experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub space: Option<DiscreteSpace>,
    /// Index of the bulk cell in `space`, when configured.
    pub bulk_cell: Option<usize>,
    pub jumps: Option<JumpMeasure>,
    pub functions: BTreeMap<String, TestFunction>,
    pub words: Vec<Vec<String>>,
    pub schedule: Vec<Rat>,
    pub n_ratio: Rat,
    pub count_mode: CountMode,
    pub alpha: Option<Rat>,
    pub centered: bool,
    pub partitions_n: Option<usize>,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })?;
        resolve(raw)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Look up a word's functions, in order.
    pub fn word_functions<'a>(&'a self, word: &[String]) -> Result<Vec<&'a TestFunction>> {
        word.iter()
            .map(|name| {
                self.functions
                    .get(name)
                    .ok_or_else(|| Error::Config(format!("word references unknown function {name:?}")))
            })
            .collect()
    }
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let mode = raw.mode;

    let (space, bulk_cell) = match raw.space {
        Some(rs) => {
            let mut cells = Vec::new();
            for cell in &rs.cells {
                cells.push((cell.name.clone(), parse_rat(&cell.mass)?));
            }
            let space = DiscreteSpace::new(cells).map_err(reclass_config)?;
            let bulk = match rs.bulk_cell {
                Some(name) => Some(
                    space
                        .cell_names()
                        .iter()
                        .position(|c| *c == name)
                        .ok_or_else(|| Error::Config(format!("bulk_cell {name:?} is not a cell")))?,
                ),
                None => None,
            };
            (Some(space), bulk)
        }
        None => (None, None),
    };

    let jumps = match raw.jump_measure {
        Some(rj) => {
            let mut atoms = Vec::new();
            for atom in &rj.atoms {
                atoms.push((parse_rat(&atom.size)?, parse_rat(&atom.mass)?));
            }
            Some(JumpMeasure::new(atoms).map_err(reclass_config)?)
        }
        None => None,
    };

    let mut functions = BTreeMap::new();
    if let Some(raw_fns) = raw.functions {
        let space = space
            .as_ref()
            .ok_or_else(|| Error::Config("functions require a space".into()))?;
        for (name, values) in raw_fns {
            let mut per_cell = Vec::with_capacity(space.num_cells());
            for cell in space.cell_names() {
                per_cell.push(match values.get(cell) {
                    Some(v) => parse_rat(v)?,
                    None => Rat::from_integer(0.into()), // unlisted cells are 0
                });
            }
            for cell in values.keys() {
                if !space.cell_names().contains(cell) {
                    return Err(Error::Config(format!(
                        "function {name:?} references unknown cell {cell:?}"
                    )));
                }
            }
            functions.insert(
                name,
                TestFunction::new(space, per_cell).map_err(reclass_config)?,
            );
        }
    }

    let words = raw.words.unwrap_or_default();
    for word in &words {
        if word.is_empty() {
            return Err(Error::Config("words must be nonempty".into()));
        }
        for name in word {
            if !functions.contains_key(name) {
                return Err(Error::Config(format!(
                    "word references undefined function {name:?}"
                )));
            }
        }
    }

    let schedule = match raw.schedule {
        Some(s) => {
            let parsed: Vec<Rat> = s.iter().map(|x| parse_rat(x)).collect::<Result<_>>()?;
            for pair in parsed.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(Error::Config("schedule must be strictly increasing".into()));
                }
            }
            if parsed.iter().any(|x| *x <= Rat::from_integer(0.into())) {
                return Err(Error::Config("schedule factors must be positive".into()));
            }
            parsed
        }
        None => Vec::new(),
    };

    let n_ratio = match raw.n_ratio {
        Some(r) => {
            let rho = parse_rat(&r)?;
            if rho <= Rat::from_integer(0.into()) {
                return Err(Error::Config("n_ratio must be positive".into()));
            }
            rho
        }
        None => Rat::from_integer(1.into()),
    };

    let alpha = raw.alpha.as_deref().map(parse_rat).transpose()?;

    // Per-mode requirements.
    match mode {
        Mode::Moments => {
            if space.is_none() || words.is_empty() {
                return Err(Error::Config("moments mode needs a space and words".into()));
            }
        }
        Mode::Converge => {
            if space.is_none() || words.is_empty() {
                return Err(Error::Config("converge mode needs a space and words".into()));
            }
            if schedule.len() < 3 {
                return Err(Error::Config(
                    "converge mode needs a schedule of at least 3 points for order estimation"
                        .into(),
                ));
            }
            if bulk_cell.is_none() {
                return Err(Error::Config("converge mode needs a bulk_cell".into()));
            }
        }
        Mode::Oracle => {
            if space.is_none() || functions.is_empty() {
                return Err(Error::Config("oracle mode needs a space and functions".into()));
            }
        }
        Mode::Partitions => {
            if raw.partitions_n.is_none() {
                return Err(Error::Config("partitions mode needs partitions_n".into()));
            }
        }
    }

    Ok(ExperimentConfig {
        mode,
        space,
        bulk_cell,
        jumps,
        functions,
        words,
        schedule,
        n_ratio,
        count_mode: raw.count_mode.unwrap_or(CountMode::Fixed),
        alpha,
        centered: raw.centered.unwrap_or(false),
        partitions_n: raw.partitions_n,
        out: raw.out,
        format: raw.format.unwrap_or(OutputFormat::Csv),
    })
}

fn reclass_config(e: Error) -> Error {
    match e {
        Error::Usage(msg) => Error::Config(msg),
        other => other,
    }
}
