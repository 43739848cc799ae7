//! Sweep specification files (JSON or TOML) and the selectors they contain.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gaussent::criteria::{Criterion, SearchConfig};
use gaussent::partition::{enumerate_partitions, ModePartition, PartitionClass};
use gaussent::StateSpec;

/// Which parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Transmission of mode A.
    EtaA,
    /// Common transmission of the modes listed in `lossy_modes`.
    EtaMulti,
    /// Mixing weight of the vacuum-mixed family.
    P,
    /// Squeezing strength.
    R,
}

/// Monotone sweep grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepGrid {
    pub variable: SweepVariable,
    /// Mode letters receiving loss for `eta_multi`, e.g. `["A", "B"]`.
    #[serde(default)]
    pub lossy_modes: Vec<String>,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            bail!("sweep grid needs at least 2 points");
        }
        if !(self.stop > self.start) {
            bail!("sweep grid must be increasing (start < stop)");
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

/// Partition selection: everything, an explicit list, or one class.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSelector {
    All(String),
    List(Vec<String>),
    Class { class: String },
}

impl Default for PartitionSelector {
    fn default() -> Self {
        PartitionSelector::All("all".to_string())
    }
}

impl PartitionSelector {
    /// Resolve against a state with the given mode letters.
    pub fn resolve(&self, labels: &[char]) -> Result<Vec<ModePartition>> {
        match self {
            PartitionSelector::All(word) => {
                if word != "all" {
                    bail!("unknown partition selector {word:?} (expected \"all\", a list, or a class)");
                }
                Ok(enumerate_partitions(labels.len(), None)?)
            }
            PartitionSelector::List(items) => items
                .iter()
                .map(|s| {
                    ModePartition::parse_with_labels(s, labels)
                        .with_context(|| format!("partition {s:?}"))
                })
                .collect(),
            PartitionSelector::Class { class } => {
                let class = PartitionClass::parse(class)?;
                Ok(enumerate_partitions(labels.len(), Some(&class))?)
            }
        }
    }
}

/// Reduction selection: none (full state), every subset of two or more
/// modes, or an explicit list of kept-mode letter groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReductionSelector {
    Word(String),
    List(Vec<String>),
}

impl Default for ReductionSelector {
    fn default() -> Self {
        ReductionSelector::Word("none".to_string())
    }
}

impl ReductionSelector {
    /// Kept-mode index sets; `None` entries denote the full state.
    pub fn resolve(&self, n_modes: usize) -> Result<Vec<Option<Vec<usize>>>> {
        let letters: Vec<char> = (0..n_modes).map(|m| (b'A' + m as u8) as char).collect();
        match self {
            ReductionSelector::Word(w) => match w.as_str() {
                "none" | "" => Ok(vec![None]),
                "all" => {
                    // full state first, then all proper subsets of >= 2 modes
                    let mut out: Vec<Option<Vec<usize>>> = vec![None];
                    let mut subsets: Vec<Vec<usize>> = Vec::new();
                    for bits in 1u32..(1 << n_modes) {
                        let subset: Vec<usize> =
                            (0..n_modes).filter(|m| bits & (1 << m) != 0).collect();
                        if subset.len() >= 2 && subset.len() < n_modes {
                            subsets.push(subset);
                        }
                    }
                    subsets.sort_by_key(|s| (usize::MAX - s.len(), s.clone()));
                    out.extend(subsets.into_iter().map(Some));
                    Ok(out)
                }
                other => bail!("unknown reduction selector {other:?}"),
            },
            ReductionSelector::List(items) => {
                let mut out = Vec::new();
                for item in items {
                    let mut keep = Vec::new();
                    for ch in item.chars() {
                        let up = ch.to_ascii_uppercase();
                        match letters.iter().position(|&l| l == up) {
                            Some(idx) => keep.push(idx),
                            None => bail!("unknown mode {ch:?} in reduction {item:?}"),
                        }
                    }
                    if keep.is_empty() {
                        bail!("empty reduction");
                    }
                    keep.sort_unstable();
                    keep.dedup();
                    out.push(Some(keep));
                }
                Ok(out)
            }
        }
    }
}

fn default_criteria() -> Vec<Criterion> {
    vec![Criterion::QfiWitness, Criterion::Squeezing, Criterion::Ppt]
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A full sweep description, loadable from JSON or TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub state: StateSpec,
    pub sweep: SweepGrid,
    #[serde(default)]
    pub partitions: PartitionSelector,
    #[serde(default)]
    pub reductions: ReductionSelector,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default)]
    pub out: Option<String>,
}

impl SweepSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading sweep spec {}", path.display()))?;
        let is_toml = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let spec: SweepSpec = if is_toml {
            toml::from_str(&text).with_context(|| format!("parsing TOML {}", path.display()))?
        } else {
            serde_json::from_str(&text)
                .with_context(|| format!("parsing JSON {}", path.display()))?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.values()?;
        match self.sweep.variable {
            SweepVariable::P => {
                if self.state.family != gaussent::StateFamily::VacuumMixedEpr {
                    bail!("p sweeps require the vacuum_mixed_epr family");
                }
            }
            SweepVariable::EtaMulti => {
                if self.sweep.lossy_modes.is_empty() {
                    bail!("eta_multi sweeps need lossy_modes");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Mode indices receiving loss in an `eta_multi` sweep.
    pub fn lossy_mode_indices(&self) -> Result<Vec<usize>> {
        let n = self.state.n_modes();
        let mut out = Vec::new();
        for item in &self.sweep.lossy_modes {
            for ch in item.chars() {
                let up = ch.to_ascii_uppercase();
                let idx = (up as u8).wrapping_sub(b'A') as usize;
                if idx >= n {
                    bail!("lossy mode {ch:?} out of range for {n} modes");
                }
                out.push(idx);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}
