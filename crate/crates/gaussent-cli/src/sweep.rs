//! Sweep engine: evaluate the selected criteria over a parameter grid,
//! reductions, and partitions, in parallel but with deterministic output
//! ordering.

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use gaussent::criteria::{evaluate, Criterion, SearchConfig};
use gaussent::partition::ModePartition;
use gaussent::states::reduce;
use gaussent::{CovarianceMatrix, StateSpec};

use crate::spec::{PartitionSelector, ReductionSelector, SweepSpec, SweepVariable};

/// One output row of a sweep or analysis.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub reduction: String,
    pub partition: String,
    pub criterion: String,
    pub value: f64,
    pub entangled: bool,
    pub certified: bool,
    pub direction: Vec<f64>,
}

fn mode_letters(n: usize) -> Vec<char> {
    (0..n).map(|m| (b'A' + m as u8) as char).collect()
}

/// A reduction together with its display label and partition list.
struct ReductionPlan {
    keep: Option<Vec<usize>>,
    label: String,
    letters: Vec<char>,
    partitions: Vec<ModePartition>,
}

fn plan_reductions(
    n_modes: usize,
    reductions: &ReductionSelector,
    partitions: &PartitionSelector,
) -> Result<Vec<ReductionPlan>> {
    let full_letters = mode_letters(n_modes);
    let mut plans = Vec::new();
    for keep in reductions.resolve(n_modes)? {
        let (letters, label) = match &keep {
            None => (full_letters.clone(), "-".to_string()),
            Some(keep) => {
                let letters: Vec<char> = keep.iter().map(|&m| full_letters[m]).collect();
                let label: String = letters.iter().collect();
                (letters, label)
            }
        };
        if letters.len() < 2 {
            bail!("reduction {label:?} keeps fewer than two modes; no partitions exist");
        }
        let partitions = partitions.resolve(&letters)?;
        plans.push(ReductionPlan {
            keep,
            label,
            letters,
            partitions,
        });
    }
    Ok(plans)
}

/// Evaluate all criteria over pre-built full states, one per grid value.
pub fn evaluate_states(
    states: &[(f64, CovarianceMatrix)],
    reductions: &ReductionSelector,
    partitions: &PartitionSelector,
    criteria: &[Criterion],
    search: &SearchConfig,
) -> Result<Vec<SweepRow>> {
    let n_modes = states
        .first()
        .map(|(_, g)| g.n_modes())
        .ok_or_else(|| anyhow!("empty sweep grid"))?;
    let plans = plan_reductions(n_modes, reductions, partitions)?;

    // reduced state per (grid, reduction)
    let mut reduced: Vec<Vec<CovarianceMatrix>> = Vec::with_capacity(states.len());
    for (_, full) in states {
        let mut row = Vec::with_capacity(plans.len());
        for plan in &plans {
            let gamma = match &plan.keep {
                None => full.clone(),
                Some(keep) => reduce(full, keep)?,
            };
            row.push(gamma);
        }
        reduced.push(row);
    }

    let mut tasks: Vec<(usize, usize, usize, usize)> = Vec::new();
    for ig in 0..states.len() {
        for (ir, plan) in plans.iter().enumerate() {
            for (ip, partition) in plan.partitions.iter().enumerate() {
                for (ic, criterion) in criteria.iter().enumerate() {
                    if *criterion == Criterion::Ppt && !partition.is_bipartition() {
                        continue;
                    }
                    let _ = (ip, ic);
                    tasks.push((ig, ir, ip, ic));
                }
            }
        }
    }

    let mut rows: Vec<((usize, usize, usize, usize), SweepRow)> = tasks
        .par_iter()
        .map(|&(ig, ir, ip, ic)| {
            let plan = &plans[ir];
            let partition = &plan.partitions[ip];
            let criterion = criteria[ic];
            let gamma = &reduced[ig][ir];
            let res = evaluate(gamma, partition, criterion, search)
                .with_context(|| {
                    format!(
                        "criterion {} on partition {} (reduction {})",
                        criterion.label(),
                        partition.label_with(&plan.letters),
                        plan.label
                    )
                })?;
            let direction = res
                .optimal_direction
                .as_ref()
                .map(|d| d.coeffs().iter().copied().collect())
                .unwrap_or_default();
            Ok((
                (ig, ir, ip, ic),
                SweepRow {
                    sweep_value: states[ig].0,
                    reduction: plan.label.clone(),
                    partition: partition.label_with(&plan.letters),
                    criterion: criterion.label().to_string(),
                    value: res.value,
                    entangled: res.entangled,
                    certified: res.certified,
                    direction,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

/// Build the full state for one value of the sweep variable.
pub fn state_at(spec: &SweepSpec, value: f64) -> Result<CovarianceMatrix> {
    let mut state = spec.state.clone();
    match spec.sweep.variable {
        SweepVariable::EtaA => {
            let mut etas = if state.eta.is_empty() {
                vec![1.0; state.n_modes()]
            } else {
                state.eta.clone()
            };
            etas[0] = value;
            state.eta = etas;
        }
        SweepVariable::EtaMulti => {
            let mut etas = if state.eta.is_empty() {
                vec![1.0; state.n_modes()]
            } else {
                state.eta.clone()
            };
            for idx in spec.lossy_mode_indices()? {
                etas[idx] = value;
            }
            state.eta = etas;
        }
        SweepVariable::P => state.p = value,
        SweepVariable::R => state.r = value,
    }
    Ok(state.build()?)
}

/// Run a sweep specification to completion.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.sweep.values()?;
    let mut states = Vec::with_capacity(grid.len());
    for &v in &grid {
        states.push((v, state_at(spec, v)?));
    }
    evaluate_states(
        &states,
        &spec.reductions,
        &spec.partitions,
        &spec.criteria,
        &spec.search,
    )
}

/// Evaluate a single prepared state (used by `analyze`). The `tag` value is
/// recorded in the `sweep_value` column.
pub fn analyze_state(
    gamma: &CovarianceMatrix,
    tag: f64,
    reductions: &ReductionSelector,
    partitions: &PartitionSelector,
    criteria: &[Criterion],
    search: &SearchConfig,
) -> Result<Vec<SweepRow>> {
    evaluate_states(
        &[(tag, gamma.clone())],
        reductions,
        partitions,
        criteria,
        search,
    )
}
