//! Set partitions of mode indices and the block-decorrelated covariance
//! matrix built from them.
//!
//! Partitions are kept in canonical form: blocks sorted by their smallest
//! element, elements ascending within a block. Labels render modes as the
//! letters `A..L` separated by `|`, e.g. `C|D|AB`.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

/// Practical upper bound on the mode count for enumeration (Bell(12) is
/// already 4.2 million).
pub const MAX_ENUM_MODES: usize = 12;

const MODE_LETTERS: [char; 12] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L'];

/// Multiset of block sizes, e.g. `{1,1,2}` for a 1x1x2 partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionClass(Vec<usize>);

impl PartitionClass {
    /// Sizes are stored sorted ascending.
    pub fn new(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable();
        Self(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.iter().sum()
    }

    /// Parse a class written as `1x1x2` (or with `*` separators).
    pub fn parse(text: &str) -> Result<Self> {
        let sizes: Result<Vec<usize>> = text
            .split(['x', '*'])
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad class component {t:?}")))
            })
            .collect();
        let sizes = sizes?;
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("bad class {text:?}")));
        }
        Ok(Self::new(sizes))
    }
}

impl fmt::Display for PartitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Partition of the modes `{0..N-1}` into disjoint non-empty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModePartition {
    n_modes: usize,
    blocks: Vec<Vec<usize>>,
}

impl ModePartition {
    pub fn new(n_modes: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_modes];
        let mut total = 0usize;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".to_string()));
            }
            for &m in block {
                if m >= n_modes {
                    return Err(Error::IndexOutOfRange {
                        index: m,
                        n_modes,
                    });
                }
                if seen[m] {
                    return Err(Error::InvalidPartition(format!(
                        "mode {} appears twice",
                        MODE_LETTERS.get(m).copied().unwrap_or('?')
                    )));
                }
                seen[m] = true;
                total += 1;
            }
        }
        if total != n_modes {
            return Err(Error::PartitionMismatch {
                partition_modes: total,
                state_modes: n_modes,
            });
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { n_modes, blocks })
    }

    /// Parse a label like `A|BC` against the default letters of an N-mode
    /// state.
    pub fn parse(text: &str, n_modes: usize) -> Result<Self> {
        Self::parse_with_labels(text, &MODE_LETTERS[..n_modes.min(12)])
    }

    /// Parse against explicit mode letters, used for reduced states whose
    /// modes keep their original names (e.g. labels `[A, C, D]`).
    pub fn parse_with_labels(text: &str, labels: &[char]) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in text.split('|') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::InvalidPartition(format!("empty block in {text:?}")));
            }
            let mut block = Vec::new();
            for ch in part.chars() {
                let up = ch.to_ascii_uppercase();
                match labels.iter().position(|&l| l == up) {
                    Some(idx) => block.push(idx),
                    None => {
                        return Err(Error::InvalidPartition(format!(
                            "unknown mode {ch:?} in {text:?}"
                        )))
                    }
                }
            }
            blocks.push(block);
        }
        Self::new(labels.len(), blocks)
    }

    /// All modes in one block.
    pub fn trivial(n_modes: usize) -> Self {
        Self {
            n_modes,
            blocks: vec![(0..n_modes).collect()],
        }
    }

    /// Every mode its own block.
    pub fn singletons(n_modes: usize) -> Self {
        Self {
            n_modes,
            blocks: (0..n_modes).map(|m| vec![m]).collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_bipartition(&self) -> bool {
        self.blocks.len() == 2
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn class(&self) -> PartitionClass {
        PartitionClass::new(self.blocks.iter().map(|b| b.len()).collect())
    }

    /// Block index of each mode.
    pub fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0usize; self.n_modes];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &m in block {
                owner[m] = bi;
            }
        }
        owner
    }

    pub fn label(&self) -> String {
        self.label_with(&MODE_LETTERS[..self.n_modes.min(12)])
    }

    pub fn label_with(&self, labels: &[char]) -> String {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&m| labels[m]).collect::<String>())
            .collect();
        parts.join("|")
    }
}

impl fmt::Display for ModePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// All non-trivial set partitions (at least two blocks) in canonical order,
/// optionally restricted to one class. The count without a filter is
/// `Bell(N) - 1`.
pub fn enumerate_partitions(
    n_modes: usize,
    filter: Option<&PartitionClass>,
) -> Result<Vec<ModePartition>> {
    if n_modes == 0 || n_modes > MAX_ENUM_MODES {
        return Err(Error::TooManyModes {
            n_modes,
            max: MAX_ENUM_MODES,
        });
    }
    // Restricted growth strings: a[0] = 0, a[i] <= max(a[0..i]) + 1.
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n_modes];
    loop {
        let n_blocks = assignment.iter().copied().max().unwrap() + 1;
        if n_blocks >= 2 {
            let mut blocks = vec![Vec::new(); n_blocks];
            for (mode, &b) in assignment.iter().enumerate() {
                blocks[b].push(mode);
            }
            let p = ModePartition::new(n_modes, blocks)?;
            if filter.is_none_or(|c| p.class() == *c) {
                out.push(p);
            }
        }
        // next restricted growth string
        let mut i = n_modes;
        loop {
            if i == 1 {
                return Ok(sorted_canonical(out));
            }
            i -= 1;
            let cap = assignment[..i].iter().copied().max().unwrap() + 1;
            if assignment[i] < cap {
                assignment[i] += 1;
                for a in assignment.iter_mut().skip(i + 1) {
                    *a = 0;
                }
                break;
            }
        }
    }
}

fn sorted_canonical(mut parts: Vec<ModePartition>) -> Vec<ModePartition> {
    parts.sort_by(|a, b| {
        a.n_blocks()
            .cmp(&b.n_blocks())
            .reverse()
            .then_with(|| a.blocks.cmp(&b.blocks))
    });
    parts
}

/// Zero every covariance entry linking quadratures of different blocks,
/// producing the covariance of the product of the reduced block states.
pub fn project_block_diagonal(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
) -> Result<CovarianceMatrix> {
    if partition.n_modes() != gamma.n_modes() {
        return Err(Error::PartitionMismatch {
            partition_modes: partition.n_modes(),
            state_modes: gamma.n_modes(),
        });
    }
    let owner = partition.block_of();
    let dim = gamma.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        if owner[i / 2] == owner[j / 2] {
            gamma.matrix()[(i, j)]
        } else {
            0.0
        }
    });
    CovarianceMatrix::new(gamma.n_modes(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{analytic_covariance, StateFamily};

    #[test]
    fn canonical_ordering_ignores_block_order() {
        let a = ModePartition::parse("B|AC", 3).unwrap();
        let b = ModePartition::parse("AC|B", 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.label(), "AC|B");
    }

    #[test]
    fn parse_rejects_bad_labels() {
        assert!(ModePartition::parse("A|BE", 3).is_err());
        assert!(ModePartition::parse("A|A", 2).is_err());
        assert!(ModePartition::parse("A", 2).is_err()); // does not cover B
        assert!(ModePartition::parse("A||B", 2).is_err());
    }

    #[test]
    fn parse_with_reduced_labels() {
        let p = ModePartition::parse_with_labels("A|CD", &['A', 'C', 'D']).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 2]]);
        assert_eq!(p.label_with(&['A', 'C', 'D']), "A|CD");
    }

    #[test]
    fn two_mode_enumeration() {
        let parts = enumerate_partitions(2, None).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].label(), "A|B");
    }

    #[test]
    fn three_mode_enumeration() {
        let parts = enumerate_partitions(3, None).unwrap();
        let labels: Vec<String> = parts.iter().map(|p| p.label()).collect();
        assert_eq!(labels, vec!["A|B|C", "A|BC", "AB|C", "AC|B"]);
    }

    #[test]
    fn four_mode_class_counts() {
        let total = enumerate_partitions(4, None).unwrap();
        assert_eq!(total.len(), 14);
        let count = |class: &str| {
            enumerate_partitions(4, Some(&PartitionClass::parse(class).unwrap()))
                .unwrap()
                .len()
        };
        assert_eq!(count("1x1x1x1"), 1);
        assert_eq!(count("1x1x2"), 6);
        assert_eq!(count("1x3"), 4);
        assert_eq!(count("2x2"), 3);
    }

    #[test]
    fn enumeration_bounds() {
        assert!(enumerate_partitions(0, None).is_err());
        assert!(enumerate_partitions(13, None).is_err());
    }

    #[test]
    fn class_display_and_parse() {
        let c = PartitionClass::parse("2x1x1").unwrap();
        assert_eq!(c.to_string(), "1x1x2");
        assert_eq!(c.n_modes(), 4);
        assert!(PartitionClass::parse("1x0").is_err());
    }

    #[test]
    fn projection_trivial_partition_is_identity() {
        let g = analytic_covariance(StateFamily::Ghz3, 0.5, 0.8).unwrap();
        let p = ModePartition::trivial(3);
        let out = project_block_diagonal(&g, &p).unwrap();
        assert_eq!(out.matrix(), g.matrix());
    }

    #[test]
    fn projection_epr_bipartition() {
        let r: f64 = 0.61;
        let eta = 0.7;
        let g = analytic_covariance(StateFamily::TwoModeEpr, r, eta).unwrap();
        let p = ModePartition::parse("A|B", 2).unwrap();
        let out = project_block_diagonal(&g, &p).unwrap();
        let c = (2.0 * r).cosh();
        let da = (1.0 - eta) + eta * c;
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            0.5 * da,
            0.5 * da,
            0.5 * c,
            0.5 * c,
        ]));
        assert!((out.matrix() - expect).abs().max() < 1e-15);
    }

    #[test]
    fn projection_ghz_a_bc_masks_only_cross_blocks() {
        let g = analytic_covariance(StateFamily::Ghz3, 0.5, 1.0).unwrap();
        let p = ModePartition::parse("A|BC", 3).unwrap();
        let out = project_block_diagonal(&g, &p).unwrap();
        let m = out.matrix();
        let src = g.matrix();
        for i in 0..6 {
            for j in 0..6 {
                let cross = (i < 2) != (j < 2);
                if cross {
                    assert_eq!(m[(i, j)], 0.0);
                } else {
                    assert_eq!(m[(i, j)], src[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn projection_idempotent() {
        let g = analytic_covariance(StateFamily::Cluster4, 0.4, 0.65).unwrap();
        for p in enumerate_partitions(4, None).unwrap() {
            let once = project_block_diagonal(&g, &p).unwrap();
            let twice = project_block_diagonal(&once, &p).unwrap();
            assert_eq!(once.matrix(), twice.matrix());
        }
    }

    #[test]
    fn projection_refinement_zero_pattern() {
        let g = analytic_covariance(StateFamily::Cluster4, 0.4, 1.0).unwrap();
        let coarse = ModePartition::parse("AB|CD", 4).unwrap();
        let fine = ModePartition::parse("A|B|CD", 4).unwrap();
        let gc = project_block_diagonal(&g, &coarse).unwrap();
        let gf = project_block_diagonal(&g, &fine).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if gc.matrix()[(i, j)] == 0.0 && g.matrix()[(i, j)] != 0.0 {
                    assert_eq!(gf.matrix()[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn projection_outputs_physical() {
        let g = analytic_covariance(StateFamily::Cluster4, 0.55, 0.4).unwrap();
        for p in enumerate_partitions(4, None).unwrap() {
            let out = project_block_diagonal(&g, &p).unwrap();
            assert!(out.check_physical().physical, "partition {}", p.label());
        }
    }

    #[test]
    fn projection_rejects_mismatched_modes() {
        let g = CovarianceMatrix::vacuum(3);
        let p = ModePartition::parse("A|B", 2).unwrap();
        assert!(matches!(
            project_block_diagonal(&g, &p),
            Err(Error::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn partition_mode_count_oracle_matches_bell_numbers() {
        // Bell triangle oracle, independent of the enumerator.
        fn bell(n: usize) -> u64 {
            let mut row = vec![1u64];
            for _ in 1..=n {
                let mut next = vec![*row.last().unwrap()];
                for v in &row {
                    next.push(next.last().unwrap() + v);
                }
                row = next;
            }
            row[0]
        }
        for n in 1..=6 {
            let parts = enumerate_partitions(n, None).unwrap();
            assert_eq!(parts.len() as u64, bell(n) - 1, "n = {n}");
        }
    }
}
