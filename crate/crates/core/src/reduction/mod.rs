//! Bin packing and its translation into quadratic equations.
//!
//! An exact instance (items rⱼ, capacity B, N bins, every bin filled to
//! exactly B) maps onto the genus-zero equation
//! ∏ⱼ zⱼ⁻¹ [a,b^{rⱼ}] zⱼ · [a^N,b^B]⁻¹ = 1. Solutions correspond to sphere
//! certificates tiled by the coefficient discs, and the ribbon machinery in
//! [`tiling`] recovers the partition from any accepted certificate.

pub mod tiling;
mod witness;

pub use witness::{certificate_to_packing, packing_to_certificate};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::StandardForm;
use crate::words::{Alphabet, CyclicWord, Letter, Sign, Word};

/// Items, capacity and bin count. The `exact` flag distinguishes the
/// at-most-B question from the exactly-B one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinPackingInstance {
    pub items: Vec<u64>,
    #[serde(rename = "B")]
    pub bin_capacity: u64,
    #[serde(rename = "N")]
    pub bin_count: u64,
    pub exact: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance must have at least one item")]
    NoItems,
    #[error("items, capacity and bin count must be positive")]
    NonPositive,
}

impl BinPackingInstance {
    pub fn new(
        items: Vec<u64>,
        bin_capacity: u64,
        bin_count: u64,
        exact: bool,
    ) -> Result<BinPackingInstance, InstanceError> {
        if items.is_empty() {
            return Err(InstanceError::NoItems);
        }
        if bin_capacity == 0 || bin_count == 0 || items.iter().any(|&r| r == 0) {
            return Err(InstanceError::NonPositive);
        }
        Ok(BinPackingInstance { items, bin_capacity, bin_count, exact })
    }

    pub fn total(&self) -> u64 {
        self.items.iter().sum()
    }
}

/// A partition of the item indices (1-based) into bins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Blocks sorted internally and by smallest contained index.
    pub fn canonical(mut blocks: Vec<Vec<usize>>) -> Partition {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b.first().copied().unwrap_or(usize::MAX));
        Partition { blocks }
    }

    /// Checks that the blocks exactly cover 1..=k, pairwise disjointly, and
    /// that every block fills a bin exactly.
    pub fn validate_exact(&self, inst: &BinPackingInstance) -> Result<(), PartitionError> {
        let k = inst.items.len();
        if self.blocks.len() != inst.bin_count as usize {
            return Err(PartitionError::WrongBlockCount {
                found: self.blocks.len(),
                expected: inst.bin_count as usize,
            });
        }
        let mut seen = vec![false; k + 1];
        for block in &self.blocks {
            let mut sum = 0u64;
            for &j in block {
                if j == 0 || j > k {
                    return Err(PartitionError::BadIndex(j));
                }
                if seen[j] {
                    return Err(PartitionError::DuplicateIndex(j));
                }
                seen[j] = true;
                sum += inst.items[j - 1];
            }
            if sum != inst.bin_capacity {
                return Err(PartitionError::BadBlockSum { sum, capacity: inst.bin_capacity });
            }
        }
        if let Some(j) = (1..=k).find(|&j| !seen[j]) {
            return Err(PartitionError::MissingIndex(j));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition has {found} blocks, instance wants {expected} bins")]
    WrongBlockCount { found: usize, expected: usize },
    #[error("item index {0} out of range")]
    BadIndex(usize),
    #[error("item index {0} appears twice")]
    DuplicateIndex(usize),
    #[error("item index {0} is not assigned to any bin")]
    MissingIndex(usize),
    #[error("block sums to {sum}, capacity is {capacity}")]
    BadBlockSum { sum: u64, capacity: u64 },
}

/// Result of padding an instance with unit items so that inequalities become
/// equalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PaddingOutcome {
    Exact(BinPackingInstance),
    /// The items already exceed the total capacity; no exact (or at-most)
    /// packing can exist.
    Infeasible { deficit: i64 },
}

/// Appends t = N·B − Σrⱼ unit items and flags the instance exact. Answer
/// equivalent to the input: a packing with slack absorbs exactly the padding
/// units.
pub fn to_exact(inst: &BinPackingInstance) -> PaddingOutcome {
    let capacity = inst.bin_count as i64 * inst.bin_capacity as i64;
    let t = capacity - inst.total() as i64;
    if t < 0 {
        return PaddingOutcome::Infeasible { deficit: t };
    }
    let mut items = inst.items.clone();
    items.extend(std::iter::repeat(1).take(t as usize));
    PaddingOutcome::Exact(BinPackingInstance {
        items,
        bin_capacity: inst.bin_capacity,
        bin_count: inst.bin_count,
        exact: true,
    })
}

/// Complete backtracking solver for exact instances. `None` is a proof that
/// no exact packing exists.
pub fn solve_exact(inst: &BinPackingInstance) -> Option<Partition> {
    assert!(inst.exact, "solve_exact expects an exact instance");
    let n = inst.bin_count as usize;
    if inst.total() != inst.bin_count * inst.bin_capacity {
        return None;
    }
    // Descending sizes keep the branching shallow; bins are distinguished
    // only by remaining capacity, and failed states are memoized.
    let mut order: Vec<usize> = (0..inst.items.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(inst.items[i]));
    let mut bins: Vec<(u64, Vec<usize>)> = vec![(inst.bin_capacity, Vec::new()); n];
    let mut failed: std::collections::HashSet<(usize, Vec<u64>)> = std::collections::HashSet::new();

    fn place(
        inst: &BinPackingInstance,
        order: &[usize],
        depth: usize,
        bins: &mut Vec<(u64, Vec<usize>)>,
        failed: &mut std::collections::HashSet<(usize, Vec<u64>)>,
    ) -> bool {
        let Some(&item) = order.get(depth) else { return true };
        let key = {
            let mut remainders: Vec<u64> = bins.iter().map(|b| b.0).collect();
            remainders.sort_unstable();
            (depth, remainders)
        };
        if failed.contains(&key) {
            return false;
        }
        let size = inst.items[item];
        let mut tried: Vec<u64> = Vec::new();
        for b in 0..bins.len() {
            let remaining = bins[b].0;
            if remaining < size || tried.contains(&remaining) {
                continue;
            }
            tried.push(remaining);
            bins[b].0 -= size;
            bins[b].1.push(item + 1);
            if place(inst, order, depth + 1, bins, failed) {
                return true;
            }
            bins[b].1.pop();
            bins[b].0 += size;
        }
        failed.insert(key);
        false
    }

    if place(inst, &order, 0, &mut bins, &mut failed) {
        debug_assert!(bins.iter().all(|b| b.0 == 0));
        Some(Partition::canonical(bins.into_iter().map(|b| b.1).collect()))
    } else {
        None
    }
}

/// The commutator word [x^p, y^q] = x^-p y^-q x^p y^q over single symbols.
pub(crate) fn commutator_word(x: u8, p: u64, y: u8, q: u64) -> Word {
    let mut letters = Vec::with_capacity(2 * (p + q) as usize);
    letters.extend(std::iter::repeat(Letter::new(x, Sign::Minus)).take(p as usize));
    letters.extend(std::iter::repeat(Letter::new(y, Sign::Minus)).take(q as usize));
    letters.extend(std::iter::repeat(Letter::new(x, Sign::Plus)).take(p as usize));
    letters.extend(std::iter::repeat(Letter::new(y, Sign::Plus)).take(q as usize));
    crate::words::free_reduce(letters)
}

/// Builds the standard-form equation deciding an exact instance:
/// orientable, genus 0, coefficients [a,b^{rⱼ}], last coefficient
/// [a^N,b^B]⁻¹.
pub fn to_equation(inst: &BinPackingInstance) -> StandardForm {
    assert!(inst.exact, "to_equation expects an exact instance");
    let alphabet = Alphabet::new("ab").expect("fixed alphabet");
    let coefficients: Vec<CyclicWord> = inst
        .items
        .iter()
        .map(|&r| CyclicWord::canonical(&commutator_word(b'a', 1, b'b', r)))
        .collect();
    let d = CyclicWord::canonical(
        &commutator_word(b'a', inst.bin_count, b'b', inst.bin_capacity).inverse(),
    );
    StandardForm::new(alphabet, true, 0, coefficients, Some(d))
        .expect("coefficients are nonempty and cyclically reduced")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(items: &[u64], b: u64, n: u64, exact: bool) -> BinPackingInstance {
        BinPackingInstance::new(items.to_vec(), b, n, exact).unwrap()
    }

    #[test]
    fn padding_examples() {
        match to_exact(&inst(&[2, 2], 3, 2, false)) {
            PaddingOutcome::Exact(e) => {
                assert_eq!(e.items, vec![2, 2, 1, 1]);
                assert!(e.exact);
            }
            PaddingOutcome::Infeasible { .. } => panic!("feasible instance"),
        }
        match to_exact(&inst(&[3, 3], 3, 2, false)) {
            PaddingOutcome::Exact(e) => assert_eq!(e.items, vec![3, 3]),
            PaddingOutcome::Infeasible { .. } => panic!("t = 0 is fine"),
        }
        assert_eq!(
            to_exact(&inst(&[4, 4], 3, 2, false)),
            PaddingOutcome::Infeasible { deficit: -2 }
        );
    }

    #[test]
    fn solver_examples() {
        let p = solve_exact(&inst(&[2, 2, 1, 1], 3, 2, true)).unwrap();
        assert_eq!(p.blocks, vec![vec![1, 3], vec![2, 4]]);

        let p = solve_exact(&inst(&[3, 3], 3, 2, true)).unwrap();
        assert_eq!(p.blocks, vec![vec![1], vec![2]]);

        assert_eq!(solve_exact(&inst(&[2, 2, 2], 3, 2, true)), None);
    }

    #[test]
    fn solver_agrees_with_subset_brute_force() {
        // Every assignment of ≤ 8 items to ≤ 3 bins, versus the solver.
        fn brute(inst: &BinPackingInstance) -> bool {
            let k = inst.items.len();
            let n = inst.bin_count as usize;
            let mut assign = vec![0usize; k];
            loop {
                let mut sums = vec![0u64; n];
                for (i, &b) in assign.iter().enumerate() {
                    sums[b] += inst.items[i];
                }
                if sums.iter().all(|&s| s == inst.bin_capacity) {
                    return true;
                }
                let mut i = 0;
                loop {
                    if i == k {
                        return false;
                    }
                    assign[i] += 1;
                    if assign[i] < n {
                        break;
                    }
                    assign[i] = 0;
                    i += 1;
                }
            }
        }
        for items in [
            vec![1, 1, 1],
            vec![2, 1, 1],
            vec![3, 2, 1],
            vec![2, 2, 2, 2],
            vec![3, 3, 2, 2, 1, 1],
        ] {
            for b in 1..=4 {
                for n in 1..=3u64 {
                    let Ok(i) = BinPackingInstance::new(items.clone(), b, n, true) else {
                        continue;
                    };
                    assert_eq!(solve_exact(&i).is_some(), brute(&i), "{items:?} B={b} N={n}");
                }
            }
        }
    }

    #[test]
    fn solved_partitions_validate() {
        let i = inst(&[2, 2, 1, 1], 3, 2, true);
        let p = solve_exact(&i).unwrap();
        assert!(p.validate_exact(&i).is_ok());

        let bad = Partition { blocks: vec![vec![1, 2], vec![3, 4]] };
        assert!(bad.validate_exact(&i).is_err());
    }

    #[test]
    fn equation_coefficients_have_expected_shape() {
        let sf = to_equation(&inst(&[1, 2], 3, 1, true));
        assert!(sf.orientable());
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 3);
        // |w| = 2r + 2, |d| = 2N + 2B.
        assert_eq!(sf.coefficients()[0].len(), 4);
        assert_eq!(sf.coefficients()[1].len(), 6);
        assert_eq!(sf.last_coefficient().unwrap().len(), 8);
        for c in sf.coefficients() {
            assert!(c.representative().is_cyclically_reduced());
        }

        // k=1: the single coefficient and the inverse of the last one fall
        // in the same conjugacy class, which is what makes the equation
        // solvable.
        let sf = to_equation(&inst(&[3], 3, 1, true));
        assert_eq!(sf.coefficients()[0], sf.last_coefficient().unwrap().inverse());
    }

    #[test]
    fn instance_json_round_trip() {
        let i = inst(&[2, 2, 1, 1], 3, 2, true);
        let json = serde_json::to_string(&i).unwrap();
        assert!(json.contains("\"B\":3") && json.contains("\"N\":2"));
        let back: BinPackingInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);

        let p = Partition { blocks: vec![vec![1, 3], vec![2, 4]] };
        let json = serde_json::to_string(&p).unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
