//! Moment <-> cumulant transforms: free (over non-crossing partitions) and
//! classical (over all set partitions), plus centering.
//!
//! Free cumulants are computed by direct recursion on the defining relation
//! `m(word) = sum over NC partitions of products of cumulants of sub-words`,
//! memoized over sub-words; the integer Moebius coefficients of the NC
//! lattice are never materialized. A sub-word keeps the original relative
//! order of its indices.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::combinat::{enumerate_nc_partitions, enumerate_set_partitions, SetPartition};
use crate::error::{Error, Result};
use crate::rational::Rat;

/// Default cap on word length; NC(8) already has 1430 terms.
pub const WORD_CAP: usize = 8;

/// A trace restricted to words: evaluates tuples of abstract variables to
/// exact rationals. Closures work directly.
pub trait MomentFunctional<V> {
    fn moment(&self, word: &[V]) -> Rat;
}

impl<V, F: Fn(&[V]) -> Rat> MomentFunctional<V> for F {
    fn moment(&self, word: &[V]) -> Rat {
        self(word)
    }
}

fn check_word_len(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Usage("word must be nonempty".into()));
    }
    if k > WORD_CAP {
        return Err(Error::ResourceLimit(format!(
            "word length {k} exceeds cap {WORD_CAP} (Catalan growth)"
        )));
    }
    Ok(())
}

/// Shared partition lists so recursive transforms do not re-enumerate.
struct PartitionCache {
    nc: BTreeMap<usize, Vec<SetPartition>>,
}

impl PartitionCache {
    fn new() -> Self {
        PartitionCache { nc: BTreeMap::new() }
    }

    fn nc(&mut self, n: usize) -> Result<&[SetPartition]> {
        if let std::collections::btree_map::Entry::Vacant(e) = self.nc.entry(n) {
            e.insert(enumerate_nc_partitions(n)?);
        }
        Ok(&self.nc[&n])
    }
}

fn cumulant_rec<V: Clone>(
    mf: &dyn MomentFunctional<V>,
    word: &[V],
    idx: &[usize],
    memo: &mut BTreeMap<Vec<usize>, Rat>,
    parts: &mut PartitionCache,
) -> Result<Rat> {
    if let Some(v) = memo.get(idx) {
        return Ok(v.clone());
    }
    let sub: Vec<V> = idx.iter().map(|&i| word[i].clone()).collect();
    let mut acc = mf.moment(&sub);
    let partitions = parts.nc(idx.len())?.to_vec();
    for theta in &partitions {
        if theta.num_blocks() == 1 {
            continue; // the full block is the cumulant being defined
        }
        let mut prod = Rat::one();
        for block in theta.blocks() {
            // block elements are 1-based positions within `idx`
            let block_idx: Vec<usize> = block.iter().map(|&p| idx[p - 1]).collect();
            prod *= cumulant_rec(mf, word, &block_idx, memo, parts)?;
            if prod.is_zero() {
                break;
            }
        }
        acc -= prod;
    }
    memo.insert(idx.to_vec(), acc.clone());
    Ok(acc)
}

/// The free cumulant R^(k) of a word under the given moment functional.
pub fn free_cumulant<V: Clone>(mf: &dyn MomentFunctional<V>, word: &[V]) -> Result<Rat> {
    check_word_len(word.len())?;
    let idx: Vec<usize> = (0..word.len()).collect();
    let mut memo = BTreeMap::new();
    let mut parts = PartitionCache::new();
    cumulant_rec(mf, word, &idx, &mut memo, &mut parts)
}

/// Free cumulant of the centered variables: 0 for k = 1, unchanged for k >= 2.
pub fn centered_cumulant<V: Clone>(mf: &dyn MomentFunctional<V>, word: &[V]) -> Result<Rat> {
    check_word_len(word.len())?;
    if word.len() == 1 {
        return Ok(Rat::zero());
    }
    free_cumulant(mf, word)
}

fn resum<V: Clone>(
    rc: &dyn MomentFunctional<V>,
    word: &[V],
    partitions: &[SetPartition],
) -> Rat {
    let mut acc = Rat::zero();
    for theta in partitions {
        let mut prod = Rat::one();
        for block in theta.blocks() {
            let sub: Vec<V> = block.iter().map(|&p| word[p - 1].clone()).collect();
            prod *= rc.moment(&sub);
            if prod.is_zero() {
                break;
            }
        }
        acc += prod;
    }
    acc
}

/// Moment from a free-cumulant evaluator: sum over non-crossing partitions of
/// products of block cumulants.
pub fn moments_from_free_cumulants<V: Clone>(
    rc: &dyn MomentFunctional<V>,
    word: &[V],
) -> Result<Rat> {
    check_word_len(word.len())?;
    Ok(resum(rc, word, &enumerate_nc_partitions(word.len())?))
}

/// Classical moment from a classical-cumulant evaluator: the same resummation
/// over ALL set partitions.
pub fn classical_moment_from_cumulants<V: Clone>(
    cc: &dyn MomentFunctional<V>,
    word: &[V],
) -> Result<Rat> {
    check_word_len(word.len())?;
    Ok(resum(cc, word, &enumerate_set_partitions(word.len())?))
}
