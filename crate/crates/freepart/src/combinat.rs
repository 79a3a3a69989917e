//! Set partitions, non-crossing partitions, and the Stirling / falling
//! factorial / Touchard machinery behind the Poissonized expansions.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Enumeration cap: Bell(10) = 115975 partitions is the largest ground set we
/// enumerate before failing loudly.
pub const PARTITION_CAP: usize = 10;

/// A partition of `{1..n}` into disjoint nonempty blocks, kept in canonical
/// form: each block ascending, blocks ordered by least element. Equality is
/// structural.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Build from blocks, validating disjointness and coverage of `{1..n}`.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("partition ground set must be nonempty".into()));
        }
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Usage("empty block in set partition".into()));
            }
            for &x in block {
                if x < 1 || x > n {
                    return Err(Error::Usage(format!("element {x} outside 1..{n}")));
                }
                if seen[x] {
                    return Err(Error::Usage(format!("element {x} appears twice")));
                }
                seen[x] = true;
                count += 1;
            }
        }
        if count != n {
            return Err(Error::Usage(format!("blocks cover {count} of {n} elements")));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks, written `|theta|`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// True iff no two blocks interleave as `x1 < y1 < x2 < y2`.
    pub fn is_noncrossing(&self) -> bool {
        for (a, bi) in self.blocks.iter().enumerate() {
            for bj in self.blocks.iter().skip(a + 1) {
                if blocks_cross(bi, bj) {
                    return false;
                }
            }
        }
        true
    }

    /// True iff every block of `self` is contained in some block of `other`.
    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::Usage(format!(
                "refines: ground sets differ ({} vs {})",
                self.n, other.n
            )));
        }
        // block index of each element in `other`
        let mut owner = vec![0usize; self.n + 1];
        for (idx, block) in other.blocks.iter().enumerate() {
            for &x in block {
                owner[x] = idx;
            }
        }
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&x| owner[x] == owner[b[0]])))
    }
}

/// Two sorted blocks cross iff their merged sequence alternates b-a-b-a.
fn blocks_cross(a: &[usize], b: &[usize]) -> bool {
    // Look for x1 < y1 < x2 < y2 with x's in one block, y's in the other.
    let pattern = |p: &[usize], q: &[usize]| -> bool {
        for (i, &x1) in p.iter().enumerate() {
            for &x2 in &p[i + 1..] {
                if q.iter().any(|&y1| x1 < y1 && y1 < x2)
                    && q.iter().any(|&y2| y2 > x2)
                {
                    return true;
                }
            }
        }
        false
    };
    pattern(a, b) || pattern(b, a)
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Usage("n must be >= 1".into()));
    }
    if n > PARTITION_CAP {
        return Err(Error::ResourceLimit(format!(
            "partition enumeration for n={n} exceeds cap {PARTITION_CAP} (Bell growth)"
        )));
    }
    Ok(())
}

/// All partitions of `{1..n}`, each in canonical form, sorted; count = Bell(n).
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_cap(n)?;
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn place(x: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<SetPartition>) {
        if x > n {
            out.push(SetPartition {
                n,
                blocks: blocks.clone(),
            });
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(x);
            place(x + 1, n, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![x]);
        place(x + 1, n, blocks, out);
        blocks.pop();
    }
    place(1, n, &mut blocks, &mut out);
    out.sort();
    Ok(out)
}

/// The non-crossing partitions of `{1..n}`; count = Catalan(n).
pub fn enumerate_nc_partitions(n: usize) -> Result<Vec<SetPartition>> {
    Ok(enumerate_set_partitions(n)?
        .into_iter()
        .filter(|p| p.is_noncrossing())
        .collect())
}

/// Stirling number of the second kind S(i,j). By convention S(i,j) = 0 for
/// j > i and for j = 0 < i, so summations may run over rectangular ranges.
pub fn stirling2(i: u32, j: u32) -> BigInt {
    if j > i {
        return BigInt::zero();
    }
    if i == 0 {
        return BigInt::one(); // S(0,0) = 1
    }
    if j == 0 {
        return BigInt::zero();
    }
    // S(i,j) = j*S(i-1,j) + S(i-1,j-1)
    let mut row = vec![BigInt::zero(); (i + 1) as usize];
    row[0] = BigInt::one(); // row for i=0
    for _ in 1..=i {
        for jj in (1..row.len()).rev() {
            row[jj] = BigInt::from(jj) * &row[jj] + &row[jj - 1];
        }
        row[0] = BigInt::zero();
    }
    row[j as usize].clone()
}

/// Falling factorial (N)_j = N(N-1)...(N-j+1), with (N)_0 = 1.
pub fn falling_factorial(n: i64, j: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..j as i64 {
        acc *= BigInt::from(n - t);
    }
    acc
}

/// K(N,i,m) = N^{i-1} - 1 - sum_{j=2..m} (N-1)_{j-1} S(i,j), for 1 <= m < i.
pub fn k_coefficient(n: i64, i: u32, m: u32) -> Result<BigInt> {
    if m < 1 || m >= i {
        return Err(Error::Usage(format!(
            "k_coefficient requires 1 <= m < i, got m={m}, i={i}"
        )));
    }
    let mut acc = BigInt::from(n).pow(i - 1) - BigInt::one();
    for j in 2..=m {
        acc -= falling_factorial(n - 1, j - 1) * stirling2(i, j);
    }
    Ok(acc)
}

/// Touchard polynomial T_i(alpha) = sum_j S(i,j) alpha^j, the i-th moment of
/// a Poisson(alpha) variable; exact in rationals.
pub fn touchard(i: u32, alpha: &Rat) -> Rat {
    let mut acc = Rat::zero();
    let mut power = Rat::one();
    for j in 0..=i {
        acc += Rat::from_integer(stirling2(i, j)) * &power;
        power *= alpha;
    }
    acc
}

/// Bell number B(n) via B(n+1) = sum_k C(n,k) B(k).
pub fn bell(n: usize) -> BigInt {
    let mut b = vec![BigInt::one()];
    for m in 0..n {
        let mut next = BigInt::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            next += &binom * bk;
            // C(m, k+1) = C(m,k) * (m-k)/(k+1)
            binom = binom * BigInt::from((m - k) as u64) / BigInt::from((k + 1) as u64);
        }
        b.push(next);
    }
    b[n].clone()
}

/// Catalan number C(n) via the convolution recursion.
pub fn catalan(n: usize) -> BigInt {
    let mut c = vec![BigInt::one()];
    for m in 1..=n {
        let mut next = BigInt::zero();
        for i in 0..m {
            next += &c[i] * &c[m - 1 - i];
        }
        c.push(next);
    }
    c[n].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use num_traits::ToPrimitive;

    fn part(n: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    /// Quadratic brute-force crossing scan, independent of the main check.
    fn crossing_brute(p: &SetPartition) -> bool {
        let n = p.n();
        let mut owner = vec![0usize; n + 1];
        for (i, b) in p.blocks().iter().enumerate() {
            for &x in b {
                owner[x] = i;
            }
        }
        for x1 in 1..=n {
            for y1 in x1 + 1..=n {
                for x2 in y1 + 1..=n {
                    for y2 in x2 + 1..=n {
                        if owner[x1] == owner[x2]
                            && owner[y1] == owner[y2]
                            && owner[x1] != owner[y1]
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_set_partitions(1).unwrap().len(), 1);
        assert_eq!(enumerate_set_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_set_partitions(4).unwrap().len(), 15);
        assert_eq!(enumerate_nc_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc_partitions(4).unwrap().len(), 14);
        assert_eq!(enumerate_nc_partitions(6).unwrap().len(), 132);
    }

    #[test]
    fn enumeration_is_canonical_and_unique() {
        let parts = enumerate_set_partitions(5).unwrap();
        let mut sorted = parts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(parts, sorted);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            enumerate_set_partitions(PARTITION_CAP + 1),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(enumerate_set_partitions(0), Err(Error::Usage(_))));
    }

    #[test]
    fn noncrossing_basics() {
        assert!(!part(4, &[&[1, 3], &[2, 4]]).is_noncrossing());
        assert!(part(4, &[&[1, 4], &[2, 3]]).is_noncrossing());
        for p in enumerate_set_partitions(3).unwrap() {
            assert!(p.is_noncrossing());
        }
    }

    #[test]
    fn noncrossing_agrees_with_brute_force() {
        for n in 1..=8 {
            for p in enumerate_set_partitions(n.min(PARTITION_CAP)).unwrap() {
                assert_eq!(p.is_noncrossing(), !crossing_brute(&p), "{p:?}");
            }
        }
    }

    #[test]
    fn refines_basics() {
        let singletons = part(3, &[&[1], &[2], &[3]]);
        let p = part(3, &[&[1, 2], &[3]]);
        let q = part(3, &[&[1], &[2, 3]]);
        for target in enumerate_set_partitions(3).unwrap() {
            assert!(singletons.refines(&target).unwrap());
        }
        assert!(p.refines(&p).unwrap());
        assert!(!p.refines(&q).unwrap());
        assert!(matches!(
            p.refines(&part(4, &[&[1, 2, 3, 4]])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn refines_is_partial_order() {
        let parts = enumerate_set_partitions(4).unwrap();
        for p in &parts {
            assert!(p.refines(p).unwrap());
            for q in &parts {
                if p.refines(q).unwrap() && q.refines(p).unwrap() {
                    assert_eq!(p, q);
                }
                for r in &parts {
                    if p.refines(q).unwrap() && q.refines(r).unwrap() {
                        assert!(p.refines(r).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn stirling_values() {
        for i in 1..=8u32 {
            assert_eq!(stirling2(i, 1), BigInt::one());
        }
        assert_eq!(stirling2(4, 2), BigInt::from(7));
        assert_eq!(stirling2(5, 3), BigInt::from(25));
        assert_eq!(stirling2(3, 7), BigInt::zero());
        assert_eq!(stirling2(0, 0), BigInt::one());
        // enumeration oracle: partitions of 4 elements into 2 blocks
        let count = enumerate_set_partitions(4)
            .unwrap()
            .iter()
            .filter(|p| p.num_blocks() == 2)
            .count();
        assert_eq!(stirling2(4, 2).to_usize().unwrap(), count);
    }

    #[test]
    fn falling_factorial_values() {
        assert_eq!(falling_factorial(7, 0), BigInt::one());
        assert_eq!(falling_factorial(5, 3), BigInt::from(60));
        assert_eq!(falling_factorial(2, 4), BigInt::zero());
    }

    #[test]
    fn stirling_power_identity() {
        // N^m = sum_j S(m,j) (N)_j
        for m in 1..=8u32 {
            for n in 1..=10i64 {
                let mut rhs = BigInt::zero();
                for j in 1..=m {
                    rhs += stirling2(m, j) * falling_factorial(n, j);
                }
                assert_eq!(BigInt::from(n).pow(m), rhs);
            }
        }
    }

    #[test]
    fn k_coefficient_values() {
        assert_eq!(k_coefficient(3, 4, 2).unwrap(), BigInt::from(12));
        for n in 2..=10i64 {
            assert_eq!(k_coefficient(n, 2, 1).unwrap(), BigInt::from(n - 1));
        }
        // K(N, m+1, m) = (N-1)_m
        for n in 2..=10i64 {
            for m in 1..=6u32 {
                assert_eq!(
                    k_coefficient(n, m + 1, m).unwrap(),
                    falling_factorial(n - 1, m)
                );
            }
        }
        assert!(matches!(k_coefficient(3, 2, 2), Err(Error::Usage(_))));
    }

    #[test]
    fn touchard_values() {
        let a = rat(3, 2);
        assert_eq!(touchard(0, &a), rat_int(1));
        assert_eq!(touchard(1, &a), a.clone());
        assert_eq!(touchard(2, &a), &a * &a + &a);
        assert_eq!(touchard(3, &rat_int(1)), rat_int(5)); // Bell(3)
    }

    #[test]
    fn bell_catalan_values() {
        assert_eq!(catalan(0), BigInt::one());
        assert_eq!(catalan(4), BigInt::from(14));
        assert_eq!(bell(4), BigInt::from(15));
        for n in 1..=8 {
            assert_eq!(
                bell(n).to_usize().unwrap(),
                enumerate_set_partitions(n).unwrap().len()
            );
            assert_eq!(
                catalan(n).to_usize().unwrap(),
                enumerate_nc_partitions(n).unwrap().len()
            );
        }
    }
}
