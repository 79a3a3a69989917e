//! Two independent exact operator-level oracles.
//!
//! Oracle A: a truncated full Fock space over the weighted point basis of the
//! product of the cell decomposition and the jump atoms. Basis words are
//! sequences of (cell, atom) letters; the inner product of two equal letters
//! is `sigma(cell) * nu(atom)` (non-orthonormal, which keeps every matrix
//! element rational). Truncation at depth d = word length is exact because
//! each operator factor changes the tensor degree by at most one.
//!
//! Oracle B: a truncated free-product space with alternating particle labels
//! and mean-zero slot functions stored extensionally (per grid point).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat_f64, Rat};
use crate::space::{DiscreteSpace, JumpMeasure, TestFunction};

/// Cap on the number of simultaneously tracked basis words in oracle B.
const TERM_CAP: usize = 4_000_000;

type Letter = (usize, usize); // (cell index, atom index)

/// A finitely supported exact vector in the truncated full Fock space. The
/// empty word indexes the vacuum component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorVector {
    terms: BTreeMap<Vec<Letter>, Rat>,
    depth_cap: usize,
}

impl TensorVector {
    pub fn vacuum(depth_cap: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Rat::one());
        TensorVector { terms, depth_cap }
    }

    pub fn vacuum_coefficient(&self) -> Rat {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rat::zero)
    }

    /// Weighted inner product against another vector on the same grid.
    pub fn inner(&self, other: &TensorVector, sp: &DiscreteSpace, jm: &JumpMeasure) -> Rat {
        let mut acc = Rat::zero();
        for (word, x) in &self.terms {
            if let Some(y) = other.terms.get(word) {
                let mut w = x * y;
                for &(c, a) in word {
                    w *= sp.mass(c);
                    w *= &jm.atoms()[a].1;
                }
                acc += w;
            }
        }
        acc
    }

    fn add(&mut self, word: Vec<Letter>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word).or_insert_with(Rat::zero);
        *entry += coeff;
        // keep supports tight
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }
}

/// Apply the white-noise operator of a test function:
/// creation + gauge + annihilation + the scalar `int f dsigma * int s dnu`.
pub fn fock_apply(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    f: &TestFunction,
    v: &TensorVector,
) -> Result<TensorVector> {
    let scalar = sp.integrate_product(&[f])? * jm.jump_moment(1);
    let mut out = TensorVector {
        terms: BTreeMap::new(),
        depth_cap: v.depth_cap,
    };
    // nonzero coefficients of h = f (x) id on the grid
    let mut h: Vec<(Letter, Rat)> = Vec::new();
    for c in 0..sp.num_cells() {
        if f.value(c).is_zero() {
            continue;
        }
        for (a, (s, _)) in jm.atoms().iter().enumerate() {
            h.push(((c, a), f.value(c) * s));
        }
    }
    for (word, x) in &v.terms {
        // creation: prepend each h letter
        if !h.is_empty() {
            if word.len() == v.depth_cap {
                return Err(Error::Truncation(format!(
                    "creation would exceed truncation depth {}",
                    v.depth_cap
                )));
            }
            for ((c, a), hv) in &h {
                let mut w = Vec::with_capacity(word.len() + 1);
                w.push((*c, *a));
                w.extend_from_slice(word);
                out.add(w, x * hv);
            }
        }
        if let Some(&(c, a)) = word.first() {
            // gauge: multiply the first letter's value by h at that point
            let hv = f.value(c) * &jm.atoms()[a].0;
            out.add(word.clone(), x * &hv);
            // annihilation: contract the first letter with h under the
            // weighted inner product
            let ip = hv * sp.mass(c) * &jm.atoms()[a].1;
            out.add(word[1..].to_vec(), x * ip);
        }
        // scalar part
        out.add(word.clone(), x * &scalar);
    }
    out.prune();
    Ok(out)
}

/// Vacuum expectation of a word of white-noise operators, exact for d >= k.
pub fn fock_vacuum_expectation(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    fs: &[&TestFunction],
    depth: usize,
) -> Result<Rat> {
    if fs.is_empty() {
        return Err(Error::Usage("word must be nonempty".into()));
    }
    if depth < fs.len() {
        return Err(Error::Usage(format!(
            "truncation depth {depth} < word length {}: result would be silently wrong",
            fs.len()
        )));
    }
    let mut v = TensorVector::vacuum(depth);
    for f in fs.iter().rev() {
        v = fock_apply(sp, jm, f, &v)?;
    }
    Ok(v.vacuum_coefficient())
}

/// One tensor slot of the free-product space: a particle label and a
/// mean-zero function on the grid, stored per grid point.
type Slot = (usize, Vec<Rat>);

/// A finitely supported exact vector in the truncated free-product space.
/// Words alternate particle labels; the empty word is the vacuum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeProductVector {
    terms: BTreeMap<Vec<Slot>, Rat>,
    depth_cap: usize,
}

impl FreeProductVector {
    pub fn vacuum(depth_cap: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Rat::one());
        FreeProductVector { terms, depth_cap }
    }

    pub fn vacuum_coefficient(&self) -> Rat {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rat::zero)
    }

    fn add(&mut self, word: Vec<Slot>, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word).or_insert_with(Rat::zero);
        *entry += coeff;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }
}

/// The single-particle grid: (cell, atom) pairs with probability weights
/// `sigma(c) nu(a) / V`.
struct Grid {
    probs: Vec<Rat>,
    cells: usize,
    atoms: usize,
}

impl Grid {
    fn new(sp: &DiscreteSpace, jm: &JumpMeasure) -> Grid {
        let v = sp.total_mass() * jm.total_mass();
        let mut probs = Vec::new();
        for c in 0..sp.num_cells() {
            for (_, m) in jm.atoms() {
                probs.push(sp.mass(c) * m / &v);
            }
        }
        Grid {
            probs,
            cells: sp.num_cells(),
            atoms: jm.atoms().len(),
        }
    }

    /// Values of h = f (x) id on the grid.
    fn lift(&self, jm: &JumpMeasure, f: &TestFunction) -> Vec<Rat> {
        let mut out = Vec::with_capacity(self.cells * self.atoms);
        for c in 0..self.cells {
            for (s, _) in jm.atoms() {
                out.push(f.value(c) * s);
            }
        }
        out
    }

    /// Mean of a grid function under the single-particle distribution.
    fn mean(&self, g: &[Rat]) -> Rat {
        g.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }
}

fn pointwise_product(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn centered(g: &[Rat], mean: &Rat) -> Option<Vec<Rat>> {
    let c: Vec<Rat> = g.iter().map(|x| x - mean).collect();
    if c.iter().all(|x| x.is_zero()) {
        None
    } else {
        Some(c)
    }
}

/// Apply the multiplication operator of particle `i` to a free-product
/// vector, implementing the three defining cases: action on the vacuum, on
/// words with a different leading label, and head absorption on words led by
/// the same label.
pub fn free_product_apply(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    particle: usize,
    f: &TestFunction,
    v: &FreeProductVector,
) -> Result<FreeProductVector> {
    sp.integrate_product(&[f])?;
    let grid = Grid::new(sp, jm);
    let h = grid.lift(jm, f);
    let mean = grid.mean(&h);
    let hc = centered(&h, &mean);
    let mut out = FreeProductVector {
        terms: BTreeMap::new(),
        depth_cap: v.depth_cap,
    };
    apply_particle_into(&grid, particle, &h, &mean, &hc, v, &mut out)?;
    out.prune();
    Ok(out)
}

fn apply_particle_into(
    grid: &Grid,
    particle: usize,
    h: &[Rat],
    mean: &Rat,
    hc: &Option<Vec<Rat>>,
    v: &FreeProductVector,
    out: &mut FreeProductVector,
) -> Result<()> {
    for (word, x) in &v.terms {
        match word.first() {
            Some((label, g)) if *label == particle => {
                // head absorption: <h g> tail + [h g] (x) tail
                let hg = pointwise_product(h, g);
                let hg_mean = grid.mean(&hg);
                let tail = word[1..].to_vec();
                out.add(tail.clone(), x * &hg_mean);
                if let Some(hgc) = centered(&hg, &hg_mean) {
                    let mut w = Vec::with_capacity(word.len());
                    w.push((particle, hgc));
                    w.extend_from_slice(&word[1..]);
                    out.add(w, x.clone());
                }
            }
            _ => {
                // vacuum or different leading label: <h> word + [h] (x) word
                out.add(word.clone(), x * mean);
                if let Some(hc) = hc {
                    if word.len() == v.depth_cap {
                        return Err(Error::Truncation(format!(
                            "creation would exceed truncation depth {}",
                            v.depth_cap
                        )));
                    }
                    let mut w = Vec::with_capacity(word.len() + 1);
                    w.push((particle, hc.clone()));
                    w.extend_from_slice(word);
                    out.add(w, x.clone());
                }
            }
        }
    }
    if out.terms.len() > TERM_CAP {
        return Err(Error::ResourceLimit(format!(
            "free-product expansion exceeded {TERM_CAP} terms"
        )));
    }
    Ok(())
}

/// Apply the N-particle sum operator `A(N; f) = sum_i M_i(f)`.
pub fn free_product_apply_sum(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    n_particles: u64,
    f: &TestFunction,
    v: &FreeProductVector,
) -> Result<FreeProductVector> {
    sp.integrate_product(&[f])?;
    let grid = Grid::new(sp, jm);
    let h = grid.lift(jm, f);
    let mean = grid.mean(&h);
    let hc = centered(&h, &mean);
    let mut out = FreeProductVector {
        terms: BTreeMap::new(),
        depth_cap: v.depth_cap,
    };
    for i in 0..n_particles as usize {
        apply_particle_into(&grid, i, &h, &mean, &hc, v, &mut out)?;
    }
    out.prune();
    Ok(out)
}

/// Vacuum expectation of a word of N-particle operators in the free-product
/// space; exact for d >= k, and must agree with the combinatorial fixed-N
/// trace.
pub fn free_product_vacuum_expectation(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    n_particles: u64,
    fs: &[&TestFunction],
    depth: usize,
) -> Result<Rat> {
    if fs.is_empty() {
        return Err(Error::Usage("word must be nonempty".into()));
    }
    if depth < fs.len() {
        return Err(Error::Usage(format!(
            "truncation depth {depth} < word length {}: result would be silently wrong",
            fs.len()
        )));
    }
    if n_particles == 0 {
        return Ok(Rat::zero()); // A(0; f) = 0
    }
    let mut v = FreeProductVector::vacuum(depth);
    for f in fs.iter().rev() {
        v = free_product_apply_sum(sp, jm, n_particles, f, &v)?;
    }
    Ok(v.vacuum_coefficient())
}

/// Poisson-weighted floating sum of the free-product expectations: the
/// operator-level oracle for the Poissonized trace. The tail bound comes from
/// the exact polynomial in N interpolated through the oracle's own values at
/// N = 0..k (the expectation is a polynomial of degree <= k).
pub fn poissonized_oracle(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    alpha: &Rat,
    fs: &[&TestFunction],
    n_max: u64,
    depth: usize,
    tail_tol: f64,
) -> Result<f64> {
    if alpha.is_negative() {
        return Err(Error::Usage("alpha must be >= 0".into()));
    }
    let k = fs.len();
    if k == 0 {
        return Err(Error::Usage("word must be nonempty".into()));
    }
    let a = rat_f64(alpha);
    if a == 0.0 {
        return Ok(0.0);
    }

    // Values for N = 0..=min(n_max, needed); reused for the sum below.
    let mut values: Vec<Rat> = Vec::new();
    for n in 0..=n_max.min(k as u64) {
        values.push(free_product_vacuum_expectation(sp, jm, n, fs, depth)?);
    }
    if values.len() < k + 1 {
        return Err(Error::Usage(format!(
            "n_max={n_max} too small to determine the degree-{k} polynomial"
        )));
    }
    // Newton forward differences -> monomial coefficients, exactly.
    let coeffs = newton_monomial_coefficients(&values);
    let coeff_bound: f64 = coeffs.iter().map(|c| rat_f64(&c.abs())).sum();

    // Certified geometric tail bound on sum_{N > n_max} e^-a a^N N^k / N!.
    let m = (n_max + 1) as f64;
    let ratio = a * (1.0 + 1.0 / m).powi(k as i32) / (m + 1.0);
    let log_term = -a + m * a.ln() + (k as f64) * m.ln() - ln_factorial(n_max + 1);
    let tail = if ratio < 1.0 {
        coeff_bound * log_term.exp() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    if tail.is_nan() || tail > tail_tol {
        return Err(Error::Truncation(format!(
            "tail bound {tail:.3e} exceeds tolerance {tail_tol:.3e} at n_max={n_max}"
        )));
    }

    let mut sum = 0.0;
    let mut weight = (-a).exp();
    for n in 0..=n_max {
        let value = if (n as usize) < values.len() {
            values[n as usize].clone()
        } else {
            free_product_vacuum_expectation(sp, jm, n, fs, depth)?
        };
        sum += weight * rat_f64(&value);
        weight *= a / (n as f64 + 1.0);
    }
    Ok(sum)
}

/// Exact monomial coefficients of the polynomial through (0, p0), (1, p1),
/// ..., (d, pd) via Newton's forward-difference form.
fn newton_monomial_coefficients(values: &[Rat]) -> Vec<Rat> {
    let d = values.len() - 1;
    // forward differences Delta^j p(0)
    let mut diffs = values.to_vec();
    let mut leading: Vec<Rat> = vec![diffs[0].clone()];
    for _ in 0..d {
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        leading.push(diffs[0].clone());
    }
    // p(N) = sum_j Delta^j p(0)/j! * N(N-1)...(N-j+1)
    let mut coeffs = vec![Rat::zero(); d + 1];
    let mut basis = vec![Rat::one()]; // coefficients of the rising product
    let mut fact = Rat::one();
    for (j, delta) in leading.iter().enumerate() {
        if j > 0 {
            fact *= Rat::from_integer(num_bigint::BigInt::from(j as u64));
            // basis *= (N - (j-1))
            let shift = Rat::from_integer(num_bigint::BigInt::from((j - 1) as u64));
            let mut next = vec![Rat::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * &shift;
            }
            basis = next;
        }
        let scale = delta / &fact;
        for (i, b) in basis.iter().enumerate() {
            coeffs[i] += b * &scale;
        }
    }
    coeffs
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::systems::{fixed_n_trace, ParticleCount, ParticleSystemSpec};
    use crate::targets::levy_moment;

    fn poisson_setup() -> (DiscreteSpace, JumpMeasure, TestFunction) {
        let sp = DiscreteSpace::unit_cells(3);
        (sp.clone(), JumpMeasure::delta_one(), TestFunction::indicator(&sp, &[0]))
    }

    #[test]
    fn vacuum_action() {
        let (sp, jm, f) = poisson_setup();
        let v = fock_apply(&sp, &jm, &f, &TensorVector::vacuum(3)).unwrap();
        // scalar part on the vacuum plus the depth-1 h component
        assert_eq!(v.vacuum_coefficient(), rat_int(1));
        assert!(v.terms.keys().any(|w| w.len() == 1));
        assert!(v.terms.keys().all(|w| w.len() <= 1));
    }

    #[test]
    fn low_order_expectations() {
        let (sp, jm, f) = poisson_setup();
        // <A(f) Omega, Omega> = int f dsigma * int s dnu
        assert_eq!(fock_vacuum_expectation(&sp, &jm, &[&f], 1).unwrap(), rat_int(1));
        // <A(f)^2 Omega, Omega> = int f^2 dsigma int s^2 dnu + (int f int s)^2
        assert_eq!(
            fock_vacuum_expectation(&sp, &jm, &[&f, &f], 2).unwrap(),
            rat_int(2)
        );
        // free Poisson 4th moment = Catalan(4)
        assert_eq!(
            fock_vacuum_expectation(&sp, &jm, &[&f, &f, &f, &f], 4).unwrap(),
            rat_int(14)
        );
        // depth refusal
        assert!(fock_vacuum_expectation(&sp, &jm, &[&f, &f], 1).is_err());
    }

    #[test]
    fn oracle_a_matches_limit_moments() {
        let sp = DiscreteSpace::new(vec![
            ("a".into(), rat(1, 2)),
            ("b".into(), rat_int(2)),
        ])
        .unwrap();
        let jm = JumpMeasure::new(vec![(rat_int(2), rat(1, 3)), (rat_int(-1), rat_int(1))])
            .unwrap();
        let f = TestFunction::new(&sp, vec![rat_int(1), rat(1, 2)]).unwrap();
        let g = TestFunction::indicator(&sp, &[1]);
        for word in [vec![&f], vec![&f, &g], vec![&g, &f, &f], vec![&f, &g, &f, &g]] {
            let k = word.len();
            assert_eq!(
                fock_vacuum_expectation(&sp, &jm, &word, k).unwrap(),
                levy_moment(&sp, &jm, &word).unwrap()
            );
        }
    }

    #[test]
    fn self_adjointness_at_the_form_level() {
        let (sp, jm, f) = poisson_setup();
        let g = TestFunction::new(&sp, vec![rat(1, 2), rat_int(1), rat_int(0)]).unwrap();
        // v = A(g) Omega, w = A(f) A(g) Omega (depth 4 leaves headroom)
        let omega = TensorVector::vacuum(4);
        let v = fock_apply(&sp, &jm, &g, &omega).unwrap();
        let w = fock_apply(&sp, &jm, &f, &v).unwrap();
        let av = fock_apply(&sp, &jm, &f, &v).unwrap();
        let aw = fock_apply(&sp, &jm, &f, &w).unwrap();
        assert_eq!(av.inner(&w, &sp, &jm), v.inner(&aw, &sp, &jm));
    }

    #[test]
    fn free_product_basics() {
        let sp = DiscreteSpace::unit_cells(10);
        let jm = JumpMeasure::delta_one();
        let one = TestFunction::constant_one(&sp);
        let f = TestFunction::indicator(&sp, &[0]);
        // M_i of a constant function is the identity
        let v = FreeProductVector::vacuum(3);
        let applied = free_product_apply(&sp, &jm, 0, &one, &v).unwrap();
        assert_eq!(applied, v);
        // <M_i(f) Psi, Psi> = <f>
        let m = free_product_apply(&sp, &jm, 0, &f, &v).unwrap();
        assert_eq!(m.vacuum_coefficient(), rat(1, 10));
        // <M_i(f) M_j(g) Psi, Psi> = <f><g> for i != j
        let mj = free_product_apply(&sp, &jm, 1, &f, &v).unwrap();
        let mi = free_product_apply(&sp, &jm, 0, &f, &mj).unwrap();
        assert_eq!(mi.vacuum_coefficient(), rat(1, 100));
    }

    #[test]
    fn single_particle_marginal() {
        // <M_i(f1)...M_i(fk) Psi, Psi> equals the single-particle moment
        let sp = DiscreteSpace::unit_cells(4);
        let jm = JumpMeasure::delta_one();
        let f = TestFunction::indicator(&sp, &[0]);
        let g = TestFunction::new(&sp, vec![rat(1, 2), rat_int(3), rat_int(0), rat_int(0)])
            .unwrap();
        let spec = ParticleSystemSpec {
            space: sp.clone(),
            jumps: None,
            count: ParticleCount::FixedN(3),
        };
        for word in [vec![&f, &g], vec![&g, &g, &f], vec![&f, &f, &f, &g]] {
            let mut v = FreeProductVector::vacuum(word.len());
            for h in word.iter().rev() {
                v = free_product_apply(&sp, &jm, 2, h, &v).unwrap();
            }
            assert_eq!(
                v.vacuum_coefficient(),
                crate::systems::single_particle_moment(&spec, &word).unwrap()
            );
        }
    }

    #[test]
    fn oracle_b_matches_fixed_n_trace() {
        let sp = DiscreteSpace::unit_cells(10);
        let jm = JumpMeasure::delta_one();
        let f = TestFunction::indicator(&sp, &[0]);
        let one = TestFunction::constant_one(&sp);
        // the 19/10 case at N = 10
        assert_eq!(
            free_product_vacuum_expectation(&sp, &jm, 10, &[&f, &f], 2).unwrap(),
            rat(19, 10)
        );
        // N^k for the constant function
        assert_eq!(
            free_product_vacuum_expectation(&sp, &jm, 2, &[&one, &one, &one], 3).unwrap(),
            rat_int(8)
        );
        // k = 1 -> N <f>
        assert_eq!(
            free_product_vacuum_expectation(&sp, &jm, 7, &[&f], 1).unwrap(),
            rat(7, 10)
        );
        // general agreement with the combinatorial route
        let spec = ParticleSystemSpec {
            space: sp.clone(),
            jumps: None,
            count: ParticleCount::FixedN(3),
        };
        for word in [vec![&f, &f, &f], vec![&f, &one, &f], vec![&one, &f, &f, &f]] {
            assert_eq!(
                free_product_vacuum_expectation(&sp, &jm, 3, &word, word.len()).unwrap(),
                fixed_n_trace(&spec, &word).unwrap()
            );
        }
    }

    #[test]
    fn poissonized_oracle_values() {
        let sp = DiscreteSpace::unit_cells(10);
        let jm = JumpMeasure::delta_one();
        let f = TestFunction::indicator(&sp, &[0]);
        let alpha = rat_int(10);
        // k = 2, alpha = V -> s + s^2 = 2
        let v2 = poissonized_oracle(&sp, &jm, &alpha, &[&f, &f], 60, 2, 1e-9).unwrap();
        assert!((v2 - 2.0).abs() <= 1e-9, "{v2}");
        // k = 1 -> int f dsigma = 1
        let v1 = poissonized_oracle(&sp, &jm, &alpha, &[&f], 60, 1, 1e-9).unwrap();
        assert!((v1 - 1.0).abs() <= 1e-9, "{v1}");
        // alpha = 0 -> 0
        assert_eq!(
            poissonized_oracle(&sp, &jm, &rat_int(0), &[&f], 10, 1, 1e-9).unwrap(),
            0.0
        );
    }

    #[test]
    fn newton_interpolation_is_exact() {
        // p(N) = 2N^2 - 3N + 5
        let values: Vec<Rat> = (0..3)
            .map(|n: i64| rat_int(2 * n * n - 3 * n + 5))
            .collect();
        let coeffs = newton_monomial_coefficients(&values);
        assert_eq!(coeffs, vec![rat_int(5), rat_int(-3), rat_int(2)]);
    }
}
