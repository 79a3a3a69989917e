//! Limit objects: free Levy white noise / free Poisson moments and cumulants,
//! plus the classical Poisson/Levy comparison at moment level.
//!
//! The limit is specified by the pair (sigma, nu) alone: the k-th free
//! cumulant of a word is the k-th jump moment times the spatial integral of
//! the pointwise product.

use num_traits::Zero;

use crate::cumulants::{
    classical_moment_from_cumulants, moments_from_free_cumulants,
};
use crate::error::Result;
use crate::rational::Rat;
use crate::space::{DiscreteSpace, JumpMeasure, TestFunction};

/// Free cumulant of the limit white noise:
/// `jump_moment(k) * integral(f1...fk dsigma)`. With nu = delta_1 this is the
/// free Poisson cumulant `integral(f1...fk dsigma)`.
pub fn levy_free_cumulant(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    fs: &[&TestFunction],
) -> Result<Rat> {
    Ok(sp.integrate_product(fs)? * jm.jump_moment(fs.len() as u32))
}

fn cumulant_evaluator<'a>(
    sp: &'a DiscreteSpace,
    jm: &'a JumpMeasure,
    centered: bool,
) -> impl Fn(&[&'a TestFunction]) -> Rat + 'a {
    move |word: &[&TestFunction]| {
        if centered && word.len() == 1 {
            return Rat::zero();
        }
        levy_free_cumulant(sp, jm, word).expect("functions validated by the outer call")
    }
}

/// Vacuum-state moment of the limit white noise: non-crossing resummation of
/// the Levy cumulants.
pub fn levy_moment(sp: &DiscreteSpace, jm: &JumpMeasure, fs: &[&TestFunction]) -> Result<Rat> {
    sp.integrate_product(fs)?; // validate functions against the space up front
    moments_from_free_cumulants(&cumulant_evaluator(sp, jm, false), fs)
}

/// Moment of the centered limit white noise: the k = 1 cumulant is zero, so
/// only partitions with all blocks of size >= 2 contribute.
pub fn centered_levy_moment(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    fs: &[&TestFunction],
) -> Result<Rat> {
    sp.integrate_product(fs)?;
    moments_from_free_cumulants(&cumulant_evaluator(sp, jm, true), fs)
}

/// The classical comparison: the same cumulant data resummed over ALL set
/// partitions, i.e. the moments of the classical Poisson/Levy functional.
pub fn classical_levy_moment(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    fs: &[&TestFunction],
) -> Result<Rat> {
    sp.integrate_product(fs)?;
    classical_moment_from_cumulants(&cumulant_evaluator(sp, jm, false), fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::{bell, catalan};
    use crate::rational::{rat, rat_int};

    fn setup() -> (DiscreteSpace, JumpMeasure, TestFunction) {
        let sp = DiscreteSpace::unit_cells(3);
        let jm = JumpMeasure::delta_one();
        let f = TestFunction::indicator(&sp, &[0]);
        (sp, jm, f)
    }

    #[test]
    fn cumulant_values() {
        let (sp, jm, f) = setup();
        assert_eq!(levy_free_cumulant(&sp, &jm, &[&f, &f]).unwrap(), rat_int(1));
        let two = JumpMeasure::new(vec![(rat_int(2), rat_int(1))]).unwrap();
        assert_eq!(
            levy_free_cumulant(&sp, &two, &[&f, &f, &f]).unwrap(),
            rat_int(8)
        );
        // disjoint supports vanish at every order
        let g = TestFunction::indicator(&sp, &[1]);
        for k in 2..=5usize {
            let mut word: Vec<&TestFunction> = vec![&f; k - 1];
            word.push(&g);
            assert_eq!(levy_free_cumulant(&sp, &jm, &word).unwrap(), rat_int(0));
        }
    }

    #[test]
    fn free_poisson_moments_are_catalan() {
        let (sp, jm, f) = setup();
        for k in 1..=8usize {
            let word: Vec<&TestFunction> = vec![&f; k];
            assert_eq!(
                levy_moment(&sp, &jm, &word).unwrap(),
                Rat::from_integer(catalan(k))
            );
            assert_eq!(
                classical_levy_moment(&sp, &jm, &word).unwrap(),
                Rat::from_integer(bell(k))
            );
        }
    }

    #[test]
    fn low_order_moments() {
        let (sp, _, f) = setup();
        let jm = JumpMeasure::new(vec![(rat(3, 2), rat_int(2))]).unwrap();
        // k = 1: integral(f) * integral(s dnu)
        assert_eq!(levy_moment(&sp, &jm, &[&f]).unwrap(), rat_int(3));
        // k <= 2: classical and free agree
        assert_eq!(
            levy_moment(&sp, &jm, &[&f, &f]).unwrap(),
            classical_levy_moment(&sp, &jm, &[&f, &f]).unwrap()
        );
        // sigma(Theta) = s: second moment s + s^2 for the free Poisson
        let wide = DiscreteSpace::new(vec![
            ("theta".into(), rat(2, 3)),
            ("rest".into(), rat_int(5)),
        ])
        .unwrap();
        let chi = TestFunction::indicator(&wide, &[0]);
        let s = rat(2, 3);
        assert_eq!(
            levy_moment(&wide, &JumpMeasure::delta_one(), &[&chi, &chi]).unwrap(),
            &s * &s + &s
        );
    }

    #[test]
    fn centered_moments() {
        let (sp, jm, f) = setup();
        assert_eq!(centered_levy_moment(&sp, &jm, &[&f]).unwrap(), rat_int(0));
        // k = 2: only the pair block survives
        assert_eq!(
            centered_levy_moment(&sp, &jm, &[&f, &f]).unwrap(),
            levy_free_cumulant(&sp, &jm, &[&f, &f]).unwrap()
        );
        // symmetric two-atom nu kills odd centered moments
        let sym = JumpMeasure::new(vec![(rat_int(1), rat_int(1)), (rat_int(-1), rat_int(1))])
            .unwrap();
        for k in [1usize, 3, 5, 7] {
            let word: Vec<&TestFunction> = vec![&f; k];
            assert_eq!(centered_levy_moment(&sp, &sym, &word).unwrap(), rat_int(0));
        }
    }

    #[test]
    fn free_below_classical_for_nonnegative_data() {
        let sp = DiscreteSpace::unit_cells(2);
        let jm = JumpMeasure::new(vec![(rat(1, 2), rat_int(3))]).unwrap();
        let f = TestFunction::new(&sp, vec![rat_int(1), rat(1, 2)]).unwrap();
        for k in 1..=6usize {
            let word: Vec<&TestFunction> = vec![&f; k];
            let free = levy_moment(&sp, &jm, &word).unwrap();
            let classical = classical_levy_moment(&sp, &jm, &word).unwrap();
            assert!(free <= classical, "k={k}");
        }
    }
}
