//! Property-based invariants over randomly generated rational data.

use proptest::prelude::*;

use freepart::combinat::enumerate_set_partitions;
use freepart::cumulants::{free_cumulant, moments_from_free_cumulants};
use freepart::rational::{rat, rat_int, Rat};
use freepart::space::{DiscreteSpace, JumpMeasure, TestFunction};
use freepart::targets::{levy_free_cumulant, levy_moment};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn space_and_functions(
    n_fns: usize,
) -> impl Strategy<Value = (DiscreteSpace, Vec<TestFunction>)> {
    (
        proptest::collection::vec((1i64..=5, 1i64..=3), 2..=3),
        proptest::collection::vec(proptest::collection::vec(small_rat(), 3), n_fns),
    )
        .prop_map(|(masses, fn_values)| {
            let cells: Vec<(String, Rat)> = masses
                .iter()
                .enumerate()
                .map(|(i, &(n, d))| (format!("c{i}"), rat(n, d)))
                .collect();
            let k = cells.len();
            let sp = DiscreteSpace::new(cells).unwrap();
            let fns = fn_values
                .into_iter()
                .map(|vals| TestFunction::new(&sp, vals[..k].to_vec()).unwrap())
                .collect();
            (sp, fns)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // moment -> cumulant -> moment is the identity for any functional
    #[test]
    fn inversion_round_trips(seed in any::<u64>(), k in 1usize..=5) {
        let mf = move |w: &[usize]| -> Rat {
            let mut x = seed;
            for &l in w {
                x = x.wrapping_mul(0x5DEECE66D).wrapping_add(l as u64 + 11);
                x ^= x >> 31;
            }
            rat(((x >> 40) % 17) as i64 - 8, ((x % 5) + 1) as i64)
        };
        let word: Vec<usize> = (0..k).map(|i| ((seed >> i) & 1) as usize).collect();
        let cum = move |w: &[usize]| free_cumulant(&mf, w).unwrap();
        prop_assert_eq!(moments_from_free_cumulants(&cum, &word).unwrap(), mf(&word));
    }

    // limit cumulants are linear in each slot of the word
    #[test]
    fn limit_cumulants_are_multilinear(
        (sp, fns) in space_and_functions(3),
        k in 2usize..=4,
        slot_pick in 0usize..4,
        a in small_rat(),
        b in small_rat(),
    ) {
        let jm = JumpMeasure::new(vec![(rat(3, 2), rat_int(1))]).unwrap();
        let slot = slot_pick % k;
        let combo_vals: Vec<Rat> = (0..sp.num_cells())
            .map(|c| &a * fns[0].value(c) + &b * fns[1].value(c))
            .collect();
        let combo = TestFunction::new(&sp, combo_vals).unwrap();

        let word_with = |f: &TestFunction| -> Rat {
            let word: Vec<&TestFunction> = (0..k)
                .map(|i| if i == slot { f } else { &fns[2] })
                .collect();
            levy_free_cumulant(&sp, &jm, &word).unwrap()
        };
        prop_assert_eq!(
            word_with(&combo),
            a * word_with(&fns[0]) + b * word_with(&fns[1])
        );
    }

    // refinement is a partial order on set partitions
    #[test]
    fn refinement_is_a_partial_order(n in 1usize..=5) {
        let parts = enumerate_set_partitions(n).unwrap();
        for p in &parts {
            prop_assert!(p.refines(p).unwrap());
        }
        for p in &parts {
            for q in &parts {
                if p.refines(q).unwrap() && q.refines(p).unwrap() {
                    prop_assert_eq!(p.blocks(), q.blocks());
                }
                for r in &parts {
                    if p.refines(q).unwrap() && q.refines(r).unwrap() {
                        prop_assert!(p.refines(r).unwrap());
                    }
                }
            }
        }
    }

    // scaling the space scales every moment's single-block contribution:
    // the limit moment with all masses scaled by t is the original with
    // each cumulant scaled by t
    #[test]
    fn moments_scale_with_total_mass(
        (sp, fns) in space_and_functions(1),
        t in 1i64..=4,
        k in 1usize..=4,
    ) {
        let jm = JumpMeasure::delta_one();
        let scaled = DiscreteSpace::new(
            sp.cell_names()
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), sp.mass(i) * rat_int(t)))
                .collect(),
        )
        .unwrap();
        let f_scaled = TestFunction::new(&scaled, fns[0].values().to_vec()).unwrap();
        let word: Vec<&TestFunction> = vec![&fns[0]; k];
        let word_scaled: Vec<&TestFunction> = vec![&f_scaled; k];
        // every block contributes one factor of t, so the scaled moment is
        // the original resummation with cumulants multiplied by t
        let direct = levy_moment(&scaled, &jm, &word_scaled).unwrap();
        let cum = |w: &[&TestFunction]| {
            levy_free_cumulant(&sp, &jm, w).unwrap() * rat_int(t)
        };
        let expected = moments_from_free_cumulants(&cum, &word).unwrap();
        prop_assert_eq!(direct, expected);
    }
}
