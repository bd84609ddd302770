use cms_ergodic::lift::WeightedGraph;
use cms_ergodic::mmc::{brute_force_mmc, max_mean_cycle};
use cms_ergodic::numeric::{int, rat};
use cms_ergodic::potential::{CappedDifference, Linear, Potential, Table};
use cms_ergodic::real_shift::{grid_solve, AbsDistance};
use cms_ergodic::reduction::ReduceOptions;
use cms_ergodic::shift::{connect, Band, ConnectPolicy, FullShift, Renewal, TransitionSystem};
use cms_ergodic::solver::solve;
use cms_ergodic::surgery::splice;
use cms_ergodic::types::orbit_average;
use cms_ergodic::{Error, PeriodicOrbit, Rational, Symbol, Word};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = WeightedGraph<Rational>> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, -20i64..=20, 1i64..=3), 0..=n * n)
            .prop_map(move |es| WeightedGraph::from_edges(n, es.into_iter().map(|(u, v, p, q)| (u, v, rat(p, q)))))
    })
}

fn word(max: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max, 1..=8)
}

fn table() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, 1..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn karp_agrees_with_brute_force(g in graph()) {
        match (max_mean_cycle(&g), brute_force_mmc(&g, g.vertex_count())) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.value, &b.value);
                prop_assert_eq!(g.cycle_mean(&a.cycle), Some(a.value));
            }
            (Err(Error::NoCycle), Err(Error::NoCycle)) => {}
            (a, b) => prop_assert!(false, "karp {:?} vs brute force {:?}", a, b),
        }
    }

    #[test]
    fn float_karp_tracks_exact(g in graph()) {
        if let (Ok(a), Ok(b)) = (max_mean_cycle(&g), max_mean_cycle(&g.to_float())) {
            let exact = cms_ergodic::Scalar::to_f64(&a.value);
            prop_assert!((exact - b.value).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn orbits_forget_rotation(w in word(4), r in 0usize..8) {
        let w: Vec<Symbol> = w.into_iter().map(Symbol).collect();
        let n = w.len();
        let rotated: Vec<Symbol> = (0..n).map(|i| w[(i + r) % n]).collect();
        let a = PeriodicOrbit::new(Word::new(w.clone()), &FullShift).unwrap();
        let b = PeriodicOrbit::new(Word::new(rotated), &FullShift).unwrap();
        prop_assert_eq!(&a, &b);
        let doubled = PeriodicOrbit::new(Word::new([w.clone(), w].concat()), &FullShift).unwrap();
        prop_assert_eq!(&a, &doubled);
        prop_assert_eq!(orbit_average(&CappedDifference::f2(), &a), orbit_average(&CappedDifference::f2(), &b));
    }

    #[test]
    fn connectors_are_allowable_and_canonical(i in 0u64..12, j in 0u64..12, b in 1u64..3) {
        let policy = ConnectPolicy { max_symbol: 64, max_len: 64 };
        for ts in [&Renewal as &dyn TransitionSystem, &Band::new(b)] {
            let w = connect(ts, Symbol(i), Symbol(j), &policy).unwrap();
            let full: Vec<Symbol> = [vec![Symbol(i)], w.symbols().to_vec(), vec![Symbol(j)]].concat();
            prop_assert!(full.windows(2).all(|p| ts.allowed(p[0], p[1])));
            prop_assert_eq!(connect(ts, Symbol(i), Symbol(j), &policy).unwrap(), w);
        }
    }

    /// On the full shift a memory-one potential is maximized at a fixed point;
    /// past the table the tail only decreases.
    #[test]
    fn full_shift_table_maximum(values in table(), slope in 1i64..3) {
        let p = Table::new(values.iter().map(|&v| int(v)).collect(), int(slope), int(0)).unwrap();
        let sol = solve(&p, &FullShift, &ReduceOptions::new(rat(1, 2))).unwrap();
        let first_tail = -slope * values.len() as i64;
        prop_assert_eq!(sol.beta, int(*values.iter().max().unwrap().max(&first_tail)));
        prop_assert!(sol.certificate.passed());
    }

    /// Splicing never lowers the average by less than the stated gap.
    #[test]
    fn splice_gains_the_gap(w in word(5)) {
        let p = Linear::negated_index();
        let red = solve(&p, &Renewal, &ReduceOptions::new(rat(1, 2))).unwrap().reduction;
        // lift an arbitrary word to a renewal orbit: each symbol becomes its block
        let blocks: Vec<Symbol> = w.iter().flat_map(|&n| (0..=n).map(Symbol)).collect();
        let x = PeriodicOrbit::new(Word::new(blocks), &Renewal).unwrap();
        if let Ok(s) = splice(&p, &Renewal, &x, &red) {
            let gain = orbit_average(&p, &s.z) - orbit_average(&p, &x);
            prop_assert!(gain >= s.gap);
            prop_assert!(s.z.symbols().iter().all(|&c| red.hull2.contains(c)));
        }
    }

    #[test]
    fn grid_refinement_is_monotone(center in 0i64..8, scale in 1i64..4, top in 1i64..6, n in 2usize..9) {
        let f = AbsDistance::new(rat(center, 2), int(scale)).unwrap();
        let coarse = grid_solve(&f, &int(top), n).unwrap();
        let fine = grid_solve(&f, &int(top), 2 * n - 1).unwrap();
        prop_assert!(coarse.beta_hat <= fine.beta_hat);
        prop_assert!(fine.beta_hat <= int(0));
    }
}

// Large tables push I2 and the reduced lift up; fewer cases keep debug runs short.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Renewal orbits are concatenations of blocks `0 1 .. n`, so β is the
    /// best block mean.
    #[test]
    fn renewal_table_maximum(values in table(), slope in 1i64..3) {
        let p = Table::new(values.iter().map(|&v| int(v)).collect(), int(slope), int(0)).unwrap();
        let value = |i: usize| values.get(i).map_or(-slope * i as i64, |&v| v);
        let best = (0..values.len() + 8)
            .map(|n| int((0..=n).map(value).sum::<i64>()) / int(n as i64 + 1))
            .max()
            .unwrap();
        let sol = solve(&p, &Renewal, &ReduceOptions::new(rat(1, 2))).unwrap();
        prop_assert_eq!(&sol.beta, &best);
        prop_assert_eq!(orbit_average(&p, &sol.optimal_orbit), best);
        let red = &sol.reduction;
        prop_assert!(red.hull1.symbols.iter().all(|s| red.hull2.contains(*s)));
        prop_assert!(red.delta > int(0));
    }

    #[test]
    fn exact_and_float_solutions_agree(values in table()) {
        let p = Table::new(values.iter().map(|&v| int(v)).collect(), int(1), int(0)).unwrap();
        let a = solve(&p, &Renewal, &ReduceOptions::new(rat(1, 2))).unwrap();
        let b = solve(&p, &Renewal, &ReduceOptions::new(0.5f64)).unwrap();
        prop_assert!((cms_ergodic::Scalar::to_f64(&a.beta) - b.beta).abs() < 1e-9);
    }
}

#[test]
fn potentials_are_evaluated_on_their_memory() {
    assert_eq!(CappedDifference::f2().memory(), 2);
    assert_eq!(Linear::negated_index().memory(), 1);
}
