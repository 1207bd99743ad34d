use erw_core::oracle::{
    exact_expectation, exact_expectation_rational, girsanov_check, Enumerator, Rational,
    DEFAULT_BUDGET,
};
use erw_core::rng::stream_rng;
use erw_core::walk::{step_probabilities, WalkParams, Walker};
use erw_core::EstimateSummary;

fn path_index(moves: &[u8]) -> usize {
    moves.iter().fold(0, |acc, &m| acc * 4 + m as usize)
}

#[test]
fn simulated_paths_follow_the_enumerated_law() {
    let params = WalkParams::erw(2, 1, 0.5).unwrap();
    let n = 6;
    let runs = 1_000_000u64;
    let mut counts = vec![0u64; 1 << (2 * n)];
    let mut moves = vec![0u8; n];
    for seed in 0..runs {
        let mut rng = stream_rng(11, "oracle-mc", seed);
        let mut walker = Walker::novelty_only(params).unwrap();
        for m in moves.iter_mut() {
            *m = walker.step(&mut rng).unwrap().mv as u8;
        }
        counts[path_index(&moves)] += 1;
    }
    let mut probs = vec![0.0; counts.len()];
    Enumerator::new(params, n, DEFAULT_BUDGET)
        .unwrap()
        .for_each(|path, &p| {
            probs[path_index(path.moves())] = p;
            Ok(())
        })
        .unwrap();
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // 4096 cells: 5 standard errors is a 1% family-wise band.
    let mut worst = 0.0f64;
    let mut over_four = 0;
    for (&c, &p) in counts.iter().zip(&probs) {
        if p == 0.0 {
            assert_eq!(c, 0);
            continue;
        }
        let expected = runs as f64 * p;
        let z = (c as f64 - expected) / (expected * (1.0 - p)).sqrt();
        worst = worst.max(z.abs());
        over_four += usize::from(z.abs() > 4.0);
    }
    assert!(worst < 5.0, "max |z| = {worst}");
    assert!(over_four <= 3, "{over_four} cells beyond 4 standard errors");
}

#[test]
fn speed_equals_drift_times_excited_fraction_exactly() {
    for d in [2, 3] {
        for m in [1, 2, 3] {
            for beta in [0.3, 0.7, 1.0] {
                let p = WalkParams::erw(d, m, beta).unwrap();
                for n in 1..=6 {
                    if d == 3 && n > 5 {
                        continue;
                    }
                    let lhs = exact_expectation(&p, n, |v| v.x_n() as f64).unwrap();
                    let rhs = exact_expectation(&p, n, |v| v.excited_count() as f64).unwrap();
                    assert!(
                        (lhs - beta / d as f64 * rhs).abs() < 1e-12,
                        "d={d} m={m} beta={beta} n={n}"
                    );
                }
            }
        }
    }
}

#[test]
fn speed_identity_in_rational_arithmetic() {
    let p = WalkParams::erw(2, 2, 0.5).unwrap();
    let beta = Rational::new(1, 2);
    let x =
        exact_expectation_rational(&p, beta, 5, |v| Ok(Rational::from_integer(v.x_n() as i128)))
            .unwrap();
    let ex = exact_expectation_rational(&p, beta, 5, |v| {
        Ok(Rational::from_integer(v.excited_count() as i128))
    })
    .unwrap();
    assert_eq!(x, ex * Rational::new(1, 4));
}

#[test]
fn speed_identity_holds_in_simulation() {
    let params = WalkParams::erw(2, 1, 0.6).unwrap();
    let n = 1000;
    let gap = (0..4000u64).map(|r| {
        let mut rng = stream_rng(5, "identity", r);
        let mut walker = Walker::novelty_only(params).unwrap();
        let (mut x, mut ex) = (0i64, 0u64);
        for _ in 0..n {
            let s = walker.step(&mut rng).unwrap();
            x += i64::from(s.eps);
            ex += u64::from(s.excited);
        }
        x as f64 - 0.3 * ex as f64
    });
    let s = EstimateSummary::from_values("gap", gap);
    assert!(
        s.mean.abs() < 3.0 * s.stderr(),
        "gap {} +- {}",
        s.mean,
        s.stderr()
    );
}

#[test]
fn cylinder_events_move_with_the_weight() {
    for (beta0, beta) in [(0.0, 0.5), (0.3, 0.7), (0.8, 0.1)] {
        let p = WalkParams::erw(2, 1, beta0).unwrap();
        assert!(girsanov_check(&p, beta0, beta, 6).unwrap() <= 1e-12);
    }
}

#[test]
fn oracle_is_normalized_and_matches_single_steps() {
    for (d, m, beta) in [(2, 1, 0.5), (3, 2, 0.25), (4, 1, 1.0)] {
        let p = WalkParams::erw(d, m, beta).unwrap();
        assert!((exact_expectation(&p, 4, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
        let probs = step_probabilities(&p, true);
        for (mv, &q) in probs.iter().enumerate() {
            let got =
                exact_expectation(&p, 1, |v| f64::from(u8::from(v.moves()[0] as usize == mv)))
                    .unwrap();
            assert_eq!(got, q);
        }
    }
}
