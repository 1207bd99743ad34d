use erw_core::estimators::{
    novelty_rate, simulate_cycles, simulate_summary, speed_finite_time, truncated_rate,
};
use erw_core::renewal::{detect_direct_xs, ConfirmPolicy};
use erw_core::rng::stream_rng;
use erw_core::stats::covariance;
use erw_core::walk::{WalkParams, Walker};
use erw_core::weights::{reweighted_mean, WeightState, WeightTrace};
use erw_core::EstimateSummary;

#[test]
fn consecutive_cycle_lengths_are_uncorrelated() {
    let params = WalkParams::erw(2, 1, 0.8).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut r = 0;
    while a.len() < 20_000 {
        let path = simulate_cycles(
            &params,
            5000,
            ConfirmPolicy::FULL_SUFFIX,
            &mut stream_rng(3, "cycles", r),
        )
        .unwrap();
        for w in path.cycles.windows(2) {
            a.push(w[0].dt as f64);
            b.push(w[1].dt as f64);
        }
        r += 1;
    }
    let corr = covariance(&a, &b) / (covariance(&a, &a) * covariance(&b, &b)).sqrt();
    let se = 1.0 / (a.len() as f64).sqrt();
    assert!(corr.abs() < 4.0 * se, "corr {corr} se {se}");
}

#[test]
fn unbiased_walks_rarely_confirm_renewals() {
    let params = WalkParams::erw(2, 1, 0.0).unwrap();
    let mut fractions = Vec::new();
    for h in [1000u64, 100_000] {
        let policy = ConfirmPolicy::with_margin((h / 10) as usize);
        let with = (0..400u64)
            .filter(|&s| {
                let p = simulate_cycles(&params, h, policy, &mut stream_rng(4, "flat", s)).unwrap();
                !p.record.taus.is_empty()
            })
            .count();
        fractions.push(with as f64 / 400.0);
    }
    assert!(fractions[1] < fractions[0], "{fractions:?}");
    assert!(fractions[1] < 0.2, "{fractions:?}");
}

#[test]
fn censored_tail_marks_late_candidates() {
    let params = WalkParams::erw(2, 1, 0.9).unwrap();
    let mut walker = Walker::novelty_only(params).unwrap();
    let mut rng = stream_rng(9, "tail", 0);
    let mut xs = vec![0i64];
    for _ in 0..3000 {
        let s = walker.step(&mut rng).unwrap();
        xs.push(xs.last().unwrap() + i64::from(s.eps));
    }
    let full = detect_direct_xs(&xs, ConfirmPolicy::FULL_SUFFIX);
    let cut = detect_direct_xs(&xs, ConfirmPolicy::with_margin(500));
    assert!(cut.censored_tail);
    assert!(cut.taus.iter().all(|&t| t + 500 <= 3000));
    assert_eq!(&full.taus[..cut.taus.len()], &cut.taus[..]);
}

#[test]
fn cycle_weights_average_to_one() {
    let (beta0, beta) = (0.5, 0.6);
    let params = WalkParams::erw(2, 1, beta0).unwrap();
    let mut weights = EstimateSummary::empty("cycle_weight");
    let mut r = 0;
    while weights.count < 20_000 {
        let mut walker = Walker::novelty_only(params).unwrap();
        let mut rng = stream_rng(6, "tau-weight", r);
        let (mut xs, mut eps, mut flags) = (vec![0i64], Vec::new(), Vec::new());
        for _ in 0..4000 {
            let s = walker.step(&mut rng).unwrap();
            xs.push(xs.last().unwrap() + i64::from(s.eps));
            eps.push(s.eps);
            flags.push(s.excited);
        }
        let trace = WeightTrace::from_steps(&eps, &flags, beta, beta0).unwrap();
        let record = detect_direct_xs(&xs, ConfirmPolicy::FULL_SUFFIX);
        for w in record.taus.windows(2) {
            weights.push((trace.at(w[1]).log_m - trace.at(w[0]).log_m).exp());
        }
        r += 1;
    }
    assert!(
        (weights.mean - 1.0).abs() < 3.0 * weights.stderr(),
        "{} +- {}",
        weights.mean,
        weights.stderr()
    );
}

fn displacement_and_log_weight(
    params: WalkParams,
    beta: f64,
    n: usize,
    rng_index: u64,
) -> (f64, f64) {
    let mut rng = stream_rng(8, "reweight", rng_index);
    let mut walker = Walker::novelty_only(params).unwrap();
    let mut w = WeightState::new();
    let mut x = 0i64;
    for _ in 0..n {
        let s = walker.step(&mut rng).unwrap();
        x += i64::from(s.eps);
        w.push(s.eps, s.excited, beta, params.beta).unwrap();
    }
    (x as f64 / n as f64, w.log_m)
}

#[test]
fn reweighting_matches_direct_simulation() {
    let n = 1000;
    let source = WalkParams::erw(2, 1, 0.4).unwrap();
    let target = WalkParams::erw(2, 1, 0.5).unwrap();
    let samples: Vec<(f64, f64)> = (0..20_000)
        .map(|r| displacement_and_log_weight(source, 0.5, n, r))
        .collect();
    let rw = reweighted_mean(&samples).unwrap();
    assert!(rw.ess > 1000.0, "ess {}", rw.ess);
    let ws: Vec<f64> = samples
        .iter()
        .map(|&(_, lw)| (lw - rw.log_scale).exp())
        .collect();
    let total: f64 = ws.iter().sum();
    let var: f64 = samples
        .iter()
        .zip(&ws)
        .map(|(&(f, _), w)| (w * (f - rw.mean)).powi(2))
        .sum::<f64>()
        / (total * total);
    let direct = EstimateSummary::from_values(
        "direct",
        (0..5000).map(|r| displacement_and_log_weight(target, 0.5, n, 100_000 + r).0),
    );
    let combined = (var + direct.stderr().powi(2)).sqrt();
    assert!(
        (rw.mean - direct.mean).abs() < 3.0 * combined,
        "{} vs {} ({combined})",
        rw.mean,
        direct.mean
    );
}

#[test]
fn displacement_and_excitation_speeds_agree() {
    for d in [2, 3] {
        for beta in [0.3, 0.7] {
            let params = WalkParams::erw(d, 1, beta).unwrap();
            let paths: Vec<_> = (0..2000)
                .map(|r| {
                    simulate_summary(&params, 2000, &[], &mut stream_rng(12, "pair", r)).unwrap()
                })
                .collect();
            let (a, b) = speed_finite_time(&paths, &params).unwrap();
            let (a, b) = (a.finish("a"), b.finish("b"));
            assert!(
                a.agrees_with(&b, 3.0),
                "d={d} beta={beta}: {} vs {}",
                a.mean,
                b.mean
            );
        }
    }
}

#[test]
fn window_counts_dominate_novelty() {
    let params = WalkParams::erw(3, 1, 0.2).unwrap();
    let windows = [1, 2, 4, 8, 16];
    let paths: Vec<_> = (0..200)
        .map(|r| {
            simulate_summary(&params, 3000, &windows, &mut stream_rng(13, "windows", r)).unwrap()
        })
        .collect();
    let plain = novelty_rate(&paths).unwrap().mean;
    let mut last = f64::INFINITY;
    for k in windows {
        let rate = truncated_rate(&paths, k).unwrap().mean;
        assert!(rate <= last && rate >= plain);
        last = rate;
    }
    assert_eq!(truncated_rate(&paths, 1).unwrap().mean, 1.0);
}
