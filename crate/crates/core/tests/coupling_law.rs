use erw_core::coupling::{build_pair, default_burnin, sample_noise, verify};
use erw_core::rng::{below, stream_rng, uniform};
use erw_core::walk::{Excitation, SiteSet, WalkParams, Walker};
use erw_core::EstimateSummary;

#[test]
fn triple_frequencies_match_the_table() {
    let draws = 1_000_000;
    let noise = sample_noise(2, 0.2, 0.6, draws, 0, 21).unwrap();
    let mut counts = [0u64; 4];
    for &j in &noise.joint {
        let slot = match j {
            0b111 => 0,
            0b011 => 1,
            0b001 => 2,
            0b000 => 3,
            other => panic!("impossible triple {other:03b}"),
        };
        counts[slot] += 1;
    }
    for (c, p) in counts.iter().zip([0.5, 0.1, 0.2, 0.2]) {
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!(
            (*c as f64 / draws as f64 - p).abs() < 4.0 * se,
            "{counts:?}"
        );
    }
}

fn two_sample(a: &EstimateSummary, b: &EstimateSummary) -> bool {
    (a.mean - b.mean).abs() < 4.0 * (a.stderr().powi(2) + b.stderr().powi(2)).sqrt()
}

#[test]
fn coupled_walk_has_the_excited_walk_law() {
    let (d, m, beta0, beta, n) = (3, 2, 0.3, 0.6, 1000);
    let reps = 10_000u64;
    let mut cx = EstimateSummary::empty("x");
    let mut cn = EstimateSummary::empty("novel");
    for r in 0..reps {
        let noise = sample_noise(d, beta0, beta, n, 0, 1000 + r).unwrap();
        let pair = build_pair(&noise, Excitation::finite(m).unwrap()).unwrap();
        cx.push(pair.y.x(n) as f64);
        cn.push(pair.y.novel_count(n) as f64);
    }
    let params = WalkParams::erw(d, m, beta).unwrap();
    let mut dx = EstimateSummary::empty("x");
    let mut dn = EstimateSummary::empty("novel");
    for r in 0..reps {
        let mut rng = stream_rng(31, "direct", r);
        let mut walker = Walker::new(params).unwrap();
        let (mut x, mut novel) = (0i64, 0u64);
        for _ in 0..n {
            let s = walker.step(&mut rng).unwrap();
            x += i64::from(s.eps);
            novel += u64::from(s.history.unwrap().novel());
        }
        dx.push(x as f64);
        dn.push(novel as f64);
    }
    assert!(two_sample(&cx, &dx), "X: {} vs {}", cx.mean, dx.mean);
    assert!(two_sample(&cn, &dn), "N: {} vs {}", cn.mean, dn.mean);
}

/// Fraction of steps `burnin..burnin+n` of a lazy transverse walk that land
/// on a new site.
fn transverse_novelty(d: usize, burnin: usize, n: usize, index: u64) -> f64 {
    let mut rng = stream_rng(41, "transverse", index);
    let mut seen = SiteSet::new(d - 1);
    let mut z = vec![0i64; d - 1];
    let mut fresh = 0u64;
    for t in 0..burnin + n {
        let is_new = seen.insert(&z);
        if t >= burnin {
            fresh += u64::from(is_new);
        }
        if uniform(&mut rng) >= 1.0 / d as f64 {
            let dir = below(&mut rng, 2 * (d as u64 - 1)) as usize;
            z[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        }
    }
    fresh as f64 / n as f64
}

#[test]
fn stationary_walk_speed_matches_transverse_novelty() {
    let (d, beta0, n) = (4, 0.3, 100_000);
    let burnin = default_burnin(n);
    let mut speed = EstimateSummary::empty("speed");
    for r in 0..40 {
        let noise = sample_noise(d, beta0, 0.5, n, burnin, 500 + r).unwrap();
        let pair = build_pair(&noise, Excitation::finite(5).unwrap()).unwrap();
        assert!(verify(&pair).dominance_ok);
        speed.push(pair.ybar.x(n) as f64 / n as f64);
    }
    let novelty = EstimateSummary::from_values(
        "znew",
        (0..100).map(|r| transverse_novelty(d, burnin, n, r)),
    );
    let scale = beta0 / d as f64;
    let predicted = scale * novelty.mean;
    let combined = (speed.stderr().powi(2) + (scale * novelty.stderr()).powi(2)).sqrt();
    assert!(
        (speed.mean - predicted).abs() < 3.0 * combined,
        "{} vs {predicted} ({combined})",
        speed.mean
    );
}
