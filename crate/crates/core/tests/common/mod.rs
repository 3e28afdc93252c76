#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::{build_cone, build_custom, build_tent, Profile};

/// Random valid spline profile: knots from a bounded-slope walk, retried
/// until the spline itself passes validation.
pub fn random_profile(rng: &mut ChaCha8Rng) -> Profile {
    loop {
        let len: f64 = rng.random_range(1.5..6.0);
        let interior = rng.random_range(1..=4);
        let mut radii: Vec<f64> = (0..interior).map(|_| rng.random_range(0.1..len - 0.3)).collect();
        radii.sort_by(f64::total_cmp);
        if radii.windows(2).any(|w| w[1] - w[0] < 0.2) {
            continue;
        }
        let mut knots = vec![(0.0, 1.0)];
        for r in radii {
            let (r0, h0) = *knots.last().unwrap();
            let walk = h0 + rng.random_range(-0.6..0.6) * (r - r0);
            let h = walk.min(0.8 * (len - r)).max(0.05);
            knots.push((r, h));
        }
        knots.push((len, 0.0));
        if let Ok(p) = build_custom(&knots, true) {
            return p;
        }
    }
}

pub fn random_profiles(seed: u64, count: usize) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_profile(&mut rng)).collect()
}

pub const CORPUS_SEED: u64 = 20_240_611;

/// Cone, tents with reach 1, 2, 5, 10 and 20 random splines.
pub fn corpus() -> Vec<Profile> {
    let mut out = vec![build_cone()];
    for reach in [1.0, 2.0, 5.0, 10.0] {
        out.push(build_tent(reach).unwrap());
    }
    out.extend(
        random_profiles(CORPUS_SEED, 20)
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.with_label(format!("random#{i}"))),
    );
    out
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Print the verdict line and fail the test on a miss.
pub fn report(id: u32, title: &str, failures: &[String], detail: &str) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{verdict}] {title}: {detail}");
    for f in failures.iter().take(12) {
        println!("    {f}");
    }
    if failures.len() > 12 {
        println!("    ... {} more", failures.len() - 12);
    }
    assert!(failures.is_empty(), "criterion {id} failed with {} misses", failures.len());
}
