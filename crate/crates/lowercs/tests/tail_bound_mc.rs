//! Monte Carlo spot-check of the Bernoulli deviation bound
//! P(|X̄ − p| ≥ μ₁p + μ₂) ≤ exp(−M μ₁ μ₂ / (16e)) for M ≥ 16e/(μ₁μ₂).

use rand_core::{RngCore, SeedableRng};

fn empirical_deviation_probability(
    p: f64,
    m: usize,
    mu1: f64,
    mu2: f64,
    replicas: usize,
    seed: u64,
) -> f64 {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let threshold = mu1 * p + mu2;
    let mut exceed = 0usize;
    for _ in 0..replicas {
        let mut sum = 0usize;
        for _ in 0..m {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            if u < p {
                sum += 1;
            }
        }
        let mean = sum as f64 / m as f64;
        if (mean - p).abs() >= threshold {
            exceed += 1;
        }
    }
    exceed as f64 / replicas as f64
}

#[test]
fn bernoulli_tail_bound_holds_in_monte_carlo() {
    let sixteen_e = 16.0 * std::f64::consts::E;
    for (p, mu1, mu2) in [(0.3, 0.5, 0.05), (0.1, 0.8, 0.02), (0.5, 0.3, 0.04)] {
        let m_min = (sixteen_e / (mu1 * mu2)).ceil() as usize;
        let m = m_min.max(2000);
        let bound = (-(m as f64) * mu1 * mu2 / sixteen_e).exp();
        let empirical = empirical_deviation_probability(p, m, mu1, mu2, 4000, 31337);
        assert!(
            empirical <= bound + 0.01,
            "p={p} μ1={mu1} μ2={mu2}: empirical {empirical:.4} vs bound {bound:.4}"
        );
    }
}
