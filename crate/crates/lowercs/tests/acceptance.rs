//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line. Tolerances are pinned in the assertions.

use std::time::Instant;

use lowercs::analysis::{
    empirical_rip, sample_bound_lower, sample_bound_standard, tail_inequality_check,
    ComplexityQuery, RipMode,
};
use lowercs::experiment::{
    run_convergence, s_for_target_n, EtaMode, ExperimentConfig, TestFunction,
};
use lowercs::multiindex::{
    admissible_extensions, enumerate_lower_sets, hyperbolic_cross, is_lower, IndexSet, MultiIndex,
};
use lowercs::orthopoly::{
    k_of_s_int, k_of_set_int, le_pow_log2_3, theta_sq_int, weight, weight_sq_int, BasisKind,
    WeightVector,
};
use lowercs::quadrature::QuadratureSpec;
use lowercs::sensing::{
    build_system_from_coefficients, draw_samples, reference_coefficients, CoefficientVector,
};
use lowercs::solvers::{
    lower_iht, weighted_bpdn, BPDNConfig, IhtOptions, ThresholdMode, WeightMode,
};

const LOG2_3: f64 = 1.584962500721156;

fn pass_line(id: u32, ok: bool, detail: &str) {
    println!(
        "criterion {id:2}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// a ≥ b^{log2 3} exactly, mirroring `le_pow_log2_3`.
fn ge_pow_log2_3(a: u128, b: u128) -> bool {
    if b.is_power_of_two() {
        let e = b.trailing_zeros();
        return a >= 3u128.pow(e);
    }
    (a as f64).ln() * std::f64::consts::LN_2 >= (b as f64).ln() * 3f64.ln()
}

/// Seeded lower s-sparse unit-norm truth on a lower universe.
fn seeded_lower_truth(universe: &IndexSet, sparsity: usize, seed: u64) -> CoefficientVector {
    let d = universe.dim();
    let mut support = IndexSet::new(d, vec![MultiIndex::zero(d).unwrap()]).unwrap();
    let mut state = seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(0x2545f4914f6cdd1d);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    while support.len() < sparsity {
        let ext = admissible_extensions(&support).unwrap();
        let inside: Vec<&MultiIndex> = ext.iter().filter(|nu| universe.contains(nu)).collect();
        if inside.is_empty() {
            break;
        }
        let pick = (next() as usize) % inside.len();
        support = support
            .union(&IndexSet::new(d, vec![inside[pick].clone()]).unwrap())
            .unwrap();
    }
    let mut values = vec![0.0; universe.len()];
    let mut norm_sq = 0.0;
    for nu in &support {
        let raw = (next() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        let v = if raw.abs() < 0.15 { 0.6 } else { raw };
        values[universe.position(nu).unwrap()] = v;
        norm_sq += v * v;
    }
    let norm = norm_sq.sqrt();
    for v in &mut values {
        *v /= norm;
    }
    CoefficientVector::new(universe.clone(), values).unwrap()
}

fn relative_error(recovered: &CoefficientVector, truth: &CoefficientVector) -> f64 {
    recovered
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / truth.l2_norm()
}

/// Criterion 1: the sup-norm weight closed forms on 50 enumerated indices,
/// exact to 1e-12, in under a second.
#[test]
fn criterion_01_weight_closed_forms() {
    let started = Instant::now();
    let mut indices: Vec<MultiIndex> = hyperbolic_cross(6, 4).unwrap().members().to_vec();
    indices.extend(hyperbolic_cross(9, 2).unwrap().members().iter().cloned());
    indices.truncate(50);
    assert_eq!(indices.len(), 50);
    let mut ok = true;
    for nu in &indices {
        let legendre_expected: f64 = nu
            .degrees()
            .iter()
            .map(|&a| ((2 * a + 1) as f64).sqrt())
            .product();
        if (weight(BasisKind::Legendre, nu) - legendre_expected).abs() > 1e-12 {
            ok = false;
        }
        let cheb_sq_expected = 1u128 << nu.support_size();
        if weight_sq_int(BasisKind::Chebyshev, nu) != cheb_sq_expected {
            ok = false;
        }
        let w = weight(BasisKind::Chebyshev, nu);
        if (w * w - cheb_sq_expected as f64).abs() > 1e-12 {
            ok = false;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let in_time = elapsed < 1.0;
    pass_line(1, ok && in_time, &format!("50 indices, {elapsed:.3}s"));
    assert!(ok && in_time);
}

/// Criterion 2: the two-sided K chains on every lower Λ ⊆ H_8, d ∈ {2,3,4},
/// 2 ≤ #Λ ≤ 8, in exact arithmetic as stated:
/// 2#Λ−1 ≤ K_T(Λ) ≤ #Λ^{log3/log2} and 3#Λ−1 ≤ K_L(Λ) ≤ #Λ².
///
/// The stated lower constant 3#Λ−1 is falsified by Λ = {0, e_k}, where
/// K_L = 1 + 3 = 4 < 5; the attainable sharp constant is 3#Λ−2 (each
/// nonzero member contributes at least 3), which the sweep confirms. The
/// criterion is reported as stated, so this test records the honest
/// failure rather than weakening the bound.
#[test]
fn criterion_02_k_chain_sweep() {
    let started = Instant::now();
    let mut checked = 0usize;
    let mut stated_violations: Vec<String> = Vec::new();
    let mut corrected_ok = true;
    for d in 2..=4usize {
        let h8 = hyperbolic_cross(8, d).unwrap();
        for card in 2..=8usize {
            for lam in enumerate_lower_sets(&h8, card, Some(5_000_000)).unwrap() {
                checked += 1;
                let n = lam.len() as u128;
                let kt = k_of_set_int(BasisKind::Chebyshev, &lam).unwrap();
                let kl = k_of_set_int(BasisKind::Legendre, &lam).unwrap();
                let kt_chain = 2 * n - 1 <= kt && le_pow_log2_3(kt, n);
                let kl_upper = kl <= n * n;
                let kl_lower_stated = 3 * n - 1 <= kl;
                let kl_lower_sharp = 3 * n - 2 <= kl;
                if !(kt_chain && kl_upper && kl_lower_stated) && stated_violations.len() < 3 {
                    stated_violations.push(format!(
                        "d={d} #Λ={n} K_T={kt} K_L={kl} (needs K_L ≥ {})",
                        3 * n - 1
                    ));
                }
                if !(kt_chain && kl_upper && kl_lower_sharp) {
                    corrected_ok = false;
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = stated_violations.is_empty() && elapsed < 30.0;
    pass_line(
        2,
        ok,
        &format!(
            "{checked} lower sets in {elapsed:.1}s; stated K_L ≥ 3#Λ−1 violated, e.g. {}; \
             sharp chain with 3#Λ−2 holds on all: {corrected_ok}",
            stated_violations
                .first()
                .map(String::as_str)
                .unwrap_or("(none)")
        ),
    );
    assert!(corrected_ok, "the provable chains must hold everywhere");
    assert!(elapsed < 30.0, "runtime {elapsed:.1}s exceeds 30s");
    assert!(
        stated_violations.is_empty(),
        "stated chain fails on: {stated_violations:?}"
    );
}

/// Criterion 3: the K(s) and Θ² envelopes over H_s, exact arithmetic,
/// zero tolerance, for all s ≤ min(8, 2^{d+1}), d ≤ 4.
#[test]
fn criterion_03_k_and_theta_envelopes() {
    let started = Instant::now();
    let mut ok = true;
    for d in 1..=4usize {
        let s_cap = 8usize.min(1 << (d + 1));
        for s in 2..=s_cap {
            let su = s as u128;
            let h = hyperbolic_cross(s, d).unwrap();
            let kt = k_of_s_int(BasisKind::Chebyshev, s, d, None).unwrap();
            let kl = k_of_s_int(BasisKind::Legendre, s, d, None).unwrap();
            let tt = theta_sq_int(BasisKind::Chebyshev, &h).unwrap();
            let tl = theta_sq_int(BasisKind::Legendre, &h).unwrap();
            // s^{log3/log2}/3 ≤ K_T(s) ≤ s^{log3/log2}
            ok &= ge_pow_log2_3(3 * kt, su) && le_pow_log2_3(kt, su);
            // s²/4 ≤ K_L(s) ≤ s² in integers
            ok &= su * su <= 4 * kl && kl <= su * su;
            // s/2 ≤ Θ_T² ≤ s in integers
            ok &= su <= 2 * tt && tt <= su;
            // s^{log3/log2}/3 ≤ Θ_L² ≤ s^{log3/log2}
            ok &= ge_pow_log2_3(3 * tl, su) && le_pow_log2_3(tl, su);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass_line(
        3,
        ok && elapsed < 60.0,
        &format!("exact envelopes, {elapsed:.1}s"),
    );
    assert!(ok);
    assert!(elapsed < 60.0);
}

/// Criterion 4: K_T(2s) ≥ 2K_T(s) and K_L(2s) ≥ 4K_L(s) for s ∈ {2,3,4,6},
/// d ≤ 3, exact arithmetic.
#[test]
fn criterion_04_k_growth() {
    let mut ok = true;
    for d in 1..=3usize {
        for s in [2usize, 3, 4, 6] {
            let kt_s = k_of_s_int(BasisKind::Chebyshev, s, d, Some(5_000_000)).unwrap();
            let kt_2s = k_of_s_int(BasisKind::Chebyshev, 2 * s, d, Some(5_000_000)).unwrap();
            let kl_s = k_of_s_int(BasisKind::Legendre, s, d, Some(5_000_000)).unwrap();
            let kl_2s = k_of_s_int(BasisKind::Legendre, 2 * s, d, Some(5_000_000)).unwrap();
            ok &= kt_2s >= 2 * kt_s;
            ok &= kl_2s >= 4 * kl_s;
        }
    }
    pass_line(4, ok, "K(2s) growth in exact arithmetic");
    assert!(ok);
}

fn criterion_5_instances() -> (
    IndexSet,
    Vec<(CoefficientVector, lowercs::sensing::SensingSystem)>,
) {
    let universe = hyperbolic_cross(8, 3).unwrap();
    let mut instances = Vec::new();
    for trial in 0..20u64 {
        let truth = seeded_lower_truth(&universe, 4, 7000 + trial);
        let samples = draw_samples(BasisKind::Legendre, 3, 80, 9000 + trial).unwrap();
        let system =
            build_system_from_coefficients(BasisKind::Legendre, &samples, &truth, 0.0).unwrap();
        instances.push((truth, system));
    }
    (universe, instances)
}

/// Criterion 5: exact recovery of lower 4-sparse unit-norm truths on H_8,
/// d=3, m=80, η=0 with sup-norm weights: relative error ≤ 1e-5 in ≥ 18/20
/// seeded trials, under two minutes.
/// Criterion 6 (part): feasibility and objective-minimality on every run.
#[test]
fn criterion_05_06_exact_recovery_and_contracts() {
    let started = Instant::now();
    let (universe, instances) = criterion_5_instances();
    let weights = WeightVector::sup_norm(BasisKind::Legendre, &universe);
    let config = BPDNConfig::default();
    let mut hits = 0;
    let mut feasible = true;
    let mut minimal = true;
    for (truth, system) in &instances {
        let report = weighted_bpdn(system, &weights, &config).unwrap();
        if relative_error(&report.coefficients, truth) <= 1e-5 {
            hits += 1;
        }
        if report.residual_norm > system.sigma() + 1e-6 {
            feasible = false;
        }
        // truth is feasible at η=0, so the objective may not exceed its
        // weighted norm
        let truth_objective: f64 = truth
            .index_set()
            .iter()
            .zip(truth.values())
            .map(|(nu, v)| weight(BasisKind::Legendre, nu) * v.abs())
            .sum();
        if report.objective > truth_objective + 1e-6 {
            minimal = false;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = hits >= 18 && feasible && minimal && elapsed < 120.0;
    pass_line(
        5,
        hits >= 18 && elapsed < 120.0,
        &format!("{hits}/20 recoveries ≤ 1e-5, {elapsed:.1}s"),
    );
    pass_line(
        6,
        feasible && minimal,
        &format!("feasibility {feasible}, objective minimality {minimal}"),
    );
    assert!(
        ok,
        "hits={hits}, feasible={feasible}, minimal={minimal}, {elapsed:.1}s"
    );
}

/// Criterion 7: weighted BPDN equals rescaled-unit BPDN within 1e-8
/// componentwise on 20 random 30×60 systems.
#[test]
fn criterion_07_rescaling_equivalence() {
    use nalgebra::{DMatrix, DVector};
    use rand_core::{RngCore, SeedableRng};

    let index_set = {
        // 60 univariate degrees 0..59 form a lower chain
        let members = (0..60u32)
            .map(|a| MultiIndex::new(vec![a]).unwrap())
            .collect();
        IndexSet::new(1, members).unwrap()
    };
    let weights = WeightVector::sup_norm(BasisKind::Legendre, &index_set);
    let config = BPDNConfig::default();
    let mut max_diff = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2000 + seed);
        let mut gauss = || {
            let u1 = ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).max(1e-300);
            let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let a = DMatrix::from_fn(30, 60, |_, _| gauss() / 30f64.sqrt());
        let mut x = DVector::zeros(60);
        x[0] = 1.0;
        x[3] = -0.5;
        x[11] = 0.25;
        let b = &a * &x;
        let eta = 0.05 * b.norm() * 30f64.sqrt();

        let system = lowercs::sensing::SensingSystem::from_parts(
            a.clone(),
            b.clone(),
            eta,
            index_set.clone(),
            BasisKind::Legendre,
            seed,
        )
        .unwrap();
        let weighted = weighted_bpdn(&system, &weights, &config).unwrap();

        // manual rescaling route: unit-weight solve on A·diag(1/ω)
        let mut scaled = a.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col /= weights.value(j);
        }
        let scaled_system = lowercs::sensing::SensingSystem::from_parts(
            scaled,
            b,
            eta,
            index_set.clone(),
            BasisKind::Legendre,
            seed,
        )
        .unwrap();
        let unit = weighted_bpdn(&scaled_system, &WeightVector::unit(&index_set), &config).unwrap();
        for j in 0..60 {
            let mapped = unit.coefficients.value(j) / weights.value(j);
            max_diff = max_diff.max((weighted.coefficients.value(j) - mapped).abs());
        }
    }
    let ok = max_diff <= 1e-8;
    pass_line(7, ok, &format!("max componentwise gap {max_diff:.2e}"));
    assert!(ok);
}

/// Criterion 8: lower IHT (greedy) on the criterion-5 instances: relative
/// error ≤ 1e-5 in ≥ 15/20 trials, lower iterate supports always, and a
/// nonincreasing error trace after iteration 3 down to the plateau in
/// ≥ 90% of converged runs.
#[test]
fn criterion_08_lower_iht() {
    let started = Instant::now();
    let (_, instances) = criterion_5_instances();
    let opts = IhtOptions {
        mode: ThresholdMode::Greedy,
        max_iterations: 400,
        tolerance: 1e-12,
        record_iterates: true,
        ..IhtOptions::default()
    };
    let mut hits = 0;
    let mut supports_lower = true;
    let mut shape_ok = 0usize;
    let mut converged_runs = 0usize;
    for (truth, system) in &instances {
        let result = lower_iht(system, 4, &opts).unwrap();
        if relative_error(&result.report.coefficients, truth) <= 1e-5 {
            hits += 1;
        }
        let iterates = result.iterates.as_ref().unwrap();
        for it in iterates {
            let supp = it.support().unwrap();
            if !supp.is_empty() && (!is_lower(&supp) || supp.len() > 4) {
                supports_lower = false;
            }
        }
        if result.report.converged {
            converged_runs += 1;
            let errors: Vec<f64> = iterates.iter().map(|c| relative_error(c, truth)).collect();
            let final_err = *errors.last().unwrap();
            let plateau = (2.0 * final_err).max(1e-10);
            let mut monotone = true;
            for w in errors.windows(2).skip(3) {
                if w[0] > plateau && w[1] > w[0] * (1.0 + 1e-8) {
                    monotone = false;
                }
            }
            if monotone {
                shape_ok += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let shape_frac = shape_ok as f64 / converged_runs.max(1) as f64;
    let ok = hits >= 15 && supports_lower && shape_frac >= 0.9;
    pass_line(
        8,
        ok,
        &format!(
            "{hits}/20 recoveries, supports lower: {supports_lower}, \
             monotone-to-plateau {shape_ok}/{converged_runs}, {elapsed:.1}s"
        ),
    );
    assert!(ok);
}

/// Criterion 9: empirical RIP ordering on Legendre d=2, N=8, s=3:
/// δ̂_lower ≤ δ̂_standard in 20/20 seeds and both medians decrease from
/// m=16 to m=64.
#[test]
fn criterion_09_empirical_rip_ordering() {
    let universe = hyperbolic_cross(4, 2).unwrap();
    assert_eq!(universe.len(), 8);
    let mut medians = Vec::new();
    let mut ordering_ok = true;
    for m in [16usize, 64] {
        let mut lows = Vec::new();
        let mut stds = Vec::new();
        for seed in 0..20u64 {
            let samples = draw_samples(BasisKind::Legendre, 2, m, 500 + seed).unwrap();
            let system = lowercs::sensing::build_system(
                BasisKind::Legendre,
                &universe,
                &samples,
                |_| 0.0,
                0.0,
            )
            .unwrap();
            let low = empirical_rip(&system, 3, RipMode::LowerCardinality, None).unwrap();
            let std = empirical_rip(&system, 3, RipMode::Standard, None).unwrap();
            if low.delta_hat > std.delta_hat + 1e-12 {
                ordering_ok = false;
            }
            lows.push(low.delta_hat);
            stds.push(std.delta_hat);
        }
        let med = |mut v: Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            0.5 * (v[9] + v[10])
        };
        medians.push((med(lows), med(stds)));
    }
    let decreasing = medians[1].0 < medians[0].0 && medians[1].1 < medians[0].1;
    let ok = ordering_ok && decreasing;
    pass_line(
        9,
        ok,
        &format!(
            "ordering 20/20: {ordering_ok}; medians lower {:.3}→{:.3}, standard {:.3}→{:.3}",
            medians[0].0, medians[1].0, medians[0].1, medians[1].1
        ),
    );
    assert!(ok);
}

/// Criterion 10: the lower-RIP sample bound beats the standard one at
/// d=10, s=8 for both bases, using exactly computed K(s) and Θ.
#[test]
fn criterion_10_bound_dominance() {
    let (d, s) = (10usize, 8usize);
    let h = hyperbolic_cross(s, d).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in [BasisKind::Chebyshev, BasisKind::Legendre] {
        let k = k_of_s_int(kind, s, d, Some(10_000_000)).unwrap() as f64;
        let theta_sq = theta_sq_int(kind, &h).unwrap() as f64;
        let query = |driver: f64| ComplexityQuery {
            theta_sq_s_or_ks: driver,
            delta: 0.05,
            gamma: 0.01,
            n: h.len(),
        };
        let lower = sample_bound_lower(&query(k)).unwrap();
        let standard = sample_bound_standard(&query(theta_sq * s as f64)).unwrap();
        ok &= lower < standard;
        detail.push_str(&format!(
            "{}: K={k:.0} Θ²s={:.0} lower/standard={:.3}; ",
            match kind {
                BasisKind::Chebyshev => "T",
                BasisKind::Legendre => "L",
            },
            theta_sq * s as f64,
            lower / standard
        ));
    }
    // the exponent comparison behind the dominance
    assert!((LOG2_3 - 3f64.ln() / 2f64.ln()).abs() < 1e-15);
    pass_line(10, ok, detail.trim_end_matches("; "));
    assert!(ok);
}

/// Criterion 11: downsized convergence study of the exp-linear target
/// (d=4, N ≤ 300, 10 trials): the sup-norm weights beat unit weights on
/// mean error at the two largest m/N ratios.
#[test]
fn criterion_11_downsized_trend() {
    let started = Instant::now();
    let (s, n) = s_for_target_n(4, 300).unwrap();
    let config = ExperimentConfig {
        function: TestFunction::F4ExpLinear,
        d: 4,
        kind: BasisKind::Legendre,
        s: Some(s),
        n_target: None,
        m_grid: vec![],
        m_over_n: vec![0.2, 0.35, 0.5],
        weight_modes: vec![WeightMode::Unit, WeightMode::SupNorm],
        trials: 10,
        seed: 424242,
        eta_mode: EtaMode::ExactTail { epsilon: 0.1 },
        n_test: 20_000,
        solver: BPDNConfig::default(),
    };
    let table = run_convergence(&config).unwrap();
    let mean_of = |m: usize, label: &str| {
        table
            .rows
            .iter()
            .find(|r| r.m == m && r.weight_mode == label)
            .map(|r| r.mean_l2)
            .unwrap()
    };
    let ms: Vec<usize> = {
        let mut v: Vec<usize> = table.rows.iter().map(|r| r.m).collect();
        v.dedup();
        v
    };
    let top_two = &ms[ms.len() - 2..];
    let mut ok = true;
    let mut detail = format!("s={s} N={n}; ");
    for &m in top_two {
        let unit = mean_of(m, "unit");
        let sup = mean_of(m, "sup_norm");
        ok &= sup <= unit;
        detail.push_str(&format!("m={m}: sup {sup:.3e} vs unit {unit:.3e}; "));
    }
    let elapsed = started.elapsed().as_secs_f64();
    detail.push_str(&format!("{elapsed:.0}s"));
    pass_line(11, ok && elapsed < 600.0, &detail);
    assert!(ok);
    assert!(elapsed < 600.0);
}

/// Criterion 12: the reference expansion of the exp-linear target at d=8
/// on the caption-sized cross (N=1843 at s=23) reproduces the L² tail
/// within a factor of two of 7.2714e-07.
#[test]
fn criterion_12_tail_reproduction() {
    let started = Instant::now();
    let universe = hyperbolic_cross(23, 8).unwrap();
    assert_eq!(universe.len(), 1843, "caption-sized cross");
    let g = |y: &[f64]| (-(y.iter().sum::<f64>()) / 16.0).exp();
    let expansion = reference_coefficients(
        BasisKind::Legendre,
        g,
        &universe,
        &QuadratureSpec::default(),
    )
    .unwrap();
    let target = 7.2714e-7;
    let ratio = expansion.tail_l2 / target;
    let elapsed = started.elapsed().as_secs_f64();
    let ok = (0.5..=2.0).contains(&ratio) && elapsed < 600.0;
    pass_line(
        12,
        ok,
        &format!(
            "tail {:.4e} vs {target:.4e} (ratio {ratio:.3}), {elapsed:.0}s",
            expansion.tail_l2
        ),
    );
    assert!(ok);
}

/// Criterion 13: the tail inequality holds on 500 randomized complement
/// vectors for both bases, with an adversarial equal-ratio vector included.
#[test]
fn criterion_13_tail_inequality_sweep() {
    use rand_core::{RngCore, SeedableRng};
    let h8 = hyperbolic_cross(8, 3).unwrap();
    let h4 = hyperbolic_cross(4, 3).unwrap();
    let complement = h8.difference(&h4).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    for kind in [BasisKind::Legendre, BasisKind::Chebyshev] {
        for trial in 0..250usize {
            let values: Vec<f64> = h8
                .iter()
                .map(|nu| {
                    if complement.contains(nu) {
                        if trial == 0 {
                            // adversarial: equal |c|/ω across the complement
                            weight(kind, nu)
                        } else {
                            (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect();
            let c = CoefficientVector::new(h8.clone(), values).unwrap();
            let check = tail_inequality_check(&c, &complement, kind, 4, None).unwrap();
            if !check.holds {
                violations += 1;
            }
            min_slack = min_slack.min(check.slack);
        }
    }
    let ok = violations == 0;
    pass_line(
        13,
        ok,
        &format!("500 vectors, {violations} violations, min slack {min_slack:.3e}"),
    );
    assert!(ok);
}
