//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`; a FAIL also fails the test).

use mtc_core::constants::{self, SearchMode};
use mtc_core::field::{NodeField, TensorWeight};
use mtc_core::instance::{generate_instance, Instance, MeasureSpec, WeightSpec};
use mtc_core::poset::{NTree, Tree, VertexSet};
use mtc_core::suite::{run_suite, trial_seed, Suite, SuiteConfig};
use mtc_core::{capacity, lattice, majorization, maxprinciple, ops, tol};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id:02} {name}: {detail}");
}

#[test]
fn criterion_01_exact_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in 1..=3usize {
        let cfg = SuiteConfig { seed: 101 + n as u64, trials: 1000, n, depth: 2 };
        let r = run_suite(Suite::Identities, &cfg).unwrap();
        ok &= r.verified();
        worst = worst.max(r.envelopes["max_relative_error"]);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "exact-identities",
        ok && worst <= 1e-12 && elapsed < 10.0,
        &format!("max rel err {worst:.2e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_pointwise_inequalities() {
    let mut ok = true;
    for n in 1..=3usize {
        let cfg = SuiteConfig { seed: 202 + n as u64, trials: 1000, n, depth: 2 };
        ok &= run_suite(Suite::Inequalities, &cfg).unwrap().verified();
    }
    report(2, "pointwise-inequalities", ok, "splits and corollary at slack 1e-9");
}

#[test]
fn criterion_03_one_tree_maximum_principle() {
    let mut ok = true;
    for k in 0..1000usize {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(303, k));
        let t = NTree::new(vec![Tree::random(&mut rng, 20)]).unwrap();
        let w = TensorWeight::random(&t, &mut rng);
        let mu = NodeField {
            values: (0..t.size()).map(|_| rng.gen_range(0.0..2.0)).collect(),
            nonneg: true,
        };
        let pot = ops::potential(&t, &w, &mu);
        for frac in [0.3, 0.7, 1.0] {
            let delta = frac * pot.max();
            if delta <= 0.0 {
                continue;
            }
            let tr = ops::truncated(&t, &w, &mu, delta).unwrap();
            if tr.truncated_potential.values.iter().any(|&v| !tol::leq_slack(v, delta)) {
                ok = false;
            }
        }
    }
    report(3, "one-tree-max-principle", ok, "1000 instances, three truncation levels each");
}

/// Hypothesis-satisfying (t, w, f, δ) on a dyadic n-tree: f = 𝐈*μ cut to
/// {𝐕^μ ≤ δ} with δ the max potential on supp μ.
fn product_fixture(
    rng: &mut ChaCha8Rng,
    n: usize,
    depth: u32,
) -> Option<(NTree, TensorWeight, NodeField, f64)> {
    let b = Tree::dyadic(depth, 2, 1 << 20).unwrap();
    let t = NTree::new(vec![b; n]).unwrap();
    let w = TensorWeight::ones(&t);
    let mu = NodeField::random_leaf_measure(&t, rng, 3);
    let pot = ops::potential(&t, &w, &mu);
    let delta = mu.support().iter().map(|&i| pot.values[i]).fold(0.0f64, f64::max);
    if delta <= 0.0 {
        return None;
    }
    let f = majorization::truncated_measure_field(&t, &w, &mu, delta);
    Some((t, w, f, delta))
}

#[test]
fn criterion_04_explicit_constant_lemmas() {
    let mut ok = true;
    let mut checked = [0usize; 4];
    let mut k = 0usize;
    // two-tree energy lemmas (constants δ² and 4δ²)
    while checked[0] < 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(404, k));
        k += 1;
        let Some((t, w, f, delta)) = product_fixture(&mut rng, 2, 2) else { continue };
        let r = majorization::energy_lemma_checks(&t, &w, &f, delta, 8.0 * delta).unwrap();
        ok &= r.mixed_product.is_some_and(|v| tol::leq_slack(v, 1.0));
        ok &= r.squared_product.is_some_and(|v| tol::leq_slack(v, 1.0));
        checked[0] += 1;
        checked[1] += 1;
    }
    // three-tree energy lemma (constant 2δλ) at λ = 4δ
    k = 0;
    while checked[2] < 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(405, k));
        k += 1;
        let Some((t, w, f, delta)) = product_fixture(&mut rng, 3, 1) else { continue };
        let r = majorization::energy_lemma_checks(&t, &w, &f, delta, 4.0 * delta).unwrap();
        ok &= r.tritree_product.is_some_and(|v| tol::leq_slack(v, 1.0));
        checked[2] += 1;
    }
    // bi-tree surrogate with explicit constant 28
    k = 0;
    while checked[3] < 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(406, k));
        k += 1;
        let b = Tree::dyadic(2, 2, 1000).unwrap();
        let t = NTree::new(vec![b.clone(), b]).unwrap();
        let w = TensorWeight::random(&t, &mut rng);
        let mu = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let rho = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let pot = ops::potential(&t, &w, &mu);
        let delta = rng.gen_range(0.2..0.9) * pot.max();
        if delta <= 0.0 {
            continue;
        }
        let r = maxprinciple::surrogate_check(&t, &w, &mu, &rho, delta, None).unwrap();
        ok &= r.explicit_ok;
        checked[3] += 1;
    }
    report(
        4,
        "explicit-constant-lemmas",
        ok,
        &format!("checked {checked:?} hypothesis-satisfying instances"),
    );
}

#[test]
fn criterion_05_majorization_certificates() {
    let mut ok = true;
    let (mut done2, mut done3) = (0usize, 0usize);
    let (mut env2, mut env3) = (0.0f64, 0.0f64);
    let mut k = 0usize;
    while done2 < 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(505, k));
        k += 1;
        let Some((t, w, f, delta)) = product_fixture(&mut rng, 2, 2) else { continue };
        let lambda = rng.gen_range(4.0..12.0) * delta;
        let cert = majorization::majorant_bitree(&t, &w, &f, lambda, delta).unwrap();
        ok &= cert.dominates;
        let scaled = cert.cost_ratio * (lambda / delta).powi(2);
        env2 = env2.max(scaled);
        ok &= scaled <= 64.0 + tol::INEQ_SLACK;
        done2 += 1;
    }
    k = 0;
    while done3 < 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(506, k));
        k += 1;
        let Some((t, w, f, delta)) = product_fixture(&mut rng, 3, 1) else { continue };
        let lambda = rng.gen_range(4.0..12.0) * delta;
        let cert = majorization::majorant_tritree(&t, &w, &f, lambda, delta).unwrap();
        ok &= cert.dominates;
        env3 = env3.max(cert.cost_ratio * (lambda / delta));
        done3 += 1;
    }
    ok &= env3.is_finite();
    report(
        5,
        "majorization-certificates",
        ok,
        &format!("2-tree scaled cost ≤ {env2:.2} (bound 64), 3-tree envelope {env3:.2}"),
    );
}

#[test]
fn criterion_06_ordering_chain_exact() {
    let mut ok = true;
    let mut solved = 0usize;
    let mut k = 0usize;
    while solved < 200 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(606, k));
        k += 1;
        let n = 1 + k % 2;
        let per = if n == 1 { 16 } else { 4 };
        let trees: Vec<Tree> = (0..n).map(|_| Tree::random(&mut rng, per)).collect();
        let t = NTree::new(trees).unwrap();
        if t.size() > 20 {
            continue;
        }
        let w = TensorWeight::random(&t, &mut rng);
        let mu = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let r = match constants::ordering_report(&t, &w, &mu, SearchMode::Exact, SearchMode::Exact)
        {
            Ok(r) => r,
            Err(_) => continue,
        };
        ok &= r.all_exact() && r.chain_holds();
        solved += 1;
    }
    report(6, "ordering-chain", ok, &format!("{solved} exhaustively solved instances"));
}

#[test]
fn criterion_07_reverse_chain_envelopes() {
    let start = Instant::now();
    let s_grid = [1.0, 0.75, 0.5];
    let mut envelopes = [0.0f64; 3]; // hc/c, ce/hc, hc/box
    let mut ok = true;
    let mut run_family = |arity: usize, max_depth: u32, seed: u64, count: usize| {
        let mut done = 0usize;
        let mut k = 0usize;
        while done < count {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, k));
            k += 1;
            let depth = rng.gen_range(1..=max_depth);
            let b = Tree::dyadic(depth, 2, 1 << 20).unwrap();
            let t = NTree::new(vec![b; arity]).unwrap();
            let s: Vec<f64> =
                (0..arity).map(|_| s_grid[rng.gen_range(0..s_grid.len())]).collect();
            let w = TensorWeight::from_s(&t, &s).unwrap();
            let mu = NodeField::random_leaf_measure(&t, &mut rng, 3);
            let mode = if t.size() <= 20 {
                SearchMode::Exact
            } else {
                SearchMode::Sampled { trials: 64, seed: trial_seed(seed, k) }
            };
            let r = match constants::ordering_report(&t, &w, &mu, mode, mode) {
                Ok(r) => r,
                Err(_) => continue,
            };
            envelopes[0] = envelopes[0].max(r.ratio_hc_c);
            envelopes[1] = envelopes[1].max(r.embedding / r.hereditary);
            envelopes[2] = envelopes[2].max(r.hereditary / r.box_constant);
            ok &= envelopes.iter().all(|e| e.is_finite());
            done += 1;
        }
    };
    run_family(2, 3, 707, 500);
    run_family(3, 2, 708, 500);
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 600.0;
    report(
        7,
        "reverse-chain-envelopes",
        ok,
        &format!(
            "hc/c {:.3}, ce/hc {:.3}, hc/box {:.3}, {elapsed:.0}s",
            envelopes[0], envelopes[1], envelopes[2]
        ),
    );
}

#[test]
fn criterion_08_capacity_oracle() {
    // canonical values
    let chain = NTree::new(vec![Tree::dyadic(1, 1, 10).unwrap()]).unwrap();
    let e_chain = VertexSet::from_indices(&chain, [1]);
    let r_chain = capacity::capacity(&chain, &e_chain, 1e-10).unwrap();
    let b2 = Tree::dyadic(1, 2, 10).unwrap();
    let t2 = NTree::new(vec![b2.clone(), b2]).unwrap();
    let e_corner = VertexSet::from_indices(&t2, [t2.index(&[1, 1])]);
    let r_corner = capacity::capacity(&t2, &e_corner, 1e-10).unwrap();
    let mut ok = (r_chain.value - 0.5).abs() < 1e-6 && (r_corner.value - 0.25).abs() < 1e-6;

    // grid-oracle agreement on ≤ 6-free-vertex sets
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..30 {
        let n = 1 + rng.gen_range(0..2usize);
        let b = Tree::dyadic(1, 2, 10).unwrap();
        let t = NTree::new(vec![b; n]).unwrap();
        let mut e = VertexSet::empty(&t);
        for _ in 0..rng.gen_range(1..=3usize) {
            e.members[rng.gen_range(0..t.size())] = true;
        }
        let qp = capacity::capacity(&t, &e, 1e-8).unwrap().value;
        let grid = capacity::capacity_grid_oracle(&t, &e).unwrap();
        ok &= (qp - grid).abs() <= 1.0 / 16.0;
    }
    report(
        8,
        "capacity-oracle",
        ok,
        &format!("chain {:.6}, corner {:.6}, 30 grid cross-checks", r_chain.value, r_corner.value),
    );
}

#[test]
fn criterion_09_capacity_bounds() {
    let lambdas = [1.0, 1.5, 2.0, 3.0];
    let mut env = [0.0f64; 2];
    let mut ok = true;
    for (slot, (n, depth)) in [(2usize, 2u32), (3, 1)].iter().enumerate() {
        let mut done = 0usize;
        let mut k = 0usize;
        while done < 100 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(909 + slot as u64, k));
            k += 1;
            let b = Tree::dyadic(*depth, 2, 1000).unwrap();
            let t = NTree::new(vec![b; *n]).unwrap();
            let mu = NodeField::random_leaf_measure(&t, &mut rng, 3);
            match capacity::capacity_bound_experiment(&t, &mu, &lambdas, true) {
                Ok(rows) => {
                    for row in rows {
                        ok &= row.ratio.is_finite();
                        env[slot] = env[slot].max(row.ratio);
                    }
                    done += 1;
                }
                Err(_) => continue,
            }
        }
    }
    report(
        9,
        "capacity-bounds",
        ok,
        &format!("T2 ratio envelope {:.3}, T3 {:.3} over λ ∈ {{1,1.5,2,3}}", env[0], env[1]),
    );
}

#[test]
fn criterion_10_covering_construction() {
    let mut failures = 0usize;
    let mut traces = 0usize;
    for (count, n, depth, seed) in [(200usize, 2usize, 2u32, 1010u64), (100, 3, 1, 1011)] {
        let mut done = 0usize;
        let mut k = 0usize;
        while done < count {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, k));
            k += 1;
            let b = Tree::dyadic(depth, 2, 1000).unwrap();
            let t = NTree::new(vec![b; n]).unwrap();
            let w = TensorWeight::random(&t, &mut rng);
            let mu = NodeField::random_leaf_measure(&t, &mut rng, 2);
            let leaves = t.leaf_indices();
            let omega = leaves[rng.gen_range(0..leaves.len())];
            let eps = rng.gen_range(0.05..0.5);
            match maxprinciple::covering_construction(&t, &w, &mu, omega, eps, None) {
                Ok(tr) => {
                    if !tr.cover_verified {
                        failures += 1;
                    }
                    traces += 1;
                    done += 1;
                }
                Err(_) => continue,
            }
        }
    }
    report(
        10,
        "covering-construction",
        failures == 0,
        &format!("{traces} traces, {failures} inclusion failures after augmentation"),
    );
}

#[test]
fn criterion_11_lattice_simulation() {
    let start = Instant::now();
    let good = lattice::good_lattice_probability(10, 100_000, 1111).unwrap();
    let mut ok = good.empirical_probability >= 7.0 / 8.0 - 0.02
        && good.ratio_failures_on_good == 0
        && good.good_count > 0;
    let mut worst_envelope = 0.0f64;
    for (d, s) in [(1usize, vec![1.0]), (1, vec![0.5]), (2, vec![1.0, 1.0]), (2, vec![0.5, 0.5])] {
        let r = lattice::kernel_domination(d, &s, 10_000, 1112).unwrap();
        ok &= r.direct_failures == 0;
        worst_envelope = worst_envelope.max(r.direct_envelope);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 120.0;
    report(
        11,
        "lattice-simulation",
        ok,
        &format!(
            "good prob {:.4}, kernel envelope {:.2}, {elapsed:.0}s",
            good.empirical_probability, worst_envelope
        ),
    );
}

#[test]
fn criterion_12_poisson_failure_witness() {
    let rows = lattice::poisson_failure_witness(6).unwrap();
    let increasing = rows.windows(2).all(|p| p[1].max_ratio > p[0].max_ratio);
    let ratios: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    report(
        12,
        "poisson-failure-witness",
        increasing && rows.len() == 5,
        &format!("max ratios over depths 2..6: {ratios:?}"),
    );
}

#[test]
fn criterion_13_determinism() {
    let mut ok = true;
    for suite in [Suite::Identities, Suite::Majorization, Suite::Constants, Suite::Search] {
        let cfg = SuiteConfig { seed: 1313, trials: 30, n: 0, depth: 2 };
        let a = run_suite(suite, &cfg).unwrap().to_json();
        let b = run_suite(suite, &cfg).unwrap().to_json();
        ok &= a == b;
    }
    let inst = generate_instance(
        2,
        2,
        2,
        &WeightSpec::TensorRandom,
        &MeasureSpec::LeafSparse(2),
        1313,
    )
    .unwrap();
    let text = inst.to_json();
    ok &= Instance::from_json(&text).unwrap().to_json() == text;
    report(13, "determinism", ok, "byte-identical reports and instance round-trip");
}
