//! Experiment orchestration: named property suites over seeded random
//! instances, aggregated into machine-readable reports.
//!
//! Per-trial seeds derive from the master seed by the documented counter
//! scheme `seed XOR (k · 0x9E3779B97F4A7C15)`, so trial k is independent
//! of execution order; aggregation uses only order-independent max/min/sum.

use crate::capacity;
use crate::constants::{self, SearchMode};
use crate::error::{Error, Result};
use crate::field::{NodeField, TensorWeight};
use crate::instance::Instance;
use crate::lattice;
use crate::majorization;
use crate::maxprinciple;
use crate::ops;
use crate::poset::{NTree, Tree};
use crate::tol;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Documented per-trial seed derivation.
pub fn trial_seed(master: u64, k: usize) -> u64 {
    master ^ (k as u64).wrapping_mul(0x9E3779B97F4A7C15)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Inequalities,
    Constants,
    Capacity,
    Majorization,
    MaxPrinciple,
    Lattice,
    Search,
}

impl Suite {
    pub fn from_name(name: &str) -> Option<Suite> {
        Some(match name {
            "identities" => Suite::Identities,
            "inequalities" => Suite::Inequalities,
            "constants" => Suite::Constants,
            "capacity" => Suite::Capacity,
            "majorization" => Suite::Majorization,
            "maxprinciple" => Suite::MaxPrinciple,
            "lattice" => Suite::Lattice,
            "search" => Suite::Search,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Inequalities => "inequalities",
            Suite::Constants => "constants",
            Suite::Capacity => "capacity",
            Suite::Majorization => "majorization",
            Suite::MaxPrinciple => "maxprinciple",
            Suite::Lattice => "lattice",
            Suite::Search => "search",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Number of tree factors; 0 cycles through 1..=3 per trial.
    pub n: usize,
    pub depth: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, trials: 200, n: 0, depth: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub check: String,
    pub detail: String,
    /// Re-runnable witness instance (JSON), when one exists.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub trials_run: usize,
    pub envelopes: BTreeMap<String, f64>,
    pub counters: BTreeMap<String, u64>,
    pub violations: Vec<Violation>,
}

impl ExperimentReport {
    fn new(suite: Suite, config: &SuiteConfig) -> Self {
        ExperimentReport {
            suite: suite.name().to_string(),
            config: config.clone(),
            trials_run: 0,
            envelopes: BTreeMap::new(),
            counters: BTreeMap::new(),
            violations: Vec::new(),
        }
    }

    fn envelope(&mut self, key: &str, value: f64) {
        let e = self.envelopes.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(value);
    }

    fn count(&mut self, key: &str) {
        *self.counters.entry(key.to_string()).or_insert(0) += 1;
    }

    fn violation(&mut self, trial: usize, check: &str, detail: String, witness: Option<String>) {
        self.violations.push(Violation {
            trial,
            check: check.to_string(),
            detail,
            witness,
        });
    }

    /// true iff no proven statement was violated.
    pub fn verified(&self) -> bool {
        self.violations.is_empty()
    }

    /// 0 = verified, 1 = proven-statement violation.
    pub fn exit_code(&self) -> i32 {
        if self.verified() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Envelope table as CSV (key, value).
    pub fn envelopes_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.envelopes {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

fn arity_for(config: &SuiteConfig, trial: usize) -> usize {
    if (1..=3).contains(&config.n) {
        config.n
    } else {
        1 + trial % 3
    }
}

/// Random small product tree with the per-factor sizes used across suites.
fn random_ntree(rng: &mut ChaCha8Rng, n: usize, size_cap: usize) -> NTree {
    let per = match n {
        1 => 14,
        2 => 5,
        _ => 3,
    };
    loop {
        let trees: Vec<Tree> = (0..n).map(|_| Tree::random(rng, per)).collect();
        let t = NTree::new(trees).unwrap();
        if t.size() <= size_cap {
            return t;
        }
    }
}

fn signed_field(t: &NTree, rng: &mut ChaCha8Rng) -> NodeField {
    NodeField {
        values: (0..t.size()).map(|_| rng.gen_range(-1.0..2.0)).collect(),
        nonneg: false,
    }
}

fn nonneg_field(t: &NTree, rng: &mut ChaCha8Rng) -> NodeField {
    NodeField {
        values: (0..t.size()).map(|_| rng.gen_range(0.0..2.0)).collect(),
        nonneg: true,
    }
}

/// Relative error of an exact identity a = b, measured against the
/// magnitude of the assembled terms (`scale`), not only the results:
/// both sides can cancel to near zero while being sums of large terms.
fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(scale).max(tol::ABS_FLOOR);
    (a - b).abs() / scale
}

fn abs_dot(a: &NodeField, b: &NodeField) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x * y).abs()).sum()
}

fn witness_json(t: &NTree, w: &TensorWeight, mu: &NodeField) -> String {
    Instance { ntree: t.clone(), weight: w.clone(), mu: mu.clone() }.to_json()
}

/// Exact-identity suite: duality, partial summation, and the pointwise
/// summation-by-parts identity per coordinate, at 1e−12 relative.
fn run_identities(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Identities, config);
    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = arity_for(config, k);
        let t = random_ntree(&mut rng, n, 400);
        let f = signed_field(&t, &mut rng);
        let g = signed_field(&t, &mut rng);
        let mut worst = 0.0f64;

        // duality ⟨𝐈f, g⟩ = ⟨f, 𝐈*g⟩
        let iff = ops::hardy(&t, &f);
        let lhs = iff.dot(&g);
        let rhs = f.dot(&ops::adjoint_hardy(&t, &g));
        worst = worst.max(rel_err(lhs, rhs, abs_dot(&iff, &g)));

        for j in 0..n {
            let df = ops::delta_coord(&t, &f, j);
            let ig = ops::hardy_coord(&t, &g, &[j]);
            // partial summation Σ fg = Σ Δ_j f · I_j g
            let lhs = f.dot(&g);
            let rhs = df.dot(&ig);
            worst = worst.max(rel_err(lhs, rhs, abs_dot(&df, &ig)));
            // pointwise: I*_j(fg) = I*_j(Δ_j f · I_j g) − f·(I_j g − g)
            let fg_abs = ops::adjoint_hardy_coord(
                &t,
                &NodeField {
                    values: df.mul(&ig).values.iter().map(|v| v.abs()).collect(),
                    nonneg: true,
                },
                &[j],
            );
            let a = ops::adjoint_hardy_coord(&t, &f.mul(&g), &[j]);
            let b = ops::adjoint_hardy_coord(&t, &df.mul(&ig), &[j]);
            for i in 0..t.size() {
                let corr = f.values[i] * (ig.values[i] - g.values[i]);
                let scale = fg_abs.values[i] + corr.abs();
                worst = worst.max(rel_err(a.values[i], b.values[i] - corr, scale));
            }
        }
        // pairing symmetry in (μ, ρ)
        let mu = nonneg_field(&t, &mut rng);
        let rho = nonneg_field(&t, &mut rng);
        let w = TensorWeight::random(&t, &mut rng);
        let p1 = ops::pairing(&t, &w, &mu, &rho, None).unwrap();
        let p2 = ops::pairing(&t, &w, &rho, &mu, None).unwrap();
        worst = worst.max(rel_err(p1, p2, 0.0));

        report.envelope("max_relative_error", worst);
        if worst > tol::IDENTITY_REL {
            report.violation(
                k,
                "exact-identity",
                format!("relative error {worst:e}"),
                Some(witness_json(&t, &w, &mu)),
            );
        }
        report.trials_run += 1;
    }
    report
}

/// Pointwise-inequality suite: the summation-by-parts corollary, the
/// 2^n-term product splits, the superadditive L¹–L^∞ bound, and the
/// one-tree maximum principle, all at slack 1e−9.
fn run_inequalities(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Inequalities, config);
    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = arity_for(config, k);
        let t = random_ntree(&mut rng, n, 400);
        let f = nonneg_field(&t, &mut rng);
        let g = nonneg_field(&t, &mut rng);
        let w = TensorWeight::random(&t, &mut rng);
        let mut ok = true;
        let mut what = String::new();

        // corollary: I*_j(fg) ≤ I*_j(Δ_j f · I_j g) for f, g ≥ 0
        for j in 0..n {
            let a = ops::adjoint_hardy_coord(&t, &f.mul(&g), &[j]);
            let b = ops::adjoint_hardy_coord(
                &t,
                &ops::delta_coord(&t, &f, j).mul(&ops::hardy_coord(&t, &g, &[j])),
                &[j],
            );
            for i in 0..t.size() {
                if !tol::leq_slack(a.values[i], b.values[i]) {
                    ok = false;
                    what = format!("summation-by-parts corollary at {i}, coord {j}");
                }
            }
        }

        // product split: (𝐈f)(𝐈g) ≤ Σ_{A ⊆ [n]} 𝐈(I_A f · I_{A^c} g)
        let iff = ops::hardy(&t, &f);
        let igg = ops::hardy(&t, &g);
        let mut rhs = NodeField::zeros(&t);
        for mask in 0u32..1 << n {
            let a: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let ac: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 0).collect();
            let fa = ops::hardy_coord(&t, &f, &a);
            let gac = ops::hardy_coord(&t, &g, &ac);
            let term = ops::hardy(&t, &fa.mul(&gac));
            for i in 0..t.size() {
                rhs.values[i] += term.values[i];
            }
        }
        for i in 0..t.size() {
            if !tol::leq_slack(iff.values[i] * igg.values[i], rhs.values[i]) {
                ok = false;
                what = format!("product split at {i}");
            }
        }

        if n == 1 {
            // superadditive L¹–L^∞: I*(gh) ≤ ‖Ih‖_{∞, supp g} · g
            let gs = ops::random_superadditive(&t, &mut rng);
            let h = nonneg_field(&t, &mut rng);
            let ih = ops::hardy(&t, &h);
            let bound = gs
                .support()
                .iter()
                .map(|&i| ih.values[i])
                .fold(0.0f64, f64::max);
            let lhs = ops::adjoint_hardy(&t, &gs.mul(&h));
            for i in 0..t.size() {
                if !tol::leq_slack(lhs.values[i], bound * gs.values[i]) {
                    ok = false;
                    what = format!("superadditive bound at {i}");
                }
            }
            // one-tree maximum principle: 𝐕_δ^μ ≤ δ
            let mu = nonneg_field(&t, &mut rng);
            let pot = ops::potential(&t, &w, &mu);
            let delta = 0.5 * pot.max().max(tol::ABS_FLOOR);
            let tr = ops::truncated(&t, &w, &mu, delta).unwrap();
            for i in 0..t.size() {
                if !tol::leq_slack(tr.truncated_potential.values[i], delta) {
                    ok = false;
                    what = format!("one-tree maximum principle at {i}");
                }
            }
        }

        if !ok {
            report.violation(k, "pointwise-inequality", what, Some(witness_json(&t, &w, &f)));
        }
        report.trials_run += 1;
    }
    report
}

/// Constant-chain suite: box ≤ carleson ≤ hereditary ≤ embedding on
/// exhaustively solved instances; canonical corner fixture pinned to
/// (4, 4, 4, 4).
fn run_constants(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Constants, config);

    // canonical fixture: B2×B2, w ≡ 1, unit mass at a leaf corner
    let b = Tree::dyadic(1, 2, 100).unwrap();
    let t = NTree::new(vec![b.clone(), b]).unwrap();
    let w = TensorWeight::ones(&t);
    let mu = NodeField::delta(&t, t.index(&[1, 1]), 1.0);
    match constants::ordering_report(&t, &w, &mu, SearchMode::Exact, SearchMode::Exact) {
        Ok(r) => {
            let expect = [r.box_constant, r.carleson, r.hereditary, r.embedding];
            if expect.iter().any(|&v| (v - 4.0).abs() > 1e-6) {
                report.violation(
                    0,
                    "canonical-fixture",
                    format!("expected (4,4,4,4), got {expect:?}"),
                    Some(witness_json(&t, &w, &mu)),
                );
            }
        }
        Err(e) => report.violation(0, "canonical-fixture", e.to_string(), None),
    }

    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = 1 + k % 2; // exhaustive search caps at 20 product vertices
        let t = random_ntree(&mut rng, n, 20);
        let w = TensorWeight::random(&t, &mut rng);
        let mu = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let r = match constants::ordering_report(&t, &w, &mu, SearchMode::Exact, SearchMode::Exact)
        {
            Ok(r) => r,
            Err(e) => {
                report.count("skipped");
                let _ = e;
                continue;
            }
        };
        if !r.chain_holds() {
            report.violation(
                k,
                "ordering-chain",
                format!(
                    "box {} carleson {} hereditary {} embedding {}",
                    r.box_constant, r.carleson, r.hereditary, r.embedding
                ),
                Some(witness_json(&t, &w, &mu)),
            );
        }
        report.envelope("ce_over_box", r.ratio_ce_box);
        report.envelope("hc_over_carleson", r.ratio_hc_c);
        report.envelope("carleson_over_box", r.ratio_c_box);
        report.count("exact_instances");
        report.trials_run += 1;
    }
    report
}

/// Capacity suite: solver-vs-oracle agreement on small sets and the
/// λ-decay ratios cap·λ^p/ℰ[μ] on normalized dyadic instances.
fn run_capacity(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Capacity, config);
    let lambdas = [1.0, 1.5, 2.0, 3.0];
    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = if (2..=3).contains(&config.n) { config.n } else { 2 + k % 2 };
        let (depth, label, p) = if n == 2 { (2, "t2", 4) } else { (1, "t3", 2) };
        let b = Tree::dyadic(depth, 2, 1000).unwrap();
        let t = NTree::new(vec![b; n]).unwrap();
        let mu = NodeField::random_leaf_measure(&t, &mut rng, 3);
        match capacity::capacity_bound_experiment(&t, &mu, &lambdas, true) {
            Ok(rows) => {
                for row in rows {
                    report.envelope(
                        &format!("{label}_cap_lambda{}_ratio", row.lambda),
                        row.ratio,
                    );
                    let _ = p;
                }
            }
            Err(_) => report.count("capacity_errors"),
        }
        // oracle agreement on a small random set over the 2-tree
        if k % 10 == 0 && n == 2 {
            let b = Tree::dyadic(1, 2, 100).unwrap();
            let ts = NTree::new(vec![b.clone(), b]).unwrap();
            let mut e = crate::poset::VertexSet::empty(&ts);
            for _ in 0..2 {
                e.members[rng.gen_range(0..ts.size())] = true;
            }
            if e.members.iter().any(|&m| m) {
                let solved = capacity::capacity(&ts, &e, tol::QP_TOL);
                let oracle = capacity::capacity_grid_oracle(&ts, &e);
                if let (Ok(s), Ok(o)) = (solved, oracle) {
                    let gap = (s.value - o).abs();
                    report.envelope("oracle_gap", gap);
                    if gap > 1.0 / 16.0 {
                        report.violation(
                            k,
                            "capacity-oracle",
                            format!("solver {} vs grid {}", s.value, o),
                            None,
                        );
                    }
                }
            }
        }
        report.trials_run += 1;
    }
    report
}

/// Majorization suite: the small-energy majorant certificates per arity
/// with their pinned cost envelopes, plus the energy-lemma ratios.
fn run_majorization(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Majorization, config);
    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = arity_for(config, k);
        match n {
            1 => {
                let t = NTree::new(vec![Tree::random(&mut rng, 25)]).unwrap();
                let g = ops::random_superadditive(&t, &mut rng);
                let ig = ops::hardy(&t, &g);
                let max_ig = ig.max();
                if max_ig <= 0.0 {
                    report.count("degenerate");
                    continue;
                }
                let delta = max_ig / rng.gen_range(15.0..40.0);
                let lambda = 10.0 * delta;
                let raw = NodeField::random_sparse(&t, &mut rng, 3);
                let f = NodeField {
                    values: (0..t.size())
                        .map(|i| if ig.values[i] <= delta { raw.values[i] } else { 0.0 })
                        .collect(),
                    nonneg: true,
                };
                let cert = majorization::majorant_1tree(&t, &f, &g, lambda, delta).unwrap();
                if !cert.dominates {
                    report.violation(k, "majorant-1tree", "domination failed".into(), None);
                }
                if f.sum() > 0.0 {
                    report.envelope("cost_1tree_scaled", cert.cost_ratio * lambda / delta);
                }
            }
            _ => {
                let depth = if n == 2 { 2 } else { 1 };
                let b = Tree::dyadic(depth, 2, 1 << 20).unwrap();
                let t = NTree::new(vec![b; n]).unwrap();
                let w = TensorWeight::ones(&t);
                let mu = NodeField::random_leaf_measure(&t, &mut rng, 3);
                let pot = ops::potential(&t, &w, &mu);
                let delta = mu
                    .support()
                    .iter()
                    .map(|&i| pot.values[i])
                    .fold(0.0f64, f64::max);
                if delta <= 0.0 {
                    report.count("degenerate");
                    continue;
                }
                let f = majorization::truncated_measure_field(&t, &w, &mu, delta);
                let lambda = 8.0 * delta;
                let cert = if n == 2 {
                    majorization::majorant_bitree(&t, &w, &f, lambda, delta)
                } else {
                    majorization::majorant_tritree(&t, &w, &f, lambda, delta)
                }
                .unwrap();
                if !cert.dominates {
                    report.violation(
                        k,
                        "majorant-product",
                        format!("{n}-tree domination failed"),
                        Some(witness_json(&t, &w, &mu)),
                    );
                }
                let scaled = if n == 2 {
                    cert.cost_ratio * (lambda / delta).powi(2)
                } else {
                    cert.cost_ratio * (lambda / delta)
                };
                report.envelope(&format!("cost_{n}tree_scaled"), scaled);
                if n == 2 && scaled > 64.0 + tol::INEQ_SLACK {
                    report.violation(
                        k,
                        "majorant-cost",
                        format!("2-tree scaled cost {scaled}"),
                        None,
                    );
                }
                if let Ok(r) = majorization::energy_lemma_checks(&t, &w, &f, delta, lambda) {
                    if !r.all_within_one() {
                        report.violation(k, "energy-lemma", format!("{r:?}"), None);
                    }
                }
            }
        }
        report.trials_run += 1;
    }
    report
}

/// Maximum-principle suite: surrogate inequality with explicit constants,
/// the large-energy set, and the covering construction.
fn run_maxprinciple(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::MaxPrinciple, config);
    for k in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, k));
        let n = if (1..=3).contains(&config.n) { config.n } else { 1 + k % 3 };
        let depth = if n == 3 { 1 } else { 2 };
        let b = Tree::dyadic(depth, 2, 1000).unwrap();
        let t = NTree::new(vec![b; n]).unwrap();
        let w = TensorWeight::random(&t, &mut rng);
        let mu = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let rho = NodeField::random_leaf_measure(&t, &mut rng, 2);
        let pot = ops::potential(&t, &w, &mu);
        let delta = 0.5 * pot.max();
        if delta <= 0.0 {
            report.count("degenerate");
            continue;
        }
        match maxprinciple::surrogate_check(&t, &w, &mu, &rho, delta, None) {
            Ok(r) => {
                report.envelope(&format!("surrogate_implied_n{n}"), r.implied_constant);
                if n <= 2 && !r.explicit_ok {
                    report.violation(
                        k,
                        "surrogate-explicit",
                        format!("n={n} ratio {}", r.explicit_ratio),
                        Some(witness_json(&t, &w, &mu)),
                    );
                }
            }
            Err(_) => report.count("surrogate_skipped"),
        }
        if n == 2 {
            match maxprinciple::large_energy_downset(&t, &w, &mu, 0.5, 28f64.powf(0.25)) {
                Ok(r) => {
                    if r.consistent && r.energy_fraction < 0.5 - tol::INEQ_SLACK {
                        report.violation(
                            k,
                            "large-energy",
                            format!("fraction {}", r.energy_fraction),
                            Some(witness_json(&t, &w, &mu)),
                        );
                    }
                }
                Err(e) => report.violation(k, "large-energy", e.to_string(), None),
            }
            let leaves = t.leaf_indices();
            let omega = leaves[rng.gen_range(0..leaves.len())];
            let eps = rng.gen_range(0.05..0.5);
            match maxprinciple::covering_construction(&t, &w, &mu, omega, eps, None) {
                Ok(tr) => {
                    if !tr.cover_verified {
                        report.violation(
                            k,
                            "covering",
                            "inclusion failed after augmentation".into(),
                            Some(witness_json(&t, &w, &mu)),
                        );
                    }
                    report.envelope("covering_size_bound", tr.size_bound);
                }
                Err(_) => report.count("covering_skipped"),
            }
        }
        report.trials_run += 1;
    }
    report
}

/// Lattice suite: good-rotation probability, kernel domination, and the
/// Poisson failure witness.
fn run_lattice(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Lattice, config);
    let trials = config.trials.max(2000);
    match lattice::good_lattice_probability(10, trials, config.seed) {
        Ok(r) => {
            report.envelopes.insert("good_probability".into(), r.empirical_probability);
            report.envelopes.insert("min_ratio_overall".into(), r.min_ratio_overall);
            report.envelope("max_ratio_on_good", r.max_ratio_on_good);
            if r.empirical_probability < 7.0 / 8.0 - 0.02 {
                report.violation(
                    0,
                    "good-probability",
                    format!("{}", r.empirical_probability),
                    None,
                );
            }
            if r.ratio_failures_on_good > 0 {
                report.violation(
                    0,
                    "lattice-distance",
                    format!("{} good samples exceeded 10·D", r.ratio_failures_on_good),
                    None,
                );
            }
        }
        Err(e) => report.violation(0, "good-probability", e.to_string(), None),
    }
    for (d, s) in [
        (1usize, vec![1.0]),
        (1, vec![0.5]),
        (2, vec![1.0, 1.0]),
        (2, vec![0.5, 0.5]),
    ] {
        match lattice::kernel_domination(d, &s, trials.min(10_000), config.seed) {
            Ok(r) => {
                report.envelope(&format!("dk_envelope_d{d}_s{}", s[0]), r.direct_envelope);
                report
                    .envelopes
                    .insert(format!("dk_reverse_prob_d{d}_s{}", s[0]), r.reverse_probability);
                if r.direct_failures > 0 {
                    report.violation(
                        0,
                        "kernel-domination",
                        format!("d={d} s={:?}: {} failures", s, r.direct_failures),
                        None,
                    );
                }
            }
            Err(e) => report.violation(0, "kernel-domination", e.to_string(), None),
        }
    }
    match lattice::poisson_failure_witness(6) {
        Ok(rows) => {
            for pair in rows.windows(2) {
                if pair[1].max_ratio <= pair[0].max_ratio {
                    report.violation(
                        0,
                        "poisson-witness",
                        format!("ratio not increasing at depth {}", pair[1].depth),
                        None,
                    );
                }
            }
            if let Some(last) = rows.last() {
                report.envelope("poisson_max_ratio", last.max_ratio);
            }
        }
        Err(e) => report.violation(0, "poisson-witness", e.to_string(), None),
    }
    report.trials_run = trials;
    report
}

/// Search suite: open-question exploration; report-only, never a failure.
fn run_search(config: &SuiteConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new(Suite::Search, config);
    let trials = config.trials.min(100).max(10);
    if let Ok(rows) =
        majorization::conjecture_search_bitree_pair(config.depth.clamp(2, 4), trials, config.seed)
    {
        for row in &rows {
            report.envelope(&format!("pair_cost_depth{}", row.depth), row.max_cost_ratio);
            report.envelope(
                &format!("pair_scaled_tau1_depth{}", row.depth),
                row.scaled_max[0],
            );
            if row.domination_failures > 0 {
                report.count("pair_domination_failures");
            }
        }
        report.trials_run += rows.iter().map(|r| r.trials).sum::<usize>();
    }
    if let Ok(rows) = majorization::obstruction_4tree(1, trials, config.seed) {
        for row in &rows {
            report.envelope(&format!("obstruction_depth{}", row.depth), row.max_ratio);
        }
    }
    report
}

/// Executes the named suite. Proven-statement violations are collected in
/// the report (exit code 1 downstream); per-trial errors are surfaced as
/// counters without aborting the sweep.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<ExperimentReport> {
    if config.trials == 0 {
        return Err(Error::Precondition("trials must be positive".into()));
    }
    Ok(match suite {
        Suite::Identities => run_identities(config),
        Suite::Inequalities => run_inequalities(config),
        Suite::Constants => run_constants(config),
        Suite::Capacity => run_capacity(config),
        Suite::Majorization => run_majorization(config),
        Suite::MaxPrinciple => run_maxprinciple(config),
        Suite::Lattice => run_lattice(config),
        Suite::Search => run_search(config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: usize) -> SuiteConfig {
        SuiteConfig { seed: 11, trials, n: 0, depth: 2 }
    }

    #[test]
    fn identities_suite_clean() {
        let r = run_suite(Suite::Identities, &cfg(60)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
        assert!(r.envelopes["max_relative_error"] <= crate::tol::IDENTITY_REL);
    }

    #[test]
    fn inequalities_suite_clean() {
        let r = run_suite(Suite::Inequalities, &cfg(60)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
    }

    #[test]
    fn constants_suite_clean_and_canonical() {
        let r = run_suite(Suite::Constants, &cfg(25)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
        assert!(r.envelopes["ce_over_box"] >= 1.0 - 1e-9);
    }

    #[test]
    fn capacity_suite_clean() {
        let r = run_suite(Suite::Capacity, &cfg(12)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
    }

    #[test]
    fn majorization_suite_clean() {
        let r = run_suite(Suite::Majorization, &cfg(45)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
        assert!(r.envelopes["cost_2tree_scaled"] <= 64.0 + 1e-9);
    }

    #[test]
    fn maxprinciple_suite_clean() {
        let r = run_suite(Suite::MaxPrinciple, &cfg(30)).unwrap();
        assert!(r.verified(), "{:?}", r.violations.first());
    }

    #[test]
    fn search_suite_report_only() {
        let r = run_suite(Suite::Search, &cfg(10)).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert!(!r.envelopes.is_empty());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Identities, &cfg(20)).unwrap().to_json();
        let b = run_suite(Suite::Identities, &cfg(20)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_suite(Suite::Identities, &cfg(0)).is_err());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::Identities,
            Suite::Inequalities,
            Suite::Constants,
            Suite::Capacity,
            Suite::Majorization,
            Suite::MaxPrinciple,
            Suite::Lattice,
            Suite::Search,
        ] {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
    }
}
