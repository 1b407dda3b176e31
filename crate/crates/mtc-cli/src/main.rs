//! `mtc`: command-line harness over the core library.
//!
//! Exit codes: 0 = all proven statements verified; 1 = a proven statement
//! was violated (a witness is reported); 2 = configuration or budget error.
//! `MTC_BUDGET_VERTICES` caps product sizes (default 2·10⁶).

use clap::{Parser, Subcommand};
use mtc_core::constants::SearchMode;
use mtc_core::field::NodeField;
use mtc_core::instance::{generate_instance, Instance, MeasureSpec, WeightSpec};
use mtc_core::poset::VertexSet;
use mtc_core::suite::{run_suite, Suite, SuiteConfig};
use mtc_core::{capacity, lattice, majorization, maxprinciple, ops};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mtc", about = "Numerical laboratory for weighted embeddings on n-trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a serialized instance.
    Gen {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        arity: u32,
        /// uniform | tensor-random | from-s (with --s)
        #[arg(long, default_value = "uniform")]
        weight: String,
        /// per-coordinate exponents for --weight from-s
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// leaf-sparse:K | uniform-leaf
        #[arg(long, default_value = "leaf-sparse:1")]
        measure: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Compute the four embedding constants of an instance.
    Constants {
        #[arg(long)]
        instance: String,
        /// exhaustive search (default when the instance is small)
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Solve the capacity problem for a vertex set or a superlevel set.
    Capacity {
        #[arg(long)]
        instance: String,
        /// JSON file with a list of vertex indices
        #[arg(long)]
        set: Option<String>,
        /// use E = {𝐕^μ > λ} instead of an explicit set
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Build and check a small-energy majorant certificate.
    Majorize {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        lambda: f64,
        /// defaults to the max potential on supp μ
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Check the surrogate maximum principle on an instance.
    Surrogate {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        delta: f64,
        /// second measure ρ as an instance file (its measure is used)
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a named property suite.
    Verify {
        /// identities|inequalities|constants|capacity|majorization|maxprinciple|lattice|search
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// .csv emits the envelope table, anything else the JSON report
        #[arg(long)]
        out: Option<String>,
    },
    /// Rotated-lattice simulation: good probability and kernel comparison.
    Lattice {
        #[arg(long, default_value_t = 10)]
        m: u32,
        #[arg(long, default_value_t = 100000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Open-question searches (report only).
    Search {
        /// bitree-pair | 4tree
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
}

fn emit(out: &Option<String>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            use std::io::Write;
            // ignore a closed pipe (e.g. downstream `head`)
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &str) -> Result<Instance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    Instance::from_json(&text).map_err(|e| e.to_string())
}

/// Ok(true) = verified, Ok(false) = proven-statement violation.
fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Gen { n, depth, arity, weight, s, measure, seed, out } => {
            let wspec = match weight.as_str() {
                "uniform" => WeightSpec::Uniform,
                "tensor-random" => WeightSpec::TensorRandom,
                "from-s" => WeightSpec::FromS(s),
                other => return Err(format!("unknown weight spec '{other}'")),
            };
            let mspec = if let Some(k) = measure.strip_prefix("leaf-sparse:") {
                MeasureSpec::LeafSparse(k.parse::<usize>().map_err(|e| e.to_string())?)
            } else if measure == "uniform-leaf" {
                MeasureSpec::UniformLeaf
            } else {
                return Err(format!("unknown measure spec '{measure}'"));
            };
            let inst = generate_instance(n, depth, arity, &wspec, &mspec, seed)
                .map_err(|e| e.to_string())?;
            emit(&out, &inst.to_json())?;
            Ok(true)
        }
        Command::Constants { instance, exact, trials, seed, out } => {
            let inst = load_instance(&instance)?;
            let mode = if exact || inst.ntree.size() <= 20 {
                SearchMode::Exact
            } else {
                SearchMode::Sampled { trials, seed }
            };
            let r = mtc_core::constants::ordering_report(
                &inst.ntree,
                &inst.weight,
                &inst.mu,
                mode,
                mode,
            )
            .map_err(|e| e.to_string())?;
            let doc = json!({
                "box": r.box_constant,
                "box_witness": r.box_witness,
                "carleson": r.carleson,
                "carleson_exact": r.carleson_exact,
                "hereditary": r.hereditary,
                "hereditary_exact": r.hereditary_exact,
                "embedding": r.embedding,
                "ratio_ce_box": r.ratio_ce_box,
                "ratio_hc_c": r.ratio_hc_c,
                "ratio_c_box": r.ratio_c_box,
                "chain_holds": r.chain_holds(),
            });
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            Ok(!r.all_exact() || r.chain_holds())
        }
        Command::Capacity { instance, set, level, out } => {
            let inst = load_instance(&instance)?;
            let e = match (set, level) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
                    let idx: Vec<usize> =
                        serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    let mut v = VertexSet::empty(&inst.ntree);
                    for i in idx {
                        if i >= inst.ntree.size() {
                            return Err(format!("vertex {i} out of range"));
                        }
                        v.members[i] = true;
                    }
                    v
                }
                (None, Some(lambda)) => {
                    let d = capacity::superlevel_set(
                        &inst.ntree,
                        &inst.weight,
                        &inst.mu,
                        lambda,
                    )
                    .map_err(|e| e.to_string())?;
                    let mut v = VertexSet::empty(&inst.ntree);
                    for i in d.indices() {
                        v.members[i] = true;
                    }
                    v
                }
                _ => return Err("pass exactly one of --set or --level".into()),
            };
            let r = capacity::capacity(&inst.ntree, &e, 1e-8).map_err(|e| e.to_string())?;
            let doc = json!({
                "capacity": r.value,
                "kkt_residual": r.kkt_residual,
                "iterations": r.iterations,
                "active_constraints": r.active_set.members.iter().filter(|&&m| m).count(),
            });
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            Ok(true)
        }
        Command::Majorize { instance, lambda, delta, out } => {
            let inst = load_instance(&instance)?;
            let (t, w, mu) = (&inst.ntree, &inst.weight, &inst.mu);
            let pot = ops::potential(t, w, mu);
            let delta = delta.unwrap_or_else(|| {
                mu.support().iter().map(|&i| pot.values[i]).fold(0.0f64, f64::max)
            });
            if delta <= 0.0 {
                return Err("measure has no mass; δ would be 0".into());
            }
            let f = majorization::truncated_measure_field(t, w, mu, delta);
            let cert = match t.arity() {
                1 => {
                    let g = ops::adjoint_hardy(t, mu);
                    majorization::majorant_1tree(t, &f, &g, lambda, delta)
                }
                2 => majorization::majorant_bitree(t, w, &f, lambda, delta),
                3 => majorization::majorant_tritree(t, w, &f, lambda, delta),
                a => return Err(format!("no majorant construction for arity {a}")),
            }
            .map_err(|e| e.to_string())?;
            let doc = json!({
                "lambda": cert.lambda,
                "delta": cert.delta,
                "dominates": cert.dominates,
                "cost_ratio": cert.cost_ratio,
                "outer_cost_ratio": cert.outer_cost_ratio,
                "checked_vertices": cert.domination_checked_on.len(),
            });
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            Ok(cert.dominates)
        }
        Command::Surrogate { instance, delta, rho, out } => {
            let inst = load_instance(&instance)?;
            let rho_field: NodeField = match rho {
                Some(path) => {
                    let other = load_instance(&path)?;
                    if other.ntree.size() != inst.ntree.size() {
                        return Err("ρ instance has a different product size".into());
                    }
                    other.mu
                }
                None => inst.mu.clone(),
            };
            let r = maxprinciple::surrogate_check(
                &inst.ntree,
                &inst.weight,
                &inst.mu,
                &rho_field,
                delta,
                None,
            )
            .map_err(|e| e.to_string())?;
            let doc = json!({
                "n": r.n,
                "delta": r.delta,
                "lhs": r.lhs,
                "implied_constant": r.implied_constant,
                "explicit_ratio": r.explicit_ratio,
                "explicit_ok": r.explicit_ok,
            });
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            // the explicit inequality is proven only for n ≤ 2
            Ok(r.n > 2 || r.explicit_ok)
        }
        Command::Verify { suite, n, depth, trials, seed, out } => {
            let kind = Suite::from_name(&suite)
                .ok_or_else(|| format!("unknown suite '{suite}'"))?;
            let config = SuiteConfig { seed, trials, n, depth };
            let report = run_suite(kind, &config).map_err(|e| e.to_string())?;
            let text = match &out {
                Some(p) if p.ends_with(".csv") => report.envelopes_csv(),
                _ => report.to_json(),
            };
            emit(&out, &text)?;
            Ok(report.verified())
        }
        Command::Lattice { m, trials, seed, out } => {
            let good =
                lattice::good_lattice_probability(m, trials, seed).map_err(|e| e.to_string())?;
            let mut kernels = Vec::new();
            for (d, s) in
                [(1usize, vec![1.0]), (1, vec![0.5]), (2, vec![1.0, 1.0]), (2, vec![0.5, 0.5])]
            {
                let r = lattice::kernel_domination(d, &s, trials.min(10_000), seed)
                    .map_err(|e| e.to_string())?;
                kernels.push(json!({
                    "d": d, "s": s,
                    "direct_envelope": r.direct_envelope,
                    "direct_failures": r.direct_failures,
                    "reverse_probability": r.reverse_probability,
                }));
            }
            let ok = good.empirical_probability >= 7.0 / 8.0 - 0.02
                && good.ratio_failures_on_good == 0
                && kernels.iter().all(|k| k["direct_failures"] == 0);
            let doc = json!({
                "good_probability": good.empirical_probability,
                "wilson": [good.wilson.0, good.wilson.1],
                "distance_ratio_failures_on_good": good.ratio_failures_on_good,
                "min_ratio_overall": good.min_ratio_overall,
                "kernels": kernels,
            });
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            Ok(ok)
        }
        Command::Search { target, depth, trials, seed, out } => {
            let doc = match target.as_str() {
                "bitree-pair" => {
                    let rows =
                        majorization::conjecture_search_bitree_pair(depth, trials, seed)
                            .map_err(|e| e.to_string())?;
                    json!(rows
                        .iter()
                        .map(|r| json!({
                            "depth": r.depth,
                            "trials": r.trials,
                            "domination_failures": r.domination_failures,
                            "max_cost_ratio": r.max_cost_ratio,
                            "scaled_max": r.scaled_max,
                        }))
                        .collect::<Vec<_>>())
                }
                "4tree" => {
                    let rows = majorization::obstruction_4tree(depth.min(3), trials, seed)
                        .map_err(|e| e.to_string())?;
                    json!(rows
                        .iter()
                        .map(|r| json!({
                            "depth": r.depth,
                            "max_ratio": r.max_ratio,
                            "exhaustive": r.exhaustive,
                        }))
                        .collect::<Vec<_>>())
                }
                other => return Err(format!("unknown search target '{other}'")),
            };
            emit(&out, &serde_json::to_string_pretty(&doc).unwrap())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("a proven statement was violated; see the report for the witness");
            ExitCode::from(1)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
