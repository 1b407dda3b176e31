//! Hardy operator, adjoint, difference operators, potentials and energies.
//!
//! All operators are per-coordinate DP sweeps over the mixed-radix layout,
//! O(n · size) each; the naive double loops survive only as test oracles.

use crate::error::{Error, Result};
use crate::field::{NodeField, TensorWeight};
use crate::poset::{DownSet, NTree};
use crate::tol;
use rand::Rng;

/// Applies the coordinate-j Hardy operator in place:
/// I_j f(α) = f(α) + I_j f(α with coordinate j replaced by its parent).
fn sweep_hardy_coord(t: &NTree, j: usize, values: &mut [f64]) {
    let tree = t.tree(j);
    let stride = t.stride(j);
    let block = stride * tree.len();
    for &v in tree.by_depth() {
        let Some(p) = tree.parent(v) else { continue };
        let voff = v as usize * stride;
        let poff = p as usize * stride;
        let mut base = 0;
        while base < values.len() {
            for i in 0..stride {
                values[base + voff + i] += values[base + poff + i];
            }
            base += block;
        }
    }
}

/// Adjoint sweep: I*_j f(α) = f(α) + Σ_{children c} I*_j f(α with c);
/// realized as a deepest-first push of each vertex onto its parent.
fn sweep_adjoint_coord(t: &NTree, j: usize, values: &mut [f64]) {
    let tree = t.tree(j);
    let stride = t.stride(j);
    let block = stride * tree.len();
    for &v in tree.by_depth().iter().rev() {
        let Some(p) = tree.parent(v) else { continue };
        let voff = v as usize * stride;
        let poff = p as usize * stride;
        let mut base = 0;
        while base < values.len() {
            for i in 0..stride {
                values[base + poff + i] += values[base + voff + i];
            }
            base += block;
        }
    }
}

/// (𝐈f)(γ) = Σ_{γ′ ≥ γ} f(γ′): sum over ancestors in the product order.
pub fn hardy(t: &NTree, f: &NodeField) -> NodeField {
    hardy_coord(t, f, &(0..t.arity()).collect::<Vec<_>>())
}

/// Applies I_j for each j in `coords`; the coordinate operators commute.
pub fn hardy_coord(t: &NTree, f: &NodeField, coords: &[usize]) -> NodeField {
    let mut out = f.clone();
    for &j in coords {
        sweep_hardy_coord(t, j, &mut out.values);
    }
    out
}

/// (𝐈*f)(γ) = Σ_{γ′ ≤ γ} f(γ′): sum over descendants.
pub fn adjoint_hardy(t: &NTree, f: &NodeField) -> NodeField {
    adjoint_hardy_coord(t, f, &(0..t.arity()).collect::<Vec<_>>())
}

pub fn adjoint_hardy_coord(t: &NTree, f: &NodeField, coords: &[usize]) -> NodeField {
    let mut out = f.clone();
    for &j in coords {
        sweep_adjoint_coord(t, j, &mut out.values);
    }
    out
}

/// Coordinate difference operator: Δ_j g(β) = g(β) − Σ_{β′ ∈ ch_j(β)} g(β′).
pub fn delta_coord(t: &NTree, g: &NodeField, j: usize) -> NodeField {
    let tree = t.tree(j);
    let stride = t.stride(j);
    let block = stride * tree.len();
    let mut out = g.values.clone();
    for v in 0..tree.len() as u32 {
        for &c in tree.children(v) {
            let voff = v as usize * stride;
            let coff = c as usize * stride;
            let mut base = 0;
            while base < out.len() {
                for i in 0..stride {
                    out[base + voff + i] -= g.values[base + coff + i];
                }
                base += block;
            }
        }
    }
    NodeField { nonneg: out.iter().all(|&v| v >= 0.0), values: out }
}

/// True iff Δ_j g ≥ 0 everywhere for every coordinate j
/// (superadditive in each parameter separately).
pub fn is_superadditive(t: &NTree, g: &NodeField) -> bool {
    let scale = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = -tol::ABS_FLOOR * (1.0 + scale);
    (0..t.arity()).all(|j| delta_coord(t, g, j).values.iter().all(|&v| v >= floor))
}

/// Potential 𝐕^μ = 𝐈(w 𝐈*μ).
pub fn potential(t: &NTree, w: &TensorWeight, mu: &NodeField) -> NodeField {
    let istar = adjoint_hardy(t, mu);
    hardy(t, &istar.mul(&w.dense(t)))
}

/// Energy ℰ[μ] = Σ w (𝐈*μ)².
pub fn energy(t: &NTree, w: &TensorWeight, mu: &NodeField) -> f64 {
    let istar = adjoint_hardy(t, mu);
    let wd = w.dense(t);
    istar
        .values
        .iter()
        .zip(&wd.values)
        .map(|(&s, &wv)| wv * s * s)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    pub truncated_energy: f64,
    pub delta: f64,
    pub total_mass: f64,
}

/// Truncation data: everything living on the sublevel set {𝐕^μ ≤ δ}.
/// Ties at exactly δ are included.
pub struct Truncation {
    pub report: EnergyReport,
    /// Full potential 𝐕^μ.
    pub potential: NodeField,
    /// Truncated potential 𝐕_δ^μ = 𝐈(1_{𝐕^μ≤δ} w 𝐈*μ).
    pub truncated_potential: NodeField,
    /// Indicator of {𝐕^μ ≤ δ}.
    pub mask: Vec<bool>,
}

pub fn truncated(t: &NTree, w: &TensorWeight, mu: &NodeField, delta: f64) -> Result<Truncation> {
    mu.assert_nonneg("μ")?;
    if delta < 0.0 {
        return Err(Error::Precondition("δ must be nonnegative".into()));
    }
    let istar = adjoint_hardy(t, mu);
    let wd = w.dense(t);
    let pot = hardy(t, &istar.mul(&wd));
    let mask: Vec<bool> = pot.values.iter().map(|&v| v <= delta).collect();
    let mut cut = istar.mul(&wd);
    let mut trunc_energy = 0.0;
    for i in 0..t.size() {
        if mask[i] {
            trunc_energy += wd.values[i] * istar.values[i] * istar.values[i];
        } else {
            cut.values[i] = 0.0;
        }
    }
    let energy: f64 = istar
        .values
        .iter()
        .zip(&wd.values)
        .map(|(&s, &wv)| wv * s * s)
        .sum();
    let truncated_potential = hardy(t, &cut);
    Ok(Truncation {
        report: EnergyReport {
            energy,
            truncated_energy: trunc_energy,
            delta,
            total_mass: mu.sum(),
        },
        potential: pot,
        truncated_potential,
        mask,
    })
}

/// ∫ 𝐕_δ^μ dρ = ∫_{𝐕^μ≤δ} w 𝐈*μ 𝐈*ρ; the full pairing when δ is absent.
pub fn pairing(
    t: &NTree,
    w: &TensorWeight,
    mu: &NodeField,
    rho: &NodeField,
    delta: Option<f64>,
) -> Result<f64> {
    mu.assert_nonneg("μ")?;
    rho.assert_nonneg("ρ")?;
    let istar_mu = adjoint_hardy(t, mu);
    let istar_rho = adjoint_hardy(t, rho);
    let wd = w.dense(t);
    let mask: Vec<bool> = match delta {
        Some(d) => {
            let pot = hardy(t, &istar_mu.mul(&wd));
            pot.values.iter().map(|&v| v <= d).collect()
        }
        None => vec![true; t.size()],
    };
    Ok((0..t.size())
        .filter(|&i| mask[i])
        .map(|i| wd.values[i] * istar_mu.values[i] * istar_rho.values[i])
        .sum())
}

/// Random superadditive test function: g = 𝐈*μ for sparse μ ≥ 0, optionally
/// cut by an up-set indicator. Up-set cuts preserve per-coordinate
/// superadditivity of 𝐈*μ, so every output passes `is_superadditive`.
pub fn random_superadditive<R: Rng>(t: &NTree, rng: &mut R) -> NodeField {
    let points = 1 + rng.gen_range(0..=t.arity() + 1);
    let mu = NodeField::random_sparse(t, rng, points);
    let mut g = adjoint_hardy(t, &mu);
    if rng.gen_bool(0.5) {
        // complement of a random down-set is an up-set
        let d = crate::poset::random_down_set(t, rng);
        for i in 0..t.size() {
            if d.contains(i) {
                g.values[i] = 0.0;
            }
        }
    }
    g
}

/// Indicator of the complement of a down-set (an up-set indicator).
pub fn upset_indicator(t: &NTree, d: &DownSet) -> NodeField {
    let values = (0..t.size()).map(|i| if d.contains(i) { 0.0 } else { 1.0 }).collect();
    NodeField { values, nonneg: true }
}

/// O(size²) oracle for 𝐈 by direct summation over comparable pairs.
pub fn hardy_oracle(t: &NTree, f: &NodeField) -> NodeField {
    let values = (0..t.size())
        .map(|g| {
            (0..t.size())
                .filter(|&gp| t.leq(g, gp))
                .map(|gp| f.values[gp])
                .sum()
        })
        .collect();
    NodeField { values, nonneg: f.nonneg }
}

/// O(size²) oracle for 𝐈*.
pub fn adjoint_hardy_oracle(t: &NTree, f: &NodeField) -> NodeField {
    let values = (0..t.size())
        .map(|g| {
            (0..t.size())
                .filter(|&gp| t.leq(gp, g))
                .map(|gp| f.values[gp])
                .sum()
        })
        .collect();
    NodeField { values, nonneg: f.nonneg }
}
