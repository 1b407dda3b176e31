//! The four embedding constants (box, Carleson, hereditary Carleson,
//! Carleson embedding), their ordering chain, and the dyadic boundary
//! variants.

use crate::error::{Error, Result};
use crate::field::{NodeField, TensorWeight};
use crate::ops;
use crate::poset::{enumerate_down_sets, random_down_set, DownSet, NTree, DOWN_SET_ENUM_CAP};
use crate::tol;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    /// Randomized search; the result is a certified lower bound only.
    Sampled { trials: usize, seed: u64 },
}

/// Box constant: max over β of ℰ_β[μ] / 𝐈*μ(β), where
/// ℰ_β[μ] = Σ_{α ≤ β} w(α)(𝐈*μ(α))² is one adjoint-Hardy pass over w(𝐈*μ)².
pub fn box_constant(t: &NTree, w: &TensorWeight, mu: &NodeField) -> Result<(f64, usize)> {
    mu.assert_nonneg("μ")?;
    if mu.sum() <= 0.0 {
        return Err(Error::Precondition("box constant undefined for μ ≡ 0".into()));
    }
    let istar = ops::adjoint_hardy(t, mu);
    let wd = w.dense(t);
    let e_field = NodeField {
        values: (0..t.size())
            .map(|i| wd.values[i] * istar.values[i] * istar.values[i])
            .collect(),
        nonneg: true,
    };
    let e_beta = ops::adjoint_hardy(t, &e_field);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for b in 0..t.size() {
        if istar.values[b] > 0.0 {
            let ratio = e_beta.values[b] / istar.values[b];
            if ratio > best.0 {
                best = (ratio, b);
            }
        }
    }
    Ok(best)
}

fn down_set_ratio(energy_field: &[f64], mu: &NodeField, d: &DownSet) -> Option<f64> {
    let mut e = 0.0;
    let mut mass = 0.0;
    for i in d.indices() {
        e += energy_field[i];
        mass += mu.values[i];
    }
    // μ(𝒟) = 0 forces 𝐈*μ = 0 on the (downward closed) set, hence zero
    // energy; 0/0 ratios are skipped rather than coerced
    if mass > 0.0 {
        Some(e / mass)
    } else {
        None
    }
}

/// Carleson constant: sup over down-sets 𝒟 of Σ_{𝒟} w(𝐈*μ)² / μ(𝒟).
/// Returns (value, exact?, witness).
pub fn carleson_constant(
    t: &NTree,
    w: &TensorWeight,
    mu: &NodeField,
    mode: SearchMode,
) -> Result<(f64, bool, DownSet)> {
    mu.assert_nonneg("μ")?;
    if mu.sum() <= 0.0 {
        return Err(Error::Precondition("Carleson constant undefined for μ ≡ 0".into()));
    }
    let istar = ops::adjoint_hardy(t, mu);
    let wd = w.dense(t);
    let energy_field: Vec<f64> = (0..t.size())
        .map(|i| wd.values[i] * istar.values[i] * istar.values[i])
        .collect();
    match mode {
        SearchMode::Exact => {
            if t.size() > DOWN_SET_ENUM_CAP {
                return Err(Error::SizeBudget);
            }
            let mut best: Option<(f64, DownSet)> = None;
            for d in enumerate_down_sets(t)? {
                if let Some(r) = down_set_ratio(&energy_field, mu, &d) {
                    if best.as_ref().map_or(true, |(b, _)| r > *b) {
                        best = Some((r, d));
                    }
                }
            }
            let (v, d) = best.expect("μ not identically 0 gives at least one valid down-set");
            Ok((v, true, d))
        }
        SearchMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<(f64, DownSet)> = None;
            for _ in 0..trials.max(1) {
                let mut d = random_down_set(t, &mut rng);
                let mut cur = down_set_ratio(&energy_field, mu, &d);
                // greedy single-vertex growth preserving downward closure
                loop {
                    let mut improved = false;
                    for v in 0..t.size() {
                        if d.contains(v) || !t.lower_covers(v).iter().all(|&c| d.contains(c)) {
                            continue;
                        }
                        let mut cand = d.clone();
                        cand.insert_closed(t, v);
                        let r = down_set_ratio(&energy_field, mu, &cand);
                        if match (cur, r) {
                            (None, Some(_)) => true,
                            (Some(a), Some(b)) => b > a,
                            _ => false,
                        } {
                            d = cand;
                            cur = r;
                            improved = true;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if let Some(r) = cur {
                    if best.as_ref().map_or(true, |(b, _)| r > *b) {
                        best = Some((r, d));
                    }
                }
            }
            let (v, d) = best.ok_or_else(|| {
                Error::NonConvergence("no down-set with positive mass sampled".into())
            })?;
            Ok((v, false, d))
        }
    }
}

/// Kernel entry μ(ω)μ(ω′)·𝐈w(join(ω, ω′)): the bilinear form behind both
/// the restricted energy and the embedding constant.
fn support_kernel(t: &NTree, iw: &NodeField, mu: &NodeField, supp: &[usize]) -> Vec<Vec<f64>> {
    let k = supp.len();
    let mut m = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = mu.values[supp[a]] * mu.values[supp[b]] * iw.values[t.join(supp[a], supp[b])];
            m[a][b] = v;
            m[b][a] = v;
        }
    }
    m
}

pub const HC_EXACT_SUPPORT_CAP: usize = 18;

/// Hereditary Carleson (restricted energy) constant:
/// sup over E ⊆ supp μ of ℰ[μ1_E] / μ(E). Restricting E off the support
/// changes neither side, so the search space is subsets of supp μ.
pub fn hereditary_constant(
    t: &NTree,
    w: &TensorWeight,
    mu: &NodeField,
    mode: SearchMode,
) -> Result<(f64, bool, Vec<usize>)> {
    mu.assert_nonneg("μ")?;
    let supp = mu.support();
    if supp.is_empty() {
        return Err(Error::Precondition("hereditary constant undefined for μ ≡ 0".into()));
    }
    let iw = ops::hardy(t, &w.dense(t));
    let kernel = support_kernel(t, &iw, mu, &supp);
    let k = supp.len();
    // ℰ[μ1_E] = Σ_{ω,ω′ ∈ E} μ(ω)μ(ω′)𝐈w(join) — evaluate subsets on the kernel
    let eval = |mask: &[bool]| -> Option<f64> {
        let mut mass = 0.0;
        let mut e = 0.0;
        for a in 0..k {
            if !mask[a] {
                continue;
            }
            mass += mu.values[supp[a]];
            for b in 0..k {
                if mask[b] {
                    e += kernel[a][b];
                }
            }
        }
        if mass > 0.0 {
            Some(e / mass)
        } else {
            None
        }
    };
    match mode {
        SearchMode::Exact => {
            if k > HC_EXACT_SUPPORT_CAP {
                return Err(Error::SizeBudget);
            }
            let mut best: Option<(f64, Vec<bool>)> = None;
            for bits in 1u32..1 << k {
                let mask: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
                if let Some(r) = eval(&mask) {
                    if best.as_ref().map_or(true, |(b, _)| r > *b) {
                        best = Some((r, mask));
                    }
                }
            }
            let (v, mask) = best.expect("nonempty support");
            let e: Vec<usize> =
                (0..k).filter(|&i| mask[i]).map(|i| supp[i]).collect();
            Ok((v, true, e))
        }
        SearchMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<(f64, Vec<bool>)> = None;
            for _ in 0..trials.max(1) {
                let mut mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
                if !mask.iter().any(|&b| b) {
                    mask[rng.gen_range(0..k)] = true;
                }
                let mut cur = eval(&mask);
                loop {
                    let mut improved = false;
                    for i in 0..k {
                        mask[i] = !mask[i];
                        let r = eval(&mask);
                        let better = match (cur, r) {
                            (None, Some(_)) => true,
                            (Some(a), Some(b)) => b > a,
                            _ => false,
                        };
                        if better {
                            cur = r;
                            improved = true;
                        } else {
                            mask[i] = !mask[i];
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if let Some(r) = cur {
                    if best.as_ref().map_or(true, |(b, _)| r > *b) {
                        best = Some((r, mask.clone()));
                    }
                }
            }
            let (v, mask) = best.expect("at least one trial retains a point");
            let e: Vec<usize> =
                (0..k).filter(|&i| mask[i]).map(|i| supp[i]).collect();
            Ok((v, false, e))
        }
    }
}

/// Top generalized eigenvalue of `kernel` against `diag(masses)` via power
/// iteration on the symmetrized matrix D^{-1/2} K D^{-1/2}; the kernel must
/// be positive semidefinite and masses strictly positive.
pub fn top_generalized_eigenvalue(
    kernel: &[Vec<f64>],
    masses: &[f64],
    tol: f64,
) -> Result<f64> {
    let k = masses.len();
    debug_assert!(masses.iter().all(|&m| m > 0.0));
    if k == 1 {
        return Ok(kernel[0][0] / masses[0]);
    }
    let scale: Vec<f64> = masses.iter().map(|&m| 1.0 / m.sqrt()).collect();
    // ψ ≡ 1 plus a fixed deterministic perturbation so a start vector
    // orthogonal to the top eigenvector cannot occur systematically
    let mut v: Vec<f64> = (0..k).map(|i| 1.0 + 1e-3 * ((i + 1) as f64).sin()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut rayleigh = 0.0f64;
    for _ in 0..tol::EIG_MAX_ITERS {
        let mut next = vec![0.0; k];
        for a in 0..k {
            let mut acc = 0.0;
            for b in 0..k {
                acc += scale[a] * kernel[a][b] * scale[b] * v[b];
            }
            next[a] = acc;
        }
        let new_rayleigh: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        next.iter_mut().for_each(|x| *x /= norm);
        let done = (new_rayleigh - rayleigh).abs() <= tol * new_rayleigh.abs().max(tol::ABS_FLOOR);
        rayleigh = new_rayleigh;
        v = next;
        if done {
            return Ok(rayleigh);
        }
    }
    Err(Error::NonConvergence(format!(
        "power iteration cap reached; last Rayleigh quotient {rayleigh}"
    )))
}

/// Carleson embedding constant: top generalized eigenvalue of
/// M(ω,ω′) = μ(ω)μ(ω′)𝐈w(join(ω,ω′)) against diag(μ) on supp μ.
pub fn embedding_constant(t: &NTree, w: &TensorWeight, mu: &NodeField, tol: f64) -> Result<f64> {
    mu.assert_nonneg("μ")?;
    let supp = mu.support();
    if supp.is_empty() {
        return Err(Error::Precondition("embedding constant undefined for μ ≡ 0".into()));
    }
    let iw = ops::hardy(t, &w.dense(t));
    let kernel = support_kernel(t, &iw, mu, &supp);
    let masses: Vec<f64> = supp.iter().map(|&i| mu.values[i]).collect();
    top_generalized_eigenvalue(&kernel, &masses, tol)
}

#[derive(Debug, Clone)]
pub struct ConstantsReport {
    pub box_constant: f64,
    pub box_witness: usize,
    pub carleson: f64,
    pub carleson_exact: bool,
    pub carleson_witness: DownSet,
    pub hereditary: f64,
    pub hereditary_exact: bool,
    pub hereditary_witness: Vec<usize>,
    pub embedding: f64,
    pub ratio_ce_box: f64,
    pub ratio_hc_c: f64,
    pub ratio_c_box: f64,
}

impl ConstantsReport {
    pub fn all_exact(&self) -> bool {
        self.carleson_exact && self.hereditary_exact
    }

    /// box ≤ carleson ≤ hereditary ≤ embedding, with inequality slack,
    /// meaningful when the middle two are exact.
    pub fn chain_holds(&self) -> bool {
        tol::leq_slack(self.box_constant, self.carleson)
            && tol::leq_slack(self.carleson, self.hereditary)
            && tol::leq_slack(self.hereditary, self.embedding)
    }
}

pub fn ordering_report(
    t: &NTree,
    w: &TensorWeight,
    mu: &NodeField,
    carleson_mode: SearchMode,
    hereditary_mode: SearchMode,
) -> Result<ConstantsReport> {
    let (bx, bw) = box_constant(t, w, mu)?;
    let (c, c_exact, c_witness) = carleson_constant(t, w, mu, carleson_mode)?;
    let (hc, hc_exact, hc_witness) = hereditary_constant(t, w, mu, hereditary_mode)?;
    let ce = embedding_constant(t, w, mu, tol::EIG_TOL)?;
    Ok(ConstantsReport {
        box_constant: bx,
        box_witness: bw,
        carleson: c,
        carleson_exact: c_exact,
        carleson_witness: c_witness,
        hereditary: hc,
        hereditary_exact: hc_exact,
        hereditary_witness: hc_witness,
        embedding: ce,
        ratio_ce_box: ce / bx,
        ratio_hc_c: hc / c,
        ratio_c_box: c / bx,
    })
}

pub const CHANG_CARLESON_CELL_CAP: usize = 16;

fn boundary_cells(t: &NTree) -> Result<(Vec<usize>, u32)> {
    let depth = t.tree(0).max_depth();
    for j in 0..t.arity() {
        let tr = t.tree(j);
        if tr.max_depth() != depth || tr.leaves().iter().any(|&l| tr.depth(l) != depth) {
            return Err(Error::Precondition(
                "component trees must be dyadic of equal depth".into(),
            ));
        }
    }
    Ok((t.leaf_indices(), depth))
}

/// Dyadic Chang–Carleson constant: sup over dyadic open Ω (cell unions) of
/// Σ_{α: R_α ⊆ Ω} (m_d(R_α))² ν(α) / m_d(Ω).
pub fn chang_carleson_dyadic(
    t: &NTree,
    nu: &NodeField,
    mode: SearchMode,
) -> Result<f64> {
    nu.assert_nonneg("ν")?;
    let (cells, _depth) = boundary_cells(t)?;
    let ncells = cells.len();
    let cell_measure = 1.0 / ncells as f64;
    // per vertex: bitmask of boundary cells below it, and (m_d(R_α))²ν(α)
    let mut cell_mask = vec![0u64; t.size()];
    for (ci, &c) in cells.iter().enumerate() {
        t.for_each_ancestor(c, |a| cell_mask[a] |= 1 << ci);
    }
    let weight: Vec<f64> = (0..t.size())
        .map(|a| {
            let m = cell_mask[a].count_ones() as f64 * cell_measure;
            m * m * nu.values[a]
        })
        .collect();
    let eval = |omega: u64| -> f64 {
        let m_omega = omega.count_ones() as f64 * cell_measure;
        if m_omega == 0.0 {
            return 0.0;
        }
        let total: f64 = (0..t.size())
            .filter(|&a| cell_mask[a] & omega == cell_mask[a])
            .map(|a| weight[a])
            .sum();
        total / m_omega
    };
    match mode {
        SearchMode::Exact => {
            if ncells > CHANG_CARLESON_CELL_CAP {
                return Err(Error::SizeBudget);
            }
            Ok((1u64..1 << ncells).map(eval).fold(0.0, f64::max))
        }
        SearchMode::Sampled { trials, seed } => {
            if ncells > 63 {
                return Err(Error::SizeBudget);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = if ncells == 63 { u64::MAX >> 1 } else { (1u64 << ncells) - 1 };
            let mut best = eval(full);
            for _ in 0..trials {
                best = best.max(eval(rng.gen_range(1..=full)));
            }
            Ok(best)
        }
    }
}

/// Boundary embedding constant: smallest C₁ with
/// Σ_α ν(α)(𝐈*(f m_d)(α))² ≤ C₁ Σ_ω f(ω)² m_d(ω) over boundary functions f.
pub fn boundary_embedding_constant(t: &NTree, nu: &NodeField) -> Result<f64> {
    nu.assert_nonneg("ν")?;
    if nu.sum() == 0.0 {
        return Ok(0.0);
    }
    let (cells, _depth) = boundary_cells(t)?;
    let cell_measure = 1.0 / cells.len() as f64;
    let inu = ops::hardy(t, nu);
    let k = cells.len();
    let mut kernel = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = cell_measure * cell_measure * inu.values[t.join(cells[a], cells[b])];
            kernel[a][b] = v;
            kernel[b][a] = v;
        }
    }
    let masses = vec![cell_measure; k];
    top_generalized_eigenvalue(&kernel, &masses, tol::EIG_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Tree;
    use rand::SeedableRng;

    fn b2() -> Tree {
        Tree::dyadic(1, 2, 100).unwrap()
    }

    fn corner_instance() -> (NTree, TensorWeight, NodeField) {
        let t = NTree::new(vec![b2(), b2()]).unwrap();
        let w = TensorWeight::ones(&t);
        let corner = t.index(&[1, 1]);
        let mu = NodeField::delta(&t, corner, 1.0);
        (t, w, mu)
    }

    #[test]
    fn box_on_b2() {
        let t = NTree::new(vec![b2()]).unwrap();
        let w = TensorWeight::ones(&t);
        let mu = NodeField::delta(&t, 1, 1.0);
        let (v, wit) = box_constant(&t, &w, &mu).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(wit, 0);
    }

    #[test]
    fn box_at_root_is_one() {
        let t = NTree::new(vec![b2()]).unwrap();
        let w = TensorWeight::ones(&t);
        let mu = NodeField::delta(&t, 0, 1.0);
        assert_eq!(box_constant(&t, &w, &mu).unwrap().0, 1.0);
    }

    #[test]
    fn corner_constants_are_four() {
        let (t, w, mu) = corner_instance();
        let (bx, bw) = box_constant(&t, &w, &mu).unwrap();
        assert_eq!(bx, 4.0);
        assert_eq!(bw, t.index(&[0, 0]));
        let (c, exact, _) = carleson_constant(&t, &w, &mu, SearchMode::Exact).unwrap();
        assert!(exact);
        assert_eq!(c, 4.0);
        let (hc, exact, wit) = hereditary_constant(&t, &w, &mu, SearchMode::Exact).unwrap();
        assert!(exact);
        assert_eq!(hc, 4.0);
        assert_eq!(wit, vec![t.index(&[1, 1])]);
        let ce = embedding_constant(&t, &w, &mu, tol::EIG_TOL).unwrap();
        assert!(tol::approx_eq(ce, 4.0, 1e-9));
    }

    #[test]
    fn carleson_on_b2_single_leaf() {
        let t = NTree::new(vec![b2()]).unwrap();
        let w = TensorWeight::ones(&t);
        let mu = NodeField::delta(&t, 1, 1.0);
        let (c, _, _) = carleson_constant(&t, &w, &mu, SearchMode::Exact).unwrap();
        assert_eq!(c, 2.0);
    }

    #[test]
    fn embedding_b2_single_leaf() {
        let t = NTree::new(vec![b2()]).unwrap();
        let w = TensorWeight::ones(&t);
        let mu = NodeField::delta(&t, 1, 1.0);
        assert!(tol::approx_eq(
            embedding_constant(&t, &w, &mu, tol::EIG_TOL).unwrap(),
            2.0,
            1e-9
        ));
    }

    #[test]
    fn report_on_corner_fixture() {
        let (t, w, mu) = corner_instance();
        let r = ordering_report(&t, &w, &mu, SearchMode::Exact, SearchMode::Exact).unwrap();
        assert!(r.all_exact());
        assert!(r.chain_holds());
        assert!(tol::approx_eq(r.ratio_ce_box, 1.0, 1e-9));
    }

    #[test]
    fn chain_on_random_exact_instances() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..=2);
            let trees: Vec<Tree> = (0..n).map(|_| Tree::random(&mut rng, 4)).collect();
            let t = NTree::new(trees).unwrap();
            if t.size() > DOWN_SET_ENUM_CAP {
                continue;
            }
            let w = TensorWeight::random(&t, &mut rng);
            let mu = NodeField::random_sparse(&t, &mut rng, 3);
            if mu.sum() == 0.0 {
                continue;
            }
            let r =
                ordering_report(&t, &w, &mu, SearchMode::Exact, SearchMode::Exact).unwrap();
            assert!(r.chain_holds(), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn sampled_carleson_is_lower_bound() {
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = NTree::new(vec![Tree::random(&mut rng, 4), Tree::random(&mut rng, 4)])
                .unwrap();
            if t.size() > DOWN_SET_ENUM_CAP {
                continue;
            }
            let w = TensorWeight::random(&t, &mut rng);
            let mu = NodeField::random_sparse(&t, &mut rng, 2);
            let (exact, _, _) = carleson_constant(&t, &w, &mu, SearchMode::Exact).unwrap();
            let (sampled, flag, _) = carleson_constant(
                &t,
                &w,
                &mu,
                SearchMode::Sampled { trials: 50, seed },
            )
            .unwrap();
            assert!(!flag);
            assert!(tol::leq_slack(sampled, exact));
        }
    }

    #[test]
    fn linear_scaling_in_mu_and_w() {
        let (t, w, mu) = corner_instance();
        let mu2 = mu.scale(3.0);
        let (b1, _) = box_constant(&t, &w, &mu).unwrap();
        let (b2v, _) = box_constant(&t, &w, &mu2).unwrap();
        assert!(tol::approx_eq(3.0 * b1, b2v, 1e-12));
        let w2 = TensorWeight::new(&t, vec![vec![2.0; 3], vec![1.0; 3]]).unwrap();
        let (b3, _) = box_constant(&t, &w2, &mu).unwrap();
        assert!(tol::approx_eq(2.0 * b1, b3, 1e-12));
        let ce1 = embedding_constant(&t, &w, &mu, tol::EIG_TOL).unwrap();
        let ce2 = embedding_constant(&t, &w, &mu2, tol::EIG_TOL).unwrap();
        assert!(tol::approx_eq(3.0 * ce1, ce2, 1e-8));
    }

    #[test]
    fn rayleigh_lower_bound_for_embedding() {
        // ψ ≡ 1 gives ℰ[μ]/|μ| ≤ CE
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = NTree::new(vec![Tree::random(&mut rng, 5), Tree::random(&mut rng, 5)])
                .unwrap();
            let w = TensorWeight::random(&t, &mut rng);
            let mu = NodeField::random_sparse(&t, &mut rng, 3);
            let ce = embedding_constant(&t, &w, &mu, tol::EIG_TOL).unwrap();
            let lower = ops::energy(&t, &w, &mu) / mu.sum();
            assert!(tol::leq_slack(lower, ce), "seed {seed}: {lower} vs {ce}");
        }
    }

    #[test]
    fn chang_carleson_depth1_single_tree() {
        let t = NTree::new(vec![b2()]).unwrap();
        let nu = NodeField::delta(&t, 0, 1.0);
        // only the root rectangle carries ν; it fits only in the full interval
        let v = chang_carleson_dyadic(&t, &nu, SearchMode::Exact).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn chang_carleson_sampled_below_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = Tree::dyadic(2, 2, 100).unwrap();
        let t = NTree::new(vec![b.clone(), b]).unwrap();
        let nu = NodeField::random_sparse(&t, &mut rng, 6);
        let exact = chang_carleson_dyadic(&t, &nu, SearchMode::Exact).unwrap();
        let sampled =
            chang_carleson_dyadic(&t, &nu, SearchMode::Sampled { trials: 20_000, seed: 1 })
                .unwrap();
        assert!(tol::leq_slack(sampled, exact));
        assert!(sampled > 0.5 * exact, "sampling should land near the max here");
    }

    #[test]
    fn boundary_embedding_examples() {
        let t = NTree::new(vec![b2()]).unwrap();
        let nu = NodeField::delta(&t, 0, 1.0);
        assert!(tol::approx_eq(boundary_embedding_constant(&t, &nu).unwrap(), 1.0, 1e-9));
        let zero = NodeField::zeros(&t);
        assert_eq!(boundary_embedding_constant(&t, &zero).unwrap(), 0.0);
    }

    #[test]
    fn boundary_embedding_test_vector_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Tree::dyadic(2, 2, 100).unwrap();
        let t = NTree::new(vec![b]).unwrap();
        let nu = NodeField::random_sparse(&t, &mut rng, 4);
        let c = boundary_embedding_constant(&t, &nu).unwrap();
        // f ≡ 1: LHS = Σ ν (𝐈* m)² with m the cell measure, RHS = C·1
        let cells = t.leaf_indices();
        let m = 1.0 / cells.len() as f64;
        let mut md = NodeField::zeros(&t);
        for &c in &cells {
            md.values[c] = m;
        }
        let istar = ops::adjoint_hardy(&t, &md);
        let lower: f64 = (0..t.size())
            .map(|i| nu.values[i] * istar.values[i] * istar.values[i])
            .sum();
        assert!(tol::leq_slack(lower, c));
    }
}
