//! Monte-Carlo bridge between disc geometry and dyadic structure: rotated
//! lattice distances, the good-rotation probability, two-sided kernel
//! comparisons for the weights w_j = |α_j|^{s_j−1}, and the Poisson-kernel
//! failure witness at s = 0.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// A point of the unit disc in polar form.
#[derive(Debug, Clone, Copy)]
pub struct DiscPoint {
    pub angle: f64,
    pub radius: f64,
}

/// Chord distance between the boundary projections.
fn chord(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) / 2.0).sin().abs()
}

/// D(z, ζ) = |u − v| + (1 − |z|) + (1 − |ζ|), with u, v the radial boundary
/// projections and |u − v| the chord length.
pub fn distance(z: DiscPoint, zeta: DiscPoint) -> f64 {
    chord(z.angle, zeta.angle) + (1.0 - z.radius) + (1.0 - zeta.radius)
}

fn same_arc(theta: f64, len: f64, a: f64, b: f64) -> bool {
    let ia = ((a - theta).rem_euclid(TAU) / len).floor();
    let ib = ((b - theta).rem_euclid(TAU) / len).floor();
    ia == ib
}

/// D_L(z, ζ): the length of the smallest arc of the lattice rotated by θ
/// that is longer than max(1 − |z|, 1 − |ζ|) and contains the shorter
/// boundary arc between the projections of z and ζ.
pub fn lattice_distance(z: DiscPoint, zeta: DiscPoint, theta: f64) -> f64 {
    let h = (1.0 - z.radius).max(1.0 - zeta.radius);
    // finest admissible generation: arc length strictly above h
    let mut best = TAU; // the full circle always works
    let mut g = 0u32;
    loop {
        let len = TAU / f64::powi(2.0, g as i32);
        if len <= h {
            break;
        }
        if same_arc(theta, len, z.angle, zeta.angle) {
            best = len;
        }
        g += 1;
        if g > 60 {
            break;
        }
    }
    best
}

/// Wilson score interval for a binomial proportion at z = 1.96.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = 1.96f64;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone)]
pub struct GoodLatticeReport {
    pub m: u32,
    pub trials: usize,
    pub good_count: usize,
    pub empirical_probability: f64,
    pub wilson: (f64, f64),
    /// D_L/D exceeded 10 on this many good samples (expected 0).
    pub ratio_failures_on_good: usize,
    pub max_ratio_on_good: f64,
    /// min D_L/D over all samples (good or not), bounded away from 0.
    pub min_ratio_overall: f64,
}

/// Samples rotations against a fixed arc I of length 2π·2^{−m} and points
/// z, ζ with boundary projections in I and 1 − |·| ∈ [|I|, 2|I|], so that
/// D ≍ |I|. A rotation is good when no division point of generations
/// 1..m−4 falls in I; on good rotations D_L ≤ 10·D is checked exactly.
pub fn good_lattice_probability(m: u32, trials: usize, seed: u64) -> Result<GoodLatticeReport> {
    if m < 1 {
        return Err(Error::Precondition("need m ≥ 1".into()));
    }
    let arc = TAU / f64::powi(2.0, m as i32);
    let mut good = 0usize;
    let mut ratio_failures = 0usize;
    let mut max_ratio_good = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let theta: f64 = rng.gen_range(0.0..TAU);
        let z = DiscPoint {
            angle: rng.gen_range(0.0..arc),
            radius: 1.0 - rng.gen_range(arc..2.0 * arc),
        };
        let zeta = DiscPoint {
            angle: rng.gen_range(0.0..arc),
            radius: 1.0 - rng.gen_range(arc..2.0 * arc),
        };
        // good: no division point of generations 1..m−4 inside I = [0, arc);
        // generations nest, so only the finest generation matters
        let is_good = if m <= 4 {
            true
        } else {
            let len = TAU / f64::powi(2.0, (m - 4) as i32);
            let first = (0.0f64 - theta).rem_euclid(len);
            // division points are θ + k·len; the first one at angle ≥ 0 is at
            // len − first (mod len) past 0
            let offset = (len - first) % len;
            !(offset < arc)
        };
        let d = distance(z, zeta);
        let dl = lattice_distance(z, zeta, theta);
        let ratio = dl / d;
        min_ratio = min_ratio.min(ratio);
        if is_good {
            good += 1;
            max_ratio_good = max_ratio_good.max(ratio);
            if ratio > 10.0 {
                ratio_failures += 1;
            }
        }
    }
    Ok(GoodLatticeReport {
        m,
        trials,
        good_count: good,
        empirical_probability: good as f64 / trials.max(1) as f64,
        wilson: wilson_interval(good, trials),
        ratio_failures_on_good: ratio_failures,
        max_ratio_on_good: max_ratio_good,
        min_ratio_overall: min_ratio,
    })
}

/// |1 − zζ̄| for z = r·e^{ia}, ζ = ρ·e^{ib} depends only on t = rρ and
/// φ = a − b.
fn one_minus_prod(t: f64, phi: f64) -> f64 {
    let re = 1.0 - t * phi.cos();
    let im = t * phi.sin();
    (re * re + im * im).sqrt()
}

/// A Whitney box: boundary arc [angle_lo, angle_hi) at generation k, radial
/// band 1 − |z| ∈ (2^{−k−1}, 2^{−k}].
#[derive(Debug, Clone, Copy)]
pub struct WhitneyBox {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub depth: u32,
}

impl WhitneyBox {
    fn radius_range(&self) -> (f64, f64) {
        let k = self.depth as i32;
        (1.0 - f64::powi(2.0, -k), 1.0 - f64::powi(2.0, -k - 1))
    }
}

/// inf over z ∈ q_α, ζ ∈ q_β of |1 − zζ̄|, by grid search over (t, φ) with
/// doubling refinement until the value is stable within 1%.
fn box_inf_one_minus_prod(qa: &WhitneyBox, qb: &WhitneyBox) -> f64 {
    let (ra_lo, ra_hi) = qa.radius_range();
    let (rb_lo, rb_hi) = qb.radius_range();
    let t_lo = ra_lo * rb_lo;
    let t_hi = ra_hi * rb_hi;
    // signed angle differences, folded to [−π, π]
    let fold = |x: f64| -> f64 {
        let mut y = x.rem_euclid(TAU);
        if y > PI {
            y -= TAU;
        }
        y
    };
    let d1 = fold(qa.angle_lo - qb.angle_lo);
    let d2 = fold(qa.angle_lo - qb.angle_hi);
    let d3 = fold(qa.angle_hi - qb.angle_lo);
    let d4 = fold(qa.angle_hi - qb.angle_hi);
    let phi_lo = d1.min(d2).min(d3).min(d4);
    let phi_hi = d1.max(d2).max(d3).max(d4);
    // if the arcs overlap, φ = 0 is attainable
    let phi_lo = if phi_lo > 0.0 && phi_hi > 0.0 { phi_lo } else { phi_lo.min(0.0) };
    let mut n = 4usize;
    let mut prev = f64::INFINITY;
    loop {
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let t = t_lo + (t_hi - t_lo) * i as f64 / n as f64;
            for j in 0..=n {
                let phi = phi_lo + (phi_hi - phi_lo) * j as f64 / n as f64;
                best = best.min(one_minus_prod(t, phi));
            }
        }
        if (prev - best).abs() <= 0.01 * best || n >= 256 {
            return best;
        }
        prev = best;
        n *= 2;
    }
}

/// One coordinate factor of |K_s| at its box supremum: m^{s−1} for s < 1
/// and 1 + log(2/m) for s = 1, where m = inf|1 − zζ̄|.
fn kernel_factor(s: f64, inf_mod: f64) -> f64 {
    if s < 1.0 {
        inf_mod.powf(s - 1.0)
    } else {
        1.0 + (2.0 / inf_mod).ln()
    }
}

/// Tree-side factor Σ_{g=0..k} |arc at generation g|^{s−1} for one
/// coordinate (the chain of common ancestors of a join at depth k).
fn tree_factor(s: f64, join_depth: u32) -> f64 {
    (0..=join_depth)
        .map(|g| (TAU / f64::powi(2.0, g as i32)).powf(s - 1.0))
        .sum()
}

fn whitney_box_of(p: DiscPoint, theta: f64) -> (WhitneyBox, u32, u64) {
    let h = 1.0 - p.radius;
    let k = (-h.log2()).floor().max(0.0) as u32;
    let len = TAU / f64::powi(2.0, k as i32);
    let idx = (((p.angle - theta).rem_euclid(TAU)) / len).floor() as u64;
    let lo = theta + idx as f64 * len;
    (WhitneyBox { angle_lo: lo, angle_hi: lo + len, depth: k }, k, idx)
}

fn join_depth(mut k1: u32, mut i1: u64, mut k2: u32, mut i2: u64) -> u32 {
    while k1 > k2 {
        i1 >>= 1;
        k1 -= 1;
    }
    while k2 > k1 {
        i2 >>= 1;
        k2 -= 1;
    }
    while i1 != i2 {
        i1 >>= 1;
        i2 >>= 1;
        k1 -= 1;
    }
    k1
}

/// Pinned constant for the unconditional tree ≤ C·kernel domination.
pub const DK_CONSTANT: f64 = 64.0;
/// Pinned constant defining "reverse domination" kernel ≤ C·tree.
pub const DK_REVERSE_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct KernelDominationReport {
    pub d: usize,
    pub s: Vec<f64>,
    pub trials: usize,
    /// max over samples of tree/kernel; the one-sided domination asserts
    /// this stays ≤ DK_CONSTANT.
    pub direct_envelope: f64,
    pub direct_failures: usize,
    /// empirical probability of kernel ≤ DK_REVERSE_CONSTANT · tree.
    pub reverse_probability: f64,
    pub reverse_wilson: (f64, f64),
}

/// Random rotations and point pairs: compares the tree kernel
/// 𝐈_{w_s}1(α∧β) with the box supremum of ∏_j|1−z_jζ̄_j|^{s_j−1}.
pub fn kernel_domination(
    d: usize,
    s: &[f64],
    trials: usize,
    seed: u64,
) -> Result<KernelDominationReport> {
    if !(1..=3).contains(&d) || s.len() != d {
        return Err(Error::Precondition("need d ∈ {1,2,3} with one s per coordinate".into()));
    }
    if s.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::Precondition("each s_j must lie in (0, 1]".into()));
    }
    let mut envelope = 0.0f64;
    let mut direct_failures = 0usize;
    let mut reverse_ok = 0usize;
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let mut tree = 1.0f64;
        let mut kernel = 1.0f64;
        for &sj in s.iter() {
            let theta: f64 = rng.gen_range(0.0..TAU);
            let depth_z: f64 = rng.gen_range(1.0..9.0);
            let depth_zeta: f64 = rng.gen_range(1.0..9.0);
            // bias half the samples toward nearby pairs so deep joins occur
            let base: f64 = rng.gen_range(0.0..TAU);
            let spread = if rng.gen_bool(0.5) {
                f64::powf(2.0, -rng.gen_range(0.0..8.0))
            } else {
                1.0
            };
            let z = DiscPoint { angle: base, radius: 1.0 - f64::powf(2.0, -depth_z) };
            let zeta = DiscPoint {
                angle: (base + spread * rng.gen_range(-1.0..1.0)).rem_euclid(TAU),
                radius: 1.0 - f64::powf(2.0, -depth_zeta),
            };
            let (qa, ka, ia) = whitney_box_of(z, theta);
            let (qb, kb, ib) = whitney_box_of(zeta, theta);
            let k_join = join_depth(ka, ia, kb, ib);
            tree *= tree_factor(sj, k_join);
            kernel *= kernel_factor(sj, box_inf_one_minus_prod(&qa, &qb));
        }
        let ratio = tree / kernel;
        envelope = envelope.max(ratio);
        if ratio > DK_CONSTANT {
            direct_failures += 1;
        }
        if kernel <= DK_REVERSE_CONSTANT * tree {
            reverse_ok += 1;
        }
    }
    Ok(KernelDominationReport {
        d,
        s: s.to_vec(),
        trials,
        direct_envelope: envelope,
        direct_failures,
        reverse_probability: reverse_ok as f64 / trials.max(1) as f64,
        reverse_wilson: wilson_interval(reverse_ok, trials),
    })
}

/// Poisson-type kernel in one disc variable, as a function of t = rρ and
/// φ = a − b: (1 − t²)/|1 − t·e^{iφ}|².
fn poisson_kernel(t: f64, phi: f64) -> f64 {
    let m = one_minus_prod(t, phi);
    (1.0 - t * t) / (m * m)
}

/// sup over the two boxes of the 1-variable Poisson kernel, grid-refined.
fn box_sup_poisson(qa: &WhitneyBox, qb: &WhitneyBox) -> f64 {
    let (ra_lo, ra_hi) = qa.radius_range();
    let (rb_lo, rb_hi) = qb.radius_range();
    let (t_lo, t_hi) = (ra_lo * rb_lo, ra_hi * rb_hi);
    let fold = |x: f64| -> f64 {
        let mut y = x.rem_euclid(TAU);
        if y > PI {
            y -= TAU;
        }
        y
    };
    let d1 = fold(qa.angle_lo - qb.angle_lo);
    let d2 = fold(qa.angle_lo - qb.angle_hi);
    let d3 = fold(qa.angle_hi - qb.angle_lo);
    let d4 = fold(qa.angle_hi - qb.angle_hi);
    let mut phi_lo = d1.min(d2).min(d3).min(d4);
    let phi_hi = d1.max(d2).max(d3).max(d4);
    if phi_lo > 0.0 && phi_hi > 0.0 {
        // disjoint arcs on the same side; keep the range as is
    } else {
        phi_lo = phi_lo.min(0.0);
    }
    let mut n = 4usize;
    let mut prev = 0.0f64;
    loop {
        let mut best = 0.0f64;
        for i in 0..=n {
            let t = t_lo + (t_hi - t_lo) * i as f64 / n as f64;
            for j in 0..=n {
                let phi = phi_lo + (phi_hi - phi_lo) * j as f64 / n as f64;
                best = best.max(poisson_kernel(t, phi));
            }
        }
        if (best - prev).abs() <= 0.01 * best.max(1e-300) || n >= 256 {
            return best;
        }
        prev = best;
        n *= 2;
    }
}

#[derive(Debug, Clone)]
pub struct PoissonWitnessRow {
    pub depth: u32,
    /// max over pairs of 𝐈_{w_0}1(join)/P for the bi-disc (square of the
    /// per-coordinate maximum).
    pub max_ratio: f64,
    /// witness pair per coordinate: (generation, arc index) of α and β.
    pub alpha: (u32, u64),
    pub beta: (u32, u64),
}

/// Exhaustive search over same-depth dyadic box pairs for the failure of
/// the Poisson analogue of the kernel domination at s = 0 (w_j = |α_j|^{−1}).
pub fn poisson_failure_witness(depth: u32) -> Result<Vec<PoissonWitnessRow>> {
    if depth > 8 {
        return Err(Error::Precondition("depth ≤ 8".into()));
    }
    let mut rows = Vec::new();
    for dep in 2..=depth.max(2) {
        let mut best = 0.0f64;
        let mut wa = (0u32, 0u64);
        let mut wb = (0u32, 0u64);
        // one coordinate suffices: the bi-disc ratio is the product of two
        // identical independent factors, maximized by the same pair
        let mut verts = Vec::new();
        for k in 0..=dep {
            for i in 0..1u64 << k {
                verts.push((k, i));
            }
        }
        for &(ka, ia) in &verts {
            for &(kb, ib) in &verts {
                let la = TAU / f64::powi(2.0, ka as i32);
                let lb = TAU / f64::powi(2.0, kb as i32);
                let qa = WhitneyBox {
                    angle_lo: ia as f64 * la,
                    angle_hi: (ia + 1) as f64 * la,
                    depth: ka,
                };
                let qb = WhitneyBox {
                    angle_lo: ib as f64 * lb,
                    angle_hi: (ib + 1) as f64 * lb,
                    depth: kb,
                };
                let kj = join_depth(ka, ia, kb, ib);
                // w(α) = |α|^{−1}: the s → 0 limit of the tree factor
                let tree: f64 = (0..=kj).map(|g| f64::powi(2.0, g as i32) / TAU).sum();
                let p = box_sup_poisson(&qa, &qb);
                let ratio = tree / p;
                if ratio > best {
                    best = ratio;
                    wa = (ka, ia);
                    wb = (kb, ib);
                }
            }
        }
        rows.push(PoissonWitnessRow { depth: dep, max_ratio: best * best, alpha: wa, beta: wb });
        if dep >= depth {
            break;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_distance() {
        let z = DiscPoint { angle: 1.0, radius: 0.75 };
        let d = distance(z, z);
        assert!((d - 0.5).abs() < 1e-12);
        let dl = lattice_distance(z, z, 0.0);
        assert!(dl >= 0.25); // must exceed 1 − |z|
        assert!(dl >= 0.1 * d);
    }

    #[test]
    fn antipodal_points_use_full_circle() {
        let z = DiscPoint { angle: 0.01, radius: 0.99 };
        let zeta = DiscPoint { angle: PI + 0.01, radius: 0.99 };
        let d = distance(z, zeta);
        assert!(d > 1.9);
        let dl = lattice_distance(z, zeta, 0.0);
        assert!((dl - TAU).abs() < 1e-12 || dl >= PI);
    }

    #[test]
    fn same_dyadic_arc_gives_that_arc() {
        // both points deep inside the first level-3 arc of the unrotated
        // lattice, radii just below the arc length
        let len = TAU / 8.0;
        let z = DiscPoint { angle: 0.3 * len, radius: 1.0 - 0.6 * len };
        let zeta = DiscPoint { angle: 0.7 * len, radius: 1.0 - 0.6 * len };
        let dl = lattice_distance(z, zeta, 0.0);
        assert!((dl - len).abs() < 1e-12);
    }

    #[test]
    fn good_probability_meets_bound() {
        let r = good_lattice_probability(10, 20_000, 7).unwrap();
        assert!(
            r.empirical_probability >= 7.0 / 8.0 - 0.02,
            "probability {}",
            r.empirical_probability
        );
        assert_eq!(r.ratio_failures_on_good, 0);
        assert!(r.min_ratio_overall > 0.05);
    }

    #[test]
    fn degenerate_m_probability_one() {
        let r = good_lattice_probability(3, 500, 1).unwrap();
        assert_eq!(r.good_count, 500);
    }

    #[test]
    fn good_probability_deterministic() {
        let a = good_lattice_probability(8, 2000, 99).unwrap();
        let b = good_lattice_probability(8, 2000, 99).unwrap();
        assert_eq!(a.good_count, b.good_count);
        assert_eq!(a.max_ratio_on_good.to_bits(), b.max_ratio_on_good.to_bits());
    }

    #[test]
    fn kernel_domination_holds() {
        for (d, s) in [(1usize, vec![1.0]), (1, vec![0.5]), (2, vec![1.0, 1.0]), (2, vec![0.5, 0.5])]
        {
            let r = kernel_domination(d, &s, 2000, 11).unwrap();
            assert_eq!(r.direct_failures, 0, "d={d} s={s:?}: envelope {}", r.direct_envelope);
            assert!(r.reverse_probability > 0.3, "d={d}: {}", r.reverse_probability);
        }
    }

    #[test]
    fn kernel_domination_rejects_bad_s() {
        assert!(kernel_domination(1, &[0.0], 10, 0).is_err());
        assert!(kernel_domination(1, &[1.5], 10, 0).is_err());
        assert!(kernel_domination(2, &[1.0], 10, 0).is_err());
    }

    #[test]
    fn poisson_ratio_strictly_increasing() {
        let rows = poisson_failure_witness(6).unwrap();
        assert_eq!(rows.len(), 5);
        for pair in rows.windows(2) {
            assert!(
                pair[1].max_ratio > pair[0].max_ratio,
                "depth {} → {}: {} vs {}",
                pair[0].depth,
                pair[1].depth,
                pair[0].max_ratio,
                pair[1].max_ratio
            );
        }
    }
}
