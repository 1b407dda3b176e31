//! Instance serialization and deterministic generation.
//!
//! An instance bundles the product tree, a tensor weight, and a measure.
//! JSON schema:
//! `{"trees":[{"parents":[null,0,0]},...], "weight":{...}, "measure":[...]}`
//! with vertex 0 as root of each component tree. The weight is either
//! `{"s":[s_1,...,s_n]}` or `{"factors":[[...],...]}` (one list per
//! coordinate, indexed by component vertex). The measure is either a dense
//! array aligned with the linear index or a sparse list of
//! `[[coords...], value]` entries; output is always dense.

use crate::error::{Error, Result};
use crate::field::{NodeField, TensorWeight};
use crate::poset::{NTree, Tree};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap on product sizes, overridable via `MTC_BUDGET_VERTICES`.
pub const DEFAULT_VERTEX_BUDGET: usize = 2_000_000;

/// Reads the vertex budget from the environment (default 2·10⁶).
pub fn vertex_budget() -> usize {
    std::env::var("MTC_BUDGET_VERTICES")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(DEFAULT_VERTEX_BUDGET)
}

/// A complete problem instance: product tree, tensor weight, measure.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ntree: NTree,
    pub weight: TensorWeight,
    pub mu: NodeField,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    parents: Vec<Option<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightJson {
    FromS { s: Vec<f64> },
    Factors { factors: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MeasureJson {
    Dense(Vec<f64>),
    Sparse(Vec<(Vec<u32>, f64)>),
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    trees: Vec<TreeJson>,
    weight: WeightJson,
    measure: MeasureJson,
}

impl Instance {
    pub fn to_json(&self) -> String {
        let doc = InstanceJson {
            trees: (0..self.ntree.arity())
                .map(|j| TreeJson { parents: self.ntree.tree(j).parents().to_vec() })
                .collect(),
            weight: WeightJson::Factors { factors: self.weight.factors.clone() },
            measure: MeasureJson::Dense(self.mu.values.clone()),
        };
        serde_json::to_string(&doc).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let doc: InstanceJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let trees = doc
            .trees
            .into_iter()
            .map(|t| Tree::from_parents(t.parents))
            .collect::<Result<Vec<_>>>()?;
        let ntree = NTree::new(trees)?;
        if ntree.size() > vertex_budget() {
            return Err(Error::SizeBudget);
        }
        let weight = match doc.weight {
            WeightJson::FromS { s } => TensorWeight::from_s(&ntree, &s)?,
            WeightJson::Factors { factors } => TensorWeight::new(&ntree, factors)?,
        };
        let mu = match doc.measure {
            MeasureJson::Dense(values) => NodeField::from_values(&ntree, values)?,
            MeasureJson::Sparse(entries) => {
                let mut values = vec![0.0; ntree.size()];
                for (coords, v) in entries {
                    if coords.len() != ntree.arity() {
                        return Err(Error::Parse(format!(
                            "sparse entry has {} coordinates, expected {}",
                            coords.len(),
                            ntree.arity()
                        )));
                    }
                    for (j, &c) in coords.iter().enumerate() {
                        if c as usize >= ntree.tree(j).len() {
                            return Err(Error::Parse(format!(
                                "coordinate {c} out of range in component {j}"
                            )));
                        }
                    }
                    values[ntree.index(&coords)] += v;
                }
                NodeField::from_values(&ntree, values)?
            }
        };
        mu.assert_nonneg("measure")?;
        Ok(Instance { ntree, weight, mu })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform,
    TensorRandom,
    FromS(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// k point masses on random leaves (masses in (0, 1]).
    LeafSparse(usize),
    /// equal mass on every leaf, total mass 1.
    UniformLeaf,
    /// explicit sparse entries.
    Custom(Vec<(Vec<u32>, f64)>),
}

/// Deterministic instance generator: n dyadic component trees of the given
/// depth and branching, a tensor weight, and a measure, all drawn from the
/// seed.
pub fn generate_instance(
    n: usize,
    depth: u32,
    arity: u32,
    weight_spec: &WeightSpec,
    measure_spec: &MeasureSpec,
    seed: u64,
) -> Result<Instance> {
    if !(1..=4).contains(&n) {
        return Err(Error::Precondition(format!("n must be in 1..=4, got {n}")));
    }
    let budget = vertex_budget();
    let trees = (0..n)
        .map(|_| Tree::dyadic(depth, arity, budget))
        .collect::<Result<Vec<_>>>()?;
    let per = trees[0].len();
    if per.checked_pow(n as u32).map_or(true, |s| s > budget) {
        return Err(Error::SizeBudget);
    }
    let ntree = NTree::new(trees)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = match weight_spec {
        WeightSpec::Uniform => TensorWeight::ones(&ntree),
        WeightSpec::TensorRandom => TensorWeight::random(&ntree, &mut rng),
        WeightSpec::FromS(s) => TensorWeight::from_s(&ntree, s)?,
    };
    let mu = match measure_spec {
        MeasureSpec::LeafSparse(k) => NodeField::random_leaf_measure(&ntree, &mut rng, *k),
        MeasureSpec::UniformLeaf => {
            let leaves = ntree.leaf_indices();
            let mut values = vec![0.0; ntree.size()];
            let mass = 1.0 / leaves.len() as f64;
            for &l in &leaves {
                values[l] = mass;
            }
            NodeField::from_values(&ntree, values)?
        }
        MeasureSpec::Custom(entries) => {
            let mut values = vec![0.0; ntree.size()];
            for (coords, v) in entries {
                values[ntree.index(coords)] += v;
            }
            NodeField::from_values(&ntree, values)?
        }
    };
    Ok(Instance { ntree, weight, mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_fixture_shape() {
        let inst = generate_instance(
            2,
            1,
            2,
            &WeightSpec::Uniform,
            &MeasureSpec::LeafSparse(1),
            5,
        )
        .unwrap();
        assert_eq!(inst.ntree.arity(), 2);
        assert_eq!(inst.ntree.size(), 9); // B2 × B2
        assert_eq!(inst.mu.support().len(), 1);
        let leaves = inst.ntree.leaf_indices();
        assert!(leaves.contains(&inst.mu.support()[0]));
        assert!(inst.weight.factors.iter().all(|f| f.iter().all(|&x| x == 1.0)));
    }

    #[test]
    fn from_s_ones_is_unit_weight() {
        let inst = generate_instance(
            2,
            2,
            2,
            &WeightSpec::FromS(vec![1.0, 1.0]),
            &MeasureSpec::UniformLeaf,
            0,
        )
        .unwrap();
        let dense = inst.weight.dense(&inst.ntree);
        assert!(dense.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!((inst.mu.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let inst = generate_instance(
            3,
            1,
            2,
            &WeightSpec::TensorRandom,
            &MeasureSpec::LeafSparse(3),
            42,
        )
        .unwrap();
        let a = inst.to_json();
        let b = Instance::from_json(&a).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let spec = (2, 2, 2, WeightSpec::TensorRandom, MeasureSpec::LeafSparse(2), 77u64);
        let a = generate_instance(spec.0, spec.1, spec.2, &spec.3, &spec.4, spec.5).unwrap();
        let b = generate_instance(spec.0, spec.1, spec.2, &spec.3, &spec.4, spec.5).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn sparse_measure_accepted() {
        let text = r#"{
            "trees":[{"parents":[null,0,0]},{"parents":[null,0,0]}],
            "weight":{"s":[1.0,0.5]},
            "measure":[[[1,2],0.25],[[2,2],0.75]]
        }"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.ntree.size(), 9);
        assert!((inst.mu.sum() - 1.0).abs() < 1e-15);
        assert_eq!(inst.mu.support().len(), 2);
    }

    #[test]
    fn bad_inputs_are_parse_errors() {
        assert!(Instance::from_json("{").is_err());
        let wrong_len = r#"{
            "trees":[{"parents":[null,0,0]}],
            "weight":{"s":[1.0]},
            "measure":[[[5],1.0]]
        }"#;
        assert!(Instance::from_json(wrong_len).is_err());
    }
}
