//! Dense fields over product vertices and tensor-product weights.

use crate::error::{Error, Result};
use crate::poset::NTree;
use rand::Rng;

/// A map from product vertices to reals, stored densely over the
/// mixed-radix linear index.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    pub values: Vec<f64>,
    /// Set when the field is known nonnegative; asserted at construction.
    pub nonneg: bool,
}

impl NodeField {
    pub fn zeros(t: &NTree) -> Self {
        NodeField { values: vec![0.0; t.size()], nonneg: true }
    }

    pub fn constant(t: &NTree, c: f64) -> Self {
        NodeField { values: vec![c; t.size()], nonneg: c >= 0.0 }
    }

    pub fn from_values(t: &NTree, values: Vec<f64>) -> Result<Self> {
        if values.len() != t.size() {
            return Err(Error::Precondition(format!(
                "field length {} does not match product size {}",
                values.len(),
                t.size()
            )));
        }
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Ok(NodeField { values, nonneg })
    }

    pub fn delta(t: &NTree, at: usize, mass: f64) -> Self {
        let mut values = vec![0.0; t.size()];
        values[at] = mass;
        NodeField { values, nonneg: mass >= 0.0 }
    }

    pub fn assert_nonneg(&self, what: &str) -> Result<()> {
        if self.nonneg {
            return Ok(());
        }
        match self.values.iter().position(|&v| v < 0.0) {
            Some(i) => Err(Error::Precondition(format!("{what} is negative at vertex {i}"))),
            None => Ok(()),
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &NodeField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn mul(&self, other: &NodeField) -> NodeField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        NodeField { values, nonneg: self.nonneg && other.nonneg }
    }

    pub fn scale(&self, c: f64) -> NodeField {
        NodeField {
            values: self.values.iter().map(|v| v * c).collect(),
            nonneg: self.nonneg && c >= 0.0,
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Support: indices with strictly positive value.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Random sparse nonnegative measure supported on leaf vertices.
    pub fn random_leaf_measure<R: Rng>(t: &NTree, rng: &mut R, points: usize) -> Self {
        let leaves = t.leaf_indices();
        let mut values = vec![0.0; t.size()];
        for _ in 0..points.max(1) {
            let at = leaves[rng.gen_range(0..leaves.len())];
            values[at] += rng.gen_range(0.1..1.0);
        }
        NodeField { values, nonneg: true }
    }

    /// Random sparse nonnegative measure supported anywhere.
    pub fn random_sparse<R: Rng>(t: &NTree, rng: &mut R, points: usize) -> Self {
        let mut values = vec![0.0; t.size()];
        for _ in 0..points.max(1) {
            let at = rng.gen_range(0..t.size());
            values[at] += rng.gen_range(0.1..1.0);
        }
        NodeField { values, nonneg: true }
    }
}

/// A weight of tensor-product form: w(α) = ∏_j w_j(α_j).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorWeight {
    pub factors: Vec<Vec<f64>>,
}

impl TensorWeight {
    pub fn ones(t: &NTree) -> Self {
        TensorWeight {
            factors: (0..t.arity()).map(|j| vec![1.0; t.tree(j).len()]).collect(),
        }
    }

    pub fn new(t: &NTree, factors: Vec<Vec<f64>>) -> Result<Self> {
        if factors.len() != t.arity() {
            return Err(Error::Precondition("one factor list per coordinate required".into()));
        }
        for (j, f) in factors.iter().enumerate() {
            if f.len() != t.tree(j).len() {
                return Err(Error::Precondition(format!(
                    "factor {j} has length {} but tree has {} vertices",
                    f.len(),
                    t.tree(j).len()
                )));
            }
            if f.iter().any(|&v| v < 0.0) {
                return Err(Error::Precondition(format!("factor {j} has a negative entry")));
            }
        }
        Ok(TensorWeight { factors })
    }

    /// Power weights w_j(α_j) = (2^{-depth})^{s_j - 1} on dyadic components.
    pub fn from_s(t: &NTree, s: &[f64]) -> Result<Self> {
        if s.len() != t.arity() {
            return Err(Error::Precondition("one exponent per coordinate required".into()));
        }
        if let Some(&bad) = s.iter().find(|&&v| v <= 0.0 || v > 1.0) {
            return Err(Error::Precondition(format!("exponent {bad} outside (0, 1]")));
        }
        let factors = (0..t.arity())
            .map(|j| {
                let tree = t.tree(j);
                (0..tree.len() as u32)
                    .map(|v| 2f64.powf(tree.depth(v) as f64 * (1.0 - s[j])))
                    .collect()
            })
            .collect();
        Ok(TensorWeight { factors })
    }

    pub fn random<R: Rng>(t: &NTree, rng: &mut R) -> Self {
        TensorWeight {
            factors: (0..t.arity())
                .map(|j| (0..t.tree(j).len()).map(|_| rng.gen_range(0.1..2.0)).collect())
                .collect(),
        }
    }

    pub fn at(&self, t: &NTree, index: usize) -> f64 {
        (0..t.arity())
            .map(|j| self.factors[j][t.coord(index, j) as usize])
            .product()
    }

    pub fn dense(&self, t: &NTree) -> NodeField {
        let values = (0..t.size()).map(|i| self.at(t, i)).collect();
        NodeField { values, nonneg: true }
    }

    /// Per-coordinate factor as a dense field (ignores the other coordinates).
    pub fn coord_dense(&self, t: &NTree, j: usize) -> NodeField {
        let values = (0..t.size())
            .map(|i| self.factors[j][t.coord(i, j) as usize])
            .collect();
        NodeField { values, nonneg: true }
    }

    /// Product of the factors over a subset of coordinates.
    pub fn subset_dense(&self, t: &NTree, coords: &[usize]) -> NodeField {
        let values = (0..t.size())
            .map(|i| {
                coords
                    .iter()
                    .map(|&j| self.factors[j][t.coord(i, j) as usize])
                    .product()
            })
            .collect();
        NodeField { values, nonneg: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Tree;

    fn b2sq() -> NTree {
        let b2 = Tree::dyadic(1, 2, 100).unwrap();
        NTree::new(vec![b2.clone(), b2]).unwrap()
    }

    #[test]
    fn tensor_weight_matches_dense_product() {
        let t = b2sq();
        let w = TensorWeight::new(&t, vec![vec![1.0, 2.0, 3.0], vec![0.5, 1.5, 2.5]]).unwrap();
        let dense = w.dense(&t);
        for i in 0..t.size() {
            let expect =
                w.factors[0][t.coord(i, 0) as usize] * w.factors[1][t.coord(i, 1) as usize];
            assert_eq!(dense.values[i], expect);
            assert_eq!(w.at(&t, i), expect);
        }
    }

    #[test]
    fn s_weights() {
        let b = Tree::dyadic(2, 2, 100).unwrap();
        let t = NTree::new(vec![b]).unwrap();
        // s = 1 gives the flat weight
        let w1 = TensorWeight::from_s(&t, &[1.0]).unwrap();
        assert!(w1.factors[0].iter().all(|&v| v == 1.0));
        // s = 1/2 at depth 2: (2^{-2})^{-1/2} = 2
        let wh = TensorWeight::from_s(&t, &[0.5]).unwrap();
        let deep = (0..t.size()).find(|&i| t.tree(0).depth(i as u32) == 2).unwrap();
        assert_eq!(wh.factors[0][deep], 2.0);
        assert!(TensorWeight::from_s(&t, &[0.0]).is_err());
    }

    #[test]
    fn s_weight_depends_on_marked_coordinate_only() {
        let t = b2sq();
        let w = TensorWeight::from_s(&t, &[1.0, 0.5]).unwrap();
        for i in 0..t.size() {
            for k in 0..t.size() {
                if t.coord(i, 1) == t.coord(k, 1) {
                    assert_eq!(w.at(&t, i), w.at(&t, k));
                }
            }
        }
    }

    #[test]
    fn field_constructors() {
        let t = b2sq();
        let f = NodeField::delta(&t, 4, 2.5);
        assert_eq!(f.sum(), 2.5);
        assert_eq!(f.support(), vec![4]);
        assert!(NodeField::from_values(&t, vec![0.0; 3]).is_err());
        let g = NodeField::from_values(&t, vec![-1.0; t.size()]).unwrap();
        assert!(g.assert_nonneg("g").is_err());
    }
}
