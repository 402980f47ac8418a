//! Exact minimum-entropy coupling solvers for pairs: pruned backtracking,
//! bitmask dynamic programming over rooted spanning trees, and naive
//! transport-polytope vertex enumeration, plus the forest-structure checks
//! that justify them.

mod backtrack;
mod dp;
mod enumerate;

pub use backtrack::backtrack_exact;
pub use dp::dp_exact;
pub use enumerate::vertex_enum_exact;

use std::time::Duration;

use crate::dist::Coupling;
use crate::{MecError, Result, EPS};

/// Outcome of an exact solve. `nodes` counts search nodes (backtracking),
/// peel states (enumeration), or feasible table states (DP). When a wall
/// budget expires, `complete` is false and entropy/coupling hold the best
/// incumbent found so far.
#[derive(Debug, Clone)]
pub struct ExactResult {
    pub entropy: f64,
    pub coupling: Coupling,
    pub nodes: u64,
    pub complete: bool,
    pub wall: Duration,
}

/// The bipartite graph induced by the positive entries of a pair coupling.
#[derive(Debug, Clone)]
pub struct BipartiteForest {
    edges: Vec<(usize, usize, f64)>,
    left: usize,
    right: usize,
}

impl BipartiteForest {
    pub fn from_coupling(c: &Coupling) -> Result<Self> {
        let mut edges = Vec::with_capacity(c.entries.len());
        let (mut left, mut right) = (0, 0);
        for e in &c.entries {
            if e.indices.len() != 2 {
                return Err(MecError::InvalidInput(format!(
                    "forest checks apply to pair couplings, entry has {} indices",
                    e.indices.len()
                )));
            }
            left = left.max(e.indices[0] + 1);
            right = right.max(e.indices[1] + 1);
            edges.push((e.indices[0], e.indices[1], e.mass));
        }
        Ok(BipartiteForest { edges, left, right })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// True iff the induced graph is acyclic.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.left + self.right).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j, _) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, self.left + j));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// True iff every maximum-weight edge has an endpoint of degree one.
    pub fn max_weight_edges_have_leaf(&self) -> bool {
        let Some(max_w) = self.edges.iter().map(|e| e.2).fold(None, |acc: Option<f64>, w| {
            Some(acc.map_or(w, |a: f64| a.max(w)))
        }) else {
            return true;
        };
        let mut deg = vec![0usize; self.left + self.right];
        for &(i, j, _) in &self.edges {
            deg[i] += 1;
            deg[self.left + j] += 1;
        }
        self.edges
            .iter()
            .filter(|e| e.2 >= max_w - EPS)
            .all(|&(i, j, _)| deg[i] == 1 || deg[self.left + j] == 1)
    }
}

/// Checks that a pair coupling's support is acyclic and that every
/// maximum-weight entry touches a leaf, two structural facts every optimal
/// pair coupling satisfies.
pub fn check_forest_leaf_property(c: &Coupling) -> Result<()> {
    let f = BipartiteForest::from_coupling(c)?;
    if !f.is_forest() {
        return Err(MecError::Invariant(
            "coupling support contains a cycle".into(),
        ));
    }
    if !f.max_weight_edges_have_leaf() {
        return Err(MecError::Invariant(
            "a maximum-weight entry has no leaf endpoint".into(),
        ));
    }
    Ok(())
}

/// Shared by the solvers: entries sorted by decreasing mass, zero-weight
/// edges dropped.
fn edges_to_coupling(edges: &[(usize, usize, f64)]) -> Coupling {
    let mut entries: Vec<crate::dist::CouplingEntry> = edges
        .iter()
        .filter(|e| e.2 > EPS)
        .map(|&(i, j, w)| crate::dist::CouplingEntry { indices: vec![i, j], mass: w })
        .collect();
    entries.sort_by(|a, b| {
        b.mass
            .total_cmp(&a.mass)
            .then_with(|| a.indices.cmp(&b.indices))
    });
    Coupling { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::CouplingEntry;

    fn entry(i: usize, j: usize, mass: f64) -> CouplingEntry {
        CouplingEntry { indices: vec![i, j], mass }
    }

    #[test]
    fn four_cycle_is_rejected() {
        let c = Coupling {
            entries: vec![entry(0, 0, 0.25), entry(0, 1, 0.25), entry(1, 0, 0.25), entry(1, 1, 0.25)],
        };
        let err = check_forest_leaf_property(&c).unwrap_err();
        assert!(matches!(err, MecError::Invariant(_)));
    }

    #[test]
    fn greedy_shape_passes() {
        let c = Coupling {
            entries: vec![entry(0, 0, 0.5), entry(1, 1, 0.2), entry(1, 2, 0.2), entry(2, 0, 0.1)],
        };
        assert!(check_forest_leaf_property(&c).is_ok());
    }

    #[test]
    fn internal_max_edge_is_rejected() {
        // Path with the heaviest edge in the middle: acyclic, but no leaf
        // endpoint on the maximum.
        let c = Coupling {
            entries: vec![entry(0, 0, 0.2), entry(1, 0, 0.5), entry(1, 1, 0.2)],
        };
        let f = BipartiteForest::from_coupling(&c).unwrap();
        assert!(f.is_forest());
        assert!(!f.max_weight_edges_have_leaf());
        assert!(check_forest_leaf_property(&c).is_err());
    }

    #[test]
    fn wrong_arity_is_invalid_input() {
        let c = Coupling {
            entries: vec![CouplingEntry { indices: vec![0, 0, 0], mass: 1.0 }],
        };
        assert!(matches!(
            check_forest_leaf_property(&c),
            Err(MecError::InvalidInput(_))
        ));
    }

    #[test]
    fn empty_coupling_is_fine() {
        assert!(check_forest_leaf_property(&Coupling { entries: vec![] }).is_ok());
    }
}
