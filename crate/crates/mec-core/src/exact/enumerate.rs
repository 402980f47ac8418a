//! Naive exact baseline: enumerate every spanning tree of the complete
//! bipartite state graph, derive the unique edge masses by leaf peeling, and
//! keep the feasible tree of least entropy.
//!
//! Each tree is generated exactly once through its canonical peel sequence
//! (always remove the lowest-indexed current leaf; the highest vertex is the
//! root). Canonicity is enforced with obligation flags: peeling v promises
//! that every lower active vertex is not currently a leaf, i.e. will still
//! receive an attachment, and a vertex with an unmet promise cannot be
//! peeled. Infeasible trees are cut at the first negative peeled mass; no
//! entropy-based pruning is done, keeping the baseline honest.

use std::time::{Duration, Instant};

use super::{edges_to_coupling, ExactResult};
use crate::dist::{coupling_entropy, CostFn, Dist, InstanceSet};
use crate::greedy::greedy_coupling;
use crate::{MecError, Result, EPS};

const MAX_VERTICES: usize = 18;

struct Enumerator {
    n1: usize,
    v: usize,
    res: Vec<f64>,
    active: Vec<bool>,
    obligated: Vec<bool>,
    active_left: usize,
    active_right: usize,
    need_left: usize,
    need_right: usize,
    prune_mass: bool,
    h: f64,
    stack: Vec<(usize, usize, f64)>,
    best: f64,
    best_edges: Vec<(usize, usize, f64)>,
    nodes: u64,
    leaves: u64,
    deadline: Option<Instant>,
    complete: bool,
}

impl Enumerator {
    fn new(p: &Dist, q: &Dist, prune_mass: bool) -> Self {
        let (n1, n2) = (p.len(), q.len());
        Enumerator {
            n1,
            v: n1 + n2,
            res: p.masses().iter().chain(q.masses()).copied().collect(),
            active: vec![true; n1 + n2],
            obligated: vec![false; n1 + n2],
            active_left: n1,
            active_right: n2,
            need_left: 0,
            need_right: 0,
            prune_mass,
            h: 0.0,
            stack: Vec::with_capacity(n1 + n2),
            best: f64::INFINITY,
            best_edges: Vec::new(),
            nodes: 0,
            leaves: 0,
            deadline: None,
            complete: true,
        }
    }

    fn search(&mut self) {
        self.nodes += 1;
        if let Some(d) = self.deadline {
            if self.nodes & 63 == 1 && Instant::now() >= d {
                self.complete = false;
                return;
            }
        }
        if self.active_left + self.active_right == 1 {
            self.leaves += 1;
            if self.h < self.best {
                self.best = self.h;
                self.best_edges = self.stack.clone();
            }
            return;
        }
        // Pending promises need later cross-side peels to discharge; the
        // root (rightmost vertex) is never peeled.
        if self.need_left > self.active_right - 1 || self.need_right > self.active_left {
            return;
        }
        for v in 0..self.v - 1 {
            if !self.active[v] || self.obligated[v] {
                continue;
            }
            let (w_lo, w_hi) = if v < self.n1 { (self.n1, self.v) } else { (0, self.n1) };
            for w in w_lo..w_hi {
                if !self.active[w] {
                    continue;
                }
                self.peel(v, w);
                if !self.complete {
                    return;
                }
            }
        }
    }

    fn peel(&mut self, v: usize, w: usize) {
        let weight = self.res[v];
        let new_rw = self.res[w] - weight;
        if self.prune_mass && new_rw < -EPS {
            return;
        }
        let mut imposed = [0usize; MAX_VERTICES];
        let mut n_imposed = 0;
        for u in 0..v {
            if self.active[u] && !self.obligated[u] {
                self.obligated[u] = true;
                self.bump_need(u, 1);
                imposed[n_imposed] = u;
                n_imposed += 1;
            }
        }
        let discharged = self.obligated[w];
        if discharged {
            self.obligated[w] = false;
            self.bump_need(w, -1);
        }
        let old_rw = self.res[w];
        self.res[w] = new_rw;
        self.active[v] = false;
        if v < self.n1 {
            self.active_left -= 1;
        } else {
            self.active_right -= 1;
        }
        let clamped = weight.max(0.0);
        let old_h = self.h;
        self.h += CostFn::Shannon.cost(clamped);
        let (li, ri) = if v < self.n1 { (v, w - self.n1) } else { (w, v - self.n1) };
        self.stack.push((li, ri, clamped));

        self.search();

        self.stack.pop();
        self.h = old_h;
        if v < self.n1 {
            self.active_left += 1;
        } else {
            self.active_right += 1;
        }
        self.active[v] = true;
        self.res[w] = old_rw;
        if discharged {
            self.obligated[w] = true;
            self.bump_need(w, 1);
        }
        for &u in &imposed[..n_imposed] {
            self.obligated[u] = false;
            self.bump_need(u, -1);
        }
    }

    fn bump_need(&mut self, u: usize, delta: isize) {
        let slot = if u < self.n1 { &mut self.need_left } else { &mut self.need_right };
        *slot = slot.checked_add_signed(delta).expect("need counters stay nonnegative");
    }
}

/// Exact pair solve by full vertex enumeration. The incumbent starts at the
/// greedy coupling so a budgeted run always returns something valid.
pub fn vertex_enum_exact(p: &Dist, q: &Dist, budget: Option<Duration>) -> Result<ExactResult> {
    let start = Instant::now();
    let s = InstanceSet::new(vec![p.clone(), q.clone()])?;
    let vcount = p.len() + q.len();
    if vcount > MAX_VERTICES {
        return Err(MecError::SizeLimit(format!(
            "enumeration handles at most {MAX_VERTICES} states total, got {vcount}"
        )));
    }
    if vcount == 0 {
        return Ok(ExactResult {
            entropy: 0.0,
            coupling: edges_to_coupling(&[]),
            nodes: 0,
            complete: true,
            wall: start.elapsed(),
        });
    }
    let (g, _) = greedy_coupling(&s);
    let mut e = Enumerator::new(p, q, true);
    e.deadline = budget.map(|b| start + b);
    e.best = coupling_entropy(&g);
    e.best_edges = g
        .entries
        .iter()
        .map(|en| (en.indices[0], en.indices[1], en.mass))
        .collect();
    e.search();
    Ok(ExactResult {
        entropy: e.best,
        coupling: edges_to_coupling(&e.best_edges),
        nodes: e.nodes,
        complete: e.complete,
        wall: start.elapsed(),
    })
}

/// Counts canonical peel sequences with mass pruning off; must equal the
/// number of spanning trees of the complete bipartite graph.
#[cfg(test)]
pub(crate) fn spanning_tree_count(n1: usize, n2: usize) -> u64 {
    let mut e = Enumerator::new(&Dist::uniform(n1), &Dist::uniform(n2), false);
    e.search();
    e.leaves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundKind;
    use crate::dist::validate_coupling;
    use crate::exact::{backtrack_exact, check_forest_leaf_property, dp_exact};

    fn dists(p: &[f64], q: &[f64]) -> (Dist, Dist) {
        (Dist::new(p.to_vec()).unwrap(), Dist::new(q.to_vec()).unwrap())
    }

    #[test]
    fn counts_match_the_bipartite_cayley_formula() {
        // Spanning trees of K(a,b): a^(b-1) * b^(a-1).
        assert_eq!(spanning_tree_count(2, 2), 4);
        assert_eq!(spanning_tree_count(2, 3), 12);
        assert_eq!(spanning_tree_count(3, 3), 81);
        assert_eq!(spanning_tree_count(3, 4), 432);
        assert_eq!(spanning_tree_count(4, 4), 4096);
        assert_eq!(spanning_tree_count(1, 2), 1);
    }

    #[test]
    fn worked_instance() {
        let (p, q) = dists(&[0.5, 0.4, 0.1], &[0.6, 0.2, 0.2]);
        let r = vertex_enum_exact(&p, &q, None).unwrap();
        assert!((r.entropy - 1.7609640474436812).abs() < 1e-9);
        assert!(r.complete);
        let s = InstanceSet::new(vec![p, q]).unwrap();
        assert!(validate_coupling(&s, &r.coupling).unwrap().is_empty());
        assert!(check_forest_leaf_property(&r.coupling).is_ok());
    }

    #[test]
    fn two_fair_coins_reach_one_bit() {
        let (p, q) = dists(&[0.5, 0.5], &[0.5, 0.5]);
        let r = vertex_enum_exact(&p, &q, None).unwrap();
        assert!((r.entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_the_other_solvers() {
        let (p, q) = dists(&[0.3, 0.25, 0.2, 0.15, 0.1], &[0.4, 0.25, 0.2, 0.1, 0.05]);
        let a = vertex_enum_exact(&p, &q, None).unwrap();
        let b = dp_exact(&p, &q).unwrap();
        let c = backtrack_exact(&p, &q, BoundKind::Profile, None).unwrap();
        assert!((a.entropy - b.entropy).abs() < 1e-9);
        assert!((a.entropy - c.entropy).abs() < 1e-9);
        assert!(a.coupling.support() < p.len() + q.len());
    }

    #[test]
    fn zero_budget_reports_incomplete_greedy_incumbent() {
        let (p, q) = dists(&[0.4, 0.3, 0.2, 0.1], &[0.35, 0.35, 0.2, 0.1]);
        let r = vertex_enum_exact(&p, &q, Some(Duration::ZERO)).unwrap();
        assert!(!r.complete);
        let s = InstanceSet::new(vec![p, q]).unwrap();
        assert!(validate_coupling(&s, &r.coupling).unwrap().is_empty());
    }

    #[test]
    fn size_cap_is_enforced() {
        let p = Dist::uniform(10);
        let q = Dist::uniform(9);
        assert!(matches!(vertex_enum_exact(&p, &q, None), Err(MecError::SizeLimit(_))));
    }
}
