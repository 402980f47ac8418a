//! Bitmask DP over rooted spanning trees of the bipartite state graph.
//! dp[S][v] is the least entropy of a tree coupling on vertex set S in which
//! only the root v still holds uncommitted mass; trees grow by attaching a
//! fresh root across an edge carrying the old root's remainder, or by
//! merging two trees that share only their root.

use std::time::Instant;

use super::{edges_to_coupling, ExactResult};
use crate::dist::{CostFn, Dist, InstanceSet};
use crate::{MecError, Result, EPS};

const MAX_VERTICES: usize = 20;

#[derive(Clone, Copy)]
enum Choice {
    Attach(usize),
    Merge(usize, usize),
}

struct Table {
    n1: usize,
    v: usize,
    balance: Vec<f64>,
    dp: Vec<f64>,
}

impl Table {
    /// Mass the root u still holds once the rest of S is internally coupled:
    /// the signed sum of original masses, positive toward u's side.
    fn rem(&self, s: usize, u: usize) -> f64 {
        if u < self.n1 {
            self.balance[s]
        } else {
            -self.balance[s]
        }
    }

    /// Enumerates every transition into (s, v) in a fixed order, so the fill
    /// and the reconstruction replay see bitwise-identical values.
    fn transitions(&self, s: usize, v: usize, f: &mut impl FnMut(Choice, f64)) {
        let rest = s & !(1usize << v);
        let mut ub = rest;
        while ub != 0 {
            let u = ub.trailing_zeros() as usize;
            ub &= ub - 1;
            if (u < self.n1) == (v < self.n1) {
                continue;
            }
            let sub = self.dp[rest * self.v + u];
            if !sub.is_finite() {
                continue;
            }
            let r = self.rem(rest, u);
            if r < -EPS {
                continue;
            }
            f(Choice::Attach(u), sub + CostFn::Shannon.cost(r.max(0.0)));
        }
        let anchor = rest & rest.wrapping_neg();
        let free = rest & !anchor;
        let mut t = free;
        loop {
            let s1 = (1usize << v) | anchor | t;
            if s1 != s {
                let s2 = (s & !s1) | (1usize << v);
                let a = self.dp[s1 * self.v + v];
                let b = self.dp[s2 * self.v + v];
                if a.is_finite() && b.is_finite() {
                    f(Choice::Merge(s1, s2), a + b);
                }
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & free;
        }
    }

    fn fill(&mut self) {
        let full = (1usize << self.v) - 1;
        for s in 1..=full {
            if s & (s - 1) == 0 {
                continue;
            }
            let mut vb = s;
            while vb != 0 {
                let v = vb.trailing_zeros() as usize;
                vb &= vb - 1;
                let val = if self.rem(s, v) < -EPS {
                    f64::INFINITY
                } else {
                    let mut best = f64::INFINITY;
                    self.transitions(s, v, &mut |_, x| {
                        if x < best {
                            best = x;
                        }
                    });
                    best
                };
                self.dp[s * self.v + v] = val;
            }
        }
    }

    fn reconstruct(&self, s: usize, v: usize, edges: &mut Vec<(usize, usize, f64)>) -> Result<()> {
        if s & (s - 1) == 0 {
            return Ok(());
        }
        let target = self.dp[s * self.v + v];
        let mut found: Option<Choice> = None;
        self.transitions(s, v, &mut |c, x| {
            if found.is_none() && x == target {
                found = Some(c);
            }
        });
        if found.is_none() {
            let mut best_gap = f64::INFINITY;
            self.transitions(s, v, &mut |c, x| {
                let gap = (x - target).abs();
                if gap < best_gap && gap <= 1e-9 {
                    best_gap = gap;
                    found = Some(c);
                }
            });
        }
        match found {
            Some(Choice::Attach(u)) => {
                let rest = s & !(1usize << v);
                let w = self.rem(rest, u).max(0.0);
                let (li, ri) = if u < self.n1 { (u, v - self.n1) } else { (v, u - self.n1) };
                edges.push((li, ri, w));
                self.reconstruct(rest, u, edges)
            }
            Some(Choice::Merge(s1, s2)) => {
                self.reconstruct(s1, v, edges)?;
                self.reconstruct(s2, v, edges)
            }
            None => Err(MecError::Invariant("DP reconstruction lost its path".into())),
        }
    }
}

/// Exact pair solve by subset DP. All-or-nothing: no anytime behavior, and a
/// hard vertex cap since the table is exponential in n1 + n2.
pub fn dp_exact(p: &Dist, q: &Dist) -> Result<ExactResult> {
    let start = Instant::now();
    InstanceSet::new(vec![p.clone(), q.clone()])?;
    let (n1, n2) = (p.len(), q.len());
    let vcount = n1 + n2;
    if vcount > MAX_VERTICES {
        return Err(MecError::SizeLimit(format!(
            "DP table needs {vcount} vertices, the cap is {MAX_VERTICES} (n1 + n2)"
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
    let mass: Vec<f64> = p.masses().iter().chain(q.masses()).copied().collect();
    let full = (1usize << vcount) - 1;
    let mut balance = vec![0.0f64; 1 << vcount];
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let signed = if low < n1 { mass[low] } else { -mass[low] };
        balance[s] = balance[s & (s - 1)] + signed;
    }
    let mut table = Table { n1, v: vcount, balance, dp: vec![f64::INFINITY; (full + 1) * vcount] };
    for v in 0..vcount {
        table.dp[(1usize << v) * vcount + v] = 0.0;
    }
    table.fill();
    let (mut best, mut root) = (f64::INFINITY, 0);
    for v in 0..vcount {
        let x = table.dp[full * vcount + v];
        if x < best {
            best = x;
            root = v;
        }
    }
    if !best.is_finite() {
        return Err(MecError::Invariant("no feasible spanning tree found".into()));
    }
    let mut edges = Vec::new();
    table.reconstruct(full, root, &mut edges)?;
    let nodes = table.dp.iter().filter(|x| x.is_finite()).count() as u64;
    Ok(ExactResult {
        entropy: best,
        coupling: edges_to_coupling(&edges),
        nodes,
        complete: true,
        wall: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundKind;
    use crate::dist::validate_coupling;
    use crate::exact::{backtrack_exact, check_forest_leaf_property};

    fn dists(p: &[f64], q: &[f64]) -> (Dist, Dist) {
        (Dist::new(p.to_vec()).unwrap(), Dist::new(q.to_vec()).unwrap())
    }

    #[test]
    fn worked_instance() {
        let (p, q) = dists(&[0.5, 0.4, 0.1], &[0.6, 0.2, 0.2]);
        let r = dp_exact(&p, &q).unwrap();
        assert!((r.entropy - 1.7609640474436812).abs() < 1e-9);
        assert!(r.complete);
        let s = InstanceSet::new(vec![p, q]).unwrap();
        assert!(validate_coupling(&s, &r.coupling).unwrap().is_empty());
        assert!(check_forest_leaf_property(&r.coupling).is_ok());
    }

    #[test]
    fn two_fair_coins() {
        let (p, q) = dists(&[0.5, 0.5], &[0.5, 0.5]);
        let r = dp_exact(&p, &q).unwrap();
        assert!((r.entropy - 1.0).abs() < 1e-12);
        assert_eq!(r.coupling.support(), 2);
    }

    #[test]
    fn agrees_with_backtracking() {
        let (p, q) = dists(&[0.3, 0.25, 0.2, 0.15, 0.1], &[0.35, 0.2, 0.2, 0.15, 0.05, 0.05]);
        let a = dp_exact(&p, &q).unwrap();
        let b = backtrack_exact(&p, &q, BoundKind::MajorProfile, None).unwrap();
        assert!((a.entropy - b.entropy).abs() < 1e-9);
        assert!(a.coupling.support() < p.len() + q.len());
    }

    #[test]
    fn partial_mass_instance() {
        let (p, q) = dists(&[0.3, 0.2], &[0.25, 0.25]);
        let r = dp_exact(&p, &q).unwrap();
        let s = InstanceSet::new(vec![p, q]).unwrap();
        assert!(validate_coupling(&s, &r.coupling).unwrap().is_empty());
        assert!(r.entropy >= 0.0);
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let p = Dist::uniform(11);
        let q = Dist::uniform(10);
        assert!(matches!(dp_exact(&p, &q), Err(MecError::SizeLimit(_))));
    }

    #[test]
    fn mismatched_totals_are_invalid() {
        let (p, q) = dists(&[0.6, 0.4], &[0.5, 0.4]);
        assert!(matches!(dp_exact(&p, &q), Err(MecError::InvalidInput(_))));
    }
}
