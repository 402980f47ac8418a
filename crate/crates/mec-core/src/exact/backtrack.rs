//! Branch-and-bound over non-increasing peel sequences: each step picks a
//! pair (i, j), allocates min(p(i), q(j)) to it, and recurses; subtrees are
//! cut when entropy-so-far plus a lower bound on the residual cannot beat
//! the incumbent.

use std::time::{Duration, Instant};

use super::{edges_to_coupling, ExactResult};
use crate::bounds::{lower_bound, BoundKind};
use crate::dist::{coupling_entropy, CostFn, Dist, InstanceSet};
use crate::greedy::greedy_coupling;
use crate::{Result, EPS};

struct Search {
    rp: Vec<f64>,
    rq: Vec<f64>,
    bound: BoundKind,
    deadline: Option<Instant>,
    nodes: u64,
    complete: bool,
    best: f64,
    best_edges: Vec<(usize, usize, f64)>,
    stack: Vec<(usize, usize, f64)>,
    tol: f64,
}

/// Indices of the distinct residual values (within EPS), largest first.
/// Equal-mass states are symmetric, so only the first is branched on.
fn distinct_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).filter(|&i| v[i] > EPS).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut out: Vec<usize> = Vec::with_capacity(idx.len());
    for i in idx {
        if out.last().is_none_or(|&l| (v[l] - v[i]).abs() > EPS) {
            out.push(i);
        }
    }
    out
}

impl Search {
    fn residual_bound(&self) -> f64 {
        if matches!(self.bound, BoundKind::Zero) {
            return 0.0;
        }
        let part = |v: &[f64]| {
            Dist::new(v.iter().copied().filter(|&x| x > 0.0).collect())
                .expect("residual masses stay valid")
        };
        let s = InstanceSet::residual(vec![part(&self.rp), part(&self.rq)]);
        lower_bound(&s, self.bound)
    }

    fn recurse(&mut self, h: f64, last: f64, remaining: f64) {
        self.nodes += 1;
        if let Some(d) = self.deadline {
            if self.nodes & 63 == 1 && Instant::now() >= d {
                self.complete = false;
                return;
            }
        }
        if remaining <= self.tol {
            if h < self.best {
                self.best = h;
                self.best_edges = self.stack.clone();
            }
            return;
        }
        if h + self.residual_bound() >= self.best - 1e-12 {
            return;
        }
        let is = distinct_desc(&self.rp);
        let js = distinct_desc(&self.rq);
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(is.len() * js.len());
        for &i in &is {
            for &j in &js {
                let x = self.rp[i].min(self.rq[j]);
                if x > EPS && x <= last + EPS {
                    pairs.push((x, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (x, i, j) in pairs {
            let (oi, oj) = (self.rp[i], self.rq[j]);
            let ri = oi - x;
            let rj = oj - x;
            self.rp[i] = if ri > EPS { ri } else { 0.0 };
            self.rq[j] = if rj > EPS { rj } else { 0.0 };
            self.stack.push((i, j, x));
            self.recurse(h + CostFn::Shannon.cost(x), x, remaining - x);
            self.stack.pop();
            self.rp[i] = oi;
            self.rq[j] = oj;
            if !self.complete {
                return;
            }
        }
    }
}

/// Exact pair solve by pruned backtracking. The incumbent starts at the
/// greedy coupling; with `budget` set, an expired clock yields the best
/// incumbent with `complete = false`.
pub fn backtrack_exact(
    p: &Dist,
    q: &Dist,
    bound: BoundKind,
    budget: Option<Duration>,
) -> Result<ExactResult> {
    let start = Instant::now();
    let s = InstanceSet::new(vec![p.clone(), q.clone()])?;
    let (g, _) = greedy_coupling(&s);
    let mut search = Search {
        rp: p.masses().to_vec(),
        rq: q.masses().to_vec(),
        bound,
        deadline: budget.map(|b| start + b),
        nodes: 0,
        complete: true,
        best: coupling_entropy(&g),
        best_edges: g
            .entries
            .iter()
            .map(|e| (e.indices[0], e.indices[1], e.mass))
            .collect(),
        stack: Vec::new(),
        tol: EPS * (p.len() + q.len()).max(1) as f64,
    };
    search.recurse(0.0, f64::INFINITY, p.total());
    Ok(ExactResult {
        entropy: search.best,
        coupling: edges_to_coupling(&search.best_edges),
        nodes: search.nodes,
        complete: search.complete,
        wall: start.elapsed(),
    })
}
