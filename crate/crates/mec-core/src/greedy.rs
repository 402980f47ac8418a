//! The greedy coupler: repeatedly allocate the minimum over distributions of
//! the current maximum residual state, consuming that amount from every
//! distribution's maximum simultaneously.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bounds::{profile_curve, profile_entropy};
use crate::dist::{CostFn, Coupling, CouplingEntry, Dist, InstanceSet};
use crate::{MecError, Result, EPS};

/// One greedy step: the allocated mass, the state consumed from each
/// distribution, and the total mass still uncoupled before the step.
#[derive(Debug, Clone)]
pub struct GreedyStep {
    pub mass: f64,
    pub indices: Vec<usize>,
    pub remaining_before: f64,
}

/// Complete step record of a greedy run. Step masses are non-increasing and
/// the step count stays within n*m - (m-1).
#[derive(Debug, Clone)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
}

/// Max-heap entry; ties between equal masses go to the lowest original index
/// so runs are deterministic.
#[derive(Debug, Clone, Copy)]
struct State {
    mass: f64,
    idx: usize,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass.total_cmp(&other.mass).then_with(|| other.idx.cmp(&self.idx))
    }
}

fn run(s: &InstanceSet, record: bool) -> (Vec<f64>, Coupling, GreedyTrace) {
    let mut heaps: Vec<BinaryHeap<State>> = s
        .dists()
        .iter()
        .map(|d| {
            d.masses()
                .iter()
                .enumerate()
                .map(|(idx, &mass)| State { mass, idx })
                .collect()
        })
        .collect();
    let mut remaining = s.mass();
    let mut masses = Vec::new();
    let mut entries = Vec::new();
    let mut steps = Vec::new();
    while remaining > EPS && heaps.iter().all(|h| !h.is_empty()) {
        let r = heaps
            .iter()
            .map(|h| h.peek().unwrap().mass)
            .fold(f64::INFINITY, f64::min);
        if record {
            let indices: Vec<usize> = heaps.iter().map(|h| h.peek().unwrap().idx).collect();
            steps.push(GreedyStep { mass: r, indices: indices.clone(), remaining_before: remaining });
            entries.push(CouplingEntry { indices, mass: r });
        }
        masses.push(r);
        for h in heaps.iter_mut() {
            let top = h.pop().unwrap();
            let left = top.mass - r;
            if left > EPS {
                h.push(State { mass: left, idx: top.idx });
            }
        }
        remaining -= r;
    }
    debug_assert!(masses.windows(2).all(|w| w[1] <= w[0]));
    debug_assert!(masses.len() <= s.n() * s.m() - (s.m() - 1) || masses.is_empty());
    (masses, Coupling { entries }, GreedyTrace { steps })
}

/// Runs the greedy coupler and returns the coupling together with its full
/// step trace.
pub fn greedy_coupling(s: &InstanceSet) -> (Coupling, GreedyTrace) {
    let (_, coupling, trace) = run(s, true);
    (coupling, trace)
}

/// The sorted sequence of greedy allocation sizes, without materializing the
/// per-entry index tuples (which for wide instances dominate memory).
pub fn greedy_sizes(s: &InstanceSet) -> Dist {
    let (masses, _, _) = run(s, false);
    Dist::new(masses).expect("greedy masses form a valid distribution")
}

/// For pairs: the value M_t = H(Profile of the residual instance) + H(masses
/// allocated so far) after each greedy step. M_0 is the profile entropy of
/// the input; the final value is the greedy coupling's entropy.
pub fn monovariant_trace(s: &InstanceSet) -> Result<Vec<(usize, f64)>> {
    if s.m() != 2 {
        return Err(MecError::Unsupported(
            "the monovariant trace is defined for pairs (m = 2)".into(),
        ));
    }
    let mut res: Vec<Vec<f64>> = s.dists().iter().map(|d| d.masses().to_vec()).collect();
    let mut out = vec![(0, profile_entropy(&profile_curve(s)))];
    let mut h_so_far = 0.0;
    let mut remaining = s.mass();
    let mut step = 0;
    loop {
        let tops: Vec<Option<usize>> = res.iter().map(|v| argmax(v)).collect();
        if remaining <= EPS || tops.iter().any(Option::is_none) {
            break;
        }
        let r = tops
            .iter()
            .zip(&res)
            .map(|(t, v)| v[t.unwrap()])
            .fold(f64::INFINITY, f64::min);
        for (t, v) in tops.iter().zip(res.iter_mut()) {
            let i = t.unwrap();
            v[i] -= r;
            if v[i] <= EPS {
                v[i] = 0.0;
            }
        }
        h_so_far += CostFn::Shannon.cost(r);
        remaining -= r;
        step += 1;
        let parts: Vec<Dist> = res
            .iter()
            .map(|v| {
                Dist::new(v.iter().copied().filter(|&x| x > 0.0).collect())
                    .expect("residual masses stay valid")
            })
            .collect();
        let residual = InstanceSet::residual(parts);
        out.push((step, profile_entropy(&profile_curve(&residual)) + h_so_far));
    }
    Ok(out)
}

fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if x > EPS && best.is_none_or(|b| x > v[b]) {
            best = Some(i);
        }
    }
    best
}
