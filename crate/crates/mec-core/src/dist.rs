//! Core domain types: distributions, instance sets, couplings, cost
//! functions, and the JSON file formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{MecError, Result, EPS};

/// A possibly-partial discrete distribution.
///
/// Masses are sorted non-increasing, each in [0, 1], with total at most
/// 1 + EPS; anything below EPS is trimmed at construction. Partial
/// distributions (total < 1) are first-class: bounds and solvers run on
/// residual mass in their inner loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    masses: Vec<f64>,
    total: f64,
}

impl Dist {
    /// Builds a distribution from raw masses: validates, sorts
    /// non-increasing, trims entries below EPS.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        let mut kept = Vec::with_capacity(masses.len());
        for (i, &x) in masses.iter().enumerate() {
            if !x.is_finite() {
                return Err(MecError::InvalidInput(format!("mass {i} is not finite")));
            }
            if x < -EPS {
                return Err(MecError::InvalidInput(format!("mass {i} is negative ({x})")));
            }
            if x > 1.0 + EPS {
                return Err(MecError::InvalidInput(format!("mass {i} exceeds 1 ({x})")));
            }
            if x >= EPS {
                kept.push(x);
            }
        }
        kept.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = kept.iter().sum();
        if total > 1.0 + EPS {
            return Err(MecError::InvalidInput(format!(
                "total mass {total} exceeds 1"
            )));
        }
        Ok(Dist { masses: kept, total })
    }

    /// Uniform distribution on `n` states; one mass absorbs the float
    /// rounding so the total is exactly 1.
    pub fn uniform(n: usize) -> Self {
        if n == 0 {
            return Dist { masses: vec![], total: 0.0 };
        }
        let p = 1.0 / n as f64;
        let mut masses = vec![p; n];
        let partial: f64 = masses[..n - 1].iter().sum();
        masses[n - 1] = 1.0 - partial;
        masses.sort_by(|a, b| b.total_cmp(a));
        Dist { masses, total: 1.0 }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// A set of m >= 1 distributions with equal total mass: the input to every
/// coupler and bound in this crate.
#[derive(Debug, Clone)]
pub struct InstanceSet {
    dists: Vec<Dist>,
    n: usize,
}

impl InstanceSet {
    pub fn new(dists: Vec<Dist>) -> Result<Self> {
        if dists.is_empty() {
            return Err(MecError::InvalidInput(
                "instance needs at least one distribution".into(),
            ));
        }
        let lo = dists.iter().map(Dist::total).fold(f64::INFINITY, f64::min);
        let hi = dists.iter().map(Dist::total).fold(0.0_f64, f64::max);
        if hi - lo > EPS {
            return Err(MecError::InvalidInput(format!(
                "distribution totals differ: {lo} vs {hi}"
            )));
        }
        let n = dists.iter().map(Dist::len).max().unwrap();
        Ok(InstanceSet { dists, n })
    }

    /// Residual instances that arise mid-solve accumulate per-distribution
    /// float dust, so they skip the equal-totals check.
    pub(crate) fn residual(dists: Vec<Dist>) -> Self {
        let n = dists.iter().map(Dist::len).max().unwrap_or(0);
        InstanceSet { dists, n }
    }

    pub fn dists(&self) -> &[Dist] {
        &self.dists
    }

    /// Number of distributions.
    pub fn m(&self) -> usize {
        self.dists.len()
    }

    /// Largest state count across the distributions.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total mass to couple (largest of the per-distribution totals).
    pub fn mass(&self) -> f64 {
        self.dists.iter().map(Dist::total).fold(0.0_f64, f64::max)
    }
}

/// One coupling cell: a joint state (one index per distribution) and its mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub indices: Vec<usize>,
    pub mass: f64,
}

/// A sparse joint distribution, stored as its nonzero cells. Serializes as a
/// JSON array of `{"indices": [...], "mass": x}` objects (0-based indices).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling {
    pub entries: Vec<CouplingEntry>,
}

impl Coupling {
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    /// The entry masses as a distribution (sorted, trimmed).
    ///
    /// Panics if the masses are not a valid distribution; couplings produced
    /// by this crate always are.
    pub fn sizes(&self) -> Dist {
        Dist::new(self.entries.iter().map(|e| e.mass).collect())
            .expect("coupling masses form a valid distribution")
    }
}

/// Concave per-cell cost with f(0) = 0: Shannon surprise-weighted mass
/// x * lg(1/x), or the power mean x^c with c in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostFn {
    Shannon,
    Power(f64),
}

impl CostFn {
    /// Power cost x^c; requires c in (0, 1). Concavity is checked on a
    /// midpoint grid.
    pub fn power(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(MecError::InvalidInput(format!(
                "power cost exponent must lie in (0, 1), got {c}"
            )));
        }
        let f = CostFn::Power(c);
        let grid = 16;
        for i in 0..=grid {
            for j in i..=grid {
                let x = i as f64 / grid as f64;
                let y = j as f64 / grid as f64;
                let mid = f.cost((x + y) / 2.0);
                if 2.0 * mid < f.cost(x) + f.cost(y) - 1e-12 {
                    return Err(MecError::InvalidInput(format!(
                        "power cost with c={c} failed the concavity check"
                    )));
                }
            }
        }
        Ok(f)
    }

    /// f_cost(x); 0 at x <= 0.
    pub fn cost(self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            CostFn::Shannon => -x * x.log2(),
            CostFn::Power(c) => x.powf(c),
        }
    }

    /// Unit cost f_cost(x)/x; infinite at x <= 0.
    pub fn unit(self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        match self {
            CostFn::Shannon => -x.log2(),
            CostFn::Power(c) => x.powf(c - 1.0),
        }
    }
}

/// Shannon entropy in bits: sum of x * lg(1/x), with 0 * lg(1/0) = 0.
pub fn entropy(d: &Dist) -> f64 {
    d.masses().iter().map(|&x| CostFn::Shannon.cost(x)).sum()
}

/// Total cost sum of f_cost(x) over the masses.
pub fn cost(d: &Dist, f: CostFn) -> f64 {
    d.masses().iter().map(|&x| f.cost(x)).sum()
}

/// Entropy of the entry-mass multiset of a coupling, in bits.
pub fn coupling_entropy(c: &Coupling) -> f64 {
    c.entries.iter().map(|e| CostFn::Shannon.cost(e.mass)).sum()
}

/// Cost of the entry-mass multiset of a coupling.
pub fn coupling_cost(c: &Coupling, f: CostFn) -> f64 {
    c.entries.iter().map(|e| f.cost(e.mass)).sum()
}

/// One marginal mismatch: distribution `dist`, state `state`, what the
/// instance demands vs what the coupling delivers.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalViolation {
    pub dist: usize,
    pub state: usize,
    pub expected: f64,
    pub actual: f64,
}

/// Checks the marginal property of `c` against `s`: for every distribution k
/// and state i, the entry masses with indices[k] = i must sum to the state's
/// mass within n*m*EPS. Returns the empty vector when the coupling is valid.
///
/// Entries must carry one in-range index per distribution and positive mass;
/// anything else is an input error, not a violation.
pub fn validate_coupling(s: &InstanceSet, c: &Coupling) -> Result<Vec<MarginalViolation>> {
    let m = s.m();
    let tol = (m * s.n()) as f64 * EPS;
    let mut sums: Vec<Vec<f64>> = s.dists().iter().map(|d| vec![0.0; d.len()]).collect();
    for (ei, e) in c.entries.iter().enumerate() {
        if e.indices.len() != m {
            return Err(MecError::InvalidInput(format!(
                "entry {ei} has {} indices, expected {m}",
                e.indices.len()
            )));
        }
        if e.mass.is_nan() || e.mass <= 0.0 {
            return Err(MecError::InvalidInput(format!(
                "entry {ei} mass must be positive, got {}",
                e.mass
            )));
        }
        for (k, &i) in e.indices.iter().enumerate() {
            if i >= s.dists()[k].len() {
                return Err(MecError::InvalidInput(format!(
                    "entry {ei} index {i} is out of range for distribution {k}"
                )));
            }
            sums[k][i] += e.mass;
        }
    }
    let mut violations = vec![];
    for (k, d) in s.dists().iter().enumerate() {
        for (i, &expected) in d.masses().iter().enumerate() {
            let actual = sums[k][i];
            if (expected - actual).abs() > tol {
                violations.push(MarginalViolation { dist: k, state: i, expected, actual });
            }
        }
    }
    Ok(violations)
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    distributions: Vec<Vec<f64>>,
    #[serde(default)]
    normalize: bool,
}

/// Parses instance JSON: `{"distributions": [[...], ...], "normalize": bool?}`.
///
/// Distributions are sorted and trimmed on load. With `"normalize": true`
/// each one is first scaled to total 1; the default is to validate as-is.
pub fn instance_from_json(text: &str) -> Result<InstanceSet> {
    instance_from_json_with(text, false)
}

/// [`instance_from_json`] with normalization forced on, regardless of the
/// file's own flag.
pub fn instance_from_json_with(text: &str, normalize: bool) -> Result<InstanceSet> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let normalize = normalize || file.normalize;
    let mut dists = Vec::with_capacity(file.distributions.len());
    for (k, mut raw) in file.distributions.into_iter().enumerate() {
        if normalize {
            let sum: f64 = raw.iter().sum();
            if sum.is_nan() || sum <= 0.0 {
                return Err(MecError::InvalidInput(format!(
                    "distribution {k} has non-positive total {sum}, cannot normalize"
                )));
            }
            for x in &mut raw {
                *x /= sum;
            }
        }
        dists.push(Dist::new(raw)?);
    }
    InstanceSet::new(dists)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<InstanceSet> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn load_instance_with(path: impl AsRef<Path>, normalize: bool) -> Result<InstanceSet> {
    instance_from_json_with(&fs::read_to_string(path)?, normalize)
}

/// Writes the coupling as a JSON array of `{"indices", "mass"}` objects.
pub fn save_coupling(path: impl AsRef<Path>, c: &Coupling) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(c)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_instance() -> InstanceSet {
        InstanceSet::new(vec![
            Dist::new(vec![0.5, 0.4, 0.1]).unwrap(),
            Dist::new(vec![0.6, 0.2, 0.2]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn dist_sorts_and_trims() {
        let d = Dist::new(vec![0.1, 0.4, 0.5, 1e-15]).unwrap();
        assert_eq!(d.masses(), &[0.5, 0.4, 0.1]);
        assert!((d.total() - 1.0).abs() <= EPS);
    }

    #[test]
    fn dist_rejects_bad_masses() {
        assert!(Dist::new(vec![0.5, -0.1]).is_err());
        assert!(Dist::new(vec![1.5]).is_err());
        assert!(Dist::new(vec![f64::NAN]).is_err());
        assert!(Dist::new(vec![0.8, 0.8]).is_err());
    }

    #[test]
    fn uniform_totals_are_exact() {
        for n in 1..=50 {
            let d = Dist::uniform(n);
            assert_eq!(d.total(), 1.0, "n={n}");
            assert_eq!(d.len(), n);
        }
    }

    #[test]
    fn entropy_golden_values() {
        let d = Dist::new(vec![0.5, 0.2, 0.2, 0.1]).unwrap();
        assert!((entropy(&d) - 1.7609640474436812).abs() < 1e-12);
        assert_eq!(entropy(&Dist::new(vec![1.0]).unwrap()), 0.0);
        assert_eq!(entropy(&Dist::new(vec![0.5, 0.5]).unwrap()), 1.0);
    }

    #[test]
    fn cost_golden_values() {
        let d = Dist::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(cost(&d, CostFn::Shannon), 1.0);
        let q = Dist::new(vec![0.25; 4]).unwrap();
        assert_eq!(cost(&q, CostFn::power(0.5).unwrap()), 2.0);
        let d = Dist::new(vec![0.5, 0.2, 0.2, 0.1]).unwrap();
        assert!((cost(&d, CostFn::power(0.5).unwrap()) - 1.9177617382033013).abs() < 1e-12);
    }

    #[test]
    fn cost_shannon_matches_entropy() {
        let d = Dist::new(vec![0.31, 0.27, 0.2, 0.12, 0.1]).unwrap();
        assert!((cost(&d, CostFn::Shannon) - entropy(&d)).abs() < 1e-12);
    }

    #[test]
    fn power_cost_validation() {
        assert!(CostFn::power(0.0).is_err());
        assert!(CostFn::power(1.0).is_err());
        assert!(CostFn::power(-0.5).is_err());
        assert!(CostFn::power(0.5).is_ok());
    }

    #[test]
    fn coupling_entropy_golden_values() {
        let c = Coupling {
            entries: vec![
                CouplingEntry { indices: vec![0, 0], mass: 0.5 },
                CouplingEntry { indices: vec![1, 1], mass: 0.2 },
                CouplingEntry { indices: vec![1, 2], mass: 0.2 },
                CouplingEntry { indices: vec![2, 0], mass: 0.1 },
            ],
        };
        assert!((coupling_entropy(&c) - 1.7609640474436812).abs() < 1e-12);
        let one = Coupling { entries: vec![CouplingEntry { indices: vec![0], mass: 1.0 }] };
        assert_eq!(coupling_entropy(&one), 0.0);
        let half = Coupling {
            entries: vec![
                CouplingEntry { indices: vec![0, 0], mass: 0.5 },
                CouplingEntry { indices: vec![1, 1], mass: 0.5 },
            ],
        };
        assert_eq!(coupling_entropy(&half), 1.0);
    }

    #[test]
    fn validate_accepts_the_worked_coupling() {
        let s = w_instance();
        let c = Coupling {
            entries: vec![
                CouplingEntry { indices: vec![0, 0], mass: 0.5 },
                CouplingEntry { indices: vec![1, 1], mass: 0.2 },
                CouplingEntry { indices: vec![1, 2], mass: 0.2 },
                CouplingEntry { indices: vec![2, 0], mass: 0.1 },
            ],
        };
        assert!(validate_coupling(&s, &c).unwrap().is_empty());
    }

    #[test]
    fn validate_accepts_identity_coupling() {
        let p = Dist::new(vec![0.5, 0.3, 0.2]).unwrap();
        let s = InstanceSet::new(vec![p.clone(), p.clone()]).unwrap();
        let c = Coupling {
            entries: p
                .masses()
                .iter()
                .enumerate()
                .map(|(i, &x)| CouplingEntry { indices: vec![i, i], mass: x })
                .collect(),
        };
        assert!(validate_coupling(&s, &c).unwrap().is_empty());
    }

    #[test]
    fn validate_reports_missing_mass() {
        let s = w_instance();
        let c = Coupling {
            entries: vec![
                CouplingEntry { indices: vec![0, 0], mass: 0.5 },
                CouplingEntry { indices: vec![1, 1], mass: 0.2 },
                CouplingEntry { indices: vec![1, 2], mass: 0.2 },
            ],
        };
        let v = validate_coupling(&s, &c).unwrap();
        assert!(v.iter().any(|x| x.dist == 0 && x.state == 2 && x.actual == 0.0));
        assert!(v.iter().any(|x| x.dist == 1 && x.state == 0));
    }

    #[test]
    fn validate_rejects_out_of_range_index() {
        let s = w_instance();
        let c = Coupling { entries: vec![CouplingEntry { indices: vec![0, 7], mass: 0.5 }] };
        assert!(matches!(validate_coupling(&s, &c), Err(MecError::InvalidInput(_))));
    }

    #[test]
    fn instance_json_round_trip() {
        let s = instance_from_json(r#"{"distributions": [[0.5,0.4,0.1],[0.6,0.2,0.2]]}"#).unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.n(), 3);
        assert_eq!(s.dists()[0].masses(), &[0.5, 0.4, 0.1]);
    }

    #[test]
    fn instance_json_sorts_unsorted_input() {
        let s = instance_from_json(r#"{"distributions": [[0.1,0.4,0.5],[0.2,0.6,0.2]]}"#).unwrap();
        assert_eq!(s.dists()[0].masses(), &[0.5, 0.4, 0.1]);
        assert_eq!(s.dists()[1].masses(), &[0.6, 0.2, 0.2]);
    }

    #[test]
    fn instance_json_rejects_mismatched_totals() {
        let r = instance_from_json(r#"{"distributions": [[0.5,0.5],[0.5,0.4]]}"#);
        assert!(matches!(r, Err(MecError::InvalidInput(_))));
    }

    #[test]
    fn instance_json_rejects_overfull_dist() {
        assert!(instance_from_json(r#"{"distributions": [[0.5,0.6]]}"#).is_err());
    }

    #[test]
    fn instance_json_normalize_flag() {
        let s =
            instance_from_json(r#"{"distributions": [[2.0,1.0,1.0],[3.0,1.0]], "normalize": true}"#)
                .unwrap();
        assert_eq!(s.dists()[0].masses(), &[0.5, 0.25, 0.25]);
        assert_eq!(s.dists()[1].masses(), &[0.75, 0.25]);
    }

    #[test]
    fn instance_json_forced_normalization() {
        let text = r#"{"distributions": [[2.0,1.0,1.0],[3.0,1.0]]}"#;
        assert!(instance_from_json(text).is_err());
        let s = instance_from_json_with(text, true).unwrap();
        assert_eq!(s.dists()[0].masses(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn instance_json_rejects_garbage() {
        assert!(instance_from_json("{").is_err());
        assert!(instance_from_json(r#"{"distributions": "no"}"#).is_err());
    }

    #[test]
    fn coupling_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let c = Coupling {
            entries: vec![
                CouplingEntry { indices: vec![0, 1], mass: 0.5 },
                CouplingEntry { indices: vec![1, 0], mass: 0.5 },
            ],
        };
        save_coupling(&path, &c).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: Coupling = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(text.trim_start().starts_with('['));
    }

    #[test]
    fn partial_distributions_are_valid_instances() {
        let s = InstanceSet::new(vec![
            Dist::new(vec![0.6, 0.3]).unwrap(),
            Dist::new(vec![0.5, 0.4]).unwrap(),
        ])
        .unwrap();
        assert!((s.mass() - 0.9).abs() <= EPS);
    }
}
