//! Instance generators, the runtime benchmark harness, the local-search gap
//! finder, and an aggregate verification sweep over the library's invariants
//! and published point values.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bounds::{lower_bound, profile_curve, profile_entropy, profile_transpose_entropy, rem_mass_advanced, rem_mass_simple, BoundKind};
use crate::dist::{coupling_entropy, entropy, validate_coupling, CostFn, Coupling, CouplingEntry, Dist, InstanceSet};
use crate::exact::{backtrack_exact, check_forest_leaf_property, dp_exact, vertex_enum_exact};
use crate::greedy::{greedy_coupling, greedy_sizes, monovariant_trace};
use crate::guarantees::{check_mult_guarantee, mult_guarantee_general, mult_ratio_two, small_m_constant};
use crate::{MecError, Result};

/// Splitmix-style seed derivation so every generated instance is a pure
/// function of (seed, salt), independent of which algorithm consumes it.
fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in (0, 1] with full 53-bit resolution.
fn unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 / 9007199254740992.0
}

fn below(rng: &mut impl RngCore, n: usize) -> usize {
    (((rng.next_u64() >> 11) as f64 / 9007199254740992.0) * n as f64) as usize % n.max(1)
}

/// One point uniform on the n-simplex (Dirichlet with unit parameters), by
/// normalizing unit-rate exponential draws. Unsorted.
pub fn sample_simplex(n: usize, rng: &mut impl RngCore) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -unit(rng).ln()).collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// m independent simplex-uniform distributions on n states, sorted into an
/// instance. Deterministic per seed.
pub fn gen_dirichlet(n: usize, m: usize, seed: u64) -> Result<InstanceSet> {
    if n < 1 || m < 1 {
        return Err(MecError::InvalidInput(format!(
            "Dirichlet instances need n, m >= 1, got n={n}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists = (0..m)
        .map(|_| Dist::new(sample_simplex(n, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    InstanceSet::new(dists)
}

/// The pair of uniforms with Fibonacci and Lucas state counts, {U_F(t),
/// U_L(t-1)}; consecutive-ratio structure makes the greedy's profile gap
/// approach its worst case.
pub fn gen_fib_lucas(t: usize) -> Result<InstanceSet> {
    if !(3..=40).contains(&t) {
        return Err(MecError::InvalidInput(format!(
            "t must be in 3..=40 (overflow guard), got {t}"
        )));
    }
    let (mut fa, mut fb) = (1u64, 1u64);
    for _ in 2..t {
        let next = fa + fb;
        fa = fb;
        fb = next;
    }
    let (mut la, mut lb) = (1u64, 3u64);
    for _ in 2..t - 1 {
        let next = la + lb;
        la = lb;
        lb = next;
    }
    InstanceSet::new(vec![Dist::uniform(fb as usize), Dist::uniform(lb as usize)])
}

/// The family {U_1, U_2, ..., U_n}.
pub fn gen_uniform_family(n_max: usize) -> Result<InstanceSet> {
    if n_max < 1 {
        return Err(MecError::InvalidInput("n_max must be >= 1".into()));
    }
    InstanceSet::new((1..=n_max).map(Dist::uniform).collect())
}

/// Raw mass lists for the geometric-tail gap pair with k tail terms: the
/// tail halves from 0.3 and its final term absorbs the remainder, so each
/// list sums to exactly 1 before sub-EPS trimming.
fn geometric_masses(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut tail = Vec::with_capacity(k);
    let mut term = 0.3;
    for _ in 0..k - 1 {
        term *= 0.5;
        tail.push(term);
    }
    let mut p1: Vec<f64> = [0.4, 0.3].into_iter().chain(tail.iter().copied()).collect();
    let mut p2: Vec<f64> = [0.3, 0.2, 0.2].into_iter().chain(tail.iter().copied()).collect();
    p1.push(1.0 - p1.iter().sum::<f64>());
    p2.push(1.0 - p2.iter().sum::<f64>());
    (p1, p2)
}

/// The truncated geometric gap pair: greedy exceeds the optimum by 0.4 bits
/// in the limit, and the second marginal is itself an optimal coupling.
pub fn gen_geometric_gap(k: usize) -> Result<InstanceSet> {
    if !(2..=10_000).contains(&k) {
        return Err(MecError::InvalidInput(format!(
            "tail length must be in 2..=10000, got {k}"
        )));
    }
    let (p1, p2) = geometric_masses(k);
    InstanceSet::new(vec![Dist::new(p1)?, Dist::new(p2)?])
}

/// The coupling of gen_geometric_gap(k) that places all of p2 directly:
/// p2's three head states split p1's head, and tail state j of p2 pairs
/// with state j-1 of p1, which carries the same mass.
pub fn geometric_opt_coupling(k: usize) -> Result<Coupling> {
    let s = gen_geometric_gap(k)?;
    let p2 = s.dists()[1].masses();
    let mut entries = vec![
        CouplingEntry { indices: vec![1, 0], mass: p2[0] },
        CouplingEntry { indices: vec![0, 1], mass: p2[1] },
        CouplingEntry { indices: vec![0, 2], mass: p2[2] },
    ];
    for (j, &mass) in p2.iter().enumerate().skip(3) {
        entries.push(CouplingEntry { indices: vec![j - 1, j], mass });
    }
    Ok(Coupling { entries })
}

/// A measurable quantity of an instance, used to form gap objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Greedy,
    Opt,
    Meet,
    Profile,
    MajorProfile,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Greedy,
        Quantity::Opt,
        Quantity::Meet,
        Quantity::Profile,
        Quantity::MajorProfile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Greedy => "greedy",
            Quantity::Opt => "opt",
            Quantity::Meet => "meet",
            Quantity::Profile => "profile",
            Quantity::MajorProfile => "major-profile",
        }
    }

    pub fn parse(text: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.name() == text)
    }

    /// Parses "<a>-<b>" into a pair of quantities; names themselves contain
    /// hyphens, so every split point is tried.
    pub fn parse_objective(text: &str) -> Option<(Quantity, Quantity)> {
        for qa in Quantity::ALL {
            if let Some(rest) = text.strip_prefix(qa.name()) {
                if let Some(tail) = rest.strip_prefix('-') {
                    if let Some(qb) = Quantity::parse(tail) {
                        return Some((qa, qb));
                    }
                }
            }
        }
        None
    }

    pub fn evaluate(self, s: &InstanceSet) -> Result<f64> {
        match self {
            Quantity::Greedy => Ok(entropy(&greedy_sizes(s))),
            Quantity::Opt => {
                if s.m() != 2 {
                    return Err(MecError::Unsupported(
                        "exact optima are available for pairs only".into(),
                    ));
                }
                Ok(backtrack_exact(&s.dists()[0], &s.dists()[1], BoundKind::MajorProfile, None)?
                    .entropy)
            }
            Quantity::Meet => Ok(lower_bound(s, BoundKind::Meet)),
            Quantity::Profile => Ok(lower_bound(s, BoundKind::Profile)),
            Quantity::MajorProfile => Ok(lower_bound(s, BoundKind::MajorProfile)),
        }
    }
}

/// Hill-climbing configuration. The perturbation size is drawn log-uniform
/// between 1e-6 and 10^hi, where hi anneals from scale.0 on the first
/// restart to scale.1 on the last.
#[derive(Debug, Clone)]
pub struct GapSearchConfig {
    pub objective: (Quantity, Quantity),
    pub n: usize,
    pub m: usize,
    pub restarts: usize,
    pub steps: usize,
    pub scale: (f64, f64),
    pub seed: u64,
}

impl GapSearchConfig {
    pub fn new(objective: (Quantity, Quantity), n: usize, m: usize) -> Self {
        GapSearchConfig { objective, n, m, restarts: 20, steps: 400, scale: (-1.0, -4.0), seed: 7 }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 || self.restarts < 1 {
            return Err(MecError::InvalidInput(
                "gap search needs n, m, restarts >= 1".into(),
            ));
        }
        let involves_opt = self.objective.0 == Quantity::Opt || self.objective.1 == Quantity::Opt;
        if involves_opt && (self.m != 2 || self.n > 7) {
            return Err(MecError::InvalidInput(
                "objectives involving the optimum need m = 2 and n <= 7".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GapSearchResult {
    pub instance: InstanceSet,
    pub gap: f64,
}

/// Random-restart hill climbing on the chosen gap: perturb one state up and
/// another down, keep strict improvements. The per-distribution total is
/// pinned back to the instance mass after every move so float drift never
/// accumulates.
pub fn local_search_gap(cfg: &GapSearchConfig) -> Result<GapSearchResult> {
    cfg.validate()?;
    let (qa, qb) = cfg.objective;
    let eval = |raw: &[Vec<f64>]| -> Result<Option<(InstanceSet, f64)>> {
        let mut parts = Vec::with_capacity(raw.len());
        for v in raw {
            match Dist::new(v.clone()) {
                Ok(d) => parts.push(d),
                Err(_) => return Ok(None),
            }
        }
        match InstanceSet::new(parts) {
            Ok(s) => {
                let gap = qa.evaluate(&s)? - qb.evaluate(&s)?;
                Ok(Some((s, gap)))
            }
            Err(_) => Ok(None),
        }
    };
    let mut best: Option<GapSearchResult> = None;
    for restart in 0..cfg.restarts {
        let seed_instance = gen_dirichlet(cfg.n, cfg.m, derive_seed(cfg.seed, restart as u64))?;
        let target = seed_instance.mass();
        let mut raw: Vec<Vec<f64>> =
            seed_instance.dists().iter().map(|d| d.masses().to_vec()).collect();
        let (mut cur, mut cur_gap) = eval(&raw)?.ok_or_else(|| {
            MecError::Invariant("generator produced an invalid instance".into())
        })?;
        let frac = if cfg.restarts > 1 { restart as f64 / (cfg.restarts - 1) as f64 } else { 0.0 };
        let hi = cfg.scale.0 + (cfg.scale.1 - cfg.scale.0) * frac;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x6761_7000 + restart as u64));
        for _ in 0..cfg.steps {
            let k = below(&mut rng, raw.len());
            if raw[k].len() < 2 {
                continue;
            }
            let a = below(&mut rng, raw[k].len());
            let mut b = below(&mut rng, raw[k].len());
            if b == a {
                b = (b + 1) % raw[k].len();
            }
            let delta = 10f64.powf(-6.0 + (hi + 6.0) * unit(&mut rng));
            if raw[k][b] < delta {
                continue;
            }
            let saved = raw[k].clone();
            raw[k][a] += delta;
            raw[k][b] -= delta;
            let sum: f64 = raw[k].iter().sum();
            let imax = (0..raw[k].len()).max_by(|&x, &y| raw[k][x].total_cmp(&raw[k][y])).unwrap();
            raw[k][imax] += target - sum;
            if raw[k][imax] < 0.0 {
                raw[k] = saved;
                continue;
            }
            match eval(&raw)? {
                Some((s, gap)) if gap > cur_gap => {
                    cur = s;
                    cur_gap = gap;
                }
                _ => raw[k] = saved,
            }
        }
        if best.as_ref().is_none_or(|b| cur_gap > b.gap) {
            best = Some(GapSearchResult { instance: cur, gap: cur_gap });
        }
    }
    Ok(best.expect("at least one restart ran"))
}

/// Algorithms the runtime harness can time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Greedy,
    Backtrack(BoundKind),
    Dp,
    VertexEnum,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Greedy,
        Algorithm::Backtrack(BoundKind::Zero),
        Algorithm::Backtrack(BoundKind::Meet),
        Algorithm::Backtrack(BoundKind::Profile),
        Algorithm::Backtrack(BoundKind::MajorProfile),
        Algorithm::Dp,
        Algorithm::VertexEnum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Backtrack(BoundKind::Zero) => "backtrack-zero",
            Algorithm::Backtrack(BoundKind::Meet) => "backtrack-meet",
            Algorithm::Backtrack(BoundKind::Profile) => "backtrack-profile",
            Algorithm::Backtrack(BoundKind::MajorProfile) => "backtrack-major-profile",
            Algorithm::Dp => "dp",
            Algorithm::VertexEnum => "enum",
        }
    }

    pub fn parse(text: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name() == text)
    }

    fn run(self, s: &InstanceSet, budget: Duration) -> Result<bool> {
        let pair = || -> Result<(&Dist, &Dist)> {
            if s.m() != 2 {
                return Err(MecError::InvalidInput("exact solvers handle pairs only".into()));
            }
            Ok((&s.dists()[0], &s.dists()[1]))
        };
        match self {
            Algorithm::Greedy => {
                greedy_sizes(s);
                Ok(true)
            }
            Algorithm::Backtrack(bound) => {
                let (p, q) = pair()?;
                Ok(backtrack_exact(p, q, bound, Some(budget))?.complete)
            }
            Algorithm::Dp => {
                let (p, q) = pair()?;
                dp_exact(p, q)?;
                Ok(true)
            }
            Algorithm::VertexEnum => {
                let (p, q) = pair()?;
                Ok(vertex_enum_exact(p, q, Some(budget))?.complete)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub timeout: Duration,
    pub seed: u64,
}

/// One harness cell. Timed-out runs are excluded from the mean and counted
/// separately; mean_s is None when no run finished.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub algorithm: String,
    pub n1: usize,
    pub n2: usize,
    pub runs: usize,
    pub mean_s: Option<f64>,
    pub stddev_s: Option<f64>,
    pub timeouts: usize,
    pub budget_s: f64,
}

/// Times each (algorithm, n) cell over fresh Dirichlet pair instances. Every
/// algorithm sees the same instances (seeds derive from seed, n, and run
/// only); one warm-up solve per cell is discarded; timing covers the solve
/// call alone.
pub fn bench_runtimes(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.runs < 1 || cfg.algorithms.is_empty() || cfg.sizes.is_empty() {
        return Err(MecError::InvalidInput(
            "benchmark needs at least one algorithm, one size, and one run".into(),
        ));
    }
    let salt = |n: usize, run: usize| ((n as u64) << 32) | run as u64;
    let mut rows = Vec::new();
    for &alg in &cfg.algorithms {
        for &n in &cfg.sizes {
            let warm = gen_dirichlet(n, 2, derive_seed(cfg.seed, salt(n, 0)))?;
            alg.run(&warm, cfg.timeout)?;
            let mut times = Vec::with_capacity(cfg.runs);
            let mut timeouts = 0usize;
            for run in 0..cfg.runs {
                let s = gen_dirichlet(n, 2, derive_seed(cfg.seed, salt(n, run)))?;
                let t0 = Instant::now();
                let complete = alg.run(&s, cfg.timeout)?;
                let dt = t0.elapsed();
                if !complete || dt > cfg.timeout {
                    timeouts += 1;
                } else {
                    times.push(dt.as_secs_f64());
                }
            }
            let mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
            let stddev = mean.map(|mu| {
                if times.len() < 2 {
                    0.0
                } else {
                    (times.iter().map(|t| (t - mu) * (t - mu)).sum::<f64>()
                        / (times.len() - 1) as f64)
                        .sqrt()
                }
            });
            rows.push(BenchRow {
                algorithm: alg.name().into(),
                n1: n,
                n2: n,
                runs: cfg.runs,
                mean_s: mean,
                stddev_s: stddev,
                timeouts,
                budget_s: cfg.timeout.as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

/// Renders rows as CSV. Cells where every run timed out show ">budget".
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("algorithm,n1,n2,runs,mean_s,stddev_s,timeouts\n");
    for r in rows {
        let mean = match r.mean_s {
            Some(x) => format!("{x:.6}"),
            None => {
                if r.budget_s.fract() == 0.0 {
                    format!(">{:.0}", r.budget_s)
                } else {
                    format!(">{}", r.budget_s)
                }
            }
        };
        let sd = r.stddev_s.map_or(String::new(), |x| format!("{x:.6}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm, r.n1, r.n2, r.runs, mean, sd, r.timeouts
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// The local-search record instances with their published gap values.
const GAP_MEET: (&[f64], &[f64]) = (
    &[0.3199940773, 0.3199844734, 0.1200540976, 0.1200022716, 0.1199650801],
    &[0.2000218248, 0.2000211548, 0.2000202369, 0.1999737730, 0.1999630105],
);
const GAP_PROFILE: (&[f64], &[f64]) = (
    &[0.2128275903, 0.2122898591, 0.2119627146, 0.2119384365, 0.1509813995],
    &[0.2747693214, 0.2739951951, 0.2739769942, 0.1161585898, 0.0610998995],
);
const GAP_GREEDY_OPT: (&[f64], &[f64]) = (
    &[0.4081266587, 0.3060949942, 0.1530474970, 0.0765237476, 0.0382618746, 0.0179452279],
    &[
        0.3060949942, 0.2040633294, 0.2040633294, 0.1530474970, 0.0765237476, 0.0382618746,
        0.0179452278,
    ],
);

fn pair_instance(masses: (&[f64], &[f64])) -> InstanceSet {
    InstanceSet::new(vec![
        Dist::new(masses.0.to_vec()).expect("fixed instance is valid"),
        Dist::new(masses.1.to_vec()).expect("fixed instance is valid"),
    ])
    .expect("fixed instance totals match")
}

fn random_instances(seed: u64, count: usize) -> Vec<InstanceSet> {
    let ms = [2usize, 3, 5];
    let ns = [3usize, 4, 5, 6, 7, 8];
    (0..count)
        .map(|i| {
            gen_dirichlet(ns[i % ns.len()], ms[i % ms.len()], derive_seed(seed, i as u64))
                .expect("generator parameters are valid")
        })
        .collect()
}

/// Runs every major invariant of the library over `counts` random instances
/// plus the fixed published ones, returning one named result per check.
pub fn verify_suite(seed: u64, counts: usize) -> VerifyReport {
    let counts = counts.max(1);
    let mut checks = Vec::new();
    let sweep = random_instances(seed, counts);
    let pair_sweep: Vec<&InstanceSet> = sweep.iter().filter(|s| s.m() == 2).collect();

    checks.push(check_greedy_validates(&sweep));
    checks.push(check_bound_chain(&sweep));
    checks.push(check_transpose(&sweep));
    checks.push(check_monovariant(&pair_sweep));
    checks.push(check_remaining_mass(&sweep));
    checks.push(check_additive_guarantees(&sweep));
    checks.push(check_point_values());
    checks.push(check_exact_agreement(seed, counts.min(20)));
    checks.push(check_fixed_gap_instances());
    checks.push(check_geometric());
    checks.push(check_detectors());
    checks.push(check_power_factors(seed, counts.min(30)));
    VerifyReport { checks }
}

fn fail(name: &'static str, detail: String) -> VerifyCheck {
    VerifyCheck { name, passed: false, detail }
}

fn pass(name: &'static str, detail: String) -> VerifyCheck {
    VerifyCheck { name, passed: true, detail }
}

fn dump(s: &InstanceSet) -> String {
    let lists: Vec<Vec<f64>> = s.dists().iter().map(|d| d.masses().to_vec()).collect();
    format!("{lists:?}")
}

fn check_greedy_validates(sweep: &[InstanceSet]) -> VerifyCheck {
    const NAME: &str = "greedy-coupling-validates";
    for s in sweep {
        let (c, trace) = greedy_coupling(s);
        match validate_coupling(s, &c) {
            Ok(v) if v.is_empty() => {}
            _ => return fail(NAME, format!("marginal mismatch on {}", dump(s))),
        }
        if c.support() > s.n() * s.m() - (s.m() - 1) {
            return fail(NAME, format!("support bound violated on {}", dump(s)));
        }
        if trace.steps.windows(2).any(|w| w[1].mass > w[0].mass + 1e-15) {
            return fail(NAME, format!("step masses increased on {}", dump(s)));
        }
    }
    pass(NAME, format!("{} instances", sweep.len()))
}

fn check_bound_chain(sweep: &[InstanceSet]) -> VerifyCheck {
    const NAME: &str = "bound-chain";
    for s in sweep {
        let meet = lower_bound(s, BoundKind::Meet);
        let profile = lower_bound(s, BoundKind::Profile);
        let major = lower_bound(s, BoundKind::MajorProfile);
        let greedy = entropy(&greedy_sizes(s));
        let ok = meet >= -1e-9
            && meet <= major + 1e-9
            && profile <= major + 1e-9
            && major <= greedy + 1e-9;
        if !ok {
            return fail(
                NAME,
                format!("meet={meet} profile={profile} major={major} greedy={greedy} on {}", dump(s)),
            );
        }
    }
    pass(NAME, format!("{} instances", sweep.len()))
}

fn check_transpose(sweep: &[InstanceSet]) -> VerifyCheck {
    const NAME: &str = "profile-transpose-consistency";
    for s in sweep {
        let curve = profile_curve(s);
        let a = profile_entropy(&curve);
        let b = profile_transpose_entropy(&curve);
        if (a - b).abs() > 1e-9 {
            return fail(NAME, format!("{a} vs {b} on {}", dump(s)));
        }
    }
    pass(NAME, format!("{} instances", sweep.len()))
}

fn check_monovariant(pairs: &[&InstanceSet]) -> VerifyCheck {
    const NAME: &str = "monovariant-steps";
    let rate = std::f64::consts::LOG2_E / std::f64::consts::E;
    for s in pairs {
        let trace = monovariant_trace(s).expect("pairs only");
        let (_, steps) = greedy_coupling(s);
        for (i, w) in trace.windows(2).enumerate() {
            if w[1].1 - w[0].1 > rate * steps.steps[i].mass + 1e-9 {
                return fail(NAME, format!("step {i} on {}", dump(s)));
            }
        }
    }
    pass(NAME, format!("{} pair instances", pairs.len()))
}

fn check_remaining_mass(sweep: &[InstanceSet]) -> VerifyCheck {
    const NAME: &str = "remaining-mass-certificate";
    for s in sweep {
        let (_, trace) = greedy_coupling(s);
        for step in &trace.steps {
            if step.remaining_before > rem_mass_advanced(s, step.mass) + 1e-9 {
                return fail(
                    NAME,
                    format!("remaining {} at step mass {} on {}", step.remaining_before, step.mass, dump(s)),
                );
            }
        }
    }
    pass(NAME, format!("{} instances", sweep.len()))
}

fn check_additive_guarantees(sweep: &[InstanceSet]) -> VerifyCheck {
    const NAME: &str = "additive-guarantees";
    let pair_c = std::f64::consts::LOG2_E / std::f64::consts::E;
    let any_m = (1.0 + std::f64::consts::LOG2_E) / 2.0;
    for s in sweep {
        let gap = entropy(&greedy_sizes(s)) - profile_entropy(&profile_curve(s));
        if gap > any_m + 1e-9 {
            return fail(NAME, format!("gap {gap} beats the general constant on {}", dump(s)));
        }
        if s.m() == 2 && gap > pair_c + 1e-9 {
            return fail(NAME, format!("gap {gap} beats the pair constant on {}", dump(s)));
        }
        if s.m() <= 11 {
            let cm = small_m_constant(s.m()).expect("m >= 2");
            if gap > cm + 1e-6 {
                return fail(NAME, format!("gap {gap} beats c_{} on {}", s.m(), dump(s)));
            }
        }
    }
    pass(NAME, format!("{} instances", sweep.len()))
}

fn check_point_values() -> VerifyCheck {
    const NAME: &str = "published-point-values";
    let p = InstanceSet::new(vec![Dist::new(vec![0.5, 0.4, 0.1]).unwrap()]).unwrap();
    if rem_mass_simple(&p, 0.3) != 0.7 || rem_mass_advanced(&p, 0.3) != 0.55 {
        return fail(NAME, "remaining-mass point values drifted".into());
    }
    let cx = InstanceSet::new(vec![
        Dist::new(vec![0.5, 0.5]).unwrap(),
        Dist::new(vec![0.75, 0.05, 0.05, 0.05, 0.05, 0.05]).unwrap(),
    ])
    .unwrap();
    let meet = lower_bound(&cx, BoundKind::Meet);
    let profile = lower_bound(&cx, BoundKind::Profile);
    if (meet - 1.8854752972273343).abs() > 1e-9
        || (profile - 1.8304820237218406).abs() > 1e-9
        || profile >= meet
    {
        return fail(NAME, format!("counterexample values drifted: meet={meet} profile={profile}"));
    }
    let (r, factor) = mult_ratio_two(CostFn::power(0.5).unwrap()).expect("power cost");
    if (r - 0.25).abs() > 1e-6 || (factor - 4.0 / 3.0).abs() > 1e-6 {
        return fail(NAME, format!("power ratio drifted: r={r}"));
    }
    if (mult_guarantee_general(0.5) - 1.914213562373095).abs() > 1e-6 {
        return fail(NAME, "general factor drifted".into());
    }
    for (m, want) in [(2, 0.53), (3, 0.77), (11, 1.21)] {
        let got = small_m_constant(m).expect("m >= 2");
        if (got - want).abs() > 5e-3 {
            return fail(NAME, format!("c_{m} = {got}, expected about {want}"));
        }
    }
    pass(NAME, "remaining-mass, counterexample, power, and table constants".into())
}

fn check_exact_agreement(seed: u64, count: usize) -> VerifyCheck {
    const NAME: &str = "exact-cross-agreement";
    let mut done = 0;
    for i in 0..count {
        let n = 3 + i % 3;
        let s = gen_dirichlet(n, 2, derive_seed(seed, 0xE0 + i as u64)).expect("valid parameters");
        let (p, q) = (&s.dists()[0], &s.dists()[1]);
        let dp = dp_exact(p, q).expect("within caps");
        let en = vertex_enum_exact(p, q, None).expect("within caps");
        let mut values = vec![dp.entropy, en.entropy];
        for bound in BoundKind::ALL {
            values.push(backtrack_exact(p, q, bound, None).expect("valid pair").entropy);
        }
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > 1e-9 {
            return fail(NAME, format!("solver spread {spread} on {}", dump(&s)));
        }
        let opt = dp.entropy;
        let greedy = entropy(&greedy_sizes(&s));
        for bound in BoundKind::ALL {
            if lower_bound(&s, bound) > opt + 1e-9 {
                return fail(NAME, format!("bound exceeds optimum on {}", dump(&s)));
            }
        }
        if opt > greedy + 1e-9 {
            return fail(NAME, format!("optimum exceeds greedy on {}", dump(&s)));
        }
        for c in [&dp.coupling, &en.coupling] {
            if check_forest_leaf_property(c).is_err() {
                return fail(NAME, format!("forest property failed on {}", dump(&s)));
            }
        }
        done += 1;
    }
    pass(NAME, format!("{done} instances, all solvers within 1e-9"))
}

fn check_fixed_gap_instances() -> VerifyCheck {
    const NAME: &str = "fixed-gap-instances";
    let checks = [
        ("greedy-meet", GAP_MEET, Quantity::Greedy, Quantity::Meet, 0.662463),
        ("opt-meet", GAP_MEET, Quantity::Opt, Quantity::Meet, 0.662405),
        ("opt-profile", GAP_PROFILE, Quantity::Opt, Quantity::Profile, 0.389941),
        ("opt-major-profile", GAP_PROFILE, Quantity::Opt, Quantity::MajorProfile, 0.354485),
        ("greedy-opt", GAP_GREEDY_OPT, Quantity::Greedy, Quantity::Opt, 0.395053),
    ];
    for (label, masses, qa, qb, want) in checks {
        let s = pair_instance(masses);
        let got = qa.evaluate(&s).and_then(|a| qb.evaluate(&s).map(|b| a - b));
        match got {
            Ok(g) if (g - want).abs() <= 1e-5 => {}
            Ok(g) => return fail(NAME, format!("{label}: gap {g}, published {want}")),
            Err(e) => return fail(NAME, format!("{label}: {e}")),
        }
    }
    pass(NAME, "all five published gaps within 1e-5".into())
}

fn check_geometric() -> VerifyCheck {
    const NAME: &str = "geometric-construction";
    let s = gen_geometric_gap(40).expect("valid length");
    let opt = geometric_opt_coupling(40).expect("valid length");
    match validate_coupling(&s, &opt) {
        Ok(v) if v.is_empty() => {}
        _ => return fail(NAME, "p2 no longer validates as a coupling".into()),
    }
    let gap = entropy(&greedy_sizes(&s)) - coupling_entropy(&opt);
    if (gap - 0.4).abs() > 1e-6 {
        return fail(NAME, format!("K=40 gap {gap}, expected 0.4"));
    }
    for k in 10..=14 {
        let g = |k: usize| {
            let s = gen_geometric_gap(k).expect("valid length");
            let opt = geometric_opt_coupling(k).expect("valid length");
            entropy(&greedy_sizes(&s)) - coupling_entropy(&opt)
        };
        if (g(k) - 0.4).abs() > (g(k - 1) - 0.4).abs() + 1e-15 {
            return fail(NAME, format!("gap diverges at K={k}"));
        }
    }
    pass(NAME, "K=40 gap within 1e-6 and truncation converges".into())
}

fn check_detectors() -> VerifyCheck {
    const NAME: &str = "violation-detectors";
    let s = pair_instance((&[0.5, 0.4, 0.1], &[0.6, 0.2, 0.2]));
    let (mut c, _) = greedy_coupling(&s);
    c.entries[0].mass += 0.05;
    match validate_coupling(&s, &c) {
        Ok(v) if !v.is_empty() => {}
        _ => return fail(NAME, "corrupted coupling slipped through".into()),
    }
    let cycle = Coupling {
        entries: (0..4)
            .map(|i| CouplingEntry { indices: vec![i / 2, i % 2], mass: 0.25 })
            .collect(),
    };
    if check_forest_leaf_property(&cycle).is_ok() {
        return fail(NAME, "4-cycle passed the forest check".into());
    }
    pass(NAME, "marginal and forest violations both detected".into())
}

fn check_power_factors(seed: u64, count: usize) -> VerifyCheck {
    const NAME: &str = "power-cost-factors";
    let ms = [2usize, 3, 5];
    for i in 0..count {
        let m = ms[i % ms.len()];
        let s = gen_dirichlet(3 + i % 5, m, derive_seed(seed, 0xF0 + i as u64))
            .expect("valid parameters");
        for c in [0.3, 0.5, 0.7] {
            if let Err(e) = check_mult_guarantee(&s, CostFn::power(c).unwrap()) {
                return fail(NAME, format!("c={c}: {e} on {}", dump(&s)));
            }
        }
    }
    pass(NAME, format!("{count} instances x 3 exponents"))
}
