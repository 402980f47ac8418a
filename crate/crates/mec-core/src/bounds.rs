//! Lower bounds on the optimal coupling entropy: the majorization meet, the
//! profile curve with its two entropy integrals, the major-profile
//! distribution, and the rem-mass certificates for the greedy coupler.

use crate::dist::{entropy, Dist, InstanceSet};
use crate::EPS;

/// The pointwise minimum of the input sketches, as a reduced breakpoint list.
///
/// A sketch places a distribution's states as a non-decreasing step function
/// of cumulative mass, smallest states leftmost: state i occupies the
/// interval (suffix(i+1), suffix(i)] at height p(i). `points` holds the
/// reduced pairs (x, y), strictly increasing in both coordinates; the curve
/// value is y_i on (x_{i-1}, x_i] with x_0 = 0, and the last x equals the
/// instance mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Total x-extent (the instance mass).
    pub fn extent(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }

    /// Curve value at x in (0, extent]; clamps outside that range.
    pub fn value(&self, x: f64) -> f64 {
        match self.points.iter().find(|p| p.0 >= x) {
            Some(&(_, y)) => y,
            None => self.points.last().map_or(0.0, |p| p.1),
        }
    }
}

/// The largest distribution majorized by every input: prefix sums are the
/// pointwise minima of the inputs' prefix sums.
pub fn majorization_meet(s: &InstanceSet) -> Dist {
    let n = s.n();
    let mut prefix_min = vec![f64::INFINITY; n];
    for d in s.dists() {
        let mut acc = 0.0;
        for (i, slot) in prefix_min.iter_mut().enumerate() {
            acc += d.masses().get(i).copied().unwrap_or(0.0);
            *slot = slot.min(acc);
        }
    }
    let mut masses = Vec::with_capacity(n);
    let mut last = 0.0;
    for &p in &prefix_min {
        masses.push(p - last);
        last = p;
    }
    for w in masses.windows(2) {
        debug_assert!(w[1] <= w[0] + 1e-9, "meet must be non-increasing");
    }
    Dist::new(masses).expect("prefix-min differences form a valid distribution")
}

/// Builds the profile: collect (suffix sum, state mass) pairs from every
/// distribution, sweep in decreasing x keeping only pairs that lower the
/// running minimum height (duplicate x keeps the smaller y), then reverse.
pub fn profile_curve(s: &InstanceSet) -> ProfileCurve {
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for d in s.dists() {
        let mut suffix = 0.0;
        for i in (0..d.len()).rev() {
            suffix += d.masses()[i];
            pairs.push((suffix, d.masses()[i]));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut reduced: Vec<(f64, f64)> = Vec::new();
    let mut min_y = f64::INFINITY;
    for &(x, y) in &pairs {
        if y < min_y {
            reduced.push((x, y));
            min_y = y;
        }
    }
    reduced.reverse();
    ProfileCurve { points: reduced }
}

/// Integral of lg(1/curve) over (0, extent]: the sum of
/// (x_i - x_{i-1}) * lg(1/y_i) over adjacent breakpoints.
pub fn profile_entropy(pc: &ProfileCurve) -> f64 {
    let mut h = 0.0;
    let mut last_x = 0.0;
    for &(x, y) in &pc.points {
        h += (x - last_x) * -y.log2();
        last_x = x;
    }
    h
}

/// The same integral evaluated through the transposed curve (height as the
/// integration variable): sum of x_i * lg(y_{i+1}/y_i) plus x_k * lg(1/y_k).
/// Agrees with [`profile_entropy`] to within float noise; kept as a
/// consistency oracle.
pub fn profile_transpose_entropy(pc: &ProfileCurve) -> f64 {
    let pts = &pc.points;
    if pts.is_empty() {
        return 0.0;
    }
    let mut h = 0.0;
    for i in 0..pts.len() - 1 {
        h += pts[i].0 * (pts[i + 1].1 / pts[i].1).log2();
    }
    let (xk, yk) = pts[pts.len() - 1];
    h + xk * -yk.log2()
}

/// The minimum-entropy distribution whose sketch stays under the profile.
///
/// Grows squares against the curve: with t the remaining extent, emit
/// r = min over breakpoints (including the (0,0) sentinel) of max(y, t - x)
/// and shrink t by r. A two-pointer over the breakpoints (sorted by x + y,
/// which increases with both coordinates) evaluates each r in O(1) amortized.
pub fn major_profile(pc: &ProfileCurve) -> Dist {
    let mut pts = Vec::with_capacity(pc.points.len() + 1);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(&pc.points);
    let mut t = pc.extent();
    let mut j = pts.len() - 1;
    let mut masses = Vec::new();
    while t > EPS {
        while j > 1 && pts[j - 1].0 + pts[j - 1].1 > t {
            j -= 1;
        }
        let r = (t - pts[j - 1].0).min(pts[j].1);
        if r <= EPS {
            break;
        }
        masses.push(r);
        t -= r;
    }
    for w in masses.windows(2) {
        debug_assert!(w[1] <= w[0] + 1e-9, "major-profile masses must be non-increasing");
    }
    Dist::new(masses).expect("major-profile masses form a valid distribution")
}

/// Upper bound on the mass still uncoupled when the greedy's next allocation
/// has size at most y: max over distributions of the sum of min(p(j), y).
pub fn rem_mass_simple(s: &InstanceSet, y: f64) -> f64 {
    s.dists()
        .iter()
        .map(|d| d.masses().iter().map(|&p| p.min(y)).sum())
        .fold(0.0_f64, f64::max)
}

/// The tighter three-case variant: a state j contributes y when y <= p(j)/2,
/// p(j)/2 when p(j)/2 < y < p(j), and p(j) when p(j) <= y.
pub fn rem_mass_advanced(s: &InstanceSet, y: f64) -> f64 {
    s.dists()
        .iter()
        .map(|d| {
            d.masses()
                .iter()
                .map(|&p| {
                    if y <= p / 2.0 {
                        y
                    } else if y < p {
                        p / 2.0
                    } else {
                        p
                    }
                })
                .sum()
        })
        .fold(0.0_f64, f64::max)
}

/// Which lower bound to evaluate (and, inside the backtracking solver, which
/// one to prune with).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Zero,
    Meet,
    Profile,
    MajorProfile,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] =
        [BoundKind::Zero, BoundKind::Meet, BoundKind::Profile, BoundKind::MajorProfile];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Zero => "zero",
            BoundKind::Meet => "meet",
            BoundKind::Profile => "profile",
            BoundKind::MajorProfile => "major-profile",
        }
    }
}

/// Value of the selected lower bound on the optimal coupling entropy, in
/// bits. Partial instances are fine; integrals run over (0, Mass(S)].
pub fn lower_bound(s: &InstanceSet, kind: BoundKind) -> f64 {
    match kind {
        BoundKind::Zero => 0.0,
        BoundKind::Meet => entropy(&majorization_meet(s)),
        BoundKind::Profile => profile_entropy(&profile_curve(s)),
        BoundKind::MajorProfile => entropy(&major_profile(&profile_curve(s))),
    }
}
