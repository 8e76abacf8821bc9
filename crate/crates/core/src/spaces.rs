//! Point domains, algebra-valued (partial) metrics and the predicates built on
//! them: sampled axiom checks, convergence and Cauchy probes, and the induced
//! metric `p^s(x, y) = 2 p(x, y) - p(x, x) - p(y, y)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, OrderTolerance, Shape};
use crate::error::{Error, Result};
use crate::report::{first_failure, AxiomReport, Witness};

/// A point of `X`: one coordinate for intervals, several for boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; the whole point for interval domains.
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Point {
        Point(self.0.iter().map(|c| f(*c)).collect())
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point(vec![x])
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

fn coord(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c != 0.0 && (c.abs() < 1e-4 || c.abs() >= 1e6) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [x] = self.0.as_slice() {
            return coord(f, *x);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            coord(f, *c)?;
        }
        write!(f, ")")
    }
}

/// A closed interval or a product of closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PointDomain {
    Interval { lo: f64, hi: f64 },
    Product { bounds: Vec<(f64, f64)> },
}

impl PointDomain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        check_bounds(lo, hi)?;
        Ok(PointDomain::Interval { lo, hi })
    }

    pub fn product(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidConfig(
                "product domain needs at least one factor".into(),
            ));
        }
        for &(lo, hi) in &bounds {
            check_bounds(lo, hi)?;
        }
        Ok(PointDomain::Product { bounds })
    }

    /// The square box `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::product(vec![(lo, hi); dim])
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            PointDomain::Interval { lo, hi } => vec![(*lo, *hi)],
            PointDomain::Product { bounds } => bounds.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PointDomain::Interval { .. } => 1,
            PointDomain::Product { bounds } => bounds.len(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let bounds = self.bounds();
        p.dim() == bounds.len()
            && p.0
                .iter()
                .zip(&bounds)
                .all(|(c, (lo, hi))| *lo <= *c && *c <= *hi)
    }

    /// Projects a point onto the domain coordinate by coordinate.
    pub fn clamp(&self, p: &Point) -> Point {
        Point(
            p.0.iter()
                .zip(self.bounds())
                .map(|(c, (lo, hi))| c.clamp(lo, hi))
                .collect(),
        )
    }

    pub fn corners(&self) -> Vec<Point> {
        let bounds = self.bounds();
        let mut out = vec![Vec::with_capacity(bounds.len())];
        for (lo, hi) in bounds {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    let mut a = prefix.clone();
                    a.push(lo);
                    let mut b = prefix;
                    b.push(hi);
                    if lo == hi {
                        vec![a]
                    } else {
                        vec![a, b]
                    }
                })
                .collect();
        }
        out.into_iter().map(Point).collect()
    }

    pub fn sampler(&self, seed: u64) -> Sampler<'_> {
        Sampler {
            domain: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// `count` points: the corners first, then uniform draws.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut s = self.sampler(seed);
        let mut out: Vec<Point> = self.corners().into_iter().take(count).collect();
        while out.len() < count {
            out.push(s.point());
        }
        out
    }

    /// `count` pairs: every pair of corners first, then uniform draws.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Vec<(Point, Point)> {
        let corners = self.corners();
        let mut out: Vec<(Point, Point)> = corners
            .iter()
            .flat_map(|a| corners.iter().map(move |b| (a.clone(), b.clone())))
            .take(count)
            .collect();
        let mut s = self.sampler(seed);
        while out.len() < count {
            out.push((s.point(), s.point()));
        }
        out
    }

    pub fn sample_triples(&self, count: usize, seed: u64) -> Vec<(Point, Point, Point)> {
        let mut s = self.sampler(seed);
        let corners = self.corners();
        let mut out = Vec::with_capacity(count);
        'outer: for a in &corners {
            for b in &corners {
                for c in &corners {
                    if out.len() == count {
                        break 'outer;
                    }
                    out.push((a.clone(), b.clone(), c.clone()));
                }
            }
        }
        while out.len() < count {
            out.push((s.point(), s.point(), s.point()));
        }
        out
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidConfig(format!(
            "invalid interval [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Deterministic point generator for a domain.
pub struct Sampler<'a> {
    domain: &'a PointDomain,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    pub fn point(&mut self) -> Point {
        let coords = self
            .domain
            .bounds()
            .into_iter()
            .map(|(lo, hi)| {
                if lo == hi {
                    lo
                } else {
                    self.rng.random_range(lo..=hi)
                }
            })
            .collect();
        Point(coords)
    }

    /// A point within `radius` of `center` (sup norm), clamped into the domain.
    pub fn near(&mut self, center: &Point, radius: f64) -> Point {
        let moved = center.map(|c| c + radius * self.rng.random_range(-1.0..=1.0));
        self.domain.clamp(&moved)
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.random_range(0.0..1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Metric,
    PartialMetric,
    /// Distance-like map that is not claimed to satisfy `d(x, x) = theta`.
    Premetric,
}

type DistanceFn = dyn Fn(&Point, &Point) -> AlgebraElement + Send + Sync;

/// An algebra-valued distance `X x X -> A`.
#[derive(Clone)]
pub struct ValuedDistance {
    label: String,
    shape: Shape,
    flavor: Flavor,
    eval: Arc<DistanceFn>,
}

impl ValuedDistance {
    pub fn new(
        label: impl Into<String>,
        shape: Shape,
        flavor: Flavor,
        eval: impl Fn(&Point, &Point) -> AlgebraElement + Send + Sync + 'static,
    ) -> Self {
        ValuedDistance {
            label: label.into(),
            shape,
            flavor,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> AlgebraElement {
        let v = (self.eval)(x, y);
        debug_assert_eq!(
            v.shape(),
            self.shape,
            "{} returned the wrong shape",
            self.label
        );
        v
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zero(self.shape)
    }
}

impl fmt::Debug for ValuedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValuedDistance")
            .field("label", &self.label)
            .field("shape", &self.shape)
            .field("flavor", &self.flavor)
            .finish()
    }
}

fn approx_eq(a: &AlgebraElement, b: &AlgebraElement, tol: OrderTolerance) -> bool {
    let scale = a.norm().max(b.norm());
    a.checked_sub(b)
        .map(|d| d.norm() <= tol.slack(scale))
        .unwrap_or(false)
}

fn leq(a: &AlgebraElement, b: &AlgebraElement, tol: OrderTolerance) -> bool {
    a.leq(b, tol).unwrap_or(false)
}

fn distinct(x: &Point, y: &Point) -> bool {
    x != y
}

/// Checks nonnegativity, indistinguishability, symmetry, minimal
/// self-distance and the corrected triangle inequality
/// `p(x, y) <= p(x, z) + p(z, y) - p(z, z)` on seeded samples.
pub fn check_partial_axioms(
    p: &ValuedDistance,
    domain: &PointDomain,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> AxiomReport {
    let mut report = AxiomReport::new(p.label(), seed, sample_count);
    let pairs = domain.sample_pairs(sample_count, seed);
    let triples = domain.sample_triples(sample_count, seed.wrapping_add(1));
    let theta = p.zero();

    let w = first_failure(&pairs, |(x, y)| {
        let v = p.eval(x, y);
        (!leq(&theta, &v, tol)).then(|| witness(&[x, y], v, "theta is not below p(x, y)"))
    });
    report.push("nonnegativity", pairs.len(), w.map(|(_, w)| w));

    report.push(
        "indistinguishability",
        pairs.len() * 2,
        indistinguishability(p, &pairs, tol),
    );

    let w = first_failure(&pairs, |(x, y)| {
        let (a, b) = (p.eval(x, y), p.eval(y, x));
        (!approx_eq(&a, &b, tol))
            .then(|| witness(&[x, y], a.checked_sub(&b).unwrap(), "p(x, y) - p(y, x)"))
    });
    report.push("symmetry", pairs.len(), w.map(|(_, w)| w));

    let w = first_failure(&pairs, |(x, y)| {
        let (xx, xy) = (p.eval(x, x), p.eval(x, y));
        (!leq(&xx, &xy, tol))
            .then(|| witness(&[x, y], xy.checked_sub(&xx).unwrap(), "p(x, y) - p(x, x)"))
    });
    report.push("self_distance_minimal", pairs.len(), w.map(|(_, w)| w));

    let w = first_failure(&triples, |(x, y, z)| {
        let lhs = p.eval(x, y);
        let rhs = p
            .eval(x, z)
            .checked_add(&p.eval(z, y))
            .and_then(|s| s.checked_sub(&p.eval(z, z)))
            .unwrap();
        (!leq(&lhs, &rhs, tol)).then(|| {
            witness(
                &[x, y, z],
                rhs.checked_sub(&lhs).unwrap(),
                "p(x, z) + p(z, y) - p(z, z) - p(x, y)",
            )
        })
    });
    report.push("modified_triangle", triples.len(), w.map(|(_, w)| w));
    report
}

/// `p(x, x) = p(y, y) = p(x, y)` must hold on the diagonal and fail off it.
fn indistinguishability(
    p: &ValuedDistance,
    pairs: &[(Point, Point)],
    tol: OrderTolerance,
) -> Option<Witness> {
    let diagonal = first_failure(pairs, |(x, _)| {
        let (a, b) = (p.eval(x, x), p.eval(x, x));
        (!approx_eq(&a, &b, tol)).then(|| witness(&[x], a, "p(x, x) is not reproducible"))
    });
    if let Some((_, w)) = diagonal {
        return Some(w);
    }
    first_failure(pairs, |(x, y)| {
        if !distinct(x, y) {
            return None;
        }
        let (xx, yy, xy) = (p.eval(x, x), p.eval(y, y), p.eval(x, y));
        (approx_eq(&xx, &xy, tol) && approx_eq(&yy, &xy, tol)).then(|| {
            witness(
                &[x, y],
                xy,
                "p(x, x) = p(y, y) = p(x, y) for distinct points",
            )
        })
    })
    .map(|(_, w)| w)
}

/// Checks nonnegativity, `d(x, x) = theta`, indistinguishability, symmetry
/// and the triangle inequality on seeded samples.
pub fn check_metric_axioms(
    d: &ValuedDistance,
    domain: &PointDomain,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> AxiomReport {
    let mut report = AxiomReport::new(d.label(), seed, sample_count);
    let pairs = domain.sample_pairs(sample_count, seed);
    let points = domain.sample_points(sample_count, seed);
    let triples = domain.sample_triples(sample_count, seed.wrapping_add(1));
    let theta = d.zero();

    let w = first_failure(&pairs, |(x, y)| {
        let v = d.eval(x, y);
        (!leq(&theta, &v, tol)).then(|| witness(&[x, y], v, "theta is not below d(x, y)"))
    });
    report.push("nonnegativity", pairs.len(), w.map(|(_, w)| w));

    let w = first_failure(&points, |x| {
        let v = d.eval(x, x);
        (!approx_eq(&v, &theta, tol)).then(|| witness(&[x], v, "d(x, x) differs from theta"))
    });
    report.push("zero_self_distance", points.len(), w.map(|(_, w)| w));

    let w = first_failure(&pairs, |(x, y)| {
        if !distinct(x, y) {
            return None;
        }
        let v = d.eval(x, y);
        approx_eq(&v, &theta, tol)
            .then(|| witness(&[x, y], v, "d(x, y) = theta for distinct points"))
    });
    report.push("indistinguishability", pairs.len(), w.map(|(_, w)| w));

    let w = first_failure(&pairs, |(x, y)| {
        let (a, b) = (d.eval(x, y), d.eval(y, x));
        (!approx_eq(&a, &b, tol))
            .then(|| witness(&[x, y], a.checked_sub(&b).unwrap(), "d(x, y) - d(y, x)"))
    });
    report.push("symmetry", pairs.len(), w.map(|(_, w)| w));

    let w = first_failure(&triples, |(x, y, z)| {
        let lhs = d.eval(x, y);
        let rhs = d.eval(x, z).checked_add(&d.eval(z, y)).unwrap();
        (!leq(&lhs, &rhs, tol)).then(|| {
            witness(
                &[x, y, z],
                rhs.checked_sub(&lhs).unwrap(),
                "d(x, z) + d(z, y) - d(x, y)",
            )
        })
    });
    report.push("triangle", triples.len(), w.map(|(_, w)| w));
    report
}

fn witness(points: &[&Point], element: AlgebraElement, detail: &str) -> Witness {
    Witness {
        points: points.iter().map(|p| (*p).clone()).collect(),
        inputs: Vec::new(),
        element,
        detail: detail.to_string(),
    }
}

/// `p^s(x, y) = 2 p(x, y) - p(x, x) - p(y, y)`, flagged as a metric.
///
/// Evaluated as `2 p(x, y) - (p(x, x) + p(y, y))`: on the diagonal that is
/// `2a - 2a`, exactly zero, and swapping `x` and `y` gives bitwise the same
/// value when `p` itself is symmetric.
pub fn induced_metric(p: &ValuedDistance) -> ValuedDistance {
    let inner = p.clone();
    ValuedDistance::new(
        format!("{}^s", p.label()),
        p.shape(),
        Flavor::Metric,
        move |x, y| {
            inner
                .eval(x, x)
                .checked_add(&inner.eval(y, y))
                .and_then(|diag| inner.eval(x, y).scale(2.0).checked_sub(&diag))
                .expect("p returns a fixed shape")
        },
    )
}

type SequenceFn = dyn Fn(usize) -> Point + Send + Sync;

/// A candidate sequence `x_n` with an optional claimed limit.
#[derive(Clone)]
pub struct SequenceProbe {
    generator: Arc<SequenceFn>,
    pub limit: Option<Point>,
}

impl SequenceProbe {
    pub fn new(generator: impl Fn(usize) -> Point + Send + Sync + 'static) -> Self {
        SequenceProbe {
            generator: Arc::new(generator),
            limit: None,
        }
    }

    pub fn with_limit(mut self, limit: impl Into<Point>) -> Self {
        self.limit = Some(limit.into());
        self
    }

    pub fn at(&self, n: usize) -> Point {
        (self.generator)(n)
    }
}

impl fmt::Debug for SequenceProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceProbe")
            .field("limit", &self.limit)
            .finish_non_exhaustive()
    }
}

/// `r r*` with `r = p(x_n, x_m) - p(x_n, x_n)/2 - p(x_m, x_m)/2`. Compare it
/// against `eps^2 I` to test the partial Cauchy condition.
pub fn partial_cauchy_residual(
    probe: &SequenceProbe,
    p: &ValuedDistance,
    n: usize,
    m: usize,
) -> AlgebraElement {
    let (xn, xm) = (probe.at(n), probe.at(m));
    let r = p
        .eval(&xn, &xm)
        .checked_sub(&p.eval(&xn, &xn).scale(0.5))
        .and_then(|v| v.checked_sub(&p.eval(&xm, &xm).scale(0.5)))
        .expect("p returns a fixed shape");
    r.checked_mul(&r.involution())
        .expect("r and r* share a shape")
}

/// Number of consecutive indices the residual must stay under `tol` before
/// the sequence counts as stabilized.
pub const STABILIZATION_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConvergenceStatus {
    /// The residual stays within tolerance from index `from` onwards.
    Converges {
        from: usize,
    },
    /// The residual stalled above tolerance over the tail of the horizon.
    Diverges {
        tail_residual: f64,
    },
    Inconclusive,
}

impl ConvergenceStatus {
    pub fn converges(&self) -> bool {
        matches!(self, ConvergenceStatus::Converges { .. })
    }
}

/// Tests `lim ||p(x_n, x) - p(x, x)|| = 0` along the probe.
///
/// The sequence converges when some `n0 <= horizon` has the residual under
/// `tol` for [`STABILIZATION_WINDOW`] consecutive indices. Without such an
/// index it diverges if the residual over the last quarter of the horizon is
/// above `tol` and has not shrunk by more than 10% against the third quarter;
/// otherwise the result is inconclusive.
pub fn converges_to(
    probe: &SequenceProbe,
    p: &ValuedDistance,
    tol: f64,
    horizon: usize,
) -> Result<ConvergenceStatus> {
    let limit = probe.limit.as_ref().ok_or(Error::MissingLimit)?;
    let self_distance = p.eval(limit, limit);
    let residuals: Vec<f64> = (0..horizon + STABILIZATION_WINDOW)
        .map(|n| {
            p.eval(&probe.at(n), limit)
                .checked_sub(&self_distance)
                .map(|v| v.norm())
        })
        .collect::<Result<_>>()?;

    let mut run = 0;
    for (n, r) in residuals.iter().enumerate() {
        if *r <= tol {
            run += 1;
            if run == STABILIZATION_WINDOW {
                let from = n + 1 - STABILIZATION_WINDOW;
                if from <= horizon {
                    return Ok(ConvergenceStatus::Converges { from });
                }
            }
        } else {
            run = 0;
        }
    }

    let quarter = (residuals.len() / 4).max(1);
    let tail = &residuals[residuals.len() - quarter..];
    let before = &residuals[residuals.len().saturating_sub(2 * quarter)..residuals.len() - quarter];
    let min = |s: &[f64]| s.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_min = min(tail);
    if tail_min > tol && !before.is_empty() && tail_min >= 0.9 * min(before) {
        return Ok(ConvergenceStatus::Diverges {
            tail_residual: tail_min,
        });
    }
    Ok(ConvergenceStatus::Inconclusive)
}

/// Side-by-side Cauchy verdicts for a probe under `p` and under `p^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyComparison {
    pub partial_cauchy: bool,
    pub metric_cauchy: bool,
    pub agree: bool,
    /// Largest `||r r*||` over the tail pairs.
    pub worst_partial_residual: f64,
    /// Largest `||p^s(x_n, x_m)||` over the tail pairs.
    pub worst_metric_distance: f64,
}

/// Evaluates both Cauchy criteria on every pair `n, m` in
/// `[horizon / 2, horizon]`: the partial one as `r r* <= tol^2 I` and the
/// metric one as `||p^s(x_n, x_m)|| <= tol`.
pub fn cauchy_equivalence_probe(
    probe: &SequenceProbe,
    p: &ValuedDistance,
    tol: f64,
    horizon: usize,
) -> CauchyComparison {
    let ps = induced_metric(p);
    let order = OrderTolerance::default();
    let bound = AlgebraElement::unit(p.shape()).scale(tol * tol);
    let mut partial_cauchy = true;
    let mut metric_cauchy = true;
    let mut worst_partial_residual: f64 = 0.0;
    let mut worst_metric_distance: f64 = 0.0;
    for n in horizon / 2..=horizon {
        for m in n..=horizon {
            let residual = partial_cauchy_residual(probe, p, n, m);
            worst_partial_residual = worst_partial_residual.max(residual.norm());
            partial_cauchy &= residual.leq(&bound, order).unwrap_or(false);
            let dist = ps.eval(&probe.at(n), &probe.at(m)).norm();
            worst_metric_distance = worst_metric_distance.max(dist);
            metric_cauchy &= dist <= tol;
        }
    }
    CauchyComparison {
        partial_cauchy,
        metric_cauchy,
        agree: partial_cauchy == metric_cauchy,
        worst_partial_residual,
        worst_metric_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_p() -> ValuedDistance {
        ValuedDistance::new("max", Shape::SCALAR, Flavor::PartialMetric, |x, y| {
            AlgebraElement::Scalar(x.x().max(y.x()))
        })
    }

    fn unit() -> PointDomain {
        PointDomain::interval(0.0, 1.0).unwrap()
    }

    fn halving() -> SequenceProbe {
        SequenceProbe::new(|n| Point::from(0.5f64.powi(n as i32)))
    }

    fn alternating() -> SequenceProbe {
        SequenceProbe::new(|n| Point::from((n % 2) as f64))
    }

    #[test]
    fn domain_validation() {
        assert!(PointDomain::interval(1.0, 0.0).is_err());
        assert!(PointDomain::product(vec![]).is_err());
        let d = PointDomain::cube(-1.0, 1.0, 2).unwrap();
        assert_eq!(d.corners().len(), 4);
        assert!(d.contains(&Point::from([0.5, -1.0])));
        assert!(!d.contains(&Point::from([0.5, -1.5])));
        assert!(!d.contains(&Point::from(0.5)));
    }

    #[test]
    fn samples_stay_in_domain_and_are_seeded() {
        let d = PointDomain::cube(-1.0, 1.0, 2).unwrap();
        let a = d.sample_points(200, 7);
        assert!(a.iter().all(|p| d.contains(p)));
        assert_eq!(a, d.sample_points(200, 7));
        assert_ne!(a, d.sample_points(200, 8));
    }

    #[test]
    fn max_is_a_partial_metric() {
        let r = check_partial_axioms(&max_p(), &unit(), 500, 1, OrderTolerance::default());
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn signed_difference_fails_positivity() {
        let q = ValuedDistance::new("signed", Shape::vector(2), Flavor::Premetric, |x, y| {
            AlgebraElement::Vector(vec![x.x() - y.x(), 0.0])
        });
        let r = check_partial_axioms(&q, &unit(), 500, 1, OrderTolerance::default());
        let w = r.entry("nonnegativity").unwrap().witness.as_ref().unwrap();
        assert!(w.points[0].x() < w.points[1].x());
    }

    #[test]
    fn induced_metric_of_max_is_absolute_difference() {
        let ps = induced_metric(&max_p());
        assert_eq!(ps.flavor(), Flavor::Metric);
        for (s, t) in [(0.2, 0.7), (0.9, 0.1), (0.4, 0.4)] {
            let v = ps
                .eval(&Point::from(s), &Point::from(t))
                .as_scalar()
                .unwrap();
            assert!((v - (s - t).abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn cauchy_residuals() {
        let p = max_p();
        let constant = SequenceProbe::new(|_| Point::from(0.3));
        assert_eq!(
            partial_cauchy_residual(&constant, &p, 2, 9),
            AlgebraElement::Scalar(0.0)
        );

        let r = 0.5 * (0.125 - 0.03125);
        let v = partial_cauchy_residual(&halving(), &p, 3, 5)
            .as_scalar()
            .unwrap();
        assert!((v - r * r).abs() < 1e-15);

        let v = partial_cauchy_residual(&alternating(), &p, 4, 7)
            .as_scalar()
            .unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn convergence_status() {
        let p = max_p();
        assert!(converges_to(&halving().with_limit(0.0), &p, 1e-9, 64)
            .unwrap()
            .converges());
        let constant = SequenceProbe::new(|_| Point::from(0.3)).with_limit(0.3);
        assert_eq!(
            converges_to(&constant, &p, 1e-9, 64).unwrap(),
            ConvergenceStatus::Converges { from: 0 }
        );
        // max{2^-n, 1/2} = 1/2 = p(1/2, 1/2) once n >= 1: limits are not unique
        assert_eq!(
            converges_to(&halving().with_limit(0.5), &p, 1e-9, 64).unwrap(),
            ConvergenceStatus::Converges { from: 1 }
        );
        let shifted =
            SequenceProbe::new(|n| Point::from(0.5 + 0.5f64.powi(n as i32 + 1))).with_limit(0.0);
        match converges_to(&shifted, &p, 1e-9, 64).unwrap() {
            ConvergenceStatus::Diverges { tail_residual } => {
                assert!((tail_residual - 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            converges_to(&halving(), &p, 1e-9, 64),
            Err(Error::MissingLimit)
        );
    }

    #[test]
    fn slow_sequences_are_inconclusive() {
        // residual 1/(n+1) is still shrinking steadily at the horizon
        let slow = SequenceProbe::new(|n| Point::from(1.0 / (n as f64 + 1.0))).with_limit(0.0);
        assert_eq!(
            converges_to(&slow, &max_p(), 1e-9, 100).unwrap(),
            ConvergenceStatus::Inconclusive
        );
    }

    #[test]
    fn cauchy_criteria_agree() {
        let p = max_p();
        let c = cauchy_equivalence_probe(&halving(), &p, 1e-6, 64);
        assert!(c.partial_cauchy && c.metric_cauchy && c.agree);
        let c = cauchy_equivalence_probe(&alternating(), &p, 1e-6, 64);
        assert!(!c.partial_cauchy && !c.metric_cauchy && c.agree);
        assert_eq!(c.worst_partial_residual, 0.25);
        let constant = SequenceProbe::new(|_| Point::from(0.8));
        assert!(cauchy_equivalence_probe(&constant, &p, 1e-6, 64).partial_cauchy);
    }
}
