//! F-functions, phi functions, operators and the six contraction families.
//!
//! Every family compares two algebra elements built from
//! `F(d(a, b), phi(a), phi(b))` terms. [`contraction_sides`] computes the two
//! sides for one sample and [`verify_contraction`] sweeps it over seeded
//! samples of the domain.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Kind, OrderTolerance, Shape, C64};
use crate::error::{Error, Result};
use crate::report::{first_failure, AxiomEntry, AxiomReport, Verdict, Witness};
use crate::spaces::{Point, PointDomain, ValuedDistance};

type TernaryFn = dyn Fn(&AlgebraElement, &AlgebraElement, &AlgebraElement) -> Result<AlgebraElement>
    + Send
    + Sync;

/// A map `A+^3 -> A+` used to combine a distance with two phi values.
#[derive(Clone)]
pub struct FFunction {
    label: String,
    eval: Arc<TernaryFn>,
}

impl FFunction {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&AlgebraElement, &AlgebraElement, &AlgebraElement) -> Result<AlgebraElement>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        FFunction {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    /// `F(a, b, c) = a + b + c`.
    pub fn sum() -> Self {
        FFunction::new("sum", |a, b, c| a.checked_add(b)?.checked_add(c))
    }

    /// `F(a, b, c) = a^2 + b + c`.
    pub fn square_plus() -> Self {
        FFunction::new("square_plus", |a, b, c| {
            a.checked_mul(a)?.checked_add(b)?.checked_add(c)
        })
    }

    pub fn eval(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
        c: &AlgebraElement,
    ) -> Result<AlgebraElement> {
        (self.eval)(a, b, c)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for FFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FFunction")
            .field("label", &self.label)
            .finish()
    }
}

type PointToElement = dyn Fn(&Point) -> AlgebraElement + Send + Sync;

/// `phi: X -> A+`. Lower semicontinuity cannot be checked by sampling, so it
/// is carried as a declared assumption.
#[derive(Clone)]
pub struct PhiFunction {
    label: String,
    lsc_assumed: bool,
    eval: Arc<PointToElement>,
}

impl PhiFunction {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&Point) -> AlgebraElement + Send + Sync + 'static,
    ) -> Self {
        PhiFunction {
            label: label.into(),
            lsc_assumed: true,
            eval: Arc::new(eval),
        }
    }

    /// `phi = theta`, which turns every family into its classical form.
    pub fn zero(shape: Shape) -> Self {
        PhiFunction::new("zero", move |_| AlgebraElement::zero(shape))
    }

    pub fn eval(&self, x: &Point) -> AlgebraElement {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lsc_assumed(&self) -> bool {
        self.lsc_assumed
    }

    /// Zero test used for `Z_phi`: `||phi(x)|| <= tol`.
    pub fn vanishes_at(&self, x: &Point, tol: f64) -> bool {
        self.eval(x).norm() <= tol
    }
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("label", &self.label)
            .field("lsc_assumed", &self.lsc_assumed)
            .finish()
    }
}

type PointMap = dyn Fn(&Point) -> Point + Send + Sync;

/// An operator `T: X -> X`.
#[derive(Clone)]
pub struct OperatorSpec {
    label: String,
    map: Arc<PointMap>,
}

impl OperatorSpec {
    pub fn new(
        label: impl Into<String>,
        map: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        OperatorSpec {
            label: label.into(),
            map: Arc::new(map),
        }
    }

    /// Coordinatewise `x -> factor * x`.
    pub fn scaling(label: impl Into<String>, factor: f64) -> Self {
        OperatorSpec::new(label, move |x| x.map(|c| factor * c))
    }

    pub fn identity() -> Self {
        OperatorSpec::new("identity", |x| x.clone())
    }

    pub fn apply(&self, x: &Point) -> Point {
        (self.map)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("label", &self.label)
            .finish()
    }
}

/// A contraction family with its constants.
///
/// Parses from text such as `{"family":"kannan","k":0.333}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ContractionSpec {
    /// `F(d(Tx,Ty), phi(Tx), phi(Ty)) <= k F(d(x,y), phi(x), phi(y))`.
    FPhi {
        k: f64,
    },
    /// The single-point condition along the graph of `T`.
    Graphic {
        k: f64,
    },
    Weak {
        k: f64,
        alpha: f64,
    },
    Kannan {
        k: f64,
    },
    Reich {
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Chatterjea {
        k: f64,
    },
}

impl ContractionSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConstants(format!(
                    "{name} = {v} is not finite"
                )))
            }
        };
        let open = |name: &str, v: f64, lo: f64, hi: f64| -> Result<()> {
            finite(name, v)?;
            if lo < v && v < hi {
                Ok(())
            } else {
                Err(Error::InvalidConstants(format!(
                    "{name} = {v} must lie in ({lo}, {hi})"
                )))
            }
        };
        let nonneg = |name: &str, v: f64| -> Result<()> {
            finite(name, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConstants(format!(
                    "{name} = {v} must be nonnegative"
                )))
            }
        };
        match *self {
            ContractionSpec::FPhi { k } | ContractionSpec::Graphic { k } => open("k", k, 0.0, 1.0),
            ContractionSpec::Weak { k, alpha } => {
                open("k", k, 0.0, 1.0)?;
                nonneg("alpha", alpha)
            }
            ContractionSpec::Kannan { k } | ContractionSpec::Chatterjea { k } => {
                open("k", k, 0.0, 0.5)
            }
            ContractionSpec::Reich { alpha, beta, gamma } => {
                nonneg("alpha", alpha)?;
                nonneg("beta", beta)?;
                nonneg("gamma", gamma)?;
                let total = alpha + beta + gamma;
                if total < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConstants(format!(
                        "alpha + beta + gamma = {total} must be below 1"
                    )))
                }
            }
        }
    }

    /// Per-step contraction factor of the iterated `F` terms: `k`, or
    /// `k / (1 - k)` for Kannan, or `(alpha + gamma) / (1 - beta)` for Reich.
    pub fn effective_rate(&self) -> f64 {
        match *self {
            ContractionSpec::FPhi { k }
            | ContractionSpec::Graphic { k }
            | ContractionSpec::Weak { k, .. }
            | ContractionSpec::Chatterjea { k } => k,
            ContractionSpec::Kannan { k } => k / (1.0 - k),
            ContractionSpec::Reich { alpha, beta, gamma } => (alpha + gamma) / (1.0 - beta),
        }
    }

    pub fn inequality_id(&self) -> &'static str {
        match self {
            ContractionSpec::FPhi { .. } => "f_phi_contraction",
            ContractionSpec::Graphic { .. } => "graphic_f_phi_contraction",
            ContractionSpec::Weak { .. } => "f_phi_weak_contraction",
            ContractionSpec::Kannan { .. } => "kannan_f_phi",
            ContractionSpec::Reich { .. } => "reich_f_phi",
            ContractionSpec::Chatterjea { .. } => "chatterjea_f_phi",
        }
    }

    /// Whether the family constrains single points rather than pairs.
    pub fn is_graphic(&self) -> bool {
        matches!(self, ContractionSpec::Graphic { .. })
    }
}

/// The pieces every contraction inequality is built from.
#[derive(Debug, Clone)]
pub struct ContractionSetup<'a> {
    pub operator: &'a OperatorSpec,
    pub distance: &'a ValuedDistance,
    pub phi: &'a PhiFunction,
    pub f: &'a FFunction,
}

impl ContractionSetup<'_> {
    /// `F(d(a, b), phi(a), phi(b))`.
    pub fn combined(&self, a: &Point, b: &Point) -> Result<AlgebraElement> {
        self.f.eval(
            &self.distance.eval(a, b),
            &self.phi.eval(a),
            &self.phi.eval(b),
        )
    }

    /// `F(theta, phi(a), phi(b))`.
    fn combined_at_zero(&self, a: &Point, b: &Point) -> Result<AlgebraElement> {
        self.f
            .eval(&self.distance.zero(), &self.phi.eval(a), &self.phi.eval(b))
    }
}

/// Left and right side of the family's inequality at `(x, y)`. Graphic
/// contractions ignore `y`.
pub fn contraction_sides(
    spec: &ContractionSpec,
    s: &ContractionSetup<'_>,
    x: &Point,
    y: &Point,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let t = s.operator;
    let (tx, ty) = (t.apply(x), t.apply(y));
    if let ContractionSpec::Graphic { k } = *spec {
        let ttx = t.apply(&tx);
        return Ok((s.combined(&ttx, &tx)?, s.combined(&tx, x)?.scale(k)));
    }
    let lhs = s.combined(&tx, &ty)?;
    let rhs = match *spec {
        ContractionSpec::FPhi { k } => s.combined(x, y)?.scale(k),
        ContractionSpec::Weak { k, alpha } => {
            let correction = s
                .combined(y, &tx)?
                .checked_sub(&s.combined_at_zero(y, &tx)?)?;
            s.combined(x, y)?
                .scale(k)
                .checked_add(&correction.scale(alpha))?
        }
        ContractionSpec::Kannan { k } => s
            .combined(&tx, x)?
            .checked_add(&s.combined(&ty, y)?)?
            .scale(k),
        ContractionSpec::Reich { alpha, beta, gamma } => s
            .combined(x, y)?
            .scale(alpha)
            .checked_add(&s.combined(x, &tx)?.scale(beta))?
            .checked_add(&s.combined(y, &ty)?.scale(gamma))?,
        ContractionSpec::Chatterjea { k } => s
            .combined(x, &ty)?
            .checked_sub(&s.combined_at_zero(x, &ty)?)?
            .checked_add(&s.combined(y, &tx)?)?
            .scale(k),
        ContractionSpec::Graphic { .. } => unreachable!(),
    };
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Inequality,
    DomainEscape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub inequality: String,
    pub spec: ContractionSpec,
    pub seed: u64,
    pub sample_count: usize,
    /// Largest `||rhs - lhs||` seen.
    pub max_slack_norm: f64,
    /// Smallest eigenvalue of `rhs - lhs` seen; within rounding of zero when
    /// the inequality is tight somewhere.
    pub min_margin: f64,
    pub lsc_assumed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub inequality: String,
    pub spec: ContractionSpec,
    pub seed: u64,
    pub sample_index: usize,
    pub kind: ViolationKind,
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<AlgebraElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<AlgebraElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verification {
    Certificate(ContractionCertificate),
    Counterexample(Counterexample),
}

impl Verification {
    pub fn is_certificate(&self) -> bool {
        matches!(self, Verification::Certificate(_))
    }

    pub fn certificate(&self) -> Option<&ContractionCertificate> {
        match self {
            Verification::Certificate(c) => Some(c),
            Verification::Counterexample(_) => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verification::Counterexample(c) => Some(c),
            Verification::Certificate(_) => None,
        }
    }
}

/// Outcome of one sample, before the deterministic reduction.
pub(crate) enum SampleOutcome {
    Holds {
        slack_norm: f64,
        margin: f64,
    },
    Violated {
        lhs: AlgebraElement,
        rhs: AlgebraElement,
    },
    Escaped,
}

pub(crate) fn judge(
    lhs: AlgebraElement,
    rhs: AlgebraElement,
    tol: OrderTolerance,
) -> Result<SampleOutcome> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Ok(SampleOutcome::Violated { lhs, rhs });
    }
    if lhs.leq(&rhs, tol)? {
        let margin = lhs.order_margin(&rhs, tol)?.unwrap_or(f64::NAN);
        let slack_norm = rhs.checked_sub(&lhs)?.norm();
        Ok(SampleOutcome::Holds { slack_norm, margin })
    } else {
        Ok(SampleOutcome::Violated { lhs, rhs })
    }
}

/// Deterministic reduction of per-sample outcomes: lowest failing index wins,
/// otherwise the extreme slack values are reported.
pub(crate) fn reduce_outcomes(
    outcomes: Vec<Result<SampleOutcome>>,
    samples: &[Vec<Point>],
    spec: ContractionSpec,
    inequality: &str,
    seed: u64,
    lsc_assumed: bool,
) -> Result<Verification> {
    let mut max_slack_norm: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let (kind, lhs, rhs) = match outcome? {
            SampleOutcome::Holds { slack_norm, margin } => {
                max_slack_norm = max_slack_norm.max(slack_norm);
                min_margin = min_margin.min(margin);
                continue;
            }
            SampleOutcome::Violated { lhs, rhs } => {
                (ViolationKind::Inequality, Some(lhs), Some(rhs))
            }
            SampleOutcome::Escaped => (ViolationKind::DomainEscape, None, None),
        };
        return Ok(Verification::Counterexample(Counterexample {
            inequality: inequality.to_string(),
            spec,
            seed,
            sample_index: i,
            kind,
            points: samples[i].clone(),
            lhs,
            rhs,
        }));
    }
    let sample_count = samples.len();
    Ok(Verification::Certificate(ContractionCertificate {
        inequality: inequality.to_string(),
        spec,
        seed,
        sample_count,
        max_slack_norm,
        min_margin: if sample_count == 0 { 0.0 } else { min_margin },
        lsc_assumed,
        note: format!("no counterexample in {sample_count} samples"),
    }))
}

/// Fraction of the domain diameter used for near-orbit pairs.
const NEAR_ORBIT_RADIUS: f64 = 0.05;

/// Samples for a family: single points for graphic contractions, pairs
/// otherwise. Weak contractions draw half of their pairs with `y` near `Tx`,
/// where the correction term is smallest.
pub(crate) fn contraction_samples(
    spec: &ContractionSpec,
    operator: &OperatorSpec,
    domain: &PointDomain,
    sample_count: usize,
    seed: u64,
) -> Vec<Vec<Point>> {
    if spec.is_graphic() {
        return domain
            .sample_points(sample_count, seed)
            .into_iter()
            .map(|x| vec![x])
            .collect();
    }
    let uniform_count = match spec {
        ContractionSpec::Weak { .. } => sample_count - sample_count / 2,
        _ => sample_count,
    };
    let mut out: Vec<Vec<Point>> = domain
        .sample_pairs(uniform_count, seed)
        .into_iter()
        .map(|(x, y)| vec![x, y])
        .collect();
    if out.len() < sample_count {
        let diameter = domain
            .bounds()
            .iter()
            .fold(0.0f64, |m, (lo, hi)| m.max(hi - lo));
        let mut s = domain.sampler(seed ^ 0x9e37_79b9_7f4a_7c15);
        while out.len() < sample_count {
            let x = s.point();
            let tx = domain.clamp(&operator.apply(&x));
            let y = s.near(&tx, NEAR_ORBIT_RADIUS * diameter);
            out.push(vec![x, y]);
        }
    }
    out
}

/// Sweeps the family's inequality over seeded samples of `domain`.
///
/// Constants are validated before any sampling. Each sample also checks that
/// `T` keeps the sampled points inside the domain.
#[allow(clippy::too_many_arguments)]
pub fn verify_contraction(
    spec: &ContractionSpec,
    operator: &OperatorSpec,
    distance: &ValuedDistance,
    phi: &PhiFunction,
    f: &FFunction,
    domain: &PointDomain,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> Result<Verification> {
    spec.validate()?;
    let setup = ContractionSetup {
        operator,
        distance,
        phi,
        f,
    };
    let samples = contraction_samples(spec, operator, domain, sample_count, seed);
    let outcomes = crate::par_map(&samples, |pts| {
        let x = &pts[0];
        let y = pts.get(1).unwrap_or(x);
        let tx = operator.apply(x);
        let mut images = vec![tx.clone(), operator.apply(y)];
        if spec.is_graphic() {
            images.push(operator.apply(&tx));
        }
        if images.iter().any(|p| !domain.contains(p)) {
            return Ok(SampleOutcome::Escaped);
        }
        let (lhs, rhs) = contraction_sides(spec, &setup, x, y)?;
        judge(lhs, rhs, tol)
    });
    reduce_outcomes(
        outcomes,
        &samples,
        *spec,
        spec.inequality_id(),
        seed,
        phi.lsc_assumed(),
    )
}

/// Scalar multiples of the unit probed before the random triples, so that
/// the classic failure of `x <= x^2` below the unit shows up first.
const ANCHOR_SCALES: [f64; 3] = [0.5, 1.0, 2.0];

/// A random positive element with norm spread over several decades.
pub fn random_positive(shape: Shape, rng: &mut impl Rng) -> AlgebraElement {
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    match shape.kind {
        Kind::Scalar => AlgebraElement::Scalar(scale * rng.random_range(0.0..1.0)),
        Kind::Vector => AlgebraElement::Vector(
            (0..shape.n)
                .map(|_| scale * rng.random_range(0.0..1.0))
                .collect(),
        ),
        Kind::Matrix => {
            let n = shape.n;
            let g = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let gram = &g * g.adjoint();
            let norm = AlgebraElement::Matrix(gram.clone())
                .norm()
                .max(f64::MIN_POSITIVE);
            let m = gram.map(|z| z * (scale / norm));
            AlgebraElement::Matrix((&m + m.adjoint()).map(|z| z * 0.5))
        }
    }
}

/// Positive triples: all-theta, then `c I` in each slot, then random.
pub fn positive_triples(shape: Shape, count: usize, seed: u64) -> Vec<[AlgebraElement; 3]> {
    let theta = AlgebraElement::zero(shape);
    let unit = AlgebraElement::unit(shape);
    let mut out = vec![[theta.clone(), theta.clone(), theta.clone()]];
    for c in ANCHOR_SCALES {
        for slot in 0..3 {
            let mut t = [theta.clone(), theta.clone(), theta.clone()];
            t[slot] = unit.scale(c);
            out.push(t);
        }
    }
    out.truncate(count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        out.push([
            random_positive(shape, &mut rng),
            random_positive(shape, &mut rng),
            random_positive(shape, &mut rng),
        ]);
    }
    out
}

const CONTINUITY_STEPS: [f64; 2] = [1e-4, 1e-5];
const CONTINUITY_SAMPLES: usize = 1000;

/// Checks (F1) as the pair `x <= F(x, y, z)` and `y <= F(x, y, z)`, (F2) as
/// `F(theta, theta, theta) = theta`, and (F3) by perturbing inputs at two
/// step sizes: the output change must shrink with the step. The entry for
/// (F3) carries the largest observed difference quotient as `measure`.
pub fn check_f_axioms(
    f: &FFunction,
    shape: Shape,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> AxiomReport {
    let mut report = AxiomReport::new(f.label(), seed, sample_count);
    let triples = positive_triples(shape, sample_count, seed);

    let w = first_failure(&triples, |[x, y, z]| {
        let out = match f.eval(x, y, z) {
            Ok(v) => v,
            Err(e) => {
                return Some(f_witness(
                    [x, y, z],
                    AlgebraElement::zero(shape),
                    &e.to_string(),
                ))
            }
        };
        for (which, arg) in [("x", x), ("y", y)] {
            if !arg.leq(&out, tol).unwrap_or(false) {
                let gap = out.checked_sub(arg).unwrap_or_else(|_| out.clone());
                return Some(f_witness(
                    [x, y, z],
                    gap,
                    &format!("{which} is not below F(x, y, z); element is F - {which}"),
                ));
            }
        }
        None
    });
    report.push("F1_upper_bound", triples.len(), w.map(|(_, w)| w));

    let theta = AlgebraElement::zero(shape);
    let w = match f.eval(&theta, &theta, &theta) {
        Ok(v) if v.norm() <= tol.slack(0.0) => None,
        Ok(v) => Some(f_witness(
            [&theta, &theta, &theta],
            v,
            "F(theta, theta, theta) differs from theta",
        )),
        Err(e) => Some(f_witness(
            [&theta, &theta, &theta],
            theta.clone(),
            &e.to_string(),
        )),
    };
    report.push("F2_vanishes_at_zero", 1, w);

    report
        .entries
        .push(continuity_entry(f, shape, &triples, seed, tol));
    report
}

fn continuity_entry(
    f: &FFunction,
    shape: Shape,
    triples: &[[AlgebraElement; 3]],
    seed: u64,
    tol: OrderTolerance,
) -> AxiomEntry {
    let used = &triples[..triples.len().min(CONTINUITY_SAMPLES)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let directions: Vec<AlgebraElement> = used
        .iter()
        .map(|_| {
            let e = random_positive(shape, &mut rng);
            let n = e.norm();
            if n > 0.0 {
                e.scale(1.0 / n)
            } else {
                AlgebraElement::unit(shape)
            }
        })
        .collect();
    let indexed: Vec<usize> = (0..used.len()).collect();
    let results = crate::par_map(&indexed, |&i| {
        let [x, y, z] = &used[i];
        let base = f.eval(x, y, z)?;
        let mut changes = [0.0; 2];
        for (slot, step) in CONTINUITY_STEPS.iter().enumerate() {
            let e = directions[i].scale(*step);
            let moved = f.eval(
                &x.checked_add(&e)?,
                &y.checked_add(&e)?,
                &z.checked_add(&e)?,
            )?;
            changes[slot] = moved.checked_sub(&base)?.norm();
        }
        Ok::<_, Error>((base.norm(), changes))
    });
    let mut modulus: f64 = 0.0;
    let mut witness = None;
    for (i, r) in results.into_iter().enumerate() {
        let [x, y, z] = &used[i];
        let (base_norm, [coarse, fine]) = match r {
            Ok(v) => v,
            Err(e) => {
                witness = Some(f_witness(
                    [x, y, z],
                    AlgebraElement::zero(shape),
                    &e.to_string(),
                ));
                break;
            }
        };
        modulus = modulus.max(coarse / CONTINUITY_STEPS[0]);
        let floor = tol.slack(base_norm) * 1e-3;
        if !(coarse.is_finite() && fine.is_finite()) || fine > 0.5 * coarse + floor {
            witness = Some(f_witness(
                [x, y, z],
                directions[i].clone(),
                &format!("output change {fine:e} at step 1e-5 did not shrink from {coarse:e} at step 1e-4"),
            ));
            break;
        }
    }
    AxiomEntry {
        axiom: "F3_continuity".into(),
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        samples_used: used.len(),
        witness,
        measure: Some(modulus),
    }
}

fn f_witness(inputs: [&AlgebraElement; 3], element: AlgebraElement, detail: &str) -> Witness {
    Witness {
        points: Vec::new(),
        inputs: inputs.iter().map(|a| (*a).clone()).collect(),
        element,
        detail: detail.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Flavor;

    fn tol() -> OrderTolerance {
        OrderTolerance::default()
    }

    #[test]
    fn rates() {
        assert!((ContractionSpec::Kannan { k: 1.0 / 3.0 }.effective_rate() - 0.5).abs() < 1e-15);
        let reich = ContractionSpec::Reich {
            alpha: 0.2,
            beta: 0.3,
            gamma: 0.1,
        };
        assert!((reich.effective_rate() - 0.3 / 0.7).abs() < 1e-15);
        assert_eq!(ContractionSpec::FPhi { k: 0.5 }.effective_rate(), 0.5);
    }

    #[test]
    fn constant_ranges() {
        assert!(ContractionSpec::Kannan { k: 0.6 }.validate().is_err());
        assert!(ContractionSpec::Kannan { k: 0.5 }.validate().is_err());
        assert!(ContractionSpec::Chatterjea { k: 0.4 }.validate().is_ok());
        assert!(ContractionSpec::FPhi { k: 1.0 }.validate().is_err());
        assert!(ContractionSpec::FPhi { k: 0.0 }.validate().is_err());
        assert!(ContractionSpec::Weak {
            k: 0.5,
            alpha: -1.0
        }
        .validate()
        .is_err());
        assert!(ContractionSpec::Weak { k: 0.5, alpha: 0.0 }
            .validate()
            .is_ok());
        assert!(ContractionSpec::Reich {
            alpha: 0.5,
            beta: 0.3,
            gamma: 0.2
        }
        .validate()
        .is_err());
        assert!(ContractionSpec::Reich {
            alpha: 0.5,
            beta: -0.1,
            gamma: 0.2
        }
        .validate()
        .is_err());
        assert!(ContractionSpec::Graphic { k: f64::NAN }.validate().is_err());
    }

    #[test]
    fn spec_text_form() {
        let s: ContractionSpec = serde_json::from_str(r#"{"family":"kannan","k":0.333}"#).unwrap();
        assert_eq!(s, ContractionSpec::Kannan { k: 0.333 });
        let s: ContractionSpec = serde_json::from_str(r#"{"family":"fphi","k":0.5}"#).unwrap();
        assert_eq!(s, ContractionSpec::FPhi { k: 0.5 });
        assert_eq!(
            serde_json::to_string(&ContractionSpec::Weak { k: 0.5, alpha: 4.0 }).unwrap(),
            r#"{"family":"weak","k":0.5,"alpha":4.0}"#
        );
    }

    #[test]
    fn f_axioms_for_sum() {
        let r = check_f_axioms(&FFunction::sum(), Shape::vector(2), 500, 3, tol());
        assert!(r.all_pass(), "{r:?}");
        let zero = AlgebraElement::zero(Shape::vector(2));
        assert_eq!(FFunction::sum().eval(&zero, &zero, &zero).unwrap(), zero);
    }

    #[test]
    fn square_plus_breaks_upper_bound() {
        let r = check_f_axioms(&FFunction::square_plus(), Shape::matrix(2), 500, 3, tol());
        let e = r.entry("F1_upper_bound").unwrap();
        assert_eq!(e.verdict, Verdict::Fail);
        let w = e.witness.as_ref().unwrap();
        assert_eq!(w.inputs[0], AlgebraElement::diag(&[0.5, 0.5]));
        assert_eq!(w.inputs[1], AlgebraElement::zero(Shape::matrix(2)));
        assert_eq!(r.verdict("F2_vanishes_at_zero"), Some(Verdict::Pass));
        assert_eq!(r.verdict("F3_continuity"), Some(Verdict::Pass));
    }

    #[test]
    fn discontinuous_f_is_caught() {
        // a jump at the origin in every slot
        let f = FFunction::new("step", |a, b, c| {
            let s = a.checked_add(b)?.checked_add(c)?;
            Ok(if s.norm() > 0.0 {
                s.checked_add(&AlgebraElement::unit(s.shape()))?
            } else {
                s
            })
        });
        let r = check_f_axioms(&f, Shape::SCALAR, 50, 1, tol());
        assert_eq!(r.verdict("F3_continuity"), Some(Verdict::Fail));
    }

    #[test]
    fn kannan_on_the_line() {
        let d = ValuedDistance::new("abs", Shape::SCALAR, Flavor::Metric, |x, y| {
            AlgebraElement::Scalar((x.x() - y.x()).abs())
        });
        let t = OperatorSpec::scaling("quarter", 0.25);
        let phi = PhiFunction::zero(Shape::SCALAR);
        let domain = PointDomain::interval(0.0, 1.0).unwrap();
        let spec = ContractionSpec::Kannan { k: 1.0 / 3.0 };
        let v = verify_contraction(
            &spec,
            &t,
            &d,
            &phi,
            &FFunction::sum(),
            &domain,
            2000,
            5,
            tol(),
        )
        .unwrap();
        assert!(v.is_certificate(), "{v:?}");
    }

    #[test]
    fn invalid_constants_fail_before_sampling() {
        let d = ValuedDistance::new("abs", Shape::SCALAR, Flavor::Metric, |_, _| {
            panic!("sampled")
        });
        let domain = PointDomain::interval(0.0, 1.0).unwrap();
        let r = verify_contraction(
            &ContractionSpec::Kannan { k: 0.6 },
            &OperatorSpec::identity(),
            &d,
            &PhiFunction::zero(Shape::SCALAR),
            &FFunction::sum(),
            &domain,
            10,
            0,
            tol(),
        );
        assert!(matches!(r, Err(Error::InvalidConstants(_))));
    }

    #[test]
    fn escaping_operator_is_reported() {
        let d = ValuedDistance::new("abs", Shape::SCALAR, Flavor::Metric, |x, y| {
            AlgebraElement::Scalar((x.x() - y.x()).abs())
        });
        let domain = PointDomain::interval(0.0, 1.0).unwrap();
        let v = verify_contraction(
            &ContractionSpec::FPhi { k: 0.5 },
            &OperatorSpec::new("shift", |x| x.map(|c| c * 0.5 + 0.6)),
            &d,
            &PhiFunction::zero(Shape::SCALAR),
            &FFunction::sum(),
            &domain,
            100,
            0,
            tol(),
        )
        .unwrap();
        assert_eq!(
            v.counterexample().unwrap().kind,
            ViolationKind::DomainEscape
        );
    }

    #[test]
    fn random_positive_elements_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for shape in [Shape::SCALAR, Shape::vector(3), Shape::matrix(4)] {
            for _ in 0..50 {
                assert!(random_positive(shape, &mut rng).is_positive(tol()));
            }
        }
    }
}
