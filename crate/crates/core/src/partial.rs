//! Fixed-point problems stated directly on a partial metric space.
//!
//! A problem in `p` is reduced to the metric setting by taking
//! `d = p^s`, `phi(x) = p(x, x)` and `F(a, b, c) = a + b + c`. With these
//! choices `F(d(x, y), phi(x), phi(y)) = 2 p(x, y)`, so the reduced
//! inequalities are the partial-metric hypotheses scaled by two. The one
//! exception is the Chatterjea family, whose reduced right-hand side is
//! smaller by `k (p(x, x) + p(Ty, Ty))`.
//!
//! Hypotheses are checked in `p` itself; [`reduction_consistency`] ties the
//! two views together sample by sample.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, OrderTolerance};
use crate::contractions::{
    contraction_samples, contraction_sides, judge, reduce_outcomes, ContractionSetup,
    ContractionSpec, FFunction, OperatorSpec, PhiFunction, Verification,
};
use crate::error::Result;
use crate::solver::{picard_solve, ConvergenceCertificate, FixedPointProblem, SolveConfig};
use crate::spaces::{induced_metric, Point, PointDomain, ValuedDistance};

/// Which corollary hypothesis a partial problem claims, with its constants.
///
/// Tagged by `corollary`, e.g. `{"corollary":"banach","k":0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "corollary", rename_all = "lowercase")]
pub enum Corollary {
    /// `p(Tx, Ty) <= k p(x, y)`.
    Banach { k: f64 },
    /// `p(T^2 x, Tx) <= k p(Tx, x)`.
    Graphic { k: f64 },
    /// `p(Tx, Ty) <= k p(x, y) + alpha (p(y, Tx) - (p(y, y) + p(Tx, Tx)) / 2)`.
    Weak { k: f64, alpha: f64 },
    /// `p(Tx, Ty) <= k (p(x, Tx) + p(y, Ty))`.
    Kannan { k: f64 },
    /// `p(Tx, Ty) <= alpha p(x, y) + beta p(x, Tx) + gamma p(y, Ty)`.
    Reich { alpha: f64, beta: f64, gamma: f64 },
    /// `p(Tx, Ty) <= k (p(x, Ty) + p(y, Tx))`.
    Chatterjea { k: f64 },
}

impl Corollary {
    /// The contraction family the corollary reduces to; constants carry over
    /// unchanged.
    pub fn contraction_spec(&self) -> ContractionSpec {
        match *self {
            Corollary::Banach { k } => ContractionSpec::FPhi { k },
            Corollary::Graphic { k } => ContractionSpec::Graphic { k },
            Corollary::Weak { k, alpha } => ContractionSpec::Weak { k, alpha },
            Corollary::Kannan { k } => ContractionSpec::Kannan { k },
            Corollary::Reich { alpha, beta, gamma } => {
                ContractionSpec::Reich { alpha, beta, gamma }
            }
            Corollary::Chatterjea { k } => ContractionSpec::Chatterjea { k },
        }
    }

    pub fn hypothesis_id(&self) -> &'static str {
        match self {
            Corollary::Banach { .. } => "partial_banach",
            Corollary::Graphic { .. } => "partial_graphic",
            Corollary::Weak { .. } => "partial_weak",
            Corollary::Kannan { .. } => "partial_kannan",
            Corollary::Reich { .. } => "partial_reich",
            Corollary::Chatterjea { .. } => "partial_chatterjea",
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.contraction_spec().validate()
    }
}

#[derive(Debug, Clone)]
pub struct PartialProblem {
    pub p: ValuedDistance,
    pub operator: OperatorSpec,
    pub corollary: Corollary,
    pub domain: PointDomain,
}

/// `phi(x) = p(x, x)`.
pub fn self_distance_phi(p: &ValuedDistance) -> PhiFunction {
    let inner = p.clone();
    PhiFunction::new(format!("{}(x, x)", p.label()), move |x| inner.eval(x, x))
}

/// The metric-space problem `(p^s, p(x, x), sum, family)`.
pub fn reduce(problem: &PartialProblem) -> FixedPointProblem {
    FixedPointProblem {
        operator: problem.operator.clone(),
        distance: induced_metric(&problem.p),
        phi: self_distance_phi(&problem.p),
        f: FFunction::sum(),
        spec: problem.corollary.contraction_spec(),
        domain: problem.domain.clone(),
    }
}

/// Both sides of the corollary inequality, evaluated in `p`.
pub fn corollary_sides(
    corollary: &Corollary,
    p: &ValuedDistance,
    operator: &OperatorSpec,
    x: &Point,
    y: &Point,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let (tx, ty) = (operator.apply(x), operator.apply(y));
    if let Corollary::Graphic { k } = *corollary {
        let ttx = operator.apply(&tx);
        return Ok((p.eval(&ttx, &tx), p.eval(&tx, x).scale(k)));
    }
    let lhs = p.eval(&tx, &ty);
    let rhs = match *corollary {
        Corollary::Banach { k } => p.eval(x, y).scale(k),
        Corollary::Weak { k, alpha } => {
            let mean_self = p.eval(y, y).checked_add(&p.eval(&tx, &tx))?.scale(0.5);
            let correction = p.eval(y, &tx).checked_sub(&mean_self)?;
            p.eval(x, y)
                .scale(k)
                .checked_add(&correction.scale(alpha))?
        }
        Corollary::Kannan { k } => p.eval(x, &tx).checked_add(&p.eval(y, &ty))?.scale(k),
        Corollary::Reich { alpha, beta, gamma } => p
            .eval(x, y)
            .scale(alpha)
            .checked_add(&p.eval(x, &tx).scale(beta))?
            .checked_add(&p.eval(y, &ty).scale(gamma))?,
        Corollary::Chatterjea { k } => p.eval(x, &ty).checked_add(&p.eval(y, &tx))?.scale(k),
        Corollary::Graphic { .. } => unreachable!(),
    };
    Ok((lhs, rhs))
}

/// Samples the corollary hypothesis in `p` (not through the reduction).
pub fn verify_corollary_hypothesis(
    problem: &PartialProblem,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> Result<Verification> {
    problem.corollary.validate()?;
    let spec = problem.corollary.contraction_spec();
    let samples = contraction_samples(
        &spec,
        &problem.operator,
        &problem.domain,
        sample_count,
        seed,
    );
    let outcomes = crate::par_map(&samples, |pts| {
        let x = &pts[0];
        let y = pts.get(1).unwrap_or(x);
        let tx = problem.operator.apply(x);
        let mut images = vec![tx.clone(), problem.operator.apply(y)];
        if spec.is_graphic() {
            images.push(problem.operator.apply(&tx));
        }
        if images.iter().any(|p| !problem.domain.contains(p)) {
            return Ok(crate::contractions::SampleOutcome::Escaped);
        }
        let (lhs, rhs) = corollary_sides(&problem.corollary, &problem.p, &problem.operator, x, y)?;
        judge(lhs, rhs, tol)
    });
    reduce_outcomes(
        outcomes,
        &samples,
        spec,
        problem.corollary.hypothesis_id(),
        seed,
        true,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub samples: usize,
    /// Samples on which the corollary and the reduced family give the same
    /// verdict.
    pub verdicts_agree: usize,
    /// `max ||lhs_reduced - 2 lhs_p||`.
    pub max_lhs_identity_error: f64,
    /// `max ||rhs_reduced - (2 rhs_p - c)||` with `c` the Chatterjea
    /// correction (zero for the other families).
    pub max_rhs_identity_error: f64,
}

impl ConsistencyReport {
    pub fn all_agree(&self) -> bool {
        self.verdicts_agree == self.samples
    }
}

/// Evaluates the corollary in `p` and the reduced family in `p^s` on the
/// same samples and measures the algebraic identity that links them.
pub fn reduction_consistency(
    problem: &PartialProblem,
    sample_count: usize,
    seed: u64,
    tol: OrderTolerance,
) -> Result<ConsistencyReport> {
    problem.corollary.validate()?;
    let reduced = reduce(problem);
    let setup = ContractionSetup {
        operator: &reduced.operator,
        distance: &reduced.distance,
        phi: &reduced.phi,
        f: &reduced.f,
    };
    let samples = contraction_samples(
        &reduced.spec,
        &problem.operator,
        &problem.domain,
        sample_count,
        seed,
    );
    let rows = crate::par_map(&samples, |pts| -> Result<(bool, f64, f64)> {
        let x = &pts[0];
        let y = pts.get(1).unwrap_or(x);
        let (lp, rp) = corollary_sides(&problem.corollary, &problem.p, &problem.operator, x, y)?;
        let (lr, rr) = contraction_sides(&reduced.spec, &setup, x, y)?;
        let mut expected_rhs = rp.scale(2.0);
        if let Corollary::Chatterjea { k } = problem.corollary {
            let ty = problem.operator.apply(y);
            let c = problem
                .p
                .eval(x, x)
                .checked_add(&problem.p.eval(&ty, &ty))?
                .scale(k);
            expected_rhs = expected_rhs.checked_sub(&c)?;
        }
        let agree = lp.leq(&rp, tol)? == lr.leq(&rr, tol)?;
        Ok((
            agree,
            lr.checked_sub(&lp.scale(2.0))?.norm(),
            rr.checked_sub(&expected_rhs)?.norm(),
        ))
    });
    let mut report = ConsistencyReport {
        samples: samples.len(),
        verdicts_agree: 0,
        max_lhs_identity_error: 0.0,
        max_rhs_identity_error: 0.0,
    };
    for row in rows {
        let (agree, el, er) = row?;
        report.verdicts_agree += usize::from(agree);
        report.max_lhs_identity_error = report.max_lhs_identity_error.max(el);
        report.max_rhs_identity_error = report.max_rhs_identity_error.max(er);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSolution {
    pub certificate: ConvergenceCertificate,
    /// `||p(u, u)||` at the computed fixed point.
    pub self_distance: f64,
    /// Converged and `||p(u, u)|| <= tol`.
    pub certified: bool,
}

pub fn solve_partial(problem: &PartialProblem, cfg: &SolveConfig) -> Result<PartialSolution> {
    problem.corollary.validate()?;
    let certificate = picard_solve(&reduce(problem), cfg)?;
    let u = &certificate.z;
    let self_distance = problem.p.eval(u, u).norm();
    let certified = certificate.converged && self_distance <= cfg.tol;
    Ok(PartialSolution {
        certificate,
        self_distance,
        certified,
    })
}
