//! Picard iteration with a-priori error bounds.
//!
//! For a contraction with effective rate `r` the orbit `x_{n+1} = T x_n`
//! satisfies `d(x_n, z) <= r^n / (1 - r) * F(d(T x_0, x_0), phi(T x_0), phi(x_0))`
//! in the order of the algebra. The solver records the norm of that bound
//! next to the observed step sizes so the two can be audited afterwards.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::OrderTolerance;
use crate::contractions::{
    verify_contraction, ContractionSpec, FFunction, OperatorSpec, PhiFunction, Verification,
};
use crate::error::{Error, Result};
use crate::spaces::{Point, PointDomain, ValuedDistance};

/// Everything a fixed-point run needs.
#[derive(Debug, Clone)]
pub struct FixedPointProblem {
    pub operator: OperatorSpec,
    pub distance: ValuedDistance,
    pub phi: PhiFunction,
    pub f: FFunction,
    pub spec: ContractionSpec,
    pub domain: PointDomain,
}

impl FixedPointProblem {
    pub fn verify(
        &self,
        sample_count: usize,
        seed: u64,
        tol: OrderTolerance,
    ) -> Result<Verification> {
        verify_contraction(
            &self.spec,
            &self.operator,
            &self.distance,
            &self.phi,
            &self.f,
            &self.domain,
            sample_count,
            seed,
            tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub x0: Point,
    /// Stopping threshold on `||d(x_{n+1}, x_n)||`; also the residual
    /// threshold for declaring convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Every iteration up to this index is recorded, then every
    /// `bound_horizon`-th one. Zero records every iteration.
    pub bound_horizon: usize,
}

impl SolveConfig {
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_ITER: usize = 10_000;
    pub const DEFAULT_BOUND_HORIZON: usize = 64;

    pub fn new(x0: impl Into<Point>) -> Self {
        SolveConfig {
            x0: x0.into(),
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            bound_horizon: Self::DEFAULT_BOUND_HORIZON,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    fn records(&self, n: usize) -> bool {
        self.bound_horizon == 0 || n <= self.bound_horizon || n.is_multiple_of(self.bound_horizon)
    }
}

/// Rates above this make `r^n / (1 - r)` too loose to be informative.
pub const WEAK_RATE_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub point: Point,
    /// `||d(x_{n+1}, x_n)||`.
    pub step_norm: f64,
    /// `r^n / (1 - r) * ||F_0||`.
    pub apriori_bound: f64,
    /// `||phi(x_n)||`.
    pub phi_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepBelowTol,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub spec: ContractionSpec,
    pub rate_used: f64,
    /// `||F(d(T x_0, x_0), phi(T x_0), phi(x_0))||`.
    pub initial_f_norm: f64,
    pub bounds_weak: bool,
    pub tol: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub records: Vec<IterationRecord>,
    pub z: Point,
    /// `||d(z, Tz)||`.
    pub residual_fixed: f64,
    /// `||phi(z)||`.
    pub residual_phi: f64,
    pub converged: bool,
}

impl ConvergenceCertificate {
    pub fn iterates(&self) -> Vec<&Point> {
        self.records.iter().map(|r| &r.point).collect()
    }

    pub fn step_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step_norm).collect()
    }

    pub fn apriori_bounds(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.apriori_bound).collect()
    }

    pub fn phi_residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.phi_residual).collect()
    }

    /// Trace with the fixed header `n,step_norm,apriori_bound,phi_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,step_norm,apriori_bound,phi_residual\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e}",
                r.n, r.step_norm, r.apriori_bound, r.phi_residual
            );
        }
        out
    }
}

/// Iterates `T` from `cfg.x0` until the step norm drops to `cfg.tol` or
/// `cfg.max_iter` steps have been taken.
///
/// `converged` requires the step criterion to have fired and both
/// `||d(z, Tz)||` and `||phi(z)||` to be within `cfg.tol`: a stalled orbit
/// that is not a phi-fixed point is never reported as a success.
pub fn picard_solve(
    problem: &FixedPointProblem,
    cfg: &SolveConfig,
) -> Result<ConvergenceCertificate> {
    problem.spec.validate()?;
    cfg.validate()?;
    let FixedPointProblem {
        operator,
        distance,
        phi,
        f,
        spec,
        domain,
    } = problem;

    let mut x = cfg.x0.clone();
    if !x.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if !domain.contains(&x) {
        return Err(Error::OrbitEscaped { index: 0, point: x });
    }

    let rate = spec.effective_rate();
    let tx0 = operator.apply(&x);
    let initial_f = f.eval(&distance.eval(&tx0, &x), &phi.eval(&tx0), &phi.eval(&x))?;
    let initial_f_norm = initial_f.norm();
    if !initial_f_norm.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }

    let mut bound = initial_f_norm / (1.0 - rate);
    let mut records = Vec::new();
    let mut stop = StopReason::MaxIter;
    let mut iterations = 0;
    for n in 0..cfg.max_iter {
        let next = operator.apply(&x);
        if !next.is_finite() {
            return Err(Error::NonFinite { index: n + 1 });
        }
        if !domain.contains(&next) {
            return Err(Error::OrbitEscaped {
                index: n + 1,
                point: next,
            });
        }
        let step_norm = distance.eval(&next, &x).norm();
        let phi_residual = phi.eval(&x).norm();
        if !(step_norm.is_finite() && phi_residual.is_finite()) {
            return Err(Error::NonFinite { index: n });
        }
        if cfg.records(n) {
            records.push(IterationRecord {
                n,
                point: x.clone(),
                step_norm,
                apriori_bound: bound,
                phi_residual,
            });
        }
        x = next;
        iterations = n + 1;
        if step_norm <= cfg.tol {
            stop = StopReason::StepBelowTol;
            break;
        }
        bound *= rate;
    }

    let residual_fixed = distance.eval(&x, &operator.apply(&x)).norm();
    let residual_phi = phi.eval(&x).norm();
    let converged =
        stop == StopReason::StepBelowTol && residual_fixed <= cfg.tol && residual_phi <= cfg.tol;
    Ok(ConvergenceCertificate {
        spec: *spec,
        rate_used: rate,
        initial_f_norm,
        bounds_weak: rate > WEAK_RATE_THRESHOLD,
        tol: cfg.tol,
        iterations,
        stop,
        records,
        z: x,
        residual_fixed,
        residual_phi,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiFixedPointCheck {
    pub is_fixed: bool,
    pub is_phi_zero: bool,
    pub residual_fixed: f64,
    pub residual_phi: f64,
}

impl PhiFixedPointCheck {
    pub fn is_phi_fixed_point(&self) -> bool {
        self.is_fixed && self.is_phi_zero
    }
}

/// Membership of `z` in `F_T` and `Z_phi`, both decided by residual norms.
pub fn certify_phi_fixed_point(
    z: &Point,
    operator: &OperatorSpec,
    distance: &ValuedDistance,
    phi: &PhiFunction,
    tol: f64,
) -> PhiFixedPointCheck {
    let residual_fixed = distance.eval(z, &operator.apply(z)).norm();
    let residual_phi = phi.eval(z).norm();
    PhiFixedPointCheck {
        is_fixed: residual_fixed <= tol,
        is_phi_zero: residual_phi <= tol,
        residual_fixed,
        residual_phi,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub converged: bool,
    pub checked: usize,
    /// `max_n (||d(x_n, z)|| - bound_n)`; nonpositive when every bound holds.
    pub max_violation: f64,
    pub worst_n: Option<usize>,
    pub allowance: f64,
    pub passes: bool,
}

/// Compares `||d(x_n, z)||` with the recorded a-priori bound, taking the
/// final iterate as `z`. The allowance `tol / (1 - r)` covers the distance
/// between the final iterate and the true limit.
pub fn bound_audit(cert: &ConvergenceCertificate, distance: &ValuedDistance) -> BoundAudit {
    let allowance = cert.tol / (1.0 - cert.rate_used);
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_n = None;
    for r in &cert.records {
        let v = distance.eval(&r.point, &cert.z).norm() - r.apriori_bound;
        if v > max_violation {
            max_violation = v;
            worst_n = Some(r.n);
        }
    }
    if cert.records.is_empty() {
        max_violation = 0.0;
    }
    BoundAudit {
        converged: cert.converged,
        checked: cert.records.len(),
        max_violation,
        worst_n,
        allowance,
        passes: max_violation <= allowance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub starts: Vec<Point>,
    pub limits: Vec<Point>,
    pub converged: Vec<bool>,
    /// `||d(z_i, z_j)||` for every pair, row-major.
    pub pairwise: Vec<Vec<f64>>,
    pub tol: f64,
    /// Limits count as equal when `||d(z_i, z_j)|| <= 2 tol / (1 - r)`: each
    /// final iterate is within `tol / (1 - r)` of its true limit.
    pub radius: f64,
    pub all_agree: bool,
}

/// Solves from every start (concurrently) and compares the limits pairwise.
/// Agreement supports uniqueness; it does not prove it.
pub fn uniqueness_probe(
    problem: &FixedPointProblem,
    starts: &[Point],
    cfg: &SolveConfig,
) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::TooFewStarts(starts.len()));
    }
    let certs: Vec<ConvergenceCertificate> = starts
        .par_iter()
        .enumerate()
        .map(|(index, x0)| {
            let cfg = SolveConfig {
                x0: x0.clone(),
                ..cfg.clone()
            };
            picard_solve(problem, &cfg).map_err(|e| Error::Start {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let limits: Vec<Point> = certs.iter().map(|c| c.z.clone()).collect();
    let pairwise: Vec<Vec<f64>> = limits
        .iter()
        .map(|a| {
            limits
                .iter()
                .map(|b| problem.distance.eval(a, b).norm())
                .collect()
        })
        .collect();
    let radius = 2.0 * cfg.tol / (1.0 - problem.spec.effective_rate());
    let all_agree = pairwise.iter().flatten().all(|d| *d <= radius);
    Ok(UniquenessReport {
        starts: starts.to_vec(),
        limits,
        converged: certs.iter().map(|c| c.converged).collect(),
        pairwise,
        tol: cfg.tol,
        radius,
        all_agree,
    })
}
