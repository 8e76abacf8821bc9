//! Fixed points of contractions on C*-algebra valued metric and partial metric
//! spaces.
//!
//! Distances take values in a finite-dimensional unital C*-algebra (reals,
//! real vectors with the componentwise order, or complex matrices with the
//! Loewner order). On top of that the crate provides:
//!
//! * [`algebra`]: arithmetic, spectrum, norm and the order cone.
//! * [`spaces`]: point domains, metrics and partial metrics, sampled axiom
//!   checks and sequence probes.
//! * [`contractions`]: F-functions, phi functions and the six contraction
//!   families, verified on seeded samples.
//! * [`solver`]: Picard iteration with a-priori bounds and phi-fixed point
//!   certification.
//! * [`partial`]: fixed-point problems posed on a partial metric space,
//!   reduced to the metric setting through `p^s` and `phi(x) = p(x, x)`.
//! * [`registry`] and [`demo`]: named built-in spaces and operators and the
//!   end-to-end worked examples.
//!
//! ```
//! use phifix::prelude::*;
//!
//! // d(x, y) = |x - y| on [0, 1], T x = x / 2, phi = 0, F = a + b + c.
//! let problem = FixedPointProblem {
//!     operator: OperatorSpec::scaling("halving", 0.5),
//!     distance: ValuedDistance::new("abs", Shape::SCALAR, Flavor::Metric, |x, y| {
//!         AlgebraElement::Scalar((x.x() - y.x()).abs())
//!     }),
//!     phi: PhiFunction::zero(Shape::SCALAR),
//!     f: FFunction::sum(),
//!     spec: ContractionSpec::FPhi { k: 0.5 },
//!     domain: PointDomain::interval(0.0, 1.0).unwrap(),
//! };
//! assert!(problem.verify(1_000, 42, OrderTolerance::default()).unwrap().is_certificate());
//!
//! let cert = picard_solve(&problem, &SolveConfig::new(1.0)).unwrap();
//! assert!(cert.converged);
//! assert!(cert.z.x() < 1e-10);
//! ```

pub mod algebra;
pub mod contractions;
pub mod demo;
pub mod error;
pub mod partial;
pub mod registry;
pub mod report;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::algebra::{AlgebraElement, Kind, OrderTolerance, Shape};
    pub use crate::contractions::{
        check_f_axioms, verify_contraction, ContractionSpec, FFunction, OperatorSpec, PhiFunction,
        Verification,
    };
    pub use crate::partial::{Corollary, PartialProblem};
    pub use crate::report::{AxiomReport, Verdict};
    pub use crate::solver::{
        bound_audit, certify_phi_fixed_point, picard_solve, uniqueness_probe, FixedPointProblem,
        SolveConfig,
    };
    pub use crate::spaces::{
        check_metric_axioms, check_partial_axioms, induced_metric, Flavor, Point, PointDomain,
        ValuedDistance,
    };
    pub use crate::{Error, Result};
}

pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/order.md")]
    mod order {}
    #[doc = include_str!("../../../book/src/partial_metrics.md")]
    mod partial_metrics {}
    #[doc = include_str!("../../../book/src/contractions.md")]
    mod contractions {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/corollaries.md")]
    mod corollaries {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
