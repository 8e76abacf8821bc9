//! Named built-in spaces, operators, phi functions and F-functions, and the
//! configuration files that refer to them.
//!
//! Three config shapes are recognised, by their keys:
//!
//! * `{"space": ...}` checks axioms only.
//! * `{"space", "operator", "phi", "f", "contraction", "x0"?}` is a metric
//!   fixed-point problem.
//! * `{"corollary": ..., <constants>, "space", "operator", "x0"?}` is a
//!   partial metric problem.
//!
//! Missing `x0` defaults to the upper corner of the space's domain.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Shape};
use crate::contractions::{ContractionSpec, FFunction, OperatorSpec, PhiFunction};
use crate::error::{Error, Result};
use crate::partial::{Corollary, PartialProblem};
use crate::solver::FixedPointProblem;
use crate::spaces::{Flavor, Point, PointDomain, ValuedDistance};

pub const SPACES: [&str; 6] = [
    "abs_unit_interval",
    "max_unit_interval",
    "shifted_max_unit_interval",
    "abs_pair_unit_interval",
    "sum_premetric_unit_interval",
    "diag_abs_box",
];
pub const OPERATORS: [&str; 3] = ["halving", "quarter", "identity"];
pub const PHIS: [&str; 3] = ["zero", "diagonal_pair", "scaled_gap"];
pub const F_FUNCTIONS: [&str; 2] = ["sum", "square_plus"];

/// A distance together with the domain it is sampled on.
#[derive(Debug, Clone)]
pub struct NamedSpace {
    pub distance: ValuedDistance,
    pub domain: PointDomain,
}

fn unit_interval() -> PointDomain {
    PointDomain::interval(0.0, 1.0).expect("valid bounds")
}

pub fn space(name: &str) -> Result<NamedSpace> {
    let (distance, domain) = match name {
        "abs_unit_interval" => (
            ValuedDistance::new(name, Shape::SCALAR, Flavor::Metric, |x, y| {
                AlgebraElement::Scalar((x.x() - y.x()).abs())
            }),
            unit_interval(),
        ),
        "max_unit_interval" => (
            ValuedDistance::new(name, Shape::SCALAR, Flavor::PartialMetric, |x, y| {
                AlgebraElement::Scalar(x.x().max(y.x()))
            }),
            unit_interval(),
        ),
        "shifted_max_unit_interval" => (
            ValuedDistance::new(name, Shape::matrix(2), Flavor::PartialMetric, |s, t| {
                let m = (1.0 + s.x()).max(1.0 + t.x());
                AlgebraElement::diag(&[m, m])
            }),
            unit_interval(),
        ),
        "abs_pair_unit_interval" => (
            ValuedDistance::new(name, Shape::vector(2), Flavor::PartialMetric, |x, y| {
                let g = (x.x() - y.x()).abs();
                AlgebraElement::Vector(vec![g, g])
            }),
            unit_interval(),
        ),
        "sum_premetric_unit_interval" => (
            ValuedDistance::new(name, Shape::vector(2), Flavor::Premetric, |x, y| {
                AlgebraElement::Vector(vec![0.0, x.x() + y.x()])
            }),
            unit_interval(),
        ),
        "diag_abs_box" => (
            ValuedDistance::new(name, Shape::matrix(2), Flavor::Metric, |a, b| {
                let (a, b) = (a.coords(), b.coords());
                AlgebraElement::diag(&[(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            }),
            PointDomain::cube(-1.0, 1.0, 2).expect("valid bounds"),
        ),
        _ => {
            return Err(Error::Unknown {
                what: "space",
                name: name.to_string(),
            })
        }
    };
    Ok(NamedSpace { distance, domain })
}

pub fn operator(name: &str) -> Result<OperatorSpec> {
    match name {
        "halving" => Ok(OperatorSpec::scaling(name, 0.5)),
        "quarter" => Ok(OperatorSpec::scaling(name, 0.25)),
        "identity" => Ok(OperatorSpec::identity()),
        _ => Err(Error::Unknown {
            what: "operator",
            name: name.to_string(),
        }),
    }
}

/// `zero` takes its shape from the distance it is paired with.
pub fn phi(name: &str, shape: Shape) -> Result<PhiFunction> {
    match name {
        "zero" => Ok(PhiFunction::zero(shape)),
        "diagonal_pair" => Ok(PhiFunction::new(name, |x| {
            AlgebraElement::Vector(vec![x.x(), x.x()])
        })),
        "scaled_gap" => Ok(PhiFunction::new(name, |x| {
            let c = x.coords();
            let g = 2.0 * (c[0] - c[1]).abs();
            AlgebraElement::diag(&[g, g])
        })),
        _ => Err(Error::Unknown {
            what: "phi",
            name: name.to_string(),
        }),
    }
}

pub fn f_function(name: &str) -> Result<FFunction> {
    match name {
        "sum" => Ok(FFunction::sum()),
        "square_plus" => Ok(FFunction::square_plus()),
        _ => Err(Error::Unknown {
            what: "F-function",
            name: name.to_string(),
        }),
    }
}

/// Human-readable list of every registered name.
pub fn listing() -> String {
    format!(
        "spaces: {}\noperators: {}\nphi: {}\nF: {}",
        SPACES.join(", "),
        OPERATORS.join(", "),
        PHIS.join(", "),
        F_FUNCTIONS.join(", ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsConfig {
    pub space: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub space: String,
    pub operator: String,
    pub phi: String,
    pub f: String,
    pub contraction: ContractionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialConfig {
    #[serde(flatten)]
    pub corollary: Corollary,
    pub space: String,
    pub operator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Config {
    Axioms(AxiomsConfig),
    Problem(ProblemConfig),
    Partial(PartialConfig),
}

fn typed<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(located(&e)))
}

fn located(e: &serde_json::Error) -> String {
    format!("line {} column {}: {e}", e.line(), e.column())
}

impl Config {
    /// Parses config text. Errors carry the line and column of the problem.
    pub fn parse(text: &str) -> Result<Config> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(located(&e)))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidConfig("line 1 column 1: expected an object".into()))?;
        if obj.contains_key("corollary") {
            let c: PartialConfig = typed(text)?;
            c.corollary.validate()?;
            Ok(Config::Partial(c))
        } else if obj.contains_key("contraction") {
            let c: ProblemConfig = typed(text)?;
            c.contraction.validate()?;
            Ok(Config::Problem(c))
        } else {
            Ok(Config::Axioms(typed(text)?))
        }
    }

    pub fn space_name(&self) -> &str {
        match self {
            Config::Axioms(c) => &c.space,
            Config::Problem(c) => &c.space,
            Config::Partial(c) => &c.space,
        }
    }

    pub fn space(&self) -> Result<NamedSpace> {
        space(self.space_name())
    }

    /// The F-function named by a metric problem, if any.
    pub fn f_function(&self) -> Result<Option<FFunction>> {
        match self {
            Config::Problem(c) => f_function(&c.f).map(Some),
            _ => Ok(None),
        }
    }
}

fn start_point(x0: &Option<Point>, domain: &PointDomain) -> Result<Point> {
    let x0 = x0
        .clone()
        .unwrap_or_else(|| Point(domain.bounds().iter().map(|b| b.1).collect()));
    if x0.dim() != domain.dim() {
        return Err(Error::InvalidConfig(format!(
            "x0 has {} coordinates, the space has {}",
            x0.dim(),
            domain.dim()
        )));
    }
    Ok(x0)
}

impl ProblemConfig {
    pub fn build(&self) -> Result<(FixedPointProblem, Point)> {
        self.contraction.validate()?;
        let NamedSpace { distance, domain } = space(&self.space)?;
        let phi = phi(&self.phi, distance.shape())?;
        let problem = FixedPointProblem {
            operator: operator(&self.operator)?,
            phi,
            f: f_function(&self.f)?,
            spec: self.contraction,
            domain,
            distance,
        };
        let x0 = start_point(&self.x0, &problem.domain)?;
        Ok((problem, x0))
    }
}

impl PartialConfig {
    pub fn build(&self) -> Result<(PartialProblem, Point)> {
        self.corollary.validate()?;
        let NamedSpace { distance, domain } = space(&self.space)?;
        let x0 = start_point(&self.x0, &domain)?;
        let problem = PartialProblem {
            p: distance,
            operator: operator(&self.operator)?,
            corollary: self.corollary,
            domain,
        };
        Ok((problem, x0))
    }
}
