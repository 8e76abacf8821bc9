//! End-to-end worked examples.
//!
//! Each demo runs axioms, hypothesis verification, the solve and the bound
//! audit, and compares every stage with its expected verdict. Some stages
//! are expected to fail: the `(0, x + y)` distance is not zero on the
//! diagonal, `A^2 + B + C` breaks the upper-bound axiom below the unit, and
//! so on. A demo succeeds when every observed verdict matches.

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{OrderTolerance, Shape};
use crate::contractions::{check_f_axioms, ContractionSpec};
use crate::error::{Error, Result};
use crate::partial::{
    reduce, reduction_consistency, solve_partial, verify_corollary_hypothesis, Corollary,
};
use crate::registry::{Config, PartialConfig, ProblemConfig};
use crate::report::{AxiomReport, Verdict};
use crate::solver::{
    bound_audit, certify_phi_fixed_point, picard_solve, uniqueness_probe, SolveConfig,
};
use crate::spaces::{
    check_metric_axioms, check_partial_axioms, induced_metric, Flavor, Point, ValuedDistance,
};

pub const DEMO_IDS: [&str; 10] = [
    "ex2.3", "ex2.4", "ex3.8", "ex3.13", "cor4.1", "cor4.2", "cor4.3", "cor4.4", "cor4.5", "cor4.6",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemoOptions {
    pub seed: u64,
    pub samples: usize,
    /// Solver tolerance.
    pub tol: f64,
    /// Slack of the order relation used by axioms and verification.
    pub order: OrderTolerance,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            seed: 42,
            samples: 10_000,
            tol: SolveConfig::DEFAULT_TOL,
            order: OrderTolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub expected: Verdict,
    pub observed: Verdict,
    pub matches: bool,
    pub summary: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub id: String,
    pub title: String,
    pub config: Config,
    pub options: DemoOptions,
    pub stages: Vec<Stage>,
    pub all_match: bool,
}

impl DemoReport {
    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_human(&self) -> String {
        let mut out = format!("{} ({})\n", self.id, self.title);
        for s in &self.stages {
            let mark = if s.matches { "ok  " } else { "MISMATCH" };
            out.push_str(&format!(
                "  {mark} {:<24} expected {:<5} observed {:<5} {}\n",
                s.name,
                verdict_word(s.expected),
                verdict_word(s.observed),
                s.summary
            ));
        }
        out.push_str(if self.all_match {
            "all stages match\n"
        } else {
            "some stages do not match\n"
        });
        out
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn title(id: &str) -> &'static str {
    match id {
        "ex2.3" => "max{1+s, 1+t} I on [0, 1]",
        "ex2.4" => "(|x - y|, |x - y|) on [0, 1]",
        "ex3.8" => "(0, x + y) with phi(x) = (x, x) and T x = x / 2",
        "ex3.13" => "diagonal matrix distance with A^2 + B + C, weak contraction",
        "cor4.1" => "Banach in p = max, halving",
        "cor4.2" => "graphic in p = max, halving",
        "cor4.3" => "weak in p = max, halving",
        "cor4.4" => "Kannan in p = max, quarter",
        "cor4.5" => "Reich in p = max, quarter",
        "cor4.6" => "Chatterjea in p = max, quarter",
        _ => "",
    }
}

fn partial(corollary: Corollary, space: &str, operator: &str) -> Config {
    Config::Partial(PartialConfig {
        corollary,
        space: space.into(),
        operator: operator.into(),
        x0: None,
    })
}

/// The config a demo is built from, usable with every command.
pub fn config_for(id: &str) -> Option<Config> {
    let c = match id {
        "ex2.3" => partial(
            Corollary::Banach { k: 0.5 },
            "shifted_max_unit_interval",
            "halving",
        ),
        "ex2.4" => partial(
            Corollary::Banach { k: 0.5 },
            "abs_pair_unit_interval",
            "halving",
        ),
        "ex3.8" => Config::Problem(ProblemConfig {
            space: "sum_premetric_unit_interval".into(),
            operator: "halving".into(),
            phi: "diagonal_pair".into(),
            f: "sum".into(),
            contraction: ContractionSpec::FPhi { k: 0.5 },
            x0: Some(Point::from(1.0)),
        }),
        "ex3.13" => Config::Problem(ProblemConfig {
            space: "diag_abs_box".into(),
            operator: "halving".into(),
            phi: "scaled_gap".into(),
            f: "square_plus".into(),
            contraction: ContractionSpec::Weak { k: 0.5, alpha: 4.0 },
            x0: Some(Point::from([1.0, 1.0])),
        }),
        "cor4.1" => partial(Corollary::Banach { k: 0.5 }, "max_unit_interval", "halving"),
        "cor4.2" => partial(
            Corollary::Graphic { k: 0.5 },
            "max_unit_interval",
            "halving",
        ),
        "cor4.3" => partial(
            Corollary::Weak { k: 0.5, alpha: 0.5 },
            "max_unit_interval",
            "halving",
        ),
        "cor4.4" => partial(
            Corollary::Kannan { k: 1.0 / 3.0 },
            "max_unit_interval",
            "quarter",
        ),
        "cor4.5" => partial(
            Corollary::Reich {
                alpha: 0.25,
                beta: 0.2,
                gamma: 0.2,
            },
            "max_unit_interval",
            "quarter",
        ),
        "cor4.6" => partial(
            Corollary::Chatterjea { k: 0.4 },
            "max_unit_interval",
            "quarter",
        ),
        _ => return None,
    };
    Some(c)
}

pub fn listing() -> String {
    DEMO_IDS
        .iter()
        .map(|id| format!("{id:<8} {}", title(id)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Axioms appropriate to the distance's flavor.
pub fn space_axioms(
    d: &ValuedDistance,
    domain: &crate::spaces::PointDomain,
    opts: &DemoOptions,
) -> AxiomReport {
    match d.flavor() {
        Flavor::PartialMetric => {
            check_partial_axioms(d, domain, opts.samples, opts.seed, opts.order)
        }
        Flavor::Metric | Flavor::Premetric => {
            check_metric_axioms(d, domain, opts.samples, opts.seed, opts.order)
        }
    }
}

/// Failures a demo expects, stage by stage.
fn expected(id: &str, stage: &str) -> Verdict {
    match (id, stage) {
        ("ex2.3", "hypothesis") => Verdict::Fail,
        ("ex3.8", "space_axioms") => Verdict::Fail,
        ("ex3.13", "f_axioms") | ("ex3.13", "bound_audit") => Verdict::Fail,
        _ => Verdict::Pass,
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

struct Stages {
    id: String,
    list: Vec<Stage>,
}

impl Stages {
    fn push(&mut self, name: &str, observed: Verdict, summary: String, detail: Value) {
        let expected = expected(&self.id, name);
        self.list.push(Stage {
            name: name.into(),
            expected,
            observed,
            matches: expected == observed,
            summary,
            detail,
        });
    }

    fn push_result<T: Serialize>(
        &mut self,
        name: &str,
        r: Result<T>,
        judge: impl Fn(&T) -> (bool, String),
    ) {
        match r {
            Ok(v) => {
                let (ok, summary) = judge(&v);
                self.push(name, pass_if(ok), summary, json!(v));
            }
            Err(e) => self.push(
                name,
                Verdict::Fail,
                format!("error: {e}"),
                json!(e.to_string()),
            ),
        }
    }

    fn push_axioms(&mut self, name: &str, report: AxiomReport) {
        let failing: Vec<&str> = report.failures().map(|e| e.axiom.as_str()).collect();
        let summary = if failing.is_empty() {
            format!("{} entries, no counterexample", report.entries.len())
        } else {
            format!("failing: {}", failing.join(", "))
        };
        self.push(name, pass_if(report.all_pass()), summary, json!(report));
    }
}

/// Runs a demo by id. Unknown ids give [`Error::Unknown`].
pub fn run_demo(id: &str, opts: &DemoOptions) -> Result<DemoReport> {
    let config = config_for(id).ok_or_else(|| Error::Unknown {
        what: "demo",
        name: id.to_string(),
    })?;
    let mut st = Stages {
        id: id.to_string(),
        list: Vec::new(),
    };
    let named = config.space()?;
    st.push_axioms(
        "space_axioms",
        space_axioms(&named.distance, &named.domain, opts),
    );

    match &config {
        Config::Problem(pc) => run_problem(pc, opts, &mut st)?,
        Config::Partial(pc) => run_partial(pc, opts, &mut st)?,
        Config::Axioms(_) => {}
    }

    let all_match = st.list.iter().all(|s| s.matches);
    Ok(DemoReport {
        id: id.into(),
        title: title(id).into(),
        config,
        options: *opts,
        stages: st.list,
        all_match,
    })
}

fn verification_summary(v: &crate::contractions::Verification) -> (bool, String) {
    match v {
        crate::contractions::Verification::Certificate(c) => (
            true,
            format!(
                "certified on {} samples, max slack {:.3e}",
                c.sample_count, c.max_slack_norm
            ),
        ),
        crate::contractions::Verification::Counterexample(c) => (
            false,
            format!(
                "counterexample at sample {}: {:?}",
                c.sample_index, c.points
            ),
        ),
    }
}

fn solve_config(x0: Point, opts: &DemoOptions) -> SolveConfig {
    SolveConfig::new(x0).with_tol(opts.tol)
}

fn run_problem(pc: &ProblemConfig, opts: &DemoOptions, st: &mut Stages) -> Result<()> {
    let (problem, x0) = pc.build()?;
    let shape: Shape = problem.distance.shape();
    st.push_axioms(
        "f_axioms",
        check_f_axioms(&problem.f, shape, opts.samples, opts.seed, opts.order),
    );
    st.push_result(
        "contraction",
        problem.verify(opts.samples, opts.seed, opts.order),
        verification_summary,
    );

    let cfg = solve_config(x0, opts);
    match picard_solve(&problem, &cfg) {
        Ok(cert) => {
            let summary = format!(
                "{} iterations, z = {}, residuals {:.3e} / {:.3e}",
                cert.iterations, cert.z, cert.residual_fixed, cert.residual_phi
            );
            st.push("solve", pass_if(cert.converged), summary, json!(cert));
            let check = certify_phi_fixed_point(
                &cert.z,
                &problem.operator,
                &problem.distance,
                &problem.phi,
                opts.tol,
            );
            st.push(
                "phi_fixed_point",
                pass_if(check.is_phi_fixed_point()),
                format!("fixed {} / phi zero {}", check.is_fixed, check.is_phi_zero),
                json!(check),
            );
            let audit = bound_audit(&cert, &problem.distance);
            st.push(
                "bound_audit",
                pass_if(audit.passes),
                format!(
                    "max violation {:.3e} (allowance {:.3e})",
                    audit.max_violation, audit.allowance
                ),
                json!(audit),
            );
        }
        Err(e) => st.push(
            "solve",
            Verdict::Fail,
            format!("error: {e}"),
            json!(e.to_string()),
        ),
    }

    let starts = if problem.domain.dim() == 1 {
        let (lo, hi) = problem.domain.bounds()[0];
        vec![
            Point::from(lo),
            Point::from(lo + 0.3 * (hi - lo)),
            Point::from(hi),
        ]
    } else {
        problem.domain.corners()
    };
    st.push_result(
        "uniqueness",
        uniqueness_probe(&problem, &starts, &solve_config(Point(vec![]), opts)),
        |u| {
            (
                u.all_agree,
                format!("{} starts, limits agree: {}", u.starts.len(), u.all_agree),
            )
        },
    );
    Ok(())
}

fn run_partial(pc: &PartialConfig, opts: &DemoOptions, st: &mut Stages) -> Result<()> {
    let (problem, x0) = pc.build()?;
    let induced = induced_metric(&problem.p);
    st.push_axioms(
        "induced_metric_axioms",
        check_metric_axioms(
            &induced,
            &problem.domain,
            opts.samples,
            opts.seed,
            opts.order,
        ),
    );
    st.push_result(
        "hypothesis",
        verify_corollary_hypothesis(&problem, opts.samples, opts.seed, opts.order),
        verification_summary,
    );
    if expected(&st.id, "hypothesis") == Verdict::Fail {
        return Ok(());
    }
    st.push_result(
        "reduction_consistency",
        reduction_consistency(&problem, opts.samples, opts.seed, opts.order),
        |r| {
            let ok = r.all_agree()
                && r.max_lhs_identity_error <= 1e-12
                && r.max_rhs_identity_error <= 1e-12;
            (
                ok,
                format!("{}/{} verdicts agree", r.verdicts_agree, r.samples),
            )
        },
    );
    match solve_partial(&problem, &solve_config(x0, opts)) {
        Ok(sol) => {
            let summary = format!(
                "{} iterations, u = {}, |p(u, u)| = {:.3e}",
                sol.certificate.iterations, sol.certificate.z, sol.self_distance
            );
            let audit = bound_audit(&sol.certificate, &reduce(&problem).distance);
            st.push("solve", pass_if(sol.certified), summary, json!(sol));
            st.push(
                "bound_audit",
                pass_if(audit.passes),
                format!(
                    "max violation {:.3e} (allowance {:.3e})",
                    audit.max_violation, audit.allowance
                ),
                json!(audit),
            );
        }
        Err(e) => st.push(
            "solve",
            Verdict::Fail,
            format!("error: {e}"),
            json!(e.to_string()),
        ),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> DemoOptions {
        DemoOptions {
            samples: 500,
            ..DemoOptions::default()
        }
    }

    #[test]
    fn every_demo_matches() {
        for id in DEMO_IDS {
            let r = run_demo(id, &quick()).unwrap();
            assert!(r.all_match, "{}", r.to_human());
        }
    }

    #[test]
    fn expected_failures_are_observed() {
        let r = run_demo("ex3.8", &quick()).unwrap();
        let s = r.stage("space_axioms").unwrap();
        assert_eq!(s.observed, Verdict::Fail);
        assert_eq!(s.summary, "failing: zero_self_distance");
        let r = run_demo("ex3.13", &quick()).unwrap();
        assert_eq!(r.stage("f_axioms").unwrap().observed, Verdict::Fail);
        assert_eq!(r.stage("contraction").unwrap().observed, Verdict::Pass);
        let r = run_demo("ex2.3", &quick()).unwrap();
        assert_eq!(r.stage("space_axioms").unwrap().observed, Verdict::Pass);
        assert_eq!(r.stage("hypothesis").unwrap().observed, Verdict::Fail);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(
            run_demo("bogus", &quick()),
            Err(Error::Unknown { what: "demo", .. })
        ));
        assert!(listing().lines().count() == DEMO_IDS.len());
    }
}
