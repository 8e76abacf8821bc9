//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::time::Instant;

use phifix::algebra::{AlgebraElement, Kind, OrderTolerance, Shape};
use phifix::contractions::{check_f_axioms, random_positive, FFunction};
use phifix::demo::{self, DemoOptions, DEMO_IDS};
use phifix::partial::{
    reduce, reduction_consistency, solve_partial, verify_corollary_hypothesis, PartialProblem,
};
use phifix::registry::{self, Config};
use phifix::report::Verdict;
use phifix::solver::{bound_audit, picard_solve, FixedPointProblem, SolveConfig};
use phifix::spaces::{check_metric_axioms, check_partial_axioms, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 10_000;
const SEED: u64 = 42;
const TOL: f64 = 1e-10;

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn order() -> OrderTolerance {
    OrderTolerance::default()
}

fn metric_problem(id: &str) -> (FixedPointProblem, Point) {
    match demo::config_for(id) {
        Some(Config::Problem(pc)) => pc.build().expect("built-in config"),
        _ => panic!("{id} is not a metric problem"),
    }
}

fn partial_problem(id: &str) -> (PartialProblem, Point) {
    match demo::config_for(id) {
        Some(Config::Partial(pc)) => pc.build().expect("built-in config"),
        _ => panic!("{id} is not a partial problem"),
    }
}

fn premetric_reproduction() -> Check {
    let start = Instant::now();
    let (problem, x0) = metric_problem("ex3.8");
    let v = problem
        .verify(SAMPLES, SEED, order())
        .map_err(|e| e.to_string())?;
    let cert = v
        .certificate()
        .ok_or_else(|| format!("counterexample: {v:?}"))?;
    ensure(cert.sample_count >= SAMPLES, "too few samples")?;
    let sol =
        picard_solve(&problem, &SolveConfig::new(x0).with_tol(TOL)).map_err(|e| e.to_string())?;
    ensure(sol.converged, "solve did not converge")?;
    ensure(
        sol.iterations <= 64,
        format!("{} iterations", sol.iterations),
    )?;
    ensure(
        sol.residual_fixed <= TOL && sol.residual_phi <= TOL,
        "residuals too large",
    )?;
    let audit = bound_audit(&sol, &problem.distance);
    ensure(
        audit.max_violation <= 1e-9,
        format!("audit violation {:e}", audit.max_violation),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} samples certified, z = {} after {} iterations, audit violation {:.2e}, {:?}",
        cert.sample_count, sol.z, sol.iterations, audit.max_violation, elapsed
    ))
}

fn matrix_weak_reproduction() -> Check {
    let (problem, x0) = metric_problem("ex3.13");
    ensure(
        problem.domain.dim() == 2,
        "pairs are sampled from a square box",
    )?;
    let v = problem
        .verify(SAMPLES, SEED, order())
        .map_err(|e| e.to_string())?;
    let cert = v
        .certificate()
        .ok_or_else(|| format!("counterexample: {}", serde_json::to_string(&v).unwrap()))?;
    let sol =
        picard_solve(&problem, &SolveConfig::new(x0).with_tol(TOL)).map_err(|e| e.to_string())?;
    let origin = Point::from([0.0, 0.0]);
    let miss = problem.distance.eval(&sol.z, &origin).norm();
    ensure(
        sol.converged && miss <= TOL,
        format!("z = {} (distance to origin {:e})", sol.z, miss),
    )?;
    Ok(format!(
        "{} stratified samples certified, z = {} within {:.1e}",
        cert.sample_count, sol.z, miss
    ))
}

fn upper_bound_anomaly() -> Check {
    let shape = Shape::matrix(2);
    let report = check_f_axioms(&FFunction::square_plus(), shape, SAMPLES, SEED, order());
    let f1 = report.entry("F1_upper_bound").ok_or("missing F1 entry")?;
    ensure(f1.verdict == Verdict::Fail, "square_plus passed F1")?;
    let w = f1.witness.as_ref().ok_or("no witness")?;
    let expected = [
        AlgebraElement::diag(&[0.5, 0.5]),
        AlgebraElement::zero(shape),
        AlgebraElement::zero(shape),
    ];
    ensure(w.inputs.len() == 3, "witness lacks inputs")?;
    let matches = w
        .inputs
        .iter()
        .zip(&expected)
        .all(|(a, b)| a.as_matrix() == b.as_matrix());
    ensure(matches, format!("unexpected witness {:?}", w.inputs))?;
    let sum = check_f_axioms(&FFunction::sum(), shape, SAMPLES, SEED, order());
    ensure(sum.all_pass(), "sum fails an F axiom")?;
    let used = sum
        .entry("F1_upper_bound")
        .map(|e| e.samples_used)
        .unwrap_or(0);
    ensure(used >= SAMPLES, format!("sum checked on {used} triples"))?;
    Ok(format!(
        "square_plus F1 witness A = diag(0.5, 0.5), B = C = 0; sum passes on {used} triples"
    ))
}

fn axiom_suites() -> Check {
    for name in ["shifted_max_unit_interval", "abs_pair_unit_interval"] {
        let s = registry::space(name).map_err(|e| e.to_string())?;
        let r = check_partial_axioms(&s.distance, &s.domain, SAMPLES, SEED, order());
        ensure(
            r.all_pass() && r.entries.len() == 5,
            format!("{name} fails"),
        )?;
        ensure(
            r.entries.iter().all(|e| e.samples_used >= SAMPLES),
            format!("{name} under-sampled"),
        )?;
    }
    let s = registry::space("sum_premetric_unit_interval").map_err(|e| e.to_string())?;
    let r = check_metric_axioms(&s.distance, &s.domain, SAMPLES, SEED, order());
    let e = r.entry("zero_self_distance").ok_or("missing entry")?;
    ensure(e.verdict == Verdict::Fail, "premetric passes d(x, x) = 0")?;
    let w = e.witness.as_ref().ok_or("no witness")?;
    Ok(format!(
        "both partial metrics pass; premetric fails at x = {} with {}",
        w.points[0], w.element
    ))
}

fn reduction_agreement() -> Check {
    let (problem, x0) = partial_problem("cor4.1");
    let hyp =
        verify_corollary_hypothesis(&problem, SAMPLES, SEED, order()).map_err(|e| e.to_string())?;
    ensure(hyp.is_certificate(), "hypothesis in p fails")?;
    let reduced = reduce(&problem)
        .verify(SAMPLES, SEED, order())
        .map_err(|e| e.to_string())?;
    ensure(reduced.is_certificate(), "reduced contraction fails")?;
    let c = reduction_consistency(&problem, SAMPLES, SEED, order()).map_err(|e| e.to_string())?;
    ensure(
        c.all_agree(),
        format!("{}/{} agree", c.verdicts_agree, c.samples),
    )?;
    ensure(
        c.max_lhs_identity_error <= 1e-15 && c.max_rhs_identity_error <= 1e-15,
        "identity broken",
    )?;
    let sol =
        solve_partial(&problem, &SolveConfig::new(x0).with_tol(TOL)).map_err(|e| e.to_string())?;
    ensure(
        sol.certified && sol.self_distance <= TOL,
        format!("|p(u, u)| = {:e}", sol.self_distance),
    )?;
    Ok(format!(
        "{} samples agree, |p(u, u)| = {:.1e}",
        c.samples, sol.self_distance
    ))
}

fn geometric_decay() -> Check {
    let mut problems = vec![metric_problem("ex3.8"), metric_problem("ex3.13")];
    problems.extend(
        DEMO_IDS
            .iter()
            .filter(|id| id.starts_with("cor"))
            .map(|id| {
                let (p, x0) = partial_problem(id);
                (reduce(&p), x0)
            }),
    );
    let mut checked = 0;
    for (problem, x0) in &problems {
        if !problem
            .verify(2_000, SEED, order())
            .map_err(|e| e.to_string())?
            .is_certificate()
        {
            continue;
        }
        let c = picard_solve(problem, &SolveConfig::new(x0.clone()).with_tol(TOL))
            .map_err(|e| e.to_string())?;
        let r = c.rate_used;
        for w in c.step_norms().windows(2) {
            ensure(
                w[1] <= r * w[0] + 1e-12,
                format!("{:?}: step {} after {}", problem.spec, w[1], w[0]),
            )?;
        }
        for w in c.apriori_bounds().windows(2) {
            ensure(
                w[1] == w[0] * r,
                format!("{:?}: bound ratio off", problem.spec),
            )?;
        }
        checked += 1;
    }
    ensure(checked >= 7, format!("only {checked} certified problems"))?;
    Ok(format!("{checked} certified problems decay at their rate"))
}

fn corollary_coverage() -> Check {
    let mut lines = Vec::new();
    for id in DEMO_IDS.iter().filter(|id| id.starts_with("cor")) {
        let (problem, x0) = partial_problem(id);
        let v = verify_corollary_hypothesis(&problem, SAMPLES, SEED, order())
            .map_err(|e| e.to_string())?;
        ensure(v.is_certificate(), format!("{id}: hypothesis fails"))?;
        let sol = solve_partial(&problem, &SolveConfig::new(x0).with_tol(TOL))
            .map_err(|e| e.to_string())?;
        ensure(
            sol.certified && sol.self_distance <= TOL,
            format!("{id}: not certified"),
        )?;
        lines.push(format!("{id} ok"));
    }
    ensure(lines.len() == 6, "six corollary demos expected")?;
    Ok(lines.join(", "))
}

fn determinism() -> Check {
    let opts = DemoOptions {
        seed: 7,
        ..DemoOptions::default()
    };
    for id in DEMO_IDS {
        let a = demo::run_demo(id, &opts).map_err(|e| e.to_string())?;
        let b = demo::run_demo(id, &opts).map_err(|e| e.to_string())?;
        ensure(a.all_match, format!("{id} has mismatched stages"))?;
        ensure(
            a.to_json() == b.to_json(),
            format!("{id} output differs between runs"),
        )?;
    }
    Ok(format!("{} demos byte-identical", DEMO_IDS.len()))
}

fn order_cone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let eps = 1e-9;
    let mut below = 0;
    for i in 0..SAMPLES {
        let n = 1 + i % 8;
        let a = random_positive(Shape::matrix(n), &mut rng);
        let norm = a.norm();
        let target = match i % 4 {
            0 => 1.0,
            1 => 1.0 - 1e-6,
            2 => 1.0 + 1e-6,
            _ => rng.random_range(0.05..2.0),
        };
        let a = if norm > 0.0 {
            a.scale(target / norm)
        } else {
            a
        };
        debug_assert_eq!(a.shape().kind, Kind::Matrix);
        let leq = a
            .leq(&AlgebraElement::unit(a.shape()), order())
            .map_err(|e| e.to_string())?;
        let small = a.norm() <= 1.0 + eps;
        ensure(
            leq == small,
            format!("n = {n}, |a| = {:.17}: leq {leq}", a.norm()),
        )?;
        below += usize::from(leq);
    }
    Ok(format!(
        "{SAMPLES} matrices (n <= 8), {below} below the unit, all agree with the norm"
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        (
            "premetric halving example reproduces",
            premetric_reproduction,
        ),
        (
            "matrix weak contraction example reproduces",
            matrix_weak_reproduction,
        ),
        ("upper-bound axiom anomaly detected", upper_bound_anomaly),
        ("axiom suites", axiom_suites),
        ("reduction consistency", reduction_agreement),
        ("geometric decay", geometric_decay),
        ("corollary family coverage", corollary_coverage),
        ("determinism", determinism),
        ("order cone", order_cone),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
