//! One PASS/FAIL line per acceptance criterion.
//!
//! Run with `cargo test -p fracmom-cli --test acceptance -- --nocapture` to
//! see the report.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use fracmom::moments::IndexClosure;
use fracmom::verifier::{check_condition2, GammaSource};
use fracmom::{
    build_basis, parse_extended, parse_fracpoly, verify_all, AtomicMeasure, Certificate,
    DeltaFamily, DeltaIndex, ExponentVector, ExtendedPoly, FracPoly, LogAtomicMeasure,
    ProblemPolys, Rational, Scalar, Window,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Q = Rational;

const PLISTS: [&[&str]; 4] = [&[], &["t1 - 2"], &["t1^(1/2) - 1"], &["t1 - t2"]];

#[derive(Clone, Debug)]
struct Case {
    dim: usize,
    polys: &'static [&'static str],
    d: u64,
    atoms: Vec<(Vec<Q>, Q)>,
}

impl Case {
    fn problem<S: Scalar>(&self) -> ProblemPolys<S> {
        let polys = self.polys.iter().map(|t| parse_fracpoly(t, self.dim).unwrap()).collect();
        ProblemPolys::new(self.dim, polys).unwrap()
    }

    fn measure(&self) -> AtomicMeasure<Q> {
        AtomicMeasure::from_roots(self.dim, self.d, self.atoms.clone()).unwrap()
    }

    fn window(&self) -> Window {
        Window::new(self.d, 2 * self.d, 2).unwrap()
    }

    fn problem_json(&self) -> Value {
        json!({
            "n": self.dim,
            "polynomials": self.polys,
            "measure": { "atoms": self.atoms.iter().map(|(r, w)| json!({
                "roots": { "values": r.iter().map(ToString::to_string).collect::<Vec<_>>(), "power": self.d },
                "weight": w.to_string(),
            })).collect::<Vec<_>>() },
            "window": { "D": self.d, "N": 2 * self.d, "B": 2 },
        })
    }
}

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let dim = rng.gen_range(1..=2);
        let polys = PLISTS[rng.gen_range(0..PLISTS.len())];
        if dim == 1 && polys.iter().any(|p| p.contains("t2")) {
            continue;
        }
        let d = if polys.iter().any(|p| p.contains("1/2")) { 2 } else { rng.gen_range(1..=3) };
        let atoms = (0..rng.gen_range(1..=5))
            .map(|_| {
                let r = (0..dim)
                    .map(|_| {
                        let den = rng.gen_range(1..=4);
                        q(rng.gen_range(0..=3 * den), den)
                    })
                    .collect();
                (r, q(rng.gen_range(1..=5), rng.gen_range(1..=3)))
            })
            .collect();
        let case = Case { dim, polys, d, atoms };
        if case.measure().support_check(&case.problem(), 0.0).unwrap().pass {
            return case;
        }
    }
}

fn suite() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..50).map(|_| random_case(&mut rng)).collect()
}

fn certify_exact(c: &Case) -> (Certificate<Q>, DeltaFamily<Q>) {
    let mu = c.measure();
    let p = c.problem::<Q>();
    let delta = DeltaFamily::computed(mu.clone(), p.clone()).unwrap();
    let gamma = |a: &ExponentVector| mu.moment(a);
    let cert = verify_all(&delta, Some(&gamma as GammaSource<Q>), &p, &c.window(), 0.0).unwrap();
    (cert, delta)
}

fn float_gamma(mu: &AtomicMeasure<f64>, a: &ExponentVector) -> fracmom::Result<f64> {
    let a: Vec<f64> = a.components().iter().map(|e| *e.numer() as f64 / *e.denom() as f64).collect();
    mu.gamma(&a)
}

fn certify_float(c: &Case) -> Certificate<f64> {
    let mu = c.measure().to_f64();
    let p = c.problem::<f64>();
    let delta = DeltaFamily::computed(mu.clone(), p.clone()).unwrap();
    let gamma = |a: &ExponentVector| float_gamma(&mu, a);
    verify_all(&delta, Some(&gamma as GammaSource<f64>), &p, &c.window(), 1e-9).unwrap()
}

struct Verdicts {
    overall: bool,
    cond1: bool,
    cond2: bool,
    base: bool,
    cond3: Vec<bool>,
}

fn verdicts<S: Scalar>(c: &Certificate<S>) -> Verdicts {
    Verdicts {
        overall: c.pass,
        cond1: c.cond1.pass,
        cond2: c.cond2.pass,
        base: c.base_psd.pass(),
        cond3: c.cond3.iter().map(|e| e.report.pass()).collect(),
    }
}

impl PartialEq for Verdicts {
    fn eq(&self, o: &Self) -> bool {
        (self.overall, self.cond1, self.cond2, self.base, &self.cond3)
            == (o.overall, o.cond1, o.cond2, o.base, &o.cond3)
    }
}

#[derive(Default)]
struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, n: usize, pass: bool, detail: String) {
        let line = format!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((pass, line));
    }

    fn timed(&mut self, n: usize, pass: bool, detail: &str, took: Duration, limit: Option<Duration>) {
        let within = limit.is_none_or(|l| took < l);
        let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
        self.record(n, pass && within, format!("{detail}; {:.2?}{budget}", took));
    }
}

fn criterion_1_and_2(report: &mut Report, cases: &[Case]) {
    let start = Instant::now();
    let mut passed = 0;
    let mut exact_zero = 0;
    let mut checked = 0;
    for c in cases {
        let (cert, delta) = certify_exact(c);
        passed += cert.pass as usize;
        let p = c.problem::<Q>();
        let r = check_condition2(&delta, &p, &IndexClosure::new(&c.window(), &p), 0.0).unwrap();
        checked += r.checked;
        exact_zero += (r.pass && r.worst_residual.is_zero() && r.failing.is_empty()) as usize;
    }
    let took = start.elapsed();
    report.timed(
        1,
        passed == cases.len(),
        &format!("necessity: {passed}/{} random supported measures PASS exactly at (D, 2D, 2)", cases.len()),
        took,
        Some(Duration::from_secs(30)),
    );
    report.record(
        2,
        exact_zero == cases.len(),
        format!("recurrence residual exactly 0 for {exact_zero}/{} measures ({checked} equations)", cases.len()),
    );
}

fn criterion_3(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let problem = json!({
        "n": 1,
        "polynomials": ["t1 - 2"],
        "measure": { "atoms": [{ "point": ["1"], "weight": "1" }] },
        "window": { "D": 1, "N": 0, "B": 0 }
    });
    std::fs::write(&path, problem.to_string()).unwrap();

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fracmom"))
        .args(["forward", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    let took = start.elapsed();

    let cert: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    let entry = &cert["cond3"][0];
    let vector: Vec<Q> = entry["witness"]["vector"]
        .as_array()
        .map(|v| v.iter().map(|x| x.as_str().unwrap().parse().unwrap()).collect())
        .unwrap_or_default();
    // unit mass at t = 1: t^α = 1 for every α, so vᵀ M v = (Σ v_i)² · p_1(1)
    let basis = build_basis(&Window::new(1, 0, 0).unwrap(), 1).unwrap();
    let p1_at_one = q(1, 1) - q(2, 1);
    let s: Q = vector.iter().cloned().fold(Q::zero(), |a, b| a + b);
    let value = s.clone() * s * p1_at_one;
    let reported = entry["witness"]["quadratic_form"].as_str().unwrap_or("");
    let ok = out.status.code() == Some(1)
        && entry["pass"] == json!(false)
        && vector.len() == basis.len()
        && value == -Q::one()
        && reported == "-1";
    report.timed(
        3,
        ok,
        &format!(
            "support violation: exit {:?}, witness {:?}, re-evaluated form {value}",
            out.status.code(),
            vector.iter().map(ToString::to_string).collect::<Vec<_>>()
        ),
        took,
        Some(Duration::from_secs(1)),
    );
}

fn random_extended(rng: &mut ChaCha8Rng, dim: usize) -> String {
    let den = rng.gen_range(1..=3);
    let terms: Vec<String> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let re = rng.gen_range(-5..=5);
            let im: i32 = if rng.gen_bool(0.3) { rng.gen_range(-3..=3) } else { 0 };
            let sign = if im < 0 { '-' } else { '+' };
            let mut t = format!("({re} {sign} {}i)", im.abs());
            for j in 1..=dim {
                let num = rng.gen_range(0..=4);
                if num > 0 {
                    t.push_str(&format!("*t{j}^({num}/{den})"));
                }
            }
            let b = rng.gen_range(0..=3);
            if b > 0 {
                t.push_str(&format!("*s^{b}"));
            }
            t
        })
        .collect();
    terms.join(" + ")
}

fn criterion_4(report: &mut Report) {
    let problems: Vec<ProblemPolys<Q>> = [
        (1, &[][..]),
        (1, &["t1 - 2"][..]),
        (1, &["t1^(1/2) - 1"][..]),
        (2, &["t1 - t2"][..]),
    ]
    .iter()
    .map(|(dim, texts)| {
        let polys = texts.iter().map(|t| parse_fracpoly(t, *dim).unwrap()).collect();
        ProblemPolys::new(*dim, polys).unwrap()
    })
    .collect();

    let start = Instant::now();
    let sigma_ok = problems.iter().all(|p| p.kernel_test(&p.sigma()).unwrap().in_kernel);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut members = 0;
    let mut shifted_out = 0;
    for i in 0..100 {
        let p = &problems[i % problems.len()];
        let qx: ExtendedPoly<Q> = parse_extended(&random_extended(&mut rng, p.dim()), p.dim()).unwrap();
        let sq = p.sigma().mul(&qx).unwrap();
        members += p.kernel_test(&sq).unwrap().in_kernel as usize;
        let one = ExtendedPoly::from_frac(FracPoly::one(p.dim()));
        let verdict = p.kernel_test(&sq.add(&one).unwrap()).unwrap();
        shifted_out += (!verdict.in_kernel && verdict.witness.is_some()) as usize;
    }
    let took = start.elapsed();
    report.timed(
        4,
        sigma_ok && members == 100 && shifted_out == 100,
        &format!("kernel: sigma TRUE = {sigma_ok}, sigma*q TRUE {members}/100, sigma*q + 1 FALSE {shifted_out}/100"),
        took,
        Some(Duration::from_secs(10)),
    );
}

fn criterion_5(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dim = rng.gen_range(1..=2);
        let atoms: Vec<(Vec<f64>, f64)> = (0..rng.gen_range(1..=5))
            .map(|_| {
                let s = (0..dim).map(|_| rng.gen_range(-5.0..=5.0)).collect();
                (s, rng.gen_range(0.1..3.0))
            })
            .collect();
        let nu = LogAtomicMeasure::new(dim, atoms.clone()).unwrap();
        let mu = nu.pushforward();
        for _ in 0..20 {
            let alpha: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..=3.0)).collect();
            let laplace: f64 = atoms
                .iter()
                .map(|(s, w)| w * (-s.iter().zip(&alpha).map(|(x, a)| x * a).sum::<f64>()).exp())
                .sum();
            let got = mu.gamma(&alpha).unwrap();
            worst = worst.max((got - laplace).abs() / laplace.abs());
        }
    }
    report.record(
        5,
        worst <= 1e-12,
        format!("Laplace change of variable: worst relative error {worst:.3e} over 400 evaluations (limit 1e-12)"),
    );
}

fn criterion_6(report: &mut Report, cases: &[Case]) {
    let mut agree = 0;
    let mut first_mismatch = None;
    for (i, c) in cases.iter().enumerate() {
        if verdicts(&certify_exact(c).0) == verdicts(&certify_float(c)) {
            agree += 1;
        } else if first_mismatch.is_none() {
            first_mismatch = Some(i);
        }
    }
    let mut detail = format!("exact/float agreement: {agree}/{} suite inputs match on every verdict (tol 1e-9)", cases.len());
    if let Some(i) = first_mismatch {
        detail.push_str(&format!("; first mismatch at case {i}"));
    }
    report.record(6, agree == cases.len(), detail);
}

fn run_cli(args: &[&str]) -> fracmom_cli::Outcome {
    fracmom_cli::run(std::iter::once("fracmom").chain(args.iter().copied()))
}

fn criterion_7(report: &mut Report, cases: &[Case]) {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut total = 0;
    for (i, c) in cases.iter().enumerate() {
        total += 1;
        let input = dir.path().join(format!("mu{i}.json"));
        let table = dir.path().join(format!("delta{i}.json"));
        std::fs::write(&input, c.problem_json().to_string()).unwrap();
        let forward = run_cli(&["forward", "--input", input.to_str().unwrap(), "--emit-delta", table.to_str().unwrap()]);
        let check = run_cli(&["check", "--input", table.to_str().unwrap()]);
        identical += (forward.code == check.code && !forward.stdout.is_empty() && forward.stdout == check.stdout) as usize;
    }
    report.record(
        7,
        identical == total,
        format!("round trip: {identical}/{total} exact certificates byte-identical after emit-delta and check"),
    );
}

/// Indices whose check reads `δ_idx`: the `γ` comparison at `β = 0`, the
/// recurrence at `idx` itself, and the recurrences one `β` level below.
fn affected(idx: &DeltaIndex, shifts: &[(ExponentVector, f64)]) -> Vec<DeltaIndex> {
    let mut out = vec![idx.clone()];
    if idx.beta > 0 {
        for (d, _) in shifts {
            if let Some(a) = idx.alpha.checked_sub(d) {
                out.push(DeltaIndex::new(a, idx.beta - 1));
            }
        }
    }
    out
}

fn criterion_8(report: &mut Report, cases: &[Case]) {
    let mut perturbed = 0;
    let mut flagged = 0;
    let mut first_miss = None;
    for c in cases.iter().take(6) {
        let mu = c.measure().to_f64();
        let p = c.problem::<f64>();
        let w = c.window();
        let closure = IndexClosure::new(&w, &p);
        let computed = DeltaFamily::computed(mu.clone(), p.clone()).unwrap();
        let table: BTreeMap<DeltaIndex, f64> = computed.tabulate(&closure.all).unwrap();
        let gammas: BTreeMap<ExponentVector, f64> = closure
            .moment_alphas()
            .into_iter()
            .map(|a| {
                let g = float_gamma(&mu, &a).unwrap();
                (a, g)
            })
            .collect();
        let gamma = |a: &ExponentVector| Ok(gammas[a]);
        let shifts = p.theta_inv_terms();
        for (idx, v) in &table {
            let mut entries = table.clone();
            entries.insert(idx.clone(), v + 1e-3 * v.abs().max(1.0));
            let delta = DeltaFamily::tabulated(c.dim, entries, "perturbed").unwrap();
            let cert = verify_all(&delta, Some(&gamma as GammaSource<f64>), &p, &w, 1e-9).unwrap();
            perturbed += 1;
            let near = affected(idx, &shifts);
            let by_cond1 = !cert.cond1.pass
                && cert.cond1.mismatches.iter().any(|m| idx.beta == 0 && m.alpha == idx.alpha);
            let by_cond2 = !cert.cond2.pass && cert.cond2.failing.iter().any(|f| near.contains(f));
            let by_base = !cert.base_psd.pass()
                && cert.base_psd.support.iter().any(|b| {
                    cert.base_psd.support.iter().any(|o| &b.add(o) == idx)
                });
            if by_cond1 || by_cond2 || by_base {
                flagged += 1;
            } else if first_miss.is_none() {
                first_miss = Some(idx.to_string());
            }
        }
    }
    let mut detail = format!(
        "perturbation: {flagged}/{perturbed} single-entry perturbations fail cond1, cond2 or base PSD at an affected index"
    );
    if let Some(m) = first_miss {
        detail.push_str(&format!("; first undetected entry {m}"));
    }
    report.record(8, flagged == perturbed && perturbed > 0, detail);
}

#[test]
fn acceptance() {
    let mut report = Report::default();
    let cases = suite();
    criterion_1_and_2(&mut report, &cases);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report, &cases);
    criterion_7(&mut report, &cases);
    criterion_8(&mut report, &cases);
    let failed: Vec<&String> = report.lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("\n"));
}
