//! Finite-window certification of a moment family.
//!
//! A family `γ` has a representing measure supported in
//! `∩_k {p_k ≥ 0}` iff some positive semi-definite `δ` on `Q_+^n × Z_+`
//! satisfies
//!
//! 1. `δ_{(α,0)} = γ_α`,
//! 2. `δ_{(α,β)} = Σ_d c_d δ_{(α+d, β+1)}`, where `Σ_d c_d t^d = θ_p^{-1}`,
//! 3. each localized family `Σ_ξ a_{kξ} δ_{(α+ξ,β)}` is positive semi-definite.
//!
//! The checks here run over one [`Window`]. A pass means the data is
//! consistent on that window; a failure carries a finite witness and is a
//! refutation.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frac_poly::ExponentVector;
use crate::moments::{
    alpha_json, build_basis, gram, psd_check, shifted_gram, DeltaFamily, DeltaIndex, GramVerdict,
    IndexClosure, Window,
};
use crate::scalar::Scalar;
use crate::theta_kernel::ProblemPolys;

/// Default relative tolerance for float mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Source of `γ_α` for condition (1).
pub type GammaSource<'a, S> = &'a dyn Fn(&ExponentVector) -> Result<S>;

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch<S> {
    pub alpha: ExponentVector,
    pub delta: S,
    pub gamma: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition1Report<S> {
    pub pass: bool,
    /// No `γ` was supplied; the family's own `δ_{(α,0)}` defines it.
    pub skipped: bool,
    pub checked: usize,
    pub mismatches: Vec<Mismatch<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition2Report<S> {
    pub pass: bool,
    pub checked: usize,
    /// Largest `|lhs − rhs|`; on ties the lowest index wins.
    pub worst_residual: S,
    /// `None` when every residual is exactly zero.
    pub index: Option<DeltaIndex>,
    pub failing: Vec<DeltaIndex>,
}

/// PSD verdict of one Gram matrix together with the basis it was built on.
#[derive(Clone, Debug, PartialEq)]
pub struct GramReport<S> {
    pub verdict: GramVerdict<S>,
    /// Basis elements carrying a non-zero witness coordinate.
    pub support: Vec<DeltaIndex>,
}

impl<S: Scalar> GramReport<S> {
    fn new(verdict: GramVerdict<S>, basis: &[DeltaIndex]) -> Self {
        let support = verdict
            .witness
            .as_ref()
            .map(|w| {
                w.vector
                    .iter()
                    .zip(basis)
                    .filter(|(x, _)| !x.is_zero())
                    .map(|(_, b)| b.clone())
                    .collect()
            })
            .unwrap_or_default();
        GramReport { verdict, support }
    }

    pub fn pass(&self) -> bool {
        self.verdict.psd
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.verdict.to_json();
        v["support"] = Value::Array(self.support.iter().map(DeltaIndex::to_json).collect());
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition3Entry<S> {
    /// One-based constraint index.
    pub k: usize,
    pub report: GramReport<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<S> {
    pub window: Window,
    pub base_psd: GramReport<S>,
    pub cond1: Condition1Report<S>,
    pub cond2: Condition2Report<S>,
    pub cond3: Vec<Condition3Entry<S>>,
    pub pass: bool,
    pub reasons: Vec<String>,
}

impl<S: Scalar> Certificate<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "overall": if self.pass { "PASS" } else { "FAIL" },
            "reasons": self.reasons,
            "scope": if self.pass {
                "consistent on this window only; not a proof of representability"
            } else {
                "refuted by a finite witness"
            },
            "mode": S::MODE,
            "window": self.window.to_json(),
            "cond1": {
                "pass": self.cond1.pass,
                "skipped": self.cond1.skipped,
                "checked": self.cond1.checked,
                "mismatches": self.cond1.mismatches.iter().map(|m| json!({
                    "alpha": alpha_json(&m.alpha),
                    "delta": m.delta.to_json(),
                    "gamma": m.gamma.to_json(),
                })).collect::<Vec<_>>(),
            },
            "cond2": {
                "pass": self.cond2.pass,
                "checked": self.cond2.checked,
                "worst_residual": self.cond2.worst_residual.to_json(),
                "index": self.cond2.index.as_ref().map(DeltaIndex::to_json),
                "failing": self.cond2.failing.iter().map(DeltaIndex::to_json).collect::<Vec<_>>(),
            },
            "cond3": self.cond3.iter().map(|e| {
                let mut v = e.report.to_json();
                v["k"] = json!(e.k);
                v["pass"] = json!(e.report.pass());
                v
            }).collect::<Vec<_>>(),
            "base_psd": self.base_psd.to_json(),
        })
    }
}

/// Condition (1) on every `α` with `(α, 0)` in the window closure.
pub fn check_condition1<S: Scalar>(
    delta: &DeltaFamily<S>,
    gamma: Option<GammaSource<'_, S>>,
    closure: &IndexClosure,
    tol: f64,
) -> Result<Condition1Report<S>> {
    let Some(gamma) = gamma else {
        return Ok(Condition1Report {
            pass: true,
            skipped: true,
            checked: 0,
            mismatches: Vec::new(),
        });
    };
    let alphas = closure.moment_alphas();
    let mut mismatches = Vec::new();
    for alpha in &alphas {
        let d = delta.get(&DeltaIndex::new(alpha.clone(), 0))?;
        let g = gamma(alpha)?;
        if !d.close_to(&g, tol) {
            mismatches.push(Mismatch {
                alpha: alpha.clone(),
                delta: d,
                gamma: g,
            });
        }
    }
    Ok(Condition1Report {
        pass: mismatches.is_empty(),
        skipped: false,
        checked: alphas.len(),
        mismatches,
    })
}

/// Condition (2): the `θ_p` recurrence at every recurrence index of the closure.
pub fn check_condition2<S: Scalar>(
    delta: &DeltaFamily<S>,
    problem: &ProblemPolys<S>,
    closure: &IndexClosure,
    tol: f64,
) -> Result<Condition2Report<S>> {
    let shifts = problem.theta_inv_terms();
    let mut worst: Option<(S, DeltaIndex)> = None;
    let mut failing = Vec::new();
    for idx in &closure.recurrence {
        let lhs = delta.get(idx)?;
        let mut rhs = S::zero();
        for (d, c) in &shifts {
            rhs = rhs + c.clone() * delta.get(&idx.shifted(d, 1))?;
        }
        if !lhs.close_to(&rhs, tol) {
            failing.push(idx.clone());
        }
        let residual = (lhs.clone() - rhs).abs();
        if residual.is_zero() {
            continue;
        }
        // ties keep the lowest index
        if worst.as_ref().is_none_or(|(w, _)| residual > *w) {
            worst = Some((residual, idx.clone()));
        }
    }
    let (worst_residual, index) = match worst {
        Some((r, i)) => (r, Some(i)),
        None => (S::zero(), None),
    };
    Ok(Condition2Report {
        pass: failing.is_empty(),
        checked: closure.recurrence.len(),
        worst_residual,
        index,
        failing,
    })
}

/// Condition (3): each localized Gram matrix over the window basis is PSD.
pub fn check_condition3<S: Scalar>(
    delta: &DeltaFamily<S>,
    problem: &ProblemPolys<S>,
    basis: &[DeltaIndex],
    tol: f64,
) -> Result<Vec<Condition3Entry<S>>> {
    problem
        .polys()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let m = shifted_gram(delta, basis, p)?;
            Ok(Condition3Entry {
                k: k + 1,
                report: GramReport::new(psd_check(&m, tol), basis),
            })
        })
        .collect()
}

/// Runs the base PSD check and conditions (1)–(3) on one window.
///
/// Tabulated families must cover the window closure; every missing index is
/// reported at once through [`Error::MissingEntries`].
pub fn verify_all<S: Scalar>(
    delta: &DeltaFamily<S>,
    gamma: Option<GammaSource<'_, S>>,
    problem: &ProblemPolys<S>,
    window: &Window,
    tol: f64,
) -> Result<Certificate<S>> {
    window.validate(problem)?;
    let closure = IndexClosure::new(window, problem);
    let missing = delta.missing(&closure.all);
    if !missing.is_empty() {
        return Err(Error::MissingEntries(missing));
    }
    let basis = build_basis(window, problem.dim())?;

    let base_psd = GramReport::new(psd_check(&gram(delta, &basis)?, tol), &basis);
    let cond1 = check_condition1(delta, gamma, &closure, tol)?;
    let cond2 = check_condition2(delta, problem, &closure, tol)?;
    let cond3 = check_condition3(delta, problem, &basis, tol)?;

    let mut reasons = Vec::new();
    if !base_psd.pass() {
        reasons.push("base_psd".to_string());
    }
    if !cond1.pass {
        reasons.push(format!("cond1: {} mismatches", cond1.mismatches.len()));
    }
    if !cond2.pass {
        let at = cond2
            .index
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default();
        reasons.push(format!("cond2: residual at {at}"));
    }
    for e in cond3.iter().filter(|e| !e.report.pass()) {
        reasons.push(format!("cond3: k={}", e.k));
    }

    Ok(Certificate {
        window: *window,
        pass: reasons.is_empty(),
        reasons,
        base_psd,
        cond1,
        cond2,
        cond3,
    })
}

/// Informational continuity probe for a closed-form `γ`: the largest relative
/// jump between neighbours on an axis sweep of `[0, max_alpha]`, at spacing
/// `h` and `h/2`. For a continuous family the finer jump shrinks.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityProbe {
    pub coarse_jump: f64,
    pub fine_jump: f64,
}

impl ContinuityProbe {
    pub fn looks_continuous(&self) -> bool {
        self.fine_jump <= 0.75 * self.coarse_jump || self.fine_jump < 1e-12
    }
}

pub fn continuity_probe(
    gamma: &dyn Fn(&[f64]) -> Result<f64>,
    dim: usize,
    max_alpha: f64,
    steps: usize,
) -> Result<ContinuityProbe> {
    let sweep = |n: usize| -> Result<f64> {
        let h = max_alpha / n as f64;
        let mut worst = 0.0f64;
        for j in 0..dim {
            let mut prev = gamma(&vec![0.0; dim])?;
            for i in 1..=n {
                let mut a = vec![0.0; dim];
                a[j] = h * i as f64;
                let cur = gamma(&a)?;
                worst = worst.max((cur - prev).abs() / (1.0 + prev.abs()));
                prev = cur;
            }
        }
        Ok(worst)
    };
    Ok(ContinuityProbe {
        coarse_jump: sweep(steps)?,
        fine_jump: sweep(2 * steps)?,
    })
}
