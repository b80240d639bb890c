use std::fmt::Write;

use fracmom::verifier::GramReport;
use fracmom::{Certificate, DeltaIndex, GramVerdict, KernelVerdict, Scalar, SymMatrix, Window};
use serde_json::{json, Value};

pub(crate) type ShiftedGram<S> = (usize, String, SymMatrix<S>, GramVerdict<S>);

pub(crate) fn json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn window_text(w: &Window) -> String {
    format!("D={} N={} B={}", w.denominator, w.degree, w.beta_max)
}

fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn gram_line<S: Scalar>(r: &GramReport<S>) -> String {
    let mut line = if r.pass() { "PSD".to_string() } else { "NOT PSD".to_string() };
    if let Some(w) = &r.verdict.witness {
        let _ = write!(
            line,
            "; witness v = [{}], vᵀMv = {}; support {}",
            list(&w.vector),
            w.value,
            list(&r.support)
        );
    }
    line
}

pub(crate) fn certificate_text<S: Scalar>(c: &Certificate<S>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "overall: {}", if c.pass { "PASS" } else { "FAIL" });
    let _ = writeln!(
        out,
        "scope: {}",
        if c.pass {
            "consistent on this window only; not a proof of representability"
        } else {
            "refuted by a finite witness"
        }
    );
    let _ = writeln!(out, "mode: {}", S::MODE);
    let _ = writeln!(out, "window: {}", window_text(&c.window));
    let _ = writeln!(out, "base_psd: {}", gram_line(&c.base_psd));
    if c.cond1.skipped {
        let _ = writeln!(out, "cond1: skipped (no gamma)");
    } else {
        let _ = writeln!(
            out,
            "cond1: {} ({} checked, {} mismatches)",
            if c.cond1.pass { "PASS" } else { "FAIL" },
            c.cond1.checked,
            c.cond1.mismatches.len()
        );
        for m in &c.cond1.mismatches {
            let _ = writeln!(out, "  alpha {}: delta {} vs gamma {}", m.alpha, m.delta, m.gamma);
        }
    }
    let _ = write!(
        out,
        "cond2: {} ({} checked, worst residual {}",
        if c.cond2.pass { "PASS" } else { "FAIL" },
        c.cond2.checked,
        c.cond2.worst_residual
    );
    if let Some(idx) = &c.cond2.index {
        let _ = write!(out, " at {idx}");
    }
    let _ = writeln!(out, ")");
    for e in &c.cond3 {
        let _ = writeln!(out, "cond3 k={}: {}", e.k, gram_line(&e.report));
    }
    if !c.reasons.is_empty() {
        let _ = writeln!(out, "reasons: {}", c.reasons.join("; "));
    }
    out
}

pub(crate) fn kernel_text<S: Scalar>(v: &KernelVerdict<S>) -> String {
    let mut out = format!("{}\n", if v.in_kernel { "TRUE" } else { "FALSE" });
    if let Some(w) = &v.witness {
        let _ = writeln!(out, "witness t = ({}), value = {} + {}i", list(&w.t), w.value.re, w.value.im);
    }
    out
}

pub(crate) fn psd_json<S: Scalar>(
    window: &Window,
    basis: &[DeltaIndex],
    base: (&SymMatrix<S>, &GramVerdict<S>),
    shifted: &[ShiftedGram<S>],
) -> Value {
    json!({
        "mode": S::MODE,
        "window": window.to_json(),
        "basis": basis.iter().map(DeltaIndex::to_json).collect::<Vec<_>>(),
        "base": { "matrix": base.0.to_json(), "verdict": base.1.to_json() },
        "shifted": shifted.iter().map(|(k, p, m, v)| json!({
            "k": k,
            "polynomial": p,
            "matrix": m.to_json(),
            "verdict": v.to_json(),
        })).collect::<Vec<_>>(),
    })
}

fn matrix_text<S: Scalar>(out: &mut String, m: &SymMatrix<S>, v: &GramVerdict<S>) {
    for row in m.rows() {
        let _ = writeln!(out, "  [{}]", list(&row));
    }
    let _ = writeln!(out, "  {}", if v.psd { "PSD" } else { "NOT PSD" });
    if let Some(w) = &v.witness {
        let _ = writeln!(out, "  witness v = [{}], vᵀMv = {}", list(&w.vector), w.value);
    }
}

pub(crate) fn psd_text<S: Scalar>(
    window: &Window,
    basis: &[DeltaIndex],
    base: (&SymMatrix<S>, &GramVerdict<S>),
    shifted: &[ShiftedGram<S>],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", S::MODE);
    let _ = writeln!(out, "window: {}", window_text(window));
    let _ = writeln!(out, "basis: {}", list(basis));
    let _ = writeln!(out, "base gram:");
    matrix_text(&mut out, base.0, base.1);
    for (k, p, m, v) in shifted {
        let _ = writeln!(out, "shifted gram k={k} ({p}):");
        matrix_text(&mut out, m, v);
    }
    out
}
