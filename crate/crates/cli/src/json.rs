//! JSON encodings of reports and verdicts. Rationals are strings such as
//! `"-3/2"`, polynomials and forms use the `.frm` expression syntax.

use martinet_core::invariants::{IdealData, InvariantReport, KernelField, MartinetKind, Sigma22Data};
use martinet_core::normal_form::{Category, Decomposition, EquivalenceVerdict};
use martinet_core::scalar_poly::RegularSequence;
use martinet_core::{Chart, Rational, Subspace};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "1";

pub fn rational(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn subspace(s: &Subspace, chart: &Chart) -> Value {
    let basis: Vec<Vec<Value>> = s.basis().iter().map(|v| v.iter().map(rational).collect()).collect();
    json!({ "dim": s.dim(), "basis": basis, "display": s.format_with(chart) })
}

pub fn kind_name(k: MartinetKind) -> &'static str {
    match k {
        MartinetKind::NonSingular => "non-singular",
        MartinetKind::StructurallySmooth => "structurally-smooth",
        MartinetKind::Singular => "singular",
    }
}

pub fn category_name(c: Category) -> &'static str {
    match c {
        Category::Complex => "C",
        Category::Real => "R",
    }
}

fn ideal(d: &IdealData) -> Value {
    let verdict = match &d.verdict {
        RegularSequence::IndependentGradients => json!({ "kind": "independent-gradients" }),
        RegularSequence::PrimaryWitness { linear_form, k } => {
            json!({ "kind": "primary-witness", "linear_form": linear_form, "k": k })
        }
        RegularSequence::Inconclusive => json!({ "kind": "inconclusive" }),
    };
    json!({
        "annihilator": d.annihilator.to_string(),
        "generators": [d.generators[0].to_string(), d.generators[1].to_string()],
        "regular": d.verdict.is_regular(),
        "verdict": verdict,
    })
}

fn kernel_field(k: &KernelField) -> Value {
    match k {
        KernelField::Exists(x) => json!({ "status": "exists", "field": x.to_string() }),
        KernelField::Obstructed { order } => json!({ "status": "obstructed", "order": order }),
        KernelField::Open { order } => json!({ "status": "open", "order": order }),
    }
}

pub fn kernel_field_text(k: &KernelField) -> String {
    match k {
        KernelField::Exists(x) => format!("exists: {x}"),
        KernelField::Obstructed { order } => format!("obstructed at order {order}"),
        KernelField::Open { order } => format!("open up to order {order}"),
    }
}

pub fn sigma22(s: &Sigma22Data) -> Value {
    let opt = |p: &Option<martinet_core::TruncatedPoly>| p.as_ref().map(|p| Value::String(p.to_string()));
    json!({
        "label": s.label.name(),
        "discriminant": rational(&s.discriminant),
        "a": opt(&s.a),
        "b": opt(&s.b),
        "h": opt(&s.h),
    })
}

pub fn report(r: &InvariantReport) -> Value {
    let md = &r.martinet;
    let chart = md.f.chart();
    let sub = md.slice.as_ref().map(|s| s.sub().clone());
    let on_sub = |s: &Option<Subspace>| match (s, &sub) {
        (Some(s), Some(c)) => subspace(s, c),
        _ => Value::Null,
    };
    json!({
        "n": r.n,
        "jet": r.jet,
        "regime": r.regime.name(),
        "martinet": {
            "function": md.f.to_string(),
            "kind": kind_name(md.kind),
            "order": r.martinet_order,
            "pivot": md.pivot.map(|p| chart.var(p).to_string()),
            "adapted": md.change.is_none(),
        },
        "sigma": md.sigma.as_ref().map(|s| s.to_string()),
        "sigma_chart": sub.as_ref().map(|c| c.vars().to_vec()),
        "kernel": subspace(&r.kernel, chart),
        "kernel_on_sigma2": on_sub(&r.kernel_on_sigma2),
        "tangent_z": on_sub(&r.tangent_z),
        "rank_sigma": r.rank_sigma,
        "kernel_in_sigma2": r.kernel_in_sigma2,
        "kernel_tangent_to_z": r.kernel_tangent_to_z,
        "orientation": r.orientation,
        "dim_span_j1": r.dim_span_j1,
        "ideal": r.ideal.as_ref().map(ideal),
        "kernel_field": r.kernel_field.as_ref().map(kernel_field),
        "sigma22": r.sigma22.as_ref().map(sigma22),
        "notes": r.notes,
    })
}

pub fn verdict(cat: Category, v: &EquivalenceVerdict) -> Value {
    let evidence: Vec<Value> = v.evidence.iter().map(|e| json!({ "name": e.name, "detail": e.detail })).collect();
    json!({
        "category": category_name(cat),
        "outcome": v.outcome.name(),
        "theorem": v.theorem.name(),
        "evidence": evidence,
    })
}

pub fn decomposition(d: &Decomposition) -> Value {
    json!({
        "pivot": d.slice.full().var(d.slice.pivot()),
        "sigma_chart": d.slice.sub().vars(),
        "alpha": d.alpha.to_string(),
        "sigma": d.sigma.to_string(),
        "theta": d.theta.to_string(),
        "contact": d.contact,
        "adapted": d.change.is_none(),
    })
}

/// Floats that JSON can carry; non-finite values become `null`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}
