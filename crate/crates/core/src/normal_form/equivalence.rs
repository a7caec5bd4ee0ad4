use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::decompose_adapted;
use crate::error::{Error, Result};
use crate::exterior::{DiffForm, PolyMapGerm};
use crate::invariants::{
    check_closed_2form, full_report, InvariantConfig, InvariantReport, KernelField, Regime, Sigma22Label,
};
use crate::linalg::det_dense;
use crate::scalar_poly::{
    find_quasi_homogeneous_weights, isolated_singularity_certificate, local_divide, q, q0, signum, Chart,
    Nakayama, Rational,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Complex,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Equivalent => "equivalent",
            Outcome::NotEquivalent => "not_equivalent",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

/// The result that settled the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    Identical,
    /// Both forms are symplectic.
    Darboux,
    /// `omega1 - omega0` vanishes along the common hypersurface.
    RelativeDarboux,
    /// Common restriction and common kernel of `omega^{n-1}` at 0.
    CommonKernelComplex,
    CommonKernelReal,
    /// `rank sigma|0 = 2n-4` and the 1-jet of `sigma^{n-1}` spans a plane.
    JetSpanTwo,
    /// `I(sigma)` generated by a regular sequence.
    RegularIdeal,
    /// No vector field with `X(0) != 0` annihilates `sigma`.
    NoKernelFieldComplex,
    NoKernelFieldReal,
    /// Annihilators agree at 0 modulo `sigma^{n-2}`.
    AnnihilatorComparison,
    /// Quasi-homogeneous Martinet function with an isolated singularity.
    QuasiHomogeneousSingular,
    /// A diffeomorphism invariant differs.
    InvariantMismatch,
    /// Opposite canonical orientations of the common hypersurface.
    Orientation,
    None,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Identical => "identical",
            Theorem::Darboux => "darboux",
            Theorem::RelativeDarboux => "relative-darboux",
            Theorem::CommonKernelComplex => "common-kernel-complex",
            Theorem::CommonKernelReal => "common-kernel-real",
            Theorem::JetSpanTwo => "jet-span-two",
            Theorem::RegularIdeal => "regular-ideal",
            Theorem::NoKernelFieldComplex => "no-kernel-field-complex",
            Theorem::NoKernelFieldReal => "no-kernel-field-real",
            Theorem::AnnihilatorComparison => "annihilator-comparison",
            Theorem::QuasiHomogeneousSingular => "quasi-homogeneous-singular",
            Theorem::InvariantMismatch => "invariant-mismatch",
            Theorem::Orientation => "orientation",
            Theorem::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub name: String,
    pub detail: String,
}

fn ev(name: &str, detail: impl Into<String>) -> Evidence {
    Evidence { name: name.into(), detail: detail.into() }
}

#[derive(Clone, Debug)]
pub struct EquivalenceVerdict {
    pub outcome: Outcome,
    pub theorem: Theorem,
    pub evidence: Vec<Evidence>,
}

impl EquivalenceVerdict {
    fn new(outcome: Outcome, theorem: Theorem, evidence: Vec<Evidence>) -> Self {
        EquivalenceVerdict { outcome, theorem, evidence }
    }

    pub fn has_evidence(&self, name: &str) -> bool {
        self.evidence.iter().any(|e| e.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceConfig {
    pub invariants: InvariantConfig,
    pub max_weight: u32,
    pub nakayama_k: u32,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig { invariants: InvariantConfig::default(), max_weight: 6, nakayama_k: 8 }
    }
}

fn opt<T: core::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::from("-"),
    }
}

/// Diffeomorphism invariants that must agree for equivalent germs.
fn invariant_table(r: &InvariantReport, cat: Category) -> Vec<(&'static str, String)> {
    let label = r.sigma22.as_ref().map(|s| match cat {
        Category::Real => s.label.name(),
        Category::Complex => {
            if s.label == Sigma22Label::Parabolic {
                "degenerate"
            } else {
                "nondegenerate"
            }
        }
    });
    vec![
        ("regime", String::from(r.regime.name())),
        ("martinet_order", opt(&r.martinet_order)),
        ("kernel_dim", format!("{}", r.kernel.dim())),
        ("rank_sigma", opt(&r.rank_sigma)),
        ("kernel_in_sigma2", opt(&r.kernel_in_sigma2)),
        ("kernel_tangent_to_sigma22", opt(&r.kernel_tangent_to_z)),
        ("dim_span_j1", opt(&r.dim_span_j1)),
        ("sigma22_label", String::from(label.unwrap_or("-"))),
    ]
}

/// Decides `Phi^* omega1 = omega0` by the sufficient conditions available;
/// `not_equivalent` only comes from invariants or orientation.
pub fn decide_equivalence(
    w0: &DiffForm,
    w1: &DiffForm,
    cat: Category,
    cfg: &EquivalenceConfig,
) -> Result<EquivalenceVerdict> {
    if !Chart::compatible(w0.chart(), w1.chart()) {
        return Err(Error::ChartMismatch);
    }
    check_closed_2form(w0)?;
    check_closed_2form(w1)?;
    if w0.eq_to_common_jet(w1) {
        return Ok(EquivalenceVerdict::new(
            Outcome::Equivalent,
            Theorem::Identical,
            vec![ev("identical", "forms agree to the common jet order")],
        ));
    }
    let r0 = full_report(w0, &cfg.invariants)?;
    let r1 = full_report(w1, &cfg.invariants)?;
    let chart = w0.chart();
    let mut evidence = vec![
        ev("kernel_0", r0.kernel.format_with(chart)),
        ev("kernel_1", r1.kernel.format_with(chart)),
    ];
    if r0.regime == Regime::NonSingular && r1.regime == Regime::NonSingular {
        evidence.push(ev("regime", "both forms are symplectic"));
        return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::Darboux, evidence));
    }
    let mut mismatch = false;
    for ((name, a), (_, b)) in invariant_table(&r0, cat).into_iter().zip(invariant_table(&r1, cat)) {
        if a != b {
            mismatch = true;
            evidence.push(ev(name, format!("{a} vs {b}")));
        }
    }
    if mismatch {
        if r0.kernel != r1.kernel {
            evidence.push(ev("kernel", "kernels of omega^{n-1} at 0 differ"));
        }
        return Ok(EquivalenceVerdict::new(Outcome::NotEquivalent, Theorem::InvariantMismatch, evidence));
    }
    let u = match local_divide(r1.f(), r0.f()) {
        Ok(u) if !u.constant_term().is_zero() => u,
        _ => {
            evidence.push(ev("martinet", "Martinet functions do not agree up to a unit"));
            return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
        }
    };
    let s = signum(&u.constant_term());
    evidence.push(ev("relative_orientation", format!("{}", if s > 0 { "same" } else { "opposite" })));
    match r0.regime {
        Regime::Singular => singular_branch(w0, w1, &r0, s, cfg, evidence),
        _ => smooth_branch(w1, &r0, &r1, s, cat, evidence),
    }
}

fn smooth_branch(
    w1: &DiffForm,
    r0: &InvariantReport,
    r1: &InvariantReport,
    s: i8,
    cat: Category,
    mut evidence: Vec<Evidence>,
) -> Result<EquivalenceVerdict> {
    let md = &r0.martinet;
    let n = md.n;
    let slice = md.slice.as_ref().expect("smooth");
    let p = slice.pivot();
    let n0 = md.normalized.as_ref().expect("smooth");
    let n1 = md.normalize(w1)?;
    let diff = n1.try_add(&-n0)?;
    if s > 0 && diff.coeffs().values().all(|c| c.is_divisible_by_var(p)) {
        evidence.push(ev("restriction_to_tangent_bundle", "omega1 - omega0 vanishes along the hypersurface"));
        return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::RelativeDarboux, evidence));
    }
    let sigma0 = slice.restrict(n0)?;
    let sigma1 = slice.restrict(&n1)?;
    if !sigma0.eq_to_common_jet(&sigma1) {
        evidence.push(ev("restriction", "restrictions differ in the common adapted chart"));
        return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
    }
    evidence.push(ev("restriction", "common restriction to the hypersurface"));
    let r = sigma0.rank_at_0()?;
    if r >= 2 * n - 2 {
        evidence.push(ev("sigma20", "both forms are Sigma20 points; no certificate in scope"));
        return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
    }
    let same_orientation = s > 0;
    let real = cat == Category::Real;
    if r0.kernel == r1.kernel {
        evidence.push(ev("kernel", "kernels of omega^{n-1} at 0 coincide"));
        if !real {
            return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::CommonKernelComplex, evidence));
        }
        if same_orientation {
            return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::CommonKernelReal, evidence));
        }
    }
    if r == 2 * n - 4 && r0.dim_span_j1 == Some(2) && (!real || same_orientation) {
        evidence.push(ev("dim_span_j1", "2"));
        return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::JetSpanTwo, evidence));
    }
    if n == 2 && r == 0 {
        if let Some(ideal) = &r0.ideal {
            if ideal.verdict.is_regular() {
                evidence.push(ev("ideal", format!("{:?}", ideal.verdict)));
                let thm = if real { Theorem::RegularIdeal } else { Theorem::NoKernelFieldComplex };
                return Ok(EquivalenceVerdict::new(Outcome::Equivalent, thm, evidence));
            }
        }
        if let Some(KernelField::Obstructed { order }) = &r0.kernel_field {
            evidence.push(ev("kernel_field", format!("obstructed at order {order}")));
            if !real {
                return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::NoKernelFieldComplex, evidence));
            }
            if same_orientation {
                return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::NoKernelFieldReal, evidence));
            }
        }
    }
    if r <= 2 * n - 4 {
        let d0 = decompose_adapted(n0, slice, None)?;
        let d1 = decompose_adapted(&n1, slice, None)?;
        let s_low = sigma0.truncate(0).power(n - 2)?;
        let a0 = d0.alpha.truncate(0);
        let a1 = d1.alpha.truncate(0);
        let line = a1.wedge(&a0)?.wedge(&s_low)?;
        if line.eval_at_0().is_zero() && d0.contact && d1.contact && (!real || same_orientation) {
            evidence.push(ev("annihilators", "alpha1|0 ^ alpha0|0 ^ sigma^{n-2}|0 = 0"));
            return Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::AnnihilatorComparison, evidence));
        }
    }
    if real && !same_orientation {
        match orientation_reversing_symmetry(&sigma0)? {
            None => {
                evidence.push(ev(
                    "orientation",
                    "canonical orientations of the common hypersurface are opposite",
                ));
                return Ok(EquivalenceVerdict::new(Outcome::NotEquivalent, Theorem::Orientation, evidence));
            }
            Some(m) => {
                evidence.push(ev(
                    "orientation",
                    format!("orientations are opposite but sigma has the reversing symmetry {m:?}"),
                ));
            }
        }
    }
    evidence.push(ev("certificates", "no sufficient condition applies"));
    Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence))
}

fn singular_branch(
    w0: &DiffForm,
    w1: &DiffForm,
    r0: &InvariantReport,
    s: i8,
    cfg: &EquivalenceConfig,
    mut evidence: Vec<Evidence>,
) -> Result<EquivalenceVerdict> {
    let f = r0.f();
    let Some(weights) = find_quasi_homogeneous_weights(f, cfg.max_weight) else {
        evidence.push(ev("quasi_homogeneous", "no weights found"));
        return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
    };
    evidence.push(ev("weights", format!("{weights:?}")));
    match isolated_singularity_certificate(f, cfg.nakayama_k) {
        Nakayama::Certified { k } => evidence.push(ev("isolated_singularity", format!("m^{k} in jacobian ideal"))),
        Nakayama::NotCertified { .. } => {
            evidence.push(ev("isolated_singularity", "not certified"));
            return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
        }
    }
    let df = DiffForm::function(f.clone()).ext_d();
    let diff = w1.try_add(&-w0)?;
    let prod = df.wedge(&diff)?;
    if prod.coeffs().values().any(|c| local_divide(c, f).is_err()) {
        evidence.push(ev("regular_part", "restrictions to the regular part differ"));
        return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
    }
    evidence.push(ev("regular_part", "df ^ (omega1 - omega0) is divisible by f"));
    if s < 0 {
        evidence.push(ev("orientation", "opposite orientations of the regular part"));
        return Ok(EquivalenceVerdict::new(Outcome::Inconclusive, Theorem::None, evidence));
    }
    Ok(EquivalenceVerdict::new(Outcome::Equivalent, Theorem::QuasiHomogeneousSingular, evidence))
}

/// A signed coordinate permutation with negative determinant preserving
/// `sigma`, searched for charts of dimension at most 5.
pub(crate) fn orientation_reversing_symmetry(sigma: &DiffForm) -> Result<Option<Vec<Vec<Rational>>>> {
    let chart = sigma.chart();
    let d = chart.dim();
    if d > 5 {
        return Ok(None);
    }
    let mut perms = Vec::new();
    permutations(&mut (0..d).collect(), 0, &mut perms);
    for perm in &perms {
        for signs in 0u32..1 << d {
            let mut m = vec![vec![q0(); d]; d];
            for (i, &j) in perm.iter().enumerate() {
                m[i][j] = if signs >> i & 1 == 1 { q(-1) } else { q(1) };
            }
            if signum(&det_dense(&m)) >= 0 {
                continue;
            }
            let map = PolyMapGerm::linear(chart, chart, &m)?;
            if sigma.pullback(&map)?.eq_to_common_jet(sigma) {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::TruncatedPoly;
    use alloc::sync::Arc;

    fn chart4() -> Arc<Chart> {
        Chart::new(["p1", "x", "y", "z"]).unwrap()
    }

    fn v(c: &Arc<Chart>, i: usize) -> TruncatedPoly {
        TruncatedPoly::var(c, 8, i)
    }

    fn d(c: &Arc<Chart>, i: usize) -> DiffForm {
        DiffForm::basis(c, 8, i)
    }

    fn with_alpha(c: &Arc<Chart>, alpha: &DiffForm, sigma: &DiffForm) -> DiffForm {
        &alpha.mul_poly(&v(c, 0)).ext_d().with_jet(8) + sigma
    }

    #[test]
    fn the_two_kernel_examples_are_distinguished() {
        let c = chart4();
        let sigma = d(&c, 1).wedge(&d(&c, 2)).unwrap().mul_poly(&v(&c, 1));
        let w0 = with_alpha(&c, &(&d(&c, 1) - &d(&c, 2).mul_poly(&v(&c, 3))), &sigma);
        let w1 = with_alpha(&c, &(&d(&c, 2) + &d(&c, 1).mul_poly(&v(&c, 3))), &sigma);
        for cat in [Category::Real, Category::Complex] {
            let verdict = decide_equivalence(&w0, &w1, cat, &EquivalenceConfig::default()).unwrap();
            assert_eq!(verdict.outcome, Outcome::NotEquivalent, "{verdict:?}");
            assert!(verdict.has_evidence("kernel"));
        }
    }

    #[test]
    fn symplectic_forms_are_equivalent() {
        let c = chart4();
        let w0 = &d(&c, 0).wedge(&d(&c, 1)).unwrap() + &d(&c, 2).wedge(&d(&c, 3)).unwrap();
        let w1 = &w0 + &d(&c, 1).wedge(&d(&c, 2)).unwrap().mul_poly(&v(&c, 1).scale_int(2));
        assert!(w1.is_closed());
        let verdict = decide_equivalence(&w0, &w1, Category::Real, &EquivalenceConfig::default()).unwrap();
        assert_eq!(verdict.theorem, Theorem::Darboux);
    }

    #[test]
    fn perturbation_along_hypersurface_is_relative_darboux() {
        let c = chart4();
        let w0 = &d(&c, 0).wedge(&d(&c, 1)).unwrap().mul_poly(&v(&c, 0)) + &d(&c, 2).wedge(&d(&c, 3)).unwrap();
        let bump = d(&c, 3).mul_poly(&(&v(&c, 0) * &v(&c, 0))).ext_d().with_jet(8);
        let w1 = &w0 + &bump;
        let verdict = decide_equivalence(&w0, &w1, Category::Real, &EquivalenceConfig::default()).unwrap();
        assert_eq!(verdict.outcome, Outcome::Equivalent);
        assert_eq!(verdict.theorem, Theorem::RelativeDarboux);
    }

    #[test]
    fn opposite_orientation_example() {
        let c = chart4();
        let (x, y, z) = (v(&c, 1), v(&c, 2), v(&c, 3));
        let alpha = &d(&c, 3) + &d(&c, 2).mul_poly(&x);
        let a = &(&x + &y.scale_int(2)) + &z.scale_int(3);
        let b = &(&x * &x) - &x;
        let beta = &d(&c, 1).mul_poly(&a) - &d(&c, 2).mul_poly(&b);
        let sigma = alpha.wedge(&beta).unwrap().mul_poly(&x);
        assert!(sigma.is_closed());
        let w0 = with_alpha(&c, &alpha, &sigma);
        let w1 = with_alpha(&c, &(&alpha + &beta.scale_int(2)), &sigma);
        let cfg = EquivalenceConfig::default();
        let real = decide_equivalence(&w0, &w1, Category::Real, &cfg).unwrap();
        assert_eq!(real.outcome, Outcome::NotEquivalent, "{real:?}");
        assert_eq!(real.theorem, Theorem::Orientation);
        let complex = decide_equivalence(&w0, &w1, Category::Complex, &cfg).unwrap();
        assert_eq!(complex.outcome, Outcome::Equivalent, "{complex:?}");
    }

    #[test]
    fn reflection_symmetry_is_found() {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let s = DiffForm::basis(&c, 4, 0).wedge(&DiffForm::basis(&c, 4, 1)).unwrap().mul_poly(&TruncatedPoly::var(&c, 4, 0));
        assert!(orientation_reversing_symmetry(&s).unwrap().is_some());
    }
}
