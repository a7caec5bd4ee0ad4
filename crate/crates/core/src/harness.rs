//! Randomized invariance checks: pull a form back by random polynomial
//! diffeomorphism germs and compare everything the pipeline computes.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{formal_inverse, DiffForm, PolyMapGerm, EXACT_JET};
use crate::invariants::{compare_orientation, default_frame, full_report, orientation_sign, InvariantReport};
use crate::linalg::{det_dense, inverse_dense, mat_vec};
use crate::normal_form::{decide_equivalence, Category, EquivalenceConfig, Outcome};
use crate::scalar_poly::{monomials_of_degree, q, signum, Chart, Rational, TruncatedPoly};

/// Random polynomial diffeomorphism germs `x -> A x + H(x)` with an integer
/// invertible `A` and sparse integer terms `H` of degrees 2 to `max_degree`.
#[derive(Clone, Debug)]
pub struct DiffeoGen {
    pub seed: u64,
    pub max_degree: u32,
    /// Probability that a given monomial appears in `H`.
    pub density: f64,
    /// Coefficients are drawn from `[-bound, bound]`.
    pub bound: i64,
}

impl DiffeoGen {
    pub fn new(seed: u64) -> Self {
        DiffeoGen { seed, max_degree: 3, density: 0.1, bound: 2 }
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// The map of trial `index`; depends on `(seed, index)` only.
    pub fn generate(&self, chart: &Arc<Chart>, index: u64) -> Result<PolyMapGerm> {
        let dim = chart.dim();
        let mut rng = self.rng(index);
        let a = loop {
            let a: Vec<Vec<Rational>> = (0..dim)
                .map(|_| (0..dim).map(|_| q(rng.random_range(-self.bound..=self.bound))).collect())
                .collect();
            if det_dense(&a) != q(0) {
                break a;
            }
        };
        let mut comps = Vec::with_capacity(dim);
        for row in &a {
            let mut c = TruncatedPoly::zero(chart, EXACT_JET);
            for (j, v) in row.iter().enumerate() {
                c = &c + &TruncatedPoly::var(chart, EXACT_JET, j).scale(v);
            }
            for deg in 2..=self.max_degree {
                for m in monomials_of_degree(dim, deg) {
                    if rng.random_bool(self.density) {
                        let v = rng.random_range(-self.bound..=self.bound);
                        if v != 0 {
                            c.add_term(m, q(v));
                        }
                    }
                }
            }
            comps.push(c);
        }
        PolyMapGerm::new(chart, chart, comps)
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct TrialReport {
    pub index: u64,
    /// Sign of `det D Phi(0)`.
    pub det_sign: i8,
    pub checks: Vec<Check>,
    /// Outcome of the decider on `(omega, Phi^* omega)` per category.
    pub verdicts: Vec<(Category, Outcome, &'static str)>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub seed: u64,
    pub jet: u32,
    pub trials: Vec<TrialReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.trials.iter().all(TrialReport::passed)
    }

    /// `(trial index, check name, detail)` of every failed assertion.
    pub fn failures(&self) -> Vec<(u64, &'static str, &str)> {
        self.trials
            .iter()
            .flat_map(|t| t.checks.iter().filter(|c| !c.ok).map(move |c| (t.index, c.name, c.detail.as_str())))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub trials: u64,
    pub seed: u64,
    /// Jet order the comparisons run at.
    pub jet: u32,
    pub equivalence: EquivalenceConfig,
    /// Run the decider on every pair (the expensive part).
    pub decide: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig { trials: 50, seed: 0, jet: 4, equivalence: EquivalenceConfig::default(), decide: true }
    }
}

fn check(checks: &mut Vec<Check>, name: &'static str, ok: bool, detail: String) {
    checks.push(Check { name, ok, detail });
}

fn eq_check<T: PartialEq + core::fmt::Debug>(checks: &mut Vec<Check>, name: &'static str, a: T, b: T) {
    let ok = a == b;
    check(checks, name, ok, format!("{a:?} vs {b:?}"));
}

/// Compares `omega` with `Phi^* omega` on every invariant.
pub fn check_pair(w: &DiffForm, phi: &PolyMapGerm, index: u64, cfg: &HarnessConfig) -> Result<TrialReport> {
    let w = w.truncate(cfg.jet);
    let pulled = w.pullback(phi)?;
    let a = phi.linear_part();
    let det = det_dense(&a);
    if det == q(0) {
        return Err(Error::SingularLinearPart);
    }
    let ainv = inverse_dense(&a).ok_or(Error::SingularLinearPart)?;
    let icfg = &cfg.equivalence.invariants;
    let r0 = full_report(&w, icfg)?;
    let r1 = full_report(&pulled, icfg)?;
    let mut checks = Vec::new();
    compare_reports(&mut checks, &r0, &r1, &a);
    orientation_checks(&mut checks, &r0, &r1, phi, &ainv, signum(&det), cfg.jet)?;

    let mut verdicts = Vec::new();
    if cfg.decide {
        for cat in [Category::Complex, Category::Real] {
            let v = decide_equivalence(&w, &pulled, cat, &cfg.equivalence)?;
            check(
                &mut checks,
                "no-false-separation",
                v.outcome != Outcome::NotEquivalent,
                format!("{cat:?}: {} by {}", v.outcome.name(), v.theorem.name()),
            );
            verdicts.push((cat, v.outcome, v.theorem.name()));
        }
    }
    Ok(TrialReport { index, det_sign: signum(&det), checks, verdicts })
}

fn compare_reports(checks: &mut Vec<Check>, r0: &InvariantReport, r1: &InvariantReport, a: &[Vec<Rational>]) {
    eq_check(checks, "regime", r0.regime, r1.regime);
    eq_check(checks, "martinet-order", r0.martinet_order, r1.martinet_order);
    eq_check(checks, "rank-sigma", r0.rank_sigma, r1.rank_sigma);
    eq_check(checks, "kernel-dim", r0.kernel.dim(), r1.kernel.dim());
    let moved = r0.kernel.preimage(a);
    check(checks, "kernel-transport", moved == r1.kernel, format!("{:?} vs {:?}", moved.basis(), r1.kernel.basis()));
    eq_check(checks, "kernel-in-sigma2", r0.kernel_in_sigma2, r1.kernel_in_sigma2);
    eq_check(checks, "kernel-tangent-to-z", r0.kernel_tangent_to_z, r1.kernel_tangent_to_z);
    eq_check(checks, "dim-span-j1", r0.dim_span_j1, r1.dim_span_j1);
    eq_check(checks, "sigma22-label", r0.sigma22.as_ref().map(|s| s.label), r1.sigma22.as_ref().map(|s| s.label));
}

/// The canonical orientation is natural: a frame `F` of `T_0 Sigma_2(omega)`
/// and `A^{-1} F` get the same sign. Pushing the Martinet function of the
/// pulled form forward multiplies it by `det D Phi`, which flips the sign
/// comparison exactly when `det D Phi(0) < 0`.
fn orientation_checks(
    checks: &mut Vec<Check>,
    r0: &InvariantReport,
    r1: &InvariantReport,
    phi: &PolyMapGerm,
    ainv: &[Vec<Rational>],
    det_sign: i8,
    jet: u32,
) -> Result<()> {
    if r0.martinet.pivot.is_none() || r1.martinet.pivot.is_none() {
        return Ok(());
    }
    let frame = default_frame(&r0.martinet)?;
    let moved: Vec<Vec<Rational>> = frame.iter().map(|v| mat_vec(ainv, v)).collect();
    let s0 = orientation_sign(&r0.martinet, Some(&frame))?;
    let s1 = orientation_sign(&r1.martinet, Some(&moved))?;
    eq_check(checks, "orientation-naturality", s0, s1);
    let inv = formal_inverse(phi, jet)?;
    let pushed = r1.f().compose(inv.components())?;
    let rel = compare_orientation(r0.f(), &pushed);
    check(checks, "orientation-sign", rel == Some(det_sign), format!("{rel:?} for det sign {det_sign}"));
    Ok(())
}

/// Runs `cfg.trials` random maps against `w`.
pub fn invariance_suite_with(w: &DiffForm, cfg: &HarnessConfig) -> Result<SuiteReport> {
    let gen = DiffeoGen::new(cfg.seed);
    let trials = (0..cfg.trials)
        .map(|i| {
            let phi = gen.generate(w.chart(), i)?;
            check_pair(w, &phi, i, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { seed: cfg.seed, jet: cfg.jet, trials })
}

pub fn invariance_suite(w: &DiffForm, trials: u64, seed: u64) -> Result<SuiteReport> {
    invariance_suite_with(w, &HarnessConfig { trials, seed, ..HarnessConfig::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega0() -> DiffForm {
        let c = Chart::new(["p1", "x", "y", "z"]).unwrap();
        let v = |i| TruncatedPoly::var(&c, 8, i);
        let d = |i| DiffForm::basis(&c, 8, i);
        let alpha = &d(1) - &d(2).mul_poly(&v(3));
        &alpha.mul_poly(&v(0)).ext_d().with_jet(8) + &d(1).wedge(&d(2)).unwrap().mul_poly(&v(1))
    }

    #[test]
    fn generator_is_reproducible_and_invertible() {
        let w = omega0();
        let g = DiffeoGen::new(7);
        let a = g.generate(w.chart(), 3).unwrap();
        let b = g.generate(w.chart(), 3).unwrap();
        assert_eq!(a.components(), b.components());
        assert_ne!(det_dense(&a.linear_part()), q(0));
        let inv = formal_inverse(&a, 4).unwrap();
        let id = a.truncate(4).compose(&inv).unwrap();
        for (i, c) in id.components().iter().enumerate() {
            assert_eq!(c.truncate(4), TruncatedPoly::var(w.chart(), 4, i));
        }
    }

    #[test]
    fn identity_passes() {
        let w = omega0();
        let id = PolyMapGerm::identity(w.chart());
        let r = check_pair(&w, &id, 0, &HarnessConfig::default()).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.verdicts.iter().all(|v| v.1 == Outcome::Equivalent));
    }

    #[test]
    fn reflection_flips_the_pushed_orientation() {
        let w = omega0();
        let c = w.chart().clone();
        let a: Vec<Vec<Rational>> = (0..4)
            .map(|i| (0..4).map(|j| if i != j { q(0) } else if i == 1 { q(-1) } else { q(1) }).collect())
            .collect();
        let phi = PolyMapGerm::linear(&c, &c, &a).unwrap();
        let r = check_pair(&w, &phi, 0, &HarnessConfig::default()).unwrap();
        assert_eq!(r.det_sign, -1);
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.checks.iter().any(|c| c.name == "orientation-sign" && c.detail.starts_with("Some(-1)")));
    }

    #[test]
    fn few_random_trials() {
        let w = omega0();
        let rep = invariance_suite(&w, 3, 11).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
    }
}
