//! Acceptance suite: one PASS/FAIL line per criterion, each under a wall
//! clock bound. Runs without the libtest harness so the lines always print.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use martinet::frm::read_frm;
use martinet_core::exterior::{DiffForm, Subspace};
use martinet_core::harness::invariance_suite;
use martinet_core::invariants::{
    classify_sigma220, compare_orientation, full_report, martinet, orientation_sign, sigma22_template,
    InvariantConfig, Sigma22Label,
};
use martinet_core::moser::{grid, integrate_and_verify, summarize, MoserConfig, MoserProblem};
use martinet_core::normal_form::{
    decide_equivalence, df_division, from_volume, homotopy_primitive, relative_primitive_p1, Category,
    EquivalenceConfig, Outcome, Theorem,
};
use martinet_core::scalar_poly::{
    isolated_singularity_certificate, monomials_of_degree, regular_sequence_check, Chart, Nakayama, Rational,
    RegularSequence, RegularSequenceConfig, TruncatedPoly,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn ex(name: &str) -> DiffForm {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../ex").join(name);
    read_frm(&path).unwrap().form(8).unwrap()
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn e(dim: usize, i: usize) -> Vec<Rational> {
    (0..dim).map(|j| q((i == j) as i64)).collect()
}

fn volume_of(w: &DiffForm) -> TruncatedPoly {
    w.power(w.dim() / 2).unwrap().top_coefficient().unwrap()
}

fn kernel_pair() -> Check {
    let (w0, w1) = (ex("omega0.frm"), ex("omega1.frm"));
    let c = w0.chart().clone();
    let two_p1 = TruncatedPoly::var(&c, 8, 0).scale(&q(2));
    ensure(volume_of(&w0) == two_p1 && volume_of(&w1) == two_p1, "omega^2 != 2 p1 vol")?;
    let cfg = InvariantConfig::default();
    let (r0, r1) = (full_report(&w0, &cfg).unwrap(), full_report(&w1, &cfg).unwrap());
    for r in [&r0, &r1] {
        let s = r.sigma().ok_or("no sigma")?;
        let sub = s.chart();
        let expect = DiffForm::basis(sub, 8, 0).wedge(&DiffForm::basis(sub, 8, 1)).unwrap().mul_poly(&TruncatedPoly::var(sub, 8, 0));
        ensure(*s == expect, format!("sigma = {s}"))?;
    }
    ensure(r0.kernel == Subspace::from_vectors(4, &[e(4, 2), e(4, 3)]), "kernel of omega0")?;
    ensure(r1.kernel == Subspace::from_vectors(4, &[e(4, 1), e(4, 3)]), "kernel of omega1")?;
    for cat in [Category::Real, Category::Complex] {
        let v = decide_equivalence(&w0, &w1, cat, &EquivalenceConfig::default()).unwrap();
        ensure(v.outcome == Outcome::NotEquivalent && v.has_evidence("kernel"), format!("{cat:?}: {v:?}"))?;
    }
    Ok(format!("kernels {} / {}", r0.kernel.format_with(&c), r1.kernel.format_with(&c)))
}

fn sigma22_labels() -> Check {
    let mut out = Vec::new();
    for (name, want) in [
        ("hyperbolic.frm", Sigma22Label::Hyperbolic),
        ("elliptic.frm", Sigma22Label::Elliptic),
        ("parabolic.frm", Sigma22Label::Parabolic),
    ] {
        let w = ex(name);
        let sigma = martinet(&w).unwrap().sigma.ok_or("no sigma")?;
        let t = classify_sigma220(&sigma).map_err(|e| e.to_string())?;
        let inv = full_report(&w, &InvariantConfig::default()).unwrap().sigma22.ok_or("no invariant label")?;
        ensure(t.label == want && inv.label == want, format!("{name}: {:?} / {:?}", t.label, inv.label))?;
        out.push(format!("{} ({})", want.name(), t.discriminant));
    }
    Ok(out.join(", "))
}

fn template_is_closed() -> Check {
    let c = Chart::new(["y1", "y2", "y3"]).unwrap();
    for jet in [8, 9] {
        let y = |i| TruncatedPoly::var(&c, jet, i);
        let b = &y(0) * &y(1);
        let h = &y(1) * &y(1);
        let sigma = sigma22_template(&b, &h).map_err(|e| e.to_string())?;
        ensure(sigma.ext_d().is_zero(), format!("d sigma != 0 at jet {jet}"))?;
        // a = y2^2 - y1^2/2 by direct integration
        let a = &h - &(&y(0) * &y(0)).scale(&Rational::new(1.into(), 2.into()));
        ensure(sigma.coeff(0b110) == a, format!("a = {}", sigma.coeff(0b110)))?;
    }
    Ok("d sigma = 0 at jets 8 and 9".into())
}

fn prescribed_volume() -> Check {
    let c = Chart::numbered("x", 4);
    let x = |i| TruncatedPoly::var(&c, 8, i);
    let sq = (0..4).fold(TruncatedPoly::zero(&c, 8), |s, i| &s + &(&x(i) * &x(i)));
    for f in [TruncatedPoly::one(&c, 8), x(0), sq] {
        let w = from_volume(&f).map_err(|e| e.to_string())?;
        ensure(w.is_closed(), format!("not closed for f = {f}"))?;
        ensure(volume_of(&w) == f, format!("omega^2 = {} for f = {f}", volume_of(&w)))?;
    }
    Ok("f in {1, x1, sum xi^2}".into())
}

fn random_one_form(rng: &mut ChaCha8Rng, c: &Arc<Chart>, jet: u32) -> DiffForm {
    let monos: Vec<_> = (0..=3).flat_map(|d| monomials_of_degree(4, d)).collect();
    let coeffs = (0..4).map(|i| {
        let terms: Vec<_> = (0..4).map(|_| (monos[rng.random_range(0..monos.len())].clone(), q(rng.random_range(-3..=3)))).collect();
        (1u64 << i, TruncatedPoly::from_terms(c, jet, terms))
    });
    DiffForm::from_coeffs(c, 1, jet, coeffs).unwrap()
}

fn primitives() -> Check {
    let c = Chart::numbered("x", 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = TruncatedPoly::var(&c, 9, 0);
    let f = (0..4).fold(TruncatedPoly::zero(&c, 9), |s, i| {
        let x = TruncatedPoly::var(&c, 9, i);
        &s + &(&x * &x)
    });
    let df = DiffForm::function(f.clone()).ext_d();
    for k in 0..25 {
        let g = random_one_form(&mut rng, &c, 8);
        let rho = g.mul_poly(&(&p * &p)).ext_d();
        let beta = relative_primitive_p1(&rho, 0).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(beta.mul_poly(&(&p * &p)).ext_d() == rho, format!("relative primitive, instance {k}"))?;
        let dg = g.ext_d();
        let gamma = homotopy_primitive(&dg, None, &[1, 1, 1, 1]).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(gamma.ext_d() == dg, format!("homotopy primitive, instance {k}"))?;
        let b = df.wedge(&g).unwrap();
        let gamma = df_division(&b, &f, Some(&[1, 1, 1, 1])).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(df.wedge(&gamma).unwrap() == b, format!("df division, instance {k}"))?;
    }
    Ok("25 instances each".into())
}

fn desk_flow() -> Check {
    let (w0, w1) = (ex("desk0.frm"), ex("desk1.frm"));
    let pb = MoserProblem::rel_darboux(&w0, &w1).map_err(|e| e.to_string())?;
    let pts = grid(4, 5, 0.1);
    let cfg = MoserConfig { half_width: 0.1, steps: 200, tol: 1e-6, ..MoserConfig::default() };
    let flows = integrate_and_verify(&pb, &pts, &cfg).map_err(|e| e.to_string())?;
    let s = summarize(&pb, &flows);
    let moved = s.max_moved_on_divisor.ok_or("no samples on p1 = 0")?;
    ensure(s.samples == 625 && s.passed == 625, format!("{} of {} samples passed", s.passed, s.samples))?;
    ensure(s.max_residual <= 1e-6, format!("residual {:e}", s.max_residual))?;
    ensure(moved <= 1e-9, format!("moved {moved:e} on p1 = 0"))?;
    Ok(format!("625 samples, residual {:.2e}, moved on p1 = 0 {:.2e}", s.max_residual, moved))
}

fn local_algebra() -> Check {
    let c = Chart::new(["x", "y", "z"]).unwrap();
    let (x, y) = (TruncatedPoly::var(&c, 8, 0), TruncatedPoly::var(&c, 8, 1));
    let cfg = RegularSequenceConfig::default();
    let r = regular_sequence_check(&x, &y, &cfg).map_err(|e| e.to_string())?;
    ensure(r == RegularSequence::IndependentGradients, format!("(x, y): {r:?}"))?;
    let r = regular_sequence_check(&(&x * &x), &(&x * &y), &cfg).map_err(|e| e.to_string())?;
    ensure(!r.is_regular(), format!("(x^2, xy): {r:?}"))?;
    let c4 = Chart::numbered("x", 4);
    let f = (0..4).fold(TruncatedPoly::zero(&c4, 8), |s, i| {
        let v = TruncatedPoly::var(&c4, 8, i);
        &s + &(&v * &v)
    });
    let n = isolated_singularity_certificate(&f, 4);
    ensure(n == Nakayama::Certified { k: 1 }, format!("sum xi^2: {n:?}"))?;
    Ok("(x, y) regular, (x^2, xy) inconclusive, m in J(sum xi^2)".into())
}

fn harness_trials() -> Check {
    let w = ex("omega0.frm");
    let rep = invariance_suite(&w, 50, 0).map_err(|e| e.to_string())?;
    ensure(rep.trials.len() == 50, "trial count")?;
    ensure(rep.passed(), format!("{:?}", rep.failures()))?;
    let flips = rep.trials.iter().filter(|t| t.det_sign < 0).count();
    Ok(format!("50 trials, {flips} orientation reversing"))
}

fn orientation_pair() -> Check {
    let (w0, w1) = (ex("orient0.frm"), ex("orient1.frm"));
    let (m0, m1) = (martinet(&w0).unwrap(), martinet(&w1).unwrap());
    let (s0, s1) = (orientation_sign(&m0, None).unwrap(), orientation_sign(&m1, None).unwrap());
    ensure(s0 == -s1, format!("orientation signs {s0} and {s1}"))?;
    ensure(compare_orientation(&m0.f, &m1.f) == Some(-1), "relative orientation")?;
    let cfg = EquivalenceConfig::default();
    let real = decide_equivalence(&w0, &w1, Category::Real, &cfg).unwrap();
    ensure(
        real.outcome == Outcome::NotEquivalent && real.theorem == Theorem::Orientation && real.has_evidence("orientation"),
        format!("R: {real:?}"),
    )?;
    let complex = decide_equivalence(&w0, &w1, Category::Complex, &cfg).unwrap();
    ensure(complex.theorem != Theorem::Orientation && complex.outcome != Outcome::NotEquivalent, format!("C: {complex:?}"))?;
    Ok(format!("signs {s0}/{s1}; R not_equivalent by orientation; C {} by {}", complex.outcome.name(), complex.theorem.name()))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 9] = [
        (1, "kernel pair", Duration::from_secs(1), kernel_pair),
        (2, "Sigma22 labels", Duration::from_secs(1), sigma22_labels),
        (3, "Sigma22 template is closed", Duration::from_secs(1), template_is_closed),
        (4, "prescribed Martinet function", Duration::from_secs(5), prescribed_volume),
        (5, "primitives on random instances", Duration::from_secs(30), primitives),
        (6, "Moser flow on the desk pair", Duration::from_secs(60), desk_flow),
        (7, "local algebra certificates", Duration::from_secs(5), local_algebra),
        (8, "invariance harness", Duration::from_secs(120), harness_trials),
        (9, "orientation pair", Duration::from_secs(1), orientation_pair),
    ];
    let mut failed = 0;
    for (n, name, bound, run) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        let res = res.and_then(|msg| {
            if t <= bound {
                Ok(msg)
            } else {
                Err(format!("took {:.2} s, bound {} s", t.as_secs_f64(), bound.as_secs()))
            }
        });
        match res {
            Ok(msg) => println!("PASS criterion {n}: {name} ({:.3} s) {msg}", t.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {name} ({:.3} s) {msg}", t.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
