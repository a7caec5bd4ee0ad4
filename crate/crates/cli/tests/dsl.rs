use std::path::PathBuf;
use std::sync::Arc;

use martinet::dsl::{parse, parse_expr, print, DslErrorKind, Pos};
use martinet::frm::{parse_frm, read_frm, write_frm};
use martinet_core::exterior::DiffForm;
use martinet_core::scalar_poly::{monomials_of_degree, Chart, Rational, TruncatedPoly};
use proptest::prelude::*;

fn ex(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../ex").join(name)
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn every_example_file_parses() {
    let mut count = 0;
    for entry in std::fs::read_dir(ex("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "frm") {
            let f = read_frm(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let w = f.form(8).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if w.degree() == 2 {
                assert!(w.is_closed(), "{} is not closed", path.display());
            }
            count += 1;
        }
    }
    assert!(count >= 12);
}

#[test]
fn omega0_by_hand() {
    let w = read_frm(&ex("omega0.frm")).unwrap().form(8).unwrap();
    let c = w.chart().clone();
    let d = |i| DiffForm::basis(&c, 8, i);
    let v = |i| TruncatedPoly::var(&c, 8, i);
    // dp1^dx - z dp1^dy + p1 dy^dz + x dx^dy
    let expect = &(&(&d(0).wedge(&d(1)).unwrap() - &d(0).wedge(&d(2)).unwrap().mul_poly(&v(3)))
        + &d(2).wedge(&d(3)).unwrap().mul_poly(&v(0)))
        + &d(1).wedge(&d(2)).unwrap().mul_poly(&v(1));
    assert_eq!(w, expect);
}

#[test]
fn desk_perturbation_is_exact() {
    let w0 = read_frm(&ex("desk0.frm")).unwrap().form(8).unwrap();
    let w1 = read_frm(&ex("desk1.frm")).unwrap().form(8).unwrap();
    let c = w0.chart().clone();
    let diff = &w1 - &w0;
    // d(p1^2/20 dq2) = p1/10 dp1^dq2
    let p1 = TruncatedPoly::var(&c, 8, 0).scale(&r(1, 10));
    let expect = DiffForm::basis(&c, 8, 0).wedge(&DiffForm::basis(&c, 8, 3)).unwrap().mul_poly(&p1);
    assert_eq!(diff, expect);
}

#[test]
fn errors_report_line_and_column() {
    let c = Chart::new(["p1", "x", "y", "z"]).unwrap();
    let e = parse("d(p1*(dx - z*dy)) + x*dx^dq", &c, 8).unwrap_err();
    assert_eq!(e.pos, Pos { line: 1, col: 26 });
    assert_eq!(e.kind, DslErrorKind::UnknownVariable("dq".into()));
    assert_eq!(e.to_string(), "line 1, column 26: unknown variable `dq`");
    let e = parse_expr("x + (y\n  * )").unwrap_err();
    assert_eq!(e.pos, Pos { line: 2, col: 5 });
    let e = parse_frm("chart: p1 x y z\n# comment\n\nd(p1*dx) +\n   x").unwrap().form(8).unwrap_err();
    assert_eq!((e.pos.line, e.pos.col), (4, 10));
    assert!(matches!(e.kind, DslErrorKind::DegreeMismatch(_)));
    let e = parse("x ** y", &c, 8).unwrap_err();
    assert!(matches!(e.kind, DslErrorKind::Syntax(_)));
    let e = parse("x / 0", &c, 8).unwrap_err();
    assert!(matches!(e.kind, DslErrorKind::Math(_)));
}

#[test]
fn printed_examples_read_back() {
    for name in ["omega0.frm", "parabolic.frm", "orient1.frm", "volume.frm", "desk1.frm"] {
        let w = read_frm(&ex(name)).unwrap().form(8).unwrap();
        let back = parse_frm(&write_frm(&w)).unwrap().form(8).unwrap();
        assert_eq!(back, w, "{name}");
        assert_eq!(print(&back), print(&w));
    }
}

fn chart() -> Arc<Chart> {
    Chart::new(["p1", "x", "y", "z"]).unwrap()
}

fn poly(deg: u32) -> impl Strategy<Value = TruncatedPoly> {
    let monos: Vec<_> = (0..=deg).flat_map(|d| monomials_of_degree(4, d)).collect();
    let n = monos.len();
    prop::collection::vec((0..n, -9i64..=9, 1i64..=4), 0..6).prop_map(move |terms| {
        TruncatedPoly::from_terms(&chart(), 8, terms.into_iter().map(|(i, a, b)| (monos[i].clone(), r(a, b))))
    })
}

fn form(degree: usize) -> impl Strategy<Value = DiffForm> {
    let masks: Vec<u64> = (0u64..16).filter(|m| m.count_ones() as usize == degree).collect();
    let k = masks.len();
    prop::collection::vec(poly(4), k)
        .prop_map(move |cs| DiffForm::from_coeffs(&chart(), degree, 8, masks.iter().copied().zip(cs)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity(w in (0usize..=4).prop_flat_map(form)) {
        let text = print(&w);
        let back = parse(&text, &chart(), 8).unwrap();
        if w.is_zero() {
            prop_assert_eq!(text, "0");
            return Ok(());
        }
        prop_assert_eq!(back.degree(), w.degree());
        prop_assert_eq!(&back, &w, "{}", text);
    }

    #[test]
    fn d_commutes_with_parsing(w in form(1)) {
        let text = format!("d({})", print(&w));
        prop_assert_eq!(parse(&text, &chart(), 8).unwrap(), w.ext_d());
    }
}

#[test]
fn repeated_basis_form_is_the_zero_two_form() {
    let chart = martinet_core::Chart::new(["x", "y"]).unwrap();
    let w = martinet::dsl::parse("dx^dx", &chart, 4).unwrap();
    assert_eq!(w.degree(), 2);
    assert!(w.is_zero());
    assert!(martinet::dsl::parse("dx^dx + x*dy", &chart, 4).is_err());
}
