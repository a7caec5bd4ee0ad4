use std::sync::Arc;

use martinet_core::exterior::{DiffForm, PolyMapGerm, PolyVectorField, Slice};
use martinet_core::harness::DiffeoGen;
use martinet_core::normal_form::{decompose_adapted, df_division, from_volume, homotopy_primitive, relative_primitive_p1};
use martinet_core::scalar_poly::{
    monomials_of_degree, nakayama_contains_power, regular_sequence_check, Chart, RegularSequenceConfig, TruncatedPoly,
};
use martinet_core::Rational;
use proptest::prelude::*;

const JET: u32 = 4;

fn chart(dim: usize) -> Arc<Chart> {
    Chart::numbered("x", dim)
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Sparse polynomial of degree at most `deg` with small integer coefficients.
fn poly(dim: usize, deg: u32) -> impl Strategy<Value = TruncatedPoly> {
    let monos: Vec<_> = (0..=deg).flat_map(|d| monomials_of_degree(dim, d)).collect();
    let n = monos.len();
    prop::collection::vec((0..n, -3i64..=3), 0..6).prop_map(move |terms| {
        let c = chart(dim);
        TruncatedPoly::from_terms(&c, JET, terms.into_iter().map(|(i, v)| (monos[i].clone(), r(v))))
    })
}

fn form(dim: usize, degree: usize, deg: u32) -> impl Strategy<Value = DiffForm> {
    let masks: Vec<u64> = (0u64..1 << dim).filter(|m| m.count_ones() as usize == degree).collect();
    let k = masks.len();
    prop::collection::vec(poly(dim, deg), k).prop_map(move |cs| {
        let c = chart(dim);
        DiffForm::from_coeffs(&c, degree, JET, masks.iter().copied().zip(cs)).unwrap()
    })
}

fn field(dim: usize) -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(poly(dim, 2), dim).prop_map(move |cs| PolyVectorField::new(&chart(dim), cs).unwrap())
}

fn diffeo(dim: usize) -> impl Strategy<Value = PolyMapGerm> {
    (any::<u64>(), 0u64..100).prop_map(move |(s, i)| DiffeoGen::new(s).generate(&chart(dim), i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(a in poly(3, 3), b in poly(3, 3), c in poly(3, 3)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn derivative_of_integral(a in poly(3, 4), i in 0usize..3) {
        prop_assert_eq!(a.integral(i).partial(i), a);
    }

    #[test]
    fn d_squared_vanishes(w1 in form(4, 1, 3), w2 in form(4, 2, 3)) {
        prop_assert!(w1.ext_d().ext_d().is_zero());
        prop_assert!(w2.ext_d().ext_d().is_zero());
    }

    #[test]
    fn graded_commutativity(a in form(4, 1, 2), b in form(4, 2, 2)) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        prop_assert_eq!(a.wedge(&a).unwrap(), DiffForm::zero(a.chart(), 2, JET));
    }

    #[test]
    fn contraction_is_an_antiderivation(a in form(4, 1, 2), b in form(4, 2, 2), x in field(4)) {
        let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
        let ia = a.interior(&x).unwrap();
        let rhs = &b.mul_poly(&ia.as_function().unwrap()) - &a.wedge(&b.interior(&x).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_commutes_with_d_and_wedge(a in form(4, 1, 2), b in form(4, 1, 2), phi in diffeo(4)) {
        let phi = phi.truncate(JET + 1);
        prop_assert_eq!(a.ext_d().pullback(&phi).unwrap(), a.pullback(&phi).unwrap().ext_d());
        prop_assert_eq!(
            a.wedge(&b).unwrap().pullback(&phi).unwrap(),
            a.pullback(&phi).unwrap().wedge(&b.pullback(&phi).unwrap()).unwrap()
        );
    }

    #[test]
    fn nakayama_is_monotone(gens in prop::collection::vec(poly(3, 2), 1..4), k in 1u32..3) {
        if nakayama_contains_power(&gens, k) {
            prop_assert!(nakayama_contains_power(&gens, k + 1));
        }
    }

    #[test]
    fn x2_xy_is_never_certified(seed in any::<u64>(), u in poly(3, 2), v in poly(3, 2)) {
        let c = chart(3);
        let x = TruncatedPoly::var(&c, JET, 0);
        let y = TruncatedPoly::var(&c, JET, 1);
        let one = TruncatedPoly::one(&c, JET);
        let unit = |p: &TruncatedPoly| &one + &(p - &TruncatedPoly::constant(&c, JET, p.constant_term()));
        let a = &(&x * &x) * &unit(&u);
        let b = &(&x * &y) * &unit(&v);
        let cfg = RegularSequenceConfig { seed, ..Default::default() };
        prop_assert!(!regular_sequence_check(&a, &b, &cfg).unwrap().is_regular());
    }

    #[test]
    fn decomposition_reassembles(g in form(4, 1, 3)) {
        let w = g.ext_d();
        let slice = Slice::new(w.chart(), 0).unwrap();
        let dec = decompose_adapted(&w, &slice, None).unwrap();
        prop_assert_eq!(dec.reassemble().unwrap(), w);
    }

    #[test]
    fn relative_primitive_integrates(g in form(4, 1, 2)) {
        let c = g.chart().clone();
        let p2 = &TruncatedPoly::var(&c, JET, 0) * &TruncatedPoly::var(&c, JET, 0);
        let rho = g.mul_poly(&p2).ext_d();
        let beta = relative_primitive_p1(&rho, 0).unwrap();
        prop_assert_eq!(beta.mul_poly(&p2).ext_d(), rho);
    }

    #[test]
    fn homotopy_primitive_integrates(g in form(4, 1, 3), w in prop::collection::vec(1u32..4, 4)) {
        let beta = g.ext_d();
        prop_assert_eq!(homotopy_primitive(&beta, None, &w).unwrap().ext_d(), beta);
    }

    #[test]
    fn df_division_divides(g in form(4, 1, 2)) {
        let c = g.chart().clone();
        let f = (0..4).fold(TruncatedPoly::zero(&c, JET + 1), |s, i| {
            let x = TruncatedPoly::var(&c, JET + 1, i);
            &s + &(&x * &x)
        });
        let df = DiffForm::function(f.clone()).ext_d();
        let beta = df.wedge(&g).unwrap();
        let gamma = df_division(&beta, &f, Some(&[1, 1, 1, 1])).unwrap();
        prop_assert_eq!(df.wedge(&gamma).unwrap(), beta);
    }

    #[test]
    fn from_volume_has_that_volume(f in poly(4, 3)) {
        let w = from_volume(&f).unwrap();
        prop_assert!(w.is_closed());
        prop_assert_eq!(w.power(2).unwrap().top_coefficient().unwrap(), f);
    }
}
