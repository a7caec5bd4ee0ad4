//! Constructive normal-form lemmas: relative primitives, the decomposition
//! `omega = d(p1 pi^*alpha) + pi^*sigma + d(p1^2 theta)`, realizability of
//! restrictions, forms with prescribed Martinet function, and the
//! sufficient-condition equivalence decider.

mod equivalence;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::{mask_indices, wedge_sign, DiffForm, PolyMapGerm, Slice};
use crate::invariants::{find_annihilator, martinet};
use crate::linalg::{solve, SparseVec};
use crate::scalar_poly::{
    local_divide, monomials_of_degree, q, quasi_homogeneous_check, Chart, Monomial, Rational, TruncatedPoly,
};

pub use equivalence::{
    decide_equivalence, Category, EquivalenceConfig, EquivalenceVerdict, Evidence, Outcome, Theorem,
};

/// `K rho` for the homotopy `(p, x') -> (s p, x')`: with `iota^* rho = 0`,
/// `d K rho = rho`. Known one order beyond `rho`.
fn radial_in(rho: &DiffForm, p: usize) -> DiffForm {
    let chart = rho.chart();
    let jet = rho.jet() + 1;
    let mut out = DiffForm::zero(chart, rho.degree() - 1, jet);
    for (mask, c) in rho.coeffs() {
        if mask >> p & 1 == 0 {
            continue;
        }
        let rest = mask & !(1u64 << p);
        let sign = q(wedge_sign(1 << p, rest).into());
        let mut poly = TruncatedPoly::zero(chart, jet);
        for (m, v) in c.terms() {
            let mut m2 = m.clone();
            let e = m2.0[p];
            m2.0[p] += 1;
            poly.add_term(m2, v * &sign / q(e as i64 + 1));
        }
        let term = DiffForm::from_coeffs(chart, rho.degree() - 1, jet, [(rest, poly)])
            .expect("mask matches degree");
        out = &out + &term;
    }
    out
}

/// `beta` with `rho = d(p^2 beta)`, for a closed `rho` divisible by the
/// coordinate `p`.
pub fn relative_primitive_p1(rho: &DiffForm, p: usize) -> Result<DiffForm> {
    if rho.degree() == 0 {
        return Err(Error::ZeroDegreeContraction);
    }
    if !rho.is_closed() {
        return Err(Error::NotClosed);
    }
    if rho.coeffs().values().any(|c| !c.is_divisible_by_var(p)) {
        return Err(Error::NotDivisible(format!("form is not divisible by {}", rho.chart().var(p))));
    }
    let k = radial_in(rho, p);
    let beta = k
        .divide_by_var(p)
        .and_then(|g| g.divide_by_var(p))
        .ok_or_else(|| Error::NotDivisible("primitive not divisible by p^2".into()))?;
    Ok(beta)
}

/// `gamma` with `d gamma = beta` from the weighted radial homotopy
/// `x_i -> s^{w_i} x_i`. When `beta` is divisible by a quasi-homogeneous
/// `f` of those weights, so is `gamma`.
pub fn homotopy_primitive(beta: &DiffForm, f: Option<&TruncatedPoly>, weights: &[u32]) -> Result<DiffForm> {
    let chart = beta.chart();
    if weights.len() != chart.dim() || weights.contains(&0) {
        return Err(Error::Precondition("weights must be positive, one per variable".into()));
    }
    if beta.degree() == 0 {
        return Err(Error::ZeroDegreeContraction);
    }
    if !beta.is_closed() {
        return Err(Error::NotClosed);
    }
    if let Some(f) = f {
        if quasi_homogeneous_check(f, weights).is_none() {
            return Err(Error::NotQuasiHomogeneous);
        }
        for c in beta.coeffs().values() {
            local_divide(c, f)?;
        }
    }
    let jet = beta.jet() + 1;
    let mut coeffs: BTreeMap<u64, TruncatedPoly> = BTreeMap::new();
    for (mask, c) in beta.coeffs() {
        let idx = mask_indices(*mask);
        let wmask: u32 = idx.iter().map(|&i| weights[i]).sum();
        for (m, v) in c.terms() {
            let w = m.weighted_degree(weights) + wmask;
            for &i in &idx {
                let rest = mask & !(1u64 << i);
                let mut m2 = m.clone();
                m2.0[i] += 1;
                let coef = v * q(weights[i] as i64) * q(wedge_sign(1 << i, rest).into()) / q(w as i64);
                coeffs.entry(rest).or_insert_with(|| TruncatedPoly::zero(chart, jet)).add_term(m2, coef);
            }
        }
    }
    DiffForm::from_coeffs(chart, beta.degree() - 1, jet, coeffs)
}

/// `gamma` with `beta = df ^ gamma`, solved exactly up to the order the jets
/// determine. With weights making `f` quasi-homogeneous the linear system
/// splits by weighted degree.
pub fn df_division(beta: &DiffForm, f: &TruncatedPoly, weights: Option<&[u32]>) -> Result<DiffForm> {
    let chart = beta.chart();
    if !Chart::compatible(chart, f.chart()) {
        return Err(Error::ChartMismatch);
    }
    if beta.degree() == 0 {
        return Err(Error::Precondition("cannot divide a function by df".into()));
    }
    if let Some(w) = weights {
        if w.len() != chart.dim() || quasi_homogeneous_check(f, w).is_none() {
            return Err(Error::NotQuasiHomogeneous);
        }
    }
    let df = DiffForm::function(f.clone()).ext_d();
    let ord = df.order().ok_or_else(|| Error::NotDivisible("df vanishes".into()))?;
    let top = beta.jet().min(df.jet());
    if top < ord {
        return Err(Error::NotDivisible("jets too short for df division".into()));
    }
    let gdeg = top - ord;
    let dim = chart.dim();
    let k = beta.degree() - 1;
    let masks: Vec<u64> = (0u64..1 << dim).filter(|m| m.count_ones() as usize == k).collect();
    let monos: Vec<Monomial> = (0..=gdeg).flat_map(|d| monomials_of_degree(dim, d)).collect();
    let unknowns: Vec<(u64, &Monomial)> = masks.iter().flat_map(|&s| monos.iter().map(move |m| (s, m))).collect();
    let df_low = df.truncate(top);
    let weight_of = |mask: u64, m: &Monomial| -> u32 {
        match weights {
            Some(w) => m.weighted_degree(w) + mask_indices(mask).iter().map(|&i| w[i]).sum::<u32>(),
            None => 0,
        }
    };
    let mut blocks: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (j, (s, m)) in unknowns.iter().enumerate() {
        blocks.entry(weight_of(*s, m)).or_default().push(j);
    }
    let mut covered: BTreeMap<(u64, Monomial), ()> = BTreeMap::new();
    let mut solution: Vec<Option<Rational>> = alloc::vec![None; unknowns.len()];
    for cols in blocks.values() {
        let mut rows: BTreeMap<(u64, Monomial), SparseVec> = BTreeMap::new();
        for (local, &j) in cols.iter().enumerate() {
            let (s, m) = unknowns[j];
            let unit = DiffForm::from_coeffs(
                chart,
                k,
                top,
                [(s, TruncatedPoly::from_terms(chart, top, [(m.clone(), q(1))]))],
            )?;
            let img = df_low.wedge(&unit)?;
            for (mask, c) in img.coeffs() {
                for (mm, v) in c.terms() {
                    if mm.degree() <= top {
                        rows.entry((*mask, mm.clone())).or_default().insert(local, v.clone());
                    }
                }
            }
        }
        let system: Vec<(SparseVec, Rational)> = rows
            .into_iter()
            .map(|(key, row)| {
                let rhs = beta.coeff(key.0).coeff(&key.1);
                covered.insert(key, ());
                (row, rhs)
            })
            .collect();
        let x = solve(system, cols.len())
            .ok_or_else(|| Error::Infeasible { order: top, what: "df division".into() })?;
        for (local, &j) in cols.iter().enumerate() {
            solution[j] = Some(x[local].clone());
        }
    }
    for (mask, c) in beta.coeffs() {
        for (m, v) in c.terms() {
            if m.degree() <= top && !v.is_zero() && !covered.contains_key(&(*mask, m.clone())) {
                return Err(Error::Infeasible { order: top, what: "df division".into() });
            }
        }
    }
    let mut coeffs: BTreeMap<u64, TruncatedPoly> = BTreeMap::new();
    for (j, (s, m)) in unknowns.iter().enumerate() {
        if let Some(v) = &solution[j] {
            if !v.is_zero() {
                coeffs.entry(*s).or_insert_with(|| TruncatedPoly::zero(chart, gdeg)).add_term((*m).clone(), v.clone());
            }
        }
    }
    let gamma = DiffForm::from_coeffs(chart, k, gdeg, coeffs)?;
    if !df.wedge(&gamma)?.eq_to_common_jet(beta) {
        return Err(Error::Infeasible { order: top, what: "df division check".into() });
    }
    Ok(gamma)
}

/// `omega = d(p pi^*alpha) + pi^*sigma + d(p^2 theta)` in coordinates where
/// the Martinet hypersurface is `{p = 0}`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub slice: Slice,
    /// Adapted-to-original coordinate change, if one was needed.
    pub change: Option<PolyMapGerm>,
    /// `omega` in adapted coordinates.
    pub omega: DiffForm,
    pub alpha: DiffForm,
    pub sigma: DiffForm,
    pub theta: DiffForm,
    /// `alpha ^ d alpha ^ sigma^{n-2} != 0` at 0.
    pub contact: bool,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.omega.dim() / 2
    }

    /// Rebuilds `omega` from the pieces.
    pub fn reassemble(&self) -> Result<DiffForm> {
        let s = &self.slice;
        let p = s.pivot();
        let a = s.extend(&self.alpha)?.mul_var(p).ext_d();
        let t = s.extend(&self.sigma)?;
        let h = self.theta.mul_var(p).mul_var(p).ext_d();
        a.try_add(&t)?.try_add(&h)
    }
}

/// Splits `omega` along its (structurally smooth) Martinet hypersurface.
pub fn decompose(w: &DiffForm) -> Result<Decomposition> {
    let md = martinet(w)?;
    let slice = md.slice.clone().ok_or_else(|| Error::Precondition("Martinet hypersurface is not smooth".into()))?;
    let norm = md.normalized.clone().expect("smooth case is normalized");
    decompose_adapted(&norm, &slice, md.change)
}

/// Decomposition of a form whose Martinet hypersurface is already
/// `{pivot = 0}`.
pub fn decompose_adapted(w: &DiffForm, slice: &Slice, change: Option<PolyMapGerm>) -> Result<Decomposition> {
    let p = slice.pivot();
    let n = w.dim() / 2;
    let sigma = slice.restrict(w)?;
    let rho = w.try_add(&-&slice.extend(&sigma)?)?;
    let k = radial_in(&rho, p);
    let gamma = k.divide_by_var(p).ok_or_else(|| Error::NotDivisible("primitive not divisible by p".into()))?;
    let alpha = slice.restrict(&gamma)?;
    let rest = gamma.try_add(&-&slice.extend(&alpha)?)?;
    let theta = rest.divide_by_var(p).ok_or_else(|| Error::NotDivisible("remainder not divisible by p".into()))?;
    let a1 = alpha.truncate(1);
    let low = a1.wedge(&a1.ext_d())?.wedge(&sigma.truncate(0).power(n.saturating_sub(2))?)?;
    let out = Decomposition {
        slice: slice.clone(),
        change,
        omega: w.clone(),
        alpha,
        sigma,
        theta,
        contact: !low.eval_at_0().is_zero(),
    };
    if !out.reassemble()?.eq_to_common_jet(w) {
        return Err(Error::Numerical("decomposition does not reassemble".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub enum Realizability {
    /// `omega = d(p1 pi^*alpha) + pi^*sigma` realizes `sigma`.
    Realizable { alpha: DiffForm, omega: DiffForm },
    NotRealizable { reason: String },
    /// No annihilator up to the searched degree.
    Open { degree: u32 },
}

/// Whether `sigma` on `K^{2n-1}` is the restriction of a form whose
/// Martinet hypersurface is the chart.
pub fn realizability(sigma: &DiffForm, degree: u32, seed: u64) -> Result<Realizability> {
    if sigma.degree() != 2 || sigma.dim() % 2 == 0 {
        return Err(Error::Precondition("needs a 2-form on an odd-dimensional chart".into()));
    }
    if !sigma.is_closed() {
        return Err(Error::NotClosed);
    }
    let n = sigma.dim().div_ceil(2);
    let r = sigma.rank_at_0()?;
    if r >= 2 * n - 2 {
        return Err(Error::Precondition(format!("rank sigma|0 = {r} is maximal")));
    }
    if n < 2 || r != 2 * n - 4 {
        return Ok(Realizability::NotRealizable { reason: format!("rank sigma|0 = {r}, needs {}", 2 * n - 4) });
    }
    let Some(alpha) = find_annihilator(sigma, degree, seed)? else {
        return Ok(Realizability::Open { degree });
    };
    let sub = sigma.chart();
    let mut name = String::from("p1");
    while sub.index_of(&name).is_some() {
        name.push('_');
    }
    let mut vars: Vec<String> = Vec::with_capacity(sub.dim() + 1);
    vars.push(name);
    vars.extend(sub.vars().iter().cloned());
    let full = Chart::new(vars)?;
    let slice = Slice::new(&full, 0)?;
    let alpha_full = alpha.rechart(slice.sub())?;
    let sigma_full = sigma.rechart(slice.sub())?;
    let omega = slice.extend(&alpha_full)?.mul_var(0).ext_d().try_add(&slice.extend(&sigma_full)?)?;
    Ok(Realizability::Realizable { alpha, omega })
}

/// A closed 2-form with `omega^n = f dx_1 ^ ... ^ dx_2n`:
/// `d((1/n!) F dx_2 + sum_{i>=2} x_{2i-1} dx_{2i})` with `F = int_0^{x_1} f`.
pub fn from_volume(f: &TruncatedPoly) -> Result<DiffForm> {
    let chart = f.chart();
    let dim = chart.dim();
    if dim % 2 != 0 || dim == 0 {
        return Err(Error::OddDimension(dim));
    }
    let n = dim / 2;
    let jet = f.jet();
    let fact: i64 = (1..=n as i64).product();
    let big_f = f.clone().with_jet(jet + 1).integral(0).scale(&(q(1) / q(fact)));
    let mut w = DiffForm::function(big_f).ext_d().wedge(&DiffForm::basis(chart, jet, 1))?;
    for i in 1..n {
        w = &w + &DiffForm::basis(chart, jet, 2 * i).wedge(&DiffForm::basis(chart, jet, 2 * i + 1))?;
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropCShape {
    /// `d(p1 (dx + (C + z) dy)) + g(x, y) dx^dy`.
    First,
    /// `d(p1 (dy + (C + z) dx)) + g(x, y) dx^dy`.
    Second,
}

#[derive(Clone, Debug)]
pub struct PropCForm {
    pub shape: PropCShape,
    pub c: Rational,
    pub g: TruncatedPoly,
    pub degenerate: bool,
}

/// Matches `omega` on `(p1, x, y, z)` against the two normal forms of germs
/// whose restriction admits a kernel field.
#[allow(non_snake_case)]
pub fn propC_normal_form(w: &DiffForm) -> Result<PropCForm> {
    if w.dim() != 4 {
        return Err(Error::WrongVariableCount { expected: 4, found: w.dim() });
    }
    let md = martinet(w)?;
    if md.pivot != Some(0) || md.change.is_some() {
        return Err(Error::TemplateMismatch("Martinet hypersurface is not {p1 = 0}".into()));
    }
    let dec = decompose_adapted(w, md.slice.as_ref().expect("smooth"), None)?;
    if !dec.theta.is_zero() {
        return Err(Error::TemplateMismatch("p1^2 correction term present".into()));
    }
    let sub = dec.slice.sub().clone();
    let jet = dec.alpha.jet();
    let z = TruncatedPoly::var(&sub, jet, 2);
    let (a, b) = (dec.alpha.coeff(0b001), dec.alpha.coeff(0b010));
    if !dec.alpha.coeff(0b100).is_zero() {
        return Err(Error::TemplateMismatch("alpha has a dz component".into()));
    }
    let one = TruncatedPoly::one(&sub, jet);
    let (shape, other) = if a == one {
        (PropCShape::First, b)
    } else if b == one {
        (PropCShape::Second, a)
    } else {
        return Err(Error::TemplateMismatch("alpha is not dx + (C + z) dy or dy + (C + z) dx".into()));
    };
    let c = other.constant_term();
    if other != &TruncatedPoly::constant(&sub, jet, c.clone()) + &z {
        return Err(Error::TemplateMismatch("alpha coefficient is not C + z".into()));
    }
    let sigma = &dec.sigma;
    if sigma.coeffs().keys().any(|&m| m != 0b011) {
        return Err(Error::TemplateMismatch("sigma is not a multiple of dx^dy".into()));
    }
    let g = sigma.coeff(0b011);
    if g.terms().keys().any(|m| m.0[2] != 0) {
        return Err(Error::TemplateMismatch("sigma depends on z".into()));
    }
    Ok(PropCForm { shape, c, degenerate: g.is_zero(), g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;
    use crate::scalar_poly::qf;

    fn chart4() -> Arc<Chart> {
        Chart::new(["p1", "x", "y", "z"]).unwrap()
    }

    fn v(c: &Arc<Chart>, i: usize) -> TruncatedPoly {
        TruncatedPoly::var(c, 8, i)
    }

    fn d(c: &Arc<Chart>, i: usize) -> DiffForm {
        DiffForm::basis(c, 8, i)
    }

    fn omega0(c: &Arc<Chart>) -> DiffForm {
        let alpha = &d(c, 1) - &d(c, 2).mul_poly(&v(c, 3));
        &alpha.mul_poly(&v(c, 0)).ext_d().with_jet(8) + &d(c, 1).wedge(&d(c, 2)).unwrap().mul_poly(&v(c, 1))
    }

    #[test]
    fn relative_primitive_of_p_dp_dx() {
        let c = chart4();
        let rho = d(&c, 0).wedge(&d(&c, 1)).unwrap().mul_poly(&v(&c, 0));
        let beta = relative_primitive_p1(&rho, 0).unwrap();
        assert_eq!(beta, d(&c, 1).scale(&qf(1, 2)));
        let back = beta.mul_var(0).mul_var(0).ext_d();
        assert!(back.eq_to_common_jet(&rho));
    }

    #[test]
    fn relative_primitive_rejects_non_divisible() {
        let c = chart4();
        let rho = d(&c, 0).wedge(&d(&c, 1)).unwrap();
        assert!(matches!(relative_primitive_p1(&rho, 0), Err(Error::NotDivisible(_))));
    }

    #[test]
    fn decomposition_of_omega0() {
        let c = chart4();
        let dec = decompose(&omega0(&c)).unwrap();
        let sub = dec.slice.sub().clone();
        let expect = &DiffForm::basis(&sub, 8, 0) - &DiffForm::basis(&sub, 8, 1).mul_poly(&TruncatedPoly::var(&sub, 8, 2));
        assert_eq!(dec.alpha, expect);
        assert!(dec.theta.is_zero());
        assert!(dec.contact);
    }

    #[test]
    fn decomposition_with_theta() {
        let c = chart4();
        let extra = d(&c, 3).mul_poly(&(&v(&c, 0) * &v(&c, 0))).mul_poly(&v(&c, 2)).ext_d().with_jet(8);
        let w = &omega0(&c) + &extra;
        let dec = decompose(&w).unwrap();
        assert!(!dec.theta.is_zero());
        assert!(dec.reassemble().unwrap().eq_to_common_jet(&w));
    }

    #[test]
    fn weighted_homotopy_primitive() {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let x = TruncatedPoly::var(&c, 8, 0);
        let y = TruncatedPoly::var(&c, 8, 1);
        let f = &(&x * &x) + &(&(&y * &y) * &y);
        let dz = DiffForm::basis(&c, 8, 2);
        let beta = DiffForm::function(f.clone()).ext_d().wedge(&dz).unwrap().with_jet(8);
        let w = [3, 2, 1];
        let gamma = homotopy_primitive(&beta, None, &w).unwrap();
        assert!(gamma.ext_d().eq_to_common_jet(&beta));
        let closed = DiffForm::function(f.clone()).ext_d().wedge(&dz).unwrap().mul_poly(&f).with_jet(8);
        assert_eq!(homotopy_primitive(&closed, Some(&f), &[1, 1, 1]).unwrap_err(), Error::NotQuasiHomogeneous);
        let g3 = homotopy_primitive(&closed, Some(&f), &w).unwrap();
        assert!(g3.ext_d().eq_to_common_jet(&closed));
        for coef in g3.coeffs().values() {
            assert!(local_divide(coef, &f).is_ok());
        }
    }

    #[test]
    fn division_by_df() {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let x = TruncatedPoly::var(&c, 7, 0);
        let y = TruncatedPoly::var(&c, 7, 1);
        let z = TruncatedPoly::var(&c, 7, 2);
        let f = &(&(&x * &x) + &(&y * &y)) + &(&z * &z);
        let df = DiffForm::function(f.clone()).ext_d();
        let g0 = &DiffForm::basis(&c, 7, 1).mul_poly(&(&x * &z)) + &DiffForm::basis(&c, 7, 2).mul_poly(&y);
        let beta = df.wedge(&g0).unwrap();
        for weights in [None, Some(&[1u32, 1, 1][..])] {
            let g = df_division(&beta, &f, weights).unwrap();
            assert!(df.wedge(&g).unwrap().eq_to_common_jet(&beta));
        }
        let bad = DiffForm::basis(&c, 7, 0).wedge(&DiffForm::basis(&c, 7, 1)).unwrap();
        assert!(matches!(df_division(&bad, &f, None), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn from_volume_has_prescribed_martinet_function() {
        let c = chart4();
        let f = &v(&c, 0) + &(&v(&c, 1) * &v(&c, 2));
        let w = from_volume(&f).unwrap();
        assert!(w.is_closed());
        assert_eq!(w.power(2).unwrap().top_coefficient().unwrap(), f);
        assert_eq!(w.jet(), 8);
    }

    #[test]
    fn realizability_of_x_dx_dy() {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let s = DiffForm::basis(&c, 6, 0).wedge(&DiffForm::basis(&c, 6, 1)).unwrap().mul_poly(&TruncatedPoly::var(&c, 6, 0));
        match realizability(&s, 2, 1).unwrap() {
            Realizability::Realizable { alpha, omega } => {
                assert!(alpha.wedge(&s).unwrap().is_zero());
                let md = martinet(&omega).unwrap();
                assert!(md.structurally_smooth());
            }
            other => panic!("{other:?}"),
        }
        let full = DiffForm::basis(&c, 6, 0).wedge(&DiffForm::basis(&c, 6, 1)).unwrap();
        assert!(realizability(&full, 2, 1).is_err());
    }

    #[test]
    fn prop_c_shapes() {
        let c = chart4();
        let p = propC_normal_form(&omega0(&c));
        // omega0 has alpha = dx - z dy: C = 0 but the z coefficient is -1
        assert!(p.is_err());
        let alpha = &d(&c, 1) + &d(&c, 2).mul_poly(&v(&c, 3));
        let w = &alpha.mul_poly(&v(&c, 0)).ext_d().with_jet(8) + &d(&c, 1).wedge(&d(&c, 2)).unwrap().mul_poly(&v(&c, 1));
        let pc = propC_normal_form(&w).unwrap();
        assert_eq!(pc.shape, PropCShape::First);
        assert_eq!(pc.c, q(0));
        let alpha1 = &d(&c, 2) + &d(&c, 1).mul_poly(&v(&c, 3));
        let w1 = &alpha1.mul_poly(&v(&c, 0)).ext_d().with_jet(8) + &d(&c, 1).wedge(&d(&c, 2)).unwrap().mul_poly(&v(&c, 1));
        assert_eq!(propC_normal_form(&w1).unwrap().shape, PropCShape::Second);
    }
}
