use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{DiffForm, PolyVectorField, Subspace};
use crate::linalg::{nullspace, nullspace_dense, rank_dense, SparseVec};
use crate::scalar_poly::{
    monomials_of_degree, q, q0, regular_sequence_check, signum, Monomial, Rational, RegularSequence,
    RegularSequenceConfig, TruncatedPoly,
};

/// Nullspace of the linear map sending unknown `j` to `images[j]`, keeping
/// only the terms of degree at most `max_deg`.
pub(crate) fn form_nullspace(images: &[DiffForm], max_deg: u32) -> Vec<SparseVec> {
    let mut rows: BTreeMap<(u64, Monomial), SparseVec> = BTreeMap::new();
    for (j, img) in images.iter().enumerate() {
        for (mask, c) in img.coeffs() {
            for (m, v) in c.terms() {
                if m.degree() <= max_deg {
                    rows.entry((*mask, m.clone())).or_default().insert(j, v.clone());
                }
            }
        }
    }
    nullspace(rows.into_values(), images.len())
}

fn monomials_up_to(dim: usize, deg: u32) -> Vec<Monomial> {
    (0..=deg).flat_map(|d| monomials_of_degree(dim, d)).collect()
}

fn n_of(sigma: &DiffForm) -> Result<usize> {
    if sigma.degree() != 2 {
        return Err(Error::Precondition("restriction must be a 2-form".into()));
    }
    let d = sigma.dim();
    if d % 2 == 0 {
        return Err(Error::Precondition(format!("restriction lives on an even chart of dimension {d}")));
    }
    Ok(d.div_ceil(2))
}

/// `dim span j^1 sigma^{n-1}|_0`, defined when `rank sigma|_0 = 2n - 4`.
pub fn dim_span_j1(sigma: &DiffForm) -> Result<usize> {
    let n = n_of(sigma)?;
    if n < 2 {
        return Err(Error::Precondition("needs n >= 2".into()));
    }
    let r = sigma.rank_at_0()?;
    if r != 2 * n - 4 {
        return Err(Error::Precondition(format!("rank of sigma at 0 is {r}, not {}", 2 * n - 4)));
    }
    let pow = sigma.truncate(1).power(n - 1)?;
    Ok(rank_dense(&pow.linear_parts()))
}

/// Common kernel of the linear parts of the coefficients of `sigma^{n-1}`,
/// the tangent space of its zero set when that is a submanifold.
pub fn tangent_to_sigma22(sigma: &DiffForm) -> Result<Subspace> {
    let n = n_of(sigma)?;
    let pow = sigma.truncate(1).power(n.saturating_sub(1))?;
    if !pow.eval_at_0().is_zero() {
        return Err(Error::Precondition("sigma^{n-1} does not vanish at 0".into()));
    }
    let d = sigma.dim();
    Ok(Subspace::from_vectors(d, &nullspace_dense(&pow.linear_parts(), d)))
}

/// A 1-form `alpha` of degree at most `degree` with `alpha ^ sigma^{n-1} = 0`
/// (to the order the truncation determines) and
/// `alpha ^ d alpha ^ sigma^{n-2} != 0` at the origin.
pub fn find_annihilator(sigma: &DiffForm, degree: u32, seed: u64) -> Result<Option<DiffForm>> {
    let n = n_of(sigma)?;
    if n < 2 {
        return Err(Error::Precondition("needs n >= 2".into()));
    }
    let chart = sigma.chart();
    let dim = chart.dim();
    let jet = sigma.jet();
    let pow = sigma.power(n - 1)?;
    let max_deg = match pow.order() {
        Some(o) => (degree + o).min(pow.jet()),
        None => 0,
    };
    let monos = monomials_up_to(dim, degree);
    let unknowns: Vec<(usize, &Monomial)> =
        (0..dim).flat_map(|i| monos.iter().map(move |m| (i, m))).collect();
    let one_form = |coeffs: &SparseVec| -> DiffForm {
        let mut out = DiffForm::zero(chart, 1, jet);
        for (j, c) in coeffs {
            let (i, m) = unknowns[*j];
            let p = TruncatedPoly::from_terms(chart, jet, [(m.clone(), c.clone())]);
            out = &out + &DiffForm::basis(chart, jet, i).mul_poly(&p);
        }
        out
    };
    let images: Vec<DiffForm> = if pow.is_zero() {
        Vec::new()
    } else {
        let mut imgs = Vec::with_capacity(unknowns.len());
        for j in 0..unknowns.len() {
            let mut e = SparseVec::new();
            e.insert(j, q(1));
            imgs.push(one_form(&e).wedge(&pow)?);
        }
        imgs
    };
    let basis: Vec<SparseVec> = if images.is_empty() {
        (0..unknowns.len())
            .map(|j| {
                let mut e = SparseVec::new();
                e.insert(j, q(1));
                e
            })
            .collect()
    } else {
        form_nullspace(&images, max_deg)
    };
    if basis.is_empty() {
        return Ok(None);
    }
    let s_low = sigma.truncate(1);
    let s_pow2 = s_low.power(n - 2)?;
    let is_contact = |a: &DiffForm| -> Result<bool> {
        let a1 = a.truncate(1);
        let t = a1.wedge(&a1.ext_d())?.wedge(&s_pow2)?;
        Ok(!t.eval_at_0().is_zero())
    };
    for v in &basis {
        let a = one_form(v);
        if is_contact(&a)? {
            return Ok(Some(a));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..24 {
        let mut combo = SparseVec::new();
        for v in &basis {
            let c = rng.random_range(-3i64..=3);
            if c == 0 {
                continue;
            }
            for (j, x) in v {
                let e = combo.entry(*j).or_insert_with(q0);
                *e += x * q(c);
            }
        }
        combo.retain(|_, x| !x.is_zero());
        let a = one_form(&combo);
        if is_contact(&a)? {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Generators of the ideal `I(sigma)` together with the regular sequence
/// verdict.
#[derive(Clone, Debug)]
pub struct IdealData {
    pub annihilator: DiffForm,
    pub generators: [TruncatedPoly; 2],
    pub verdict: RegularSequence,
}

/// `I(sigma)` for a closed 2-form on `K^3` with `sigma|_0 = 0`.
///
/// With `sigma = A dy^dz + B dz^dx + C dx^dy` and a contact annihilator
/// `alpha` we have `alpha_x A + alpha_y B + alpha_z C = 0`; if `alpha_k(0)`
/// is a unit the other two coefficients generate the ideal.
#[allow(non_snake_case)]
pub fn ideal_I_sigma(sigma: &DiffForm, degree: u32, cfg: &RegularSequenceConfig) -> Result<IdealData> {
    if sigma.dim() != 3 || sigma.degree() != 2 {
        return Err(Error::Precondition("I(sigma) needs a 2-form on a 3-dimensional chart".into()));
    }
    if sigma.rank_at_0()? != 0 {
        return Err(Error::Precondition("sigma does not vanish at 0".into()));
    }
    let alpha = find_annihilator(sigma, degree, cfg.seed)?
        .ok_or_else(|| Error::Infeasible { order: degree, what: "contact annihilator of sigma".into() })?;
    let k = (0..3)
        .find(|&i| !alpha.coeff(1 << i).constant_term().is_zero())
        .expect("contact forms do not vanish at 0");
    let parts = [sigma.coeff(0b110), -sigma.coeff(0b101), sigma.coeff(0b011)];
    let gens: Vec<TruncatedPoly> = (0..3).filter(|&i| i != k).map(|i| parts[i].clone()).collect();
    let verdict = regular_sequence_check(&gens[0], &gens[1], cfg)?;
    Ok(IdealData { annihilator: alpha, generators: [gens[0].clone(), gens[1].clone()], verdict })
}

#[derive(Clone, Debug)]
pub enum KernelField {
    /// A polynomial field with `X(0) != 0` annihilating `sigma` to its jet.
    Exists(PolyVectorField),
    /// No field with `X(0) != 0` has a `order`-jet compatible with `sigma`.
    Obstructed { order: u32 },
    /// Neither outcome up to `order`.
    Open { order: u32 },
}

/// Searches order by order for `X` with `X(0) != 0` and `X _| sigma = 0`.
pub fn kernel_field_search(sigma: &DiffForm, max_order: u32) -> Result<KernelField> {
    if sigma.degree() != 2 {
        return Err(Error::Precondition("kernel fields are searched for 2-forms".into()));
    }
    let chart = sigma.chart();
    let dim = chart.dim();
    let jet = sigma.jet();
    let Some(ord) = sigma.order() else {
        return Ok(KernelField::Exists(PolyVectorField::coordinate(chart, jet, 0)));
    };
    let mut images: BTreeMap<(usize, Monomial), DiffForm> = BTreeMap::new();
    for k in 0..=max_order {
        let monos = monomials_up_to(dim, k);
        let unknowns: Vec<(usize, Monomial)> =
            (0..dim).flat_map(|i| monos.iter().map(move |m| (i, m.clone()))).collect();
        let mut imgs = Vec::with_capacity(unknowns.len());
        for (i, m) in &unknowns {
            if !images.contains_key(&(*i, m.clone())) {
                let mut comps = vec![TruncatedPoly::zero(chart, jet); dim];
                comps[*i] = TruncatedPoly::from_terms(chart, jet, [(m.clone(), q(1))]);
                let x = PolyVectorField::new(chart, comps)?;
                images.insert((*i, m.clone()), sigma.interior(&x)?);
            }
            imgs.push(images[&(*i, m.clone())].clone());
        }
        let constant: Vec<usize> =
            unknowns.iter().enumerate().filter(|(_, (_, m))| m.degree() == 0).map(|(j, _)| j).collect();
        let moves_origin = |v: &SparseVec| constant.iter().any(|j| v.contains_key(j));
        let full = form_nullspace(&imgs, jet);
        if let Some(v) = full.iter().find(|v| moves_origin(v)) {
            let mut comps = vec![TruncatedPoly::zero(chart, jet); dim];
            for (j, c) in v {
                let (i, m) = &unknowns[*j];
                comps[*i].add_term(m.clone(), c.clone());
            }
            return Ok(KernelField::Exists(PolyVectorField::new(chart, comps)?));
        }
        if k + ord >= jet {
            return Ok(KernelField::Obstructed { order: k });
        }
        let trunc = form_nullspace(&imgs, k + ord);
        if !trunc.iter().any(moves_origin) {
            return Ok(KernelField::Obstructed { order: k });
        }
    }
    Ok(KernelField::Open { order: max_order })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sigma22Label {
    Hyperbolic,
    Elliptic,
    Parabolic,
}

impl Sigma22Label {
    pub fn from_discriminant(d: &Rational) -> Self {
        match signum(d) {
            1 => Sigma22Label::Hyperbolic,
            -1 => Sigma22Label::Elliptic,
            _ => Sigma22Label::Parabolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sigma22Label::Hyperbolic => "hyperbolic",
            Sigma22Label::Elliptic => "elliptic",
            Sigma22Label::Parabolic => "parabolic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sigma22Data {
    /// Template coefficients, present when `sigma` was read off the template.
    pub a: Option<TruncatedPoly>,
    pub b: Option<TruncatedPoly>,
    pub h: Option<TruncatedPoly>,
    pub discriminant: Rational,
    pub label: Sigma22Label,
}

/// `sigma = (dy3 + y1 dy2) ^ (b dy1 - a dy2)` on `(y1, y2, y3)` with
/// `a = int_0^{y1} (t b_3(t, y2, y3) - b_2(t, y2, y3)) dt + h(y2, y3)`,
/// which makes `sigma` closed.
pub fn sigma22_template(b: &TruncatedPoly, h: &TruncatedPoly) -> Result<DiffForm> {
    let chart = b.chart();
    if chart.dim() != 3 || !crate::scalar_poly::Chart::compatible(chart, h.chart()) {
        return Err(Error::Precondition("template needs b and h on one 3-dimensional chart".into()));
    }
    if h.terms().keys().any(|m| m.0[0] != 0) {
        return Err(Error::Precondition("h must not depend on y1".into()));
    }
    let jet = b.jet().min(h.jet());
    let y1 = TruncatedPoly::var(chart, jet, 0);
    let integrand = &(&y1 * &b.partial(2)) - &b.partial(1);
    let a = &integrand.integral(0).with_jet(jet) + h;
    let alpha = &DiffForm::basis(chart, jet, 2) + &DiffForm::basis(chart, jet, 1).mul_poly(&y1);
    let beta = &DiffForm::basis(chart, jet, 0).mul_poly(b) - &DiffForm::basis(chart, jet, 1).mul_poly(&a);
    alpha.wedge(&beta)
}

/// Reads `sigma = (dy3 + y1 dy2) ^ (b dy1 - a dy2)` on the chart
/// `(y1, y2, y3)` and classifies by `b_2(0)^2 + b_1(0) h_2(0)` where
/// `h = a(0, y2, y3)`.
pub fn classify_sigma220(sigma: &DiffForm) -> Result<Sigma22Data> {
    if sigma.dim() != 3 || sigma.degree() != 2 {
        return Err(Error::Precondition("template needs a 2-form on a 3-dimensional chart".into()));
    }
    let chart = sigma.chart();
    let a = sigma.coeff(0b110);
    let b = -sigma.coeff(0b101);
    let y1 = TruncatedPoly::var(chart, sigma.jet(), 0);
    let c12 = sigma.coeff(0b011);
    if c12 != -(&y1 * &b) {
        return Err(Error::TemplateMismatch(String::from("dy1^dy2 coefficient is not -y1*b")));
    }
    let h = a.at_zero_in(0);
    let b1 = b.partial(0).constant_term();
    let b2 = b.partial(1).constant_term();
    let h2 = h.partial(1).constant_term();
    let disc = &b2 * &b2 + &b1 * &h2;
    Ok(Sigma22Data {
        label: Sigma22Label::from_discriminant(&disc),
        a: Some(a),
        b: Some(b),
        h: Some(h),
        discriminant: disc,
    })
}

/// Chart-free version for `n = 2`: with `W = ker alpha_0|_0` (2-dimensional)
/// and `e` transverse to it, the discriminant is `-det Q` where
/// `Q_ij = (D_{w_j} sigma)(e, w_i)`. It agrees with the template formula.
pub fn classify_sigma22_invariant(sigma: &DiffForm, w: &Subspace) -> Result<Sigma22Data> {
    if sigma.dim() != 3 || w.dim() != 2 {
        return Err(Error::Precondition("needs a 3-dimensional chart and a 2-plane".into()));
    }
    if sigma.rank_at_0()? != 0 {
        return Err(Error::Precondition("sigma does not vanish at 0".into()));
    }
    let e = (0..3)
        .map(|i| {
            let mut v = vec![q0(); 3];
            v[i] = q(1);
            v
        })
        .find(|v| !w.contains(v))
        .expect("a plane misses some basis vector");
    let grads: Vec<crate::exterior::ConstantTensor> = (0..3)
        .map(|k| {
            let entries =
                sigma.coeffs().iter().map(|(m, c)| (*m, c.partial(k).constant_term())).collect();
            crate::exterior::ConstantTensor::new(3, 2, entries)
        })
        .collect();
    let basis = w.basis();
    let mut qm = vec![vec![q0(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = q0();
            for (k, g) in grads.iter().enumerate() {
                if !basis[j][k].is_zero() {
                    s += &basis[j][k] * g.eval(&[e.clone(), basis[i].clone()]);
                }
            }
            qm[i][j] = s;
        }
    }
    let det = &qm[0][0] * &qm[1][1] - &qm[0][1] * &qm[1][0];
    let disc = -det;
    Ok(Sigma22Data { a: None, b: None, h: None, label: Sigma22Label::from_discriminant(&disc), discriminant: disc })
}
