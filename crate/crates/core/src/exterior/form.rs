use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

use super::{ConstantTensor, PolyMapGerm, PolyVectorField, Subspace};
use crate::error::{Error, Result};
use crate::scalar_poly::{q, Chart, Rational, TruncatedPoly};

/// Sign of `dx_A ^ dx_B` relative to `dx_{A u B}` with indices sorted;
/// 0 when the index sets overlap. Every sign in this crate comes from here.
pub fn wedge_sign(a: u64, b: u64) -> i8 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        if j < 63 {
            inversions += (a >> (j + 1)).count_ones();
        }
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

pub fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}

/// A degree-`k` differential form `sum c_I dx_I` with coefficients reliable
/// up to the form's jet order. Index sets are bit masks.
#[derive(Clone)]
pub struct DiffForm {
    chart: Arc<Chart>,
    degree: usize,
    jet: u32,
    coeffs: BTreeMap<u64, TruncatedPoly>,
}

impl DiffForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize, jet: u32) -> Self {
        DiffForm { chart: chart.clone(), degree, jet, coeffs: BTreeMap::new() }
    }

    pub fn function(f: TruncatedPoly) -> Self {
        let mut out = DiffForm::zero(f.chart(), 0, f.jet());
        out.add_coeff(0, f);
        out
    }

    /// The basis one-form `dx_i`.
    pub fn basis(chart: &Arc<Chart>, jet: u32, i: usize) -> Self {
        let mut out = DiffForm::zero(chart, 1, jet);
        out.add_coeff(1 << i, TruncatedPoly::one(chart, jet));
        out
    }

    /// `dx_1 ^ ... ^ dx_m` in chart order.
    pub fn volume(chart: &Arc<Chart>, jet: u32) -> Self {
        let dim = chart.dim();
        let mut out = DiffForm::zero(chart, dim, jet);
        out.add_coeff(full_mask(dim), TruncatedPoly::one(chart, jet));
        out
    }

    pub fn from_coeffs<I>(chart: &Arc<Chart>, degree: usize, jet: u32, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, TruncatedPoly)>,
    {
        if degree > chart.dim() {
            return Err(Error::DegreeOverflow { degree, dim: chart.dim() });
        }
        let mut out = DiffForm::zero(chart, degree, jet);
        for (m, c) in coeffs {
            if m.count_ones() as usize != degree || m >> chart.dim() != 0 {
                return Err(Error::Precondition("index set does not match form degree".into()));
            }
            if !Chart::compatible(c.chart(), chart) {
                return Err(Error::ChartMismatch);
            }
            out.add_coeff(m, c);
        }
        Ok(out)
    }

    fn add_coeff(&mut self, mask: u64, c: TruncatedPoly) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        self.jet = self.jet.min(c.jet());
        let c = c.truncate(self.jet);
        let merged = match self.coeffs.remove(&mask) {
            Some(old) => &old + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.coeffs.insert(mask, merged);
        }
        self.normalize_jets();
    }

    fn normalize_jets(&mut self) {
        let jet = self.jet;
        if self.coeffs.values().any(|c| c.jet() != jet) {
            let coeffs = core::mem::take(&mut self.coeffs);
            self.coeffs = coeffs
                .into_iter()
                .map(|(m, c)| (m, c.truncate(jet).with_jet(jet)))
                .filter(|(_, c)| !c.is_zero())
                .collect();
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn jet(&self) -> u32 {
        self.jet
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, TruncatedPoly> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u64) -> TruncatedPoly {
        self.coeffs.get(&mask).cloned().unwrap_or_else(|| TruncatedPoly::zero(&self.chart, self.jet))
    }

    /// Coefficient of `dx_{indices}` with the indices in any order.
    pub fn coeff_of(&self, indices: &[usize]) -> TruncatedPoly {
        let mut sign = 1i8;
        let mut acc = 0u64;
        for &i in indices {
            sign *= wedge_sign(acc, 1 << i);
            acc |= 1 << i;
        }
        let c = self.coeff(acc);
        match sign {
            0 => TruncatedPoly::zero(&self.chart, self.jet),
            1 => c,
            _ => -&c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `d self = 0` at the jet order `d self` is known to.
    pub fn is_closed(&self) -> bool {
        self.ext_d().is_zero()
    }

    /// Linear parts of the coefficients at the origin, one row per
    /// coefficient.
    pub fn linear_parts(&self) -> Vec<Vec<Rational>> {
        self.coeffs.values().map(TruncatedPoly::gradient_at_0).collect()
    }

    /// Every coefficient divisible by the coordinate `var`.
    pub fn divide_by_var(&self, var: usize) -> Option<DiffForm> {
        let mut out = DiffForm::zero(&self.chart, self.degree, self.jet.saturating_sub(1));
        for (m, c) in &self.coeffs {
            out.add_coeff(*m, c.divide_by_var(var)?);
        }
        Some(out)
    }

    pub fn mul_var(&self, var: usize) -> DiffForm {
        let x = TruncatedPoly::var(&self.chart, self.jet + 1, var);
        let mut out = DiffForm::zero(&self.chart, self.degree, self.jet + 1);
        for (m, c) in &self.coeffs {
            out.add_coeff(*m, &c.clone().with_jet(self.jet + 1) * &x);
        }
        out
    }

    /// Relabels the jet order; see [`TruncatedPoly::with_jet`].
    pub fn with_jet(&self, jet: u32) -> DiffForm {
        if jet <= self.jet {
            return self.truncate(jet);
        }
        let mut out = self.clone();
        out.jet = jet;
        out.coeffs = out.coeffs.into_iter().map(|(m, c)| (m, c.with_jet(jet))).collect();
        out
    }

    /// Coefficient against the chart volume `dx_1 ^ ... ^ dx_m`.
    pub fn top_coefficient(&self) -> Result<TruncatedPoly> {
        if self.degree != self.dim() {
            return Err(Error::Precondition("not a top-degree form".into()));
        }
        Ok(self.coeff(full_mask(self.dim())))
    }

    pub fn as_function(&self) -> Result<TruncatedPoly> {
        if self.degree != 0 {
            return Err(Error::Precondition("not a 0-form".into()));
        }
        Ok(self.coeff(0))
    }

    pub fn truncate(&self, jet: u32) -> Self {
        let jet = jet.min(self.jet);
        let mut out = DiffForm::zero(&self.chart, self.degree, jet);
        for (m, c) in &self.coeffs {
            out.add_coeff(*m, c.truncate(jet));
        }
        out
    }

    pub fn rechart(&self, chart: &Arc<Chart>) -> Result<Self> {
        let mut out = DiffForm::zero(chart, self.degree, self.jet);
        for (m, c) in &self.coeffs {
            out.add_coeff(*m, c.rechart(chart)?);
        }
        Ok(out)
    }

    pub fn mul_poly(&self, f: &TruncatedPoly) -> Self {
        let mut out = DiffForm::zero(&self.chart, self.degree, self.jet.min(f.jet()));
        for (m, c) in &self.coeffs {
            out.add_coeff(*m, c * f);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = DiffForm::zero(&self.chart, self.degree, self.jet);
        for (m, p) in &self.coeffs {
            out.add_coeff(*m, p.scale(c));
        }
        out
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&q(c))
    }

    pub fn try_add(&self, other: &DiffForm) -> Result<DiffForm> {
        if !Chart::compatible(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::Precondition("adding forms of different degrees".into()));
        }
        let mut out = self.truncate(other.jet);
        for (m, c) in &other.coeffs {
            out.add_coeff(*m, c.clone());
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm> {
        if !Chart::compatible(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        let degree = self.degree + other.degree;
        if degree > self.dim() {
            return Err(Error::DegreeOverflow { degree, dim: self.dim() });
        }
        let mut out = DiffForm::zero(&self.chart, degree, self.jet.min(other.jet));
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &other.coeffs {
                let s = wedge_sign(*ma, *mb);
                if s == 0 {
                    continue;
                }
                let prod = ca * cb;
                out.add_coeff(ma | mb, if s > 0 { prod } else { -prod });
            }
        }
        Ok(out)
    }

    /// `self ^ self ^ ... ^ self` (`k` factors); `k = 0` gives the constant 1.
    pub fn power(&self, k: usize) -> Result<DiffForm> {
        let mut acc = DiffForm::function(TruncatedPoly::one(&self.chart, self.jet));
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Exterior derivative; the jet order drops by one.
    pub fn ext_d(&self) -> DiffForm {
        let dim = self.dim();
        let jet = self.jet.saturating_sub(1);
        let mut out = DiffForm::zero(&self.chart, self.degree + 1, jet);
        for (m, c) in &self.coeffs {
            for j in 0..dim {
                let s = wedge_sign(1 << j, *m);
                if s == 0 {
                    continue;
                }
                let dc = c.partial(j);
                if dc.is_zero() {
                    continue;
                }
                out.add_coeff(m | 1 << j, if s > 0 { dc } else { -dc });
            }
        }
        out.jet = jet;
        out.normalize_jets();
        out
    }

    /// Contraction `X _| self` in the first slot.
    pub fn interior(&self, x: &PolyVectorField) -> Result<DiffForm> {
        if self.degree == 0 {
            return Err(Error::ZeroDegreeContraction);
        }
        if !Chart::compatible(&self.chart, x.chart()) {
            return Err(Error::ChartMismatch);
        }
        let jet = self.jet.min(x.jet());
        let mut out = DiffForm::zero(&self.chart, self.degree - 1, jet);
        for (m, c) in &self.coeffs {
            for i in super::mask_indices(*m) {
                let xi = &x.components()[i];
                if xi.is_zero() {
                    continue;
                }
                let rest = m & !(1 << i);
                let prod = xi * c;
                out.add_coeff(rest, if wedge_sign(1 << i, rest) > 0 { prod } else { -prod });
            }
        }
        Ok(out)
    }

    /// `F^* self`; `self` lives on the target chart of `F`.
    pub fn pullback(&self, map: &PolyMapGerm) -> Result<DiffForm> {
        if !Chart::compatible(&self.chart, map.target()) {
            return Err(Error::ChartMismatch);
        }
        let src = map.source();
        let differentials: Vec<DiffForm> =
            map.components().iter().map(|c| DiffForm::function(c.clone()).ext_d()).collect();
        let mut cache: BTreeMap<u64, DiffForm> = BTreeMap::new();
        let base_jet = map.jet();
        let mut out = DiffForm::zero(src, self.degree, self.jet.min(base_jet));
        if self.degree > 0 {
            out.jet = out.jet.min(base_jet.saturating_sub(1));
        }
        for (m, c) in &self.coeffs {
            let pulled = c.compose(map.components())?;
            let basis = wedge_of_differentials(*m, &differentials, src, base_jet, &mut cache)?;
            out = out.try_add(&basis.mul_poly(&pulled))?;
        }
        Ok(out)
    }

    /// Constant part at the origin.
    pub fn eval_at_0(&self) -> ConstantTensor {
        let entries = self
            .coeffs
            .iter()
            .map(|(m, c)| (*m, c.constant_term()))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        ConstantTensor::new(self.dim(), self.degree, entries)
    }

    pub fn rank_at_0(&self) -> Result<usize> {
        if self.degree != 2 {
            return Err(Error::Precondition("rank is defined for 2-forms".into()));
        }
        Ok(self.eval_at_0().rank())
    }

    /// Canonical basis of `{v : v _| self|_0 = 0}`.
    pub fn kernel_at_0(&self) -> Subspace {
        self.eval_at_0().kernel()
    }

    /// Coefficients evaluated at a point, keyed by index mask.
    pub fn eval_f64(&self, x: &[f64]) -> BTreeMap<u64, f64> {
        self.coeffs.iter().map(|(m, c)| (*m, c.eval_f64(x))).collect()
    }

    /// Equality on the jet order both forms know.
    pub fn eq_to_common_jet(&self, other: &DiffForm) -> bool {
        Chart::compatible(&self.chart, &other.chart)
            && self.degree == other.degree
            && (self - other).is_zero()
    }

    /// Lowest total degree among the coefficients.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.values().filter_map(TruncatedPoly::order).min()
    }

    pub fn basis_name(chart: &Chart, mask: u64) -> String {
        let names: Vec<String> =
            mask_indices(mask).iter().map(|&i| alloc::format!("d{}", chart.var(i))).collect();
        names.join("^")
    }
}

fn full_mask(dim: usize) -> u64 {
    if dim == 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

fn wedge_of_differentials(
    mask: u64,
    differentials: &[DiffForm],
    src: &Arc<Chart>,
    jet: u32,
    cache: &mut BTreeMap<u64, DiffForm>,
) -> Result<DiffForm> {
    if mask == 0 {
        return Ok(DiffForm::function(TruncatedPoly::one(src, jet)));
    }
    if let Some(f) = cache.get(&mask) {
        return Ok(f.clone());
    }
    let top = 63 - mask.leading_zeros() as usize;
    let rest = mask & !(1 << top);
    let head = wedge_of_differentials(rest, differentials, src, jet, cache)?;
    let f = head.wedge(&differentials[top])?;
    cache.insert(mask, f.clone());
    Ok(f)
}

impl PartialEq for DiffForm {
    fn eq(&self, other: &Self) -> bool {
        self.eq_to_common_jet(other)
    }
}

impl Add for &DiffForm {
    type Output = DiffForm;
    fn add(self, rhs: &DiffForm) -> DiffForm {
        self.try_add(rhs).expect("form addition: chart or degree mismatch")
    }
}

impl Sub for &DiffForm {
    type Output = DiffForm;
    fn sub(self, rhs: &DiffForm) -> DiffForm {
        self.try_add(&-rhs).expect("form subtraction: chart or degree mismatch")
    }
}

impl Neg for &DiffForm {
    type Output = DiffForm;
    fn neg(self) -> DiffForm {
        self.scale(&-Rational::one())
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffForm[k={}, N={}]({})", self.degree, self.jet, self)
    }
}

/// Prints in the `.frm` syntax, e.g. `(2*p1)*dp1^dx + x*dy`.
impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if *m == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", DiffForm::basis_name(&self.chart, *m))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Arc<Chart>, Vec<DiffForm>, Vec<TruncatedPoly>) {
        let c = Chart::new(["p1", "x", "y", "z"]).unwrap();
        let d = (0..4).map(|i| DiffForm::basis(&c, 8, i)).collect();
        let v = (0..4).map(|i| TruncatedPoly::var(&c, 8, i)).collect();
        (c, d, v)
    }

    #[test]
    fn sign_routine() {
        assert_eq!(wedge_sign(0b01, 0b10), 1);
        assert_eq!(wedge_sign(0b10, 0b01), -1);
        assert_eq!(wedge_sign(0b11, 0b01), 0);
        assert_eq!(wedge_sign(0b100, 0b011), 1);
        assert_eq!(wedge_sign(0b010, 0b101), -1);
    }

    #[test]
    fn dx_wedge_dx_vanishes() {
        let (_, d, _) = setup();
        assert!(d[1].wedge(&d[1]).unwrap().is_zero());
    }

    #[test]
    fn leibniz_expansion_of_d() {
        // d(p1 (dz + x dy)) = dp1^dz + x dp1^dy + p1 dx^dy
        let (_, d, v) = setup();
        let inner = &d[3] + &d[2].mul_poly(&v[1]);
        let lhs = inner.mul_poly(&v[0]).ext_d();
        let rhs = &(&d[0].wedge(&d[3]).unwrap() + &d[0].wedge(&d[2]).unwrap().mul_poly(&v[1]))
            + &d[1].wedge(&d[2]).unwrap().mul_poly(&v[0]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn contraction_examples() {
        let (c, d, v) = setup();
        let dz = PolyVectorField::coordinate(&c, 8, 3);
        let dxf = PolyVectorField::coordinate(&c, 8, 1);
        let form = d[1].wedge(&d[2]).unwrap().mul_poly(&v[1]);
        assert!(form.interior(&dz).unwrap().is_zero());
        assert_eq!(d[1].wedge(&d[2]).unwrap().interior(&dxf).unwrap(), d[2]);
        let f = DiffForm::function(v[0].clone());
        assert_eq!(f.interior(&dz).unwrap_err(), Error::ZeroDegreeContraction);
    }

    #[test]
    fn degree_overflow() {
        let (_, d, _) = setup();
        let vol = d[0].wedge(&d[1]).unwrap().wedge(&d[2]).unwrap().wedge(&d[3]).unwrap();
        assert!(matches!(vol.wedge(&d[0]), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn coefficient_lookup_with_unsorted_indices() {
        let (_, d, v) = setup();
        let f = d[1].wedge(&d[2]).unwrap().mul_poly(&v[1]);
        assert_eq!(f.coeff_of(&[2, 1]), -&v[1]);
    }
}
