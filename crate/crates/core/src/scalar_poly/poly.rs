use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use super::{q, q0, Chart, Rational};
use crate::error::{Error, Result};

/// Exponent vector of a monomial, one entry per chart variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(&e, &w)| e as u32 * w).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }
}

/// All monomials in `dim` variables of total degree exactly `deg`.
pub fn monomials_of_degree(dim: usize, deg: u32) -> Vec<Monomial> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if cur.len() + 1 == dim {
            cur.push(left as u16);
            out.push(Monomial(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u16);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if deg == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(dim, deg, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Multivariate polynomial over `Q` known to be reliable up to total degree
/// `jet`. Terms above the jet order are never stored.
#[derive(Clone)]
pub struct TruncatedPoly {
    chart: Arc<Chart>,
    jet: u32,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Mul,
}

/// Checked ring operation; the result carries the smaller jet order.
pub fn poly_arith(p: &TruncatedPoly, q: &TruncatedPoly, kind: ArithKind) -> Result<TruncatedPoly> {
    if !Chart::compatible(&p.chart, &q.chart) {
        return Err(Error::ChartMismatch);
    }
    Ok(match kind {
        ArithKind::Add => p + q,
        ArithKind::Mul => p * q,
    })
}

impl TruncatedPoly {
    pub fn zero(chart: &Arc<Chart>, jet: u32) -> Self {
        TruncatedPoly { chart: chart.clone(), jet, terms: BTreeMap::new() }
    }

    pub fn constant(chart: &Arc<Chart>, jet: u32, c: Rational) -> Self {
        let mut p = Self::zero(chart, jet);
        p.add_term(Monomial::one(chart.dim()), c);
        p
    }

    pub fn one(chart: &Arc<Chart>, jet: u32) -> Self {
        Self::constant(chart, jet, Rational::one())
    }

    pub fn var(chart: &Arc<Chart>, jet: u32, i: usize) -> Self {
        let mut p = Self::zero(chart, jet);
        p.add_term(Monomial::var(chart.dim(), i), Rational::one());
        p
    }

    pub fn var_by_name(chart: &Arc<Chart>, jet: u32, name: &str) -> Result<Self> {
        Ok(Self::var(chart, jet, chart.require(name)?))
    }

    pub fn from_terms<I>(chart: &Arc<Chart>, jet: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(chart, jet);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m`, dropping it when it lies above the jet order.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.0.len(), self.chart.dim());
        if c.is_zero() || m.degree() > self.jet {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn jet(&self) -> u32 {
        self.jet
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(q0)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.chart.dim()))
    }

    /// Gradient at the origin (coefficients of the linear part).
    pub fn gradient_at_0(&self) -> Vec<Rational> {
        (0..self.chart.dim()).map(|i| self.coeff(&Monomial::var(self.chart.dim(), i))).collect()
    }

    /// Lowest total degree carrying a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn homogeneous_part(&self, deg: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() == deg);
        Self::from_terms(&self.chart, self.jet, terms.map(|(m, c)| (m.clone(), c.clone())))
    }

    /// Drops terms above `jet` and lowers the jet order accordingly.
    pub fn truncate(&self, jet: u32) -> Self {
        let jet = jet.min(self.jet);
        let terms = self.terms.iter().filter(|(m, _)| m.degree() <= jet);
        Self::from_terms(&self.chart, jet, terms.map(|(m, c)| (m.clone(), c.clone())))
    }

    /// Relabels the jet order. Only sound when the caller knows the data is
    /// exact up to `jet`.
    pub fn with_jet(mut self, jet: u32) -> Self {
        if jet < self.jet {
            return self.truncate(jet);
        }
        self.jet = jet;
        self
    }

    /// Moves the polynomial to a compatible chart (same variable names).
    pub fn rechart(&self, chart: &Arc<Chart>) -> Result<Self> {
        if !Chart::compatible(&self.chart, chart) {
            return Err(Error::ChartMismatch);
        }
        Ok(TruncatedPoly { chart: chart.clone(), jet: self.jet, terms: self.terms.clone() })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.chart, self.jet);
        }
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        TruncatedPoly { chart: self.chart.clone(), jet: self.jet, terms }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&q(c))
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Self {
        let mut out = Self::zero(&self.chart, self.jet);
        for (k, v) in &self.terms {
            out.add_term(k.mul(m), v * c);
        }
        out
    }

    /// Formal partial derivative; the jet order drops by one.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.chart, self.jet.saturating_sub(1));
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] -= 1;
            out.add_term(m2, c * q(e as i64));
        }
        out
    }

    pub fn partial_by_name(&self, name: &str) -> Result<Self> {
        Ok(self.partial(self.chart.require(name)?))
    }

    /// Antiderivative in `var` with zero constant of integration. The jet
    /// order is kept, so the top new degree is dropped.
    pub fn integral(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.chart, self.jet);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2.0[var] += 1;
            let e = m2.0[var] as i64;
            out.add_term(m2, c / q(e));
        }
        out
    }

    pub fn integral_by_name(&self, name: &str) -> Result<Self> {
        Ok(self.integral(self.chart.require(name)?))
    }

    /// Exact division by the variable `var`, if every term contains it.
    pub fn divide_by_var(&self, var: usize) -> Option<Self> {
        let mut out = Self::zero(&self.chart, self.jet.saturating_sub(1));
        for (m, c) in &self.terms {
            if m.0[var] == 0 {
                return None;
            }
            let mut m2 = m.clone();
            m2.0[var] -= 1;
            out.add_term(m2, c.clone());
        }
        Some(out)
    }

    /// Sets variable `var` to zero.
    pub fn at_zero_in(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.0[var] == 0);
        Self::from_terms(&self.chart, self.jet, terms.map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn is_divisible_by_var(&self, var: usize) -> bool {
        self.terms.keys().all(|m| m.0[var] > 0)
    }

    /// Substitutes `comps[i]` for variable `i`. The components live on
    /// another chart and must vanish at the origin.
    pub fn compose(&self, comps: &[TruncatedPoly]) -> Result<TruncatedPoly> {
        if comps.len() != self.chart.dim() {
            return Err(Error::WrongVariableCount { expected: self.chart.dim(), found: comps.len() });
        }
        let src = match comps.first() {
            Some(c) => c.chart.clone(),
            None => return Ok(self.clone()),
        };
        if comps.iter().any(|c| !Chart::compatible(&c.chart, &src)) {
            return Err(Error::ChartMismatch);
        }
        if comps.iter().any(|c| !c.constant_term().is_zero()) {
            return Err(Error::Precondition("substituted components must vanish at 0".into()));
        }
        let jet = comps.iter().map(|c| c.jet).fold(self.jet, u32::min);
        let mut powers: Vec<Vec<TruncatedPoly>> =
            comps.iter().map(|_| vec![TruncatedPoly::one(&src, jet)]).collect();
        let mut out = TruncatedPoly::zero(&src, jet);
        for (m, c) in &self.terms {
            let mut acc = TruncatedPoly::constant(&src, jet, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &comps[i];
                    powers[i].push(next.truncate(jet));
                }
                acc = &acc * &powers[i][e as usize];
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= x[i];
                }
            }
            s += t;
        }
        s
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut s = q0();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &x[i];
                }
            }
            s += t;
        }
        s
    }

    /// Equality of the parts both operands know reliably.
    pub fn eq_to_common_jet(&self, other: &TruncatedPoly) -> bool {
        Chart::compatible(&self.chart, &other.chart) && (self - other).is_zero()
    }
}

impl PartialEq for TruncatedPoly {
    fn eq(&self, other: &Self) -> bool {
        self.eq_to_common_jet(other)
    }
}

impl fmt::Debug for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedPoly[N={}]({})", self.jet, self)
    }
}

fn check_charts(a: &TruncatedPoly, b: &TruncatedPoly) {
    assert!(Chart::compatible(&a.chart, &b.chart), "polynomial chart mismatch");
}

impl Add for &TruncatedPoly {
    type Output = TruncatedPoly;
    fn add(self, rhs: &TruncatedPoly) -> TruncatedPoly {
        check_charts(self, rhs);
        let mut out = self.truncate(rhs.jet);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &TruncatedPoly {
    type Output = TruncatedPoly;
    fn sub(self, rhs: &TruncatedPoly) -> TruncatedPoly {
        check_charts(self, rhs);
        let mut out = self.truncate(rhs.jet);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &TruncatedPoly {
    type Output = TruncatedPoly;
    fn neg(self) -> TruncatedPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect();
        TruncatedPoly { chart: self.chart.clone(), jet: self.jet, terms }
    }
}

impl Mul for &TruncatedPoly {
    type Output = TruncatedPoly;
    fn mul(self, rhs: &TruncatedPoly) -> TruncatedPoly {
        check_charts(self, rhs);
        let jet = self.jet.min(rhs.jet);
        let mut out = TruncatedPoly::zero(&self.chart, jet);
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > jet {
                continue;
            }
            for (mb, cb) in &rhs.terms {
                if da + mb.degree() > jet {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for TruncatedPoly {
            type Output = TruncatedPoly;
            fn $method(self, rhs: TruncatedPoly) -> TruncatedPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for TruncatedPoly {
    type Output = TruncatedPoly;
    fn neg(self) -> TruncatedPoly {
        -&self
    }
}

/// Prints in the `.frm` expression syntax: `2*x**2 - 1/2*y*z`.
impl fmt::Display for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then(b.0.cmp(a.0)));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            use num_traits::Signed;
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<alloc::string::String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(alloc::format!("{abs}"));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.chart.var(i).into()),
                    _ => factors.push(alloc::format!("{}**{}", self.chart.var(i), e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
