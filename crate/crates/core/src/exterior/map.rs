use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use super::DiffForm;
use crate::error::{Error, Result};
use crate::linalg::inverse_dense;
use crate::scalar_poly::{Chart, Monomial, Rational, TruncatedPoly};

/// Jet order used for maps whose components are exact polynomials.
pub const EXACT_JET: u32 = 1 << 20;

/// Germ of a polynomial map `F : (source, 0) -> (target, 0)`, stored as one
/// component per target variable, each a polynomial on the source chart.
#[derive(Clone)]
pub struct PolyMapGerm {
    source: Arc<Chart>,
    target: Arc<Chart>,
    comps: Vec<TruncatedPoly>,
}

impl PolyMapGerm {
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, comps: Vec<TruncatedPoly>) -> Result<Self> {
        if comps.len() != target.dim() {
            return Err(Error::WrongVariableCount { expected: target.dim(), found: comps.len() });
        }
        if comps.iter().any(|c| !Chart::compatible(c.chart(), source)) {
            return Err(Error::ChartMismatch);
        }
        if comps.iter().any(|c| !c.constant_term().is_zero()) {
            return Err(Error::Precondition("map germ must fix the origin".into()));
        }
        Ok(PolyMapGerm { source: source.clone(), target: target.clone(), comps })
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        let comps = (0..chart.dim()).map(|i| TruncatedPoly::var(chart, EXACT_JET, i)).collect();
        PolyMapGerm { source: chart.clone(), target: chart.clone(), comps }
    }

    /// Linear map `y = A x`; row `i` of `a` gives target component `i`.
    pub fn linear(source: &Arc<Chart>, target: &Arc<Chart>, a: &[Vec<Rational>]) -> Result<Self> {
        let comps = a
            .iter()
            .map(|row| {
                let terms = row
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (Monomial::var(source.dim(), j), c.clone()));
                TruncatedPoly::from_terms(source, EXACT_JET, terms)
            })
            .collect();
        PolyMapGerm::new(source, target, comps)
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[TruncatedPoly] {
        &self.comps
    }

    pub fn jet(&self) -> u32 {
        self.comps.iter().map(TruncatedPoly::jet).min().unwrap_or(EXACT_JET)
    }

    pub fn truncate(&self, jet: u32) -> Self {
        let comps = self.comps.iter().map(|c| c.truncate(jet)).collect();
        PolyMapGerm { source: self.source.clone(), target: self.target.clone(), comps }
    }

    /// Jacobian at the origin: rows are target components.
    pub fn linear_part(&self) -> Vec<Vec<Rational>> {
        self.comps.iter().map(TruncatedPoly::gradient_at_0).collect()
    }

    /// `self . inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &PolyMapGerm) -> Result<PolyMapGerm> {
        if !Chart::compatible(&self.source, &inner.target) {
            return Err(Error::ChartMismatch);
        }
        let comps = self
            .comps
            .iter()
            .map(|c| c.compose(&inner.comps))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyMapGerm { source: inner.source.clone(), target: self.target.clone(), comps })
    }

    /// `f . F` for a function on the target chart.
    pub fn pull_function(&self, f: &TruncatedPoly) -> Result<TruncatedPoly> {
        if !Chart::compatible(f.chart(), &self.target) {
            return Err(Error::ChartMismatch);
        }
        f.compose(&self.comps)
    }

    pub fn pull_form(&self, w: &DiffForm) -> Result<DiffForm> {
        w.pullback(self)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    /// Jacobian matrix at a point, rows are target components.
    pub fn jacobian_f64(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.comps
            .iter()
            .map(|c| (0..self.source.dim()).map(|j| c.partial(j).eval_f64(x)).collect())
            .collect()
    }
}

/// Formal inverse up to order `jet`, by the fixed point iteration
/// `G = A^{-1}(y - H(G))` where `F = A x + H(x)`.
pub fn formal_inverse(map: &PolyMapGerm, jet: u32) -> Result<PolyMapGerm> {
    if map.source.dim() != map.target.dim() {
        return Err(Error::WrongVariableCount { expected: map.source.dim(), found: map.target.dim() });
    }
    let a = map.linear_part();
    let ainv = inverse_dense(&a).ok_or(Error::SingularLinearPart)?;
    let jet = jet.min(map.jet());
    let tgt = &map.target;
    let n = tgt.dim();
    let higher: Vec<TruncatedPoly> = map
        .comps
        .iter()
        .map(|c| {
            let lin = c.homogeneous_part(1);
            (c - &lin).rechart(&map.source).expect("same chart")
        })
        .collect();
    let higher_map = PolyMapGerm { source: map.source.clone(), target: map.target.clone(), comps: higher };
    let ys: Vec<TruncatedPoly> = (0..n).map(|i| TruncatedPoly::var(tgt, jet, i)).collect();
    let apply_ainv = |v: &[TruncatedPoly]| -> Vec<TruncatedPoly> {
        (0..n)
            .map(|i| {
                let mut acc = TruncatedPoly::zero(tgt, jet);
                for (j, vj) in v.iter().enumerate() {
                    if !ainv[i][j].is_zero() {
                        acc = &acc + &vj.scale(&ainv[i][j]);
                    }
                }
                acc
            })
            .collect()
    };
    let mut g = apply_ainv(&ys);
    for _ in 1..jet.max(1) {
        let h_of_g: Vec<TruncatedPoly> =
            higher_map.comps.iter().map(|h| h.compose(&g)).collect::<Result<_>>()?;
        let rhs: Vec<TruncatedPoly> = ys.iter().zip(&h_of_g).map(|(y, h)| y - h).collect();
        let next = apply_ainv(&rhs);
        if next.iter().zip(&g).all(|(a, b)| a == b) {
            g = next;
            break;
        }
        g = next;
    }
    Ok(PolyMapGerm { source: map.target.clone(), target: map.source.clone(), comps: g })
}

/// A coordinate hyperplane `{x_pivot = 0}` with the inclusion `iota` of the
/// slice and the projection `pi` dropping the pivot coordinate.
#[derive(Clone, Debug)]
pub struct Slice {
    full: Arc<Chart>,
    sub: Arc<Chart>,
    pivot: usize,
}

impl Slice {
    pub fn new(full: &Arc<Chart>, pivot: usize) -> Result<Self> {
        if pivot >= full.dim() {
            return Err(Error::Precondition("pivot outside chart".into()));
        }
        Ok(Slice { full: full.clone(), sub: full.without(pivot), pivot })
    }

    pub fn full(&self) -> &Arc<Chart> {
        &self.full
    }

    pub fn sub(&self) -> &Arc<Chart> {
        &self.sub
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// Inclusion `sub -> full`, inserting 0 at the pivot.
    pub fn iota(&self) -> PolyMapGerm {
        let comps = (0..self.full.dim())
            .map(|i| match i.cmp(&self.pivot) {
                core::cmp::Ordering::Less => TruncatedPoly::var(&self.sub, EXACT_JET, i),
                core::cmp::Ordering::Equal => TruncatedPoly::zero(&self.sub, EXACT_JET),
                core::cmp::Ordering::Greater => TruncatedPoly::var(&self.sub, EXACT_JET, i - 1),
            })
            .collect();
        PolyMapGerm { source: self.sub.clone(), target: self.full.clone(), comps }
    }

    /// Projection `full -> sub`, forgetting the pivot.
    pub fn pi(&self) -> PolyMapGerm {
        let comps = (0..self.full.dim())
            .filter(|&i| i != self.pivot)
            .map(|i| TruncatedPoly::var(&self.full, EXACT_JET, i))
            .collect();
        PolyMapGerm { source: self.full.clone(), target: self.sub.clone(), comps }
    }

    pub fn restrict(&self, w: &DiffForm) -> Result<DiffForm> {
        w.pullback(&self.iota())
    }

    pub fn extend(&self, w: &DiffForm) -> Result<DiffForm> {
        w.pullback(&self.pi())
    }
}

impl fmt::Debug for PolyMapGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMapGerm({self})")
    }
}

impl fmt::Display for PolyMapGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} = {c}", self.target.var(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::q;

    #[test]
    fn inverse_of_quadratic_shear() {
        let c = Chart::new(["x", "y"]).unwrap();
        let x = TruncatedPoly::var(&c, 6, 0);
        let y = TruncatedPoly::var(&c, 6, 1);
        let f = PolyMapGerm::new(&c, &c, alloc::vec![&x + &(&y * &y), &y.scale_int(2) + &(&x * &y)]).unwrap();
        let g = formal_inverse(&f, 6).unwrap();
        let id = f.compose(&g).unwrap();
        for (i, comp) in id.components().iter().enumerate() {
            assert_eq!(*comp, TruncatedPoly::var(&c, 6, i));
        }
        let id2 = g.compose(&f).unwrap();
        for (i, comp) in id2.components().iter().enumerate() {
            assert_eq!(*comp, TruncatedPoly::var(&c, 6, i));
        }
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let c = Chart::new(["x", "y"]).unwrap();
        let x = TruncatedPoly::var(&c, 4, 0);
        let f = PolyMapGerm::new(&c, &c, alloc::vec![x.clone(), &x * &x]).unwrap();
        assert_eq!(formal_inverse(&f, 4).unwrap_err(), Error::SingularLinearPart);
    }

    #[test]
    fn slice_maps() {
        let c = Chart::new(["p1", "x", "y"]).unwrap();
        let s = Slice::new(&c, 0).unwrap();
        let w = &DiffForm::basis(&c, 5, 0) + &DiffForm::basis(&c, 5, 1)
            .mul_poly(&(&TruncatedPoly::one(&c, 5) + &TruncatedPoly::var(&c, 5, 0)));
        let r = s.restrict(&w).unwrap();
        assert_eq!(r, DiffForm::basis(s.sub(), 5, 0));
        let back = s.extend(&r).unwrap();
        assert_eq!(back, DiffForm::basis(&c, 5, 1));
        assert_eq!(s.iota().linear_part()[0], alloc::vec![q(0), q(0)]);
    }
}
