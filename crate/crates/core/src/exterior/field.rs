use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scalar_poly::{Chart, Rational, TruncatedPoly};

/// Vector field `sum X_i d/dx_i` with truncated polynomial components.
#[derive(Clone)]
pub struct PolyVectorField {
    chart: Arc<Chart>,
    comps: Vec<TruncatedPoly>,
}

impl PolyVectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<TruncatedPoly>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::WrongVariableCount { expected: chart.dim(), found: comps.len() });
        }
        if comps.iter().any(|c| !Chart::compatible(c.chart(), chart)) {
            return Err(Error::ChartMismatch);
        }
        Ok(PolyVectorField { chart: chart.clone(), comps })
    }

    pub fn zero(chart: &Arc<Chart>, jet: u32) -> Self {
        let comps = (0..chart.dim()).map(|_| TruncatedPoly::zero(chart, jet)).collect();
        PolyVectorField { chart: chart.clone(), comps }
    }

    /// The coordinate field `d/dx_i`.
    pub fn coordinate(chart: &Arc<Chart>, jet: u32, i: usize) -> Self {
        let mut out = Self::zero(chart, jet);
        out.comps[i] = TruncatedPoly::one(chart, jet);
        out
    }

    /// Constant field with the given value.
    pub fn constant(chart: &Arc<Chart>, jet: u32, v: &[Rational]) -> Self {
        let comps = v.iter().map(|c| TruncatedPoly::constant(chart, jet, c.clone())).collect();
        PolyVectorField { chart: chart.clone(), comps }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[TruncatedPoly] {
        &self.comps
    }

    pub fn jet(&self) -> u32 {
        self.comps.iter().map(TruncatedPoly::jet).min().unwrap_or(u32::MAX)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(TruncatedPoly::is_zero)
    }

    pub fn eval_at_0(&self) -> Vec<Rational> {
        self.comps.iter().map(TruncatedPoly::constant_term).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &TruncatedPoly) -> TruncatedPoly {
        let mut out = TruncatedPoly::zero(&self.chart, f.jet().saturating_sub(1).min(self.jet()));
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.partial(i));
            }
        }
        out
    }

    pub fn truncate(&self, jet: u32) -> Self {
        let comps = self.comps.iter().map(|c| c.truncate(jet)).collect();
        PolyVectorField { chart: self.chart.clone(), comps }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let comps = self.comps.iter().map(|p| p.scale(c)).collect();
        PolyVectorField { chart: self.chart.clone(), comps }
    }

    pub fn mul_poly(&self, f: &TruncatedPoly) -> Self {
        let comps = self.comps.iter().map(|p| p * f).collect();
        PolyVectorField { chart: self.chart.clone(), comps }
    }

    pub fn add(&self, other: &PolyVectorField) -> Result<Self> {
        if !Chart::compatible(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(PolyVectorField { chart: self.chart.clone(), comps })
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyVectorField({self})")
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*d/d{}", self.chart.var(i))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
