use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An ordered coordinate system at the origin, optionally weighted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    vars: Vec<String>,
    weights: Option<Vec<u32>>,
}

impl Chart {
    pub fn new<I, S>(vars: I) -> Result<Arc<Chart>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || vars[..i].contains(v) {
                return Err(Error::Precondition(alloc::format!(
                    "chart variable `{v}` is empty or repeated"
                )));
            }
        }
        if vars.len() > 64 {
            return Err(Error::Precondition("charts are limited to 64 variables".to_string()));
        }
        Ok(Arc::new(Chart { vars, weights: None }))
    }

    pub fn with_weights<I, S>(vars: I, weights: Vec<u32>) -> Result<Arc<Chart>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let base = Chart::new(vars)?;
        if weights.len() != base.dim() || weights.iter().any(|&w| w == 0) {
            return Err(Error::Precondition(
                "weights must be positive, one per variable".to_string(),
            ));
        }
        Ok(Arc::new(Chart { vars: base.vars.clone(), weights: Some(weights) }))
    }

    /// Chart `x1 .. x{dim}`.
    pub fn numbered(prefix: &str, dim: usize) -> Arc<Chart> {
        Chart::new((1..=dim).map(|i| alloc::format!("{prefix}{i}"))).expect("distinct names")
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &str {
        &self.vars[i]
    }

    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Two charts are compatible when they name the same ordered variables.
    pub fn compatible(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
        Arc::ptr_eq(a, b) || a.vars == b.vars
    }

    /// The chart with variable `idx` removed.
    pub fn without(&self, idx: usize) -> Arc<Chart> {
        let mut vars = self.vars.clone();
        vars.remove(idx);
        let weights = self.weights.as_ref().map(|w| {
            let mut w = w.clone();
            w.remove(idx);
            w
        });
        Arc::new(Chart { vars, weights })
    }
}
