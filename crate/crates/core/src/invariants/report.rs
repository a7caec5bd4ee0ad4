use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    classify_sigma22_invariant, dim_span_j1, ideal_I_sigma, kernel_field_search,
    kernel_of_power, martinet, orientation_sign, tangent_to_sigma22, IdealData, KernelField, MartinetData,
    MartinetKind, Sigma22Data,
};
use crate::error::Result;
use crate::exterior::{DiffForm, Subspace};
use crate::scalar_poly::{RegularSequenceConfig, TruncatedPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    NonSingular,
    /// Smooth Martinet hypersurface with `rank sigma|_0 = 2n - 2`.
    Sigma20,
    StructurallySmooth,
    Singular,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::NonSingular => "non-singular",
            Regime::Sigma20 => "sigma20",
            Regime::StructurallySmooth => "structurally-smooth",
            Regime::Singular => "singular",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvariantConfig {
    pub kernel_field_order: u32,
    pub annihilator_degree: u32,
    pub regular: RegularSequenceConfig,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig { kernel_field_order: 8, annihilator_degree: 4, regular: RegularSequenceConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub n: usize,
    pub jet: u32,
    pub regime: Regime,
    pub martinet: MartinetData,
    /// Order of vanishing of `f` at 0.
    pub martinet_order: Option<u32>,
    /// Kernel of `omega^{n-1}` at 0, original coordinates.
    pub kernel: Subspace,
    pub rank_sigma: Option<usize>,
    /// `dim (K cap T_0 Sigma_2)`.
    pub kernel_in_sigma2: Option<usize>,
    /// `dim (K cap T_0 Z)` where `Z` is cut out by `sigma^{n-1}`.
    pub kernel_tangent_to_z: Option<usize>,
    /// Same kernel, as a subspace of the adapted chart of `Sigma_2`.
    pub kernel_on_sigma2: Option<Subspace>,
    pub tangent_z: Option<Subspace>,
    pub orientation: Option<i8>,
    pub dim_span_j1: Option<usize>,
    pub ideal: Option<IdealData>,
    pub kernel_field: Option<KernelField>,
    pub sigma22: Option<Sigma22Data>,
    pub notes: Vec<String>,
}

impl InvariantReport {
    pub fn sigma(&self) -> Option<&DiffForm> {
        self.martinet.sigma.as_ref()
    }

    pub fn f(&self) -> &TruncatedPoly {
        &self.martinet.f
    }
}

/// Every invariant that applies to `omega`. Fields that do not apply are
/// `None`, with a note saying why.
pub fn full_report(w: &DiffForm, cfg: &InvariantConfig) -> Result<InvariantReport> {
    let md = martinet(w)?;
    let n = md.n;
    let kernel = kernel_of_power(w, n)?;
    let mut rep = InvariantReport {
        n,
        jet: w.jet(),
        regime: Regime::Singular,
        martinet_order: md.f.order(),
        kernel,
        rank_sigma: None,
        kernel_in_sigma2: None,
        kernel_tangent_to_z: None,
        kernel_on_sigma2: None,
        tangent_z: None,
        orientation: None,
        dim_span_j1: None,
        ideal: None,
        kernel_field: None,
        sigma22: None,
        notes: Vec::new(),
        martinet: md.clone(),
    };
    match md.kind {
        MartinetKind::NonSingular => {
            rep.regime = Regime::NonSingular;
            rep.notes.push("omega is symplectic at 0".into());
            return Ok(rep);
        }
        MartinetKind::Singular => {
            rep.notes.push("Martinet hypersurface is singular at 0".into());
            return Ok(rep);
        }
        MartinetKind::StructurallySmooth => {}
    }
    rep.regime = Regime::StructurallySmooth;
    rep.orientation = Some(orientation_sign(&md, None)?);
    let sigma = md.sigma.as_ref().expect("smooth case has sigma");
    let slice = md.slice.as_ref().expect("smooth case has a slice");
    let p = slice.pivot();
    let r = sigma.rank_at_0()?;
    rep.rank_sigma = Some(r);
    if r >= 2 * n - 2 {
        rep.regime = Regime::Sigma20;
        rep.notes.push(format!("rank sigma|0 = {r}: Sigma20 point, finer invariants do not apply"));
        return Ok(rep);
    }
    let norm = md.normalized.as_ref().expect("smooth case is normalized");
    let k_adapted = kernel_of_power(norm, n)?;
    let dim = w.dim();
    let k_sigma = k_adapted.intersect(&hyperplane(dim, p));
    let dropped: Vec<_> = k_sigma
        .basis()
        .iter()
        .map(|v| v.iter().enumerate().filter(|(i, _)| *i != p).map(|(_, c)| c.clone()).collect())
        .collect();
    let k_on = Subspace::from_vectors(dim - 1, &dropped);
    rep.kernel_in_sigma2 = Some(k_on.dim());
    let tz = tangent_to_sigma22(sigma)?;
    rep.kernel_tangent_to_z = Some(k_on.intersect(&tz).dim());
    rep.tangent_z = Some(tz);
    if r == 2 * n - 4 {
        rep.dim_span_j1 = Some(dim_span_j1(sigma)?);
    } else {
        rep.notes.push(format!("rank sigma|0 = {r} < 2n-4: jet span not defined"));
    }
    if n == 2 && r == 0 {
        match ideal_I_sigma(sigma, cfg.annihilator_degree, &cfg.regular) {
            Ok(data) => rep.ideal = Some(data),
            Err(e) => rep.notes.push(format!("I(sigma): {e}")),
        }
        rep.kernel_field = Some(kernel_field_search(sigma, cfg.kernel_field_order)?);
        if k_on.dim() == 2 {
            rep.sigma22 = Some(classify_sigma22_invariant(sigma, &k_on)?);
        } else {
            rep.notes.push("kernel is not a plane in T Sigma2: Sigma22 label not defined".into());
        }
    } else {
        rep.notes.push("I(sigma), kernel fields and the Sigma22 label need n = 2 and sigma|0 = 0".into());
    }
    rep.kernel_on_sigma2 = Some(k_on);
    Ok(rep)
}

fn hyperplane(dim: usize, p: usize) -> Subspace {
    let vs: Vec<_> = (0..dim)
        .filter(|&i| i != p)
        .map(|i| {
            let mut v = alloc::vec![crate::scalar_poly::q0(); dim];
            v[i] = crate::scalar_poly::q1();
            v
        })
        .collect();
    Subspace::from_vectors(dim, &vs)
}
