//! Invariants of closed 2-form germs on `K^{2n}`: the Martinet function and
//! hypersurface, the restriction `sigma`, kernels, canonical orientation and
//! the finer data of the restriction.

mod report;
mod sigma;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::{formal_inverse, DiffForm, PolyMapGerm, Slice, Subspace, EXACT_JET};
use crate::linalg::det_dense;
use crate::scalar_poly::{local_divide, q0, q1, signum, Rational, TruncatedPoly};

pub use report::{full_report, InvariantConfig, InvariantReport, Regime};
pub use sigma::{
    classify_sigma220, classify_sigma22_invariant, dim_span_j1, find_annihilator, ideal_I_sigma, sigma22_template,
    kernel_field_search, tangent_to_sigma22, IdealData, KernelField, Sigma22Data, Sigma22Label,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MartinetKind {
    /// `f(0) != 0`: the form is symplectic at the origin.
    NonSingular,
    /// `f(0) = 0` and `df(0) != 0`.
    StructurallySmooth,
    /// `f(0) = 0` and `df(0) = 0`.
    Singular,
}

/// `omega^n = f Omega` together with adapted coordinates in which the
/// Martinet hypersurface is `{x_pivot = 0}`.
#[derive(Clone, Debug)]
pub struct MartinetData {
    pub n: usize,
    pub f: TruncatedPoly,
    pub kind: MartinetKind,
    pub pivot: Option<usize>,
    /// Map from adapted to original coordinates; `None` when the original
    /// chart is already adapted.
    pub change: Option<PolyMapGerm>,
    /// The form in adapted coordinates.
    pub normalized: Option<DiffForm>,
    pub slice: Option<Slice>,
    pub sigma: Option<DiffForm>,
}

impl MartinetData {
    pub fn structurally_smooth(&self) -> bool {
        self.kind == MartinetKind::StructurallySmooth
    }

    /// Moves another form on the same chart into these adapted coordinates.
    pub fn normalize(&self, w: &DiffForm) -> Result<DiffForm> {
        match &self.change {
            Some(g) => w.pullback(g),
            None => Ok(w.clone()),
        }
    }
}

/// Checks that `w` is a closed 2-form on an even-dimensional chart and
/// returns half the dimension.
pub fn check_closed_2form(w: &DiffForm) -> Result<usize> {
    if w.degree() != 2 {
        return Err(Error::Precondition(format!("expected a 2-form, got degree {}", w.degree())));
    }
    let dim = w.dim();
    if dim % 2 != 0 || dim == 0 {
        return Err(Error::OddDimension(dim));
    }
    if !w.is_closed() {
        return Err(Error::NotClosed);
    }
    Ok(dim / 2)
}

/// The Martinet function `f` with `omega^n = f dx_1 ^ ... ^ dx_2n` and the
/// structurally smooth data when `df(0) != 0`.
pub fn martinet(w: &DiffForm) -> Result<MartinetData> {
    let n = check_closed_2form(w)?;
    let f = w.power(n)?.top_coefficient()?;
    if f.is_zero() {
        return Err(Error::DegenerateMartinet);
    }
    let mut data = MartinetData {
        n,
        f: f.clone(),
        kind: MartinetKind::Singular,
        pivot: None,
        change: None,
        normalized: None,
        slice: None,
        sigma: None,
    };
    if !f.constant_term().is_zero() {
        data.kind = MartinetKind::NonSingular;
        return Ok(data);
    }
    let grad = f.gradient_at_0();
    let Some(p) = grad.iter().position(|g| !g.is_zero()) else {
        return Ok(data);
    };
    data.kind = MartinetKind::StructurallySmooth;
    data.pivot = Some(p);
    let chart = w.chart();
    let normalized = if f.is_divisible_by_var(p) {
        w.clone()
    } else {
        let comps = (0..chart.dim())
            .map(|i| {
                if i == p {
                    f.scale(&grad[p].recip())
                } else {
                    TruncatedPoly::var(chart, EXACT_JET, i)
                }
            })
            .collect();
        let psi = PolyMapGerm::new(chart, chart, comps)?;
        let inv = formal_inverse(&psi, w.jet())?;
        let out = w.pullback(&inv)?;
        data.change = Some(inv);
        out
    };
    let slice = Slice::new(chart, p)?;
    data.sigma = Some(slice.restrict(&normalized)?);
    data.normalized = Some(normalized);
    data.slice = Some(slice);
    Ok(data)
}

/// Kernel of `omega^{n-1}` at the origin.
pub fn kernel_of_power(w: &DiffForm, n: usize) -> Result<Subspace> {
    if n <= 1 {
        return Ok(w.kernel_at_0());
    }
    Ok(w.truncate(0).power(n - 1)?.kernel_at_0())
}

/// Default frame of `T_0 Sigma_2`: `e_i - (f_i / f_p) e_p` for `i != p`.
pub fn default_frame(md: &MartinetData) -> Result<Vec<Vec<Rational>>> {
    let p = md.pivot.ok_or_else(|| Error::Precondition("Martinet hypersurface is not smooth".into()))?;
    let g = md.f.gradient_at_0();
    let m = g.len();
    Ok((0..m)
        .filter(|&i| i != p)
        .map(|i| {
            let mut v = vec![q0(); m];
            v[i] = q1();
            v[p] = -(&g[i] / &g[p]);
            v
        })
        .collect())
}

/// Sign of the canonical orientation of `Sigma_2` (the form `Omega_S` with
/// `df ^ Omega_S = omega^n / f`) on a frame of `T_0 Sigma_2`, in original
/// coordinates. Without a frame the default frame is used.
pub fn orientation_sign(md: &MartinetData, frame: Option<&[Vec<Rational>]>) -> Result<i8> {
    let p = md.pivot.ok_or_else(|| Error::Precondition("Martinet hypersurface is not smooth".into()))?;
    let g = md.f.gradient_at_0();
    let m = g.len();
    let owned;
    let frame = match frame {
        Some(fr) => fr,
        None => {
            owned = default_frame(md)?;
            &owned
        }
    };
    if frame.len() != m - 1 {
        return Err(Error::WrongVariableCount { expected: m - 1, found: frame.len() });
    }
    for v in frame {
        let dv = v.iter().zip(&g).fold(q0(), |s, (a, b)| s + a * b);
        if !dv.is_zero() {
            return Err(Error::Precondition("frame vector is not tangent to the hypersurface".into()));
        }
    }
    let mut rows = Vec::with_capacity(m);
    let mut u = vec![q0(); m];
    u[p] = q1();
    rows.push(u);
    rows.extend(frame.iter().cloned());
    let det = det_dense(&rows);
    if det.is_zero() {
        return Err(Error::Precondition("frame is degenerate".into()));
    }
    Ok(signum(&det) * signum(&g[p]))
}

/// Compares the canonical orientations of two forms sharing the Martinet
/// hypersurface: `f1 = u f0` and the answer is the sign of `u(0)`.
pub fn compare_orientation(f0: &TruncatedPoly, f1: &TruncatedPoly) -> Option<i8> {
    let u = local_divide(f1, f0).ok()?;
    match signum(&u.constant_term()) {
        0 => None,
        s => Some(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::{q, Chart};
    use alloc::sync::Arc;

    fn chart4() -> Arc<crate::Chart> {
        Chart::new(["p1", "x", "y", "z"]).unwrap()
    }

    fn v(c: &Arc<Chart>, i: usize) -> TruncatedPoly {
        TruncatedPoly::var(c, 8, i)
    }

    fn d(c: &Arc<Chart>, i: usize) -> DiffForm {
        DiffForm::basis(c, 8, i)
    }

    /// d(p1 (dx - z dy)) + x dx^dy
    pub(crate) fn omega0(c: &Arc<Chart>) -> DiffForm {
        let alpha = &d(c, 1) - &d(c, 2).mul_poly(&v(c, 3));
        let prim = alpha.mul_poly(&v(c, 0));
        &prim.ext_d().with_jet(8) + &d(c, 1).wedge(&d(c, 2)).unwrap().mul_poly(&v(c, 1))
    }

    #[test]
    fn martinet_of_omega0() {
        let c = chart4();
        let w = omega0(&c);
        let md = martinet(&w).unwrap();
        assert_eq!(md.kind, MartinetKind::StructurallySmooth);
        assert_eq!(md.f, v(&c, 0).scale_int(2));
        assert_eq!(md.pivot, Some(0));
        assert!(md.change.is_none());
        let sigma = md.sigma.unwrap();
        let s = md.slice.unwrap();
        let sub = s.sub();
        let expect = DiffForm::basis(sub, 8, 0)
            .wedge(&DiffForm::basis(sub, 8, 1))
            .unwrap()
            .mul_poly(&TruncatedPoly::var(sub, 8, 0));
        assert_eq!(sigma, expect);
    }

    #[test]
    fn symplectic_is_nonsingular() {
        let c = chart4();
        let w = &d(&c, 0).wedge(&d(&c, 1)).unwrap() + &d(&c, 2).wedge(&d(&c, 3)).unwrap();
        assert_eq!(martinet(&w).unwrap().kind, MartinetKind::NonSingular);
        assert_eq!(kernel_of_power(&w, 2).unwrap().dim(), 0);
    }

    #[test]
    fn curved_hypersurface_is_straightened() {
        // p1 + x^2 vanishes on a parabola; the adapted form sees {p1 = 0}
        let c = chart4();
        let g = &v(&c, 0) + &(&v(&c, 1) * &v(&c, 1));
        let prim = d(&c, 1).mul_poly(&(&g * &g)).scale(&crate::scalar_poly::qf(1, 2));
        let w = &prim.ext_d().with_jet(8) + &d(&c, 2).wedge(&d(&c, 3)).unwrap();
        let md = martinet(&w).unwrap();
        assert_eq!(md.kind, MartinetKind::StructurallySmooth);
        assert!(md.change.is_some());
        let norm = md.normalized.as_ref().unwrap();
        let f2 = norm.power(2).unwrap().top_coefficient().unwrap();
        assert!(f2.is_divisible_by_var(0));
        assert_eq!(orientation_sign(&md, None).unwrap(), 1);
    }

    #[test]
    fn orientation_flips_with_sign_of_f() {
        let c = chart4();
        let w = omega0(&c);
        let md = martinet(&w).unwrap();
        let s0 = orientation_sign(&md, None).unwrap();
        let w1 = &w - &d(&c, 0).wedge(&d(&c, 1)).unwrap().scale_int(2);
        let md1 = martinet(&w1).unwrap();
        assert_eq!(compare_orientation(&md.f, &md1.f), Some(-1));
        assert_eq!(orientation_sign(&md1, None).unwrap(), -s0);
        let frame = default_frame(&md).unwrap();
        let mut rev = frame.clone();
        rev.swap(0, 1);
        assert_eq!(orientation_sign(&md, Some(&rev)).unwrap(), -s0);
        assert_eq!(frame[0], alloc::vec![q(0), q(1), q(0), q(0)]);
    }

    #[test]
    fn kernels_of_the_two_examples() {
        let c = chart4();
        let k0 = kernel_of_power(&omega0(&c), 2).unwrap();
        assert_eq!(k0, Subspace::from_vectors(4, &[alloc::vec![q(0), q(0), q(1), q(0)], alloc::vec![q(0), q(0), q(0), q(1)]]));
    }

    #[test]
    fn not_closed_is_rejected() {
        let c = chart4();
        let w = d(&c, 0).wedge(&d(&c, 1)).unwrap().mul_poly(&v(&c, 2));
        assert_eq!(martinet(&w).unwrap_err(), Error::NotClosed);
    }
}
