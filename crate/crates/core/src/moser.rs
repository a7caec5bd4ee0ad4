//! Floating point verification of Moser flows.
//!
//! With `omega_t = omega0 + t (omega1 - omega0)` and a primitive `eta` of
//! `omega0 - omega1` divisible by the Martinet divisor (`p` or `f`), the
//! field `V_t` with `V_t _| omega_t = eta` solves the divided volume identity
//! `V_t _| D_t Omega = n (eta / divisor) ^ omega_t^{n-1}`, where
//! `omega_t^n = divisor * D_t * Omega`. Everything up to `D_t` and the right
//! hand side is exact; the flow itself is integrated with classical RK4
//! together with its Jacobian.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exterior::{mask_indices, wedge_sign, DiffForm, PolyMapGerm, Slice, EXACT_JET};
use crate::invariants::{check_closed_2form, martinet, MartinetData};
use crate::linalg::{solve, SparseVec};
use crate::normal_form::{decompose_adapted, relative_primitive_p1};
use crate::scalar_poly::{local_divide, monomials_of_degree, q, Chart, Monomial, Rational, TruncatedPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bridge {
    /// Same restriction to the tangent bundle along `{p = 0}`.
    RelDarboux,
    /// `d(p pi^*alpha_i) + pi^*sigma + d(p^2 theta_i)` with a common `sigma`.
    FourDimB,
    /// Common singular Martinet function `f`.
    Sing,
}

impl Bridge {
    pub fn name(self) -> &'static str {
        match self {
            Bridge::RelDarboux => "rel_darboux",
            Bridge::FourDimB => "fourdim_b",
            Bridge::Sing => "sing",
        }
    }

    pub fn from_name(s: &str) -> Option<Bridge> {
        match s {
            "rel_darboux" => Some(Bridge::RelDarboux),
            "fourdim_b" => Some(Bridge::FourDimB),
            "sing" => Some(Bridge::Sing),
            _ => None,
        }
    }
}

/// Polynomial compiled for fast float evaluation.
#[derive(Clone, Debug, Default)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u16)>)>,
}

impl Compiled {
    fn new(p: &TruncatedPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let exps = m.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e)).collect();
                (c.to_f64().unwrap_or(f64::NAN), exps)
            })
            .collect();
        Compiled { terms }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for &(i, e) in exps {
                t *= z[i].powi(e as i32);
            }
            s += t;
        }
        s
    }
}

/// Antisymmetric coefficient matrix of a 2-form, compiled.
#[derive(Clone, Debug)]
struct CompiledTwoForm {
    dim: usize,
    entries: Vec<(usize, usize, Compiled)>,
}

impl CompiledTwoForm {
    fn new(w: &DiffForm) -> Self {
        let entries = w
            .coeffs()
            .iter()
            .map(|(m, c)| {
                let idx = mask_indices(*m);
                (idx[0], idx[1], Compiled::new(c))
            })
            .collect();
        CompiledTwoForm { dim: w.dim(), entries }
    }

    fn matrix(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut m = vec![0.0; n * n];
        for (i, j, c) in &self.entries {
            let v = c.eval(x);
            m[i * n + j] += v;
            m[j * n + i] -= v;
        }
        m
    }
}

#[derive(Clone, Debug)]
struct CompiledField {
    dim: usize,
    density: Compiled,
    density_grad: Vec<Compiled>,
    /// Per component: sign, numerator and its gradient in `x`.
    comps: Vec<(f64, Compiled, Vec<Compiled>)>,
    omega0: CompiledTwoForm,
    target: CompiledTwoForm,
    original: CompiledTwoForm,
    eta: Vec<Compiled>,
}

/// Symbolic data of one Moser homotopy, ready for float evaluation.
#[derive(Clone, Debug)]
pub struct MoserProblem {
    pub omega0: DiffForm,
    pub omega1: DiffForm,
    pub bridge: Bridge,
    /// `p` or `f`.
    pub divisor: TruncatedPoly,
    /// Form the flow transports back to `omega0`; differs from `omega1`
    /// only after a preliminary rescaling.
    pub target: DiffForm,
    /// `V_t _| omega_t = eta`, `d eta = omega0 - target`.
    pub eta: DiffForm,
    /// Chart with the homotopy parameter appended as the last variable.
    pub extended: Arc<Chart>,
    /// `omega_t^n / (divisor * Omega)` on the extended chart.
    pub density: TruncatedPoly,
    /// `n (eta / divisor) ^ omega_t^{n-1}` on the extended chart.
    pub rhs: DiffForm,
    /// `x_p -> c x_p` applied after the flow.
    pub prescale: Option<(usize, Rational)>,
    compiled: CompiledField,
}

fn exact(w: &DiffForm) -> DiffForm {
    w.with_jet(EXACT_JET)
}

fn extended_chart(chart: &Chart) -> Result<Arc<Chart>> {
    let mut name = String::from("t");
    while chart.index_of(&name).is_some() {
        name.push('_');
    }
    let mut vars: Vec<String> = chart.vars().to_vec();
    vars.push(name);
    Chart::new(vars)
}

fn lift_poly(p: &TruncatedPoly, ext: &Arc<Chart>) -> TruncatedPoly {
    TruncatedPoly::from_terms(
        ext,
        EXACT_JET,
        p.terms().iter().map(|(m, c)| {
            let mut e = m.0.clone();
            e.push(0);
            (Monomial(e), c.clone())
        }),
    )
}

fn lift_form(w: &DiffForm, ext: &Arc<Chart>) -> DiffForm {
    DiffForm::from_coeffs(ext, w.degree(), EXACT_JET, w.coeffs().iter().map(|(m, c)| (*m, lift_poly(c, ext))))
        .expect("masks fit the larger chart")
}

/// `g / f` as polynomials, or an error when `f` does not divide `g`.
fn exact_divide(g: &TruncatedPoly, f: &TruncatedPoly) -> Result<TruncatedPoly> {
    if g.is_zero() {
        return Ok(TruncatedPoly::zero(g.chart(), EXACT_JET));
    }
    let top = g.max_degree().unwrap_or(0).max(f.max_degree().unwrap_or(0));
    let u = local_divide(&g.truncate(top), &f.truncate(top))?.with_jet(EXACT_JET);
    if &(&u * &f.clone().with_jet(EXACT_JET)) != g {
        return Err(Error::NotDivisible("volume density is not divisible by the Martinet divisor".into()));
    }
    Ok(u)
}

fn exact_divide_form(w: &DiffForm, f: &TruncatedPoly) -> Result<DiffForm> {
    let coeffs = w.coeffs().iter().map(|(m, c)| Ok((*m, exact_divide(c, f)?))).collect::<Result<Vec<_>>>()?;
    DiffForm::from_coeffs(w.chart(), w.degree(), EXACT_JET, coeffs)
}

fn same_chart(a: &DiffForm, b: &DiffForm) -> Result<usize> {
    let n = check_closed_2form(a)?;
    if check_closed_2form(b)? != n || !Chart::compatible(a.chart(), b.chart()) {
        return Err(Error::ChartMismatch);
    }
    Ok(n)
}

/// Pivot of a Martinet hypersurface that is already a coordinate hyperplane.
fn coordinate_pivot(md: &MartinetData) -> Result<usize> {
    match (md.pivot, &md.change) {
        (Some(p), None) => Ok(p),
        (Some(_), Some(_)) => {
            Err(Error::Precondition("Martinet hypersurface is not a coordinate hyperplane".into()))
        }
        _ => Err(Error::Precondition("Martinet hypersurface is not smooth".into())),
    }
}

impl MoserProblem {
    fn assemble(
        omega0: DiffForm,
        omega1: DiffForm,
        target: DiffForm,
        bridge: Bridge,
        divisor: TruncatedPoly,
        eta: DiffForm,
        prescale: Option<(usize, Rational)>,
    ) -> Result<Self> {
        let chart = omega0.chart().clone();
        let dim = chart.dim();
        let n = dim / 2;
        if !eta.ext_d().eq_to_common_jet(&exact(&(&omega0 - &target))) {
            return Err(Error::Numerical("primitive does not integrate the difference".into()));
        }
        let ext = extended_chart(&chart)?;
        let t = TruncatedPoly::var(&ext, EXACT_JET, dim);
        let w0 = lift_form(&omega0, &ext);
        let delta = lift_form(&(&target - &omega0), &ext);
        let wt = &w0 + &delta.mul_poly(&t);
        let div_ext = lift_poly(&divisor, &ext);
        let full = (1u64 << dim) - 1;
        let vol = wt.power(n)?.coeff(full);
        let density = exact_divide(&vol, &div_ext)?;
        let zeta = exact_divide_form(&eta, &divisor)?;
        let zeta_ext = lift_form(&zeta, &ext);
        let rhs = if n == 1 { zeta_ext } else { zeta_ext.wedge(&wt.power(n - 1)?)? }.scale_int(n as i64);

        let grad = |p: &TruncatedPoly| (0..dim).map(|j| Compiled::new(&p.partial(j))).collect::<Vec<_>>();
        let comps = (0..dim)
            .map(|i| {
                let rest = full & !(1u64 << i);
                let r = rhs.coeff(rest);
                (wedge_sign(1 << i, rest) as f64, Compiled::new(&r), grad(&r))
            })
            .collect();
        let compiled = CompiledField {
            dim,
            density: Compiled::new(&density),
            density_grad: grad(&density),
            comps,
            omega0: CompiledTwoForm::new(&omega0),
            target: CompiledTwoForm::new(&target),
            original: CompiledTwoForm::new(&omega1),
            eta: (0..dim).map(|i| Compiled::new(&eta.coeff(1 << i))).collect(),
        };
        Ok(MoserProblem {
            omega0,
            omega1,
            bridge,
            divisor,
            target,
            eta,
            extended: ext,
            density,
            rhs,
            prescale,
            compiled,
        })
    }

    /// Forms agreeing on the tangent bundle along `{p = 0}`:
    /// `eta = p^2 beta` with `omega0 - omega1 = d(p^2 beta)`.
    pub fn rel_darboux(omega0: &DiffForm, omega1: &DiffForm) -> Result<Self> {
        same_chart(omega0, omega1)?;
        let (w0, w1) = (exact(omega0), exact(omega1));
        let p = coordinate_pivot(&martinet(&w0)?)?;
        let beta = relative_primitive_p1(&(&w0 - &w1), p)?;
        let eta = beta.mul_var(p).mul_var(p).with_jet(EXACT_JET);
        let divisor = TruncatedPoly::var(w0.chart(), EXACT_JET, p);
        Self::assemble(w0, w1.clone(), w1, Bridge::RelDarboux, divisor, eta, None)
    }

    /// Forms `d(p pi^*alpha_i) + pi^*sigma + d(p^2 theta_i)` with a common
    /// `sigma`, contact `alpha_i` and `alpha_1|0 ^ sigma^{n-2}|0` a multiple
    /// `B` of `alpha_0|0 ^ sigma^{n-2}|0`. The first step rescales `p` by
    /// `1/B`.
    pub fn fourdim_b(omega0: &DiffForm, omega1: &DiffForm) -> Result<Self> {
        let n = same_chart(omega0, omega1)?;
        let (w0, w1) = (exact(omega0), exact(omega1));
        let p = coordinate_pivot(&martinet(&w0)?)?;
        if coordinate_pivot(&martinet(&w1)?)? != p {
            return Err(Error::Precondition("Martinet hypersurfaces differ".into()));
        }
        let chart = w0.chart().clone();
        let slice = Slice::new(&chart, p)?;
        let d0 = decompose_adapted(&w0, &slice, None)?;
        let d1 = decompose_adapted(&w1, &slice, None)?;
        if d0.sigma != d1.sigma {
            return Err(Error::Precondition("restrictions to the Martinet hypersurface differ".into()));
        }
        if !d0.contact || !d1.contact {
            return Err(Error::Precondition("alpha ^ d alpha ^ sigma^(n-2) vanishes at 0".into()));
        }
        let s0 = d0.sigma.truncate(0).power(n - 2)?;
        let l0 = d0.alpha.truncate(0).wedge(&s0)?.eval_at_0();
        let l1 = d1.alpha.truncate(0).wedge(&s0)?.eval_at_0();
        let b = proportionality(l0.entries(), l1.entries())
            .ok_or_else(|| Error::Precondition("line condition fails".into()))?;
        let dim = chart.dim();
        let scale: Vec<Vec<Rational>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i != j { q(0) } else if i == p { b.recip() } else { q(1) }).collect())
            .collect();
        let s = PolyMapGerm::linear(&chart, &chart, &scale)?;
        let target = exact(&w1.pullback(&s)?);
        let dt = decompose_adapted(&target, &slice, None)?;
        let vol = |a: &DiffForm| -> Result<_> { Ok(a.truncate(1).wedge(&a.truncate(1).ext_d())?.wedge(&s0)?.eval_at_0()) };
        let ratio = proportionality(vol(&d0.alpha)?.entries(), vol(&dt.alpha)?.entries())
            .ok_or_else(|| Error::Precondition("contact volumes are not proportional".into()))?;
        if ratio <= q(0) {
            return Err(Error::Precondition("orientation condition fails".into()));
        }
        let pa = slice.extend(&(&d0.alpha - &dt.alpha))?.mul_var(p);
        let pt = (&d0.theta - &dt.theta).mul_var(p).mul_var(p);
        let eta = exact(&(&pa.with_jet(EXACT_JET) + &pt.with_jet(EXACT_JET)));
        let divisor = TruncatedPoly::var(&chart, EXACT_JET, p);
        let prescale = if b == q(1) { None } else { Some((p, b.recip())) };
        Self::assemble(w0, w1, target, Bridge::FourDimB, divisor, eta, prescale)
    }

    /// Forms with the same singular Martinet function `f`: solves
    /// `omega1 - omega0 = d(f alpha)` over 1-forms with polynomial
    /// coefficients of degree at most `max_degree`, then `eta = -f alpha`.
    pub fn sing(omega0: &DiffForm, omega1: &DiffForm, max_degree: u32) -> Result<Self> {
        same_chart(omega0, omega1)?;
        let (w0, w1) = (exact(omega0), exact(omega1));
        let md = martinet(&w0)?;
        if !md.f.constant_term().is_zero() {
            return Err(Error::Precondition("form is symplectic at the origin".into()));
        }
        let f = md.f.clone().with_jet(EXACT_JET);
        let alpha = solve_f_primitive(&(&w1 - &w0), &f, max_degree)?
            .ok_or_else(|| Error::Infeasible { order: max_degree, what: "d(f alpha) = omega1 - omega0".into() })?;
        let eta = alpha.mul_poly(&f).scale_int(-1);
        Self::assemble(w0, w1.clone(), w1, Bridge::Sing, f, eta, None)
    }

    pub fn new(bridge: Bridge, omega0: &DiffForm, omega1: &DiffForm) -> Result<Self> {
        match bridge {
            Bridge::RelDarboux => Self::rel_darboux(omega0, omega1),
            Bridge::FourDimB => Self::fourdim_b(omega0, omega1),
            Bridge::Sing => Self::sing(omega0, omega1, 3),
        }
    }

    /// First bridge whose hypotheses hold, in the order rel_darboux,
    /// fourdim_b, sing.
    pub fn auto(omega0: &DiffForm, omega1: &DiffForm) -> Result<Self> {
        let mut last = Error::Precondition("no bridge applies".into());
        for b in [Bridge::RelDarboux, Bridge::FourDimB, Bridge::Sing] {
            match Self::new(b, omega0, omega1) {
                Ok(p) => return Ok(p),
                Err(e @ (Error::ChartMismatch | Error::NotClosed | Error::OddDimension(_))) => return Err(e),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    pub fn dim(&self) -> usize {
        self.compiled.dim
    }

    fn point(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut z = x.to_vec();
        z.push(t);
        z
    }

    /// `D_t(x)`.
    pub fn density_at(&self, t: f64, x: &[f64]) -> f64 {
        self.compiled.density.eval(&self.point(t, x))
    }

    fn field_and_derivative(&self, t: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let c = &self.compiled;
        let m = c.dim;
        let z = self.point(t, x);
        let d = c.density.eval(&z);
        if !d.is_finite() || d.abs() < 1e-12 {
            return Err(Error::Numerical(format!("volume density {d:e} vanishes at t = {t}")));
        }
        let dd: Vec<f64> = c.density_grad.iter().map(|g| g.eval(&z)).collect();
        let mut v = vec![0.0; m];
        let mut dv = vec![0.0; m * m];
        for (i, (s, r, rg)) in c.comps.iter().enumerate() {
            let rv = r.eval(&z);
            v[i] = s * rv / d;
            for j in 0..m {
                dv[i * m + j] = s * (rg[j].eval(&z) * d - rv * dd[j]) / (d * d);
            }
        }
        Ok((v, dv))
    }

    /// `V_t` at a point of the trust box `[-half, half]^{2n}`.
    pub fn build_field(&self, t: f64, x: &[f64], half: f64) -> Result<Vec<f64>> {
        self.check_point(x, half)?;
        Ok(self.field_and_derivative(t, x)?.0)
    }

    fn check_point(&self, x: &[f64], half: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::WrongVariableCount { expected: self.dim(), found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > half) {
            return Err(Error::Precondition(format!("point outside the trust box of half-width {half}")));
        }
        Ok(())
    }

    /// Relative residual of `V_t _| omega_t = eta` at a point.
    pub fn field_residual(&self, t: f64, x: &[f64]) -> Result<f64> {
        let c = &self.compiled;
        let m = c.dim;
        let (v, _) = self.field_and_derivative(t, x)?;
        let a = c.omega0.matrix(x);
        let b = c.target.matrix(x);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..m {
            let mut s = 0.0;
            for i in 0..m {
                let w = a[i * m + j] + t * (b[i * m + j] - a[i * m + j]);
                s += v[i] * w;
                scale = scale.max((v[i] * w).abs());
            }
            let e = c.eta[j].eval(x);
            scale = scale.max(e.abs());
            worst = worst.max((s - e).abs());
        }
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    /// Pulls `omega1` back by `x -> Phi(x)` with Jacobian `jac` (row major)
    /// and compares with `omega0` at `x`.
    fn pullback_residual(&self, x: &[f64], y: &[f64], jac: &[f64]) -> f64 {
        let c = &self.compiled;
        let m = c.dim;
        let w1 = c.original.matrix(y);
        let w0 = c.omega0.matrix(x);
        let mut tmp = vec![0.0; m * m];
        for k in 0..m {
            for j in 0..m {
                tmp[k * m + j] = (0..m).map(|l| w1[k * m + l] * jac[l * m + j]).sum();
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let s: f64 = (0..m).map(|k| jac[k * m + i] * tmp[k * m + j]).sum();
                worst = worst.max((s - w0[i * m + j]).abs());
            }
        }
        worst
    }
}

/// `c` with `b = c a` as sparse rational tensors, `c != 0`.
fn proportionality(a: &BTreeMap<u64, Rational>, b: &BTreeMap<u64, Rational>) -> Option<Rational> {
    let (k, v) = a.iter().next()?;
    let c = b.get(k)? / v;
    if c.is_zero() || a.len() != b.len() || a.iter().any(|(k, v)| b.get(k) != Some(&(&c * v))) {
        return None;
    }
    Some(c)
}

/// A 1-form `alpha` with `d(f alpha) = delta`, coefficients of degree at
/// most `max_degree`. Constant terms are the last unknowns so that the
/// particular solution avoids them when it can.
fn solve_f_primitive(delta: &DiffForm, f: &TruncatedPoly, max_degree: u32) -> Result<Option<DiffForm>> {
    let chart = delta.chart();
    let dim = chart.dim();
    let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
    for deg in (0..=max_degree).rev() {
        for m in monomials_of_degree(dim, deg) {
            for i in 0..dim {
                unknowns.push((i, m.clone()));
            }
        }
    }
    let mut rows: BTreeMap<(u64, Monomial), SparseVec> = BTreeMap::new();
    for (col, (i, m)) in unknowns.iter().enumerate() {
        let g = TruncatedPoly::from_terms(chart, EXACT_JET, [(m.clone(), q(1))]);
        let img = DiffForm::basis(chart, EXACT_JET, *i).mul_poly(&(&g * f)).ext_d();
        for (mask, c) in img.coeffs() {
            for (mon, v) in c.terms() {
                rows.entry((*mask, mon.clone())).or_default().insert(col, v.clone());
            }
        }
    }
    for (mask, c) in delta.coeffs() {
        for mon in c.terms().keys() {
            rows.entry((*mask, mon.clone())).or_default();
        }
    }
    let system = rows.into_iter().map(|((mask, mon), row)| {
        let rhs = delta.coeff(mask).coeff(&mon);
        (row, rhs)
    });
    let Some(sol) = solve(system, unknowns.len()) else {
        return Ok(None);
    };
    let mut coeffs: BTreeMap<u64, TruncatedPoly> = BTreeMap::new();
    for ((i, m), v) in unknowns.into_iter().zip(sol) {
        if !v.is_zero() {
            coeffs.entry(1 << i).or_insert_with(|| TruncatedPoly::zero(chart, EXACT_JET)).add_term(m, v);
        }
    }
    Ok(Some(DiffForm::from_coeffs(chart, 1, EXACT_JET, coeffs)?))
}

#[derive(Clone, Debug)]
pub struct MoserConfig {
    /// Half-width of the trust box around the origin.
    pub half_width: f64,
    pub steps: usize,
    pub tol: f64,
    /// Samples whose Jacobian determinant drops below this are flagged.
    pub det_floor: f64,
    pub keep_trajectory: bool,
}

impl Default for MoserConfig {
    fn default() -> Self {
        MoserConfig { half_width: 0.1, steps: 200, tol: 1e-6, det_floor: 1e-8, keep_trajectory: false }
    }
}

#[derive(Clone, Debug)]
pub struct FlowSample {
    pub start: Vec<f64>,
    /// `Phi_1(start)`, including any preliminary rescaling.
    pub end: Vec<f64>,
    /// Points after each step; empty unless requested.
    pub trajectory: Vec<Vec<f64>>,
    /// `D Phi_1` at the start, row major.
    pub jacobian: Vec<f64>,
    /// Smallest `|det D Phi_t|` seen along the integration.
    pub min_det: f64,
    /// Entrywise max of `(D Phi)^T omega1(Phi) D Phi - omega0`.
    pub residual: f64,
    /// Max-norm displacement `|Phi_1(x) - x|`.
    pub moved: f64,
    pub degenerate: bool,
    pub failure: Option<String>,
    pub pass: bool,
}

fn det_f64(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs())).expect("nonempty");
        if m[piv * n + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..n {
                m.swap(piv * n + k, c * n + k);
            }
            det = -det;
        }
        det *= m[c * n + c];
        for r in c + 1..n {
            let f = m[r * n + c] / m[c * n + c];
            for k in c..n {
                m[r * n + k] -= f * m[c * n + k];
            }
        }
    }
    det
}

impl MoserProblem {
    /// Derivative of the joint state `(x, J)`.
    fn rhs_state(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        let (v, dv) = self.field_and_derivative(t, &state[..m])?;
        let mut out = v;
        out.resize(m + m * m, 0.0);
        let jac = &state[m..];
        for i in 0..m {
            for j in 0..m {
                out[m + i * m + j] = (0..m).map(|k| dv[i * m + k] * jac[k * m + j]).sum();
            }
        }
        Ok(out)
    }

    fn integrate_one(&self, x: &[f64], cfg: &MoserConfig) -> FlowSample {
        let m = self.dim();
        let mut state = x.to_vec();
        for i in 0..m {
            for j in 0..m {
                state.push(if i == j { 1.0 } else { 0.0 });
            }
        }
        let mut sample = FlowSample {
            start: x.to_vec(),
            end: x.to_vec(),
            trajectory: Vec::new(),
            jacobian: Vec::new(),
            min_det: 1.0,
            residual: f64::INFINITY,
            moved: 0.0,
            degenerate: false,
            failure: None,
            pass: false,
        };
        let h = 1.0 / cfg.steps as f64;
        let axpy = |s: &[f64], k: &[f64], a: f64| s.iter().zip(k).map(|(u, v)| u + a * v).collect::<Vec<f64>>();
        for step in 0..cfg.steps {
            let t = step as f64 * h;
            let stage = || -> Result<Vec<f64>> {
                let k1 = self.rhs_state(t, &state)?;
                let k2 = self.rhs_state(t + h / 2.0, &axpy(&state, &k1, h / 2.0))?;
                let k3 = self.rhs_state(t + h / 2.0, &axpy(&state, &k2, h / 2.0))?;
                let k4 = self.rhs_state(t + h, &axpy(&state, &k3, h))?;
                Ok((0..state.len()).map(|i| state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
            };
            match stage() {
                Ok(next) if next.iter().all(|v| v.is_finite()) => state = next,
                Ok(_) => {
                    sample.failure = Some(format!("non-finite state at t = {t}"));
                    return sample;
                }
                Err(e) => {
                    sample.failure = Some(format!("{e}"));
                    return sample;
                }
            }
            let det = det_f64(&state[m..], m).abs();
            sample.min_det = sample.min_det.min(det);
            if cfg.keep_trajectory {
                sample.trajectory.push(state[..m].to_vec());
            }
        }
        let mut end = state[..m].to_vec();
        let mut jac = state[m..].to_vec();
        if let Some((p, c)) = &self.prescale {
            let c = c.to_f64().unwrap_or(f64::NAN);
            end[*p] *= c;
            for j in 0..m {
                jac[p * m + j] *= c;
            }
        }
        sample.residual = self.pullback_residual(x, &end, &jac);
        sample.moved = end.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        sample.degenerate = sample.min_det < cfg.det_floor;
        sample.end = end;
        sample.jacobian = jac;
        sample.pass = !sample.degenerate && sample.residual <= cfg.tol;
        sample
    }
}

/// Integrates `dPhi/dt = V_t(Phi)` with its variational equation from each
/// sample point and checks `Phi_1^* omega1 = omega0` there. Samples are
/// independent and returned in input order.
pub fn integrate_and_verify(problem: &MoserProblem, samples: &[Vec<f64>], cfg: &MoserConfig) -> Result<Vec<FlowSample>> {
    if cfg.steps == 0 {
        return Err(Error::Precondition("need at least one step".into()));
    }
    for x in samples {
        problem.check_point(x, cfg.half_width)?;
    }
    Ok(samples.iter().map(|x| problem.integrate_one(x, cfg)).collect())
}

/// The `g^dim` points of the uniform grid on `[-half, half]^dim`.
pub fn grid(dim: usize, g: usize, half: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if g <= 1 {
        vec![0.0]
    } else {
        (0..g).map(|k| -half + 2.0 * half * k as f64 / (g - 1) as f64).collect()
    };
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |a| {
                    let mut p = p.clone();
                    p.push(*a);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug)]
pub struct MoserSummary {
    pub samples: usize,
    pub passed: usize,
    pub max_residual: f64,
    pub max_moved_on_divisor: Option<f64>,
    pub min_det: f64,
}

/// Aggregates samples; displacement on `{divisor = 0}` is reported for the
/// smooth bridges.
pub fn summarize(problem: &MoserProblem, samples: &[FlowSample]) -> MoserSummary {
    let p = match problem.bridge {
        Bridge::Sing => None,
        _ => problem.divisor.terms().keys().next().and_then(|m| m.0.iter().position(|e| *e == 1)),
    };
    let on = p.map(|p| {
        samples.iter().filter(|s| s.start[p] == 0.0).map(|s| s.moved).fold(0.0, f64::max)
    });
    MoserSummary {
        samples: samples.len(),
        passed: samples.iter().filter(|s| s.pass).count(),
        max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        max_moved_on_divisor: on,
        min_det: samples.iter().map(|s| s.min_det).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::qf;

    fn chart() -> Arc<Chart> {
        Chart::new(["p1", "q1", "p2", "q2"]).unwrap()
    }

    fn v(c: &Arc<Chart>, i: usize) -> TruncatedPoly {
        TruncatedPoly::var(c, 8, i)
    }

    fn dd(c: &Arc<Chart>, i: usize, j: usize) -> DiffForm {
        DiffForm::basis(c, 8, i).wedge(&DiffForm::basis(c, 8, j)).unwrap()
    }

    /// p1 dp1^dq1 + dp2^dq2 and its perturbation by d(eps p1^2 dq2).
    fn desk(eps: Rational) -> (DiffForm, DiffForm) {
        let c = chart();
        let w0 = &dd(&c, 0, 1).mul_poly(&v(&c, 0)) + &dd(&c, 2, 3);
        let pert = DiffForm::basis(&c, 8, 3).mul_poly(&(&v(&c, 0) * &v(&c, 0)).scale(&eps)).ext_d();
        let w1 = &w0 + &pert.with_jet(8);
        (w0, w1)
    }

    #[test]
    fn identical_forms_give_zero_field() {
        let (w0, _) = desk(q(0));
        let pb = MoserProblem::rel_darboux(&w0, &w0).unwrap();
        assert!(pb.eta.is_zero());
        let x = [0.05, -0.02, 0.03, 0.01];
        assert!(pb.build_field(0.3, &x, 0.1).unwrap().iter().all(|c| *c == 0.0));
        let s = integrate_and_verify(&pb, &[x.to_vec()], &MoserConfig { steps: 4, ..Default::default() }).unwrap();
        assert!(s[0].residual < 1e-15);
    }

    #[test]
    fn desk_instance_defining_equation() {
        let (w0, w1) = desk(qf(1, 20));
        let pb = MoserProblem::rel_darboux(&w0, &w1).unwrap();
        assert_eq!(pb.divisor, TruncatedPoly::var(w0.chart(), EXACT_JET, 0));
        for (t, x) in [(0.0, [0.1, 0.0, -0.1, 0.05]), (0.7, [-0.03, 0.02, 0.09, -0.1]), (1.0, [0.01, 0.01, 0.01, 0.01])] {
            assert!(pb.field_residual(t, &x).unwrap() < 1e-10);
        }
        assert!(pb.build_field(0.5, &[0.2, 0.0, 0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn desk_instance_flow() {
        let (w0, w1) = desk(qf(1, 20));
        let pb = MoserProblem::rel_darboux(&w0, &w1).unwrap();
        let pts = grid(4, 3, 0.1);
        let out = integrate_and_verify(&pb, &pts, &MoserConfig::default()).unwrap();
        let sum = summarize(&pb, &out);
        assert_eq!(sum.passed, pts.len());
        assert!(sum.max_residual <= 1e-6);
        assert!(sum.max_moved_on_divisor.unwrap() <= 1e-9);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let c = chart();
        let (w0, _) = desk(q(0));
        let g = &(&v(&c, 0) * &v(&c, 0)) * &(&v(&c, 1) + &(&v(&c, 2) * &v(&c, 2)));
        let w1 = &w0 + &DiffForm::basis(&c, 8, 3).mul_poly(&g.scale_int(3)).ext_d().with_jet(8);
        let pb = MoserProblem::rel_darboux(&w0, &w1).unwrap();
        let x = vec![0.1, 0.1, -0.1, 0.1];
        let run = |steps| {
            let cfg = MoserConfig { steps, ..Default::default() };
            integrate_and_verify(&pb, &[x.clone()], &cfg).unwrap()[0].residual
        };
        let (r1, r2) = (run(2), run(4));
        let order = (r1 / r2).log2();
        assert!(r2 > 1e-15 && order > 3.5, "observed order {order} from {r1:e}, {r2:e}");
    }

    #[test]
    fn fourdim_b_fixes_origin_and_verifies() {
        let c = Chart::new(["p1", "y1", "y2", "y3"]).unwrap();
        let e = |i| DiffForm::basis(&c, 8, i);
        let a0 = &e(3) + &e(2).mul_poly(&v(&c, 1));
        let a1 = &(&e(3) + &e(2).mul_poly(&v(&c, 1))).scale_int(2) + &e(1).mul_poly(&v(&c, 2));
        let theta = e(3).mul_poly(&v(&c, 2));
        let w0 = a0.mul_poly(&v(&c, 0)).ext_d().with_jet(8);
        let w1 = &a1.mul_poly(&v(&c, 0)).ext_d().with_jet(8)
            + &theta.mul_poly(&(&v(&c, 0) * &v(&c, 0))).ext_d().with_jet(8);
        let pb = MoserProblem::fourdim_b(&w0, &w1).unwrap();
        assert_eq!(pb.prescale, Some((0, qf(1, 2))));
        for t in [0.0, 0.5, 1.0] {
            assert!(pb.build_field(t, &[0.0; 4], 0.1).unwrap().iter().all(|c| c.abs() < 1e-15));
        }
        let out = integrate_and_verify(&pb, &grid(4, 3, 0.05), &MoserConfig::default()).unwrap();
        let sum = summarize(&pb, &out);
        assert_eq!(sum.passed, sum.samples, "{sum:?}");
    }

    #[test]
    fn fourdim_b_rejects_reversed_contact_volume() {
        let c = Chart::new(["p1", "y1", "y2", "y3"]).unwrap();
        let e = |i| DiffForm::basis(&c, 8, i);
        let a0 = &e(3) + &e(2).mul_poly(&v(&c, 1));
        let a1 = &e(3) - &e(2).mul_poly(&v(&c, 1));
        let w0 = a0.mul_poly(&v(&c, 0)).ext_d().with_jet(8);
        let w1 = a1.mul_poly(&v(&c, 0)).ext_d().with_jet(8);
        assert!(matches!(MoserProblem::fourdim_b(&w0, &w1), Err(Error::Precondition(_))));
    }

    #[test]
    fn sing_bridge_on_quadratic_volume() {
        let c = Chart::new(["x1", "x2", "x3", "x4"]).unwrap();
        let f = (0..4).fold(TruncatedPoly::zero(&c, 8), |s, i| &s + &(&v(&c, i) * &v(&c, i)));
        let w0 = crate::normal_form::from_volume(&f).unwrap();
        // omega1 - omega0 = d(f g df) = f dg ^ df with g = x2 / 10
        let df = DiffForm::function(f.clone()).ext_d();
        let dg = DiffForm::basis(&c, 8, 1).scale(&qf(1, 10));
        let w1 = &w0 + &dg.wedge(&df).unwrap().mul_poly(&f);
        let pb = MoserProblem::sing(&w0, &w1, 3).unwrap();
        assert!(pb.build_field(0.5, &[0.0; 4], 0.1).unwrap().iter().all(|c| c.abs() < 1e-15));
        assert!(pb.field_residual(0.4, &[0.03, -0.05, 0.07, 0.01]).unwrap() < 1e-10);
        let out = integrate_and_verify(&pb, &grid(4, 3, 0.1), &MoserConfig::default()).unwrap();
        assert!(out.iter().all(|s| s.pass));
    }

    #[test]
    fn grid_shape() {
        let g = grid(2, 3, 0.1);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![-0.1, -0.1]);
        assert_eq!(g[4], vec![0.0, 0.0]);
    }
}
