use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{monomials_of_degree, q, Chart, Monomial, Rational, TruncatedPoly};
use crate::error::{Error, Result};
use crate::exterior::PolyVectorField;
use crate::linalg::{rank_dense, Echelon, SparseVec};

/// Weighted degree `d` when every stored term of `f` has weighted degree `d`.
pub fn quasi_homogeneous_check(f: &TruncatedPoly, weights: &[u32]) -> Option<u32> {
    let mut degs = f.terms().keys().map(|m| m.weighted_degree(weights));
    let d = degs.next()?;
    degs.all(|e| e == d).then_some(d)
}

/// Smallest positive integer weights (each at most `max_weight`, ordered by
/// total then lexicographically) making `f` quasi-homogeneous.
pub fn find_quasi_homogeneous_weights(f: &TruncatedPoly, max_weight: u32) -> Option<Vec<u32>> {
    let n = f.chart().dim();
    if f.is_zero() || n == 0 {
        return None;
    }
    let mut best: Option<Vec<u32>> = None;
    let mut w = vec![1u32; n];
    loop {
        if quasi_homogeneous_check(f, &w).is_some() {
            let better = match &best {
                None => true,
                Some(b) => {
                    let (sw, sb): (u32, u32) = (w.iter().sum(), b.iter().sum());
                    sw < sb || (sw == sb && w < *b)
                }
            };
            if better {
                best = Some(w.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            if w[i] < max_weight {
                w[i] += 1;
                break;
            }
            w[i] = 1;
            i += 1;
        }
    }
}

/// Euler field `sum (w_i / delta) x_i d/dx_i` of a quasi-homogeneous `f` of
/// weighted degree `delta`, so that `E _| df = f`.
pub fn euler_field(f: &TruncatedPoly, weights: &[u32], delta: u32) -> Result<PolyVectorField> {
    let chart = f.chart();
    if weights.len() != chart.dim() {
        return Err(Error::WrongVariableCount { expected: chart.dim(), found: weights.len() });
    }
    if delta == 0 || quasi_homogeneous_check(f, weights) != Some(delta) {
        return Err(Error::NotQuasiHomogeneous);
    }
    let comps = (0..chart.dim())
        .map(|i| TruncatedPoly::var(chart, f.jet(), i).scale(&super::qf(weights[i] as i64, delta as i64)))
        .collect();
    PolyVectorField::new(chart, comps)
}

/// Outcome of the Nakayama test `m^k in I + m^{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nakayama {
    /// `m^k` lies in the ideal.
    Certified { k: u32 },
    /// No `k <= k_max` worked (or the jets were too short to decide).
    NotCertified { k_max: u32 },
}

impl Nakayama {
    pub fn is_certified(&self) -> bool {
        matches!(self, Nakayama::Certified { .. })
    }
}

fn monomial_index(dim: usize, k: u32) -> (Vec<Monomial>, BTreeMap<Monomial, usize>) {
    let mut list = Vec::new();
    for d in 0..=k {
        list.extend(monomials_of_degree(dim, d));
    }
    let index = list.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    (list, index)
}

/// Checks `m^k in (gens) + m^{k+1}`, which by Nakayama's lemma puts `m^k`
/// inside the ideal. Generators must be known up to degree `k`.
pub fn nakayama_contains_power(gens: &[TruncatedPoly], k: u32) -> bool {
    let Some(first) = gens.first() else {
        return false;
    };
    if gens.iter().any(|g| g.jet() < k) {
        return false;
    }
    let dim = first.chart().dim();
    let (_, index) = monomial_index(dim, k);
    let mut ech = Echelon::new();
    for g in gens {
        let Some(og) = g.order() else { continue };
        if og > k {
            continue;
        }
        for d in 0..=(k - og) {
            for mu in monomials_of_degree(dim, d) {
                let mut row = SparseVec::new();
                for (m, c) in g.terms() {
                    let prod = m.mul(&mu);
                    if prod.degree() <= k {
                        row.insert(index[&prod], c.clone());
                    }
                }
                ech.insert(row);
            }
        }
    }
    monomials_of_degree(dim, k)
        .into_iter()
        .all(|m| ech.contains(SparseVec::from([(index[&m], Rational::from_integer(1.into()))])))
}

/// Smallest `k <= k_max` passing [`nakayama_contains_power`].
pub fn nakayama_search(gens: &[TruncatedPoly], k_max: u32) -> Nakayama {
    match (1..=k_max).find(|&k| nakayama_contains_power(gens, k)) {
        Some(k) => Nakayama::Certified { k },
        None => Nakayama::NotCertified { k_max },
    }
}

/// Nakayama certificate that the Jacobian ideal of `f` is `m`-primary.
pub fn isolated_singularity_certificate(f: &TruncatedPoly, k_max: u32) -> Nakayama {
    let grads: Vec<TruncatedPoly> = (0..f.chart().dim()).map(|i| f.partial(i)).collect();
    nakayama_search(&grads, k_max)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularSequenceConfig {
    pub seed: u64,
    pub trials: usize,
    pub k_max: u32,
}

impl Default for RegularSequenceConfig {
    fn default() -> Self {
        RegularSequenceConfig { seed: 0x5eed, trials: 8, k_max: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegularSequence {
    /// Linear parts are independent.
    IndependentGradients,
    /// `(a, b, l)` is `m`-primary for the integer linear form `l`.
    PrimaryWitness { linear_form: Vec<i64>, k: u32 },
    Inconclusive,
}

impl RegularSequence {
    pub fn is_regular(&self) -> bool {
        !matches!(self, RegularSequence::Inconclusive)
    }
}

/// Certifies that `(a, b)` is a regular sequence in three variables: either
/// the gradients at 0 are independent, or some linear form completes it to
/// an `m`-primary ideal (three elements generating an `m`-primary ideal in a
/// three-dimensional regular local ring form a regular sequence).
pub fn regular_sequence_check(
    a: &TruncatedPoly,
    b: &TruncatedPoly,
    cfg: &RegularSequenceConfig,
) -> Result<RegularSequence> {
    if !Chart::compatible(a.chart(), b.chart()) {
        return Err(Error::ChartMismatch);
    }
    let chart = a.chart();
    if chart.dim() != 3 {
        return Err(Error::WrongVariableCount { expected: 3, found: chart.dim() });
    }
    if !a.constant_term().is_zero() || !b.constant_term().is_zero() {
        return Err(Error::Precondition("regular sequence test needs a(0) = b(0) = 0".into()));
    }
    if rank_dense(&[a.gradient_at_0(), b.gradient_at_0()]) == 2 {
        return Ok(RegularSequence::IndependentGradients);
    }
    let jet = a.jet().min(b.jet());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.trials {
        let coeffs: Vec<i64> = (0..3).map(|_| rng.random_range(-3i64..=3)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let terms = coeffs.iter().enumerate().map(|(i, &c)| (Monomial::var(3, i), q(c)));
        let l = TruncatedPoly::from_terms(chart, jet, terms);
        if let Nakayama::Certified { k } = nakayama_search(&[a.clone(), b.clone(), l], cfg.k_max) {
            return Ok(RegularSequence::PrimaryWitness { linear_form: coeffs, k });
        }
    }
    Ok(RegularSequence::Inconclusive)
}

/// `q` with `g = q f` in the formal power series ring, degree by degree
/// against the lowest homogeneous part of `f`. The quotient is reliable up
/// to `min(jet g, jet f) - ord f`.
pub fn local_divide(g: &TruncatedPoly, f: &TruncatedPoly) -> Result<TruncatedPoly> {
    if !Chart::compatible(g.chart(), f.chart()) {
        return Err(Error::ChartMismatch);
    }
    let m = f.order().ok_or_else(|| Error::NotDivisible("division by zero".into()))?;
    let jet = g.jet().min(f.jet());
    if m > jet {
        return Err(Error::NotDivisible("divisor vanishes to the jet order".into()));
    }
    let out_jet = jet - m;
    let chart = g.chart();
    let f_parts: Vec<TruncatedPoly> = (0..=jet).map(|d| f.homogeneous_part(d)).collect();
    let lead = f_parts[m as usize].clone();
    if let Some(low) = g.order() {
        if low < m {
            return Err(Error::NotDivisible("dividend has lower order than divisor".into()));
        }
    }
    let mut parts: Vec<TruncatedPoly> = Vec::new();
    for k in 0..=out_jet {
        let mut r = g.homogeneous_part(k + m).with_jet(jet);
        for (j, qj) in parts.iter().enumerate() {
            let fd = (k + m) as usize - j;
            if fd < f_parts.len() && !f_parts[fd].is_zero() {
                r = &r - &(qj * &f_parts[fd]).homogeneous_part(k + m);
            }
        }
        let qk = divide_homogeneous(&r, &lead)
            .ok_or_else(|| Error::NotDivisible(alloc::format!("in degree {}", k + m)))?;
        parts.push(qk.with_jet(jet));
    }
    let mut out = TruncatedPoly::zero(chart, out_jet);
    for p in parts {
        out = &out + &p.truncate(out_jet).with_jet(out_jet);
    }
    Ok(out)
}

/// Exact division of polynomials by lead terms; `None` when it leaves a
/// remainder.
fn divide_homogeneous(r: &TruncatedPoly, f: &TruncatedPoly) -> Option<TruncatedPoly> {
    let big = u32::MAX / 2;
    let mut rem = r.clone().with_jet(big);
    let f = f.clone().with_jet(big);
    let (lf, cf) = f.terms().iter().next_back().map(|(m, c)| (m.clone(), c.clone()))?;
    let mut quot = TruncatedPoly::zero(r.chart(), big);
    while let Some((lr, cr)) = rem.terms().iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
        if lr.0.iter().zip(&lf.0).any(|(a, b)| a < b) {
            return None;
        }
        let mono = Monomial(lr.0.iter().zip(&lf.0).map(|(a, b)| a - b).collect());
        let c = cr / &cf;
        rem = &rem - &f.mul_monomial(&mono, &c);
        quot.add_term(mono, c);
    }
    Some(quot)
}
