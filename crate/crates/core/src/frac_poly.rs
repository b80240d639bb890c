//! Fractional polynomials: finite sums `Σ a_α t^α` over `t ∈ R_+^n` with
//! complex coefficients and non-negative rational exponent vectors `α`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Exponent, Scalar};

/// Default cap on the number of terms a product may produce.
pub const DEFAULT_TERM_LIMIT: usize = 100_000;

/// Multi-index `α ∈ Q_+^n`. Components are normalized rationals, and the
/// derived ordering is lexicographic on their values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<Exponent>);

impl ExponentVector {
    pub fn new(components: Vec<Exponent>) -> Self {
        ExponentVector(components)
    }

    pub fn zero(n: usize) -> Self {
        ExponentVector(vec![Exponent::zero(); n])
    }

    /// `k·e_j`.
    pub fn unit(n: usize, j: usize, k: u64) -> Self {
        let mut v = Self::zero(n);
        v.0[j] = Exponent::from_integer(k);
        v
    }

    /// `(k_1/d, …, k_n/d)`.
    pub fn from_numerators(numerators: &[u64], denominator: u64) -> Self {
        ExponentVector(
            numerators
                .iter()
                .map(|&k| Ratio::new(k, denominator))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Exponent] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// Componentwise sum. Panics on a dimension mismatch; callers check dims.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "exponent dimension mismatch");
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.dim(), other.dim(), "exponent dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| if a >= b { Some(a - b) } else { None })
            .collect::<Option<Vec<_>>>()
            .map(ExponentVector)
    }

    pub fn total(&self) -> Exponent {
        self.0.iter().fold(Exponent::zero(), |acc, c| acc + c)
    }

    /// Lowest common multiple of all component denominators.
    pub fn denominator_lcm(&self) -> u64 {
        self.0.iter().fold(1, |acc, c| acc.lcm(c.denom()))
    }

    /// Numerators when every component is written over `denominator`;
    /// `None` if some component does not have that form.
    pub fn numerators_over(&self, denominator: u64) -> Option<Vec<u64>> {
        self.0
            .iter()
            .map(|c| {
                if denominator.is_multiple_of(*c.denom()) {
                    Some(c.numer() * (denominator / c.denom()))
                } else {
                    None
                }
            })
            .collect()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point of `R_+^n` stored as `t_j = root_j^power_j`.
///
/// With rational roots and a power that clears the denominators of the
/// exponents in play, every `t^α` stays rational. Plain points use power 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    roots: Vec<S>,
    powers: Vec<u64>,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        let n = coords.len();
        Self::from_roots(coords, vec![1; n])
    }

    pub fn from_roots(roots: Vec<S>, powers: Vec<u64>) -> Result<Self> {
        if roots.len() != powers.len() {
            return Err(Error::DimensionMismatch {
                expected: roots.len(),
                found: powers.len(),
            });
        }
        if let Some((index, r)) = roots.iter().enumerate().find(|(_, r)| r.is_negative()) {
            return Err(Error::NegativeCoordinate {
                index,
                value: r.to_f64(),
            });
        }
        if powers.contains(&0) {
            return Err(Error::InvalidMeasure("root power must be positive".into()));
        }
        Ok(Point { roots, powers })
    }

    /// Same root power on every coordinate.
    pub fn uniform(roots: Vec<S>, power: u64) -> Result<Self> {
        let n = roots.len();
        Self::from_roots(roots, vec![power; n])
    }

    pub fn dim(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[S] {
        &self.roots
    }

    pub fn powers(&self) -> &[u64] {
        &self.powers
    }

    /// The coordinates `t_j` themselves.
    pub fn coordinates(&self) -> Vec<S> {
        self.roots
            .iter()
            .zip(&self.powers)
            .map(|(r, &p)| num_traits::pow::pow(r.clone(), p as usize))
            .collect()
    }

    pub fn coordinates_f64(&self) -> Vec<f64> {
        self.roots
            .iter()
            .zip(&self.powers)
            .map(|(r, &p)| r.to_f64().powf(p as f64))
            .collect()
    }

    /// `t^α`, with `0^0 = 1`.
    pub fn monomial(&self, alpha: &ExponentVector) -> Result<S> {
        check_dim(self.dim(), alpha.dim())?;
        let mut acc = S::one();
        for ((r, &p), a) in self.roots.iter().zip(&self.powers).zip(alpha.components()) {
            if a.is_zero() {
                continue;
            }
            let e = a * p;
            let factor = r.pow_exponent(&e).ok_or_else(|| Error::InexactPower {
                exponent: alpha.to_string(),
            })?;
            acc = acc * factor;
        }
        Ok(acc)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn is_complex_zero<S: Scalar>(c: &Complex<S>) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// An element of the algebra of fractional polynomials in `n` variables.
///
/// Terms are kept normalized: like exponents merged, zero coefficients
/// dropped, keys in the canonical exponent order.
#[derive(Clone, Debug, PartialEq)]
pub struct FracPoly<S> {
    dim: usize,
    terms: BTreeMap<ExponentVector, Complex<S>>,
}

impl<S: Scalar> FracPoly<S> {
    pub fn zero(dim: usize) -> Self {
        FracPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex::one())
    }

    pub fn constant(dim: usize, c: Complex<S>) -> Self {
        Self::monomial(ExponentVector::zero(dim), c)
    }

    pub fn monomial(alpha: ExponentVector, c: Complex<S>) -> Self {
        let dim = alpha.dim();
        let mut terms = BTreeMap::new();
        if !is_complex_zero(&c) {
            terms.insert(alpha, c);
        }
        FracPoly { dim, terms }
    }

    /// The coordinate function `t_{j+1}` (zero-based `j`).
    pub fn var(dim: usize, j: usize) -> Self {
        Self::monomial(ExponentVector::unit(dim, j, 1), Complex::one())
    }

    /// Builds a polynomial from possibly repeated terms.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentVector, Complex<S>)>,
    {
        let mut out = Self::zero(dim);
        for (alpha, c) in terms {
            check_dim(dim, alpha.dim())?;
            out.add_term(alpha, c);
        }
        Ok(out)
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentVector, S)>,
    {
        Self::from_terms(
            dim,
            terms.into_iter().map(|(a, c)| (a, Complex::new(c, S::zero()))),
        )
    }

    fn add_term(&mut self, alpha: ExponentVector, c: Complex<S>) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(e) => {
                if !is_complex_zero(&c) {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if is_complex_zero(&sum) {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<ExponentVector, Complex<S>> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &ExponentVector) -> Complex<S> {
        self.terms.get(alpha).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// Per-variable lcm of exponent denominators.
    pub fn denominator_lcms(&self) -> Vec<u64> {
        let mut out = vec![1u64; self.dim];
        for alpha in self.terms.keys() {
            for (acc, c) in out.iter_mut().zip(alpha.components()) {
                *acc = acc.lcm(c.denom());
            }
        }
        out
    }

    /// Lcm of every exponent denominator, across all variables.
    pub fn denominator_lcm(&self) -> u64 {
        self.denominator_lcms().into_iter().fold(1, |a, b| a.lcm(&b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        FracPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &Complex<S>) -> Self {
        if is_complex_zero(factor) {
            return Self::zero(self.dim);
        }
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with_limit(other, DEFAULT_TERM_LIMIT)
    }

    pub fn mul_with_limit(&self, other: &Self, limit: usize) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                out.add_term(a.add(b), c.clone() * d.clone());
            }
            if out.terms.len() > limit {
                return Err(Error::ResourceLimit {
                    what: "product",
                    size: out.terms.len(),
                    limit,
                });
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn conj(&self) -> Self {
        FracPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), c.conj()))
                .collect(),
        }
    }

    /// `|f|² = f·f̄`. The result has real coefficients.
    pub fn conj_abs_square(&self) -> Self {
        self.mul(&self.conj())
            .expect("dimensions agree and f·f̄ has at most as many terms as f²")
    }

    /// Value at `t`, with fractional powers taken as the non-negative real root.
    pub fn eval(&self, t: &Point<S>) -> Result<Complex<S>> {
        check_dim(self.dim, t.dim())?;
        let mut acc = Complex::<S>::zero();
        for (alpha, c) in &self.terms {
            let m = t.monomial(alpha)?;
            acc = acc + c.clone() * Complex::new(m, S::zero());
        }
        Ok(acc)
    }

    /// Convenience for plain coordinates, `t_j` given directly.
    pub fn eval_at(&self, t: &[S]) -> Result<Complex<S>> {
        self.eval(&Point::new(t.to_vec())?)
    }

    /// Substitutes `t_j = u_j^{c_j}`. Each `c_j` must be a multiple of the lcm
    /// of the denominators of the `t_j` exponents; the result then has
    /// integer exponents.
    pub fn clear_denominators(&self, c: &[u64]) -> Result<Self> {
        check_dim(self.dim, c.len())?;
        let required = self.denominator_lcms();
        for (index, (&cj, &rj)) in c.iter().zip(&required).enumerate() {
            if cj == 0 || cj % rj != 0 {
                return Err(Error::Denominator {
                    index,
                    multiplier: cj,
                    required: rj,
                });
            }
        }
        let mut out = Self::zero(self.dim);
        for (alpha, coef) in &self.terms {
            let scaled = alpha
                .components()
                .iter()
                .zip(c)
                .map(|(a, &cj)| a * cj)
                .collect();
            out.add_term(ExponentVector::new(scaled), coef.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_bigint::BigInt;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn c(re: i64, im: i64) -> Complex<Q> {
        Complex::new(q(re, 1), q(im, 1))
    }

    fn ev(parts: &[(u64, u64)]) -> ExponentVector {
        ExponentVector::new(parts.iter().map(|&(n, d)| Ratio::new(n, d)).collect())
    }

    fn poly(dim: usize, terms: &[(&[(u64, u64)], Complex<Q>)]) -> FracPoly<Q> {
        FracPoly::from_terms(dim, terms.iter().map(|(a, c)| (ev(a), c.clone()))).unwrap()
    }

    #[test]
    fn add_cancels_to_zero() {
        let f = poly(1, &[(&[(1, 2)], c(1, 0))]);
        assert!(f.add(&f.neg()).unwrap().is_zero());
    }

    #[test]
    fn add_merges_like_terms() {
        let f = poly(1, &[(&[(1, 1)], c(1, 0)), (&[(0, 1)], c(1, 0))]);
        let g = poly(1, &[(&[(1, 1)], c(1, 0))]);
        let want = poly(1, &[(&[(1, 1)], c(2, 0)), (&[(0, 1)], c(1, 0))]);
        assert_eq!(f.add(&g).unwrap(), want);
    }

    #[test]
    fn add_term_count_is_exponent_union() {
        let f = poly(2, &[(&[(1, 2), (0, 1)], c(1, 0)), (&[(0, 1), (1, 1)], c(1, 0))]);
        let g = poly(2, &[(&[(1, 3), (0, 1)], c(1, 0))]);
        let mut union: Vec<_> = f.terms().keys().chain(g.terms().keys()).cloned().collect();
        union.sort();
        union.dedup();
        let sum = f.add(&g).unwrap();
        assert_eq!(sum.num_terms(), union.len());
        assert_eq!(sum.num_terms(), 3);
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        assert!(matches!(
            FracPoly::<Q>::one(1).add(&FracPoly::one(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mul_adds_exponents() {
        let h = poly(1, &[(&[(1, 2)], c(1, 0))]);
        assert_eq!(h.mul(&h).unwrap(), FracPoly::var(1, 0));
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = poly(1, &[(&[(1, 1)], c(1, 0)), (&[(0, 1)], c(1, 0))]);
        let b = poly(1, &[(&[(1, 1)], c(1, 0)), (&[(0, 1)], c(-1, 0))]);
        let want = poly(1, &[(&[(2, 1)], c(1, 0)), (&[(0, 1)], c(-1, 0))]);
        assert_eq!(a.mul(&b).unwrap(), want);
    }

    #[test]
    fn mul_complex_conjugate_pair() {
        let a = poly(1, &[(&[(1, 2)], c(1, 0)), (&[(0, 1)], c(0, 1))]);
        let b = poly(1, &[(&[(1, 2)], c(1, 0)), (&[(0, 1)], c(0, -1))]);
        let want = poly(1, &[(&[(1, 1)], c(1, 0)), (&[(0, 1)], c(1, 0))]);
        assert_eq!(a.mul(&b).unwrap(), want);
    }

    #[test]
    fn mul_respects_term_limit() {
        let f = FracPoly::<Q>::from_terms(
            1,
            (0..20).map(|k| (ExponentVector::unit(1, 0, k), c(1, 0))),
        )
        .unwrap();
        let g = FracPoly::<Q>::from_terms(
            1,
            (0..20).map(|k| (ev(&[(k, 41)]), c(1, 0))),
        )
        .unwrap();
        assert!(matches!(
            f.mul_with_limit(&g, 50),
            Err(Error::ResourceLimit { .. })
        ));
        assert_eq!(f.mul(&g).unwrap().num_terms(), 400);
    }

    #[test]
    fn conj_abs_square_examples() {
        let f = poly(1, &[(&[(1, 2)], c(1, 0)), (&[(0, 1)], c(0, 1))]);
        let want = poly(1, &[(&[(1, 1)], c(1, 0)), (&[(0, 1)], c(1, 0))]);
        assert_eq!(f.conj_abs_square(), want);

        assert_eq!(FracPoly::<Q>::one(1).conj_abs_square(), FracPoly::one(1));

        let g = poly(1, &[(&[(1, 1)], c(0, 2))]);
        assert_eq!(g.conj_abs_square(), poly(1, &[(&[(2, 1)], c(4, 0))]));
    }

    #[test]
    fn eval_examples() {
        let f = poly(1, &[(&[(3, 2)], c(2, 0))]);
        let t = Point::uniform(vec![q(2, 1)], 2).unwrap();
        assert_eq!(f.eval(&t).unwrap(), c(16, 0));
        assert_eq!(f.eval_at(&[q(4, 1)]).unwrap(), c(16, 0));
        assert!(matches!(
            f.eval_at(&[q(2, 1)]),
            Err(Error::InexactPower { .. })
        ));

        let g = poly(2, &[(&[(1, 2), (1, 1)], c(1, 0))]);
        let t = Point::uniform(vec![q(0, 1), q(5, 1)], 2).unwrap();
        assert_eq!(g.eval(&t).unwrap(), c(0, 0));

        let h = poly(1, &[(&[(0, 1)], c(1, 0)), (&[(2, 1)], c(1, 0))]);
        assert_eq!(h.eval_at(&[q(2, 1)]).unwrap(), c(5, 0));
    }

    #[test]
    fn eval_float_mode() {
        let f = FracPoly::<f64>::from_real_terms(1, [(ev(&[(3, 2)]), 2.0)]).unwrap();
        assert_eq!(f.eval_at(&[4.0]).unwrap().re, 16.0);
    }

    #[test]
    fn eval_zero_to_the_zero_is_one() {
        let f = FracPoly::<Q>::one(2);
        assert_eq!(f.eval_at(&[q(0, 1), q(0, 1)]).unwrap(), c(1, 0));
    }

    #[test]
    fn eval_rejects_negative_coordinate() {
        assert!(matches!(
            FracPoly::<Q>::one(1).eval_at(&[q(-1, 1)]),
            Err(Error::NegativeCoordinate { index: 0, .. })
        ));
    }

    #[test]
    fn clear_denominators_examples() {
        let f = poly(1, &[(&[(3, 2)], c(1, 0)), (&[(0, 1)], c(-2, 0))]);
        let want = poly(1, &[(&[(3, 1)], c(1, 0)), (&[(0, 1)], c(-2, 0))]);
        assert_eq!(f.clear_denominators(&[2]).unwrap(), want);

        let g = poly(2, &[(&[(1, 2), (1, 3)], c(1, 0))]);
        assert_eq!(
            g.clear_denominators(&[2, 3]).unwrap(),
            poly(2, &[(&[(1, 1), (1, 1)], c(1, 0))])
        );

        let h = poly(
            1,
            &[(&[(0, 1)], c(1, 0)), (&[(1, 1)], c(1, 0)), (&[(2, 1)], c(1, 0))],
        );
        let cleared = h.clear_denominators(&[2]).unwrap();
        assert_eq!(
            cleared,
            poly(1, &[(&[(0, 1)], c(1, 0)), (&[(2, 1)], c(1, 0)), (&[(4, 1)], c(1, 0))])
        );
        // oracle: cleared(2) = 1 + 4 + 16 = 21 = h(4)
        assert_eq!(cleared.eval_at(&[q(2, 1)]).unwrap(), c(21, 0));
        assert_eq!(h.eval_at(&[q(4, 1)]).unwrap(), c(21, 0));
    }

    #[test]
    fn clear_denominators_checks_divisibility() {
        let f = poly(1, &[(&[(1, 2)], c(1, 0))]);
        assert!(matches!(
            f.clear_denominators(&[3]),
            Err(Error::Denominator { index: 0, multiplier: 3, required: 2 })
        ));
        assert!(f.clear_denominators(&[4]).is_ok());
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let a = ev(&[(1, 2), (3, 1)]);
        let b = ev(&[(1, 1), (0, 1)]);
        assert!(a < b);
    }
}
