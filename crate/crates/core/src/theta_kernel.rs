//! The localizing function `θ_p(t) = (1 + Σ t_j² + Σ p_k(t)²)^{-1}`, the
//! algebra of polynomials in `t` and an auxiliary variable `s`, the
//! evaluation map `s ↦ θ_p(t)`, and membership in its kernel.
//!
//! The kernel of the evaluation map is the ideal generated by
//! `σ(t, s) = s·θ_p(t)^{-1} − 1`. Membership is decided symbolically: after
//! substituting `t_j = u_j^{c_j}` every fractional exponent becomes an
//! integer, and `q(t, θ_p(t)) = 0` on `R_+^n` becomes the polynomial identity
//! `Σ_b C_b(u)·Θ(u)^{B−b} ≡ 0`, where `C_b` are the cleared `s^b`
//! coefficients of `q` and `Θ` is the cleared `θ_p^{-1}`.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frac_poly::{check_dim, is_complex_zero, ExponentVector, FracPoly, Point};
use crate::scalar::Scalar;

/// The constraint polynomials `p_1, …, p_m` together with the cached
/// `θ_p^{-1}` and per-variable denominator lcms.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemPolys<S> {
    dim: usize,
    polys: Vec<FracPoly<S>>,
    theta_inv: FracPoly<S>,
    clearing: Vec<u64>,
}

impl<S: Scalar> ProblemPolys<S> {
    pub fn new(dim: usize, polys: Vec<FracPoly<S>>) -> Result<Self> {
        let mut theta_inv = FracPoly::one(dim);
        for j in 0..dim {
            let tj = FracPoly::var(dim, j);
            theta_inv = theta_inv.add(&tj.mul(&tj)?)?;
        }
        for (index, p) in polys.iter().enumerate() {
            check_dim(dim, p.dim())?;
            if !p.is_real() {
                return Err(Error::NonReal { index: index + 1 });
            }
            theta_inv = theta_inv.add(&p.mul(p)?)?;
        }
        let mut clearing = theta_inv.denominator_lcms();
        for p in &polys {
            for (acc, d) in clearing.iter_mut().zip(p.denominator_lcms()) {
                *acc = acc.lcm(&d);
            }
        }
        Ok(ProblemPolys {
            dim,
            polys,
            theta_inv,
            clearing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polys(&self) -> &[FracPoly<S>] {
        &self.polys
    }

    pub fn theta_inv(&self) -> &FracPoly<S> {
        &self.theta_inv
    }

    /// `c_j`: lcm of the `t_j` exponent denominators over every `p_k` and `θ_p^{-1}`.
    pub fn clearing(&self) -> &[u64] {
        &self.clearing
    }

    /// Lcm of every exponent denominator in the problem.
    pub fn denominator_lcm(&self) -> u64 {
        self.clearing.iter().fold(1, |a, b| a.lcm(b))
    }

    /// Real `(exponent, coefficient)` pairs of `p_k` (zero-based `k`).
    pub fn real_terms(&self, k: usize) -> Vec<(ExponentVector, S)> {
        real_terms(&self.polys[k])
    }

    /// Real `(shift, coefficient)` pairs of `θ_p^{-1}`; the recurrence of the
    /// extended moment family runs over exactly these shifts.
    pub fn theta_inv_terms(&self) -> Vec<(ExponentVector, S)> {
        real_terms(&self.theta_inv)
    }

    /// `θ_p(t) ∈ (0, 1]`.
    pub fn theta_eval(&self, t: &Point<S>) -> Result<S> {
        let v = self.theta_inv.eval(t)?;
        Ok(S::one() / v.re)
    }

    /// `ρ(q)(t) = q(t, θ_p(t))`.
    pub fn rho_eval(&self, q: &ExtendedPoly<S>, t: &Point<S>) -> Result<Complex<S>> {
        check_dim(self.dim, q.dim())?;
        let theta = self.theta_eval(t)?;
        let mut acc = Complex::<S>::zero();
        // Horner in θ from the highest s-power down
        let top = q.s_degree().unwrap_or(0);
        for b in (0..=top).rev() {
            acc = acc * Complex::new(theta.clone(), S::zero());
            if let Some(coef) = q.coeffs.get(&b) {
                acc = acc + coef.eval(t)?;
            }
        }
        Ok(acc)
    }

    /// `σ(t, s) = s·θ_p(t)^{-1} − 1`.
    pub fn sigma(&self) -> ExtendedPoly<S> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, FracPoly::one(self.dim).neg());
        coeffs.insert(1, self.theta_inv.clone());
        ExtendedPoly {
            dim: self.dim,
            coeffs,
        }
    }

    /// Decides whether `q` lies in the kernel of `ρ`, i.e. is a multiple of `σ`.
    /// Requires exact scalars.
    pub fn kernel_test(&self, q: &ExtendedPoly<S>) -> Result<KernelVerdict<S>> {
        if !S::EXACT {
            return Err(Error::RequiresExact);
        }
        check_dim(self.dim, q.dim())?;
        let mut clearing = self.clearing.clone();
        for coef in q.coeffs.values() {
            for (acc, d) in clearing.iter_mut().zip(coef.denominator_lcms()) {
                *acc = acc.lcm(&d);
            }
        }
        if self.cleared_identity(q, &clearing)?.is_zero() {
            return Ok(KernelVerdict {
                in_kernel: true,
                witness: None,
            });
        }
        Ok(KernelVerdict {
            in_kernel: false,
            witness: self.find_witness(q, &clearing)?,
        })
    }

    /// `Σ_b C_b(u)·Θ(u)^{B−b}` with `t_j = u_j^{c_j}`.
    fn cleared_identity(&self, q: &ExtendedPoly<S>, clearing: &[u64]) -> Result<FracPoly<S>> {
        let big_theta = self.theta_inv.clear_denominators(clearing)?;
        let Some(top) = q.s_degree() else {
            return Ok(FracPoly::zero(self.dim));
        };
        let mut acc = FracPoly::zero(self.dim);
        for b in 0..=top {
            acc = acc.mul(&big_theta)?;
            if let Some(coef) = q.coeffs.get(&b) {
                acc = acc.add(&coef.clear_denominators(clearing)?)?;
            }
        }
        Ok(acc)
    }

    fn find_witness(
        &self,
        q: &ExtendedPoly<S>,
        clearing: &[u64],
    ) -> Result<Option<KernelWitness<S>>> {
        let try_point = |u: Vec<S>| -> Result<Option<KernelWitness<S>>> {
            let point = Point::from_roots(u, clearing.to_vec())?;
            let value = self.rho_eval(q, &point)?;
            if is_complex_zero(&value) {
                Ok(None)
            } else {
                Ok(Some(KernelWitness {
                    t: point.coordinates(),
                    point,
                    value,
                }))
            }
        };

        let grid = 10u64.saturating_pow(self.dim as u32).min(WITNESS_GRID_LIMIT);
        for idx in 0..grid {
            let mut rest = idx;
            let mut u = vec![S::zero(); self.dim];
            for slot in u.iter_mut().rev() {
                *slot = S::from_usize((rest % 10) as usize);
                rest /= 10;
            }
            if let Some(w) = try_point(u)? {
                return Ok(Some(w));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..WITNESS_RANDOM_TRIES {
            let u = (0..self.dim)
                .map(|_| {
                    let num: u32 = rng.gen_range(0..1000);
                    let den: u32 = rng.gen_range(1..100);
                    S::from_ratio(num.into(), den.into())
                })
                .collect();
            if let Some(w) = try_point(u)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }
}

const WITNESS_GRID_LIMIT: u64 = 100_000;
const WITNESS_RANDOM_TRIES: usize = 200;

fn real_terms<S: Scalar>(p: &FracPoly<S>) -> Vec<(ExponentVector, S)> {
    p.terms()
        .iter()
        .map(|(a, c)| (a.clone(), c.re.clone()))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelVerdict<S> {
    pub in_kernel: bool,
    /// A point `t` with `ρ(q)(t) ≠ 0`, when `q` is outside the kernel and a
    /// small one was found.
    pub witness: Option<KernelWitness<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelWitness<S> {
    pub t: Vec<S>,
    /// `t` in root form, `t_j = u_j^{c_j}`, for exact re-evaluation.
    pub point: Point<S>,
    pub value: Complex<S>,
}

/// A polynomial in `t ∈ R_+^n` and `s ∈ R_+`, stored as `Σ_b C_b(t)·s^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoly<S> {
    dim: usize,
    coeffs: BTreeMap<u32, FracPoly<S>>,
}

impl<S: Scalar> ExtendedPoly<S> {
    pub fn zero(dim: usize) -> Self {
        ExtendedPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_coeffs<I>(dim: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, FracPoly<S>)>,
    {
        let mut out = Self::zero(dim);
        for (b, c) in coeffs {
            check_dim(dim, c.dim())?;
            out.add_coeff(b, c);
        }
        Ok(out)
    }

    /// `f(t)·s^0`.
    pub fn from_frac(f: FracPoly<S>) -> Self {
        let dim = f.dim();
        Self::from_coeffs(dim, [(0, f)]).expect("dimension taken from f")
    }

    /// `s^b`.
    pub fn s_power(dim: usize, b: u32) -> Self {
        Self::from_coeffs(dim, [(b, FracPoly::one(dim))]).expect("same dimension")
    }

    fn add_coeff(&mut self, b: u32, c: FracPoly<S>) {
        let sum = match self.coeffs.remove(&b) {
            Some(prev) => prev.add(&c).expect("dimensions checked by caller"),
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(b, sum);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, FracPoly<S>> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn s_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (&b, c) in &other.coeffs {
            out.add_coeff(b, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        ExtendedPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(&b, c)| (b, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        for (&a, f) in &self.coeffs {
            for (&b, g) in &other.coeffs {
                out.add_coeff(a + b, f.mul(g)?);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::from_frac(FracPoly::one(self.dim));
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, factor: &Complex<S>) -> Self {
        let mut out = Self::zero(self.dim);
        for (&b, c) in &self.coeffs {
            out.add_coeff(b, c.scale(factor));
        }
        out
    }

    /// The `s^0` coefficient when `s` does not occur, else `None`.
    pub fn into_frac(self) -> Option<FracPoly<S>> {
        match self.s_degree() {
            None => Some(FracPoly::zero(self.dim)),
            Some(0) => self.coeffs.into_values().next(),
            Some(_) => None,
        }
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<Complex<S>> {
        match self.coeffs.len() {
            0 => Some(Complex::zero()),
            1 => {
                let (&b, f) = self.coeffs.iter().next()?;
                let zero = ExponentVector::zero(self.dim);
                (b == 0 && f.num_terms() == 1 && f.terms().contains_key(&zero))
                    .then(|| f.coefficient(&zero))
            }
            _ => None,
        }
    }

    /// `Some(α)` when the polynomial is the bare monomial `t^α` (coefficient 1, no `s`).
    pub fn as_unit_monomial(&self) -> Option<ExponentVector> {
        if self.coeffs.len() != 1 {
            return None;
        }
        let (&b, f) = self.coeffs.iter().next()?;
        if b != 0 || f.num_terms() != 1 {
            return None;
        }
        let (alpha, c) = f.terms().iter().next()?;
        (c.re.is_one() && c.im.is_zero()).then(|| alpha.clone())
    }

    /// `Some(b)` when the polynomial is exactly `s^b`.
    pub fn as_s_power(&self) -> Option<u32> {
        if self.coeffs.len() != 1 {
            return None;
        }
        let (&b, f) = self.coeffs.iter().next()?;
        (*f == FracPoly::one(self.dim)).then_some(b)
    }
}
