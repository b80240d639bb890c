//! Finitely supported measures on `R_+^n` and the moment families they induce.

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::frac_poly::{check_dim, ExponentVector, FracPoly, Point};
use crate::scalar::Scalar;
use crate::theta_kernel::ProblemPolys;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<S> {
    pub point: Point<S>,
    pub weight: S,
}

/// `μ = Σ_i w_i δ_{t_i}` with `w_i > 0` and `t_i ∈ R_+^n`.
///
/// Every coordinate is stored as `r^D` for one global root power `D`. With
/// rational roots, `t^α` is rational whenever the denominators of `α`
/// divide `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<S> {
    dim: usize,
    root_power: u64,
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> AtomicMeasure<S> {
    pub fn from_points(dim: usize, atoms: Vec<(Vec<S>, S)>) -> Result<Self> {
        Self::from_roots(dim, 1, atoms)
    }

    /// Atoms given by their `D`-th roots: coordinate `t_ij = r_ij^D`.
    pub fn from_roots(dim: usize, root_power: u64, atoms: Vec<(Vec<S>, S)>) -> Result<Self> {
        if root_power == 0 {
            return Err(Error::InvalidMeasure("root power must be positive".into()));
        }
        let atoms = atoms
            .into_iter()
            .map(|(roots, weight)| {
                check_dim(dim, roots.len())?;
                if !weight.is_positive() {
                    return Err(Error::InvalidMeasure(format!(
                        "weight {weight} is not positive"
                    )));
                }
                Ok(Atom {
                    point: Point::uniform(roots, root_power)?,
                    weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomicMeasure {
            dim,
            root_power,
            atoms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root_power(&self) -> u64 {
        self.root_power
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn total_mass(&self) -> S {
        self.atoms
            .iter()
            .fold(S::zero(), |acc, a| acc + a.weight.clone())
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: &FracPoly<S>) -> Result<Complex<S>> {
        check_dim(self.dim, f.dim())?;
        let mut acc = Complex::<S>::zero();
        for atom in &self.atoms {
            acc = acc + f.eval(&atom.point)? * Complex::new(atom.weight.clone(), S::zero());
        }
        Ok(acc)
    }

    /// `γ_α = ∫ t^α dμ` for rational `α`, computed in the measure's own scalar type.
    pub fn moment(&self, alpha: &ExponentVector) -> Result<S> {
        check_dim(self.dim, alpha.dim())?;
        let mut acc = S::zero();
        for atom in &self.atoms {
            acc = acc + atom.weight.clone() * atom.point.monomial(alpha)?;
        }
        Ok(acc)
    }

    /// `γ_α` for an arbitrary real `α ∈ R_+^n`, evaluated in `f64`.
    pub fn gamma(&self, alpha: &[f64]) -> Result<f64> {
        check_dim(self.dim, alpha.len())?;
        if let Some(&a) = alpha.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::NegativeValue {
                what: "moment exponent",
                value: a,
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|atom| {
                let t = atom.point.coordinates_f64();
                let m: f64 = t
                    .iter()
                    .zip(alpha)
                    .map(|(&tj, &aj)| if aj == 0.0 { 1.0 } else { tj.powf(aj) })
                    .product();
                atom.weight.to_f64() * m
            })
            .sum())
    }

    /// `δ_{(α,β)} = ∫ t^α θ_p(t)^β dμ`.
    pub fn delta_forward(
        &self,
        problem: &ProblemPolys<S>,
        alpha: &ExponentVector,
        beta: u32,
    ) -> Result<S> {
        check_dim(self.dim, problem.dim())?;
        check_dim(self.dim, alpha.dim())?;
        let mut acc = S::zero();
        for atom in &self.atoms {
            let theta = problem.theta_eval(&atom.point)?;
            let term = atom.weight.clone()
                * atom.point.monomial(alpha)?
                * num_traits::pow::pow(theta, beta as usize);
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Checks `p_k(t_i) ≥ −tol` for every atom and constraint. Atoms on the
    /// boundary `p_k = 0` are inside the support set.
    pub fn support_check(&self, problem: &ProblemPolys<S>, tol: f64) -> Result<SupportReport<S>> {
        check_dim(self.dim, problem.dim())?;
        let floor = -S::from_f64(tol).ok_or(Error::NegativeValue {
            what: "tolerance",
            value: tol,
        })?;
        let mut violations = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            for (k, p) in problem.polys().iter().enumerate() {
                let value = p.eval(&atom.point)?.re;
                if value < floor {
                    violations.push(SupportViolation {
                        atom: i,
                        constraint: k + 1,
                        value,
                    });
                }
            }
        }
        Ok(SupportReport {
            pass: violations.is_empty(),
            violations,
        })
    }

    /// The same measure with `f64` roots and weights.
    pub fn to_f64(&self) -> AtomicMeasure<f64> {
        AtomicMeasure {
            dim: self.dim,
            root_power: self.root_power,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: Point::from_roots(
                        a.point.roots().iter().map(Scalar::to_f64).collect(),
                        a.point.powers().to_vec(),
                    )
                    .expect("roots stay non-negative"),
                    weight: a.weight.to_f64(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportViolation<S> {
    pub atom: usize,
    /// One-based constraint index `k`.
    pub constraint: usize,
    pub value: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport<S> {
    pub pass: bool,
    pub violations: Vec<SupportViolation<S>>,
}

/// `ν = Σ_i w_i δ_{s_i}` on `R^n`, the measure of the Laplace form
/// `γ_α = ∫ e^{−α·s} dν(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogAtomicMeasure<F> {
    dim: usize,
    atoms: Vec<(Vec<F>, F)>,
}

impl<F: Scalar + Float> LogAtomicMeasure<F> {
    pub fn new(dim: usize, atoms: Vec<(Vec<F>, F)>) -> Result<Self> {
        for (s, w) in &atoms {
            check_dim(dim, s.len())?;
            if !(*w > F::zero()) {
                return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
            }
        }
        Ok(LogAtomicMeasure { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(Vec<F>, F)] {
        &self.atoms
    }

    /// Pushforward under `t = e^{−s}`, componentwise.
    pub fn pushforward(&self) -> AtomicMeasure<F> {
        let atoms = self
            .atoms
            .iter()
            .map(|(s, w)| (s.iter().map(|&x| (-x).exp()).collect(), *w))
            .collect();
        AtomicMeasure::from_points(self.dim, atoms).expect("exp is positive and weights checked")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_bigint::BigInt;
    use num_rational::Ratio;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn half() -> ExponentVector {
        ExponentVector::new(vec![Ratio::new(1, 2)])
    }

    fn t_minus_two() -> ProblemPolys<Q> {
        let p = FracPoly::from_real_terms(
            1,
            [
                (ExponentVector::unit(1, 0, 1), q(1, 1)),
                (ExponentVector::zero(1), q(-2, 1)),
            ],
        )
        .unwrap();
        ProblemPolys::new(1, vec![p]).unwrap()
    }

    fn unit_mass_at_root(root: i64, power: u64) -> AtomicMeasure<Q> {
        AtomicMeasure::from_roots(1, power, vec![(vec![q(root, 1)], q(1, 1))]).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let mu = unit_mass_at_root(2, 2);
        let sqrt_t = FracPoly::monomial(half(), Complex::new(q(1, 1), q(0, 1)));
        assert_eq!(mu.integrate(&sqrt_t).unwrap().re, q(2, 1));

        let nu = AtomicMeasure::from_points(
            1,
            vec![(vec![q(1, 1)], q(2, 1)), (vec![q(4, 1)], q(1, 1))],
        )
        .unwrap();
        assert_eq!(nu.integrate(&FracPoly::var(1, 0)).unwrap().re, q(6, 1));
        assert!(nu.integrate(&FracPoly::zero(1)).unwrap().re.is_zero());
    }

    #[test]
    fn integrate_rejects_irrational_powers() {
        let mu = AtomicMeasure::from_points(1, vec![(vec![q(3, 1)], q(1, 1))]).unwrap();
        let sqrt_t = FracPoly::monomial(half(), Complex::new(q(1, 1), q(0, 1)));
        assert!(matches!(
            mu.integrate(&sqrt_t),
            Err(Error::InexactPower { .. })
        ));
    }

    #[test]
    fn gamma_examples() {
        let mu = unit_mass_at_root(2, 2);
        assert_eq!(mu.gamma(&[0.5]).unwrap(), 2.0);
        let irr = mu.gamma(&[std::f64::consts::SQRT_2]).unwrap();
        assert!((irr - 4f64.powf(std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((irr - 7.102993301).abs() < 1e-8);

        let nu = AtomicMeasure::from_points(
            1,
            vec![(vec![q(0, 1)], q(3, 2)), (vec![q(5, 1)], q(1, 4))],
        )
        .unwrap();
        assert_eq!(nu.gamma(&[0.0]).unwrap(), 1.75);
        assert!(matches!(nu.gamma(&[-1.0]), Err(Error::NegativeValue { .. })));
    }

    #[test]
    fn delta_forward_examples() {
        let p = ProblemPolys::<Q>::new(1, vec![]).unwrap();
        let mu = unit_mass_at_root(2, 2);
        assert_eq!(mu.delta_forward(&p, &half(), 1).unwrap(), q(2, 17));

        let nu = AtomicMeasure::from_points(
            1,
            vec![(vec![q(3, 1)], q(2, 1)), (vec![q(1, 2)], q(1, 3))],
        )
        .unwrap();
        assert_eq!(
            nu.delta_forward(&p, &ExponentVector::zero(1), 0).unwrap(),
            nu.total_mass()
        );

        let one = AtomicMeasure::from_points(1, vec![(vec![q(1, 1)], q(1, 1))]).unwrap();
        let alpha = ExponentVector::unit(1, 0, 7);
        assert_eq!(one.delta_forward(&p, &alpha, 3).unwrap(), q(1, 8));
    }

    #[test]
    fn support_check_examples() {
        let p = t_minus_two();
        let inside = AtomicMeasure::from_points(1, vec![(vec![q(4, 1)], q(1, 1))]).unwrap();
        assert!(inside.support_check(&p, 0.0).unwrap().pass);

        let outside = AtomicMeasure::from_points(1, vec![(vec![q(1, 1)], q(1, 1))]).unwrap();
        let report = outside.support_check(&p, 0.0).unwrap();
        assert!(!report.pass);
        assert_eq!(
            report.violations,
            vec![SupportViolation {
                atom: 0,
                constraint: 1,
                value: q(-1, 1)
            }]
        );

        let boundary = AtomicMeasure::from_points(1, vec![(vec![q(2, 1)], q(1, 1))]).unwrap();
        assert!(boundary.support_check(&p, 0.0).unwrap().pass);

        let free = ProblemPolys::<Q>::new(1, vec![]).unwrap();
        assert!(outside.support_check(&free, 0.0).unwrap().pass);
    }

    #[test]
    fn measure_validation() {
        assert!(matches!(
            AtomicMeasure::from_points(1, vec![(vec![q(1, 1)], q(0, 1))]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            AtomicMeasure::from_points(1, vec![(vec![q(-1, 1)], q(1, 1))]),
            Err(Error::NegativeCoordinate { .. })
        ));
        assert!(matches!(
            AtomicMeasure::from_points(2, vec![(vec![q(1, 1)], q(1, 1))]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let ln2 = std::f64::consts::LN_2;
        let mu = LogAtomicMeasure::new(1, vec![(vec![ln2], 1.0)]).unwrap().pushforward();
        assert!((mu.atoms()[0].point.coordinates()[0] - 0.5).abs() < 1e-15);
        assert!((mu.gamma(&[1.0]).unwrap() - 0.5).abs() < 1e-15);

        let mu = LogAtomicMeasure::new(1, vec![(vec![0.0], 1.0)]).unwrap().pushforward();
        for a in [0.0, 0.3, 2.5] {
            assert_eq!(mu.gamma(&[a]).unwrap(), 1.0);
        }

        let mu = LogAtomicMeasure::new(1, vec![(vec![-(3f64.ln())], 1.0)])
            .unwrap()
            .pushforward();
        assert!((mu.atoms()[0].point.coordinates()[0] - 3.0).abs() < 1e-14);
    }
}
