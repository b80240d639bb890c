//! The extended moment family `δ_{(α,β)}`, finite truncation windows, and
//! the Gram matrices of the semi-inner product `(f, g) = L(f·ḡ)` it induces.
//!
//! Over the real monomial basis `t^α s^β`, the Gram matrix has entries
//! `δ_{(α+α′, β+β′)}`, and the `k`-th localized Gram matrix has entries
//! `Σ_ξ a_{kξ} δ_{(α+α′+ξ, β+β′)}`. A PSD verdict on a window is a finite
//! shadow of positivity on the whole algebra; a negative verdict is a
//! definitive refutation.

mod psd;

pub use psd::{psd_check, GramVerdict, PsdCertificate, SymMatrix, Witness};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::RwLock;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frac_poly::{check_dim, ExponentVector, FracPoly};
use crate::measures::AtomicMeasure;
use crate::scalar::Scalar;
use crate::theta_kernel::ProblemPolys;

/// Default cap on the size of a truncated basis.
pub const DEFAULT_BASIS_LIMIT: usize = 5000;

/// Index `(α, β) ∈ Q_+^n × Z_+` of the extended family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaIndex {
    pub alpha: ExponentVector,
    pub beta: u32,
}

impl DeltaIndex {
    pub fn new(alpha: ExponentVector, beta: u32) -> Self {
        DeltaIndex { alpha, beta }
    }

    pub fn add(&self, other: &DeltaIndex) -> DeltaIndex {
        DeltaIndex::new(self.alpha.add(&other.alpha), self.beta + other.beta)
    }

    pub fn shifted(&self, alpha: &ExponentVector, beta: u32) -> DeltaIndex {
        DeltaIndex::new(self.alpha.add(alpha), self.beta + beta)
    }

    pub fn to_json(&self) -> Value {
        json!({ "alpha": alpha_json(&self.alpha), "beta": self.beta })
    }
}

pub fn alpha_json(alpha: &ExponentVector) -> Value {
    Value::Array(
        alpha
            .components()
            .iter()
            .map(|c| Value::String(c.to_string()))
            .collect(),
    )
}

impl fmt::Display for DeltaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha.dim() == 1 {
            write!(f, "({}, {})", self.alpha.components()[0], self.beta)
        } else {
            write!(f, "({}, {})", self.alpha, self.beta)
        }
    }
}

/// Finite truncation of the index set: `α ∈ (1/D)·Z_+^n` with
/// `D·|α| ≤ N`, and `0 ≤ β ≤ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub denominator: u64,
    pub degree: u64,
    pub beta_max: u32,
}

impl Window {
    pub fn new(denominator: u64, degree: u64, beta_max: u32) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidWindow("D must be positive".into()));
        }
        Ok(Window {
            denominator,
            degree,
            beta_max,
        })
    }

    /// `D` = lcm of the constraint exponent denominators, `N = 2D`, `B = 2`.
    pub fn default_for<S: Scalar>(problem: &ProblemPolys<S>) -> Self {
        let d = problem.denominator_lcm();
        Window {
            denominator: d,
            degree: 2 * d,
            beta_max: 2,
        }
    }

    /// `D` must be a multiple of every constraint exponent denominator.
    pub fn validate<S: Scalar>(&self, problem: &ProblemPolys<S>) -> Result<()> {
        let need = problem.denominator_lcm();
        if !self.denominator.is_multiple_of(need) {
            return Err(Error::InvalidWindow(format!(
                "D = {} is not a multiple of the constraint denominator lcm {need}",
                self.denominator
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({ "D": self.denominator, "N": self.degree, "B": self.beta_max })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(D={}, N={}, B={})",
            self.denominator, self.degree, self.beta_max
        )
    }
}

/// Exponent vectors `k/D` with `Σk ≤ max_total`, graded by `Σk` and, within
/// a grade, lexicographically descending in `k` (so `e_1` precedes `e_2`).
pub fn graded_alphas(dim: usize, denominator: u64, max_total: u64) -> Vec<ExponentVector> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        let mut buf = vec![0u64; dim];
        compositions(total, 0, &mut buf, &mut |k| {
            out.push(ExponentVector::from_numerators(k, denominator))
        });
        if dim == 0 {
            break;
        }
    }
    out
}

fn compositions(rest: u64, pos: usize, buf: &mut [u64], emit: &mut dyn FnMut(&[u64])) {
    if pos + 1 >= buf.len() {
        if let Some(last) = buf.last_mut() {
            *last = rest;
        }
        emit(buf);
        return;
    }
    for k in (0..=rest).rev() {
        buf[pos] = k;
        compositions(rest - k, pos + 1, buf, emit);
    }
}

/// The window's basis `{t^α s^β}`, ordered by `β`, then graded on `α`.
pub fn build_basis(window: &Window, dim: usize) -> Result<Vec<DeltaIndex>> {
    build_basis_with_limit(window, dim, DEFAULT_BASIS_LIMIT)
}

pub fn build_basis_with_limit(window: &Window, dim: usize, limit: usize) -> Result<Vec<DeltaIndex>> {
    let alphas = graded_alphas(dim, window.denominator, window.degree);
    let size = alphas.len() * (window.beta_max as usize + 1);
    if size > limit {
        return Err(Error::ResourceLimit {
            what: "basis",
            size,
            limit,
        });
    }
    let mut out = Vec::with_capacity(size);
    for beta in 0..=window.beta_max {
        out.extend(alphas.iter().map(|a| DeltaIndex::new(a.clone(), beta)));
    }
    Ok(out)
}

/// Every index a window touches, grouped by the check that reads it.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexClosure {
    /// Pairwise sums of basis indices (base Gram entries).
    pub gram: BTreeSet<DeltaIndex>,
    /// Gram entries shifted by the exponents of some `p_k`.
    pub shifted: BTreeSet<DeltaIndex>,
    /// Left-hand sides of the `θ_p` recurrence: every Gram or shifted index
    /// below the top `β` level.
    pub recurrence: BTreeSet<DeltaIndex>,
    /// Everything above plus the recurrence right-hand sides.
    pub all: BTreeSet<DeltaIndex>,
}

impl IndexClosure {
    pub fn new<S: Scalar>(window: &Window, problem: &ProblemPolys<S>) -> Self {
        let dim = problem.dim();
        let top = 2 * window.beta_max;
        let alphas = graded_alphas(dim, window.denominator, 2 * window.degree);
        let gram: BTreeSet<DeltaIndex> = (0..=top)
            .flat_map(|b| alphas.iter().map(move |a| DeltaIndex::new(a.clone(), b)))
            .collect();

        let mut shifted = BTreeSet::new();
        for p in problem.polys() {
            for xi in p.terms().keys() {
                shifted.extend(gram.iter().map(|idx| idx.shifted(xi, 0)));
            }
        }

        let recurrence: BTreeSet<DeltaIndex> = gram
            .iter()
            .chain(&shifted)
            .filter(|idx| idx.beta < top)
            .cloned()
            .collect();

        let mut all: BTreeSet<DeltaIndex> = gram.union(&shifted).cloned().collect();
        let shifts = problem.theta_inv_terms();
        for idx in &recurrence {
            for (d, _) in &shifts {
                all.insert(idx.shifted(d, 1));
            }
        }

        IndexClosure {
            gram,
            shifted,
            recurrence,
            all,
        }
    }

    /// The `α` with `(α, 0)` in the closure: where `δ` must reproduce `γ`.
    pub fn moment_alphas(&self) -> Vec<ExponentVector> {
        self.all
            .iter()
            .filter(|idx| idx.beta == 0)
            .map(|idx| idx.alpha.clone())
            .collect()
    }
}

enum Source<S> {
    Computed {
        measure: AtomicMeasure<S>,
        problem: ProblemPolys<S>,
        thetas: Vec<S>,
        cache: RwLock<HashMap<DeltaIndex, S>>,
    },
    Tabulated {
        entries: BTreeMap<DeltaIndex, S>,
        coverage: String,
    },
}

/// The family `δ = (δ_{(α,β)})`, either integrated from a measure (and
/// memoized) or read from a table. Table lookups outside the table fail
/// with [`Error::MissingEntry`].
pub struct DeltaFamily<S> {
    dim: usize,
    source: Source<S>,
}

impl<S: Scalar> DeltaFamily<S> {
    /// `δ_{(α,β)} = ∫ t^α θ_p(t)^β dμ`.
    pub fn computed(measure: AtomicMeasure<S>, problem: ProblemPolys<S>) -> Result<Self> {
        check_dim(problem.dim(), measure.dim())?;
        let thetas = measure
            .atoms()
            .iter()
            .map(|a| problem.theta_eval(&a.point))
            .collect::<Result<Vec<_>>>()?;
        Ok(DeltaFamily {
            dim: measure.dim(),
            source: Source::Computed {
                measure,
                problem,
                thetas,
                cache: RwLock::new(HashMap::new()),
            },
        })
    }

    pub fn tabulated(
        dim: usize,
        entries: BTreeMap<DeltaIndex, S>,
        coverage: impl Into<String>,
    ) -> Result<Self> {
        for idx in entries.keys() {
            check_dim(dim, idx.alpha.dim())?;
        }
        Ok(DeltaFamily {
            dim,
            source: Source::Tabulated {
                entries,
                coverage: coverage.into(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.source, Source::Tabulated { .. })
    }

    pub fn coverage(&self) -> Option<&str> {
        match &self.source {
            Source::Tabulated { coverage, .. } => Some(coverage),
            Source::Computed { .. } => None,
        }
    }

    pub fn measure(&self) -> Option<&AtomicMeasure<S>> {
        match &self.source {
            Source::Computed { measure, .. } => Some(measure),
            Source::Tabulated { .. } => None,
        }
    }

    pub fn problem(&self) -> Option<&ProblemPolys<S>> {
        match &self.source {
            Source::Computed { problem, .. } => Some(problem),
            Source::Tabulated { .. } => None,
        }
    }

    pub fn get(&self, idx: &DeltaIndex) -> Result<S> {
        check_dim(self.dim, idx.alpha.dim())?;
        match &self.source {
            Source::Tabulated { entries, .. } => entries
                .get(idx)
                .cloned()
                .ok_or_else(|| Error::MissingEntry(idx.clone())),
            Source::Computed {
                measure,
                thetas,
                cache,
                ..
            } => {
                if let Some(v) = cache.read().expect("cache lock").get(idx) {
                    return Ok(v.clone());
                }
                let mut acc = S::zero();
                for (atom, theta) in measure.atoms().iter().zip(thetas) {
                    acc = acc
                        + atom.weight.clone()
                            * atom.point.monomial(&idx.alpha)?
                            * num_traits::pow::pow(theta.clone(), idx.beta as usize);
                }
                cache
                    .write()
                    .expect("cache lock")
                    .insert(idx.clone(), acc.clone());
                Ok(acc)
            }
        }
    }

    /// Indices from `wanted` the family cannot answer.
    pub fn missing<'a, I>(&self, wanted: I) -> Vec<DeltaIndex>
    where
        I: IntoIterator<Item = &'a DeltaIndex>,
    {
        match &self.source {
            Source::Computed { .. } => Vec::new(),
            Source::Tabulated { entries, .. } => wanted
                .into_iter()
                .filter(|idx| !entries.contains_key(idx))
                .cloned()
                .collect(),
        }
    }

    /// Materializes the family on the given indices.
    pub fn tabulate<'a, I>(&self, indices: I) -> Result<BTreeMap<DeltaIndex, S>>
    where
        I: IntoIterator<Item = &'a DeltaIndex>,
    {
        indices
            .into_iter()
            .map(|idx| Ok((idx.clone(), self.get(idx)?)))
            .collect()
    }
}

/// `M[(α,β),(α′,β′)] = δ_{(α+α′, β+β′)}`.
pub fn gram<S: Scalar>(delta: &DeltaFamily<S>, basis: &[DeltaIndex]) -> Result<SymMatrix<S>> {
    SymMatrix::from_upper(basis.len(), |i, j| delta.get(&basis[i].add(&basis[j])))
}

/// `M_k[(α,β),(α′,β′)] = Σ_ξ a_{kξ} δ_{(α+α′+ξ, β+β′)}` for a real `p_k`.
pub fn shifted_gram<S: Scalar>(
    delta: &DeltaFamily<S>,
    basis: &[DeltaIndex],
    p: &FracPoly<S>,
) -> Result<SymMatrix<S>> {
    if !p.is_real() {
        return Err(Error::NonReal { index: 0 });
    }
    check_dim(delta.dim(), p.dim())?;
    let terms: Vec<(ExponentVector, S)> = p
        .terms()
        .iter()
        .map(|(a, c)| (a.clone(), c.re.clone()))
        .collect();
    SymMatrix::from_upper(basis.len(), |i, j| {
        let base = basis[i].add(&basis[j]);
        let mut acc = S::zero();
        for (xi, a) in &terms {
            acc = acc + a.clone() * delta.get(&base.shifted(xi, 0))?;
        }
        Ok(acc)
    })
}
