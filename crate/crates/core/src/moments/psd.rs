//! Positive semi-definiteness of symmetric matrices.
//!
//! Exact scalars go through an `LDLᵀ` factorization with symmetric pivoting
//! (largest remaining diagonal first, lowest index on ties). The matrix is
//! PSD iff every pivot is non-negative and, once the largest remaining
//! diagonal is zero, the remaining block vanishes. Float scalars use the
//! smallest eigenvalue against `−tol·(1 + ‖M‖_∞)`.
//!
//! A negative verdict always carries a vector `v` with `vᵀMv < 0`.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<S> {
    size: usize,
    data: Vec<S>,
}

impl<S: Scalar> SymMatrix<S> {
    /// Fills the upper triangle from `entry(i, j)` (`i <= j`) and mirrors it.
    pub fn from_upper<F>(size: usize, mut entry: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<S>,
    {
        let mut data = vec![S::zero(); size * size];
        for i in 0..size {
            for j in i..size {
                let v = entry(i, j)?;
                data[j * size + i] = v.clone();
                data[i * size + j] = v;
            }
        }
        Ok(SymMatrix { size, data })
    }

    /// From full rows. Exact input must be symmetric; float input is
    /// symmetrized when the asymmetry is within `tol`.
    pub fn from_rows(rows: Vec<Vec<S>>, tol: f64) -> Result<Self> {
        let size = rows.len();
        for r in &rows {
            if r.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: r.len(),
                });
            }
        }
        let two = S::from_usize(2);
        SymMatrix::from_upper(size, |i, j| {
            let (a, b) = (&rows[i][j], &rows[j][i]);
            let same = if S::EXACT {
                a == b
            } else {
                let (x, y) = (a.to_f64(), b.to_f64());
                (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
            };
            if !same {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
            Ok((a.clone() + b.clone()) / two.clone())
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.size.max(1)).take(self.size).map(<[S]>::to_vec).collect()
    }

    /// `vᵀMv`.
    pub fn quadratic_form(&self, v: &[S]) -> S {
        assert_eq!(v.len(), self.size);
        let mut acc = S::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let mut row = S::zero();
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() {
                    row = row + self.get(i, j).clone() * vj.clone();
                }
            }
            acc = acc + vi.clone() * row;
        }
        acc
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.data
            .chunks(self.size.max(1))
            .map(|r| r.iter().map(|x| x.to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows()
                .iter()
                .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdCertificate<S> {
    /// `LDLᵀ` pivots in elimination order (exact mode).
    Pivots(Vec<S>),
    /// Smallest eigenvalue, `None` for the empty matrix (float mode).
    MinEigenvalue(Option<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness<S> {
    pub vector: Vec<S>,
    /// `vᵀMv`, negative.
    pub value: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramVerdict<S> {
    pub psd: bool,
    pub certificate: PsdCertificate<S>,
    pub witness: Option<Witness<S>>,
}

impl<S: Scalar> GramVerdict<S> {
    pub fn to_json(&self) -> Value {
        let certificate = match &self.certificate {
            PsdCertificate::Pivots(p) => {
                json!({ "pivots": p.iter().map(Scalar::to_json).collect::<Vec<_>>() })
            }
            PsdCertificate::MinEigenvalue(e) => json!({ "min_eigenvalue": e }),
        };
        let witness = self.witness.as_ref().map(|w| {
            json!({
                "vector": w.vector.iter().map(Scalar::to_json).collect::<Vec<_>>(),
                "quadratic_form": w.value.to_json(),
            })
        });
        json!({ "psd": self.psd, "certificate": certificate, "witness": witness })
    }
}

/// Decides whether `m` is positive semi-definite. `tol` only matters for
/// float scalars.
pub fn psd_check<S: Scalar>(m: &SymMatrix<S>, tol: f64) -> GramVerdict<S> {
    if S::EXACT {
        ldlt_check(m)
    } else {
        eigen_check(m, tol)
    }
}

/// Eliminated column: `(row, l_row)` over the indices still active after the step.
type Column<S> = Vec<(usize, S)>;

fn ldlt_check<S: Scalar>(m: &SymMatrix<S>) -> GramVerdict<S> {
    let n = m.size;
    let mut work = m.rows();
    let mut active = vec![true; n];
    let mut steps: Vec<(usize, Column<S>)> = Vec::new();
    let mut pivots = Vec::new();

    loop {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| active[i]) {
            if best.is_none_or(|b| work[i][i] > work[b][b]) {
                best = Some(i);
            }
        }
        let Some(j) = best else { break };
        let d = work[j][j].clone();

        if d.is_negative() {
            pivots.push(d);
            let mut y = vec![S::zero(); n];
            y[j] = S::one();
            return failed(m, pivots, back_substitute(&steps, y));
        }

        if d.is_zero() {
            let rest: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
            if let Some(&i) = rest.iter().find(|&&i| work[i][i].is_negative()) {
                pivots.push(work[i][i].clone());
                let mut y = vec![S::zero(); n];
                y[i] = S::one();
                return failed(m, pivots, back_substitute(&steps, y));
            }
            // every remaining diagonal is zero; the block must vanish too
            for (a, &i) in rest.iter().enumerate() {
                for &k in &rest[a + 1..] {
                    if !work[i][k].is_zero() {
                        let mut y = vec![S::zero(); n];
                        y[i] = S::one();
                        y[k] = if work[i][k].is_positive() {
                            -S::one()
                        } else {
                            S::one()
                        };
                        return failed(m, pivots, back_substitute(&steps, y));
                    }
                }
            }
            pivots.extend(rest.iter().map(|_| S::zero()));
            break;
        }

        active[j] = false;
        let column: Column<S> = (0..n)
            .filter(|&i| active[i] && !work[i][j].is_zero())
            .map(|i| (i, work[i][j].clone() / d.clone()))
            .collect();
        for (a, (i, li)) in column.iter().enumerate() {
            for (k, _) in &column[a..] {
                let updated = work[*i][*k].clone() - li.clone() * work[j][*k].clone();
                work[*k][*i] = updated.clone();
                work[*i][*k] = updated;
            }
        }
        pivots.push(d);
        steps.push((j, column));
    }

    GramVerdict {
        psd: true,
        certificate: PsdCertificate::Pivots(pivots),
        witness: None,
    }
}

/// Lifts a vector on the Schur complement back to the original coordinates:
/// each eliminated pivot coordinate is chosen so that `l_sᵀv = 0`, which
/// makes `vᵀMv` equal the Schur-complement form of `y`.
fn back_substitute<S: Scalar>(steps: &[(usize, Column<S>)], mut v: Vec<S>) -> Vec<S> {
    for (pivot, column) in steps.iter().rev() {
        let mut acc = S::zero();
        for (i, li) in column {
            acc = acc + li.clone() * v[*i].clone();
        }
        v[*pivot] = -acc;
    }
    v
}

fn failed<S: Scalar>(m: &SymMatrix<S>, pivots: Vec<S>, vector: Vec<S>) -> GramVerdict<S> {
    let value = m.quadratic_form(&vector);
    GramVerdict {
        psd: false,
        certificate: PsdCertificate::Pivots(pivots),
        witness: Some(Witness { vector, value }),
    }
}

fn eigen_check<S: Scalar>(m: &SymMatrix<S>, tol: f64) -> GramVerdict<S> {
    let n = m.size;
    if n == 0 {
        return GramVerdict {
            psd: true,
            certificate: PsdCertificate::MinEigenvalue(None),
            witness: None,
        };
    }
    let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j).to_f64());
    let eig = dense.symmetric_eigen();
    let (idx, &min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let floor = -tol * (1.0 + m.inf_norm());
    let psd = min >= floor;
    let witness = (!psd).then(|| {
        let vector: Vec<S> = eig
            .eigenvectors
            .column(idx)
            .iter()
            .map(|&x| S::from_f64(x).expect("float scalars accept every f64"))
            .collect();
        let value = m.quadratic_form(&vector);
        Witness { vector, value }
    });
    GramVerdict {
        psd,
        certificate: PsdCertificate::MinEigenvalue(Some(min)),
        witness,
    }
}
