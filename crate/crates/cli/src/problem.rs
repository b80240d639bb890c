//! Problem files: JSON schema, mode resolution and conversion to typed values.

use std::collections::BTreeMap;

use fracmom::{
    parse_fracpoly, parse_rational, AtomicMeasure, DeltaIndex, Exponent, ExponentVector,
    LogAtomicMeasure, ProblemPolys, Scalar, Window,
};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::InputError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default)]
    pub polynomials: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_measure: Option<LogMeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_table: Option<Vec<DeltaEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_table: Option<Vec<GammaEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootsSpec>,
    pub weight: Value,
}

/// Coordinates `values[j]^power`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RootsSpec {
    pub values: Vec<Value>,
    pub power: u64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LogMeasureSpec {
    pub atoms: Vec<LogAtomSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LogAtomSpec {
    pub point: Vec<Value>,
    pub weight: Value,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaEntry {
    pub alpha: Vec<Value>,
    pub beta: u32,
    pub value: Value,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    pub alpha: Vec<Value>,
    pub value: Value,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "B")]
    pub b: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn parse(text: &str) -> Option<Mode> {
        match text {
            "exact" => Some(Mode::Exact),
            "float" => Some(Mode::Float),
            _ => None,
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let file: ProblemFile = serde_json::from_str(text)
            .map_err(|e| InputError::new(format!("invalid problem file: {e}")))?;
        if file.n == 0 {
            return Err(InputError::at("n", "dimension must be positive"));
        }
        Ok(file)
    }

    /// `override_mode`, else the file's `mode`, else float when some value
    /// is a non-integer JSON number or a log-measure is given.
    pub fn resolve_mode(&self, override_mode: Option<Mode>) -> Result<Mode, InputError> {
        if let Some(m) = override_mode {
            return Ok(m);
        }
        if let Some(m) = &self.mode {
            return Mode::parse(m)
                .ok_or_else(|| InputError::at("mode", format!("expected \"exact\" or \"float\", got {m:?}")));
        }
        if self.log_measure.is_some() || self.has_float_values() {
            Ok(Mode::Float)
        } else {
            Ok(Mode::Exact)
        }
    }

    fn has_float_values(&self) -> bool {
        let float = |v: &Value| matches!(v, Value::Number(n) if !(n.is_i64() || n.is_u64()));
        let measure = self.measure.iter().flat_map(|m| &m.atoms).any(|a| {
            float(&a.weight)
                || a.point.iter().flatten().any(float)
                || a.roots.iter().flat_map(|r| &r.values).any(float)
        });
        let delta = self.delta_table.iter().flatten().any(|e| float(&e.value));
        let gamma = self.gamma_table.iter().flatten().any(|e| float(&e.value));
        measure || delta || gamma
    }

    /// How many δ sources (measure, log-measure, table) the file carries.
    pub fn sources(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.measure.is_some() {
            out.push("measure");
        }
        if self.log_measure.is_some() {
            out.push("log_measure");
        }
        if self.delta_table.is_some() {
            out.push("delta_table");
        }
        out
    }

    pub fn problem<S: Scalar>(&self) -> Result<ProblemPolys<S>, InputError> {
        let polys = self
            .polynomials
            .iter()
            .enumerate()
            .map(|(k, text)| {
                parse_fracpoly::<S>(text, self.n)
                    .map_err(|e| InputError::at(format!("polynomials[{k}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ProblemPolys::new(self.n, polys).map_err(|e| InputError::at("polynomials", e))
    }

    pub fn window<S: Scalar>(
        &self,
        override_window: Option<Window>,
        problem: &ProblemPolys<S>,
    ) -> Result<Window, InputError> {
        let w = match (override_window, self.window) {
            (Some(w), _) => w,
            (None, Some(w)) => {
                Window::new(w.d, w.n, w.b).map_err(|e| InputError::at("window", e))?
            }
            (None, None) => Window::default_for(problem),
        };
        w.validate(problem).map_err(|e| InputError::at("window", e))?;
        Ok(w)
    }

    /// The measure with atoms in root form. Exact atoms share one root power
    /// `D`; `point` atoms must then have rational `D`-th roots.
    pub fn measure<S: Scalar>(&self) -> Result<Option<AtomicMeasure<S>>, InputError> {
        if let Some(spec) = &self.log_measure {
            if S::EXACT {
                return Err(InputError::at(
                    "log_measure",
                    "a log-measure has irrational atoms; use float mode",
                ));
            }
            return self.log_measure_pushforward::<S>(spec).map(Some);
        }
        let Some(spec) = &self.measure else {
            return Ok(None);
        };
        for (i, atom) in spec.atoms.iter().enumerate() {
            if atom.roots.as_ref().is_some_and(|r| r.power == 0) {
                return Err(InputError::at(
                    format!("measure.atoms[{i}].roots.power"),
                    "root power must be positive",
                ));
            }
        }
        let root_power = spec
            .atoms
            .iter()
            .find_map(|a| a.roots.as_ref().map(|r| r.power))
            .unwrap_or(1);
        if S::EXACT {
            if let Some((i, r)) = spec
                .atoms
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.roots.as_ref().map(|r| (i, r)))
                .find(|(_, r)| r.power != root_power)
            {
                return Err(InputError::at(
                    format!("measure.atoms[{i}].roots.power"),
                    format!(
                        "exact atoms must share one root power; found {} and {root_power}",
                        r.power
                    ),
                ));
            }
        }
        let inv = Exponent::new(1, root_power);
        let mut atoms = Vec::with_capacity(spec.atoms.len());
        for (i, atom) in spec.atoms.iter().enumerate() {
            let at = |field: &str| format!("measure.atoms[{i}].{field}");
            let roots: Vec<S> = match (&atom.point, &atom.roots) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(InputError::at(
                        format!("measure.atoms[{i}]"),
                        "give exactly one of \"point\" and \"roots\"",
                    ))
                }
                (None, Some(r)) => {
                    let values = scalars::<S>(&r.values, &at("roots.values"))?;
                    if S::EXACT {
                        values
                    } else {
                        // float atoms are rebased to the shared root power
                        let e = Exponent::new(r.power, root_power);
                        values
                            .iter()
                            .map(|v| v.pow_exponent(&e).expect("float powers always exist"))
                            .collect()
                    }
                }
                (Some(p), None) => {
                    let coords = scalars::<S>(p, &at("point"))?;
                    coords
                        .iter()
                        .enumerate()
                        .map(|(j, t)| {
                            if t.is_negative() {
                                return Err(InputError::at(
                                    format!("measure.atoms[{i}].point[{j}]"),
                                    "coordinates must be non-negative",
                                ));
                            }
                            t.pow_exponent(&inv).ok_or_else(|| {
                                InputError::at(
                                    format!("measure.atoms[{i}].point[{j}]"),
                                    format!(
                                        "{t} has no rational {root_power}-th root; give the atom as roots"
                                    ),
                                )
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            if roots.len() != self.n {
                return Err(InputError::at(
                    at("point"),
                    format!("expected {} coordinates, found {}", self.n, roots.len()),
                ));
            }
            let weight = scalar::<S>(&atom.weight, &at("weight"))?;
            atoms.push((roots, weight));
        }
        AtomicMeasure::from_roots(self.n, root_power, atoms)
            .map(Some)
            .map_err(|e| InputError::at("measure", e))
    }

    fn log_measure_pushforward<S: Scalar>(
        &self,
        spec: &LogMeasureSpec,
    ) -> Result<AtomicMeasure<S>, InputError> {
        let mut atoms = Vec::with_capacity(spec.atoms.len());
        for (i, atom) in spec.atoms.iter().enumerate() {
            let s = scalars::<f64>(&atom.point, &format!("log_measure.atoms[{i}].point"))?;
            let w = scalar::<f64>(&atom.weight, &format!("log_measure.atoms[{i}].weight"))?;
            atoms.push((s, w));
        }
        let nu = LogAtomicMeasure::new(self.n, atoms).map_err(|e| InputError::at("log_measure", e))?;
        let mu = nu.pushforward();
        let atoms = mu
            .atoms()
            .iter()
            .map(|a| {
                let t = a.point.coordinates_f64();
                (
                    t.into_iter().map(|x| S::from_f64(x).expect("float mode")).collect(),
                    S::from_f64(a.weight).expect("float mode"),
                )
            })
            .collect();
        AtomicMeasure::from_points(self.n, atoms).map_err(|e| InputError::at("log_measure", e))
    }

    pub fn delta_table<S: Scalar>(&self) -> Result<Option<BTreeMap<DeltaIndex, S>>, InputError> {
        let Some(entries) = &self.delta_table else {
            return Ok(None);
        };
        let mut out = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            let at = |field: &str| format!("delta_table[{i}].{field}");
            let alpha = exponent_vector(&e.alpha, self.n, &at("alpha"))?;
            let idx = DeltaIndex::new(alpha, e.beta);
            let v = scalar::<S>(&e.value, &at("value"))?;
            if out.insert(idx.clone(), v).is_some() {
                return Err(InputError::at(at("alpha"), format!("duplicate entry for {idx}")));
            }
        }
        Ok(Some(out))
    }

    pub fn gamma_table<S: Scalar>(&self) -> Result<Option<BTreeMap<ExponentVector, S>>, InputError> {
        let Some(entries) = &self.gamma_table else {
            return Ok(None);
        };
        let mut out = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            let at = |field: &str| format!("gamma_table[{i}].{field}");
            let alpha = exponent_vector(&e.alpha, self.n, &at("alpha"))?;
            let v = scalar::<S>(&e.value, &at("value"))?;
            if out.insert(alpha.clone(), v).is_some() {
                return Err(InputError::at(at("alpha"), format!("duplicate entry for {alpha}")));
            }
        }
        Ok(Some(out))
    }
}

pub fn scalar<S: Scalar>(v: &Value, at: &str) -> Result<S, InputError> {
    match v {
        Value::String(s) => {
            S::parse_literal(s).ok_or_else(|| InputError::at(at, format!("invalid number {s:?}")))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(S::from_ratio(i.into(), 1.into()));
            }
            if let Some(u) = n.as_u64() {
                return Ok(S::from_ratio(u.into(), 1.into()));
            }
            if S::EXACT {
                return Err(InputError::at(
                    at,
                    format!("non-integer number {n} in exact mode; write it as a \"p/q\" string"),
                ));
            }
            n.as_f64()
                .and_then(S::from_f64)
                .ok_or_else(|| InputError::at(at, format!("invalid number {n}")))
        }
        other => Err(InputError::at(at, format!("expected a number or string, got {other}"))),
    }
}

fn scalars<S: Scalar>(vs: &[Value], at: &str) -> Result<Vec<S>, InputError> {
    vs.iter()
        .enumerate()
        .map(|(j, v)| scalar(v, &format!("{at}[{j}]")))
        .collect()
}

fn exponent_vector(vs: &[Value], n: usize, at: &str) -> Result<ExponentVector, InputError> {
    if vs.len() != n {
        return Err(InputError::at(at, format!("expected {n} components, found {}", vs.len())));
    }
    let comps = vs
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let at = format!("{at}[{j}]");
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(x) => x.to_string(),
                other => return Err(InputError::at(&at, format!("expected a rational, got {other}"))),
            };
            let r = parse_rational(&text)
                .ok_or_else(|| InputError::at(&at, format!("invalid rational {text:?}")))?;
            if r.is_negative() {
                return Err(InputError::at(&at, "exponents must be non-negative"));
            }
            let num = u64::try_from(r.numer()).ok();
            let den = u64::try_from(r.denom()).ok();
            match (num, den) {
                (Some(num), Some(den)) if !den.is_zero() => Ok(Exponent::new(num, den)),
                _ => Err(InputError::at(&at, "exponent out of range")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExponentVector::new(comps))
}
