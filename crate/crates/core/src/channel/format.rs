//! JSON channel files.
//!
//! ```json
//! {"senders": [{"name": "A", "alphabet": 2}, {"name": "B", "alphabet": 2}],
//!  "output_dim": 2,
//!  "states": {"0,0": [[[1,0],[0,0]], [[0,0],[0,0]]], "0,1": ...}}
//! ```
//!
//! Each state is a dense matrix of `[re, im]` pairs keyed by the comma-joined
//! zero-based letter tuple. Alternatively `"classical"` holds a row-stochastic
//! matrix with one row per joint tuple (first sender most significant); rows
//! expand to diagonal densities.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{fmt_tuple, MixedRadix};
use crate::operator::{
    ComplexMatrix, DensityMatrix, HermitianOperator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL,
};
use crate::scalar::Real;

use super::{CqMacChannel, Sender, MAX_PARTIES};

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub senders: Vec<Sender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<BTreeMap<String, RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<Vec<Vec<f64>>>,
}

impl ChannelFile {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel file serializes")
    }
}

/// Checks every invariant and returns the channel, or all violations found.
pub fn validate_channel<T: Real>(raw: &ChannelFile) -> Result<CqMacChannel<T>> {
    let mut violations = Vec::new();

    if raw.senders.is_empty() {
        violations.push("no senders declared".to_string());
    }
    if raw.senders.len() > MAX_PARTIES {
        violations.push(format!("at most {MAX_PARTIES} senders are supported"));
    }
    for (i, s) in raw.senders.iter().enumerate() {
        if s.alphabet == 0 {
            violations.push(format!(
                "sender {} ({}) has an empty alphabet",
                i + 1,
                s.name
            ));
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidChannel(violations));
    }
    let alphabets: Vec<usize> = raw.senders.iter().map(|s| s.alphabet).collect();
    let radix = MixedRadix::new(&alphabets);
    if radix.checked_len().is_none() {
        return Err(Error::InvalidChannel(vec![
            "joint alphabet too large".into()
        ]));
    }

    let (d, states) = match (&raw.states, &raw.classical) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidChannel(vec![
                "give either \"states\" or \"classical\", not both".into(),
            ]))
        }
        (None, None) => {
            return Err(Error::InvalidChannel(vec![
                "missing \"states\" (or \"classical\" shorthand)".into(),
            ]))
        }
        (Some(table), None) => {
            let Some(d) = raw.output_dim else {
                return Err(Error::InvalidChannel(vec!["missing \"output_dim\"".into()]));
            };
            if d == 0 {
                return Err(Error::InvalidChannel(vec![
                    "output_dim must be positive".into()
                ]));
            }
            (d, quantum_states(table, &radix, d, &mut violations))
        }
        (None, Some(rows)) => {
            let d = raw
                .output_dim
                .or_else(|| rows.first().map(Vec::len))
                .unwrap_or(0);
            if d == 0 {
                return Err(Error::InvalidChannel(vec![
                    "output_dim must be positive".into()
                ]));
            }
            (d, classical_states(rows, &radix, d, &mut violations))
        }
    };

    if !violations.is_empty() {
        return Err(Error::InvalidChannel(violations));
    }
    let states = states
        .into_iter()
        .map(|s| s.expect("no violations"))
        .collect();
    CqMacChannel::new(raw.senders.clone(), d, states)
}

fn quantum_states<T: Real>(
    table: &BTreeMap<String, RawMatrix>,
    radix: &MixedRadix,
    d: usize,
    violations: &mut Vec<String>,
) -> Vec<Option<DensityMatrix<T>>> {
    let mut states: Vec<Option<DensityMatrix<T>>> = vec![None; radix.len()];
    for (key, raw) in table {
        let tuple = match parse_key(key) {
            Some(t) if radix.in_range(&t) => t,
            Some(t) if t.len() == radix.radices().len() => {
                violations.push(format!(
                    "state key \"{key}\": tuple {} out of range",
                    fmt_tuple(&t)
                ));
                continue;
            }
            _ => {
                violations.push(format!(
                    "state key \"{key}\" is not a tuple of {} letters",
                    radix.radices().len()
                ));
                continue;
            }
        };
        let label = fmt_tuple(&tuple);
        let idx = radix.encode(&tuple);
        if states[idx].is_some() {
            violations.push(format!("duplicate state {label}"));
            continue;
        }
        match check_state(raw, d) {
            Ok(rho) => states[idx] = Some(rho),
            Err(msg) => violations.push(format!("state {label}: {msg}")),
        }
    }
    let mut reported: Vec<bool> = vec![false; radix.len()];
    for key in table.keys() {
        if let Some(t) = parse_key(key).filter(|t| radix.in_range(t)) {
            reported[radix.encode(&t)] = true;
        }
    }
    for (i, t) in radix.iter().enumerate() {
        if !reported[i] {
            violations.push(format!("missing state {}", fmt_tuple(&t)));
        }
    }
    states
}

fn classical_states<T: Real>(
    rows: &[Vec<f64>],
    radix: &MixedRadix,
    d: usize,
    violations: &mut Vec<String>,
) -> Vec<Option<DensityMatrix<T>>> {
    if rows.len() != radix.len() {
        violations.push(format!(
            "classical table has {} rows, expected one per joint tuple ({})",
            rows.len(),
            radix.len()
        ));
        return Vec::new();
    }
    let tol = TRACE_TOL;
    rows.iter()
        .zip(radix.iter())
        .map(|(row, t)| {
            let label = fmt_tuple(&t);
            if row.len() != d {
                violations.push(format!(
                    "classical row {label}: expected {d} entries, found {}",
                    row.len()
                ));
                return None;
            }
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                violations.push(format!(
                    "classical row {label}: entries must be finite and nonnegative"
                ));
                return None;
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > tol {
                violations.push(format!("classical row {label}: sums to {total}, not 1"));
                return None;
            }
            let probs: Vec<T> = row.iter().map(|&x| T::lit(x)).collect();
            Some(DensityMatrix::from_hermitian_unchecked(
                HermitianOperator::from_real_diag(&probs),
            ))
        })
        .collect()
}

fn parse_key(key: &str) -> Option<Vec<usize>> {
    key.split(',')
        .map(|p| p.trim().parse::<usize>().ok())
        .collect()
}

fn check_state<T: Real>(
    raw: &RawMatrix,
    d: usize,
) -> std::result::Result<DensityMatrix<T>, String> {
    if raw.len() != d || raw.iter().any(|r| r.len() != d) {
        return Err(format!("expected a {d}x{d} matrix"));
    }
    let rows: Vec<Vec<Complex<T>>> = raw
        .iter()
        .map(|r| {
            r.iter()
                .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
                .collect()
        })
        .collect();
    if raw.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err("non-finite entry".into());
    }
    let m = ComplexMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
    let dev = m.hermitian_deviation();
    if dev > T::tol(HERMITIAN_TOL) {
        return Err(format!("not Hermitian (max deviation {:e})", dev.as_f64()));
    }
    let tr = m.trace().re;
    if (tr - T::one()).abs() > T::tol(TRACE_TOL) {
        return Err(format!("trace {tr} differs from 1"));
    }
    let h = HermitianOperator::new(m).map_err(|e| e.to_string())?;
    let min = h.min_eigenvalue();
    if min < -T::tol(PSD_TOL) {
        return Err(format!(
            "not positive semidefinite (smallest eigenvalue {:e})",
            min.as_f64()
        ));
    }
    Ok(DensityMatrix::from_hermitian_unchecked(h))
}

/// Serializes a channel in the dense `"states"` form.
pub fn to_channel_file<T: Real>(ch: &CqMacChannel<T>) -> ChannelFile {
    let d = ch.output_dim();
    let states = ch
        .tuples()
        .map(|t| {
            let key = t.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            let m = ch.state(&t).matrix();
            let raw = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                        .collect()
                })
                .collect();
            (key, raw)
        })
        .collect();
    ChannelFile {
        senders: ch.senders().to_vec(),
        output_dim: Some(d),
        states: Some(states),
        classical: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_table(skip: Option<&str>, scale: f64) -> String {
        let zero = "[[[1,0],[0,0]],[[0,0],[0,0]]]";
        let one = format!("[[[0,0],[0,0]],[[0,0],[{scale},0]]]");
        let mut entries = Vec::new();
        for (k, v) in [
            ("0,0", zero.to_string()),
            ("0,1", one.clone()),
            ("1,0", one.clone()),
            ("1,1", zero.to_string()),
        ] {
            if Some(k) != skip {
                entries.push(format!("\"{k}\": {v}"));
            }
        }
        format!(
            r#"{{"senders":[{{"name":"A","alphabet":2}},{{"name":"B","alphabet":2}}],"output_dim":2,"states":{{{}}}}}"#,
            entries.join(",")
        )
    }

    #[test]
    fn valid_binary_table() {
        let raw = ChannelFile::from_json(&qubit_table(None, 1.0)).unwrap();
        let ch = validate_channel::<f64>(&raw).unwrap();
        assert_eq!(ch.num_tuples(), 4);
        let back = validate_channel::<f64>(&to_channel_file(&ch)).unwrap();
        assert_eq!(back, ch);
    }

    #[test]
    fn missing_tuple_named() {
        let raw = ChannelFile::from_json(&qubit_table(Some("1,0"), 1.0)).unwrap();
        match validate_channel::<f64>(&raw) {
            Err(Error::InvalidChannel(v)) => assert_eq!(v, vec!["missing state (1,0)".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_trace_named() {
        let raw = ChannelFile::from_json(&qubit_table(None, 0.9)).unwrap();
        match validate_channel::<f64>(&raw) {
            Err(Error::InvalidChannel(v)) => {
                assert_eq!(v.len(), 2);
                assert!(v[0].starts_with("state (0,1): trace 0.9"));
                assert!(v[1].starts_with("state (1,0): trace 0.9"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"senders":[{"name":"A","alphabet":1}],"output_dim":1,"states":{"0":[[[1,0]]]},"extra":1}"#;
        assert!(ChannelFile::from_json(text).is_err());
    }

    #[test]
    fn non_hermitian_named() {
        let text = r#"{"senders":[{"name":"A","alphabet":1}],"output_dim":2,
            "states":{"0":[[[0.5,0],[0.5,0]],[[0,0],[0.5,0]]]}}"#;
        let raw = ChannelFile::from_json(text).unwrap();
        match validate_channel::<f64>(&raw) {
            Err(Error::InvalidChannel(v)) => assert!(v[0].starts_with("state (0): not Hermitian")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classical_shorthand() {
        let text = r#"{"senders":[{"name":"A","alphabet":2},{"name":"B","alphabet":2}],
            "classical":[[1,0,0],[0,1,0],[0,1,0],[0,0,1]]}"#;
        let ch = validate_channel::<f64>(&ChannelFile::from_json(text).unwrap()).unwrap();
        assert_eq!(ch.output_dim(), 3);
        assert_eq!(ch.state(&[1, 0]), &DensityMatrix::basis(3, 1));

        let bad = r#"{"senders":[{"name":"A","alphabet":2}],"classical":[[0.5,0.4],[0,1]]}"#;
        match validate_channel::<f64>(&ChannelFile::from_json(bad).unwrap()) {
            Err(Error::InvalidChannel(v)) => {
                assert!(v[0].starts_with("classical row (0): sums to"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
