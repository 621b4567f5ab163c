//! Prior, mixture, order and list syntax.
//!
//! Priors: `uniform`, `grid:K`, `0.5,0.5;0.2,0.8` (one group per sender) or
//! JSON `[[0.5,0.5],[0.2,0.8]]`. Mixtures: `0.5:uniform|0.5:1,0;0,1`.
//! Orders: one-based, `2-1` or `2,1`.

use crate::channel::Prior;
use crate::region::MixtureSpec;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Fixed(Prior<f64>),
    Grid(usize),
}

fn number(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("'{t}' is not a finite number")))
}

pub fn number_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(number).collect()
}

pub fn usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!("'{}' is not a nonnegative integer", t.trim()))
            })
        })
        .collect()
}

fn joint_prior_error() -> CliError {
    CliError::Usage(
        "joint priors are not supported; give one distribution per sender separated by ';'".into(),
    )
}

pub fn parse_prior(spec: &str, alphabets: &[usize]) -> Result<PriorSpec, CliError> {
    let spec = spec.trim();
    let s = alphabets.len();
    if spec == "uniform" {
        return Ok(PriorSpec::Fixed(Prior::uniform(alphabets)));
    }
    if let Some(k) = spec.strip_prefix("grid:") {
        let k = k
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad grid resolution '{k}'")))?;
        return Ok(PriorSpec::Grid(k));
    }
    let groups: Vec<Vec<f64>> = if spec.starts_with('[') {
        let value: serde_json::Value = serde_json::from_str(spec)
            .map_err(|e| CliError::Usage(format!("prior is not valid JSON: {e}")))?;
        match &value {
            serde_json::Value::Array(items) if items.iter().all(|v| v.is_number()) => {
                if s > 1 {
                    return Err(joint_prior_error());
                }
                vec![serde_json::from_value(value).map_err(|e| CliError::Usage(e.to_string()))?]
            }
            _ => serde_json::from_value(value).map_err(|e| {
                CliError::Usage(format!("prior must be a list of lists of numbers: {e}"))
            })?,
        }
    } else {
        spec.split(';').map(number_list).collect::<Result<_, _>>()?
    };
    if groups.len() != s {
        let joint: usize = alphabets.iter().product();
        if groups.len() == 1 && s > 1 && groups[0].len() == joint {
            return Err(joint_prior_error());
        }
        return Err(CliError::Usage(format!(
            "prior has {} groups but the channel has {s} senders",
            groups.len()
        )));
    }
    for (i, (g, &a)) in groups.iter().zip(alphabets).enumerate() {
        if g.len() != a {
            return Err(CliError::Usage(format!(
                "prior for sender {} has {} entries, alphabet has {a}",
                i + 1,
                g.len()
            )));
        }
    }
    Prior::new(groups)
        .map(PriorSpec::Fixed)
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn fixed_prior(spec: &str, alphabets: &[usize]) -> Result<Prior<f64>, CliError> {
    match parse_prior(spec, alphabets)? {
        PriorSpec::Fixed(p) => Ok(p),
        PriorSpec::Grid(_) => Err(CliError::Usage(
            "a grid prior is only accepted by 'region'".into(),
        )),
    }
}

pub fn parse_mixture(
    spec: &str,
    alphabets: &[usize],
    cap: Option<usize>,
) -> Result<MixtureSpec<f64>, CliError> {
    let components = spec
        .split('|')
        .map(|part| {
            let (w, p) = part.split_once(':').ok_or_else(|| {
                CliError::Usage(format!("mixture component '{part}' lacks 'weight:'"))
            })?;
            Ok((number(w)?, fixed_prior(p, alphabets)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(MixtureSpec::new(components, cap)?)
}

/// One-based order to zero-based.
pub fn parse_order(spec: &str, s: usize) -> Result<Vec<usize>, CliError> {
    let order = usize_list(&spec.replace('-', ","))?;
    let mut seen = vec![false; s];
    for &i in &order {
        if i == 0 || i > s || std::mem::replace(&mut seen[i - 1], true) {
            return Err(CliError::Usage(format!(
                "'{spec}' is not an ordering of senders 1..{s}"
            )));
        }
    }
    if order.len() != s {
        return Err(CliError::Usage(format!(
            "'{spec}' is not an ordering of senders 1..{s}"
        )));
    }
    Ok(order.into_iter().map(|i| i - 1).collect())
}
