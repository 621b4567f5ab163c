use serde::Serialize;

use crate::channel::{Prior, SenderSubset};
use crate::region::{Corner, RateConstraintSet};

use super::CliError;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let text = if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    };
    let (mantissa, suffix) = match text.find('e') {
        Some(i) => text.split_at(i),
        None => (text.as_str(), ""),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}{suffix}")
}

pub fn subset_label(j: SenderSubset) -> String {
    let members: Vec<String> = j.members().iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", members.join(","))
}

pub fn order_label(order: &[usize]) -> String {
    order
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("-")
}

pub fn prior_label(p: &Prior<f64>) -> String {
    p.per_sender()
        .iter()
        .map(|g| g.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}

#[derive(Debug, Serialize)]
pub struct BoundRow {
    /// One-based members.
    pub subset: Vec<usize>,
    pub bound: f64,
}

#[derive(Debug, Serialize)]
pub struct CornerRow {
    /// One-based, first decoded first.
    pub order: Vec<usize>,
    pub rates: Vec<f64>,
}

pub fn bound_rows(cs: &RateConstraintSet<f64>) -> Vec<BoundRow> {
    cs.iter()
        .map(|(j, b)| BoundRow {
            subset: j.members().iter().map(|i| i + 1).collect(),
            bound: b,
        })
        .collect()
}

pub fn corner_rows(corners: &[Corner<f64>]) -> Vec<CornerRow> {
    corners
        .iter()
        .map(|c| CornerRow {
            order: c.order.iter().map(|i| i + 1).collect(),
            rates: c.point.rates().to_vec(),
        })
        .collect()
}

/// Long-format CSV: one value per row.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).map_err(csv_error)?;
        Ok(Self { writer })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<(), CliError> {
        self.writer
            .write_record(fields.iter().map(AsRef::as_ref))
            .map_err(csv_error)
    }

    pub fn finish(self) -> Result<String, CliError> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Rows `kind,label,index,value` for bounds and corners, optionally prefixed.
pub fn region_rows(
    table: &mut CsvTable,
    prefix: &[String],
    cs: &RateConstraintSet<f64>,
    corners: Option<&[Corner<f64>]>,
) -> Result<(), CliError> {
    let with = |rest: [String; 4]| prefix.iter().cloned().chain(rest).collect::<Vec<_>>();
    for (j, b) in cs.iter() {
        table.row(&with([
            "bound".into(),
            subset_label(j),
            String::new(),
            fmt_sig(b),
        ]))?;
    }
    for c in corners.unwrap_or_default() {
        for (i, r) in c.point.rates().iter().enumerate() {
            table.row(&with([
                "corner".into(),
                order_label(&c.order),
                (i + 1).to_string(),
                fmt_sig(*r),
            ]))?;
        }
    }
    Ok(())
}

pub fn to_json<V: Serialize>(value: &V) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.5), "1.5");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(0.6008760596), "0.6008760596");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_sig(1e-12), "1e-12");
        assert_eq!(fmt_sig(2.5e15), "2.5e15");
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
    }

    #[test]
    fn labels() {
        assert_eq!(subset_label(SenderSubset::from_members([0, 2])), "{1,3}");
        assert_eq!(order_label(&[1, 0]), "2-1");
        assert_eq!(prior_label(&Prior::uniform(&[2, 1])), "0.5 0.5|1");
    }
}
