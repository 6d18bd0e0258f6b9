//! Column layout: `t,y[,y1,y0],x0,...,x{d-1}`. Treatment must be `0` or `1`;
//! every value must parse as a finite number.

use std::path::Path;

use super::{Dataset, PotentialOutcomes, Provenance, Sample};
use crate::{Error, Result};

/// Shortest form with 17 significant digits, like C's `%.17g`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    } else if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{sign}{digits}{}", "0".repeat(int_len - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
        }
    }
}

fn header(dim: usize, with_truth: bool) -> Vec<String> {
    let mut h = vec!["t".to_string(), "y".to_string()];
    if with_truth {
        h.push("y1".into());
        h.push("y0".into());
    }
    h.extend((0..dim).map(|j| format!("x{j}")));
    h
}

pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let truth = data.ground_truth();
    w.write_record(header(data.dim(), truth.is_some()))
        .map_err(|e| csv_error(path, e))?;
    for (i, s) in data.samples().iter().enumerate() {
        let mut rec = vec![if s.treated { "1".into() } else { "0".into() }, format_f64(s.y)];
        if let Some(gt) = truth {
            rec.push(format_f64(gt[i].y1));
            rec.push(format_f64(gt[i].y0));
        }
        rec.extend(s.x.iter().map(|v| format_f64(*v)));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(err) => Error::io(path, err),
        other => Error::Schema {
            row: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a dataset; rows are numbered from 1 (the header is row 0) in errors.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let names: Vec<String> = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let with_truth = names.get(2).map(String::as_str) == Some("y1");
    let lead = if with_truth { 4 } else { 2 };
    let dim = names.len().saturating_sub(lead);
    if dim == 0 || names != header(dim, with_truth) {
        return Err(Error::Schema {
            row: 0,
            message: format!(
                "header must be t,y[,y1,y0],x0..x{{d-1}} with d >= 1, got {}",
                names.join(",")
            ),
        });
    }
    let mut samples = Vec::new();
    let mut truth = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != names.len() {
            return Err(Error::Schema {
                row,
                message: format!("expected {} columns, found {}", names.len(), rec.len()),
            });
        }
        let num = |col: usize| -> Result<f64> {
            let raw = &rec[col];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Schema {
                    row,
                    message: format!("column {} holds non-numeric value {raw:?}", names[col]),
                }),
            }
        };
        let treated = match &rec[0] {
            "0" | "0.0" => false,
            "1" | "1.0" => true,
            other => {
                return Err(Error::Schema {
                    row,
                    message: format!("treatment must be 0 or 1, got {other:?}"),
                })
            }
        };
        let y = num(1)?;
        if with_truth {
            truth.push(PotentialOutcomes { y1: num(2)?, y0: num(3)? });
        }
        let x = (lead..names.len()).map(num).collect::<Result<Vec<_>>>()?;
        samples.push(Sample { x, treated, y });
    }
    Dataset::new(
        dim,
        samples,
        with_truth.then_some(truth),
        Provenance::File(path.to_path_buf()),
    )
}
