//! Node and quadrature-rule files.
//!
//! Both formats are comma-separated text with a mandatory header, one row
//! per node, layers grouped by `n` and `k` counting from 1 within a layer.
//! Floats are written with 17 significant digits so that a write/read cycle
//! reproduces every value bit for bit.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mzfamily::Layer;
use crate::quadrature::QuadRule;

pub const NODE_HEADER: [&str; 4] = ["n", "k", "x", "tau"];
pub const RULE_HEADER: [&str; 5] = ["n", "k", "x", "w_re", "w_im"];

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A quadrature rule as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<Complex64>,
}

impl From<&QuadRule> for StoredRule {
    fn from(rule: &QuadRule) -> Self {
        StoredRule {
            n: rule.n(),
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().to_vec(),
        }
    }
}

pub fn write_layers<W: Write>(out: W, layers: &[Layer]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NODE_HEADER)?;
    for layer in layers {
        for (k, (x, t)) in layer.nodes().iter().zip(layer.tau()).enumerate() {
            w.write_record([
                layer.n().to_string(),
                (k + 1).to_string(),
                fmt_f64(*x),
                fmt_f64(*t),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_rules<W: Write>(out: W, rules: &[StoredRule]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RULE_HEADER)?;
    for rule in rules {
        for (k, (x, wk)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            w.write_record([
                rule.n.to_string(),
                (k + 1).to_string(),
                fmt_f64(*x),
                fmt_f64(wk.re),
                fmt_f64(wk.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Row {
    line: usize,
    n: usize,
    k: usize,
    values: Vec<f64>,
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}, found {}", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse { line, message };
        if record.len() != header.len() {
            return Err(bad(format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let int = |i: usize| {
            record[i]
                .parse::<usize>()
                .map_err(|e| bad(format!("field {}: {e}", header[i])))
        };
        let n = int(0)?;
        let k = int(1)?;
        let values = (2..header.len())
            .map(|i| {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("field {}: {e}", header[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(Row { line, n, k, values });
    }
    Ok(rows)
}

/// Splits rows into contiguous groups of equal `n` with `k = 1, 2, …`.
fn group(rows: Vec<Row>) -> Result<Vec<(usize, Vec<Vec<f64>>)>> {
    let mut groups: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
    for row in rows {
        match groups.last_mut() {
            Some((n, values)) if *n == row.n => {
                if row.k != values.len() + 1 {
                    return Err(Error::Parse {
                        line: row.line,
                        message: format!("expected k = {}, found {}", values.len() + 1, row.k),
                    });
                }
                values.push(row.values);
            }
            _ => {
                if groups.iter().any(|(n, _)| *n == row.n) {
                    return Err(Error::Parse {
                        line: row.line,
                        message: format!("layer n = {} is not contiguous", row.n),
                    });
                }
                if row.k != 1 {
                    return Err(Error::Parse {
                        line: row.line,
                        message: format!("layer n = {} must start at k = 1", row.n),
                    });
                }
                groups.push((row.n, vec![row.values]));
            }
        }
    }
    Ok(groups)
}

/// Reads a node file. Zero weights are dropped with a warning; the
/// remaining layer must satisfy the [`Layer`] invariants.
pub fn read_layers<R: Read>(input: R) -> Result<Vec<Layer>> {
    group(read_rows(input, &NODE_HEADER)?)?
        .into_iter()
        .map(|(n, values)| {
            let (nodes, tau) = values.into_iter().map(|v| (v[0], v[1])).unzip();
            Layer::with_zero_weights_dropped(n, nodes, tau)
        })
        .collect()
}

pub fn read_rules<R: Read>(input: R) -> Result<Vec<StoredRule>> {
    Ok(group(read_rows(input, &RULE_HEADER)?)?
        .into_iter()
        .map(|(n, values)| StoredRule {
            n,
            nodes: values.iter().map(|v| v[0]).collect(),
            weights: values.iter().map(|v| Complex64::new(v[1], v[2])).collect(),
        })
        .collect())
}
