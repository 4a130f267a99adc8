use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SummaryRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,L,V,W,B1,B3,avg_gap";

fn real(x: f64) -> String {
    // 17 significant digits; NaN marks an inapplicable bound
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t,
            real(r.l_t),
            real(r.v_t),
            real(r.w_t),
            real(r.b1),
            real(r.b3),
            real(r.avg_loss_gap)
        )?;
    }
    out.flush()
}

pub fn emit_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::config("csv header", format!("expected `{CSV_HEADER}`"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::config(format!("csv line {}", i + 2), "malformed row");
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(bad());
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| bad());
            Ok(SummaryRow {
                t: cols[0].parse().map_err(|_| bad())?,
                l_t: f(1)?,
                v_t: f(2)?,
                w_t: f(3)?,
                b1: f(4)?,
                b3: f(5)?,
                avg_loss_gap: f(6)?,
            })
        })
        .collect()
}
