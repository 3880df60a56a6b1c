//! CSV serialization. Floats carry 17 significant digits so values parse back bit-exactly.

use std::io::{Read, Write};

use lgq_core::scan::{RegionMask, ScanGrid};
use lgq_core::{QuasiResult, SignPair};

use crate::error::{CliError, Result};

pub const GRID_HEADER: [&str; 6] = ["tau1", "tau2", "q_pp", "q_pm", "q_mp", "q_mm"];
pub const QUASI_KEYS: [&str; 7] = ["q_pp", "q_pm", "q_mp", "q_mm", "expect_q1", "expect_q2", "corr"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| CliError::CsvFormat(format!("not a number: {field:?}")))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(r)
}

/// Header row followed by `rows`.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

pub fn write_grid<W: Write>(w: W, rows: impl IntoIterator<Item = (f64, f64, [f64; 4])>) -> Result<()> {
    let rows = rows.into_iter().map(|(t1, t2, q)| {
        let mut r = vec![fmt_f64(t1), fmt_f64(t2)];
        r.extend(q.iter().map(|&v| fmt_f64(v)));
        r
    });
    write_table(w, &GRID_HEADER, rows)
}

/// Populated cells of a scan in row-major order.
pub fn write_scan_grid<W: Write>(w: W, grid: &ScanGrid) -> Result<()> {
    write_grid(w, grid.iter().map(|(r, c, q)| (grid.tau1_axis[r], grid.tau2_axis[c], q)))
}

pub fn read_grid<R: Read>(r: R) -> Result<Vec<(f64, f64, [f64; 4])>> {
    let mut rdr = reader(r);
    if rdr.headers()?.iter().ne(GRID_HEADER) {
        return Err(CliError::CsvFormat("unexpected grid header".into()));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let v = rec.iter().map(parse_f64).collect::<Result<Vec<f64>>>()?;
            match v.as_slice() {
                &[t1, t2, a, b, c, d] => Ok((t1, t2, [a, b, c, d])),
                _ => Err(CliError::CsvFormat(format!("expected 6 fields, got {}", v.len()))),
            }
        })
        .collect()
}

pub fn write_key_values<W: Write>(w: W, rows: &[(String, f64)]) -> Result<()> {
    write_table(w, &["key", "value"], rows.iter().map(|(k, v)| vec![k.clone(), fmt_f64(*v)]))
}

pub fn read_key_values<R: Read>(r: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = reader(r);
    if rdr.headers()?.iter().ne(["key", "value"]) {
        return Err(CliError::CsvFormat("expected key,value header".into()));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            match (rec.get(0), rec.get(1), rec.len()) {
                (Some(k), Some(v), 2) => Ok((k.to_string(), parse_f64(v)?)),
                _ => Err(CliError::CsvFormat("expected key,value rows".into())),
            }
        })
        .collect()
}

/// The serialized part of a [`QuasiResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiRecord {
    pub q: [f64; 4],
    pub expect_q1: f64,
    pub expect_q2: f64,
    pub corr: f64,
}

impl From<&QuasiResult> for QuasiRecord {
    fn from(r: &QuasiResult) -> Self {
        QuasiRecord { q: r.q, expect_q1: r.expect_q1, expect_q2: r.expect_q2, corr: r.corr }
    }
}

impl QuasiRecord {
    pub fn rows(&self) -> Vec<(String, f64)> {
        let values = [self.q[0], self.q[1], self.q[2], self.q[3], self.expect_q1, self.expect_q2, self.corr];
        QUASI_KEYS.iter().map(|k| k.to_string()).zip(values).collect()
    }
}

pub fn write_quasi<W: Write>(w: W, r: &QuasiResult) -> Result<()> {
    write_key_values(w, &QuasiRecord::from(r).rows())
}

pub fn read_quasi<R: Read>(r: R) -> Result<QuasiRecord> {
    let rows = read_key_values(r)?;
    if rows.iter().map(|(k, _)| k.as_str()).ne(QUASI_KEYS) {
        return Err(CliError::CsvFormat("unexpected quasiprobability keys".into()));
    }
    let v: Vec<f64> = rows.into_iter().map(|(_, v)| v).collect();
    Ok(QuasiRecord { q: [v[0], v[1], v[2], v[3]], expect_q1: v[4], expect_q2: v[5], corr: v[6] })
}

/// Per-cell negativity flags for the four sign pairs.
pub fn write_mask<W: Write>(w: W, grid: &ScanGrid, masks: &[RegionMask]) -> Result<()> {
    let rows = grid.iter().map(|(r, c, _)| {
        let mut row = vec![fmt_f64(grid.tau1_axis[r]), fmt_f64(grid.tau2_axis[c])];
        row.extend(masks.iter().map(|m| u8::from(m.is_negative(r, c)).to_string()));
        row
    });
    write_table(w, &["tau1", "tau2", "neg_pp", "neg_pm", "neg_mp", "neg_mm"], rows)
}

pub const REGION_HEADER: [&str; 10] =
    ["pair", "component", "size", "row_min", "row_max", "col_min", "col_max", "tau1_min", "tau2_min", "q_min"];

/// One row per connected negative region.
pub fn write_regions<W: Write>(w: W, grid: &ScanGrid, masks: &[RegionMask]) -> Result<()> {
    let rows = masks.iter().flat_map(|m| {
        m.components.iter().enumerate().map(move |(i, c)| {
            vec![
                pair_tag(m.pair),
                i.to_string(),
                c.size.to_string(),
                c.bbox.0.to_string(),
                c.bbox.1.to_string(),
                c.bbox.2.to_string(),
                c.bbox.3.to_string(),
                fmt_f64(grid.tau1_axis[c.min_cell.0]),
                fmt_f64(grid.tau2_axis[c.min_cell.1]),
                fmt_f64(c.min_value),
            ]
        })
    });
    write_table(w, &REGION_HEADER, rows)
}

pub fn pair_tag(pair: SignPair) -> String {
    pair.tag()
}
