// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV and binary persistence. Floats are written in their shortest
//! round-trip form so a re-run produces byte-identical files; missing
//! values are empty fields.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::medit::{DistanceMatrix, DistanceView, KsPoint};
use crate::oracles::CostMatrixResult;
use crate::pipeline::CorrectedPoint;
use crate::recurrence::{DetPoint, RecurrencePlot};
use crate::series::IrregularSeries;

const MEDM_MAGIC: &[u8; 4] = b"MEDM";
const MEDM_VERSION: u32 = 1;

fn parse_f64(field: &str, row: usize, column: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("row {row}: cannot parse {column} '{field}'")))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Reads `time,value` rows under a mandatory header. Rows may come in any
/// order; NaN or infinite entries are rejected.
pub fn read_series<R: Read>(reader: R) -> Result<IrregularSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    if header.len() != 2 {
        return Err(Error::Format(format!(
            "series CSV needs 2 columns (time,value), header has {}",
            header.len()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != 2 {
            return Err(Error::Format(format!(
                "row {row}: expected 2 fields, got {}",
                rec.len()
            )));
        }
        let t = parse_f64(&rec[0], row, "time")?;
        let v = parse_f64(&rec[1], row, "value")?;
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Format(format!("row {row}: non-finite entry")));
        }
        rows.push((t, v));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (times, values) = rows.into_iter().unzip();
    IrregularSeries::new(times, values)
}

pub fn write_series<W: Write>(series: &IrregularSeries, mut w: W) -> Result<()> {
    writeln!(w, "time,value")?;
    for (t, v) in series.times().iter().zip(series.values()) {
        writeln!(w, "{t},{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_file(path: &Path) -> Result<IrregularSeries> {
    read_series(open(path)?)
}

pub fn write_series_file(series: &IrregularSeries, path: &Path) -> Result<()> {
    write_series(series, create(path)?)
}

/// Dense CSV: a header of segment start times followed by `W` rows of `W`
/// distances.
pub fn write_matrix_csv<V: DistanceView + ?Sized, W: Write>(d: &V, mut w: W) -> Result<()> {
    let n = d.size();
    let header: Vec<String> = (0..n).map(|i| d.start_time(i).to_string()).collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| d.get(i, j).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<DistanceMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let start_times = csv
        .headers()?
        .iter()
        .map(|f| parse_f64(f, 1, "start time"))
        .collect::<Result<Vec<_>>>()?;
    let rows = csv
        .records()
        .enumerate()
        .map(|(i, rec)| {
            rec?.iter()
                .map(|f| parse_f64(f, i + 2, "distance"))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_dense(start_times, &rows)
}

/// Binary layout: `MEDM`, version (u32), `W` (u32), then the strict upper
/// triangle row-major as f64, all little-endian. Start times are not stored.
pub fn write_matrix_binary<W: Write>(d: &DistanceMatrix, mut w: W) -> Result<()> {
    let n = u32::try_from(d.size())
        .map_err(|_| Error::Format("matrix too large for the binary format".into()))?;
    w.write_all(MEDM_MAGIC)?;
    w.write_all(&MEDM_VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    for v in d.upper() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the binary layout; segment start times become `0, 1, 2, ...`.
pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<DistanceMatrix> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..4] != MEDM_MAGIC {
        return Err(Error::Format("missing MEDM magic bytes".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != MEDM_VERSION {
        return Err(Error::Format(format!("unsupported MEDM version {version}")));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    let count = n * n.saturating_sub(1) / 2;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "MEDM payload holds {} bytes, expected {}",
            bytes.len(),
            count * 8
        )));
    }
    let upper = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DistanceMatrix::from_upper((0..n).map(|i| i as f64).collect(), upper)
}

pub fn write_det_csv<W: Write>(points: &[DetPoint], mut w: W) -> Result<()> {
    writeln!(w, "window_center,det")?;
    for p in points {
        writeln!(w, "{},{}", p.center, opt(p.det))?;
    }
    w.flush()?;
    Ok(())
}

/// Recurrent cells of the upper triangle as `i,j`.
pub fn write_recurrence_csv<W: Write>(rp: &RecurrencePlot, mut w: W) -> Result<()> {
    writeln!(w, "i,j")?;
    for (i, j) in rp.upper_coordinates() {
        writeln!(w, "{i},{j}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corrected_csv<W: Write>(points: &[CorrectedPoint], mut w: W) -> Result<()> {
    writeln!(w, "window_center,det_real,det_q95,ratio")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.center,
            opt(p.det_real),
            opt(p.det_q95),
            opt(p.ratio)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ks_curve_csv<W: Write>(curve: &[KsPoint], mut w: W) -> Result<()> {
    writeln!(w, "lambda_s,ks_statistic")?;
    for p in curve {
        writeln!(w, "{},{}", p.lambda_s, opt(p.statistic))?;
    }
    w.flush()?;
    Ok(())
}

/// First row: an empty corner cell, then column grid values. Every other
/// row starts with its row grid value.
pub fn write_cost_matrix_csv<W: Write>(m: &CostMatrixResult, mut w: W) -> Result<()> {
    let header: Vec<String> = m.cols.iter().map(|c| c.to_string()).collect();
    writeln!(w, ",{}", header.join(","))?;
    for (r, row) in m.rows.iter().zip(&m.cells) {
        let cells: Vec<String> = row.iter().map(|v| opt(*v)).collect();
        writeln!(w, "{r},{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Path of realization `k` inside an ensemble directory.
pub fn realization_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("realization_{k:05}.csv"))
}

/// Writes one `time,value` CSV per realization and returns their paths.
pub fn write_ensemble_dir(dir: &Path, realizations: &[IrregularSeries]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    realizations
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let p = realization_path(dir, k);
            write_series_file(s, &p)?;
            Ok(p)
        })
        .collect()
}

/// Convenience wrapper writing to a file path.
pub fn to_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(BufWriter<File>) -> Result<()>,
{
    f(create(path)?)
}
