//! CSV and JSON-lines formats for samples, walk results and traces.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{Face, Point};
use crate::validate::hist::{csv_err, fmt_f64};
use crate::walk::{Status, WalkResult};

fn coord_header(dim: usize) -> impl Iterator<Item = String> {
    (1..=dim).map(|i| format!("y{i}"))
}

/// `sample_id,y1..yd,weight`, one row per point.
pub fn write_sample_csv<W: Write>(points: &[Point], weights: &[f64], w: W) -> Result<()> {
    if points.len() != weights.len() {
        return domain(format!("{} points against {} weights", points.len(), weights.len()));
    }
    let dim = points.first().map_or(0, Point::dim);
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = std::iter::once("sample_id".to_string())
        .chain(coord_header(dim))
        .chain(std::iter::once("weight".to_string()))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    for (i, (p, wt)) in points.iter().zip(weights).enumerate() {
        if p.dim() != dim {
            return domain("all points must share one dimension");
        }
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain(p.coords().into_iter().map(fmt_f64))
            .chain(std::iter::once(fmt_f64(*wt)))
            .collect();
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Entered => "Entered",
        Status::CapReached => "CapReached",
    }
}

/// `sample_id,status,n_crossings,weight,y1..yd`; coordinates are blank when the cap was reached.
pub fn write_walk_csv<W: Write>(results: &[WalkResult], dim: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = ["sample_id", "status", "n_crossings", "weight"]
        .into_iter()
        .map(String::from)
        .chain(coord_header(dim))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    for (i, r) in results.iter().enumerate() {
        let coords: Vec<String> = match &r.final_point {
            Some(p) => p.coords().into_iter().map(fmt_f64).collect(),
            None => vec![String::new(); dim],
        };
        let row: Vec<String> =
            [i.to_string(), status_str(r.status).to_string(), r.n_crossings.to_string(), fmt_f64(r.weight)]
                .into_iter()
                .chain(coords)
                .collect();
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    sample_id: usize,
    k: u64,
    face: Face,
    x1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    transverse: Option<&'a [f64]>,
}

/// One JSON object per crossing: `{"sample_id","k","face","x1","transverse"?}`.
pub fn write_trace_jsonl<W: Write>(results: &[WalkResult], mut w: W) -> Result<()> {
    for (i, r) in results.iter().enumerate() {
        for e in r.trace.iter().flatten() {
            let line = TraceLine { sample_id: i, k: e.k, face: e.face, x1: e.x1, transverse: e.transverse.as_deref() };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Point read back from a sample or walk CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub coords: Vec<f64>,
    pub weight: f64,
}

/// Reads the `y1..yd` and `weight` columns of a sample or walk CSV.
///
/// Rows with blank coordinates (walks that reached the cap) are skipped.
pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut coord_cols: Vec<(usize, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix('y').and_then(|k| k.parse::<usize>().ok()).map(|k| (k, i)))
        .collect();
    coord_cols.sort();
    if coord_cols.is_empty() || coord_cols.iter().enumerate().any(|(j, (k, _))| *k != j + 1) {
        return Err(Error::Usage("input CSV needs columns y1..yd".into()));
    }
    let weight_col = header.iter().position(|h| h == "weight");
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        if coord_cols.iter().any(|(_, i)| row.get(*i).is_none_or(str::is_empty)) {
            continue;
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Usage(format!("bad number {s:?}: {e}")));
        let coords = coord_cols.iter().map(|(_, i)| parse(&row[*i])).collect::<Result<Vec<_>>>()?;
        let weight = match weight_col {
            Some(i) => parse(&row[i])?,
            None => 1.0,
        };
        out.push(Record { coords, weight });
    }
    Ok(out)
}
