//! Fixed-grid 2D histograms with CSV export.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Result};

/// Counts and weight sums on an `nx × ny` grid of half-open bins `[lo, hi)`.
///
/// Points outside the grid, or with a NaN coordinate, are counted as clipped.
/// Unweighted points carry weight one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram2D {
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    counts: Vec<u64>,
    weights: Vec<f64>,
    clipped: u64,
    clipped_weight: f64,
}

#[derive(Serialize)]
struct BinRow {
    bin_x_lo: String,
    bin_x_hi: String,
    bin_y_lo: String,
    bin_y_hi: String,
    count: u64,
    weight: String,
}

#[derive(Serialize)]
struct MarginalRow {
    bin_lo: String,
    bin_hi: String,
    count: u64,
    weight: String,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn edges(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { range.1 } else { range.0 + (range.1 - range.0) * i as f64 / n as f64 }).collect()
}

impl Histogram2D {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        for (lo, hi) in [x_range, y_range] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return domain(format!("histogram range [{lo}, {hi}] is empty or not finite"));
            }
        }
        if nx == 0 || ny == 0 {
            return domain("histogram needs at least one bin per axis");
        }
        Ok(Self {
            x_range,
            y_range,
            nx,
            ny,
            counts: vec![0; nx * ny],
            weights: vec![0.0; nx * ny],
            clipped: 0,
            clipped_weight: 0.0,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn axis_bin(range: (f64, f64), n: usize, v: f64) -> Option<usize> {
        if !(v >= range.0 && v < range.1) {
            return None;
        }
        let i = ((v - range.0) / (range.1 - range.0) * n as f64) as usize;
        Some(i.min(n - 1))
    }

    pub fn add(&mut self, x: f64, y: f64) {
        self.add_weighted(x, y, 1.0);
    }

    pub fn add_weighted(&mut self, x: f64, y: f64, weight: f64) {
        match (Self::axis_bin(self.x_range, self.nx, x), Self::axis_bin(self.y_range, self.ny, y)) {
            (Some(i), Some(j)) => {
                self.counts[i * self.ny + j] += 1;
                self.weights[i * self.ny + j] += weight;
            }
            _ => {
                self.clipped += 1;
                self.clipped_weight += weight;
            }
        }
    }

    pub fn extend(&mut self, points: impl IntoIterator<Item = (f64, f64)>) {
        for (x, y) in points {
            self.add(x, y);
        }
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        self.counts[ix * self.ny + iy]
    }

    /// Counts in row-major order, x index outermost.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn clipped(&self) -> u64 {
        self.clipped
    }

    /// Weight sums in the layout of [`Histogram2D::counts`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn clipped_weight(&self) -> f64 {
        self.clipped_weight
    }

    /// All points added, including clipped ones.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.clipped
    }

    pub fn x_edges(&self) -> Vec<f64> {
        edges(self.x_range, self.nx)
    }

    pub fn y_edges(&self) -> Vec<f64> {
        edges(self.y_range, self.ny)
    }

    /// `((x_lo, x_hi), (y_lo, y_hi))` of bin `(ix, iy)`.
    pub fn bin_bounds(&self, ix: usize, iy: usize) -> ((f64, f64), (f64, f64)) {
        let (xe, ye) = (self.x_edges(), self.y_edges());
        ((xe[ix], xe[ix + 1]), (ye[iy], ye[iy + 1]))
    }

    pub fn marginal_x(&self) -> Vec<u64> {
        self.counts.chunks(self.ny).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<u64> {
        (0..self.ny).map(|j| (0..self.nx).map(|i| self.count(i, j)).sum()).collect()
    }

    fn marginal_weights(&self, axis: usize) -> Vec<f64> {
        if axis == 0 {
            self.weights.chunks(self.ny).map(|row| row.iter().sum()).collect()
        } else {
            (0..self.ny).map(|j| (0..self.nx).map(|i| self.weights[i * self.ny + j]).sum()).collect()
        }
    }

    /// `bin_x_lo,bin_x_hi,bin_y_lo,bin_y_hi,count,weight`, one row per bin.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let (xe, ye) = (self.x_edges(), self.y_edges());
        for i in 0..self.nx {
            for j in 0..self.ny {
                out.serialize(BinRow {
                    bin_x_lo: fmt_f64(xe[i]),
                    bin_x_hi: fmt_f64(xe[i + 1]),
                    bin_y_lo: fmt_f64(ye[j]),
                    bin_y_hi: fmt_f64(ye[j + 1]),
                    count: self.count(i, j),
                    weight: fmt_f64(self.weights[i * self.ny + j]),
                })
                .map_err(csv_err)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// `bin_lo,bin_hi,count,weight` for the x (`axis = 0`) or y marginal.
    pub fn write_marginal_csv<W: Write>(&self, axis: usize, w: W) -> Result<()> {
        let (e, c) = match axis {
            0 => (self.x_edges(), self.marginal_x()),
            1 => (self.y_edges(), self.marginal_y()),
            _ => return domain(format!("histogram axis must be 0 or 1, got {axis}")),
        };
        let wt = self.marginal_weights(axis);
        let mut out = csv::Writer::from_writer(w);
        for (k, count) in c.into_iter().enumerate() {
            let weight = fmt_f64(wt[k]);
            out.serialize(MarginalRow { bin_lo: fmt_f64(e[k]), bin_hi: fmt_f64(e[k + 1]), count, weight })
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Usage(format!("CSV error: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_and_clipping() {
        let mut h = Histogram2D::new((-1.0, 1.0), (0.0, 4.0), 2, 4).unwrap();
        h.extend([(-0.5, 0.5), (0.5, 3.9), (1.0, 1.0), (0.0, -0.1), (f64::NAN, 1.0), (-1.0, 0.0)]);
        assert_eq!(h.count(0, 0), 2);
        assert_eq!(h.count(1, 3), 1);
        assert_eq!(h.clipped(), 3);
        assert_eq!(h.total(), 6);
        assert_eq!(h.marginal_x(), vec![2, 1]);
        assert_eq!(h.marginal_y(), vec![2, 0, 0, 1]);
        assert_eq!(h.bin_bounds(1, 3), ((0.0, 1.0), (3.0, 4.0)));
        h.add_weighted(0.5, 3.5, 0.25);
        assert_eq!(h.weights()[7], 1.25);
        assert_eq!(h.clipped_weight(), 3.0);
    }

    #[test]
    fn csv_layout() {
        let mut h = Histogram2D::new((0.0, 1.0), (0.0, 1.0), 1, 2).unwrap();
        h.add(0.5, 0.75);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin_x_lo,bin_x_hi,bin_y_lo,bin_y_hi,count,weight");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with(",1,1.0000000000000000e0"));
        let mut m = Vec::new();
        h.write_marginal_csv(1, &mut m).unwrap();
        assert!(String::from_utf8(m).unwrap().starts_with("bin_lo,bin_hi,count,weight\n"));
        assert!(Histogram2D::new((1.0, 0.0), (0.0, 1.0), 1, 1).is_err());
    }
}
