//! Numerically tabulated CDFs with monotone cubic interpolation and quantile lookup.

use crate::error::{domain, Error, Result};
use crate::numerics::quad::{integrate_param, ParamMap, QuadResult, QuadSpec, MAX_PANELS};

/// Uniform knots per piece in the flattened parameter before refinement.
pub const DEFAULT_KNOTS: usize = 512;
/// Target interpolation error of the normalised CDF, checked at interval midpoints.
const REFINE_TOL: f64 = 1e-11;
/// Panel budget for a single knot interval.
const INTERVAL_PANELS: usize = 200;

/// Accepts a stalled integration whose error is already below `floor(estimate)`;
/// rounding in the density near a singular end can keep the strict target out of reach.
fn settle(r: Result<QuadResult>, floor: impl Fn(f64) -> f64) -> Result<QuadResult> {
    match r {
        Err(Error::Convergence { estimate, error_bound }) if error_bound <= floor(estimate) => {
            Ok(QuadResult { value: estimate, abs_error: error_bound })
        }
        other => other,
    }
}
const MAX_KNOTS_PER_PIECE: usize = 40_000;

#[derive(Clone, Debug)]
struct Piece {
    map: ParamMap,
    lower: f64,
    upper: f64,
    // knots in the flattened parameter s ∈ [0,1]
    knots: Vec<f64>,
    // global normalised CDF at each knot
    cdf: Vec<f64>,
    // limited Hermite slopes (dC/ds) at the two ends of each interval
    slopes: Vec<(f64, f64)>,
}

impl Piece {
    fn interval_of_param(&self, s: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= s);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    fn interval_of_cdf(&self, u: f64) -> usize {
        let i = self.cdf.partition_point(|&c| c <= u);
        i.clamp(1, self.cdf.len() - 1) - 1
    }

    fn hermite(&self, i: usize, theta: f64) -> (f64, f64) {
        let h = self.knots[i + 1] - self.knots[i];
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = self.slopes[i];
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * c0
            + (t3 - 2.0 * t2 + theta) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * c1
            + (t3 - t2) * h * m1;
        let deriv = (6.0 * t2 - 6.0 * theta) * (c0 - c1)
            + (3.0 * t2 - 4.0 * theta + 1.0) * h * m0
            + (3.0 * t2 - 2.0 * theta) * h * m1;
        (value, deriv)
    }

    fn cdf_at(&self, x: f64) -> f64 {
        let s = self.map.param_of(x);
        let i = self.interval_of_param(s);
        let h = self.knots[i + 1] - self.knots[i];
        let theta = ((s - self.knots[i]) / h).clamp(0.0, 1.0);
        self.hermite(i, theta).0.clamp(self.cdf[i], self.cdf[i + 1])
    }

    fn quantile(&self, u: f64) -> f64 {
        let i = self.interval_of_cdf(u);
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let theta = if c1 > c0 {
            let target = u.clamp(c0, c1);
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let mut th = (target - c0) / (c1 - c0);
            for _ in 0..100 {
                let (v, dv) = self.hermite(i, th);
                let r = v - target;
                if r > 0.0 {
                    hi = th;
                } else {
                    lo = th;
                }
                if r.abs() <= 1e-16 || hi - lo <= 1e-15 {
                    break;
                }
                let newton = th - r / dv;
                th = if dv > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            }
            th
        } else {
            0.5
        };
        let s = self.knots[i] + theta * (self.knots[i + 1] - self.knots[i]);
        self.map.eval(s).0.clamp(self.lower, self.upper)
    }
}

/// A normalised CDF tabulated on knots of a flattened parameter, one piece per
/// integration interval, with exact density slopes at every knot.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    pieces: Vec<Piece>,
    total_mass: f64,
}

struct RawInterval {
    s0: f64,
    s1: f64,
    mass: f64,
    g0: f64,
    g1: f64,
}

fn limited_slopes(c0: f64, c1: f64, h: f64, m0: f64, m1: f64) -> (f64, f64) {
    let delta = (c1 - c0) / h;
    if delta <= 0.0 {
        return (0.0, 0.0);
    }
    let (a, b) = (m0.max(0.0) / delta, m1.max(0.0) / delta);
    let norm = a * a + b * b;
    if norm > 9.0 {
        let tau = 3.0 / norm.sqrt();
        (tau * a * delta, tau * b * delta)
    } else {
        (m0.max(0.0), m1.max(0.0))
    }
}

fn hermite_mid(mass: f64, h: f64, m0: f64, m1: f64) -> f64 {
    let (m0, m1) = limited_slopes(0.0, mass, h, m0, m1);
    0.5 * mass + 0.125 * h * (m0 - m1)
}

impl TabulatedCdf {
    /// Builds a table over consecutive pieces `specs[i].upper == specs[i+1].lower`.
    pub fn from_pieces<F: Fn(f64) -> f64>(pdf: F, specs: &[QuadSpec]) -> Result<Self> {
        Self::from_pieces_with_knots(pdf, specs, DEFAULT_KNOTS)
    }

    pub fn from_pieces_with_knots<F: Fn(f64) -> f64>(pdf: F, specs: &[QuadSpec], knots: usize) -> Result<Self> {
        if specs.is_empty() {
            return domain("at least one integration piece is required");
        }
        if knots < 2 {
            return domain("at least two knots are required");
        }
        for w in specs.windows(2) {
            if w[0].upper != w[1].lower {
                return domain("CDF pieces must be contiguous");
            }
        }
        let mut raw = Vec::with_capacity(specs.len());
        let mut masses = Vec::with_capacity(specs.len());
        for spec in specs {
            let map = ParamMap::new(spec)?;
            let g = |s: f64| map.flat_integrand(&pdf, s);
            let whole = settle(integrate_param(&pdf, &map, 0.0, 1.0, f64::MIN_POSITIVE, 1e-12, MAX_PANELS), |v| {
                1e-9 * v.abs()
            })?;
            if !(whole.value.is_finite()) || whole.value < 0.0 {
                return domain("piece mass is negative or non-finite");
            }
            let abs_tol = (1e-15 * whole.value).max(f64::MIN_POSITIVE);
            let floor = 1e-9 * whole.value;
            let mass_of = |a: f64, b: f64| {
                settle(integrate_param(&pdf, &map, a, b, abs_tol, 1e-12, INTERVAL_PANELS), |_| floor).map(|r| r.value)
            };
            let edge_density = |s: f64| {
                // the flattened density is bounded at the ends; read its limit just inside
                let v = g(s.clamp(1e-10, 1.0 - 1e-10));
                if v.is_finite() {
                    Some(v)
                } else {
                    None
                }
            };
            let mut intervals: Vec<RawInterval> = Vec::new();
            let mut pending = Vec::new();
            let grid: Vec<f64> = (0..=knots).map(|i| i as f64 / knots as f64).collect();
            let gvals: Vec<Option<f64>> = grid.iter().map(|&s| edge_density(s)).collect();
            for i in (0..knots).rev() {
                let (s0, s1) = (grid[i], grid[i + 1]);
                let mass = mass_of(s0, s1)?;
                pending.push((s0, s1, mass, gvals[i], gvals[i + 1], 0usize));
            }
            let mut count = knots;
            while let Some((s0, s1, mass, g0, g1, depth)) = pending.pop() {
                let h = s1 - s0;
                let secant = mass / h;
                let (m0, m1) = (g0.unwrap_or(secant), g1.unwrap_or(secant));
                let mid = 0.5 * (s0 + s1);
                let can_split = depth < 60 && count < MAX_KNOTS_PER_PIECE && mid > s0 && mid < s1;
                if can_split && mass > 0.0 {
                    let left = mass_of(s0, mid)?;
                    let right = mass_of(mid, s1)?;
                    let predicted = hermite_mid(mass, h, m0, m1);
                    let g_mid = edge_density(mid);
                    if (predicted - left).abs() > REFINE_TOL * whole.value {
                        count += 1;
                        pending.push((mid, s1, right, g_mid, g1, depth + 1));
                        pending.push((s0, mid, left, g0, g_mid, depth + 1));
                        continue;
                    }
                }
                intervals.push(RawInterval { s0, s1, mass, g0: m0, g1: m1 });
            }
            raw.push((map, spec.lower, spec.upper, intervals));
            masses.push(intervals_mass(&raw.last().unwrap().3));
        }
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return domain("density has zero or non-finite total mass");
        }
        let mut pieces = Vec::with_capacity(raw.len());
        let mut running = 0.0;
        for (map, lower, upper, intervals) in raw {
            let mut knots_s = Vec::with_capacity(intervals.len() + 1);
            let mut cdf = Vec::with_capacity(intervals.len() + 1);
            let mut slopes = Vec::with_capacity(intervals.len());
            knots_s.push(intervals[0].s0);
            cdf.push(running / total);
            for iv in &intervals {
                let c0 = running / total;
                running += iv.mass;
                let c1 = running / total;
                knots_s.push(iv.s1);
                cdf.push(c1);
                slopes.push(limited_slopes(c0, c1, iv.s1 - iv.s0, iv.g0 / total, iv.g1 / total));
            }
            pieces.push(Piece { map, lower, upper, knots: knots_s, cdf, slopes });
        }
        // pin the last value exactly
        if let Some(last) = pieces.last_mut() {
            *last.cdf.last_mut().unwrap() = 1.0;
        }
        Ok(Self { pieces, total_mass: total })
    }

    /// Lower end of the support.
    pub fn lower(&self) -> f64 {
        self.pieces[0].lower
    }

    /// Upper end of the support.
    pub fn upper(&self) -> f64 {
        self.pieces.last().unwrap().upper
    }

    /// Integral of the unnormalised density used to build the table.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Number of knots across all pieces.
    pub fn knot_count(&self) -> usize {
        self.pieces.iter().map(|p| p.knots.len()).sum()
    }

    /// Concatenated knot abscissae mapped back to the support, with their CDF values.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for p in &self.pieces {
            for (s, c) in p.knots.iter().zip(&p.cdf) {
                out.push((p.map.eval(*s).0.clamp(p.lower, p.upper), *c));
            }
        }
        out
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return 0.0;
        }
        if x >= self.upper() {
            return 1.0;
        }
        let idx = self.pieces.partition_point(|p| p.upper <= x).min(self.pieces.len() - 1);
        self.pieces[idx].cdf_at(x)
    }

    /// Smallest `x` with `cdf(x) = u`, for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let idx = self.pieces.partition_point(|p| *p.cdf.last().unwrap() < u).min(self.pieces.len() - 1);
        self.pieces[idx].quantile(u)
    }
}

fn intervals_mass(intervals: &[RawInterval]) -> f64 {
    intervals.iter().map(|iv| iv.mass).sum()
}

/// Tabulates the normalised CDF of `pdf_unnormalized` over `spec`.
pub fn build_inverse_cdf<F: Fn(f64) -> f64>(pdf_unnormalized: F, spec: &QuadSpec) -> Result<TabulatedCdf> {
    TabulatedCdf::from_pieces(pdf_unnormalized, std::slice::from_ref(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn uniform_quantile() {
        let t = build_inverse_cdf(|_| 1.0, &QuadSpec::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(t.quantile(0.25), 0.25, epsilon = 1e-12);
        assert_relative_eq!(t.cdf(0.8), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn inverse_sqrt_quantile() {
        let t = build_inverse_cdf(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0)).unwrap();
        assert_relative_eq!(t.quantile(0.5), 0.25, epsilon = 1e-9);
        assert_relative_eq!(t.total_mass(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn arcsine_symmetry() {
        let pdf = |u: f64| 1.0 / (PI * (u * (1.0 - u)).sqrt());
        let t = build_inverse_cdf(pdf, &QuadSpec::new(0.0, 1.0).singularities(-0.5, -0.5)).unwrap();
        assert!((t.quantile(0.5) - 0.5).abs() < 1e-9, "median {}", t.quantile(0.5));
        for &u in &[0.01, 0.2, 0.7, 0.999] {
            let exact = (PI * u / 2.0).sin().powi(2);
            assert!((t.quantile(u) - exact).abs() < 1e-9, "u={u}");
        }
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            let exact = 2.0 / PI * x.sqrt().asin();
            assert!((t.cdf(x) - exact).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn half_infinite_cauchy_tail() {
        // standard Cauchy restricted to (-∞, 0]
        let t = build_inverse_cdf(|x| 1.0 / (1.0 + x * x), &QuadSpec::new(f64::NEG_INFINITY, 0.0)).unwrap();
        for &u in &[1e-4, 0.1, 0.5, 0.9] {
            let exact = (PI / 2.0 * (u - 1.0)).tan();
            assert!((t.quantile(u) - exact).abs() <= 1e-8 * exact.abs().max(1.0), "u={u}");
        }
    }

    #[test]
    fn multi_piece_table() {
        // |x|^{-1/2} on (-1, 0) ∪ (0, 1) split at the singular point
        let pdf = |x: f64| x.abs().powf(-0.5);
        let specs =
            [QuadSpec::new(-1.0, 0.0).singularities(0.0, -0.5), QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0)];
        let t = TabulatedCdf::from_pieces(pdf, &specs).unwrap();
        assert_relative_eq!(t.total_mass(), 4.0, epsilon = 1e-11);
        assert_relative_eq!(t.quantile(0.5), 0.0, epsilon = 1e-12);
        assert_relative_eq!(t.quantile(0.75), 0.25, epsilon = 1e-9);
        assert_relative_eq!(t.quantile(0.25), -0.25, epsilon = 1e-9);
    }

    #[test]
    fn zero_mass_rejected() {
        assert!(build_inverse_cdf(|_| 0.0, &QuadSpec::new(0.0, 1.0)).is_err());
    }
}
