//! Globally adaptive Gauss–Kronrod quadrature with declared endpoint singularities.
//!
//! Every integral is carried to the unit parameter interval `s ∈ [0, 1]` by a
//! [`ParamMap`]: an infinite end is folded in with `t/(1-t)` (or its mirror), and
//! a power-law endpoint behaviour `|x - end|^e` is flattened by `t = s^{1/(1+e)}`
//! on the half of the parameter interval touching that end. Panels are then
//! bisected by largest error estimate until the tolerance is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Default absolute tolerance for scalar quadrature.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default relative tolerance for scalar quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Panel budget before a convergence error is raised.
pub const MAX_PANELS: usize = 20_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Integration interval, tolerances and endpoint behaviour.
///
/// At a finite end the exponent `e > -1` declares `f(x) ~ |x - end|^e`. At an
/// infinite end it declares the tail decay `f(x) ~ |x|^e` and must satisfy
/// `e < -1`; without a declaration an infinite end is assumed to decay like `|x|^-2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSpec {
    pub lower: f64,
    pub upper: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub singularity_exponents: Option<(f64, f64)>,
}

impl QuadSpec {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper, abs_tol: DEFAULT_ABS_TOL, rel_tol: DEFAULT_REL_TOL, singularity_exponents: None }
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn singularities(mut self, at_lower: f64, at_upper: f64) -> Self {
        self.singularity_exponents = Some((at_lower, at_upper));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_nan() || self.upper.is_nan() || !(self.lower < self.upper) {
            return domain(format!(
                "quadrature bounds must satisfy lower < upper, got [{}, {}]",
                self.lower, self.upper
            ));
        }
        if self.lower == f64::INFINITY || self.upper == f64::NEG_INFINITY {
            return domain("quadrature bounds point the wrong way at infinity");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if let Some((e0, e1)) = self.singularity_exponents {
            for (e, end) in [(e0, self.lower), (e1, self.upper)] {
                let ok = if end.is_finite() { e > -1.0 } else { e < -1.0 };
                if !ok || !e.is_finite() {
                    return domain(format!("singularity exponent {e} is not integrable at endpoint {end}"));
                }
            }
        }
        Ok(())
    }
}

/// Result of a quadrature: estimate and absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Span {
    Finite { lo: f64, hi: f64 },
    LowerInfinite { hi: f64 },
    UpperInfinite { lo: f64 },
}

/// Monotone increasing map from `s ∈ [0,1]` onto the integration interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamMap {
    span: Span,
    // exponents of the power substitution on each half of [0,1]
    p0: f64,
    p1: f64,
}

impl ParamMap {
    /// Builds the map for one- or zero-sided infinite intervals.
    pub fn new(spec: &QuadSpec) -> Result<Self> {
        spec.validate()?;
        let (e_lo, e_hi) = spec.singularity_exponents.unwrap_or((
            if spec.lower.is_finite() { 0.0 } else { -2.0 },
            if spec.upper.is_finite() { 0.0 } else { -2.0 },
        ));
        let (span, et0, et1) = match (spec.lower.is_finite(), spec.upper.is_finite()) {
            (true, true) => (Span::Finite { lo: spec.lower, hi: spec.upper }, e_lo, e_hi),
            (false, true) => (Span::LowerInfinite { hi: spec.upper }, -e_lo - 2.0, e_hi),
            (true, false) => (Span::UpperInfinite { lo: spec.lower }, e_lo, -e_hi - 2.0),
            (false, false) => return domain("ParamMap needs at least one finite endpoint"),
        };
        Ok(Self { span, p0: 1.0 / (1.0 + et0), p1: 1.0 / (1.0 + et1) })
    }

    /// Returns `(t, 1 - t, dt/ds)` with the complement kept exact near `t = 1`.
    fn power_stage(&self, s: f64) -> (f64, f64, f64) {
        if s <= 0.5 {
            let r = 2.0 * s;
            let t = 0.5 * r.powf(self.p0);
            (t, 1.0 - t, self.p0 * r.powf(self.p0 - 1.0))
        } else {
            let r = 2.0 * (1.0 - s);
            let c = 0.5 * r.powf(self.p1);
            (1.0 - c, c, self.p1 * r.powf(self.p1 - 1.0))
        }
    }

    /// Maps `s` to `(x, dx/ds)`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let (t, tc, dts) = self.power_stage(s);
        match self.span {
            Span::Finite { lo, hi } => {
                let x = if t <= 0.5 { lo + (hi - lo) * t } else { hi - (hi - lo) * tc };
                (x, (hi - lo) * dts)
            }
            Span::LowerInfinite { hi } => (hi - tc / t, dts / (t * t)),
            Span::UpperInfinite { lo } => (lo + t / tc, dts / (tc * tc)),
        }
    }

    /// `f(x(s)) · dx/ds`, the integrand seen in the flattened parameter.
    ///
    /// Near a singular end the abscissa can round onto the endpoint itself; the
    /// flattened integrand is bounded there, so it is read off just inside instead.
    pub fn flat_integrand<F: Fn(f64) -> f64>(&self, f: &F, s: f64) -> f64 {
        let (x, jac) = self.eval(s);
        if jac == 0.0 {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            return 0.0;
        }
        let g = v * jac;
        if g.is_finite() {
            return g;
        }
        let (end, sign) = if s < 0.5 { (0.0, 1.0) } else { (1.0, -1.0) };
        let mut offset = (s - end).abs().max(f64::MIN_POSITIVE);
        for _ in 0..1100 {
            offset *= 2.0;
            if offset >= 0.5 {
                break;
            }
            let (x, jac) = self.eval(end + sign * offset);
            let g = f(x) * jac;
            if g.is_finite() {
                return g;
            }
        }
        g
    }

    /// Inverse of [`ParamMap::eval`]; `x` is clamped onto the interval.
    pub fn param_of(&self, x: f64) -> f64 {
        let (t, tc) = match self.span {
            Span::Finite { lo, hi } => {
                let x = x.clamp(lo, hi);
                ((x - lo) / (hi - lo), (hi - x) / (hi - lo))
            }
            Span::LowerInfinite { hi } => {
                let w = (hi - x).max(0.0);
                if w.is_infinite() {
                    (0.0, 1.0)
                } else {
                    (1.0 / (1.0 + w), w / (1.0 + w))
                }
            }
            Span::UpperInfinite { lo } => {
                let w = (x - lo).max(0.0);
                if w.is_infinite() {
                    (1.0, 0.0)
                } else {
                    (w / (1.0 + w), 1.0 / (1.0 + w))
                }
            }
        };
        if t <= 0.5 {
            0.5 * (2.0 * t).powf(1.0 / self.p0)
        } else {
            1.0 - 0.5 * (2.0 * tc).powf(1.0 / self.p1)
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub(crate) fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kron.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kron * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kron - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Adaptive integration of `f` over the parameter interval `[s0, s1] ⊂ [0,1]` of `map`.
pub(crate) fn integrate_param<F: Fn(f64) -> f64>(
    f: F,
    map: &ParamMap,
    s0: f64,
    s1: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    let mut g = |s: f64| map.flat_integrand(&f, s);
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mid = if s0 < 0.5 && s1 > 0.5 { Some(0.5) } else { None };
    let edges: Vec<(f64, f64)> = match mid {
        Some(m) => vec![(s0, m), (m, s1)],
        None => vec![(s0, s1)],
    };
    let mut total = 0.0;
    let mut total_err = 0.0;
    for (a, b) in edges {
        let (v, e) = gk15(&mut g, a, b);
        total += v;
        total_err += e;
        heap.push(Panel { a, b, value: v, error: e });
    }
    if !total.is_finite() || !total_err.is_finite() {
        return domain("integrand produced a non-finite value");
    }
    let mut panels = heap.len();
    let mut last_finite = (total, total_err);
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            // blow-up under refinement signals a divergent integral
            return Err(Error::Convergence { estimate: last_finite.0, error_bound: f64::INFINITY });
        }
        last_finite = (total, total_err);
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Convergence { estimate: total, error_bound: total_err });
        };
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) || (worst.b - worst.a) < 4.0 * f64::EPSILON * worst.b.abs().max(1e-300) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        if panels >= max_panels {
            return Err(Error::Convergence { estimate: total, error_bound: total_err });
        }
        let (v1, e1) = gk15(&mut g, worst.a, m);
        let (v2, e2) = gk15(&mut g, m, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
        panels += 1;
    }
    // recompute sums to shed accumulated cancellation from incremental updates
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
    let abs_error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_error;
    Ok(QuadResult { value, abs_error })
}

/// Integrates `f` over `spec`'s interval to `max(abs_tol, rel_tol·|value|)`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, spec: &QuadSpec) -> Result<QuadResult> {
    quad_dyn(&f, spec)
}

fn quad_dyn(f: &dyn Fn(f64) -> f64, spec: &QuadSpec) -> Result<QuadResult> {
    spec.validate()?;
    if !spec.lower.is_finite() && !spec.upper.is_finite() {
        let (e_lo, e_hi) = spec.singularity_exponents.unwrap_or((-2.0, -2.0));
        let left = QuadSpec { upper: 0.0, singularity_exponents: Some((e_lo, 0.0)), ..spec.clone() };
        let right = QuadSpec { lower: 0.0, singularity_exponents: Some((0.0, e_hi)), ..spec.clone() };
        let l = quad_dyn(f, &QuadSpec { abs_tol: spec.abs_tol / 2.0, ..left })?;
        let r = quad_dyn(f, &QuadSpec { abs_tol: spec.abs_tol / 2.0, ..right })?;
        return Ok(QuadResult { value: l.value + r.value, abs_error: l.abs_error + r.abs_error });
    }
    let map = ParamMap::new(spec)?;
    integrate_param(f, &map, 0.0, 1.0, spec.abs_tol, spec.rel_tol, MAX_PANELS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn inverse_sqrt_with_declared_singularity() {
        let r = adaptive_quad(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0)).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_sqrt_without_declaration_still_converges() {
        let r = adaptive_quad(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).tolerances(1e-9, 1e-9)).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn sine_and_log() {
        let r = adaptive_quad(f64::sin, &QuadSpec::new(0.0, PI)).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
        let r = adaptive_quad(f64::ln, &QuadSpec::new(0.0, 1.0).singularities(-0.01, 0.0)).unwrap();
        assert_relative_eq!(r.value, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn half_infinite_tails() {
        // ∫_{-∞}^0 dx / (1 + x²) = π/2
        let r = adaptive_quad(|x| 1.0 / (1.0 + x * x), &QuadSpec::new(f64::NEG_INFINITY, 0.0)).unwrap();
        assert_relative_eq!(r.value, PI / 2.0, epsilon = 1e-11);
        // ∫_1^∞ x^{-1.3} dx = 1/0.3
        let r = adaptive_quad(|x| x.powf(-1.3), &QuadSpec::new(1.0, f64::INFINITY).singularities(0.0, -1.3)).unwrap();
        assert_relative_eq!(r.value, 1.0 / 0.3, max_relative = 1e-10);
        let r = adaptive_quad(|x| (-x * x).exp(), &QuadSpec::new(f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert_relative_eq!(r.value, PI.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn map_round_trips() {
        let specs = [
            QuadSpec::new(-2.0, 3.0).singularities(-0.4, 0.7),
            QuadSpec::new(f64::NEG_INFINITY, 1.0).singularities(-1.7, -0.25),
            QuadSpec::new(0.5, f64::INFINITY).singularities(0.3, -2.5),
        ];
        for spec in &specs {
            let map = ParamMap::new(spec).unwrap();
            for i in 1..200 {
                let s = i as f64 / 200.0;
                let (x, jac) = map.eval(s);
                assert!(jac > 0.0);
                assert_relative_eq!(map.param_of(x), s, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(QuadSpec::new(1.0, 0.0).validate().is_err());
        assert!(QuadSpec::new(0.0, 1.0).singularities(-1.0, 0.0).validate().is_err());
        assert!(QuadSpec::new(f64::NEG_INFINITY, 0.0).singularities(-0.5, 0.0).validate().is_err());
        assert!(QuadSpec::new(0.0, 1.0).tolerances(0.0, 1e-3).validate().is_err());
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        // 1/x on (0,1] is not integrable; the error must carry the running estimate
        let err = adaptive_quad(|x| 1.0 / x, &QuadSpec::new(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }), "{err:?}");
    }
}
