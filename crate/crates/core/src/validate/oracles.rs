//! Quadrature oracles for the closed-form kernels: normalizations, marginal
//! identities, the flat-earth limit and bin masses of overshoot histograms.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{
    ball_hitting_density, double_density, double_scalar, green_halfspace, jump_density, overshoot_density,
    overshoot_density_conditioned, overshoot_scalar, pcr_scalar, triple_scalar, Barrier, Face, Point, StableParams,
};
use crate::numerics::special::{gamma_fn, unit_sphere_area};
use crate::numerics::{adaptive_quad, QuadResult, QuadSpec};
use crate::validate::hist::Histogram2D;

/// Quadrature estimate of a quantity with a known value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadCheck {
    pub value: f64,
    pub expected: f64,
    /// Absolute error bound reported by the quadrature.
    pub error_bound: f64,
}

impl QuadCheck {
    pub fn rel_error(&self) -> f64 {
        (self.value - self.expected).abs() / self.expected.abs()
    }

    pub fn rel_bound(&self) -> f64 {
        self.error_bound / self.expected.abs()
    }

    /// Within `rel_tol`, with a quadrature bound at least ten times tighter.
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.rel_error() <= rel_tol && self.rel_bound() * 10.0 <= rel_tol
    }
}

/// Collects the first error raised inside a quadrature integrand.
#[derive(Default)]
struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn quad(&self, r: Result<QuadResult>) -> (f64, f64) {
        match r {
            Ok(q) => (q.value, q.abs_error),
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        }
    }

    fn finish<T>(self, outer: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => outer,
        }
    }
}

/// Sums quadratures over consecutive pieces.
fn sum_pieces(f: &dyn Fn(f64) -> f64, pieces: &[QuadSpec]) -> Result<QuadResult> {
    let mut total = QuadResult { value: 0.0, abs_error: 0.0 };
    for p in pieces {
        let r = adaptive_quad(f, p)?;
        total.value += r.value;
        total.abs_error += r.abs_error;
    }
    Ok(total)
}

fn check(r: QuadResult, expected: f64) -> QuadCheck {
    QuadCheck { value: r.value, expected, error_bound: r.abs_error }
}

/// Turns an on-axis density ∝ (a² + |t|²)^{−d/2} at t = 0 into its integral over t ∈ R^{d−1}.
fn transverse_factor(a: f64, d: usize) -> Result<f64> {
    let half_d = d as f64 / 2.0;
    Ok(a.powi(d as i32) * std::f64::consts::PI.powf(half_d) / (gamma_fn(half_d)? * a))
}

const TOL: (f64, f64) = (1e-13, 1e-11);

/// ∫ pcr_density over the closest-reach point, from x = (1, 0, …) and level 0.
///
/// The lower half is integrated in the depth of the closest-reach point and
/// the upper half in its gap to x, so both singular ends are resolved exactly.
pub fn pcr_mass(params: &StableParams) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let slot = ErrorSlot::default();
    let mass =
        |gap: f64, hy: f64| slot.value(transverse_factor(gap, d).map(|t| pcr_scalar(gap, hy, gap * gap, params) * t));
    let lower = |hy: f64| mass(1.0 - hy, hy);
    let upper = |gap: f64| mass(gap, 1.0 - gap);
    let r0 = adaptive_quad(lower, &QuadSpec::new(0.0, 0.5).tolerances(TOL.0, TOL.1).singularities(-alpha / 2.0, 0.0));
    let r1 =
        adaptive_quad(upper, &QuadSpec::new(0.0, 0.5).tolerances(TOL.0, TOL.1).singularities(alpha / 2.0 - 1.0, 0.0));
    let r = slot.finish(add(r0, r1))?;
    Ok(check(r, 1.0))
}

fn add(a: Result<QuadResult>, b: Result<QuadResult>) -> Result<QuadResult> {
    let (a, b) = (a?, b?);
    Ok(QuadResult { value: a.value + b.value, abs_error: a.abs_error + b.abs_error })
}

/// C_{α,d} · π^{d/2+1} / (Γ(d/2) sin(απ/2)), which equals one.
pub fn pcr_constant_identity(params: &StableParams) -> Result<f64> {
    let d = params.dim() as f64;
    let pi = std::f64::consts::PI;
    Ok(params.constants().c * pi.powf(d / 2.0 + 1.0) / (gamma_fn(d / 2.0)? * (params.alpha() * pi / 2.0).sin()))
}

/// ∫ overshoot_density over the landing depth q, from x = (2, 0, …) across level 1.
pub fn overshoot_mass(params: &StableParams) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let slot = ErrorSlot::default();
    let f = |q: f64| {
        slot.value(transverse_factor(1.0 + q, d).map(|t| overshoot_scalar(1.0, q, (1.0 + q).powi(2), params) * t))
    };
    let spec =
        QuadSpec::new(0.0, f64::INFINITY).tolerances(TOL.0, TOL.1).singularities(-alpha / 2.0, -1.0 - alpha / 2.0);
    let r = adaptive_quad(f, &spec);
    let r = slot.finish(r)?;
    Ok(check(r, 1.0))
}

/// ∫ overshoot_density_conditioned across the +1 face from x = (2, 0, …); requires α < 1.
///
/// Integrated in the depth u = 1 − y¹: the plain density at exact depth times
/// the kernel's conditioning factor, which is smooth at the face.
pub fn conditioned_mass(params: &StableParams) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let x = Point::on_axis(2.0, d);
    let barrier = Face::Plus.barrier();
    let below_face = 1f64.next_down();
    let slot = ErrorSlot::default();
    let f = |u: f64| {
        let y = Point::on_axis((1.0 - u).min(below_face), d);
        let factor = overshoot_density_conditioned(&x, &y, Face::Plus, params)
            .and_then(|c| Ok(c / overshoot_density(&x, &y, &barrier, params)?));
        let plain = transverse_factor(1.0 + u, d).map(|t| overshoot_scalar(1.0, u, (1.0 + u).powi(2), params) * t);
        slot.value(factor.and_then(|c| Ok(c * plain?)))
    };
    let pieces = [
        QuadSpec::new(0.0, 1.0).tolerances(TOL.0, TOL.1).singularities(-alpha / 2.0, alpha - 1.0),
        QuadSpec::new(1.0, f64::INFINITY).tolerances(TOL.0, TOL.1).singularities(alpha - 1.0, alpha / 2.0 - 2.0),
    ];
    let r = sum_pieces(&f, &pieces);
    let r = slot.finish(r)?;
    Ok(check(r, 1.0))
}

/// Orthonormal pair in R^{d-1} whose first vector points along `dir` (any unit vector if `dir` = 0).
fn transverse_frame(dir: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = dir.len();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let e: Vec<f64> = if norm > 0.0 {
        dir.iter().map(|v| v / norm).collect()
    } else {
        (0..p).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    };
    if p < 2 {
        return (e, vec![0.0; p]);
    }
    let k = (0..p).min_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs())).unwrap_or(0);
    let mut f: Vec<f64> = (0..p).map(|i| if i == k { 1.0 } else { 0.0 } - e[k] * e[i]).collect();
    let norm_f = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    f.iter_mut().for_each(|v| *v /= norm_f);
    (e, f)
}

/// Radial integral along direction (cos θ, sin θ ·) from a start at depth `hx`.
///
/// `g(hy, ρ)` is the integrand including ρ^{d−1}. Directions pointing at the
/// level are parametrized by the landing depth hy = hx·τ so that depths near
/// the level stay exact.
#[allow(clippy::too_many_arguments)]
fn radial(
    slot: &ErrorSlot,
    hx: f64,
    c: f64,
    g: impl Fn(f64, f64) -> f64,
    at_level: f64,
    at_origin: f64,
    tail: f64,
    rel_tol: f64,
) -> f64 {
    let r = if c < 0.0 {
        let jac = hx / -c;
        let spec = QuadSpec::new(0.0, 1.0).tolerances(1e-300, rel_tol).singularities(at_level, at_origin);
        adaptive_quad(|tau| g(hx * tau, jac * (1.0 - tau)) * jac, &spec)
    } else {
        let spec = QuadSpec::new(0.0, f64::INFINITY).tolerances(1e-300, rel_tol).singularities(at_origin, tail);
        adaptive_quad(|rho| g(hx + rho * c, rho), &spec)
    };
    slot.quad(r).0
}

/// ∫∫ double_density over undershoot and overshoot, from x = (1, 0, …) and level 0.
///
/// The overshoot enters only through |z − y|^{−α−d}, whose integral over the
/// far half-space is π^{(d−1)/2} Γ((α+1)/2) / Γ((α+d)/2) · (y¹)^{−α} / α.
/// The undershoot is integrated over its depth and, inside, over the log of
/// its transverse radius, which keeps the near-diagonal plateau bounded.
pub fn double_mass(params: &StableParams) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let pi = std::f64::consts::PI;
    let z_const =
        pi.powf((d as f64 - 1.0) / 2.0) * gamma_fn((alpha + 1.0) / 2.0)? / gamma_fn((alpha + d as f64) / 2.0)?;
    let shell = unit_sphere_area(d - 1);
    let slot = ErrorSlot::default();
    let inner = |hy: f64| {
        let s2 = (1.0 - hy).powi(2);
        let g = |t: f64| {
            let rho = t.exp();
            slot.value(double_scalar(1.0, hy, s2 + rho * rho, 1.0, params)) * rho.powi(d as i32 - 1)
        };
        let spec = QuadSpec::new(f64::NEG_INFINITY, f64::INFINITY).tolerances(1e-300, 1e-12);
        slot.quad(adaptive_quad(g, &spec)).0 * z_const * hy.powf(-alpha) / alpha * shell
    };
    let e = (alpha - 1.0).min(-0.5);
    let pieces = [
        QuadSpec::new(0.0, 1.0).tolerances(TOL.0, 1e-10).singularities(-alpha / 2.0, e),
        QuadSpec::new(1.0, 2.0).tolerances(TOL.0, 1e-10).singularities(e, 0.0),
        QuadSpec::new(2.0, f64::INFINITY).tolerances(TOL.0, 1e-10).singularities(0.0, -1.0 - alpha / 2.0),
    ];
    let r = sum_pieces(&inner, &pieces);
    let r = slot.finish(r)?;
    Ok(check(r, 1.0))
}

/// ∫ triple_density dw compared with double_density at (x, y, z); level 0, direction down.
///
/// The transverse part of the closest-reach point is integrated in closed form
/// as a convolution of two Cauchy laws; its first coordinate numerically, in
/// the gap g below min(x¹, y¹).
pub fn triple_marginal(params: &StableParams, x: &Point, y: &Point, z: &Point) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let expected = double_density(x, y, z, &Barrier::down(0.0), params)?;
    if !(expected > 0.0) {
        return domain("marginal check needs an admissible triple with positive density");
    }
    let half_d = d as f64 / 2.0;
    let cauchy_mass = std::f64::consts::PI.powf(half_d) / gamma_fn(half_d)?;
    let delta2 = x.transverse_dist2(y);
    let yz = y.dist2(z);
    let top = x.first.min(y.first);
    let f = |g: f64| {
        let (a, b) = ((x.first - top) + g, (y.first - top) + g);
        let wy = b * b + delta2;
        let stripped = triple_scalar(a, b, a * a, wy, yz, params) * (a * a).powf(half_d) * wy.powf(half_d);
        stripped * cauchy_mass / (a * b) * (a + b) * ((a + b).powi(2) + delta2).powf(-half_d)
    };
    let spec = QuadSpec::new(0.0, top).tolerances(1e-300, 1e-10).singularities(alpha / 2.0 - 1.0, 0.0);
    Ok(check(adaptive_quad(f, &spec)?, expected))
}

/// ∫ double_density dy compared with overshoot_density at (x, z); level 0, direction down.
///
/// Polar coordinates around x: radius ρ, polar angle θ from the first axis and,
/// for d ≥ 3, the angle φ to the transverse direction of z − x.
pub fn double_marginal(params: &StableParams, x: &Point, z: &Point) -> Result<QuadCheck> {
    let d = params.dim();
    let alpha = params.alpha();
    let expected = overshoot_density(x, z, &Barrier::down(0.0), params)?;
    if !(expected > 0.0) || !(x.first > 0.0) {
        return domain("marginal check needs x above and z below the level");
    }
    let dir: Vec<f64> = z.transverse.iter().zip(&x.transverse).map(|(a, b)| a - b).collect();
    let (e, f) = transverse_frame(&dir);
    let (e, f) = (&e, &f);
    let slot = ErrorSlot::default();
    let slot_ref = &slot;
    let along = |s: f64, cphi: f64, sphi: f64| {
        let c = x.first;
        move |hy: f64, rho: f64| {
            let t2: f64 = (0..d - 1)
                .map(|i| (x.transverse[i] + rho * s * (cphi * e[i] + sphi * f[i]) - z.transverse[i]).powi(2))
                .sum();
            let yz = (hy - z.first).powi(2) + t2;
            slot_ref.value(double_scalar(c, hy, rho * rho, yz, params)) * rho.powi(d as i32 - 1)
        }
    };
    let tail = -alpha / 2.0 - d as f64 - 1.0;
    let half = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    let outer = if d == 2 {
        let g = |th: f64| radial(&slot, x.first, th.cos(), along(th.sin(), 1.0, 0.0), 0.0, alpha - 1.0, tail, 1e-10);
        let pieces =
            [QuadSpec::new(-pi, -half), QuadSpec::new(-half, 0.0), QuadSpec::new(0.0, half), QuadSpec::new(half, pi)]
                .map(|p| p.tolerances(1e-300, 1e-8));
        sum_pieces(&g, &pieces)
    } else {
        let sphere = unit_sphere_area(d - 2);
        let g = |th: f64| {
            let (c, s) = (th.cos(), th.sin());
            let h = |phi: f64| {
                radial(&slot, x.first, c, along(s, phi.cos(), phi.sin()), 0.0, alpha - 1.0, tail, 1e-7)
                    * phi.sin().powi(d as i32 - 3)
            };
            let spec = QuadSpec::new(0.0, pi).tolerances(1e-300, 1e-6);
            slot.quad(adaptive_quad(h, &spec)).0 * s.powi(d as i32 - 2) * sphere
        };
        let pieces = [QuadSpec::new(0.0, half), QuadSpec::new(half, pi)].map(|p| p.tolerances(1e-300, 1e-6));
        sum_pieces(&g, &pieces)
    };
    let r = slot.finish(outer)?;
    Ok(check(r, expected))
}

/// |double − green × jump| / double at one admissible triple; level 0, direction down.
pub fn factorization_error(params: &StableParams, x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let barrier = Barrier::down(0.0);
    let dd = double_density(x, y, z, &barrier, params)?;
    let v: Vec<f64> = z.coords().iter().zip(y.coords()).map(|(a, b)| a - b).collect();
    let gj = green_halfspace(x, y, &barrier, params)? * jump_density(&v, params)?;
    if !(dd > 0.0) {
        return domain("factorization check needs an admissible triple with positive density");
    }
    Ok((dd - gj).abs() / dd)
}

/// |ball / overshoot − 1| for the ball of radius R + r centred at −R e₁.
pub fn flat_earth_gap(params: &StableParams, x: &Point, y: &Point, level: f64, big_r: f64) -> Result<f64> {
    let center = Point::new(-big_r, vec![0.0; params.dim() - 1]);
    let ball = ball_hitting_density(x, y, &center, big_r + level, params)?;
    let half = overshoot_density(x, y, &Barrier::down(level), params)?;
    if !(half > 0.0) {
        return domain("flat-earth pair needs positive half-space density");
    }
    Ok((ball / half - 1.0).abs())
}

/// Joint density of the first two coordinates of the overshoot from (x1, 0, …)
/// across the downward barrier at `level`, with the other coordinates integrated out.
pub fn overshoot_marginal_2d(params: &StableParams, x1: f64, level: f64) -> Result<impl Fn(f64, f64) -> f64 + '_> {
    let d = params.dim();
    if d < 2 || !(x1 > level) {
        return domain("2-D overshoot marginal needs d ≥ 2 and a start above the level");
    }
    let half_d = d as f64 / 2.0;
    let fold = std::f64::consts::PI.powf(half_d - 1.0) / gamma_fn(half_d)?;
    let x = Point::on_axis(x1, d);
    let barrier = Barrier::down(level);
    Ok(move |y1: f64, t: f64| {
        if !(y1 < level) {
            return 0.0;
        }
        let mut z = Point::on_axis(y1, d);
        z.transverse[0] = t;
        let r2 = (x1 - y1).powi(2) + t * t;
        overshoot_density(&x, &z, &barrier, params).map_or(f64::NAN, |p| p * r2.powf(half_d) * fold / r2)
    })
}

/// Probability of every histogram bin under `density`, by nested quadrature.
///
/// `x_singular = Some((x0, e))` declares `density ~ |x − x0|^e` for bins with an edge at x0.
pub fn bin_masses(
    hist: &Histogram2D,
    density: impl Fn(f64, f64) -> f64,
    x_singular: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    let (nx, ny) = hist.shape();
    let (xe, ye) = (hist.x_edges(), hist.y_edges());
    let slot = ErrorSlot::default();
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let (x0, x1) = (xe[i], xe[i + 1]);
        let ends = match x_singular {
            Some((s, e)) if s == x0 => (e, 0.0),
            Some((s, e)) if s == x1 => (0.0, e),
            _ => (0.0, 0.0),
        };
        for j in 0..ny {
            let (y0, y1) = (ye[j], ye[j + 1]);
            let inner = |x: f64| {
                let spec = QuadSpec::new(y0, y1).tolerances(1e-14, 1e-8);
                slot.quad(adaptive_quad(|y| density(x, y), &spec)).0
            };
            let spec = QuadSpec::new(x0, x1).tolerances(1e-13, 1e-7).singularities(ends.0, ends.1);
            out.push(adaptive_quad(inner, &spec)?.value);
        }
    }
    slot.finish(Ok(out))
}
