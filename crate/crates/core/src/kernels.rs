//! Closed-form first-passage densities, potentials and Green functions of the
//! isotropic α-stable process across a hyperplane `{x : x¹ = r}`.
//!
//! Arguments strictly outside a kernel's support evaluate to `0`; points on a
//! barrier or coincident points where a kernel has a pole are domain errors.
//! Up-crossing kernels are the mirror images of the down-crossing ones under
//! negation of the first coordinate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::special::gamma_positive;
use crate::numerics::{incomplete_j, stable_constants, StableConstants};

/// Scaling index α ∈ (0, 2) and dimension d ≥ 1, with the kernel constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableParams {
    alpha: f64,
    dim: usize,
    #[serde(skip)]
    constants: StableConstants,
}

impl StableParams {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("alpha must lie in (0,2), got {alpha}"));
        }
        if dim == 0 {
            return domain("dimension must be at least 1");
        }
        Ok(Self { alpha, dim, constants: stable_constants(alpha, dim)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constants(&self) -> &StableConstants {
        &self.constants
    }

    /// Same α in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.alpha, dim)
    }
}

impl<'de> Deserialize<'de> for StableParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            dim: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        StableParams::new(raw.alpha, raw.dim).map_err(serde::de::Error::custom)
    }
}

/// A point of R^d split into the coordinate normal to the barrier and the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub first: f64,
    pub transverse: Vec<f64>,
}

impl Point {
    pub fn new(first: f64, transverse: Vec<f64>) -> Self {
        Self { first, transverse }
    }

    /// `coords[0]` is the first coordinate. Panics on an empty slice.
    pub fn from_coords(coords: &[f64]) -> Self {
        Self { first: coords[0], transverse: coords[1..].to_vec() }
    }

    /// The point `(first, 0, …, 0)` in dimension `dim`.
    pub fn on_axis(first: f64, dim: usize) -> Self {
        Self { first, transverse: vec![0.0; dim.saturating_sub(1)] }
    }

    pub fn dim(&self) -> usize {
        1 + self.transverse.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.first);
        v.extend_from_slice(&self.transverse);
        v
    }

    pub fn transverse_dist2(&self, other: &Point) -> f64 {
        self.transverse.iter().zip(&other.transverse).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let d = self.first - other.first;
        d * d + self.transverse_dist2(other)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Which way the first coordinate crosses the barrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// First time the first coordinate goes below the level.
    Down,
    /// First time the first coordinate goes above the level.
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub level: f64,
    pub direction: Direction,
}

impl Barrier {
    pub fn down(level: f64) -> Self {
        Self { level, direction: Direction::Down }
    }

    pub fn up(level: f64) -> Self {
        Self { level, direction: Direction::Up }
    }

    /// Signed distance of `x1` from the barrier, positive on the pre-crossing side.
    pub fn pre_depth(&self, x1: f64) -> f64 {
        match self.direction {
            Direction::Down => x1 - self.level,
            Direction::Up => self.level - x1,
        }
    }

    /// Signed distance of `z1` beyond the barrier, positive on the post-crossing side.
    pub fn post_depth(&self, z1: f64) -> f64 {
        -self.pre_depth(z1)
    }
}

/// The two faces of the slab (−1, 1) × R^{d−1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    /// Face at +1, crossed downwards from above.
    #[serde(rename = "+1")]
    Plus,
    /// Face at −1, crossed upwards from below.
    #[serde(rename = "-1")]
    Minus,
}

impl Face {
    pub fn barrier(self) -> Barrier {
        match self {
            Face::Plus => Barrier::down(1.0),
            Face::Minus => Barrier::up(-1.0),
        }
    }

    pub fn level(self) -> f64 {
        self.barrier().level
    }

    /// +1.0 or −1.0.
    pub fn sign(self) -> f64 {
        self.level()
    }

    pub fn opposite(self) -> Face {
        match self {
            Face::Plus => Face::Minus,
            Face::Minus => Face::Plus,
        }
    }

    /// Face a walk standing at `x1` (outside the closed slab) will cross next.
    pub fn facing(x1: f64) -> Option<Face> {
        if x1 > 1.0 {
            Some(Face::Plus)
        } else if x1 < -1.0 {
            Some(Face::Minus)
        } else {
            None
        }
    }
}

fn check_dim(params: &StableParams, points: &[&Point]) -> Result<()> {
    for p in points {
        if p.dim() != params.dim() {
            return domain(format!("point has dimension {}, parameters have {}", p.dim(), params.dim()));
        }
    }
    Ok(())
}

fn require_pre_side(barrier: &Barrier, x: &Point) -> Result<f64> {
    let h = barrier.pre_depth(x.first);
    if !(h > 0.0) {
        return domain(format!(
            "starting point first coordinate {} is not strictly on the pre-crossing side of level {}",
            x.first, barrier.level
        ));
    }
    Ok(h)
}

/// Density of the point of closest reach before the first down-crossing of level 0.
pub fn pcr_density(x: &Point, y: &Point, params: &StableParams) -> Result<f64> {
    pcr_density_at(x, y, &Barrier::down(0.0), params)
}

/// Point of closest reach for a general barrier, by translation and reflection.
pub fn pcr_density_at(x: &Point, y: &Point, barrier: &Barrier, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, y])?;
    let hx = require_pre_side(barrier, x)?;
    let hy = barrier.pre_depth(y.first);
    if hy == 0.0 {
        return domain("closest-reach point on the barrier is a pole of the density");
    }
    if hy < 0.0 || hy >= hx {
        return Ok(0.0);
    }
    Ok(pcr_scalar(hx - hy, hy, x.dist2(y), params))
}

/// Closest-reach density from the gap hx − hy, the depth hy and |x − y|².
pub(crate) fn pcr_scalar(gap: f64, hy: f64, dist2: f64, params: &StableParams) -> f64 {
    let a = params.alpha() / 2.0;
    params.constants().c * gap.powf(a) * hy.powf(-a) * dist2.powf(-(params.dim() as f64) / 2.0)
}

/// Joint density of closest-reach point `w`, undershoot `y` and overshoot `z`.
pub fn triple_density(
    x: &Point,
    w: &Point,
    y: &Point,
    z: &Point,
    barrier: &Barrier,
    params: &StableParams,
) -> Result<f64> {
    check_dim(params, &[x, w, y, z])?;
    let hx = require_pre_side(barrier, x)?;
    let hw = barrier.pre_depth(w.first);
    let hy = barrier.pre_depth(y.first);
    let hz = barrier.post_depth(z.first);
    if hw == 0.0 || hz == 0.0 || hy == 0.0 {
        return domain("argument lies on the barrier");
    }
    let (xw, wy, yz) = (x.dist2(w), w.dist2(y), y.dist2(z));
    if xw == 0.0 || wy == 0.0 || yz == 0.0 {
        return domain("coincident points are a pole of the triple law");
    }
    if !(hx > hw && hw > 0.0 && hy > hw && hz > 0.0) {
        return Ok(0.0);
    }
    Ok(triple_scalar(hx - hw, hy - hw, xw, wy, yz, params))
}

/// Triple density from the gaps hx − hw, hy − hw and the squared distances |x−w|², |w−y|², |y−z|².
pub(crate) fn triple_scalar(gap_x: f64, gap_y: f64, xw: f64, wy: f64, yz: f64, params: &StableParams) -> f64 {
    let a = params.alpha() / 2.0;
    let half_d = params.dim() as f64 / 2.0;
    params.constants().a
        * gap_x.powf(a)
        * xw.powf(-half_d)
        * gap_y.powf(a)
        * wy.powf(-half_d)
        * yz.powf(-(params.alpha() + params.dim() as f64) / 2.0)
}

/// ζ = 4 (x¹−r)(y¹−r) / |x−y|² for points on the pre-crossing side.
pub fn zeta(hx: f64, hy: f64, dist2: f64) -> f64 {
    4.0 * hx * hy / dist2
}

/// Green function of the process killed on crossing the barrier.
pub fn green_halfspace(x: &Point, y: &Point, barrier: &Barrier, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, y])?;
    let hx = require_pre_side(barrier, x)?;
    let hy = barrier.pre_depth(y.first);
    let dist2 = x.dist2(y);
    if dist2 == 0.0 {
        return domain("Green function has a pole at coincident points");
    }
    if hy <= 0.0 {
        return Ok(0.0);
    }
    green_scalar(hx, hy, dist2, params)
}

pub(crate) fn green_scalar(hx: f64, hy: f64, dist2: f64, params: &StableParams) -> Result<f64> {
    let j = incomplete_j(zeta(hx, hy, dist2), params.alpha(), params.dim())?;
    Ok(params.constants().e * dist2.powf((params.alpha() - params.dim() as f64) / 2.0) * j)
}

/// Joint density of undershoot `y` and overshoot `z`.
pub fn double_density(x: &Point, y: &Point, z: &Point, barrier: &Barrier, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, y, z])?;
    let hx = require_pre_side(barrier, x)?;
    let hy = barrier.pre_depth(y.first);
    let hz = barrier.post_depth(z.first);
    if hy == 0.0 || hz == 0.0 {
        return domain("argument lies on the barrier");
    }
    let xy = x.dist2(y);
    if xy == 0.0 {
        return domain("undershoot at the starting point is a pole of the density");
    }
    if hy < 0.0 || hz < 0.0 {
        return Ok(0.0);
    }
    double_scalar(hx, hy, xy, y.dist2(z), params)
}

/// Double density from the depths, |x − y|² and |y − z|².
pub(crate) fn double_scalar(hx: f64, hy: f64, xy: f64, yz: f64, params: &StableParams) -> Result<f64> {
    let d = params.dim() as f64;
    let alpha = params.alpha();
    let j = incomplete_j(zeta(hx, hy, xy), alpha, params.dim())?;
    Ok(params.constants().b * xy.powf((alpha - d) / 2.0) * j * yz.powf(-(alpha + d) / 2.0))
}

/// Density of the overshoot `z` at the first crossing.
pub fn overshoot_density(x: &Point, z: &Point, barrier: &Barrier, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, z])?;
    let hx = require_pre_side(barrier, x)?;
    let hz = barrier.post_depth(z.first);
    if hz == 0.0 {
        return domain("overshoot on the barrier is a pole of the density");
    }
    if hz < 0.0 {
        return Ok(0.0);
    }
    Ok(overshoot_scalar(hx, hz, x.dist2(z), params))
}

pub(crate) fn overshoot_scalar(hx: f64, hz: f64, dist2: f64, params: &StableParams) -> f64 {
    let a = params.alpha() / 2.0;
    params.constants().c * dist2.powf(-(params.dim() as f64) / 2.0) * (hx / hz).powf(a)
}

/// Overshoot density across a slab face under the measure conditioning the
/// first coordinate to be absorbed at 0 (α ∈ (0,1)).
///
/// The h-factor |y¹|^{α−1}/|x¹|^{α−1} is anchored at the origin, not at the face.
pub fn overshoot_density_conditioned(x: &Point, y: &Point, face: Face, params: &StableParams) -> Result<f64> {
    let alpha = params.alpha();
    if !(alpha < 1.0) {
        return domain(format!("the conditioned measure requires alpha in (0,1), got {alpha}"));
    }
    let plain = overshoot_density(x, y, &face.barrier(), params)?;
    if plain == 0.0 {
        return Ok(0.0);
    }
    if y.first == 0.0 {
        return domain("conditioned overshoot density has a pole at first coordinate 0");
    }
    Ok(plain * (y.first.abs() / x.first.abs()).powf(alpha - 1.0))
}

/// Density of the centred (p = t.len())-dimensional Cauchy law with scale γ.
pub fn cauchy_density(t: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("Cauchy scale must be positive, got {gamma}"));
    }
    if t.is_empty() {
        return domain("Cauchy density needs at least one coordinate");
    }
    let r2: f64 = t.iter().map(|v| v * v).sum();
    Ok(cauchy_scalar(t.len(), gamma, r2))
}

pub(crate) fn cauchy_scalar(p: usize, gamma: f64, r2: f64) -> f64 {
    let half_d = (p as f64 + 1.0) / 2.0;
    gamma_positive(half_d) / PI.powf(half_d) * gamma * (gamma * gamma + r2).powf(-half_d)
}

/// Lévy density of the jump measure, K_{α,d} |v|^{−α−d}.
pub fn jump_density(v: &[f64], params: &StableParams) -> Result<f64> {
    if v.len() != params.dim() {
        return domain(format!("jump vector has dimension {}, parameters have {}", v.len(), params.dim()));
    }
    let r2: f64 = v.iter().map(|c| c * c).sum();
    if r2 == 0.0 {
        return domain("jump density is not defined at the origin");
    }
    Ok(params.constants().k * r2.powf(-(params.alpha() + params.dim() as f64) / 2.0))
}

/// Selects one of the ladder potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderKind {
    /// Renewal density of the ascending ladder process, evaluated at a point above x.
    Ascending,
    /// One-dimensional occupation density of the descending ladder height at a level v ≤ x¹.
    DescendingRenewal,
}

#[derive(Clone, Copy, Debug)]
pub enum LadderArg<'a> {
    Point(&'a Point),
    Scalar(f64),
}

pub fn ladder_potentials(kind: LadderKind, x: &Point, arg: LadderArg<'_>, params: &StableParams) -> Result<f64> {
    match (kind, arg) {
        (LadderKind::Ascending, LadderArg::Point(z)) => ascending_ladder_potential(x, z, params),
        (LadderKind::DescendingRenewal, LadderArg::Scalar(v)) => descending_renewal_density(x.first, v, params.alpha()),
        _ => domain("ladder argument does not match the requested kind"),
    }
}

fn ladder_prefactor(params: &StableParams) -> f64 {
    let half_d = params.dim() as f64 / 2.0;
    gamma_positive(half_d) / (PI.powf(half_d) * gamma_positive(params.alpha() / 2.0))
}

/// Γ(d/2)/(π^{d/2}Γ(α/2)) (z¹−x¹)^{α/2} / |x−z|^d for z¹ > x¹.
pub fn ascending_ladder_potential(x: &Point, z: &Point, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, z])?;
    let rise = z.first - x.first;
    if !(rise > 0.0) {
        return domain("ascending ladder potential needs z¹ > x¹");
    }
    Ok(ladder_prefactor(params) * rise.powf(params.alpha() / 2.0) * x.dist2(z).powf(-(params.dim() as f64) / 2.0))
}

/// Mirror image of [`ascending_ladder_potential`]: the descending ladder renewal density at y¹ < x¹.
pub fn descending_ladder_potential(x: &Point, y: &Point, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, y])?;
    let drop = x.first - y.first;
    if !(drop > 0.0) {
        return domain("descending ladder potential needs y¹ < x¹");
    }
    Ok(ladder_prefactor(params) * drop.powf(params.alpha() / 2.0) * x.dist2(y).powf(-(params.dim() as f64) / 2.0))
}

/// (y¹ − v)^{α/2−1} / Γ(α/2) for v < y¹.
pub fn descending_renewal_density(y1: f64, v: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0,2), got {alpha}"));
    }
    if !(v < y1) {
        return domain("descending renewal density needs v < y¹");
    }
    Ok((y1 - v).powf(alpha / 2.0 - 1.0) / gamma_positive(alpha / 2.0))
}

/// Density of the position of first entry into the ball B(center, radius) from x outside it.
pub fn ball_hitting_density(x: &Point, y: &Point, center: &Point, radius: f64, params: &StableParams) -> Result<f64> {
    check_dim(params, &[x, y, center])?;
    if !(radius > 0.0) {
        return domain("ball radius must be positive");
    }
    let r2 = radius * radius;
    let (xc, yc) = (x.dist2(center), y.dist2(center));
    if !(xc > r2) {
        return domain("starting point must lie strictly outside the ball");
    }
    if !(yc < r2) {
        return domain("hitting point must lie strictly inside the ball");
    }
    Ok(ball_scalar(xc - r2, r2 - yc, x.dist2(y), params))
}

/// `outer = |x−c|² − R²`, `inner = R² − |y−c|²`.
pub(crate) fn ball_scalar(outer: f64, inner: f64, dist2: f64, params: &StableParams) -> f64 {
    params.constants().c * (outer / inner).powf(params.alpha() / 2.0) * dist2.powf(-(params.dim() as f64) / 2.0)
}
