use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use crate::error::{domain, Result};
use crate::kernels::{Barrier, Direction, Point, StableParams};
use crate::samplers::rng::RngStream;

/// Exact sampler of ln(G_a / G_b) for independent unit-scale Gamma variates.
///
/// Shapes below one are boosted, G_s = G_{s+1} · U^{1/s}, and kept in log space
/// so that very small shapes cannot underflow to zero.
#[derive(Clone, Copy, Debug)]
pub struct GammaLogRatio {
    a: f64,
    b: f64,
    ga: Gamma<f64>,
    gb: Gamma<f64>,
}

impl GammaLogRatio {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return domain(format!("Beta shapes must be positive, got ({a}, {b})"));
        }
        let boosted = |s: f64| Gamma::new(if s < 1.0 { s + 1.0 } else { s }, 1.0).expect("valid gamma shape");
        Ok(Self { a, b, ga: boosted(a), gb: boosted(b) })
    }

    fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, dist: &Gamma<f64>, rng: &mut R) -> f64 {
        let g: f64 = dist.sample(rng);
        if shape < 1.0 {
            let u: f64 = Open01.sample(rng);
            g.ln() + u.ln() / shape
        } else {
            g.ln()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Self::ln_gamma_variate(self.a, &self.ga, rng) - Self::ln_gamma_variate(self.b, &self.gb, rng)
    }
}

/// Exact Beta(a, b) variate in the open interval (0, 1).
pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let ratio = GammaLogRatio::new(a, b)?;
    loop {
        let l = ratio.sample(rng);
        let x = 1.0 / (1.0 + (-l).exp());
        if x > 0.0 && x < 1.0 {
            return Ok(x);
        }
    }
}

/// First-coordinate overshoot sampler for a fixed α.
///
/// With h the distance of the start from the barrier and q the depth of the
/// landing point beyond it, U = q / (h + q) is Beta(1 − α/2, α/2); hence
/// q = h · G_a / G_b.
#[derive(Clone, Copy, Debug)]
pub struct OvershootSampler {
    ratio: GammaLogRatio,
}

impl OvershootSampler {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("alpha must lie in (0,2), got {alpha}"));
        }
        Ok(Self { ratio: GammaLogRatio::new(1.0 - alpha / 2.0, alpha / 2.0)? })
    }

    /// Landing first coordinate; `x1` must be strictly on the pre-crossing side.
    ///
    /// A landing beyond the floating-point range is returned as ±∞.
    pub fn sample<R: Rng + ?Sized>(&self, x1: f64, barrier: &Barrier, rng: &mut R) -> Result<f64> {
        let h = pre_distance(x1, barrier)?;
        Ok(land(barrier, h * self.ratio.sample(rng).exp()))
    }
}

fn pre_distance(x1: f64, barrier: &Barrier) -> Result<f64> {
    let h = barrier.pre_depth(x1);
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!(
            "first coordinate {x1} is not strictly on the pre-crossing side of level {}",
            barrier.level
        ));
    }
    Ok(h)
}

/// Point at depth `q > 0` beyond the barrier, never rounded onto the barrier itself.
fn land(barrier: &Barrier, q: f64) -> f64 {
    match barrier.direction {
        Direction::Down => {
            let y = barrier.level - q;
            if y < barrier.level {
                y
            } else {
                barrier.level.next_down()
            }
        }
        Direction::Up => {
            let y = barrier.level + q;
            if y > barrier.level {
                y
            } else {
                barrier.level.next_up()
            }
        }
    }
}

/// First coordinate of the position at the first crossing of `barrier` from `x1`.
pub fn overshoot_first_coord<R: Rng + ?Sized>(x1: f64, barrier: &Barrier, alpha: f64, rng: &mut R) -> Result<f64> {
    OvershootSampler::new(alpha)?.sample(x1, barrier, rng)
}

/// Deterministic inversion of the Beta transform for a given `u ∈ (0, 1)`.
pub fn overshoot_first_coord_from_u(x1: f64, barrier: &Barrier, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("u must lie in (0,1), got {u}"));
    }
    let h = pre_distance(x1, barrier)?;
    Ok(land(barrier, h * u / (1.0 - u)))
}

/// Centred p-dimensional Cauchy variate with scale γ, as γ·Z/|Z₀| with Z, Z₀ standard Gaussian.
pub fn mv_cauchy<R: Rng + ?Sized>(gamma: f64, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("Cauchy scale must be positive and finite, got {gamma}"));
    }
    if p == 0 {
        return domain("Cauchy dimension must be at least 1");
    }
    let mut out = vec![0.0; p];
    add_cauchy(&mut out, gamma, rng);
    Ok(out)
}

/// Adds a centred Cauchy variate with scale `gamma` to `target` in place.
pub(crate) fn add_cauchy<R: Rng + ?Sized>(target: &mut [f64], gamma: f64, rng: &mut R) {
    let w = loop {
        let w: f64 = StandardNormal.sample(rng);
        if w != 0.0 {
            break w.abs();
        }
    };
    let s = gamma / w;
    for t in target.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *t += s * z;
    }
}

/// Full position at the first crossing of `barrier` from `x`.
///
/// The first coordinate comes from the first-coordinate lane; given it, the
/// transverse displacement is Cauchy with scale equal to the first-coordinate jump.
pub fn overshoot_point(x: &Point, barrier: &Barrier, params: &StableParams, rng: &mut RngStream) -> Result<Point> {
    if x.dim() != params.dim() {
        return domain(format!("point has dimension {}, parameters have {}", x.dim(), params.dim()));
    }
    let y1 = overshoot_first_coord(x.first, barrier, params.alpha(), rng.first())?;
    let mut transverse = x.transverse.clone();
    if !transverse.is_empty() {
        add_cauchy(&mut transverse, (x.first - y1).abs(), rng.transverse());
    }
    Ok(Point::new(y1, transverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn injected_uniform_example() {
        assert_eq!(overshoot_first_coord_from_u(2.0, &Barrier::down(1.0), 0.5).unwrap(), 0.0);
        let up = overshoot_first_coord_from_u(-2.0, &Barrier::up(-1.0), 0.5).unwrap();
        assert_eq!(up, 0.0);
        let near = overshoot_first_coord_from_u(2.0, &Barrier::down(1.0), 1e-300).unwrap();
        assert!(near < 1.0);
        assert!(overshoot_first_coord_from_u(1.0, &Barrier::down(1.0), 0.5).is_err());
        assert!(overshoot_first_coord_from_u(0.5, &Barrier::down(1.0), 0.5).is_err());
    }

    #[test]
    fn beta_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        for &(a, b) in &[(0.5, 0.5), (0.75, 0.25), (0.05, 0.95), (2.5, 0.3)] {
            let mut sum = 0.0;
            for _ in 0..n {
                let x = beta_sample(a, b, &mut rng).unwrap();
                assert!(x > 0.0 && x < 1.0);
                sum += x;
            }
            let mean = a / (a + b);
            let sd = (a * b / ((a + b).powi(2) * (a + b + 1.0)) / n as f64).sqrt();
            assert!((sum / n as f64 - mean).abs() < 4.0 * sd, "shapes ({a},{b})");
        }
        assert!(beta_sample(0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn tiny_shapes_stay_inside_the_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let y = overshoot_first_coord(1.5, &Barrier::down(1.0), 0.01, &mut rng).unwrap();
            assert!(y < 1.0 && !y.is_nan());
        }
    }

    #[test]
    fn cauchy_quartiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut v: Vec<f64> = (0..100_000).map(|_| mv_cauchy(2.0, 1, &mut rng).unwrap()[0]).collect();
        v.sort_by(f64::total_cmp);
        assert!(v[50_000].abs() < 0.05);
        assert_relative_eq!(v[25_000], -2.0, max_relative = 0.04);
        assert_relative_eq!(v[75_000], 2.0, max_relative = 0.04);
        assert!(mv_cauchy(0.0, 1, &mut rng).is_err());
    }

    #[test]
    fn overshoot_point_is_beyond_the_barrier() {
        let params = StableParams::new(1.2, 3).unwrap();
        let mut rng = RngStream::new(1, 0);
        let x = Point::new(2.0, vec![0.5, -1.0]);
        for _ in 0..1000 {
            let y = overshoot_point(&x, &Barrier::down(1.0), &params, &mut rng).unwrap();
            assert!(y.first < 1.0);
            assert_eq!(y.dim(), 3);
        }
    }
}
