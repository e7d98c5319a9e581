//! Walk on half-spaces: iterated exact crossings of the two faces of the slab
//! (−1, 1) × R^{d−1} until the first coordinate lands inside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{Face, Point, StableParams};
use crate::samplers::plain::add_cauchy;
use crate::samplers::{ConditionedOvershoot, OvershootSampler, RngStream};

/// Default crossing cap under the plain measure.
pub const DEFAULT_PLAIN_CAP: u64 = 1_000_000;
/// Default crossing cap under the conditioned measure.
pub const DEFAULT_CONDITIONED_CAP: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// The law of the process itself.
    Plain,
    /// The first coordinate conditioned to be absorbed at 0 (α < 1), with importance weights.
    Conditioned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full landing point at every crossing.
    #[serde(rename = "full")]
    FullTrace,
    /// First coordinates only; one Cauchy transverse draw with the accumulated scale on entry.
    Collapsed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Entered,
    CapReached,
}

/// One face crossing of a walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    /// 1-based crossing index.
    pub k: u64,
    pub face: Face,
    /// First coordinate just after the crossing.
    pub x1: f64,
    /// Transverse coordinates just after the crossing; absent in collapsed mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transverse: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    /// Entry point into the slab; absent when the cap is reached or the walk
    /// escapes beyond the floating-point range (also reported as `CapReached`).
    pub final_point: Option<Point>,
    pub n_crossings: u64,
    /// Sum of the absolute first-coordinate jumps over all crossings.
    pub accumulated_scale: f64,
    /// Importance weight: 1 under the plain measure, |x¹/y¹|^{α−1} on entry under the
    /// conditioned measure, and 0 for a conditioned walk that hit the cap.
    pub weight: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<CrossingEvent>>,
}

impl WalkResult {
    pub fn entered(&self) -> bool {
        self.status == Status::Entered
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub params: StableParams,
    pub start: Point,
    pub measure: Measure,
    pub mode: Mode,
    /// Crossing cap; `None` selects the measure's default, which is refused for
    /// the plain measure with α < 1 where the walk may never enter.
    pub max_crossings: Option<u64>,
    pub record_trace: bool,
}

impl WalkConfig {
    /// Plain measure, collapsed mode, default cap, no trace.
    pub fn new(params: StableParams, start: Point) -> Self {
        Self { params, start, measure: Measure::Plain, mode: Mode::Collapsed, max_crossings: None, record_trace: false }
    }

    pub fn measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn max_crossings(mut self, cap: u64) -> Self {
        self.max_crossings = Some(cap);
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn cap(&self) -> u64 {
        self.max_crossings.unwrap_or(match self.measure {
            Measure::Plain => DEFAULT_PLAIN_CAP,
            Measure::Conditioned => DEFAULT_CONDITIONED_CAP,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let alpha = self.params.alpha();
        if self.params.dim() < 2 {
            return domain("the slab walk requires dimension at least 2");
        }
        if self.start.dim() != self.params.dim() {
            return domain(format!("start has dimension {}, parameters have {}", self.start.dim(), self.params.dim()));
        }
        if !(self.start.first.abs() > 1.0) || !self.start.first.is_finite() {
            return domain(format!("start first coordinate {} must lie outside the closed slab", self.start.first));
        }
        if self.max_crossings == Some(0) {
            return Err(Error::Usage("max_crossings must be at least 1".into()));
        }
        match self.measure {
            Measure::Conditioned if !(alpha < 1.0) => {
                domain(format!("the conditioned measure requires alpha in (0,1), got {alpha}"))
            }
            Measure::Plain if alpha < 1.0 && self.max_crossings.is_none() => Err(Error::Usage(format!(
                "plain walks with alpha {alpha} < 1 may never enter the slab; set max_crossings explicitly"
            ))),
            _ => Ok(()),
        }
    }
}

enum FirstCoord {
    Plain(OvershootSampler),
    Conditioned(ConditionedOvershoot),
}

/// A validated configuration with its samplers, reusable across walks.
pub struct Walker {
    config: WalkConfig,
    first: FirstCoord,
}

impl Walker {
    pub fn new(config: WalkConfig) -> Result<Self> {
        config.validate()?;
        let first = match config.measure {
            Measure::Plain => FirstCoord::Plain(OvershootSampler::new(config.params.alpha())?),
            Measure::Conditioned => FirstCoord::Conditioned(ConditionedOvershoot::new(config.params.alpha())?),
        };
        Ok(Self { config, first })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn walk(&self, rng: &mut RngStream) -> Result<WalkResult> {
        let cfg = &self.config;
        let cap = cfg.cap();
        let full = cfg.mode == Mode::FullTrace;
        let mut x1 = cfg.start.first;
        let mut face = Face::facing(x1).expect("validated start");
        let mut transverse = cfg.start.transverse.clone();
        let mut trace = cfg.record_trace.then(Vec::new);
        let mut scale = 0.0;
        let mut k = 0u64;
        // escaped beyond the floating-point range; it cannot come back in finite precision
        let escaped = |k: u64, trace: Option<Vec<CrossingEvent>>| WalkResult {
            final_point: None,
            n_crossings: k,
            accumulated_scale: f64::INFINITY,
            weight: if cfg.measure == Measure::Plain { 1.0 } else { 0.0 },
            status: Status::CapReached,
            trace,
        };
        loop {
            if k >= cap {
                let weight = if cfg.measure == Measure::Plain { 1.0 } else { 0.0 };
                return Ok(WalkResult {
                    final_point: None,
                    n_crossings: k,
                    accumulated_scale: scale,
                    weight,
                    status: Status::CapReached,
                    trace,
                });
            }
            let mut y1 = match &self.first {
                FirstCoord::Plain(s) => s.sample(x1, &face.barrier(), rng.first())?,
                FirstCoord::Conditioned(c) => c.sample(x1, face, rng.first())?,
            };
            if !y1.is_finite() {
                return Ok(escaped(k + 1, trace));
            }
            let opposite = face.opposite().level();
            if y1 == opposite {
                // a landing exactly on the far face enters immediately
                y1 = if opposite > 0.0 { opposite.next_down() } else { opposite.next_up() };
            }
            k += 1;
            let jump = (y1 - x1).abs();
            scale += jump;
            if full {
                add_cauchy(&mut transverse, jump, rng.transverse());
            }
            if !scale.is_finite() || transverse.iter().any(|t| !t.is_finite()) {
                return Ok(escaped(k, trace));
            }
            if let Some(t) = trace.as_mut() {
                t.push(CrossingEvent { k, face, x1: y1, transverse: full.then(|| transverse.clone()) });
            }
            if y1 > -1.0 && y1 < 1.0 {
                if !full && scale > 0.0 {
                    add_cauchy(&mut transverse, scale, rng.transverse());
                    if transverse.iter().any(|t| !t.is_finite()) {
                        return Ok(escaped(k, trace));
                    }
                }
                let weight = match cfg.measure {
                    Measure::Plain => 1.0,
                    Measure::Conditioned => (y1.abs() / cfg.start.first.abs()).powf(1.0 - cfg.params.alpha()),
                };
                return Ok(WalkResult {
                    final_point: Some(Point::new(y1, transverse)),
                    n_crossings: k,
                    accumulated_scale: scale,
                    weight,
                    status: Status::Entered,
                    trace,
                });
            }
            x1 = y1;
            face = face.opposite();
        }
    }
}

/// One walk from `config.start` on `rng`.
pub fn walk_slab(config: &WalkConfig, rng: &mut RngStream) -> Result<WalkResult> {
    Walker::new(config.clone())?.walk(rng)
}

/// Results of a batch in index order; `results.len() < requested` only when
/// memory for the full batch could not be reserved.
#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub requested: usize,
    pub results: Vec<WalkResult>,
}

impl BatchOutput {
    pub fn is_complete(&self) -> bool {
        self.results.len() == self.requested
    }
}

/// `n` independent walks, walk `i` on stream `(master_seed, i)`, run on `workers` threads.
///
/// The output is identical for every worker count.
pub fn batch_walk(config: &WalkConfig, n: usize, workers: usize, master_seed: u64) -> Result<BatchOutput> {
    batch_walk_with(&Walker::new(config.clone())?, n, workers, master_seed)
}

pub fn batch_walk_with(walker: &Walker, n: usize, workers: usize, master_seed: u64) -> Result<BatchOutput> {
    if workers == 0 {
        return Err(Error::Usage("workers must be at least 1".into()));
    }
    let mut results: Vec<WalkResult> = Vec::new();
    let count = if results.try_reserve_exact(n).is_ok() {
        n
    } else {
        // fall back to the largest batch that fits
        let mut m = n / 2;
        while m > 0 && results.try_reserve_exact(m).is_err() {
            m /= 2;
        }
        m
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| walker.walk(&mut RngStream::new(master_seed, i as u64)))
            .collect_into_vec_result(&mut results)
    })?;
    Ok(BatchOutput { requested: n, results })
}

trait CollectResult<T> {
    fn collect_into_vec_result(self, out: &mut Vec<T>) -> Result<()>;
}

impl<I, T> CollectResult<T> for I
where
    I: IndexedParallelIterator<Item = Result<T>>,
    T: Send,
{
    fn collect_into_vec_result(self, out: &mut Vec<T>) -> Result<()> {
        let mut staged: Vec<Result<T>> = Vec::new();
        self.collect_into_vec(&mut staged);
        out.clear();
        for r in staged {
            out.push(r?);
        }
        Ok(())
    }
}

/// Estimate of P_x(τ_S < ∞) from conditioned walks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub n: usize,
    /// Mean of the weights.
    pub mean: f64,
    pub std_error: f64,
    /// Mean after discarding the largest 1% of weights, as a stability diagnostic.
    pub trimmed_mean: f64,
}

pub fn hitting_probability_estimate(results: &[WalkResult]) -> Result<HittingEstimate> {
    if results.is_empty() {
        return domain("hitting probability needs at least one walk");
    }
    if results.iter().any(|r| !r.entered()) {
        return domain("every conditioned walk must have entered the slab");
    }
    let n = results.len();
    let nf = n as f64;
    let mean = results.iter().map(|r| r.weight).sum::<f64>() / nf;
    let var = if n > 1 { results.iter().map(|r| (r.weight - mean).powi(2)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    let mut w: Vec<f64> = results.iter().map(|r| r.weight).collect();
    w.sort_by(f64::total_cmp);
    let keep = n - n / 100;
    let trimmed_mean = w[..keep].iter().sum::<f64>() / keep as f64;
    Ok(HittingEstimate { n, mean, std_error: (var / nf).sqrt(), trimmed_mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, d: usize) -> StableParams {
        StableParams::new(alpha, d).unwrap()
    }

    #[test]
    fn entered_walks_end_inside_with_alternating_faces() {
        let cfg =
            WalkConfig::new(params(1.2, 3), Point::new(2.0, vec![0.0, 1.0])).mode(Mode::FullTrace).record_trace(true);
        for i in 0..500 {
            let r = walk_slab(&cfg, &mut RngStream::new(5, i)).unwrap();
            assert_eq!(r.status, Status::Entered);
            let y = r.final_point.as_ref().unwrap();
            assert!(y.first > -1.0 && y.first < 1.0);
            let trace = r.trace.as_ref().unwrap();
            assert_eq!(trace.len() as u64, r.n_crossings);
            let mut expect = Face::Plus;
            let mut total = 0.0;
            let mut prev = 2.0;
            for ev in trace {
                assert_eq!(ev.face, expect);
                total += (ev.x1 - prev).abs();
                prev = ev.x1;
                expect = expect.opposite();
            }
            assert!((total - r.accumulated_scale).abs() <= 1e-12 * total);
            assert_eq!(trace.last().unwrap().transverse.as_deref(), Some(&y.transverse[..]));
        }
    }

    #[test]
    fn first_coordinates_ignore_dimension_and_mode() {
        let run = |d: usize, mode: Mode| {
            let cfg = WalkConfig::new(params(1.5, d), Point::on_axis(-3.0, d)).mode(mode).record_trace(true);
            let r = walk_slab(&cfg, &mut RngStream::new(77, 3)).unwrap();
            r.trace.unwrap().iter().map(|e| e.x1).collect::<Vec<_>>()
        };
        let base = run(2, Mode::Collapsed);
        assert_eq!(base, run(5, Mode::Collapsed));
        assert_eq!(base, run(5, Mode::FullTrace));
    }

    #[test]
    fn invalid_configs() {
        assert!(WalkConfig::new(params(1.5, 2), Point::on_axis(1.0, 2)).validate().is_err());
        assert!(WalkConfig::new(params(1.5, 2), Point::on_axis(0.3, 2)).validate().is_err());
        assert!(WalkConfig::new(params(1.5, 1), Point::on_axis(2.0, 1)).validate().is_err());
        let c = WalkConfig::new(params(1.5, 2), Point::on_axis(2.0, 2)).measure(Measure::Conditioned);
        assert!(matches!(c.validate(), Err(Error::Domain(_))));
        let p = WalkConfig::new(params(0.5, 2), Point::on_axis(2.0, 2));
        assert!(matches!(p.validate(), Err(Error::Usage(_))));
        assert!(p.max_crossings(10).validate().is_ok());
    }

    #[test]
    fn plain_low_alpha_can_hit_the_cap() {
        let cfg = WalkConfig::new(params(0.3, 2), Point::on_axis(2.0, 2)).max_crossings(50);
        let out = batch_walk(&cfg, 300, 1, 1).unwrap();
        let capped = out.results.iter().filter(|r| r.status == Status::CapReached).count();
        assert!(capped > 0);
        for r in &out.results {
            assert_eq!(r.weight, 1.0);
            assert_eq!(r.final_point.is_none(), r.status == Status::CapReached);
        }
    }

    #[test]
    fn conditioned_walks_enter_with_weights_below_one() {
        let cfg = WalkConfig::new(params(0.5, 2), Point::on_axis(2.0, 2)).measure(Measure::Conditioned);
        let out = batch_walk(&cfg, 2000, 2, 9).unwrap();
        assert!(out.is_complete());
        for r in &out.results {
            assert!(r.entered());
            assert!(r.weight > 0.0 && r.weight < 1.0);
        }
        let est = hitting_probability_estimate(&out.results).unwrap();
        assert!(est.mean > 0.0 && est.mean < 1.0);
        assert!(hitting_probability_estimate(&[]).is_err());
    }

    #[test]
    fn batches_do_not_depend_on_worker_count() {
        let cfg = WalkConfig::new(params(1.5, 2), Point::on_axis(2.0, 2));
        let a = batch_walk(&cfg, 200, 1, 4).unwrap().results;
        let b = batch_walk(&cfg, 200, 3, 4).unwrap().results;
        assert_eq!(a, b);
        assert!(batch_walk(&cfg, 0, 2, 4).unwrap().results.is_empty());
    }
}
