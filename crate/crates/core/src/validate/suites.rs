//! Validation suites: named batteries of quadrature and statistical checks
//! with machine-readable verdicts.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::io::{write_trace_jsonl, write_walk_csv};
use crate::kernels::{Barrier, Face, Point, StableParams};
use crate::samplers::{overshoot_point, ConditionedMarginal, ConditionedOvershoot, OvershootSampler, RngStream};
use crate::validate::gof::{
    chi_square_counts, ks_test, two_of_three, two_sample_ks, weighted_chi_square, weighted_quantile,
};
use crate::validate::hist::Histogram2D;
use crate::validate::oracles::{
    bin_masses, conditioned_mass, double_marginal, double_mass, factorization_error, flat_earth_gap,
    overshoot_marginal_2d, overshoot_mass, pcr_constant_identity, pcr_mass, triple_marginal, QuadCheck,
};
use crate::walk::{batch_walk, hitting_probability_estimate, Measure, Mode, WalkConfig, WalkResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Normalization,
    Marginalization,
    Factorization,
    SamplerFit,
    ModeEquivalence,
    FlatEarth,
    ConditionedConsistency,
    Termination,
    Determinism,
    FigureTrends,
}

impl Suite {
    /// Every suite, in acceptance order.
    pub const ALL: [Suite; 10] = [
        Suite::Normalization,
        Suite::Marginalization,
        Suite::Factorization,
        Suite::SamplerFit,
        Suite::ModeEquivalence,
        Suite::FlatEarth,
        Suite::ConditionedConsistency,
        Suite::Termination,
        Suite::Determinism,
        Suite::FigureTrends,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Normalization => "normalization",
            Suite::Marginalization => "marginalization",
            Suite::Factorization => "factorization",
            Suite::SamplerFit => "sampler-fit",
            Suite::ModeEquivalence => "mode-equivalence",
            Suite::FlatEarth => "flat-earth",
            Suite::ConditionedConsistency => "conditioned-consistency",
            Suite::Termination => "termination",
            Suite::Determinism => "determinism",
            Suite::FigureTrends => "figure-trends",
        }
    }

    /// Parameter sets `(α, d)` used when none are given.
    pub fn default_params(self) -> Vec<(f64, usize)> {
        match self {
            Suite::ModeEquivalence | Suite::Termination => vec![(1.0, 2), (1.5, 2)],
            Suite::ConditionedConsistency => vec![(0.9, 2)],
            Suite::Determinism => vec![(1.5, 2)],
            Suite::FigureTrends => vec![(0.8, 2), (1.5, 2)],
            _ => vec![(0.5, 2), (1.0, 2), (1.5, 2), (1.2, 3)],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Suite::ALL.into_iter().find(|v| v.name() == key || v.name().replace('-', "") == key).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|v| v.name()).collect();
            Error::Usage(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// How a check statistic is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub alpha: f64,
    pub dim: usize,
    pub statistic: f64,
    pub rule: Rule,
    pub threshold: f64,
    pub pass: bool,
    /// Relative error bound of the underlying quadrature, where one is involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    /// Per-stream verdicts of a replicated stochastic check.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicates: Vec<bool>,
}

impl Check {
    fn new(name: &str, (alpha, dim): (f64, usize), statistic: f64, rule: Rule, threshold: f64) -> Self {
        let pass = match rule {
            Rule::AtMost => statistic <= threshold,
            Rule::AtLeast => statistic >= threshold,
            Rule::Above => statistic > threshold,
        };
        Self {
            name: name.to_string(),
            alpha,
            dim,
            statistic,
            rule,
            threshold,
            pass,
            error_bound: None,
            replicates: Vec::new(),
        }
    }

    fn quad(name: &str, p: (f64, usize), q: &QuadCheck, rel_tol: f64) -> Self {
        let mut c = Self::new(name, p, q.rel_error(), Rule::AtMost, rel_tol);
        c.error_bound = Some(q.rel_bound());
        c.pass = q.passes(rel_tol);
        c
    }

    /// Two-of-three verdict over replicate (statistic, threshold, pass) triples; reports the median statistic.
    fn replicated(name: &str, p: (f64, usize), reps: [(f64, f64, bool); 3]) -> Self {
        let mut stats = reps.map(|r| r.0);
        stats.sort_by(f64::total_cmp);
        let mut thresholds = reps.map(|r| r.1);
        thresholds.sort_by(f64::total_cmp);
        let mut c = Self::new(name, p, stats[1], Rule::AtMost, thresholds[1]);
        c.replicates = reps.iter().map(|r| r.2).collect();
        c.pass = two_of_three(&reps.map(|r| r.2));
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub suite: Suite,
    pub seed: u64,
    pub n: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Default master seed of the suites.
pub const DEFAULT_SEED: u64 = 20_240_517;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    /// `(α, d)` sets; `None` selects the suite's defaults.
    pub params: Option<Vec<(f64, usize)>>,
    pub seed: u64,
    /// Sample size of each stochastic check.
    pub n: usize,
    pub workers: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            params: None,
            seed: DEFAULT_SEED,
            n: 100_000,
            workers: std::thread::available_parallelism().map_or(1, |v| v.get()),
        }
    }
}

/// Master seed of replicate `rep` for a check salted by `salt`; replicates never share streams.
fn rep_seed(seed: u64, salt: u64, rep: u64) -> u64 {
    seed ^ salt.wrapping_mul(0xd605_bbb5_8c8a_bd2f) ^ (rep + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn run_suite_named(name: &str, opts: &SuiteOptions) -> Result<ValidationReport> {
    run_suite(name.parse()?, opts)
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<ValidationReport> {
    let sets = opts.params.clone().unwrap_or_else(|| suite.default_params());
    if sets.is_empty() {
        return Err(Error::Usage("the parameter set of a suite must be non-empty".into()));
    }
    if opts.n == 0 || opts.workers == 0 {
        return Err(Error::Usage("sample size and worker count must be positive".into()));
    }
    let params: Vec<StableParams> = sets.iter().map(|&(a, d)| StableParams::new(a, d)).collect::<Result<_>>()?;
    let checks = match suite {
        Suite::Normalization => normalization(&params)?,
        Suite::Marginalization => marginalization(&params, opts.seed)?,
        Suite::Factorization => factorization(&params, opts.seed)?,
        Suite::SamplerFit => sampler_fit(&params, opts)?,
        Suite::ModeEquivalence => mode_equivalence(&params, opts)?,
        Suite::FlatEarth => flat_earth(&params)?,
        Suite::ConditionedConsistency => conditioned_consistency(&params, opts)?,
        Suite::Termination => termination(&params, opts)?,
        Suite::Determinism => determinism(&params, opts)?,
        Suite::FigureTrends => figure_trends(&params, opts)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { suite, seed: opts.seed, n: opts.n, checks, pass })
}

fn key(p: &StableParams) -> (f64, usize) {
    (p.alpha(), p.dim())
}

/// Relative tolerance of the normalization checks.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Relative tolerance of the marginalization checks.
pub const MARGINALIZATION_TOL: f64 = 1e-4;
/// Relative tolerance of the factorization check.
pub const FACTORIZATION_TOL: f64 = 1e-12;
/// Flat-earth gap allowed at the largest radius.
pub const FLAT_EARTH_TOL: f64 = 1e-2;
/// CapReached fraction allowed for α ≥ 1.
pub const TERMINATION_TOL: f64 = 1e-4;

fn normalization(params: &[StableParams]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        let k = key(p);
        out.push(Check::quad("pcr_mass", k, &pcr_mass(p)?, NORMALIZATION_TOL));
        let identity = (pcr_constant_identity(p)? - 1.0).abs();
        out.push(Check::new("pcr_constant_identity", k, identity, Rule::AtMost, 1e-13));
        out.push(Check::quad("overshoot_mass", k, &overshoot_mass(p)?, NORMALIZATION_TOL));
        out.push(Check::quad("double_mass", k, &double_mass(p)?, NORMALIZATION_TOL));
        if p.alpha() < 1.0 {
            out.push(Check::quad("conditioned_mass", k, &conditioned_mass(p)?, NORMALIZATION_TOL));
        }
    }
    Ok(out)
}

fn uniform_point(rng: &mut RngStream, first: (f64, f64), dim: usize) -> Point {
    let y1 = rng.random_range(first.0..first.1);
    Point::new(y1, (1..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
}

/// Admissible (x, y, z) for the downward barrier at 0.
fn random_triple(rng: &mut RngStream, dim: usize) -> (Point, Point, Point) {
    loop {
        let x = uniform_point(rng, (0.2, 3.0), dim);
        let y = uniform_point(rng, (0.2, 3.0), dim);
        let z = uniform_point(rng, (-3.0, -0.2), dim);
        if (x.first - y.first).abs() > 1e-3 {
            return (x, y, z);
        }
    }
}

fn worst(name: &str, k: (f64, usize), checks: &[QuadCheck], tol: f64) -> Check {
    let err = checks.iter().map(QuadCheck::rel_error).fold(0.0, f64::max);
    let bound = checks.iter().map(QuadCheck::rel_bound).fold(0.0, f64::max);
    let mut c = Check::new(name, k, err, Rule::AtMost, tol);
    c.error_bound = Some(bound);
    c.pass = checks.iter().all(|q| q.passes(tol));
    c
}

/// Number of random points per marginalization link.
pub const MARGINAL_POINTS: usize = 20;

fn marginalization(params: &[StableParams], seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        let k = key(p);
        let mut rng = RngStream::new(seed, 1);
        let mut tri = Vec::new();
        let mut dbl = Vec::new();
        for _ in 0..MARGINAL_POINTS {
            let (x, y, z) = random_triple(&mut rng, p.dim());
            tri.push(triple_marginal(p, &x, &y, &z)?);
            dbl.push(double_marginal(p, &x, &z)?);
        }
        out.push(worst("triple_to_double", k, &tri, MARGINALIZATION_TOL));
        out.push(worst("double_to_overshoot", k, &dbl, MARGINALIZATION_TOL));
    }
    Ok(out)
}

fn factorization(params: &[StableParams], seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        let mut rng = RngStream::new(seed, 2);
        let mut err: f64 = 0.0;
        for _ in 0..100 {
            let (x, y, z) = random_triple(&mut rng, p.dim());
            err = err.max(factorization_error(p, &x, &y, &z)?);
        }
        out.push(Check::new("double_equals_green_times_jump", key(p), err, Rule::AtMost, FACTORIZATION_TOL));
    }
    Ok(out)
}

/// Overshoot histogram grid of the sampler-fit check.
pub const FIT_GRID: ((f64, f64), (f64, f64), usize, usize) = ((-4.0, 1.0), (-5.0, 5.0), 40, 40);

fn sampler_fit(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let barrier = Barrier::down(1.0);
    for p in params {
        let k = key(p);
        let alpha = p.alpha();
        let sampler = OvershootSampler::new(alpha)?;
        let beta = Beta::new(1.0 - alpha / 2.0, alpha / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
        let ks = [0u64, 1, 2].map(|rep| {
            let mut rng = RngStream::new(rep_seed(opts.seed, 3, rep), 0);
            let u: Vec<f64> = (0..opts.n)
                .map(|_| sampler.sample(2.0, &barrier, rng.first()).map(|y| (1.0 - y) / (2.0 - y)))
                .collect::<Result<_>>()?;
            let r = ks_test(&u, |v| beta.cdf(v))?;
            Ok((r.statistic, r.critical, r.pass))
        });
        out.push(Check::replicated("first_coordinate_ks", k, collect3(ks)?));

        let (xr, yr, nx, ny) = FIT_GRID;
        let template = Histogram2D::new(xr, yr, nx, ny)?;
        let masses = bin_masses(&template, overshoot_marginal_2d(p, 2.0, 1.0)?, Some((1.0, -alpha / 2.0)))?;
        let x = Point::on_axis(2.0, p.dim());
        let chi = [0u64, 1, 2].map(|rep| {
            let mut rng = RngStream::new(rep_seed(opts.seed, 4, rep), 0);
            let mut h = template.clone();
            for _ in 0..opts.n {
                let y = overshoot_point(&x, &barrier, p, &mut rng)?;
                h.add(y.first, y.transverse[0]);
            }
            let r = chi_square_counts(h.counts(), &masses, h.clipped(), 0.01)?;
            Ok((r.statistic, r.critical, r.pass))
        });
        out.push(Check::replicated("overshoot_histogram_chi_square", k, collect3(chi)?));
    }
    Ok(out)
}

fn collect3<T>(r: [Result<T>; 3]) -> Result<[T; 3]> {
    let [a, b, c] = r;
    Ok([a?, b?, c?])
}

fn entered_coords(results: &[WalkResult], axis: usize) -> Vec<f64> {
    results.iter().filter_map(|r| r.final_point.as_ref().map(|p| p.coords()[axis])).collect()
}

fn mode_equivalence(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        let k = key(p);
        let base = WalkConfig::new(*p, Point::on_axis(2.0, p.dim())).max_crossings(crate::walk::DEFAULT_PLAIN_CAP);
        let runs = [0u64, 1, 2].map(|rep| {
            let c = batch_walk(&base.clone().mode(Mode::Collapsed), opts.n, opts.workers, rep_seed(opts.seed, 5, rep))?;
            let f = batch_walk(&base.clone().mode(Mode::FullTrace), opts.n, opts.workers, rep_seed(opts.seed, 6, rep))?;
            Ok((c.results, f.results))
        });
        let runs = collect3(runs)?;
        for (name, axis) in [("final_transverse_ks", 1), ("final_first_ks", 0)] {
            let reps = [0, 1, 2].map(|i| {
                let (c, f) = &runs[i];
                let r = two_sample_ks(&entered_coords(c, axis), &entered_coords(f, axis))?;
                Ok((r.statistic, r.critical, r.pass))
            });
            out.push(Check::replicated(name, k, collect3(reps)?));
        }
    }
    Ok(out)
}

/// Radii of the flat-earth check.
pub const FLAT_EARTH_RADII: [f64; 3] = [1e2, 1e3, 1e4];

/// Fixed (x¹ − r, r − y¹, x², y²) offsets of the flat-earth pairs.
const FLAT_EARTH_PAIRS: [(f64, f64, f64, f64); 10] = [
    (0.5, 0.5, 0.0, 0.0),
    (1.0, 0.2, 0.0, 0.3),
    (2.0, 1.0, 0.5, -0.5),
    (0.3, 1.5, 0.0, 1.0),
    (1.5, 0.1, -0.2, 0.4),
    (3.0, 2.0, 1.0, -1.0),
    (0.8, 0.8, 0.2, 0.2),
    (0.1, 0.3, 0.0, 0.0),
    (2.5, 0.6, -1.0, 0.5),
    (1.2, 2.5, 0.3, -0.7),
];

fn flat_earth(params: &[StableParams]) -> Result<Vec<Check>> {
    let level = 0.25;
    let mut out = Vec::new();
    for p in params {
        let k = key(p);
        let mut monotone = true;
        let mut last: f64 = 0.0;
        for (a, b, tx, ty) in FLAT_EARTH_PAIRS {
            let mut xt = vec![0.0; p.dim() - 1];
            let mut yt = xt.clone();
            xt[0] = tx;
            yt[0] = ty;
            let x = Point::new(level + a, xt);
            let y = Point::new(level - b, yt);
            let gaps = FLAT_EARTH_RADII.map(|r| flat_earth_gap(p, &x, &y, level, r));
            let gaps = collect3(gaps)?;
            monotone &= gaps[0] > gaps[1] && gaps[1] > gaps[2];
            last = last.max(gaps[2]);
        }
        out.push(Check::new("gap_at_largest_radius", k, last, Rule::AtMost, FLAT_EARTH_TOL));
        out.push(Check::new("gap_decreasing_in_radius", k, monotone as u8 as f64, Rule::AtLeast, 1.0));
    }
    Ok(out)
}

/// Starting distances of the hitting-probability check.
pub const HITTING_STARTS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];
/// Crossing cap of plain walks with α < 1 in the walk-level comparison.
pub const PLAIN_LOW_ALPHA_CAP: u64 = 10_000;

fn conditioned_consistency(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        let k = key(p);
        let alpha = p.alpha();
        if !(alpha < 1.0) {
            return domain(format!("conditioned consistency needs alpha < 1, got {alpha}"));
        }
        let plain = OvershootSampler::new(alpha)?;
        let cond = ConditionedOvershoot::new(alpha)?;
        let beta = Beta::new(1.0 - alpha / 2.0, alpha / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
        // plain one-crossing law from x¹ = 2: y = 1 − U/(1 − U)
        let mut cuts: Vec<f64> = (1..20)
            .map(|i| {
                let u = beta.inverse_cdf(1.0 - i as f64 / 20.0);
                1.0 - u / (1.0 - u)
            })
            .collect();
        cuts.sort_by(f64::total_cmp);
        let one = [0u64, 1, 2].map(|rep| {
            let mut rng = RngStream::new(rep_seed(opts.seed, 7, rep), 0);
            let a: Vec<(f64, f64)> = (0..opts.n)
                .map(|_| cond.sample(2.0, Face::Plus, rng.first()).map(|y| (y, (y.abs() / 2.0).powf(1.0 - alpha))))
                .collect::<Result<_>>()?;
            let b: Vec<(f64, f64)> = (0..opts.n)
                .map(|_| plain.sample(2.0, &Barrier::down(1.0), rng.first()).map(|y| (y, 1.0)))
                .collect::<Result<_>>()?;
            let r = weighted_chi_square(&a, &b, &cuts, 0.01)?;
            Ok((r.statistic, r.critical, r.pass))
        });
        out.push(Check::replicated("one_crossing_reweighting", k, collect3(one)?));

        let marginal = ConditionedMarginal::new(2.0, Face::Plus, alpha)?;
        let ks = [0u64, 1, 2].map(|rep| {
            let mut rng = RngStream::new(rep_seed(opts.seed, 8, rep), 0);
            let a: Vec<f64> = (0..opts.n).map(|_| cond.sample(2.0, Face::Plus, rng.first())).collect::<Result<_>>()?;
            let r = ks_test(&a, |y| marginal.cdf(y))?;
            Ok((r.statistic, r.critical, r.pass))
        });
        out.push(Check::replicated("one_crossing_ks_vs_tabulated", k, collect3(ks)?));

        let start = Point::on_axis(2.0, p.dim());
        let cond_cfg = WalkConfig::new(*p, start.clone()).measure(Measure::Conditioned);
        let plain_cfg = WalkConfig::new(*p, start.clone()).max_crossings(PLAIN_LOW_ALPHA_CAP);
        let cuts: Vec<f64> = (1..20).map(|i| -1.0 + i as f64 / 10.0).collect();
        let walk = [0u64, 1, 2].map(|rep| {
            let c = batch_walk(&cond_cfg, opts.n, opts.workers, rep_seed(opts.seed, 9, rep))?;
            let q = batch_walk(&plain_cfg, opts.n, opts.workers, rep_seed(opts.seed, 10, rep))?;
            let weighted = |rs: &[WalkResult]| -> Vec<(f64, f64)> {
                rs.iter().map(|r| r.final_point.as_ref().map_or((0.0, 0.0), |y| (y.first, r.weight))).collect()
            };
            let r = weighted_chi_square(&weighted(&c.results), &weighted(&q.results), &cuts, 0.001)?;
            Ok((r.statistic, r.critical, r.pass))
        });
        out.push(Check::replicated("walk_weighted_histogram", k, collect3(walk)?));

        let mut estimates = Vec::new();
        for (i, s) in HITTING_STARTS.iter().enumerate() {
            let cfg = WalkConfig::new(*p, Point::on_axis(*s, p.dim())).measure(Measure::Conditioned);
            let b = batch_walk(&cfg, opts.n, opts.workers, rep_seed(opts.seed, 11, i as u64))?;
            estimates.push(hitting_probability_estimate(&b.results)?);
        }
        let in_range = estimates.iter().all(|e| e.mean > 0.0 && e.mean < 1.0);
        out.push(Check::new("hitting_probability_in_unit_interval", k, in_range as u8 as f64, Rule::AtLeast, 1.0));
        let rise = estimates
            .windows(2)
            .map(|w| (w[1].mean - w[0].mean) / w[0].std_error.hypot(w[1].std_error))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Check::new("hitting_probability_nonincreasing", k, rise, Rule::AtMost, 4.0));
    }
    Ok(out)
}

/// Low-α plain configuration expected to hit its cap.
pub const LOW_ALPHA_CASE: (f64, u64) = (0.5, 1_000);

fn cap_fraction(results: &[WalkResult]) -> f64 {
    results.iter().filter(|r| !r.entered()).count() as f64 / results.len() as f64
}

fn termination(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in params {
        if p.alpha() < 1.0 {
            return domain(format!("termination checks need alpha >= 1, got {}", p.alpha()));
        }
        let cfg = WalkConfig::new(*p, Point::on_axis(2.0, p.dim())).max_crossings(crate::walk::DEFAULT_PLAIN_CAP);
        let b = batch_walk(&cfg, opts.n, opts.workers, rep_seed(opts.seed, 12, 0))?;
        out.push(Check::new("cap_fraction", key(p), cap_fraction(&b.results), Rule::AtMost, TERMINATION_TOL));
    }
    let dim = params[0].dim();
    let low = StableParams::new(LOW_ALPHA_CASE.0, dim)?;
    let cfg = WalkConfig::new(low, Point::on_axis(2.0, dim)).max_crossings(LOW_ALPHA_CASE.1);
    let b = batch_walk(&cfg, opts.n, opts.workers, rep_seed(opts.seed, 13, 0))?;
    out.push(Check::new("low_alpha_cap_fraction_positive", key(&low), cap_fraction(&b.results), Rule::Above, 0.0));
    Ok(out)
}

/// Worker counts compared by the determinism check.
pub const DETERMINISM_WORKERS: [usize; 3] = [1, 4, 16];

fn determinism(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let n = opts.n.min(5_000);
    for p in params {
        let measure = if p.alpha() < 1.0 { Measure::Conditioned } else { Measure::Plain };
        let cfg =
            WalkConfig::new(*p, Point::on_axis(2.0, p.dim())).measure(measure).mode(Mode::FullTrace).record_trace(true);
        let mut outputs = Vec::new();
        for w in DETERMINISM_WORKERS {
            let b = batch_walk(&cfg, n, w, opts.seed)?;
            let mut bytes = Vec::new();
            write_walk_csv(&b.results, p.dim(), &mut bytes)?;
            write_trace_jsonl(&b.results, &mut bytes)?;
            outputs.push(bytes);
        }
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        out.push(Check::new("identical_across_worker_counts", key(p), identical as u8 as f64, Rule::AtLeast, 1.0));
    }
    Ok(out)
}

/// Starting first coordinates of the figure grid.
pub const FIGURE_STARTS: [f64; 2] = [1.2, 3.0];
/// Batches used for the standard error of an interquartile range.
pub const IQR_BATCHES: usize = 20;

/// Interquartile range of the final transverse coordinate and its batch standard error.
///
/// Walks are weighted by their importance weights, so conditioned runs give the
/// law of the entry point given that the slab is hit.
pub fn transverse_iqr(results: &[WalkResult]) -> Result<(f64, f64)> {
    let iqr = |rs: &[WalkResult]| -> Result<f64> {
        let s: Vec<(f64, f64)> = rs
            .iter()
            .filter_map(|r| r.final_point.as_ref().map(|p| (p.transverse[0], r.weight)))
            .filter(|s| s.1 > 0.0)
            .collect();
        Ok(weighted_quantile(&s, 0.75)? - weighted_quantile(&s, 0.25)?)
    };
    let full = iqr(results)?;
    let size = results.len() / IQR_BATCHES;
    if size == 0 {
        return domain(format!("IQR standard error needs at least {IQR_BATCHES} walks"));
    }
    let batch: Vec<f64> = results.chunks_exact(size).take(IQR_BATCHES).map(iqr).collect::<Result<_>>()?;
    let mean = batch.iter().sum::<f64>() / batch.len() as f64;
    let var = batch.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (batch.len() - 1) as f64;
    Ok((full, (var / batch.len() as f64).sqrt()))
}

/// Walk configuration of one figure panel: conditioned for α < 1, plain otherwise.
pub fn figure_config(params: StableParams, start1: f64) -> WalkConfig {
    let cfg = WalkConfig::new(params, Point::on_axis(start1, params.dim()));
    if params.alpha() < 1.0 {
        cfg.measure(Measure::Conditioned)
    } else {
        cfg
    }
}

fn figure_trends(params: &[StableParams], opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut sorted = params.to_vec();
    sorted.sort_by(|a, b| a.alpha().total_cmp(&b.alpha()));
    let mut grid = Vec::new();
    for (i, p) in sorted.iter().enumerate() {
        let mut row = Vec::new();
        for (j, s) in FIGURE_STARTS.iter().enumerate() {
            let b =
                batch_walk(&figure_config(*p, *s), opts.n, opts.workers, rep_seed(opts.seed, 14, (i * 2 + j) as u64))?;
            row.push(transverse_iqr(&b.results)?);
        }
        grid.push(row);
    }
    let z = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) / a.1.hypot(b.1);
    let mut out = Vec::new();
    for (p, row) in sorted.iter().zip(&grid) {
        out.push(Check::new("iqr_increases_with_start", key(p), z(row[0], row[1]), Rule::Above, 4.0));
    }
    for (j, _) in FIGURE_STARTS.iter().enumerate() {
        for i in 1..sorted.len() {
            let k = key(&sorted[i]);
            let name = format!("iqr_decreases_with_alpha_from_{}", FIGURE_STARTS[j]);
            out.push(Check::new(&name, k, z(grid[i][j], grid[i - 1][j]), Rule::Above, 4.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert_eq!("SamplerFit".parse::<Suite>().unwrap(), Suite::SamplerFit);
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_params_are_a_usage_error() {
        let opts = SuiteOptions { params: Some(vec![]), ..Default::default() };
        assert!(matches!(run_suite(Suite::Factorization, &opts), Err(Error::Usage(_))));
    }

    #[test]
    fn factorization_suite_passes() {
        let r = run_suite(Suite::Factorization, &SuiteOptions::default()).unwrap();
        assert!(r.pass, "{}", r.to_json().unwrap());
        assert_eq!(r.checks.len(), 4);
    }
}
