//! Goodness-of-fit statistics: Kolmogorov–Smirnov and chi-square.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

/// Asymptotic Kolmogorov distribution quantile at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.628;
/// Smallest expected count kept as its own chi-square cell.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// One-sample KS test at the 1% level against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    if samples.is_empty() {
        return domain("KS test needs at least one sample");
    }
    if samples.iter().any(|x| x.is_nan()) {
        return domain("KS test sample contains NaN");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let critical = KS_CRITICAL_1PCT / n.sqrt();
    Ok(KsOutcome { statistic: d, critical, pass: d <= critical })
}

/// Two-sample KS test at the 1% level.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return domain("two-sample KS test needs non-empty samples");
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return domain("two-sample KS test sample contains NaN");
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    let critical = KS_CRITICAL_1PCT * ((m + n) / (m * n)).sqrt();
    Ok(KsOutcome { statistic: d, critical, pass: d <= critical })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Upper `significance` quantile of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, significance: f64) -> Result<f64> {
    if dof == 0 {
        return domain("chi-square test needs at least one degree of freedom");
    }
    if !(significance > 0.0 && significance < 1.0) {
        return domain(format!("significance must lie in (0,1), got {significance}"));
    }
    let law = ChiSquared::new(dof as f64).map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(law.inverse_cdf(1.0 - significance))
}

/// Pearson chi-square of binned counts against cell probabilities.
///
/// `outside` counts samples that fell in no bin; their expected share is
/// `1 − Σ probs`. Cells with expected count below [`MIN_EXPECTED`] are pooled,
/// together with the outside cell, into one cell.
pub fn chi_square_counts(counts: &[u64], probs: &[f64], outside: u64, significance: f64) -> Result<ChiSquareOutcome> {
    if counts.len() != probs.len() {
        return domain(format!("{} counts against {} probabilities", counts.len(), probs.len()));
    }
    if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return domain("cell probabilities must be finite and non-negative");
    }
    let n = (counts.iter().sum::<u64>() + outside) as f64;
    if n == 0.0 {
        return domain("chi-square test needs at least one sample");
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (outside as f64, n * (1.0 - probs.iter().sum::<f64>()).max(0.0));
    for (&c, &p) in counts.iter().zip(probs) {
        let e = n * p;
        if e < MIN_EXPECTED {
            pooled.0 += c as f64;
            pooled.1 += e;
        } else {
            cells.push((c as f64, e));
        }
    }
    if pooled.1 >= MIN_EXPECTED || cells.is_empty() {
        cells.push(pooled);
    } else if let Some(last) = cells.iter_mut().min_by(|a, b| a.1.total_cmp(&b.1)) {
        last.0 += pooled.0;
        last.1 += pooled.1;
    }
    if cells.iter().any(|c| c.1 <= 0.0 && c.0 > 0.0) {
        return Ok(ChiSquareOutcome {
            statistic: f64::INFINITY,
            dof: cells.len().max(2) - 1,
            critical: 0.0,
            pass: false,
        });
    }
    let statistic = cells.iter().filter(|c| c.1 > 0.0).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let critical = chi_square_critical(dof, significance)?;
    Ok(ChiSquareOutcome { statistic, dof, critical, pass: statistic <= critical })
}

/// Index of the bin of `x` for sorted interior `cuts`; bin `i` is `[cuts[i-1], cuts[i])`.
pub fn bin_index(cuts: &[f64], x: f64) -> usize {
    cuts.partition_point(|&c| c <= x)
}

/// Compares per-bin probability estimates from two weighted samples.
///
/// Each sample estimates p̂_j = Σ w·1{bin j} / n with variance (mean(w²·1) − p̂²)/n.
/// The weights need not be normalised, so both sides may estimate sub-probabilities.
/// The statistic Σ (p̂₁ − p̂₂)² / (v₁ + v₂) is referred to a chi-square law with
/// as many degrees of freedom as bins with positive variance.
pub fn weighted_chi_square(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    cuts: &[f64],
    significance: f64,
) -> Result<ChiSquareOutcome> {
    if a.is_empty() || b.is_empty() {
        return domain("weighted chi-square needs non-empty samples");
    }
    let bins = cuts.len() + 1;
    let moments = |s: &[(f64, f64)]| {
        let mut m1 = vec![0.0; bins];
        let mut m2 = vec![0.0; bins];
        for &(x, w) in s {
            let j = bin_index(cuts, x);
            m1[j] += w;
            m2[j] += w * w;
        }
        let n = s.len() as f64;
        m1.iter()
            .zip(&m2)
            .map(|(s1, s2)| {
                let p = s1 / n;
                (p, ((s2 / n - p * p) / n).max(0.0))
            })
            .collect::<Vec<_>>()
    };
    let (ma, mb) = (moments(a), moments(b));
    let mut statistic = 0.0;
    let mut dof = 0;
    for ((pa, va), (pb, vb)) in ma.into_iter().zip(mb) {
        if va + vb > 0.0 {
            statistic += (pa - pb).powi(2) / (va + vb);
            dof += 1;
        }
    }
    let critical = chi_square_critical(dof, significance)?;
    Ok(ChiSquareOutcome { statistic, dof, critical, pass: statistic <= critical })
}

/// Weighted `q`-quantile: smallest value whose cumulative normalised weight reaches `q`.
pub fn weighted_quantile(samples: &[(f64, f64)], q: f64) -> Result<f64> {
    let total: f64 = samples.iter().map(|s| s.1).sum();
    if !(total > 0.0) || samples.iter().any(|s| s.0.is_nan() || !(s.1 >= 0.0)) {
        return domain("weighted quantile needs positive total weight and no NaN");
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let target = q.clamp(0.0, 1.0) * total;
    let mut acc = 0.0;
    for (x, w) in &v {
        acc += w;
        if acc >= target {
            return Ok(*x);
        }
    }
    Ok(v[v.len() - 1].0)
}

/// Majority vote over replicate checks.
pub fn two_of_three(passes: &[bool; 3]) -> bool {
    passes.iter().filter(|p| **p).count() >= 2
}
