//! Worked values of the numerics, kernels, samplers and walk engine.
//!
//! Expected values are closed forms evaluated independently of the crate
//! (Gamma identities, arctan antiderivatives, Cauchy quartiles).

use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wohs::kernels::*;
use wohs::numerics::{adaptive_quad, build_inverse_cdf, gamma_fn, incomplete_j, stable_constants, QuadSpec};
use wohs::samplers::*;
use wohs::walk::{batch_walk, walk_slab, Measure, Status, WalkConfig};
use wohs::Error;

fn at(x: f64) -> Point {
    Point::new(x, vec![0.0])
}

fn p(alpha: f64, d: usize) -> StableParams {
    StableParams::new(alpha, d).unwrap()
}

#[test]
fn gamma_values() {
    assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-14);
    assert_relative_eq!(gamma_fn(1.5).unwrap(), 0.886_226_925_452_758, max_relative = 1e-14);
    assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
}

#[test]
fn incomplete_j_values() {
    assert_eq!(incomplete_j(0.0, 1.3, 3).unwrap(), 0.0);
    assert_relative_eq!(incomplete_j(1.0, 1.0, 2).unwrap(), PI / 2.0, max_relative = 1e-12);
    assert_relative_eq!(incomplete_j(f64::INFINITY, 1.0, 3).unwrap(), 2.0, max_relative = 1e-12);
    assert_relative_eq!(incomplete_j(8.0, 1.0, 2).unwrap(), 2.0 * 8f64.sqrt().atan(), max_relative = 1e-12);
    assert!(incomplete_j(-1.0, 1.0, 2).is_err());
}

#[test]
fn quadrature_values() {
    let q = adaptive_quad(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0)).unwrap();
    assert_relative_eq!(q.value, 2.0, max_relative = 1e-10);
    let q = adaptive_quad(f64::sin, &QuadSpec::new(0.0, PI)).unwrap();
    assert_relative_eq!(q.value, 2.0, max_relative = 1e-10);
    let q = adaptive_quad(f64::ln, &QuadSpec::new(0.0, 1.0).singularities(-0.01, 0.0)).unwrap();
    assert_relative_eq!(q.value, -1.0, max_relative = 1e-9);
}

#[test]
fn inverse_cdf_values() {
    let t = build_inverse_cdf(|_| 1.0, &QuadSpec::new(0.0, 1.0)).unwrap();
    assert_relative_eq!(t.quantile(0.25), 0.25, epsilon = 1e-8);
    let t = build_inverse_cdf(|u| u.powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, 0.0)).unwrap();
    assert_relative_eq!(t.quantile(0.5), 0.25, epsilon = 1e-8);
    let t =
        build_inverse_cdf(|u| (u * (1.0 - u)).powf(-0.5), &QuadSpec::new(0.0, 1.0).singularities(-0.5, -0.5)).unwrap();
    assert_relative_eq!(t.quantile(0.5), 0.5, epsilon = 1e-8);
    assert!(build_inverse_cdf(|_| 0.0, &QuadSpec::new(0.0, 1.0)).is_err());
}

#[test]
fn constants_at_alpha_one() {
    let k = stable_constants(1.0, 2).unwrap();
    assert_relative_eq!(k.c, 1.0 / PI.powi(2), max_relative = 1e-13);
    assert_relative_eq!(k.a, 1.0 / (2.0 * PI.powi(4)), max_relative = 1e-13);
    assert_relative_eq!(k.b, 1.0 / (4.0 * PI.powi(3)), max_relative = 1e-13);
    assert_relative_eq!(k.e, 1.0 / (2.0 * PI.powi(2)), max_relative = 1e-13);
    assert_relative_eq!(k.b, k.e * k.k, max_relative = 1e-13);
    assert!(stable_constants(2.0, 2).is_err());
    assert!(stable_constants(0.0, 2).is_err());
}

#[test]
fn kernel_worked_points() {
    let q = p(1.0, 2);
    let b = Barrier::down(0.0);
    assert_relative_eq!(pcr_density(&at(1.0), &at(0.5), &q).unwrap(), 4.0 / PI.powi(2), max_relative = 1e-13);
    assert_eq!(pcr_density(&at(1.0), &at(1.5), &q).unwrap(), 0.0);
    assert!(pcr_density(&at(-1.0), &at(-1.5), &q).is_err());

    let triple = triple_density(&at(2.0), &at(1.0), &at(2.0), &at(-1.0), &b, &q).unwrap();
    assert_relative_eq!(triple, 1.0 / (2.0 * PI.powi(4)) / 27.0, max_relative = 1e-13);
    assert_eq!(triple_density(&at(2.0), &at(1.0), &at(2.0), &at(0.5), &b, &q).unwrap(), 0.0);
    assert!(triple_density(&at(2.0), &at(2.0), &at(2.0), &at(-1.0), &b, &q).is_err());

    let double = double_density(&at(2.0), &at(1.0), &at(-1.0), &b, &q).unwrap();
    assert_relative_eq!(double, 2.0 * 8f64.sqrt().atan() / (32.0 * PI.powi(3)), max_relative = 1e-12);
    assert!(double_density(&at(1e-9), &at(1.0), &at(-1.0), &b, &q).unwrap() < 1e-6);

    let over = overshoot_density(&at(1.0), &at(-1.0), &b, &q).unwrap();
    assert_relative_eq!(over, 1.0 / (4.0 * PI.powi(2)), max_relative = 1e-13);
    let shifted = overshoot_density(&at(6.0), &at(4.0), &Barrier::down(5.0), &q).unwrap();
    assert_relative_eq!(shifted, over, max_relative = 1e-13);
    assert!(overshoot_density(&at(1.0), &at(0.0), &b, &q).is_err());

    assert_relative_eq!(
        green_halfspace(&at(2.0), &at(1.0), &b, &q).unwrap(),
        2.0 * 8f64.sqrt().atan() / (2.0 * PI.powi(2)),
        max_relative = 1e-12
    );
    assert_relative_eq!(jump_density(&[1.0, 0.0], &q).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-13);
    assert!(jump_density(&[0.0, 0.0], &q).is_err());

    assert_relative_eq!(cauchy_density(&[0.0], 1.0).unwrap(), 1.0 / PI, max_relative = 1e-13);
    assert_relative_eq!(cauchy_density(&[0.0, 0.0], 1.0).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-13);
    assert_relative_eq!(
        cauchy_density(&[0.6, -1.0], 2.5).unwrap(),
        2.5f64.powi(-2) * cauchy_density(&[0.6 / 2.5, -1.0 / 2.5], 1.0).unwrap(),
        max_relative = 1e-13
    );
    assert!(cauchy_density(&[0.0], 0.0).is_err());

    assert_relative_eq!(descending_renewal_density(1.0, 0.0, 1.0).unwrap(), 1.0 / PI.sqrt(), max_relative = 1e-13);
    assert_relative_eq!(
        ascending_ladder_potential(&at(0.0), &at(1.0), &q).unwrap(),
        PI.powf(-1.5),
        max_relative = 1e-13
    );
    assert_relative_eq!(
        ball_hitting_density(&at(2.0), &at(0.0), &at(0.0), 1.0, &q).unwrap(),
        3f64.sqrt() / (4.0 * PI.powi(2)),
        max_relative = 1e-13
    );
}

#[test]
fn conditioned_overshoot_ratio() {
    let q = p(0.5, 2);
    let x = at(2.0);
    for y in [Point::new(0.3, vec![1.0]), Point::new(-4.0, vec![-2.0]), Point::new(0.99, vec![0.0])] {
        let ratio = overshoot_density_conditioned(&x, &y, Face::Plus, &q).unwrap()
            / overshoot_density(&x, &y, &Face::Plus.barrier(), &q).unwrap();
        assert_relative_eq!(ratio, (y.first.abs() / 2.0).powf(-0.5), max_relative = 1e-12);
    }
    assert!(overshoot_density_conditioned(&x, &at(0.5), Face::Plus, &p(1.5, 2)).is_err());
}

#[test]
fn beta_sampler_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1_000_000;
    let mean = (0..n).map(|_| beta_sample(0.5, 0.5, &mut rng).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - 0.5).abs() < 0.002, "{mean}");
    let (a, b): (f64, f64) = (0.25, 0.75);
    let m = a / (a + b);
    let se = (a * b / ((a + b).powi(2) * (a + b + 1.0)) / n as f64).sqrt();
    let mean = (0..n).map(|_| beta_sample(a, b, &mut rng).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - m).abs() < 4.0 * se, "{mean}");
    assert!(beta_sample(0.0, 1.0, &mut rng).is_err());
}

#[test]
fn overshoot_inversion_map() {
    let b = Barrier::down(1.0);
    assert_eq!(overshoot_first_coord_from_u(2.0, &b, 0.5).unwrap(), 0.0);
    assert!(overshoot_first_coord_from_u(2.0, &b, 1e-12).unwrap() < 1.0);
    assert!(overshoot_first_coord_from_u(2.0, &b, 1e-12).unwrap() > 1.0 - 1e-9);
    assert!(overshoot_first_coord_from_u(2.0, &b, 1.0 - 1e-12).unwrap() < -1e9);
    assert!(overshoot_first_coord_from_u(1.0, &b, 0.5).is_err());
    assert!(overshoot_first_coord_from_u(0.5, &b, 0.5).is_err());
}

#[test]
fn cauchy_quartiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gamma = 1.7;
    let mut v: Vec<f64> = (0..1_000_000).map(|_| mv_cauchy(gamma, 1, &mut rng).unwrap()[0]).collect();
    v.sort_by(f64::total_cmp);
    let q = |f: f64| v[(f * v.len() as f64) as usize];
    assert!(q(0.5).abs() < 0.01);
    assert_relative_eq!(q(0.25), -gamma, max_relative = 0.02);
    assert_relative_eq!(q(0.75), gamma, max_relative = 0.02);
    assert!(mv_cauchy(0.0, 1, &mut rng).is_err());
}

#[test]
fn walk_contracts() {
    let q = p(1.5, 2);
    let cfg = WalkConfig::new(q, at(2.0));
    assert!(batch_walk(&cfg, 0, 2, 1).unwrap().results.is_empty());
    for bad in [at(0.5), at(1.0), at(-1.0)] {
        assert!(matches!(walk_slab(&WalkConfig::new(q, bad), &mut RngStream::new(1, 0)), Err(Error::Domain(_))));
    }
    let r = walk_slab(&cfg, &mut RngStream::new(1, 0)).unwrap();
    assert_eq!(r.status, Status::Entered);
    let y = r.final_point.unwrap();
    assert!(y.first > -1.0 && y.first < 1.0);

    let cond = WalkConfig::new(p(0.5, 2), at(2.0)).measure(Measure::Conditioned);
    let out = batch_walk(&cond, 2000, 1, 4).unwrap();
    assert!(out.results.iter().all(|r| r.status == Status::Entered && r.weight > 0.0));
}
