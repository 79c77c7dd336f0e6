//! Multifractal analysis under uniform strong separation: the attractor
//! dimension, the moment-scaling function beta(q) with its implicit
//! derivative, attainable local-dimension endpoints by exhaustive
//! enumeration, and the Legendre spectrum.
//!
//! All transcendental evaluation happens in high precision ([`Ctx`]); the
//! defining equations are solved by bisection, which is safe because every
//! map involved is strictly monotone.

use astro_float::BigFloat;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::model::Rifs;
use crate::precision::{to_f64, Ctx};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("bisection bracket could not be established")]
    BracketFailure,
    #[error("alpha = {alpha} outside the open interval ({lo}, {hi})")]
    OutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("-beta' is constant to tolerance on q in [{q_lo}, {q_hi}]")]
    FlatSegment { q_lo: f64, q_hi: f64 },
    #[error("choice-vector enumeration of size {size} exceeds cap {cap}")]
    BudgetExceeded { size: usize, cap: usize },
}

pub const RESIDUAL_TOL: f64 = 1e-12;
pub const TIE_TOL: f64 = 1e-12;
pub const DEFAULT_ENUM_CAP: usize = 1 << 20;

/// Per-system data with logs precomputed at working precision.
struct SystemLogs {
    theta: BigFloat,
    ln_p: Vec<BigFloat>,
    ln_r: Vec<BigFloat>,
}

fn prepare(rifs: &Rifs, ctx: &Ctx) -> Vec<SystemLogs> {
    rifs.systems()
        .iter()
        .zip(rifs.theta())
        .map(|(s, th)| SystemLogs {
            theta: ctx.from_rational(th),
            ln_p: s.probs().iter().map(|p| ctx.ln_rational(p)).collect(),
            ln_r: s.maps().iter().map(|m| m.ratio.ln_big(ctx)).collect(),
        })
        .collect()
}

/// sum_j theta_j ln sum_k exp(q ln p_{j,k} + beta ln r_{j,k})
fn scaling_residual(sys: &[SystemLogs], q: &BigFloat, beta: &BigFloat, ctx: &Ctx) -> BigFloat {
    let mut acc = ctx.zero();
    for s in sys {
        let mut inner = ctx.zero();
        for (lp, lr) in s.ln_p.iter().zip(&s.ln_r) {
            let e = ctx.add(&ctx.mul(q, lp), &ctx.mul(beta, lr));
            inner = ctx.add(&inner, &ctx.exp(&e));
        }
        acc = ctx.add(&acc, &ctx.mul(&s.theta, &ctx.ln(&inner)));
    }
    acc
}

/// Bisection for the root of a strictly decreasing function.
fn bisect_decreasing(
    mut f: impl FnMut(&BigFloat) -> BigFloat,
    ctx: &Ctx,
    start_lo: f64,
    start_hi: f64,
) -> Result<BigFloat, SpectrumError> {
    let tol = ctx.from_f64(RESIDUAL_TOL);
    let mut lo = ctx.from_f64(start_lo);
    let mut hi = ctx.from_f64(start_hi);
    let mut step = ctx.from_f64((start_hi - start_lo).max(1.0));
    // expand until f(lo) >= 0 >= f(hi)
    let mut guard = 0;
    while f(&lo).is_negative() {
        lo = ctx.sub(&lo, &step);
        step = ctx.add(&step, &step);
        guard += 1;
        if guard > 80 {
            return Err(SpectrumError::BracketFailure);
        }
    }
    let mut step = ctx.from_f64((start_hi - start_lo).max(1.0));
    while f(&hi).is_positive() {
        hi = ctx.add(&hi, &step);
        step = ctx.add(&step, &step);
        guard += 1;
        if guard > 160 {
            return Err(SpectrumError::BracketFailure);
        }
    }
    for _ in 0..(ctx.bits() + 8) {
        let mid = ctx.mid(&lo, &hi);
        let v = f(&mid);
        if matches!(v.abs().cmp(&tol), Some(c) if c <= 0) {
            return Ok(mid);
        }
        if v.is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ctx.mid(&lo, &hi))
}

/// Almost-sure attractor dimension: the root of
/// sum_j theta_j ln sum_k r_{j,k}^s = 0.
pub fn dimension_ussc(rifs: &Rifs, ctx: &Ctx) -> Result<f64, SpectrumError> {
    let sys = prepare(rifs, ctx);
    let zero_q = ctx.zero();
    // at s = 0 the residual is sum theta ln(#maps) >= 0; single-map systems
    // sit exactly at the root
    let at0 = scaling_residual(&sys, &zero_q, &ctx.zero(), ctx);
    if to_f64(&at0).abs() <= RESIDUAL_TOL {
        return Ok(0.0);
    }
    let s = bisect_decreasing(|b| scaling_residual(&sys, &zero_q, b, ctx), ctx, 0.0, 2.0)?;
    Ok(to_f64(&s))
}

/// One evaluation of the scaling function beta at a fixed q.
#[derive(Debug, Clone, Serialize)]
pub struct BetaEval {
    pub q: f64,
    pub beta: f64,
    /// per-system moment sums D_j(q) at the solution
    pub d_values: Vec<f64>,
    /// derivative beta'(q) from the implicit closed form
    pub beta_prime: f64,
    pub residual: f64,
}

pub fn beta(rifs: &Rifs, q: f64, ctx: &Ctx) -> Result<BetaEval, SpectrumError> {
    let sys = prepare(rifs, ctx);
    beta_prepared(&sys, q, ctx)
}

fn beta_prepared(sys: &[SystemLogs], q: f64, ctx: &Ctx) -> Result<BetaEval, SpectrumError> {
    let qb = ctx.from_f64(q);
    let beta = bisect_decreasing(|b| scaling_residual(sys, &qb, b, ctx), ctx, -1.0, 1.0)?;
    let residual = to_f64(&scaling_residual(sys, &qb, &beta, ctx));

    // beta'(q) = - (sum_j theta_j sum_k w_{j,k} ln p_{j,k} / D_j)
    //            / (sum_j theta_j sum_k w_{j,k} ln r_{j,k} / D_j)
    // with w_{j,k} = p^q r^beta.
    let mut num = ctx.zero();
    let mut den = ctx.zero();
    let mut d_values = Vec::with_capacity(sys.len());
    for s in sys {
        let mut dj = ctx.zero();
        let mut nj = ctx.zero();
        let mut rj = ctx.zero();
        for (lp, lr) in s.ln_p.iter().zip(&s.ln_r) {
            let w = ctx.exp(&ctx.add(&ctx.mul(&qb, lp), &ctx.mul(&beta, lr)));
            dj = ctx.add(&dj, &w);
            nj = ctx.add(&nj, &ctx.mul(&w, lp));
            rj = ctx.add(&rj, &ctx.mul(&w, lr));
        }
        num = ctx.add(&num, &ctx.div(&ctx.mul(&s.theta, &nj), &dj));
        den = ctx.add(&den, &ctx.div(&ctx.mul(&s.theta, &rj), &dj));
        d_values.push(to_f64(&dj));
    }
    let beta_prime = -to_f64(&ctx.div(&num, &den));

    Ok(BetaEval { q, beta: to_f64(&beta), d_values, beta_prime, residual })
}

/// Extremes of log-probability / log-ratio over all choice vectors, with the
/// full (tie-tolerant) argmin and argmax sets.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaEndpoints {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// all minimizing choice vectors (map index per system, 0-based)
    pub argmin: Vec<Vec<usize>>,
    pub argmax: Vec<Vec<usize>>,
}

pub fn alpha_endpoints(rifs: &Rifs, ctx: &Ctx, cap: usize) -> Result<AlphaEndpoints, SpectrumError> {
    let sys = prepare(rifs, ctx);
    let mut size = 1usize;
    for s in &sys {
        size = size.saturating_mul(s.ln_p.len());
        if size > cap {
            return Err(SpectrumError::BudgetExceeded { size, cap });
        }
    }
    let mut vector = vec![0usize; sys.len()];
    let mut values: Vec<(Vec<usize>, f64)> = Vec::with_capacity(size);
    loop {
        let mut num = ctx.zero();
        let mut den = ctx.zero();
        for (s, &k) in sys.iter().zip(&vector) {
            num = ctx.add(&num, &ctx.mul(&s.theta, &s.ln_p[k]));
            den = ctx.add(&den, &ctx.mul(&s.theta, &s.ln_r[k]));
        }
        values.push((vector.clone(), to_f64(&ctx.div(&num, &den))));
        // odometer increment
        let mut i = 0;
        loop {
            if i == sys.len() {
                break;
            }
            vector[i] += 1;
            if vector[i] < sys[i].ln_p.len() {
                break;
            }
            vector[i] = 0;
            i += 1;
        }
        if i == sys.len() {
            break;
        }
    }
    let min = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let max = values.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let near = |v: f64, target: f64| (v - target).abs() <= TIE_TOL * target.abs().max(1.0);
    let argmin = values.iter().filter(|(_, v)| near(*v, min)).map(|(i, _)| i.clone()).collect();
    let argmax = values.iter().filter(|(_, v)| near(*v, max)).map(|(i, _)| i.clone()).collect();
    Ok(AlphaEndpoints { alpha_min: min, alpha_max: max, argmin, argmax })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSample {
    pub q: f64,
    pub beta: f64,
    /// alpha = -beta'(q)
    pub alpha: f64,
    /// f = beta + q * alpha
    pub f: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumCurve {
    pub samples: Vec<SpectrumSample>,
    pub endpoints: AlphaEndpoints,
    pub dim_k: f64,
}

/// Parametric Legendre spectrum (alpha(q), f(q)) over a monotone q grid.
pub fn spectrum_curve(
    rifs: &Rifs,
    q_grid: &[f64],
    ctx: &Ctx,
    cap: usize,
) -> Result<SpectrumCurve, SpectrumError> {
    assert!(
        q_grid.windows(2).all(|w| w[0] < w[1]),
        "q grid must be strictly increasing"
    );
    let sys = prepare(rifs, ctx);
    let mut samples = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let eval = beta_prepared(&sys, q, ctx)?;
        let alpha = -eval.beta_prime;
        samples.push(SpectrumSample {
            q,
            beta: eval.beta,
            alpha,
            f: eval.beta + q * alpha,
            residual: eval.residual,
        });
    }
    let endpoints = alpha_endpoints(rifs, ctx, cap)?;
    let dim_k = beta_prepared(&sys, 0.0, ctx)?.beta;
    Ok(SpectrumCurve { samples, endpoints, dim_k })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetDim {
    pub alpha: f64,
    pub q_alpha: f64,
    pub f: f64,
}

const FLAT_PROBE_TOL: f64 = 1e-9;
const FLAT_WIDTH: f64 = 1e-6;

/// Dimension of the level set with local dimension `alpha`, solved through
/// the Legendre parametrization: find q with -beta'(q) = alpha.
pub fn dim_level_set(rifs: &Rifs, alpha: f64, ctx: &Ctx) -> Result<LevelSetDim, SpectrumError> {
    let endpoints = alpha_endpoints(rifs, ctx, DEFAULT_ENUM_CAP)?;
    if !(alpha > endpoints.alpha_min && alpha < endpoints.alpha_max) {
        return Err(SpectrumError::OutOfRange {
            alpha,
            lo: endpoints.alpha_min,
            hi: endpoints.alpha_max,
        });
    }
    let sys = prepare(rifs, ctx);
    let h = |q: f64, sys: &[SystemLogs]| -> Result<f64, SpectrumError> {
        Ok(-beta_prepared(sys, q, ctx)?.beta_prime - alpha)
    };
    // -beta' decreases from alpha_max to alpha_min; expand a sign bracket.
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut guard = 0;
    while h(lo, &sys)? < 0.0 {
        lo *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(SpectrumError::BracketFailure);
        }
    }
    while h(hi, &sys)? > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 120 {
            return Err(SpectrumError::BracketFailure);
        }
    }
    let mut q = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
        q = 0.5 * (lo + hi);
        let v = h(q, &sys)?;
        if v.abs() <= 1e-11 {
            break;
        }
        if v > 0.0 {
            lo = q;
        } else {
            hi = q;
        }
    }

    // flat-to-tolerance segment around q_alpha?
    let probe = 1e-3;
    if h(q - probe, &sys)?.abs() <= FLAT_PROBE_TOL && h(q + probe, &sys)?.abs() <= FLAT_PROBE_TOL {
        let mut left = q - probe;
        let mut right = q + probe;
        let mut d = probe;
        while d < 64.0 && h(q - d, &sys)?.abs() <= FLAT_PROBE_TOL {
            left = q - d;
            d *= 2.0;
        }
        let mut d = probe;
        while d < 64.0 && h(q + d, &sys)?.abs() <= FLAT_PROBE_TOL {
            right = q + d;
            d *= 2.0;
        }
        if right - left > FLAT_WIDTH {
            return Err(SpectrumError::FlatSegment { q_lo: left, q_hi: right });
        }
    }

    let eval = beta_prepared(&sys, q, ctx)?;
    Ok(LevelSetDim { alpha, q_alpha: q, f: eval.beta + alpha * q })
}

/// Closed-form dimension of the random Cantor family, used as an oracle in
/// tests and the `oracle` subcommand: s = log 2 / (-sum theta_j log r_j).
pub fn random_cantor_dimension(ratios: &[BigRational], theta: &[BigRational], ctx: &Ctx) -> f64 {
    let mut den = ctx.zero();
    for (r, t) in ratios.iter().zip(theta) {
        den = ctx.add(&den, &ctx.mul(&ctx.from_rational(t), &ctx.ln_rational(r)));
    }
    let ln2 = ctx.ln(&ctx.from_i64(2));
    -to_f64(&ctx.div(&ln2, &den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_rational, NumberField};
    use crate::model::{Ifs, Rifs, SimilarityMap};

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn build(systems: &[(&[(&str, &str)], &[&str])], theta: &[&str]) -> Rifs {
        let field = NumberField::rationals();
        let systems = systems
            .iter()
            .map(|(maps, probs)| {
                Ifs::new(
                    maps.iter()
                        .map(|(r, d)| SimilarityMap {
                            ratio: field.from_rational(rat(r)),
                            translation: field.from_rational(rat(d)),
                        })
                        .collect(),
                    probs.iter().map(|p| rat(p)).collect(),
                )
                .unwrap()
            })
            .collect();
        Rifs::new(field, systems, theta.iter().map(|t| rat(t)).collect()).unwrap()
    }

    fn random_cantor(p: &str) -> Rifs {
        let q = crate::field::format_rational(&(rat("1") - rat(p)));
        build(
            &[
                (&[("1/3", "0"), ("1/3", "2/3")], &[p, &q]),
                (&[("1/4", "0"), ("1/4", "3/4")], &[p, &q]),
            ],
            &["1/2", "1/2"],
        )
    }

    fn dyadic() -> Rifs {
        build(&[(&[("1/2", "0"), ("1/2", "1/2")], &["1/2", "1/2"])], &["1"])
    }

    #[test]
    fn dyadic_dimension_is_one() {
        let ctx = Ctx::default();
        let s = dimension_ussc(&dyadic(), &ctx).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "s = {s}");
    }

    #[test]
    fn random_cantor_dimension_closed_form() {
        let ctx = Ctx::default();
        let s = dimension_ussc(&random_cantor("1/4"), &ctx).unwrap();
        let target = 2.0 * 2f64.ln() / (3f64.ln() + 4f64.ln());
        assert!((s - target).abs() < 1e-12, "s = {s}, target = {target}");
    }

    #[test]
    fn single_map_systems_have_dimension_zero() {
        let rifs = build(
            &[(&[("1/3", "0")], &["1"]), (&[("1/2", "1/2")], &["1"])],
            &["1/2", "1/2"],
        );
        let ctx = Ctx::default();
        assert_eq!(dimension_ussc(&rifs, &ctx).unwrap(), 0.0);
    }

    #[test]
    fn cantor_alpha_endpoints_closed_form() {
        let ctx = Ctx::default();
        let ep = alpha_endpoints(&random_cantor("1/4"), &ctx, 1 << 20).unwrap();
        let denom = 0.5 * ((1f64 / 3.0).ln() + 0.25f64.ln());
        let lo = (3f64 / 4.0).ln() / denom;
        let hi = 0.25f64.ln() / denom;
        assert!((ep.alpha_min - lo).abs() < 1e-12);
        assert!((ep.alpha_max - hi).abs() < 1e-12);
        // minimal dimension: the heavy branch (1-p) both times; maximal: p
        assert_eq!(ep.argmin, vec![vec![1, 1]]);
        assert_eq!(ep.argmax, vec![vec![0, 0]]);
    }

    #[test]
    fn base3_maximal_dimension_vectors() {
        let rifs = crate::model::tests::sec61(("1/2", "1/2"));
        let ctx = Ctx::default();
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        let target = 1.0 + 2f64.ln() / 3f64.ln();
        assert!((ep.alpha_max - target).abs() < 1e-12, "alpha_max = {}", ep.alpha_max);
        // attained exactly by the probability-1/6 branches of both systems
        let mut expect = Vec::new();
        for k1 in [0usize, 2] {
            for k2 in [0usize, 1, 3] {
                expect.push(vec![k1, k2]);
            }
        }
        let mut argmax = ep.argmax.clone();
        argmax.sort();
        expect.sort();
        assert_eq!(argmax, expect);
    }

    #[test]
    fn degenerate_endpoints_collapse() {
        let rifs = build(
            &[
                (&[("1/4", "0"), ("1/4", "3/4")], &["1/2", "1/2"]),
                (&[("1/4", "0"), ("1/4", "3/4")], &["1/2", "1/2"]),
            ],
            &["1/2", "1/2"],
        );
        let ctx = Ctx::default();
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        assert!((ep.alpha_min - ep.alpha_max).abs() < 1e-14);
        assert_eq!(ep.argmin.len(), 4);
        assert_eq!(ep.argmax.len(), 4);
    }

    #[test]
    fn beta_at_one_is_zero() {
        let ctx = Ctx::default();
        for rifs in [random_cantor("1/4"), dyadic()] {
            let e = beta(&rifs, 1.0, &ctx).unwrap();
            assert!(e.beta.abs() < 1e-12, "beta(1) = {}", e.beta);
        }
    }

    #[test]
    fn beta_at_zero_matches_dimension() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let e = beta(&rifs, 0.0, &ctx).unwrap();
        let s = dimension_ussc(&rifs, &ctx).unwrap();
        assert!((e.beta - s).abs() < 1e-12);
    }

    #[test]
    fn self_similar_beta_closed_form() {
        // equicontractive symmetric Cantor: beta(q) = (1-q) log 2 / -log r
        let rifs = build(
            &[
                (&[("1/3", "0"), ("1/3", "2/3")], &["1/2", "1/2"]),
                (&[("1/3", "0"), ("1/3", "2/3")], &["1/2", "1/2"]),
            ],
            &["1/2", "1/2"],
        );
        let ctx = Ctx::default();
        for q in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let e = beta(&rifs, q, &ctx).unwrap();
            let target = (1.0 - q) * 2f64.ln() / 3f64.ln();
            assert!((e.beta - target).abs() < 1e-12, "q={q}: {} vs {target}", e.beta);
        }
    }

    #[test]
    fn spectrum_peak_at_q_zero() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let curve = spectrum_curve(&rifs, &[-1.0, 0.0, 1.0], &ctx, 1 << 20).unwrap();
        let at0 = &curve.samples[1];
        assert!((at0.f - curve.dim_k).abs() < 1e-10);
        for s in &curve.samples {
            assert!(s.f <= curve.dim_k + 1e-9, "f({}) = {} above peak", s.q, s.f);
        }
    }

    #[test]
    fn symmetric_measure_spectrum_degenerates_to_point() {
        let rifs = random_cantor("1/2");
        let ctx = Ctx::default();
        let curve = spectrum_curve(&rifs, &[-2.0, 0.0, 2.0], &ctx, 1 << 20).unwrap();
        for s in &curve.samples {
            assert!((s.alpha - curve.dim_k).abs() < 1e-11);
            assert!((s.f - curve.dim_k).abs() < 1e-11);
        }
    }

    #[test]
    fn extreme_q_approaches_endpoints() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        let lo = beta(&rifs, 50.0, &ctx).unwrap();
        let hi = beta(&rifs, -50.0, &ctx).unwrap();
        assert!((-lo.beta_prime - ep.alpha_min).abs() < 1e-3);
        assert!((-hi.beta_prime - ep.alpha_max).abs() < 1e-3);
    }

    #[test]
    fn beta_is_convex_on_the_grid() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let vals: Vec<f64> =
            (-40..=40).map(|i| beta(&rifs, i as f64 * 0.5, &ctx).unwrap().beta).collect();
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
    }

    #[test]
    fn beta_strictly_decreases_when_alpha_min_positive() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        assert!(ep.alpha_min > 0.0);
        let vals: Vec<f64> =
            (-20..=20).map(|i| beta(&rifs, i as f64, &ctx).unwrap().beta).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "beta must strictly decrease");
        }
    }

    #[test]
    fn alpha_stays_inside_endpoint_interval() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        for i in -20..=20 {
            let e = beta(&rifs, i as f64, &ctx).unwrap();
            let alpha = -e.beta_prime;
            assert!(alpha >= ep.alpha_min - 1e-9 && alpha <= ep.alpha_max + 1e-9);
        }
    }

    #[test]
    fn level_set_at_peak_matches_dimension() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let e0 = beta(&rifs, 0.0, &ctx).unwrap();
        let d = dim_level_set(&rifs, -e0.beta_prime, &ctx).unwrap();
        assert!(d.q_alpha.abs() < 1e-6);
        assert!((d.f - e0.beta).abs() < 1e-9);
    }

    #[test]
    fn level_set_matches_dense_grid_oracle() {
        // deterministic p-Cantor (both letters identical), alpha midway
        let rifs = build(
            &[
                (&[("1/3", "0"), ("1/3", "2/3")], &["1/4", "3/4"]),
                (&[("1/3", "0"), ("1/3", "2/3")], &["1/4", "3/4"]),
            ],
            &["1/2", "1/2"],
        );
        let ctx = Ctx::default();
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        let alpha = 0.5 * (ep.alpha_min + ep.alpha_max);
        let d = dim_level_set(&rifs, alpha, &ctx).unwrap();
        // independent oracle: inf over a dense grid of beta(q) + alpha*q
        let mut best = f64::INFINITY;
        let mut q = d.q_alpha - 2.0;
        while q <= d.q_alpha + 2.0 {
            let e = beta(&rifs, q, &ctx).unwrap();
            best = best.min(e.beta + alpha * q);
            q += 0.01;
        }
        assert!((d.f - best).abs() < 1e-4, "f = {}, oracle = {best}", d.f);
    }

    #[test]
    fn level_set_rejects_endpoints() {
        let ctx = Ctx::default();
        let rifs = random_cantor("1/4");
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        assert!(matches!(
            dim_level_set(&rifs, ep.alpha_max, &ctx),
            Err(SpectrumError::OutOfRange { .. })
        ));
    }

    #[test]
    fn minimizing_vector_exchange_property() {
        // probability multisets with repeats force ties; every coordinate
        // swap of two extremal vectors must remain extremal
        let rifs = build(
            &[
                (&[("1/4", "0"), ("1/4", "1/4"), ("1/4", "3/4")], &["1/6", "2/3", "1/6"]),
                (&[("1/4", "0"), ("1/4", "3/4")], &["1/6", "5/6"]),
            ],
            &["1/2", "1/2"],
        );
        let ctx = Ctx::default();
        let ep = alpha_endpoints(&rifs, &ctx, 1 << 20).unwrap();
        assert!(ep.argmax.len() > 1, "expected forced ties");
        for set in [&ep.argmin, &ep.argmax] {
            for a in set.iter() {
                for b in set.iter() {
                    for k in 0..a.len() {
                        let mut swapped = a.clone();
                        swapped[k] = b[k];
                        assert!(
                            set.contains(&swapped),
                            "swap {swapped:?} of {a:?}/{b:?} not extremal"
                        );
                    }
                }
            }
        }
    }
}
