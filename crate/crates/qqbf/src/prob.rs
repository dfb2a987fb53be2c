//! Closed-form success probabilities, ensemble means and the qubit-count sweep.

use std::fmt::Write as _;

use crate::error::{QqbfError, Result};
use crate::poly::{ExtendedComplex, MultiRationalFn};
use crate::states::coin_weighted_eval;
use crate::synth::{abc, check_ns, solve_xyk};

/// Success probability of the optimal circuit with `ns` coins at `zs`.
pub fn success_probability(f: &MultiRationalFn, ns: &[usize], zs: &[ExtendedComplex]) -> Result<f64> {
    success_probability_w(f, ns, zs, 0.0)
}

/// Same, for the suboptimal family with a theta1 weight `w`.
pub fn success_probability_w(f: &MultiRationalFn, ns: &[usize], zs: &[ExtendedComplex], w: f64) -> Result<f64> {
    let (a, b, c) = abc(f, ns)?;
    let s = solve_xyk(a, b, c, w)?;
    let p = coin_weighted_eval(f.p(), zs, ns)?;
    let q = coin_weighted_eval(f.q(), zs, ns)?;
    Ok((s.k * s.k * (p.norm_sqr() + q.norm_sqr())).min(1.0))
}

fn univariate_scalars(f: &MultiRationalFn, n: usize) -> Result<(f64, f64)> {
    if f.k() != 1 {
        return Err(QqbfError::Unsupported("ensemble means are univariate only".into()));
    }
    let (a, b, c) = abc(f, &[n])?;
    let s = solve_xyk(a, b, c, 0.0)?;
    Ok((a + b, s.l))
}

/// Mean over Haar-random coins.
pub fn mean_uniform(f: &MultiRationalFn, n: usize) -> Result<f64> {
    let (ab, l) = univariate_scalars(f, n)?;
    Ok(2.0 * ab / ((n + 1) as f64 * (l + ab)))
}

/// Mean over equatorial coins (e^{i phi}|0> + |1>)/sqrt2.
pub fn mean_covariant(f: &MultiRationalFn, n: usize) -> Result<f64> {
    check_ns(f, &[n])?;
    let (ab, l) = univariate_scalars(f, n)?;
    let raw: f64 = f.p().terms().chain(f.q().terms()).map(|(_, c)| c.norm_sqr()).sum();
    Ok(2.0 * raw / (2f64.powi(n as i32) * (l + ab)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleKind {
    UniformBloch,
    CovariantEquator,
    Point(Vec<ExtendedComplex>),
}

impl EnsembleKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EnsembleKind::UniformBloch => "uniform",
            EnsembleKind::CovariantEquator => "covariant",
            EnsembleKind::Point(_) => "point",
        }
    }
}

pub fn ensemble_mean(f: &MultiRationalFn, n: usize, ensemble: &EnsembleKind) -> Result<f64> {
    match ensemble {
        EnsembleKind::UniformBloch => mean_uniform(f, n),
        EnsembleKind::CovariantEquator => mean_covariant(f, n),
        EnsembleKind::Point(zs) => success_probability(f, &[n], zs),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub n: usize,
    pub ensemble: String,
    pub mean_prob: f64,
    pub is_argmax: bool,
}

/// Ensemble mean for every (param, n). Larger n reuses the same coefficients
/// (padding at infinity). Per param the smallest n within 1e-12 relative of
/// the best mean is flagged.
pub fn sweep<F>(family: F, params: &[f64], ns: &[usize], ensemble: &EnsembleKind) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<MultiRationalFn>,
{
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(QqbfError::Domain("sweep needs at least one n".into()));
    }
    let mut params = params.to_vec();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(QqbfError::Domain("sweep parameters must be finite".into()));
    }
    params.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(params.len() * ns.len());
    for &param in &params {
        let f = family(param)?;
        let means: Vec<f64> = ns.iter().map(|&n| ensemble_mean(&f, n, ensemble)).collect::<Result<_>>()?;
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pick = means.iter().position(|&m| m >= best - 1e-12 * best.abs()).unwrap_or(0);
        for (i, (&n, &mean_prob)) in ns.iter().zip(&means).enumerate() {
            rows.push(SweepRow { param, n, ensemble: ensemble.tag().into(), mean_prob, is_argmax: i == pick });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,n,ensemble,mean_prob,is_argmax\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.param, r.n, r.ensemble, r.mean_prob, r.is_argmax);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{pad, MultiPoly, Poly, RationalFn};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn fin(re: f64, im: f64) -> ExtendedComplex {
        ExtendedComplex::finite(re, im)
    }

    fn univariate(p: &[f64], q: &[f64]) -> MultiRationalFn {
        RationalFn::new(Poly::from_real(p).unwrap(), Poly::from_real(q).unwrap()).unwrap().to_multi()
    }

    fn eta_z2(eta: f64) -> Result<MultiRationalFn> {
        Ok(univariate(&[0.0, 0.0, eta], &[1.0]))
    }

    fn bivariate(p: &[(usize, usize, f64)]) -> MultiRationalFn {
        let mk = |t: &[(usize, usize, f64)]| {
            MultiPoly::new(2, t.iter().map(|&(i, j, v)| (vec![i, j], Complex64::new(v, 0.0)))).unwrap()
        };
        MultiRationalFn::new(mk(p), mk(&[(0, 0, 1.0)])).unwrap()
    }

    #[test]
    fn point_examples() {
        let one = [fin(1.0, 0.0), fin(1.0, 0.0)];
        let p = success_probability(&bivariate(&[(1, 1, 1.0)]), &[1, 1], &one).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let p = success_probability(&bivariate(&[(1, 0, 1.0), (0, 1, 1.0)]), &[1, 1], &one).unwrap();
        assert!((p - 0.625).abs() < 1e-15);
        let id = univariate(&[0.0, 1.0], &[1.0]);
        for z in [fin(0.3, -2.0), ExtendedComplex::Infinity, fin(0.0, 0.0)] {
            assert!((success_probability(&id, &[1], &[z]).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_examples() {
        assert!((mean_uniform(&univariate(&[0.0, 1.0], &[1.0]), 1).unwrap() - 1.0).abs() < 1e-15);
        let f = eta_z2(1.0).unwrap();
        assert!((mean_uniform(&f, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((mean_uniform(&f, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(mean_uniform(&bivariate(&[(1, 1, 1.0)]), 1).is_err());
    }

    /// 4096-point trapezoid rule over the equator.
    fn covariant_quadrature(f: &MultiRationalFn, n: usize) -> f64 {
        let m = 4096;
        (0..m)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                success_probability(f, &[n], &[ExtendedComplex::Finite(Complex64::from_polar(1.0, phi))]).unwrap()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn covariant_examples_match_quadrature() {
        let id = univariate(&[0.0, 1.0], &[1.0]);
        assert!((mean_covariant(&id, 1).unwrap() - 1.0).abs() < 1e-15);
        let f = eta_z2(1.0).unwrap();
        assert!((mean_covariant(&f, 2).unwrap() - 0.5).abs() < 1e-15);
        for (g, n) in [(id, 1), (f, 2), (eta_z2(1e-6).unwrap(), 2), (univariate(&[1.0, -2.0, 0.5], &[0.3, 1.0]), 3)] {
            assert!((mean_covariant(&g, n).unwrap() - covariant_quadrature(&g, n)).abs() < 1e-6);
        }
    }

    fn haar_coin(rng: &mut impl Rng) -> ExtendedComplex {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(rand_distr::StandardNormal));
        let alpha = Complex64::new(g[0], g[1]);
        let beta = Complex64::new(g[2], g[3]);
        if beta == Complex64::new(0.0, 0.0) {
            ExtendedComplex::Infinity
        } else {
            ExtendedComplex::Finite(alpha / beta)
        }
    }

    #[test]
    fn uniform_matches_monte_carlo() {
        let f = univariate(&[0.5, -1.0, 2.0], &[1.0, 0.25]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<f64> = (0..200_000)
            .map(|_| success_probability(&f, &[2], &[haar_coin(&mut rng)]).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let se = (var / samples.len() as f64).sqrt();
        assert!((mean - mean_uniform(&f, 2).unwrap()).abs() < 4.0 * se);
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep(eta_z2, &[1.0], &[2, 3], &EnsembleKind::UniformBloch).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].mean_prob - 2.0 / 3.0).abs() < 1e-15 && rows[0].is_argmax);
        assert!((rows[1].mean_prob - 1.0 / 3.0).abs() < 1e-15 && !rows[1].is_argmax);
        let rows = sweep(eta_z2, &[0.5], &[2], &EnsembleKind::CovariantEquator).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(sweep(eta_z2, &[1.0], &[1], &EnsembleKind::UniformBloch).is_err());
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("param,n,ensemble,mean_prob,is_argmax\n0.5,2,covariant,"));
    }

    #[test]
    fn covariant_optimum_grows_with_eta() {
        let params: Vec<f64> = (0..=40).map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / 40.0)).collect();
        let rows = sweep(eta_z2, &params, &[2, 3, 4, 5, 6], &EnsembleKind::CovariantEquator).unwrap();
        let best: Vec<usize> = rows.iter().filter(|r| r.is_argmax).map(|r| r.n).collect();
        assert!(best.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(best.first(), Some(&2));
        assert_eq!(best.last(), Some(&3));
    }

    #[test]
    fn padding_inserts_a_zero() {
        let f = RationalFn::new(Poly::from_real(&[1.0, 2.0]).unwrap(), Poly::from_real(&[0.5, 0.0, 1.0]).unwrap())
            .unwrap();
        let r = fin(0.7, -0.2);
        let pp = pad(&f, r).to_multi();
        assert!(success_probability(&pp, &[3], &[r]).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn scale_invariant(re in -2.0f64..2.0, im in -2.0f64..2.0, lr in 0.1f64..10.0, ph in 0.0f64..6.3) {
            let f = univariate(&[1.0, -0.5, 2.0], &[0.25, 1.0]);
            let g = f.scale(Complex64::from_polar(lr, ph));
            let z = [fin(re, im)];
            let a = success_probability(&f, &[2], &z).unwrap();
            let b = success_probability(&g, &[2], &z).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn w_never_helps(w in 0.001f64..2.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let f = univariate(&[1.0, -0.5, 2.0], &[0.25, 1.0]);
            let z = [fin(re, im)];
            let p0 = success_probability(&f, &[2], &z).unwrap();
            let pw = success_probability_w(&f, &[2], &z, w).unwrap();
            prop_assert!(pw <= p0 + 1e-12);
        }
    }
}
