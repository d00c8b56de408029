//! Empirical distributions, Kolmogorov-Smirnov distances and bands, and
//! the invariance / convergence test harness.

use rayon::prelude::*;
use serde::Serialize;

use crate::billiard2d::Limits;
use crate::diskwall::{from_tilted, to_tilted, Collider, DiskParams, TiltedState};
use crate::kernels::{averaged_kernel, Kernel};
use crate::num::Float;
use crate::rng::{sample_sin_theta, uniform, Streams};
use crate::wall::WallSpec;

/// Two-sided 3-sigma quantile of the asymptotic Kolmogorov distribution:
/// `Q(x) = 2 sum_k (-1)^{k-1} exp(-2 k^2 x^2) = 0.0027` at this `x`.
pub const KOLMOGOROV_3SIGMA: f64 = 1.8176427982515462;

#[derive(Clone, Debug)]
pub struct EmpiricalDist<F> {
    samples: Vec<F>,
    pub excluded: usize,
    pub seed: u64,
}

impl<F: Float> EmpiricalDist<F> {
    pub fn from_samples(mut samples: Vec<F>, excluded: usize, seed: u64) -> Self {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { samples, excluded, seed }
    }

    pub fn samples(&self) -> &[F] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn excluded_fraction(&self) -> F {
        if self.samples.is_empty() && self.excluded == 0 {
            return F::zero();
        }
        F::from_usize(self.excluded).unwrap()
            / F::from_usize(self.excluded + self.samples.len()).unwrap()
    }

    pub fn mean(&self) -> F {
        self.samples.iter().copied().sum::<F>() / F::from_usize(self.len().max(1)).unwrap()
    }

    pub fn quantile(&self, q: F) -> F {
        let n = self.samples.len();
        assert!(n > 0, "quantile of an empty distribution");
        let pos = q * F::from_usize(n - 1).unwrap();
        let i = pos.floor().as_f64() as usize;
        let frac = pos - pos.floor();
        if i + 1 >= n {
            self.samples[n - 1]
        } else {
            self.samples[i] + (self.samples[i + 1] - self.samples[i]) * frac
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample set")]
    Empty,
}

/// Sup distance between two empirical CDFs.
pub fn ks_two_sample<F: Float>(
    a: &EmpiricalDist<F>,
    b: &EmpiricalDist<F>,
) -> Result<F, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let (xs, ys) = (a.samples(), b.samples());
    let (n, m) = (xs.len(), ys.len());
    let (nf, mf) = (F::from_usize(n).unwrap(), F::from_usize(m).unwrap());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = F::zero();
    while i < n && j < m {
        // Ties advance both sides together.
        if xs[i] < ys[j] {
            i += 1;
        } else if ys[j] < xs[i] {
            j += 1;
        } else {
            let v = xs[i];
            while i < n && xs[i] == v {
                i += 1;
            }
            while j < m && ys[j] == v {
                j += 1;
            }
        }
        let fa = F::from_usize(i).unwrap() / nf;
        let fb = F::from_usize(j).unwrap() / mf;
        d = d.max((fa - fb).abs());
    }
    Ok(d)
}

/// Sup distance between an empirical CDF and an analytic CDF.
pub fn ks_vs_cdf<F: Float>(
    a: &EmpiricalDist<F>,
    cdf: impl Fn(F) -> F,
) -> Result<F, StatsError> {
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = a.len();
    let nf = F::from_usize(n).unwrap();
    let mut d = F::zero();
    for (i, &x) in a.samples().iter().enumerate() {
        let c = cdf(x);
        let lo = F::from_usize(i).unwrap() / nf;
        let hi = F::from_usize(i + 1).unwrap() / nf;
        d = d.max((c - lo).abs().max((hi - c).abs()));
    }
    Ok(d)
}

/// One-sample KS acceptance threshold at the two-sided 3-sigma level.
pub fn ks_band_one_sample<F: Float>(n: usize) -> F {
    F::of(KOLMOGOROV_3SIGMA) / F::from_usize(n).unwrap().sqrt()
}

/// Two-sample KS acceptance threshold at the two-sided 3-sigma level.
pub fn ks_band_two_sample<F: Float>(n: usize, m: usize) -> F {
    let (nf, mf) = (n as f64, m as f64);
    F::of(KOLMOGOROV_3SIGMA * ((nf + mf) / (nf * mf)).sqrt())
}

/// Three-sigma band for a binomial proportion estimate.
pub fn binomial_3sigma<F: Float>(p: F, n: usize) -> F {
    F::of(3.0) * (p * (F::one() - p) / F::from_usize(n).unwrap()).sqrt()
}

/// CDF of the equilibrium angle density sin(theta)/2 on (0, pi).
pub fn sin_theta_cdf<F: Float>(theta: F) -> F {
    F::of(0.5) * (F::one() - theta.cos())
}

/// Survival function of the asymptotic Kolmogorov distribution.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    2.0 * s
}

/// Result of one named check: pass iff `statistic <= threshold`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
    pub n: u64,
    pub excluded: u64,
    pub seed: u64,
}

impl Report {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n: u64, seed: u64) -> Self {
        Self::with_excluded(name, statistic, threshold, n, 0, seed)
    }

    pub fn with_excluded(
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        n: u64,
        excluded: u64,
        seed: u64,
    ) -> Self {
        // A run with more than 1% excluded samples fails regardless of
        // the statistic.
        let too_many_excluded = excluded * 100 > n;
        Self {
            name: name.into(),
            statistic,
            threshold,
            passed: statistic <= threshold && !too_many_excluded,
            n,
            excluded,
            seed,
        }
    }
}

/// Push the equilibrium angle density through a kernel and KS-test the
/// output against the same density.
pub fn invariance_report<F: Float>(kernel: &Kernel<F>, n: usize, seed: u64) -> Report {
    let streams = Streams::new(seed, "invariance").child(kernel.name());
    let samples: Vec<F> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(i);
            let th: F = sample_sin_theta(&mut rng);
            kernel.sample(th, &mut rng)
        })
        .collect();
    let dist = EmpiricalDist::from_samples(samples, 0, seed);
    let d = ks_vs_cdf(&dist, sin_theta_cdf).unwrap();
    Report::new(
        format!("invariance/{}", kernel.name()),
        d.as_f64(),
        ks_band_one_sample::<F>(n).as_f64(),
        n as u64,
        seed,
    )
}

/// Empirical outgoing-angle law of the full collision law at fixed
/// incoming tilted angles, with the spatial entry uniform over one cell.
pub fn collide_theta_dist<F: Float>(
    collider: &Collider<F>,
    theta: F,
    psi: F,
    n: usize,
    streams: &Streams,
) -> (EmpiricalDist<F>, EmpiricalDist<F>) {
    let params = *collider.params();
    let rows: Vec<Option<(F, F)>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(i);
            let x1: F = uniform::<F, _>(&mut rng) * collider.wall().period();
            let alpha: F = uniform::<F, _>(&mut rng) * params.rho;
            let s = from_tilted(&TiltedState { y1: F::zero(), y3: F::zero(), theta, psi }, &params);
            let y = crate::diskwall::V3::new(x1, F::zero(), alpha);
            let s = crate::diskwall::ConfigState { y, w: s.w };
            let out = collider.collide(&s, Limits::default()).ok()?;
            let t = to_tilted(&out.state, &params).ok()?;
            Some((t.theta, (t.psi - (F::PI() - psi)).abs()))
        })
        .collect();
    let mut thetas = Vec::with_capacity(n);
    let mut psi_errs = Vec::with_capacity(n);
    let mut excluded = 0usize;
    for r in rows {
        match r {
            Some((t, e)) => {
                thetas.push(t);
                psi_errs.push(e);
            }
            None => excluded += 1,
        }
    }
    (
        EmpiricalDist::from_samples(thetas, excluded, streams.seed),
        EmpiricalDist::from_samples(psi_errs, excluded, streams.seed),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub ks_theta: f64,
    pub median_psi_err: f64,
    pub singular_frac: f64,
    pub n: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub reports: Vec<Report>,
}

/// Run the full collision law along a decreasing ladder of scales and
/// compare the outgoing-angle law with the averaged kernel of the
/// foreshortened wall. The verdict asks the KS distance and the median
/// polar-angle error to be non-increasing within statistical noise.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<F: Float>(
    spec_at: impl Fn(F) -> WallSpec<F>,
    m: F,
    j: F,
    theta: F,
    psi: F,
    eps_list: &[F],
    n: usize,
    seed: u64,
) -> Result<ConvergenceStudy, crate::diskwall::DiskError> {
    assert!(
        eps_list.windows(2).all(|w| w[1] < w[0]),
        "eps ladder must be strictly decreasing"
    );
    let mut rows = Vec::new();
    for &eps in eps_list {
        let params = DiskParams::new(m, j, eps)?;
        let spec = spec_at(eps);
        let collider = Collider::new(&spec, params)?;
        let streams = Streams::new(seed, "convergence").child(&format!("eps={}", eps.as_f64()));
        let (thetas, psi_errs) = collide_theta_dist(&collider, theta, psi, n, &streams);

        let reference = averaged_kernel(
            collider.foreshortened_wall().spec(),
            theta,
            n,
            &streams.child("reference"),
        )
        .map_err(|e| crate::diskwall::DiskError::InvalidParam(e.to_string()))?;
        let ks = ks_two_sample(&thetas, &reference).unwrap_or(F::one());
        rows.push(ConvergenceRow {
            eps: eps.as_f64(),
            ks_theta: ks.as_f64(),
            median_psi_err: psi_errs.quantile(F::of(0.5)).as_f64(),
            singular_frac: thetas.excluded_fraction().as_f64(),
            n: n as u64,
        });
    }

    // Monotonicity within noise along the ladder.
    let noise = 2.0 / (n as f64).sqrt();
    let mut reports = Vec::new();
    for w in rows.windows(2) {
        reports.push(Report::new(
            format!("convergence/ks eps={} -> {}", w[0].eps, w[1].eps),
            w[1].ks_theta,
            w[0].ks_theta + noise,
            n as u64,
            seed,
        ));
        reports.push(Report::new(
            format!("convergence/psi eps={} -> {}", w[0].eps, w[1].eps),
            w[1].median_psi_err,
            w[0].median_psi_err * 1.05 + noise * 1e-3,
            n as u64,
            seed,
        ));
    }
    for r in &rows {
        reports.push(Report::new(
            format!("convergence/singular-frac eps={}", r.eps),
            r.singular_frac,
            0.01,
            n as u64,
            seed,
        ));
    }
    Ok(ConvergenceStudy { rows, reports })
}
