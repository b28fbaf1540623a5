//! Laplace transforms of the three SNR laws, their numerical inversion and
//! the transform-identity capacity E ln(1+S) = ∫₀^∞ (1 − L(u))·e^{−u}/u du.
//!
//! Inversion uses a Weideman-optimised Talbot contour with M = 64 nodes. When
//! the pdf is exponentially small (coherent law at small s) the Talbot sum
//! would cancel catastrophically, and a parabolic contour through the saddle
//! point of e^{us}·L(u) is used instead.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_alpha, Scheme, TapProfile};
use crate::quad::{self, Tolerance};
use crate::special::KahanSum;

/// Contour nodes for the Talbot inversion.
pub const TALBOT_NODES: usize = 64;
/// Relative standard-error target for Monte Carlo averaged transforms.
pub const MC_REL_TOL: f64 = 1e-4;
/// Antithetic pairs drawn for a Monte Carlo averaged transform.
pub const MC_DEFAULT_PAIRS: usize = 1 << 17;
/// Below this effective sample size an MC average is not trusted.
pub const MC_MIN_EFFECTIVE: f64 = 4096.0;
/// Independently shifted quasi-random replicates behind one Monte Carlo transform.
pub const MC_REPLICATES: usize = 16;
/// Outputs in (−CLAMP_LIMIT, 0) are treated as round-off and clamped to zero.
pub const CLAMP_LIMIT: f64 = 1e-9;

// Weideman's optimal cotangent contour parameters
const TAL_SIGMA: f64 = 0.6122;
const TAL_MU: f64 = 0.5017;
const TAL_BETA: f64 = 0.6407;
const TAL_NU: f64 = 0.2645;
// use the saddle contour once u*·s exceeds this multiple of M
const SADDLE_SWITCH: f64 = 0.1709;
const SADDLE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature1d,
    McAverage,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature1d => "quadrature_1d",
            Method::McAverage => "mc_average",
        }
    }
}

/// Laplace transform L(u) = E e^{−u·SNR} of one scheme.
#[derive(Debug, Clone)]
pub struct LaplaceHandle {
    pub scheme: Scheme,
    /// λ̄ for coherent, λ̂ otherwise.
    pub density: f64,
    pub alpha: f64,
    pub taps: Vec<f64>,
    pub method: Method,
    pub rel_tol: f64,
    // z^{2/α} samples of the multipath sum, in antithetic pairs
    mc_samples: Option<Arc<Vec<f64>>>,
}

impl LaplaceHandle {
    /// exp(−λ̄·u^{2/α}).
    pub fn coherent(lambda_bar: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_positive("lambda_bar", lambda_bar)?;
        Ok(LaplaceHandle {
            scheme: Scheme::Coherent,
            density: lambda_bar,
            alpha,
            taps: vec![1.0],
            method: Method::ClosedForm,
            rel_tol: 1e-14,
            mc_samples: None,
        })
    }

    /// Incoherent reception. One tap is a single 1-D quadrature; more taps
    /// are averaged over the multipath sum by Monte Carlo with the default
    /// sample size and seed 0.
    pub fn incoherent(lambda_hat: f64, alpha: f64, taps: &TapProfile) -> Result<Self> {
        if taps.tap_count() == 1 {
            return Self::quadrature(Scheme::Incoherent, lambda_hat, alpha, 1);
        }
        Self::incoherent_mc(lambda_hat, alpha, taps, MC_DEFAULT_PAIRS, 0)
    }

    /// Incoherent reception averaged over the multipath sum by randomised
    /// quasi-Monte Carlo: `MC_REPLICATES` independently shifted Halton
    /// designs of `pairs / MC_REPLICATES` antithetic draws each. The spread of
    /// the replicate means gives an honest standard error.
    pub fn incoherent_mc(lambda_hat: f64, alpha: f64, taps: &TapProfile, pairs: usize, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        check_positive("lambda_hat", lambda_hat)?;
        if pairs < MC_REPLICATES {
            return Err(Error::param("pairs", format!("need at least {MC_REPLICATES} sample pairs")));
        }
        let beta = 2.0 / alpha;
        let per = pairs / MC_REPLICATES;
        let bases = first_primes(taps.tap_count());
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(2 * per * MC_REPLICATES);
        for _ in 0..MC_REPLICATES {
            let shifts: Vec<f64> = bases.iter().map(|_| rng.random::<f64>()).collect();
            for i in 1..=per as u64 {
                let mut z = 0.0;
                let mut z_anti = 0.0;
                for ((a, base), shift) in taps.powers.iter().zip(&bases).zip(&shifts) {
                    let u = (radical_inverse(i, *base) + shift).fract();
                    // −ln(1−U) and −ln U: one uniform gives an antithetic pair
                    z += a * -(-u).ln_1p();
                    z_anti += a * -(u.max(f64::MIN_POSITIVE)).ln();
                }
                samples.push(z.powf(beta));
                samples.push(z_anti.powf(beta));
            }
        }
        Ok(LaplaceHandle {
            scheme: Scheme::Incoherent,
            density: lambda_hat,
            alpha,
            taps: taps.powers.clone(),
            method: Method::McAverage,
            rel_tol: MC_REL_TOL,
            mc_samples: Some(Arc::new(samples)),
        })
    }

    /// Random orthogonal channels: the Q-th power of one flat-fading
    /// integral at density λ̂/Q.
    pub fn random(lambda_hat: f64, alpha: f64, channels: u32) -> Result<Self> {
        if channels == 0 {
            return Err(Error::param("channels", "Q must be at least 1"));
        }
        Self::quadrature(Scheme::Random { channels }, lambda_hat, alpha, channels)
    }

    fn quadrature(scheme: Scheme, lambda_hat: f64, alpha: f64, _channels: u32) -> Result<Self> {
        check_alpha(alpha)?;
        check_positive("lambda_hat", lambda_hat)?;
        Ok(LaplaceHandle {
            scheme,
            density: lambda_hat,
            alpha,
            taps: vec![1.0],
            method: Method::Quadrature1d,
            rel_tol: 1e-10,
            mc_samples: None,
        })
    }

    fn channels(&self) -> u32 {
        match self.scheme {
            Scheme::Random { channels } => channels,
            _ => 1,
        }
    }

    fn beta(&self) -> f64 {
        2.0 / self.alpha
    }

    /// L(u) for real u ≥ 0.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::param("u", format!("must be >= 0, got {u}")));
        }
        if u == 0.0 {
            return Ok(1.0);
        }
        match self.method {
            Method::ClosedForm => Ok((-self.density * u.powf(self.beta())).exp()),
            Method::Quadrature1d => {
                let q = self.channels() as f64;
                let c = self.density / q * u.powf(self.beta());
                let one_minus = flat_integral_complement(c, self.beta())?;
                Ok((q * (-one_minus).ln_1p()).exp())
            }
            Method::McAverage => {
                let (mean, se) = self.mc_mean(|zb| (-self.density * u.powf(self.beta()) * zb).exp());
                if !(se <= self.rel_tol * mean) || mean <= 0.0 {
                    return Err(Error::AccuracyShortfall {
                        achieved: if mean > 0.0 { se / mean } else { f64::INFINITY },
                        target: self.rel_tol,
                    });
                }
                Ok(mean)
            }
        }
    }

    /// 1 − L(u) without cancellation for small u.
    pub fn one_minus(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::param("u", format!("must be >= 0, got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        match self.method {
            Method::ClosedForm => Ok(-(-self.density * u.powf(self.beta())).exp_m1()),
            Method::Quadrature1d => {
                let q = self.channels() as f64;
                let c = self.density / q * u.powf(self.beta());
                let one_minus = flat_integral_complement(c, self.beta())?;
                Ok(-(q * (-one_minus).ln_1p()).exp_m1())
            }
            Method::McAverage => {
                let (mean, se) = self.mc_mean(|zb| -(-self.density * u.powf(self.beta()) * zb).exp_m1());
                if !(se <= self.rel_tol * mean) || mean <= 0.0 {
                    return Err(Error::AccuracyShortfall {
                        achieved: if mean > 0.0 { se / mean } else { f64::INFINITY },
                        target: self.rel_tol,
                    });
                }
                Ok(mean)
            }
        }
    }

    // mean and standard error across the replicate designs
    fn mc_mean<F: Fn(f64) -> f64>(&self, f: F) -> (f64, f64) {
        let samples = self.mc_samples.as_ref().expect("mc handle carries samples");
        let per = samples.len() / MC_REPLICATES;
        let means: Vec<f64> = samples
            .chunks_exact(per)
            .map(|chunk| {
                let mut acc = KahanSum::default();
                chunk.iter().for_each(|zb| acc.add(f(*zb)));
                acc.value() / per as f64
            })
            .collect();
        let r = means.len() as f64;
        let mean = means.iter().sum::<f64>() / r;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
        // when a handful of draws carry the whole mass the replicate spread
        // says nothing; fall back to the effective sample size
        let (mut s1, mut s2) = (KahanSum::default(), KahanSum::default());
        for zb in samples.iter() {
            let v = f(*zb);
            s1.add(v);
            s2.add(v * v);
        }
        let ess = s1.value().powi(2) / s2.value();
        if !(ess >= MC_MIN_EFFECTIVE) {
            return (mean, mean / ess.max(1.0).sqrt());
        }
        (mean, (var / r).sqrt())
    }

    /// L(u) for complex u off the negative real axis (inversion contours).
    pub fn eval_complex(&self, u: Complex64) -> Result<Complex64> {
        match self.method {
            Method::ClosedForm => Ok((-self.density * u.powf(self.beta())).exp()),
            Method::Quadrature1d => {
                let q = self.channels() as f64;
                let c = self.density / q * u.powf(self.beta());
                let i = flat_integral(c, self.beta())?;
                Ok((q * i.ln()).exp())
            }
            Method::McAverage => Err(Error::UnsupportedMethod {
                method: Method::McAverage.label(),
            }),
        }
    }

    /// ln(e^{us}·L(u)) for the closed-form handle, used on saddle contours.
    fn log_kernel(&self, u: Complex64, s: f64) -> Complex64 {
        u * s - self.density * u.powf(self.beta())
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut k = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|p| *p * *p <= k).all(|p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

// Integration window for ∫₀^∞ e^{−q}·exp(−c·q^β) dq along a ray: the
// integrand has decayed below e^{−40} beyond `end`, and `start` resolves the
// boundary layer of width |c|^{−1/β}.
fn flat_breaks(c_abs: f64, beta: f64, cos_phi: f64) -> Vec<f64> {
    let layer = c_abs.powf(-1.0 / beta).min(1.0);
    let end = (40.0 / cos_phi).min((40.0 / (c_abs * cos_phi)).powf(1.0 / beta).max(40.0 * layer));
    let mut breaks = vec![0.0];
    let mut t = layer * 1e-4;
    while t < end {
        breaks.push(t);
        t *= 3.0;
    }
    breaks.push(end);
    breaks
}

/// I(c) = ∫₀^∞ e^{−q}·exp(−c·q^β) dq for complex c with |arg c| < π.
///
/// The ray q = r·e^{iφ}, φ = −arg(c)/(1+β), gives both exponents the same
/// positive real part, so the integrand decays monotonically in modulus.
pub fn flat_integral(c: Complex64, beta: f64) -> Result<Complex64> {
    let phi = -c.arg() / (1.0 + beta);
    if phi.abs() >= 0.49 * PI {
        return Err(Error::param("c", format!("argument {} too close to the cut", c.arg())));
    }
    let rot = Complex64::from_polar(1.0, phi);
    let rot_beta = Complex64::from_polar(1.0, beta * phi);
    let breaks = flat_breaks(c.norm(), beta, phi.cos());
    let r = quad::integrate_with_breaks(
        |t: f64| (-(rot * t) - c * rot_beta * t.powf(beta)).exp(),
        &breaks,
        Tolerance::new(1e-16, 1e-12),
    )?;
    Ok(rot * r.value)
}

/// 1 − I(c) for real c ≥ 0, computed as ∫ e^{−q}·(1 − e^{−c q^β}) dq.
pub fn flat_integral_complement(c: f64, beta: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let layer = c.powf(-1.0 / beta).min(1.0);
    let mut breaks = vec![0.0];
    let mut t = layer * 1e-4;
    while t < 40.0 {
        breaks.push(t);
        t *= 3.0;
    }
    breaks.push(40.0);
    let r = quad::integrate_with_breaks(
        |q: f64| (-q).exp() * -(-c * q.powf(beta)).exp_m1(),
        &breaks,
        Tolerance::new(1e-300, 1e-12),
    )?;
    // remainder beyond q = 40 is below e^{−40}
    Ok(r.value + (-40f64).exp() * -(-c * 40f64.powf(beta)).exp_m1())
}

/// Inverted values with the number of round-off negatives clamped to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub values: Vec<f64>,
    pub clamped: usize,
}

fn calibration() -> Result<()> {
    static CHECK: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECK
        .get_or_init(|| {
            let h = LaplaceHandle::coherent(1.0, 4.0).map_err(|e| e.to_string())?;
            for s in [0.05, 0.3, 1.0, 5.0, 20.0] {
                let got = pdf_point(&h, s, false).map_err(|e| e.to_string())?;
                let want = crate::analytic::pdf_coh(s, 1.0, 4.0).map_err(|e| e.to_string())?;
                if ((got - want) / want).abs() > 1e-7 {
                    return Err(format!("pdf at s={s}: {got} against {want}"));
                }
            }
            Ok(())
        })
        .clone()
        .map_err(Error::Calibration)
}

/// pdf of the SNR law at each grid point.
pub fn invert_to_pdf(handle: &LaplaceHandle, s_grid: &[f64]) -> Result<Inversion> {
    invert(handle, s_grid, false)
}

/// cdf (outage) of the SNR law at each grid point, by inverting L(u)/u.
pub fn invert_to_cdf(handle: &LaplaceHandle, s_grid: &[f64]) -> Result<Inversion> {
    invert(handle, s_grid, true)
}

fn invert(handle: &LaplaceHandle, s_grid: &[f64], cumulative: bool) -> Result<Inversion> {
    if handle.method == Method::McAverage {
        return Err(Error::UnsupportedMethod {
            method: Method::McAverage.label(),
        });
    }
    if let Some(bad) = s_grid.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::param("s", format!("grid values must be > 0, got {bad}")));
    }
    calibration()?;
    let raw: Vec<Result<f64>> = s_grid
        .par_iter()
        .map(|&s| pdf_point(handle, s, cumulative))
        .collect();
    let mut values = Vec::with_capacity(raw.len());
    let mut clamped = 0;
    for v in raw {
        let v = v?;
        if v < 0.0 && v > -CLAMP_LIMIT {
            clamped += 1;
            values.push(0.0);
        } else {
            values.push(v);
        }
    }
    Ok(Inversion { values, clamped })
}

fn pdf_point(handle: &LaplaceHandle, s: f64, cumulative: bool) -> Result<f64> {
    if handle.method == Method::ClosedForm {
        let beta = handle.beta();
        let saddle = (beta * handle.density / s).powf(1.0 / (1.0 - beta));
        if saddle * s > SADDLE_SWITCH * TALBOT_NODES as f64 {
            return Ok(saddle_contour(handle, s, saddle, cumulative));
        }
    }
    talbot(handle, s, cumulative)
}

// f(s) = (1/2πi)∫ e^{zs}·F(z) dz on z(θ) = (M/s)·(μθcot(bθ) − σ + iνθ).
fn talbot(handle: &LaplaceHandle, s: f64, cumulative: bool) -> Result<f64> {
    let m = TALBOT_NODES as f64;
    let scale = m / s;
    let mut acc = KahanSum::default();
    for k in 0..TALBOT_NODES {
        let theta = -PI + (k as f64 + 0.5) * 2.0 * PI / m;
        // conjugate symmetry: only θ > 0, doubled
        if theta <= 0.0 {
            continue;
        }
        let bt = TAL_BETA * theta;
        let cot = bt.cos() / bt.sin();
        let z = scale * Complex64::new(TAL_MU * theta * cot - TAL_SIGMA, TAL_NU * theta);
        let dz = scale * Complex64::new(TAL_MU * (cot - bt / bt.sin().powi(2)), TAL_NU);
        let mut f = handle.eval_complex(z)?;
        if cumulative {
            f /= z;
        }
        acc.add(((z * s).exp() * f * dz).im);
    }
    // (1/2πi)·Σ over both halves·(2π/M) → (2/M)·Σ_{θ>0} Im(...)·… with dz carrying 1/(2π) of the step
    Ok(acc.value() * 2.0 / m)
}

// Parabolic contour u = μ(1+iθ)² through the saddle μ of e^{us}·L(u),
// trapezoidal in θ with step matched to the Gaussian width there.
fn saddle_contour(handle: &LaplaceHandle, s: f64, mu: f64, cumulative: bool) -> f64 {
    let beta = handle.beta();
    let g2 = handle.density * beta * (1.0 - beta) * mu.powf(beta - 2.0);
    let width = 1.0 / (2.0 * mu * g2.sqrt());
    let h = (width / 2.0).min(0.2);
    let center = Complex64::new(mu, 0.0);
    let log_center = handle.log_kernel(center, s).re - if cumulative { mu.ln() } else { 0.0 };
    let mut acc = KahanSum::default();
    acc.add(0.5);
    for k in 1..=SADDLE_NODES {
        let theta = k as f64 * h;
        let w = Complex64::new(1.0, theta);
        let u = mu * w * w;
        let mut g = handle.log_kernel(u, s);
        if cumulative {
            g -= u.ln();
        }
        acc.add(((g - log_center).exp() * w).re);
    }
    log_center.exp() * 2.0 * mu * h / PI * acc.value()
}

/// E ln(1+SNR) = ∫₀^∞ (1 − L(u))·e^{−u}/u du in nats.
///
/// Integrated in w = u^{2/α}, where (1 − L)/w tends to a constant at 0, and
/// truncated at u = 50 where the remainder is below E₁(50) < 4e−24.
pub fn capacity_from_laplace(handle: &LaplaceHandle) -> Result<f64> {
    const U_MAX: f64 = 50.0;
    const REL_TOL: f64 = 1e-9;
    let beta = handle.beta();
    let tail_bound = expint_e1(U_MAX);
    let w_max = U_MAX.powf(beta);
    let mut failure = None;
    let breaks = quad::geometric_breaks(1e-6 * w_max, w_max, 3.0);
    let r = quad::integrate_with_breaks(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let u = w.powf(1.0 / beta);
            match handle.one_minus(u) {
                Ok(v) => v * (-u).exp() / (beta * w),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &breaks,
        Tolerance::new(1e-14, REL_TOL),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let tolerance = 1e-7 * r.value.abs().max(1e-300);
    if tail_bound > tolerance {
        return Err(Error::TailTruncation {
            bound: tail_bound,
            tolerance,
        });
    }
    Ok(r.value)
}

// E₁(x) by its continued fraction, x ≥ 1
fn expint_e1(x: f64) -> f64 {
    let mut b = x + 1.0;
    let mut c = 1.0 / f64::MIN_POSITIVE;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn laplace_examples() {
        let h = LaplaceHandle::coherent(1.0, 4.0).unwrap();
        assert_eq!(h.eval(0.0).unwrap(), 1.0);
        assert!(rel(h.eval(4.0).unwrap(), (-2f64).exp()) < 1e-15);
        let h2 = LaplaceHandle::coherent(2.0, 4.0).unwrap();
        assert!(rel(h2.eval(3.0).unwrap().ln(), 2.0 * h.eval(3.0).unwrap().ln()) < 1e-14);
    }

    #[test]
    fn flat_integral_known_values() {
        // β = 1/2 with c real: 1 − c·(√π/2)·erfcx(c/2)
        for c in [0.1f64, 1.0, 7.0] {
            let want = 1.0 - c * PI.sqrt() / 2.0 * crate::special::erfcx(c / 2.0);
            let got = flat_integral(Complex64::new(c, 0.0), 0.5).unwrap();
            assert!(rel(got.re, want) < 1e-11 && got.im.abs() < 1e-14, "c={c}");
            assert!(rel(1.0 - flat_integral_complement(c, 0.5).unwrap(), want) < 1e-11);
        }
        // complex c stays analytic: compare against the real-axis series in c
        let c = Complex64::from_polar(0.8, 1.4);
        let got = flat_integral(c, 0.5).unwrap();
        let mut series = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..80 {
            series += term * libm::tgamma(1.0 + 0.5 * n as f64);
            term *= -c / (n as f64 + 1.0);
        }
        assert!((got - series).norm() < 1e-10, "{got} vs {series}");
    }

    #[test]
    fn coherent_inversion_is_calibrated() {
        let h = LaplaceHandle::coherent(1.0, 4.0).unwrap();
        let grid: Vec<f64> = (0..40).map(|k| 0.05 * (400f64).powf(k as f64 / 39.0)).collect();
        let inv = invert_to_pdf(&h, &grid).unwrap();
        for (s, v) in grid.iter().zip(&inv.values) {
            let want = analytic::pdf_coh(*s, 1.0, 4.0).unwrap();
            assert!(rel(*v, want) < 1e-6, "s={s}: {v} vs {want}");
        }
        let cdf = invert_to_cdf(&h, &grid).unwrap();
        for (s, v) in grid.iter().zip(&cdf.values) {
            let want = analytic::outage_coh_a4(*s, 1.0).unwrap();
            assert!(rel(*v, want) < 1e-6, "s={s}: {v} vs {want}");
        }
    }

    #[test]
    fn incoherent_single_tap_inversion() {
        let h = LaplaceHandle::incoherent(1.0, 4.0, &TapProfile::flat()).unwrap();
        let grid: Vec<f64> = (0..12).map(|k| 0.01 * (1000f64).powf(k as f64 / 11.0)).collect();
        let inv = invert_to_pdf(&h, &grid).unwrap();
        for (s, v) in grid.iter().zip(&inv.values) {
            let want = analytic::pdf_inc_a4(*s, 1.0, &TapProfile::flat()).unwrap();
            assert!(rel(*v, want) < 1e-6, "s={s}: {v} vs {want}");
        }
    }

    #[test]
    fn mc_handles_refuse_inversion() {
        let taps = TapProfile::from_powers(vec![0.6, 0.4]).unwrap();
        let h = LaplaceHandle::incoherent(1.0, 4.0, &taps).unwrap();
        assert!(matches!(invert_to_pdf(&h, &[1.0]), Err(Error::UnsupportedMethod { .. })));
        assert_eq!(h.eval(0.0).unwrap(), 1.0);
        for u in [1e-3, 0.1, 0.5, 3.0] {
            assert!(h.eval(u).is_ok() && h.one_minus(u).is_ok(), "u={u}");
        }
        // far in the tail the relative error target cannot be met
        assert!(matches!(h.eval(1e8), Err(Error::AccuracyShortfall { .. })));
    }

    #[test]
    fn capacity_identity() {
        let h = LaplaceHandle::coherent(1.0, 4.0).unwrap();
        let c = capacity_from_laplace(&h).unwrap();
        assert!((c - analytic::capacity_coh_a4(1.0).unwrap()).abs() < 1e-6, "{c}");
        let h = LaplaceHandle::incoherent(1.0, 4.0, &TapProfile::flat()).unwrap();
        let c = capacity_from_laplace(&h).unwrap();
        assert!((c - 2.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-6, "{c}");
    }

    #[test]
    fn e1_value() {
        assert!(rel(expint_e1(1.0), 0.219_383_934_395_520_27) < 1e-13);
    }
}
