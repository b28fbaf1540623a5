//! Closed-form SNR laws, outage probabilities and capacities.
//!
//! At α = 4 the coherent SNR is one-sided stable with index 1/2 and both the
//! coherent and incoherent laws are available in closed form. For other α
//! only the small-s asymptotes are closed; the exact curves come from
//! [`crate::transform`].

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};
use crate::model::{
    check_alpha, well_conditioned_coeffs, EffectiveDensity, NetworkParams, Scheme, TapProfile,
};
use crate::quad::{self, Tolerance};
use crate::special::{erfc, erfcx, erfi, hyp2f2_1_1__32_2, ln_gamma, KahanSum};
use crate::transform::{self, LaplaceHandle};

/// Partial-fraction sums are abandoned for the Craig-type integral once
/// cancellation could cost more than this relative accuracy.
const CANCELLATION_REL_TOL: f64 = 1e-10;

/// Small-s forms are flagged once s exceeds this fraction of their reach
/// (λ^{α/2}, shrunk by the tap or code series' radius of convergence).
pub const SADDLE_VALIDITY: f64 = 0.1;

// Above this λ̄ the Erfi/₂F₂ difference loses more than ~4 digits.
const CAPACITY_SERIES_MAX: f64 = 6.0;

fn check_threshold(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::param("s", format!("threshold must be finite and > 0, got {s}")))
    }
}

fn check_density(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// G_{D,α} = (2/α)^{1/(α−2)}·λ̄^{α/(2(α−2))}/√(π(α−2)).
pub fn g_const(lambda_bar: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_density("lambda_bar", lambda_bar)?;
    let k = alpha - 2.0;
    Ok(((2.0 / alpha).ln() / k + alpha / (2.0 * k) * lambda_bar.ln()).exp() / (PI * k).sqrt())
}

/// ln B_{D,α}; B itself overflows for a few hundred taps.
pub fn ln_b_const(powers: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if powers.is_empty() {
        return Err(Error::param("powers", "empty tap profile"));
    }
    let d = powers.len() as f64;
    let k = alpha - 2.0;
    let log_prod: f64 = powers.iter().map(|a| a.ln()).sum();
    Ok(ln_gamma((k * d + 1.0) / 2.0)? + (d + 1.0) * (alpha / 2.0).ln()
        + (k * d - 1.0) / 2.0 * (alpha / k).ln()
        - ln_gamma(d)?
        - 0.5 * (PI * k).ln()
        - log_prod)
}

/// B_{D,α} = Γ(((α−2)D+1)/2)·(α/2)^{D+1}·(α/(α−2))^{((α−2)D−1)/2}
///           / (Γ(D)·√(π(α−2))·Π a_d).
pub fn b_const(powers: &[f64], alpha: f64) -> Result<f64> {
    finite_exp(ln_b_const(powers, alpha)?, "b_const")
}

/// ln C_{Q,α}.
pub fn ln_c_const(channels: u32, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if channels == 0 {
        return Err(Error::param("channels", "Q must be at least 1"));
    }
    let q = channels as f64;
    let k = alpha - 2.0;
    Ok(ln_gamma((k * q + 1.0) / 2.0)? + q * ln_gamma(alpha / 2.0)?
        + 2.0 * q * (alpha / 2.0).ln()
        + (1.0 - k * q) / 2.0 * (k / alpha).ln()
        - 0.5 * (PI * k).ln()
        - ln_gamma(alpha * q / 2.0)?
        + alpha * q / 2.0 * q.ln())
}

/// C_{Q,α} = Γ(((α−2)Q+1)/2)·Γ(α/2)^Q·(α/2)^{2Q}·((α−2)/α)^{(1−(α−2)Q)/2}
///           / (√(π(α−2))·Γ(αQ/2)·Q^{−αQ/2}).
pub fn c_const(channels: u32, alpha: f64) -> Result<f64> {
    finite_exp(ln_c_const(channels, alpha)?, "c_const")
}

fn finite_exp(ln: f64, function: &'static str) -> Result<f64> {
    let v = ln.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(crate::SpecialFnError::Overflow { function, arg: ln }.into())
    }
}

/// The three small-s constants of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub g: f64,
    pub b: f64,
    pub c: f64,
}

impl AsymptoticConstants {
    pub fn new(density: &EffectiveDensity, taps: &TapProfile, channels: u32) -> Result<Self> {
        Ok(AsymptoticConstants {
            g: g_const(density.lambda_bar, density.alpha)?,
            b: b_const(&taps.powers, density.alpha)?,
            c: c_const(channels, density.alpha)?,
        })
    }
}

/// Coherent pdf by the saddle-point formula; exact (Lévy) at α = 4 and
/// unnormalised otherwise.
pub fn pdf_coh(s: f64, lambda_bar: f64, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    let g = g_const(lambda_bar, alpha)?;
    let k = alpha - 2.0;
    let inner = 2.0 * lambda_bar.powf(alpha / 2.0) / (alpha * s);
    Ok(g * s.powf(-(alpha - 1.0) / k) * (-(k / alpha) * inner.powf(2.0 / k)).exp())
}

/// P(SNR_coh < s) = 2Q(λ̄/√(2s)) = erfc(λ̄/(2√s)) at α = 4.
pub fn outage_coh_a4(s: f64, lambda_bar: f64) -> Result<f64> {
    check_threshold(s)?;
    check_density("lambda_bar", lambda_bar)?;
    Ok(erfc(lambda_bar / (2.0 * s.sqrt())))
}

fn check_taps(taps: &TapProfile) -> Result<()> {
    if taps.powers.is_empty() || taps.powers.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::param("powers", "tap powers must be positive and finite"));
    }
    Ok(())
}

/// Incoherent pdf at α = 4: Σ_d 2A_d·λ̂·√a_d/(4s + a_d·λ̂²)^{3/2}.
///
/// Falls back to the θ-integral form when the partial-fraction sum would
/// cancel below working precision (many taps, or s ≪ λ̂²).
pub fn pdf_inc_a4(s: f64, lambda_hat: f64, taps: &TapProfile) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    check_density("lambda_hat", lambda_hat)?;
    check_taps(taps)?;
    if let Some(coeffs) = well_conditioned_coeffs(&taps.powers)? {
        let mut acc = KahanSum::default();
        let mut scale = 0.0;
        for (a, c) in taps.powers.iter().zip(&coeffs) {
            let term = 2.0 * c * lambda_hat * a.sqrt() / (4.0 * s + a * lambda_hat * lambda_hat).powf(1.5);
            acc.add(term);
            scale += term.abs();
        }
        let value = acc.value();
        if value > 8.0 * f64::EPSILON * scale / CANCELLATION_REL_TOL || s == 0.0 {
            return Ok(value.max(0.0));
        }
    }
    if s == 0.0 {
        // every tap beyond the first contributes a factor s
        return Ok(0.0);
    }
    craig_inc_a4(s, lambda_hat, &taps.powers, CraigQuantity::Pdf)
}

/// Incoherent outage at α = 4: 1 − Σ_d A_d·√a_d·λ̂/√(4s + a_d·λ̂²).
pub fn outage_inc_a4(s: f64, lambda_hat: f64, taps: &TapProfile) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    check_density("lambda_hat", lambda_hat)?;
    check_taps(taps)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if taps.powers.len() == 1 {
        // 1 − 1/√(1+4x) without cancellation
        let x = 4.0 * s / (lambda_hat * lambda_hat);
        let root = (1.0 + x).sqrt();
        return Ok(x / ((1.0 + root) * root));
    }
    if let Some(coeffs) = well_conditioned_coeffs(&taps.powers)? {
        let mut survival = KahanSum::default();
        let mut scale = 1.0;
        for (a, c) in taps.powers.iter().zip(&coeffs) {
            let term = c * a.sqrt() * lambda_hat / (4.0 * s + a * lambda_hat * lambda_hat).sqrt();
            survival.add(term);
            scale += term.abs();
        }
        let value = 1.0 - survival.value();
        if value > 8.0 * f64::EPSILON * scale / CANCELLATION_REL_TOL {
            return Ok(value.min(1.0));
        }
    }
    craig_inc_a4(s, lambda_hat, &taps.powers, CraigQuantity::Outage)
}

/// 1 − outage_inc_a4, accurate when the outage is close to one.
pub fn survival_inc_a4(s: f64, lambda_hat: f64, taps: &TapProfile) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    check_density("lambda_hat", lambda_hat)?;
    check_taps(taps)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    if let Some(coeffs) = well_conditioned_coeffs(&taps.powers)? {
        let mut survival = KahanSum::default();
        let mut scale = 0.0;
        for (a, c) in taps.powers.iter().zip(&coeffs) {
            let term = c * a.sqrt() * lambda_hat / (4.0 * s + a * lambda_hat * lambda_hat).sqrt();
            survival.add(term);
            scale += term.abs();
        }
        if survival.value() > 8.0 * f64::EPSILON * scale / CANCELLATION_REL_TOL {
            return Ok(survival.value().min(1.0));
        }
    }
    craig_inc_a4(s, lambda_hat, &taps.powers, CraigQuantity::Survival)
}

#[derive(Clone, Copy, PartialEq)]
enum CraigQuantity {
    Outage,
    Survival,
    Pdf,
}

// SNR_inc = W·z with W Lévy(λ̂) and z = Σ a_d E_d, so
// P(W z < s) = E_z erfc(λ̂√z/(2√s)) = (2/π)∫₀^{π/2} Π_d (1 + b_d/sin²θ)^{−1} dθ,
// b_d = a_d λ̂²/(4s). Every term is positive, so any number of taps is fine.
fn craig_inc_a4(s: f64, lambda_hat: f64, powers: &[f64], what: CraigQuantity) -> Result<f64> {
    let b: Vec<f64> = powers
        .iter()
        .map(|a| a * lambda_hat * lambda_hat / (4.0 * s))
        .collect();
    let integrand = |theta: f64| -> f64 {
        let sin2 = theta.sin().powi(2);
        if sin2 == 0.0 {
            return match what {
                CraigQuantity::Survival => 1.0,
                _ => 0.0,
            };
        }
        let log_prod: f64 = b.iter().map(|bd| (bd / sin2).ln_1p()).sum();
        match what {
            CraigQuantity::Outage => (-log_prod).exp(),
            CraigQuantity::Survival => -(-log_prod).exp_m1(),
            CraigQuantity::Pdf => {
                let weight: f64 = b.iter().map(|bd| bd / (sin2 + bd)).sum();
                (-log_prod).exp() * weight
            }
        }
    };
    // the product vanishes like θ^{2D} near 0; geometric breaks resolve it
    let theta_scale = b.iter().cloned().fold(f64::INFINITY, f64::min).sqrt().min(1.0);
    let mut breaks = vec![0.0];
    let mut t = (theta_scale * 1e-3).min(0.1);
    while t < PI / 2.0 {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(PI / 2.0);
    let r = quad::integrate_with_breaks(integrand, &breaks, Tolerance::new(0.0, 1e-12))?;
    let value = FRAC_2_PI * r.value;
    Ok(match what {
        CraigQuantity::Pdf => value / s,
        _ => value.clamp(0.0, 1.0),
    })
}

/// Total mass of [`pdf_inc_a4`]: the body integrated in ln s over
/// [1e-14, 1e14]·λ̂², the head as a rectangle and the k·s^{−3/2} tail in
/// closed form.
pub fn pdf_inc_a4_mass(lambda_hat: f64, taps: &TapProfile) -> Result<f64> {
    check_density("lambda_hat", lambda_hat)?;
    let scale = lambda_hat * lambda_hat;
    let (lower, upper) = (1e-14 * scale, 1e14 * scale);
    let mut breaks = vec![lower.ln()];
    let mut t = lower.ln() + 2.0;
    while t < upper.ln() {
        breaks.push(t);
        t += 2.0;
    }
    breaks.push(upper.ln());
    let mut failure = None;
    let body = quad::integrate_with_breaks(
        |t: f64| {
            let s = t.exp();
            match pdf_inc_a4(s, lambda_hat, taps) {
                Ok(v) => v * s,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &breaks,
        Tolerance::new(1e-15, 1e-13),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let head = pdf_inc_a4(lower, lambda_hat, taps)? * lower;
    let k = pdf_inc_a4(upper, lambda_hat, taps)? * upper.powf(1.5);
    Ok(body?.value + head + 2.0 * k / upper.sqrt())
}

/// k-th Taylor coefficient of the α = 4 incoherent outage in x = s/λ̂²:
/// (−1)^{k+1}·C(2k,k)·Σ_d A_d·a_d^{−k}. Vanishes for 1 ≤ k < D.
pub fn outage_inc_a4_taylor_coeff(k: u32, taps: &TapProfile) -> Result<f64> {
    check_taps(taps)?;
    if k == 0 {
        return Ok(0.0);
    }
    let coeffs = crate::model::partial_fraction_coeffs(&taps.powers)?;
    let mut acc = KahanSum::default();
    for (a, c) in taps.powers.iter().zip(&coeffs) {
        acc.add(c * a.powi(-(k as i32)));
    }
    let kf = k as f64;
    let ln_central = ln_gamma(2.0 * kf + 1.0)? - 2.0 * ln_gamma(kf + 1.0)?;
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * ln_central.exp() * acc.value())
}

/// Small-s incoherent pdf B_{D,α}·s^{D−1}/λ̂^{αD/2}.
pub fn pdf_inc_smalls(s: f64, lambda_hat: f64, taps: &TapProfile, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    check_density("lambda_hat", lambda_hat)?;
    check_taps(taps)?;
    let d = taps.powers.len() as f64;
    Ok((ln_b_const(&taps.powers, alpha)? + (d - 1.0) * s.ln()
        - alpha * d / 2.0 * lambda_hat.ln())
    .exp())
}

/// Small-s incoherent outage (B_{D,α}/D)·(s/λ̂^{α/2})^D.
pub fn outage_inc_smalls(s: f64, lambda_hat: f64, taps: &TapProfile, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    check_density("lambda_hat", lambda_hat)?;
    check_taps(taps)?;
    let d = taps.powers.len() as f64;
    let x = s / lambda_hat.powf(alpha / 2.0);
    Ok((ln_b_const(&taps.powers, alpha)? - d.ln() + d * x.ln()).exp())
}

/// Small-s random-channel pdf C_{Q,α}·s^{Q−1}/λ̂^{αQ/2}.
pub fn pdf_rand_smalls(s: f64, lambda_hat: f64, channels: u32, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    check_density("lambda_hat", lambda_hat)?;
    let q = channels as f64;
    Ok((ln_c_const(channels, alpha)? + (q - 1.0) * s.ln() - alpha * q / 2.0 * lambda_hat.ln()).exp())
}

/// Small-s random-channel outage (C_{Q,α}/Q)·(s/λ̂^{α/2})^Q.
pub fn outage_rand_smalls(s: f64, lambda_hat: f64, channels: u32, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    check_density("lambda_hat", lambda_hat)?;
    let q = channels as f64;
    let x = s / lambda_hat.powf(alpha / 2.0);
    Ok((ln_c_const(channels, alpha)? - q.ln() + q * x.ln()).exp())
}

/// One tap's share of the α = 4 incoherent capacity, y = a_d·λ̂²:
/// 2·atan(ε)/ε with ε = √((4−y)/y) below y = 4, 2·atanh(ε)/ε with
/// ε = √((y−4)/y) above, and their common series near y = 4.
pub fn capacity_tap_term(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let below = y < 4.0;
    let e2 = (4.0 - y).abs() / y;
    if e2 < 1e-6 {
        let sign = if below { -1.0 } else { 1.0 };
        let t = sign * e2;
        return 2.0 * (1.0 + t / 3.0 + t * t / 5.0 + t * t * t / 7.0);
    }
    let e = e2.sqrt();
    if below {
        2.0 * e.atan() / e
    } else {
        2.0 * e.atanh() / e
    }
}

/// Ergodic capacity (nats) of incoherent reception at α = 4:
/// Σ_d A_d·T(a_d·λ̂²) with T from [`capacity_tap_term`].
pub fn capacity_inc_a4(lambda_hat: f64, taps: &TapProfile) -> Result<f64> {
    check_taps(taps)?;
    if lambda_hat == 0.0 {
        return Ok(0.0);
    }
    check_density("lambda_hat", lambda_hat)?;
    if let Some(coeffs) = well_conditioned_coeffs(&taps.powers)? {
        let mut acc = KahanSum::default();
        let mut scale = 0.0;
        for (a, c) in taps.powers.iter().zip(&coeffs) {
            let term = c * capacity_tap_term(a * lambda_hat * lambda_hat);
            acc.add(term);
            scale += term.abs();
        }
        if acc.value() > 1e7 * 8.0 * f64::EPSILON * scale {
            return Ok(acc.value());
        }
    }
    capacity_from_survival(|s| survival_inc_a4(s, lambda_hat, taps), lambda_hat * lambda_hat)
}

/// E ln(1+S) = ∫₀^∞ P(S > s)/(1+s) ds, integrated in t = ln s.
pub fn capacity_from_survival<F>(mut survival: F, scale: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let center = scale.max(1e-300).ln();
    let lo = center - 60.0;
    // P(S > s) decays like s^{−1/2} at α = 4; the tail above e^{hi} is bounded
    // by ∫ C s^{−3/2} ds and added analytically from the last value
    let hi = center.max(0.0) + 80.0;
    let mut breaks = vec![lo];
    let mut t = center - 40.0;
    while t < hi {
        breaks.push(t);
        t += 4.0;
    }
    breaks.push(hi);
    let r = quad::integrate_with_breaks(
        |t: f64| {
            let s = t.exp();
            match survival(s) {
                Ok(v) => v * s / (1.0 + s),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &breaks,
        Tolerance::new(1e-15, 1e-12),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let s_hi = hi.exp();
    let tail = 2.0 * survival(s_hi)?;
    // below e^{lo} the survival is 1: ∫₀^{e^{lo}} ds/(1+s)
    Ok(r.value + lo.exp().ln_1p() + tail)
}

/// Ergodic capacity (nats) of coherent reception at α = 4:
/// π·Erfi(λ̄/2) − (λ̄²/2)·₂F₂(1,1;3/2,2;λ̄²/4).
///
/// The two terms grow like e^{λ̄²/4} while their difference grows like
/// ln λ̄², so above λ̄ = 6 the equivalent form √π·∫₀^λ̄ erfcx(t/2) dt is
/// integrated instead.
pub fn capacity_coh_a4(lambda_bar: f64) -> Result<f64> {
    if lambda_bar == 0.0 {
        return Ok(0.0);
    }
    check_density("lambda_bar", lambda_bar)?;
    if lambda_bar <= CAPACITY_SERIES_MAX {
        let x = lambda_bar * lambda_bar / 4.0;
        return Ok(PI * erfi(lambda_bar / 2.0)? - 2.0 * x * hyp2f2_1_1__32_2(x)?);
    }
    capacity_coh_a4_integral(lambda_bar)
}

/// √π·∫₀^λ̄ erfcx(t/2) dt, the cancellation-free form of the coherent capacity.
pub fn capacity_coh_a4_integral(lambda_bar: f64) -> Result<f64> {
    check_density("lambda_bar", lambda_bar)?;
    let mut breaks = vec![0.0];
    let mut t = 1.0;
    while t < lambda_bar {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(lambda_bar);
    let r = quad::integrate_with_breaks(|t: f64| erfcx(t / 2.0), &breaks, Tolerance::new(1e-15, 1e-14))?;
    Ok(PI.sqrt() * r.value)
}

/// Which formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Closed form, exact at α = 4.
    ExactAlpha4,
    /// Leading-order small-s asymptote (saddle point for coherent α ≠ 4).
    SmallS,
    /// Numerical Laplace inversion or transform-identity quadrature.
    Numeric,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::ExactAlpha4 => "exact_alpha4",
            Regime::SmallS => "smalls",
            Regime::Numeric => "numeric",
        }
    }
}

/// A value together with how it was obtained and whether the formula is
/// inside its stated validity region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub regime: Regime,
    pub in_validity: bool,
}

impl Evaluated {
    fn exact(value: f64) -> Self {
        Evaluated {
            value,
            regime: Regime::ExactAlpha4,
            in_validity: true,
        }
    }

    fn numeric(value: f64) -> Self {
        Evaluated {
            value,
            regime: Regime::Numeric,
            in_validity: true,
        }
    }
}

/// Scheme-tagged SNR law for one scenario.
#[derive(Debug, Clone)]
pub struct SnrDistribution {
    pub scheme: Scheme,
    pub density: EffectiveDensity,
    pub taps: TapProfile,
    pub alpha: f64,
}

impl SnrDistribution {
    pub fn new(scheme: Scheme, params: &NetworkParams, taps: &TapProfile) -> Result<Self> {
        let taps = match scheme {
            Scheme::Random { channels } => {
                if channels == 0 {
                    return Err(Error::param("channels", "Q must be at least 1"));
                }
                // flat fading is assumed for random code assignment
                TapProfile::flat()
            }
            _ => taps.clone(),
        };
        let density = crate::model::effective_densities(params, &taps)?;
        Ok(SnrDistribution {
            scheme,
            alpha: density.alpha,
            density,
            taps,
        })
    }

    /// Build directly from an effective density (λ̄ is recomputed from λ̂).
    pub fn from_lambda_hat(scheme: Scheme, lambda_hat: f64, taps: &TapProfile, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_density("lambda_hat", lambda_hat)?;
        let taps = match scheme {
            Scheme::Random { .. } => TapProfile::flat(),
            _ => taps.clone(),
        };
        let moment = crate::model::multipath_moment(&taps, alpha)?;
        let density = EffectiveDensity {
            lambda_bar: lambda_hat * moment,
            lambda_hat,
            multipath_moment: moment,
            lognormal_moment: f64::NAN,
            partial_fractions: well_conditioned_coeffs(&taps.powers)?,
            alpha,
        };
        Ok(SnrDistribution {
            scheme,
            density,
            taps,
            alpha,
        })
    }

    fn is_alpha4(&self) -> bool {
        (self.alpha - 4.0).abs() < 1e-12
    }

    /// The density that governs this scheme (λ̄ coherent, λ̂ otherwise).
    pub fn governing_density(&self) -> f64 {
        match self.scheme {
            Scheme::Coherent => self.density.lambda_bar,
            _ => self.density.lambda_hat,
        }
    }

    /// s-scale λ^{α/2} of the law.
    pub fn snr_scale(&self) -> f64 {
        self.governing_density().powf(self.alpha / 2.0)
    }

    fn incoherent_like_taps(&self) -> Option<&TapProfile> {
        match self.scheme {
            Scheme::Incoherent => Some(&self.taps),
            Scheme::Random { channels: 1 } => Some(&self.taps),
            _ => None,
        }
    }

    pub fn laplace(&self) -> Result<LaplaceHandle> {
        match self.scheme {
            Scheme::Coherent => LaplaceHandle::coherent(self.density.lambda_bar, self.alpha),
            Scheme::Incoherent => LaplaceHandle::incoherent(self.density.lambda_hat, self.alpha, &self.taps),
            Scheme::Random { channels } => LaplaceHandle::random(self.density.lambda_hat, self.alpha, channels),
        }
    }

    /// Exact pdf: closed form at α = 4 where one exists, numerical
    /// inversion otherwise.
    pub fn pdf(&self, s: f64) -> Result<Evaluated> {
        check_threshold(s)?;
        if self.is_alpha4() {
            if let Scheme::Coherent = self.scheme {
                return Ok(Evaluated::exact(pdf_coh(s, self.density.lambda_bar, 4.0)?));
            }
            if let Some(taps) = self.incoherent_like_taps() {
                return Ok(Evaluated::exact(pdf_inc_a4(s, self.density.lambda_hat, taps)?));
            }
        }
        let inv = transform::invert_to_pdf(&self.laplace()?, &[s])?;
        Ok(Evaluated::numeric(inv.values[0]))
    }

    /// Exact outage P(SNR < s).
    pub fn outage(&self, s: f64) -> Result<Evaluated> {
        check_threshold(s)?;
        if self.is_alpha4() {
            if let Scheme::Coherent = self.scheme {
                return Ok(Evaluated::exact(outage_coh_a4(s, self.density.lambda_bar)?));
            }
            if let Some(taps) = self.incoherent_like_taps() {
                return Ok(Evaluated::exact(outage_inc_a4(s, self.density.lambda_hat, taps)?));
            }
        }
        let inv = transform::invert_to_cdf(&self.laplace()?, &[s])?;
        Ok(Evaluated::numeric(inv.values[0].clamp(0.0, 1.0)))
    }

    /// Small-s approximation of the outage with its validity flag.
    pub fn outage_smalls(&self, s: f64) -> Result<Evaluated> {
        check_threshold(s)?;
        let value = match self.scheme {
            Scheme::Coherent => {
                if self.is_alpha4() {
                    outage_coh_a4(s, self.density.lambda_bar)?
                } else {
                    outage_coh_saddle(s, self.density.lambda_bar, self.alpha)?
                }
            }
            Scheme::Incoherent => outage_inc_smalls(s, self.density.lambda_hat, &self.taps, self.alpha)?,
            Scheme::Random { channels } => outage_rand_smalls(s, self.density.lambda_hat, channels, self.alpha)?,
        };
        // the tap and code series converge for x < a_min/4 and x < 1/(4Q^{α/2})
        let reach = match self.scheme {
            Scheme::Coherent => 1.0,
            Scheme::Incoherent => self.taps.powers.iter().cloned().fold(f64::INFINITY, f64::min) / 4.0,
            Scheme::Random { channels } => 0.25 / (channels as f64).powf(self.alpha / 2.0),
        };
        Ok(Evaluated {
            value,
            regime: Regime::SmallS,
            in_validity: s <= SADDLE_VALIDITY * reach * self.snr_scale(),
        })
    }

    /// Ergodic capacity in nats.
    pub fn capacity(&self) -> Result<Evaluated> {
        if self.is_alpha4() {
            if let Scheme::Coherent = self.scheme {
                return Ok(Evaluated::exact(capacity_coh_a4(self.density.lambda_bar)?));
            }
            if let Some(taps) = self.incoherent_like_taps() {
                return Ok(Evaluated::exact(capacity_inc_a4(self.density.lambda_hat, taps)?));
            }
        }
        Ok(Evaluated::numeric(transform::capacity_from_laplace(&self.laplace()?)?))
    }
}

/// Integral of the saddle-point coherent pdf from 0 to s, for α ≠ 4.
pub fn outage_coh_saddle(s: f64, lambda_bar: f64, alpha: f64) -> Result<f64> {
    check_threshold(s)?;
    let mut breaks = vec![0.0];
    let mut t = s * 1e-3;
    while t < s {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(s);
    let mut failure = None;
    let r = quad::integrate_with_breaks(
        |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            pdf_coh(x, lambda_bar, alpha).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        },
        &breaks,
        Tolerance::new(0.0, 1e-10),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}
