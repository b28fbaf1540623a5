//! Scenario parameters, multipath tap profiles and the effective densities
//! λ̄ (coherent) and λ̂ (incoherent / random channels).
//!
//! Everything downstream depends on the scenario only through these two
//! scalars plus the tap powers, so this module is the single place where
//! physical units are converted.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::special::{gamma, KahanSum};

/// Reception scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Per-transmitter orthogonal channels, matched and power-summed.
    Coherent,
    /// Amplitudes superpose per tap with random phases.
    Incoherent,
    /// `channels` orthogonal codes, each node picks one uniformly (flat fading).
    Random { channels: u32 },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Coherent => "coherent".into(),
            Scheme::Incoherent => "incoherent".into(),
            Scheme::Random { channels } => format!("random_q{channels}"),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Pathloss constant ℓ₀ such that the gain at `reference_m` metres equals
/// `gain_db`: ℓ₀ = 10^{gain_db/10}·reference_m^α.
pub fn pathloss_const_from_reference(gain_db: f64, reference_m: f64, alpha: f64) -> f64 {
    db_to_linear(gain_db) * reference_m.powf(alpha)
}

/// Default density: one node per 1000 m².
pub const DEFAULT_DENSITY: f64 = 1e-3;
pub const DEFAULT_CONE_ANGLE: f64 = 2.0 * PI / 3.0;
pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_SHADOW_SIGMA_DB: f64 = 8.0;
pub const DEFAULT_L0_DB: f64 = -93.0;
pub const DEFAULT_L0_REFERENCE_M: f64 = 25.0;
/// Transmit SNR p = P/(BW·N₀) at the default bandwidth; the transmit power
/// itself is held fixed when the bandwidth moves.
pub const DEFAULT_TX_SNR_DB: f64 = 0.0;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 10e6;
/// −97.8 dBm noise power over the default 10 MHz.
pub const DEFAULT_NOISE_PSD_DBM_HZ: f64 = -167.8;
pub const DEFAULT_DELAY_SPREAD_S: f64 = 0.17e-6;
pub const DEFAULT_CAPTURE: f64 = 0.9;

/// Physical and geometric scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// λ, nodes per m².
    pub node_density: f64,
    /// φ₀, radians.
    pub cone_angle: f64,
    /// α.
    pub pathloss_exponent: f64,
    /// Standard deviation of 10·log₁₀ f, in dB.
    pub shadow_sigma_db: f64,
    /// ℓ₀, linear; the gain at distance r is ℓ₀/r^α.
    pub pathloss_const: f64,
    /// P, watts.
    pub tx_power: f64,
    /// BW, Hz.
    pub bandwidth: f64,
    /// N₀, watts per Hz.
    pub noise_psd: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            node_density: DEFAULT_DENSITY,
            cone_angle: DEFAULT_CONE_ANGLE,
            pathloss_exponent: DEFAULT_ALPHA,
            shadow_sigma_db: DEFAULT_SHADOW_SIGMA_DB,
            pathloss_const: pathloss_const_from_reference(
                DEFAULT_L0_DB,
                DEFAULT_L0_REFERENCE_M,
                DEFAULT_ALPHA,
            ),
            tx_power: db_to_linear(DEFAULT_TX_SNR_DB)
                * DEFAULT_BANDWIDTH_HZ
                * dbm_to_watts(DEFAULT_NOISE_PSD_DBM_HZ),
            bandwidth: DEFAULT_BANDWIDTH_HZ,
            noise_psd: dbm_to_watts(DEFAULT_NOISE_PSD_DBM_HZ),
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("node_density", self.node_density)?;
        if !(self.cone_angle > 0.0 && self.cone_angle <= 2.0 * PI + 1e-12) {
            return Err(Error::param(
                "cone_angle",
                format!("must lie in (0, 2π], got {}", self.cone_angle),
            ));
        }
        check_alpha(self.pathloss_exponent)?;
        if !(self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0) {
            return Err(Error::param(
                "shadow_sigma_db",
                format!("must be >= 0, got {}", self.shadow_sigma_db),
            ));
        }
        positive("pathloss_const", self.pathloss_const)?;
        positive("tx_power", self.tx_power)?;
        positive("bandwidth", self.bandwidth)?;
        positive("noise_psd", self.noise_psd)?;
        positive("tx_snr", self.tx_snr())
    }

    /// Transmit SNR p = P/(BW·N₀).
    pub fn tx_snr(&self) -> f64 {
        self.tx_power / (self.bandwidth * self.noise_psd)
    }

    /// Set P so that the transmit SNR at the current bandwidth equals `p`.
    pub fn set_tx_snr(&mut self, p: f64) {
        self.tx_power = p * self.bandwidth * self.noise_psd;
    }

    /// Natural-log standard deviation σ of the shadowing factor.
    pub fn shadow_sigma_ln(&self) -> f64 {
        self.shadow_sigma_db * LN_10 / 10.0
    }

    /// Mean received SNR of one node at distance `r` (before fading).
    pub fn mean_gain(&self, r: f64) -> f64 {
        self.tx_snr() * self.pathloss_const / r.powf(self.pathloss_exponent)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 2.0 {
        Ok(())
    } else {
        Err(Error::param(
            "alpha",
            format!("pathloss exponent must exceed 2, got {alpha}"),
        ))
    }
}

/// Exponential multipath power profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    /// ξ, seconds (0 for profiles not built from a delay spread).
    pub delay_spread: f64,
    /// Normalised tap powers a_d, Σ a_d = 1.
    pub powers: Vec<f64>,
    pub capture_fraction: f64,
}

impl TapProfile {
    /// Single tap, a = [1].
    pub fn flat() -> Self {
        TapProfile {
            delay_spread: 0.0,
            powers: vec![1.0],
            capture_fraction: DEFAULT_CAPTURE,
        }
    }

    /// Arbitrary positive powers, normalised to unit sum.
    pub fn from_powers(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() || powers.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::param("powers", "tap powers must be positive and finite"));
        }
        let mut sum = KahanSum::default();
        powers.iter().for_each(|a| sum.add(*a));
        let total = sum.value();
        Ok(TapProfile {
            delay_spread: 0.0,
            powers: powers.into_iter().map(|a| a / total).collect(),
            capture_fraction: DEFAULT_CAPTURE,
        })
    }

    pub fn tap_count(&self) -> usize {
        self.powers.len()
    }
}

/// Tap profile for bandwidth `bw` (Hz) and delay spread `xi` (s):
/// a_d ∝ e^{−(d−1)/(BW·ξ)} − e^{−d/(BW·ξ)}, with D the smallest count whose
/// unnormalised captured power 1 − e^{−D/(BW·ξ)} reaches `capture`.
///
/// `xi = 0` is the flat-fading limit D = 1, a = [1].
pub fn build_tap_profile(bw: f64, xi: f64, capture: f64) -> Result<TapProfile> {
    if !(bw.is_finite() && bw > 0.0) {
        return Err(Error::param("bandwidth", format!("must be > 0, got {bw}")));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::param("delay_spread", format!("must be >= 0, got {xi}")));
    }
    if !(capture > 0.0 && capture < 1.0) {
        return Err(Error::param("capture", format!("must lie in (0, 1), got {capture}")));
    }
    if xi == 0.0 {
        return Ok(TapProfile {
            capture_fraction: capture,
            ..TapProfile::flat()
        });
    }
    let spread = bw * xi;
    let captured = |d: usize| -(-(d as f64) / spread).exp_m1();
    let mut count = (-spread * (-capture).ln_1p()).ceil().max(1.0) as usize;
    while captured(count) < capture {
        count += 1;
    }
    while count > 1 && captured(count - 1) >= capture {
        count -= 1;
    }
    // a_d = e^{-(d-1)/x}(1 - e^{-1/x}) / (1 - e^{-D/x})
    let head = -(-1.0 / spread).exp_m1() / captured(count);
    let mut powers: Vec<f64> = (0..count)
        .map(|d| head * (-(d as f64) / spread).exp())
        .collect();
    let mut sum = KahanSum::default();
    powers.iter().for_each(|a| sum.add(*a));
    let total = sum.value();
    powers.iter_mut().for_each(|a| *a /= total);
    Ok(TapProfile {
        delay_spread: xi,
        powers,
        capture_fraction: capture,
    })
}

/// Relative tolerance under which two tap powers count as equal.
pub const DEGENERATE_RTOL: f64 = 1e-9;

/// Above this Σ|A_d| the partial-fraction sums lose more than ~6 digits and
/// the integral forms are used instead.
pub const MAX_PARTIAL_FRACTION_CONDITION: f64 = 1e6;

/// A_d = Π_{k≠d} (1 − a_k/a_d)^{−1}.
pub fn partial_fraction_coeffs(a: &[f64]) -> Result<Vec<f64>> {
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in a.iter().enumerate().skip(i + 1) {
            if (x - y).abs() <= DEGENERATE_RTOL * x.abs().max(y.abs()) {
                return Err(Error::DegenerateProfile {
                    first: i,
                    second: j,
                    value: x,
                });
            }
        }
    }
    Ok((0..a.len()).map(|d| coefficient_dd(a, d).to_f64()).collect())
}

// Double-double arithmetic for the coefficient products: every A_d comes out
// correctly rounded even when Σ|A_d| is in the millions.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn two_diff(a: f64, b: f64) -> Dd {
        let s = a - b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) - (b + bb))
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        let h = p + e;
        Dd(h, e - (h - p))
    }

    /// n / self for a plain numerator.
    fn recip_scaled(self, n: f64) -> Dd {
        let q1 = n / self.0;
        let p = q1 * self.0;
        let r = (n - p - q1.mul_add(self.0, -p)) - q1 * self.1;
        let q2 = r / self.0;
        let h = q1 + q2;
        Dd(h, q2 - (h - q1))
    }

    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
}

fn coefficient_dd(a: &[f64], d: usize) -> Dd {
    a.iter()
        .enumerate()
        .filter(|(k, _)| *k != d)
        .fold(Dd(1.0, 0.0), |acc, (_, &ak)| {
            acc.mul(Dd::two_diff(a[d], ak).recip_scaled(a[d]))
        })
}

/// Σ_d |A_d|; 1 means no cancellation at all.
pub fn partial_fraction_condition(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c.abs()).sum()
}

/// Partial-fraction coefficients if they are usable at double precision.
pub fn well_conditioned_coeffs(a: &[f64]) -> Result<Option<Vec<f64>>> {
    let coeffs = partial_fraction_coeffs(a)?;
    Ok((partial_fraction_condition(&coeffs) <= MAX_PARTIAL_FRACTION_CONDITION).then_some(coeffs))
}

/// E[f^{2/α}] for unit-mean lognormal shadowing: exp[σ²/α·(2/α − 1)], with
/// σ = σ_dB·ln10/10.
pub fn lognormal_moment(sigma_db: f64, alpha: f64) -> f64 {
    let sigma = sigma_db * LN_10 / 10.0;
    (sigma * sigma / alpha * (2.0 / alpha - 1.0)).exp()
}

/// E[z^{2/α}] for z = Σ a_d|h_d|² with independent unit Rayleigh taps.
pub fn multipath_moment(taps: &TapProfile, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    match well_conditioned_coeffs(&taps.powers)? {
        Some(coeffs) => Ok(multipath_moment_partial_fractions(&taps.powers, &coeffs, alpha)?),
        None => multipath_moment_integral(&taps.powers, alpha),
    }
}

/// Γ(1+2/α)·Σ_d A_d·a_d^{2/α}.
pub fn multipath_moment_partial_fractions(a: &[f64], coeffs: &[f64], alpha: f64) -> Result<f64> {
    let beta = 2.0 / alpha;
    let mut acc = KahanSum::default();
    for (ad, cd) in a.iter().zip(coeffs) {
        acc.add(cd * ad.powf(beta));
    }
    Ok(gamma(1.0 + beta)? * acc.value())
}

/// E[z^β] = β/Γ(1−β)·∫₀^∞ (1 − E e^{−tz}) t^{−β−1} dt with
/// E e^{−tz} = Π_d (1 + a_d t)^{−1}; stable for any number of taps, including
/// repeated powers.
pub fn multipath_moment_integral(a: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let beta = 2.0 / alpha;
    // t = e^x; integrand (1 − Π)·t^{−β}
    let one_minus = |t: f64| -> f64 {
        let s: f64 = a.iter().map(|ad| (ad * t).ln_1p()).sum();
        -(-s).exp_m1()
    };
    let x_lo = (1e-9f64).ln();
    let a_min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = (1e12 / a_min).ln();
    let mut breaks = vec![x_lo];
    let mut x = x_lo + 2.0;
    while x < x_hi {
        breaks.push(x);
        x += 2.0;
    }
    breaks.push(x_hi);
    let body = quad::integrate_with_breaks(
        |x: f64| {
            let t = x.exp();
            one_minus(t) * (-beta * x).exp()
        },
        &breaks,
        Tolerance::new(1e-15, 1e-13),
    )?;
    // below x_lo: 1 − Π ≈ t (Σa = 1); above x_hi: 1 − Π ≈ 1
    let low_tail = (x_lo * (1.0 - beta)).exp() / (1.0 - beta);
    let high_tail = (-beta * x_hi).exp() / beta;
    Ok(beta / gamma(1.0 - beta)? * (body.value + low_tail + high_tail))
}

/// The scalar constants that carry all scenario physics.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDensity {
    /// λ̄, governs the coherent SNR law.
    pub lambda_bar: f64,
    /// λ̂, governs the incoherent and random-channel laws.
    pub lambda_hat: f64,
    /// E[z^{2/α}].
    pub multipath_moment: f64,
    /// E[f^{2/α}].
    pub lognormal_moment: f64,
    /// A_d when the partial-fraction form is well conditioned.
    pub partial_fractions: Option<Vec<f64>>,
    pub alpha: f64,
}

/// λ̂ = (λφ₀/2)·Γ(1−2/α)·(pℓ₀)^{2/α}·E[f^{2/α}] and λ̄ = λ̂·E[z^{2/α}].
///
/// The factor φ₀/2 is the area of the unit-radius sector; with it the
/// Laplace exponent of Σ_k g_k f_k p over a Poisson field in the sector is
/// exactly −λ̂·u^{2/α} (and −λ̄·u^{2/α} once the multipath sum is included).
pub fn effective_densities(params: &NetworkParams, taps: &TapProfile) -> Result<EffectiveDensity> {
    params.validate()?;
    let alpha = params.pathloss_exponent;
    let beta = 2.0 / alpha;
    let reflection = gamma(1.0 - beta)? * gamma(1.0 + beta)?;
    let closed = 2.0 * PI / (alpha * (2.0 * PI / alpha).sin());
    if ((reflection - closed) / closed).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "Γ reflection identity check failed at α={alpha}: {reflection} vs {closed}"
        )));
    }
    let shadow = lognormal_moment(params.shadow_sigma_db, alpha);
    let lambda_hat = 0.5
        * params.node_density
        * params.cone_angle
        * gamma(1.0 - beta)?
        * (params.tx_snr() * params.pathloss_const).powf(beta)
        * shadow;
    let partial_fractions = well_conditioned_coeffs(&taps.powers)?;
    let moment = match &partial_fractions {
        Some(coeffs) => multipath_moment_partial_fractions(&taps.powers, coeffs, alpha)?,
        None => multipath_moment_integral(&taps.powers, alpha)?,
    };
    Ok(EffectiveDensity {
        lambda_bar: lambda_hat * moment,
        lambda_hat,
        multipath_moment: moment,
        lognormal_moment: shadow,
        partial_fractions,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tap_count_examples() {
        let p = build_tap_profile(10e6, 0.17e-6, 0.9).unwrap();
        assert_eq!(p.tap_count(), 4);
        let p = build_tap_profile(10e6, 0.65e-6, 0.9).unwrap();
        assert_eq!(p.tap_count(), 15);
        let p = build_tap_profile(10e6, 0.0, 0.9).unwrap();
        assert_eq!(p.powers, vec![1.0]);
    }

    #[test]
    fn tap_profile_rejects_bad_input() {
        assert!(build_tap_profile(0.0, 1e-6, 0.9).is_err());
        assert!(build_tap_profile(1e6, -1e-6, 0.9).is_err());
        assert!(build_tap_profile(1e6, 1e-6, 1.0).is_err());
    }

    #[test]
    fn profile_is_the_exponential_shape() {
        let p = build_tap_profile(10e6, 0.17e-6, 0.9).unwrap();
        let x: f64 = 1.7;
        let raw: Vec<f64> = (1..=4)
            .map(|d| (-((d - 1) as f64) / x).exp() - (-(d as f64) / x).exp())
            .collect();
        let n0 = 1.0 / raw.iter().sum::<f64>();
        for (a, r) in p.powers.iter().zip(&raw) {
            assert!((a - n0 * r).abs() < 1e-15);
        }
    }

    #[test]
    fn partial_fraction_examples() {
        assert_eq!(partial_fraction_coeffs(&[1.0]).unwrap(), vec![1.0]);
        let c = partial_fraction_coeffs(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-14 && (c[1] + 1.0).abs() < 1e-14);
        assert!(matches!(
            partial_fraction_coeffs(&[0.5, 0.5]),
            Err(Error::DegenerateProfile { .. })
        ));
    }

    #[test]
    fn lognormal_examples() {
        assert_eq!(lognormal_moment(0.0, 4.0), 1.0);
        let v = lognormal_moment(8.0, 4.0);
        assert!((v - 0.654_3).abs() < 1e-4, "{v}");
        // approaches 1 monotonically as α grows
        // the exponent −σ²(α−2)/α² is extremal at α = 4 and shrinks beyond it
        let vals: Vec<f64> = [4.0, 5.0, 10.0, 100.0, 1e4].iter().map(|&a| lognormal_moment(8.0, a)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!((vals[4] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn multipath_single_tap() {
        let m = multipath_moment(&TapProfile::flat(), 4.0).unwrap();
        assert!((m - PI.sqrt() / 2.0).abs() < 1e-15);
        let m3 = multipath_moment(&TapProfile::flat(), 3.0).unwrap();
        assert!((m3 - gamma(1.0 + 2.0 / 3.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn multipath_routes_agree() {
        for (bw, xi) in [(10e6, 0.17e-6), (10e6, 0.65e-6), (3e6, 0.65e-6), (20e6, 0.17e-6)] {
            let taps = build_tap_profile(bw, xi, 0.9).unwrap();
            let coeffs = partial_fraction_coeffs(&taps.powers).unwrap();
            for alpha in [2.5, 3.0, 4.0, 6.0] {
                let pf = multipath_moment_partial_fractions(&taps.powers, &coeffs, alpha).unwrap();
                let int = multipath_moment_integral(&taps.powers, alpha).unwrap();
                assert!(((pf - int) / int).abs() < 1e-9, "D={} α={alpha}: {pf} vs {int}", taps.tap_count());
            }
        }
    }

    #[test]
    fn integral_route_handles_many_and_equal_taps() {
        // equal powers: z ~ Gamma(D, 1/D), E z^β = Γ(D+β)/(Γ(D) D^β)
        for d in [2usize, 5, 40] {
            let a = vec![1.0 / d as f64; d];
            let got = multipath_moment_integral(&a, 4.0).unwrap();
            let want = (crate::special::ln_gamma(d as f64 + 0.5).unwrap()
                - crate::special::ln_gamma(d as f64).unwrap())
            .exp()
                / (d as f64).sqrt();
            assert!(((got - want) / want).abs() < 1e-10, "D={d}: {got} vs {want}");
        }
        let big = build_tap_profile(100e6, 0.65e-6, 0.9).unwrap();
        assert_eq!(big.tap_count(), 150);
        let m = multipath_moment(&big, 4.0).unwrap();
        assert!(m > 0.99 && m < 1.0, "{m}");
    }

    #[test]
    fn effective_density_examples() {
        let mut params = NetworkParams::default();
        params.shadow_sigma_db = 0.0;
        let ed = effective_densities(&params, &TapProfile::flat()).unwrap();
        assert!((ed.lambda_bar - ed.lambda_hat * gamma(1.5).unwrap()).abs() < 1e-15 * ed.lambda_bar);
        // α = 4 prefactor: Γ(1/2)Γ(3/2) = π/2
        assert!((gamma(0.5).unwrap() * gamma(1.5).unwrap() - PI / 2.0).abs() < 1e-15);

        let params = NetworkParams::default();
        let taps = build_tap_profile(10e6, 0.17e-6, 0.9).unwrap();
        let base = effective_densities(&params, &taps).unwrap();
        let mut doubled = params.clone();
        doubled.tx_power *= 2.0;
        let d = effective_densities(&doubled, &taps).unwrap();
        let factor = 2f64.powf(2.0 / params.pathloss_exponent);
        assert!((d.lambda_hat / base.lambda_hat - factor).abs() < 1e-13);
        assert!((d.lambda_bar / base.lambda_bar - factor).abs() < 1e-13);
    }

    #[test]
    fn alpha_two_is_rejected() {
        let mut params = NetworkParams::default();
        params.pathloss_exponent = 2.0;
        assert!(effective_densities(&params, &TapProfile::flat()).is_err());
    }

    #[test]
    fn db_round_trips() {
        for x in [-170.0, -93.0, 0.0, 3.0, 40.0] {
            assert!((linear_to_db(db_to_linear(x)) - x).abs() < 1e-12);
            assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn profiles_are_normalised_and_decreasing(bw in 1e5f64..2e8, xi in 1e-9f64..2e-6, cap in 0.5f64..0.99) {
            let p = build_tap_profile(bw, xi, cap).unwrap();
            let sum: f64 = p.powers.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.powers.windows(2).all(|w| w[1] < w[0]));
            // minimal D
            let x = bw * xi;
            let d = p.tap_count() as f64;
            prop_assert!(1.0 - (-d / x).exp() >= cap);
            if p.tap_count() > 1 {
                prop_assert!(1.0 - (-(d - 1.0) / x).exp() < cap);
            }
        }

        #[test]
        fn tap_count_monotone_in_delay_spread(bw in 1e5f64..1e8, xi in 1e-9f64..1e-6, step in 1.0f64..3.0) {
            let a = build_tap_profile(bw, xi, 0.9).unwrap();
            let b = build_tap_profile(bw, xi * step, 0.9).unwrap();
            prop_assert!(b.tap_count() >= a.tap_count());
        }

        #[test]
        fn partial_fractions_sum_to_one(bw in 1e5f64..4e7, xi in 1e-8f64..0.5e-6) {
            let p = build_tap_profile(bw, xi, 0.9).unwrap();
            prop_assume!(p.tap_count() <= 17);
            let c = partial_fraction_coeffs(&p.powers).unwrap();
            let mut sum = KahanSum::default();
            c.iter().for_each(|x| sum.add(*x));
            prop_assert!((sum.value() - 1.0).abs() < 1e-10, "D={} sum={}", p.tap_count(), sum.value());
        }

        #[test]
        fn partial_fraction_sum_at_rounding_floor(bw in 1e5f64..4e7, xi in 1e-8f64..0.5e-6) {
            // for 18..=20 taps Σ|A_d| reaches 3e7, so storing A_d as f64
            // alone perturbs the sum by more than 1e-10
            let p = build_tap_profile(bw, xi, 0.9).unwrap();
            prop_assume!(p.tap_count() <= 20);
            let c = partial_fraction_coeffs(&p.powers).unwrap();
            let mut sum = KahanSum::default();
            c.iter().for_each(|x| sum.add(*x));
            let floor = f64::EPSILON * partial_fraction_condition(&c);
            prop_assert!((sum.value() - 1.0).abs() < 1e-10_f64.max(floor), "D={} sum={}", p.tap_count(), sum.value());
        }

        #[test]
        fn density_power_collapse(lambda in 1e-5f64..1e-1, p_dbm in -20f64..30.0, alpha in 2.2f64..6.0) {
            let mut a = NetworkParams { node_density: 2.0 * lambda, pathloss_exponent: alpha, ..NetworkParams::default() };
            a.tx_power = dbm_to_watts(p_dbm);
            let mut b = a.clone();
            b.node_density = lambda;
            b.tx_power *= 2f64.powf(alpha / 2.0);
            let taps = build_tap_profile(10e6, 0.17e-6, 0.9).unwrap();
            let ea = effective_densities(&a, &taps).unwrap();
            let eb = effective_densities(&b, &taps).unwrap();
            prop_assert!(((ea.lambda_hat - eb.lambda_hat) / ea.lambda_hat).abs() < 1e-13);
            prop_assert!(((ea.lambda_bar - eb.lambda_bar) / ea.lambda_bar).abs() < 1e-13);
        }
    }
}
