//! Monte Carlo network simulator: Poisson relays in a cone, lognormal
//! shadowing, Rayleigh taps, and the three received-SNR definitions.
//!
//! Each trial draws from its own xoshiro256++ stream keyed by (seed, trial
//! index), results are stored by trial index and reduced in index order, so estimates
//! are bitwise identical for any number of worker threads.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_alpha, effective_densities, NetworkParams, Scheme, TapProfile};

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Outer radius in metres; `None` derives it from `truncation_tol`.
    pub r_max: Option<f64>,
    pub truncation_tol: f64,
    pub s_grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64, s_grid: Vec<f64>, schemes: Vec<Scheme>) -> Self {
        McConfig {
            trials,
            seed,
            r_max: None,
            truncation_tol: 1e-3,
            s_grid,
            schemes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        if self.s_grid.is_empty()
            || self.s_grid.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.s_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::param("s_grid", "thresholds must be positive and strictly increasing"));
        }
        if !(self.truncation_tol > 0.0 && self.truncation_tol <= 0.1) {
            return Err(Error::param("truncation_tol", format!("must lie in (0, 0.1], got {}", self.truncation_tol)));
        }
        if let Some(r) = self.r_max {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param("r_max", format!("must be > 0, got {r}")));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "no scheme selected"));
        }
        for scheme in &self.schemes {
            if let Scheme::Random { channels: 0 } = scheme {
                return Err(Error::param("channels", "Q must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Radius beyond which the expected aggregate SNR of the dropped nodes,
/// λφ₀pℓ₀·r^{2−α}/(α−2), is at most `eps·s_ref`.
pub fn truncation_radius(params: &NetworkParams, eps: f64, s_ref: f64) -> Result<f64> {
    params.validate()?;
    check_alpha(params.pathloss_exponent)?;
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::param("truncation_tol", format!("must lie in (0, 0.1], got {eps}")));
    }
    if !(s_ref.is_finite() && s_ref > 0.0) {
        return Err(Error::param("s_min", format!("must be > 0, got {s_ref}")));
    }
    let k = params.pathloss_exponent - 2.0;
    let excluded_at_unit = params.node_density * params.cone_angle * params.tx_snr() * params.pathloss_const / k;
    Ok((excluded_at_unit / (eps * s_ref)).powf(1.0 / k))
}

/// Expected excluded aggregate SNR beyond `r_max`.
pub fn truncation_bound(params: &NetworkParams, r_max: f64) -> f64 {
    let k = params.pathloss_exponent - 2.0;
    params.node_density * params.cone_angle * params.tx_snr() * params.pathloss_const * r_max.powf(-k) / k
}

/// One realisation of the relay field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkSample {
    pub radius: Vec<f64>,
    pub shadow: Vec<f64>,
    /// Row-major `[node][tap]`, each CN(0, 1).
    pub gains: Vec<Complex64>,
    /// Uniform 32-bit code word; the code under Q channels is
    /// ⌊word·Q/2³²⌋, so codes for Q and 2Q are nested.
    pub code_word: Vec<u32>,
    /// Uniform thinning mark; keeping nodes with mark < ρ gives density ρλ.
    pub mark: Vec<f64>,
    pub taps: usize,
}

impl NetworkSample {
    pub fn node_count(&self) -> usize {
        self.radius.len()
    }

    /// Independent thinning with common random numbers.
    pub fn thinned(&self, keep: f64) -> NetworkSample {
        let mut out = NetworkSample::default();
        self.thin_into(keep, &mut out);
        out
    }

    /// As [`NetworkSample::thinned`], reusing `out`'s storage.
    pub fn thin_into(&self, keep: f64, out: &mut NetworkSample) {
        out.clear(self.taps);
        for k in 0..self.node_count() {
            if self.mark[k] < keep {
                out.radius.push(self.radius[k]);
                out.shadow.push(self.shadow[k]);
                out.gains.extend_from_slice(&self.gains[k * self.taps..(k + 1) * self.taps]);
                out.code_word.push(self.code_word[k]);
                out.mark.push(self.mark[k]);
            }
        }
    }

    fn clear(&mut self, taps: usize) {
        self.radius.clear();
        self.shadow.clear();
        self.gains.clear();
        self.code_word.clear();
        self.mark.clear();
        self.taps = taps;
    }

    /// Code index in `0..channels` of node `k`.
    pub fn code(&self, k: usize, channels: u32) -> usize {
        ((self.code_word[k] as u64 * channels as u64) >> 32) as usize
    }

    fn tap_gains(&self, k: usize) -> &[Complex64] {
        &self.gains[k * self.taps..(k + 1) * self.taps]
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator of trial `index` under `seed`. The first two state words
/// are bijective images of `seed` and `index`, so distinct pairs never share
/// a state.
pub fn trial_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    let s0 = splitmix64(seed);
    let s1 = splitmix64(index ^ 0x6a09_e667_f3bc_c908);
    let s2 = splitmix64(s0 ^ s1.rotate_left(17));
    let s3 = splitmix64(s2 ^ 0xbb67_ae85_84ca_a73b);
    let mut bytes = [0u8; 32];
    for (chunk, w) in bytes.chunks_exact_mut(8).zip([s0, s1, s2, s3]) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    Xoshiro256PlusPlus::from_seed(bytes)
}

/// Draw a field in the sector of radius `r_max`: K ~ Poisson(λφ₀r_max²/2),
/// r = r_max·√U, f = exp(σZ − σ²/2), CN(0,1) taps and a uniform code
/// word (see [`NetworkSample::code`]).
pub fn sample_network<R: Rng + ?Sized>(
    params: &NetworkParams,
    taps: &TapProfile,
    r_max: f64,
    rng: &mut R,
) -> NetworkSample {
    let mut sample = NetworkSample::default();
    sample_network_into(params, taps, r_max, rng, &mut sample);
    sample
}

/// As [`sample_network`], refilling `sample` in place so workers can keep
/// one allocation across trials.
pub fn sample_network_into<R: Rng + ?Sized>(
    params: &NetworkParams,
    taps: &TapProfile,
    r_max: f64,
    rng: &mut R,
    sample: &mut NetworkSample,
) {
    let mean = params.node_density * params.cone_angle * r_max * r_max / 2.0;
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let d = taps.tap_count();
    let sigma = params.shadow_sigma_ln();
    sample.clear(d);
    sample.radius.reserve(count);
    sample.shadow.reserve(count);
    sample.gains.reserve(count * d);
    sample.code_word.reserve(count);
    sample.mark.reserve(count);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..count {
        let u: f64 = rng.random();
        sample.radius.push(r_max * u.sqrt());
        let z: f64 = StandardNormal.sample(rng);
        sample.shadow.push((sigma * z - 0.5 * sigma * sigma).exp());
        for _ in 0..d {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            sample.gains.push(Complex64::new(re * half, im * half));
        }
        sample.code_word.push(rng.random());
        sample.mark.push(rng.random());
    }
}

fn path_gain(params: &NetworkParams, r: f64) -> f64 {
    let alpha = params.pathloss_exponent;
    if alpha == 4.0 {
        let r2 = r * r;
        params.pathloss_const / (r2 * r2)
    } else {
        params.pathloss_const * r.powf(-alpha)
    }
}

/// Σ_k g_k f_k p·Σ_d a_d|h_kd|².
pub fn snr_coherent(sample: &NetworkSample, params: &NetworkParams, taps: &TapProfile) -> f64 {
    let p = params.tx_snr();
    let mut total = 0.0;
    for k in 0..sample.node_count() {
        let z: f64 = sample
            .tap_gains(k)
            .iter()
            .zip(&taps.powers)
            .map(|(h, a)| a * h.norm_sqr())
            .sum();
        total += path_gain(params, sample.radius[k]) * sample.shadow[k] * p * z;
    }
    total
}

/// Σ_d a_d·|Σ_k √(g_k f_k p)·h_kd|².
pub fn snr_incoherent(sample: &NetworkSample, params: &NetworkParams, taps: &TapProfile) -> f64 {
    let p = params.tx_snr();
    let mut field = vec![Complex64::new(0.0, 0.0); sample.taps];
    for k in 0..sample.node_count() {
        let amp = (path_gain(params, sample.radius[k]) * sample.shadow[k] * p).sqrt();
        for (acc, h) in field.iter_mut().zip(sample.tap_gains(k)) {
            *acc += h * amp;
        }
    }
    field.iter().zip(&taps.powers).map(|(f, a)| a * f.norm_sqr()).sum()
}

/// Σ_q |Σ_{k in code q} √(g_k f_k p)·h_k|² on the first tap (flat fading).
pub fn snr_random(sample: &NetworkSample, params: &NetworkParams, channels: u32) -> f64 {
    let p = params.tx_snr();
    let channels = channels.max(1);
    let mut field = vec![Complex64::new(0.0, 0.0); channels as usize];
    for k in 0..sample.node_count() {
        let amp = (path_gain(params, sample.radius[k]) * sample.shadow[k] * p).sqrt();
        field[sample.code(k, channels)] += sample.tap_gains(k)[0] * amp;
    }
    field.iter().map(|f| f.norm_sqr()).sum()
}

pub fn snr(scheme: Scheme, sample: &NetworkSample, params: &NetworkParams, taps: &TapProfile) -> f64 {
    match scheme {
        Scheme::Coherent => snr_coherent(sample, params, taps),
        Scheme::Incoherent => snr_incoherent(sample, params, taps),
        Scheme::Random { channels } => snr_random(sample, params, channels),
    }
}

/// Empirical law of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeEstimate {
    pub scheme: Scheme,
    /// Fraction of trials with SNR < s, per threshold.
    pub outage: Vec<f64>,
    /// 95% Agresti–Coull half-width per threshold.
    pub half_width: Vec<f64>,
    /// Mean of ln(1+SNR), nats.
    pub capacity: f64,
    pub capacity_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub s_grid: Vec<f64>,
    pub schemes: Vec<SchemeEstimate>,
    pub trials: u64,
    pub seed: u64,
    pub r_max: f64,
}

impl McEstimate {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeEstimate> {
        self.schemes.iter().find(|e| e.scheme == scheme)
    }
}

/// 95% Agresti–Coull half-width for `hits` successes in `n` trials.
pub fn agresti_coull_half_width(hits: u64, n: u64) -> f64 {
    let z2 = Z95 * Z95;
    let nt = n as f64 + z2;
    let pt = (hits as f64 + z2 / 2.0) / nt;
    Z95 * (pt * (1.0 - pt) / nt).sqrt()
}

/// Pairwise (cascade) summation: error O(log n·ε), fixed evaluation order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Smallest threshold reference used for the automatic outer radius: the
/// smallest threshold for coherent reception, and for amplitude-combining
/// schemes the larger of that and the power scale λ̂^{α/2}, since dropping
/// far nodes perturbs the Gaussian field power rather than the threshold.
pub fn auto_reference(config: &McConfig, params: &NetworkParams, taps: &TapProfile) -> Result<f64> {
    let s_min = config.s_grid[0];
    let mut reference = f64::INFINITY;
    for scheme in &config.schemes {
        let r = match scheme {
            Scheme::Coherent => s_min,
            Scheme::Incoherent => {
                let ed = effective_densities(params, taps)?;
                s_min.max(ed.lambda_hat.powf(params.pathloss_exponent / 2.0))
            }
            Scheme::Random { .. } => {
                let ed = effective_densities(params, &TapProfile::flat())?;
                s_min.max(ed.lambda_hat.powf(params.pathloss_exponent / 2.0))
            }
        };
        reference = reference.min(r);
    }
    Ok(reference)
}

/// Largest mean node count per trial accepted for sampling; each node costs
/// about 100 bytes per worker.
pub const MAX_MEAN_NODES: f64 = 1e6;

/// The configured outer radius, or the automatic one, refused when the mean
/// node count in the sector would exceed [`MAX_MEAN_NODES`].
pub fn resolve_r_max(config: &McConfig, params: &NetworkParams, taps: &TapProfile) -> Result<f64> {
    let r = match config.r_max {
        Some(r) => r,
        None => truncation_radius(params, config.truncation_tol, auto_reference(config, params, taps)?)?,
    };
    let mean_nodes = params.node_density * params.cone_angle * r * r / 2.0;
    if mean_nodes > MAX_MEAN_NODES {
        return Err(Error::Unsupported(format!(
            "outer radius {r:.4e} m holds {mean_nodes:.3e} nodes on average (limit {MAX_MEAN_NODES:e}); \
             the threshold is far below the SNR scale at density {:e}, raise it, lower the density, \
             or set r_max explicitly",
            params.node_density
        )));
    }
    Ok(r)
}

fn check_schemes(config: &McConfig, taps: &TapProfile) -> Result<()> {
    if taps.tap_count() > 1 && config.schemes.iter().any(|s| matches!(s, Scheme::Random { .. })) {
        return Err(Error::param("schemes", "random channels assume flat fading (one tap)"));
    }
    Ok(())
}

/// Per-trial SNRs, `[trial][scheme]` flattened, for the configured schemes.
pub fn simulate_snrs(config: &McConfig, params: &NetworkParams, taps: &TapProfile) -> Result<(Vec<f64>, f64)> {
    config.validate()?;
    params.validate()?;
    check_schemes(config, taps)?;
    let r_max = resolve_r_max(config, params, taps)?;
    let n = config.schemes.len();
    let rows: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map_init(NetworkSample::default, |sample, i| {
            let mut rng = trial_rng(config.seed, i);
            sample_network_into(params, taps, r_max, &mut rng, sample);
            config.schemes.iter().map(|s| snr(*s, sample, params, taps)).collect()
        })
        .collect();
    let mut flat = Vec::with_capacity(rows.len() * n);
    rows.into_iter().for_each(|r| flat.extend(r));
    Ok((flat, r_max))
}

/// Outage and capacity estimates on the configured grid.
pub fn estimate(config: &McConfig, params: &NetworkParams, taps: &TapProfile) -> Result<McEstimate> {
    let (flat, r_max) = simulate_snrs(config, params, taps)?;
    let n = config.schemes.len();
    let schemes = config
        .schemes
        .iter()
        .enumerate()
        .map(|(j, scheme)| {
            let column: Vec<f64> = flat.iter().skip(j).step_by(n).copied().collect();
            summarize(*scheme, &column, &config.s_grid)
        })
        .collect();
    Ok(McEstimate {
        s_grid: config.s_grid.clone(),
        schemes,
        trials: config.trials,
        seed: config.seed,
        r_max,
    })
}

/// Estimates for a ladder of densities from one set of fields: each trial is
/// drawn at the largest density and thinned by its marks, so every rung sees
/// common random numbers. The outer radius is the one required by the
/// densest rung.
pub fn estimate_ladder(
    config: &McConfig,
    params: &NetworkParams,
    taps: &TapProfile,
    densities: &[f64],
) -> Result<Vec<McEstimate>> {
    config.validate()?;
    check_schemes(config, taps)?;
    if densities.is_empty() || densities.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::param("densities", "ladder densities must be positive"));
    }
    let top = densities.iter().cloned().fold(0.0, f64::max);
    let mut dense = params.clone();
    dense.node_density = top;
    dense.validate()?;
    let r_max = resolve_r_max(config, &dense, taps)?;
    let n = config.schemes.len();
    let rungs = densities.len();
    let rows: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map_init(
            || (NetworkSample::default(), NetworkSample::default()),
            |(sample, thin), i| {
                let mut rng = trial_rng(config.seed, i);
                sample_network_into(&dense, taps, r_max, &mut rng, sample);
                let mut row = Vec::with_capacity(rungs * n);
                for d in densities {
                    sample.thin_into(d / top, thin);
                    for s in &config.schemes {
                        row.push(snr(*s, thin, params, taps));
                    }
                }
                row
            },
        )
        .collect();
    Ok(densities
        .iter()
        .enumerate()
        .map(|(r, _)| McEstimate {
            s_grid: config.s_grid.clone(),
            schemes: config
                .schemes
                .iter()
                .enumerate()
                .map(|(j, scheme)| {
                    let column: Vec<f64> = rows.iter().map(|row| row[r * n + j]).collect();
                    summarize(*scheme, &column, &config.s_grid)
                })
                .collect(),
            trials: config.trials,
            seed: config.seed,
            r_max,
        })
        .collect())
}

/// Outage fractions, half-widths and log-capacity statistics of SNR draws.
pub fn summarize(scheme: Scheme, snrs: &[f64], s_grid: &[f64]) -> SchemeEstimate {
    let n = snrs.len() as u64;
    let mut sorted = snrs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (outage, half_width) = s_grid
        .iter()
        .map(|s| {
            let hits = sorted.partition_point(|x| x < s) as u64;
            (hits as f64 / n as f64, agresti_coull_half_width(hits, n))
        })
        .unzip();
    let logs: Vec<f64> = snrs.iter().map(|x| x.ln_1p()).collect();
    let mean = pairwise_sum(&logs) / n as f64;
    let dev: Vec<f64> = logs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if n > 1 { pairwise_sum(&dev) / (n as f64 - 1.0) } else { f64::NAN };
    SchemeEstimate {
        scheme,
        outage,
        half_width,
        capacity: mean,
        capacity_se: (var / n as f64).sqrt(),
    }
}

/// Two-column `trial snr` dump.
pub fn write_raw<W: Write>(mut out: W, snrs: &[f64]) -> Result<()> {
    for (i, s) in snrs.iter().enumerate() {
        writeln!(out, "{i} {s:.17e}")?;
    }
    Ok(())
}
