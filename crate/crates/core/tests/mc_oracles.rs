use std::collections::HashSet;

use relay_sg::analytic::SnrDistribution;
use relay_sg::model::{build_tap_profile, NetworkParams, Scheme, TapProfile};
use relay_sg::simulate::{self, McConfig, NetworkSample};

fn table_taps() -> TapProfile {
    build_tap_profile(10e6, 0.17e-6, 0.9).unwrap()
}

/// Default parameters with the transmit SNR scaled so the scheme's
/// governing density equals `target`.
fn at_density(scheme: Scheme, taps: &TapProfile, target: f64) -> NetworkParams {
    let mut params = NetworkParams::default();
    let d = SnrDistribution::new(scheme, &params, taps).unwrap().governing_density();
    params.set_tx_snr(params.tx_snr() * (target / d).powf(params.pathloss_exponent / 2.0));
    params
}

#[test]
fn node_count_and_shadowing_means() {
    let params = NetworkParams::default();
    let taps = table_taps();
    let r_max = 200.0;
    let trials = 100_000u64;
    let mean = params.node_density * params.cone_angle * r_max * r_max / 2.0;
    let mut count = 0.0;
    let mut f_sum = 0.0;
    let mut f_sq = 0.0;
    let mut h_sq = 0.0;
    for i in 0..trials {
        let s = simulate::sample_network(&params, &taps, r_max, &mut simulate::trial_rng(3, i));
        count += s.node_count() as f64;
        for f in &s.shadow {
            f_sum += f;
            f_sq += f * f;
        }
        h_sq += s.gains.iter().map(|h| h.norm_sqr()).sum::<f64>();
    }
    let k_hat = count / trials as f64;
    let k_se = (mean / trials as f64).sqrt();
    assert!((k_hat - mean).abs() <= 3.0 * k_se, "E[K] {k_hat} vs {mean}");
    let f_mean = f_sum / count;
    let f_se = ((f_sq / count - f_mean * f_mean) / count).sqrt();
    assert!((f_mean - 1.0).abs() <= 3.0 * f_se, "E[f] {f_mean} +- {f_se}");
    let gains = count * taps.tap_count() as f64;
    let h_mean = h_sq / gains;
    assert!((h_mean - 1.0).abs() <= 3.0 / gains.sqrt(), "E|h|^2 {h_mean}");
}

#[test]
fn coherent_laplace_transform_at_four() {
    // α = 4, λ̄ = 1: E[e^{−4 SNR}] = e^{−2}
    let taps = table_taps();
    let params = at_density(Scheme::Coherent, &taps, 1.0);
    let config = McConfig::new(50_000, 5, vec![1.0], vec![Scheme::Coherent]);
    let (snrs, _) = simulate::simulate_snrs(&config, &params, &taps).unwrap();
    let w: Vec<f64> = snrs.iter().map(|s| (-4.0 * s).exp()).collect();
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let se = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let want = (-2.0f64).exp();
    assert!((mean - want).abs() <= 3.0 * se, "{mean} +- {se} vs {want}");
}

#[test]
fn outage_nonincreasing_on_density_ladder() {
    let taps = table_taps();
    let params = NetworkParams::default();
    let densities = [2e-4, 3e-4, 4.5e-4, 7e-4, 1e-3];
    let top = NetworkParams { node_density: 1e-3, ..params.clone() };
    let lambda_bar = SnrDistribution::new(Scheme::Coherent, &top, &taps).unwrap().governing_density();
    let s = 0.3 * lambda_bar * lambda_bar;
    let config = McConfig::new(20_000, 8, vec![s], vec![Scheme::Coherent, Scheme::Incoherent]);
    let ests = simulate::estimate_ladder(&config, &params, &taps, &densities).unwrap();
    for scheme in [Scheme::Coherent, Scheme::Incoherent] {
        let p: Vec<f64> = ests.iter().map(|e| e.scheme(scheme).unwrap().outage[0]).collect();
        assert!(p.windows(2).all(|w| w[1] <= w[0]), "{scheme:?}: {p:?}");
        assert!(p[0] > p[4], "{scheme:?}: {p:?}");
    }
}

fn within_radius(s: &NetworkSample, r: f64) -> NetworkSample {
    let mut out = NetworkSample { taps: s.taps, ..NetworkSample::default() };
    for k in 0..s.node_count() {
        if s.radius[k] <= r {
            out.radius.push(s.radius[k]);
            out.shadow.push(s.shadow[k]);
            out.gains.extend_from_slice(&s.gains[k * s.taps..(k + 1) * s.taps]);
            out.code_word.push(s.code_word[k]);
            out.mark.push(s.mark[k]);
        }
    }
    out
}

#[test]
fn doubling_the_outer_radius_is_within_the_interval() {
    // a field on 2·r_max restricted to r ≤ r_max is a field on r_max, so the
    // same draws give both estimates
    let taps = table_taps();
    let params = NetworkParams::default();
    let dist = SnrDistribution::new(Scheme::Incoherent, &params, &taps).unwrap();
    let scale = dist.snr_scale();
    let grid: Vec<f64> = [0.2, 1.0, 5.0].iter().map(|x| x * scale).collect();
    let schemes = vec![Scheme::Coherent, Scheme::Incoherent];
    let config = McConfig::new(8_000, 11, grid.clone(), schemes.clone());
    let r = simulate::resolve_r_max(&config, &params, &taps).unwrap();
    let mut near = vec![Vec::new(); 2];
    let mut far = vec![Vec::new(); 2];
    for i in 0..config.trials {
        let wide = simulate::sample_network(&params, &taps, 2.0 * r, &mut simulate::trial_rng(11, i));
        let narrow = within_radius(&wide, r);
        for (j, scheme) in schemes.iter().enumerate() {
            near[j].push(simulate::snr(*scheme, &narrow, &params, &taps));
            far[j].push(simulate::snr(*scheme, &wide, &params, &taps));
        }
    }
    for (j, scheme) in schemes.iter().enumerate() {
        let a = simulate::summarize(*scheme, &near[j], &grid);
        let b = simulate::summarize(*scheme, &far[j], &grid);
        for k in 0..grid.len() {
            assert!(
                (a.outage[k] - b.outage[k]).abs() < a.half_width[k],
                "{scheme:?} s={}: {} vs {} (hw {})",
                grid[k],
                a.outage[k],
                b.outage[k],
                a.half_width[k]
            );
        }
    }
}

#[test]
fn log_capacity_is_stable_under_trial_doubling() {
    let taps = table_taps();
    let params = at_density(Scheme::Coherent, &taps, 1.0);
    let run = |trials| {
        let config = McConfig::new(trials, 21, vec![1.0], vec![Scheme::Coherent, Scheme::Incoherent]);
        simulate::estimate(&config, &params, &taps).unwrap()
    };
    let (a, b) = (run(10_000), run(20_000));
    for (x, y) in a.schemes.iter().zip(&b.schemes) {
        assert!(x.capacity.is_finite() && x.capacity_se.is_finite());
        assert!((x.capacity - y.capacity).abs() <= 3.0 * x.capacity_se, "{:?}", x.scheme);
        assert!(y.capacity_se < x.capacity_se);
    }
}

#[test]
fn many_codes_isolate_every_node() {
    let params = NetworkParams::default();
    let flat = TapProfile::flat();
    let q = 1u32 << 20;
    let mut checked = 0;
    for i in 0..300 {
        let s = simulate::sample_network(&params, &flat, 300.0, &mut simulate::trial_rng(2, i));
        let codes: HashSet<usize> = (0..s.node_count()).map(|k| s.code(k, q)).collect();
        if codes.len() < s.node_count() {
            continue;
        }
        let coh = simulate::snr_coherent(&s, &params, &flat);
        let rand = simulate::snr_random(&s, &params, q);
        assert!((coh - rand).abs() <= 1e-12 * coh, "{coh} vs {rand}");
        checked += 1;
    }
    assert!(checked > 250);
}

#[test]
fn empty_field_in_the_sparse_limit() {
    let params = NetworkParams { node_density: 1e-12, ..NetworkParams::default() };
    let taps = table_taps();
    for i in 0..1000 {
        let s = simulate::sample_network(&params, &taps, 100.0, &mut simulate::trial_rng(1, i));
        assert_eq!(s.node_count(), 0);
        for scheme in [Scheme::Coherent, Scheme::Incoherent] {
            assert_eq!(simulate::snr(scheme, &s, &params, &taps), 0.0);
        }
    }
}
