//! Parameter sweeps producing the outage and capacity tables as CSV.
//!
//! Each table carries a `#` header echoing the effective scenario, a regime
//! column next to every analytic column, and Monte Carlo estimates with 95%
//! half-widths (outage) or standard errors (capacity) when trials are
//! requested.

use std::f64::consts::LN_2;
use std::fmt::Write as _;

use crate::analytic::{Evaluated, SnrDistribution};
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::model::{NetworkParams, Scheme, TapProfile};
use crate::simulate::{self, McConfig, McEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Density,
    Bandwidth,
    /// Transmit SNR in dB at the configured bandwidth.
    TxSnr,
    /// Outage threshold in dB.
    Threshold,
}

impl SweepVar {
    /// The configuration key the variable shadows.
    pub fn key(&self) -> &'static str {
        match self {
            SweepVar::Density => "lambda",
            SweepVar::Bandwidth => "bw_hz",
            SweepVar::TxSnr => "tx_snr_dB",
            SweepVar::Threshold => "threshold_dB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Monte Carlo settings attached to a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    pub r_max: Option<f64>,
    pub truncation_tol: f64,
}

impl McSettings {
    pub fn new(trials: u64, seed: u64) -> Self {
        McSettings {
            trials,
            seed,
            r_max: None,
            truncation_tol: 1e-3,
        }
    }

    fn config(&self, s_grid: Vec<f64>, schemes: Vec<Scheme>) -> McConfig {
        McConfig {
            trials: self.trials,
            seed: self.seed,
            r_max: self.r_max,
            truncation_tol: self.truncation_tol,
            s_grid,
            schemes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub scenario: Scenario,
    /// Keys the user overrode explicitly; the swept key may not be one.
    pub overrides: Vec<String>,
    pub schemes: Vec<Scheme>,
    /// `None` or zero trials leaves the Monte Carlo columns out.
    pub mc: Option<McSettings>,
}

fn usage(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl SweepSpec {
    pub fn new(variable: SweepVar, min: f64, max: f64, points: usize, spacing: Spacing) -> Self {
        SweepSpec {
            variable,
            min,
            max,
            points,
            spacing,
            scenario: Scenario::default(),
            overrides: Vec::new(),
            schemes: vec![Scheme::Coherent, Scheme::Incoherent],
            mc: None,
        }
    }

    /// A single point is accepted when `min == max`; otherwise `min < max`
    /// and at least two points.
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(usage("range", "bounds must be finite"));
        }
        if self.points == 0 {
            return Err(usage("points", "need at least one point"));
        }
        if self.points == 1 {
            if self.min != self.max {
                return Err(usage("points", "a single point needs min == max"));
            }
        } else if !(self.min < self.max) {
            return Err(usage("range", format!("min {} must be below max {}", self.min, self.max)));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(usage("spacing", "log spacing needs positive bounds"));
        }
        let key = self.variable.key();
        if self.overrides.iter().any(|k| k == key) {
            return Err(usage(key, "is the swept variable and cannot also be fixed"));
        }
        if self.schemes.is_empty() {
            return Err(usage("schemes", "no schemes selected"));
        }
        if let Some(mc) = &self.mc {
            if mc.trials > 0 && !(mc.truncation_tol > 0.0 && mc.truncation_tol <= 0.1) {
                return Err(usage("truncation_tol", "must lie in (0, 0.1]"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / n;
                if i + 1 == self.points {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    /// The scenario at one grid value of the swept variable. Bandwidth moves
    /// with the transmit power held fixed.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario> {
        let mut s = self.scenario.clone();
        match self.variable {
            SweepVar::Density => s.set("lambda", &value.to_string())?,
            SweepVar::Bandwidth => s = s.with_bandwidth(value),
            SweepVar::TxSnr => s.set("tx_snr_dB", &value.to_string())?,
            SweepVar::Threshold => s.set("threshold_dB", &value.to_string())?,
        }
        Ok(s)
    }

    fn mc_active(&self) -> Option<&McSettings> {
        self.mc.as_ref().filter(|m| m.trials > 0)
    }
}

/// A CSV table: `#` header, one column-name row, string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: String, columns: Vec<String>) -> Self {
        Table {
            header,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.clone();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// A numeric column; empty cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<String>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.10e}")
    }
}

fn regime_cell(e: &Evaluated) -> String {
    if e.in_validity {
        e.regime.label().to_string()
    } else {
        format!("{}_outside_validity", e.regime.label())
    }
}

/// Value and regime cells; a formula that cannot be evaluated for this
/// scenario gives an empty value and an `unavailable` flag.
fn evaluated_cells(r: Result<Evaluated>) -> Result<[String; 2]> {
    match r {
        Ok(e) => Ok([num(e.value), regime_cell(&e)]),
        Err(Error::UnsupportedMethod { .. }) | Err(Error::AccuracyShortfall { .. }) => {
            Ok([String::new(), "unavailable".to_string()])
        }
        Err(e) => Err(e),
    }
}

fn check_random_taps(schemes: &[Scheme], taps: &TapProfile) -> Result<()> {
    if taps.tap_count() > 1 && schemes.iter().any(|s| matches!(s, Scheme::Random { .. })) {
        return Err(usage(
            "schemes",
            format!(
                "random channels need a single-tap profile, this scenario resolves {} taps",
                taps.tap_count()
            ),
        ));
    }
    Ok(())
}

fn header(command: &str, spec: &SweepSpec, taps: Option<&TapProfile>) -> String {
    let mut h = format!("# relay-sg {command}\n");
    h.push_str(&spec.scenario.header());
    let _ = writeln!(
        h,
        "# sweep = {} from {} to {} ({} points, {})",
        spec.variable.key(),
        spec.min,
        spec.max,
        spec.points,
        if spec.spacing == Spacing::Log { "log" } else { "linear" }
    );
    if let Some(t) = taps {
        let powers: Vec<String> = t.powers.iter().map(|a| format!("{a:.6}")).collect();
        let _ = writeln!(h, "# taps = {} [{}]", t.tap_count(), powers.join(" "));
    }
    let labels: Vec<String> = spec.schemes.iter().map(|s| s.label()).collect();
    let _ = writeln!(h, "# schemes = {}", labels.join(" "));
    match spec.mc_active() {
        Some(mc) => {
            let _ = writeln!(
                h,
                "# mc_trials = {}\n# mc_seed = {}\n# mc_truncation_tol = {}",
                mc.trials, mc.seed, mc.truncation_tol
            );
        }
        None => h.push_str("# mc_trials = 0\n"),
    }
    h
}

fn outage_columns(first: &[&str], schemes: &[Scheme], mc: bool) -> Vec<String> {
    let mut cols: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    for s in schemes {
        let l = s.label();
        cols.push(format!("{l}_exact"));
        cols.push(format!("{l}_exact_regime"));
        cols.push(format!("{l}_smalls"));
        cols.push(format!("{l}_smalls_regime"));
        if mc {
            cols.push(format!("{l}_mc"));
            cols.push(format!("{l}_mc_hw"));
        }
    }
    cols
}

fn analytic_outage_cells(params: &NetworkParams, taps: &TapProfile, scheme: Scheme, s: f64) -> Result<Vec<String>> {
    let dist = SnrDistribution::new(scheme, params, taps)?;
    let mut cells = evaluated_cells(dist.outage(s))?.to_vec();
    cells.extend(evaluated_cells(dist.outage_smalls(s))?);
    Ok(cells)
}

/// Exact, small-s and optional MC outage per scheme along the grid (per row:
/// analytic cells for each scheme, interleaved with MC cells).
fn outage_table(spec: &SweepSpec, command: &str, taps: &TapProfile) -> Result<Table> {
    let grid = spec.grid();
    let mc = spec.mc_active();
    let mut table = Table::new(
        header(command, spec, Some(taps)),
        outage_columns(&[spec.variable.key()], &spec.schemes, mc.is_some()),
    );
    let estimates = match mc {
        Some(m) => Some(outage_mc(spec, m, taps, &grid)?),
        None => None,
    };
    if let Some(est) = estimates.as_ref().and_then(|e| e.first()) {
        let _ = writeln!(table.header, "# mc_r_max_m = {}", est.r_max);
    }
    for (i, v) in grid.iter().enumerate() {
        let scn = spec.scenario_at(*v)?;
        let params = scn.params()?;
        let s = scn.threshold();
        let mut row = vec![num(*v)];
        for scheme in &spec.schemes {
            row.extend(analytic_outage_cells(&params, taps, *scheme, s)?);
            if let Some(est) = &estimates {
                let (p, hw) = mc_outage_at(&est[i], *scheme, s);
                row.push(num(p));
                row.push(num(hw));
            }
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn mc_outage_at(est: &McEstimate, scheme: Scheme, s: f64) -> (f64, f64) {
    let j = est.s_grid.iter().position(|x| *x == s).unwrap_or(0);
    est.scheme(scheme)
        .map(|e| (e.outage[j], e.half_width[j]))
        .unwrap_or((f64::NAN, f64::NAN))
}

/// One MC estimate per grid point, with common random numbers: density
/// rungs are thinned from the densest field, thresholds share one run, and
/// transmit-SNR points share draws at the outer radius of the largest SNR.
fn outage_mc(spec: &SweepSpec, mc: &McSettings, taps: &TapProfile, grid: &[f64]) -> Result<Vec<McEstimate>> {
    let schemes = spec.schemes.clone();
    match spec.variable {
        SweepVar::Density => {
            let base = spec.scenario.params()?;
            let config = mc.config(vec![spec.scenario.threshold()], schemes);
            simulate::estimate_ladder(&config, &base, taps, grid)
        }
        SweepVar::Threshold => {
            let s_grid: Vec<f64> = grid.iter().map(|t| crate::model::db_to_linear(*t)).collect();
            let params = spec.scenario.params()?;
            let est = simulate::estimate(&mc.config(s_grid, schemes), &params, taps)?;
            Ok(vec![est; grid.len()])
        }
        SweepVar::TxSnr => {
            let s = spec.scenario.threshold();
            let mut config = mc.config(vec![s], schemes);
            if config.r_max.is_none() {
                let top = spec.scenario_at(spec.max)?.params()?;
                config.r_max = Some(simulate::resolve_r_max(&config, &top, taps)?);
            }
            grid.iter()
                .map(|v| simulate::estimate(&config, &spec.scenario_at(*v)?.params()?, taps))
                .collect()
        }
        SweepVar::Bandwidth => Err(usage("sweep", "bandwidth sweeps are run by the bandwidth command")),
    }
}

/// Outage against node density, transmit SNR or threshold.
pub fn cmd_outage_vs_density(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    if spec.variable == SweepVar::Bandwidth {
        return Err(usage("sweep", "bandwidth sweeps are run by the bandwidth command"));
    }
    let taps = spec.scenario.taps()?;
    check_random_taps(&spec.schemes, &taps)?;
    outage_table(spec, "outage", &taps)
}

/// Index of the minimum of `values` when it is not at either end.
pub fn interior_minimum(values: &[f64]) -> Option<usize> {
    let (i, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    (i > 0 && i + 1 < values.len()).then_some(i)
}

/// Outage against bandwidth. Every point rebuilds the tap profile and the
/// noise power; the transmit power stays at its configured value.
pub fn cmd_outage_vs_bandwidth(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    if spec.variable != SweepVar::Bandwidth {
        return Err(usage("sweep", "the bandwidth command sweeps bw_hz"));
    }
    if spec.schemes.iter().any(|s| matches!(s, Scheme::Random { .. })) {
        return Err(usage("schemes", "random channels assume flat fading and are not swept over bandwidth"));
    }
    let grid = spec.grid();
    let mc = spec.mc_active();
    let mut table = Table::new(
        header("bandwidth", spec, None),
        outage_columns(&["bw_hz", "taps"], &spec.schemes, mc.is_some()),
    );
    let mut incoherent = Vec::with_capacity(grid.len());
    for bw in &grid {
        let scn = spec.scenario_at(*bw)?;
        let params = scn.params()?;
        let taps = scn.taps()?;
        let s = scn.threshold();
        let est = match mc {
            Some(m) => Some(simulate::estimate(
                &m.config(vec![s], spec.schemes.clone()),
                &params,
                &taps,
            )?),
            None => None,
        };
        let mut row = vec![num(*bw), taps.tap_count().to_string()];
        for scheme in &spec.schemes {
            let cells = analytic_outage_cells(&params, &taps, *scheme, s)?;
            if *scheme == Scheme::Incoherent {
                incoherent.push(cells[0].parse().unwrap_or(f64::NAN));
            }
            row.extend(cells);
            if let Some(est) = &est {
                let (p, hw) = mc_outage_at(est, *scheme, s);
                row.push(num(p));
                row.push(num(hw));
            }
        }
        table.rows.push(row);
    }
    if !incoherent.is_empty() {
        let line = match interior_minimum(&incoherent) {
            Some(i) => format!("# incoherent_optimum_bw_hz = {} (interior)\n", grid[i]),
            None => "# incoherent_optimum_bw_hz = none (minimum at an end of the range)\n".to_string(),
        };
        table.header.push_str(&line);
    }
    Ok(table)
}

/// Coherent, incoherent and random-code outage against density on a
/// single-tap (flat) profile, with a column flagging whether every random
/// curve lies between the coherent and incoherent ones.
pub fn cmd_outage_vs_scheme(spec: &SweepSpec, channels: &[u32]) -> Result<Table> {
    if channels.is_empty() || channels.contains(&0) {
        return Err(usage("channels", "need a non-empty list of positive channel counts"));
    }
    let mut spec = spec.clone();
    spec.schemes = vec![Scheme::Coherent, Scheme::Incoherent];
    spec.schemes
        .extend(channels.iter().map(|q| Scheme::Random { channels: *q }));
    spec.validate()?;
    if spec.variable == SweepVar::Bandwidth {
        return Err(usage("sweep", "the scheme comparison sweeps density, tx SNR or threshold"));
    }
    let taps = TapProfile::flat();
    let mut table = outage_table(&spec, "schemes", &taps)?;
    let coh = table.column("coherent_exact").unwrap_or_default();
    let inc = table.column("incoherent_exact").unwrap_or_default();
    let rand: Vec<Vec<f64>> = channels
        .iter()
        .filter_map(|q| table.column(&format!("random_q{q}_exact")))
        .collect();
    table.columns.push("between".to_string());
    for (i, row) in table.rows.iter_mut().enumerate() {
        let slack = 1e-12;
        let ok = rand
            .iter()
            .all(|r| r[i] >= coh[i] - slack * coh[i].abs() && r[i] <= inc[i] + slack * inc[i].abs());
        row.push(if ok { "1" } else { "0" }.to_string());
    }
    Ok(table)
}

/// Ergodic capacity in bits/s/Hz against density.
pub fn cmd_capacity_vs_density(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    if spec.variable != SweepVar::Density {
        return Err(usage("sweep", "the capacity command sweeps lambda"));
    }
    let taps = spec.scenario.taps()?;
    check_random_taps(&spec.schemes, &taps)?;
    let mc = spec.mc_active();
    let mut cols = vec!["lambda".to_string()];
    for s in &spec.schemes {
        let l = s.label();
        cols.push(format!("{l}_bits"));
        cols.push(format!("{l}_regime"));
        if mc.is_some() {
            cols.push(format!("{l}_mc_bits"));
            cols.push(format!("{l}_mc_se"));
        }
    }
    let mut table = Table::new(header("capacity", spec, Some(&taps)), cols);
    for v in spec.grid() {
        let params = spec.scenario_at(v)?.params()?;
        let dists = spec
            .schemes
            .iter()
            .map(|s| SnrDistribution::new(*s, &params, &taps))
            .collect::<Result<Vec<_>>>()?;
        let est = match mc {
            Some(m) => Some(capacity_mc(m, &spec.schemes, &dists, &params, &taps)?),
            None => None,
        };
        let mut row = vec![num(v)];
        for (scheme, dist) in spec.schemes.iter().zip(&dists) {
            let [value, regime] = evaluated_cells(dist.capacity())?;
            let bits = value.parse::<f64>().map(|c| c / LN_2).unwrap_or(f64::NAN);
            row.push(num(bits));
            row.push(regime);
            if let Some(est) = &est {
                let e = est.scheme(*scheme).expect("scheme was simulated");
                row.push(num(e.capacity / LN_2));
                row.push(num(e.capacity_se / LN_2));
            }
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// MC capacity with the outer radius referenced to the smallest SNR scale.
/// The dropped power has mean at most `truncation_tol` times that scale, and
/// ln(1+SNR) moves by less than the dropped power.
pub fn capacity_mc(
    mc: &McSettings,
    schemes: &[Scheme],
    dists: &[SnrDistribution],
    params: &NetworkParams,
    taps: &TapProfile,
) -> Result<McEstimate> {
    let scale = dists.iter().map(|d| d.snr_scale()).fold(f64::INFINITY, f64::min);
    let config = mc.config(vec![scale], schemes.to_vec());
    simulate::estimate(&config, params, taps)
}
