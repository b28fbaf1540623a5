use std::fs;
use std::process::{Command, Output};

fn relay_sg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relay-sg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = relay_sg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Column `name` of a CSV with `#` header lines, as numbers.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap_or(f64::NAN))
        .collect()
}

fn header_value(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

#[test]
fn header_echoes_every_parameter() {
    let csv = stdout(&["outage", "--points", "3"]);
    for key in relay_sg::config::KEYS {
        assert!(header_value(&csv, key).is_some(), "{key}");
    }
    assert_eq!(header_value(&csv, "tx_snr_dB").unwrap(), "0");
    assert_eq!(header_value(&csv, "threshold_dB").unwrap(), "-112");
}

#[test]
fn density_sweep_is_monotone_and_ordered() {
    let csv = stdout(&["outage", "--min", "1e-4", "--max", "1e-2", "--points", "9"]);
    let coh = column(&csv, "coherent_exact");
    let inc = column(&csv, "incoherent_exact");
    assert!(coh.windows(2).all(|w| w[1] <= w[0]));
    assert!(inc.windows(2).all(|w| w[1] <= w[0]));
    assert!(coh.iter().zip(&inc).all(|(c, i)| c <= i));
}

#[test]
fn density_and_power_collapse() {
    let base = stdout(&["outage", "--min", "1e-4", "--max", "1e-3", "--points", "4"]);
    let scaled = stdout(&[
        "outage", "--min", "4e-4", "--max", "4e-3", "--points", "4", "--set", "tx_snr_dB=-12.041199826559248",
    ]);
    for name in ["coherent_exact", "incoherent_exact"] {
        for (a, b) in column(&base, name).iter().zip(column(&scaled, name)) {
            assert!((a - b).abs() <= 1e-9 * a.abs(), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn single_point_sweep_is_one_row() {
    let csv = stdout(&["outage", "--min", "1e-3", "--max", "1e-3", "--points", "1"]);
    assert_eq!(column(&csv, "lambda"), vec![1e-3]);
}

#[test]
fn mc_tables_are_reproducible() {
    let args = ["outage", "--max", "1e-3", "--points", "3", "--trials", "300", "--seed", "9"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert!(column(&a, "coherent_mc").iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(header_value(&a, "mc_r_max_m").is_some());
    let mut other = args;
    other[8] = "10";
    assert!(a != stdout(&other));
}

#[test]
fn oversized_simulation_is_refused() {
    // at 1e-2 the coherent outer radius for a -112 dB threshold holds millions of nodes
    let out = relay_sg(&["outage", "--points", "3", "--trials", "10"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_max"));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_relay-sg"))
            .args(["snrs", "--trials", "500", "--scheme", "incoherent", "--seed", "4"])
            .env("RELAY_SG_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 500);
}

#[test]
fn swept_key_cannot_be_fixed() {
    let out = relay_sg(&["outage", "--set", "lambda=1e-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`lambda`"));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "lambda = 2e-3\nsigma_dB = loud\n").unwrap();
    let out = relay_sg(&["outage", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`sigma_dB`"));

    let out = relay_sg(&["outage", "--set", "gain=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`gain`"));
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    fs::write(&cfg, "# long delay spread\nxi_s = 0.65e-6\ntx_power_dBm = -90\n").unwrap();
    let out = dir.path().join("table.csv");
    stdout(&[
        "outage", "--config", cfg.to_str().unwrap(), "--points", "2", "--out", out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(header_value(&csv, "xi_s").unwrap(), "0.00000065");
    assert_eq!(header_value(&csv, "tx_power_dBm").unwrap(), "-90");
}

#[test]
fn bandwidth_sweep_has_interior_optimum() {
    for xi in ["0.17e-6", "0.65e-6"] {
        let set = format!("xi_s={xi}");
        let csv = stdout(&["bandwidth", "--set", &set, "--schemes", "incoherent"]);
        let taps = column(&csv, "taps");
        assert!(taps.windows(2).all(|w| w[1] >= w[0]));
        let optimum = header_value(&csv, "incoherent_optimum_bw_hz").unwrap();
        assert!(optimum.ends_with("(interior)"), "{xi}: {optimum}");
    }
}

/// Outage at 10 MHz for one delay spread, at a threshold of −100 dB where
/// the outage is appreciable.
fn at_10mhz(xi: &str) -> (f64, f64) {
    let set = format!("xi_s={xi}");
    let csv = stdout(&[
        "bandwidth", "--min", "1e7", "--max", "1e7", "--points", "1", "--set", &set, "--set", "threshold_dB=-100",
    ]);
    (column(&csv, "coherent_exact")[0], column(&csv, "incoherent_exact")[0])
}

#[test]
fn long_delay_spread_brings_incoherent_near_coherent() {
    let (coh, inc) = at_10mhz("0.65e-6");
    assert!(inc / coh <= 2.0, "ratio {}", inc / coh);
}

#[test]
fn coherent_outage_barely_depends_on_delay_spread() {
    let (short, _) = at_10mhz("0.17e-6");
    let (long, _) = at_10mhz("0.65e-6");
    assert!((long - short).abs() / short < 0.1, "{short} vs {long}");
}

#[test]
fn scheme_comparison_orders_random_codes() {
    let csv = stdout(&["schemes", "--channels", "1,2,4,8", "--points", "6"]);
    assert!(column(&csv, "between").iter().all(|b| *b == 1.0));
    let q1 = column(&csv, "random_q1_exact");
    let inc = column(&csv, "incoherent_exact");
    for (a, b) in q1.iter().zip(&inc) {
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn capacity_orderings() {
    let csv = stdout(&["capacity", "--min", "1e-7", "--max", "1e-2", "--points", "6", "--set", "tx_power_dBm=-10"]);
    let coh = column(&csv, "coherent_bits");
    let inc = column(&csv, "incoherent_bits");
    assert!(coh[0] < 1e-3 && inc[0] < 1e-3);
    assert!(coh.iter().zip(&inc).all(|(c, i)| i <= c));
    let wide = stdout(&[
        "capacity", "--min", "1e-7", "--max", "1e-2", "--points", "6", "--set", "tx_power_dBm=-10", "--set", "bw_hz=20e6",
    ]);
    let long = stdout(&[
        "capacity", "--min", "1e-7", "--max", "1e-2", "--points", "6", "--set", "tx_power_dBm=-10", "--set", "xi_s=0.65e-6",
    ]);
    for name in ["coherent_bits", "incoherent_bits"] {
        let (base, wide, long) = (column(&csv, name), column(&wide, name), column(&long, name));
        for i in 0..base.len() {
            assert!(wide[i] <= base[i] && base[i] <= long[i], "{name} row {i}");
        }
    }
}

#[test]
fn capacity_mc_columns_agree_with_closed_form() {
    let csv = stdout(&[
        "capacity", "--min", "1e-3", "--max", "1e-2", "--points", "2", "--set", "tx_power_dBm=-10", "--trials", "4000",
    ]);
    for scheme in ["coherent", "incoherent"] {
        let exact = column(&csv, &format!("{scheme}_bits"));
        let mc = column(&csv, &format!("{scheme}_mc_bits"));
        let se = column(&csv, &format!("{scheme}_mc_se"));
        for i in 0..exact.len() {
            assert!((exact[i] - mc[i]).abs() <= 4.0 * se[i], "{scheme}: {} vs {} +- {}", exact[i], mc[i], se[i]);
        }
    }
}

#[test]
fn validate_with_few_trials_is_inconclusive_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        let out = relay_sg(&["validate", "--trials", "100", "--seed", "5", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let report = fs::read_to_string(&a).unwrap();
    assert_eq!(report, fs::read_to_string(&b).unwrap());
    assert!(!report.contains("[FAIL]"), "{report}");
    assert!(report.contains("[INCONCLUSIVE]"), "{report}");
    assert_eq!(report.lines().filter(|l| l.starts_with("criterion ")).count(), 8);
}
