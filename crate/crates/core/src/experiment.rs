//! Experiment orchestration: sweeps across schemes and E_s/N0, CSV
//! emission, and the analytic delay companion table.
//!
//! Output formats are fixed: decimal dot, LF line endings, trailing
//! newline, stable column order. Reruns with the same config and seed are
//! byte-identical, parallel or not.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::markov::{expected_delay, StateSpace};
use crate::phy::Modulation;
use crate::policy::PolicyKind;
use crate::sim::{run_sweep, ChannelSpec, SweepPoint};

pub const SWEEP_CSV_HEADER: &str = "scheme,esn0_db,avg_packets,se_packets,avg_delay_s,se_delay_s,\
throughput_bps,se_throughput,energy_mw_s,se_energy,delivery_rate,silent_frac,n_runs,seed";

pub const DELAY_CSV_HEADER: &str = "scheme,esn0_db,expected_delay_s,truncated";

/// Residual probability mass past the horizon above which an analytic row
/// is flagged as truncated.
pub const TRUNCATION_FLAG_THRESHOLD: f64 = 1e-6;

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ArtifactSet {
    pub sweep_csv: PathBuf,
    pub manifest: PathBuf,
}

/// Monte-Carlo rows for every (scheme, grid point) pair, scheme-major.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<(PolicyKind, SweepPoint)>> {
    let mut rows = Vec::with_capacity(cfg.schemes.len() * cfg.esn0_grid_db.len());
    for &scheme in &cfg.schemes {
        let sim = cfg.sim_config(scheme);
        for point in run_sweep(&sim, &cfg.esn0_grid_db, &cfg.channel)? {
            rows.push((scheme, point));
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(
    rows: &[(PolicyKind, SweepPoint)],
    seed: u64,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for (scheme, p) in rows {
        debug_assert!([
            p.avg_packets,
            p.se_packets,
            p.avg_delay_s,
            p.se_delay_s,
            p.throughput_bps,
            p.se_throughput,
            p.energy_mw_s,
            p.se_energy,
            p.delivery_rate,
            p.silent_frac,
        ]
        .iter()
        .all(|v| v.is_finite()),);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            scheme.name(),
            p.esn0_db,
            p.avg_packets,
            p.se_packets,
            p.avg_delay_s,
            p.se_delay_s,
            p.throughput_bps,
            p.se_throughput,
            p.energy_mw_s,
            p.se_energy,
            p.delivery_rate,
            p.silent_frac,
            p.n_runs,
            seed
        )?;
    }
    Ok(())
}

fn manifest_text(cfg: &ExperimentConfig) -> String {
    format!(
        "ancsat {}\n\n# resolved configuration; rerunning `sweep` on this file\n# with the same binary reproduces the artifacts bit-exactly\n\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_toml()
    )
}

/// Run the full sweep and write `sweep.csv` plus `manifest.txt` into the
/// configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ArtifactSet> {
    let rows = sweep_rows(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;

    let sweep_path = cfg.output_dir.join("sweep.csv");
    let mut buf = Vec::new();
    write_sweep_csv(&rows, cfg.seed, &mut buf).expect("vec write");
    fs::write(&sweep_path, &buf).map_err(|e| Error::io(&sweep_path, e))?;

    let manifest_path = cfg.output_dir.join("manifest.txt");
    fs::write(&manifest_path, manifest_text(cfg)).map_err(|e| Error::io(&manifest_path, e))?;

    Ok(ArtifactSet {
        sweep_csv: sweep_path,
        manifest: manifest_path,
    })
}

/// One analytic delay row.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayRow {
    pub scheme: PolicyKind,
    pub esn0_db: f64,
    pub expected_delay_s: f64,
    pub truncated: bool,
}

/// Expected-delay table rows for every (scheme, grid point), evaluated at
/// the full dof target and slot 0. Needs a definite trace, so the channel
/// must be constant.
pub fn analyze_rows(cfg: &ExperimentConfig) -> Result<Vec<DelayRow>> {
    let slot_duration =
        match &cfg.channel {
            ChannelSpec::Constant { slot_duration_s } => *slot_duration_s,
            ChannelSpec::Lms(_) => return Err(Error::Config(
                "analyze needs channel.kind = \"constant\" (the recursion wants a definite trace)"
                    .into(),
            )),
        };
    let space = StateSpace::new(cfg.dof_target, cfg.max_slots)?;
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        let sim = cfg.sim_config(scheme);
        for &esn0 in &cfg.esn0_grid_db {
            let trace = crate::lms::ChannelTrace::constant(
                esn0,
                cfg.max_slots + sim.trace_margin(),
                slot_duration,
            );
            let table = expected_delay(
                &trace,
                &cfg.phy,
                Modulation::Bpsk,
                &sim.policy,
                &space,
                cfg.t_p_packet_duration_s,
                cfg.t_w_ack_wait_s,
            )?;
            rows.push(DelayRow {
                scheme,
                esn0_db: esn0,
                expected_delay_s: table.expected_delay(cfg.dof_target, 0),
                truncated: table.truncated(cfg.dof_target, 0, TRUNCATION_FLAG_THRESHOLD),
            });
        }
    }
    Ok(rows)
}

pub fn write_delay_csv<W: Write>(rows: &[DelayRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{DELAY_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.scheme.name(),
            r.esn0_db,
            r.expected_delay_s,
            r.truncated
        )?;
    }
    Ok(())
}

/// Evaluate the delay recursion over the grid and write
/// `delay_analytic.csv` into the output directory.
pub fn analyze_delay(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let rows = analyze_rows(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let path = cfg.output_dir.join("delay_analytic.csv");
    let mut buf = Vec::new();
    write_delay_csv(&rows, &mut buf).expect("vec write");
    fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small_config(dir: &std::path::Path) -> ExperimentConfig {
        let src = format!(
            "[experiment]\nschemes = [\"nc\", \"ancef\"]\nesn0_grid_db = [-4.0, 10.0, 40.0]\n\
             output_dir = \"{}\"\nseed = 11\n[sim]\nn_runs = 16\nmax_slots = 400\n",
            dir.display()
        );
        parse_config(&src).unwrap()
    }

    #[test]
    fn row_count_is_schemes_times_points() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let rows = sweep_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let a = run_experiment(&cfg).unwrap();
        let first = fs::read(&a.sweep_csv).unwrap();
        let manifest_first = fs::read(&a.manifest).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(first, fs::read(&b.sweep_csv).unwrap());
        assert_eq!(manifest_first, fs::read(&b.manifest).unwrap());
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with(SWEEP_CSV_HEADER));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 7);
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 14);
            for f in &fields[1..] {
                let v: f64 = f.parse().unwrap();
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn manifest_reproduces_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let arts = run_experiment(&cfg).unwrap();
        let manifest = fs::read_to_string(&arts.manifest).unwrap();
        let idx = manifest.find("[experiment]").unwrap();
        let back = parse_config(&manifest[idx..]).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn silent_rows_report_zero_energy() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let rows = sweep_rows(&cfg).unwrap();
        // ancef at -4 dB: QoS fails everywhere, so all slots are silent
        let (_, p) = rows
            .iter()
            .find(|(s, p)| *s == PolicyKind::Ancef && p.esn0_db == -4.0)
            .unwrap();
        assert_eq!(p.energy_mw_s, 0.0);
        assert_eq!(p.silent_frac, 1.0);
        assert_eq!(p.delivery_rate, 0.0);
    }

    #[test]
    fn analyze_matches_lossless_arithmetic_and_flags_blocked_points() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.esn0_grid_db = vec![-40.0, 40.0];
        let rows = analyze_rows(&cfg).unwrap();
        let nc_lossless = rows
            .iter()
            .find(|r| r.scheme == PolicyKind::Nc && r.esn0_db == 40.0)
            .unwrap();
        assert_eq!(nc_lossless.expected_delay_s, 4.0 * 1e-3 + 0.2388);
        assert!(!nc_lossless.truncated);
        let nc_blocked = rows
            .iter()
            .find(|r| r.scheme == PolicyKind::Nc && r.esn0_db == -40.0)
            .unwrap();
        assert!(nc_blocked.truncated);
        let path = analyze_delay(&cfg).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.starts_with(DELAY_CSV_HEADER));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn lms_channel_is_rejected_for_analysis() {
        let dir = tempfile::tempdir().unwrap();
        let src = format!(
            "[experiment]\nschemes = [\"nc\"]\nesn0_grid_db = [5.0]\noutput_dir = \"{}\"\n\
             [channel]\nkind = \"lms\"\n",
            dir.path().display()
        );
        let cfg = parse_config(&src).unwrap();
        assert!(matches!(analyze_rows(&cfg), Err(Error::Config(_))));
    }
}
