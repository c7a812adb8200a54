//! Reproducible experiment suites built on the other modules: the
//! overlap-fraction sweep, translation density, gradient audits and the
//! mode-collapse toy trainer, plus CSV/SVG report output.
//!
//! Every report carries its tables, verdicts recomputable from those tables,
//! and the config hash and seeds it was produced with.

mod audit;
mod config;
mod mcs;
mod report;
mod toy;
mod translation;

pub use audit::{audit_verdicts, run_gradient_audit};
pub use config::{
    config_hash, derive_seed, ExperimentConfig, GradientAuditConfig, Init, Loss, McsSweepConfig,
    StepSizes, ToyTrainingConfig, TranslationConfig, TranslationPair,
};
pub use mcs::{mcs_verdicts, run_mcs_sweep};
pub use report::{
    write_report, Cell, ExperimentReport, Plot, Provenance, ReportFormat, Table, Verdict,
};
pub use toy::{run_toy_training, toy_verdicts};
pub use translation::{run_translation_density, translation_verdicts};

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;
    use std::fs;

    use approx::assert_abs_diff_eq;

    use super::*;

    fn quick_mcs() -> McsSweepConfig {
        McsSweepConfig {
            f_distance_samples: 0,
            ..McsSweepConfig::default()
        }
    }

    #[test]
    fn two_cell_half_overlap() {
        let cfg = McsSweepConfig {
            cells: 2,
            rho_points: 3,
            ..quick_mcs()
        };
        let r = run_mcs_sweep(&cfg, 0).unwrap();
        let sweep = r.table("sweep").unwrap();
        let jsd = sweep.numbers("jsd");
        assert_eq!(sweep.numbers("rho"), vec![0.0, 0.5, 1.0]);
        assert_abs_diff_eq!(jsd[0], LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(jsd[1], 0.21576155433883565, epsilon = 1e-12);
        assert_eq!(jsd[2], 0.0);
        assert_eq!(sweep.numbers("overlap"), vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn default_sweep_passes() {
        let r = run_mcs_sweep(&quick_mcs(), 3).unwrap();
        assert!(r.passed(), "{:?}", r.verdicts);
        assert_eq!(r.table("alpha_map").unwrap().rows.len(), 20);
    }

    #[test]
    fn reversed_family_fails() {
        let cfg = McsSweepConfig {
            negative_control: true,
            ..quick_mcs()
        };
        let r = run_mcs_sweep(&cfg, 0).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn invalid_family_rejected() {
        let cfg = McsSweepConfig {
            cells: 3,
            ..quick_mcs()
        };
        assert!(run_mcs_sweep(&cfg, 0).is_err());
    }

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        Table::new("t", &["a", "b"]).write_csv(&path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n");
        let back = Table::read_csv(&path, "t").unwrap();
        assert!(back.rows.is_empty());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new("t", &["name", "x", "y"]);
        t.push(vec!["a".into(), 0.1.into(), (1.0 / 3.0).into()]);
        t.push(vec!["b".into(), f64::MIN_POSITIVE.into(), 1e300.into()]);
        t.push(vec!["c".into(), (-2.5).into(), f64::INFINITY.into()]);
        t.write_csv(&path).unwrap();
        assert_eq!(Table::read_csv(&path, "t").unwrap(), t);
    }

    #[test]
    fn report_files_are_deterministic() {
        let cfg = McsSweepConfig {
            f_distance_samples: 40,
            logistic_steps: 20,
            rho_points: 5,
            ..McsSweepConfig::default()
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = write_report(
            &run_mcs_sweep(&cfg, 9).unwrap(),
            a.path(),
            ReportFormat::Csv,
        )
        .unwrap();
        let fb = write_report(
            &run_mcs_sweep(&cfg, 9).unwrap(),
            b.path(),
            ReportFormat::Csv,
        )
        .unwrap();
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{x:?}");
        }
    }

    #[test]
    fn svg_carries_labels_and_hash() {
        let r = run_mcs_sweep(&quick_mcs(), 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&r, dir.path(), ReportFormat::Svg).unwrap();
        let svg = fs::read_to_string(&files[0]).unwrap();
        assert!(svg.contains("overlap fraction rho"));
        assert!(svg.contains(&r.provenance.config_hash));
    }

    #[test]
    fn config_parse_errors_carry_line() {
        let err =
            ExperimentConfig::parse("[mcs_sweep]\ncells = 4\nbogus = 1\n", "x.toml").unwrap_err();
        assert!(err.to_string().contains("x.toml:3"), "{err}");
        let ok = ExperimentConfig::parse("seed = 5\n[mcs_sweep]\ncells = 4\n", "x.toml").unwrap();
        assert_eq!(ok.seed, Some(5));
        assert_eq!(ok.mcs_sweep.cells, 4);
        assert_eq!(ok.toy_training, ToyTrainingConfig::default());
    }

    #[test]
    fn translation_with_zero_delta_is_unchanged() {
        let cfg = TranslationConfig {
            deltas: vec![0.0],
            offset_seeds: 1,
            samples: 20,
            resolutions: vec![1e-2],
            ..TranslationConfig::default()
        };
        let r = run_translation_density(&cfg, 1).unwrap();
        let t = r.table("translation").unwrap();
        assert_eq!(t.numbers("w_before"), t.numbers("w_after"));
        assert_eq!(t.numbers("overlap_before"), t.numbers("overlap_after"));
    }

    #[test]
    fn translation_rejects_far_pair_and_small_tau() {
        let mut cfg = TranslationConfig {
            samples: 20,
            ..TranslationConfig::default()
        };
        cfg.pairs[0].epsilon = 1e-9;
        assert!(run_translation_density(&cfg, 0).is_err());
        let cfg = TranslationConfig {
            tau_factor: 0.05,
            ..TranslationConfig::default()
        };
        assert!(run_translation_density(&cfg, 0).is_err());
    }

    #[test]
    fn toy_target_init_is_covered_and_aligned() {
        let cfg = ToyTrainingConfig {
            losses: vec![Loss::W2sq],
            seeds: 1,
            iterations: 0,
            init: Init::Target,
            density_target_samples: 200,
            ..ToyTrainingConfig::default()
        };
        let r = run_toy_training(&cfg, 0).unwrap();
        let t = r.table("trajectory").unwrap();
        assert_eq!(t.numbers("coverage"), vec![1.0]);
        assert_eq!(t.numbers("alignment"), vec![1.0]);
    }

    #[test]
    fn single_atom_flow_matches_recursion() {
        let cfg = ToyTrainingConfig {
            losses: vec![Loss::W2sq],
            seeds: 1,
            iterations: 1,
            density_target_samples: 200,
            ..ToyTrainingConfig::default()
        };
        let r = run_toy_training(&cfg, 0).unwrap();
        assert!(r
            .verdicts
            .iter()
            .any(|v| v.name == "single_atom_matches_closed_form" && v.passed));
    }
}
