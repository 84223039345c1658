use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdls_cli::commands::{self, bench, degrade, read_metrics, restore_run, MetricsRow};
use pdls_cli::config::KEYS;
use pdls_cli::manifest::{self, MANIFEST_FILE};
use pdls_cli::{pgm, ExperimentSpec};
use pdls_core::bench::{mean, std_dev};
use tempfile::TempDir;

fn spec(pairs: &[(&str, &str)]) -> ExperimentSpec {
    ExperimentSpec::from_pairs(&pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()).unwrap()
}

fn pdls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdls")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files_under(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn gblur_demo_gives_one_observation_per_input_and_a_manifest() {
    let dir = TempDir::new().unwrap();
    let rows = degrade(&spec(&[("task", "gblur"), ("seed", "1")]), dir.path()).unwrap();
    assert_eq!(rows.len(), 90);
    assert_eq!(fs::read_dir(dir.path().join("observed")).unwrap().count(), 90);
    let listed = manifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(listed, rows);
    for r in &listed {
        assert_eq!(r.operator, "gblur:size=7,sigma=1.5");
        assert_eq!(r.sigma_y, 0.01);
        let img = pgm::read_image(&manifest::resolve(&dir.path().join(MANIFEST_FILE), &r.observed)).unwrap();
        assert_eq!((img.width(), img.height()), (32, 32));
    }
}

#[test]
fn manifest_references_only_existing_files() {
    for task in ["toy2d", "sr8", "inpaint", "mblur"] {
        let dir = TempDir::new().unwrap();
        let rows = degrade(&spec(&[("task", task), ("seed", "2,5"), ("max_inputs", "3")]), dir.path()).unwrap();
        let manifest_path = dir.path().join(MANIFEST_FILE);
        for r in &rows {
            assert!(manifest::resolve(&manifest_path, &r.observed).is_file(), "{task}: {}", r.observed);
            assert!(manifest::resolve(&manifest_path, &r.truth).is_file(), "{task}: {}", r.truth);
        }
    }
}

#[test]
fn degrading_twice_is_bitwise_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let s = spec(&[("task", "inpaint"), ("seed", "1,2"), ("max_inputs", "4")]);
    degrade(&s, a.path()).unwrap();
    degrade(&s, b.path()).unwrap();
    let (fa, fb) = (files_under(a.path()), files_under(b.path()));
    assert_eq!(fa.len(), 1 + 4 + 8);
    assert_eq!(fa, fb);
}

#[test]
fn sr8_rejects_a_31_pixel_input() {
    let dir = TempDir::new().unwrap();
    let class = dir.path().join("data/blob");
    fs::create_dir_all(&class).unwrap();
    let img = pdls_core::degrade::ImageGrid::filled(31, 31, 0.25).unwrap();
    pgm::write_image(&class.join("one.pgm"), &img).unwrap();
    let out = dir.path().join("out");
    let run = pdls(&[
        "degrade",
        "--task",
        "sr8",
        "--dataset",
        path_str(&dir.path().join("data")),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("factor must divide dimensions"), "{stderr}");
    assert!(stderr.contains("blob_one"), "{stderr}");
}

#[test]
fn degrade_then_restore_is_reproducible() {
    let work = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for round in 0..2 {
        let root = work.path().join(format!("round{round}"));
        let s = spec(&[("task", "sr8"), ("seed", "3,4"), ("max_inputs", "3")]);
        degrade(&s, &root.join("degraded")).unwrap();
        let jobs = if round == 0 { Some(1) } else { Some(3) };
        restore_run(&s, Some(&root.join("degraded").join(MANIFEST_FILE)), &root.join("restored"), jobs).unwrap();
        let mut files = files_under(&root.join("restored"));
        files.remove(Path::new("run.txt"));
        outputs.push(files);
    }
    assert!(outputs[0].contains_key(Path::new("metrics.csv")));
    assert!(outputs[0].contains_key(Path::new("diagnostics/disk_00_s3.csv")));
    assert!(outputs[0].contains_key(Path::new("reconstructions/cross_00_s4.pgm")));
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn toy_restore_with_defaults_writes_one_row_per_seed() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("toy");
    let run = pdls(&["restore", "--seed", "0..12", "--out", path_str(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = read_metrics(&out.join("metrics.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), (0..12).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r.method == "pdls" && r.ssim.is_none()));
    let run_file = fs::read_to_string(out.join("run.txt")).unwrap();
    for line in ["gamma=0.5", "eta_max=0.5", "n_steps=28"] {
        assert!(run_file.lines().any(|l| l == line), "{line}");
    }
    let diag = fs::read_to_string(out.join("diagnostics/s0.csv")).unwrap();
    assert_eq!(diag.lines().next(), Some("step,t,eta,dist_to_target"));
    assert_eq!(diag.lines().count(), 29);
}

#[test]
fn toy_manifest_and_in_memory_cases_agree() {
    let dir = TempDir::new().unwrap();
    let s = spec(&[("seed", "0..5")]);
    degrade(&s, &dir.path().join("d")).unwrap();
    let from_manifest = restore_run(&s, Some(&dir.path().join("d").join(MANIFEST_FILE)), &dir.path().join("a"), None).unwrap();
    let direct = restore_run(&s, None, &dir.path().join("b"), None).unwrap();
    assert_eq!(from_manifest, direct);
}

#[test]
fn ablation_rows_are_labelled() {
    let dir = TempDir::new().unwrap();
    let label = |extra: &[&str]| {
        let out = dir.path().join(extra.join("_").replace("--", ""));
        let mut args = vec!["restore", "--seed", "0..3", "--out", path_str(&out)];
        args.extend_from_slice(extra);
        let run = pdls(&args);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let rows = read_metrics(&out.join("metrics.csv")).unwrap();
        assert_eq!(rows.len(), 3);
        rows[0].method.clone()
    };
    assert_eq!(label(&[]), "pdls");
    assert_eq!(label(&["--eta_max", "0"]), "baseline");
    assert_eq!(label(&["--init", "mixed"]), "pdls+init=mixed");
    assert_eq!(label(&["--eta-max", "0", "--init", "mixed"]), "baseline+init=mixed");
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# ablation\ngamma = 0.25\nseed = 0..4\ninit = semantic\n").unwrap();
    let out = dir.path().join("out");
    let run = pdls(&["restore", "--config", path_str(&cfg), "--seed", "7", "--out", path_str(&out)]);
    assert!(run.status.success());
    let text = fs::read_to_string(out.join("run.txt")).unwrap();
    assert!(text.contains("gamma=0.25\n") && text.contains("seed=7\n") && text.contains("init=semantic\n"));
    for key in KEYS {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key}="))), "{key}");
    }

    fs::write(&cfg, "gamma = 0.25\ncolour = red\n").unwrap();
    let bad = pdls(&["restore", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = pdls(&["restore", "--schedule", "linear", "--out", path_str(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = pdls(&["restore", "--config", "/nonexistent/run.cfg", "--out", path_str(&out)]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn image_restore_needs_a_manifest() {
    let dir = TempDir::new().unwrap();
    let run = pdls(&["restore", "--task", "gblur", "--out", path_str(dir.path())]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn diverging_drift_exits_with_numerical_status() {
    let dir = TempDir::new().unwrap();
    let mix = dir.path().join("huge.mix");
    fs::write(&mix, "weight=1 variance=0 label=A mean=1e308,1e308\n").unwrap();
    let run = pdls(&["restore", "--dataset", path_str(&mix), "--out", path_str(&dir.path().join("o"))]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("s0"));
}

fn manual_mean_std(rows: &[MetricsRow], f: impl Fn(&MetricsRow) -> f64) -> (f64, f64) {
    let v: Vec<f64> = rows.iter().map(f).collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

#[test]
fn bench_of_two_configs_over_fifty_seeds() {
    let dir = TempDir::new().unwrap();
    let runs = [dir.path().join("steered"), dir.path().join("plain")];
    restore_run(&spec(&[("seed", "0..50")]), None, &runs[0], None).unwrap();
    restore_run(&spec(&[("seed", "0..50"), ("eta_max", "0")]), None, &runs[1], None).unwrap();
    let out = dir.path().join("bench");
    let result = bench(&runs, &out).unwrap();
    assert_eq!(result.table.len(), 2);

    let mut summary = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let header: Vec<String> = summary.headers().unwrap().iter().map(String::from).collect();
    let metrics: Vec<&str> = header.iter().filter_map(|h| h.strip_suffix("_mean")).collect();
    assert_eq!(metrics, ["psnr", "ssim", "class_acc"]);
    let lines: Vec<csv::StringRecord> = summary.records().map(Result::unwrap).collect();
    assert_eq!(lines.len(), 2);

    for (run, (agg, line)) in runs.iter().zip(result.table.iter().zip(&lines)) {
        let rows = read_metrics(&run.join("metrics.csv")).unwrap();
        assert_eq!(agg.n, 50);
        let (m, s) = manual_mean_std(&rows, |r| r.psnr);
        assert!((agg.psnr.mean - m).abs() <= 1e-12 && (agg.psnr.std - s).abs() <= 1e-12);
        let written: f64 = line[4].parse().unwrap();
        assert!((written - m).abs() <= 1e-12);
        let (m, s) = manual_mean_std(&rows, |r| r.class_acc);
        assert!((agg.class_acc.mean - m).abs() <= 1e-12 && (agg.class_acc.std - s).abs() <= 1e-12);
        let psnr: Vec<f64> = rows.iter().map(|r| r.psnr).collect();
        assert_eq!(agg.psnr.mean, mean(&psnr));
        assert_eq!(agg.psnr.std, std_dev(&psnr));
    }

    assert_eq!(result.plots.len(), 2);
    for plot in &result.plots {
        let svg = fs::read_to_string(plot).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        // one marker per node on each of the three 28-step paths
        assert_eq!(svg.matches("<circle").count(), 3 * 29);
    }
}

#[test]
fn bench_lists_missing_runs() {
    let dir = TempDir::new().unwrap();
    let present = dir.path().join("present");
    restore_run(&spec(&[("seed", "0..2")]), None, &present, None).unwrap();
    let run = pdls(&[
        "bench",
        "--runs",
        path_str(&present),
        path_str(&dir.path().join("gone_a")),
        path_str(&dir.path().join("gone_b")),
        "--out",
        path_str(&dir.path().join("b")),
    ]);
    assert_eq!(run.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("gone_a") && stderr.contains("gone_b") && !stderr.contains("present"), "{stderr}");
}

#[test]
fn image_bench_writes_a_strip() {
    let dir = TempDir::new().unwrap();
    let s = spec(&[("task", "gblur"), ("seed", "1"), ("max_inputs", "3")]);
    degrade(&s, &dir.path().join("d")).unwrap();
    let run = dir.path().join("r");
    restore_run(&s, Some(&dir.path().join("d").join(MANIFEST_FILE)), &run, None).unwrap();
    let result = bench(&[run], &dir.path().join("b")).unwrap();
    assert!(result.table[0].ssim.is_some());
    let strip = pgm::read_image(&result.plots[0]).unwrap();
    assert_eq!((strip.width(), strip.height()), (3 * 33 - 1, 3 * 33 - 1));
}

#[test]
fn demo_runs_end_to_end() {
    let dir = TempDir::new().unwrap();
    let run = pdls(&["demo", "--out", path_str(dir.path()), "--jobs", "2"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let table = String::from_utf8_lossy(&run.stdout);
    assert_eq!(table.lines().count(), 4, "{table}");
    assert!(dir.path().join("bench").join(commands::SUMMARY_FILE).is_file());
}
