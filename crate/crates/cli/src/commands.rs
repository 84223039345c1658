//! The `degrade`, `restore`, `bench` and `demo` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use pdls_core::bench::{mean, std_dev, Task};
use pdls_core::degrade::{apply, NoiseModel, OperatorSpec};
use pdls_core::metrics::{class_accuracy, MetricsReport};
use pdls_core::pdls::{restore_image, StepRecord};
use pdls_core::{restore, Label};
use rayon::prelude::*;

use crate::config::ExperimentSpec;
use crate::dataset::Prior;
use crate::error::{CliError, Result};
use crate::manifest::{self, ManifestRow, MANIFEST_FILE};
use crate::{pgm, plot};

pub const METRICS_FILE: &str = "metrics.csv";
pub const RUN_FILE: &str = "run.txt";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const METRICS_HEADER: [&str; 10] = [
    "task",
    "id",
    "seed",
    "label",
    "method",
    "config_hash",
    "mse",
    "psnr",
    "ssim",
    "class_acc",
];

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("`--jobs` must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Inpainting descriptors without a seed take the run seed, so the stored
/// descriptor alone rebuilds the mask.
fn pin_descriptor(spec: &OperatorSpec, seed: u64) -> OperatorSpec {
    match *spec {
        OperatorSpec::Inpaint { coverage, seed: None } => OperatorSpec::Inpaint {
            coverage,
            seed: Some(seed),
        },
        ref other => other.clone(),
    }
}

/// Writes one observation per input and seed plus `manifest.csv`.
pub fn degrade(spec: &ExperimentSpec, out: &Path) -> Result<Vec<ManifestRow>> {
    let prior = Prior::load(spec)?;
    let mut rows = Vec::new();
    if let (Some(op_spec), Some((w, h))) = (spec.operator_spec(), prior.dims) {
        let inputs = prior.selected(spec.max_inputs);
        for input in &inputs {
            op_spec
                .instantiate(w, h, spec.seeds[0])
                .map_err(|e| CliError::core(&input.name, e))?;
        }
        create_dir(&out.join("observed"))?;
        create_dir(&out.join("truth"))?;
        for input in &inputs {
            let truth = format!("truth/{}.pgm", input.name);
            pgm::write_image(&out.join(&truth), &input.exemplar.image)?;
            for &seed in &spec.seeds {
                let id = format!("{}_s{seed}", input.name);
                let descriptor = pin_descriptor(&op_spec, seed);
                let op = descriptor.instantiate(w, h, seed).map_err(|e| CliError::core(&id, e))?;
                let noise = NoiseModel::new(spec.sigma_y, seed).map_err(|e| CliError::core(&id, e))?;
                let measurement = apply(&op, &input.exemplar.image, &noise).map_err(|e| CliError::core(&id, e))?;
                let observed = format!("observed/{id}.pgm");
                pgm::write_image(&out.join(&observed), &measurement)?;
                rows.push(ManifestRow {
                    id,
                    task: spec.task,
                    input: input.name.clone(),
                    label: input.exemplar.label.clone(),
                    seed,
                    width: w,
                    height: h,
                    operator: descriptor.to_string(),
                    sigma_y: spec.sigma_y,
                    observed,
                    truth: truth.clone(),
                });
            }
        }
    } else {
        let bench = prior.toy_benchmark(spec);
        create_dir(&out.join("observed"))?;
        create_dir(&out.join("truth"))?;
        for &seed in &spec.seeds {
            let id = format!("s{seed}");
            let case = bench.case(seed).map_err(|e| CliError::core(&id, e))?;
            let observed = format!("observed/{id}.csv");
            let truth = format!("truth/{id}.csv");
            pgm::write_points(&out.join(&observed), &[case.observed])?;
            pgm::write_points(&out.join(&truth), std::slice::from_ref(&case.truth))?;
            rows.push(ManifestRow {
                id,
                task: spec.task,
                input: "sample".into(),
                label: case.label,
                seed,
                width: case.truth.len(),
                height: 1,
                operator: "none".into(),
                sigma_y: spec.sigma_y,
                observed,
                truth,
            });
        }
    }
    manifest::write(&out.join(MANIFEST_FILE), &rows)?;
    Ok(rows)
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub task: Task,
    pub id: String,
    pub seed: u64,
    pub label: Label,
    pub method: String,
    pub config_hash: String,
    pub mse: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
    pub class_acc: f64,
}

impl MetricsRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.task.to_string(),
            self.id.clone(),
            self.seed.to_string(),
            self.label.to_string(),
            self.method.clone(),
            self.config_hash.clone(),
            self.mse.to_string(),
            self.psnr.to_string(),
            self.ssim.map(|s| s.to_string()).unwrap_or_default(),
            self.class_acc.to_string(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        if r.len() != METRICS_HEADER.len() {
            return Err(format!("expected {} fields, got {}", METRICS_HEADER.len(), r.len()));
        }
        let num = |i: usize| -> std::result::Result<f64, String> {
            r[i].parse().map_err(|_| format!("`{}` is not a number: `{}`", METRICS_HEADER[i], &r[i]))
        };
        Ok(Self {
            task: r[0].parse().map_err(|e: pdls_core::PdlsError| e.to_string())?,
            id: r[1].to_string(),
            seed: r[2].parse().map_err(|_| format!("bad seed `{}`", &r[2]))?,
            label: Label::new(&r[3]),
            method: r[4].to_string(),
            config_hash: r[5].to_string(),
            mse: num(6)?,
            psnr: num(7)?,
            ssim: if r[8].is_empty() { None } else { Some(num(8)?) },
            class_acc: num(9)?,
        })
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(METRICS_HEADER).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(row.record()).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = r.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(CliError::malformed(path, "unexpected metrics header"));
    }
    r.records()
        .enumerate()
        .map(|(n, rec)| {
            let rec = rec.map_err(|e| CliError::csv(path, e))?;
            MetricsRow::from_record(&rec).map_err(|e| CliError::malformed(path, format!("row {}: {e}", n + 1)))
        })
        .collect()
}

fn diagnostics_csv(steps: &[StepRecord]) -> String {
    let mut text = String::from("step,t,eta,dist_to_target\n");
    for s in steps {
        text.push_str(&format!("{},{},{},{}\n", s.step, s.t, s.eta, s.dist_to_target));
    }
    text
}

fn trajectory_csv(traj: &pdls_core::integrate::Trajectory) -> Result<String> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).map_err(|e| CliError::io("trajectory", e))?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// A restoration input: an image observation from a manifest, or a vector.
enum Job {
    Image { row: ManifestRow, manifest: PathBuf },
    Vector { row: ManifestRow, observed: Vec<f64>, truth: Vec<f64> },
}

impl Job {
    fn row(&self) -> &ManifestRow {
        match self {
            Job::Image { row, .. } | Job::Vector { row, .. } => row,
        }
    }
}

fn read_single_point(path: &Path) -> Result<Vec<f64>> {
    let mut points = pgm::read_points(path)?;
    if points.len() != 1 {
        return Err(CliError::malformed(path, format!("expected one point, found {}", points.len())));
    }
    Ok(points.remove(0))
}

/// Builds the job list and the experiment settings as they apply to it.
fn plan(spec: &ExperimentSpec, manifest_path: Option<&Path>, prior: &Prior) -> Result<(ExperimentSpec, Vec<Job>)> {
    let mut spec = spec.clone();
    let Some(path) = manifest_path else {
        if spec.task.is_image() {
            return Err(CliError::Config(format!(
                "task {} restores from a manifest; run `pdls degrade` and pass `--manifest`",
                spec.task
            )));
        }
        let bench = prior.toy_benchmark(&spec);
        let jobs = spec
            .seeds
            .iter()
            .map(|&seed| {
                let id = format!("s{seed}");
                let case = bench.case(seed).map_err(|e| CliError::core(&id, e))?;
                Ok(Job::Vector {
                    row: ManifestRow {
                        id,
                        task: spec.task,
                        input: "sample".into(),
                        label: case.label,
                        seed,
                        width: case.truth.len(),
                        height: 1,
                        operator: "none".into(),
                        sigma_y: spec.sigma_y,
                        observed: String::new(),
                        truth: String::new(),
                    },
                    observed: case.observed,
                    truth: case.truth,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((spec, jobs));
    };

    let rows = manifest::read(path)?;
    let task = rows[0].task;
    if rows.iter().any(|r| r.task != task) {
        return Err(CliError::malformed(path, "manifest mixes tasks"));
    }
    if spec.task_explicit && spec.task != task {
        return Err(CliError::Config(format!("task {} does not match manifest task {task}", spec.task)));
    }
    let mut seeds: Vec<u64> = Vec::new();
    for r in &rows {
        if !seeds.contains(&r.seed) {
            seeds.push(r.seed);
        }
    }
    spec.task = task;
    spec.seeds = seeds;
    spec.sigma_y = rows[0].sigma_y;
    let jobs = rows
        .into_iter()
        .map(|row| {
            if task.is_image() {
                Ok(Job::Image {
                    row,
                    manifest: path.to_owned(),
                })
            } else {
                let observed = read_single_point(&manifest::resolve(path, &row.observed))?;
                let truth = read_single_point(&manifest::resolve(path, &row.truth))?;
                Ok(Job::Vector { row, observed, truth })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spec, jobs))
}

fn run_job(job: &Job, spec: &ExperimentSpec, prior: &Prior, out: &Path, method: &str, hash: &str) -> Result<MetricsRow> {
    let row = job.row();
    let id = row.id.as_str();
    let core = |e| CliError::core(id, e);
    let cond = spec.prompt.condition(&row.label);
    let (report, output, steps) = match job {
        Job::Image { row, manifest } => {
            let observed = pgm::read_image(&manifest::resolve(manifest, &row.observed))?;
            let truth = pgm::read_image(&manifest::resolve(manifest, &row.truth))?;
            let op = row
                .operator
                .parse::<OperatorSpec>()
                .and_then(|o| o.instantiate(row.width, row.height, row.seed))
                .map_err(core)?;
            let (image, restoration) =
                restore_image(&observed, &op, &prior.mixture, &cond, &spec.pdls, row.seed).map_err(core)?;
            pgm::write_image(&out.join(format!("reconstructions/{id}.pgm")), &image)?;
            let report = MetricsReport::for_images(&image, &truth).map_err(core)?;
            (report, image.into_pixels(), restoration.report.steps)
        }
        Job::Vector { row, observed, truth } => {
            let r = restore(observed, &prior.mixture, &cond, &spec.pdls, row.seed).map_err(core)?;
            pgm::write_points(&out.join(format!("reconstructions/{id}.csv")), std::slice::from_ref(&r.output))?;
            for (name, traj) in [
                ("structural", &r.paths.structural),
                ("semantic", &r.paths.semantic),
                ("steered", &r.generation.trajectory),
            ] {
                write_text(&out.join(format!("trajectories/{id}_{name}.csv")), &trajectory_csv(traj)?)?;
            }
            let report = MetricsReport::for_vectors(&r.output, truth).map_err(core)?;
            (report, r.output, r.report.steps)
        }
    };
    write_text(&out.join(format!("diagnostics/{id}.csv")), &diagnostics_csv(&steps))?;
    let correct = class_accuracy(&output, &prior.mixture, &row.label).map_err(core)?;
    Ok(MetricsRow {
        task: row.task,
        id: row.id.clone(),
        seed: row.seed,
        label: row.label.clone(),
        method: method.to_string(),
        config_hash: hash.to_string(),
        mse: report.mse,
        psnr: report.psnr_db,
        ssim: report.ssim,
        class_acc: if correct { 1.0 } else { 0.0 },
    })
}

/// Restores every manifest row (or every seed of a vector task). Seeds run
/// in parallel and write their own files; `metrics.csv` and `run.txt` are
/// written afterwards on the calling thread.
pub fn restore_run(
    spec: &ExperimentSpec,
    manifest_path: Option<&Path>,
    out: &Path,
    jobs: Option<usize>,
) -> Result<Vec<MetricsRow>> {
    let mut resolved = spec.clone();
    if let Some(path) = manifest_path {
        // the prior depends on the manifest's task
        if let Some(first) = manifest::read(path)?.first() {
            resolved.task = first.task;
        }
    }
    let prior = Prior::load(&resolved)?;
    let (spec, work) = plan(spec, manifest_path, &prior)?;
    for dir in ["reconstructions", "diagnostics", "trajectories"] {
        if dir != "trajectories" || !spec.task.is_image() {
            create_dir(&out.join(dir))?;
        }
    }
    let method = spec.method_label();
    let hash = spec.config_hash();
    let rows = with_pool(jobs, || {
        work.par_iter()
            .map(|job| run_job(job, &spec, &prior, out, &method, &hash))
            .collect::<Result<Vec<_>>>()
    })??;
    write_metrics(&out.join(METRICS_FILE), &rows)?;
    let manifest_entry = match manifest_path {
        Some(p) => fs::canonicalize(p).map_err(|e| CliError::io(p, e))?.display().to_string(),
        None => String::new(),
    };
    spec.write_run_file(&out.join(RUN_FILE), &[("method", method), ("manifest", manifest_entry)])?;
    Ok(rows)
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Self> {
        (!values.is_empty()).then(|| Self {
            mean: mean(values),
            std: std_dev(values),
        })
    }
}

/// One row of the benchmark table: a (task, method, config) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub task: Task,
    pub method: String,
    pub config_hash: String,
    pub n: usize,
    pub psnr: Stat,
    pub ssim: Option<Stat>,
    pub class_acc: Stat,
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "task",
    "method",
    "config_hash",
    "n",
    "psnr_mean",
    "psnr_std",
    "ssim_mean",
    "ssim_std",
    "class_acc_mean",
    "class_acc_std",
];

pub fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    let mut groups: Vec<((Task, String, String), Vec<&MetricsRow>)> = Vec::new();
    for r in rows {
        let key = (r.task, r.method.clone(), r.config_hash.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((task, method, config_hash), g)| {
            let psnr: Vec<f64> = g.iter().map(|r| r.psnr).collect();
            let ssim: Vec<f64> = g.iter().filter_map(|r| r.ssim).collect();
            let acc: Vec<f64> = g.iter().map(|r| r.class_acc).collect();
            Aggregate {
                task,
                method,
                config_hash,
                n: g.len(),
                psnr: Stat::of(&psnr).expect("non-empty group"),
                ssim: Stat::of(&ssim),
                class_acc: Stat::of(&acc).expect("non-empty group"),
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, table: &[Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| CliError::csv(path, e))?;
    for a in table {
        let (sm, ss) = a
            .ssim
            .map(|s| (s.mean.to_string(), s.std.to_string()))
            .unwrap_or_default();
        w.write_record([
            a.task.to_string(),
            a.method.clone(),
            a.config_hash.clone(),
            a.n.to_string(),
            a.psnr.mean.to_string(),
            a.psnr.std.to_string(),
            sm,
            ss,
            a.class_acc.mean.to_string(),
            a.class_acc.std.to_string(),
        ])
        .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Plain-text rendering of the benchmark table.
pub fn format_table(table: &[Aggregate]) -> String {
    let mut out = format!(
        "{:<8} {:<28} {:<16} {:>4} {:>17} {:>15} {:>15}\n",
        "task", "method", "config", "n", "psnr", "ssim", "class_acc"
    );
    for a in table {
        let ssim = a
            .ssim
            .map(|s| format!("{:.3} ± {:.3}", s.mean, s.std))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<8} {:<28} {:<16} {:>4} {:>17} {:>15} {:>15}\n",
            a.task.to_string(),
            a.method,
            a.config_hash,
            a.n,
            format!("{:.2} ± {:.2}", a.psnr.mean, a.psnr.std),
            ssim,
            format!("{:.3} ± {:.3}", a.class_acc.mean, a.class_acc.std),
        ));
    }
    out
}

fn read_run_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

fn read_states(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::csv(path, e))?;
            rec.iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|_| CliError::malformed(path, format!("bad value `{v}`"))))
                .collect()
        })
        .collect()
}

/// Trajectory SVG (vector tasks) or truth | observation | restoration strip
/// (image tasks) for the first inputs of a run.
fn plot_run(run: &Path, rows: &[MetricsRow], dest: &Path, name: &str) -> Result<Option<PathBuf>> {
    let run_file = run.join(RUN_FILE);
    if !run_file.exists() || rows.is_empty() {
        return Ok(None);
    }
    let mut info = read_run_file(&run_file)?;
    let manifest_path = info.remove("manifest").filter(|m| !m.is_empty()).map(PathBuf::from);
    let knobs: BTreeMap<String, String> = info
        .into_iter()
        .filter(|(k, _)| crate::config::KEYS.contains(&k.as_str()))
        .collect();
    let spec = ExperimentSpec::from_pairs(&knobs)?;
    let prior = Prior::load(&spec)?;
    if !spec.task.is_image() {
        let id = &rows[0].id;
        let paths = ["structural", "semantic", "steered"]
            .into_iter()
            .map(|p| Ok((p, read_states(&run.join(format!("trajectories/{id}_{p}.csv")))?)))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(&str, &[Vec<f64>])> = paths.iter().map(|(n, s)| (*n, s.as_slice())).collect();
        let anchors: Vec<Vec<f64>> = prior.mixture.components().iter().map(|c| c.mean.clone()).collect();
        let file = dest.join(format!("{name}_trajectories.svg"));
        write_text(&file, &plot::trajectory_svg(&refs, &anchors))?;
        return Ok(Some(file));
    }
    let Some(manifest_path) = manifest_path else {
        return Ok(None);
    };
    let by_id: BTreeMap<String, ManifestRow> = manifest::read(&manifest_path)?
        .into_iter()
        .map(|r| (r.id.clone(), r))
        .collect();
    let mut strip = Vec::new();
    for m in rows.iter().take(4) {
        let Some(row) = by_id.get(&m.id) else { continue };
        let observed = pgm::read_image(&manifest::resolve(&manifest_path, &row.observed))?;
        let lifted = row
            .operator
            .parse::<OperatorSpec>()
            .and_then(|o| o.instantiate(row.width, row.height, row.seed))
            .and_then(|op| op.lift(&observed))
            .map_err(|e| CliError::core(&row.id, e))?;
        strip.push(vec![
            pgm::read_image(&manifest::resolve(&manifest_path, &row.truth))?,
            lifted,
            pgm::read_image(&run.join(format!("reconstructions/{}.pgm", m.id)))?,
        ]);
    }
    let Some(image) = plot::image_strip(&strip) else {
        return Ok(None);
    };
    let file = dest.join(format!("{name}_strip.pgm"));
    pgm::write_image(&file, &image)?;
    Ok(Some(file))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub table: Vec<Aggregate>,
    pub plots: Vec<PathBuf>,
}

/// Aggregates completed restore runs into `summary.csv` plus plots.
pub fn bench(runs: &[PathBuf], out: &Path) -> Result<BenchOutput> {
    if runs.is_empty() {
        return Err(CliError::Config("no runs given".into()));
    }
    let missing: Vec<PathBuf> = runs
        .iter()
        .map(|r| r.join(METRICS_FILE))
        .filter(|m| !m.is_file())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::MissingRuns(missing));
    }
    let per_run = runs
        .iter()
        .map(|r| read_metrics(&r.join(METRICS_FILE)))
        .collect::<Result<Vec<_>>>()?;
    let table = aggregate(&per_run.concat());
    create_dir(&out.join("plots"))?;
    write_summary(&out.join(SUMMARY_FILE), &table)?;
    let mut plots = Vec::new();
    for (i, (run, rows)) in runs.iter().zip(&per_run).enumerate() {
        let base = run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some(p) = plot_run(run, rows, &out.join("plots"), &format!("{i:02}_{base}"))? {
            plots.push(p);
        }
    }
    Ok(BenchOutput { table, plots })
}

/// Toy steering vs. the unsteered baseline, and a small deblurring run on
/// the shapes demo, aggregated under `out/bench`.
pub fn demo(out: &Path, jobs: Option<usize>) -> Result<BenchOutput> {
    let spec = |pairs: &[(&str, &str)]| {
        ExperimentSpec::from_pairs(&pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    };
    let seeds = "0..20";
    let toy = spec(&[("seed", seeds)])?;
    let toy_baseline = spec(&[("seed", seeds), ("eta_max", "0")])?;
    let blur = spec(&[("task", "gblur"), ("seed", "1"), ("max_inputs", "6")])?;

    let runs = [out.join("toy2d_pdls"), out.join("toy2d_baseline"), out.join("gblur_pdls")];
    restore_run(&toy, None, &runs[0], jobs)?;
    restore_run(&toy_baseline, None, &runs[1], jobs)?;
    let degraded = out.join("gblur_degraded");
    degrade(&blur, &degraded)?;
    restore_run(&blur, Some(&degraded.join(MANIFEST_FILE)), &runs[2], jobs)?;
    bench(&runs, &out.join("bench"))
}
