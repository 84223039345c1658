//! Benchmark harness: draws ground truth from a dataset, degrades it,
//! restores it and scores the result.
//!
//! Ground truth is drawn from the prior itself, so the prior always covers
//! the truth the way a trained model covers its training distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::degrade::{apply, DegradationOperator, ImageGrid, NoiseModel, OperatorSpec};
use crate::error::{PdlsError, Result};
use crate::datasets::{exemplar_mixture, shapes32, toy2d, SHAPES_SEED, SHAPE_SIZE};
use crate::flowfield::{Condition, GaussianMixture, Label};
use crate::metrics::{class_accuracy, MetricsReport};
use crate::pdls::{restore, PdlsConfig, RestoreReport};
use crate::rng;

/// Default exemplar bandwidth for the builtin image benchmark.
pub const DEFAULT_BANDWIDTH: f64 = 0.01;
/// Measurement noise used by every image task.
pub const DEFAULT_SIGMA_Y: f64 = 0.01;
/// Observation noise for the 2-D toy task.
pub const TOY_OBSERVATION_NOISE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Toy2d,
    GaussianBlur,
    MotionBlur,
    Sr8,
    Inpaint,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Toy2d, Task::GaussianBlur, Task::MotionBlur, Task::Sr8, Task::Inpaint];

    /// Desk-scale operator for image tasks.
    pub fn operator_spec(self) -> Option<OperatorSpec> {
        match self {
            Task::Toy2d => None,
            Task::GaussianBlur => Some(OperatorSpec::desk_gaussian_blur()),
            Task::MotionBlur => Some(OperatorSpec::desk_motion_blur()),
            Task::Sr8 => Some(OperatorSpec::super_resolution_8x()),
            Task::Inpaint => Some(OperatorSpec::Inpaint {
                coverage: None,
                seed: None,
            }),
        }
    }

    pub fn is_image(self) -> bool {
        self != Task::Toy2d
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Toy2d => "toy2d",
            Task::GaussianBlur => "gblur",
            Task::MotionBlur => "mblur",
            Task::Sr8 => "sr8",
            Task::Inpaint => "inpaint",
        })
    }
}

impl FromStr for Task {
    type Err = PdlsError;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| PdlsError::InvalidParameter {
                name: "task",
                reason: format!("`{s}` is not one of toy2d|gblur|mblur|sr8|inpaint"),
            })
    }
}

/// Which prompt the semantic path receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptMode {
    /// The ground truth's class label.
    TrueLabel,
    /// No prompt: single-path inversion.
    Null,
}

/// How ground truth is drawn from the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundTruth {
    /// A draw from the mixture itself: uniform component, then its Gaussian.
    MixtureSample,
    /// A component mean, i.e. one exemplar image. The bandwidth then acts
    /// as field smoothing only.
    Exemplar,
}

/// One ground-truth sample and its degraded observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub seed: u64,
    pub label: Label,
    pub truth: Vec<f64>,
    /// Observation on the source grid, ready for inversion.
    pub observed: Vec<f64>,
    /// Raw observation for image tasks (smaller than the source for `sr8`).
    pub measurement: Option<ImageGrid>,
    pub operator: Option<DegradationOperator>,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub seed: u64,
    pub label: Label,
    /// Restoration vs. truth.
    pub restored: MetricsReport,
    /// Lifted observation vs. truth.
    pub degraded: MetricsReport,
    pub output: Vec<f64>,
    pub report: RestoreReport,
}

/// A task bound to a prior and a ground-truth model.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub task: Task,
    pub mixture: GaussianMixture,
    /// `(width, height)` for image tasks.
    pub image_dims: Option<(usize, usize)>,
    pub truth: GroundTruth,
    /// Measurement noise level; the toy task adds it directly to the truth.
    pub sigma_y: f64,
}

impl Benchmark {
    /// `toy2d` on the two-cluster mixture, every image task on `shapes32`
    /// exemplars smoothed by `bandwidth`.
    pub fn builtin(task: Task, bandwidth: f64) -> Result<Self> {
        if task.is_image() {
            let mixture = exemplar_mixture(&shapes32(SHAPES_SEED), bandwidth)?;
            Ok(Self {
                task,
                mixture,
                image_dims: Some((SHAPE_SIZE, SHAPE_SIZE)),
                truth: GroundTruth::Exemplar,
                sigma_y: DEFAULT_SIGMA_Y,
            })
        } else {
            Ok(Self {
                task,
                mixture: toy2d(),
                image_dims: None,
                truth: GroundTruth::MixtureSample,
                sigma_y: TOY_OBSERVATION_NOISE,
            })
        }
    }

    fn sample_truth(&self, seed: u64) -> (Label, Vec<f64>) {
        let mut r = rng::stream(seed, rng::STREAM_SAMPLE);
        let k = r.random_range(0..self.mixture.len());
        let c = &self.mixture.components()[k];
        let label = c.label.clone().unwrap_or_else(|| Label::new(""));
        match self.truth {
            GroundTruth::Exemplar => (label, c.mean.clone()),
            GroundTruth::MixtureSample => {
                let sd = c.variance.sqrt();
                let eps = rng::standard_normal_vec(&mut r, self.mixture.dim());
                (label, c.mean.iter().zip(eps).map(|(m, e)| m + sd * e).collect())
            }
        }
    }

    /// Ground truth and observation for `seed`.
    pub fn case(&self, seed: u64) -> Result<Case> {
        let (label, truth) = self.sample_truth(seed);
        let Some(spec) = self.task.operator_spec() else {
            let mut r = rng::stream(seed, rng::STREAM_MEASUREMENT);
            let noise = rng::standard_normal_vec(&mut r, truth.len());
            let observed = truth
                .iter()
                .zip(noise)
                .map(|(x, n)| x + self.sigma_y * n)
                .collect();
            return Ok(Case {
                seed,
                label,
                truth,
                observed,
                measurement: None,
                operator: None,
                width: self.mixture.dim(),
                height: 1,
            });
        };
        let (w, h) = self.image_dims.ok_or(PdlsError::InvalidParameter {
            name: "image_dims",
            reason: format!("task {} needs image dimensions", self.task),
        })?;
        let truth_img = ImageGrid::new(w, h, truth)?;
        let op = spec.instantiate(w, h, seed)?;
        let measurement = apply(&op, &truth_img, &NoiseModel::new(self.sigma_y, seed)?)?;
        let observed = op.lift(&measurement)?.into_pixels();
        Ok(Case {
            seed,
            label,
            truth: truth_img.into_pixels(),
            observed,
            measurement: Some(measurement),
            operator: Some(op),
            width: w,
            height: h,
        })
    }

    fn score(&self, values: &[f64], case: &Case) -> Result<MetricsReport> {
        let mut m = if case.height > 1 {
            let a = ImageGrid::new(case.width, case.height, values.to_vec())?;
            let b = ImageGrid::new(case.width, case.height, case.truth.clone())?;
            MetricsReport::for_images(&a, &b)?
        } else {
            MetricsReport::for_vectors(values, &case.truth)?
        };
        m.class_accuracy = Some(class_accuracy(values, &self.mixture, &case.label)?);
        Ok(m)
    }

    pub fn run_case(&self, case: &Case, prompt: PromptMode, config: &PdlsConfig) -> Result<CaseResult> {
        let cond = match prompt {
            PromptMode::TrueLabel => Condition::labels([case.label.clone()]),
            PromptMode::Null => Condition::Null,
        };
        let restoration = restore(&case.observed, &self.mixture, &cond, config, case.seed)?;
        let mut output = restoration.output;
        if case.height > 1 {
            // images live in [0, 1]
            output = ImageGrid::new(case.width, case.height, output)?.into_pixels();
        }
        let mut restored = self.score(&output, case)?;
        restored.distances = restoration.report.steps.iter().map(|s| s.dist_to_target).collect();
        Ok(CaseResult {
            seed: case.seed,
            label: case.label.clone(),
            restored,
            degraded: self.score(&case.observed, case)?,
            output,
            report: restoration.report,
        })
    }

    /// Runs every seed independently (in parallel); results come back in seed order.
    pub fn run(&self, seeds: &[u64], prompt: PromptMode, config: &PdlsConfig) -> Result<Vec<CaseResult>> {
        seeds
            .par_iter()
            .map(|&seed| self.run_case(&self.case(seed)?, prompt, config))
            .collect()
    }
}

/// Paired comparison of two binary outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    /// Pairs where only the first method succeeded.
    pub wins: u64,
    /// Pairs where only the second method succeeded.
    pub losses: u64,
    /// One-sided exact binomial p-value for `wins` among discordant pairs.
    pub p_value: f64,
}

pub fn paired_sign_test(first: &[bool], second: &[bool]) -> SignTest {
    let wins = first.iter().zip(second).filter(|(a, b)| **a && !**b).count() as u64;
    let losses = first.iter().zip(second).filter(|(a, b)| !**a && **b).count() as u64;
    let n = wins + losses;
    let p_value = if n == 0 || wins == 0 {
        1.0
    } else {
        let dist = Binomial::new(0.5, n).expect("valid binomial");
        1.0 - dist.cdf(wins - 1)
    };
    SignTest { wins, losses, p_value }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}
