//! Priors and inputs: the builtin demo assets, mixture files, and
//! directories of labeled PGM images.

use std::fs;
use std::path::Path;

use pdls_core::bench::{Benchmark, GroundTruth, Task};
use pdls_core::datasets::{exemplar_mixture, shapes32, toy2d, Exemplar, SHAPES_SEED};
use pdls_core::{GaussianMixture, Label};

use crate::config::{DatasetSource, ExperimentSpec};
use crate::error::{CliError, Result};
use crate::mixture_file;
use crate::pgm;

/// A named, labeled dataset image.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedExemplar {
    pub name: String,
    pub exemplar: Exemplar,
}

#[derive(Debug, Clone)]
pub struct Prior {
    pub mixture: GaussianMixture,
    /// Dataset images for image tasks, in a stable order.
    pub exemplars: Vec<NamedExemplar>,
    pub dims: Option<(usize, usize)>,
}

impl Prior {
    pub fn load(spec: &ExperimentSpec) -> Result<Self> {
        if spec.task.is_image() {
            let exemplars = match &spec.dataset {
                DatasetSource::Demo => demo_exemplars(),
                DatasetSource::Path(p) if p.is_dir() => read_image_dir(p)?,
                DatasetSource::Path(p) => {
                    return Err(CliError::Config(format!(
                        "task {} needs `demo` or a directory of class subdirectories, got {}",
                        spec.task,
                        p.display()
                    )))
                }
            };
            let first = &exemplars[0].exemplar.image;
            let dims = (first.width(), first.height());
            let raw: Vec<Exemplar> = exemplars.iter().map(|e| e.exemplar.clone()).collect();
            let mixture = exemplar_mixture(&raw, spec.bandwidth).map_err(|e| CliError::core("dataset", e))?;
            Ok(Self {
                mixture,
                exemplars,
                dims: Some(dims),
            })
        } else {
            let mixture = match &spec.dataset {
                DatasetSource::Demo => toy2d(),
                DatasetSource::Path(p) if p.is_file() => mixture_file::load(p)?,
                DatasetSource::Path(p) => {
                    return Err(CliError::Config(format!(
                        "task {} needs `demo` or a mixture file, got {}",
                        spec.task,
                        p.display()
                    )))
                }
            };
            Ok(Self {
                mixture,
                exemplars: Vec::new(),
                dims: None,
            })
        }
    }

    /// Harness that draws toy ground truth and observations per seed.
    pub fn toy_benchmark(&self, spec: &ExperimentSpec) -> Benchmark {
        Benchmark {
            task: Task::Toy2d,
            mixture: self.mixture.clone(),
            image_dims: None,
            truth: GroundTruth::MixtureSample,
            sigma_y: spec.sigma_y,
        }
    }

    /// `max_inputs` evenly spaced exemplars, or all of them for 0.
    pub fn selected(&self, max_inputs: usize) -> Vec<&NamedExemplar> {
        let n = self.exemplars.len();
        if max_inputs == 0 || max_inputs >= n {
            return self.exemplars.iter().collect();
        }
        (0..max_inputs).map(|i| &self.exemplars[i * n / max_inputs]).collect()
    }
}

/// `shapes32`, named `<class>_<index within class>`.
pub fn demo_exemplars() -> Vec<NamedExemplar> {
    let mut counts = std::collections::BTreeMap::<Label, usize>::new();
    shapes32(SHAPES_SEED)
        .into_iter()
        .map(|exemplar| {
            let k = counts.entry(exemplar.label.clone()).or_default();
            let name = format!("{}_{:02}", exemplar.label, *k);
            *k += 1;
            NamedExemplar { name, exemplar }
        })
        .collect()
}

/// `dir/<class>/*.pgm`; every image must share one size.
pub fn read_image_dir(dir: &Path) -> Result<Vec<NamedExemplar>> {
    let mut classes: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| CliError::io(dir, e))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    let mut out = Vec::new();
    for class in classes {
        let label = class.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let mut files: Vec<_> = fs::read_dir(&class)
            .map_err(|e| CliError::io(&class, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| CliError::io(&class, e))?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
            .collect();
        files.sort();
        for file in files {
            let stem = file.file_stem().unwrap_or_default().to_string_lossy();
            out.push(NamedExemplar {
                name: format!("{label}_{stem}"),
                exemplar: Exemplar {
                    label: Label::new(label.as_str()),
                    image: pgm::read_image(&file)?,
                },
            });
        }
    }
    let Some(first) = out.first() else {
        return Err(CliError::Config(format!("{}: no class subdirectories with .pgm images", dir.display())));
    };
    let dims = (first.exemplar.image.width(), first.exemplar.image.height());
    if let Some(odd) = out
        .iter()
        .find(|e| (e.exemplar.image.width(), e.exemplar.image.height()) != dims)
    {
        return Err(CliError::Config(format!(
            "{}: image {} is {}x{}, expected {}x{}",
            dir.display(),
            odd.name,
            odd.exemplar.image.width(),
            odd.exemplar.image.height(),
            dims.0,
            dims.1
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_names_are_unique() {
        let ex = demo_exemplars();
        assert_eq!(ex.len(), 90);
        assert_eq!(ex[0].name, "disk_00");
        assert_eq!(ex[89].name, "cross_29");
        let mut names: Vec<_> = ex.iter().map(|e| e.name.clone()).collect();
        names.dedup();
        assert_eq!(names.len(), 90);
    }

    #[test]
    fn selection_spreads_over_classes() {
        let spec = ExperimentSpec {
            task: Task::GaussianBlur,
            ..ExperimentSpec::default()
        };
        let prior = Prior::load(&spec).unwrap();
        let picked: Vec<_> = prior.selected(3).iter().map(|e| e.name.clone()).collect();
        assert_eq!(picked, ["disk_00", "square_00", "cross_00"]);
        assert_eq!(prior.selected(0).len(), 90);
    }
}
