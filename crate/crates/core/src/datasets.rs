//! Builtin demo assets: a two-cluster 2-D mixture and a procedural 32x32
//! shape dataset used as an exemplar field.

use rand::Rng;

use crate::degrade::ImageGrid;
use crate::error::Result;
use crate::flowfield::{GaussianMixture, Label};
use crate::rng;

pub const TOY_SEPARATION: f64 = 2.0;
pub const TOY_VARIANCE: f64 = 0.05;

/// Two equal-weight clusters at `(+-2, 0)` with variance 0.05, labels `A`/`B`.
pub fn toy2d() -> GaussianMixture {
    GaussianMixture::uniform(
        vec![vec![TOY_SEPARATION, 0.0], vec![-TOY_SEPARATION, 0.0]],
        TOY_VARIANCE,
        vec!["A".into(), "B".into()],
    )
    .expect("toy mixture is valid")
}

pub const SHAPE_SIZE: usize = 32;
pub const SHAPES_PER_CLASS: usize = 30;
pub const SHAPES_SEED: u64 = 2024;
pub const SHAPE_CLASSES: [&str; 3] = ["disk", "square", "cross"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Disk,
    Square,
    Cross,
}

impl Shape {
    pub fn label(self) -> Label {
        Label::new(match self {
            Shape::Disk => "disk",
            Shape::Square => "square",
            Shape::Cross => "cross",
        })
    }

    fn covers(self, dx: f64, dy: f64, radius: f64) -> bool {
        match self {
            Shape::Disk => dx * dx + dy * dy <= radius * radius,
            Shape::Square => dx.abs() <= 0.85 * radius && dy.abs() <= 0.85 * radius,
            Shape::Cross => {
                let arm = 0.3 * radius;
                (dx.abs() <= arm && dy.abs() <= radius) || (dy.abs() <= arm && dx.abs() <= radius)
            }
        }
    }
}

/// Renders a bright shape on a dark background with 4x4 supersampling.
pub fn render_shape(shape: Shape, cx: f64, cy: f64, radius: f64, size: usize) -> ImageGrid {
    const SUB: usize = 4;
    let mut px = vec![0.0; size * size];
    for (k, p) in px.iter_mut().enumerate() {
        let (x, y) = ((k % size) as f64, (k / size) as f64);
        let mut hits = 0;
        for sy in 0..SUB {
            for sx in 0..SUB {
                let fx = x + (sx as f64 + 0.5) / SUB as f64;
                let fy = y + (sy as f64 + 0.5) / SUB as f64;
                if shape.covers(fx - cx, fy - cy, radius) {
                    hits += 1;
                }
            }
        }
        *p = hits as f64 / (SUB * SUB) as f64;
    }
    ImageGrid::new(size, size, px).expect("rendered image is valid")
}

/// One labeled exemplar image.
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub label: Label,
    pub image: ImageGrid,
}

/// Thirty exemplars each of disks, squares and crosses at random positions
/// and sizes; deterministic in `seed`.
pub fn shapes32(seed: u64) -> Vec<Exemplar> {
    let mut r = rng::stream(seed, rng::STREAM_DATASET);
    let mut out = Vec::with_capacity(3 * SHAPES_PER_CLASS);
    for shape in [Shape::Disk, Shape::Square, Shape::Cross] {
        for _ in 0..SHAPES_PER_CLASS {
            let cx = r.random_range(11.0..21.0);
            let cy = r.random_range(11.0..21.0);
            let radius = r.random_range(5.0..9.0);
            out.push(Exemplar {
                label: shape.label(),
                image: render_shape(shape, cx, cy, radius, SHAPE_SIZE),
            });
        }
    }
    out
}

/// Exemplar field: one equal-weight component per image with a shared
/// isotropic bandwidth (`0` gives Dirac components).
pub fn exemplar_mixture(exemplars: &[Exemplar], bandwidth: f64) -> Result<GaussianMixture> {
    GaussianMixture::uniform(
        exemplars.iter().map(|e| e.image.pixels().to_vec()).collect(),
        bandwidth,
        exemplars.iter().map(|e| e.label.clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_deterministic_and_labeled() {
        let a = shapes32(SHAPES_SEED);
        assert_eq!(a, shapes32(SHAPES_SEED));
        assert_eq!(a.len(), 90);
        for (i, name) in SHAPE_CLASSES.iter().enumerate() {
            assert!(a[i * 30..(i + 1) * 30].iter().all(|e| e.label.as_str() == *name));
        }
    }

    #[test]
    fn shapes_have_visible_foreground() {
        for e in shapes32(1) {
            let area: f64 = e.image.pixels().iter().sum();
            assert!(area > 20.0 && area < 600.0, "{area}");
        }
    }

    #[test]
    fn toy_mixture_layout() {
        let m = toy2d();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.labels(), vec![Label::new("A"), Label::new("B")]);
    }
}
