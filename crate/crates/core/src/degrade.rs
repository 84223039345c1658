//! Linear measurement models `y = A x + n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{PdlsError, Result};
use crate::rng;

/// Grayscale image, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    /// Builds an image, clamping every intensity into `[0, 1]`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(PdlsError::InvalidParameter {
                name: "image",
                reason: format!("empty {width}x{height} image"),
            });
        }
        if pixels.len() != width * height {
            return Err(PdlsError::DimensionMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        if pixels.iter().any(|p| p.is_nan()) {
            return Err(PdlsError::InvalidParameter {
                name: "image",
                reason: "NaN intensity".into(),
            });
        }
        let pixels = pixels.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Square, odd-sized convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn normalized(size: usize, mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self { size, weights }
    }
}

fn check_odd(size: usize) -> Result<()> {
    if size % 2 == 0 {
        return Err(PdlsError::InvalidKernel(format!("size {size} must be odd")));
    }
    Ok(())
}

pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    check_odd(size)?;
    if !(sigma > 0.0) {
        return Err(PdlsError::InvalidKernel(format!("sigma {sigma} must be positive")));
    }
    let r = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let weights = (0..size * size).map(|k| g[k / size] * g[k % size]).collect();
    Ok(Kernel::normalized(size, weights))
}

/// Straight streak of `max(1, round(intensity * size))` unit-spaced samples
/// through the center, bilinearly splatted. Angle is in degrees,
/// counter-clockwise from the +x axis with image rows growing downward.
pub fn motion_kernel(size: usize, intensity: f64, angle_deg: f64) -> Result<Kernel> {
    check_odd(size)?;
    if !(intensity > 0.0 && intensity <= 1.0) {
        return Err(PdlsError::InvalidKernel(format!(
            "intensity {intensity} must lie in (0, 1]"
        )));
    }
    let len = ((intensity * size as f64).round() as usize).clamp(1, size);
    let center = (size / 2) as f64;
    let (sin, cos) = (angle_deg * PI / 180.0).sin_cos();
    let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let mut weights = vec![0.0; size * size];
    let mut splat = |col: isize, row: isize, w: f64| {
        if w > 0.0 && (0..size as isize).contains(&col) && (0..size as isize).contains(&row) {
            weights[row as usize * size + col as usize] += w;
        }
    };
    for i in 0..len {
        let s = i as f64 - (len as f64 - 1.0) / 2.0;
        let px = snap(center + s * cos);
        let py = snap(center - s * sin);
        let (x0, y0) = (px.floor(), py.floor());
        let (fx, fy) = (px - x0, py - y0);
        let (c, r) = (x0 as isize, y0 as isize);
        splat(c, r, (1.0 - fx) * (1.0 - fy));
        splat(c + 1, r, fx * (1.0 - fy));
        splat(c, r + 1, (1.0 - fx) * fy);
        splat(c + 1, r + 1, fx * fy);
    }
    Ok(Kernel::normalized(size, weights))
}

/// Mirror index without repeating the edge sample (`d c b | a b c d | c b a`).
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// 2-D convolution with reflect padding.
pub fn convolve(image: &ImageGrid, kernel: &Kernel) -> Vec<f64> {
    let (w, h) = (image.width, image.height);
    let r = (kernel.size / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for a in 0..kernel.size {
                let sy = reflect(y as isize - (a as isize - r), h);
                for b in 0..kernel.size {
                    let sx = reflect(x as isize - (b as isize - r), w);
                    acc += kernel.weights[a * kernel.size + b] * image.pixels[sy * w + sx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegradationOperator {
    GaussianBlur { size: usize, sigma: f64 },
    MotionBlur { size: usize, intensity: f64, angle: f64 },
    Downsample { factor: usize },
    /// Mask pixels equal to 1 are hidden (set to 0).
    FreeformMask { mask: ImageGrid },
    Identity,
}

impl DegradationOperator {
    pub fn check(&self, image: &ImageGrid) -> Result<()> {
        match self {
            DegradationOperator::GaussianBlur { size, .. }
            | DegradationOperator::MotionBlur { size, .. } => check_odd(*size),
            DegradationOperator::Downsample { factor } => {
                if *factor == 0 || image.width % factor != 0 || image.height % factor != 0 {
                    return Err(PdlsError::FactorMustDivide {
                        width: image.width,
                        height: image.height,
                        factor: *factor,
                    });
                }
                Ok(())
            }
            DegradationOperator::FreeformMask { mask } => {
                if !mask.same_shape(image) {
                    return Err(PdlsError::DimensionMismatch {
                        expected: image.pixels.len(),
                        actual: mask.pixels.len(),
                    });
                }
                Ok(())
            }
            DegradationOperator::Identity => Ok(()),
        }
    }

    /// Noise-free linear map `A x`, returned as `(width, height, pixels)`
    /// without clamping.
    pub fn forward(&self, image: &ImageGrid) -> Result<(usize, usize, Vec<f64>)> {
        self.check(image)?;
        let (w, h) = (image.width, image.height);
        Ok(match self {
            DegradationOperator::GaussianBlur { size, sigma } => {
                (w, h, convolve(image, &gaussian_kernel(*size, *sigma)?))
            }
            DegradationOperator::MotionBlur {
                size,
                intensity,
                angle,
            } => (w, h, convolve(image, &motion_kernel(*size, *intensity, *angle)?)),
            DegradationOperator::Downsample { factor } => {
                let f = *factor;
                let (ow, oh) = (w / f, h / f);
                let norm = 1.0 / (f * f) as f64;
                let mut out = vec![0.0; ow * oh];
                for (y, row) in image.pixels.chunks(w).enumerate() {
                    for (x, &p) in row.iter().enumerate() {
                        out[(y / f) * ow + x / f] += p * norm;
                    }
                }
                (ow, oh, out)
            }
            DegradationOperator::FreeformMask { mask } => (
                w,
                h,
                image
                    .pixels
                    .iter()
                    .zip(&mask.pixels)
                    .map(|(&p, &m)| if m > 0.5 { 0.0 } else { p })
                    .collect(),
            ),
            DegradationOperator::Identity => (w, h, image.pixels.clone()),
        })
    }

    /// Places an observation back on the source pixel grid: downsampled
    /// observations are replicated blockwise, every other operator already
    /// lives on the source grid.
    pub fn lift(&self, observed: &ImageGrid) -> Result<ImageGrid> {
        match self {
            DegradationOperator::Downsample { factor } => {
                let f = *factor;
                let (w, h) = (observed.width * f, observed.height * f);
                let pixels = (0..w * h)
                    .map(|k| observed.get((k % w) / f, (k / w) / f))
                    .collect();
                ImageGrid::new(w, h, pixels)
            }
            _ => Ok(observed.clone()),
        }
    }
}

/// Additive `N(0, sigma_y^2)` measurement noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_y: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_y: f64, seed: u64) -> Result<Self> {
        if !(sigma_y >= 0.0) {
            return Err(PdlsError::InvalidParameter {
                name: "sigma_y",
                reason: format!("{sigma_y} must be non-negative"),
            });
        }
        Ok(Self { sigma_y, seed })
    }

    pub fn none() -> Self {
        Self { sigma_y: 0.0, seed: 0 }
    }

    pub fn sample(&self, len: usize) -> Vec<f64> {
        let mut r = rng::stream(self.seed, rng::STREAM_MEASUREMENT);
        rng::standard_normal_vec(&mut r, len)
            .into_iter()
            .map(|z| z * self.sigma_y)
            .collect()
    }
}

/// `clamp(A x + n)`.
pub fn apply(op: &DegradationOperator, image: &ImageGrid, noise: &NoiseModel) -> Result<ImageGrid> {
    let (w, h, mut pixels) = op.forward(image)?;
    if noise.sigma_y > 0.0 {
        for (p, n) in pixels.iter_mut().zip(noise.sample(w * h)) {
            *p += n;
        }
    }
    ImageGrid::new(w, h, pixels)
}

const MAX_STAMPS: usize = 100_000;

/// Random-walk brush strokes until the hidden fraction reaches `coverage`.
pub fn make_freeform_mask(width: usize, height: usize, coverage: f64, seed: u64) -> Result<ImageGrid> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(PdlsError::InvalidParameter {
            name: "coverage",
            reason: format!("{coverage} must lie in (0, 1)"),
        });
    }
    let mut r = rng::stream(seed, rng::STREAM_MASK);
    let radius = (width.min(height) / 16).max(1) as isize;
    let total = width * height;
    let target = ((coverage * total as f64).ceil() as usize).max(1);
    let mut mask = vec![0.0; total];
    let mut hidden = 0usize;
    let mut stamps = 0usize;
    'strokes: while hidden < target {
        let mut x = r.random_range(0.0..width as f64);
        let mut y = r.random_range(0.0..height as f64);
        let mut heading = r.random_range(0.0..2.0 * PI);
        let stroke_len = r.random_range(4..16);
        for _ in 0..stroke_len {
            stamps += 1;
            if stamps > MAX_STAMPS {
                return Err(PdlsError::CoverageUnreachable {
                    target: coverage,
                    iterations: MAX_STAMPS,
                });
            }
            let (cx, cy) = (x as isize, y as isize);
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    if dx * dx + dy * dy > radius * radius {
                        continue;
                    }
                    let (px, py) = (cx + dx, cy + dy);
                    if px < 0 || py < 0 || px >= width as isize || py >= height as isize {
                        continue;
                    }
                    let k = py as usize * width + px as usize;
                    if mask[k] == 0.0 {
                        mask[k] = 1.0;
                        hidden += 1;
                    }
                }
            }
            if hidden >= target {
                break 'strokes;
            }
            heading += r.random_range(-0.6..0.6);
            x = (x + radius as f64 * heading.cos()).clamp(0.0, width as f64 - 1.0);
            y = (y + radius as f64 * heading.sin()).clamp(0.0, height as f64 - 1.0);
        }
    }
    ImageGrid::new(width, height, mask)
}

/// Textual operator descriptor, e.g. `gblur:size=61,sigma=3.0`.
///
/// Masks depend on the image size, so an inpainting descriptor is turned
/// into an operator by [`OperatorSpec::instantiate`].
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    GaussianBlur { size: usize, sigma: f64 },
    MotionBlur { size: usize, intensity: f64, angle: f64 },
    Downsample { factor: usize },
    /// Coverage drawn uniformly from `[0.10, 0.20]` per seed when unset.
    Inpaint { coverage: Option<f64>, seed: Option<u64> },
    Identity,
}

pub const DEFAULT_MOTION_ANGLE: f64 = 45.0;

impl OperatorSpec {
    /// 7x7, sigma 1.5 Gaussian blur for 32x32 images.
    pub fn desk_gaussian_blur() -> Self {
        OperatorSpec::GaussianBlur { size: 7, sigma: 1.5 }
    }

    /// 7x7, intensity 0.5 motion blur for 32x32 images.
    pub fn desk_motion_blur() -> Self {
        OperatorSpec::MotionBlur {
            size: 7,
            intensity: 0.5,
            angle: DEFAULT_MOTION_ANGLE,
        }
    }

    pub fn large_gaussian_blur() -> Self {
        OperatorSpec::GaussianBlur { size: 61, sigma: 3.0 }
    }

    pub fn large_motion_blur() -> Self {
        OperatorSpec::MotionBlur {
            size: 61,
            intensity: 0.5,
            angle: DEFAULT_MOTION_ANGLE,
        }
    }

    pub fn super_resolution_8x() -> Self {
        OperatorSpec::Downsample { factor: 8 }
    }

    /// `fallback_seed` drives the mask when the descriptor carries no seed.
    pub fn instantiate(&self, width: usize, height: usize, fallback_seed: u64) -> Result<DegradationOperator> {
        Ok(match *self {
            OperatorSpec::GaussianBlur { size, sigma } => {
                gaussian_kernel(size, sigma)?;
                DegradationOperator::GaussianBlur { size, sigma }
            }
            OperatorSpec::MotionBlur {
                size,
                intensity,
                angle,
            } => {
                motion_kernel(size, intensity, angle)?;
                DegradationOperator::MotionBlur {
                    size,
                    intensity,
                    angle,
                }
            }
            OperatorSpec::Downsample { factor } => {
                if factor == 0 || width % factor != 0 || height % factor != 0 {
                    return Err(PdlsError::FactorMustDivide { width, height, factor });
                }
                DegradationOperator::Downsample { factor }
            }
            OperatorSpec::Inpaint { coverage, seed } => {
                let seed = seed.unwrap_or(fallback_seed);
                let coverage = coverage.unwrap_or_else(|| {
                    rng::stream(seed, rng::STREAM_MASK).random_range(0.10..=0.20)
                });
                DegradationOperator::FreeformMask {
                    mask: make_freeform_mask(width, height, coverage, seed)?,
                }
            }
            OperatorSpec::Identity => DegradationOperator::Identity,
        })
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::GaussianBlur { size, sigma } => write!(f, "gblur:size={size},sigma={sigma}"),
            OperatorSpec::MotionBlur {
                size,
                intensity,
                angle,
            } => write!(f, "mblur:size={size},intensity={intensity},angle={angle}"),
            OperatorSpec::Downsample { factor } => write!(f, "sr:factor={factor}"),
            OperatorSpec::Inpaint { coverage, seed } => {
                f.write_str("inpaint")?;
                let mut parts = Vec::new();
                if let Some(c) = coverage {
                    parts.push(format!("coverage={c}"));
                }
                if let Some(s) = seed {
                    parts.push(format!("seed={s}"));
                }
                if !parts.is_empty() {
                    write!(f, ":{}", parts.join(","))?;
                }
                Ok(())
            }
            OperatorSpec::Identity => f.write_str("id"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = PdlsError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PdlsError::Descriptor(s.to_owned());
        let (kind, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut params = std::collections::BTreeMap::new();
        for pair in args.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(bad)?;
            params.insert(k.trim(), v.trim());
        }
        let num = |key: &str| -> Result<Option<f64>> {
            params
                .get(key)
                .map(|v| v.parse::<f64>().map_err(|_| bad()))
                .transpose()
        };
        let int = |key: &str| -> Result<Option<u64>> {
            params
                .get(key)
                .map(|v| v.parse::<u64>().map_err(|_| bad()))
                .transpose()
        };
        let allow = |keys: &[&str]| -> Result<()> {
            if params.keys().all(|k| keys.contains(k)) {
                Ok(())
            } else {
                Err(bad())
            }
        };
        match kind {
            "gblur" => {
                allow(&["size", "sigma"])?;
                Ok(OperatorSpec::GaussianBlur {
                    size: int("size")?.ok_or_else(bad)? as usize,
                    sigma: num("sigma")?.ok_or_else(bad)?,
                })
            }
            "mblur" => {
                allow(&["size", "intensity", "angle"])?;
                Ok(OperatorSpec::MotionBlur {
                    size: int("size")?.ok_or_else(bad)? as usize,
                    intensity: num("intensity")?.ok_or_else(bad)?,
                    angle: num("angle")?.unwrap_or(DEFAULT_MOTION_ANGLE),
                })
            }
            "sr" => {
                allow(&["factor"])?;
                Ok(OperatorSpec::Downsample {
                    factor: int("factor")?.ok_or_else(bad)? as usize,
                })
            }
            "inpaint" => {
                allow(&["coverage", "seed"])?;
                Ok(OperatorSpec::Inpaint {
                    coverage: num("coverage")?,
                    seed: int("seed")?,
                })
            }
            "id" if params.is_empty() => Ok(OperatorSpec::Identity),
            _ => Err(bad()),
        }
    }
}
