//! Reconstruction quality: MSE, PSNR, SSIM and a nearest-class proxy for
//! semantic fidelity.

use crate::degrade::{gaussian_kernel, ImageGrid};
use crate::error::{check_dim, PdlsError, Result};
use crate::flowfield::{GaussianMixture, Label};

pub const PEAK: f64 = 1.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    if a.is_empty() {
        return Err(PdlsError::DimensionMismatch { expected: 1, actual: 0 });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// `10 log10(peak^2 / mse)`; `+inf` for identical inputs.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// PSNR between two equally sized vectors (also used for point clouds).
pub fn psnr_vec(a: &[f64], b: &[f64], peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(PdlsError::InvalidParameter {
            name: "peak",
            reason: format!("{peak} must be positive"),
        });
    }
    Ok(psnr_from_mse(mse(a, b)?, peak))
}

pub fn psnr(a: &ImageGrid, b: &ImageGrid, peak: f64) -> Result<f64> {
    check_shape(a, b)?;
    psnr_vec(a.pixels(), b.pixels(), peak)
}

fn check_shape(a: &ImageGrid, b: &ImageGrid) -> Result<()> {
    if !a.same_shape(b) {
        return Err(PdlsError::DimensionMismatch {
            expected: a.pixels().len(),
            actual: b.pixels().len(),
        });
    }
    Ok(())
}

/// Mean SSIM over every fully contained 11x11 Gaussian window.
pub fn ssim(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    check_shape(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(PdlsError::ImageTooSmall {
            width: w,
            height: h,
            window: SSIM_WINDOW,
        });
    }
    let window = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)?;
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let (pa, pb) = (a.pixels(), b.pixels());

    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for j in 0..SSIM_WINDOW {
                for i in 0..SSIM_WINDOW {
                    let g = window.get(i, j);
                    let k = (y0 + j) * w + x0 + i;
                    let (u, v) = (pa[k], pb[k]);
                    ma += g * u;
                    mb += g * v;
                    saa += g * u * u;
                    sbb += g * v * v;
                    sab += g * u * v;
                }
            }
            let var_a = saa - ma * ma;
            let var_b = sbb - mb * mb;
            let cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Index of the component whose mean is nearest to `x`; ties go to the
/// lowest index.
pub fn nearest_component(x: &[f64], mixture: &GaussianMixture) -> Result<usize> {
    check_dim(mixture.dim(), x.len())?;
    let mut best = (0usize, f64::INFINITY);
    for (k, c) in mixture.components().iter().enumerate() {
        let d: f64 = c.mean.iter().zip(x).map(|(m, v)| (m - v) * (m - v)).sum();
        if d < best.1 {
            best = (k, d);
        }
    }
    Ok(best.0)
}

/// `true` iff the nearest component mean carries `true_label`.
pub fn class_accuracy(reconstruction: &[f64], mixture: &GaussianMixture, true_label: &Label) -> Result<bool> {
    if mixture.components().iter().any(|c| c.label.is_none()) {
        return Err(PdlsError::Unlabeled);
    }
    let k = nearest_component(reconstruction, mixture)?;
    Ok(mixture.components()[k].label.as_ref() == Some(true_label))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub mse: f64,
    pub psnr_db: f64,
    /// Only defined for images of at least 11x11 pixels.
    pub ssim: Option<f64>,
    pub class_accuracy: Option<bool>,
    pub distances: Vec<f64>,
}

impl MetricsReport {
    pub fn for_vectors(reconstruction: &[f64], truth: &[f64]) -> Result<Self> {
        let mse = mse(reconstruction, truth)?;
        Ok(Self {
            mse,
            psnr_db: psnr_from_mse(mse, PEAK),
            ..Self::default()
        })
    }

    pub fn for_images(reconstruction: &ImageGrid, truth: &ImageGrid) -> Result<Self> {
        check_shape(reconstruction, truth)?;
        let mut report = Self::for_vectors(reconstruction.pixels(), truth.pixels())?;
        if reconstruction.width() >= SSIM_WINDOW && reconstruction.height() >= SSIM_WINDOW {
            report.ssim = Some(ssim(reconstruction, truth)?);
        }
        Ok(report)
    }
}
