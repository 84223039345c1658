//! Steering law, guidance schedules and drift blending.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, check_unit, PdlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleKind {
    /// `eta(t) = eta_max / 2 * (1 + cos(pi t))`
    #[default]
    CosineDecay,
    Constant,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::CosineDecay => "cosine",
            ScheduleKind::Constant => "constant",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = PdlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(ScheduleKind::CosineDecay),
            "constant" => Ok(ScheduleKind::Constant),
            other => Err(PdlsError::InvalidParameter {
                name: "schedule",
                reason: format!("`{other}` is not one of cosine|constant"),
            }),
        }
    }
}

/// Time-varying steering strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringSchedule {
    eta_max: f64,
    kind: ScheduleKind,
}

impl SteeringSchedule {
    pub fn new(eta_max: f64, kind: ScheduleKind) -> Result<Self> {
        check_unit("eta_max", eta_max)?;
        Ok(Self { eta_max, kind })
    }

    pub fn cosine(eta_max: f64) -> Result<Self> {
        Self::new(eta_max, ScheduleKind::CosineDecay)
    }

    pub fn constant(eta: f64) -> Result<Self> {
        Self::new(eta, ScheduleKind::Constant)
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn eta(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PdlsError::TimeOutOfRange { t });
        }
        Ok(match self.kind {
            ScheduleKind::CosineDecay => 0.5 * self.eta_max * (1.0 + (PI * t).cos()),
            ScheduleKind::Constant => self.eta_max,
        })
    }
}

/// Inversion controller strength plus the generation schedule.
///
/// `lambda_terminal` is the terminal-cost weight of the steering objective.
/// It is carried for reporting only: the steering law is its exact-terminal
/// limit and does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub gamma: f64,
    pub schedule: SteeringSchedule,
    pub lambda_terminal: f64,
}

impl ControlParams {
    pub fn new(gamma: f64, schedule: SteeringSchedule) -> Result<Self> {
        check_unit("gamma", gamma)?;
        Ok(Self {
            gamma,
            schedule,
            lambda_terminal: f64::INFINITY,
        })
    }
}

/// Closed-form LQR control `(target - x) / (1 - t)`.
pub fn lqr_control(x: &[f64], target: &[f64], t: f64, time_eps: f64) -> Result<Vec<f64>> {
    check_dim(x.len(), target.len())?;
    if !(1.0 - t >= time_eps) {
        return Err(PdlsError::TerminalSingularity { t });
    }
    let gain = 1.0 / (1.0 - t);
    Ok(target.iter().zip(x).map(|(&y, &xi)| (y - xi) * gain).collect())
}

/// `base + weight * (guided - base)`.
pub fn blend_drift(base: &[f64], guided: &[f64], weight: f64) -> Result<Vec<f64>> {
    check_dim(base.len(), guided.len())?;
    check_unit("weight", weight)?;
    Ok(base
        .iter()
        .zip(guided)
        .map(|(&b, &g)| b + weight * (g - b))
        .collect())
}
