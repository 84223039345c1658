//! Closed-form rectified-flow velocity fields.
//!
//! The flow interpolates linearly between `X0 ~ N(0, I)` at `t = 0` and a
//! Gaussian mixture at `t = 1`:
//!
//! ```text
//! X_t = (1 - t) X0 + t X1,    X_t | k ~ N(t mu_k, ((1 - t)^2 + t^2 var_k) I)
//! ```
//!
//! Every quantity below (component posterior, endpoint posterior mean,
//! marginal velocity) is exact for that interpolation, so no learned network
//! is involved. Mixtures are immutable after construction and all
//! evaluations are pure, so a [`FlowField`] can be shared across threads.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{check_dim, PdlsError, Result};

/// Default distance kept between field evaluations and the singular ends of
/// the time interval.
pub const DEFAULT_TIME_EPS: f64 = 1e-3;

/// Class identifier carried by mixture components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// One isotropic mixture component. `variance == 0` is an exemplar (Dirac).
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
    pub label: Option<Label>,
}

impl Component {
    pub fn new(weight: f64, mean: Vec<f64>, variance: f64, label: Option<Label>) -> Self {
        Self {
            weight,
            mean,
            variance,
            label,
        }
    }

    pub fn is_dirac(&self) -> bool {
        self.variance == 0.0
    }
}

/// Target data distribution at `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
    dim: usize,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| PdlsError::InvalidMixture("no components".into()))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(PdlsError::InvalidMixture("dimension must be at least 1".into()));
        }
        let mut total = 0.0;
        for (k, c) in components.iter().enumerate() {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(PdlsError::InvalidMixture(format!(
                    "component {k} has non-positive weight {}",
                    c.weight
                )));
            }
            if c.mean.len() != dim {
                return Err(PdlsError::InvalidMixture(format!(
                    "component {k} has dimension {}, expected {dim}",
                    c.mean.len()
                )));
            }
            if !(c.variance >= 0.0) || !c.variance.is_finite() {
                return Err(PdlsError::InvalidMixture(format!(
                    "component {k} has invalid variance {}",
                    c.variance
                )));
            }
            if c.mean.iter().any(|v| !v.is_finite()) {
                return Err(PdlsError::InvalidMixture(format!(
                    "component {k} has a non-finite mean"
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(PdlsError::InvalidMixture(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components, dim })
    }

    /// Equal-weight mixture sharing one variance, e.g. an exemplar dataset.
    pub fn uniform(means: Vec<Vec<f64>>, variance: f64, labels: Vec<Label>) -> Result<Self> {
        if means.len() != labels.len() {
            return Err(PdlsError::InvalidMixture(format!(
                "{} means but {} labels",
                means.len(),
                labels.len()
            )));
        }
        let w = 1.0 / means.len().max(1) as f64;
        let components = means
            .into_iter()
            .zip(labels)
            .map(|(mean, label)| Component::new(w, mean, variance, Some(label)))
            .collect();
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Distinct labels in first-appearance order.
    pub fn labels(&self) -> Vec<Label> {
        let mut seen = BTreeSet::new();
        self.components
            .iter()
            .filter_map(|c| c.label.clone())
            .filter(|l| seen.insert(l.clone()))
            .collect()
    }

    /// Indices of the components a condition keeps.
    pub fn select(&self, cond: &Condition) -> Result<Vec<usize>> {
        match cond {
            Condition::Null => Ok((0..self.components.len()).collect()),
            Condition::Labels(set) => {
                if set.is_empty() {
                    return Err(PdlsError::EmptyCondition);
                }
                for label in set {
                    if !self.components.iter().any(|c| c.label.as_ref() == Some(label)) {
                        return Err(PdlsError::UnknownLabel(label.to_string()));
                    }
                }
                let picked: Vec<usize> = self
                    .components
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.label.as_ref().is_some_and(|l| set.contains(l)))
                    .map(|(k, _)| k)
                    .collect();
                if picked.is_empty() {
                    return Err(PdlsError::EmptyCondition);
                }
                Ok(picked)
            }
        }
    }
}

/// Semantic conditioning: all components, or the ones carrying given labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Condition {
    #[default]
    Null,
    Labels(BTreeSet<Label>),
}

impl Condition {
    pub fn labels<I, L>(labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        Condition::Labels(labels.into_iter().map(Into::into).collect())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Condition::Null)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Null => f.write_str("null"),
            Condition::Labels(set) => {
                let names: Vec<&str> = set.iter().map(Label::as_str).collect();
                f.write_str(&names.join("+"))
            }
        }
    }
}

/// A point on a trajectory: position `x` at flow time `t`.
#[derive(Debug, Clone, Copy)]
pub struct LatentState<'a> {
    pub x: &'a [f64],
    pub t: f64,
}

impl<'a> LatentState<'a> {
    pub fn new(x: &'a [f64], t: f64) -> Self {
        Self { x, t }
    }
}

/// Which end of the flow an endpoint-conditional field aims for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// `t = 0`.
    Noise,
    /// `t = 1`.
    Data,
}

/// Component posterior `p(k | X_t = x)` over the components a condition keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub components: Vec<usize>,
    pub probabilities: Vec<f64>,
}

/// `log(sum(exp(v)))` without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

fn sq_dist_scaled(x: &[f64], mean: &[f64], scale: f64) -> f64 {
    x.iter()
        .zip(mean)
        .map(|(&xi, &mi)| {
            let d = xi - scale * mi;
            d * d
        })
        .sum()
}

/// Marginal variance of `X_t` under component `k`.
fn marginal_var(t: f64, variance: f64) -> f64 {
    (1.0 - t) * (1.0 - t) + t * t * variance
}

/// Exact velocity field of the linear-interpolation flow onto a mixture.
#[derive(Debug, Clone, Copy)]
pub struct FlowField<'m> {
    mixture: &'m GaussianMixture,
    time_eps: f64,
}

impl<'m> FlowField<'m> {
    pub fn new(mixture: &'m GaussianMixture) -> Self {
        Self {
            mixture,
            time_eps: DEFAULT_TIME_EPS,
        }
    }

    pub fn with_time_eps(mut self, eps: f64) -> Self {
        self.time_eps = eps;
        self
    }

    pub fn mixture(&self) -> &'m GaussianMixture {
        self.mixture
    }

    pub fn time_eps(&self) -> f64 {
        self.time_eps
    }

    pub fn responsibilities(&self, x: &[f64], t: f64, cond: &Condition) -> Result<Posterior> {
        check_dim(self.mixture.dim, x.len())?;
        if !(0.0..=1.0).contains(&t) {
            return Err(PdlsError::TimeOutOfRange { t });
        }
        let selected = self.mixture.select(cond)?;
        let comps = &self.mixture.components;
        if selected.len() == 1 {
            return Ok(Posterior {
                components: selected,
                probabilities: vec![1.0],
            });
        }
        if t >= 1.0 && selected.iter().any(|&k| comps[k].is_dirac()) {
            return terminal_posterior(comps, selected, x);
        }

        let half_d = 0.5 * self.mixture.dim as f64;
        let log_p: Vec<f64> = selected
            .iter()
            .map(|&k| {
                let c = &comps[k];
                let s = marginal_var(t, c.variance);
                c.weight.ln() - half_d * s.ln() - 0.5 * sq_dist_scaled(x, &c.mean, t) / s
            })
            .collect();
        let norm = log_sum_exp(&log_p);
        let probabilities = log_p.iter().map(|&lp| (lp - norm).exp()).collect();
        Ok(Posterior {
            components: selected,
            probabilities,
        })
    }

    /// `E[X1 | X_t = x]` under the conditioned mixture.
    pub fn posterior_endpoint_mean(&self, x: &[f64], t: f64, cond: &Condition) -> Result<Vec<f64>> {
        let post = self.responsibilities(x, t, cond)?;
        let mut out = vec![0.0; x.len()];
        for (&k, &r) in post.components.iter().zip(&post.probabilities) {
            if r == 0.0 {
                continue;
            }
            let c = &self.mixture.components[k];
            // E[X1 | x, k] = mu + t var / s (x - t mu)
            let gain = if c.is_dirac() {
                0.0
            } else {
                t * c.variance / marginal_var(t, c.variance)
            };
            for ((o, &xi), &mi) in out.iter_mut().zip(x).zip(&c.mean) {
                *o += r * (mi + gain * (xi - t * mi));
            }
        }
        Ok(out)
    }

    /// Marginal velocity `(E[X1 | x] - x) / (1 - t)`; defined on `[0, 1 - eps]`.
    pub fn marginal_velocity(&self, x: &[f64], t: f64, cond: &Condition) -> Result<Vec<f64>> {
        if t < 0.0 || t.is_nan() {
            return Err(PdlsError::TimeOutOfRange { t });
        }
        if t > 1.0 - self.time_eps {
            return Err(PdlsError::TerminalSingularity { t });
        }
        let mean = self.posterior_endpoint_mean(x, t, cond)?;
        let inv = 1.0 / (1.0 - t);
        Ok(mean.iter().zip(x).map(|(&m, &xi)| (m - xi) * inv).collect())
    }

    /// Marginal velocity with `t` clamped into `[0, 1 - eps]`.
    pub fn clamped_velocity(&self, x: &[f64], t: f64, cond: &Condition) -> Result<Vec<f64>> {
        self.marginal_velocity(x, clamp_data_time(t, self.time_eps), cond)
    }
}

fn terminal_posterior(comps: &[Component], selected: Vec<usize>, x: &[f64]) -> Result<Posterior> {
    let hits: Vec<bool> = selected
        .iter()
        .map(|&k| comps[k].is_dirac() && comps[k].mean.as_slice() == x)
        .collect();
    if !hits.iter().any(|&h| h) {
        return Err(PdlsError::DegeneratePosterior);
    }
    let total: f64 = selected
        .iter()
        .zip(&hits)
        .filter(|(_, &h)| h)
        .map(|(&k, _)| comps[k].weight)
        .sum();
    let probabilities = selected
        .iter()
        .zip(&hits)
        .map(|(&k, &h)| if h { comps[k].weight / total } else { 0.0 })
        .collect();
    Ok(Posterior {
        components: selected,
        probabilities,
    })
}

/// Forward-time velocity of the straight line through `(x, t)` and the
/// target pinned at one end of the flow.
pub fn endpoint_conditional_velocity(
    state: LatentState<'_>,
    target: &[f64],
    end: Endpoint,
    time_eps: f64,
) -> Result<Vec<f64>> {
    check_dim(state.x.len(), target.len())?;
    let t = state.t;
    match end {
        Endpoint::Data => {
            if !(1.0 - t >= time_eps) {
                return Err(PdlsError::ConditionalSingular { t });
            }
            let inv = 1.0 / (1.0 - t);
            Ok(target.iter().zip(state.x).map(|(&z, &x)| (z - x) * inv).collect())
        }
        Endpoint::Noise => {
            if !(t >= time_eps) {
                return Err(PdlsError::ConditionalSingular { t });
            }
            let inv = 1.0 / t;
            Ok(state.x.iter().zip(target).map(|(&x, &z)| (x - z) * inv).collect())
        }
    }
}

pub fn clamp_data_time(t: f64, eps: f64) -> f64 {
    t.clamp(0.0, 1.0 - eps)
}

pub fn clamp_noise_time(t: f64, eps: f64) -> f64 {
    t.clamp(eps, 1.0)
}
