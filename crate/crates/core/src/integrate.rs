//! Uniform time grids and explicit Euler integration in either direction.

use std::io::{self, Write};

use crate::error::{check_dim, PdlsError, Result};
use crate::flowfield::LatentState;

/// Uniform grid of `n_steps + 1` strictly monotone nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Grid with exactly the requested endpoints.
    pub fn uniform(n_steps: usize, t_start: f64, t_end: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(PdlsError::InvalidParameter {
                name: "n_steps",
                reason: "must be at least 1".into(),
            });
        }
        for t in [t_start, t_end] {
            if !(0.0..=1.0).contains(&t) {
                return Err(PdlsError::TimeOutOfRange { t });
            }
        }
        if t_start == t_end {
            return Err(PdlsError::ZeroLengthInterval);
        }
        let span = t_end - t_start;
        let mut nodes: Vec<f64> = (0..=n_steps)
            .map(|j| t_start + span * (j as f64 / n_steps as f64))
            .collect();
        nodes[n_steps] = t_end;
        Ok(Self { nodes })
    }

    /// Uniform grid whose endpoints are first clamped into `[eps, 1 - eps]`.
    pub fn clamped(n_steps: usize, t_start: f64, t_end: f64, eps: f64) -> Result<Self> {
        let lo = eps;
        let hi = 1.0 - eps;
        let a = t_start.clamp(lo, hi);
        let b = t_end.clamp(lo, hi);
        if a == b {
            return Err(PdlsError::ZeroLengthInterval);
        }
        Self::uniform(n_steps, a, b)
    }

    /// Same nodes in the opposite order; node `k` of the result is node
    /// `n_steps - k` of `self`, bit for bit.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self { nodes }
    }

    pub fn n_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Signed step from node `k` to node `k + 1`.
    pub fn step(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn is_ascending(&self) -> bool {
        self.t_end() > self.t_start()
    }
}

/// Convenience wrapper around [`TimeGrid::clamped`].
pub fn make_grid(n_steps: usize, t_start: f64, t_end: f64, eps: f64) -> Result<TimeGrid> {
    TimeGrid::clamped(n_steps, t_start, t_end, eps)
}

/// States recorded at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<Vec<f64>>) -> Result<Self> {
        if states.len() != grid.nodes.len() {
            return Err(PdlsError::DimensionMismatch {
                expected: grid.nodes.len(),
                actual: states.len(),
            });
        }
        Ok(Self { grid, states })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> Result<&[f64]> {
        self.states
            .get(k)
            .map(Vec::as_slice)
            .ok_or(PdlsError::IndexOutOfRange {
                index: k,
                len: self.states.len(),
            })
    }

    pub fn initial(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn terminal(&self) -> &[f64] {
        &self.states[self.states.len() - 1]
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// One row per node: `t,x_0,...,x_{d-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 0..self.dim() {
            write!(out, ",x_{i}")?;
        }
        writeln!(out)?;
        for (t, x) in self.grid.nodes.iter().zip(&self.states) {
            write!(out, "{t}")?;
            for v in x {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Explicit Euler `x_{k+1} = x_k + dt_k * drift(x_k, t_k, k)` with signed `dt_k`.
pub fn integrate<F>(x0: &[f64], grid: &TimeGrid, mut drift: F) -> Result<Trajectory>
where
    F: FnMut(LatentState<'_>, usize) -> Result<Vec<f64>>,
{
    let mut states = Vec::with_capacity(grid.nodes.len());
    states.push(x0.to_vec());
    for k in 0..grid.n_steps() {
        let x = &states[k];
        let v = drift(LatentState::new(x, grid.t(k)), k)?;
        check_dim(x.len(), v.len())?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(PdlsError::DriftDiverged { step: k });
        }
        let dt = grid.step(k);
        let next: Vec<f64> = x.iter().zip(&v).map(|(&xi, &vi)| xi + dt * vi).collect();
        states.push(next);
    }
    Trajectory::new(grid.clone(), states)
}
