//! Parameter grids and the rows behind the three figures. Rows are computed
//! in parallel and returned in grid order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::SchmidtDiagonal;
use crate::gaussifier::{run_protocol, Iterate, ProtocolOptions};
use crate::procrustean::distill_pipeline;

/// Steps shown in the probability and fidelity figures.
pub const FIGURE_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// `λ` of the seed `|0,0⟩ + λ|1,1⟩`.
    Lambda,
    /// TMSV squeezing `q`.
    Q,
    /// A-side transmittance `|T|`.
    T,
}

impl SweepParameter {
    fn admits(self, v: f64) -> bool {
        match self {
            SweepParameter::Lambda => (0.0..1.0).contains(&v),
            SweepParameter::Q => v > 0.0 && v < 1.0,
            SweepParameter::T => (0.0..=1.0).contains(&v),
        }
    }
}

/// Evenly spaced grid of at least two points, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter("a sweep needs at least two points".into()));
        }
        if start.is_nan() || start >= stop || !stop.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sweep range [{start}, {stop}] needs finite start < stop"
            )));
        }
        for v in [start, stop] {
            if !parameter.admits(v) {
                return Err(Error::InvalidParameter(format!(
                    "{parameter:?} value {v} is out of range"
                )));
            }
        }
        Ok(Self {
            parameter,
            start,
            stop,
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + k as f64 * h })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityRow {
    pub lambda: f64,
    /// Cumulative success probability after 1, 2 and 3 steps.
    pub p: [f64; FIGURE_STEPS],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityRow {
    pub lambda: f64,
    /// Fidelity to the Gaussian limit after 1, 2 and 3 steps; NaN when the
    /// limit does not exist.
    pub f: [f64; FIGURE_STEPS],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineRow {
    pub t: f64,
    pub entanglement_ratio: f64,
    pub overall_probability: f64,
    pub purity: f64,
}

fn seed_run(lambda: f64, opts: &ProtocolOptions) -> Result<Vec<crate::gaussifier::IterationReport>> {
    let seed = Iterate::Schmidt(SchmidtDiagonal::seed(lambda)?);
    Ok(run_protocol(seed, FIGURE_STEPS, opts)?.reports)
}

pub fn figure2_rows(lambdas: &[f64], opts: &ProtocolOptions) -> Result<Vec<ProbabilityRow>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let reports = seed_run(lambda, opts)?;
            let mut p = [0.0; FIGURE_STEPS];
            for (slot, r) in p.iter_mut().zip(&reports) {
                *slot = r.cumulative_probability;
            }
            Ok(ProbabilityRow { lambda, p })
        })
        .collect()
}

pub fn figure3_rows(lambdas: &[f64], opts: &ProtocolOptions) -> Result<Vec<FidelityRow>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let reports = seed_run(lambda, opts)?;
            let mut f = [f64::NAN; FIGURE_STEPS];
            for (slot, r) in f.iter_mut().zip(&reports) {
                *slot = r.fidelity.unwrap_or(f64::NAN);
            }
            Ok(FidelityRow { lambda, f })
        })
        .collect()
}

pub fn figure4_rows(q: f64, ts: &[f64], iterations: usize, cutoff: usize) -> Result<Vec<PipelineRow>> {
    ts.par_iter()
        .map(|&t| {
            let r = distill_pipeline(q, t, iterations, cutoff)?;
            Ok(PipelineRow {
                t,
                entanglement_ratio: r.entanglement_ratio,
                overall_probability: r.overall_probability,
                purity: r.purity,
            })
        })
        .collect()
}
