//! Finite-difference Wirtinger derivatives and the block-structure checks.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use super::CnFunction;
use crate::error::{Error, Result};
use crate::region::{PointZ, Region};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 64;

/// Central-difference estimates of `df_i/dz_k` and `df_i/dzbar_k`, stored
/// row-major by component then coordinate.
#[derive(Clone, Debug)]
pub struct Wirtinger {
    pub values: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub dzbar: Vec<Complex64>,
    pub dim: usize,
}

impl Wirtinger {
    pub fn dz(&self, i: usize, k: usize) -> Complex64 {
        self.dz[i * self.dim + k]
    }

    pub fn dzbar(&self, i: usize, k: usize) -> Complex64 {
        self.dzbar[i * self.dim + k]
    }
}

/// Estimates all Wirtinger derivatives of `f` at `z` with step `step` along
/// the real and imaginary direction of every coordinate.
pub fn wirtinger_at(f: &CnFunction, z: &[Complex64], step: f64) -> Result<Wirtinger> {
    let n = f.n_blocks();
    let dim = z.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    f.eval_into(z, &mut values)?;
    let mut dz = vec![Complex64::new(0.0, 0.0); n * dim];
    let mut dzbar = dz.clone();
    let mut p = z.to_vec();
    let mut plus = vec![Complex64::new(0.0, 0.0); n];
    let mut minus = plus.clone();
    let mut fx = plus.clone();
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 0..dim {
        for (dir, slot) in [(Complex64::new(step, 0.0), 0), (Complex64::new(0.0, step), 1)] {
            p[k] = z[k] + dir;
            f.eval_into(&p, &mut plus)?;
            p[k] = z[k] - dir;
            f.eval_into(&p, &mut minus)?;
            p[k] = z[k];
            for i in 0..n {
                let d = (plus[i] - minus[i]) / (2.0 * step);
                if slot == 0 {
                    fx[i] = d;
                } else {
                    dz[i * dim + k] = 0.5 * (fx[i] - i_unit * d);
                    dzbar[i * dim + k] = 0.5 * (fx[i] + i_unit * d);
                }
            }
        }
    }
    Ok(Wirtinger { values, dz, dzbar, dim })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// Cauchy-Riemann residual only.
    Holomorphy,
    /// `df_i/dz_k = 0` whenever coordinate `k` is outside block `i`.
    CrossBlock,
    /// `df_i/dz_k = 0` whenever coordinate `k` lies in a block after `i`.
    Triangular,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Holomorphy => "holomorphy",
            CheckKind::CrossBlock => "cross-block",
            CheckKind::Triangular => "triangular",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckParams {
    pub samples: usize,
    /// Defaults to `max(1e-4, h/10)`.
    pub step: Option<f64>,
    /// Relative to `max(1, |f_i|)` at each sample.
    pub tol: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, step: None, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug)]
pub struct DerivativeReport {
    pub kind: CheckKind,
    pub max_cross: f64,
    pub max_anti: f64,
    /// Largest violation divided by the local magnitude `max(1, |f_i|)`.
    pub max_scaled: f64,
    pub worst_point: Option<PointZ>,
    pub samples_used: usize,
    /// Samples too close to the boundary for the step, or whose stencil
    /// could not be evaluated.
    pub skipped: usize,
    pub step: f64,
    pub tol: f64,
    pub pass: bool,
}

struct SampleResult {
    cross: f64,
    anti: f64,
    scaled: f64,
}

fn sample_result(f: &CnFunction, z: &[Complex64], step: f64, kind: CheckKind) -> Option<SampleResult> {
    let w = wirtinger_at(f, z, step).ok()?;
    let shape = &f.shape;
    let (mut cross, mut anti, mut scaled) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..f.n_blocks() {
        let scale = w.values[i].norm().max(1.0);
        for k in 0..w.dim {
            let a = w.dzbar(i, k).norm();
            anti = anti.max(a);
            scaled = scaled.max(a / scale);
            let b = shape.block_of(k);
            let counted = match kind {
                CheckKind::Holomorphy => false,
                CheckKind::CrossBlock => b != i,
                CheckKind::Triangular => i < b,
            };
            if counted {
                let c = w.dz(i, k).norm();
                cross = cross.max(c);
                scaled = scaled.max(c / scale);
            }
        }
    }
    Some(SampleResult { cross, anti, scaled })
}

/// Runs one of the checks over the first `params.samples` points of the
/// region's dense sequence.
pub fn run_check(kind: CheckKind, f: &CnFunction, region: &Region, params: &CheckParams) -> Result<DerivativeReport> {
    if f.shape != *region.shape() {
        return Err(Error::InvalidShape(format!("function on {} evaluated on region {}", f.shape, region.shape())));
    }
    let step = params.step.unwrap_or((region.h() / 10.0).max(1e-4));
    let seq = region.dense_sequence()?;
    let count = params.samples.min(seq.len());
    let results: Vec<Option<SampleResult>> = (0..count)
        .into_par_iter()
        .map(|m| {
            let p = seq.point(m);
            let d = region.dist_to_complement(&p).ok()?;
            if d <= 2.0 * step {
                return None;
            }
            sample_result(f, p.coords(), step, kind)
        })
        .collect();
    let mut report = DerivativeReport {
        kind,
        max_cross: 0.0,
        max_anti: 0.0,
        max_scaled: 0.0,
        worst_point: None,
        samples_used: 0,
        skipped: 0,
        step,
        tol: params.tol,
        pass: true,
    };
    let mut worst = None;
    for (m, r) in results.iter().enumerate() {
        match r {
            None => report.skipped += 1,
            Some(r) => {
                report.samples_used += 1;
                report.max_cross = report.max_cross.max(r.cross);
                report.max_anti = report.max_anti.max(r.anti);
                if worst.is_none() || r.scaled > report.max_scaled {
                    report.max_scaled = r.scaled;
                    worst = Some(m);
                }
            }
        }
    }
    if report.samples_used == 0 {
        return Err(Error::EmptySample);
    }
    report.worst_point = worst.map(|m| seq.point(m));
    report.pass = report.max_scaled <= params.tol;
    Ok(report)
}

/// `C^n`-holomorphy: holomorphic and every cross-block derivative vanishes.
pub fn cross_block_derivative_check(f: &CnFunction, region: &Region, params: &CheckParams) -> Result<DerivativeReport> {
    run_check(CheckKind::CrossBlock, f, region, params)
}

pub fn holomorphy_check(f: &CnFunction, region: &Region, params: &CheckParams) -> Result<DerivativeReport> {
    run_check(CheckKind::Holomorphy, f, region, params)
}

pub fn triangular_check(f: &CnFunction, region: &Region, params: &CheckParams) -> Result<DerivativeReport> {
    run_check(CheckKind::Triangular, f, region, params)
}
