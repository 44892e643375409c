//! Exact mean hop counts under the contact-selection law.
//!
//! For a source of target degree `q` the contact set `C` is drawn from the
//! users of lower degree with `P(C) ∝ Π q_k^-ε`, and the destination is
//! picked from `C` either uniformly or with probability `∝ d^-β`. Both
//! expectations are evaluated without sampling, on the realized layout.

use rayon::prelude::*;

use super::{esp_all, esp_excluding_each, inclusion_probabilities, WeightVector};
use crate::graph::SelectionLaw;
use crate::grid::{Cell, GridConfig, SpatialLayout};
use crate::{Error, Result};

/// Step of the trapezoid rule in `s = ln t`.
const QUAD_STEP: f64 = 0.25;
/// `e^-36` bounds the truncated left tail relative to the integral.
const QUAD_LEFT_MARGIN: f64 = 36.0;
/// `e^-40` bounds the truncated right tail.
const QUAD_RIGHT_RATE: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticHops {
    /// Mean over sources whose pool is non-empty.
    pub mean: f64,
    pub sources: usize,
    /// Sources without lower-degree users (all degree-1 users, at least).
    pub empty_pool_sources: usize,
}

struct Instance<'a> {
    law: &'a SelectionLaw,
    layout: &'a SpatialLayout,
    cells: Vec<Cell>,
}

impl<'a> Instance<'a> {
    fn new(law: &'a SelectionLaw, layout: &'a SpatialLayout, grid: &GridConfig) -> Result<Self> {
        let n = law.degrees().len();
        if layout.len() != n {
            return Err(Error::param(
                "layout",
                format!("{} positions for {n} users", layout.len()),
            ));
        }
        Ok(Self {
            law,
            layout,
            cells: layout.cells(grid),
        })
    }

    fn hops(&self, a: u32, b: u32) -> f64 {
        f64::from(self.cells[a as usize].l1(&self.cells[b as usize]))
    }

    /// Distinct source degrees with a non-empty pool, with their sources.
    fn source_classes(&self) -> Vec<(u32, &'a [u32])> {
        self.law
            .classes()
            .iter()
            .filter(|(q, _)| self.law.pool_size(*q) > 0)
            .map(|(q, members)| (*q, members.as_slice()))
            .collect()
    }

    fn pool_weights(&self, pool: &[u32]) -> Result<WeightVector> {
        let d = self.law.degrees();
        WeightVector::from_logs(pool.iter().map(|&v| self.law.log_weight(d.get(v as usize))).collect())
    }

    fn finish(&self, per_source: Vec<f64>) -> AnalyticHops {
        let n = self.law.degrees().len();
        let sources = per_source.len();
        AnalyticHops {
            mean: if sources == 0 {
                0.0
            } else {
                per_source.iter().sum::<f64>() / sources as f64
            },
            sources,
            empty_pool_sources: n - sources,
        }
    }
}

/// `E[X]` when the destination is uniform over the contact set:
/// `Σ_k x_k P(v_k ∈ C) / |C|`, averaged over sources.
pub fn analytic_hops_uniform(
    law: &SelectionLaw,
    layout: &SpatialLayout,
    grid: &GridConfig,
) -> Result<AnalyticHops> {
    let inst = Instance::new(law, layout, grid)?;
    let per_class: Vec<Vec<f64>> = inst
        .source_classes()
        .par_iter()
        .map(|&(q, sources)| -> Result<Vec<f64>> {
            let pool = law.pool(q);
            let m = law.set_size(q);
            let pi = inclusion_probabilities(&inst.pool_weights(&pool)?, m)?;
            Ok(sources
                .iter()
                .map(|&s| {
                    pool.iter()
                        .zip(&pi)
                        .map(|(&v, p)| inst.hops(s, v) * p)
                        .sum::<f64>()
                        / m as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(inst.finish(per_class.into_iter().flatten().collect()))
}

/// `E[X]` when the destination is drawn from the contact set with
/// probability `∝ max(d, d_min)^-β`, `d_min` a tenth of the cell side.
///
/// Uses `1/S = ∫_0^∞ e^{-tS} dt` to write the expectation over sets as
/// `Σ_k x_k u_k q_k ∫ e^{-t u_k} σ^{k̄}_{m-1}(q ⊙ e^{-tu}) dt / σ_m(q)`,
/// integrated by the trapezoid rule in `ln t`. `β = 0` reduces exactly to
/// [`analytic_hops_uniform`].
pub fn analytic_hops_powerlaw(
    law: &SelectionLaw,
    layout: &SpatialLayout,
    grid: &GridConfig,
    beta: f64,
) -> Result<AnalyticHops> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be finite and ≥ 0, got {beta}")));
    }
    if beta == 0.0 {
        return analytic_hops_uniform(law, layout, grid);
    }
    let inst = Instance::new(law, layout, grid)?;
    let d_min = grid.cell_side() / 10.0;
    let per_class: Vec<Vec<f64>> = inst
        .source_classes()
        .par_iter()
        .map(|&(q, sources)| -> Result<Vec<f64>> {
            let pool = law.pool(q);
            let m = law.set_size(q);
            let weights = inst.pool_weights(&pool)?;
            let log_total = esp_all(&weights, m)?.log(m);
            sources
                .iter()
                .map(|&s| {
                    let src = inst.layout.position(s);
                    let hops: Vec<f64> = pool.iter().map(|&v| inst.hops(s, v)).collect();
                    let log_u: Vec<f64> = pool
                        .iter()
                        .map(|&v| -beta * src.distance(&inst.layout.position(v)).max(d_min).ln())
                        .collect();
                    powerlaw_expectation(&weights, log_total, &hops, &log_u, m)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(inst.finish(per_class.into_iter().flatten().collect()))
}

/// `E[Σ_{k∈C} x_k u_k / Σ_{j∈C} u_j]` for `|C| = m`, `P(C) ∝ Π_{j∈C} q_j`.
pub(crate) fn powerlaw_expectation(
    weights: &WeightVector,
    log_total: f64,
    hops: &[f64],
    log_u: &[f64],
    m: usize,
) -> Result<f64> {
    let lw = weights.logs();
    if m == 1 {
        // The destination is the single contact.
        return Ok(lw
            .iter()
            .zip(hops)
            .map(|(l, x)| x * (l - log_total).exp())
            .sum());
    }
    // Rescale so that max u = 1; the ratio is scale free.
    let top = log_u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let u: Vec<f64> = log_u.iter().map(|l| (l - top).exp()).collect();
    let u_min = u
        .iter()
        .zip(lw)
        .filter(|(_, l)| **l != f64::NEG_INFINITY)
        .map(|(u, _)| *u)
        .fold(1.0, f64::min);
    let (a_lo, a_hi) = (m as f64 * u_min, m as f64);
    let s_lo = -a_hi.ln() - QUAD_LEFT_MARGIN;
    let s_hi = (QUAD_RIGHT_RATE / a_lo).ln();
    let steps = ((s_hi - s_lo) / QUAD_STEP).ceil() as usize;

    let mut shifted = vec![0.0; lw.len()];
    let mut total = 0.0;
    for i in 0..=steps {
        let t = (s_lo + i as f64 * QUAD_STEP).exp();
        for (j, l) in shifted.iter_mut().enumerate() {
            *l = lw[j] - t * u[j];
        }
        let excl = esp_excluding_each(&WeightVector::from_logs(shifted.clone())?, m - 1)?;
        let mut acc = 0.0;
        for k in 0..lw.len() {
            if hops[k] == 0.0 || lw[k] == f64::NEG_INFINITY {
                continue;
            }
            acc += hops[k] * (lw[k] + u[k].ln() - t * u[k] + excl[k] - log_total).exp();
        }
        total += acc * t;
    }
    Ok(total * QUAD_STEP)
}
