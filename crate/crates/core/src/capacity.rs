//! Capacity from hop counts, closed-form scaling predictions and the
//! regression helpers used to compare them with measurements.
//!
//! All order-of-magnitude laws are represented with constant 1; only their
//! growth in `n` is meaningful.

use serde::Serialize;

use crate::{Error, Result};

/// Tolerance used to recognise the `ε = 3` boundary.
const EPSILON_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Capacity {
    Finite(f64),
    /// Every destination lies in the source's own cell.
    Unbounded,
}

impl Capacity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Capacity::Finite(v) => Some(*v),
            Capacity::Unbounded => None,
        }
    }
}

/// `λ = 1/(ln n · E[X])`.
pub fn capacity_from_hops(mean_hops: f64, n: usize) -> Result<Capacity> {
    if n < 2 {
        return Err(Error::param("n", format!("need n ≥ 2, got {n}")));
    }
    if !(mean_hops >= 0.0 && mean_hops.is_finite()) {
        return Err(Error::param("mean_hops", format!("must be finite and ≥ 0, got {mean_hops}")));
    }
    if mean_hops == 0.0 {
        return Ok(Capacity::Unbounded);
    }
    Ok(Capacity::Finite(1.0 / ((n as f64).ln() * mean_hops)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DirectRegime {
    Uniform,
    PowerLaw { beta: f64 },
}

/// `λ ~ coefficient · n^n_exponent · (ln n)^log_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityOrder {
    pub n_exponent: f64,
    pub log_exponent: f64,
    pub coefficient: f64,
}

impl CapacityOrder {
    pub fn eval(&self, n: usize) -> f64 {
        let n = n as f64;
        self.coefficient * n.powf(self.n_exponent) * n.ln().powf(self.log_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPrediction {
    pub regime: DirectRegime,
    /// Predicted `d ln E[X] / d ln n`.
    pub hop_exponent: f64,
    pub capacity: CapacityOrder,
}

/// Scaling of direct communication. `beta = None` is the uniform rule.
///
/// | rule            | E[X] exponent | λ                           |
/// |-----------------|---------------|-----------------------------|
/// | uniform, β ≤ 2  | 1/2           | 1/√(n ln n)                 |
/// | 2 < β < 3       | (3−β)/2       | 1/√(n^{3−β} (β−1) ln n)     |
/// | β ≥ 3           | 0             | 1/ln n                      |
pub fn theoretical_direct(n: usize, beta: Option<f64>) -> Result<TheoryPrediction> {
    if n < 2 {
        return Err(Error::param("n", format!("need n ≥ 2, got {n}")));
    }
    let regime = match beta {
        None => DirectRegime::Uniform,
        Some(b) if b >= 0.0 && b.is_finite() => DirectRegime::PowerLaw { beta: b },
        Some(b) => return Err(Error::param("beta", format!("must be finite and ≥ 0, got {b}"))),
    };
    let (hop_exponent, capacity) = match beta {
        None => (0.5, order(-0.5, -0.5, 1.0)),
        Some(b) if b <= 2.0 => (0.5, order(-0.5, -0.5, 1.0)),
        Some(b) if b < 3.0 => ((3.0 - b) / 2.0, order(-(3.0 - b) / 2.0, -0.5, (b - 1.0).powf(-0.5))),
        Some(_) => (0.0, order(0.0, -1.0, 1.0)),
    };
    Ok(TheoryPrediction {
        regime,
        hop_exponent,
        capacity,
    })
}

fn order(n_exponent: f64, log_exponent: f64, coefficient: f64) -> CapacityOrder {
    CapacityOrder {
        n_exponent,
        log_exponent,
        coefficient,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReductionRegime {
    /// `2 < ε < 3`: hierarchy costs a factor `ln n`.
    LogN,
    /// `ε = 3`: hierarchy costs a factor `n`.
    LinearN,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyPrediction {
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// `K̄^(L)` for `L = 1..=l_max`.
    pub k_bar: Vec<f64>,
    /// Share of contact pairs at each level, summing to 1.
    pub r_weights: Vec<f64>,
    pub l_max: usize,
    pub regime: ReductionRegime,
}

/// `K̄^(L) = α^{L−1} (γ−1)/(γ−2)` with `α = 1/(ε−2)`.
pub fn level_degree(gamma: f64, epsilon: f64, l: usize) -> f64 {
    let alpha = 1.0 / (epsilon - 2.0);
    alpha.powi(l as i32 - 1) * (gamma - 1.0) / (gamma - 2.0)
}

/// Level structure and traffic mix of hierarchical communication.
///
/// `l_max` is where the level sizes exhaust the `n − 1` other users: rounded
/// up for `ε < 3`, to the nearest integer for `ε = 3`.
pub fn theoretical_hierarchy(gamma: f64, epsilon: f64, n: usize) -> Result<HierarchyPrediction> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must exceed 2, got {gamma}")));
    }
    if !(epsilon > 2.0 && epsilon <= 3.0) {
        return Err(Error::param(
            "epsilon",
            format!("hierarchy is defined for 2 < ε ≤ 3, got {epsilon}; see `extensibility`"),
        ));
    }
    if n < 3 {
        return Err(Error::param("n", format!("need n ≥ 3, got {n}")));
    }
    let alpha = 1.0 / (epsilon - 2.0);
    let mean = (gamma - 1.0) / (gamma - 2.0);
    let others = (n - 1) as f64;
    let (l_max, regime) = if (epsilon - 3.0).abs() < EPSILON_BOUNDARY_TOL {
        (((gamma - 2.0) * others / (gamma - 1.0)).round(), ReductionRegime::LinearN)
    } else {
        let x = (gamma - 2.0) * (alpha - 1.0) * others / (gamma - 1.0) + 1.0;
        ((x.ln() / alpha.ln()).ceil(), ReductionRegime::LogN)
    };
    let l_max = l_max.max(1.0) as usize;
    let k_bar: Vec<f64> = (0..l_max).map(|l| mean * alpha.powi(l as i32)).collect();
    let raw: Vec<f64> = k_bar.iter().map(|k| k / others).collect();
    let total: f64 = raw.iter().sum();
    Ok(HierarchyPrediction {
        gamma,
        epsilon,
        alpha,
        r_weights: raw.iter().map(|r| r / total).collect(),
        k_bar,
        l_max,
        regime,
    })
}

/// `λ^(H)`: the direct capacity divided by `ln n` or by `n`.
pub fn hierarchical_capacity(direct_capacity: f64, pred: &HierarchyPrediction, n: usize) -> f64 {
    match pred.regime {
        ReductionRegime::LogN => direct_capacity / (n as f64).ln(),
        ReductionRegime::LinearN => direct_capacity / n as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branching {
    /// `ε < 3`: level sizes grow geometrically.
    Expanding,
    /// `ε = 3`.
    Invariant,
    /// `ε > 3`: level sizes shrink and the network stops branching.
    Shrinking,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extensibility {
    pub alpha: f64,
    pub k_bar: Vec<f64>,
    pub branching: Branching,
}

/// Level sizes for any `ε > 2`, including the non-extensible `ε > 3` range
/// where no hierarchical capacity is defined.
pub fn extensibility(gamma: f64, epsilon: f64, levels: usize) -> Result<Extensibility> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must exceed 2, got {gamma}")));
    }
    if !(epsilon > 2.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must exceed 2, got {epsilon}")));
    }
    let branching = if (epsilon - 3.0).abs() < EPSILON_BOUNDARY_TOL {
        Branching::Invariant
    } else if epsilon < 3.0 {
        Branching::Expanding
    } else {
        Branching::Shrinking
    };
    Ok(Extensibility {
        alpha: 1.0 / (epsilon - 2.0),
        k_bar: (1..=levels).map(|l| level_degree(gamma, epsilon, l)).collect(),
        branching,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `y` on `x`. A constant `y` has `R² = 1`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::param("ys", format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::param("xs", format!("need at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::param("xs", "values must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("xs", "x values have zero variance"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Least squares on `(ln x, ln y)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if let Some(bad) = xs.iter().chain(ys).find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::param("xs", format!("log-log fit needs positive values, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_linear(&lx, &ly)
}
