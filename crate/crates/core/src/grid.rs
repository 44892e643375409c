//! Spatial placement, the transmission-range grid and TDMA reuse slots.
//!
//! Users are uniform in the unit square. The square is cut into cells of
//! side `c1·r(n)` with `r(n) = c_r·√(ln n / n)`; a route between two users
//! costs the L1 distance between their cells, so the set of cells at `x`
//! hops from an interior cell is a ring of `4x` cells.

use std::io::Write;

use rand::Rng;

use crate::rng::{rng_for, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialLayout {
    positions: Vec<Point>,
}

impl SpatialLayout {
    pub fn new(positions: Vec<Point>) -> Result<Self> {
        if let Some(p) = positions
            .iter()
            .find(|p| !((0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y)))
        {
            return Err(Error::param("positions", format!("({}, {}) outside [0,1)^2", p.x, p.y)));
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: u32) -> Point {
        self.positions[v as usize]
    }

    /// Cell of every user.
    pub fn cells(&self, grid: &GridConfig) -> Vec<Cell> {
        self.positions.iter().map(|p| grid.cell_of(p)).collect()
    }

    /// Number of users per cell, row-major by `(i, j)`.
    pub fn occupancy(&self, grid: &GridConfig) -> Vec<u32> {
        let side = grid.cells_per_side as usize;
        let mut counts = vec![0u32; side * side];
        for c in self.cells(grid) {
            counts[c.i as usize * side + c.j as usize] += 1;
        }
        counts
    }

    /// Writes `node_id,x,y` rows under a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "node_id,x,y")?;
        for (i, p) in self.positions.iter().enumerate() {
            writeln!(w, "{i},{},{}", p.x, p.y)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` i.i.d. uniform points in `[0,1)^2`.
pub fn place_nodes(n: usize, seed: u64) -> Result<SpatialLayout> {
    if n == 0 {
        return Err(Error::param("n", "need at least one user"));
    }
    let mut rng = rng_for(seed, stream::LAYOUT);
    let positions = (0..n)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    SpatialLayout::new(positions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub i: u32,
    pub j: u32,
}

impl Cell {
    pub fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    pub fn l1(&self, other: &Cell) -> u32 {
        self.i.abs_diff(other.i) + self.j.abs_diff(other.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub c_r: f64,
    pub c1: f64,
    pub delta: f64,
    pub t_spacing: u32,
    pub cells_per_side: u32,
}

/// Smallest admissible reuse spacing, `⌈(2+Δ)/c1⌉`.
fn min_spacing(c1: f64, delta: f64) -> u32 {
    ((2.0 + delta) / c1).ceil().max(1.0) as u32
}

/// Grid for `n` users with `r(n) = c_r·√(ln n / n)` and cell side `c1·r(n)`.
pub fn grid_config(n: usize, c_r: f64, c1: f64, delta: f64) -> Result<GridConfig> {
    if n < 2 {
        return Err(Error::param("n", format!("r(n) needs n ≥ 2, got {n}")));
    }
    if !(c_r > 0.0 && c_r.is_finite()) {
        return Err(Error::param("c_r", format!("must be positive, got {c_r}")));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::param("c1", format!("must be positive, got {c1}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be non-negative, got {delta}")));
    }
    let r = transmission_range(n, c_r);
    let cells = (1.0 / (c1 * r)).ceil().max(1.0);
    if cells > f64::from(u32::MAX) {
        return Err(Error::param("c1", "grid too fine"));
    }
    Ok(GridConfig {
        n,
        c_r,
        c1,
        delta,
        t_spacing: min_spacing(c1, delta),
        cells_per_side: cells as u32,
    })
}

/// `c_r·√(ln n / n)`.
pub fn transmission_range(n: usize, c_r: f64) -> f64 {
    let n = n as f64;
    c_r * (n.ln() / n).sqrt()
}

impl GridConfig {
    pub fn r_n(&self) -> f64 {
        transmission_range(self.n, self.c_r)
    }

    pub fn cell_side(&self) -> f64 {
        self.c1 * self.r_n()
    }

    /// Uses a reuse spacing larger than the minimum.
    pub fn with_spacing(mut self, t: u32) -> Result<Self> {
        let min = min_spacing(self.c1, self.delta);
        if t < min {
            return Err(Error::param("t_spacing", format!("{t} is below ⌈(2+Δ)/c1⌉ = {min}")));
        }
        self.t_spacing = t;
        Ok(self)
    }

    pub fn cell_count(&self) -> usize {
        let s = self.cells_per_side as usize;
        s * s
    }

    pub fn cell_of(&self, p: &Point) -> Cell {
        let side = self.cell_side();
        let max = self.cells_per_side - 1;
        let idx = |v: f64| ((v / side).floor().max(0.0) as u32).min(max);
        Cell::new(idx(p.x), idx(p.y))
    }

    pub fn contains(&self, c: &Cell) -> bool {
        c.i < self.cells_per_side && c.j < self.cells_per_side
    }

    /// Whether the L1 ring of radius `x` around `c` lies inside the grid.
    pub fn is_interior(&self, c: &Cell, x: u32) -> bool {
        c.i >= x && c.j >= x && c.i + x < self.cells_per_side && c.j + x < self.cells_per_side
    }
}

/// L1 distance between the cells holding `src` and `dst`.
pub fn hop_count(grid: &GridConfig, src: &Point, dst: &Point) -> u32 {
    grid.cell_of(src).l1(&grid.cell_of(dst))
}

/// In-bounds cells at L1 distance exactly `x ≥ 1` from `center`.
pub fn ring_cells(grid: &GridConfig, center: Cell, x: u32) -> Result<Vec<Cell>> {
    if x == 0 {
        return Err(Error::param("x", "ring radius starts at 1"));
    }
    let (ci, cj, x) = (i64::from(center.i), i64::from(center.j), i64::from(x));
    let side = i64::from(grid.cells_per_side);
    let mut out = Vec::with_capacity(4 * x as usize);
    let mut push = |i: i64, j: i64| {
        if (0..side).contains(&i) && (0..side).contains(&j) {
            out.push(Cell::new(i as u32, j as u32));
        }
    };
    for a in 0..x {
        let b = x - a;
        push(ci + a, cj + b);
        push(ci + b, cj - a);
        push(ci - a, cj - b);
        push(ci - b, cj + a);
    }
    out.sort_unstable();
    Ok(out)
}

/// TDMA schedule: `T²` slots, slot `(a, b)` holding the cells with
/// `i ≡ a` and `j ≡ b (mod T)`. Slots are listed with `a` major.
pub fn concurrent_cells(grid: &GridConfig) -> Vec<Vec<Cell>> {
    let t = grid.t_spacing;
    let mut slots = vec![Vec::new(); (t * t) as usize];
    for i in 0..grid.cells_per_side {
        for j in 0..grid.cells_per_side {
            slots[((i % t) * t + j % t) as usize].push(Cell::new(i, j));
        }
    }
    slots.retain(|s| !s.is_empty());
    slots
}
