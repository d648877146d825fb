//! Environment contract and the four navigation environments.
//!
//! All environments are point-mass worlds: a continuous position moves by
//! `step_scale * action` per step with axis-separated sliding collision
//! against axis-aligned wall rectangles. The 2-D mazes are grid-
//! discretizable at `step_scale`, which gives an exact BFS hop-count
//! oracle; the 3-D reach world is wall-free and exposes the analytic
//! Euclidean distance instead.

mod grid;
mod maps;

pub use grid::Cell;

use crate::error::{Error, Result};
use crate::numerics::euclid;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

/// Static environment contract: dimensions, bounds and rates.
#[derive(Debug, Clone)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f32>,
    pub action_high: Vec<f32>,
    pub goal_radius: f32,
    /// Evaluation step budget for one task.
    pub horizon: usize,
    /// World displacement per unit action along one axis.
    pub step_scale: f32,
}

/// Axis-aligned wall rectangle in world units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub x_min: f32,
    pub y_min: f32,
    pub x_max: f32,
    pub y_max: f32,
}

impl Wall {
    pub fn new(x_min: f32, y_min: f32, x_max: f32, y_max: f32) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::InvalidMap(format!(
                "degenerate wall {x_min} {y_min} {x_max} {y_max}"
            )));
        }
        Ok(Wall { x_min, y_min, x_max, y_max })
    }

    /// Closed-rectangle containment; boundary counts as blocked.
    pub fn contains(&self, x: f32, y: f32) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Open-rectangle containment, used by the safety assertions.
    pub fn contains_strict(&self, x: f32, y: f32) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }
}

/// Mutable per-episode state.
#[derive(Debug, Clone)]
pub struct EnvState {
    pub position: Vec<f32>,
    pub steps_taken: usize,
    pub goal: Vec<f32>,
}

/// A concrete environment instance; cheap to clone, immutable during runs.
#[derive(Debug, Clone)]
pub struct Env {
    name: String,
    spec: EnvSpec,
    bounds_lo: Vec<f32>,
    bounds_hi: Vec<f32>,
    walls: Vec<Wall>,
    fixed_task: Option<(Vec<f32>, Vec<f32>)>,
    trap_center: Option<Vec<f32>>,
}

const RESET_ATTEMPTS: usize = 10_000;

impl Env {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn bounds(&self) -> (&[f32], &[f32]) {
        (&self.bounds_lo, &self.bounds_hi)
    }

    pub fn dim(&self) -> usize {
        self.bounds_lo.len()
    }

    /// Fixed (start, goal) for single-task environments such as the trap.
    pub fn fixed_task(&self) -> Option<(&[f32], &[f32])> {
        self.fixed_task.as_ref().map(|(s, g)| (s.as_slice(), g.as_slice()))
    }

    /// Interior point of the cul-de-sac nearest the goal, where dense-reward
    /// methods settle. Only the trap environment defines one.
    pub fn trap_center(&self) -> Option<&[f32]> {
        self.trap_center.as_deref()
    }

    pub fn blocked(&self, p: &[f32]) -> bool {
        if self.dim() == 2 {
            self.walls.iter().any(|w| w.contains(p[0], p[1]))
        } else {
            false
        }
    }

    fn inside_bounds(&self, p: &[f32]) -> bool {
        p.iter()
            .zip(self.bounds_lo.iter().zip(&self.bounds_hi))
            .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    /// Uniform sample over free space (outside every wall, inside bounds).
    pub fn sample_free_position(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f32>> {
        for _ in 0..RESET_ATTEMPTS {
            let p: Vec<f32> = self
                .bounds_lo
                .iter()
                .zip(&self.bounds_hi)
                .map(|(&lo, &hi)| rng.random_range(lo..hi))
                .collect();
            if !self.blocked(&p) {
                return Ok(p);
            }
        }
        Err(Error::SamplingExhausted(RESET_ATTEMPTS))
    }

    /// Start a new episode. `task` overrides sampling; otherwise the fixed
    /// task (if any) applies, and failing both, start and goal are sampled
    /// uniformly over free space with start != goal.
    pub fn reset(
        &self,
        rng: &mut ChaCha8Rng,
        task: Option<(&[f32], &[f32])>,
    ) -> Result<EnvState> {
        let (start, goal) = if let Some((s, g)) = task {
            (s.to_vec(), g.to_vec())
        } else if let Some((s, g)) = &self.fixed_task {
            (s.clone(), g.clone())
        } else {
            let s = self.sample_free_position(rng)?;
            let mut g = self.sample_free_position(rng)?;
            let mut tries = 0;
            while g == s {
                g = self.sample_free_position(rng)?;
                tries += 1;
                if tries > RESET_ATTEMPTS {
                    return Err(Error::SamplingExhausted(RESET_ATTEMPTS));
                }
            }
            (s, g)
        };
        Ok(EnvState { position: start, steps_taken: 0, goal })
    }

    /// Advance one step: clamp the action to the box, apply the displacement
    /// axis by axis (an axis move that would end inside a wall is dropped,
    /// so the agent slides along walls), clamp to world bounds.
    pub fn step(&self, state: &EnvState, action: &[f32]) -> (EnvState, bool) {
        let dim = self.dim();
        debug_assert_eq!(action.len(), dim);
        let mut pos = state.position.clone();
        for axis in 0..dim {
            let a = action[axis].clamp(self.spec.action_low[axis], self.spec.action_high[axis]);
            let mut trial = pos.clone();
            trial[axis] = (trial[axis] + self.spec.step_scale * a)
                .clamp(self.bounds_lo[axis], self.bounds_hi[axis]);
            if !self.blocked(&trial) {
                pos = trial;
            }
        }
        debug_assert!(self.inside_bounds(&pos) && !self.blocked(&pos));
        let next = EnvState {
            position: pos,
            steps_taken: state.steps_taken + 1,
            goal: state.goal.clone(),
        };
        let reached = self.goal_reached(&next.position, &next.goal);
        (next, reached)
    }

    pub fn goal_reached(&self, position: &[f32], goal: &[f32]) -> bool {
        euclid(position, goal) <= self.spec.goal_radius
    }

    /// Exact straight-line distance for environments whose true distance is
    /// Euclidean (the 3-D reach world). Maze environments return None.
    pub fn analytic_distance(&self, a: &[f32], b: &[f32]) -> Option<f32> {
        if self.walls.is_empty() && self.dim() == 3 {
            Some(euclid(a, b))
        } else {
            None
        }
    }

    // ---- grid oracle (2-D maze environments) ----

    fn grid_supported(&self) -> Result<()> {
        if self.dim() != 2 {
            return Err(Error::GridUnsupported(self.name.clone()));
        }
        Ok(())
    }

    /// Number of grid cells along each axis at resolution `step_scale`.
    pub fn grid_dims(&self) -> Result<(i64, i64)> {
        self.grid_supported()?;
        let cell = self.spec.step_scale;
        let nx = ((self.bounds_hi[0] - self.bounds_lo[0]) / cell).round() as i64;
        let ny = ((self.bounds_hi[1] - self.bounds_lo[1]) / cell).round() as i64;
        Ok((nx, ny))
    }

    /// Cell containing a continuous position.
    pub fn cell_of(&self, p: &[f32]) -> Result<Cell> {
        self.grid_supported()?;
        let cell = self.spec.step_scale;
        Ok(Cell {
            x: ((p[0] - self.bounds_lo[0]) / cell).floor() as i64,
            y: ((p[1] - self.bounds_lo[1]) / cell).floor() as i64,
        })
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, c: Cell) -> Result<Vec<f32>> {
        self.grid_supported()?;
        let cell = self.spec.step_scale;
        Ok(vec![
            self.bounds_lo[0] + (c.x as f32 + 0.5) * cell,
            self.bounds_lo[1] + (c.y as f32 + 0.5) * cell,
        ])
    }

    /// A cell is free when its center is outside every wall.
    pub fn is_free_cell(&self, c: Cell) -> Result<bool> {
        let (nx, ny) = self.grid_dims()?;
        if c.x < 0 || c.y < 0 || c.x >= nx || c.y >= ny {
            return Ok(false);
        }
        let center = self.cell_center(c)?;
        Ok(!self.blocked(&center))
    }

    pub fn free_cells(&self) -> Result<Vec<Cell>> {
        let (nx, ny) = self.grid_dims()?;
        let mut cells = Vec::new();
        for x in 0..nx {
            for y in 0..ny {
                let c = Cell { x, y };
                if self.is_free_cell(c)? {
                    cells.push(c);
                }
            }
        }
        Ok(cells)
    }

    /// Exact minimum 4-neighbor hop count between two free cells.
    /// Unreachable pairs return Ok(None).
    pub fn bfs_distance(&self, a: Cell, b: Cell) -> Result<Option<u32>> {
        if !self.is_free_cell(a)? {
            return Err(Error::BlockedCell(a.x, a.y));
        }
        if !self.is_free_cell(b)? {
            return Err(Error::BlockedCell(b.x, b.y));
        }
        let field = self.bfs_field(a)?;
        Ok(field.get(b))
    }

    /// Free mask over the whole grid, laid out as x * ny + y.
    fn free_mask(&self) -> Result<Vec<bool>> {
        let (nx, ny) = self.grid_dims()?;
        let mut mask = vec![false; (nx * ny) as usize];
        for x in 0..nx {
            for y in 0..ny {
                mask[(x * ny + y) as usize] = self.is_free_cell(Cell { x, y })?;
            }
        }
        Ok(mask)
    }

    /// Full BFS distance field from one free cell.
    pub fn bfs_field(&self, from: Cell) -> Result<grid::DistanceField> {
        if !self.is_free_cell(from)? {
            return Err(Error::BlockedCell(from.x, from.y));
        }
        let (nx, ny) = self.grid_dims()?;
        Ok(grid::bfs(from, nx, ny, &self.free_mask()?))
    }

    /// Maximum finite BFS distance over all free-cell pairs, with a
    /// realizing pair. Used for map calibration.
    pub fn max_bfs_distance(&self) -> Result<(u32, Cell, Cell)> {
        let cells = self.free_cells()?;
        let (nx, ny) = self.grid_dims()?;
        let mask = self.free_mask()?;
        let mut best = (0u32, cells[0], cells[0]);
        for &c in &cells {
            let field = grid::bfs(c, nx, ny, &mask);
            for &d in &cells {
                if let Some(h) = field.get(d) {
                    if h > best.0 {
                        best = (h, c, d);
                    }
                }
            }
        }
        Ok(best)
    }

    /// Sample a free start/goal cell pair whose BFS distance lies within
    /// +-tol of `target`. Returns None when no pair is found in the budget.
    pub fn sample_pair_at_distance(
        &self,
        rng: &mut ChaCha8Rng,
        target: u32,
        tol: u32,
        attempts: usize,
    ) -> Result<Option<(Cell, Cell)>> {
        let cells = self.free_cells()?;
        let lo = target.saturating_sub(tol);
        let hi = target + tol;
        for _ in 0..attempts {
            let start = cells[rng.random_range(0..cells.len())];
            let field = self.bfs_field(start)?;
            let goals: Vec<Cell> = cells
                .iter()
                .copied()
                .filter(|&c| matches!(field.get(c), Some(d) if d >= lo && d <= hi))
                .collect();
            if !goals.is_empty() {
                let goal = goals[rng.random_range(0..goals.len())];
                return Ok(Some((start, goal)));
            }
        }
        Ok(None)
    }
}

pub use maps::{make_city, make_city_desk, make_four_rooms, make_reach3d, make_trap, parse_map};

#[cfg(test)]
mod tests;
