//! Uniform periodic grids on the box [-X, X)^n, n = 1 or 2.
//!
//! Samples sit at nodes x_i = -X + i dx with dx * N = 2X held exactly; the
//! node x = 0 is always on the grid. Fields are stored row-major in 2d.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis must be a power of two >= 16, got {points}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
        }
        Ok(Grid { dim, points, half_width })
    }

    pub fn new_1d(points: usize, half_width: f64) -> Result<Self> {
        Self::new(1, points, half_width)
    }

    pub fn new_2d(points: usize, half_width: f64) -> Result<Self> {
        Self::new(2, points, half_width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Total number of samples (N in 1d, N^2 in 2d).
    pub fn len(&self) -> usize {
        match self.dim {
            1 => self.points,
            _ => self.points * self.points,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume dx^n used by midpoint quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of node i along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Flat index of the 2d node (i, j) = (row, column); row varies the second coordinate.
    pub fn index_2d(&self, i: usize, j: usize) -> usize {
        i * self.points + j
    }

    /// Position of a flat index as (x1, x2); x2 = 0 in 1d.
    pub fn position(&self, flat: usize) -> (f64, f64) {
        match self.dim {
            1 => (self.coord(flat), 0.0),
            _ => (self.coord(flat % self.points), self.coord(flat / self.points)),
        }
    }

    /// Iterator over axis coordinates.
    pub fn axis_coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.coord(i))
    }

    /// Nearest flat index to the point (x1, x2), clamped to the box.
    pub fn nearest_index(&self, x1: f64, x2: f64) -> usize {
        let clamp = |x: f64| -> usize {
            let i = ((x + self.half_width) / self.spacing()).round();
            (i.max(0.0) as usize).min(self.points - 1)
        };
        match self.dim {
            1 => clamp(x1),
            _ => self.index_2d(clamp(x2), clamp(x1)),
        }
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}
