//! Seeded initial-data suites shared by the verifiers.
//!
//! Data are stored as parametrized atoms, not closures, so a report can
//! name the datum behind a failing instance and a seed reproduces the
//! suite bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::grid::Grid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One building block of a synthetic datum.
#[derive(Clone, Debug)]
pub enum Atom {
    /// amplitude * (1 - s^2)^3 with s = (x - center)/half_width; C^2, compact.
    Bump { center: f64, half_width: f64, amplitude: f64 },
    /// amplitude on [center - 1/2, center + 1/2).
    Cube { center: f64, amplitude: f64 },
}

impl Atom {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Atom::Bump { center, half_width, amplitude } => {
                let s = (x - center) / half_width;
                if s.abs() < 1.0 {
                    let w = 1.0 - s * s;
                    amplitude * w * w * w
                } else {
                    0.0
                }
            }
            Atom::Cube { center, amplitude } => {
                if x >= center - 0.5 && x < center + 0.5 {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest feature width, for resolution checks.
    pub fn width(&self) -> f64 {
        match *self {
            Atom::Bump { half_width, .. } => 2.0 * half_width,
            Atom::Cube { .. } => 1.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SampleData {
    pub atoms: Vec<Atom>,
}

impl SampleData {
    pub fn eval(&self, x: f64) -> f64 {
        self.atoms.iter().map(|a| a.eval(x)).sum()
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.points()).map(|i| self.eval(grid.coord(i))).collect()
    }

    pub fn sample_field(&self, grid: &Grid) -> Field {
        Field::new(*grid, self.sample(grid), None).expect("sample length matches grid")
    }

    pub fn amplitude_bound(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| match *a {
                Atom::Bump { amplitude, .. } | Atom::Cube { amplitude, .. } => amplitude.abs(),
            })
            .sum()
    }

    pub fn min_feature_width(&self) -> f64 {
        self.atoms.iter().map(Atom::width).fold(f64::INFINITY, f64::min)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| match *a {
                Atom::Bump { center, half_width, amplitude } => {
                    format!("bump(c={center:.3},w={half_width:.3},A={amplitude:.3})")
                }
                Atom::Cube { center, amplitude } => {
                    format!("cube(c={center:.3},A={amplitude:.3})")
                }
            })
            .collect();
        parts.join("+")
    }
}

/// The integral of (1 - s^2)^3 over [-1, 1] is 32/35; scaling by the
/// half-width gives a single bump of prescribed mass.
pub fn mass_bump(center: f64, half_width: f64, mass: f64) -> SampleData {
    let amplitude = 35.0 * mass / (32.0 * half_width);
    SampleData { atoms: vec![Atom::Bump { center, half_width, amplitude }] }
}

pub fn unit_mass_bump(half_width: f64) -> SampleData {
    mass_bump(0.0, half_width, 1.0)
}

pub fn cube(center: f64, amplitude: f64) -> SampleData {
    SampleData { atoms: vec![Atom::Cube { center, amplitude }] }
}

/// Random mixture of one to three bumps plus up to two cube indicators,
/// supported inside |x| <= extent.
pub fn random_mixture(rng: &mut ChaCha8Rng, extent: f64) -> SampleData {
    let mut atoms = Vec::new();
    let bumps = rng.random_range(1..=3);
    for _ in 0..bumps {
        let half_width = rng.random_range(0.5..2.0);
        let margin = (extent - half_width).max(0.0);
        atoms.push(Atom::Bump {
            center: rng.random_range(-margin..margin),
            half_width,
            amplitude: rng.random_range(-1.0..1.0),
        });
    }
    let cubes = rng.random_range(0..=2);
    for _ in 0..cubes {
        let margin = (extent - 0.5).max(0.0);
        atoms.push(Atom::Cube {
            center: rng.random_range(-margin..margin),
            amplitude: rng.random_range(-1.0..1.0),
        });
    }
    SampleData { atoms }
}

pub fn random_suite(seed: u64, count: usize, extent: f64) -> Vec<SampleData> {
    let mut r = rng(seed);
    (0..count).map(|_| random_mixture(&mut r, extent)).collect()
}

/// Samples A (1 + y^2)^(-beta/2): square-integrable but not integrable
/// for beta in (1/2, 1); drives the slow diffusive rates.
pub fn heavy_tail(grid: &Grid, amplitude: f64, beta: f64) -> Vec<f64> {
    (0..grid.points())
        .map(|i| {
            let y = grid.coord(i);
            amplitude * (1.0 + y * y).powf(-0.5 * beta)
        })
        .collect()
}
