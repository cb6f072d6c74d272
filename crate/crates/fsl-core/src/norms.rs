//! Amalgam norms ell^p_k L^q on unit cubes, total variation with far-field
//! tail accounting, moving cutoff weights, and Holder seminorms.
//!
//! Cubes are centered at the integer lattice; a sample at x belongs to cube
//! floor(x + 1/2). Because that is a partition of the box, the diagonal
//! p = q amalgam norm coincides with the plain L^p norm on any grid. The
//! mixed-index comparisons additionally need each interior cube to carry
//! measure exactly one, which holds when X is an integer and 2X divides N.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

/// Exponent pair for ell^p_k L^q; either entry may be f64::INFINITY.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmalgamIndex {
    p: f64,
    q: f64,
}

impl AmalgamIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for e in [p, q] {
            if !(e >= 1.0) {
                return Err(Error::InvalidArgument(format!("amalgam exponent {e} below 1")));
            }
        }
        Ok(AmalgamIndex { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Plain L^q norm of samples, dx^n cell measure; q = inf gives the sup norm.
pub fn lq_norm(grid: &Grid, values: &[f64], q: f64) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let vol = grid.cell_volume();
    let sum: f64 = values.iter().map(|v| v.abs().powf(q)).sum();
    (sum * vol).powf(1.0 / q)
}

fn cube_of(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// ell^p over integer cubes of the L^q norm within each cube.
pub fn amalgam_norm(grid: &Grid, values: &[f64], idx: AmalgamIndex) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    let vol = grid.cell_volume();
    let q = idx.q;
    // accumulate per cube: sum of |v|^q dx^n, or the max for q = inf
    let mut cubes: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut push = |key: (i64, i64), v: f64| {
        let slot = cubes.entry(key).or_insert(0.0);
        if q.is_infinite() {
            *slot = slot.max(v.abs());
        } else {
            *slot += v.abs().powf(q) * vol;
        }
    };
    match grid.dim() {
        1 => {
            for (i, x) in grid.axis_coords().enumerate() {
                push((cube_of(x), 0), values[i]);
            }
        }
        _ => {
            let np = grid.points();
            for r in 0..np {
                let k2 = cube_of(grid.coord(r));
                for c in 0..np {
                    push((cube_of(grid.coord(c)), k2), values[r * np + c]);
                }
            }
        }
    }
    let inner = |acc: f64| if q.is_infinite() { acc } else { acc.powf(1.0 / q) };
    if idx.p.is_infinite() {
        cubes.values().fold(0.0f64, |m, &a| m.max(inner(a)))
    } else {
        let sum: f64 = cubes.values().map(|&a| inner(a).powf(idx.p)).sum();
        sum.powf(1.0 / idx.p)
    }
}

/// Total variation of a 1d field. The in-box sum of |u_{i+1} - u_i| plus,
/// when a far-field background is attached, the exact variation the
/// monotone background still carries outside the box.
pub fn tv_norm(field: &Field) -> Result<f64> {
    let grid = field.grid();
    if grid.dim() != 1 {
        return Err(Error::Dimension { required: 1, actual: grid.dim() });
    }
    let v = field.values();
    let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let tails = match field.background() {
        Some(bg) => bg.tail_variation_1d(v[0], v[grid.points() - 1])?,
        None => 0.0,
    };
    Ok(interior + tails)
}

/// C^2 radial cutoff riding outward at a fixed speed: value 1 inside radius
/// speed * t + thickness, quintic decay to 0 across one more thickness.
#[derive(Debug, Clone, Copy)]
pub struct MovingWeight {
    speed: f64,
    thickness: f64,
}

impl MovingWeight {
    pub fn new(speed: f64, thickness: f64) -> Result<Self> {
        if !(speed >= 0.0) || !speed.is_finite() {
            return Err(Error::InvalidArgument(format!("weight speed {speed}")));
        }
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(Error::InvalidArgument(format!("weight thickness {thickness}")));
        }
        Ok(MovingWeight { speed, thickness })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Profile at radius r and time t.
    pub fn eval_radial(&self, r: f64, t: f64) -> f64 {
        let sigma = (r - self.speed * t).max(0.0) / self.thickness;
        if sigma <= 1.0 {
            1.0
        } else if sigma >= 2.0 {
            0.0
        } else {
            let s = sigma - 1.0;
            1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let r = match x.len() {
            1 => x[0].abs(),
            _ => x[0].hypot(x[1]),
        };
        self.eval_radial(r, t)
    }

    /// Everything inside this radius has weight exactly 1.
    pub fn plateau_radius(&self, t: f64) -> f64 {
        self.speed * t + self.thickness
    }

    /// Everything outside this radius has weight exactly 0.
    pub fn support_radius(&self, t: f64) -> f64 {
        self.speed * t + 2.0 * self.thickness
    }
}

/// Integral of |v| against a moving weight at time t.
pub fn weighted_l1(grid: &Grid, values: &[f64], weight: &MovingWeight, t: f64) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    let vol = grid.cell_volume();
    match grid.dim() {
        1 => grid
            .axis_coords()
            .zip(values)
            .map(|(x, v)| v.abs() * weight.eval_radial(x.abs(), t))
            .sum::<f64>()
            * vol,
        _ => {
            let np = grid.points();
            let mut sum = 0.0;
            for r in 0..np {
                let x2 = grid.coord(r);
                for c in 0..np {
                    let x1 = grid.coord(c);
                    sum += values[r * np + c].abs() * weight.eval_radial(x1.hypot(x2), t);
                }
            }
            sum * vol
        }
    }
}

/// Discrete Holder seminorm of order alpha in (0, 1]: the sup of
/// |v_i - v_j| / |x_i - x_j|^alpha over pairs separated by at most max_sep
/// cells along each axis.
/// Holder quotient over a contiguous run of samples at spacing dx; the
/// slice need not align with any grid, so windowed measurements can
/// exclude boundary strips.
pub fn holder_seminorm_1d(values: &[f64], dx: f64, alpha: f64, max_sep: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("Holder order {alpha} outside (0, 1]")));
    }
    if max_sep == 0 {
        return Err(Error::InvalidArgument("Holder separation must be positive".into()));
    }
    let n = values.len();
    let sep_pow: Vec<f64> = (0..=max_sep).map(|s| (s as f64 * dx).powf(alpha)).collect();
    let mut best = 0.0f64;
    for i in 0..n {
        for s in 1..=max_sep.min(n.saturating_sub(1 + i)) {
            let d = (values[i + s] - values[i]).abs() / sep_pow[s];
            best = best.max(d);
        }
    }
    Ok(best)
}

pub fn holder_seminorm(grid: &Grid, values: &[f64], alpha: f64, max_sep: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("Holder order {alpha} outside (0, 1]")));
    }
    if max_sep == 0 {
        return Err(Error::InvalidArgument("Holder separation must be positive".into()));
    }
    let dx = grid.spacing();
    let np = grid.points();
    let sep_pow: Vec<f64> = (0..=max_sep).map(|s| (s as f64 * dx).powf(alpha)).collect();
    let mut best = 0.0f64;
    match grid.dim() {
        1 => return holder_seminorm_1d(values, dx, alpha, max_sep),
        _ => {
            for r in 0..np {
                for c in 0..np {
                    let v = values[r * np + c];
                    for s in 1..=max_sep.min(np - 1 - c) {
                        best = best.max((values[r * np + c + s] - v).abs() / sep_pow[s]);
                    }
                    for s in 1..=max_sep.min(np - 1 - r) {
                        best = best.max((values[(r + s) * np + c] - v).abs() / sep_pow[s]);
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::FarFieldProfile;
    use crate::field::make_shock_data;

    fn noisy_field(grid: &Grid, seed: u64) -> Vec<f64> {
        // cheap deterministic pseudo-noise, good enough for norm identities
        (0..grid.len())
            .map(|i| {
                let z = (i as f64 + seed as f64 * 0.137).sin() * 43758.5453;
                z - z.floor() - 0.5
            })
            .collect()
    }

    #[test]
    fn diagonal_amalgam_is_lp_on_any_grid() {
        // partition additivity, no alignment assumption: X = 10.3
        let g = Grid::new_1d(64, 10.3).unwrap();
        let v = noisy_field(&g, 3);
        for p in [1.0, 2.0, f64::INFINITY] {
            let idx = AmalgamIndex::new(p, p).unwrap();
            let a = amalgam_norm(&g, &v, idx);
            let l = lq_norm(&g, &v, p);
            assert!((a - l).abs() < 1e-13 * (1.0 + l), "p {p}: {a} vs {l}");
        }
    }

    #[test]
    fn diagonal_amalgam_is_lp_2d() {
        let g = Grid::new_2d(16, 5.7).unwrap();
        let v = noisy_field(&g, 7);
        for p in [1.0, 2.0] {
            let idx = AmalgamIndex::new(p, p).unwrap();
            assert!((amalgam_norm(&g, &v, idx) - lq_norm(&g, &v, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_index_comparisons_on_aligned_grids() {
        // X integer with 2X | N: interior cubes carry measure exactly 1, so
        // raising p and lowering q can only shrink the norm
        let g = Grid::new_1d(64, 8.0).unwrap();
        for seed in 0..20 {
            let v = noisy_field(&g, seed);
            let chains = [
                ((1.0, f64::INFINITY), (2.0, 2.0)),
                ((2.0, 2.0), (f64::INFINITY, 1.0)),
                ((1.0, 2.0), (2.0, 1.0)),
                ((1.0, 1.0), (f64::INFINITY, 1.0)),
            ];
            for ((p1, q1), (p2, q2)) in chains {
                let big = amalgam_norm(&g, &v, AmalgamIndex::new(p1, q1).unwrap());
                let small = amalgam_norm(&g, &v, AmalgamIndex::new(p2, q2).unwrap());
                assert!(
                    small <= big * (1.0 + 1e-12),
                    "seed {seed}: ({p2},{q2}) = {small} > ({p1},{q1}) = {big}"
                );
            }
        }
    }

    #[test]
    fn tv_of_monotone_reference_is_the_full_jump() {
        // in-box variation plus analytic tails telescopes to exactly 2|a|
        let g = Grid::new_1d(256, 12.5).unwrap();
        let bg = FarFieldProfile::step(0.8, 0.3, 1.1).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let tv = tv_norm(&field).unwrap();
        assert!((tv - 1.6).abs() < 1e-12, "tv {tv}");
    }

    #[test]
    fn tv_of_a_hat() {
        let g = Grid::new_1d(128, 4.0).unwrap();
        let field = Field::from_fn_1d(g, |x| (1.0 - x.abs()).max(0.0)).unwrap();
        let tv = tv_norm(&field).unwrap();
        assert!((tv - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moving_weight_plateau_support_and_smoothness() {
        let w = MovingWeight::new(2.0, 0.5).unwrap();
        let t = 1.25;
        assert_eq!(w.eval_radial(0.0, t), 1.0);
        assert_eq!(w.eval_radial(w.plateau_radius(t), t), 1.0);
        assert_eq!(w.eval_radial(w.support_radius(t), t), 0.0);
        assert_eq!(w.eval_radial(w.support_radius(t) + 3.0, t), 0.0);
        // C^2 seams: second differences stay continuous across both joints
        let h = 1e-4;
        for seam in [w.plateau_radius(t), w.support_radius(t)] {
            let d2 = |r: f64| {
                (w.eval_radial(r + h, t) - 2.0 * w.eval_radial(r, t) + w.eval_radial(r - h, t))
                    / (h * h)
            };
            assert!((d2(seam - 2.0 * h) - d2(seam + 2.0 * h)).abs() < 0.1);
        }
        // and the profile is monotone in r
        let mut prev = 1.0;
        for i in 0..200 {
            let v = w.eval_radial(i as f64 * 0.02, t);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn weighted_l1_brackets_by_plateau_and_support() {
        let g = Grid::new_1d(1024, 16.0).unwrap();
        let v = vec![1.0; g.len()];
        let w = MovingWeight::new(1.0, 1.0).unwrap();
        let t = 2.0;
        let total = weighted_l1(&g, &v, &w, t);
        assert!(total >= 2.0 * w.plateau_radius(t) - 0.1);
        assert!(total <= 2.0 * w.support_radius(t) + 0.1);
        // grows with t while anything sits outside the plateau
        assert!(weighted_l1(&g, &v, &w, t + 1.0) > total);
    }

    #[test]
    fn holder_seminorm_of_sqrt_cusp() {
        // |x|^{1/2} has alpha = 1/2 seminorm exactly 1, attained through 0
        let g = Grid::new_1d(256, 4.0).unwrap();
        let v: Vec<f64> = g.axis_coords().map(|x| x.abs().sqrt()).collect();
        let s = holder_seminorm(&g, &v, 0.5, 64).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "seminorm {s}");
    }

    #[test]
    fn holder_seminorm_of_a_line_is_its_slope() {
        let g = Grid::new_1d(128, 2.0).unwrap();
        let v: Vec<f64> = g.axis_coords().map(|x| -3.0 * x).collect();
        let s = holder_seminorm(&g, &v, 1.0, 16).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
    }
}
