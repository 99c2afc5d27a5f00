//! Two-dimensional drive-parameter sweeps.
//!
//! A sweep evaluates a per-point quantity over a grid of normalized
//! detunings (rows) and drive amplitudes (columns). Per-point failures are
//! recorded as quiet-NaN cells and counted; evaluation order never affects
//! the result, so sweeps parallelize freely.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::stability::alpha_a;

/// One strictly increasing sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("axis needs at least one point".into()));
        }
        if count > 1 && !(max > min) {
            return Err(Error::InvalidInput(format!(
                "axis must be strictly increasing (min {min}, max {max})"
            )));
        }
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidInput("axis bounds must be finite".into()));
        }
        Ok(Self { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }
}

/// Specification of a stability sweep over the drive plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Detuning axis `delta_b / w_a0` (grid rows).
    pub delta: Axis,
    /// Drive-amplitude axis `w_b1 / w_a0` (grid columns).
    pub omega_b1: Axis,
    /// Base parameters; the drive point is overridden per cell.
    pub base: SystemParams,
    /// Keep the longitudinal `P_bz0^2` channel of the damping coefficient.
    /// Off by default in map-style sweeps.
    pub include_d0_term: bool,
}

/// Dense row-major result grid of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub delta_values: Vec<f64>,
    pub omega_b1_values: Vec<f64>,
    /// Row-major: `values[row * columns + col]`, rows indexed by detuning.
    pub values: Vec<f64>,
    /// Cells that failed with a numeric degeneracy (stored as NaN).
    pub nan_cells: usize,
    /// Human-readable label of the swept quantity.
    pub quantity: &'static str,
}

impl SweepGrid {
    pub fn rows(&self) -> usize {
        self.delta_values.len()
    }

    pub fn columns(&self) -> usize {
        self.omega_b1_values.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.columns() + col]
    }
}

/// Sweep an arbitrary per-point map over the drive plane. Rows are
/// evaluated in parallel and gathered in row-major order, so the output is
/// identical for any worker count.
pub fn sweep_map<F>(spec: &SweepSpec, quantity: &'static str, eval: F) -> Result<SweepGrid>
where
    F: Fn(&SystemParams) -> Result<f64> + Sync,
{
    spec.base.validate()?;
    let delta_values = spec.delta.values();
    let omega_b1_values = spec.omega_b1.values();
    let cells: Vec<(usize, usize)> = (0..delta_values.len())
        .flat_map(|r| (0..omega_b1_values.len()).map(move |c| (r, c)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(r, c)| {
            let params = spec.base.with_drive(omega_b1_values[c], delta_values[r]);
            match eval(&params) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }
        })
        .collect();
    let nan_cells = values.iter().filter(|v| v.is_nan()).count();
    Ok(SweepGrid {
        delta_values,
        omega_b1_values,
        values,
        nan_cells,
        quantity,
    })
}

/// Grid of the back-action damping coefficient `alpha_a`.
pub fn sweep_alpha(spec: &SweepSpec) -> Result<SweepGrid> {
    let include = spec.include_d0_term;
    sweep_map(spec, "alpha_a", move |params| alpha_a(params, include))
}

/// The default map axes: detuning in [-2, 2] with 61 points, drive
/// amplitude in [0.0125, 1] with 81 points.
pub fn default_axes() -> (Axis, Axis) {
    (
        Axis {
            min: -2.0,
            max: 2.0,
            count: 61,
        },
        Axis {
            min: 0.0125,
            max: 1.0,
            count: 81,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::reference_params;

    #[test]
    fn single_cell_grid_equals_point_evaluation() {
        let base = reference_params();
        let spec = SweepSpec {
            delta: Axis::new(base.drive.delta_b, base.drive.delta_b, 1).unwrap(),
            omega_b1: Axis::new(base.drive.omega_b1, base.drive.omega_b1, 1).unwrap(),
            base,
            include_d0_term: true,
        };
        let grid = sweep_alpha(&spec).unwrap();
        assert_eq!(grid.rows(), 1);
        assert_eq!(grid.columns(), 1);
        let direct = alpha_a(&base, true).unwrap();
        assert_eq!(grid.value(0, 0), direct);
    }

    #[test]
    fn default_map_is_unstable_only_at_blue_detuning() {
        let (delta, omega_b1) = default_axes();
        let spec = SweepSpec {
            delta,
            omega_b1,
            base: reference_params(),
            include_d0_term: false,
        };
        let grid = sweep_alpha(&spec).unwrap();
        assert_eq!(grid.nan_cells, 0);
        let mut unstable_cells = 0;
        for r in 0..grid.rows() {
            for c in 0..grid.columns() {
                if grid.value(r, c) < -1.0 {
                    unstable_cells += 1;
                    assert!(
                        grid.delta_values[r] > 0.0,
                        "unstable cell at delta {}",
                        grid.delta_values[r]
                    );
                }
            }
        }
        assert!(unstable_cells > 0);
    }

    #[test]
    fn axes_are_strictly_increasing() {
        let a = Axis::new(-2.0, 2.0, 61).unwrap();
        let v = a.values();
        assert_eq!(v.len(), 61);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(v[0], -2.0);
        assert_eq!(*v.last().unwrap(), 2.0);
        assert!(Axis::new(1.0, -1.0, 5).is_err());
        assert!(Axis::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn row_maximizer_sits_on_the_matching_line() {
        // Scan over detuning at fixed drive amplitude 0.35: the largest
        // |alpha| must fall within 0.1 of a matching detuning.
        let (delta, _) = default_axes();
        let spec = SweepSpec {
            delta,
            omega_b1: Axis::new(0.35, 0.35, 1).unwrap(),
            base: reference_params(),
            include_d0_term: false,
        };
        let grid = sweep_alpha(&spec).unwrap();
        let mut best = (0usize, 0.0f64);
        for r in 0..grid.rows() {
            let v = grid.value(r, 0).abs();
            if v > best.1 {
                best = (r, v);
            }
        }
        let d_star = grid.delta_values[best.0];
        let d_hh = (1.0f64 - 4.0 * 0.35 * 0.35).sqrt();
        let dist = (d_star - d_hh).abs().min((d_star + d_hh).abs());
        assert!(dist <= 0.1, "maximizer at {d_star}, matching {d_hh}");
    }
}
