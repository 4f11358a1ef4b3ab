//! Independent ground truth for the series engine.
//!
//! [`direct_z`] computes `log(e^A e^{2B} e^A)` the slow way; filtering it
//! through a polynomial fit over a `t` sweep isolates individual series
//! coefficients, and [`convergence_slope`] turns error sweeps into fitted
//! truncation orders.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matops::{mat_exp, mat_log_principal};
use crate::{CMatrix, C64};

/// Points below this are treated as double-precision noise in slope fits.
pub const ERROR_FLOOR: f64 = 1e-13;

const FIT_CONDITION_CAP: f64 = 1e10;

/// A strictly increasing positive sweep of `t` values spanning at least a
/// decade.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    values: Vec<f64>,
}

impl SweepGrid {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::input("sweep grid needs at least 4 points"));
        }
        if values.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return Err(Error::input("sweep grid values must be positive"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("sweep grid must be strictly increasing"));
        }
        let ratio = values[values.len() - 1] / values[0];
        if ratio < 10.0 {
            return Err(Error::input(format!(
                "sweep grid must span at least a decade, got ratio {ratio:.3}"
            )));
        }
        Ok(SweepGrid { values })
    }

    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 4 {
            return Err(Error::input("sweep grid needs at least 4 points"));
        }
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::input("sweep grid needs 0 < lo < hi"));
        }
        let step = (hi / lo).ln() / (count - 1) as f64;
        let values = (0..count).map(|i| lo * (step * i as f64).exp()).collect();
        SweepGrid::from_values(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same grid with every point halved (ratios preserved).
    pub fn halved(&self) -> SweepGrid {
        SweepGrid {
            values: self.values.iter().map(|t| t * 0.5).collect(),
        }
    }
}

/// `log(e^A e^{2B} e^A)` computed directly through exp and the principal log.
pub fn direct_z(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() || a.ncols() != a.nrows() || b.ncols() != b.nrows() {
        return Err(Error::input("direct_z needs square matrices of equal size"));
    }
    let ea = mat_exp(a);
    mat_log_principal(&(&ea * mat_exp(&b.scale(2.0)) * &ea))
}

/// Extract the order-`order` coefficient of `t ↦ log(e^A e^{2tB} e^A)` by an
/// entrywise least-squares fit of `direct_z(A, tB) − 2A` to a polynomial of
/// degree `order + 2` (powers start at 1) over the grid.
///
/// The design matrix is column-equilibrated before the SVD solve; the
/// condition gate applies to the equilibrated matrix.
pub fn series_coefficient(
    a: &CMatrix,
    b: &CMatrix,
    order: usize,
    grid: &SweepGrid,
) -> Result<CMatrix> {
    if order == 0 || order > 5 {
        return Err(Error::input(format!(
            "series_coefficient supports orders 1..=5, got {order}"
        )));
    }
    if grid.len() < order + 4 {
        return Err(Error::input(format!(
            "series_coefficient at order {order} needs at least {} grid points, got {}",
            order + 4,
            grid.len()
        )));
    }
    let degree = order + 2;
    let rows = grid.len();
    let mut design = DMatrix::<f64>::zeros(rows, degree);
    for (i, &t) in grid.values().iter().enumerate() {
        let mut p = 1.0;
        for k in 0..degree {
            p *= t;
            design[(i, k)] = p;
        }
    }
    let mut scales = vec![0.0f64; degree];
    for k in 0..degree {
        let norm = design.column(k).norm();
        scales[k] = norm;
        for i in 0..rows {
            design[(i, k)] /= norm;
        }
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let smin = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s));
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > FIT_CONDITION_CAP {
        return Err(Error::IllConditionedFit {
            condition,
            cap: FIT_CONDITION_CAP,
        });
    }
    let pinv = svd
        .pseudo_inverse(1e-14)
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;

    let d = a.nrows();
    let two_a = a.scale(2.0);
    let mut samples = Vec::with_capacity(rows);
    for &t in grid.values() {
        samples.push(direct_z(a, &b.scale(t))? - &two_a);
    }
    let mut coeff = CMatrix::zeros(d, d);
    let k = order - 1; // row of the pseudo-inverse for the t^order column
    for i in 0..d {
        for j in 0..d {
            let mut c = C64::new(0.0, 0.0);
            for (row, sample) in samples.iter().enumerate() {
                c += sample[(i, j)] * pinv[(k, row)];
            }
            coeff[(i, j)] = c / scales[k];
        }
    }
    Ok(coeff)
}

/// Run `direct_z(a, t·b)` over the grid, halving the whole grid on a branch
/// failure up to `max_halvings` times. Returns the grid actually used, the
/// per-point logs, and the number of halvings taken.
pub fn direct_z_sweep(
    a: &CMatrix,
    b: &CMatrix,
    grid: &SweepGrid,
    max_halvings: usize,
) -> Result<(SweepGrid, Vec<CMatrix>, usize)> {
    let mut current = grid.clone();
    let mut halvings = 0;
    'retry: loop {
        let mut logs = Vec::with_capacity(current.len());
        for &t in current.values() {
            match direct_z(a, &b.scale(t)) {
                Ok(z) => logs.push(z),
                Err(Error::BranchCut { .. }) if halvings < max_halvings => {
                    current = current.halved();
                    halvings += 1;
                    continue 'retry;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok((current, logs, halvings));
    }
}

/// Least-squares slope of `log err` against `log t`, ignoring points at the
/// double-precision floor. Errors if fewer than 4 usable points remain.
pub fn convergence_slope(err_pairs: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = err_pairs
        .iter()
        .filter(|(t, e)| *t > 0.0 && *e > ERROR_FLOOR)
        .map(|&(t, e)| (t.ln(), e.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            found: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &usable {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return Err(Error::Numerical("degenerate slope fit".into()));
    }
    Ok(num / den)
}
