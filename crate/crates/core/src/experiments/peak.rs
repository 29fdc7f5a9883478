//! Peak and threshold-interval search on tabulated curves and sheets.

use super::table::Table;
use crate::error::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: f64,
    /// Peak of `|value|`.
    pub value: f64,
    /// The peak node touches a non-finite marker or the edge of the grid, so
    /// the true maximum lies outside what the grid resolves.
    pub grid_limited: bool,
    pub row: usize,
}

/// Row stride between neighbours along `axis`: 1 for the inner (fastest)
/// axis, the block length for the outer one.
fn stride(axis: &[f64]) -> usize {
    if axis.len() < 2 || axis[1] != axis[0] {
        1
    } else {
        axis.iter().position(|&a| a != axis[0]).unwrap_or(axis.len())
    }
}

fn neighbours(axis: &[f64], row: usize, s: usize) -> (Option<usize>, Option<usize>) {
    let same_line = |a: usize, b: usize| s > 1 || axis[b] > axis[a];
    let prev = row.checked_sub(s).filter(|&p| same_line(p, row));
    let next = Some(row + s).filter(|&n| n < axis.len() && same_line(row, n));
    (prev, next)
}

/// Grid argmax of `|column|` with 3-point parabolic refinement along `axis`.
pub fn find_peak(table: &Table, column: &str, axis: &str) -> Result<Peak, ExperimentError> {
    let y = table.real(column)?;
    let x = table.real(axis)?;
    let mut best: Option<usize> = None;
    let mut min_seen = f64::INFINITY;
    for (i, v) in y.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        min_seen = min_seen.min(v.abs());
        if best.is_none_or(|b| v.abs() > y[b].abs()) {
            best = Some(i);
        }
    }
    let Some(row) = best else {
        return Err(ExperimentError::DegenerateColumn(column.into()));
    };
    if y[row].abs() == min_seen {
        return Err(ExperimentError::DegenerateColumn(column.into()));
    }
    let s = stride(x);
    let (prev, next) = neighbours(x, row, s);
    let (Some(p), Some(n)) = (prev, next) else {
        return Ok(Peak { location: x[row], value: y[row].abs(), grid_limited: true, row });
    };
    if !(y[p].is_finite() && y[n].is_finite()) {
        return Ok(Peak { location: x[row], value: y[row].abs(), grid_limited: true, row });
    }
    let (x0, x1, x2) = (x[p], x[row], x[n]);
    let (y0, y1, y2) = (y[p].abs(), y[row].abs(), y[n].abs());
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv >= 0.0 {
        return Ok(Peak { location: x1, value: y1, grid_limited: false, row });
    }
    // Newton form: y = y0 + d01 (x − x0) + curv (x − x0)(x − x1)
    let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    let yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1);
    Ok(Peak { location: xv, value: yv, grid_limited: false, row })
}

/// Connected run of rows (along `axis`) around the peak where
/// `|column| > threshold`. Boundaries are linearly interpolated; a run that
/// reaches the grid edge reports the edge node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exceedance {
    pub lower: f64,
    pub upper: f64,
    pub lower_at_edge: bool,
    pub upper_at_edge: bool,
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must take the rejecting branch
pub fn exceedance_interval(
    table: &Table,
    column: &str,
    axis: &str,
    threshold: f64,
) -> Result<Option<Exceedance>, ExperimentError> {
    let peak = find_peak(table, column, axis)?;
    let y = table.real(column)?;
    let x = table.real(axis)?;
    let over = |i: usize| y[i].is_nan() || y[i].abs() > threshold;
    if !(peak.value > threshold) {
        return Ok(None);
    }
    let s = stride(x);
    let walk = |forward: bool| -> (f64, bool) {
        let mut i = peak.row;
        loop {
            let (p, n) = neighbours(x, i, s);
            let Some(j) = (if forward { n } else { p }) else {
                return (x[i], true);
            };
            if !over(j) {
                let (ya, yb) = (y[i].abs(), y[j].abs());
                if !ya.is_finite() {
                    return (x[i], false);
                }
                let f = (ya - threshold) / (ya - yb);
                return (x[i] + f * (x[j] - x[i]), false);
            }
            i = j;
        }
    };
    let (lower, lower_at_edge) = walk(false);
    let (upper, upper_at_edge) = walk(true);
    Ok(Some(Exceedance { lower, upper, lower_at_edge, upper_at_edge }))
}
