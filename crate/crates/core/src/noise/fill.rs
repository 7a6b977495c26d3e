use crate::error::{Error, Result};
use crate::types::DepthMap;

/// Fills every hole with the value of its nearest valid pixel (Euclidean
/// pixel distance). Equidistant donors resolve to the first in row-major
/// order.
pub fn fill_holes_nearest(d: &DepthMap) -> Result<DepthMap> {
    let (w, h) = d.dims();
    // Valid columns per row, ascending.
    let rows: Vec<Vec<usize>> = (0..h)
        .map(|y| (0..w).filter(|&x| d.is_valid(y * w + x)).collect())
        .collect();
    if rows.iter().all(Vec::is_empty) {
        return Err(Error::NoValidPixels("hole filling"));
    }

    let mut out = d.clone();
    for y in 0..h {
        for x in 0..w {
            if d.is_valid(y * w + x) {
                continue;
            }
            // best = (squared distance, row-major donor index)
            let mut best: Option<(usize, usize)> = None;
            for dy in 0..h {
                if let Some((bd, _)) = best {
                    if dy * dy > bd {
                        break;
                    }
                }
                let above = y.checked_sub(dy);
                let below = (dy > 0 && y + dy < h).then_some(y + dy);
                for row in [above, below].into_iter().flatten() {
                    if let Some(cand) = nearest_in_row(&rows[row], x, dy, row, w) {
                        if best.is_none_or(|b| cand < b) {
                            best = Some(cand);
                        }
                    }
                }
                if above.is_none() && below.is_none() {
                    break;
                }
            }
            let (_, donor) = best.expect("at least one valid pixel exists");
            out.set(y * w + x, d.values()[donor]);
        }
    }
    Ok(out)
}

/// Closest valid column to `x` in one row; the left donor wins ties since it
/// comes first in row-major order.
fn nearest_in_row(cols: &[usize], x: usize, dy: usize, row: usize, w: usize) -> Option<(usize, usize)> {
    if cols.is_empty() {
        return None;
    }
    let pos = cols.partition_point(|&c| c < x);
    let right = cols.get(pos).copied();
    let left = pos.checked_sub(1).map(|p| cols[p]);
    let key = |c: usize| {
        let dx = c.abs_diff(x);
        (dx * dx + dy * dy, row * w + c)
    };
    match (left, right) {
        (Some(l), Some(r)) => Some(key(l).min(key(r))),
        (Some(l), None) => Some(key(l)),
        (None, Some(r)) => Some(key(r)),
        (None, None) => None,
    }
}
