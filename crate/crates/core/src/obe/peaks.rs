//! Peak picking on sampled traces.

use serde::{Deserialize, Serialize};

use crate::trace::SpectrumTrace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoundPeak {
    /// Sub-grid position from a parabola through the top three samples.
    pub delta: f64,
    pub height: f64,
    pub prominence: f64,
    /// Grid index of the sampled maximum (plateau midpoint).
    pub index: usize,
}

/// Local maxima of `values` with their topographic prominence.
///
/// A flat run of equal samples counts once, at its middle. Prominence is
/// the height above the higher of the two bases, each base being the lowest
/// sample between the peak and the nearest strictly higher sample on that
/// side (or the trace edge).
pub fn local_maxima(deltas: &[f64], values: &[f64]) -> Vec<FoundPeak> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let mid = (i + j) / 2;
                out.push(FoundPeak {
                    delta: refine(deltas, values, mid, i == j),
                    height: values[mid],
                    prominence: prominence(values, i, j),
                    index: mid,
                });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn refine(deltas: &[f64], values: &[f64], i: usize, sharp: bool) -> f64 {
    if !sharp {
        return deltas[i];
    }
    let (x0, x1, x2) = (deltas[i - 1], deltas[i], deltas[i + 1]);
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    // Vertex of the parabola through three (possibly uneven) points.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature >= 0.0 {
        return x1;
    }
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    vertex.clamp(x0, x2)
}

fn prominence(values: &[f64], first: usize, last: usize) -> f64 {
    let top = values[first];
    let mut left_min = top;
    for k in (0..first).rev() {
        if values[k] > top {
            break;
        }
        left_min = left_min.min(values[k]);
    }
    let mut right_min = top;
    for &v in &values[last + 1..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

/// Peaks of `trace` whose prominence is at least `min_prominence`.
pub fn find_peaks(trace: &SpectrumTrace, min_prominence: f64) -> Vec<FoundPeak> {
    local_maxima(&trace.deltas, &trace.absorption)
        .into_iter()
        .filter(|p| p.prominence >= min_prominence)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        crate::trace::linear_grid(lo, hi, n)
    }

    #[test]
    fn lorentzian_center_within_one_step() {
        let x = grid(101, -2.0, 2.0);
        let y: Vec<f64> = x.iter().map(|d| 1.0 / (1.0 + ((d - 0.123) / 0.3).powi(2))).collect();
        let p = local_maxima(&x, &y);
        assert_eq!(p.len(), 1);
        assert!((p[0].delta - 0.123).abs() < 0.04 / 4.0);
        assert!(p[0].prominence > 0.9);
    }

    #[test]
    fn flat_trace_has_no_peaks() {
        let x = grid(11, 0.0, 1.0);
        assert!(local_maxima(&x, &[2.0; 11]).is_empty());
    }

    #[test]
    fn plateau_counts_once() {
        let x = grid(7, 0.0, 6.0);
        let y = [0.0, 1.0, 3.0, 3.0, 3.0, 1.0, 0.0];
        let p = local_maxima(&x, &y);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 3);
        assert_eq!(p[0].delta, 3.0);
    }

    #[test]
    fn prominence_uses_higher_base() {
        let x = grid(7, 0.0, 6.0);
        let y = [0.0, 5.0, 1.0, 2.0, 0.5, 4.0, 0.0];
        let p = local_maxima(&x, &y);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].prominence, 5.0);
        assert_eq!(p[1].prominence, 1.0);
        assert_eq!(p[2].prominence, 3.5);
    }
}
