//! Learning curves: trailing-window smoothing, pointwise averaging, the
//! convergence point, and CSV I/O.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One attempt (RfD) or episode (baselines). `raw_metric` is the success
/// indicator or the training return; baselines also carry the greedy
/// evaluation return and the optimal return of the same start.
/// `cumulative_actions` is fractional only on averaged curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub attempt: usize,
    pub cumulative_actions: f64,
    pub raw_metric: f64,
    pub smoothed_metric: f64,
    pub steps: f64,
    pub greedy_metric: Option<f64>,
    pub optimal_metric: Option<f64>,
    pub smoothed_greedy: Option<f64>,
    pub smoothed_optimal: Option<f64>,
}

/// Mean over the trailing `window` values; the first points average over
/// what is available.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Criterion {
    /// Smoothed success rate at or above the value.
    SuccessRate(f64),
    /// Smoothed greedy return within this fraction of the smoothed optimum.
    WithinOptimal(f64),
}

impl Criterion {
    fn met(self, p: &CurvePoint) -> bool {
        match self {
            Criterion::SuccessRate(t) => p.smoothed_metric >= t,
            Criterion::WithinOptimal(f) => match (p.smoothed_greedy, p.smoothed_optimal) {
                (Some(g), Some(o)) => g >= o - f * o.abs(),
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub attempt: usize,
    pub cumulative_actions: f64,
}

/// First point whose full trailing window meets the criterion.
pub fn convergence(curve: &[CurvePoint], window: usize, criterion: Criterion) -> Option<Convergence> {
    curve
        .iter()
        .skip(window.saturating_sub(1))
        .find(|p| criterion.met(p))
        .map(|p| Convergence {
            attempt: p.attempt,
            cumulative_actions: p.cumulative_actions,
        })
}

/// Builds a curve from per-attempt raw values.
pub fn build_curve(
    raw: &[f64],
    cumulative_actions: &[u64],
    steps: &[u64],
    greedy: Option<(&[f64], &[f64])>,
    window: usize,
) -> Vec<CurvePoint> {
    let smoothed = smooth(raw, window);
    let (sg, so) = match greedy {
        Some((g, o)) => (Some(smooth(g, window)), Some(smooth(o, window))),
        None => (None, None),
    };
    (0..raw.len())
        .map(|i| CurvePoint {
            attempt: i + 1,
            cumulative_actions: cumulative_actions[i] as f64,
            raw_metric: raw[i],
            smoothed_metric: smoothed[i],
            steps: steps[i] as f64,
            greedy_metric: greedy.map(|(g, _)| g[i]),
            optimal_metric: greedy.map(|(_, o)| o[i]),
            smoothed_greedy: sg.as_ref().map(|v| v[i]),
            smoothed_optimal: so.as_ref().map(|v| v[i]),
        })
        .collect()
}

/// Pointwise mean over the prefix all curves share.
pub fn mean_curve(curves: &[Vec<CurvePoint>]) -> Vec<CurvePoint> {
    let Some(len) = curves.iter().map(Vec::len).min() else {
        return Vec::new();
    };
    let n = curves.len() as f64;
    let mean = |f: &dyn Fn(&CurvePoint) -> f64, i: usize| curves.iter().map(|c| f(&c[i])).sum::<f64>() / n;
    let mean_opt = |f: &dyn Fn(&CurvePoint) -> Option<f64>, i: usize| -> Option<f64> {
        curves
            .iter()
            .map(|c| f(&c[i]))
            .sum::<Option<f64>>()
            .map(|s| s / n)
    };
    (0..len)
        .map(|i| CurvePoint {
            attempt: i + 1,
            cumulative_actions: mean(&|p| p.cumulative_actions, i),
            raw_metric: mean(&|p| p.raw_metric, i),
            smoothed_metric: mean(&|p| p.smoothed_metric, i),
            steps: mean(&|p| p.steps, i),
            greedy_metric: mean_opt(&|p| p.greedy_metric, i),
            optimal_metric: mean_opt(&|p| p.optimal_metric, i),
            smoothed_greedy: mean_opt(&|p| p.smoothed_greedy, i),
            smoothed_optimal: mean_opt(&|p| p.smoothed_optimal, i),
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, curve: &[CurvePoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if curve.is_empty() {
        w.write_record([
            "attempt",
            "cumulative_actions",
            "raw_metric",
            "smoothed_metric",
            "steps",
            "greedy_metric",
            "optimal_metric",
            "smoothed_greedy",
            "smoothed_optimal",
        ])?;
    }
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<CurvePoint>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(values: &[f64], window: usize) -> Vec<f64> {
        (0..values.len())
            .map(|i| {
                let lo = (i + 1).saturating_sub(window);
                let slice = &values[lo..=i];
                slice.iter().sum::<f64>() / slice.len() as f64
            })
            .collect()
    }

    #[test]
    fn smoothing_matches_brute_force() {
        let values: Vec<f64> = (0..97).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        for w in [1, 2, 5, 30, 97, 200] {
            let fast = smooth(&values, w);
            for (a, b) in fast.iter().zip(brute(&values, w)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn convergence_needs_a_full_window() {
        let raw = [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let actions: Vec<u64> = (1..=8).map(|i| i * 10).collect();
        let curve = build_curve(&raw, &actions, &[10; 8], None, 4);
        // Window ending at attempt 4 averages 0.75; attempt 8 is the first at 1.
        let c = convergence(&curve, 4, Criterion::SuccessRate(1.0)).unwrap();
        assert_eq!(c.attempt, 8);
        assert_eq!(c.cumulative_actions, 80.0);
        assert_eq!(convergence(&curve, 4, Criterion::SuccessRate(0.75)).unwrap().attempt, 4);
        assert!(convergence(&curve[..3], 4, Criterion::SuccessRate(0.0)).is_none());
    }

    #[test]
    fn within_optimal_handles_negative_optimum() {
        let curve = build_curve(&[0.0], &[1], &[1], Some((&[-10.4], &[-10.0])), 1);
        assert!(convergence(&curve, 1, Criterion::WithinOptimal(0.05)).is_some());
        assert!(convergence(&curve, 1, Criterion::WithinOptimal(0.03)).is_none());
    }

    #[test]
    fn mean_is_pointwise() {
        let a = build_curve(&[1.0, 0.0, 1.0], &[3, 5, 9], &[3, 2, 4], None, 2);
        let b = build_curve(&[0.0, 0.0, 1.0, 1.0], &[1, 2, 3, 4], &[1, 1, 1, 1], None, 2);
        let m = mean_curve(&[a.clone(), b.clone()]);
        assert_eq!(m.len(), 3);
        for i in 0..3 {
            assert_eq!(m[i].raw_metric, (a[i].raw_metric + b[i].raw_metric) / 2.0);
            assert_eq!(m[i].smoothed_metric, (a[i].smoothed_metric + b[i].smoothed_metric) / 2.0);
            assert_eq!(m[i].cumulative_actions, (a[i].cumulative_actions + b[i].cumulative_actions) / 2.0);
        }
        assert!(mean_curve(&[]).is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let curve = build_curve(&[1.0, -3.5], &[4, 9], &[4, 5], Some((&[2.0, 1.0], &[8.0, 8.0])), 2);
        let mut buf = Vec::new();
        write_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("attempt,cumulative_actions,raw_metric,smoothed_metric,"));
        assert_eq!(read_csv(&buf[..]).unwrap(), curve);

        let mut empty = Vec::new();
        write_csv(&mut empty, &[]).unwrap();
        assert!(read_csv(&empty[..]).unwrap().is_empty());
    }
}
