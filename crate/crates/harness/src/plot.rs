//! Static SVG charts for `edgecolor report`.

use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{HarnessError, Result};
use crate::output::CsvRow;
use crate::stats::wilson95;

fn plot_err<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Plot(e.to_string())
}

/// One point of a failure-rate curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub x: f64,
    pub rate: f64,
    pub ci95: (f64, f64),
    pub trials: usize,
}

/// Failure rate per `(eps, gamma)` group, ordered by `gamma`. Rows with an
/// empty `failed_edges` field are ignored.
pub fn failure_curve(rows: &[CsvRow]) -> Vec<RatePoint> {
    let mut groups: BTreeMap<usize, (f64, usize, usize)> = BTreeMap::new();
    for r in rows {
        let Some(f) = r.failed_edges else { continue };
        let g = groups.entry(r.gamma).or_insert((r.eps, 0, 0));
        g.1 += 1;
        g.2 += usize::from(f > 0);
    }
    groups
        .into_iter()
        .map(|(gamma, (_, trials, fails))| RatePoint {
            x: gamma as f64,
            rate: fails as f64 / trials as f64,
            ci95: wilson95(fails, trials).expect("nonempty group"),
            trials,
        })
        .collect()
}

/// Failure rate with its 95% interval against `x`.
pub fn draw_failure_curve(points: &[RatePoint], x_label: &str, path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(HarnessError::Plot("no points to draw".into()));
    }
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let lo = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.05).max(0.5);
    let mut chart = ChartBuilder::on(&root)
        .caption("failure rate", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(lo - pad..hi + pad, 0.0..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc("P(some edge uncolored)")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(points.iter().map(|p| (p.x, p.rate)), &BLUE))
        .map_err(plot_err)?;
    chart
        .draw_series(points.iter().map(|p| Circle::new((p.x, p.rate), 3, BLUE.filled())))
        .map_err(plot_err)?;
    chart
        .draw_series(
            points
                .iter()
                .map(|p| PathElement::new(vec![(p.x, p.ci95.0), (p.x, p.ci95.1)], RED)),
        )
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Histogram of `values` with `bins` equal-width bins.
pub fn draw_histogram(values: &[f64], bins: usize, label: &str, path: &Path) -> Result<()> {
    if values.is_empty() || bins == 0 {
        return Err(HarnessError::Plot("no values to draw".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let top = *counts.iter().max().expect("bins > 0") as f64;
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(label, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(lo..lo + width * bins as f64, 0.0..top * 1.1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(label).y_desc("trials").draw().map_err(plot_err)?;
    chart
        .draw_series(counts.iter().enumerate().map(|(k, &c)| {
            let x0 = lo + width * k as f64;
            Rectangle::new([(x0, 0.0), (x0 + width, c as f64)], BLUE.mix(0.6).filled())
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(gamma: usize, failed: Option<usize>) -> CsvRow {
        CsvRow {
            trial: 0,
            n: 6,
            delta: 3,
            eps: gamma as f64 / 3.0 - 1.0,
            gamma,
            failed_edges: failed,
            collisions: Some(0),
            max_abs_delta: None,
            well_behaved: None,
            balanced: Some(true),
            seed: 0,
        }
    }

    #[test]
    fn curve_groups_by_gamma() {
        let rows = vec![row(3, Some(1)), row(3, Some(0)), row(5, Some(0)), row(5, None), row(3, Some(2))];
        let c = failure_curve(&rows);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].x, c[0].trials), (3.0, 3));
        assert!((c[0].rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((c[1].rate, c[1].trials), (0.0, 1));
    }

    #[test]
    fn svg_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let curve = dir.path().join("curve.svg");
        draw_failure_curve(&failure_curve(&[row(3, Some(1)), row(4, Some(0))]), "|Γ|", &curve).unwrap();
        assert!(std::fs::read_to_string(&curve).unwrap().contains("<svg"));
        let hist = dir.path().join("hist.svg");
        draw_histogram(&[1.0, 2.0, 2.0, 5.0], 4, "collisions", &hist).unwrap();
        assert!(std::fs::read_to_string(&hist).unwrap().contains("<rect"));
        assert!(draw_histogram(&[], 4, "x", &hist).is_err());
    }
}
