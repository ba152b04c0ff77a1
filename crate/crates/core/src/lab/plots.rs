//! SVG rendering of report series.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::report::Series;
use crate::error::{LabError, Result};

fn plot_err<E: std::fmt::Display>(e: E) -> LabError {
    LabError::Io(format!("plot: {e}"))
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

/// Writes `series` to `path`; log axes plot `log10` of the values.
pub fn render(series: &Series, path: &Path) -> Result<()> {
    let tf = |v: f64| if series.log_y { v.max(1e-300).log10() } else { v };
    let (x0, x1) = range(series.lines.iter().flat_map(|l| l.1.iter().map(|p| p.0)));
    let (y0, y1) = range(series.lines.iter().flat_map(|l| l.1.iter().map(|p| tf(p.1))));
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(&series.title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    let y_label = if series.log_y { format!("log10 {}", series.y_label) } else { series.y_label.clone() };
    chart.configure_mesh().x_desc(series.x_label.as_str()).y_desc(y_label).draw().map_err(plot_err)?;
    for (i, (name, pts)) in series.lines.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let pts: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, tf(p.1))).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        chart.draw_series(pts.iter().map(|p| Circle::new(*p, 3, color.filled()))).map_err(plot_err)?;
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Renders every series into `dir/plots/<check>[_i].svg`.
pub fn render_all(series: &[(&'static str, Series)], dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    let mut out = Vec::new();
    for (i, (check, s)) in series.iter().enumerate() {
        let clash = series.iter().filter(|(c, _)| c == check).count() > 1;
        let name = if clash { format!("{check}_{i}.svg") } else { format!("{check}.svg") };
        let path = plots.join(name);
        render(s, &path)?;
        out.push(path);
    }
    Ok(out)
}
