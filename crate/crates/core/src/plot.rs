//! Minimal SVG line plots for sweeps and ROC curves.

use std::fmt::Write as _;

use crate::disagreement::DetectionRoc;
use crate::eval::SweepResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    /// Half-height of the whisker at each point.
    spread: Option<Vec<f64>>,
    dashed: bool,
}

struct Frame {
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        MARGIN + (v - lo) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        HEIGHT - MARGIN - (v - lo) / span * (HEIGHT - 2.0 * MARGIN)
    }
}

fn render(title: &str, x_label: &str, y_label: &str, frame: &Frame, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    let (x0, y0) = (frame.x(frame.x_range.0), frame.y(frame.y_range.0));
    let (x1, y1) = (frame.x(frame.x_range.1), frame.y(frame.y_range.1));
    let _ = writeln!(s, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = frame.x_range.0 + f * (frame.x_range.1 - frame.x_range.0);
        let yv = frame.y_range.0 + f * (frame.y_range.1 - frame.y_range.0);
        let (px, py) = (frame.x(xv), frame.y(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 4.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"#, y0 + 18.0);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#, x0 - 7.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (n, series) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                path.join(" ")
            );
        }
        if let Some(spread) = &series.spread {
            for (&(x, y), &d) in series.points.iter().zip(spread) {
                let px = frame.x(x);
                let (lo, hi) = (frame.y(y - d), frame.y(y + d));
                let _ = writeln!(
                    s,
                    r#"<path d="M{px:.2},{lo:.2} L{px:.2},{hi:.2} M{:.2},{lo:.2} L{:.2},{lo:.2} M{:.2},{hi:.2} L{:.2},{hi:.2}" stroke="{color}"/>"#,
                    px - 3.0,
                    px + 3.0,
                    px - 3.0,
                    px + 3.0
                );
            }
        }
        let ly = MARGIN + 16.0 * n as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Disagreement rate against mean CCR, one line per (method, view) with ±1σ
/// whiskers.
pub fn sweep_svg(result: &SweepResult) -> String {
    let mut series = Vec::new();
    for &method in &result.methods {
        let mut views: Vec<usize> = result.cells.iter().filter(|c| c.method == method).map(|c| c.view).collect();
        views.sort_unstable();
        views.dedup();
        for view in views {
            let mut cells: Vec<_> = result
                .cells
                .iter()
                .filter(|c| c.method == method && c.view == view)
                .collect();
            cells.sort_by(|a, b| a.rate.total_cmp(&b.rate));
            series.push(Series {
                name: format!("{method} view {view}"),
                points: cells.iter().map(|c| (c.rate, c.mean_ccr)).collect(),
                spread: Some(cells.iter().map(|c| c.std_ccr).collect()),
                dashed: view > 0,
            });
        }
    }
    let lo = result.rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = result.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x_range: (lo.min(0.0), hi.max(lo + 1e-9)),
        y_range: (0.0, 1.0),
    };
    render("Mean CCR vs. view disagreement", "disagreement rate", "mean CCR", &frame, &series)
}

/// ROC curves for the foreground and background detectors. Undefined curves
/// are listed in the legend without a line.
pub fn roc_svg(roc: &DetectionRoc) -> String {
    let series: Vec<Series> = [&roc.foreground, &roc.background]
        .into_iter()
        .map(|c| {
            let mut points: Vec<(f64, f64)> = c.points.iter().map(|p| (p.fpr, p.tpr)).collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let name = match c.auc {
                Some(auc) => format!("{} (AUC {auc:.3})", c.name),
                None => format!("{} (undefined)", c.name),
            };
            Series {
                name,
                points,
                spread: None,
                dashed: false,
            }
        })
        .collect();
    let frame = Frame {
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
    };
    render("Disagreement detection ROC", "false positive rate", "true positive rate", &frame, &series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disagreement::{RocCurve, RocPoint};

    fn curve(name: &'static str, points: Vec<RocPoint>, auc: Option<f64>) -> RocCurve {
        RocCurve {
            name,
            points,
            at_mean: None,
            auc,
        }
    }

    #[test]
    fn roc_plot_marks_undefined_curve() {
        let roc = DetectionRoc {
            foreground: curve(
                "foreground",
                vec![
                    RocPoint { quantile: 0.0, fpr: 0.0, tpr: 0.0 },
                    RocPoint { quantile: 1.0, fpr: 1.0, tpr: 1.0 },
                ],
                Some(0.5),
            ),
            background: curve("background", vec![], None),
        };
        let svg = roc_svg(&roc);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("background (undefined)"));
    }

    #[test]
    fn frame_maps_corners() {
        let f = Frame {
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
        };
        assert_eq!(f.x(0.0), MARGIN);
        assert_eq!(f.x(1.0), WIDTH - MARGIN);
        assert_eq!(f.y(0.0), HEIGHT - MARGIN);
        assert_eq!(f.y(1.0), MARGIN);
    }
}
