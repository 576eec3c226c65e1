//! Deterministic SVG chart emission: ROC curves with error bars,
//! trajectory lines, autocorrelation stems, heatmaps and scatter
//! matrices. Byte-stable for identical input.

use super::RocPoint;
use crate::modelgen::DataMatrix;

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 55.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        for x in xs {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for y in ys {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() || x0 == x1 {
            x0 -= 0.5;
            x1 = x0 + 1.0;
        }
        if !y0.is_finite() || y0 == y1 {
            y0 -= 0.5;
            y1 = y0 + 1.0;
        }
        Frame { x0, x1, y0, y1 }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn open_svg(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn axes(frame: &Frame, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(H - MARGIN),
        fmt(W - MARGIN),
        fmt(H - MARGIN)
    ));
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(H - MARGIN)
    ));
    for (value, is_x) in [
        (frame.x0, true),
        (frame.x1, true),
        (frame.y0, false),
        (frame.y1, false),
    ] {
        let (x, y, anchor) = if is_x {
            (frame.sx(value), H - MARGIN + 16.0, "middle")
        } else {
            (MARGIN - 6.0, frame.sy(value) + 4.0, "end")
        };
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"{anchor}\">{}</text>\n",
            fmt(x),
            fmt(y),
            fmt(value)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        fmt(W / 2.0),
        fmt(H - 12.0),
        escape(xlabel)
    ));
    s.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        fmt(H / 2.0),
        fmt(H / 2.0),
        escape(ylabel)
    ));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PALETTE: [&str; 8] = [
    "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#17a589", "#707b7c", "#2e4053",
];

/// ROC chart: one polyline per algorithm id through its (median FPRp,
/// median TPR) points, optional TPR error bars.
pub fn roc_svg(points: &[RocPoint], errorbar: bool, path: bool, scatter: bool, title: &str) -> String {
    let frame = Frame::new(
        points.iter().map(|p| p.median_fprp).chain([0.0]),
        points.iter().map(|p| p.median_tpr).chain([0.0, 1.0]),
    );
    let mut s = open_svg(title);
    s.push_str(&axes(&frame, "FPRp", "TPR"));
    let mut ids: Vec<&str> = points.iter().map(|p| p.algorithm_id.as_str()).collect();
    ids.dedup();
    let mut seen: Vec<&str> = Vec::new();
    for p in points {
        if !seen.contains(&p.algorithm_id.as_str()) {
            seen.push(&p.algorithm_id);
        }
    }
    for (k, id) in seen.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let group: Vec<&RocPoint> = points
            .iter()
            .filter(|p| p.algorithm_id == *id)
            .collect();
        if path && group.len() > 1 {
            let pts: Vec<String> = group
                .iter()
                .map(|p| format!("{},{}", fmt(frame.sx(p.median_fprp)), fmt(frame.sy(p.median_tpr))))
                .collect();
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        for p in &group {
            let (x, y) = (frame.sx(p.median_fprp), frame.sy(p.median_tpr));
            if errorbar {
                s.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
                    fmt(x),
                    fmt(frame.sy(p.tpr_q05)),
                    fmt(x),
                    fmt(frame.sy(p.tpr_q95))
                ));
            }
            let marker = if scatter { 4.0 } else { 3.0 };
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{marker}\" fill=\"{color}\"/>\n",
                fmt(x),
                fmt(y)
            ));
        }
        // legend
        let ly = 34.0 + 14.0 * k as f64;
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            fmt(W - MARGIN - 150.0),
            fmt(ly)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>\n",
            fmt(W - MARGIN - 135.0),
            fmt(ly + 9.0),
            escape(id)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Line chart of an (index, value) series.
pub fn series_svg(series: &[(i64, f64)], title: &str, ylabel: &str) -> String {
    let frame = Frame::new(
        series.iter().map(|&(t, _)| t as f64),
        series.iter().map(|&(_, v)| v),
    );
    let mut s = open_svg(title);
    s.push_str(&axes(&frame, "iteration", ylabel));
    if series.len() > 1 {
        let pts: Vec<String> = series
            .iter()
            .map(|&(t, v)| format!("{},{}", fmt(frame.sx(t as f64)), fmt(frame.sy(v))))
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n",
            pts.join(" "),
            PALETTE[0]
        ));
    } else {
        for &(t, v) in series {
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                fmt(frame.sx(t as f64)),
                fmt(frame.sy(v)),
                PALETTE[0]
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Stem chart for autocorrelations r_0..r_K.
pub fn stems_svg(values: &[f64], title: &str) -> String {
    let frame = Frame::new(
        (0..values.len()).map(|k| k as f64),
        values.iter().copied().chain([0.0, 1.0]),
    );
    let mut s = open_svg(title);
    s.push_str(&axes(&frame, "lag", "autocorrelation"));
    let zero_y = frame.sy(0.0);
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#aaaaaa\" stroke-dasharray=\"4 3\"/>\n",
        fmt(MARGIN),
        fmt(zero_y),
        fmt(W - MARGIN),
        fmt(zero_y)
    ));
    for (k, &v) in values.iter().enumerate() {
        let x = frame.sx(k as f64);
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            fmt(x),
            fmt(zero_y),
            fmt(x),
            fmt(frame.sy(v)),
            PALETTE[1]
        ));
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>\n",
            fmt(x),
            fmt(frame.sy(v)),
            PALETTE[1]
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a p×p matrix with entries in [0, 1].
pub fn heatmap_svg(matrix: &[f64], labels: &[String], title: &str) -> String {
    let p = labels.len();
    assert_eq!(matrix.len(), p * p);
    let mut s = open_svg(title);
    let cell = ((W.min(H) - 2.0 * MARGIN) / p.max(1) as f64).min(40.0);
    let x_base = MARGIN;
    let y_base = MARGIN;
    for i in 0..p {
        for j in 0..p {
            let v = matrix[i * p + j].clamp(0.0, 1.0);
            let shade = (255.0 * (1.0 - v)).round() as u8;
            s.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n",
                fmt(x_base + j as f64 * cell),
                fmt(y_base + i as f64 * cell),
                fmt(cell),
                fmt(cell)
            ));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
            fmt(x_base - 4.0),
            fmt(y_base + i as f64 * cell + cell / 2.0 + 3.0),
            escape(&labels[i])
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
            fmt(x_base + i as f64 * cell + cell / 2.0),
            fmt(y_base - 5.0),
            escape(&labels[i])
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Pairwise scatter matrix of at most `max_points` rows per panel.
pub fn scatter_matrix_svg(data: &DataMatrix, max_points: usize, title: &str) -> String {
    let p = data.p();
    let mut s = open_svg(title);
    let cell = (W.min(H) - 2.0 * MARGIN) / p.max(1) as f64;
    let rows = data.n.min(max_points);
    for a in 0..p {
        for b in 0..p {
            let x_base = MARGIN + b as f64 * cell;
            let y_base = MARGIN + a as f64 * cell;
            s.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                fmt(x_base),
                fmt(y_base),
                fmt(cell),
                fmt(cell)
            ));
            if a == b {
                s.push_str(&format!(
                    "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                    fmt(x_base + cell / 2.0),
                    fmt(y_base + cell / 2.0 + 3.0),
                    escape(&data.labels[a])
                ));
                continue;
            }
            if rows == 0 {
                continue;
            }
            let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
            for r in 0..rows {
                let x = data.continuous_cell(r, b);
                let y = data.continuous_cell(r, a);
                lo_x = lo_x.min(x);
                hi_x = hi_x.max(x);
                lo_y = lo_y.min(y);
                hi_y = hi_y.max(y);
            }
            if lo_x == hi_x {
                hi_x = lo_x + 1.0;
            }
            if lo_y == hi_y {
                hi_y = lo_y + 1.0;
            }
            for r in 0..rows {
                let x = (data.continuous_cell(r, b) - lo_x) / (hi_x - lo_x);
                let y = (data.continuous_cell(r, a) - lo_y) / (hi_y - lo_y);
                s.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"0.8\" fill=\"{}\"/>\n",
                    fmt(x_base + 2.0 + x * (cell - 4.0)),
                    fmt(y_base + cell - 2.0 - y * (cell - 4.0)),
                    PALETTE[0]
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
