//! Bare-bones SVG line plots and heatmaps. Fixed number formatting keeps the
//! output byte-stable.

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 50.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub width: f64,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn header(title: &str, f: &Frame) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    s.push_str(&format!(
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    ));
    for (v, anchor_x) in [(f.x0, f.px(f.x0)), (f.x1, f.px(f.x1))] {
        s.push_str(&format!(
            "<text x=\"{anchor_x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{v:.3}</text>\n",
            H - PAD + 16.0
        ));
    }
    for (v, anchor_y) in [(f.y0, f.py(f.y0)), (f.y1, f.py(f.y1))] {
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v:.3}</text>\n",
            PAD - 6.0,
            anchor_y + 4.0
        ));
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn polyline(f: &Frame, series: &Series) -> String {
    let pts: Vec<String> = series
        .points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{:.1}\" points=\"{}\"/>\n",
        series.color,
        series.width,
        pts.join(" ")
    )
}

fn legend(series: &[Series]) -> String {
    let mut s = String::new();
    for (k, ser) in series.iter().enumerate() {
        let y = PAD + 16.0 + 16.0 * k as f64;
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            W - PAD - 120.0,
            W - PAD - 100.0,
            ser.color,
            W - PAD - 95.0,
            y + 4.0,
            escape(ser.label)
        ));
    }
    s
}

/// Line plot over `[x0, x1] x [y0, y1]`.
pub fn line_plot(
    title: &str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    series: &[Series],
) -> String {
    let f = Frame {
        x0: x_range.0,
        x1: x_range.1,
        y0: y_range.0,
        y1: y_range.1,
    };
    let mut s = header(title, &f);
    for ser in series {
        s.push_str(&polyline(&f, ser));
    }
    s.push_str(&legend(series));
    s.push_str("</svg>\n");
    s
}

/// Grayscale heatmap of `values[i][j]` at `(xs[i], ys[j])`, darker for
/// smaller values, with optional overlaid curves.
pub fn heatmap(
    title: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    overlay: &[Series],
) -> String {
    let f = Frame {
        x0: xs[0],
        x1: xs[xs.len() - 1],
        y0: ys[0],
        y1: ys[ys.len() - 1],
    };
    let (lo, hi) = values
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (W - 2.0 * PAD) / xs.len() as f64;
    let ch = (H - 2.0 * PAD) / ys.len() as f64;
    let mut s = header(title, &f);
    for (i, col) in values.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            let g = (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8;
            s.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>\n",
                PAD + cw * i as f64,
                H - PAD - ch * (j + 1) as f64,
                cw + 0.05,
                ch + 0.05
            ));
        }
    }
    for ser in overlay {
        s.push_str(&polyline(&f, ser));
    }
    s.push_str(&legend(overlay));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_is_stable() {
        let ser = Series {
            label: "a<b",
            color: "black",
            width: 1.0,
            points: vec![(0.0, 0.0), (1.0, 1.0), (0.5, f64::NAN)],
        };
        let a = line_plot("t", (0.0, 1.0), (0.0, 1.0), &[ser]);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;b"));
        assert!(a.contains("points=\"50.00,430.00 590.00,50.00\""));
        let h = heatmap(
            "h",
            &[0.0, 1.0],
            &[0.0, 1.0],
            &[vec![0.0, 1.0], vec![2.0, 3.0]],
            &[],
        );
        assert_eq!(h.matches("<rect x=").count(), 5);
    }
}
