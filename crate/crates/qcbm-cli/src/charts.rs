//! Static SVG convergence charts: the bootstrapped median of a metric per
//! epoch on a log-scale y axis, with the 5th–95th percentile band behind
//! it. Purely derived from the summary data; no interactivity.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use qcbm::train::BootstrapSummary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 76.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 56.0;
/// Values at or below this render on the bottom edge; exact zeros appear
/// early in well-converged total-variation series.
const FLOOR: f64 = 1e-16;

struct LogAxis {
    lo: f64,
    hi: f64,
}

impl LogAxis {
    /// Range over all finite band values, padded a tenth of a decade.
    fn fit(summary: &BootstrapSummary) -> LogAxis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for series in [&summary.median, &summary.lower, &summary.upper] {
            for &value in series.iter() {
                if value.is_finite() {
                    let clipped = value.max(FLOOR).log10();
                    lo = lo.min(clipped);
                    hi = hi.max(clipped);
                }
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (FLOOR.log10(), 0.0);
        }
        if hi - lo < 0.5 {
            let centre = 0.5 * (lo + hi);
            (lo, hi) = (centre - 0.25, centre + 0.25);
        }
        LogAxis {
            lo: lo - 0.1,
            hi: hi + 0.1,
        }
    }

    /// Pixel y of a value; non-finite values clip to the top edge.
    fn y(&self, value: f64) -> f64 {
        let logged = if value.is_finite() {
            value.max(FLOOR).log10().clamp(self.lo, self.hi)
        } else {
            self.hi
        };
        let span = self.hi - self.lo;
        MARGIN_TOP + (self.hi - logged) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    /// Decade tick exponents, thinned to at most eight.
    fn ticks(&self) -> Vec<i32> {
        let first = self.lo.ceil() as i32;
        let last = self.hi.floor() as i32;
        let count = (last - first + 1).max(1);
        let step = ((count + 7) / 8).max(1);
        (first..=last).step_by(step as usize).collect()
    }
}

fn x_of(epoch: usize, epochs: usize) -> f64 {
    let plot = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    if epochs <= 1 {
        MARGIN_LEFT + plot / 2.0
    } else {
        MARGIN_LEFT + epoch as f64 / (epochs - 1) as f64 * plot
    }
}

fn points(series: &[f64], axis: &LogAxis) -> String {
    let mut out = String::new();
    for (epoch, &value) in series.iter().enumerate() {
        let _ = write!(out, "{:.2},{:.2} ", x_of(epoch, series.len()), axis.y(value));
    }
    out.trim_end().to_string()
}

/// Writes one chart: `title` over epoch (x) against the metric (log y).
pub fn line_chart(path: &Path, title: &str, summary: &BootstrapSummary) -> io::Result<()> {
    let axis = LogAxis::fit(summary);
    let epochs = summary.median.len();
    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="26" font-family="monospace" font-size="15" text-anchor="middle">{title}</text>
"#,
        WIDTH / 2.0
    );

    // Percentile band (5th-95th), then the median over it.
    let mut band = points(&summary.upper, &axis);
    for (epoch, &value) in summary.lower.iter().enumerate().rev() {
        let _ = write!(
            band,
            " {:.2},{:.2}",
            x_of(epoch, epochs),
            axis.y(value)
        );
    }
    let _ = writeln!(
        svg,
        r##"<polygon points="{band}" fill="#9ecae1" fill-opacity="0.55" stroke="none"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="1.5"/>"##,
        points(&summary.median, &axis)
    );

    // Frame and ticks.
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#555"/>"##,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );
    for exponent in axis.ticks() {
        let y = axis.y(10f64.powi(exponent));
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="#555"/>
<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="end">1e{exponent}</text>"##,
            MARGIN_LEFT - 6.0,
            MARGIN_LEFT - 10.0,
            y + 4.0
        );
    }
    let tick_count = 5.min(epochs);
    for index in 0..tick_count {
        let epoch = if tick_count == 1 {
            0
        } else {
            index * (epochs - 1) / (tick_count - 1)
        };
        let x = x_of(epoch, epochs);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{plot_bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555"/>
<text x="{x:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="middle">{}</text>"##,
            plot_bottom + 6.0,
            plot_bottom + 22.0,
            epoch + 1
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="13" text-anchor="middle">epoch</text>
</svg>"#,
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 16.0
    );
    fs::write(path, svg)
}
