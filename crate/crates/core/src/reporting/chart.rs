//! Hand-written SVG line charts. Output depends only on the input rows, so
//! identical rows give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::domain::{CountryCode, IndicatorRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSelector {
    /// f(K), g(K), r(K)
    Rates,
    /// labor and capital shares in consumption
    Shares,
}

impl SeriesSelector {
    pub fn slug(self) -> &'static str {
        match self {
            SeriesSelector::Rates => "rates",
            SeriesSelector::Shares => "shares",
        }
    }

    fn series(self) -> &'static [Series] {
        match self {
            SeriesSelector::Rates => &[
                Series { key: "f", label: "f(K)", color: "#1f77b4", pick: |r| r.f_rate },
                Series { key: "g", label: "g(K)", color: "#2ca02c", pick: |r| r.g_rate },
                Series { key: "r", label: "r(K)", color: "#d62728", pick: |r| r.r_rate },
            ],
            SeriesSelector::Shares => &[
                Series { key: "labor", label: "labor share", color: "#1f77b4", pick: |r| r.labor_share },
                Series { key: "capital", label: "capital share", color: "#ff7f0e", pick: |r| r.capital_share },
            ],
        }
    }

    fn title(self) -> &'static str {
        match self {
            SeriesSelector::Rates => "cash flow, capital growth and return rates",
            SeriesSelector::Shares => "labor and capital shares in consumption",
        }
    }
}

struct Series {
    key: &'static str,
    label: &'static str,
    color: &'static str,
    pick: fn(&IndicatorRow) -> f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;
const STEPS: [f64; 10] = [0.1, 0.2, 0.25, 0.5, 1.0, 2.0, 2.5, 5.0, 10.0, 20.0];

struct Axis {
    lo_tick: i64,
    hi_tick: i64,
    step: f64,
}

impl Axis {
    /// Percent axis covering the data and zero, with at most 8 intervals.
    fn percent(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v * 100.0);
            hi = hi.max(v * 100.0);
        }
        let span = hi - lo;
        let mut step = STEPS
            .iter()
            .copied()
            .find(|s| span / s <= 8.0)
            .unwrap_or(50.0);
        while span / step > 8.0 {
            step *= 2.0;
        }
        let lo_tick = (lo / step).floor() as i64;
        let mut hi_tick = (hi / step).ceil() as i64;
        if hi_tick == lo_tick {
            hi_tick += 1;
        }
        Axis { lo_tick, hi_tick, step }
    }

    fn lo(&self) -> f64 {
        self.lo_tick as f64 * self.step
    }

    fn hi(&self) -> f64 {
        self.hi_tick as f64 * self.step
    }

    fn y(&self, percent: f64) -> f64 {
        let plot_h = HEIGHT - TOP - BOTTOM;
        TOP + (self.hi() - percent) / (self.hi() - self.lo()) * plot_h
    }

    fn label(&self, tick: i64) -> String {
        let v = tick as f64 * self.step;
        let decimals = if self.step.fract() == 0.0 {
            0
        } else if (self.step * 10.0).fract() == 0.0 {
            1
        } else {
            2
        };
        format!("{v:.decimals$}%")
    }
}

fn x_of(year: i32, first: i32, last: i32) -> f64 {
    let plot_w = WIDTH - LEFT - RIGHT;
    LEFT + f64::from(year - first) / f64::from(last - first) * plot_w
}

fn year_step(span: i32) -> i32 {
    [1, 2, 5, 10, 20, 50]
        .into_iter()
        .find(|s| span / s <= 10)
        .unwrap_or(100)
}

/// Runs of consecutive years; gaps split the polyline.
fn runs(rows: &[IndicatorRow]) -> Vec<&[IndicatorRow]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].year != rows[i - 1].year + 1 {
            out.push(&rows[start..i]);
            start = i;
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One chart for one country. Rows must be in year order.
pub fn render_line_chart(country: &CountryCode, rows: &[IndicatorRow], selector: SeriesSelector) -> Result<String> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSeries(rows.len()));
    }
    let series = selector.series();
    let axis = Axis::percent(rows.iter().flat_map(|r| series.iter().map(move |s| (s.pick)(r))));
    let first = rows[0].year;
    let last = rows[rows.len() - 1].year;
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y_top, y_bottom) = (TOP, HEIGHT - BOTTOM);
    let zero_y = axis.y(0.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        svg,
        r#"<text x="{LEFT}" y="20" font-size="13">{}: {}</text>"#,
        xml_escape(country.as_str()),
        selector.title()
    );
    if axis.lo() < 0.0 {
        let _ = writeln!(
            svg,
            r##"<rect class="negative" x="{x0:.2}" y="{zero_y:.2}" width="{:.2}" height="{:.2}" fill="#fbeaea"/>"##,
            x1 - x0,
            y_bottom - zero_y
        );
    }
    for tick in axis.lo_tick..=axis.hi_tick {
        if tick == 0 {
            continue;
        }
        let y = axis.y(tick as f64 * axis.step);
        let _ = writeln!(
            svg,
            r##"<line class="grid" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            axis.label(tick)
        );
    }
    let _ = writeln!(
        svg,
        r##"<line class="zero" x1="{x0:.2}" y1="{zero_y:.2}" x2="{x1:.2}" y2="{zero_y:.2}" stroke="#000000" stroke-width="1.5"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0%</text>"#,
        x0 - 6.0,
        zero_y + 4.0
    );
    let _ = writeln!(
        svg,
        r##"<line class="axis" x1="{x0:.2}" y1="{y_top:.2}" x2="{x0:.2}" y2="{y_bottom:.2}" stroke="#000000" stroke-width="1"/>"##
    );

    let step = year_step(last - first);
    let mut year = first + (step - first.rem_euclid(step)) % step;
    while year <= last {
        let x = x_of(year, first, last);
        let _ = writeln!(
            svg,
            r##"<line class="tick" x1="{x:.2}" y1="{y_bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000" stroke-width="1"/>"##,
            y_bottom + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{year}</text>"#,
            y_bottom + 16.0
        );
        year += step;
    }

    for s in series {
        for run in runs(rows) {
            let points: Vec<String> = run
                .iter()
                .map(|r| format!("{:.2},{:.2}", x_of(r.year, first, last), axis.y((s.pick)(r) * 100.0)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline data-series="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                s.key,
                points.join(" "),
                s.color
            );
        }
    }

    for (i, s) in series.iter().enumerate() {
        let y = TOP - 12.0;
        let x = WIDTH - RIGHT - 110.0 * (series.len() - i) as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/>"#,
            x + 18.0,
            s.color
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 22.0, y + 4.0, s.label);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One chart per country. Rows are grouped by country and sorted by year.
pub fn render_line_charts(
    rows: &[IndicatorRow],
    selector: SeriesSelector,
) -> Result<BTreeMap<CountryCode, String>> {
    let mut by_country: BTreeMap<CountryCode, Vec<IndicatorRow>> = BTreeMap::new();
    for row in rows {
        by_country.entry(row.country.clone()).or_default().push(row.clone());
    }
    by_country
        .into_iter()
        .map(|(country, mut rows)| {
            rows.sort_by_key(|r| r.year);
            let svg = render_line_chart(&country, &rows, selector)?;
            Ok((country, svg))
        })
        .collect()
}
