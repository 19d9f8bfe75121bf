//! Static SVG line charts of the plot-data tables.

use std::fmt::Write;

use crate::sweep::Table;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Layout {
    x: usize,
    y: usize,
    group: &'static [&'static str],
    title: &'static str,
}

fn layout(table: &Table) -> Layout {
    let col = |name: &str| table.header.iter().position(|h| *h == name).expect("known plot column");
    match table.name.as_str() {
        "plot_game_value_vs_alpha" => Layout {
            x: col("alpha"),
            y: col("mean_game_value"),
            group: &["n"],
            title: "mean game value vs alpha",
        },
        _ => Layout {
            x: col("n"),
            y: col("mean_suboptimality"),
            group: &["instance", "alpha"],
            title: "mean suboptimality vs n",
        },
    }
}

/// Series are drawn over categorical x positions in first-seen order.
pub fn render(table: &Table, stamp: &str) -> String {
    let l = layout(table);
    let group_idx: Vec<usize> = l
        .group
        .iter()
        .map(|g| table.header.iter().position(|h| h == g).expect("known plot column"))
        .collect();
    let mut xs: Vec<&str> = Vec::new();
    let mut series: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    for row in &table.rows {
        let x = row[l.x].as_str();
        let xi = xs.iter().position(|v| *v == x).unwrap_or_else(|| {
            xs.push(x);
            xs.len() - 1
        });
        let key = group_idx
            .iter()
            .zip(l.group)
            .map(|(&i, g)| format!("{g}={}", row[i]))
            .collect::<Vec<_>>()
            .join(" ");
        let y: f64 = row[l.y].parse().unwrap_or(f64::NAN);
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((xi, y)),
            None => series.push((key, vec![(xi, y)])),
        }
    }
    let ys = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .filter(|y| y.is_finite());
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (lo, hi) = if lo.is_finite() {
        (lo.min(0.0), hi.max(lo + 1e-12))
    } else {
        (0.0, 1.0)
    };
    let px = |i: usize| MARGIN + (W - 2.0 * MARGIN) * (i as f64 + 0.5) / xs.len().max(1) as f64;
    let py = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * (y - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<!-- {stamp} -->");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        l.title
    );
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (i, x) in xs.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#,
            px(i),
            y0 + 18.0
        );
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            x0 - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 16.0,
        table.header[l.x]
    );
    for (k, (_, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(i, y)| format!("{:.1},{:.1}", px(i), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
    }
    for (k, (key, _)) in series.iter().enumerate().take(6) {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{key}</text>"#,
            x1 - 120.0,
            y1 + 14.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
