//! Plots and shaded tables. SVG is written by hand so output is byte-stable.

mod shade;
mod svg;

pub use shade::{parse_shaded_csv, render_shaded_csv, render_shaded_html, shade_color, ShadeScope, ShadedTable, ACCENT};
pub use svg::{plot_bias_bars, plot_warp_boxplot, BarSeries, LEGEND_TITLE};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}
