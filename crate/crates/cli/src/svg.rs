//! Persistence diagram as a standalone SVG: diagonal, shaded band of width
//! 2c above it, squares for 0-cycles, triangles for 1-cycles and circles
//! for 2-cycles. Essential classes sit on the dashed line at `delta_max`.

use std::fmt::Write;

use paretotopo::PersistenceDiagram;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#1e8449", "#7d3c98"];

pub fn render_diagram(diagram: &PersistenceDiagram, c: Option<f64>, title: &str) -> String {
    let top = if diagram.delta_max > 0.0 { diagram.delta_max } else { 1.0 };
    let plot = SIZE - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + v / top * plot;
    let py = |v: f64| SIZE - MARGIN - v / top * plot;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, SIZE / 2.0, escape(title));

    if let Some(c) = c.filter(|c| *c > 0.0) {
        // band between death = birth and death = birth + 2c, clipped to the plot
        let w = (2.0 * c).min(top);
        let _ = writeln!(
            s,
            r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#9db4d6" fill-opacity="0.45" stroke="none"/>"##,
            px(0.0),
            py(0.0),
            px(top),
            py(top),
            px(top - w),
            py(top),
            px(0.0),
            py(w)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        px(0.0),
        py(0.0),
        px(top),
        py(top)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        px(0.0),
        py(top),
        px(top),
        py(top)
    );
    for i in 0..=4 {
        let v = top * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(v), SIZE - MARGIN + 18.0, tick(v));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 6.0, py(v) + 4.0, tick(v));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">Birth</text>"#, SIZE / 2.0, SIZE - 14.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );

    for p in &diagram.pairs {
        let (x, y) = (px(p.birth), py(p.death.min(top)));
        let color = COLORS[p.dim.min(COLORS.len() - 1)];
        let _ = match p.dim {
            0 => writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="none" stroke="{color}"/>"#,
                x - 3.5,
                y - 3.5
            ),
            1 => writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{color}"/>"#,
                x,
                y - 4.5,
                x - 4.0,
                y + 3.0,
                x + 4.0,
                y + 3.0
            ),
            _ => writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="{color}"/>"#),
        };
    }

    let dims = diagram.maxdim.min(COLORS.len() - 1);
    for d in 0..=dims {
        let y = MARGIN + 16.0 + 16.0 * d as f64;
        let x = SIZE - MARGIN - 70.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{}">{}-cycles</text>"#,
            x + 10.0,
            y + 4.0,
            COLORS[d],
            d
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    t.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use paretotopo::pointset::euclidean_distances;
    use paretotopo::persistence::rips_persistence;
    use paretotopo::Matrix;

    #[test]
    fn markers_per_dimension() {
        let pts: Vec<[f64; 2]> = (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 8.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let dm = euclidean_distances(&Matrix::from_rows(&pts).unwrap());
        let d = rips_persistence(&dm, 1, None).unwrap();
        let svg = render_diagram(&d, Some(0.1), "ring <8>");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect x=").count(), d.of_dim(0).count() + 1);
        assert_eq!(svg.matches("fill=\"none\" stroke=\"#c0392b\"").count(), d.of_dim(1).count());
        assert!(svg.contains("fill-opacity"));
        assert!(svg.contains("ring &lt;8&gt;"));
        assert_eq!(svg, render_diagram(&d, Some(0.1), "ring <8>"));
    }

    #[test]
    fn ticks() {
        assert_eq!(tick(0.5), "0.5");
        assert_eq!(tick(1.0), "1");
        assert_eq!(tick(0.0), "0");
    }
}
