//! SVG trajectory plots and PGM image strips.

use pdls_core::degrade::ImageGrid;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 30.0;
const COLOURS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

/// One polyline per named trajectory plus a marker at every node, drawn in
/// the plane of the first two coordinates.
pub fn trajectory_svg(paths: &[(&str, &[Vec<f64>])], anchors: &[Vec<f64>]) -> String {
    let xy = |s: &[f64]| (s[0], s.get(1).copied().unwrap_or(0.0));
    let points: Vec<(f64, f64)> = paths
        .iter()
        .flat_map(|(_, states)| states.iter().map(|s| xy(s)))
        .chain(anchors.iter().map(|a| xy(a)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |(x, y): (f64, f64)| (MARGIN + (x - x0) * scale, SIZE - MARGIN - (y - y0) * scale);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for a in anchors {
        let (cx, cy) = map(xy(a));
        svg.push_str(&format!(
            "<rect class=\"anchor\" x=\"{:.2}\" y=\"{:.2}\" width=\"6\" height=\"6\" fill=\"black\"/>\n",
            cx - 3.0,
            cy - 3.0
        ));
    }
    for (i, (name, states)) in paths.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = states
            .iter()
            .map(|s| {
                let (px, py) = map(xy(s));
                format!("{px:.2},{py:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"{name}\" points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
        for s in states.iter() {
            let (px, py) = map(xy(s));
            svg.push_str(&format!(
                "<circle class=\"{name}\" cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2\" fill=\"{colour}\"/>\n"
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"12\" fill=\"{colour}\">{name}</text>\n",
            14.0 + 14.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Rows of images side by side, separated by one mid-grey pixel.
pub fn image_strip(rows: &[Vec<ImageGrid>]) -> Option<ImageGrid> {
    let first = rows.first()?.first()?;
    let (w, h) = (first.width(), first.height());
    let cols = rows.iter().map(Vec::len).max()?;
    let (sw, sh) = (cols * (w + 1) - 1, rows.len() * (h + 1) - 1);
    let mut px = vec![0.5; sw * sh];
    for (r, row) in rows.iter().enumerate() {
        for (c, img) in row.iter().enumerate() {
            for y in 0..h.min(img.height()) {
                for x in 0..w.min(img.width()) {
                    px[(r * (h + 1) + y) * sw + c * (w + 1) + x] = img.get(x, y);
                }
            }
        }
    }
    ImageGrid::new(sw, sh, px).ok()
}
