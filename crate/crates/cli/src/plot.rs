//! Minimal SVG rendering of a circle map on the unit square.

use std::fmt::Write;

use pwshadow::circlemap::Lift;

const SIZE: f64 = 600.0;
const PAD: f64 = 30.0;

fn sx(x: f64) -> f64 {
    PAD + x * SIZE
}

fn sy(y: f64) -> f64 {
    PAD + (1.0 - y) * SIZE
}

/// Pieces of the graph of `l` reduced mod 1, split where the lift crosses an integer.
fn graph_pieces(l: &Lift) -> Vec<((f64, f64), (f64, f64))> {
    let xs: Vec<f64> = l.breakpoints().iter().map(|x| x.to_f64()).collect();
    let ys: Vec<f64> = l.values().iter().map(|y| y.to_f64()).collect();
    let mut out = Vec::new();
    for k in 0..xs.len() - 1 {
        let (x0, x1, y0, y1) = (xs[k], xs[k + 1], ys[k], ys[k + 1]);
        let (lo, hi) = (y0.min(y1), y0.max(y1));
        let mut cuts = vec![x0];
        for n in (lo.floor() as i64 + 1)..=(hi.ceil() as i64 - 1) {
            cuts.push(x0 + (n as f64 - y0) / (y1 - y0) * (x1 - x0));
        }
        cuts.push(x1);
        if y1 < y0 {
            let n = cuts.len();
            cuts[1..n - 1].reverse();
        }
        for w in cuts.windows(2) {
            let at = |x: f64| y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            let mid = at(0.5 * (w[0] + w[1])).floor();
            out.push(((w[0], at(w[0]) - mid), (w[1], at(w[1]) - mid)));
        }
    }
    out
}

/// Coordinates are written at full `f64` precision; `marks` are drawn as vertical grid lines.
pub fn render(title: &str, maps: &[(&Lift, &str)], marks: &[f64]) -> String {
    let full = SIZE + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#);
    let _ = writeln!(s, r#"<title>{title}</title>"#);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#);
    let _ = writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb" stroke-dasharray="4 4"/>"##, sx(0.0), sy(0.0), sx(1.0), sy(1.0));
    for m in marks {
        let _ = writeln!(s, r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ddd"/>"##, sx(*m), sy(0.0), sy(1.0));
    }
    for (l, color) in maps {
        for ((x0, y0), (x1, y1)) in graph_pieces(l) {
            let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.2"/>"#, sx(x0), sy(y0), sx(x1), sy(y1));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pwshadow::PiRational;

    #[test]
    fn doubling_splits_into_two_pieces_mod_one() {
        let l = Lift::new(vec![PiRational::zero(), PiRational::one()], vec![PiRational::zero(), PiRational::integer(2)], 2).unwrap();
        let pieces = graph_pieces(&l);
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|((_, a), (_, b))| (0.0..=1.0).contains(a) && (0.0..=1.0).contains(b)));
    }
}
