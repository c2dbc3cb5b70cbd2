//! Minimal SVG writer for paths and trees.

use std::fmt::Write as _;

use num_complex::Complex64;

pub struct Svg {
    min: Complex64,
    max: Complex64,
    scale: f64,
    body: String,
}

impl Svg {
    /// Canvas covering the box `min..max` (plane coordinates, y up),
    /// drawn `scale` pixels per unit.
    pub fn new(min: Complex64, max: Complex64, scale: f64) -> Self {
        Svg { min, max, scale, body: String::new() }
    }

    pub fn fitting<'a>(points: impl IntoIterator<Item = &'a Complex64>, margin: f64, width_px: f64) -> Self {
        let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        if !lo.re.is_finite() {
            lo = Complex64::new(0.0, 0.0);
            hi = Complex64::new(1.0, 1.0);
        }
        let m = Complex64::new(margin, margin);
        let (lo, hi) = (lo - m, hi + m);
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-9);
        Svg::new(lo, hi, width_px / span)
    }

    fn px(&self, p: Complex64) -> (f64, f64) {
        ((p.re - self.min.re) * self.scale, (self.max.im - p.im) * self.scale)
    }

    pub fn polyline(&mut self, pts: &[Complex64], stroke: &str, width: f64) {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.px(p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{d}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-linejoin="round"/>"#
        );
    }

    pub fn segments(&mut self, segs: &[(Complex64, Complex64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for &(a, b) in segs {
            let (x0, y0) = self.px(a);
            let (x1, y1) = self.px(b);
            let _ = write!(d, "M{x0:.2} {y0:.2}L{x1:.2} {y1:.2}");
        }
        let _ = writeln!(self.body, r#"<path d="{d}" stroke="{stroke}" stroke-width="{width}" stroke-linecap="round"/>"#);
    }

    pub fn circle(&mut self, c: Complex64, r_units: f64, stroke: &str) {
        let (x, y) = self.px(c);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="{stroke}" stroke-width="1"/>"#,
            r_units * self.scale
        );
    }

    pub fn dot(&mut self, c: Complex64, r_px: f64, fill: &str) {
        let (x, y) = self.px(c);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r_px}" fill="{fill}"/>"#);
    }

    /// Document text; `stamp` adds a generation-time comment.
    pub fn finish(&self, stamp: bool) -> String {
        let w = (self.max.re - self.min.re) * self.scale;
        let h = (self.max.im - self.min.im) * self.scale;
        let mut s = format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
        );
        s.push('\n');
        if stamp {
            let t = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(s, "<metadata>generated at unix time {t}</metadata>");
        }
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}
