//! Static SVG rendering of the Poincaré disk.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::fuchsian::octagon;
use crate::geom::{ccw, C64};
use crate::mcg::earthquake::Earthquake;

/// Accumulates SVG elements on a disk of the given pixel radius.
#[derive(Debug, Clone)]
pub struct DiskPlot {
    radius: f64,
    margin: f64,
    body: String,
}

impl DiskPlot {
    pub fn new(radius: f64) -> Self {
        let mut p = Self { radius, margin: 20.0, body: String::new() };
        let c = p.center();
        let _ = writeln!(p.body, r#"<circle cx="{c:.2}" cy="{c:.2}" r="{radius:.2}" fill="white" stroke="black" stroke-width="1"/>"#);
        p
    }

    fn center(&self) -> f64 {
        self.radius + self.margin
    }

    fn xy(&self, z: C64) -> (f64, f64) {
        (self.center() + self.radius * z.re, self.center() - self.radius * z.im)
    }

    /// Circle orthogonal to the unit circle through two boundary angles, as (center, radius).
    fn orthogonal_circle(a: f64, b: f64) -> Option<(C64, f64)> {
        let half = ccw(a, b).min(ccw(b, a)) / 2.0;
        if (PI / 2.0 - half).abs() < 1e-9 {
            return None;
        }
        let mid = if ccw(a, b) <= PI { a + half } else { b + half };
        Some((C64::from_polar(1.0 / half.cos(), mid), half.tan()))
    }

    fn arc_path(&mut self, p: C64, q: C64, circle: Option<(C64, f64)>, style: &str) {
        let (x0, y0) = self.xy(p);
        let (x1, y1) = self.xy(q);
        let mut body = String::new();
        match circle {
            None => {
                let _ = writeln!(body, r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" {style}/>"#);
            }
            Some((c, r)) => {
                let (cx, cy) = self.xy(c);
                let cross = (x0 - cx) * (y1 - cy) - (y0 - cy) * (x1 - cx);
                let sweep = u8::from(cross > 0.0);
                let rr = r * self.radius;
                let _ = writeln!(body, r#"<path d="M {x0:.3} {y0:.3} A {rr:.3} {rr:.3} 0 0 {sweep} {x1:.3} {y1:.3}" fill="none" {style}/>"#);
            }
        }
        self.body.push_str(&body);
    }

    /// Full geodesic between two boundary angles.
    pub fn geodesic(&mut self, a: f64, b: f64, color: &str, width: f64) {
        let style = format!(r#"stroke="{color}" stroke-width="{width}""#);
        self.arc_path(C64::from_polar(1.0, a), C64::from_polar(1.0, b), Self::orthogonal_circle(a, b), &style);
    }

    /// The fundamental octagon.
    pub fn octagon(&mut self, color: &str) {
        let oct = octagon();
        let v = oct.vertices();
        let sides = oct.side_geodesics();
        for k in 0..8 {
            let g = &sides[k];
            let circle = Self::orthogonal_circle(g.start.angle(), g.end.angle());
            let style = format!(r#"stroke="{color}" stroke-width="1.5""#);
            self.arc_path(v[(k + 7) % 8], v[k], circle, &style);
        }
    }

    /// Boundary interval drawn just outside the disk.
    pub fn boundary_arc(&mut self, start: f64, width: f64, color: &str) {
        let r = 1.0 + 6.0 / self.radius;
        let p = C64::from_polar(r, start);
        let q = C64::from_polar(r, start + width);
        let (x0, y0) = self.xy(p);
        let (x1, y1) = self.xy(q);
        let large = u8::from(width > PI);
        let rr = r * self.radius;
        let _ = writeln!(
            self.body,
            r#"<path d="M {x0:.3} {y0:.3} A {rr:.3} {rr:.3} 0 {large} 0 {x1:.3} {y1:.3}" fill="none" stroke="{color}" stroke-width="4"/>"#
        );
    }

    pub fn point(&mut self, z: C64, color: &str, size: f64) {
        let (x, y) = self.xy(z);
        let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{size}" fill="{color}"/>"#);
    }

    pub fn boundary_point(&mut self, theta: f64, color: &str, size: f64) {
        self.point(C64::from_polar(1.0, theta), color, size);
    }

    pub fn label(&mut self, text: &str) {
        let y = 2.0 * self.center() + 14.0;
        let _ = writeln!(self.body, r#"<text x="{m}" y="{y:.1}" font-family="monospace" font-size="12">{text}</text>"#, m = self.margin);
    }

    /// Octagon, lifts of the twist curve wider than `min_width`, and the affected-region arcs.
    pub fn earthquake(&mut self, quake: &Earthquake, min_width: f64) {
        self.octagon("#444");
        for l in quake.lifts() {
            if l.arc_width >= min_width {
                let color = if l.depth == 1 { "#c0392b" } else { "#e59866" };
                self.geodesic(l.geodesic.start.angle(), l.geodesic.end.angle(), color, if l.depth == 1 { 1.2 } else { 0.6 });
            }
        }
        for r in quake.regions() {
            self.boundary_arc(r.arc_start, r.arc_width, "#2e86c1");
        }
        self.point(C64::new(0.0, 0.0), "black", 2.5);
    }

    pub fn finish(&self) -> String {
        let size = 2.0 * self.center();
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {size:.0} {h:.0}\">\n{}</svg>\n",
            self.body,
            h = size + 24.0
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_octagon() {
        let mut p = DiskPlot::new(200.0);
        p.octagon("black");
        p.geodesic(0.0, PI, "red", 1.0);
        p.geodesic(0.2, 1.0, "red", 1.0);
        let s = p.finish();
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("<path").count(), 9);
        assert_eq!(s.matches("<line").count(), 1);
    }
}
