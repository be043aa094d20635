//! Adaptive Gauss–Kronrod quadrature in one and two dimensions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl Quad {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { value: self.value * s, error: self.error * s.abs(), evals: self.evals }
    }
}

impl std::ops::Add for Quad {
    type Output = Quad;

    fn add(self, o: Quad) -> Quad {
        Quad { value: self.value + o.value, error: self.error + o.error, evals: self.evals + o.evals }
    }
}

// 15-point Kronrod nodes (non-negative half) and weights; odd indices are the 7-point Gauss nodes.
const XK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

// 7-point Kronrod extension of 3-point Gauss on [-1, 1], full node list.
const X7: [f64; 7] = [
    -0.960491268708020283423507092629080,
    -0.774596669241483377035853079956480,
    -0.434243749346802558002071502844628,
    0.0,
    0.434243749346802558002071502844628,
    0.774596669241483377035853079956480,
    0.960491268708020283423507092629080,
];
const W7: [f64; 7] = [
    0.104656226026467265193823857192073,
    0.268488089868333440728572280012469,
    0.401397414775962222905051818618432,
    0.450916538658474142345110087045571,
    0.401397414775962222905051818618432,
    0.268488089868333440728572280012469,
    0.104656226026467265193823857192073,
];
const G3: [f64; 7] = [0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0, 0.0, 5.0 / 9.0, 0.0];

/// One GK15 panel: (Kronrod value, |Kronrod - Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WK15[7];
    let mut rg = fc * WG7[3];
    for j in 0..7 {
        let x = h * XK15[j];
        let s = f(c - x) + f(c + x);
        rk += WK15[j] * s;
        if j % 2 == 1 {
            rg += WG7[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive GK15 on `[a, b]`, starting from `panels` equal pieces.
pub fn adaptive_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, panels: usize, max_evals: usize) -> Quad {
    if a == b {
        return Quad::zero();
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 4);
    let mut evals = 0;
    let mut finished = Quad::zero();
    let mut total = 0.0;
    for i in 0..panels {
        let x0 = a + width * i as f64;
        let x1 = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (value, error) = gk15(&mut f, x0, x1);
        evals += 15;
        total += error;
        heap.push(Seg { a: x0, b: x1, value, error });
    }
    while total > tol && evals < max_evals {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) || (seg.b - seg.a) < 1e-14 * (b - a).abs() {
            finished.value += seg.value;
            finished.error += seg.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        evals += 30;
        total += e1 + e2 - seg.error;
        heap.push(Seg { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Seg { a: mid, b: seg.b, value: v2, error: e2 });
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = segs.iter().map(|s| s.value).sum::<f64>() + finished.value;
    let error = segs.iter().map(|s| s.error).sum::<f64>() + finished.error;
    Quad { value, error, evals }
}

/// Axis-aligned parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    /// Tag passed back to the integrand and error floor (piece index).
    pub tag: usize,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, tag: usize) -> Self {
        Self { x0, x1, y0, y1, tag }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Splits into an `nx × ny` grid.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<Rect> {
        let mut out = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let x0 = self.x0 + (self.x1 - self.x0) * i as f64 / nx as f64;
                let x1 = self.x0 + (self.x1 - self.x0) * (i + 1) as f64 / nx as f64;
                let y0 = self.y0 + (self.y1 - self.y0) * j as f64 / ny as f64;
                let y1 = self.y0 + (self.y1 - self.y0) * (j + 1) as f64 / ny as f64;
                out.push(Rect::new(x0, x1, y0, y1, self.tag));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    rect: Rect,
    value: f64,
    error: f64,
    split_x: bool,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn tensor_cell<F, L>(f: &mut F, floor: &L, r: Rect) -> Cell
where
    F: FnMut(f64, f64, usize) -> f64,
    L: Fn(&Rect) -> f64,
{
    let cx = 0.5 * (r.x0 + r.x1);
    let hx = 0.5 * (r.x1 - r.x0);
    let cy = 0.5 * (r.y0 + r.y1);
    let hy = 0.5 * (r.y1 - r.y0);
    let mut kk = 0.0;
    let mut gk = 0.0;
    let mut kg = 0.0;
    for i in 0..7 {
        let x = cx + hx * X7[i];
        let mut row_k = 0.0;
        let mut row_g = 0.0;
        for j in 0..7 {
            let v = f(x, cy + hy * X7[j], r.tag);
            row_k += W7[j] * v;
            row_g += G3[j] * v;
        }
        kk += W7[i] * row_k;
        gk += G3[i] * row_k;
        kg += W7[i] * row_g;
    }
    let s = hx * hy;
    let ex = ((kk - gk) * s).abs();
    let ey = ((kk - kg) * s).abs();
    let fl = floor(&r);
    let mut error = ex + ey;
    let mut split_x = ex >= ey;
    if fl > error {
        error = fl;
        split_x = false;
    }
    Cell { rect: r, value: kk * s, error, split_x }
}

/// Adaptive tensor-product Kronrod (3/7) quadrature over a union of rectangles.
///
/// `floor(rect)` is a lower bound imposed on each cell's error estimate; cells
/// whose floor dominates are split along `y`.
pub fn adaptive_2d<F, L>(mut f: F, rects: &[Rect], tol: f64, floor: L, max_evals: usize) -> Quad
where
    F: FnMut(f64, f64, usize) -> f64,
    L: Fn(&Rect) -> f64,
{
    let mut heap = BinaryHeap::with_capacity(rects.len() * 8);
    let mut evals = 0;
    let mut total = 0.0;
    for r in rects {
        let c = tensor_cell(&mut f, &floor, *r);
        evals += 49;
        total += c.error;
        heap.push(c);
    }
    let mut finished = Quad::zero();
    while total > tol && evals < max_evals {
        let Some(c) = heap.pop() else { break };
        let r = c.rect;
        let (a, b) = if c.split_x {
            let m = 0.5 * (r.x0 + r.x1);
            (Rect { x1: m, ..r }, Rect { x0: m, ..r })
        } else {
            let m = 0.5 * (r.y0 + r.y1);
            (Rect { y1: m, ..r }, Rect { y0: m, ..r })
        };
        if (r.x1 - r.x0).min(r.y1 - r.y0) < 1e-15 {
            finished.value += c.value;
            finished.error += c.error;
            continue;
        }
        let ca = tensor_cell(&mut f, &floor, a);
        let cb = tensor_cell(&mut f, &floor, b);
        evals += 98;
        total += ca.error + cb.error - c.error;
        heap.push(ca);
        heap.push(cb);
        if heap.len() % 1024 == 0 {
            total = heap.iter().map(|c| c.error).sum::<f64>() + finished.error;
        }
    }
    let mut cells = heap.into_vec();
    cells.sort_by(|p, q| {
        (p.rect.tag, p.rect.x0, p.rect.y0).partial_cmp(&(q.rect.tag, q.rect.x0, q.rect.y0)).unwrap_or(Ordering::Equal)
    });
    let value = cells.iter().map(|c| c.value).sum::<f64>() + finished.value;
    let error = cells.iter().map(|c| c.error).sum::<f64>() + finished.error;
    Quad { value, error, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_polynomial_and_exp() {
        let q = adaptive_1d(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12, 1, 10_000);
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let q = adaptive_1d(|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-12, 1, 100_000);
        assert!((q.value - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn kronrod_weights_sum() {
        assert!((W7.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((G3.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let s: f64 = 2.0 * WK15[..7].iter().sum::<f64>() + WK15[7];
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_d_gaussian() {
        let r = [Rect::new(-5.0, 5.0, -5.0, 5.0, 0)];
        let q = adaptive_2d(|x: f64, y: f64, _| (-(x * x + 2.0 * y * y)).exp(), &r, 1e-10, |_| 0.0, 1_000_000);
        let exact = std::f64::consts::PI / 2f64.sqrt();
        assert!((q.value - exact).abs() < 1e-9, "{}", q.value);
    }
}
