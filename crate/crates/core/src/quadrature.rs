//! Quadrature rules used along BPS rays and for period integrals.
//!
//! Ray integrals are written in the logarithmic variable `s`, where the
//! twistor kernel becomes `coth((s - w)/2)` with a complex pole at `w`. The
//! panel rule below evaluates such Cauchy-type integrals accurately even when
//! `w` sits on or next to the contour, by subtracting the panel interpolant
//! at the pole.

use num::complex::Complex64 as C64;
use num::Zero;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Which side of a contour a boundary value is taken from.
///
/// `Plus` is the counterclockwise side of an outgoing ray (positive imaginary
/// part of `w`), `Minus` the clockwise side. `Auto` means `w` is off the
/// contour and no continuation is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
    Auto,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
            Side::Auto => 0.0,
        }
    }
}

/// Composite Gauss-Legendre rule on [-s_max, s_max] with equal panels.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelRule {
    pub s_max: f64,
    pub panels: usize,
    pub per_panel: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    local_nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl PanelRule {
    pub fn new(s_max: f64, panels: usize, per_panel: usize) -> Self {
        let (x, w) = gauss_legendre(per_panel);
        let h = 2.0 * s_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let a = -s_max + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        // barycentric weights for Gauss-Legendre points
        let bary = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(j, (xi, wi))| {
                let s = ((1.0 - xi * xi) * wi).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        PanelRule {
            s_max,
            panels,
            per_panel,
            nodes,
            weights,
            local_nodes: x,
            bary,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_width(&self) -> f64 {
        2.0 * self.s_max / self.panels as f64
    }

    fn panel_bounds(&self, p: usize) -> (f64, f64) {
        let h = self.panel_width();
        let a = -self.s_max + p as f64 * h;
        (a, a + h)
    }

    /// Plain quadrature of `f` sampled at the nodes.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        values
            .iter()
            .zip(&self.weights)
            .fold(C64::zero(), |acc, (v, w)| acc + v * *w)
    }

    /// Barycentric interpolant of panel `p` evaluated at a complex point.
    fn interpolate(&self, p: usize, values: &[C64], w: C64) -> C64 {
        let (a, b) = self.panel_bounds(p);
        let t = (w - 0.5 * (a + b)) * (2.0 / (b - a));
        let base = p * self.per_panel;
        let mut num = C64::zero();
        let mut den = C64::zero();
        for j in 0..self.per_panel {
            let d = t - self.local_nodes[j];
            if d.norm() < 1e-300 {
                return values[base + j];
            }
            let c = self.bary[j] / d;
            num += c * values[base + j];
            den += c;
        }
        num / den
    }

    /// ∫_{-s_max}^{s_max} f(s) coth((s - w)/2) ds for f sampled at the nodes.
    ///
    /// `w` must have imaginary part in (-π, π]. Panels close to `w` use
    /// singularity subtraction with their own interpolant; `side` selects the
    /// analytic continuation from one side when `w` is on or across the panel.
    pub fn coth_integral(&self, values: &[C64], w: C64, side: Side) -> C64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let h = self.panel_width();
        let near = |p: usize| {
            let (a, b) = self.panel_bounds(p);
            w.im.abs() < h && w.re > a - h && w.re < b + h
        };
        // one subtraction constant for every near panel, so that a pole on a
        // panel boundary leaves no endpoint logarithms behind
        let home = (((w.re + self.s_max) / h).floor().max(0.0) as usize).min(self.panels - 1);
        let pw = if near(home) {
            self.interpolate(home, values, w)
        } else {
            C64::zero()
        };
        let mut total = C64::zero();
        let mut span: Option<(f64, f64)> = None;
        for p in 0..self.panels {
            let base = p * self.per_panel;
            if !near(p) {
                for j in 0..self.per_panel {
                    let k = base + j;
                    total += values[k] * coth_half(self.nodes[k] - w) * self.weights[k];
                }
                continue;
            }
            let (a, b) = self.panel_bounds(p);
            span = Some(span.map_or((a, b), |(lo, _)| (lo, b)));
            for j in 0..self.per_panel {
                let k = base + j;
                let d = self.nodes[k] - w;
                let term = if d.norm() < 1e-9 {
                    // removable point: (f(s) - f(w)) coth((s-w)/2) → 2 f'(w)
                    let eps = 1e-6;
                    let fp =
                        (self.interpolate(p, values, w + eps) - self.interpolate(p, values, w - eps)) / (2.0 * eps);
                    fp * 2.0
                } else {
                    (values[k] - pw) * coth_half(d)
                };
                total += term * self.weights[k];
            }
        }
        if let Some((a, b)) = span {
            total += pw * coth_panel_integral(a, b, w, side);
        }
        total
    }
}

/// coth(z/2) for complex z.
pub fn coth_half(z: C64) -> C64 {
    // coth(z/2) = (1 + e^{-z}) / (1 - e^{-z}) for Re z ≥ 0, symmetric otherwise
    if z.re >= 0.0 {
        let e = (-z).exp();
        (1.0 + e) / (1.0 - e)
    } else {
        let e = z.exp();
        -(1.0 + e) / (1.0 - e)
    }
}

/// log sinh(z) on the principal branch, with a directed boundary value when
/// `z` lies on the cut of the logarithm.
fn log_sinh(z: C64, side: Side) -> C64 {
    // log sinh z = z - ln 2 + log(1 - e^{-2z}) for Re z > 0
    if z.re > 0.0 {
        return z - std::f64::consts::LN_2 + (1.0 - (-2.0 * z).exp()).ln();
    }
    let v = z.sinh();
    if v.im == 0.0 && v.re < 0.0 {
        // z approached from Im w = +0 means Im z = -0 here
        let arg = match side {
            Side::Plus => -std::f64::consts::PI,
            Side::Minus | Side::Auto => std::f64::consts::PI,
        };
        return C64::new(v.re.abs().ln(), arg);
    }
    if z.re < 0.0 {
        // sinh z = -sinh(-z); keep the principal branch via the sign of Im
        let m = -z;
        let l = m - std::f64::consts::LN_2 + (1.0 - (-2.0 * m).exp()).ln();
        let shift = if v.im > 0.0 || (v.im == 0.0 && v.re > 0.0) {
            std::f64::consts::PI
        } else {
            -std::f64::consts::PI
        };
        let mut out = l + C64::new(0.0, shift);
        // bring into (-π, π]
        while out.im > std::f64::consts::PI {
            out.im -= 2.0 * std::f64::consts::PI;
        }
        while out.im <= -std::f64::consts::PI {
            out.im += 2.0 * std::f64::consts::PI;
        }
        return out;
    }
    v.ln()
}

/// ∫_a^b coth((s - w)/2) ds with the continuation chosen by `side`.
fn coth_panel_integral(a: f64, b: f64, w: C64, side: Side) -> C64 {
    let upper = log_sinh((b - w) * 0.5, side);
    let lower = log_sinh((a - w) * 0.5, side);
    let mut val = (upper - lower) * 2.0;
    // continuation across the panel from the requested side
    if w.re > a && w.re < b {
        let from = side.sign();
        if from > 0.0 && w.im < 0.0 {
            val += C64::new(0.0, 4.0 * std::f64::consts::PI);
        } else if from < 0.0 && w.im > 0.0 {
            val -= C64::new(0.0, 4.0 * std::f64::consts::PI);
        }
    }
    val
}

// Gauss-Kronrod 7-15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).norm())
}

/// Globally adaptive Gauss-Kronrod (7,15) quadrature of a complex integrand.
///
/// Returns the integral and the summed error estimate.
pub fn adaptive_gk15<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> (C64, f64) {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let (sum, err) = intervals
            .iter()
            .fold((C64::zero(), 0.0), |(s, er), iv| (s + iv.2, er + iv.3));
        if err <= abs_tol || intervals.len() >= max_intervals {
            return (sum, err);
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}
