//! Adaptive cubature over planar regions.
//!
//! Discs, sectors and half-discs are covered by exact polar cells; boxes by
//! rectangles; intersections by rectangles whose integrand is clipped to the
//! region at the quadrature nodes. Each cell carries a tensor Gauss–Kronrod
//! (7, 15) rule whose embedded Gauss part gives the error estimate. The worst
//! cell is split first; cells containing a declared hot point are split at that
//! point, which grades the subdivision geometrically toward it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{PlanarRegion, PolarFrame};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod nodes on [-1, 1] with Kronrod and (possibly zero) Gauss weights.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut k = 0;
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[k] = (-XGK[i], WGK[i], wg);
        out[k + 1] = (XGK[i], WGK[i], wg);
        k += 2;
    }
    out[14] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Relative tolerance, in (1e-12, 1e-1).
    pub tol: f64,
    /// Absolute error accepted regardless of the value's size.
    pub abs_floor: f64,
    pub max_cells: usize,
    /// Points toward which subdivision is graded.
    pub hot_points: Vec<Complex64>,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        QuadOptions {
            tol,
            abs_floor: 1e-14,
            max_cells: 400_000,
            hot_points: Vec::new(),
        }
    }

    pub fn with_hot_points(mut self, pts: Vec<Complex64>) -> Self {
        self.hot_points = pts;
        self
    }

    pub fn with_abs_floor(mut self, floor: f64) -> Self {
        self.abs_floor = floor;
        self
    }

    pub fn with_max_cells(mut self, n: usize) -> Self {
        self.max_cells = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 1e-12 && self.tol < 1e-1) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance {} outside (1e-12, 1e-1)",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub cells_used: usize,
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    /// `center + r e^{iθ}` over `r × θ`; `clip` as for rectangles.
    Polar { center: Complex64, clip: bool },
    /// Plain rectangle in `(x, y)`; `clip` multiplies by region membership.
    Rect { clip: bool },
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    u: (f64, f64),
    v: (f64, f64),
    value: Complex64,
    error: f64,
    id: usize,
}

struct Worst(Cell);

impl PartialEq for Worst {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Worst {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&o.0.error)
            .then_with(|| o.0.id.cmp(&self.0.id))
    }
}

struct Integrator<'a, F> {
    region: &'a PlanarRegion,
    f: F,
    shape: Shape,
    rule: [(f64, f64, f64); 15],
    hot: Vec<(f64, f64)>,
}

impl<'a, F: Fn(Complex64) -> Complex64> Integrator<'a, F> {
    fn point(&self, u: f64, v: f64) -> (Complex64, f64) {
        match self.shape {
            Shape::Polar { center, .. } => (center + Complex64::from_polar(u, v), u),
            Shape::Rect { .. } => (Complex64::new(u, v), 1.0),
        }
    }

    fn eval_cell(&self, u: (f64, f64), v: (f64, f64), id: usize) -> Cell {
        let (uc, uh) = (0.5 * (u.0 + u.1), 0.5 * (u.1 - u.0));
        let (vc, vh) = (0.5 * (v.0 + v.1), 0.5 * (v.1 - v.0));
        let clip = matches!(self.shape, Shape::Rect { clip: true } | Shape::Polar { clip: true, .. });
        let mut k = Complex64::new(0.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        for &(xu, wku, wgu) in &self.rule {
            let uu = uc + uh * xu;
            for &(xv, wkv, wgv) in &self.rule {
                let (z, jac) = self.point(uu, vc + vh * xv);
                if clip && !self.region.contains(z) {
                    continue;
                }
                let val = (self.f)(z) * jac;
                k += val * (wku * wkv);
                if wgu != 0.0 && wgv != 0.0 {
                    g += val * (wgu * wgv);
                }
            }
        }
        let scale = uh * vh;
        let value = k * scale;
        let error = ((k - g) * scale).norm();
        Cell { u, v, value, error, id }
    }

    fn split_at(range: (f64, f64), hot: Option<f64>, geometric: bool) -> f64 {
        let (a, b) = range;
        if let Some(t) = hot {
            let w = b - a;
            if t > a + 1e-3 * w && t < b - 1e-3 * w {
                return t;
            }
        }
        if geometric && a > 0.0 && b / a > 4.0 {
            return (a * b).sqrt();
        }
        0.5 * (a + b)
    }

    fn children(&self, c: &Cell) -> [((f64, f64), (f64, f64)); 4] {
        let hot = self
            .hot
            .iter()
            .find(|&&(hu, hv)| hu >= c.u.0 && hu <= c.u.1 && hv >= c.v.0 && hv <= c.v.1);
        let geometric = matches!(self.shape, Shape::Polar { .. }) && !self.hot.is_empty();
        let um = Self::split_at(c.u, hot.map(|h| h.0), geometric);
        let vm = Self::split_at(c.v, hot.map(|h| h.1), false);
        [
            ((c.u.0, um), (c.v.0, vm)),
            ((um, c.u.1), (c.v.0, vm)),
            ((c.u.0, um), (vm, c.v.1)),
            ((um, c.u.1), (vm, c.v.1)),
        ]
    }
}

fn polar_cover(region: &PlanarRegion) -> Option<(PolarFrame, bool)> {
    if let Some(frame) = region.polar_frame() {
        return Some((frame, false));
    }
    if let PlanarRegion::Intersection { parts } = region {
        // a polar part covers the intersection; the other parts clip it
        return parts.iter().find_map(|p| p.polar_frame()).map(|f| (f, true));
    }
    None
}

fn initial_cells(region: &PlanarRegion) -> (Shape, Vec<((f64, f64), (f64, f64))>) {
    if let Some((PolarFrame { center, r, theta }, clip)) = polar_cover(region) {
        let n = ((theta.1 - theta.0) / (PI / 4.0)).ceil().max(1.0) as usize;
        let dt = (theta.1 - theta.0) / n as f64;
        let cells = (0..n)
            .map(|k| (r, (theta.0 + k as f64 * dt, theta.0 + (k + 1) as f64 * dt)))
            .collect();
        return (Shape::Polar { center, clip }, cells);
    }
    let bb = region.bounding_box();
    match region {
        PlanarRegion::Box { .. } => (Shape::Rect { clip: false }, vec![(bb[0], bb[1])]),
        _ => {
            let n = 4;
            let dx = (bb[0].1 - bb[0].0) / n as f64;
            let dy = (bb[1].1 - bb[1].0) / n as f64;
            let mut cells = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    cells.push((
                        (bb[0].0 + a as f64 * dx, bb[0].0 + (a + 1) as f64 * dx),
                        (bb[1].0 + b as f64 * dy, bb[1].0 + (b + 1) as f64 * dy),
                    ));
                }
            }
            (Shape::Rect { clip: true }, cells)
        }
    }
}

/// Integral of a complex-valued `f` over `region`.
pub fn integrate<F>(region: &PlanarRegion, f: F, opts: &QuadOptions) -> Result<QuadResult<Complex64>>
where
    F: Fn(Complex64) -> Complex64,
{
    opts.validate()?;
    region.validate()?;
    if !region.is_bounded() {
        return Err(Error::UnboundedRegion);
    }
    let (shape, init) = initial_cells(region);
    let hot = opts
        .hot_points
        .iter()
        .map(|&p| match shape {
            Shape::Polar { center, .. } => {
                let d = p - center;
                let mut t = d.arg();
                if let Some((frame, _)) = polar_cover(region) {
                    t = crate::geometry::region_unwrap(t, frame.theta.0);
                }
                (d.norm(), t)
            }
            Shape::Rect { .. } => (p.re, p.im),
        })
        .collect();
    let it = Integrator {
        region,
        f,
        shape,
        rule: rule(),
        hot,
    };

    let mut next_id = 0;
    let mut heap = BinaryHeap::new();
    for (u, v) in init {
        heap.push(Worst(it.eval_cell(u, v, next_id)));
        next_id += 1;
    }
    let totals = |heap: &BinaryHeap<Worst>| {
        // ordered by id so the reduction does not depend on heap layout
        let mut cells: Vec<&Cell> = heap.iter().map(|w| &w.0).collect();
        cells.sort_by_key(|c| c.id);
        let v: Complex64 = cells.iter().map(|c| c.value).sum();
        let e: f64 = cells.iter().map(|c| c.error).sum();
        (v, e)
    };
    let (first_value, _) = totals(&heap);
    let mut sum_err: f64 = heap.iter().map(|w| w.0.error).sum();
    let mut running: Complex64 = first_value;
    let mut since_resync = 0usize;
    loop {
        if since_resync >= 256 {
            let (v, e) = totals(&heap);
            running = v;
            sum_err = e;
            since_resync = 0;
        }
        let value = running;
        let err = sum_err;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::QuadratureDivergence { value: value.norm() });
        }
        if value.norm() > 1e8 * (first_value.norm() + 1.0) {
            return Err(Error::QuadratureDivergence { value: value.norm() });
        }
        if err <= (opts.tol * value.norm()).max(opts.abs_floor) {
            break;
        }
        if next_id + 4 > opts.max_cells {
            let (v, e) = totals(&heap);
            return Err(Error::QuadratureNonConvergence {
                value: v.norm(),
                error_estimate: e,
                cells: heap.len(),
            });
        }
        let Worst(worst) = heap.pop().expect("nonempty cell heap");
        running -= worst.value;
        sum_err -= worst.error;
        for (u, v) in it.children(&worst) {
            let c = it.eval_cell(u, v, next_id);
            next_id += 1;
            running += c.value;
            sum_err += c.error;
            heap.push(Worst(c));
        }
        since_resync += 1;
    }
    let (v, e) = totals(&heap);
    Ok(QuadResult {
        value: v,
        error_estimate: e.max(0.0),
        cells_used: heap.len(),
    })
}

/// Integral of a real-valued `f` over `region`.
pub fn integrate_real<F>(region: &PlanarRegion, f: F, opts: &QuadOptions) -> Result<QuadResult<f64>>
where
    F: Fn(Complex64) -> f64,
{
    let r = integrate(region, |z| Complex64::new(f(z), 0.0), opts)?;
    Ok(QuadResult {
        value: r.value.re,
        error_estimate: r.error_estimate,
        cells_used: r.cells_used,
    })
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult<f64>>
where
    F: Fn(f64) -> f64,
{
    let rule = rule();
    let eval = |lo: f64, hi: f64| {
        let (c, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let (mut k, mut g) = (0.0, 0.0);
        for &(x, wk, wg) in &rule {
            let v = f(c + hw * x);
            k += wk * v;
            g += wg * v;
        }
        (k * hw, ((k - g) * hw).abs())
    };
    let mut intervals = vec![(a, b, eval(a, b))];
    loop {
        let total: f64 = intervals.iter().map(|s| s.2 .0).sum();
        let err: f64 = intervals.iter().map(|s| s.2 .1).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureDivergence { value: total });
        }
        if err <= (tol * total.abs()).max(1e-300) || intervals.len() > 20_000 {
            if err > (tol * total.abs()).max(1e-300) {
                return Err(Error::QuadratureNonConvergence {
                    value: total,
                    error_estimate: err,
                    cells: intervals.len(),
                });
            }
            return Ok(QuadResult {
                value: total,
                error_estimate: err,
                cells_used: intervals.len(),
            });
        }
        let (wi, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = intervals.swap_remove(wi);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, eval(lo, mid)));
        intervals.push((mid, hi, eval(mid, hi)));
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
}

/// Gauss–Legendre nodes and weights by Newton iteration on `P_n`; a test oracle.
#[cfg(test)]
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disc_area() {
        let r = integrate_real(&PlanarRegion::centered_disc(1.0), |_| 1.0, &QuadOptions::new(1e-8)).unwrap();
        assert!((r.value - PI).abs() < 1e-10 * PI);
        assert!(r.error_estimate >= 0.0);
    }

    #[test]
    fn log_divergent_sector() {
        let delta = 1e-3;
        let region = PlanarRegion::annular_sector(delta, 1.0, -2.0 * PI / 3.0, -PI / 3.0);
        let opts = QuadOptions::new(1e-6).with_hot_points(vec![Complex64::new(0.0, 0.0)]);
        let r = integrate_real(&region, |z| 1.0 / z.norm_sqr(), &opts).unwrap();
        let exact = PI / 3.0 * (1.0 / delta).ln();
        assert!((r.value - exact).abs() <= 1e-6 * exact, "{} vs {exact}", r.value);
    }

    #[test]
    fn gaussian_on_half_disc_matches_tensor_gauss() {
        // oracle: 60x60 tensor Gauss–Legendre in polar coordinates
        let gl = gauss_legendre(60);
        let f = |z: Complex64| (-z.norm_sqr()).exp() * (1.0 + z.re * z.im);
        let mut oracle = 0.0;
        for &(xr, wr) in &gl {
            let r = 0.5 * (xr + 1.0);
            for &(xt, wt) in &gl {
                let t = -PI * 0.5 * (xt + 1.0);
                oracle += wr * wt * 0.5 * (PI * 0.5) * r * f(Complex64::from_polar(r, t));
            }
        }
        let r = integrate_real(
            &PlanarRegion::lower_half_disc(1.0),
            f,
            &QuadOptions::new(1e-8),
        )
        .unwrap();
        assert!((r.value - oracle).abs() < 1e-7, "{} vs {oracle}", r.value);
    }

    #[test]
    fn additivity_over_sector_split() {
        let h = PlanarRegion::lower_half_disc(1.0);
        let w1 = PlanarRegion::sector(1.0, -2.0 * PI / 3.0, -PI / 3.0);
        let left = PlanarRegion::sector(1.0, -PI, -2.0 * PI / 3.0);
        let right = PlanarRegion::sector(1.0, -PI / 3.0, 0.0);
        let f = |z: Complex64| (z.re * 3.0).cos() + z.im * z.im;
        let tol = 1e-9;
        let o = QuadOptions::new(tol);
        let whole = integrate_real(&h, f, &o).unwrap().value;
        let parts: f64 = [w1, left, right]
            .iter()
            .map(|r| integrate_real(r, f, &o).unwrap().value)
            .sum();
        assert!((whole - parts).abs() <= 2.0 * tol * whole.abs());
    }

    #[test]
    fn monotone_under_inclusion() {
        let w1 = PlanarRegion::sector(0.5, -2.0 * PI / 3.0, -PI / 3.0);
        let w2 = PlanarRegion::sector(1.0, -4.0 * PI / 3.0, PI / 3.0);
        let f = |z: Complex64| 1.0 / (1.0 + z.norm_sqr());
        let o = QuadOptions::new(1e-8);
        let a = integrate_real(&w1, f, &o).unwrap();
        let b = integrate_real(&w2, f, &o).unwrap();
        assert!(a.value <= b.value + a.error_estimate + b.error_estimate);
    }

    #[test]
    fn tighter_tolerance_does_not_worsen_anchor() {
        let region = PlanarRegion::centered_disc(1.0);
        let exact = PI * (1.0 - (-1.0f64).exp());
        let mut prev = f64::INFINITY;
        for tol in [1e-4, 5e-5, 2.5e-5, 1e-6, 1e-8] {
            let v = integrate_real(&region, |z| (-z.norm_sqr()).exp(), &QuadOptions::new(tol))
                .unwrap()
                .value;
            let e = (v - exact).abs();
            assert!(e <= prev.max(1e-15), "tol {tol}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let region = PlanarRegion::intersection(vec![
            PlanarRegion::centered_disc(1.0),
            PlanarRegion::rect((-1.0, 0.3), (-1.0, 1.0)),
        ]);
        let o = QuadOptions::new(1e-11).with_max_cells(64);
        assert!(matches!(
            integrate_real(&region, |_| 1.0, &o),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_tolerance() {
        let r = integrate_real(&PlanarRegion::centered_disc(1.0), |_| 1.0, &QuadOptions::new(0.5));
        assert!(r.is_err());
    }

    #[test]
    fn divergent_integrand_is_signalled() {
        let region = PlanarRegion::lower_half_disc(1.0);
        let o = QuadOptions::new(1e-8).with_hot_points(vec![Complex64::new(0.0, 0.0)]);
        let r = integrate_real(&region, |z| 1.0 / z.norm_sqr().powi(2), &o);
        assert!(matches!(
            r,
            Err(Error::QuadratureDivergence { .. }) | Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn one_dimensional_rule() {
        let r = integrate_1d(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }
}
