//! The Dunkl transform and the translation/convolution structure it induces.
//!
//! Forward transform: (F f)(xi) = c_lambda int f(x) E(-i x xi) |x|^(2 lambda) dx
//! over the (compact) support of f. The inverse carries E(+i x xi) against the
//! same weight. Translation is spectral,
//!
//!   tau_y f(x) = c_lambda int (F f)(xi) E(i x xi) E(i y xi) |xi|^(2 lambda) d xi,
//!
//! and convolution integrates f against the translated reflection of g. These
//! spectral paths are reserved for smooth profiles; atoms go through the
//! closed kernels in `kernels` instead.
//!
//! Quadrature here is oscillation-aware: rules start with enough nodes to
//! resolve e^(i x xi) and double until two successive sizes agree to 1e-9
//! relative (a node cap flags non-convergence instead of looping).

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DunklError, Result};
use crate::kernels::Profile;
use crate::quadrature::graded_rule;
use crate::special::{dunkl_kernel, DunklParam};

/// Compactly supported function given by a callable; evaluates to zero
/// outside its support by construction.
#[derive(Clone)]
pub struct GridFunction {
    support: (f64, f64),
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    description: String,
}

impl GridFunction {
    pub fn new(
        lo: f64,
        hi: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Self {
        GridFunction {
            support: (lo, hi),
            eval: Arc::new(f),
            description: description.into(),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Truncated standard Gaussian e^(-x^2/2) on [-12, 12]; self-reciprocal
    /// under the transform for every lambda.
    pub fn gaussian() -> Self {
        GridFunction::new(-12.0, 12.0, |x| (-0.5 * x * x).exp(), "gaussian")
    }

    /// Smooth bump exp(-1/(1-u^2)) scaled to [lo, hi].
    pub fn bump(lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        GridFunction::new(
            lo,
            hi,
            move |x| {
                let u = (x - mid) / half;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            },
            format!("bump[{lo},{hi}]"),
        )
    }
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction")
            .field("support", &self.support)
            .field("description", &self.description)
            .finish()
    }
}

impl Profile for GridFunction {
    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= self.support.0 || t >= self.support.1 {
            0.0
        } else {
            (self.eval)(t)
        }
    }
}

/// Transform values on a xi grid.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    xi_grid: Vec<f64>,
    values: Vec<Complex64>,
    param: DunklParam,
    converged: bool,
}

impl SpectralFunction {
    pub fn xi_grid(&self) -> &[f64] {
        &self.xi_grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn param(&self) -> &DunklParam {
        &self.param
    }

    /// False when any grid point hit the refinement node cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Restriction to the contiguous sub-grid where |values| stay above
    /// `rel_floor` times the peak; trims dead tails before per-point
    /// spectral integrals.
    pub fn trimmed(&self, rel_floor: f64) -> SpectralFunction {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let thr = rel_floor * peak;
        let first = self.values.iter().position(|v| v.norm() > thr);
        let last = self.values.iter().rposition(|v| v.norm() > thr);
        match (first, last) {
            (Some(a), Some(b)) if b > a + 8 => SpectralFunction {
                xi_grid: self.xi_grid[a..=b].to_vec(),
                values: self.values[a..=b].to_vec(),
                param: self.param,
                converged: self.converged,
            },
            _ => self.clone(),
        }
    }

    /// Cubic Lagrange interpolation on the grid; zero outside its range.
    pub fn interpolate(&self, xi: f64) -> Complex64 {
        let g = &self.xi_grid;
        let n = g.len();
        if xi < g[0] || xi > g[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let mut j = match g.partition_point(|&u| u <= xi) {
            0 => 0,
            k => k - 1,
        };
        // 4-point stencil clamped to the grid
        j = j.saturating_sub(1).min(n - 4);
        let xs = &g[j..j + 4];
        let ys = &self.values[j..j + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &yi) in ys.iter().enumerate() {
            let mut l = 1.0;
            for (k, &xk) in xs.iter().enumerate() {
                if k != i {
                    l *= (xi - xk) / (xs[i] - xk);
                }
            }
            acc += yi * l;
        }
        acc
    }
}

const REFINE_RTOL: f64 = 1e-9;
const PANEL_NODES: usize = 32;
const PANEL_CAP: usize = 512;

/// Uniform composite rule: `k` panels of `PANEL_NODES` Gauss nodes each, the
/// origin always landing on a panel boundary so the |x|^w factor is treated
/// exactly there. Panel counts grow instead of single-rule sizes, keeping
/// every eigen-decomposition small and cached.
fn composite_weighted_complex(
    two_lambda: f64,
    lo: f64,
    hi: f64,
    k: usize,
    f: &(dyn Fn(f64) -> Complex64 + Sync),
) -> Result<Complex64> {
    let mut cuts: Vec<f64> = (0..=k)
        .map(|i| lo + (hi - lo) * i as f64 / k as f64)
        .collect();
    if lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (hi - lo));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let rule = graded_rule(two_lambda, w[0], w[1], PANEL_NODES, &[])?;
        acc += rule.integrate_complex(|x| f(x));
    }
    Ok(acc)
}

/// Weighted oscillatory integral with panel-doubling refinement. Returns the
/// value and whether refinement converged before the panel cap.
///
/// Oscillatory cancellation can push the integral far below the f64 noise of
/// its own integrand; the convergence test therefore carries an absolute
/// floor proportional to int |f| d(weight), below which refinement is
/// pointless.
fn refine_weighted_complex(
    two_lambda: f64,
    lo: f64,
    hi: f64,
    osc_freq: f64,
    f: &(dyn Fn(f64) -> Complex64 + Sync),
) -> Result<(Complex64, bool)> {
    // enough panels to resolve the oscillation, then double
    let nodes_needed = 24.0 + 1.2 * osc_freq.abs() * (hi - lo);
    let mut k = ((nodes_needed / PANEL_NODES as f64).ceil() as usize).clamp(1, PANEL_CAP);
    let mut prev: Option<Complex64> = None;
    let mut floor = 0.0f64;
    loop {
        let val = composite_weighted_complex(two_lambda, lo, hi, k, f)?;
        if prev.is_none() {
            let rule = graded_rule(two_lambda, lo, hi, PANEL_NODES, &[])?;
            floor = 1e-13 * rule.integrate(|x| f(x).norm());
        }
        if let Some(p) = prev {
            let scale = val.norm().max(p.norm()).max(1e-300);
            if (val - p).norm() <= REFINE_RTOL * scale || (val - p).norm() <= floor {
                return Ok((val, true));
            }
        }
        if k >= PANEL_CAP {
            return Ok((val, false));
        }
        prev = Some(val);
        k = (2 * k).min(PANEL_CAP);
    }
}

/// Cellwise node/weight list for int . |xi|^(2 lambda) d xi over the span of
/// a spectral grid: within each grid cell the interpolant is one cubic, so a
/// small Gauss rule per cell is exact up to the (already committed)
/// interpolation error. The |xi| weight is folded into the weights; cells
/// touching the origin use a Jacobi rule for it.
fn grid_cell_nodes(two_lambda: f64, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let leg = crate::quadrature::cached_jacobi_ab(0.0, 0.0, 4)?;
    let jac = crate::quadrature::cached_jacobi_ab(0.0, two_lambda, 8)?;
    let mut nodes = Vec::with_capacity(4 * grid.len());
    let mut weights = Vec::with_capacity(4 * grid.len());
    let cell = |a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>| {
        if b <= a {
            return;
        }
        if a == 0.0 || b == 0.0 {
            let outer = if a == 0.0 { b } else { a };
            let ab = outer.abs();
            let scale = (0.5 * ab).powf(two_lambda + 1.0);
            for (&t, &w) in jac.nodes().iter().zip(jac.weights()) {
                nodes.push(0.5 * ab * (1.0 + t) * outer.signum());
                weights.push(w * scale);
            }
        } else {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&t, &w) in leg.nodes().iter().zip(leg.weights()) {
                let xi = mid + half * t;
                nodes.push(xi);
                weights.push(w * half * xi.abs().powf(two_lambda));
            }
        }
    };
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a < 0.0 && b > 0.0 {
            cell(a, 0.0, &mut nodes, &mut weights);
            cell(0.0, b, &mut nodes, &mut weights);
        } else {
            cell(a, b, &mut nodes, &mut weights);
        }
    }
    Ok((nodes, weights))
}

/// Forward Dunkl transform of a compactly supported bounded profile, on the
/// given xi grid.
pub fn dunkl_transform(
    f: &dyn Profile,
    p: &DunklParam,
    xi_grid: &[f64],
) -> Result<SpectralFunction> {
    let (lo, hi) = f.support();
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(DunklError::Unsupported(format!(
            "transform needs bounded support, got [{lo}, {hi}]"
        )));
    }
    if xi_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(DunklError::Domain("xi grid must strictly increase".into()));
    }
    let two_lambda = 2.0 * p.lambda();
    let c = p.c_lambda();
    let results: Vec<Result<(Complex64, bool)>> = xi_grid
        .par_iter()
        .map(|&xi| {
            refine_weighted_complex(two_lambda, lo, hi, xi, &|x: f64| {
                let fx = f.eval(x);
                if fx == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    dunkl_kernel(p, -x * xi) * fx
                }
            })
            .map(|(v, ok)| (c * v, ok))
        })
        .collect();
    let mut values = Vec::with_capacity(xi_grid.len());
    let mut converged = true;
    for r in results {
        let (v, ok) = r?;
        converged &= ok;
        values.push(v);
    }
    Ok(SpectralFunction {
        xi_grid: xi_grid.to_vec(),
        values,
        param: *p,
        converged,
    })
}

/// Empirical power-law fit |g(xi)| ~ C |xi|^-q on the outer decade of the
/// grid, used to bound the truncated inversion tail.
fn tail_decay_fit(g: &SpectralFunction) -> (f64, f64) {
    let hi = g.xi_grid.last().copied().unwrap_or(0.0).abs();
    let cut = 0.3 * hi;
    let mut pts: Vec<(f64, f64)> = g
        .xi_grid
        .iter()
        .zip(&g.values)
        .filter(|(&xi, _)| xi.abs() > cut)
        .map(|(&xi, v)| (xi.abs(), v.norm()))
        .filter(|(_, a)| *a > 0.0)
        .collect();
    if pts.len() < 4 {
        return (f64::INFINITY, 0.0);
    }
    // envelope fit: bin by log |xi| and keep bin maxima so oscillation nulls
    // do not drag the slope
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let bins = 8usize;
    let lo_l = pts[0].0.ln();
    let hi_l = pts[pts.len() - 1].0.ln() + 1e-12;
    let mut env: Vec<(f64, f64)> = Vec::new();
    for b in 0..bins {
        let a = lo_l + (hi_l - lo_l) * b as f64 / bins as f64;
        let z = lo_l + (hi_l - lo_l) * (b + 1) as f64 / bins as f64;
        if let Some(m) = pts
            .iter()
            .filter(|(x, _)| {
                let l = x.ln();
                l >= a && l < z
            })
            .map(|&(x, v)| (x, v))
            .max_by(|p1, p2| p1.1.partial_cmp(&p2.1).unwrap())
        {
            env.push(m);
        }
    }
    if env.len() < 3 {
        return (f64::INFINITY, 0.0);
    }
    let n = env.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, v) in &env {
        let lx = x.ln();
        let ly = v.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let c = ((sy - slope * sx) / n).exp();
    (-slope, c) // |g| ~ c xi^{-q}
}

/// Inverse transform of grid data at the given x values. The xi integral is
/// truncated at the grid range; an empirical decay fit must certify that the
/// discarded tail is below `tol` (absolute), otherwise the call errors.
pub fn inverse_dunkl_transform(
    g: &SpectralFunction,
    x_grid: &[f64],
    tol: f64,
) -> Result<Vec<Complex64>> {
    if g.xi_grid.len() < 8 {
        return Err(DunklError::Domain("spectral grid too short".into()));
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(DunklError::Domain("non-finite spectral values".into()));
    }
    let p = g.param;
    let two_lambda = 2.0 * p.lambda();
    let xi_lo = g.xi_grid[0];
    let xi_hi = *g.xi_grid.last().unwrap();
    let big_xi = xi_lo.abs().max(xi_hi.abs());

    let (q, cfit) = tail_decay_fit(g);
    if q.is_finite() {
        if q <= two_lambda + 1.0 {
            return Err(DunklError::TailDivergence(format!(
                "spectral decay exponent {q:.2} too small against the |xi|^{two_lambda} weight"
            )));
        }
        let tail = 2.0 * p.c_lambda() * cfit * big_xi.powf(two_lambda + 1.0 - q)
            / (q - two_lambda - 1.0);
        if tail > tol {
            return Err(DunklError::TailDivergence(format!(
                "truncated inversion tail estimate {tail:.3e} exceeds tolerance {tol:.3e}"
            )));
        }
    }

    let c = p.c_lambda();
    let (nodes, weights) = grid_cell_nodes(two_lambda, &g.xi_grid)?;
    // interpolant values and weights are shared by every x
    let wh: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&xi, &w)| g.interpolate(xi) * w)
        .collect();
    Ok(x_grid
        .par_iter()
        .map(|&x| {
            let acc = nodes
                .iter()
                .zip(&wh)
                .fold(Complex64::new(0.0, 0.0), |acc, (&xi, &c_wh)| {
                    acc + c_wh * dunkl_kernel(&p, x * xi)
                });
            c * acc
        })
        .collect())
}

/// Controls the spectral grid used by translation and convolution.
#[derive(Debug, Clone, Copy)]
pub struct SpectralGridSpec {
    pub xi_max: f64,
    pub step: f64,
}

impl SpectralGridSpec {
    /// Step fine enough for the target oscillation |x| + |y|.
    fn for_reach(reach: f64) -> Self {
        let step = (0.35 / reach.max(1.0)).min(0.05);
        SpectralGridSpec { xi_max: 40.0, step }
    }

    fn grid(&self) -> Vec<f64> {
        let n = (self.xi_max / self.step).ceil() as i64;
        (-n..=n).map(|k| k as f64 * self.step).collect()
    }
}

/// tau_y f evaluated at each x in `x_grid`, through the spectral formula.
/// Smooth compactly supported inputs only.
pub fn lambda_translation(
    f: &dyn Profile,
    p: &DunklParam,
    y: f64,
    x_grid: &[f64],
) -> Result<Vec<f64>> {
    let reach = x_grid.iter().fold(y.abs(), |a, &x| a.max(x.abs()));
    let spec = SpectralGridSpec::for_reach(reach);
    lambda_translation_with(f, p, y, x_grid, spec)
}

pub fn lambda_translation_with(
    f: &dyn Profile,
    p: &DunklParam,
    y: f64,
    x_grid: &[f64],
    spec: SpectralGridSpec,
) -> Result<Vec<f64>> {
    let grid = spec.grid();
    let hat = dunkl_transform(f, p, &grid)?.trimmed(1e-14);
    let two_lambda = 2.0 * p.lambda();
    let c = p.c_lambda();
    let (nodes, weights) = grid_cell_nodes(two_lambda, hat.xi_grid())?;
    let wh: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&xi, &w)| hat.interpolate(xi) * dunkl_kernel(p, y * xi) * w)
        .collect();
    Ok(x_grid
        .par_iter()
        .map(|&x| {
            let acc = nodes
                .iter()
                .zip(&wh)
                .fold(Complex64::new(0.0, 0.0), |acc, (&xi, &c_wh)| {
                    acc + c_wh * dunkl_kernel(p, x * xi)
                });
            (c * acc).re
        })
        .collect())
}

/// (f *_lambda g)(x) = c_lambda int f(t) (tau_x g)(-t) |t|^(2 lambda) dt.
pub fn lambda_convolution(
    f: &dyn Profile,
    g: &dyn Profile,
    p: &DunklParam,
    x: f64,
) -> Result<f64> {
    Ok(lambda_convolution_many(f, g, p, &[x])?[0])
}

/// Convolution at several points with the spectral data of g computed once.
pub fn lambda_convolution_many(
    f: &dyn Profile,
    g: &dyn Profile,
    p: &DunklParam,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let (lo, hi) = f.support();
    if !lo.is_finite() || !hi.is_finite() {
        return Err(DunklError::Unsupported("unbounded support".into()));
    }
    let rule = graded_rule(2.0 * p.lambda(), lo, hi, 24, &[])?;
    let reach = xs
        .iter()
        .fold(lo.abs().max(hi.abs()), |a, &x| a.max(x.abs()));
    let spec = SpectralGridSpec::for_reach(reach);
    let grid = spec.grid();
    let hat = dunkl_transform(g, p, &grid)?.trimmed(1e-14);
    let two_lambda = 2.0 * p.lambda();
    let c = p.c_lambda();
    let (nodes, weights) = grid_cell_nodes(two_lambda, hat.xi_grid())?;
    let wh: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&xi, &w)| hat.interpolate(xi) * w)
        .collect();
    // per-t kernel vectors are shared across every requested x
    let t_kernels: Vec<(f64, Vec<Complex64>)> = rule
        .nodes()
        .par_iter()
        .zip(rule.weights())
        .filter_map(|(&t, &w)| {
            let ft = f.eval(t);
            if ft == 0.0 {
                return None;
            }
            let col: Vec<Complex64> = nodes
                .iter()
                .zip(&wh)
                .map(|(&xi, &c_wh)| c_wh * dunkl_kernel(p, -t * xi))
                .collect();
            Some((w * ft, col))
        })
        .collect();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let ex: Vec<Complex64> = nodes.iter().map(|&xi| dunkl_kernel(p, x * xi)).collect();
            let acc: f64 = t_kernels
                .iter()
                .map(|(wft, col)| {
                    let tau = col
                        .iter()
                        .zip(&ex)
                        .fold(Complex64::new(0.0, 0.0), |a, (&u, &v)| a + u * v);
                    wft * (c * tau).re
                })
                .sum();
            c * acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(l: f64) -> DunklParam {
        DunklParam::new(l).unwrap()
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn transform_of_zero_is_zero() {
        let p = param(1.0);
        let z = GridFunction::new(-1.0, 1.0, |_| 0.0, "zero");
        let s = dunkl_transform(&z, &p, &[0.0, 0.5, 1.0]).unwrap();
        assert!(s.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn transform_of_even_real_is_real() {
        let p = param(0.7);
        let f = GridFunction::new(-2.0, 2.0, |x| (1.0 - 0.25 * x * x).max(0.0), "even hat");
        let s = dunkl_transform(&f, &p, &linspace(0.0, 5.0, 11)).unwrap();
        for v in s.values() {
            assert!(v.im.abs() < 1e-10, "imaginary leak {v}");
        }
    }

    #[test]
    fn gaussian_is_self_reciprocal() {
        let p = param(1.0);
        let f = GridFunction::gaussian();
        let grid = linspace(0.0, 4.0, 17);
        let s = dunkl_transform(&f, &p, &grid).unwrap();
        assert!(s.converged());
        for (&xi, v) in grid.iter().zip(s.values()) {
            let want = (-0.5 * xi * xi).exp();
            assert!(
                (v.re - want).abs() < 1e-6 && v.im.abs() < 1e-8,
                "xi={xi}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn transform_linearity() {
        let p = param(1.3);
        let f = GridFunction::bump(-1.0, 1.0);
        let g = GridFunction::bump(0.0, 2.0);
        let grid = [0.3, 1.1, 2.4];
        let sf = dunkl_transform(&f, &p, &grid).unwrap();
        let sg = dunkl_transform(&g, &p, &grid).unwrap();
        let (alpha, beta) = (2.5, -0.7);
        let combo = GridFunction::new(
            -1.0,
            2.0,
            move |x| {
                let fb = GridFunction::bump(-1.0, 1.0);
                let gb = GridFunction::bump(0.0, 2.0);
                alpha * fb.eval(x) + beta * gb.eval(x)
            },
            "combo",
        );
        let sc = dunkl_transform(&combo, &p, &grid).unwrap();
        for i in 0..grid.len() {
            let want = sf.values()[i] * alpha + sg.values()[i] * beta;
            assert!((sc.values()[i] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn transform_conjugate_symmetry() {
        let p = param(0.9);
        let f = GridFunction::bump(0.3, 1.7); // not symmetric
        let grid = [-2.0, -1.0, -0.4, 0.4, 1.0, 2.0];
        let s = dunkl_transform(&f, &p, &grid).unwrap();
        for (i, &xi) in grid.iter().enumerate() {
            if xi < 0.0 {
                let j = grid.iter().position(|&u| u == -xi).unwrap();
                let a = s.values()[i];
                let b = s.values()[j].conj();
                assert!((a - b).norm() < 1e-12, "xi={xi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unbounded_support_rejected() {
        let p = param(1.0);
        let f = GridFunction::new(0.0, f64::INFINITY, |_| 1.0, "ray");
        assert!(matches!(
            dunkl_transform(&f, &p, &[1.0]),
            Err(DunklError::Unsupported(_))
        ));
    }

    #[test]
    fn inverse_of_zero() {
        let p = param(1.0);
        let f = GridFunction::new(-1.0, 1.0, |_| 0.0, "zero");
        let s = dunkl_transform(&f, &p, &linspace(-8.0, 8.0, 64)).unwrap();
        let back = inverse_dunkl_transform(&s, &[0.0, 0.3], 1e-6).unwrap();
        assert!(back.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn round_trip_bump() {
        // the bump spectrum decays only root-exponentially, so the grid must
        // reach far before the |xi|^(2 lambda) weighted tail drops below 1e-6
        let p = param(1.0);
        let f = GridFunction::bump(-1.0, 1.0);
        let s = dunkl_transform(&f, &p, &linspace(-450.0, 450.0, 18001)).unwrap();
        let xs = [-0.6, -0.2, 0.0, 0.35, 0.8];
        let back = inverse_dunkl_transform(&s, &xs, 1e-6).unwrap();
        for (&x, v) in xs.iter().zip(&back) {
            assert!(
                (v.re - f.eval(x)).abs() < 1e-6 && v.im.abs() < 1e-7,
                "x={x}: {v} vs {}",
                f.eval(x)
            );
        }
    }

    #[test]
    fn round_trip_gaussian() {
        let p = param(1.0);
        let f = GridFunction::gaussian();
        let s = dunkl_transform(&f, &p, &linspace(-16.0, 16.0, 1025)).unwrap();
        let xs = [0.0, 0.7, 1.9, -2.4];
        let back = inverse_dunkl_transform(&s, &xs, 1e-6).unwrap();
        for (&x, v) in xs.iter().zip(&back) {
            assert!((v.re - f.eval(x)).abs() < 1e-6, "x={x}: {v}");
        }
    }

    /// Smooth profile whose spectrum is numerically compact (Gaussian decay),
    /// so the default xi window leaves no visible truncation tail.
    fn gauss_profile() -> GridFunction {
        GridFunction::new(-5.0, 5.0, |x| (-2.0 * x * x).exp(), "exp(-2x^2)")
    }

    #[test]
    fn translation_at_zero_is_identity() {
        let p = param(1.0);
        let f = gauss_profile();
        let xs = [-0.5, 0.0, 0.4, 0.9];
        let tau = lambda_translation(&f, &p, 0.0, &xs).unwrap();
        for (&x, &v) in xs.iter().zip(&tau) {
            assert!((v - f.eval(x)).abs() < 1e-6, "x={x}: {v} vs {}", f.eval(x));
        }
    }

    #[test]
    fn translation_classical_limit_is_shift() {
        let p = DunklParam::test_mode(1e-6).unwrap();
        let f = gauss_profile();
        let y = 0.6;
        let xs = [-0.8, -0.3, 0.1, 0.25];
        let tau = lambda_translation(&f, &p, y, &xs).unwrap();
        for (&x, &v) in xs.iter().zip(&tau) {
            // classical tau_y f(x) = f(x + y)
            assert!(
                (v - f.eval(x + y)).abs() < 1e-5,
                "x={x}: {v} vs {}",
                f.eval(x + y)
            );
        }
    }

    #[test]
    fn translation_preserves_weighted_mass() {
        let p = param(0.8);
        let f = GridFunction::bump(-1.0, 1.0);
        let y = 0.7;
        // integrate tau_y f against |x|^{2 lambda} over a padded window
        let rule = graded_rule(2.0 * p.lambda(), -2.5, 2.5, 48, &[]).unwrap();
        let tau = lambda_translation(&f, &p, y, rule.nodes()).unwrap();
        let mass_tau: f64 = rule
            .weights()
            .iter()
            .zip(&tau)
            .map(|(&w, &v)| w * v)
            .sum();
        let rule_f = graded_rule(2.0 * p.lambda(), -1.0, 1.0, 48, &[]).unwrap();
        let mass_f = rule_f.integrate(|x| f.eval(x));
        assert!(
            (mass_tau - mass_f).abs() < 1e-6 * mass_f.abs().max(1.0),
            "{mass_tau} vs {mass_f}"
        );
    }

    #[test]
    fn convolution_zero_and_commutativity() {
        let p = param(1.0);
        let f = gauss_profile();
        let z = GridFunction::new(-1.0, 1.0, |_| 0.0, "zero");
        assert_eq!(lambda_convolution(&f, &z, &p, 0.3).unwrap(), 0.0);

        let g = GridFunction::new(-4.8, 5.2, |x| (-3.0 * (x - 0.2) * (x - 0.2)).exp(), "g");
        let xs = [0.0, 0.4, 1.2, -0.7, 2.0];
        let a = lambda_convolution_many(&f, &g, &p, &xs).unwrap();
        let b = lambda_convolution_many(&g, &f, &p, &xs).unwrap();
        for i in 0..xs.len() {
            assert!(
                (a[i] - b[i]).abs() < 1e-6 * a[i].abs().max(1e-3),
                "x={}: {} vs {}",
                xs[i],
                a[i],
                b[i]
            );
        }
    }

    #[test]
    fn convolution_factorizes_under_transform() {
        let p = param(1.0);
        let f = gauss_profile();
        let g = GridFunction::new(-4.8, 5.2, |x| (-3.0 * (x - 0.2) * (x - 0.2)).exp(), "g");
        let xis = [0.4, 1.3];
        let sf = dunkl_transform(&f, &p, &xis).unwrap();
        let sg = dunkl_transform(&g, &p, &xis).unwrap();

        // transform of the convolution, computed by direct outer quadrature
        let rule = graded_rule(2.0 * p.lambda(), -10.0, 10.0, 24, &[]).unwrap();
        let conv_at = lambda_convolution_many(&f, &g, &p, rule.nodes()).unwrap();
        for (k, &xi) in xis.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&x, &w), &cv) in rule.nodes().iter().zip(rule.weights()).zip(&conv_at) {
                acc += dunkl_kernel(&p, -x * xi) * (w * cv);
            }
            let lhs = p.c_lambda() * acc;
            let rhs = sf.values()[k] * sg.values()[k];
            assert!(
                (lhs - rhs).norm() < 1e-5 * rhs.norm().max(1e-4),
                "xi={xi}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn plancherel_identity() {
        let p = param(1.0);
        let f = GridFunction::bump(-1.0, 1.0);
        let rule_x = graded_rule(2.0 * p.lambda(), -1.0, 1.0, 64, &[]).unwrap();
        let lhs = p.c_lambda() * rule_x.integrate(|x| f.eval(x) * f.eval(x));

        let rule_xi = graded_rule(2.0 * p.lambda(), -40.0, 40.0, 96, &[]).unwrap();
        let hat = dunkl_transform(&f, &p, rule_xi.nodes()).unwrap();
        let rhs: f64 = p.c_lambda()
            * rule_xi
                .weights()
                .iter()
                .zip(hat.values())
                .map(|(&w, v)| w * v.norm_sqr())
                .sum::<f64>();
        assert!(
            ((lhs - rhs) / lhs).abs() < 1e-5,
            "plancherel: {lhs} vs {rhs}"
        );
    }
}
