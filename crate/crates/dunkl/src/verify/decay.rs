//! Height decay of the analytic field Pa + iQa and of its y-derivative.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::atoms::Atom;
use crate::error::{DunklError, Result};
use crate::kernels::{conj_poisson_integral, poisson_integral, HalfPlanePoint};
use crate::quadrature::graded_rule;

use super::{fmt_real, log_log_slope, spread_factor, VerificationReport};

fn field_modulus(a: &Atom, x: f64, y: f64) -> Result<f64> {
    let dp = a.param();
    let pt = HalfPlanePoint::new(x, y)?;
    let u = poisson_integral(a, &dp, &pt)?;
    let v = conj_poisson_integral(a, &dp, &pt)?;
    Ok((u * u + v * v).sqrt())
}

/// sup_x |Pa + iQa|(x, y) by a coarse sweep over a y-proportional window
/// followed by golden-section polish around the best candidates.
fn sup_over_x(a: &Atom, y: f64) -> Result<f64> {
    let reach = 4.0 * y + 2.0 * a.interval().x0().abs();
    let n = 48usize;
    let xs: Vec<f64> = (0..=n)
        .map(|k| -reach + 2.0 * reach * k as f64 / n as f64)
        .collect();
    let vals: Vec<Result<f64>> = xs.par_iter().map(|&x| field_modulus(a, x, y)).collect();
    let mut best = (0usize, 0.0f64);
    let mut collected = Vec::with_capacity(vals.len());
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if v > best.1 {
            best = (i, v);
        }
        collected.push(v);
    }
    let (mut lo, mut hi) = (
        xs[best.0.saturating_sub(1)],
        xs[(best.0 + 1).min(xs.len() - 1)],
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut sup = best.1;
    for _ in 0..24 {
        let c1 = hi - phi * (hi - lo);
        let c2 = lo + phi * (hi - lo);
        let f1 = field_modulus(a, c1, y)?;
        let f2 = field_modulus(a, c2, y)?;
        sup = sup.max(f1).max(f2);
        if f1 > f2 {
            hi = c2;
        } else {
            lo = c1;
        }
    }
    Ok(sup)
}

/// Fits the log-log slope of sup_x |Pa + iQa| against y on the given grid
/// and checks the decay is at least as fast as the claimed
/// y^(-(1/p)(1 + 2 lambda)); `computed` is the required order (minus the
/// 0.05 slack), `envelope` the measured one.
pub fn sup_decay_exponent(a: &Atom, y_grid: &[f64]) -> Result<VerificationReport> {
    if y_grid.len() < 4 {
        return Err(DunklError::Domain("need at least 4 heights".into()));
    }
    let diam = 2.0 * a.interval().delta0() + 2.0 * a.interval().x0().abs();
    let lo = y_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y_grid.iter().cloned().fold(0.0f64, f64::max);
    if !(hi / lo >= 99.0) || !(lo > diam) {
        return Err(DunklError::Domain(format!(
            "height grid must span >= 2 decades above the support diameter {diam:.3}"
        )));
    }
    let pts: Vec<(f64, f64)> = y_grid
        .iter()
        .map(|&y| Ok((y, sup_over_x(a, y)?)))
        .collect::<Result<_>>()?;
    let slope = log_log_slope(&pts);
    let claimed = -(1.0 / a.p()) * (1.0 + 2.0 * a.lambda());
    let mut params = BTreeMap::new();
    params.insert("lambda".into(), fmt_real(a.lambda()));
    params.insert("p".into(), fmt_real(a.p()));
    params.insert("claimed_order".into(), fmt_real(-claimed));
    params.insert("measured_slope".into(), fmt_real(slope));
    for &(y, s) in &pts {
        params.insert(format!("sup_at_y_{y}"), fmt_real(s));
    }
    // decay at least as fast as claimed: measured order >= claimed - 0.05
    Ok(VerificationReport::new(
        "field_sup_decay_exponent",
        -claimed - 0.05,
        -slope,
        0.0,
        0.0,
        params,
        &[],
    ))
}

/// Which half-plane field to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeField {
    Poisson,
    ConjPoisson,
}

fn field_value(a: &Atom, which: DerivativeField, x: f64, y: f64) -> Result<f64> {
    let dp = a.param();
    let pt = HalfPlanePoint::new(x, y)?;
    match which {
        DerivativeField::Poisson => poisson_integral(a, &dp, &pt),
        DerivativeField::ConjPoisson => conj_poisson_integral(a, &dp, &pt),
    }
}

/// Weighted L^p norm of the central-difference y-derivative at one height.
fn dy_norm(a: &Atom, which: DerivativeField, y: f64, p_exp: f64, step: f64) -> Result<f64> {
    if step >= y {
        return Err(DunklError::Domain(format!(
            "finite-difference step {step} collides with the height {y}"
        )));
    }
    let dp = a.param();
    let i = a.interval();
    let two_lambda = 2.0 * dp.lambda();
    let r_cut = 40.0 * (i.x0().abs() + y);
    let grades = [
        (i.x0(), i.delta0().min(y)),
        (-i.x0(), i.delta0().min(y)),
    ];
    let rule = graded_rule(two_lambda, -r_cut, r_cut, 16, &grades)?;
    let vals: Vec<Result<f64>> = rule
        .nodes()
        .par_iter()
        .map(|&x| {
            let up = field_value(a, which, x, y + step)?;
            let dn = field_value(a, which, x, y - step)?;
            Ok(((up - dn) / (2.0 * step)).abs().powf(p_exp))
        })
        .collect();
    let mut acc = 0.0;
    for (w, v) in rule.weights().iter().zip(vals) {
        acc += w * v?;
    }
    Ok((dp.c_lambda() * acc).powf(1.0 / p_exp))
}

/// Checks ||d/dy field||_p * y stays within the stability band across the
/// height grid, plus an O(h^2) gate on the finite-difference step.
pub fn y_derivative_bound(
    a: &Atom,
    which: DerivativeField,
    y_grid: &[f64],
    p_exp: f64,
    stability_spread: f64,
) -> Result<VerificationReport> {
    if y_grid.iter().any(|&y| !(y > 0.0)) {
        return Err(DunklError::Domain("heights must be positive".into()));
    }
    let mut products = Vec::new();
    let mut params = BTreeMap::new();
    for &y in y_grid {
        let norm = dy_norm(a, which, y, p_exp, y / 100.0)?;
        products.push(norm * y);
        params.insert(format!("norm_times_y_at_{y}"), fmt_real(norm * y));
    }
    // h-refinement: halving the step moves the norm by < 1%
    let y_ref = y_grid[y_grid.len() / 2];
    let n1 = dy_norm(a, which, y_ref, p_exp, y_ref / 100.0)?;
    let n2 = dy_norm(a, which, y_ref, p_exp, y_ref / 200.0)?;
    let fd_drift = ((n1 - n2) / n2.abs().max(1e-300)).abs();
    params.insert("fd_halving_drift".into(), fmt_real(fd_drift));
    params.insert("p".into(), fmt_real(p_exp));
    params.insert("lambda".into(), fmt_real(a.lambda()));
    let tag = match which {
        DerivativeField::Poisson => "poisson",
        DerivativeField::ConjPoisson => "conj_poisson",
    };
    Ok(VerificationReport::new(
        format!("height_derivative_bound_{tag}"),
        spread_factor(&products),
        stability_spread,
        0.0,
        0.0,
        params,
        &[("fd_second_order", fd_drift < 0.01)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{make_atom, Interval};
    use crate::special::DunklParam;

    #[test]
    fn sup_decay_grid_validation() {
        let dp = DunklParam::new(1.0).unwrap();
        let a = make_atom(&dp, 1.0, &Interval::new(1.0, 0.25).unwrap(), 0).unwrap();
        // too narrow
        assert!(sup_decay_exponent(&a, &[3.0, 4.0, 5.0, 6.0]).is_err());
    }

    #[test]
    fn dy_norm_step_collision() {
        let dp = DunklParam::new(1.0).unwrap();
        let a = make_atom(&dp, 1.0, &Interval::new(1.0, 0.25).unwrap(), 0).unwrap();
        assert!(dy_norm(&a, DerivativeField::Poisson, 0.5, 1.0, 0.6).is_err());
    }

    #[test]
    fn dy_norm_positive_and_finite() {
        let dp = DunklParam::new(1.0).unwrap();
        let a = make_atom(&dp, 1.0, &Interval::new(1.0, 0.25).unwrap(), 0).unwrap();
        let n = dy_norm(&a, DerivativeField::Poisson, 1.0, 1.0, 0.01).unwrap();
        assert!(n.is_finite() && n > 0.0);
    }
}
