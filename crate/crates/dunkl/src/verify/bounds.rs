//! Atom boundedness and far-field decay envelopes for the three operators.
//!
//! The weighted p-integral of a transformed atom splits the way the proofs
//! do: the near region (the 4-dilated support interval and its reflection)
//! is integrated directly, with principal values inside the support for the
//! Hilbert transform; the far region is integrated out to a cutoff, and the
//! remainder is estimated analytically from the decay envelope
//!
//!   |T a(x)| <= C |I|_lambda^(1 - 1/p) delta0^(n+1)
//!               / (||x| - |x0||^(n+2) (|x| + |x0|)^(2 lambda)),
//!
//! with n = kappa/2 and the constant fitted from the outermost samples.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::atoms::{interval_measure, make_atom, Atom, Interval};
use crate::error::{DunklError, Result};
use crate::kernels::{
    conj_poisson_integral, hilbert_transform, poisson_integral, HalfPlanePoint,
};
use crate::quadrature::graded_rule;
use crate::special::DunklParam;

use super::{fmt_real, log_log_slope, spread_factor, FarFieldRegion, VerificationReport};

/// Operator under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundOperator {
    Hilbert,
    Poisson { y: f64 },
    ConjPoisson { y: f64 },
}

impl BoundOperator {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundOperator::Hilbert => "hilbert",
            BoundOperator::Poisson { .. } => "poisson",
            BoundOperator::ConjPoisson { .. } => "conj_poisson",
        }
    }

    fn y(&self) -> f64 {
        match self {
            BoundOperator::Hilbert => 0.0,
            BoundOperator::Poisson { y } | BoundOperator::ConjPoisson { y } => *y,
        }
    }

    /// Same operator with the height dilated (the covariant sweep).
    fn dilated(&self, c: f64) -> BoundOperator {
        match self {
            BoundOperator::Hilbert => BoundOperator::Hilbert,
            BoundOperator::Poisson { y } => BoundOperator::Poisson { y: c * y },
            BoundOperator::ConjPoisson { y } => BoundOperator::ConjPoisson { y: c * y },
        }
    }

    pub fn apply(&self, a: &Atom, dp: &DunklParam, x: f64) -> Result<f64> {
        match self {
            BoundOperator::Hilbert => hilbert_transform(a, dp, x),
            BoundOperator::Poisson { y } => {
                poisson_integral(a, dp, &HalfPlanePoint::new(x, *y)?)
            }
            BoundOperator::ConjPoisson { y } => {
                conj_poisson_integral(a, dp, &HalfPlanePoint::new(x, *y)?)
            }
        }
    }
}

/// Far-field decay envelope of the transformed atom.
pub fn decay_envelope(a: &Atom, x: f64) -> f64 {
    let dp = a.param();
    let i = a.interval();
    let n = (a.kappa() / 2) as f64;
    let measure = interval_measure(&dp, &i);
    let (x0, d0) = (i.x0().abs(), i.delta0());
    measure.powf(1.0 - 1.0 / a.p()) * d0.powf(n + 1.0)
        / ((x.abs() - x0).abs().powf(n + 2.0) * (x.abs() + x0).powf(2.0 * dp.lambda()))
}

/// Weighted p-integral of |T a| over a list of segments, grading the x-rule
/// toward the listed feature points.
fn weighted_p_over_segments(
    a: &Atom,
    dp: &DunklParam,
    op: BoundOperator,
    segments: &[(f64, f64)],
    grades: &[(f64, f64)],
    p_exp: f64,
    nodes: usize,
) -> Result<f64> {
    let two_lambda = 2.0 * dp.lambda();
    let mut total = 0.0;
    for &(lo, hi) in segments {
        if hi - lo < 1e-13 {
            continue;
        }
        let rule = graded_rule(two_lambda, lo, hi, nodes, grades)?;
        let vals: Vec<Result<f64>> = rule
            .nodes()
            .par_iter()
            .map(|&x| Ok(op.apply(a, dp, x)?.abs().powf(p_exp)))
            .collect();
        for (w, v) in rule.weights().iter().zip(vals) {
            total += w * v?;
        }
    }
    Ok(total)
}

/// The weighted p-integral of the transformed atom over the whole line:
/// near region + far region + analytic envelope tail. Returns
/// (value, truncation_estimate, fitted envelope constant).
fn bound_integral(
    a: &Atom,
    op: BoundOperator,
    r_cut: f64,
    nodes: usize,
) -> Result<(f64, f64, f64)> {
    let dp = a.param();
    let i = a.interval();
    let p_exp = a.p();
    let n = (a.kappa() / 2) as f64;
    let two_lambda = 2.0 * dp.lambda();
    let region = FarFieldRegion::new(i.x0(), i.delta0())?;

    // integrability of the envelope tail, the proof's own admissibility line
    let tail_exp = (n + 2.0) * p_exp + two_lambda * (p_exp - 1.0);
    if !(tail_exp > 1.0) {
        return Err(DunklError::TailDivergence(format!(
            "(n+2)p + 2 lambda (p-1) = {tail_exp:.4} <= 1: envelope tail not integrable"
        )));
    }

    // near region: the transformed atom has (integrable) logarithmic spikes
    // at the support edges and their reflections; grading to 1e-3 of the
    // radius leaves a sliver whose |log|^p mass is far below the stability
    // tolerances
    let y_scale = (0.25 * op.y()).max(1e-3 * i.delta0());
    let grades = vec![
        (i.lo(), y_scale),
        (i.hi(), y_scale),
        (-i.lo(), y_scale),
        (-i.hi(), y_scale),
    ];
    let near = weighted_p_over_segments(
        a,
        &dp,
        op,
        &region.near_segments(),
        &grades,
        p_exp,
        nodes,
    )?;

    // far region out to the cutoff
    let far_grades: Vec<(f64, f64)> = region
        .segments(r_cut)
        .iter()
        .flat_map(|&(lo, hi)| [(lo, i.delta0()), (hi, i.delta0())])
        .collect();
    let far = weighted_p_over_segments(
        a,
        &dp,
        op,
        &region.segments(r_cut),
        &far_grades,
        p_exp,
        nodes,
    )?;

    // envelope constant fitted at the outermost decade, then the exact tail
    // of the envelope integral beyond the cutoff
    let mut c_fit: f64 = 0.0;
    for &x in &[0.82 * r_cut, 0.9 * r_cut, 0.97 * r_cut, -0.85 * r_cut, -0.95 * r_cut] {
        let env = decay_envelope(a, x);
        let v = op.apply(a, &dp, x)?.abs();
        c_fit = c_fit.max(v / env);
    }
    let i_meas = interval_measure(&dp, &i);
    let amp = c_fit.max(1.0) * i_meas.powf(1.0 - 1.0 / p_exp) * i.delta0().powf(n + 1.0);
    // |x|-|x0| ~ |x| out there; weighted integrand ~ amp^p x^{2l - (n+2+2l)p}
    let tail = 2.0 * amp.powf(p_exp) * r_cut.powf(1.0 - tail_exp) / (tail_exp - 1.0);

    let value = dp.c_lambda() * (near + far + tail);
    Ok((value, dp.c_lambda() * tail, c_fit))
}

/// Theorem-style boundedness report for a single atom and operator: the
/// weighted p-integral is computed with the near/far split and must be
/// finite with a controlled truncation estimate.
pub fn atom_bound_report(
    a: &Atom,
    op: BoundOperator,
    r_cut: f64,
) -> Result<VerificationReport> {
    let (value, tail, c_fit) = bound_integral(a, op, r_cut, 10)?;
    let (refined, _, _) = bound_integral(a, op, r_cut, 14)?;
    let trunc = (value - refined).abs() + tail;
    let mut params = BTreeMap::new();
    params.insert("lambda".into(), fmt_real(a.lambda()));
    params.insert("p".into(), fmt_real(a.p()));
    params.insert("kappa".into(), a.kappa().to_string());
    params.insert("x0".into(), fmt_real(a.interval().x0()));
    params.insert("delta0".into(), fmt_real(a.interval().delta0()));
    params.insert("y".into(), fmt_real(op.y()));
    params.insert("envelope_constant_fit".into(), fmt_real(c_fit));
    // a single evaluation asserts finiteness; stability is the sweep's job
    Ok(VerificationReport::new(
        format!("atom_bound_{}", op.tag()),
        value,
        value.max(1e-300),
        trunc,
        1e-9,
        params,
        &[("finite", value.is_finite())],
    ))
}

/// Dilation sweep: the weighted p-integral is exactly invariant under
/// (x0, delta0, y) -> (c x0, c delta0, c y), so the sweep values must agree
/// to the stability tolerance; for half-plane operators the sweep reruns at
/// every base height in `y_grid`.
#[allow(clippy::too_many_arguments)]
pub fn atom_bound_sweep(
    dp: &DunklParam,
    p_exp: f64,
    kappa: u32,
    base: &Interval,
    op: BoundOperator,
    dilations: &[f64],
    y_grid: &[f64],
    r_cut: f64,
    stability_tol: f64,
) -> Result<VerificationReport> {
    let heights: Vec<f64> = match op {
        BoundOperator::Hilbert => vec![0.0],
        _ => y_grid.to_vec(),
    };
    let mut params = BTreeMap::new();
    let mut worst_spread: f64 = 0.0;
    let mut trunc_rel: f64 = 0.0;
    for &y in &heights {
        let mut values = Vec::new();
        for &c in dilations {
            let a = make_atom(dp, p_exp, &base.dilated(c)?, kappa)?;
            let op_c = match op {
                BoundOperator::Hilbert => BoundOperator::Hilbert,
                BoundOperator::Poisson { .. } => BoundOperator::Poisson { y }.dilated(c),
                BoundOperator::ConjPoisson { .. } => {
                    BoundOperator::ConjPoisson { y }.dilated(c)
                }
            };
            let (value, tail, _) = bound_integral(&a, op_c, r_cut * c, 10)?;
            trunc_rel = trunc_rel.max(tail / value.abs().max(1e-300));
            values.push(value);
            params.insert(
                format!("value_y_{y}_dilation_{c}"),
                fmt_real(value),
            );
        }
        worst_spread = worst_spread.max(spread_factor(&values));
    }
    params.insert("kappa".into(), kappa.to_string());
    params.insert("p".into(), fmt_real(p_exp));
    params.insert("lambda".into(), fmt_real(dp.lambda()));
    Ok(VerificationReport::new(
        format!("atom_bound_{}_dilation_sweep", op.tag()),
        worst_spread,
        1.0 + stability_tol,
        trunc_rel,
        0.0,
        params,
        &[],
    ))
}

/// Far-field envelope check: computes |T a(x)| / envelope(x) over the grid,
/// splits it by the two proof-case regions ([-2 x0, 0] against its
/// complement), and passes iff the per-region maxima agree within a factor 3
/// and the ratio does not grow toward the outer end of the grid.
pub fn decay_envelope_check(
    a: &Atom,
    op: BoundOperator,
    x_grid: &[f64],
) -> Result<VerificationReport> {
    let dp = a.param();
    let i = a.interval();
    let region = FarFieldRegion::new(i.x0(), i.delta0())?;
    for &x in x_grid {
        if !region.contains(x) {
            return Err(DunklError::Domain(format!(
                "decay check grid point {x} lies inside the near region"
            )));
        }
    }
    let x0 = i.x0();
    let in_middle = |x: f64| {
        if x0 > 0.0 {
            (-2.0 * x0..=0.0).contains(&x)
        } else {
            (0.0..=-2.0 * x0).contains(&x)
        }
    };
    let ratios: Vec<Result<(f64, f64, bool)>> = x_grid
        .par_iter()
        .map(|&x| {
            let v = op.apply(a, &dp, x)?.abs();
            Ok((x, v / decay_envelope(a, x), in_middle(x)))
        })
        .collect();
    let mut middle_max: f64 = 0.0;
    let mut outer_max: f64 = 0.0;
    let mut outer_pts = Vec::new();
    let mut has_middle = false;
    let mut has_outer = false;
    for r in ratios {
        let (x, ratio, middle) = r?;
        if middle {
            has_middle = true;
            middle_max = middle_max.max(ratio);
        } else {
            has_outer = true;
            outer_max = outer_max.max(ratio);
            outer_pts.push((x.abs(), ratio.max(1e-300)));
        }
    }
    if !has_middle || !has_outer {
        return Err(DunklError::Domain(
            "grid must cover both proof-case regions".into(),
        ));
    }
    // ratio trend on the outer branch: no systematic growth toward the cutoff
    outer_pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let outer_half = &outer_pts[outer_pts.len() / 2..];
    let slope = log_log_slope(outer_half);

    let spread = (middle_max / outer_max).max(outer_max / middle_max);
    let mut params = BTreeMap::new();
    params.insert("lambda".into(), fmt_real(a.lambda()));
    params.insert("p".into(), fmt_real(a.p()));
    params.insert("kappa".into(), a.kappa().to_string());
    params.insert("y".into(), fmt_real(op.y()));
    params.insert("middle_region_max".into(), fmt_real(middle_max));
    params.insert("outer_region_max".into(), fmt_real(outer_max));
    params.insert("fitted_constant".into(), fmt_real(middle_max.max(outer_max)));
    params.insert("outer_tail_slope".into(), fmt_real(slope));
    Ok(VerificationReport::new(
        format!("decay_envelope_{}", op.tag()),
        spread,
        3.0,
        0.0,
        0.0,
        params,
        &[("no_growth_toward_cutoff", slope <= 0.05)],
    ))
}

/// A far-field grid covering both proof-case regions: the segment between
/// the islands and the outer rays up to `r_cut`, geometrically spaced.
pub fn far_field_grid(region: &FarFieldRegion, r_cut: f64, per_segment: usize) -> Vec<f64> {
    let mut grid = Vec::new();
    let x0 = region.x0().abs();
    let d4 = 4.0 * region.delta0();
    // middle piece (covers [-2 x0, 0] material when x0 > 4 delta0)
    if x0 > d4 {
        for k in 0..per_segment {
            let t = k as f64 / (per_segment - 1) as f64;
            let x = -(x0 - d4) + 2.0 * (x0 - d4) * t;
            grid.push(x);
        }
    }
    // outer rays, geometric from the island edge
    let decades = (r_cut / (x0 + d4)).ln();
    for k in 0..per_segment {
        let t = k as f64 / (per_segment - 1) as f64;
        let r = (x0 + d4) * (decades * t).exp();
        grid.push(r);
        grid.push(-r);
    }
    grid.retain(|&x| region.contains(x));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_atom(lam: f64, p: f64, kappa: u32) -> Atom {
        let dp = DunklParam::new(lam).unwrap();
        make_atom(&dp, p, &Interval::new(1.0, 0.1).unwrap(), kappa).unwrap()
    }

    #[test]
    fn envelope_positive_and_decaying() {
        let a = test_atom(1.0, 0.8, 2);
        let e1 = decay_envelope(&a, 2.0);
        let e2 = decay_envelope(&a, 4.0);
        let e3 = decay_envelope(&a, 8.0);
        assert!(e1 > e2 && e2 > e3 && e3 > 0.0);
        // reflection symmetry of the envelope
        assert_eq!(decay_envelope(&a, -2.0), decay_envelope(&a, 2.0));
    }

    #[test]
    fn hilbert_bound_finite_and_reported() {
        let a = test_atom(1.0, 1.0, 0);
        let rep = atom_bound_report(&a, BoundOperator::Hilbert, 60.0).unwrap();
        assert!(rep.pass, "{}", rep.to_json_line());
        assert!(rep.computed.is_finite() && rep.computed > 0.0);
    }

    #[test]
    fn poisson_bound_decreases_at_large_height() {
        let a = test_atom(1.0, 1.0, 0);
        let r1 = atom_bound_report(&a, BoundOperator::Poisson { y: 30.0 }, 200.0).unwrap();
        let r2 = atom_bound_report(&a, BoundOperator::Poisson { y: 120.0 }, 800.0).unwrap();
        assert!(r2.computed < r1.computed, "{} vs {}", r2.computed, r1.computed);
    }

    #[test]
    fn tail_divergence_reported_for_inadmissible_exponents() {
        // force (n+2)p + 2 lambda (p-1) <= 1 by an artificially low p with a
        // hand-built atom bypassing make_atom's kappa floor is not possible;
        // instead check the error path through the seminorm in estimates.
        // Here: kappa = 0 at p close to the lower end keeps the exponent > 1,
        // so the bound integral must succeed.
        let dp = DunklParam::new(0.5).unwrap();
        let a = make_atom(&dp, 0.95, &Interval::new(1.0, 0.1).unwrap(), 0).unwrap();
        assert!(atom_bound_report(&a, BoundOperator::Hilbert, 60.0).is_ok());
    }

    #[test]
    fn decay_check_rejects_near_region_points() {
        let a = test_atom(1.0, 0.8, 2);
        let err = decay_envelope_check(&a, BoundOperator::Hilbert, &[1.05]).unwrap_err();
        assert!(matches!(err, DunklError::Domain(_)));
    }

    #[test]
    fn decay_check_passes_on_far_grid() {
        let a = test_atom(1.0, 0.8, 2);
        let region = FarFieldRegion::new(1.0, 0.1).unwrap();
        let grid = far_field_grid(&region, 50.0, 9);
        assert!(grid.iter().any(|&x| x < 0.0 && x > -2.0));
        let rep = decay_envelope_check(&a, BoundOperator::Hilbert, &grid).unwrap();
        assert!(rep.pass, "{}", rep.to_json_line());
    }
}
