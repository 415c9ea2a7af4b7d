//! Numerical verification harness.
//!
//! Every check in this module ends in a [`VerificationReport`]: a computed
//! quantity, the bound it is held against, their ratio, a truncation-error
//! estimate, and a pass flag. The estimates under test assert the existence
//! of constants, never their values, so pass criteria are uniformity and
//! stability statements over parameter sweeps (dilations of the atom, grids
//! of half-plane heights, windows of the spectral variable), with any
//! one-sided comparison phrased as `required <= measured`.
//!
//! Reports serialize to JSON lines with reals at 15 significant digits, so
//! two runs with the same configuration produce byte-identical output.

use std::collections::BTreeMap;

use crate::error::{DunklError, Result};

mod bounds;
mod decay;
mod estimates;
mod paley;
mod suite;

pub use bounds::{
    atom_bound_report, atom_bound_sweep, decay_envelope, decay_envelope_check, far_field_grid,
    BoundOperator,
};
pub use decay::{sup_decay_exponent, y_derivative_bound, DerivativeField};
pub use estimates::{
    check_estimate_abc_d, check_estimate_b, check_estimate_tracking, peaked_estimate_value,
    weighted_lp_seminorm, EstimateVariant,
};
pub use paley::{
    geometric_grid, hp_sum_bound, paley_functional, paley_weight_exponent, ratio_spread_report,
};
pub use suite::{
    suite_all, suite_atoms, suite_decay, suite_estimates, suite_paley, SuiteConfig,
};

/// Result of one verification check.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub name: String,
    pub computed: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub truncation_error: f64,
    pub pass: bool,
    pub params: BTreeMap<String, String>,
}

impl VerificationReport {
    /// `pass` iff computed/envelope <= 1 + tolerance, the truncation estimate
    /// stays under 5% of the computed value, and every named gate holds.
    pub fn new(
        name: impl Into<String>,
        computed: f64,
        envelope: f64,
        truncation_error: f64,
        tolerance: f64,
        mut params: BTreeMap<String, String>,
        gates: &[(&str, bool)],
    ) -> Self {
        params.insert("tolerance".into(), fmt_real(tolerance));
        let ratio = computed / envelope;
        let trunc_ok = truncation_error <= 0.05 * computed.abs().max(1e-300);
        if !trunc_ok {
            params.insert("truncation_gate".into(), "failed".into());
        }
        let mut pass = ratio <= 1.0 + tolerance && ratio.is_finite() && trunc_ok;
        for (g, ok) in gates {
            params.insert(format!("gate_{g}"), if *ok { "ok" } else { "failed" }.into());
            pass &= ok;
        }
        VerificationReport {
            name: name.into(),
            computed,
            envelope,
            ratio,
            truncation_error,
            pass,
            params,
        }
    }

    /// One JSON object per line, fields in declaration order, reals with 15
    /// significant digits.
    pub fn to_json_line(&self) -> String {
        let mut s = String::with_capacity(256);
        s.push_str("{\"name\":");
        s.push_str(&serde_json::to_string(&self.name).expect("string"));
        s.push_str(",\"computed\":");
        s.push_str(&fmt_real(self.computed));
        s.push_str(",\"envelope\":");
        s.push_str(&fmt_real(self.envelope));
        s.push_str(",\"ratio\":");
        s.push_str(&fmt_real(self.ratio));
        s.push_str(",\"truncation_error\":");
        s.push_str(&fmt_real(self.truncation_error));
        s.push_str(",\"pass\":");
        s.push_str(if self.pass { "true" } else { "false" });
        s.push_str(",\"params\":{");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&serde_json::to_string(k).expect("string"));
            s.push(':');
            s.push_str(&serde_json::to_string(v).expect("string"));
        }
        s.push_str("}}");
        s
    }
}

/// Decimal with 15 significant digits; finite inputs only reach output paths.
pub(crate) fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    format!("{x:.14e}")
}

/// Far-field region: the complement of I(x0, 4 delta0) union I(-x0, 4 delta0).
#[derive(Debug, Clone, Copy)]
pub struct FarFieldRegion {
    x0: f64,
    delta0: f64,
}

impl FarFieldRegion {
    pub fn new(x0: f64, delta0: f64) -> Result<Self> {
        if x0 == 0.0 || !(delta0 > 0.0) {
            return Err(DunklError::Domain(
                "far-field region needs x0 != 0 and delta0 > 0".into(),
            ));
        }
        Ok(FarFieldRegion { x0, delta0 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.x0).abs() >= 4.0 * self.delta0 && (x + self.x0).abs() >= 4.0 * self.delta0
    }

    /// The region clipped to [-r, r], as disjoint closed intervals.
    pub fn segments(&self, r: f64) -> Vec<(f64, f64)> {
        let a = self.x0.abs();
        let d = 4.0 * self.delta0;
        let mut segs = Vec::new();
        if a - d > -(a - d) {
            // middle piece between the two excluded islands
            segs.push((-(a - d), a - d));
        }
        if r > a + d {
            segs.push((a + d, r));
            segs.push((-r, -(a + d)));
        }
        segs.retain(|(lo, hi)| hi > lo);
        segs.sort_by(|s, t| s.0.partial_cmp(&t.0).unwrap());
        segs
    }

    /// The excluded near region as disjoint intervals (merged if overlapping).
    pub fn near_segments(&self) -> Vec<(f64, f64)> {
        let a = self.x0.abs();
        let d = 4.0 * self.delta0;
        let (l1, h1) = (-a - d, -a + d);
        let (l2, h2) = (a - d, a + d);
        if h1 >= l2 {
            vec![(l1, h2)]
        } else {
            vec![(l1, h1), (l2, h2)]
        }
    }
}

/// max/min of a nonempty positive list: the spread factor the stability
/// criteria bound.
pub(crate) fn spread_factor(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 || !hi.is_finite() {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Least-squares slope of ln(y) against ln(x).
pub(crate) fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let lx = x.ln();
        let ly = y.max(1e-300).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_membership() {
        let r = FarFieldRegion::new(1.0, 0.1).unwrap();
        assert!(r.contains(0.0));
        assert!(r.contains(2.0));
        assert!(!r.contains(1.0));
        assert!(!r.contains(-1.3));
        assert!(r.contains(-0.5));
        // just inside the closed region (the exact boundary is float-fuzzy)
        assert!(r.contains(1.4 + 1e-9));
    }

    #[test]
    fn far_field_segments_cover_complement() {
        let r = FarFieldRegion::new(1.0, 0.1).unwrap();
        let segs = r.segments(10.0);
        assert_eq!(segs.len(), 3);
        for (lo, hi) in &segs {
            for k in 0..10 {
                let x = lo + (hi - lo) * k as f64 / 9.0;
                assert!(r.contains(x), "x={x} escaped");
            }
        }
        // overlapping islands merge
        let tight = FarFieldRegion::new(0.5, 0.2).unwrap();
        assert_eq!(tight.near_segments().len(), 1);
        assert!(tight.segments(10.0).len() == 2);
    }

    #[test]
    fn report_invariants() {
        let r = VerificationReport::new(
            "demo",
            2.0,
            4.0,
            0.01,
            0.0,
            BTreeMap::new(),
            &[],
        );
        assert!(r.pass);
        assert_eq!(r.ratio, 0.5);

        let fail_ratio =
            VerificationReport::new("demo", 5.0, 4.0, 0.01, 0.1, BTreeMap::new(), &[]);
        assert!(!fail_ratio.pass);

        let fail_trunc =
            VerificationReport::new("demo", 2.0, 4.0, 0.5, 0.0, BTreeMap::new(), &[]);
        assert!(!fail_trunc.pass);

        let fail_gate = VerificationReport::new(
            "demo",
            2.0,
            4.0,
            0.01,
            0.0,
            BTreeMap::new(),
            &[("shape", false)],
        );
        assert!(!fail_gate.pass);
    }

    #[test]
    fn json_line_shape_and_digits() {
        let mut params = BTreeMap::new();
        params.insert("lambda".into(), fmt_real(1.0));
        let r = VerificationReport::new("demo_check", 1.0 / 3.0, 1.0, 1e-12, 0.05, params, &[]);
        let line = r.to_json_line();
        assert!(line.starts_with("{\"name\":\"demo_check\",\"computed\":3.33333333333333"));
        assert!(line.contains("\"pass\":true"));
        assert!(!line.contains('\n'));
        // every real carries >= 15 significant digits
        assert!(line.contains("e-1"));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["params"]["tolerance"], "5.00000000000000e-2");
    }

    #[test]
    fn spread_and_slope_helpers() {
        assert!((spread_factor(&[1.0, 2.0, 1.5]) - 2.0).abs() < 1e-15);
        let pts: Vec<(f64, f64)> = (1..20)
            .map(|k| {
                let x = k as f64;
                (x, 5.0 * x.powf(-2.5))
            })
            .collect();
        assert!((log_log_slope(&pts) + 2.5).abs() < 1e-10);
    }
}
