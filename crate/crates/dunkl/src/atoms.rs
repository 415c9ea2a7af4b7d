//! Polynomial atoms for the weighted Hardy space on the line.
//!
//! An atom of exponent p on the interval I(x0, delta0) is a bounded function
//! supported there, with sup norm at most |I|_lambda^(-1/p) (|.|_lambda is the
//! |x|^(2 lambda) dx measure) and vanishing weighted moments
//! int t^k a(t) |t|^(2 lambda) dt = 0 for k = 0..kappa. The construction here
//! uses a polynomial of degree kappa+1 times the indicator of the interval:
//! the moment conditions become a finite Gram-Schmidt problem, which is exact,
//! and the sup norm of a low-degree polynomial on a closed interval is cheap
//! to pin down.
//!
//! Intervals always satisfy delta0 < |x0|/2, so supports never meet the
//! origin and closed-form antiderivatives apply to the weighted measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::quadrature::weighted_interval_rule;
use crate::special::DunklParam;

/// Support interval I(x0, delta0) = { x : |x - x0| < delta0 }, delta0 < |x0|/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    x0: f64,
    delta0: f64,
}

impl Interval {
    pub fn new(x0: f64, delta0: f64) -> Result<Self> {
        if x0 == 0.0 || !x0.is_finite() {
            return Err(DunklError::Domain(
                "interval center must be finite and nonzero".into(),
            ));
        }
        if !(delta0 > 0.0) || !(delta0 < 0.5 * x0.abs()) {
            return Err(DunklError::Domain(format!(
                "interval radius must satisfy 0 < delta0 < |x0|/2, got x0={x0}, delta0={delta0}"
            )));
        }
        Ok(Interval { x0, delta0 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn lo(&self) -> f64 {
        self.x0 - self.delta0
    }

    pub fn hi(&self) -> f64 {
        self.x0 + self.delta0
    }

    pub fn contains(&self, t: f64) -> bool {
        (t - self.x0).abs() < self.delta0
    }

    /// The c-dilated interval I(c x0, c delta0).
    pub fn dilated(&self, c: f64) -> Result<Interval> {
        Interval::new(c * self.x0, c * self.delta0)
    }
}

/// Weighted measure |I|_lambda = c_lambda int_I |x|^(2 lambda) dx, by the
/// closed-form antiderivative (the support is separated from the origin).
pub fn interval_measure(p: &DunklParam, interval: &Interval) -> f64 {
    let e = 2.0 * p.lambda() + 1.0;
    let (lo, hi) = (interval.lo(), interval.hi());
    // both endpoints share a sign
    p.c_lambda() * (hi.abs().powf(e) - lo.abs().powf(e)).abs() / e
}

/// Minimal admissible vanishing order: kappa = 2 floor((2 lambda + 1)(1-p)/p).
pub fn min_vanishing_order(lambda: f64, p: f64) -> Result<u32> {
    check_exponent_range(lambda, p)?;
    let raw = (2.0 * lambda + 1.0) * (1.0 - p) / p;
    Ok(2 * raw.floor() as u32)
}

pub(crate) fn check_exponent_range(lambda: f64, p: f64) -> Result<()> {
    let lower = 2.0 * lambda / (2.0 * lambda + 1.0);
    if !(p > lower) || !(p <= 1.0) {
        return Err(DunklError::Domain(format!(
            "exponent must satisfy 2 lambda/(2 lambda + 1) < p <= 1; got p={p} at lambda={lambda}"
        )));
    }
    Ok(())
}

/// Polynomial-times-indicator atom. `coeffs[j]` multiplies zeta^j where
/// zeta = (t - x0)/delta0; serialization is `{lambda, p, x0, delta0, kappa,
/// coeffs[], sup_bound}` in that order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    lambda: f64,
    p: f64,
    x0: f64,
    delta0: f64,
    kappa: u32,
    coeffs: Vec<f64>,
    sup_bound: f64,
}

impl Atom {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn interval(&self) -> Interval {
        Interval {
            x0: self.x0,
            delta0: self.delta0,
        }
    }

    pub fn param(&self) -> DunklParam {
        DunklParam::new(self.lambda).expect("validated at construction")
    }

    /// Polynomial evaluation inside the support, zero outside.
    pub fn eval(&self, t: f64) -> f64 {
        let zeta = (t - self.x0) / self.delta0;
        if zeta.abs() >= 1.0 {
            return 0.0;
        }
        // Horner in the scaled variable
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * zeta + c)
    }

    /// Validates an externally supplied atom (deserialization path).
    pub fn validate(&self) -> Result<()> {
        let dp = DunklParam::new(self.lambda)?;
        let interval = Interval::new(self.x0, self.delta0)?;
        check_exponent_range(self.lambda, self.p)?;
        if self.kappa % 2 != 0 || self.kappa < min_vanishing_order(self.lambda, self.p)? {
            return Err(DunklError::Domain(format!(
                "kappa = {} is below the admissible vanishing order or odd",
                self.kappa
            )));
        }
        if self.coeffs.iter().all(|c| *c == 0.0) {
            return Err(DunklError::Construction("zero atom is not an atom".into()));
        }
        let measure = interval_measure(&dp, &interval);
        let rule =
            weighted_interval_rule(&dp, interval.lo(), interval.hi(), 32 + self.kappa as usize)?;
        let scale =
            dp.c_lambda() * rule.integrate(|t| (t.powi(self.kappa as i32) * self.eval(t)).abs());
        for k in 0..=self.kappa {
            let mk = dp.c_lambda() * rule.integrate(|t| t.powi(k as i32) * self.eval(t));
            if mk.abs() > 1e-10 * scale {
                return Err(DunklError::Construction(format!(
                    "moment k={k} does not vanish: {mk:.3e} vs scale {scale:.3e}"
                )));
            }
        }
        let cap = measure.powf(-1.0 / self.p);
        if self.sup_bound > cap * (1.0 + 1e-10) {
            return Err(DunklError::Construction(format!(
                "sup bound {} exceeds |I|^(-1/p) = {}",
                self.sup_bound, cap
            )));
        }
        Ok(())
    }
}

/// Builds the atom of vanishing order kappa on the given interval: the
/// degree-(kappa+1) polynomial orthogonal to 1, t, ..., t^kappa in the inner
/// product int_I u v |t|^(2 lambda) dt, rescaled so its sup equals
/// |I|_lambda^(-1/p).
pub fn make_atom(
    dp: &DunklParam,
    exponent_p: f64,
    interval: &Interval,
    kappa: u32,
) -> Result<Atom> {
    check_exponent_range(dp.lambda(), exponent_p)?;
    if kappa % 2 != 0 {
        return Err(DunklError::Domain(format!(
            "vanishing order must be even, got {kappa}"
        )));
    }
    if kappa < min_vanishing_order(dp.lambda(), exponent_p)? {
        return Err(DunklError::Domain(format!(
            "kappa = {kappa} below the admissible vanishing order for (lambda={}, p={exponent_p})",
            dp.lambda()
        )));
    }

    let deg = kappa as usize + 1;
    let rule = weighted_interval_rule(dp, interval.lo(), interval.hi(), 24 + 2 * deg)?;
    let zeta = |t: f64| (t - interval.x0()) / interval.delta0();
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        rule.integrate(|t| {
            let z = zeta(t);
            let pu = u.iter().rev().fold(0.0, |acc, &c| acc * z + c);
            let pv = v.iter().rev().fold(0.0, |acc, &c| acc * z + c);
            pu * pv
        })
    };

    // modified Gram-Schmidt on 1, zeta, ..., zeta^(kappa+1), two passes
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(deg + 1);
    for j in 0..=deg {
        let mut v = vec![0.0; deg + 1];
        v[j] = 1.0;
        let raw_norm = inner(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(&v, b);
                for (c, bc) in v.iter_mut().zip(b.iter()) {
                    *c -= proj * bc;
                }
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-12 * raw_norm) || !norm.is_finite() {
            return Err(DunklError::Construction(format!(
                "orthogonalization degenerated at degree {j}; reduce kappa or the interval aspect"
            )));
        }
        for c in v.iter_mut() {
            *c /= norm;
        }
        basis.push(v);
    }
    let mut coeffs = basis.pop().expect("kappa+2 basis vectors");

    // sup over the closed interval: dense sampling plus local refinement
    let poly = |z: f64| coeffs.iter().rev().fold(0.0, |acc: f64, &c| acc * z + c);
    let mut best_z = -1.0f64;
    let mut best = 0.0f64;
    const SAMPLES: usize = 4096;
    for i in 0..=SAMPLES {
        let z = -1.0 + 2.0 * i as f64 / SAMPLES as f64;
        let v = poly(z).abs();
        if v > best {
            best = v;
            best_z = z;
        }
    }
    // golden-section polish around the best sample
    let (mut a, mut b) = (
        (best_z - 2.0 / SAMPLES as f64).max(-1.0),
        (best_z + 2.0 / SAMPLES as f64).min(1.0),
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c1 = b - phi * (b - a);
        let c2 = a + phi * (b - a);
        if poly(c1).abs() > poly(c2).abs() {
            b = c2;
        } else {
            a = c1;
        }
    }
    let sup_raw = best.max(poly(0.5 * (a + b)).abs());

    let measure = interval_measure(dp, interval);
    let target = measure.powf(-1.0 / exponent_p);
    let s = target / sup_raw;
    for c in coeffs.iter_mut() {
        *c *= s;
    }

    let atom = Atom {
        lambda: dp.lambda(),
        p: exponent_p,
        x0: interval.x0(),
        delta0: interval.delta0(),
        kappa,
        coeffs,
        sup_bound: target,
    };
    atom.validate()?;
    Ok(atom)
}

/// Finite atomic sum sum_k lambda_k a_k.
#[derive(Debug, Clone)]
pub struct AtomicRepresentation {
    pub terms: Vec<(Complex64, Atom)>,
}

impl AtomicRepresentation {
    pub fn single(atom: Atom) -> Self {
        AtomicRepresentation {
            terms: vec![(Complex64::new(1.0, 0.0), atom)],
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, (c, a)| acc + c * a.eval(t))
    }

    /// Hull of the supports.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut it = self.terms.iter();
        let first = it.next()?;
        let mut lo = first.1.interval().lo();
        let mut hi = first.1.interval().hi();
        for (_, a) in it {
            lo = lo.min(a.interval().lo());
            hi = hi.max(a.interval().hi());
        }
        Some((lo, hi))
    }
}

/// (sum_k |coeff_k|^p)^(1/p): the quasinorm value of this particular
/// representation, an upper bound for the infimum over all of them.
pub fn quasinorm_upper(r: &AtomicRepresentation, p: f64) -> f64 {
    r.terms
        .iter()
        .map(|(c, _)| c.norm().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn param(l: f64) -> DunklParam {
        DunklParam::new(l).unwrap()
    }

    #[test]
    fn interval_rejects_bad_geometry() {
        assert!(Interval::new(0.0, 0.1).is_err());
        assert!(Interval::new(2.0, 1.0).is_err()); // delta0 = |x0|/2 exactly
        assert!(Interval::new(2.0, -0.1).is_err());
        assert!(Interval::new(-2.0, 0.9).is_ok());
    }

    #[test]
    fn measure_examples() {
        // lambda = 1/2, I(2, 0.5): 0.5 * int_{1.5}^{2.5} x dx = 1
        let m = interval_measure(&param(0.5), &Interval::new(2.0, 0.5).unwrap());
        assert!((m - 1.0).abs() < 1e-14);

        // shrinking radius shrinks measure monotonically
        let mut last = f64::MAX;
        for &d in &[0.5, 0.2, 0.05, 0.01] {
            let m = interval_measure(&param(1.3), &Interval::new(2.0, d).unwrap());
            assert!(m < last);
            last = m;
        }

        // doubling bound with dilation factor 4
        for &lam in &[0.5, 1.0, 2.0] {
            let p = param(lam);
            let i1 = Interval::new(1.0, 0.1).unwrap();
            let small = interval_measure(&p, &i1);
            // measure of I(x0, 4 d0) computed directly (4 d0 may violate the
            // delta0 < |x0|/2 constructor constraint)
            let e = 2.0 * lam + 1.0;
            let big = p.c_lambda() * ((1.0f64 + 0.4).powf(e) - (1.0f64 - 0.4).powf(e)) / e;
            assert!(big <= 4f64.powf(e) * small);
        }
    }

    #[test]
    fn vanishing_order_examples() {
        assert_eq!(min_vanishing_order(1.0, 1.0).unwrap(), 0);
        assert_eq!(min_vanishing_order(1.0, 0.7).unwrap(), 2);
        assert!(min_vanishing_order(1.0, 0.6).is_err());
        assert!(min_vanishing_order(1.0, 1.2).is_err());
    }

    fn moments(a: &Atom, up_to: u32) -> Vec<f64> {
        let dp = a.param();
        let i = a.interval();
        let rule = weighted_interval_rule(&dp, i.lo(), i.hi(), 48).unwrap();
        (0..=up_to)
            .map(|k| dp.c_lambda() * rule.integrate(|t| t.powi(k as i32) * a.eval(t)))
            .collect()
    }

    #[test]
    fn kappa_zero_atom() {
        let dp = param(1.0);
        let i = Interval::new(2.0, 0.5).unwrap();
        let a = make_atom(&dp, 1.0, &i, 0).unwrap();
        let m = moments(&a, 0);
        let scale = dp.c_lambda()
            * weighted_interval_rule(&dp, i.lo(), i.hi(), 48)
                .unwrap()
                .integrate(|t| a.eval(t).abs());
        assert!(m[0].abs() < 1e-12 * scale);

        // normalization: sup equals |I|^{-1/p}
        let target = interval_measure(&dp, &i).powf(-1.0);
        let sup = (0..=10_000)
            .map(|j| {
                a.eval(i.lo() + (i.hi() - i.lo()) * j as f64 / 10_000.0)
                    .abs()
            })
            .fold(0.0f64, f64::max);
        assert!((a.sup_bound() - target).abs() < 1e-12 * target);
        assert!(sup <= a.sup_bound() * (1.0 + 1e-12));
        assert!(sup > 0.999 * a.sup_bound());
    }

    #[test]
    fn kappa_two_atom_moments_and_nondegeneracy() {
        let dp = param(1.0);
        let i = Interval::new(2.0, 0.5).unwrap();
        let a = make_atom(&dp, 0.7, &i, 2).unwrap();
        let m = moments(&a, 3);
        let scale = dp.c_lambda()
            * weighted_interval_rule(&dp, i.lo(), i.hi(), 48)
                .unwrap()
                .integrate(|t| (t.powi(2) * a.eval(t)).abs());
        for k in 0..=2 {
            assert!(m[k].abs() < 1e-10 * scale, "moment {k} = {}", m[k]);
        }
        assert!(m[3].abs() > 1e-6 * scale, "atom degenerate: m3 = {}", m[3]);
    }

    #[test]
    fn eval_contract() {
        let dp = param(1.0);
        let i = Interval::new(2.0, 0.5).unwrap();
        let a = make_atom(&dp, 1.0, &i, 0).unwrap();
        assert_eq!(a.eval(i.lo() - 0.01), 0.0);
        assert_eq!(a.eval(i.hi() + 0.01), 0.0);
        let center = a.coeffs()[0]; // zeta = 0 at the center
        assert!((a.eval(2.0) - center).abs() < 1e-15);
    }

    #[test]
    fn dilation_covariance() {
        let dp = param(0.9);
        let i = Interval::new(1.5, 0.3).unwrap();
        let a = make_atom(&dp, 0.85, &i, 2).unwrap();
        for &c in &[0.5, 2.0, 4.0] {
            let ac = make_atom(&dp, 0.85, &i.dilated(c).unwrap(), 2).unwrap();
            let m = moments(&ac, 2);
            let scale = ac.sup_bound() * interval_measure(&dp, &ac.interval());
            for (k, mk) in m.iter().enumerate() {
                assert!(mk.abs() < 1e-10 * scale, "c={c}, k={k}");
            }
            // admissibility set unchanged: same (p, kappa) accepted
            assert_eq!(ac.kappa(), a.kappa());
        }
    }

    #[test]
    fn reflection_preserves_atom_conditions() {
        let dp = param(1.2);
        let i = Interval::new(2.0, 0.6).unwrap();
        let a = make_atom(&dp, 0.9, &i, 2).unwrap();
        // reflected atom b(t) = a(-t) on I(-x0, d0)
        let refl = Interval::new(-2.0, 0.6).unwrap();
        let rule = weighted_interval_rule(&dp, refl.lo(), refl.hi(), 48).unwrap();
        let scale = dp.c_lambda() * rule.integrate(|t| (t * t * a.eval(-t)).abs());
        for k in 0..=2i32 {
            let mk = dp.c_lambda() * rule.integrate(|t| t.powi(k) * a.eval(-t));
            assert!(mk.abs() < 1e-10 * scale, "reflected moment {k} = {mk}");
        }
    }

    #[test]
    fn quasinorm_examples() {
        let dp = param(1.0);
        let i = Interval::new(2.0, 0.5).unwrap();
        let a = make_atom(&dp, 1.0, &i, 0).unwrap();
        let one = AtomicRepresentation::single(a.clone());
        assert!((quasinorm_upper(&one, 1.0) - 1.0).abs() < 1e-15);

        let two = AtomicRepresentation {
            terms: vec![
                (Complex64::new(0.3, 0.0), a.clone()),
                (Complex64::new(0.7, 0.0), a.clone()),
            ],
        };
        assert!((quasinorm_upper(&two, 1.0) - 1.0).abs() < 1e-15);

        let pair = AtomicRepresentation {
            terms: vec![
                (Complex64::new(1.0, 0.0), a.clone()),
                (Complex64::new(1.0, 0.0), a),
            ],
        };
        assert!((quasinorm_upper(&pair, 0.5) - 4.0).abs() < 1e-12);
        // (1 + 1)^p <= 1^p + 1^p for p = 1/2
        assert!(2f64.powf(0.5) <= 2.0);
    }

    #[test]
    fn serialization_round_trip_is_byte_identical() {
        let dp = param(1.0);
        let a = make_atom(&dp, 0.7, &Interval::new(2.0, 0.5).unwrap(), 2).unwrap();
        let s1 = serde_json::to_string(&a).unwrap();
        let back: Atom = serde_json::from_str(&s1).unwrap();
        back.validate().unwrap();
        let s2 = serde_json::to_string(&back).unwrap();
        assert_eq!(s1, s2);
        // field order as documented
        assert!(s1.starts_with("{\"lambda\":"));
        let order = ["lambda", "p", "x0", "delta0", "kappa", "coeffs", "sup_bound"];
        let mut pos = 0;
        for f in order {
            let at = s1.find(&format!("\"{f}\"")).unwrap();
            assert!(at >= pos);
            pos = at;
        }
    }

    #[test]
    fn zero_atom_rejected() {
        let a = Atom {
            lambda: 1.0,
            p: 1.0,
            x0: 2.0,
            delta0: 0.5,
            kappa: 0,
            coeffs: vec![0.0, 0.0],
            sup_bound: 0.0,
        };
        assert!(a.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_constructed_atoms_satisfy_all_conditions(
            lam in 0.3f64..2.5,
            x0 in 0.5f64..4.0,
            frac in 0.05f64..0.45,
            extra in 0u32..2,
        ) {
            let dp = DunklParam::new(lam).unwrap();
            let pexp = 1.0 - 0.25 * (1.0 - 2.0 * lam / (2.0 * lam + 1.0));
            let i = Interval::new(x0, frac * x0).unwrap();
            let kappa = min_vanishing_order(lam, pexp).unwrap() + 2 * extra;
            let a = make_atom(&dp, pexp, &i, kappa).unwrap();
            a.validate().unwrap();
        }
    }
}
