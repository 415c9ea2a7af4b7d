//! Double-double arithmetic (Dekker/Knuth error-free transformations).
//!
//! The Bessel power series suffers catastrophic cancellation in f64 once the
//! argument exceeds ~10: the largest term grows like e^z while the sum stays
//! O(1). Accumulating in ~106-bit double-double keeps the truncation point of
//! the series well below the target accuracy up to |z| ≈ 60.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    Dd { hi: s, lo: err }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let err = a.mul_add(b, -p);
    Dd { hi: p, lo: err }
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        quick_two_sum(s.hi, lo)
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        quick_two_sum(p.hi, lo)
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.add(other.mul(Dd::from_f64(-q1)));
        let q2 = r.hi / other.hi;
        let r2 = r.add(other.mul(Dd::from_f64(-q2)));
        let q3 = r2.hi / other.hi;
        quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }

    /// Exact product of two f64 values.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        two_prod(a, b)
    }

    /// Exact sum of two f64 values.
    #[inline]
    pub fn sum(a: f64, b: f64) -> Dd {
        two_sum(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representable_identities() {
        let a = Dd::from_f64(0.1);
        let b = Dd::from_f64(0.2);
        let c = a.add(b);
        // 0.1 + 0.2 in dd is closer to 0.3 than the f64 sum is
        assert!((c.to_f64() - 0.3).abs() <= (0.1f64 + 0.2 - 0.3).abs());
        assert_eq!(a.mul(Dd::ONE).to_f64(), 0.1);
    }

    #[test]
    fn product_error_term_captured() {
        let p = Dd::prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // (1+e)^2 = 1 + 2e + e^2; e^2 = 2^-60 is below f64 ulp of 1 but dd keeps it
        let expected_lo = 2f64.powi(-60);
        assert!((p.lo - expected_lo).abs() < 1e-22 || p.lo == 0.0);
        let back = p.add(Dd::from_f64(-1.0 - 2f64.powi(-29)));
        assert!((back.to_f64() - expected_lo).abs() < 1e-25);
    }

    #[test]
    fn division_round_trip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let q = a.div(b);
        let r = q.mul(b);
        assert!((r.to_f64() - std::f64::consts::PI).abs() < 1e-30);
    }

    #[test]
    fn cancellation_in_long_alternating_sum() {
        // sum of exp series for exp(-20) computed by alternating series of exp(20) terms
        let z = 20.0f64;
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..200 {
            term = term.mul(Dd::from_f64(-z)).div(Dd::from_f64(n as f64));
            sum = sum.add(term);
        }
        let exact = (-20.0f64).exp();
        // f64 accumulation would lose everything here (max term ~ 4e7 vs sum ~ 2e-9)
        assert!(
            ((sum.to_f64() - exact) / exact).abs() < 1e-12,
            "dd alternating sum lost precision: {} vs {}",
            sum.to_f64(),
            exact
        );
    }
}
