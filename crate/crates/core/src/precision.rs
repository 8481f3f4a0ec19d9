//! Emulated low-precision floating point on binary64 carriers.
//!
//! A [`PrecisionContext`] describes a target format by its number of stored
//! fraction bits `b`. Every operation computes the binary64 result together
//! with the sign of its exact residual and then rounds once to the `b`-bit
//! grid, so results are correctly rounded (no double-rounding artifacts at
//! midpoints) for all `b <= 25`, which covers half and single precision.
//! Wider formats are correctly rounded for `add`, `sub`, `mul`, `div` and
//! `sqrt`; `mul_add` may mis-round an exact midpoint there.

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar with binary64 components.
pub type CScalar = Complex64;

/// Largest supported fraction width; at this width rounding is the identity.
pub const MAX_MANTISSA_BITS: u32 = 52;

const BINARY16_EMIN: i32 = -14;
const BINARY16_EMAX: i32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rounding {
    #[default]
    NearestEven,
}

/// Exponent-range policy applied after significand rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RangePolicy {
    /// Only the significand is rounded; any binary64 exponent is kept.
    #[default]
    Unbounded,
    /// IEEE binary16 exponent range: gradual underflow below 2^-14 and an
    /// error instead of infinity on overflow.
    Binary16Clamp,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum PrecisionError {
    #[error("value {0:e} overflows the binary16 exponent range")]
    Overflow(f64),
    #[error("non-finite operand")]
    NonFinite,
    #[error("square root of negative value {0:e}")]
    NegativeSqrt(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("mantissa width {0} outside 1..=52")]
    InvalidMantissa(u32),
}

impl PrecisionError {
    /// Whether the error is an arithmetic domain violation (as opposed to a
    /// range or input problem).
    pub fn is_domain(&self) -> bool {
        matches!(self, Self::NegativeSqrt(_) | Self::DivisionByZero)
    }
}

pub type Result<T> = std::result::Result<T, PrecisionError>;

/// Target arithmetic format for all emulated operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    mantissa_bits: u32,
    rounding: Rounding,
    fma: bool,
    range: RangePolicy,
}

impl PrecisionContext {
    /// Context with `mantissa_bits` stored fraction bits, unbounded exponent
    /// range and fused multiply-add enabled.
    pub fn new(mantissa_bits: u32) -> Result<Self> {
        if !(1..=MAX_MANTISSA_BITS).contains(&mantissa_bits) {
            return Err(PrecisionError::InvalidMantissa(mantissa_bits));
        }
        Ok(Self {
            mantissa_bits,
            rounding: Rounding::NearestEven,
            fma: true,
            range: RangePolicy::Unbounded,
        })
    }

    /// IEEE half precision: 10 fraction bits, binary16 exponent range.
    pub fn half() -> Self {
        Self::new(10)
            .expect("valid width")
            .with_range(RangePolicy::Binary16Clamp)
    }

    /// 23 fraction bits, unbounded exponent.
    pub fn single() -> Self {
        Self::new(23).expect("valid width")
    }

    /// Working precision: rounding is the identity.
    pub fn exact() -> Self {
        Self::new(MAX_MANTISSA_BITS).expect("valid width")
    }

    pub fn with_fma(mut self, fma: bool) -> Self {
        self.fma = fma;
        self
    }

    pub fn with_range(mut self, range: RangePolicy) -> Self {
        self.range = range;
        self
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn fma(&self) -> bool {
        self.fma
    }

    pub fn range(&self) -> RangePolicy {
        self.range
    }

    /// Unit round-off `u = 2^(-b-1)`.
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.mantissa_bits as i32) - 1)
    }

    /// Scaled machine precision `eps = u / sqrt(3)`, the RMS rounding error
    /// when the discarded part is uniformly distributed.
    pub fn eps(&self) -> f64 {
        self.unit_roundoff() / 3f64.sqrt()
    }

    /// Round `x` to the nearest representable value, ties to even.
    pub fn round(&self, x: f64) -> Result<f64> {
        self.round_residual(x, 0.0)
    }

    /// Round the exact value `x + r`, where `x` is the binary64 rounding of
    /// that value and only the sign of `r` is significant.
    fn round_residual(&self, x: f64, residual: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(PrecisionError::NonFinite);
        }
        if x == 0.0 {
            if residual == 0.0 || !residual.is_finite() {
                return Ok(x);
            }
            return self.round_residual(residual, 0.0);
        }

        let bits = x.to_bits();
        let negative = bits >> 63 != 0;
        let exp_field = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut m, mut e) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        // Normalize so that x = m * 2^e with m in [2^52, 2^53).
        let shift = m.leading_zeros() as i32 - 11;
        m <<= shift;
        e -= shift;
        let lead = e + 52;

        let mut drop = MAX_MANTISSA_BITS as i32 - self.mantissa_bits as i32;
        if self.range == RangePolicy::Binary16Clamp && lead < BINARY16_EMIN {
            drop += BINARY16_EMIN - lead;
        }
        if drop <= 0 {
            return self.check_range(x);
        }
        if drop >= 54 {
            // Below half the smallest grid spacing.
            return Ok(if negative { -0.0 } else { 0.0 });
        }

        let q = m >> drop;
        let rem = m & ((1u64 << drop) - 1);
        let half = 1u64 << (drop - 1);
        let round_up = match rem.cmp(&half) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                if residual == 0.0 {
                    q & 1 == 1
                } else {
                    // Residual pointing away from zero pushes the magnitude up.
                    (residual > 0.0) != negative
                }
            }
        };
        let q = q + round_up as u64;
        let magnitude = scale2(q as f64, e + drop);
        let r = if negative { -magnitude } else { magnitude };
        self.check_range(r)
    }

    fn check_range(&self, r: f64) -> Result<f64> {
        if self.range == RangePolicy::Binary16Clamp {
            let max = (2.0 - pow2(-(self.mantissa_bits as i32))) * pow2(BINARY16_EMAX);
            if r.abs() > max {
                return Err(PrecisionError::Overflow(r));
            }
        }
        Ok(r)
    }

    pub fn add(&self, x: f64, y: f64) -> Result<f64> {
        check_finite(x)?;
        check_finite(y)?;
        let (s, err) = two_sum(x, y);
        self.round_residual(s, err)
    }

    pub fn sub(&self, x: f64, y: f64) -> Result<f64> {
        self.add(x, -y)
    }

    pub fn mul(&self, x: f64, y: f64) -> Result<f64> {
        check_finite(x)?;
        check_finite(y)?;
        let p = x * y;
        let err = x.mul_add(y, -p);
        self.round_residual(p, err)
    }

    pub fn div(&self, x: f64, y: f64) -> Result<f64> {
        check_finite(x)?;
        check_finite(y)?;
        if y == 0.0 {
            return Err(PrecisionError::DivisionByZero);
        }
        let q = x / y;
        // x - q*y is exact for a correctly rounded quotient.
        let r = (-q).mul_add(y, x);
        self.round_residual(q, r / y)
    }

    pub fn sqrt(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        if x < 0.0 {
            return Err(PrecisionError::NegativeSqrt(x));
        }
        let s = x.sqrt();
        let r = (-s).mul_add(s, x);
        self.round_residual(s, r)
    }

    /// `a * b + c` with a single rounding.
    pub fn mul_add(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        check_finite(a)?;
        check_finite(b)?;
        check_finite(c)?;
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let (s, se) = two_sum(p, c);
        self.round_residual(s, se + pe)
    }

    /// `c + a * b`, fused or with a separately rounded product depending on
    /// the context's FMA flag.
    fn madd(&self, c: f64, a: f64, b: f64) -> Result<f64> {
        if self.fma {
            self.mul_add(a, b, c)
        } else {
            let p = self.mul(a, b)?;
            self.add(c, p)
        }
    }

    /// `acc + conj(a) * b` built from real emulated operations: two real
    /// multiply-accumulates per component, fused when FMA is enabled,
    /// otherwise with every product rounded before it is added.
    pub fn cmul_acc(&self, acc: CScalar, a: CScalar, b: CScalar) -> Result<CScalar> {
        self.complex_madd(acc, a, b, true, false)
    }

    /// `acc - conj(a) * b`.
    pub fn cmul_sub_conj(&self, acc: CScalar, a: CScalar, b: CScalar) -> Result<CScalar> {
        self.complex_madd(acc, a, b, true, true)
    }

    /// `acc + a * b`.
    pub fn cmul_acc_plain(&self, acc: CScalar, a: CScalar, b: CScalar) -> Result<CScalar> {
        self.complex_madd(acc, a, b, false, false)
    }

    /// `acc - a * b`.
    pub fn cmul_sub_plain(&self, acc: CScalar, a: CScalar, b: CScalar) -> Result<CScalar> {
        self.complex_madd(acc, a, b, false, true)
    }

    fn complex_madd(
        &self,
        acc: CScalar,
        a: CScalar,
        b: CScalar,
        conj_a: bool,
        subtract: bool,
    ) -> Result<CScalar> {
        let s = if subtract { -1.0 } else { 1.0 };
        let ar = s * a.re;
        let ai = if conj_a { -s * a.im } else { s * a.im };
        // (ar + i ai)(br + i bi) = (ar br - ai bi) + i (ar bi + ai br)
        let re = self.madd(self.madd(acc.re, ar, b.re)?, -ai, b.im)?;
        let im = self.madd(self.madd(acc.im, ar, b.im)?, ai, b.re)?;
        Ok(CScalar::new(re, im))
    }

    /// Real accumulation `acc + |a|^2`; the imaginary part is never formed.
    pub fn abs2_acc(&self, acc: f64, a: CScalar) -> Result<f64> {
        self.madd(self.madd(acc, a.re, a.re)?, a.im, a.im)
    }

    /// Real accumulation `acc - |a|^2`.
    pub fn abs2_sub(&self, acc: f64, a: CScalar) -> Result<f64> {
        self.madd(self.madd(acc, -a.re, a.re)?, -a.im, a.im)
    }

    /// Complex value divided by a real divisor, componentwise.
    pub fn cdiv_real(&self, z: CScalar, d: f64) -> Result<CScalar> {
        Ok(CScalar::new(self.div(z.re, d)?, self.div(z.im, d)?))
    }

    pub fn round_complex(&self, z: CScalar) -> Result<CScalar> {
        Ok(CScalar::new(self.round(z.re)?, self.round(z.im)?))
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(PrecisionError::NonFinite)
    }
}

/// Error-free transformation: `s + err == a + b` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// 2^k for k in the binary64 normal exponent range.
fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

fn scale2(mut v: f64, mut k: i32) -> f64 {
    while k > 1023 {
        v *= pow2(1023);
        k -= 1023;
    }
    while k < -1022 {
        v *= pow2(-1022);
        k += 1022;
    }
    v * pow2(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(b: u32) -> PrecisionContext {
        PrecisionContext::new(b).unwrap()
    }

    /// Nearest point of the b-bit grid found by walking every significand of
    /// the binade containing x (ties to even significand).
    fn grid_nearest(x: f64, b: u32) -> f64 {
        let e = x.abs().log2().floor() as i32;
        let base = 2f64.powi(e);
        let step = base * 2f64.powi(-(b as i32));
        let mut best = base;
        let mut best_k = 0u64;
        for k in 0..=(1u64 << b) {
            let v = base + k as f64 * step;
            let d = (v - x.abs()).abs();
            let bd = (best - x.abs()).abs();
            if d < bd || (d == bd && k % 2 == 0 && best_k % 2 == 1) {
                best = v;
                best_k = k;
            }
        }
        best.copysign(x)
    }

    #[test]
    fn tie_rounds_to_even_significand() {
        assert_eq!(ctx(10).round(1.0 + 2f64.powi(-12)).unwrap(), 1.0);
        // tie above an odd significand rounds up
        let x = 1.0 + 2f64.powi(-10) + 2f64.powi(-11);
        assert_eq!(ctx(10).round(x).unwrap(), 1.0 + 2.0 * 2f64.powi(-10));
    }

    #[test]
    fn representable_value_is_unchanged() {
        let x = 1.0 + 2f64.powi(-10);
        assert_eq!(ctx(10).round(x).unwrap(), x);
    }

    #[test]
    fn one_third_matches_grid_enumeration() {
        let oracle = grid_nearest(1.0 / 3.0, 10);
        assert_eq!(oracle, 1365.0 * 2f64.powi(-12));
        assert_eq!(ctx(10).round(1.0 / 3.0).unwrap(), oracle);
        assert_eq!(oracle, 0.333251953125);
    }

    #[test]
    fn elementary_operations() {
        let c = ctx(10);
        assert_eq!(c.add(1.0, 2f64.powi(-12)).unwrap(), 1.0);
        let sqrt2 = grid_nearest(2f64.sqrt(), 10);
        assert_eq!(sqrt2, 1.4140625);
        assert_eq!(c.sqrt(2.0).unwrap(), sqrt2);
        assert_eq!(c.div(1.0, 3.0).unwrap(), 0.333251953125);
        assert_eq!(c.sub(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(c.mul(3.0, 5.0).unwrap(), 15.0);
    }

    #[test]
    fn domain_errors() {
        let c = ctx(10);
        assert_eq!(c.sqrt(-1.0), Err(PrecisionError::NegativeSqrt(-1.0)));
        assert_eq!(c.div(1.0, 0.0), Err(PrecisionError::DivisionByZero));
        assert_eq!(c.round(f64::NAN), Err(PrecisionError::NonFinite));
        assert!(c.sqrt(-0.0).is_ok());
        assert!(PrecisionContext::new(0).is_err());
        assert!(PrecisionContext::new(53).is_err());
    }

    #[test]
    fn double_rounding_is_avoided_at_midpoints() {
        // 1 + 2^-11 + 2^-40 should round up at b = 10; a naive path that first
        // forms a midpoint and then rounds would go to even (down).
        let c = ctx(10);
        let big = 1.0 + 2f64.powi(-11);
        assert_eq!(c.add(big, 2f64.powi(-40)).unwrap(), 1.0 + 2f64.powi(-10));
        assert_eq!(c.add(big, -(2f64.powi(-40))).unwrap(), 1.0);
        // x*y exactly on a midpoint plus a tiny addend under FMA
        assert_eq!(
            c.mul_add(1.0 + 2f64.powi(-11), 1.0, 2f64.powi(-60)).unwrap(),
            1.0 + 2f64.powi(-10)
        );
        // quotient slightly above a midpoint: (1 + 2^-11 + 2^-30) / 1
        let q = c.div(1.0 + 2f64.powi(-11) + 2f64.powi(-30), 1.0).unwrap();
        assert_eq!(q, 1.0 + 2f64.powi(-10));
    }

    #[test]
    fn binary16_clamp_overflow_and_subnormals() {
        let h = PrecisionContext::half();
        assert_eq!(h.round(65504.0).unwrap(), 65504.0);
        // 65519 rounds down to max finite, 65520 is the overflow threshold
        assert_eq!(h.round(65519.0).unwrap(), 65504.0);
        assert!(matches!(h.round(65520.0), Err(PrecisionError::Overflow(_))));
        assert!(matches!(h.mul(300.0, 300.0), Err(PrecisionError::Overflow(_))));
        // smallest subnormal is 2^-24; half of it ties to zero
        let tiny = 2f64.powi(-24);
        assert_eq!(h.round(tiny).unwrap(), tiny);
        assert_eq!(h.round(tiny * 0.5).unwrap(), 0.0);
        assert_eq!(h.round(tiny * 0.75).unwrap(), tiny);
        assert_eq!(h.round(3.0 * tiny + 0.4 * tiny).unwrap(), 3.0 * tiny);
        // the same values unbounded keep their significand
        let u = ctx(10);
        assert_eq!(u.round(tiny * 0.75).unwrap(), tiny * 0.75);
        assert_eq!(u.round(1e10).unwrap(), grid_nearest(1e10, 10));
    }

    #[test]
    fn exact_context_is_identity() {
        let c = PrecisionContext::exact();
        for &x in &[1.0 / 3.0, std::f64::consts::PI, -1e-300, 5e-324] {
            assert_eq!(c.round(x).unwrap(), x);
        }
        assert_eq!(c.add(0.1, 0.2).unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn complex_multiply_accumulate() {
        let c = ctx(10);
        let one = CScalar::new(1.0, 0.0);
        assert_eq!(c.cmul_acc(CScalar::new(0.0, 0.0), one, one).unwrap(), one);
        let nofma = c.with_fma(false);
        let r = nofma
            .cmul_acc(CScalar::new(0.0, 0.0), one, CScalar::new(1.0 / 3.0, 0.0))
            .unwrap();
        assert_eq!(r, CScalar::new(0.333251953125, 0.0));
        for cx in [c, nofma, PrecisionContext::exact()] {
            let i = CScalar::new(0.0, 1.0);
            assert_eq!(cx.cmul_acc(one, i, i).unwrap(), CScalar::new(2.0, 0.0));
        }
        // conj(1+2i) (3+4i) = 11 - 2i ; (1+2i)(3+4i) = -5 + 10i
        let a = CScalar::new(1.0, 2.0);
        let b = CScalar::new(3.0, 4.0);
        let z = CScalar::new(0.0, 0.0);
        assert_eq!(c.cmul_acc(z, a, b).unwrap(), CScalar::new(11.0, -2.0));
        assert_eq!(c.cmul_acc_plain(z, a, b).unwrap(), CScalar::new(-5.0, 10.0));
        assert_eq!(c.cmul_sub_conj(z, a, b).unwrap(), CScalar::new(-11.0, 2.0));
        assert_eq!(c.cmul_sub_plain(z, a, b).unwrap(), CScalar::new(5.0, -10.0));
        assert_eq!(c.abs2_acc(1.0, a).unwrap(), 6.0);
        assert_eq!(c.abs2_sub(6.0, a).unwrap(), 1.0);
    }

    #[test]
    fn constants_for_half_and_single() {
        assert_eq!(ctx(10).eps(), 2f64.powi(-11) / 3f64.sqrt());
        assert_eq!(ctx(23).eps(), 2f64.powi(-24) / 3f64.sqrt());
        assert_eq!(ctx(10).unit_roundoff(), 2f64.powi(-11));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn finite() -> impl Strategy<Value = f64> {
            (-1e6f64..1e6).prop_filter("non-zero", |x| *x != 0.0)
        }

        /// A `b`-bit value `+-m 2^e` with `e` in a narrow range, so sums and
        /// products of two of them are exact in binary64.
        fn on_grid(b: u32) -> impl Strategy<Value = f64> {
            (0u64..(1u64 << b), -8i32..8, any::<bool>()).prop_map(move |(f, e, neg)| {
                let m = ((1u64 << b) | f) as f64;
                let v = m * 2f64.powi(e - b as i32);
                if neg {
                    -v
                } else {
                    v
                }
            })
        }

        proptest! {
            #[test]
            fn matches_grid_enumeration(x in finite(), b in 1u32..=8) {
                prop_assert_eq!(ctx(b).round(x).unwrap(), grid_nearest(x, b));
            }

            #[test]
            fn idempotent_monotone_and_within_u(x in finite(), y in finite(), b in 1u32..=52) {
                let c = ctx(b);
                let (rx, ry) = (c.round(x).unwrap(), c.round(y).unwrap());
                prop_assert_eq!(c.round(rx).unwrap(), rx);
                if x <= y {
                    prop_assert!(rx <= ry);
                }
                prop_assert!((rx - x).abs() <= c.unit_roundoff() * x.abs());
            }

            #[test]
            fn elementary_ops_are_correctly_rounded(x in on_grid(10), y in on_grid(10), z in on_grid(10)) {
                let c = ctx(10);
                prop_assert_eq!(c.add(x, y).unwrap(), c.round(x + y).unwrap());
                prop_assert_eq!(c.sub(x, y).unwrap(), c.round(x - y).unwrap());
                prop_assert_eq!(c.mul(x, y).unwrap(), c.round(x * y).unwrap());
                prop_assert_eq!(c.mul_add(x, y, z).unwrap(), c.round(x * y + z).unwrap());
                let q = c.div(x, y).unwrap();
                // q is the nearest grid value to x / y: its neighbours are not closer.
                let step = c.unit_roundoff() * 2.0 * 2f64.powi(q.abs().log2().floor() as i32);
                let d = (q * y - x).abs();
                prop_assert!(((q + step) * y - x).abs() >= d);
                prop_assert!(((q - step) * y - x).abs() >= d);
            }
        }
    }
}
