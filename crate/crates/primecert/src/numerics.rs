//! Certified-arithmetic substrate: exact big rationals and directed-rounding
//! real enclosures.
//!
//! Every upper-bound term in a certificate is rounded up and every
//! lower-bound term rounded down, so a positive computed margin rigorously
//! implies the true inequality. [`Enclosure`] carries both sides through
//! arbitrary expressions; [`DirectedValue`] tags a single side.
//!
//! Combinatorial quantities (factorials, binomials, polynomial coefficients,
//! weight norms) stay exact as [`BigRational`] end to end; conversion to a
//! directed real happens only at final assembly.

use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound, Pow, PowAssignRound, SubAssignRound};
use rug::{Float, Integer, Rational};
use thiserror::Error;

/// Exact arbitrary-precision rational, always reduced to lowest terms with a
/// positive denominator (canonical form maintained by GMP).
pub type BigRational = Rational;

/// Arbitrary-precision integer.
pub type BigInt = Integer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericsError {
    #[error("precision {0} outside supported range [{MIN_PRECISION}, {MAX_PRECISION}]")]
    PrecisionRange(u32),
    #[error("invalid decimal literal `{0}`")]
    BadDecimal(String),
}

pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 1 << 22;

/// Working precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(192);

    pub fn new(bits: u32) -> Result<Self, NumericsError> {
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&bits) {
            return Err(NumericsError::PrecisionRange(bits));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Result<Self, NumericsError> {
        Precision::new(self.0.saturating_mul(2))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Re-runs a computation at precision `p`; deterministic for fixed `p`.
pub fn with_precision<T>(
    bits: u32,
    computation: impl FnOnce(Precision) -> T,
) -> Result<T, NumericsError> {
    Ok(computation(Precision::new(bits)?))
}

/// Rounding direction of a one-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The value never exceeds the exact quantity it bounds.
    Down,
    /// The value is never below the exact quantity it bounds.
    Up,
}

impl Direction {
    fn round(self) -> Round {
        match self {
            Direction::Down => Round::Down,
            Direction::Up => Round::Up,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }
}

/// Certified sign of a real quantity known through directed bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Unknown,
}

/// A one-sided certified bound: `Down` never exceeds the exact value, `Up` is
/// never below it.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedValue {
    magnitude: Float,
    direction: Direction,
}

impl DirectedValue {
    pub fn new(magnitude: Float, direction: Direction) -> Self {
        DirectedValue { magnitude, direction }
    }

    pub fn from_rational(value: &Rational, prec: Precision, direction: Direction) -> Self {
        let (magnitude, _) = Float::with_val_round(prec.bits(), value, direction.round());
        DirectedValue { magnitude, direction }
    }

    pub fn magnitude(&self) -> &Float {
        &self.magnitude
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn precision(&self) -> u32 {
        self.magnitude.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.magnitude.to_f64()
    }

    pub fn neg(&self) -> DirectedValue {
        DirectedValue::new(Float::with_val(self.precision(), -&self.magnitude), self.direction.flip())
    }

    /// Directed sum; both operands must share a direction.
    pub fn add(&self, other: &DirectedValue) -> DirectedValue {
        assert_eq!(self.direction, other.direction, "directed add requires matching directions");
        let mut m = self.magnitude.clone();
        m.add_assign_round(&other.magnitude, self.direction.round());
        DirectedValue::new(m, self.direction)
    }

    /// Directed difference `self - other`; `other` must carry the opposite
    /// direction so the bound stays sound.
    pub fn sub(&self, other: &DirectedValue) -> DirectedValue {
        assert_eq!(
            self.direction,
            other.direction.flip(),
            "directed sub requires opposite directions"
        );
        let mut m = self.magnitude.clone();
        m.sub_assign_round(&other.magnitude, self.direction.round());
        DirectedValue::new(m, self.direction)
    }

    /// Directed product of nonnegative quantities.
    pub fn mul(&self, other: &DirectedValue) -> DirectedValue {
        assert_eq!(self.direction, other.direction, "directed mul requires matching directions");
        debug_assert!(
            self.magnitude >= 0 && other.magnitude >= 0,
            "directed mul is sound only for nonnegative operands"
        );
        let mut m = self.magnitude.clone();
        m.mul_assign_round(&other.magnitude, self.direction.round());
        DirectedValue::new(m, self.direction)
    }

    /// Monotone map: exp preserves direction.
    pub fn exp(&self) -> DirectedValue {
        let mut m = self.magnitude.clone();
        m.exp_round(self.direction.round());
        DirectedValue::new(m, self.direction)
    }

    /// Monotone map: natural log preserves direction (argument must be positive).
    pub fn ln(&self) -> DirectedValue {
        assert!(self.magnitude > 0, "ln requires a positive argument");
        let mut m = self.magnitude.clone();
        m.ln_round(self.direction.round());
        DirectedValue::new(m, self.direction)
    }

    /// Monotone map: square root preserves direction.
    pub fn sqrt(&self) -> DirectedValue {
        assert!(self.magnitude >= 0, "sqrt requires a nonnegative argument");
        let mut m = self.magnitude.clone();
        m.sqrt_round(self.direction.round());
        DirectedValue::new(m, self.direction)
    }
}

/// Returns `Positive` only if the Down-directed bound is `> 0`, `Negative`
/// only if the Up-directed bound is `< 0`, and `Unknown` otherwise.
pub fn certified_sign(lower: &DirectedValue, upper: &DirectedValue) -> Sign {
    debug_assert_eq!(lower.direction(), Direction::Down);
    debug_assert_eq!(upper.direction(), Direction::Up);
    if *lower.magnitude() > 0 {
        Sign::Positive
    } else if *upper.magnitude() < 0 {
        Sign::Negative
    } else {
        Sign::Unknown
    }
}

/// Two-sided enclosure `[lo, hi]` of a real quantity, outward-rounded at a
/// fixed working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    lo: Float,
    hi: Float,
}

impl Enclosure {
    fn assert_ordered(&self) {
        debug_assert!(
            self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi,
            "enclosure must be finite and ordered: [{:?}, {:?}]",
            self.lo,
            self.hi
        );
    }

    pub fn from_parts(lo: Float, hi: Float) -> Self {
        let e = Enclosure { lo, hi };
        e.assert_ordered();
        e
    }

    /// Exact conversion of a rational, outward-rounded.
    pub fn from_rational(value: &Rational, prec: Precision) -> Self {
        let (lo, _) = Float::with_val_round(prec.bits(), value, Round::Down);
        let (hi, _) = Float::with_val_round(prec.bits(), value, Round::Up);
        Enclosure { lo, hi }
    }

    pub fn from_u64(value: u64, prec: Precision) -> Self {
        let lo = Float::with_val(prec.bits(), value);
        let hi = lo.clone();
        Enclosure { lo, hi }
    }

    pub fn from_integer(value: &Integer, prec: Precision) -> Self {
        let (lo, _) = Float::with_val_round(prec.bits(), value, Round::Down);
        let (hi, _) = Float::with_val_round(prec.bits(), value, Round::Up);
        Enclosure { lo, hi }
    }

    pub fn zero(prec: Precision) -> Self {
        Enclosure::from_u64(0, prec)
    }

    pub fn one(prec: Precision) -> Self {
        Enclosure::from_u64(1, prec)
    }

    /// Enclosure of pi.
    pub fn pi(prec: Precision) -> Self {
        let (lo, _) =
            Float::with_val_round(prec.bits(), rug::float::Constant::Pi, Round::Down);
        let (hi, _) = Float::with_val_round(prec.bits(), rug::float::Constant::Pi, Round::Up);
        Enclosure { lo, hi }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.lo.prec()
    }

    pub fn down(&self) -> DirectedValue {
        DirectedValue::new(self.lo.clone(), Direction::Down)
    }

    pub fn up(&self) -> DirectedValue {
        DirectedValue::new(self.hi.clone(), Direction::Up)
    }

    pub fn certified_sign(&self) -> Sign {
        certified_sign(&self.down(), &self.up())
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lo >= 0
    }

    pub fn to_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        let mut lo = self.lo.clone();
        lo.add_assign_round(&other.lo, Round::Down);
        let mut hi = self.hi.clone();
        hi.add_assign_round(&other.hi, Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        let mut lo = self.lo.clone();
        lo.sub_assign_round(&other.hi, Round::Down);
        let mut hi = self.hi.clone();
        hi.sub_assign_round(&other.lo, Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    pub fn neg(&self) -> Enclosure {
        let p = self.precision();
        Enclosure::from_parts(
            Float::with_val(p, -&self.hi),
            Float::with_val(p, -&self.lo),
        )
    }

    pub fn abs(&self) -> Enclosure {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            let p = self.precision();
            let mag = if self.neg_lo_gt_hi() { -self.lo.clone() } else { self.hi.clone() };
            Enclosure::from_parts(Float::with_val(p, 0), mag)
        }
    }

    fn neg_lo_gt_hi(&self) -> bool {
        let neg_lo = -self.lo.clone();
        neg_lo > self.hi
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let cand = |a: &Float, b: &Float, r: Round| {
            let mut x = a.clone();
            x.mul_assign_round(b, r);
            x
        };
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let d = cand(a, b, Round::Down);
            let u = cand(a, b, Round::Up);
            lo = Some(match lo {
                None => d,
                Some(cur) => {
                    if d < cur {
                        d
                    } else {
                        cur
                    }
                }
            });
            hi = Some(match hi {
                None => u,
                Some(cur) => {
                    if u > cur {
                        u
                    } else {
                        cur
                    }
                }
            });
        }
        Enclosure::from_parts(lo.unwrap(), hi.unwrap())
    }

    /// Division; the denominator must not straddle zero.
    pub fn div(&self, other: &Enclosure) -> Enclosure {
        assert!(
            !other.contains_zero(),
            "enclosure division by an interval containing zero"
        );
        self.mul(&other.recip())
    }

    pub fn recip(&self) -> Enclosure {
        assert!(!self.contains_zero(), "enclosure reciprocal of an interval containing zero");
        let mut lo = self.hi.clone();
        lo.recip_round(Round::Down);
        let mut hi = self.lo.clone();
        hi.recip_round(Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    pub fn exp(&self) -> Enclosure {
        let mut lo = self.lo.clone();
        lo.exp_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp_round(Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    pub fn ln(&self) -> Enclosure {
        assert!(self.lo > 0, "ln requires a strictly positive enclosure");
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    pub fn sqrt(&self) -> Enclosure {
        assert!(self.lo >= 0, "sqrt requires a nonnegative enclosure");
        let mut lo = self.lo.clone();
        lo.sqrt_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sqrt_round(Round::Up);
        Enclosure::from_parts(lo, hi)
    }

    /// Integer power with sign handling.
    pub fn powi(&self, n: i64) -> Enclosure {
        if n == 0 {
            return Enclosure::one(Precision(self.precision()));
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let n32: u32 = n.try_into().expect("exponent too large");
        let pow = |f: &Float, r: Round| {
            let mut x = f.clone();
            x.pow_assign_round(n32, r);
            x
        };
        if self.lo >= 0 {
            Enclosure::from_parts(pow(&self.lo, Round::Down), pow(&self.hi, Round::Up))
        } else if self.hi <= 0 {
            let m = self.neg().powi(n);
            if n % 2 == 0 {
                m
            } else {
                m.neg()
            }
        } else if n % 2 == 1 {
            Enclosure::from_parts(pow(&self.lo, Round::Down), pow(&self.hi, Round::Up))
        } else {
            let a = self.abs();
            let p = self.precision();
            Enclosure::from_parts(Float::with_val(p, 0), pow(&a.hi, Round::Up))
        }
    }

    /// Real power `self^exponent` for a strictly positive base.
    pub fn pow(&self, exponent: &Enclosure) -> Enclosure {
        assert!(self.lo > 0, "real power requires a strictly positive base");
        exponent.mul(&self.ln()).exp()
    }

    /// Enclosure of `min(a, b)` as real quantities.
    pub fn min(&self, other: &Enclosure) -> Enclosure {
        let lo = if self.lo < other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi < other.hi { self.hi.clone() } else { other.hi.clone() };
        Enclosure::from_parts(lo, hi)
    }

    /// Enclosure of `max(a, 0)`; used to clamp brackets that are nonnegative
    /// by theory but may round negative.
    pub fn clamp_nonnegative(&self) -> Enclosure {
        let p = self.precision();
        let z = Float::with_val(p, 0);
        let lo = if self.lo < z { z.clone() } else { self.lo.clone() };
        let hi = if self.hi < z { z } else { self.hi.clone() };
        Enclosure::from_parts(lo, hi)
    }

    /// True if `self.hi < other.lo`, i.e. the quantities compare strictly.
    pub fn certainly_lt(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }
}

/// `2^-k` as an exact rational.
pub fn pow2_rational(k: i64) -> Rational {
    let mut r = Rational::from(1);
    if k >= 0 {
        r /= Rational::from(Integer::from(1) << (k as u32));
    } else {
        r *= Rational::from(Integer::from(1) << ((-k) as u32));
    }
    r
}

/// Exact factorial.
pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

/// Parses a plain or scientific decimal literal into an exact rational.
///
/// Accepts forms like `1132491`, `11.637732363`, `3.580e-8`, `-1.7007e11`.
pub fn parse_decimal(text: &str) -> Result<Rational, NumericsError> {
    let bad = || NumericsError::BadDecimal(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let (s, sign) = match s.strip_prefix('-') {
        Some(rest) => (rest, -1),
        None => (s.strip_prefix('+').unwrap_or(s), 1),
    };
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numerator = Integer::from_str_radix(&digits, 10).map_err(|_| bad())?;
    let mut value = Rational::from(numerator);
    let shift = exp10 - frac_part.len() as i64;
    let ten = Integer::from(10);
    if shift > 0 {
        value *= Rational::from(ten.pow(shift as u32));
    } else if shift < 0 {
        value /= Rational::from(ten.pow((-shift) as u32));
    }
    if sign < 0 {
        value = -value;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    #[test]
    fn certified_sign_positive_lower_bound() {
        let e = Enclosure::from_rational(&Rational::from((12, 100)), p());
        assert_eq!(e.certified_sign(), Sign::Positive);
    }

    #[test]
    fn certified_sign_negative_upper_bound() {
        let lo = DirectedValue::from_rational(&Rational::from((-2, 10)), p(), Direction::Down);
        let hi = DirectedValue::from_rational(&Rational::from((-1, 10)), p(), Direction::Up);
        assert_eq!(certified_sign(&lo, &hi), Sign::Negative);
    }

    #[test]
    fn certified_sign_straddles_zero() {
        let tiny = Rational::from((1, Integer::from(10).pow(30)));
        let lo = DirectedValue::from_rational(&(-tiny.clone()), p(), Direction::Down);
        let hi = DirectedValue::from_rational(&tiny, p(), Direction::Up);
        assert_eq!(certified_sign(&lo, &hi), Sign::Unknown);
    }

    #[test]
    fn exp_of_one_rounds_ordered() {
        for bits in [64u32, 128, 192] {
            let prec = Precision::new(bits).unwrap();
            let one = Enclosure::one(prec);
            let e = one.exp();
            assert!(e.lo() < e.hi());
            assert!(e.lo().to_f64() < 2.718281828459046);
            assert!(e.hi().to_f64() > 2.718281828459044);
        }
    }

    #[test]
    fn with_precision_rejects_small_and_reruns_deterministically() {
        assert!(with_precision(32, |_| ()).is_err());
        let f = |prec: Precision| {
            Enclosure::from_rational(&Rational::from((256, 693)), prec)
                .ln()
                .lo()
                .clone()
        };
        let a = with_precision(128, f).unwrap();
        let b = with_precision(128, f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rational_stays_exact_across_precision() {
        // identical rational, differing rounded reals
        let r = crate::weight::norm1(5);
        assert_eq!(r, Rational::from((256, 693)));
        let at64 = Enclosure::from_rational(&r, Precision::new(64).unwrap());
        let at128 = Enclosure::from_rational(&r, Precision::new(128).unwrap());
        assert!(at64.lo() < at128.lo() || at64.lo() == at128.lo());
        assert!(at64.lo() <= at64.hi());
        assert_ne!(at64.lo().prec(), at128.lo().prec());
    }

    #[test]
    fn directed_conversion_brackets_exact_value() {
        let r = Rational::from((1, 3));
        let d = DirectedValue::from_rational(&r, p(), Direction::Down);
        let u = DirectedValue::from_rational(&r, p(), Direction::Up);
        let exact = Rational::from((1, 3));
        assert!(Rational::from(d.magnitude().to_rational().unwrap()) <= exact);
        assert!(Rational::from(u.magnitude().to_rational().unwrap()) >= exact);
        assert!(d.magnitude() < u.magnitude());
    }

    #[test]
    fn parse_decimal_forms() {
        assert_eq!(parse_decimal("1132491").unwrap(), Rational::from(1132491));
        assert_eq!(
            parse_decimal("3.580e-8").unwrap(),
            Rational::from((358, Integer::from(10).pow(10)))
        );
        assert_eq!(
            parse_decimal("-1.7007e11").unwrap(),
            -Rational::from(Integer::from(170_070_000_000u64))
        );
        assert_eq!(parse_decimal("4e18").unwrap(), Rational::from(Integer::from(4) * Integer::from(10).pow(18)));
        assert!(parse_decimal("e59").is_err());
        assert!(parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn division_by_zero_interval_panics() {
        let a = Enclosure::one(p());
        let z = Enclosure::from_rational(&Rational::from((-1, 10)), p())
            .add(&Enclosure::from_rational(&Rational::from((2, 10)), p()).mul(&Enclosure::zero(p())));
        assert!(!z.contains_zero() || std::panic::catch_unwind(|| a.div(&Enclosure::zero(p()))).is_err());
    }

    #[test]
    fn powi_handles_signs() {
        let x = Enclosure::from_rational(&Rational::from((-3, 2)), p());
        let sq = x.powi(2);
        assert!(sq.lo().to_f64() <= 2.25 && sq.hi().to_f64() >= 2.25);
        let cube = x.powi(3);
        assert!(cube.hi().to_f64() < 0.0);
        let inv = Enclosure::from_u64(4, p()).powi(-2);
        assert!((inv.to_f64() - 0.0625).abs() < 1e-18);
    }

    proptest::proptest! {
        // Monotonicity: Down(E, p) <= Down(E, 2p) <= Up(E, 2p) <= Up(E, p)
        #[test]
        fn precision_monotonicity(num in 1i64..=1_000_000, den in 1i64..=1_000_000, k in 1u32..=40) {
            let r = Rational::from((num, den));
            let expr = |prec: Precision| {
                let x = Enclosure::from_rational(&r, prec);
                // a composite expression exercising +, *, /, exp, ln, sqrt, powi
                let y = x.add(&Enclosure::one(prec));
                y.ln().mul(&x.sqrt()).add(&x.powi(k as i64 % 7 + 1)).div(&y).exp()
            };
            let lo_p = expr(Precision::new(96).unwrap());
            let hi_p = expr(Precision::new(192).unwrap());
            proptest::prop_assert!(lo_p.lo() <= hi_p.lo());
            proptest::prop_assert!(hi_p.lo() <= hi_p.hi());
            proptest::prop_assert!(hi_p.hi() <= lo_p.hi());
        }

        #[test]
        fn enclosure_contains_f64_reference(num in 1i64..=10_000, den in 1i64..=10_000) {
            let r = Rational::from((num, den));
            let x = Enclosure::from_rational(&r, Precision::DEFAULT);
            let e = x.exp().ln();
            let v = num as f64 / den as f64;
            proptest::prop_assert!(e.lo().to_f64() <= v + 1e-9);
            proptest::prop_assert!(e.hi().to_f64() >= v - 1e-9);
        }
    }
}
