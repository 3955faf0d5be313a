//! Overflow-safe arithmetic for scalars spanning ordinary reals,
//! exponentially large values and double-exponentially large values.
//!
//! A [`TowerScalar`] stores a sign, an iterated-logarithm *level* in
//! `{0, 1, 2}` and a magnitude:
//!
//! - level 0 stores `|x|` directly,
//! - level 1 stores `ln |x|`,
//! - level 2 stores `ln ln |x|` (only values with `ln |x| > 0` reach level 2).
//!
//! Canonical form uses the lowest level whose magnitude stays within the
//! promotion window. Promotion happens when the stored magnitude exceeds
//! `1e15` (so levels 0 and 1 keep at least 15 significant digits), demotion
//! as soon as the value fits a lower level. Level 2 is the top of the tower:
//! its magnitude may span the whole finite f64 range. Values whose logarithm
//! is hugely negative (for example `exp(-1e140)`) stay at level 1 with a
//! negative magnitude: level 2 can only hold positive logarithms.
//!
//! Additions at level >= 1 are evaluated as `max + log1p(exp(-|Δlog|))` when
//! the log gap is representable in `f64`, and as the exact maximum otherwise;
//! the neglected relative error is at most `exp(-Δlog)`. Subtraction of
//! equal-magnitude operands at level >= 1 yields an exact zero (the pipeline
//! only consumes orderings and magnitudes at that point).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest magnitude kept at a given level before promotion.
pub const PROMOTE_MAG: f64 = 1e15;
/// `ln(PROMOTE_MAG)`: demotion threshold for the stored logarithm.
pub const LN_PROMOTE_MAG: f64 = 34.538_776_394_910_684;
/// Log gaps above this make the `log1p` correction underflow `f64`.
const ADD_EXACT_GAP: f64 = 745.0;

/// Sign + iterated-log level + magnitude representation of a real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTower", into = "RawTower")]
pub struct TowerScalar {
    sign: i8,
    level: u8,
    mag: f64,
}

/// Wire format: the raw `{sign, level, mag}` triple.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawTower {
    sign: i8,
    level: u8,
    mag: f64,
}

impl From<TowerScalar> for RawTower {
    fn from(t: TowerScalar) -> Self {
        RawTower { sign: t.sign, level: t.level, mag: t.mag }
    }
}

impl TryFrom<RawTower> for TowerScalar {
    type Error = String;
    fn try_from(r: RawTower) -> std::result::Result<Self, String> {
        TowerScalar::normalize(r.sign, r.level, r.mag).map_err(|e| e.to_string())
    }
}

impl TowerScalar {
    /// Exact zero.
    pub fn zero() -> Self {
        TowerScalar { sign: 0, level: 0, mag: 0.0 }
    }

    /// Exact one.
    pub fn one() -> Self {
        TowerScalar { sign: 1, level: 0, mag: 1.0 }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn mag(&self) -> f64 {
        self.mag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Builds the canonical representation of the value described by the
    /// `(sign, level, mag)` triple, promoting or demoting the level as
    /// needed.
    ///
    /// At level 0 a negative `mag` is folded into the sign. Errors with
    /// [`Error::Overflow`] when the value would need a level above 2.
    pub fn normalize(sign: i8, level: u8, mag: f64) -> Result<Self> {
        if !(0..=2).contains(&(level as i32)) {
            return Err(Error::Overflow(format!("level {level} outside {{0,1,2}}")));
        }
        if !mag.is_finite() {
            return Err(Error::Overflow(format!("non-finite magnitude {mag}")));
        }
        if sign == 0 {
            return Ok(Self::zero());
        }
        let sign = if sign > 0 { 1 } else { -1 };
        match level {
            0 => {
                if mag == 0.0 {
                    return Ok(Self::zero());
                }
                let (sign, m) = if mag < 0.0 { (-sign, -mag) } else { (sign, mag) };
                if m > PROMOTE_MAG || m < 1.0 / PROMOTE_MAG {
                    // ln(m) is finite: m is a positive normal/subnormal f64.
                    Self::normalize(sign, 1, m.ln())
                } else {
                    Ok(TowerScalar { sign, level: 0, mag: m })
                }
            }
            1 => {
                if mag.abs() <= LN_PROMOTE_MAG {
                    Ok(TowerScalar { sign, level: 0, mag: mag.exp() })
                } else if mag > PROMOTE_MAG {
                    Self::normalize(sign, 2, mag.ln())
                } else {
                    Ok(TowerScalar { sign, level: 1, mag })
                }
            }
            _ => {
                if mag <= LN_PROMOTE_MAG {
                    // ln|x| = exp(mag) <= 1e15 fits at level 1.
                    Self::normalize(sign, 1, mag.exp())
                } else {
                    // Level 2 is the top of the tower: its magnitude is
                    // allowed to span the whole finite f64 range.
                    Ok(TowerScalar { sign, level: 2, mag })
                }
            }
        }
    }

    /// Canonical scalar from a finite `f64`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if x == 0.0 {
            Ok(Self::zero())
        } else {
            Self::normalize(if x > 0.0 { 1 } else { -1 }, 0, x.abs())
        }
    }

    /// Positive value `exp(l)` from its natural logarithm.
    pub fn from_ln(l: f64) -> Result<Self> {
        Self::normalize(1, 1, l)
    }

    /// Positive value `exp(exp(l))` from its doubly iterated logarithm.
    pub fn from_ln_ln(l: f64) -> Result<Self> {
        Self::normalize(1, 2, l)
    }

    /// Converts to `f64`, saturating to `±inf` (level 2) or `±0`/`±inf`
    /// (level-1 under/overflow) when outside native range.
    pub fn to_f64(&self) -> f64 {
        let s = self.sign as f64;
        match self.level {
            0 => s * self.mag,
            1 => s * self.mag.exp(),
            _ => s * f64::INFINITY,
        }
    }

    /// Natural logarithm of `|self|` as an `f64`, when representable.
    pub fn ln_abs_f64(&self) -> Option<f64> {
        match self.level {
            0 => {
                if self.sign == 0 {
                    None
                } else {
                    Some(self.mag.ln())
                }
            }
            1 => Some(self.mag),
            _ => {
                if self.mag <= 709.0 {
                    Some(self.mag.exp())
                } else {
                    None
                }
            }
        }
    }

    /// Natural logarithm as a tower scalar. Requires a positive value.
    pub fn ln(&self) -> Result<Self> {
        if self.sign <= 0 {
            return Err(Error::Domain("ln of a non-positive tower scalar".into()));
        }
        match self.level {
            0 => Self::from_f64(self.mag.ln()),
            1 => Self::from_f64(self.mag),
            _ => Self::normalize(1, 1, self.mag),
        }
    }

    /// `exp(log)` for a tower-scalar logarithm.
    pub fn exp_of(log: &Self) -> Result<Self> {
        match (log.sign, log.level) {
            (0, _) => Ok(Self::one()),
            (_, 0) => Self::normalize(1, 1, log.sign as f64 * log.mag),
            (1, 1) => Self::normalize(1, 2, log.mag),
            (-1, 1) => {
                if log.mag <= 709.0 {
                    Self::normalize(1, 1, -log.mag.exp())
                } else {
                    Err(Error::Overflow(format!(
                        "exp(-e^{}) underflows every representable level",
                        log.mag
                    )))
                }
            }
            (1, 2) => {
                // ln ln(result) = ln(log) = e^{mag}, representable while it
                // stays a finite f64.
                if log.mag <= 709.0 {
                    Self::normalize(1, 2, log.mag.exp())
                } else {
                    Err(Error::Overflow(format!(
                        "exp of a value with ln ln = {} needs level 3",
                        log.mag
                    )))
                }
            }
            _ => {
                // Negative level-2 logarithm: ln|result| = -e^{e^{mag}},
                // which must itself be a finite f64.
                if log.mag.exp() <= 709.0 {
                    Self::normalize(1, 1, -log.mag.exp().exp())
                } else {
                    Err(Error::Overflow(format!(
                        "exp(-e^(e^{})) underflows every representable level",
                        log.mag
                    )))
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        TowerScalar { sign: -self.sign, level: self.level, mag: self.mag }
    }

    pub fn abs(&self) -> Self {
        TowerScalar { sign: self.sign.abs(), level: self.level, mag: self.mag }
    }

    /// Sum. Exact at level 0; at level >= 1 evaluated in log space with the
    /// `max + log1p(exp(-Δ))` rule, falling back to the exact maximum when
    /// the gap is not representable (relative error <= `exp(-Δlog)`).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(*other);
        }
        if other.is_zero() {
            return Ok(*self);
        }
        if self.level == 0 && other.level == 0 {
            return Self::from_f64(self.to_f64() + other.to_f64());
        }
        // Order by |value| so `hi` dominates.
        let (hi, lo) = if cmp_mag(self, other) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        let same_sign = hi.sign == lo.sign;
        let (lhi, llo) = (hi.ln_abs_f64(), lo.ln_abs_f64());
        if let (Some(lhi), Some(llo)) = (lhi, llo) {
            let gap = lhi - llo; // >= 0 by ordering
            if gap <= ADD_EXACT_GAP {
                if same_sign {
                    return Self::normalize(hi.sign, 1, lhi + (-gap).exp().ln_1p());
                }
                if gap == 0.0 {
                    // Cancellation of equal-magnitude operands: exact zero.
                    return Ok(Self::zero());
                }
                // ln(1 - exp(-gap)) via expm1 for accuracy near gap = 0.
                return Self::normalize(hi.sign, 1, lhi + (-(-gap).exp_m1()).ln());
            }
            return Ok(*hi);
        }
        // At least one logarithm exceeds f64 range: the correction (at most
        // ln 2 in absolute log terms) is far below the representable
        // precision of `hi`'s magnitude, except for exact ties.
        if cmp_mag(hi, lo) == Ordering::Equal && !same_sign {
            return Ok(Self::zero());
        }
        Ok(*hi)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product, exact in log space up to float rounding.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let sign = self.sign * other.sign;
        if self.level == 0 && other.level == 0 {
            let p = self.mag * other.mag;
            if p.is_finite() && p >= 1e-300 {
                return Self::normalize(sign, 0, p);
            }
        }
        let l = self.abs().ln()?.add(&other.abs().ln()?)?;
        Ok(with_sign(Self::exp_of(&l)?, sign))
    }

    /// Reciprocal of a nonzero value.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        let l = self.abs().ln()?.neg();
        Ok(with_sign(Self::exp_of(&l)?, self.sign))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    /// Power `self^exponent`. Requires `self > 0`, or an integer level-0
    /// exponent when `self < 0`.
    pub fn pow(&self, exponent: &Self) -> Result<Self> {
        if exponent.is_zero() {
            return Ok(Self::one());
        }
        if self.is_zero() {
            return if exponent.sign > 0 {
                Ok(Self::zero())
            } else {
                Err(Error::Domain("zero base with negative exponent".into()))
            };
        }
        let sign = if self.sign > 0 {
            1
        } else {
            let int_exp = exponent.level == 0 && exponent.mag.fract() == 0.0;
            if !int_exp {
                return Err(Error::Domain(
                    "negative base with non-integer exponent".into(),
                ));
            }
            if (exponent.mag as i64) % 2 == 0 { 1 } else { -1 }
        };
        let l = self.abs().ln()?.mul(exponent)?;
        Ok(with_sign(Self::exp_of(&l)?, sign))
    }

    /// Power with a plain `f64` exponent.
    pub fn powf(&self, exponent: f64) -> Result<Self> {
        self.pow(&Self::from_f64(exponent)?)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.sign < 0 {
            return Err(Error::Domain("square root of a negative value".into()));
        }
        self.powf(0.5)
    }

    /// Total order consistent with the real-number order.
    pub fn compare(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        if self.sign == 0 {
            return Ordering::Equal;
        }
        let ord = cmp_mag(self, other);
        if self.sign > 0 {
            ord
        } else {
            ord.reverse()
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        if self.compare(other) == Ordering::Less { *other } else { *self }
    }

    pub fn min(&self, other: &Self) -> Self {
        if self.compare(other) == Ordering::Greater { *other } else { *self }
    }
}

fn with_sign(t: TowerScalar, sign: i8) -> TowerScalar {
    if t.is_zero() {
        t
    } else {
        TowerScalar { sign, level: t.level, mag: t.mag }
    }
}

/// Compares `|a|` and `|b|` for normalized nonzero operands by lifting the
/// lower-level magnitude through iterated logarithms (monotone, so order is
/// preserved).
fn cmp_mag(a: &TowerScalar, b: &TowerScalar) -> Ordering {
    debug_assert!(a.sign != 0 && b.sign != 0);
    if a.level == b.level {
        return a.mag.partial_cmp(&b.mag).unwrap_or(Ordering::Equal);
    }
    let (lo, hi, swapped) = if a.level < b.level { (a, b, false) } else { (b, a, true) };
    // Lift lo's magnitude to hi's level; if a lift hits a non-positive
    // argument the lower-level value is below e (hence below hi, whose
    // canonical magnitude at the higher level is large and positive).
    let mut m = lo.mag;
    let mut lvl = lo.level;
    let ord = loop {
        if lvl == hi.level {
            break m.partial_cmp(&hi.mag).unwrap_or(Ordering::Equal);
        }
        if m <= 0.0 {
            break Ordering::Less;
        }
        m = m.ln();
        lvl += 1;
    };
    if swapped { ord.reverse() } else { ord }
}

impl std::fmt::Display for TowerScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.sign, self.level) {
            (0, _) => write!(f, "0"),
            (s, 0) => write!(f, "{}", s as f64 * self.mag),
            (s, 1) => write!(f, "{}exp({:.6e})", if s < 0 { "-" } else { "" }, self.mag),
            (s, _) => write!(f, "{}exp(exp({:.6e}))", if s < 0 { "-" } else { "" }, self.mag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(sign: i8, level: u8, mag: f64) -> TowerScalar {
        TowerScalar::normalize(sign, level, mag).unwrap()
    }

    #[test]
    fn normalize_identity_demotion_promotion() {
        assert_eq!(ts(1, 0, 1.0), TowerScalar { sign: 1, level: 0, mag: 1.0 });
        // e^0 = 1 demotes to level 0.
        assert_eq!(ts(1, 1, 0.0), TowerScalar { sign: 1, level: 0, mag: 1.0 });
        // ln|x| = 1e200 promotes to level 2 with mag ln(1e200).
        let t = ts(1, 1, 1e200);
        assert_eq!(t.level(), 2);
        assert!((t.mag() - 1e200f64.ln()).abs() < 1e-10);
        assert!((t.mag() - 460.517).abs() < 1e-3);
    }

    #[test]
    fn normalize_is_idempotent() {
        for t in [ts(1, 0, 3.0), ts(1, 1, 100.0), ts(-1, 1, -900.0), ts(1, 2, 400.0)] {
            let again = TowerScalar::normalize(t.sign(), t.level(), t.mag()).unwrap();
            assert_eq!(t, again);
        }
    }

    #[test]
    fn tiny_values_stay_representable() {
        let t = TowerScalar::from_f64(1e-20).unwrap();
        assert_eq!(t.level(), 1);
        assert!((t.to_f64() - 1e-20).abs() < 1e-32);
        // exp(-1e140) cannot demote nor promote: level 1, negative mag.
        let tiny = TowerScalar::from_ln(-1e140).unwrap();
        assert_eq!(tiny.level(), 1);
        assert_eq!(tiny.mag(), -1e140);
    }

    #[test]
    fn combine_examples() {
        let a = ts(1, 1, 1e200);
        let prod = a.mul(&a).unwrap();
        // ln(x*x) = 2e200 -> canonical level 2, mag = ln(2e200).
        assert_eq!(prod.level(), 2);
        assert!((prod.mag() - 2e200f64.ln()).abs() < 1e-10);

        let s = TowerScalar::from_f64(3.0)
            .unwrap()
            .add(&TowerScalar::from_f64(4.0).unwrap())
            .unwrap();
        assert_eq!(s.to_f64(), 7.0);

        // pow((+,1,1e300), e^690): level 2 with mag = 690 + ln(1e300).
        let base = ts(1, 1, 1e300);
        let expo = ts(1, 1, 690.0);
        let p = base.pow(&expo).unwrap();
        assert_eq!(p.level(), 2);
        let expected = 690.0 + 1e300f64.ln();
        assert!((p.mag() - expected).abs() < 1e-6, "mag {} vs {}", p.mag(), expected);
    }

    #[test]
    fn compare_examples() {
        let five = TowerScalar::from_f64(5.0).unwrap();
        assert_eq!(five.compare(&ts(1, 1, 100.0)), Ordering::Less);
        assert_eq!(ts(-1, 1, 50.0).compare(&TowerScalar::from_f64(1e-3).unwrap()), Ordering::Less);
        // (+,2,10) < (+,1,1e300) because ln ln of the right operand ~ 690.8.
        assert_eq!(ts(1, 2, 40.0).compare(&ts(1, 1, 1e300)), Ordering::Less);
    }

    #[test]
    fn add_is_exact_max_beyond_gap() {
        let a = ts(1, 1, 1000.0);
        let b = ts(1, 1, 200.0);
        let s = a.add(&b).unwrap();
        assert_eq!(s, a); // gap 800 > 745: bit-exact max
        let c = ts(1, 1, 980.0);
        let s2 = a.add(&c).unwrap();
        assert!((s2.mag() - (1000.0 + (-20f64).exp().ln_1p())).abs() < 1e-12);
    }

    #[test]
    fn cancellation_of_equal_levels_is_zero() {
        let a = ts(1, 1, 500.0);
        assert!(a.sub(&a).unwrap().is_zero());
        let b = ts(1, 2, 100.0);
        assert!(b.sub(&b).unwrap().is_zero());
    }

    #[test]
    fn json_round_trip() {
        let t = ts(1, 2, 460.517);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"sign\":1") && s.contains("\"level\":2"));
        let back: TowerScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn ln_exp_round_trip() {
        for t in [ts(1, 0, 7.5), ts(1, 1, 300.0), ts(1, 2, 50.0), ts(1, 1, -2000.0)] {
            let l = t.ln().unwrap();
            let back = TowerScalar::exp_of(&l).unwrap();
            assert_eq!(back.level(), t.level());
            assert!(
                (back.mag() - t.mag()).abs() <= 1e-12 * t.mag().abs().max(1.0),
                "{t:?} vs {back:?}"
            );
        }
    }

    #[test]
    fn overflow_needs_level_three() {
        // Level-2 magnitudes beyond the promotion window are fine (the top
        // level spans the whole f64 range) ...
        let big = ts(1, 2, 2e15);
        assert_eq!(big.level(), 2);
        assert_eq!(big.mag(), 2e15);
        // ... but exponentiating a level-2 logarithm with a large magnitude
        // would need level 3.
        let log = ts(1, 2, 800.0);
        assert!(TowerScalar::exp_of(&log).is_err());
        // Exponentiating a moderate level-2 logarithm stays at level 2:
        // exp_of(e^{e^{6}}) has ln ln = e^{6}.
        let ok = TowerScalar::exp_of(&ts(1, 2, 6.0)).unwrap();
        assert_eq!(ok.level(), 2);
        assert!((ok.mag() - 6f64.exp()).abs() < 1e-12);
    }
}
