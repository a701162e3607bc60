//! Exact probabilities: arbitrary-precision rationals confined to `[0, 1]`.
//!
//! `Scalar` carries the effect-monoid structure used throughout the
//! calculus: the partial sum `ovee`, the sequential product `andthen`,
//! the orthosupplement (complement) and the numeric order. All
//! arithmetic is exact; there is no floating point anywhere in the
//! semantics. Display formatting may round, the value never does.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    /// The partial sum was requested on operands with total above 1.
    #[error("disjointness violation: {0} + {1} exceeds 1")]
    DisjointnessViolation(String, String),
    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// An exact rational in `[0, 1]`, always reduced to lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    /// `1/n` for `n >= 1`. `one_over(1)` is the unit scalar.
    pub fn one_over(n: &BigUint) -> Self {
        assert!(!n.is_zero(), "denominator must be positive");
        Scalar(BigRational::new(BigInt::one(), BigInt::from(n.clone())))
    }

    pub fn new(num: BigUint, den: BigUint) -> Result<Self, ScalarError> {
        if den.is_zero() || num > den {
            return Err(ScalarError::OutOfRange(format!("{num}/{den}")));
        }
        Ok(Scalar(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self, ScalarError> {
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(ScalarError::OutOfRange(r.to_string()));
        }
        Ok(Scalar(r))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denom(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Partial sum `q ⊕ r`, defined exactly when `q + r <= 1`.
    pub fn ovee(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let sum = &self.0 + &other.0;
        if sum > BigRational::one() {
            return Err(ScalarError::DisjointnessViolation(
                self.to_string(),
                other.to_string(),
            ));
        }
        Ok(Scalar(sum))
    }

    /// Sequential product `q & r = q·r`. Total.
    pub fn andthen(&self, other: &Scalar) -> Scalar {
        Scalar(&self.0 * &other.0)
    }

    /// Orthosupplement `q⊥ = 1 − q`.
    pub fn ortho(&self) -> Scalar {
        Scalar(BigRational::one() - &self.0)
    }

    pub fn leq(&self, other: &Scalar) -> bool {
        self.0 <= other.0
    }

    /// `q / r` for `r > 0`, clamped by the `[0, 1]` invariant.
    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::OutOfRange("division by zero".into()));
        }
        Scalar::from_ratio(&self.0 / &other.0)
    }

    /// Greedy Egyptian-fraction decomposition: unit denominators
    /// `d_1 <= d_2 <= ...` with `q = Σ 1/d_i`. Empty for `q = 0`;
    /// callers special-case `q = 1`. Terminates because the remainder's
    /// numerator strictly decreases.
    pub fn egyptian_units(&self) -> Vec<BigUint> {
        let mut units = Vec::new();
        let mut num = self.numer();
        let mut den = self.denom();
        while !num.is_zero() {
            if num.is_one() {
                units.push(den.clone());
                break;
            }
            // ceil(den / num)
            let unit = (&den + &num - BigUint::from(1u8)) / &num;
            units.push(unit.clone());
            // q - 1/unit = (num*unit - den) / (den*unit)
            num = &num * &unit - &den;
            den *= unit;
            let g = num_integer::gcd(num.clone(), den.clone());
            num /= &g;
            den /= &g;
        }
        units
    }

    /// Render with `sig` significant digits, round-half-even, trailing
    /// zeros trimmed. Exact decimals shorter than `sig` digits print as
    /// themselves (`1/100` prints as `0.01`).
    pub fn decimal_sig(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        if self.is_one() {
            return "1".to_string();
        }
        let num = self.numer();
        let den = self.denom();
        let ten = BigUint::from(10u8);
        // position of the first significant digit after the point
        let mut e: usize = 1;
        let mut scaled = &num * &ten;
        while scaled < den {
            scaled *= &ten;
            e += 1;
        }
        let dp = e - 1 + sig;
        let d = round_half_even(&num * ten.pow(dp as u32), &den);
        let bound = ten.pow(sig as u32);
        let (e, digits) = if d == bound {
            // carried over into the next magnitude, e.g. 0.99995 -> 1.000
            if e == 1 {
                return "1".to_string();
            }
            (e - 1, "1".to_string())
        } else {
            (e, d.to_string())
        };
        let digits = digits.trim_end_matches('0');
        let mut out = String::from("0.");
        for _ in 0..e - 1 {
            out.push('0');
        }
        out.push_str(if digits.is_empty() { "0" } else { digits });
        out
    }

    /// Render with exactly `dp >= 1` digits after the point, round-half-even.
    pub fn decimal_dp(&self, dp: usize) -> String {
        assert!(dp >= 1);
        let ten = BigUint::from(10u8);
        let d = round_half_even(self.numer() * ten.pow(dp as u32), &self.denom());
        let bound = ten.pow(dp as u32);
        if d >= bound {
            format!("1.{:0>width$}", &d - &bound, width = dp)
        } else {
            format!("0.{:0>width$}", d, width = dp)
        }
    }
}

fn round_half_even(num: BigUint, den: &BigUint) -> BigUint {
    let q = &num / den;
    let r = &num % den;
    let twice = &r * BigUint::from(2u8);
    match twice.cmp(den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + BigUint::from(1u8),
        std::cmp::Ordering::Equal => {
            if (&q % BigUint::from(2u8)).is_zero() {
                q
            } else {
                q + BigUint::from(1u8)
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else if self.is_one() {
            write!(f, "1")
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;

    /// Accepts `p/q`, decimal literals like `0.096`, and the integers
    /// `0` and `1`.
    fn from_str(s: &str) -> Result<Self, ScalarError> {
        let bad = || ScalarError::Parse(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let num = BigUint::from_str(p.trim()).map_err(|_| bad())?;
            let den = BigUint::from_str(q.trim()).map_err(|_| bad())?;
            return Scalar::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: BigUint = BigUint::from_str(int.trim()).map_err(|_| bad())?;
            let den = BigUint::from(10u8).pow(frac.len() as u32);
            let num = int * &den + BigUint::from_str(frac).map_err(|_| bad())?;
            return Scalar::new(num, den);
        }
        match s.trim() {
            "0" => Ok(Scalar::zero()),
            "1" => Ok(Scalar::one()),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn measure_branches_sum_to_one() {
        // 0.008 ⊕ 0.09504 ⊕ 0.89696 = 1
        let total = s("0.008")
            .ovee(&s("0.09504"))
            .unwrap()
            .ovee(&s("0.89696"))
            .unwrap();
        assert!(total.is_one());
    }

    #[test]
    fn ovee_zero_law_and_violation() {
        let q = s("3/4");
        assert_eq!(q.ovee(&Scalar::zero()).unwrap(), q);
        assert!(matches!(
            s("3/4").ovee(&s("1/2")),
            Err(ScalarError::DisjointnessViolation(..))
        ));
    }

    #[test]
    fn andthen_matches_worked_examples() {
        assert_eq!(s("0.01").andthen(&s("0.8")), s("0.008"));
        // 0.999 & 0.998 & 0.05085 = 0.0506975517 exactly
        let w = s("0.999").andthen(&s("0.998")).andthen(&s("0.05085"));
        assert_eq!(w, s("0.0506975517"));
        assert_eq!(w.decimal_dp(9), "0.050697552");
        let q = s("13/17");
        assert_eq!(q.andthen(&Scalar::one()), q);
    }

    #[test]
    fn ortho_involution() {
        assert_eq!(s("0.01").ortho(), s("0.99"));
        assert!(Scalar::one().ortho().is_zero());
        let q = s("7/19");
        assert_eq!(q.ortho().ortho(), q);
    }

    #[test]
    fn ordering() {
        assert!(s("1/10").leq(&s("0.10304")));
        assert!(s("5/7").leq(&s("5/7")));
        assert!(!s("1/2").leq(&s("1/3")));
    }

    #[test]
    fn n_times_one_over_n_is_one() {
        for n in 2u32..=1000 {
            let unit = Scalar::one_over(&BigUint::from(n));
            let mut acc = Scalar::zero();
            for _ in 0..n {
                acc = acc.ovee(&unit).unwrap();
            }
            assert!(acc.is_one(), "n = {n}");
        }
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(s("0.096"), Scalar::new(12u8.into(), 125u8.into()).unwrap());
        assert_eq!(s("0.10304"), s("322/3125"));
    }

    #[test]
    fn egyptian_reconstructs() {
        for text in ["0.096", "0.8", "322/3125", "0.05085", "1/2", "19/20"] {
            let q = s(text);
            let mut acc = Scalar::zero();
            for d in q.egyptian_units() {
                acc = acc.ovee(&Scalar::one_over(&d)).unwrap();
            }
            assert_eq!(acc, q, "egyptian units for {text}");
        }
        assert!(Scalar::zero().egyptian_units().is_empty());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(s("25/322").decimal_sig(10), "0.07763975155");
        assert_eq!(s("297/322").decimal_sig(10), "0.9223602484");
        assert_eq!(s("1/100").decimal_sig(10), "0.01");
        assert_eq!(s("322/3125").decimal_sig(10), "0.10304");
        assert_eq!(s("25/322").decimal_dp(4), "0.0776");
        assert_eq!(s("297/322").decimal_dp(4), "0.9224");
        assert_eq!(s("0.0521389757").decimal_dp(9), "0.052138976");
        assert_eq!(s("2/3").decimal_sig(3), "0.667");
        assert_eq!(s("0.99995").decimal_sig(4), "1");
        assert_eq!(s("0.000099995").decimal_sig(4), "0.0001");
        // half-even ties
        assert_eq!(s("1/8").decimal_dp(2), "0.12");
        assert_eq!(s("3/8").decimal_dp(2), "0.38");
    }

    #[test]
    fn parse_print_round_trip() {
        for text in ["0", "1", "1/2", "322/3125", "8490170/521389757"] {
            let q = s(text);
            assert_eq!(q.to_string().parse::<Scalar>().unwrap(), q);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!("5/4".parse::<Scalar>().is_err());
        assert!("1.5".parse::<Scalar>().is_err());
        assert!(Scalar::new(3u8.into(), 2u8.into()).is_err());
    }
}
