//! Exact integer and rational arithmetic: integer square roots, perfect-square
//! predicates and fraction normalization. No floating point is used here.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Reduced fraction with a strictly positive denominator.
pub type Ratio = BigRational;

/// Bitmask of the quadratic residues modulo 64.
const SQUARES_MOD_64: u64 = {
    let mut mask = 0u64;
    let mut y = 0;
    while y < 64 {
        mask |= 1 << ((y * y) % 64);
        y += 1;
    }
    mask
};

/// Floor square root of a non-negative integer by Newton's method.
///
/// Starts from `2^ceil(bits/2)`, which is always above the root, and iterates
/// `x <- (x + n/x) / 2` until the sequence stops decreasing.
pub fn isqrt_unsigned(n: &BigUint) -> BigUint {
    if n < &BigUint::from(2u8) {
        return n.clone();
    }
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Returns `(floor(sqrt(n)), exact)` where `exact` is true iff `n` is a square.
pub fn isqrt(n: &BigInt) -> Result<(BigInt, bool)> {
    if n.is_negative() {
        return Err(Error::Domain(format!("square root of negative value {n}")));
    }
    let root = isqrt_unsigned(n.magnitude());
    let exact = &root * &root == *n.magnitude();
    Ok((BigInt::from_biguint(Sign::Plus, root), exact))
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    square_root(n).is_some()
}

/// Exact square root of `n`, if it has one.
pub fn square_root(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let low = n.magnitude().iter_u64_digits().next().unwrap_or(0) & 63;
    if SQUARES_MOD_64 & (1 << low) == 0 {
        return None;
    }
    match isqrt(n) {
        Ok((root, true)) => Some(root),
        _ => None,
    }
}

/// Builds the reduced fraction `num/den`, carrying the sign on the numerator.
pub fn reduce(num: BigInt, den: BigInt) -> Result<Ratio> {
    if den.is_zero() {
        return Err(Error::Domain("zero denominator".into()));
    }
    Ok(Ratio::new(num, den))
}

/// True iff `r` is the square of a rational number.
///
/// `Ratio` values are always held in lowest terms, which is what makes the
/// component-wise test valid.
pub fn is_rational_square(r: &Ratio) -> bool {
    rational_sqrt(r).is_some()
}

/// Non-negative exact rational square root, if one exists.
pub fn rational_sqrt(r: &Ratio) -> Option<Ratio> {
    let num = square_root(r.numer())?;
    let den = square_root(r.denom())?;
    Some(Ratio::new_raw(num, den))
}

/// gcd of a sequence of integers; zero for an empty or all-zero sequence.
pub fn gcd_all<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigInt>,
{
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

/// Parses `"P/Q"` or a bare integer `"P"` into a reduced fraction.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let parse = |part: &str| {
        part.parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))
    };
    reduce(parse(num)?, parse(den)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn ratio(n: i64, d: i64) -> Ratio {
        reduce(big(n), big(d)).unwrap()
    }

    #[test]
    fn isqrt_examples() {
        // 952 * 952 by schoolbook: 952*900 + 952*52 = 856800 + 49504
        assert_eq!(952 * 900 + 952 * 52, 906_304);
        assert_eq!(isqrt(&big(906_304)).unwrap(), (big(952), true));
        assert_eq!(isqrt(&big(0)).unwrap(), (big(0), true));
        // 667² = 444889 < 445729 < 446224 = 668²
        assert_eq!(isqrt(&big(445_729)).unwrap(), (big(667), false));
        assert!(matches!(isqrt(&big(-1)), Err(Error::Domain(_))));
    }

    #[test]
    fn isqrt_small_values_match_linear_scan() {
        let mut root = 0i64;
        for n in 0..20_000i64 {
            while (root + 1) * (root + 1) <= n {
                root += 1;
            }
            let (r, exact) = isqrt(&big(n)).unwrap();
            assert_eq!(r, big(root), "n = {n}");
            assert_eq!(exact, root * root == n);
        }
    }

    #[test]
    fn perfect_square_examples() {
        assert!(is_perfect_square(&big(49)));
        assert!(!is_perfect_square(&big(-4)));
        // 1010² = 1020100 < 1020321 < 1022121 = 1011²
        assert!(!is_perfect_square(&big(1_020_321)));
        assert!(is_perfect_square(&big(0)));
        assert!(is_perfect_square(&big(1)));
    }

    #[test]
    fn rational_square_examples() {
        assert!(is_rational_square(&ratio(49, 1024)));
        assert!(!is_rational_square(&ratio(7, 8)));
        assert!(is_rational_square(&ratio(0, 1)));
        assert!(!is_rational_square(&ratio(-1, 4)));
        // 4/16 is 1/4 in lowest terms
        assert!(is_rational_square(&ratio(8, 32)));
        assert!(is_rational_square(&ratio(18, 8)));
        assert_eq!(rational_sqrt(&ratio(49, 1024)), Some(ratio(7, 32)));
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(big(14), big(-8)).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (big(-7), big(4)));
        let r = reduce(big(0), big(5)).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (big(0), big(1)));
        let r = reduce(big(16335), big(16384)).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (big(16335), big(16384)));
        assert!(matches!(reduce(big(1), big(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn parse_ratio_forms() {
        assert_eq!(parse_ratio("2/1").unwrap(), ratio(2, 1));
        assert_eq!(parse_ratio("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_ratio("5").unwrap(), ratio(5, 1));
        assert!(matches!(parse_ratio("x"), Err(Error::Parse(_))));
        assert!(matches!(parse_ratio("1/0"), Err(Error::Domain(_))));
    }

    #[test]
    fn gcd_all_handles_signs() {
        let vals = [big(-12), big(18), big(30)];
        assert_eq!(gcd_all(&vals), big(6));
        assert_eq!(gcd_all(&[]), big(0));
    }

    fn big_from_digits(digits: &[u8]) -> BigInt {
        digits
            .iter()
            .fold(BigInt::zero(), |acc, d| acc * 10 + BigInt::from(*d))
    }

    proptest! {
        #[test]
        fn isqrt_brackets_value(digits in prop::collection::vec(0u8..10, 1..120)) {
            let n = big_from_digits(&digits);
            let (root, exact) = isqrt(&n).unwrap();
            prop_assert!(&root * &root <= n);
            let next = &root + 1;
            prop_assert!(n < &next * &next);
            prop_assert_eq!(exact, &root * &root == n);
            // independent route: the library's own integer square root
            prop_assert_eq!(root, n.sqrt());
        }

        #[test]
        fn squares_up_to_1e50_detected(digits in prop::collection::vec(0u8..10, 1..=50)) {
            let k = big_from_digits(&digits);
            let sq = &k * &k;
            prop_assert!(is_perfect_square(&sq));
            prop_assert_eq!(square_root(&sq), Some(k.clone()));
            if !k.is_zero() {
                prop_assert!(!is_perfect_square(&(&sq + 1)));
            }
        }

        #[test]
        fn rational_square_is_componentwise(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            let expected = is_perfect_square(r.numer()) && is_perfect_square(r.denom());
            prop_assert_eq!(is_rational_square(&r), expected);
            let sq = &r * &r;
            prop_assert!(is_rational_square(&sq));
        }

        #[test]
        fn reduce_is_idempotent(n in any::<i64>(), d in any::<i64>().prop_filter("nonzero", |d| *d != 0)) {
            let once = reduce(big(n), big(d)).unwrap();
            let twice = reduce(once.numer().clone(), once.denom().clone()).unwrap();
            prop_assert!(once.denom().is_positive());
            prop_assert!(once.numer().gcd(once.denom()).is_one());
            prop_assert_eq!(once, twice);
        }
    }
}
