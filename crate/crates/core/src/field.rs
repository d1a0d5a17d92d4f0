//! Prime-field arithmetic over an arbitrary prime modulus.
//!
//! Values are arbitrary precision. Every [`FieldElement`] carries its
//! [`Prime`], and binary operations reject operands from different fields.

use std::cmp::Ordering;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(BigUint),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(BigUint, BigUint),
    #[error("division by zero")]
    DivisionByZero,
}

/// Witnesses for Miller-Rabin. Deterministic below 3.3 * 10^24; for larger
/// moduli the test is probabilistic with these 20 fixed rounds.
const MR_BASES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Deterministic below 3.3e24, probabilistic (20 fixed bases) above.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in MR_BASES.iter() {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let shift = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> shift;
    'witness: for &b in MR_BASES.iter() {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..shift {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime modulus. Cheap to clone.
#[derive(Clone)]
pub struct Prime(Arc<BigUint>);

impl Prime {
    pub fn new(value: BigUint) -> Result<Self, FieldError> {
        if is_prime(&value) {
            Ok(Prime(Arc::new(value)))
        } else {
            Err(FieldError::NotPrime(value))
        }
    }

    pub fn from_u64(value: u64) -> Result<Self, FieldError> {
        Self::new(BigUint::from(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// The modulus as a `u64`, when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// Bit length of the modulus.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Reduces a signed integer into `0..p`.
    pub fn reduce(&self, k: &BigInt) -> BigUint {
        let p = BigInt::from_biguint(Sign::Plus, (*self.0).clone());
        k.mod_floor(&p).to_biguint().expect("mod_floor is non-negative")
    }

    /// The field element `k mod p`.
    pub fn elem(&self, k: impl Into<BigInt>) -> FieldElement {
        FieldElement {
            value: self.reduce(&k.into()),
            modulus: self.clone(),
        }
    }

    /// Wraps an already-reduced value. Reduces anyway if it is out of range.
    pub fn elem_from_biguint(&self, value: BigUint) -> FieldElement {
        let value = if value < *self.0 { value } else { value % &*self.0 };
        FieldElement {
            value,
            modulus: self.clone(),
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem_from_biguint(BigUint::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.elem_from_biguint(BigUint::one())
    }

    /// All elements `0, 1, ..., p-1` in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        num_iter(&self.0).map(move |v| self.elem_from_biguint(v))
    }
}

fn num_iter(bound: &BigUint) -> impl Iterator<Item = BigUint> {
    let bound = bound.clone();
    std::iter::successors(Some(BigUint::zero()), |v| Some(v + 1u32)).take_while(move |v| *v < bound)
}

impl PartialEq for Prime {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Prime {}

impl std::hash::Hash for Prime {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prime({})", self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of the prime field 𝔽_p, `0 <= value < p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: BigUint,
    modulus: Prime,
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &Prime {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch(
                self.modulus.value().clone(),
                other.modulus.value().clone(),
            ))
        }
    }

    fn with_value(&self, value: BigUint) -> Self {
        FieldElement {
            value,
            modulus: self.modulus.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let p = self.modulus.value();
        let mut sum = &self.value + &other.value;
        if sum >= *p {
            sum -= p;
        }
        Ok(self.with_value(sum))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with_value(&self.value * &other.value % self.modulus.value()))
    }

    pub fn neg(&self) -> Self {
        if self.value.is_zero() {
            self.clone()
        } else {
            self.with_value(self.modulus.value() - &self.value)
        }
    }

    /// `self^e` by square-and-multiply. `pow(0, 0) = 1`, the empty product.
    pub fn pow(&self, e: &BigUint) -> Self {
        let p = self.modulus.value();
        let mut result = BigUint::one() % p;
        let mut base = self.value.clone();
        for i in 0..e.bits() {
            if e.bit(i) {
                result = result * &base % p;
            }
            base = &base * &base % p;
        }
        self.with_value(result)
    }

    /// Multiplicative inverse, computed as `self^(p-2)`.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.value.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let exp = self.modulus.value() - 2u32;
        Ok(self.pow(&exp))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        self.mul(&other.inv()?)
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by value, then by modulus.
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then_with(|| self.modulus.value().cmp(other.modulus.value()))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator sugar. These panic on a modulus mismatch; use the named methods to
// get an error instead.

impl ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        FieldElement::add(self, rhs).expect("field operands share a modulus")
    }
}

impl ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        FieldElement::sub(self, rhs).expect("field operands share a modulus")
    }
}

impl ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        FieldElement::mul(self, rhs).expect("field operands share a modulus")
    }
}

impl ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::from_u64(n).unwrap()
    }

    fn small_primes(limit: u64) -> Vec<u64> {
        (2..=limit)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn primality_matches_trial_division() {
        let primes = small_primes(2000);
        for n in 0..=2000u64 {
            assert_eq!(is_prime(&BigUint::from(n)), primes.contains(&n), "n = {n}");
        }
    }

    #[test]
    fn large_primes() {
        let bn254: BigUint = "21888242871839275222246405745257275088548364400416034343698204186575808495617"
            .parse()
            .unwrap();
        assert!(Prime::new(bn254.clone()).is_ok());
        assert!(Prime::new(bn254 + 2u32).is_err());
        // 561 is a Carmichael number
        assert!(Prime::from_u64(561).is_err());
        assert!(Prime::from_u64(1).is_err());
        assert!(Prime::from_u64(0).is_err());
    }

    #[test]
    fn add_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(3).add(&f7.elem(5)).unwrap(), f7.elem(1));
        for x in f7.elements() {
            assert_eq!(f7.zero().add(&x).unwrap(), x);
        }
        let f13 = p(13);
        assert_eq!(f13.elem(12).add(&f13.elem(1)).unwrap(), f13.zero());
    }

    #[test]
    fn mul_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(3).mul(&f7.elem(5)).unwrap(), f7.elem(1));
        for x in f7.elements() {
            assert_eq!(f7.one().mul(&x).unwrap(), x);
            assert_eq!(f7.zero().mul(&x).unwrap(), f7.zero());
        }
    }

    #[test]
    fn neg_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(3).neg(), f7.elem(4));
        assert_eq!(f7.zero().neg(), f7.zero());
        assert_eq!(p(13).one().neg(), p(13).elem(12));
        assert_eq!(f7.elem(-1), f7.elem(6));
    }

    #[test]
    fn pow_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(3).pow(&BigUint::from(4u32)), f7.elem(4));
        for x in f7.elements() {
            assert_eq!(x.pow(&BigUint::zero()), f7.one());
        }
        let f13 = p(13);
        assert_eq!(f13.elem(2).pow(&BigUint::from(12u32)), f13.one());
    }

    #[test]
    fn inv_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(3).inv().unwrap(), f7.elem(5));
        assert_eq!(f7.one().inv().unwrap(), f7.one());
        assert_eq!(p(13).elem(2).inv().unwrap(), p(13).elem(7));
        assert_eq!(f7.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn div_examples() {
        let f7 = p(7);
        assert_eq!(f7.elem(6).div(&f7.elem(3)).unwrap(), f7.elem(2));
        for x in f7.elements() {
            assert_eq!(x.div(&f7.one()).unwrap(), x);
        }
        assert_eq!(f7.one().div(&f7.elem(5)).unwrap(), f7.elem(3));
        assert_eq!(f7.one().div(&f7.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn modulus_mismatch_rejected() {
        let a = p(7).elem(1);
        let b = p(11).elem(1);
        assert!(matches!(a.add(&b), Err(FieldError::ModulusMismatch(..))));
        assert!(matches!(a.mul(&b), Err(FieldError::ModulusMismatch(..))));
        assert!(matches!(a.div(&b), Err(FieldError::ModulusMismatch(..))));
    }

    #[test]
    fn pow_matches_iterated_mul() {
        for q in small_primes(31) {
            let f = p(q);
            for x in f.elements() {
                let mut acc = f.one();
                for e in 0..=16u32 {
                    assert_eq!(x.pow(&BigUint::from(e)), acc, "p={q} x={x} e={e}");
                    acc = &acc * &x;
                }
            }
        }
    }

    #[test]
    fn pow_zero_zero_is_one() {
        assert_eq!(p(5).zero().pow(&BigUint::zero()), p(5).one());
    }
}
