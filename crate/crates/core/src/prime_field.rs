//! Exact arithmetic in `F = Z/pZ` and exponent bookkeeping for SL2(p).

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{self, Field, SquareRoot};

/// Largest supported modulus (exclusive). Products of two residues fit in
/// 128-bit intermediates with room to spare.
pub const MAX_MODULUS: u64 = 1 << 61;

/// An odd prime `p >= 13`, primality-checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p < 13 {
            return Err(Error::ModulusTooSmall(p));
        }
        Ok(PrimeModulus(p))
    }

    /// Skips the `p >= 13` floor. Used by brute-force checks over tiny
    /// groups such as SL2(5); not reachable from the public pipeline.
    #[doc(hidden)]
    pub fn new_unchecked_small(p: u64) -> Result<Self> {
        if p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeModulus(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn elem(self, v: u64) -> PFElement {
        PFElement { value: v % self.0, p: self.0 }
    }

    pub fn elem_i64(self, v: i64) -> PFElement {
        self.elem(v.rem_euclid(self.0 as i64) as u64)
    }

    fn mul_mod(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic Miller–Rabin, valid for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A residue modulo `p`, always reduced into `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PFElement {
    value: u64,
    p: u64,
}

impl PFElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    /// Signed representative in `(-p/2, p/2]`, handy for display.
    pub fn signed(self) -> i64 {
        if self.value > self.p / 2 {
            self.value as i64 - self.p as i64
        } else {
            self.value as i64
        }
    }
}

impl fmt::Display for PFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

/// Checked binary arithmetic; rejects operands from different fields.
pub fn pf_arith(a: PFElement, b: PFElement, kind: ArithKind) -> Result<PFElement> {
    if a.p != b.p {
        return Err(Error::ModulusMismatch);
    }
    let f = PrimeModulus(a.p);
    Ok(match kind {
        ArithKind::Add => f.add(&a, &b),
        ArithKind::Sub => f.sub(&a, &b),
        ArithKind::Mul => f.mul(&a, &b),
    })
}

pub fn pf_inv(a: PFElement) -> Result<PFElement> {
    PrimeModulus(a.p).inv(&a)
}

/// `a^n` for any integer `n`; negative powers go through the inverse.
pub fn pf_pow(a: PFElement, n: i128) -> Result<PFElement> {
    let f = PrimeModulus(a.p);
    if n < 0 {
        if a.value == 0 {
            return Err(Error::NegativePowerOfZero);
        }
        let inv = f.inv(&a)?;
        return Ok(f.pow(&inv, n.unsigned_abs()));
    }
    Ok(f.pow(&a, n as u128))
}

/// Square root in `F`, canonicalized to the root with the smaller integer
/// representative.
pub fn pf_sqrt(a: PFElement) -> SquareRoot<PFElement> {
    let f = PrimeModulus(a.p);
    if a.value == 0 {
        return SquareRoot::Root(a);
    }
    if !field::is_square(&f, &a, a.p) {
        return SquareRoot::NonResidue;
    }
    let data = odd_part(u128::from(a.p - 1)).expect("p - 1 is positive");
    let z = smallest_nonresidue(f);
    let r = field::tonelli_shanks(&f, &a, data.eo, data.v, &z);
    let other = f.neg(&r);
    SquareRoot::Root(if other.value < r.value { other } else { r })
}

fn smallest_nonresidue(f: PrimeModulus) -> PFElement {
    (2..f.0)
        .map(|v| f.elem(v))
        .find(|z| !field::is_square(&f, z, f.0))
        .expect("an odd prime field has non-residues")
}

impl Field for PrimeModulus {
    type Elem = PFElement;

    fn zero(&self) -> PFElement {
        self.elem(0)
    }

    fn one(&self) -> PFElement {
        self.elem(1)
    }

    fn add(&self, a: &PFElement, b: &PFElement) -> PFElement {
        debug_assert_eq!(a.p, self.0);
        debug_assert_eq!(b.p, self.0);
        let s = a.value + b.value;
        self.elem(if s >= self.0 { s - self.0 } else { s })
    }

    fn neg(&self, a: &PFElement) -> PFElement {
        self.elem(if a.value == 0 { 0 } else { self.0 - a.value })
    }

    fn mul(&self, a: &PFElement, b: &PFElement) -> PFElement {
        debug_assert_eq!(a.p, self.0);
        debug_assert_eq!(b.p, self.0);
        PFElement { value: self.mul_mod(a.value, b.value), p: self.0 }
    }

    fn inv(&self, a: &PFElement) -> Result<PFElement> {
        if a.value == 0 {
            return Err(Error::DivisionByZero);
        }
        // Extended Euclid on signed 128-bit values.
        let (mut r0, mut r1) = (self.0 as i128, a.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.elem(t0.rem_euclid(self.0 as i128) as u64))
    }

    fn eq(&self, a: &PFElement, b: &PFElement) -> bool {
        a == b
    }

    fn from_u64(&self, n: u64) -> PFElement {
        self.elem(n)
    }
}

/// Exponent `E = Eo * 2^v` split into its odd part, with the binary
/// expansion of `Eo` (most significant bit first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentData {
    pub e: u128,
    pub eo: u128,
    pub v: u32,
    pub bits: Vec<bool>,
}

impl ExponentData {
    pub fn bits_string(&self) -> String {
        bits_to_string(&self.bits)
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_string(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("bad bit character {other:?}"))),
        })
        .collect()
}

pub fn bits_value(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b))
}

pub fn odd_part(e: u128) -> Result<ExponentData> {
    if e == 0 {
        return Err(Error::NonPositiveExponent);
    }
    let v = e.trailing_zeros();
    let eo = e >> v;
    let len = 128 - eo.leading_zeros();
    let bits = (0..len).rev().map(|i| (eo >> i) & 1 == 1).collect();
    Ok(ExponentData { e, eo, v, bits })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u128, b: u128) -> Result<u128> {
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::ExponentOverflow)
}

/// `lcm(2p, p - 1, p + 1)`, an exponent of SL2(p).
pub fn sl2_exponent(p: PrimeModulus) -> Result<u128> {
    let p = u128::from(p.get());
    lcm(lcm(2 * p, p - 1)?, p + 1)
}

/// Prime factorization by trial division, as `(prime, multiplicity)` pairs.
pub fn factor(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f13() -> PrimeModulus {
        PrimeModulus::new(13).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(PrimeModulus::new(13).is_ok());
        assert_eq!(PrimeModulus::new(11), Err(Error::ModulusTooSmall(11)));
        assert_eq!(PrimeModulus::new(15), Err(Error::NotPrime(15)));
        assert_eq!(PrimeModulus::new(2), Err(Error::NotPrime(2)));
        assert_eq!(PrimeModulus::new(1 << 61), Err(Error::ModulusTooLarge(1 << 61)));
        assert!(PrimeModulus::new(1_000_000_007).is_ok());
    }

    #[test]
    fn arith_examples() {
        let f = f13();
        let add = pf_arith(f.elem(6), f.elem(7), ArithKind::Add).unwrap();
        assert_eq!(add.value(), 0);
        assert_eq!(pf_arith(f.elem(3), f.elem(9), ArithKind::Mul).unwrap().value(), 1);
        for x in 0..13 {
            assert_eq!(pf_arith(f.elem(1), f.elem(x), ArithKind::Mul).unwrap().value(), x);
        }
        let other = PrimeModulus::new(17).unwrap();
        assert_eq!(
            pf_arith(f.elem(1), other.elem(1), ArithKind::Add),
            Err(Error::ModulusMismatch)
        );
    }

    #[test]
    fn inverse_examples() {
        let f = f13();
        assert_eq!(pf_inv(f.elem(1)).unwrap().value(), 1);
        assert_eq!(pf_inv(f.elem(3)).unwrap().value(), 9);
        assert_eq!(pf_inv(f.elem(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn pow_examples() {
        let f = f13();
        for x in 1..13 {
            assert_eq!(pf_pow(f.elem(x), 0).unwrap().value(), 1);
        }
        assert_eq!(pf_pow(f.elem(2), 12).unwrap().value(), 1);
        // 4^6 by repeated multiplication
        let brute = (0..6).fold(1u64, |acc, _| acc * 4 % 13);
        assert_eq!(brute, 1);
        assert_eq!(pf_pow(f.elem(4), 6).unwrap().value(), brute);
        assert_eq!(pf_pow(f.elem(3), -1).unwrap().value(), 9);
        assert_eq!(pf_pow(f.elem(0), -2), Err(Error::NegativePowerOfZero));
    }

    #[test]
    fn sqrt_examples() {
        let f = f13();
        assert_eq!(pf_sqrt(f.elem(0)), SquareRoot::Root(f.elem(0)));
        assert_eq!(pf_sqrt(f.elem(3)), SquareRoot::Root(f.elem(4)));
        assert_eq!(pf_sqrt(f.elem(2)), SquareRoot::NonResidue);
    }

    #[test]
    fn sqrt_full_scan_matches_enumerated_squares() {
        for p in [13u64, 17, 29, 97, 997] {
            let f = PrimeModulus::new(p).unwrap();
            let squares: std::collections::BTreeSet<u64> =
                (1..p).map(|x| x * x % p).collect();
            let mut nonresidues = 0;
            for a in 1..p {
                match pf_sqrt(f.elem(a)) {
                    SquareRoot::Root(r) => {
                        assert!(squares.contains(&a));
                        assert_eq!(r.value() * r.value() % p, a);
                        assert!(r.value() <= p - r.value());
                    }
                    SquareRoot::NonResidue => {
                        assert!(!squares.contains(&a));
                        nonresidues += 1;
                    }
                }
            }
            assert_eq!(nonresidues, (p - 1) / 2);
        }
    }

    #[test]
    fn odd_part_examples() {
        let d = odd_part(1092).unwrap();
        assert_eq!((d.eo, d.v), (273, 2));
        assert_eq!(odd_part(273).unwrap().bits_string(), "100010001");
        let one = odd_part(1).unwrap();
        assert_eq!((one.eo, one.v), (1, 0));
        assert_eq!(odd_part(0), Err(Error::NonPositiveExponent));
        assert_eq!(bits_value(&d.bits), 273);
    }

    #[test]
    fn exponent_formula() {
        assert_eq!(sl2_exponent(f13()).unwrap(), 1092);
        let p997 = PrimeModulus::new(997).unwrap();
        assert_eq!(sl2_exponent(p997).unwrap(), 495_512_988);
        assert_eq!(sl2_exponent(PrimeModulus::new_unchecked_small(5).unwrap()).unwrap(), 60);
    }

    #[test]
    fn factor_small() {
        assert_eq!(factor(1092), vec![(2, 2), (3, 1), (7, 1), (13, 1)]);
        assert_eq!(factor(1), vec![]);
        assert_eq!(factor(997), vec![(997, 1)]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn field_axioms(p in prop::sample::select(vec![13u64, 997]), a: u64, b: u64, c: u64) {
                let f = PrimeModulus::new(p).unwrap();
                let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
                prop_assert_eq!(f.add(&a, &f.add(&b, &c)), f.add(&f.add(&a, &b), &c));
                prop_assert_eq!(f.mul(&a, &f.mul(&b, &c)), f.mul(&f.mul(&a, &b), &c));
                prop_assert_eq!(f.add(&a, &b), f.add(&b, &a));
                prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
                prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                prop_assert_eq!(f.add(&a, &f.neg(&a)), f.zero());
                if a.value() != 0 {
                    prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
                }
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn odd_part_round_trip(e in 1u128..(1u128 << 64)) {
                let d = odd_part(e).unwrap();
                prop_assert_eq!(d.eo << d.v, e);
                prop_assert_eq!(d.eo & 1, 1);
                prop_assert_eq!(bits_value(&d.bits), d.eo);
                prop_assert!(d.bits[0]);
            }
        }
    }
}
