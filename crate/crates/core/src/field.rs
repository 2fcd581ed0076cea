//! The abstract field interface shared by the prime field `F` and the
//! black box field `K`.
//!
//! Elements do not carry enough information to compute on their own: every
//! operation goes through a field context, which is how a black box field
//! keeps its arithmetic behind an oracle.

use std::fmt::Debug;

use crate::error::Result;

pub trait Field {
    type Elem: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; zero is rejected.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// Field equality. Opaque fields may have several encodings per element.
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.eq(a, &self.zero())
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Image of an integer under the prime-field map, by double-and-add.
    fn from_u64(&self, n: u64) -> Self::Elem {
        let mut acc = self.zero();
        for bit in (0..64).rev() {
            acc = self.add(&acc, &acc);
            if (n >> bit) & 1 == 1 {
                acc = self.add(&acc, &self.one());
            }
        }
        acc
    }

    fn from_i64(&self, n: i64) -> Self::Elem {
        let x = self.from_u64(n.unsigned_abs());
        if n < 0 {
            self.neg(&x)
        } else {
            x
        }
    }

    /// Square-and-multiply over the binary expansion of `n`.
    fn pow(&self, a: &Self::Elem, n: u128) -> Self::Elem {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    fn square(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }
}

/// Raise `a` to the exponent whose binary expansion is `bits`, most
/// significant bit first.
pub fn pow_bits<F: Field>(f: &F, a: &F::Elem, bits: &[bool]) -> F::Elem {
    let mut acc = f.one();
    for &b in bits {
        acc = f.square(&acc);
        if b {
            acc = f.mul(&acc, a);
        }
    }
    acc
}

/// Outcome of a square-root computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareRoot<E> {
    Root(E),
    NonResidue,
}

impl<E> SquareRoot<E> {
    pub fn root(self) -> Option<E> {
        match self {
            SquareRoot::Root(r) => Some(r),
            SquareRoot::NonResidue => None,
        }
    }

    pub fn is_residue(&self) -> bool {
        matches!(self, SquareRoot::Root(_))
    }
}

/// Tonelli–Shanks using only field operations.
///
/// `odd_exponent` must be an odd multiple of the odd part of `p - 1` (the odd
/// part of a group exponent of SL2(p) qualifies), `two_adic` is the 2-adic
/// valuation of `p - 1` and `nonresidue` a known quadratic non-residue.
pub fn tonelli_shanks<F: Field>(
    f: &F,
    t: &F::Elem,
    odd_exponent: u128,
    two_adic: u32,
    nonresidue: &F::Elem,
) -> F::Elem {
    debug_assert!(odd_exponent & 1 == 1);
    if f.is_zero(t) {
        return f.zero();
    }
    let mut m = two_adic;
    let mut c = f.pow(nonresidue, odd_exponent);
    let mut tt = f.pow(t, odd_exponent);
    let mut r = f.pow(t, odd_exponent.div_ceil(2));
    let one = f.one();
    while !f.eq(&tt, &one) {
        let mut i = 0u32;
        let mut probe = tt.clone();
        while !f.eq(&probe, &one) {
            probe = f.square(&probe);
            i += 1;
            // A residue never needs more than m - 1 squarings.
            if i >= m {
                return f.zero();
            }
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = f.square(&b);
        }
        m = i;
        c = f.square(&b);
        tt = f.mul(&tt, &c);
        r = f.mul(&r, &b);
    }
    r
}

/// Euler's criterion: `t` is a nonzero square iff `t^((p-1)/2) = 1`.
pub fn is_square<F: Field>(f: &F, t: &F::Elem, p: u64) -> bool {
    f.is_zero(t) || f.eq(&f.pow(t, u128::from((p - 1) / 2)), &f.one())
}

