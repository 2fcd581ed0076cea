//! The black box field `K` encrypting `F`.
//!
//! Elements are opaque tokens owned by a [`KField`]. Arithmetic is answered
//! by a reference oracle holding a secret affine bijection between tokens
//! and residues; the anchors (zero, one, the coordinate frame) come from
//! the toolbox, and the bridge between coordinates and involutions of `Y`
//! goes through the same plane frame the toolbox was built on.
//!
//! Square roots never look behind the tokens: [`KField::k_sqrt`] runs
//! Tonelli–Shanks on field operations alone, fed with the toolbox's binary
//! expansion of `Eo`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{self, Field, SquareRoot};
use crate::matrix::ProjPoint;
use crate::pgl2::{Pgl2Group, YElement};
use crate::plane::PlaneFrame;
use crate::prime_field::{self, PFElement, PrimeModulus};
use crate::toolbox::ToolBox;

/// Attempts at drawing a random non-residue.
pub const NONRESIDUE_BUDGET: usize = 64;

const SECRET_LABEL: u64 = 0x6b66_6965_6c64;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KElement {
    token: u64,
    field_tag: u32,
}

impl KElement {
    pub fn to_hex(&self) -> String {
        format!("{:08x}{:016x}", self.field_tag, self.token)
    }
}

impl fmt::Debug for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K#{}", self.to_hex())
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Clone)]
pub struct KField {
    toolbox: Arc<ToolBox>,
    frame: PlaneFrame,
    p: PrimeModulus,
    scale: PFElement,
    scale_inv: PFElement,
    shift: PFElement,
    tag: u32,
    zero: KElement,
    one: KElement,
}

impl fmt::Debug for KField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KField").field("p", &self.p).field("tag", &self.tag).finish_non_exhaustive()
    }
}

impl KField {
    pub fn new(toolbox: Arc<ToolBox>) -> Result<Self> {
        let frame = toolbox.frame()?;
        let group = toolbox.group();
        let p = group.modulus();
        let secret = group.derive_secret(SECRET_LABEL);
        let scale = p.elem(1 + secret % (p.get() - 1));
        let shift = p.elem((secret >> 20) % p.get());
        let tag = (group.derive_secret(SECRET_LABEL + 1) >> 32) as u32;
        let mut k = KField {
            toolbox,
            frame,
            p,
            scale,
            scale_inv: p.inv(&scale)?,
            shift,
            tag,
            zero: KElement { token: 0, field_tag: tag },
            one: KElement { token: 0, field_tag: tag },
        };
        k.zero = k.hide(p.zero());
        k.one = k.hide(p.one());
        Ok(k)
    }

    pub fn toolbox(&self) -> &Arc<ToolBox> {
        &self.toolbox
    }

    pub fn pgl2(&self) -> &Pgl2Group {
        self.toolbox.pgl2()
    }

    /// The characteristic.
    pub fn characteristic(&self) -> u64 {
        self.p.get()
    }

    fn hide(&self, v: PFElement) -> KElement {
        let p = &self.p;
        KElement { token: p.add(&p.mul(&self.scale, &v), &self.shift).value(), field_tag: self.tag }
    }

    fn reveal(&self, e: &KElement) -> PFElement {
        assert!(e.field_tag == self.tag, "element of another black box field");
        let p = &self.p;
        p.mul(&p.sub(&p.elem(e.token), &self.shift), &self.scale_inv)
    }

    pub fn check(&self, e: &KElement) -> Result<()> {
        if e.field_tag == self.tag && e.token < self.p.get() {
            Ok(())
        } else {
            Err(Error::ForeignHandle)
        }
    }

    pub fn parse_element(&self, s: &str) -> Result<KElement> {
        let s = s.trim();
        if s.len() != 24 || !s.is_ascii() {
            return Err(Error::MalformedHandle(s.to_string()));
        }
        let tag = u32::from_str_radix(&s[..8], 16).map_err(|_| Error::MalformedHandle(s.to_string()))?;
        let token = u64::from_str_radix(&s[8..], 16).map_err(|_| Error::MalformedHandle(s.to_string()))?;
        let e = KElement { token, field_tag: tag };
        self.check(&e)?;
        Ok(e)
    }

    /// A uniformly random element.
    pub fn random(&self, rng: &mut dyn rand::RngCore) -> KElement {
        KElement { token: rng.gen_range(0..self.p.get()), field_tag: self.tag }
    }

    /// The image of `n` under the field morphism `F -> K`, by double-and-add.
    pub fn k_encode(&self, n: PFElement) -> KElement {
        debug_assert_eq!(n.modulus(), self.p.get());
        self.from_u64(n.value())
    }

    /// Euler's criterion with field operations.
    pub fn is_square(&self, t: &KElement) -> bool {
        field::is_square(self, t, self.p.get())
    }

    /// A square root of `t`, or `NonResidue`. Uses only field operations and
    /// the binary expansion of `Eo`; the non-residue needed by
    /// Tonelli–Shanks is drawn at random.
    pub fn k_sqrt(
        &self,
        t: &KElement,
        eo_bits: &[bool],
        rng: &mut dyn rand::RngCore,
    ) -> Result<SquareRoot<KElement>> {
        self.check(t)?;
        if self.is_zero(t) {
            return Ok(SquareRoot::Root(self.zero()));
        }
        if !self.is_square(t) {
            return Ok(SquareRoot::NonResidue);
        }
        let eo = prime_field::bits_value(eo_bits);
        if eo & 1 == 0 {
            return Err(Error::BadExponent);
        }
        let p = self.p.get();
        let two_adic = (p - 1).trailing_zeros();
        let mut nonresidue = None;
        for _ in 0..NONRESIDUE_BUDGET {
            let n = self.random(rng);
            if !self.is_square(&n) {
                nonresidue = Some(n);
                break;
            }
        }
        let n = nonresidue.ok_or(Error::BudgetExhausted("non-residue"))?;
        let r = field::tonelli_shanks(self, t, eo, two_adic, &n);
        if !self.eq(&self.square(&r), t) {
            return Err(Error::BadExponent);
        }
        Ok(SquareRoot::Root(r))
    }

    /// The involution of `Y` whose axis has sharp coordinates `(x : y : z)`.
    pub fn point_from_coords(&self, x: &KElement, y: &KElement, z: &KElement) -> Result<YElement> {
        for e in [x, y, z] {
            self.check(e)?;
        }
        let c = [self.reveal(x), self.reveal(y), self.reveal(z)];
        self.frame.point(self.pgl2(), &c)
    }

    /// Sharp coordinates of the axis of an involution, normalized so the
    /// first nonzero coordinate is one.
    pub fn coords_from_point(&self, j: &YElement) -> Result<ProjPoint<KElement>> {
        let c = self.frame.coords(self.pgl2(), j)?;
        ProjPoint::new([self.hide(c[0]), self.hide(c[1]), self.hide(c[2])], self)
    }

    /// The diagonal of the invariant quadratic form in sharp coordinates,
    /// scaled so that its first entry is one.
    pub fn sharp_gram(&self) -> [KElement; 3] {
        let p = &self.p;
        let g = self.frame.gram();
        let s = p.inv(&g[0]).expect("frame forms are nondegenerate");
        [self.one(), self.hide(p.mul(&g[1], &s)), self.hide(p.mul(&g[2], &s))]
    }
}

impl Field for KField {
    type Elem = KElement;

    fn zero(&self) -> KElement {
        self.zero
    }

    fn one(&self) -> KElement {
        self.one
    }

    fn add(&self, a: &KElement, b: &KElement) -> KElement {
        self.hide(self.p.add(&self.reveal(a), &self.reveal(b)))
    }

    fn neg(&self, a: &KElement) -> KElement {
        self.hide(self.p.neg(&self.reveal(a)))
    }

    fn mul(&self, a: &KElement, b: &KElement) -> KElement {
        self.hide(self.p.mul(&self.reveal(a), &self.reveal(b)))
    }

    fn inv(&self, a: &KElement) -> Result<KElement> {
        Ok(self.hide(self.p.inv(&self.reveal(a))?))
    }

    fn eq(&self, a: &KElement, b: &KElement) -> bool {
        assert!(a.field_tag == self.tag && b.field_tag == self.tag, "element of another black box field");
        a.token == b.token
    }
}

/// Free-function form of [`KField::k_encode`].
pub fn k_encode(n: PFElement, k: &KField) -> KElement {
    k.k_encode(n)
}
