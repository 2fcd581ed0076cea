//! Black box groups: opaque handles, oracle operations, and the generic
//! black-box algorithms (random involutions, Bray's centralizer trick) that
//! only talk to a group through [`GroupOracle`].
//!
//! [`BBGroup`] is a concrete instance encrypting SL2(p). Internally an
//! element is a 2x2 matrix conjugated by a secret invertible matrix and then
//! serialized with a secret mask, so algorithm code sees nothing but bytes.

use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{self, Field};
use crate::matrix::{self, Mat2};
use crate::prime_field::{self, ExponentData, PFElement, PrimeModulus};

/// Default length of the random words produced by [`BBGroup::random`].
pub const DEFAULT_WORD_LENGTH: usize = 50;
/// Attempts allowed when searching for an involution.
pub const INVOLUTION_BUDGET: usize = 64;
/// Attempts allowed when searching for a centralizer element.
pub const BRAY_BUDGET: usize = 128;

const TAG_LEN: usize = 4;
const BODY_LEN: usize = 32;
pub const HANDLE_LEN: usize = TAG_LEN + BODY_LEN;

/// Minimal interface a black box group offers to generic algorithms.
///
/// `is_trivial` is the identity test the algorithms work with. For a group
/// encrypting SL2 that test is taken modulo the center, so every algorithm
/// here effectively runs in PSL2 or PGL2.
pub trait GroupOracle: Sync {
    type Elem: Clone + fmt::Debug + Send + Sync;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn identity(&self) -> Self::Elem;
    fn is_trivial(&self, a: &Self::Elem) -> bool;
    /// A multiple of every element order.
    fn exponent(&self) -> u128;
    fn random_element(&self, rng: &mut dyn rand::RngCore) -> Self::Elem;

    fn equiv(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_trivial(&self.mul(a, &self.inv(b)))
    }

    fn pow(&self, a: &Self::Elem, n: u128) -> Self::Elem {
        if n == 0 {
            return self.identity();
        }
        matrix::power(a, n, |x, y| self.mul(x, y))
    }

    /// Order modulo whatever `is_trivial` quotients out.
    fn order(&self, a: &Self::Elem) -> Result<u128> {
        matrix::element_order(a, self.exponent(), |x, y| self.mul(x, y), |x| self.is_trivial(x))
    }

    fn commute(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.equiv(&self.mul(a, b), &self.mul(b, a))
    }

    /// `b^-1 a b`
    fn conjugate(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(&self.inv(b), a), b)
    }
}

/// Power `x` into its 2-part and square down to an involution.
///
/// Returns `None` when `x^Eo` is already trivial.
pub fn involution_from<G: GroupOracle + ?Sized>(
    g: &G,
    x: &G::Elem,
    eo: &ExponentData,
) -> Option<G::Elem> {
    let mut y = g.pow(x, eo.eo);
    if g.is_trivial(&y) {
        return None;
    }
    loop {
        let y2 = g.mul(&y, &y);
        if g.is_trivial(&y2) {
            return Some(y);
        }
        y = y2;
    }
}

/// A random involution (modulo the center): `x^Eo` squared down until the
/// next square is trivial.
pub fn random_involution<G: GroupOracle + ?Sized>(
    g: &G,
    eo: &ExponentData,
    rng: &mut dyn rand::RngCore,
) -> Result<G::Elem> {
    for _ in 0..INVOLUTION_BUDGET {
        let x = g.random_element(rng);
        if let Some(j) = involution_from(g, &x, eo) {
            return Ok(j);
        }
    }
    Err(Error::BudgetExhausted("random involution"))
}

/// Bray's trick: for random `x` put `c = i * x^-1 i x`; when `c` has odd
/// order `2k + 1`, the element `x c^k` centralizes `i`.
pub fn bray_centralizer_element<G: GroupOracle + ?Sized>(
    g: &G,
    i: &G::Elem,
    rng: &mut dyn rand::RngCore,
) -> Result<G::Elem> {
    bray_with(g, |x| g.mul(i, &g.conjugate(i, x)), rng)
}

/// Bray's trick with a caller-supplied commutator `x -> i * i^x`. Lets the
/// oracle use an involution that lives outside the group, such as an outer
/// automorphism.
pub(crate) fn bray_with<G, C>(g: &G, commutator: C, rng: &mut dyn rand::RngCore) -> Result<G::Elem>
where
    G: GroupOracle + ?Sized,
    C: Fn(&G::Elem) -> G::Elem,
{
    for _ in 0..BRAY_BUDGET {
        let x = g.random_element(rng);
        let c = commutator(&x);
        let m = g.order(&c)?;
        if m % 2 == 1 {
            let k = m / 2;
            return Ok(g.mul(&x, &g.pow(&c, k)));
        }
    }
    Err(Error::BudgetExhausted("Bray centralizer"))
}

/// An opaque element handle of a [`BBGroup`].
#[derive(Clone, PartialEq, Eq)]
pub struct BBElement {
    bytes: [u8; HANDLE_LEN],
}

impl Hash for BBElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bytes.hash(state)
    }
}

impl BBElement {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Lowercase hex of the handle bytes.
    pub fn to_hex(&self) -> String {
        hex::encode(self.bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let raw = hex::decode(s.trim()).map_err(|e| Error::MalformedHandle(e.to_string()))?;
        let bytes: [u8; HANDLE_LEN] = raw
            .try_into()
            .map_err(|_| Error::MalformedHandle(format!("expected {HANDLE_LEN} bytes")))?;
        Ok(BBElement { bytes })
    }
}

impl fmt::Debug for BBElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BB({}..)", &self.to_hex()[..16])
    }
}

impl fmt::Display for BBElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// A black box group encrypting SL2(p).
pub struct BBGroup {
    p: PrimeModulus,
    secret_seed: u64,
    tag: [u8; TAG_LEN],
    mask: [u8; BODY_LEN],
    conj: Mat2<PFElement>,
    conj_inv: Mat2<PFElement>,
    generators: Vec<BBElement>,
    identity: BBElement,
    exponent: u128,
    word_length: usize,
}

impl fmt::Debug for BBGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BBGroup")
            .field("p", &self.p)
            .field("generators", &self.generators.len())
            .finish_non_exhaustive()
    }
}

impl BBGroup {
    /// Build a black box SL2(p) whose encoding is derived from `secret_seed`.
    pub fn new(p: PrimeModulus, secret_seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(secret_seed ^ 0x5eed_b1ac_b0c5_0001);
        let mut tag = [0u8; TAG_LEN];
        rng.fill(&mut tag);
        let mut mask = [0u8; BODY_LEN];
        rng.fill(&mut mask);
        let conj = loop {
            let m = Mat2::new(
                p.elem(rng.gen()),
                p.elem(rng.gen()),
                p.elem(rng.gen()),
                p.elem(rng.gen()),
            );
            if m.det(&p).value() != 0 {
                break m;
            }
        };
        let conj_inv = conj.inv(&p)?;
        let mut group = BBGroup {
            p,
            secret_seed,
            tag,
            mask,
            conj,
            conj_inv,
            generators: Vec::new(),
            identity: BBElement { bytes: [0; HANDLE_LEN] },
            exponent: prime_field::sl2_exponent(p)?,
            word_length: DEFAULT_WORD_LENGTH,
        };
        group.identity = group.encode_internal(&Mat2::identity(&p));
        group.generators = [Mat2::upper(&p, p.one()), Mat2::lower(&p, p.one())]
            .iter()
            .map(|g| group.encode_internal(&group.hide(g)))
            .collect();
        Ok(group)
    }

    pub fn with_word_length(mut self, len: usize) -> Self {
        self.word_length = len.max(1);
        self
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn generators(&self) -> &[BBElement] {
        &self.generators
    }

    pub fn identity_handle(&self) -> &BBElement {
        &self.identity
    }

    pub fn exponent_hint(&self) -> u128 {
        self.exponent
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn bb_mul(&self, a: &BBElement, b: &BBElement) -> Result<BBElement> {
        let x = self.decode_internal(a)?;
        let y = self.decode_internal(b)?;
        Ok(self.encode_internal(&x.mul(&y, &self.p)))
    }

    pub fn bb_inv(&self, a: &BBElement) -> Result<BBElement> {
        let x = self.decode_internal(a)?;
        Ok(self.encode_internal(&x.adjugate(&self.p)))
    }

    /// Exact identity test (not modulo the center).
    pub fn is_identity(&self, a: &BBElement) -> Result<bool> {
        self.decode_internal(a)?;
        Ok(a == &self.identity)
    }

    /// Does `x` commute with every generator?
    pub fn is_central(&self, x: &BBElement) -> Result<bool> {
        for g in &self.generators {
            let xg = self.bb_mul(x, g)?;
            let gx = self.bb_mul(g, x)?;
            if xg != gx {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `x == y` modulo the center: `x y^-1` commutes with all generators.
    pub fn bb_equiv(&self, x: &BBElement, y: &BBElement) -> Result<bool> {
        let q = self.bb_mul(x, &self.bb_inv(y)?)?;
        self.is_central(&q)
    }

    /// A random word of the configured length in generators and inverses.
    pub fn bb_random<R: Rng + ?Sized>(&self, rng: &mut R) -> BBElement {
        let p = &self.p;
        let gens: Vec<Mat2<PFElement>> = self
            .generators
            .iter()
            .map(|g| self.decode_internal(g).expect("own generator"))
            .collect();
        let mut acc = Mat2::identity(p);
        for _ in 0..self.word_length {
            let g = &gens[rng.gen_range(0..gens.len())];
            let letter = if rng.gen() { g.clone() } else { g.adjugate(p) };
            acc = acc.mul(&letter, p);
        }
        self.encode_internal(&acc)
    }

    /// Element order in X itself (exact identity test).
    pub fn exact_order(&self, x: &BBElement) -> Result<u128> {
        self.decode_internal(x)?;
        matrix::element_order(
            x,
            self.exponent,
            |a, b| self.bb_mul(a, b).expect("own handles"),
            |a| a == &self.identity,
        )
    }

    /// Test-side access to the plain matrices. Only the holder of the secret
    /// seed gets a decoder.
    pub fn white_box(&self, secret_seed: u64) -> Option<WhiteBox<'_>> {
        (secret_seed == self.secret_seed).then_some(WhiteBox { group: self })
    }

    fn hide(&self, g: &Mat2<PFElement>) -> Mat2<PFElement> {
        self.conj.mul(g, &self.p).mul(&self.conj_inv, &self.p)
    }

    fn reveal(&self, g: &Mat2<PFElement>) -> Mat2<PFElement> {
        self.conj_inv.mul(g, &self.p).mul(&self.conj, &self.p)
    }

    /// Serialize a matrix given in the hidden coordinates.
    /// Secret material for other oracles built on this group.
    pub(crate) fn derive_secret(&self, label: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.secret_seed ^ label.rotate_left(17));
        rng.gen()
    }

    pub(crate) fn encode_internal(&self, g: &Mat2<PFElement>) -> BBElement {
        let mut bytes = [0u8; HANDLE_LEN];
        bytes[..TAG_LEN].copy_from_slice(&self.tag);
        for (k, e) in g.entries().into_iter().enumerate() {
            let chunk = e.value().to_le_bytes();
            for (j, byte) in chunk.iter().enumerate() {
                bytes[TAG_LEN + 8 * k + j] = byte ^ self.mask[8 * k + j];
            }
        }
        BBElement { bytes }
    }

    /// The matrix in hidden coordinates behind a handle.
    pub(crate) fn decode_internal(&self, h: &BBElement) -> Result<Mat2<PFElement>> {
        if h.bytes[..TAG_LEN] != self.tag {
            return Err(Error::ForeignHandle);
        }
        let mut vals = [0u64; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let mut chunk = [0u8; 8];
            for (j, byte) in chunk.iter_mut().enumerate() {
                *byte = h.bytes[TAG_LEN + 8 * k + j] ^ self.mask[8 * k + j];
            }
            *v = u64::from_le_bytes(chunk);
            if *v >= self.p.get() {
                return Err(Error::MalformedHandle("entry out of range".into()));
            }
        }
        let g = Mat2::new(
            self.p.elem(vals[0]),
            self.p.elem(vals[1]),
            self.p.elem(vals[2]),
            self.p.elem(vals[3]),
        );
        g.require_sl2(&self.p)
            .map_err(|_| Error::MalformedHandle("determinant is not one".into()))?;
        Ok(g)
    }

    /// Secret involutory outer automorphism matched to the involution `i`.
    ///
    /// Returns a trace-zero matrix `d` (hidden coordinates) with nonsquare
    /// determinant that anticommutes with `i`; conjugation by `d` therefore
    /// inverts the torus through `i` and squares to an inner automorphism by
    /// a scalar. Deterministic in `(secret seed, i)`.
    pub(crate) fn alpha_matrix_for(&self, i: &BBElement) -> Result<Mat2<PFElement>> {
        let p = &self.p;
        let im = self.decode_internal(i)?;
        if !p.is_zero(&im.trace(p)) {
            return Err(Error::NotInvolution);
        }
        let mut seed_bytes = [0u8; 8];
        for (k, b) in i.bytes.iter().enumerate() {
            seed_bytes[k % 8] ^= b.rotate_left(k as u32 % 8);
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.secret_seed ^ u64::from_le_bytes(seed_bytes) ^ 0xa1fa);
        let tr = |x: &Mat2<PFElement>, y: &Mat2<PFElement>| x.mul(y, p).trace(p);
        let ii = tr(&im, &im);
        for _ in 0..1024 {
            let v = [p.elem(rng.gen()), p.elem(rng.gen()), p.elem(rng.gen())];
            let x = matrix::lie_matrix(&v, p);
            let coeff = p.div(&tr(&x, &im), &ii)?;
            let d = Mat2::new(
                p.sub(&x.a, &p.mul(&coeff, &im.a)),
                p.sub(&x.b, &p.mul(&coeff, &im.b)),
                p.sub(&x.c, &p.mul(&coeff, &im.c)),
                p.sub(&x.d, &p.mul(&coeff, &im.d)),
            );
            let det = d.det(p);
            if !p.is_zero(&det) && !field::is_square(p, &det, p.get()) {
                return Ok(d);
            }
        }
        Err(Error::BudgetExhausted("outer automorphism"))
    }

    /// Apply conjugation by `d` (hidden coordinates) to a handle, rescaled
    /// back into SL2.
    pub(crate) fn conjugate_by_internal(
        &self,
        x: &BBElement,
        d: &Mat2<PFElement>,
    ) -> Result<BBElement> {
        let p = &self.p;
        let m = self.decode_internal(x)?;
        let y = d.mul(&m, p).mul(&d.inv(p)?, p);
        Ok(self.encode_internal(&y))
    }
}

impl GroupOracle for BBGroup {
    type Elem = BBElement;

    fn mul(&self, a: &BBElement, b: &BBElement) -> BBElement {
        self.bb_mul(a, b).expect("handle from this group")
    }

    fn inv(&self, a: &BBElement) -> BBElement {
        self.bb_inv(a).expect("handle from this group")
    }

    fn identity(&self) -> BBElement {
        self.identity.clone()
    }

    fn is_trivial(&self, a: &BBElement) -> bool {
        self.is_central(a).expect("handle from this group")
    }

    fn exponent(&self) -> u128 {
        self.exponent
    }

    fn random_element(&self, rng: &mut dyn rand::RngCore) -> BBElement {
        self.bb_random(rng)
    }
}

/// Decoder for the plain SL2(p) matrices behind a group's handles.
pub struct WhiteBox<'a> {
    group: &'a BBGroup,
}

impl WhiteBox<'_> {
    pub fn decode(&self, h: &BBElement) -> Result<Mat2<PFElement>> {
        Ok(self.group.reveal(&self.group.decode_internal(h)?))
    }

    pub fn encode(&self, g: &Mat2<PFElement>) -> Result<BBElement> {
        g.require_sl2(&self.group.p)?;
        Ok(self.group.encode_internal(&self.group.hide(g)))
    }

    /// The handle of `-I`.
    pub fn central_involution(&self) -> BBElement {
        let p = &self.group.p;
        self.group.encode_internal(&Mat2::identity(p).neg(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn group13() -> BBGroup {
        BBGroup::new(PrimeModulus::new(13).unwrap(), 1).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn generator_times_inverse_is_identity() {
        let g = group13();
        for x in g.generators() {
            let y = g.bb_mul(x, &g.bb_inv(x).unwrap()).unwrap();
            assert!(g.is_identity(&y).unwrap());
            assert_eq!(&y, g.identity_handle());
        }
    }

    #[test]
    fn generators_satisfy_exponent() {
        let g = group13();
        for x in g.generators() {
            assert_eq!(&g.pow(x, 1092), g.identity_handle());
            assert_eq!(g.exact_order(x).unwrap(), 13);
        }
    }

    #[test]
    fn handles_do_not_cross_instances() {
        let p = PrimeModulus::new(997).unwrap();
        let a = BBGroup::new(p, 7).unwrap();
        let b = BBGroup::new(p, 8).unwrap();
        assert!(a.generators().len() >= 2);
        let x = &a.generators()[0];
        assert_eq!(b.bb_mul(x, x), Err(Error::ForeignHandle));
        assert!(a.white_box(8).is_none());
        assert!(a.white_box(7).is_some());
        // Handles of the plain generators do not show the matrix entries.
        let wb = a.white_box(7).unwrap();
        let u = wb.decode(x).unwrap();
        assert_eq!(u, Mat2::upper(&p, p.one()));
        assert_ne!(&x.as_bytes()[4..12], &1u64.to_le_bytes());
    }

    #[test]
    fn hex_round_trip_and_malformed_input() {
        let g = group13();
        let x = g.bb_random(&mut rng(3));
        assert_eq!(BBElement::from_hex(&x.to_hex()).unwrap(), x);
        assert!(BBElement::from_hex("abcd").is_err());
        assert!(BBElement::from_hex("zz").is_err());
        let mut bad = x.clone();
        bad.bytes[HANDLE_LEN - 1] ^= 0xff;
        assert!(g.bb_mul(&bad, &x).is_err());
    }

    #[test]
    fn equiv_controls() {
        let g = group13();
        let wb = g.white_box(1).unwrap();
        let z = wb.central_involution();
        let mut r = rng(9);
        let x = g.bb_random(&mut r);
        assert!(g.bb_equiv(&x, &x).unwrap());
        assert!(g.bb_equiv(&x, &g.bb_mul(&x, &z).unwrap()).unwrap());
        let u = wb.encode(&Mat2::upper(&g.modulus(), g.modulus().one())).unwrap();
        assert!(!g.bb_equiv(&u, g.identity_handle()).unwrap());
        assert!(g.is_central(&z).unwrap());
    }

    #[test]
    fn equiv_is_an_equivalence_relation() {
        let g = group13();
        let z = g.white_box(1).unwrap().central_involution();
        let mut r = rng(10);
        for _ in 0..100 {
            let x = g.bb_random(&mut r);
            let y = if r.gen() { g.bb_mul(&x, &z).unwrap() } else { g.bb_random(&mut r) };
            let w = if r.gen() { g.bb_mul(&y, &z).unwrap() } else { g.bb_random(&mut r) };
            assert!(g.bb_equiv(&x, &x).unwrap());
            assert_eq!(g.bb_equiv(&x, &y).unwrap(), g.bb_equiv(&y, &x).unwrap());
            if g.bb_equiv(&x, &y).unwrap() && g.bb_equiv(&y, &w).unwrap() {
                assert!(g.bb_equiv(&x, &w).unwrap());
            }
        }
    }

    #[test]
    fn random_is_deterministic_and_varied() {
        let g = group13();
        assert_eq!(g.bb_random(&mut rng(5)), g.bb_random(&mut rng(5)));
        let mut r = rng(6);
        let orders: HashSet<u128> =
            (0..1000).map(|_| g.exact_order(&g.bb_random(&mut r)).unwrap()).collect();
        assert!(orders.len() >= 3, "{orders:?}");
        let x = g.bb_random(&mut r);
        assert!(g.bb_equiv(&g.bb_mul(&x, &g.bb_inv(&x).unwrap()).unwrap(), g.identity_handle()).unwrap());
    }

    #[test]
    fn random_involutions() {
        let g = group13();
        let eo = prime_field::odd_part(g.exponent_hint()).unwrap();
        let wb = g.white_box(1).unwrap();
        let p = g.modulus();
        let mut r = rng(11);
        let mut classes = HashSet::new();
        for _ in 0..100 {
            let j = random_involution(&g, &eo, &mut r).unwrap();
            assert!(g.bb_equiv(&g.bb_mul(&j, &j).unwrap(), g.identity_handle()).unwrap());
            assert!(!g.bb_equiv(&j, g.identity_handle()).unwrap());
            // Canonical representative of {m, -m}.
            let m = wb.decode(&j).unwrap();
            let key = m.map(|e| e.value()).entries().map(|v| *v);
            let neg = m.neg(&p).map(|e| e.value()).entries().map(|v| *v);
            classes.insert(key.min(neg));
        }
        assert!(classes.len() > 1);
    }

    #[test]
    fn bray_outputs_centralize() {
        let g = group13();
        let eo = prime_field::odd_part(g.exponent_hint()).unwrap();
        let mut r = rng(12);
        let i = random_involution(&g, &eo, &mut r).unwrap();
        for _ in 0..50 {
            let y = bray_centralizer_element(&g, &i, &mut r).unwrap();
            assert!(g.bb_equiv(&g.conjugate(&i, &y), &i).unwrap());
            let iy = g.mul(&g.mul(&i, &y), &g.mul(&i, &g.inv(&y)));
            assert!(g.bb_equiv(&iy, g.identity_handle()).unwrap());
        }
    }

    #[test]
    fn alpha_matrix_properties() {
        let g = group13();
        let p = g.modulus();
        let eo = prime_field::odd_part(g.exponent_hint()).unwrap();
        let i = random_involution(&g, &eo, &mut rng(13)).unwrap();
        let d = g.alpha_matrix_for(&i).unwrap();
        assert_eq!(d, g.alpha_matrix_for(&i).unwrap());
        let im = g.decode_internal(&i).unwrap();
        assert!(d.trace(&p).value() == 0);
        assert!(!field::is_square(&p, &d.det(&p), 13));
        // d i = -i d
        assert_eq!(d.mul(&im, &p), im.mul(&d, &p).neg(&p));
    }
}
