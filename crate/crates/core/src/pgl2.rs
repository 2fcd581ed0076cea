//! The semidirect product `Y = X~ x| <alpha>` encrypting PGL2(p).
//!
//! Elements are triples `(x, x^alpha, bit)`. The diagonal automorphism
//! `alpha` is only ever evaluated on words over two torus alphabets: it
//! fixes every letter of `S` and inverts every letter of `R`. After a triple
//! is built, products and inverses only shuffle the two components, so no
//! further evaluation of `alpha` is needed.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::Rng;

use crate::blackbox::{self, BBElement, BBGroup, GroupOracle};
use crate::error::{Error, Result};
use crate::field::{Field, SquareRoot};
use crate::matrix::Mat2;
use crate::prime_field::{self, ExponentData, PFElement};

/// Default number of `s_i r_i` pairs in a random torus word.
pub const DEFAULT_TORUS_WORD_PAIRS: usize = 10;
/// Number of letters collected for each torus alphabet.
pub const ALPHABET_SIZE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alphabet {
    /// Torus centralized by `alpha`.
    S,
    /// Torus inverted by `alpha`.
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub alphabet: Alphabet,
    pub index: usize,
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TorusWord {
    pub letters: Vec<Letter>,
}

impl TorusWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        TorusWord { letters }
    }

    pub fn letter(alphabet: Alphabet, index: usize) -> Self {
        TorusWord { letters: vec![Letter { alphabet, index, inverse: false }] }
    }
}

/// `alpha` on words: negate the exponent of every `R` letter.
pub fn alpha_apply(w: &TorusWord) -> TorusWord {
    TorusWord {
        letters: w
            .letters
            .iter()
            .map(|l| match l.alphabet {
                Alphabet::S => *l,
                Alphabet::R => Letter { inverse: !l.inverse, ..*l },
            })
            .collect(),
    }
}

/// The four outputs of the PGL2 set-up, in order: the generating list, the
/// centralizer list (torus `R`, inverted by `alpha`), the torus `S`
/// (centralized by `alpha`), and the involution `i`.
#[derive(Clone)]
pub struct SetupPGL2Output {
    pub gens: Vec<BBElement>,
    pub centralizer_list: Vec<BBElement>,
    pub torus_s: Vec<BBElement>,
    pub involution_i: BBElement,
    alpha: Mat2<PFElement>,
    tag: u64,
}

impl fmt::Debug for SetupPGL2Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetupPGL2Output")
            .field("gens", &self.gens.len())
            .field("centralizer_list", &self.centralizer_list.len())
            .field("torus_s", &self.torus_s.len())
            .field("involution_i", &self.involution_i)
            .finish()
    }
}

impl SetupPGL2Output {
    /// Reassemble a set-up from its four public outputs (e.g. from a cache).
    /// The automorphism is recovered from `i` by the oracle.
    pub fn from_parts(
        group: &BBGroup,
        gens: Vec<BBElement>,
        centralizer_list: Vec<BBElement>,
        torus_s: Vec<BBElement>,
        involution_i: BBElement,
    ) -> Result<Self> {
        for x in gens.iter().chain(&centralizer_list).chain(&torus_s) {
            group.decode_internal(x)?;
        }
        let alpha = group.alpha_matrix_for(&involution_i)?;
        let tag = handle_tag(&involution_i);
        Ok(SetupPGL2Output { gens, centralizer_list, torus_s, involution_i, alpha, tag })
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    fn alphabet(&self, a: Alphabet) -> &[BBElement] {
        match a {
            Alphabet::S => &self.torus_s,
            Alphabet::R => &self.centralizer_list,
        }
    }
}

fn handle_tag(h: &BBElement) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    h.hash(&mut hasher);
    hasher.finish()
}

/// SetUpForPGL2: find an involution `i`, its centralizer torus `R` and a
/// torus `S` centralized by the diagonal automorphism matched to `i`.
pub fn setup_for_pgl2(
    gens: &[BBElement],
    eo: &ExponentData,
    group: &BBGroup,
    rng: &mut dyn rand::RngCore,
) -> Result<SetupPGL2Output> {
    let i = blackbox::random_involution(group, eo, rng)?;
    let alpha = group.alpha_matrix_for(&i)?;
    let apply_alpha = |x: &BBElement| -> BBElement {
        group.conjugate_by_internal(x, &alpha).expect("own handle")
    };

    let mut r_list = Vec::new();
    let mut s_list = Vec::new();
    let mut budget = 16 * ALPHABET_SIZE;
    while r_list.len() < ALPHABET_SIZE {
        budget = budget.checked_sub(1).ok_or(Error::BudgetExhausted("torus R"))?;
        let y = blackbox::bray_centralizer_element(group, &i, rng)?;
        // The centralizer is dihedral; elements of order > 2 lie in its
        // cyclic part, which alpha inverts.
        if group.order(&y)? > 2 {
            if !group.equiv(&apply_alpha(&y), &group.inv(&y)) {
                return Err(Error::BudgetExhausted("torus R classification"));
            }
            r_list.push(y);
        }
    }
    let mut budget = 16 * ALPHABET_SIZE;
    while s_list.len() < ALPHABET_SIZE {
        budget = budget.checked_sub(1).ok_or(Error::BudgetExhausted("torus S"))?;
        // Bray's trick for the outer involution: i * i^x becomes
        // alpha(x^-1) * x.
        let y = blackbox::bray_with(
            group,
            |x| group.mul(&apply_alpha(&group.inv(x)), x),
            rng,
        )?;
        if group.order(&y)? > 2 {
            if !group.equiv(&apply_alpha(&y), &y) {
                return Err(Error::BudgetExhausted("torus S classification"));
            }
            s_list.push(y);
        }
    }
    let tag = handle_tag(&i);
    Ok(SetupPGL2Output {
        gens: gens.to_vec(),
        centralizer_list: r_list,
        torus_s: s_list,
        involution_i: i,
        alpha,
        tag,
    })
}

/// An element `(x, x^alpha, bit)` of `Y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct YElement {
    pub first: BBElement,
    pub second: BBElement,
    pub bit: u8,
    setup_tag: u64,
}

impl fmt::Debug for YElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Y({:?}, {:?}, {})", self.first, self.second, self.bit)
    }
}

impl YElement {
    /// `"hex1|hex2|bit"`
    pub fn to_text(&self) -> String {
        format!("{}|{}|{}", self.first.to_hex(), self.second.to_hex(), self.bit)
    }
}

/// The group `Y` built from a set-up.
#[derive(Clone)]
pub struct Pgl2Group {
    group: Arc<BBGroup>,
    setup: Arc<SetupPGL2Output>,
    eo: ExponentData,
    word_pairs: usize,
}

impl fmt::Debug for Pgl2Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pgl2Group").field("setup", &self.setup).finish_non_exhaustive()
    }
}

impl Pgl2Group {
    pub fn new(group: Arc<BBGroup>, setup: SetupPGL2Output) -> Result<Self> {
        let eo = prime_field::odd_part(group.exponent_hint())?;
        Ok(Pgl2Group { group, setup: Arc::new(setup), eo, word_pairs: DEFAULT_TORUS_WORD_PAIRS })
    }

    pub fn with_word_pairs(mut self, k: usize) -> Self {
        self.word_pairs = k.max(1);
        self
    }

    pub fn group(&self) -> &Arc<BBGroup> {
        &self.group
    }

    pub fn setup(&self) -> &SetupPGL2Output {
        &self.setup
    }

    pub fn exponent_data(&self) -> &ExponentData {
        &self.eo
    }

    pub fn word_pairs(&self) -> usize {
        self.word_pairs
    }

    fn make(&self, first: BBElement, second: BBElement, bit: u8) -> YElement {
        YElement { first, second, bit, setup_tag: self.setup.tag }
    }

    fn check(&self, a: &YElement) -> Result<()> {
        if a.setup_tag == self.setup.tag {
            Ok(())
        } else {
            Err(Error::MixedSetups)
        }
    }

    pub fn y_identity(&self) -> YElement {
        let e = self.group.identity_handle().clone();
        self.make(e.clone(), e, 0)
    }

    /// `(1, 1, 1)`: the automorphism itself.
    pub fn alpha_element(&self) -> YElement {
        let e = self.group.identity_handle().clone();
        self.make(e.clone(), e, 1)
    }

    /// Evaluate a torus word in `X`.
    pub fn eval_word(&self, w: &TorusWord) -> Result<BBElement> {
        let mut acc = self.group.identity_handle().clone();
        for l in &w.letters {
            let x = self
                .setup
                .alphabet(l.alphabet)
                .get(l.index)
                .ok_or(Error::ForeignLetter)?;
            let x = if l.inverse { self.group.bb_inv(x)? } else { x.clone() };
            acc = self.group.bb_mul(&acc, &x)?;
        }
        Ok(acc)
    }

    /// `(eval(w), eval(alpha(w)), 0)`.
    pub fn from_word(&self, w: &TorusWord) -> Result<YElement> {
        Ok(self.make(self.eval_word(w)?, self.eval_word(&alpha_apply(w))?, 0))
    }

    /// A random word `s_1 r_1 ... s_k r_k` and its triple.
    pub fn random_torus_word(&self, k: usize, rng: &mut dyn rand::RngCore) -> Result<TorusWord> {
        let (ns, nr) = (self.setup.torus_s.len(), self.setup.centralizer_list.len());
        if ns == 0 || nr == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut letters = Vec::with_capacity(2 * k);
        for _ in 0..k {
            letters.push(Letter {
                alphabet: Alphabet::S,
                index: rng.gen_range(0..ns),
                inverse: rng.gen(),
            });
            letters.push(Letter {
                alphabet: Alphabet::R,
                index: rng.gen_range(0..nr),
                inverse: rng.gen(),
            });
        }
        Ok(TorusWord { letters })
    }

    pub fn random_tilde_element(&self, k: usize, rng: &mut dyn rand::RngCore) -> Result<YElement> {
        if k == 0 {
            return Err(Error::Parse("k must be at least 1".into()));
        }
        let w = self.random_torus_word(k, rng)?;
        self.from_word(&w)
    }

    pub fn y_mul(&self, a: &YElement, b: &YElement) -> Result<YElement> {
        self.check(a)?;
        self.check(b)?;
        let g = &self.group;
        Ok(if a.bit == 0 {
            self.make(g.bb_mul(&a.first, &b.first)?, g.bb_mul(&a.second, &b.second)?, b.bit)
        } else {
            self.make(g.bb_mul(&a.first, &b.second)?, g.bb_mul(&a.second, &b.first)?, 1 - b.bit)
        })
    }

    pub fn y_inv(&self, a: &YElement) -> Result<YElement> {
        self.check(a)?;
        let g = &self.group;
        let (x, xa) = (g.bb_inv(&a.first)?, g.bb_inv(&a.second)?);
        Ok(if a.bit == 0 { self.make(x, xa, 0) } else { self.make(xa, x, 1) })
    }

    /// Same coset and both components equal modulo the center.
    pub fn y_equiv(&self, a: &YElement, b: &YElement) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.bit == b.bit
            && self.group.bb_equiv(&a.first, &b.first)?
            && self.group.bb_equiv(&a.second, &b.second)?)
    }

    pub fn parse_element(&self, s: &str) -> Result<YElement> {
        let parts: Vec<&str> = s.trim().split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected hex|hex|bit, got {s:?}")));
        }
        let first = BBElement::from_hex(parts[0])?;
        let second = BBElement::from_hex(parts[1])?;
        self.group.decode_internal(&first)?;
        self.group.decode_internal(&second)?;
        let bit = match parts[2] {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::Parse(format!("bad coset bit {other:?}"))),
        };
        Ok(self.make(first, second, bit))
    }

    /// The PGL2 matrix (hidden coordinates, up to scalars) behind a triple.
    pub(crate) fn to_matrix_internal(&self, y: &YElement) -> Result<Mat2<PFElement>> {
        let p = self.group.modulus();
        let x = self.group.decode_internal(&y.first)?;
        Ok(if y.bit == 0 { x } else { x.mul(&self.setup.alpha, &p) })
    }

    /// The triple behind an invertible matrix (hidden coordinates).
    pub(crate) fn from_matrix_internal(&self, m: &Mat2<PFElement>) -> Result<YElement> {
        let p = self.group.modulus();
        let det = m.det(&p);
        if p.is_zero(&det) {
            return Err(Error::Singular);
        }
        let (x, bit) = match prime_field::pf_sqrt(det) {
            SquareRoot::Root(r) => (m.scale(&p.inv(&r)?, &p), 0),
            SquareRoot::NonResidue => {
                let y = m.mul(&self.setup.alpha.inv(&p)?, &p);
                let r = prime_field::pf_sqrt(y.det(&p)).root().ok_or(Error::Singular)?;
                (y.scale(&p.inv(&r)?, &p), 1)
            }
        };
        let first = self.group.encode_internal(&x);
        let second = self.group.conjugate_by_internal(&first, &self.setup.alpha)?;
        Ok(self.make(first, second, bit))
    }
}

#[cfg(test)]
impl Pgl2Group {
    pub(crate) fn alpha_internal(&self, x: &BBElement) -> Result<BBElement> {
        self.group.conjugate_by_internal(x, &self.setup.alpha)
    }
}

impl GroupOracle for Pgl2Group {
    type Elem = YElement;

    fn mul(&self, a: &YElement, b: &YElement) -> YElement {
        self.y_mul(a, b).expect("elements of this group")
    }

    fn inv(&self, a: &YElement) -> YElement {
        self.y_inv(a).expect("element of this group")
    }

    fn identity(&self) -> YElement {
        self.y_identity()
    }

    fn is_trivial(&self, a: &YElement) -> bool {
        a.bit == 0
            && self.group.is_central(&a.first).expect("own handle")
            && self.group.is_central(&a.second).expect("own handle")
    }

    fn exponent(&self) -> u128 {
        self.group.exponent_hint()
    }

    /// A random torus-word element, multiplied by `alpha` half of the time.
    fn random_element(&self, rng: &mut dyn rand::RngCore) -> YElement {
        let x = self
            .random_tilde_element(self.word_pairs, rng)
            .expect("set-up alphabets are nonempty");
        if rng.gen() {
            self.y_mul(&x, &self.alpha_element()).expect("same set-up")
        } else {
            x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime_field::PrimeModulus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn build(p: u64, seed: u64) -> Pgl2Group {
        let g = Arc::new(BBGroup::new(PrimeModulus::new(p).unwrap(), seed).unwrap());
        let eo = prime_field::odd_part(g.exponent_hint()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let setup = setup_for_pgl2(&g.generators().to_vec(), &eo, &g, &mut rng).unwrap();
        Pgl2Group::new(g, setup).unwrap()
    }

    #[test]
    fn alpha_apply_examples() {
        let s1 = Letter { alphabet: Alphabet::S, index: 0, inverse: false };
        let r1 = Letter { alphabet: Alphabet::R, index: 0, inverse: false };
        let w = TorusWord::new(vec![s1, r1]);
        assert_eq!(alpha_apply(&w), TorusWord::new(vec![s1, Letter { inverse: true, ..r1 }]));
        let s = TorusWord::new(vec![s1]);
        assert_eq!(alpha_apply(&s), s);
        assert_eq!(alpha_apply(&alpha_apply(&w)), w);
    }

    #[test]
    fn setup_contracts() {
        let y = build(13, 1);
        let g = y.group();
        let s = y.setup();
        let i = &s.involution_i;
        assert!(g.bb_equiv(&g.bb_mul(i, i).unwrap(), g.identity_handle()).unwrap());
        assert!(!g.is_central(i).unwrap());
        for a in &s.torus_s {
            for b in &s.torus_s {
                assert!(g.commute(a, b));
            }
        }
        for r in &s.centralizer_list {
            assert!(g.commute(r, i));
        }
        for (idx, _) in s.torus_s.iter().enumerate() {
            let t = y.from_word(&TorusWord::letter(Alphabet::S, idx)).unwrap();
            assert!(g.bb_equiv(&y.alpha_internal(&t.first).unwrap(), &t.second).unwrap());
            assert!(g.bb_equiv(&t.first, &t.second).unwrap());
        }
        for (idx, _) in s.centralizer_list.iter().enumerate() {
            let t = y.from_word(&TorusWord::letter(Alphabet::R, idx)).unwrap();
            assert!(g.bb_equiv(&y.alpha_internal(&t.first).unwrap(), &t.second).unwrap());
            assert!(g.bb_equiv(&t.second, &g.bb_inv(&t.first).unwrap()).unwrap());
        }
    }

    #[test]
    fn foreign_letters_and_setups() {
        let y = build(13, 1);
        let w = TorusWord::letter(Alphabet::S, 99);
        assert_eq!(y.from_word(&w), Err(Error::ForeignLetter));
        let other = build(13, 2);
        let a = y.y_identity();
        let b = other.random_element(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(y.y_mul(&a, &b), Err(Error::MixedSetups));
    }

    #[test]
    fn multiplication_rules() {
        let y = build(13, 3);
        let g = y.group();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = y.random_tilde_element(1, &mut rng).unwrap();
        let b = y.random_tilde_element(1, &mut rng).unwrap();
        let alpha = y.alpha_element();
        let a1 = y.y_mul(&a, &alpha).unwrap();
        let b1 = y.y_mul(&b, &alpha).unwrap();
        assert_eq!((a1.bit, b1.bit), (1, 1));
        // (x, x', 1)(y, y', 1) = (x y', x' y, 0)
        let c = y.y_mul(&a1, &b1).unwrap();
        assert_eq!(c.bit, 0);
        assert_eq!(c.first, g.bb_mul(&a1.first, &b1.second).unwrap());
        assert_eq!(c.second, g.bb_mul(&a1.second, &b1.first).unwrap());
        // (x, x', 1) o ((x^-1)', x^-1, 1) = (1, 1, 0)
        let inv_pair = YElement {
            first: g.bb_inv(&a1.second).unwrap(),
            second: g.bb_inv(&a1.first).unwrap(),
            bit: 1,
            setup_tag: y.setup().tag(),
        };
        assert_eq!(y.y_mul(&a1, &inv_pair).unwrap(), y.y_identity());
        assert_eq!(y.y_mul(&a, &y.y_identity()).unwrap(), a);
        assert!(y.y_equiv(&y.y_mul(&a1, &y.y_inv(&a1).unwrap()).unwrap(), &y.y_identity()).unwrap());
        assert!(y.y_equiv(&y.y_inv(&y.y_inv(&a1).unwrap()).unwrap(), &a1).unwrap());
        assert_eq!(y.y_inv(&y.y_identity()).unwrap(), y.y_identity());
        assert!(!y.y_equiv(&a, &a1).unwrap());
    }

    #[test]
    fn random_tilde_element_shape() {
        let y = build(13, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut rng2 = ChaCha8Rng::seed_from_u64(8);
        let a = y.random_tilde_element(1, &mut rng).unwrap();
        let w = y.random_torus_word(1, &mut rng2).unwrap();
        assert_eq!(w.letters.len(), 2);
        assert_eq!(a.bit, 0);
        assert_eq!(a.first, y.eval_word(&w).unwrap());
        assert_eq!(a.second, y.eval_word(&alpha_apply(&w)).unwrap());
        assert!(y.random_tilde_element(0, &mut rng).is_err());
        let x = y.random_tilde_element(5, &mut rng).unwrap();
        assert!(y.y_equiv(&y.y_mul(&x, &y.y_inv(&x).unwrap()).unwrap(), &y.y_identity()).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let y = build(13, 5);
        let a = y.random_element(&mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(y.parse_element(&a.to_text()).unwrap(), a);
        assert!(y.parse_element("00|00|0").is_err());
        assert!(y.parse_element(&a.to_text().replace("|0", "|2").replace("|1", "|2")).is_err());
    }

    #[test]
    fn matrix_bridge_round_trip() {
        let y = build(13, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = y.random_element(&mut rng);
            let m = y.to_matrix_internal(&a).unwrap();
            let b = y.from_matrix_internal(&m).unwrap();
            assert!(y.y_equiv(&a, &b).unwrap());
        }
    }
}
