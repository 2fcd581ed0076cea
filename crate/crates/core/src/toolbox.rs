//! ToolBoxSL2: everything downstream needs to work inside `X`.
//!
//! The twelve items, in order: the PGL2 set-up, generators of `Y`, three
//! commuting involutions (the vertices of the coordinate triangle), an
//! order-3 element permuting them, the unit points on the three sides,
//! centralizer generators for the first vertex, the zero point, the point
//! `(1:1:1)`, the odd part `Eo` of the exponent and its binary expansion,
//! an order-4 element squaring to the first vertex, and the identity of `X`.

use std::sync::Arc;

use crate::blackbox::{self, BBElement, BBGroup, GroupOracle};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::pgl2::{self, Alphabet, Pgl2Group, SetupPGL2Output, TorusWord, YElement};
use crate::plane::PlaneFrame;
use crate::prime_field::{self, ExponentData};
use crate::text::NamedDoc;

/// Attempts for each search in this module.
pub const SEARCH_BUDGET: usize = 4096;
/// Number of centralizer generators stored for the first vertex.
pub const CENTRALIZER_GENS: usize = 8;

#[derive(Clone, Debug)]
pub struct ToolBox {
    pgl2: Pgl2Group,
    pub pgl2_gens: Vec<YElement>,
    pub plane_involutions: [YElement; 3],
    pub order3: YElement,
    pub unity_points: [YElement; 3],
    pub centralizer_gens: Vec<YElement>,
    pub zero_point: YElement,
    pub point_111: YElement,
    pub eo: u128,
    pub eo_bits: Vec<bool>,
    pub order4: YElement,
    pub identity: BBElement,
}

impl ToolBox {
    /// Item 1.
    pub fn setup(&self) -> &SetupPGL2Output {
        self.pgl2.setup()
    }

    pub fn pgl2(&self) -> &Pgl2Group {
        &self.pgl2
    }

    pub fn group(&self) -> &Arc<BBGroup> {
        self.pgl2.group()
    }

    pub fn exponent_data(&self) -> ExponentData {
        ExponentData {
            e: self.pgl2.exponent_data().e,
            eo: self.eo,
            v: self.pgl2.exponent_data().v,
            bits: self.eo_bits.clone(),
        }
    }

    pub(crate) fn frame(&self) -> Result<PlaneFrame> {
        let [e1, e2, e3] = &self.plane_involutions;
        PlaneFrame::new(&self.pgl2, [e1, e2, e3], &self.point_111)
    }

    /// Check every structural invariant of the toolbox.
    pub fn check_invariants(&self) -> Result<Vec<String>> {
        let y = &self.pgl2;
        let mut failures = Vec::new();
        let mut expect = |ok: bool, what: &str| {
            if !ok {
                failures.push(what.to_string());
            }
        };
        let id = y.y_identity();
        let [e1, e2, e3] = &self.plane_involutions;
        for (n, e) in self.plane_involutions.iter().enumerate() {
            expect(y.y_equiv(&y.y_mul(e, e)?, &id)?, &format!("e{} squares to 1", n + 1));
            expect(!y.y_equiv(e, &id)?, &format!("e{} nontrivial", n + 1));
        }
        expect(y.commute(e1, e2) && y.commute(e1, e3) && y.commute(e2, e3), "vertices commute");
        expect(y.y_equiv(&y.y_mul(e1, e2)?, e3)?, "e1 e2 = e3");
        let r = &self.order3;
        expect(y.order(r)? == 3, "r3 has order 3");
        for k in 0..3 {
            let img = y.conjugate(&self.plane_involutions[k], r);
            expect(
                y.y_equiv(&img, &self.plane_involutions[(k + 1) % 3])?,
                &format!("r3 sends e{} to e{}", k + 1, (k + 1) % 3 + 1),
            );
        }
        let k4 = &self.order4;
        expect(y.y_equiv(&y.y_mul(k4, k4)?, e1)?, "kappa^2 = e1");
        expect(y.order(k4)? == 4, "kappa has order 4");
        for (name, pt) in [("zero point", &self.zero_point), ("point 111", &self.point_111)] {
            expect(y.y_equiv(&y.y_mul(pt, pt)?, &id)? && !y.y_equiv(pt, &id)?, &format!("{name} is an involution"));
            for e in &self.plane_involutions {
                expect(!y.y_equiv(pt, e)?, &format!("{name} differs from the vertices"));
            }
        }
        expect(y.commute(&self.zero_point, e1), "zero point lies on the side opposite e1");
        for c in &self.centralizer_gens {
            expect(y.commute(c, e1), "centralizer generator commutes with e1");
        }
        expect(prime_field::bits_value(&self.eo_bits) == self.eo, "Eo bits");
        expect(self.identity == *self.group().identity_handle(), "identity");
        Ok(failures)
    }

    pub fn to_text(&self) -> String {
        let mut d = NamedDoc::new();
        let s = self.setup();
        d.push("p", self.group().modulus());
        for g in &s.gens {
            d.push("setup_gens", g);
        }
        for g in &s.centralizer_list {
            d.push("setup_centralizer", g);
        }
        for g in &s.torus_s {
            d.push("setup_torus_s", g);
        }
        d.push("setup_involution", &s.involution_i);
        d.push("word_pairs", self.pgl2.word_pairs());
        for g in &self.pgl2_gens {
            d.push("pgl2_gens", g.to_text());
        }
        for g in &self.plane_involutions {
            d.push("plane_involutions", g.to_text());
        }
        d.push("order3", self.order3.to_text());
        for g in &self.unity_points {
            d.push("unity_points", g.to_text());
        }
        for g in &self.centralizer_gens {
            d.push("centralizer_gens", g.to_text());
        }
        d.push("zero_point", self.zero_point.to_text());
        d.push("point_111", self.point_111.to_text());
        d.push("eo", self.eo);
        d.push("eo_bits", prime_field::bits_to_string(&self.eo_bits));
        d.push("order4", self.order4.to_text());
        d.push("identity", &self.identity);
        d.render()
    }

    pub fn from_text(text: &str, group: Arc<BBGroup>) -> Result<Self> {
        let d = NamedDoc::parse(text)?;
        let p: u64 = d.one("p")?.parse().map_err(|_| Error::Parse("bad p".into()))?;
        if p != group.modulus().get() {
            return Err(Error::ModulusMismatch);
        }
        let setup = read_setup(&d, &group)?;
        let pairs: usize =
            d.one("word_pairs")?.parse().map_err(|_| Error::Parse("bad word_pairs".into()))?;
        let y = Pgl2Group::new(group.clone(), setup)?.with_word_pairs(pairs);
        let ys = |name: &str| -> Result<Vec<YElement>> {
            d.all(name).into_iter().map(|s| y.parse_element(s)).collect()
        };
        let y1 = |name: &str| -> Result<YElement> { y.parse_element(d.one(name)?) };
        let three = |name: &str| -> Result<[YElement; 3]> {
            ys(name)?.try_into().map_err(|_| Error::Parse(format!("{name} needs 3 entries")))
        };
        let eo_bits = prime_field::bits_from_string(d.one("eo_bits")?)?;
        let tb = ToolBox {
            pgl2_gens: ys("pgl2_gens")?,
            plane_involutions: three("plane_involutions")?,
            order3: y1("order3")?,
            unity_points: three("unity_points")?,
            centralizer_gens: ys("centralizer_gens")?,
            zero_point: y1("zero_point")?,
            point_111: y1("point_111")?,
            eo: d.one("eo")?.parse().map_err(|_| Error::Parse("bad eo".into()))?,
            eo_bits,
            order4: y1("order4")?,
            identity: BBElement::from_hex(d.one("identity")?)?,
            pgl2: y.clone(),
        };
        Ok(tb)
    }
}

pub fn setup_to_text(setup: &SetupPGL2Output, group: &BBGroup) -> String {
    let mut d = NamedDoc::new();
    d.push("p", group.modulus());
    for g in &setup.gens {
        d.push("setup_gens", g);
    }
    for g in &setup.centralizer_list {
        d.push("setup_centralizer", g);
    }
    for g in &setup.torus_s {
        d.push("setup_torus_s", g);
    }
    d.push("setup_involution", &setup.involution_i);
    d.render()
}

pub fn setup_from_text(text: &str, group: &BBGroup) -> Result<SetupPGL2Output> {
    let d = NamedDoc::parse(text)?;
    read_setup(&d, group)
}

fn read_setup(d: &NamedDoc, group: &BBGroup) -> Result<SetupPGL2Output> {
    let hs = |name: &str| -> Result<Vec<BBElement>> {
        d.all(name).into_iter().map(BBElement::from_hex).collect()
    };
    SetupPGL2Output::from_parts(
        group,
        hs("setup_gens")?,
        hs("setup_centralizer")?,
        hs("setup_torus_s")?,
        BBElement::from_hex(d.one("setup_involution")?)?,
    )
}

fn inner_involution(y: &Pgl2Group, eo: &ExponentData, rng: &mut dyn rand::RngCore) -> Result<YElement> {
    for _ in 0..SEARCH_BUDGET {
        let j = blackbox::random_involution(y, eo, rng)?;
        if j.bit == 0 {
            return Ok(j);
        }
    }
    Err(Error::BudgetExhausted("inner involution"))
}

/// Three pairwise commuting involutions with trivial product: a random
/// inner involution, a second one from its centralizer, and their product.
pub fn find_involution_triple(
    y: &Pgl2Group,
    rng: &mut dyn rand::RngCore,
) -> Result<[YElement; 3]> {
    let eo = y.exponent_data().clone();
    let e1 = inner_involution(y, &eo, rng)?;
    for _ in 0..SEARCH_BUDGET {
        let c = blackbox::bray_centralizer_element(y, &e1, rng)?;
        let Some(e2) = blackbox::involution_from(y, &c, &eo) else { continue };
        if e2.bit != 0 || y.equiv(&e2, &e1) || !y.commute(&e1, &e2) {
            continue;
        }
        let e3 = y.y_mul(&e1, &e2)?;
        return Ok([e1, e2, e3]);
    }
    Err(Error::BudgetExhausted("involution triple"))
}

/// An element of order 4 whose square is `e`: the 2-part of a random
/// centralizer element, cut down to order 4.
pub fn find_order4_over(y: &Pgl2Group, e: &YElement, rng: &mut dyn rand::RngCore) -> Result<YElement> {
    let eo = y.exponent_data().eo;
    for _ in 0..SEARCH_BUDGET {
        let c = blackbox::bray_centralizer_element(y, e, rng)?;
        let w = y.pow(&c, eo);
        if y.is_trivial(&w) {
            continue;
        }
        let mut log2 = 0u32;
        let mut probe = w.clone();
        while !y.is_trivial(&probe) {
            probe = y.y_mul(&probe, &probe)?;
            log2 += 1;
        }
        if log2 < 2 {
            continue;
        }
        let kappa = y.pow(&w, 1u128 << (log2 - 2));
        if y.y_equiv(&y.y_mul(&kappa, &kappa)?, e)? {
            return Ok(kappa);
        }
    }
    Err(Error::BudgetExhausted("order-4 element"))
}

/// An element of order 3 with `e_i^r = e_{i+1}` (indices mod 3), where
/// `e^r = r^-1 e r`. Quarter turns about two vertices compose to a third of
/// a turn about a diagonal of the frame; the candidates built from them are
/// tested against the required action.
pub fn find_order3_permuter(
    y: &Pgl2Group,
    triple: &[YElement; 3],
    rng: &mut dyn rand::RngCore,
) -> Result<YElement> {
    for _ in 0..SEARCH_BUDGET / 64 {
        let k1 = find_order4_over(y, &triple[0], rng)?;
        let k3 = find_order4_over(y, &triple[2], rng)?;
        let k1i = y.y_inv(&k1)?;
        let candidates = [
            y.y_mul(&k1, &k3)?,
            y.y_mul(&k3, &k1)?,
            y.y_mul(&k1i, &k3)?,
            y.y_mul(&k3, &k1i)?,
        ];
        for c in candidates.iter().flat_map(|c| [c.clone(), y.y_inv(c).expect("same set-up")]) {
            if y.is_trivial(&c) || !y.is_trivial(&y.pow(&c, 3)) {
                continue;
            }
            let permutes = (0..3).all(|k| {
                y.equiv(&y.conjugate(&triple[k], &c), &triple[(k + 1) % 3])
            });
            if permutes {
                return Ok(c);
            }
        }
    }
    Err(Error::BudgetExhausted("order-3 permuter"))
}

/// ToolBoxSL2 on the black box group `group` with generators `gens` and any
/// exponent `e`.
pub fn toolbox_sl2(
    gens: &[BBElement],
    e: u128,
    group: Arc<BBGroup>,
    word_pairs: usize,
    rng: &mut dyn rand::RngCore,
) -> Result<ToolBox> {
    let eo = prime_field::odd_part(e)?;
    let setup = pgl2::setup_for_pgl2(gens, &eo, &group, rng)?;
    toolbox_from_setup(setup, e, group, word_pairs, rng)
}

/// The toolbox steps after the PGL2 set-up, for callers that cached it.
pub fn toolbox_from_setup(
    setup: SetupPGL2Output,
    e: u128,
    group: Arc<BBGroup>,
    word_pairs: usize,
    rng: &mut dyn rand::RngCore,
) -> Result<ToolBox> {
    let eo = prime_field::odd_part(e)?;
    let y = Pgl2Group::new(group.clone(), setup)?.with_word_pairs(word_pairs);

    let mut pgl2_gens = Vec::new();
    for (idx, _) in y.setup().torus_s.iter().enumerate() {
        pgl2_gens.push(y.from_word(&TorusWord::letter(Alphabet::S, idx))?);
    }
    for (idx, _) in y.setup().centralizer_list.iter().enumerate() {
        pgl2_gens.push(y.from_word(&TorusWord::letter(Alphabet::R, idx))?);
    }
    pgl2_gens.push(y.alpha_element());

    let triple = find_involution_triple(&y, rng)?;
    let order4 = find_order4_over(&y, &triple[0], rng)?;
    let order3 = find_order3_permuter(&y, &triple, rng)?;

    let mut centralizer_gens = Vec::with_capacity(CENTRALIZER_GENS);
    for _ in 0..CENTRALIZER_GENS {
        centralizer_gens.push(blackbox::bray_centralizer_element(&y, &triple[0], rng)?);
    }

    let y_eo = y.exponent_data().clone();
    let (point_111, frame) = 'search: {
        for _ in 0..SEARCH_BUDGET {
            let j = inner_involution(&y, &y_eo, rng)?;
            if triple.iter().any(|e| y.commute(&j, e)) {
                continue;
            }
            if let Ok(frame) = PlaneFrame::new(&y, [&triple[0], &triple[1], &triple[2]], &j) {
                break 'search (j, frame);
            }
        }
        return Err(Error::BudgetExhausted("unit point"));
    };

    let p = group.modulus();
    let (zero, one) = (p.zero(), p.one());
    let unity_points = [
        frame.point(&y, &[zero, one, one])?,
        frame.point(&y, &[one, zero, one])?,
        frame.point(&y, &[one, one, zero])?,
    ];
    let q = frame.gram();
    let zero_point = frame.point(&y, &[zero, q[2], p.neg(&q[1])])?;

    Ok(ToolBox {
        pgl2: y,
        pgl2_gens,
        plane_involutions: triple,
        order3,
        unity_points,
        centralizer_gens,
        zero_point,
        point_111,
        eo: eo.eo,
        eo_bits: eo.bits,
        order4,
        identity: group.identity_handle().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime_field::PrimeModulus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn build(p: u64, seed: u64) -> ToolBox {
        let g = Arc::new(BBGroup::new(PrimeModulus::new(p).unwrap(), seed).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = g.exponent_hint();
        toolbox_sl2(&g.generators().to_vec(), e, g, pgl2::DEFAULT_TORUS_WORD_PAIRS, &mut rng).unwrap()
    }

    #[test]
    fn toolbox_13_invariants() {
        let tb = build(13, 1);
        assert_eq!(tb.check_invariants().unwrap(), Vec::<String>::new());
        assert_eq!(tb.eo, 273);
        assert_eq!(prime_field::bits_to_string(&tb.eo_bits), "100010001");
    }

    #[test]
    fn toolbox_invariants_across_primes() {
        for p in [97u64, 997] {
            for seed in [5u64, 6, 7] {
                let tb = build(p, seed);
                assert!(tb.check_invariants().unwrap().is_empty(), "p={p} seed={seed}");
            }
        }
    }

    #[test]
    fn toolbox_is_deterministic() {
        assert_eq!(build(97, 11).to_text(), build(97, 11).to_text());
    }

    #[test]
    fn toolbox_text_round_trip() {
        let tb = build(13, 2);
        let text = tb.to_text();
        let back = ToolBox::from_text(&text, tb.group().clone()).unwrap();
        assert_eq!(back.to_text(), text);
        assert!(back.check_invariants().unwrap().is_empty());
        let other = Arc::new(BBGroup::new(PrimeModulus::new(17).unwrap(), 2).unwrap());
        assert!(ToolBox::from_text(&text, other).is_err());
    }

    #[test]
    fn unity_and_zero_coordinates() {
        let tb = build(13, 3);
        let frame = tb.frame().unwrap();
        let y = tb.pgl2();
        let p = tb.group().modulus();
        let c = frame.coords(y, &tb.point_111).unwrap();
        assert_eq!(c, [p.one(); 3]);
        let c = frame.coords(y, &tb.unity_points[0]).unwrap();
        assert!(c[0].value() == 0 && c[1] == c[2]);
        let z = frame.coords(y, &tb.zero_point).unwrap();
        // orthogonal to (0:1:1) under the frame form
        let q = frame.gram();
        let dot = p.add(&p.mul(&q[1], &z[1]), &p.mul(&q[2], &z[2]));
        assert_eq!(dot.value(), 0);
        assert_eq!(z[0].value(), 0);
    }
}
