//! Verification suites run through the morphism: order equality, the
//! homomorphism property modulo the center, and the rank-one Steinberg
//! relations.
//!
//! Every case draws its inputs from its own seed, derived from the suite
//! seed and the case index, so any failure can be replayed alone.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blackbox::BBElement;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Mat2;
use crate::par::{self, Execution};
use crate::pipeline::PipelineContext;
use crate::prime_field::{PFElement, PrimeModulus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Orders,
    Homomorphism,
    Steinberg,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Orders, Suite::Homomorphism, Suite::Steinberg];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orders => "orders",
            Suite::Homomorphism => "homomorphism",
            Suite::Steinberg => "steinberg",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// The four relation families of the Steinberg suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    RootAdditivity,
    TorusAction,
    RootCommutation,
    Weyl,
}

impl Relation {
    pub const ALL: [Relation; 4] =
        [Relation::RootAdditivity, Relation::TorusAction, Relation::RootCommutation, Relation::Weyl];

    pub fn name(self) -> &'static str {
        match self {
            Relation::RootAdditivity => "root-additivity",
            Relation::TorusAction => "torus-action",
            Relation::RootCommutation => "root-commutation",
            Relation::Weyl => "weyl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub case: usize,
    pub case_seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub wall_time: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SUITE {} cases={} failures={} seed={}",
            self.suite.name(),
            self.cases,
            self.failures.len(),
            self.seed
        )
    }
}

/// Seed of case `index` of `suite`.
pub fn case_seed(seed: u64, suite: Suite, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5u64 << 32 | suite as u64);
    rng.set_word_pos(2 * index as u128);
    rng.gen()
}

/// A uniformly random element of SL2(p): a random nonzero first row, then a
/// random second row completing it.
pub fn random_sl2(p: PrimeModulus, rng: &mut impl Rng) -> Mat2<PFElement> {
    let (a, b) = loop {
        let a = p.elem(rng.gen_range(0..p.get()));
        let b = p.elem(rng.gen_range(0..p.get()));
        if a.value() != 0 || b.value() != 0 {
            break (a, b);
        }
    };
    // one solution of a d - b c = 1, shifted along (a, b)
    let (c0, d0) = if a.value() != 0 {
        (p.zero(), p.inv(&a).expect("nonzero"))
    } else {
        (p.neg(&p.inv(&b).expect("nonzero")), p.zero())
    };
    let t = p.elem(rng.gen_range(0..p.get()));
    Mat2::new(a, b, p.add(&c0, &p.mul(&t, &a)), p.add(&d0, &p.mul(&t, &b)))
}

fn nonzero(p: PrimeModulus, rng: &mut impl Rng) -> PFElement {
    p.elem(rng.gen_range(1..p.get()))
}

fn any(p: PrimeModulus, rng: &mut impl Rng) -> PFElement {
    p.elem(rng.gen_range(0..p.get()))
}

fn phi(ctx: &PipelineContext, g: &Mat2<PFElement>) -> Result<BBElement> {
    Ok(ctx.map_element(g)?.0)
}

fn product(ctx: &PipelineContext, xs: &[BBElement]) -> Result<BBElement> {
    let g = ctx.group();
    let mut acc = g.identity_handle().clone();
    for x in xs {
        acc = g.bb_mul(&acc, x)?;
    }
    Ok(acc)
}

/// Order equality for the image of `g`. `None` on success.
pub fn order_case(ctx: &PipelineContext, g: &Mat2<PFElement>) -> Result<Option<String>> {
    let want = ctx.source_order(g)?;
    let got = ctx.group().exact_order(&phi(ctx, g)?)?;
    Ok((want != got).then(|| format!("order {got} for source order {want}")))
}

/// `phi(g) phi(h) == phi(gh)` modulo the center.
pub fn homomorphism_case(ctx: &PipelineContext, g: &Mat2<PFElement>, h: &Mat2<PFElement>) -> Result<Option<String>> {
    let p = ctx.modulus();
    let lhs = product(ctx, &[phi(ctx, g)?, phi(ctx, h)?])?;
    let rhs = phi(ctx, &g.mul(h, &p))?;
    Ok((!ctx.group().bb_equiv(&lhs, &rhs)?).then(|| "phi(g) phi(h) differs from phi(gh)".to_string()))
}

/// One Steinberg relation for the parameters `(s, t, a)`; `t` and `a` must
/// be nonzero.
pub fn steinberg_case(
    ctx: &PipelineContext,
    rel: Relation,
    s: PFElement,
    t: PFElement,
    a: PFElement,
) -> Result<Option<String>> {
    let p = ctx.modulus();
    let g = ctx.group();
    let up = |x: PFElement| phi(ctx, &Mat2::upper(&p, x));
    let low = |x: PFElement| phi(ctx, &Mat2::lower(&p, x));
    let ok = match rel {
        Relation::RootAdditivity => {
            let st = p.add(&s, &t);
            g.bb_equiv(&product(ctx, &[up(s)?, up(t)?])?, &up(st)?)?
                && g.bb_equiv(&product(ctx, &[low(s)?, low(t)?])?, &low(st)?)?
        }
        Relation::TorusAction => {
            let h = phi(ctx, &Mat2::torus(&p, &a)?)?;
            let lhs = product(ctx, &[h.clone(), up(t)?, g.bb_inv(&h)?])?;
            g.bb_equiv(&lhs, &up(p.mul(&p.square(&a), &t))?)?
        }
        Relation::RootCommutation => {
            let (x, y) = (up(s)?, up(t)?);
            let comm = product(ctx, &[g.bb_inv(&x)?, g.bb_inv(&y)?, x, y])?;
            g.bb_equiv(&comm, g.identity_handle())?
        }
        Relation::Weyl => {
            let minus_inv = p.neg(&p.inv(&t)?);
            let n = Mat2::upper(&p, t).mul(&Mat2::lower(&p, minus_inv), &p).mul(&Mat2::upper(&p, t), &p);
            let lhs = phi(ctx, &n)?;
            let rhs = product(ctx, &[up(t)?, low(minus_inv)?, up(t)?])?;
            g.bb_equiv(&lhs, &rhs)?
        }
    };
    Ok((!ok).then(|| format!("{} fails for s={} t={} a={}", rel.name(), s, t, a)))
}

/// Run case `index` of `suite` from its seed.
pub fn run_case(ctx: &PipelineContext, suite: Suite, seed: u64, index: usize) -> Result<Option<String>> {
    let p = ctx.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, suite, index));
    match suite {
        Suite::Orders => order_case(ctx, &random_sl2(p, &mut rng)),
        Suite::Homomorphism => {
            let g = random_sl2(p, &mut rng);
            let h = random_sl2(p, &mut rng);
            homomorphism_case(ctx, &g, &h)
        }
        Suite::Steinberg => {
            let rel = Relation::ALL[index % 4];
            let (s, t, a) = (any(p, &mut rng), nonzero(p, &mut rng), nonzero(p, &mut rng));
            steinberg_case(ctx, rel, s, t, a)
        }
    }
}

/// Run `cases` cases of a suite.
pub fn run_suite(ctx: &PipelineContext, suite: Suite, cases: usize, seed: u64, exec: Execution) -> VerifyReport {
    let start = Instant::now();
    let outcomes = par::map_indexed(cases, exec, |i| run_case(ctx, suite, seed, i));
    let failures = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(case, r)| {
            let detail = match r {
                Ok(None) => return None,
                Ok(Some(d)) => d,
                Err(e) => format!("error: {e}"),
            };
            Some(Failure { case, case_seed: case_seed(seed, suite, case), detail })
        })
        .collect();
    VerifyReport { suite, seed, cases, failures, wall_time: start.elapsed() }
}

pub fn check_orders(ctx: &PipelineContext, n: usize, seed: u64, exec: Execution) -> Result<VerifyReport> {
    require_cases(n)?;
    Ok(run_suite(ctx, Suite::Orders, n, seed, exec))
}

pub fn check_homomorphism(ctx: &PipelineContext, n: usize, seed: u64, exec: Execution) -> Result<VerifyReport> {
    require_cases(n)?;
    Ok(run_suite(ctx, Suite::Homomorphism, n, seed, exec))
}

/// `n` parameter triples for each of the four relations, interleaved.
pub fn check_steinberg(ctx: &PipelineContext, n: usize, seed: u64, exec: Execution) -> Result<VerifyReport> {
    require_cases(n)?;
    Ok(run_suite(ctx, Suite::Steinberg, 4 * n, seed, exec))
}

fn require_cases(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::NonPositiveExponent);
    }
    Ok(())
}
