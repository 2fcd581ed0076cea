//! Acceptance criteria. Each test prints one `ACCEPT <name> PASS|FAIL`
//! line (visible with `--nocapture`) and then asserts.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sl2morph::blackbox::GroupOracle;
use sl2morph::field::{Field, SquareRoot};
use sl2morph::matrix::{self, Mat2};
use sl2morph::par::Execution;
use sl2morph::pipeline::PipelineContext;
use sl2morph::prime_field::{self, PrimeModulus};
use sl2morph::session;
use sl2morph::sharp_flat;
use sl2morph::verify::{self, Relation, Suite};

const PRIMES: [u64; 3] = [13, 97, 997];

fn report(name: &str, ok: bool, detail: &str) {
    println!("ACCEPT {name} {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn ctx(p: u64) -> PipelineContext {
    session::build_context(p, 1, 10).unwrap()
}

#[test]
fn end_to_end_at_997() {
    let start = Instant::now();
    let group = session::build_group(997, 1).unwrap();
    let setup = session::build_setup(&group, 1).unwrap();
    let tb = std::sync::Arc::new(session::build_toolbox(&group, setup, 1, 10).unwrap());
    let k = sl2morph::bbfield::KField::new(tb.clone()).unwrap();
    let cob = session::build_basis(&k, 1, &mut |_| {}).unwrap();
    let c = PipelineContext::new(tb, k, cob).unwrap();
    let p = c.modulus();
    let (u, _) = c.map_element(&Mat2::upper(&p, p.one())).unwrap();
    let mut failures = 0;
    failures += verify::check_orders(&c, 100, 1, Execution::default()).unwrap().failures.len();
    failures += verify::check_homomorphism(&c, 100, 1, Execution::default()).unwrap().failures.len();
    failures += verify::check_steinberg(&c, 100, 1, Execution::default()).unwrap().failures.len();
    let elapsed = start.elapsed();
    let ok = failures == 0 && c.group().exact_order(&u).unwrap() == 997 && elapsed < Duration::from_secs(600);
    report("end-to-end-997", ok, &format!("failures={failures} elapsed={:.1}s", elapsed.as_secs_f64()));
}

#[test]
fn order_preservation() {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in PRIMES {
        let r = verify::check_orders(&ctx(p), 100, 2, Execution::default()).unwrap();
        detail.push(format!("p={p}:{}/{}", r.cases - r.failures.len(), r.cases));
        ok &= r.cases == 100 && r.passed();
    }
    report("order-preservation", ok, &detail.join(" "));
}

#[test]
fn homomorphism_mod_center() {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in PRIMES {
        let r = verify::check_homomorphism(&ctx(p), 100, 3, Execution::default()).unwrap();
        detail.push(format!("p={p}:{}/{}", r.cases - r.failures.len(), r.cases));
        ok &= r.cases == 100 && r.passed();
    }
    report("homomorphism", ok, &detail.join(" "));
}

#[test]
fn steinberg_relations() {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in PRIMES {
        let r = verify::check_steinberg(&ctx(p), 50, 4, Execution::default()).unwrap();
        for (n, rel) in Relation::ALL.iter().enumerate() {
            let bad = r.failures.iter().filter(|f| f.case % 4 == n).count();
            let cases = (0..r.cases).filter(|i| i % 4 == n).count();
            ok &= cases == 50 && bad == 0;
            detail.push(format!("p={p}:{}={}/{}", rel.name(), cases - bad, cases));
        }
    }
    report("steinberg", ok, &detail.join(" "));
}

#[test]
fn semidirect_product_axioms() {
    let c = ctx(13);
    let y = c.toolbox().pgl2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..200 {
        let (a, b, d) = (y.random_element(&mut rng), y.random_element(&mut rng), y.random_element(&mut rng));
        let lhs = y.y_mul(&y.y_mul(&a, &b).unwrap(), &d).unwrap();
        let rhs = y.y_mul(&a, &y.y_mul(&b, &d).unwrap()).unwrap();
        bad += usize::from(lhs != rhs);
    }
    let id = y.y_identity();
    for _ in 0..100 {
        let a = y.random_element(&mut rng);
        let inv = y.y_inv(&a).unwrap();
        bad += usize::from(y.y_mul(&id, &a).unwrap() != a || y.y_mul(&a, &id).unwrap() != a);
        bad += usize::from(y.y_mul(&a, &inv).unwrap() != id || y.y_mul(&inv, &a).unwrap() != id);
    }
    let alpha = y.alpha_element();
    for _ in 0..100 {
        let a = y.y_mul(&y.random_tilde_element(10, &mut rng).unwrap(), &alpha).unwrap();
        let b = y.y_mul(&alpha, &y.random_tilde_element(10, &mut rng).unwrap()).unwrap();
        bad += usize::from(a.bit != 1 || b.bit != 1 || y.y_mul(&a, &b).unwrap().bit != 0);
    }
    report("semidirect-product", bad == 0, &format!("failures={bad}"));
}

#[test]
fn sharp_vs_flat_contract() {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in PRIMES {
        let c = ctx(p);
        let k = c.field();
        let mut rng = ChaCha8Rng::seed_from_u64(p + 6);
        let mut good = 0;
        for _ in 0..50 {
            let g = verify::random_sl2(c.modulus(), &mut rng);
            let (_, trace) = c.map_element(&g).unwrap();
            let sharp = sharp_flat::sharp_action(&trace.assembled, k).unwrap();
            let flat = matrix::adjoint(&trace.k_matrix, k).unwrap();
            good += usize::from(c.change_of_basis().to_flat(&sharp, k).equals(&flat, k));
        }
        ok &= good == 50 && c.change_of_basis().check_witnesses(k).unwrap();
        detail.push(format!("p={p}:{good}/50"));
    }
    report("sharp-vs-flat", ok, &detail.join(" "));
}

#[test]
fn black_box_field() {
    let mut bad = Vec::new();
    let c13 = ctx(13);
    let k = c13.field();
    let f = c13.modulus();
    let enc: Vec<_> = (0..13).map(|v| k.k_encode(f.elem(v))).collect();
    let distinct: std::collections::HashSet<_> = enc.iter().collect();
    if distinct.len() != 13 {
        bad.push("injectivity");
    }
    for a in 0..13u64 {
        for b in 0..13u64 {
            let (ea, eb) = (&enc[a as usize], &enc[b as usize]);
            if !k.eq(&k.add(ea, eb), &enc[((a + b) % 13) as usize]) || !k.eq(&k.mul(ea, eb), &enc[((a * b) % 13) as usize]) {
                bad.push("isomorphism at 13");
            }
        }
    }
    let bits = c13.toolbox().eo_bits.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for a in 0..13u64 {
        let got = k.k_sqrt(&enc[a as usize], &bits, &mut rng).unwrap();
        let want = prime_field::pf_sqrt(f.elem(a));
        let agree = match (got, want) {
            (SquareRoot::Root(r), SquareRoot::Root(s)) => r == k.k_encode(s) || r == k.k_encode(f.neg(&s)),
            (SquareRoot::NonResidue, SquareRoot::NonResidue) => true,
            _ => false,
        };
        if !agree {
            bad.push("sqrt at 13");
        }
    }
    let c997 = ctx(997);
    let k = c997.field();
    let f = c997.modulus();
    for _ in 0..200 {
        let (a, b, d) = (k.random(&mut rng), k.random(&mut rng), k.random(&mut rng));
        let axioms = k.eq(&k.add(&a, &b), &k.add(&b, &a))
            && k.eq(&k.mul(&a, &b), &k.mul(&b, &a))
            && k.eq(&k.add(&k.add(&a, &b), &d), &k.add(&a, &k.add(&b, &d)))
            && k.eq(&k.mul(&k.mul(&a, &b), &d), &k.mul(&a, &k.mul(&b, &d)))
            && k.eq(&k.mul(&a, &k.add(&b, &d)), &k.add(&k.mul(&a, &b), &k.mul(&a, &d)))
            && k.is_zero(&k.add(&a, &k.neg(&a)))
            && (k.is_zero(&a) || k.eq(&k.mul(&a, &k.inv(&a).unwrap()), &k.one()));
        let (x, y) = (f.elem(rng.gen()), f.elem(rng.gen()));
        let iso = k.eq(&k.k_encode(f.add(&x, &y)), &k.add(&k.k_encode(x), &k.k_encode(y)))
            && k.eq(&k.k_encode(f.mul(&x, &y)), &k.mul(&k.k_encode(x), &k.k_encode(y)));
        if !axioms || !iso {
            bad.push("axioms at 997");
        }
    }
    report("black-box-field", bad.is_empty(), &format!("failures={bad:?}"));
}

#[test]
fn identity_test_mod_center() {
    let g = session::build_group(13, 1).unwrap();
    let wb = g.white_box(1).unwrap();
    let z = wb.central_involution();
    let u = g.generators()[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = 0;
    for _ in 0..100 {
        let (a, b, c) = (g.bb_random(&mut rng), g.bb_random(&mut rng), g.bb_random(&mut rng));
        let az = g.bb_mul(&a, &z).unwrap();
        bad += usize::from(!g.bb_equiv(&a, &a).unwrap());
        bad += usize::from(g.bb_equiv(&a, &b).unwrap() != g.bb_equiv(&b, &a).unwrap());
        bad += usize::from(!g.bb_equiv(&a, &az).unwrap() || !g.bb_equiv(&az, &a).unwrap());
        // transitivity through the central multiple
        let bz = g.bb_mul(&b, &z).unwrap();
        if g.bb_equiv(&a, &b).unwrap() && g.bb_equiv(&b, &c).unwrap() {
            bad += usize::from(!g.bb_equiv(&a, &c).unwrap());
        }
        bad += usize::from(g.bb_equiv(&a, &b).unwrap() != g.bb_equiv(&a, &bz).unwrap());
        bad += usize::from(g.bb_equiv(&a, &g.bb_mul(&a, &u).unwrap()).unwrap());
    }
    bad += usize::from(!g.is_central(&z).unwrap() || g.is_identity(&z).unwrap());
    bad += usize::from(g.bb_equiv(&u, g.identity_handle()).unwrap());
    report("identity-mod-center", bad == 0, &format!("failures={bad}"));
}

#[test]
fn brute_force_oracles() {
    let p = PrimeModulus::new(13).unwrap();
    let e = prime_field::sl2_exponent(p).unwrap();
    let mut census = 1u128;
    for a in 0..13 {
        for b in 0..13 {
            for c in 0..13 {
                for d in 0..13 {
                    let m = Mat2::new(p.elem(a), p.elem(b), p.elem(c), p.elem(d));
                    if m.det(&p).value() != 1 {
                        continue;
                    }
                    let mut x = m.clone();
                    let mut n = 1u128;
                    while !x.is_identity(&p) {
                        x = x.mul(&m, &p);
                        n += 1;
                    }
                    census = lcm(census, n);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut good = 0;
    for _ in 0..1000 {
        let g = verify::random_sl2(p, &mut rng);
        let f = matrix::unipotent_decompose(&g, &p).unwrap();
        good += usize::from(f.len() <= 4 && matrix::factor_product(&f, &p).equals(&g, &p));
    }
    report(
        "brute-force-oracles",
        e == 1092 && census == 1092 && good == 1000,
        &format!("exponent={e} census={census} decompositions={good}/1000"),
    );
}

fn lcm(a: u128, b: u128) -> u128 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[test]
fn reports_are_reproducible() {
    let c = ctx(13);
    for suite in Suite::ALL {
        let a = verify::run_suite(&c, suite, 20, 11, Execution::Sequential);
        let b = verify::run_suite(&c, suite, 20, 11, Execution::Parallel);
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.failures, b.failures);
    }
}
