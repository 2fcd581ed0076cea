//! 2x2 and 3x3 matrices over an abstract [`Field`], the unipotent and
//! involution factorizations of SL2, and the adjoint map into SO3.
//!
//! The adjoint representation uses the ordered basis `(h, e, f)` of the
//! trace-zero matrices,
//!
//! ```text
//! h = [[1, 0], [0, -1]],  e = [[0, 1], [0, 0]],  f = [[0, 0], [1, 0]],
//! ```
//!
//! so `x*h + y*e + z*f = [[x, y], [z, -x]]` and the invariant quadratic form
//! is `Q(x, y, z) = x^2 + yz = -det`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, PartialEq)]
pub struct Mat2<E> {
    pub a: E,
    pub b: E,
    pub c: E,
    pub d: E,
}

impl<E: fmt::Debug> fmt::Debug for Mat2<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.a, self.b, self.c, self.d)
    }
}

impl<E: Clone> Mat2<E> {
    pub fn new(a: E, b: E, c: E, d: E) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity<F: Field<Elem = E>>(f: &F) -> Self {
        Mat2::new(f.one(), f.zero(), f.zero(), f.one())
    }

    pub fn scalar<F: Field<Elem = E>>(f: &F, s: E) -> Self {
        Mat2::new(s.clone(), f.zero(), f.zero(), s)
    }

    pub fn from_ints<F: Field<Elem = E>>(f: &F, a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(f.from_i64(a), f.from_i64(b), f.from_i64(c), f.from_i64(d))
    }

    /// `[[1, t], [0, 1]]`
    pub fn upper<F: Field<Elem = E>>(f: &F, t: E) -> Self {
        Mat2::new(f.one(), t, f.zero(), f.one())
    }

    /// `[[1, 0], [t, 1]]`
    pub fn lower<F: Field<Elem = E>>(f: &F, t: E) -> Self {
        Mat2::new(f.one(), f.zero(), t, f.one())
    }

    /// `diag(a, a^-1)`
    pub fn torus<F: Field<Elem = E>>(f: &F, a: &E) -> Result<Self> {
        Ok(Mat2::new(a.clone(), f.zero(), f.zero(), f.inv(a)?))
    }

    pub fn mul<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> Self {
        let dot = |x: &E, y: &E, z: &E, w: &E| f.add(&f.mul(x, y), &f.mul(z, w));
        Mat2::new(
            dot(&self.a, &o.a, &self.b, &o.c),
            dot(&self.a, &o.b, &self.b, &o.d),
            dot(&self.c, &o.a, &self.d, &o.c),
            dot(&self.c, &o.b, &self.d, &o.d),
        )
    }

    pub fn det<F: Field<Elem = E>>(&self, f: &F) -> E {
        f.sub(&f.mul(&self.a, &self.d), &f.mul(&self.b, &self.c))
    }

    pub fn trace<F: Field<Elem = E>>(&self, f: &F) -> E {
        f.add(&self.a, &self.d)
    }

    pub fn adjugate<F: Field<Elem = E>>(&self, f: &F) -> Self {
        Mat2::new(self.d.clone(), f.neg(&self.b), f.neg(&self.c), self.a.clone())
    }

    /// Generic inverse; fails on singular input.
    pub fn inv<F: Field<Elem = E>>(&self, f: &F) -> Result<Self> {
        let det = self.det(f);
        if f.is_zero(&det) {
            return Err(Error::Singular);
        }
        let s = f.inv(&det)?;
        Ok(self.adjugate(f).scale(&s, f))
    }

    /// Inverse of an SL2 element: `[[d, -b], [-c, a]]`.
    pub fn inv_sl2<F: Field<Elem = E>>(&self, f: &F) -> Result<Self> {
        self.require_sl2(f)?;
        Ok(self.adjugate(f))
    }

    pub fn scale<F: Field<Elem = E>>(&self, s: &E, f: &F) -> Self {
        Mat2::new(f.mul(&self.a, s), f.mul(&self.b, s), f.mul(&self.c, s), f.mul(&self.d, s))
    }

    pub fn neg<F: Field<Elem = E>>(&self, f: &F) -> Self {
        Mat2::new(f.neg(&self.a), f.neg(&self.b), f.neg(&self.c), f.neg(&self.d))
    }

    pub fn equals<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> bool {
        f.eq(&self.a, &o.a) && f.eq(&self.b, &o.b) && f.eq(&self.c, &o.c) && f.eq(&self.d, &o.d)
    }

    pub fn is_identity<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.equals(&Mat2::identity(f), f)
    }

    /// Is this matrix a scalar multiple of the identity?
    pub fn is_scalar<F: Field<Elem = E>>(&self, f: &F) -> bool {
        f.is_zero(&self.b) && f.is_zero(&self.c) && f.eq(&self.a, &self.d)
    }

    pub fn require_sl2<F: Field<Elem = E>>(&self, f: &F) -> Result<()> {
        if f.eq(&self.det(f), &f.one()) {
            Ok(())
        } else {
            Err(Error::NotSpecial)
        }
    }

    pub fn pow<F: Field<Elem = E>>(&self, n: u128, f: &F) -> Self {
        let mut result = Mat2::identity(f);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, f);
            }
            base = base.mul(&base, f);
            e >>= 1;
        }
        result
    }

    pub fn map<T, G: Fn(&E) -> T>(&self, g: G) -> Mat2<T> {
        Mat2 { a: g(&self.a), b: g(&self.b), c: g(&self.c), d: g(&self.d) }
    }

    pub fn entries(&self) -> [&E; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }
}

#[derive(Clone, PartialEq)]
pub struct Mat3<E> {
    pub m: [[E; 3]; 3],
}

impl<E: fmt::Debug> fmt::Debug for Mat3<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.m)
    }
}

impl<E: Clone> Mat3<E> {
    pub fn from_rows(m: [[E; 3]; 3]) -> Self {
        Mat3 { m }
    }

    pub fn from_fn<G: FnMut(usize, usize) -> E>(mut g: G) -> Self {
        Mat3 {
            m: [
                [g(0, 0), g(0, 1), g(0, 2)],
                [g(1, 0), g(1, 1), g(1, 2)],
                [g(2, 0), g(2, 1), g(2, 2)],
            ],
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[[E; 3]; 3]) -> Self {
        Mat3::from_fn(|i, j| cols[j][i].clone())
    }

    pub fn identity<F: Field<Elem = E>>(f: &F) -> Self {
        Mat3::from_fn(|i, j| if i == j { f.one() } else { f.zero() })
    }

    pub fn diag<F: Field<Elem = E>>(f: &F, d: &[E; 3]) -> Self {
        Mat3::from_fn(|i, j| if i == j { d[i].clone() } else { f.zero() })
    }

    pub fn from_ints<F: Field<Elem = E>>(f: &F, rows: [[i64; 3]; 3]) -> Self {
        Mat3::from_fn(|i, j| f.from_i64(rows[i][j]))
    }

    pub fn column(&self, j: usize) -> [E; 3] {
        [self.m[0][j].clone(), self.m[1][j].clone(), self.m[2][j].clone()]
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_fn(|i, j| self.m[j][i].clone())
    }

    pub fn mul<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> Self {
        Mat3::from_fn(|i, j| {
            (0..3).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(&self.m[i][k], &o.m[k][j])))
        })
    }

    pub fn apply<F: Field<Elem = E>>(&self, v: &[E; 3], f: &F) -> [E; 3] {
        let row = |i: usize| {
            (0..3).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(&self.m[i][k], &v[k])))
        };
        [row(0), row(1), row(2)]
    }

    pub fn det<F: Field<Elem = E>>(&self, f: &F) -> E {
        let m = &self.m;
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
            f.sub(&f.mul(&m[r1][c1], &m[r2][c2]), &f.mul(&m[r1][c2], &m[r2][c1]))
        };
        let t0 = f.mul(&m[0][0], &minor(1, 2, 1, 2));
        let t1 = f.mul(&m[0][1], &minor(1, 2, 0, 2));
        let t2 = f.mul(&m[0][2], &minor(1, 2, 0, 1));
        f.add(&f.sub(&t0, &t1), &t2)
    }

    pub fn trace<F: Field<Elem = E>>(&self, f: &F) -> E {
        f.add(&f.add(&self.m[0][0], &self.m[1][1]), &self.m[2][2])
    }

    pub fn scale<F: Field<Elem = E>>(&self, s: &E, f: &F) -> Self {
        Mat3::from_fn(|i, j| f.mul(&self.m[i][j], s))
    }

    pub fn sub<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> Self {
        Mat3::from_fn(|i, j| f.sub(&self.m[i][j], &o.m[i][j]))
    }

    pub fn inv<F: Field<Elem = E>>(&self, f: &F) -> Result<Self> {
        let det = self.det(f);
        if f.is_zero(&det) {
            return Err(Error::Singular);
        }
        let s = f.inv(&det)?;
        let m = &self.m;
        let cof = |i: usize, j: usize| {
            let (r1, r2) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = f.sub(&f.mul(&m[r1][c1], &m[r2][c2]), &f.mul(&m[r1][c2], &m[r2][c1]));
            if (i + j) % 2 == 1 {
                f.neg(&minor)
            } else {
                minor
            }
        };
        // inverse = adj / det, adj = transpose of cofactor matrix
        Ok(Mat3::from_fn(|i, j| f.mul(&cof(j, i), &s)))
    }

    pub fn equals<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> bool {
        (0..3).all(|i| (0..3).all(|j| f.eq(&self.m[i][j], &o.m[i][j])))
    }

    pub fn is_identity<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.equals(&Mat3::identity(f), f)
    }

    pub fn pow<F: Field<Elem = E>>(&self, n: u128, f: &F) -> Self {
        let mut result = Mat3::identity(f);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, f);
            }
            base = base.mul(&base, f);
            e >>= 1;
        }
        result
    }

    pub fn map<T, G: Fn(&E) -> T>(&self, g: G) -> Mat3<T> {
        Mat3 {
            m: [
                [g(&self.m[0][0]), g(&self.m[0][1]), g(&self.m[0][2])],
                [g(&self.m[1][0]), g(&self.m[1][1]), g(&self.m[1][2])],
                [g(&self.m[2][0]), g(&self.m[2][1]), g(&self.m[2][2])],
            ],
        }
    }
}

/// Solve `A x = b` for an invertible 3x3 `A` by Cramer's rule.
pub fn solve3<F: Field>(a: &Mat3<F::Elem>, b: &[F::Elem; 3], f: &F) -> Result<[F::Elem; 3]> {
    let det = a.det(f);
    if f.is_zero(&det) {
        return Err(Error::Singular);
    }
    let inv_det = f.inv(&det)?;
    let solve = |k: usize| {
        let mut m = a.clone();
        for (i, bi) in b.iter().enumerate() {
            m.m[i][k] = bi.clone();
        }
        f.mul(&m.det(f), &inv_det)
    };
    Ok([solve(0), solve(1), solve(2)])
}

/// Euclidean cross product; over any field it spans the common kernel of
/// two independent linear forms.
pub fn cross<F: Field>(u: &[F::Elem; 3], v: &[F::Elem; 3], f: &F) -> [F::Elem; 3] {
    let c = |i: usize, j: usize| f.sub(&f.mul(&u[i], &v[j]), &f.mul(&u[j], &v[i]));
    [c(1, 2), c(2, 0), c(0, 1)]
}

/// `Q(x, y, z) = x^2 + yz`.
pub fn quad_form<F: Field>(v: &[F::Elem; 3], f: &F) -> F::Elem {
    f.add(&f.square(&v[0]), &f.mul(&v[1], &v[2]))
}

/// Polar form of `Q`: `B(v, w) = xx' + (yz' + zy')/2`, so `B(v, v) = Q(v)`.
pub fn polar_form<F: Field>(v: &[F::Elem; 3], w: &[F::Elem; 3], f: &F) -> F::Elem {
    let half = f.inv(&f.from_u64(2)).expect("odd characteristic");
    let cross_terms = f.add(&f.mul(&v[1], &w[2]), &f.mul(&v[2], &w[1]));
    f.add(&f.mul(&v[0], &w[0]), &f.mul(&half, &cross_terms))
}

/// Which root group a unipotent factor lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnipotentFactor<E> {
    pub side: Side,
    pub t: E,
}

impl<E: Clone> UnipotentFactor<E> {
    pub fn matrix<F: Field<Elem = E>>(&self, f: &F) -> Mat2<E> {
        match self.side {
            Side::Upper => Mat2::upper(f, self.t.clone()),
            Side::Lower => Mat2::lower(f, self.t.clone()),
        }
    }
}

/// Product of factors in order.
pub fn factor_product<F: Field>(factors: &[UnipotentFactor<F::Elem>], f: &F) -> Mat2<F::Elem> {
    factors.iter().fold(Mat2::identity(f), |acc, u| acc.mul(&u.matrix(f), f))
}

/// Write an SL2 element as a product of at most four root elements.
///
/// With `c != 0`: `g = upper((a-1)/c) * lower(c) * upper((d-1)/c)`. With
/// `c = 0`: decompose `lower(1) * g`, whose lower-left entry is `a != 0`,
/// and prepend `lower(-1)`. Trivial factors are dropped.
pub fn unipotent_decompose<F: Field>(
    g: &Mat2<F::Elem>,
    f: &F,
) -> Result<Vec<UnipotentFactor<F::Elem>>> {
    g.require_sl2(f)?;
    if g.is_identity(f) {
        return Ok(Vec::new());
    }
    if f.is_zero(&g.c) {
        let shifted = Mat2::lower(f, f.one()).mul(g, f);
        let mut out = vec![UnipotentFactor { side: Side::Lower, t: f.neg(&f.one()) }];
        out.extend(decompose_generic(&shifted, f)?);
        return Ok(out);
    }
    decompose_generic(g, f)
}

fn decompose_generic<F: Field>(
    g: &Mat2<F::Elem>,
    f: &F,
) -> Result<Vec<UnipotentFactor<F::Elem>>> {
    let inv_c = f.inv(&g.c)?;
    let one = f.one();
    let left = f.mul(&f.sub(&g.a, &one), &inv_c);
    let right = f.mul(&f.sub(&g.d, &one), &inv_c);
    let candidates = [
        UnipotentFactor { side: Side::Upper, t: left },
        UnipotentFactor { side: Side::Lower, t: g.c.clone() },
        UnipotentFactor { side: Side::Upper, t: right },
    ];
    Ok(candidates.into_iter().filter(|u| !f.is_zero(&u.t)).collect())
}

/// `J = diag(1, -1)`.
pub fn fixed_involution<F: Field>(f: &F) -> Mat2<F::Elem> {
    Mat2::new(f.one(), f.zero(), f.zero(), f.neg(&f.one()))
}

/// Split a nontrivial unipotent `u` as `J * (J * u)`; both factors square
/// to a scalar, so they are involutions in PGL2.
pub fn involution_pair<F: Field>(
    u: &UnipotentFactor<F::Elem>,
    f: &F,
) -> Result<(Mat2<F::Elem>, Mat2<F::Elem>)> {
    if f.is_zero(&u.t) {
        return Err(Error::IdentityFactor);
    }
    let j = fixed_involution(f);
    let ju = j.mul(&u.matrix(f), f);
    Ok((j, ju))
}

/// Conjugation `X -> g X g^-1` on trace-zero matrices, in the basis
/// `(h, e, f)`. Works for any invertible `g`; the result only depends on
/// `g` up to scalars.
pub fn adjoint_gl<F: Field>(g: &Mat2<F::Elem>, f: &F) -> Result<Mat3<F::Elem>> {
    let det = g.det(f);
    if f.is_zero(&det) {
        return Err(Error::Singular);
    }
    let s = f.inv(&det)?;
    let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
    let two = f.from_u64(2);
    let rows = [
        [
            f.add(&f.mul(a, d), &f.mul(b, c)),
            f.neg(&f.mul(a, c)),
            f.mul(b, d),
        ],
        [
            f.neg(&f.mul(&two, &f.mul(a, b))),
            f.square(a),
            f.neg(&f.square(b)),
        ],
        [
            f.mul(&two, &f.mul(c, d)),
            f.neg(&f.square(c)),
            f.square(d),
        ],
    ];
    Ok(Mat3::from_rows(rows).scale(&s, f))
}

/// The adjoint image of an SL2 element in SO3 (flat model).
pub fn adjoint<F: Field>(g: &Mat2<F::Elem>, f: &F) -> Result<Mat3<F::Elem>> {
    g.require_sl2(f)?;
    adjoint_gl(g, f)
}

/// The trace-zero matrix with coordinates `v` in the basis `(h, e, f)`.
pub fn lie_matrix<F: Field>(v: &[F::Elem; 3], f: &F) -> Mat2<F::Elem> {
    Mat2::new(v[0].clone(), v[1].clone(), v[2].clone(), f.neg(&v[0]))
}

/// Coordinates of a trace-zero matrix in the basis `(h, e, f)`.
pub fn lie_coords<F: Field>(x: &Mat2<F::Elem>) -> [F::Elem; 3] {
    [x.a.clone(), x.b.clone(), x.c.clone()]
}

/// A point of the projective plane, stored in canonical form (first
/// nonzero coordinate equal to one).
#[derive(Clone, PartialEq)]
pub struct ProjPoint<E> {
    coords: [E; 3],
}

impl<E: fmt::Debug> fmt::Debug for ProjPoint<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} : {:?} : {:?})", self.coords[0], self.coords[1], self.coords[2])
    }
}

impl<E: Clone> ProjPoint<E> {
    pub fn new<F: Field<Elem = E>>(v: [E; 3], f: &F) -> Result<Self> {
        let lead = v.iter().find(|x| !f.is_zero(x)).ok_or(Error::ZeroPoint)?;
        let s = f.inv(lead)?;
        Ok(ProjPoint { coords: [f.mul(&v[0], &s), f.mul(&v[1], &s), f.mul(&v[2], &s)] })
    }

    pub fn coords(&self) -> &[E; 3] {
        &self.coords
    }

    pub fn equals<F: Field<Elem = E>>(&self, o: &Self, f: &F) -> bool {
        (0..3).all(|i| f.eq(&self.coords[i], &o.coords[i]))
    }
}

/// The fixed axis of a rotation: the kernel of `A - I`, which must be one
/// dimensional.
pub fn axis_of_rotation<F: Field>(a: &Mat3<F::Elem>, f: &F) -> Result<ProjPoint<F::Elem>> {
    if a.is_identity(f) {
        return Err(Error::NoAxis);
    }
    let k = a.sub(&Mat3::identity(f), f);
    let rows = [k.m[0].clone(), k.m[1].clone(), k.m[2].clone()];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let v = cross(&rows[i], &rows[j], f);
        if v.iter().any(|x| !f.is_zero(x)) {
            let image = k.apply(&v, f);
            if image.iter().any(|x| !f.is_zero(x)) {
                return Err(Error::NoAxis);
            }
            return ProjPoint::new(v, f);
        }
    }
    Err(Error::NoAxis)
}

/// Multiplicative order of `g`, given an exponent `e` with `g^e = 1`.
///
/// `e` is factored by trial division; each prime is stripped while the
/// reduced power still lands on the identity.
pub fn element_order<T, M, I>(g: &T, e: u128, mul: M, is_identity: I) -> Result<u128>
where
    T: Clone,
    M: Fn(&T, &T) -> T,
    I: Fn(&T) -> bool,
{
    let pow = |x: &T, n: u128| -> T { power(x, n, &mul) };
    if e == 0 || !is_identity(&pow(g, e)) {
        return Err(Error::BadExponent);
    }
    let mut order = e;
    for (q, k) in crate::prime_field::factor(e) {
        for _ in 0..k {
            if is_identity(&pow(g, order / q)) {
                order /= q;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

/// `x^n` for `n >= 1` by square-and-multiply with a caller-supplied product.
pub fn power<T: Clone, M: Fn(&T, &T) -> T>(x: &T, n: u128, mul: M) -> T {
    assert!(n >= 1, "power needs a positive exponent without an identity");
    let mut base = x.clone();
    let mut acc: Option<T> = None;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => mul(&a, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc.expect("n >= 1")
}

/// Parse `"a,b;c,d"` (row-major, comma-separated entries, semicolon-separated
/// rows) into a matrix over `f`. Entries may be negative.
pub fn parse_mat2<F: Field>(s: &str, f: &F) -> Result<Mat2<F::Elem>> {
    let rows: Vec<&str> = s.trim().split(';').collect();
    if rows.len() != 2 {
        return Err(Error::Parse(format!("expected 2 rows in {s:?}")));
    }
    let mut entries = Vec::with_capacity(4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::Parse(format!("expected 2 entries in row {row:?}")));
        }
        for c in cols {
            let v: i64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad matrix entry {c:?}")))?;
            entries.push(f.from_i64(v));
        }
    }
    let d = entries.pop().unwrap();
    let c = entries.pop().unwrap();
    let b = entries.pop().unwrap();
    let a = entries.pop().unwrap();
    Ok(Mat2::new(a, b, c, d))
}

pub fn format_mat2<E: fmt::Display>(g: &Mat2<E>) -> String {
    format!("{},{};{},{}", g.a, g.b, g.c, g.d)
}
