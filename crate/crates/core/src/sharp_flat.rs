//! SharpVsFlat: the change of basis between the geometric action of `Y` on
//! the involution plane (sharp coordinates) and the adjoint action of
//! SL2(K) on trace-zero matrices (flat coordinates).
//!
//! Convention: `sharp = M * flat * M^-1`.

use crate::bbfield::{KElement, KField};
use crate::blackbox::GroupOracle;
use crate::error::{Error, Result};
use crate::field::{Field, SquareRoot};
use crate::matrix::{self, Mat3};
use crate::pgl2::YElement;

/// Attempts at a frame whose scalars all have square roots.
pub const BASIS_BUDGET: usize = 256;

/// A progress event from [`sharp_vs_flat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub stage: &'static str,
    pub attempt: usize,
}

#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    pub m: Mat3<KElement>,
    pub m_inv: Mat3<KElement>,
}

impl ChangeOfBasis {
    pub fn to_sharp(&self, flat: &Mat3<KElement>, k: &KField) -> Mat3<KElement> {
        self.m.mul(flat, k).mul(&self.m_inv, k)
    }

    pub fn to_flat(&self, sharp: &Mat3<KElement>, k: &KField) -> Mat3<KElement> {
        self.m_inv.mul(sharp, k).mul(&self.m, k)
    }

    /// The witnesses: the three vertices, the unit point and the first
    /// side's unit point.
    pub fn witnesses(k: &KField) -> Vec<YElement> {
        let tb = k.toolbox();
        let mut w = tb.plane_involutions.to_vec();
        w.push(tb.point_111.clone());
        w.push(tb.unity_points[0].clone());
        w
    }

    /// Check the conjugation identity on every witness.
    pub fn check_witnesses(&self, k: &KField) -> Result<bool> {
        if !self.m.mul(&self.m_inv, k).is_identity(k) {
            return Ok(false);
        }
        for w in Self::witnesses(k) {
            let sharp_point = k.coords_from_point(&w)?;
            let v = self.m_inv.apply(sharp_point.coords(), k);
            let flat = half_turn(&v, k)?;
            if !self.to_sharp(&flat, k).equals(&sharp_action(&w, k)?, k) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Eighteen tokens: `M` then `M^-1`, row-major.
    pub fn to_text(&self) -> String {
        let mut out = Vec::with_capacity(18);
        for mat in [&self.m, &self.m_inv] {
            for row in &mat.m {
                for x in row {
                    out.push(x.to_hex());
                }
            }
        }
        out.join(" ")
    }

    pub fn from_text(s: &str, k: &KField) -> Result<Self> {
        let toks: Vec<KElement> =
            s.split_whitespace().map(|t| k.parse_element(t)).collect::<Result<_>>()?;
        if toks.len() != 18 {
            return Err(Error::Parse(format!("expected 18 tokens, got {}", toks.len())));
        }
        let m = Mat3::from_fn(|i, j| toks[3 * i + j]);
        let m_inv = Mat3::from_fn(|i, j| toks[9 + 3 * i + j]);
        if !m.mul(&m_inv, k).is_identity(k) {
            return Err(Error::Parse("matrices are not mutually inverse".into()));
        }
        Ok(ChangeOfBasis { m, m_inv })
    }
}

fn sharp_form(v: &[KElement; 3], k: &KField) -> KElement {
    let g = k.sharp_gram();
    (0..3).fold(k.zero(), |acc, i| k.add(&acc, &k.mul(&g[i], &k.square(&v[i]))))
}

/// The half turn about a non-isotropic flat vector `v`:
/// `w -> 2 B(w, v) / Q(v) * v - w`.
pub fn half_turn(v: &[KElement; 3], k: &KField) -> Result<Mat3<KElement>> {
    let q = matrix::quad_form(v, k);
    if k.is_zero(&q) {
        return Err(Error::IsotropicPoint);
    }
    let qi = k.inv(&q)?;
    // 2 G v for the polar form of x^2 + yz
    let gv = [k.add(&v[0], &v[0]), v[2], v[1]];
    Ok(Mat3::from_fn(|i, j| {
        let t = k.mul(&k.mul(&v[i], &gv[j]), &qi);
        if i == j {
            k.sub(&t, &k.one())
        } else {
            t
        }
    }))
}

/// The matrix in sharp coordinates of `j -> y j y^-1` on plane involutions,
/// normalized to determinant one. Columns come from the images of the three
/// vertices, relative scalars from the image of the unit point.
pub fn sharp_action(y: &YElement, k: &KField) -> Result<Mat3<KElement>> {
    let tb = k.toolbox();
    let grp = k.pgl2();
    let y_inv = grp.y_inv(y)?;
    let image = |j: &YElement| -> Result<[KElement; 3]> {
        Ok(*k.coords_from_point(&grp.conjugate(j, &y_inv))?.coords())
    };
    let cols = [
        image(&tb.plane_involutions[0])?,
        image(&tb.plane_involutions[1])?,
        image(&tb.plane_involutions[2])?,
    ];
    let unit = image(&tb.point_111)?;
    let c = Mat3::from_columns(&cols);
    let lambda = matrix::solve3(&c, &unit, k).map_err(|_| Error::DegenerateAnchors)?;
    if lambda.iter().any(|l| k.is_zero(l)) {
        return Err(Error::DegenerateAnchors);
    }
    let a = Mat3::from_fn(|i, j| k.mul(&cols[j][i], &lambda[j]));
    let det = a.det(k);
    let g0 = k.sharp_gram()[0];
    let s = k.div(&sharp_form(&a.column(0), k), &k.mul(&g0, &det))?;
    Ok(a.scale(&s, k))
}

fn random_vector(k: &KField, rng: &mut dyn rand::RngCore) -> [KElement; 3] {
    [k.random(rng), k.random(rng), k.random(rng)]
}

/// Compute `M` with `sharp_action(y) = M * flat(y) * M^-1`.
///
/// A random flat-orthogonal frame `v1, v2, v3` is sent to the sharp axes
/// with scalars `l_i`, `l_i^2 = mu * Q(v_i) / g_i`, where `g` is the sharp
/// form and `mu` the multiplier fixed by the discriminants. When one of the
/// three is a non-residue the frame is redrawn.
pub fn sharp_vs_flat(
    k: &KField,
    rng: &mut dyn rand::RngCore,
    progress: &mut dyn FnMut(Progress),
) -> Result<ChangeOfBasis> {
    let g = k.sharp_gram();
    let g_prod = k.mul(&g[0], &k.mul(&g[1], &g[2]));
    let bits = k.toolbox().eo_bits.clone();
    let two = k.from_u64(2);
    for attempt in 1..=BASIS_BUDGET {
        progress(Progress { stage: "frame", attempt });
        let v1 = random_vector(k, rng);
        let q1 = matrix::quad_form(&v1, k);
        if k.is_zero(&q1) {
            continue;
        }
        let w = random_vector(k, rng);
        let t = k.div(&matrix::polar_form(&w, &v1, k), &q1)?;
        let v2 = [0, 1, 2].map(|i| k.sub(&w[i], &k.mul(&t, &v1[i])));
        let q2 = matrix::quad_form(&v2, k);
        if k.is_zero(&q2) {
            continue;
        }
        let x = matrix::cross(&v1, &v2, k);
        let v3 = [x[0], k.mul(&two, &x[2]), k.mul(&two, &x[1])];
        let q3 = matrix::quad_form(&v3, k);
        if k.is_zero(&q3) {
            continue;
        }
        let q = [q1, q2, q3];
        let mu = k.mul(&g_prod, &k.mul(&q1, &k.mul(&q2, &q3)));
        let mut lambda = Vec::with_capacity(3);
        for i in 0..3 {
            let target = k.div(&k.mul(&mu, &q[i]), &g[i])?;
            match k.k_sqrt(&target, &bits, rng)? {
                SquareRoot::Root(r) => lambda.push(r),
                SquareRoot::NonResidue => break,
            }
        }
        if lambda.len() < 3 {
            progress(Progress { stage: "non-residue", attempt });
            continue;
        }
        let v = Mat3::from_columns(&[v1, v2, v3]);
        let l = [lambda[0], lambda[1], lambda[2]];
        let l_inv = [k.inv(&l[0])?, k.inv(&l[1])?, k.inv(&l[2])?];
        let m = Mat3::diag(k, &l).mul(&v.inv(k)?, k);
        let m_inv = v.mul(&Mat3::diag(k, &l_inv), k);
        let cob = ChangeOfBasis { m, m_inv };
        progress(Progress { stage: "witness check", attempt });
        if !cob.check_witnesses(k)? {
            return Err(Error::ImageMismatch);
        }
        progress(Progress { stage: "done", attempt });
        return Ok(cob);
    }
    Err(Error::BudgetExhausted("change of basis"))
}
