//! Oracle-side coordinates on the projective plane of involutions.
//!
//! An involution of PGL2 is determined by its axis, a non-isotropic point of
//! the plane of trace-zero matrices. Given a frame of three commuting
//! involutions and a unit point, this module converts between `Y`
//! involutions and homogeneous coordinates. It reads the hidden matrices
//! behind handles, so it is only reachable from the reference field oracle
//! and from the toolbox's anchor construction.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Mat2;
use crate::pgl2::{Pgl2Group, YElement};
use crate::prime_field::{PFElement, PrimeModulus};

#[derive(Clone)]
pub(crate) struct PlaneFrame {
    p: PrimeModulus,
    basis: [Mat2<PFElement>; 3],
    gram: [PFElement; 3],
}

/// `tr(XY) / 2`; on trace-zero matrices `B(X, X) = -det X`.
fn trace_form(p: &PrimeModulus, x: &Mat2<PFElement>, y: &Mat2<PFElement>) -> PFElement {
    let half = p.inv(&p.from_u64(2)).expect("odd characteristic");
    p.mul(&x.mul(y, p).trace(p), &half)
}

impl PlaneFrame {
    /// Frame from three pairwise commuting involutions and a unit point.
    /// Fails when the unit point is degenerate for this frame: on a
    /// coordinate line, or with one of `(0:1:1)`, `(1:0:1)`, `(1:1:0)`
    /// isotropic.
    pub(crate) fn new(y: &Pgl2Group, frame: [&YElement; 3], unit: &YElement) -> Result<Self> {
        let p = y.group().modulus();
        let mut basis = Vec::with_capacity(3);
        for e in frame {
            basis.push(involution_matrix(y, e)?);
        }
        let unit_m = involution_matrix(y, unit)?;
        let mut gram = Vec::with_capacity(3);
        for (i, b) in basis.iter_mut().enumerate() {
            for other in frame.iter().skip(i + 1) {
                let o = involution_matrix(y, other)?;
                if !p.is_zero(&trace_form(&p, b, &o)) {
                    return Err(Error::DegenerateAnchors);
                }
            }
            let q = trace_form(&p, b, b);
            let coeff = p.div(&trace_form(&p, &unit_m, b), &q)?;
            if p.is_zero(&coeff) {
                return Err(Error::DegenerateAnchors);
            }
            *b = b.scale(&coeff, &p);
            gram.push(p.mul(&q, &p.mul(&coeff, &coeff)));
        }
        let gram: [PFElement; 3] = gram.try_into().expect("three entries");
        for (j, k) in [(1, 2), (0, 2), (0, 1)] {
            if p.is_zero(&p.add(&gram[j], &gram[k])) {
                return Err(Error::DegenerateAnchors);
            }
        }
        let basis: [Mat2<PFElement>; 3] = basis.try_into().expect("three entries");
        Ok(PlaneFrame { p, basis, gram })
    }

    /// Diagonal of the quadratic form in frame coordinates.
    pub(crate) fn gram(&self) -> &[PFElement; 3] {
        &self.gram
    }

    pub(crate) fn coords_of_matrix(&self, x: &Mat2<PFElement>) -> Result<[PFElement; 3]> {
        let p = &self.p;
        let mut out = [p.zero(); 3];
        for (i, b) in self.basis.iter().enumerate() {
            out[i] = p.div(&trace_form(p, x, b), &self.gram[i])?;
        }
        Ok(out)
    }

    pub(crate) fn matrix_of_coords(&self, c: &[PFElement; 3]) -> Mat2<PFElement> {
        let p = &self.p;
        let mut acc = Mat2::scalar(p, p.zero());
        for (ci, b) in c.iter().zip(&self.basis) {
            let t = b.scale(ci, p);
            acc = Mat2::new(p.add(&acc.a, &t.a), p.add(&acc.b, &t.b), p.add(&acc.c, &t.c), p.add(&acc.d, &t.d));
        }
        acc
    }

    /// The involution of `Y` whose axis has frame coordinates `c`.
    pub(crate) fn point(&self, y: &Pgl2Group, c: &[PFElement; 3]) -> Result<YElement> {
        if c.iter().all(|x| x.value() == 0) {
            return Err(Error::ZeroPoint);
        }
        let m = self.matrix_of_coords(c);
        if self.p.is_zero(&m.det(&self.p)) {
            return Err(Error::IsotropicPoint);
        }
        y.from_matrix_internal(&m)
    }

    /// Frame coordinates of the axis of an involution of `Y`.
    pub(crate) fn coords(&self, y: &Pgl2Group, j: &YElement) -> Result<[PFElement; 3]> {
        let m = involution_matrix(y, j)?;
        self.coords_of_matrix(&m)
    }
}

/// The trace-zero matrix (hidden coordinates) of an involution of `Y`.
fn involution_matrix(y: &Pgl2Group, j: &YElement) -> Result<Mat2<PFElement>> {
    let p = y.group().modulus();
    let m = y.to_matrix_internal(j)?;
    if !p.is_zero(&m.trace(&p)) || m.is_scalar(&p) {
        return Err(Error::NotInvolution);
    }
    Ok(m)
}
