//! The morphism `SL2(F) -> SL2(K) -> SO3 flat -> SO3 sharp -> X`.
//!
//! An input matrix is encoded entrywise into `K` and written as a product
//! of root elements; each root element is split into two involutions, each
//! involution is carried through the adjoint map and the change of basis to
//! a point of the involution plane, and the resulting involutions of `Y`
//! are multiplied left to right. The product lies in the inner half of `Y`;
//! its first component is the image in `X`, up to the center, and the
//! center is fixed by matching the order of the source matrix.

use std::sync::Arc;

use crate::bbfield::{KElement, KField};
use crate::blackbox::{BBElement, BBGroup};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{self, Mat2, Mat3, ProjPoint, UnipotentFactor};
use crate::pgl2::YElement;
use crate::prime_field::{PFElement, PrimeModulus};
use crate::sharp_flat::{self, ChangeOfBasis};
use crate::toolbox::ToolBox;

#[derive(Clone, Debug)]
pub struct PipelineContext {
    group: Arc<BBGroup>,
    toolbox: Arc<ToolBox>,
    k: KField,
    cob: ChangeOfBasis,
    central: BBElement,
}

/// One involution carried through every model.
#[derive(Clone, Debug)]
pub struct InvolutionStage {
    pub matrix: Mat2<KElement>,
    pub flat: Mat3<KElement>,
    pub sharp: Mat3<KElement>,
    pub point: ProjPoint<KElement>,
    pub image: YElement,
}

#[derive(Clone, Debug)]
pub struct MorphismTrace {
    pub source_order: u128,
    pub k_matrix: Mat2<KElement>,
    pub factors: Vec<UnipotentFactor<KElement>>,
    pub involutions: Vec<InvolutionStage>,
    pub assembled: YElement,
    pub lift: BBElement,
    pub output: BBElement,
}

impl MorphismTrace {
    /// One stage per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let m = &self.k_matrix;
        out.push_str(&format!("source_order {}\n", self.source_order));
        out.push_str(&format!("k_matrix {},{};{},{}\n", m.a, m.b, m.c, m.d));
        for f in &self.factors {
            out.push_str(&format!("factor {:?} {}\n", f.side, f.t));
        }
        for (n, s) in self.involutions.iter().enumerate() {
            let j = &s.matrix;
            out.push_str(&format!("involution {n} {},{};{},{}\n", j.a, j.b, j.c, j.d));
            out.push_str(&format!("flat {n} {}\n", mat3_tokens(&s.flat)));
            out.push_str(&format!("sharp {n} {}\n", mat3_tokens(&s.sharp)));
            let c = s.point.coords();
            out.push_str(&format!("point {n} {} {} {}\n", c[0], c[1], c[2]));
            out.push_str(&format!("y_involution {n} {}\n", s.image.to_text()));
        }
        out.push_str(&format!("assembled {}\n", self.assembled.to_text()));
        out.push_str(&format!("lift {}\n", self.lift));
        out.push_str(&format!("output {}\n", self.output));
        out
    }
}

fn mat3_tokens(m: &Mat3<KElement>) -> String {
    m.m.iter().flatten().map(|x| x.to_hex()).collect::<Vec<_>>().join(" ")
}

impl PipelineContext {
    pub fn new(toolbox: Arc<ToolBox>, k: KField, cob: ChangeOfBasis) -> Result<Self> {
        let group = toolbox.group().clone();
        let i = &toolbox.setup().involution_i;
        let central = group.bb_mul(i, i)?;
        if group.is_identity(&central)? || !group.is_central(&central)? {
            return Err(Error::NotInvolution);
        }
        Ok(PipelineContext { group, toolbox, k, cob, central })
    }

    pub fn group(&self) -> &Arc<BBGroup> {
        &self.group
    }

    pub fn toolbox(&self) -> &Arc<ToolBox> {
        &self.toolbox
    }

    pub fn field(&self) -> &KField {
        &self.k
    }

    pub fn change_of_basis(&self) -> &ChangeOfBasis {
        &self.cob
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.group.modulus()
    }

    /// The central involution of `X`, the square of the set-up involution.
    pub fn central_involution(&self) -> &BBElement {
        &self.central
    }

    /// Order of a matrix of SL2(F).
    pub fn source_order(&self, g: &Mat2<PFElement>) -> Result<u128> {
        let p = self.modulus();
        g.require_sl2(&p)?;
        matrix::element_order(g, self.group.exponent_hint(), |a, b| a.mul(b, &p), |a| a.is_identity(&p))
    }

    /// The Y-involution of a PGL2(K) involution, validated against its
    /// sharp action.
    pub fn involution_image(&self, j: &Mat2<KElement>) -> Result<YElement> {
        Ok(self.involution_stage(j)?.image)
    }

    fn involution_stage(&self, j: &Mat2<KElement>) -> Result<InvolutionStage> {
        let k = &self.k;
        let sq = j.mul(j, k);
        if !sq.is_scalar(k) || j.is_scalar(k) {
            return Err(Error::NotInvolution);
        }
        let flat = matrix::adjoint_gl(j, k)?;
        let sharp = self.cob.to_sharp(&flat, k);
        let point = matrix::axis_of_rotation(&sharp, k)?;
        let c = point.coords();
        let image = k.point_from_coords(&c[0], &c[1], &c[2])?;
        if !sharp_flat::sharp_action(&image, k)?.equals(&sharp, k) {
            return Err(Error::ImageMismatch);
        }
        Ok(InvolutionStage { matrix: j.clone(), flat, sharp, point, image })
    }

    /// Map an SL2(F) matrix into `X`.
    pub fn map_element(&self, g: &Mat2<PFElement>) -> Result<(BBElement, MorphismTrace)> {
        let k_matrix = encode_matrix(g, &self.k)?;
        let factors = matrix::unipotent_decompose(&k_matrix, &self.k)?;
        self.map_with_factors(g, k_matrix, factors)
    }

    /// Map the product of explicit root elements over `F`. The result only
    /// depends on the product, which the well-definedness suite relies on.
    pub fn map_factors(&self, factors: &[UnipotentFactor<PFElement>]) -> Result<(BBElement, MorphismTrace)> {
        let p = self.modulus();
        let g = matrix::factor_product(factors, &p);
        let k_factors: Vec<_> = factors
            .iter()
            .map(|u| UnipotentFactor { side: u.side, t: self.k.k_encode(u.t) })
            .collect();
        let k_matrix = encode_matrix(&g, &self.k)?;
        self.map_with_factors(&g, k_matrix, k_factors)
    }

    fn map_with_factors(
        &self,
        g: &Mat2<PFElement>,
        k_matrix: Mat2<KElement>,
        factors: Vec<UnipotentFactor<KElement>>,
    ) -> Result<(BBElement, MorphismTrace)> {
        let source_order = self.source_order(g)?;
        let mut involutions = Vec::with_capacity(2 * factors.len());
        for u in &factors {
            let (j1, j2) = matrix::involution_pair(u, &self.k)?;
            involutions.push(self.involution_stage(&j1)?);
            involutions.push(self.involution_stage(&j2)?);
        }
        let images: Vec<YElement> = involutions.iter().map(|s| s.image.clone()).collect();
        let (assembled, lift, output) = self.assemble(&images, source_order)?;
        let trace = MorphismTrace { source_order, k_matrix, factors, involutions, assembled, lift, output: output.clone() };
        Ok((output, trace))
    }

    fn assemble(&self, images: &[YElement], source_order: u128) -> Result<(YElement, BBElement, BBElement)> {
        let y = self.toolbox.pgl2();
        let mut acc = y.y_identity();
        for im in images {
            acc = y.y_mul(&acc, im)?;
        }
        if acc.bit != 0 {
            return Err(Error::ImageMismatch);
        }
        let lift = acc.first.clone();
        let output = resolve_sign(&lift, source_order, &self.group, &self.central)?;
        Ok((acc, lift, output))
    }

    /// Recompute the output from the recorded involution images.
    pub fn replay(&self, trace: &MorphismTrace) -> Result<BBElement> {
        let images: Vec<YElement> = trace.involutions.iter().map(|s| s.image.clone()).collect();
        Ok(self.assemble(&images, trace.source_order)?.2)
    }
}

/// Entrywise encoding of an SL2(F) matrix into SL2(K).
pub fn encode_matrix(g: &Mat2<PFElement>, k: &KField) -> Result<Mat2<KElement>> {
    let p = PrimeModulus::new(k.characteristic())?;
    if g.a.modulus() != p.get() {
        return Err(Error::ModulusMismatch);
    }
    g.require_sl2(&p)?;
    let m = g.map(|x| k.k_encode(*x));
    if !k.eq(&m.det(k), &k.one()) {
        return Err(Error::NotSpecial);
    }
    Ok(m)
}

/// Choose between `x` and `x z` (`z` the central involution) the lift whose
/// order is `target_order`.
pub fn resolve_sign(x: &BBElement, target_order: u128, group: &BBGroup, z: &BBElement) -> Result<BBElement> {
    if group.exact_order(x)? == target_order {
        return Ok(x.clone());
    }
    let xz = group.bb_mul(x, z)?;
    if group.exact_order(&xz)? == target_order {
        return Ok(xz);
    }
    Err(Error::NoMatchingLift(target_order))
}
