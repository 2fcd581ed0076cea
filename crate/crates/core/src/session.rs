//! Seeded construction of every stage from `(p, seed)`.
//!
//! Each stage draws from its own random stream, so a cached stage can be
//! reloaded and the later stages still come out identical.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bbfield::KField;
use crate::blackbox::BBGroup;
use crate::error::Result;
use crate::pgl2::{self, SetupPGL2Output};
use crate::pipeline::PipelineContext;
use crate::prime_field::{self, PrimeModulus};
use crate::sharp_flat::{self, ChangeOfBasis, Progress};
use crate::toolbox::{self, ToolBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Setup,
    Toolbox,
    Basis,
    Verify,
}

/// The random stream of one stage.
pub fn stage_rng(seed: u64, stage: Stage) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64 + 1);
    rng
}

pub fn build_group(p: u64, seed: u64) -> Result<Arc<BBGroup>> {
    Ok(Arc::new(BBGroup::new(PrimeModulus::new(p)?, seed)?))
}

pub fn build_setup(group: &Arc<BBGroup>, seed: u64) -> Result<SetupPGL2Output> {
    let eo = prime_field::odd_part(group.exponent_hint())?;
    let gens = group.generators().to_vec();
    pgl2::setup_for_pgl2(&gens, &eo, group, &mut stage_rng(seed, Stage::Setup))
}

pub fn build_toolbox(
    group: &Arc<BBGroup>,
    setup: SetupPGL2Output,
    seed: u64,
    word_pairs: usize,
) -> Result<ToolBox> {
    let e = group.exponent_hint();
    toolbox::toolbox_from_setup(setup, e, group.clone(), word_pairs, &mut stage_rng(seed, Stage::Toolbox))
}

pub fn build_basis(k: &KField, seed: u64, progress: &mut dyn FnMut(Progress)) -> Result<ChangeOfBasis> {
    sharp_flat::sharp_vs_flat(k, &mut stage_rng(seed, Stage::Basis), progress)
}

/// All stages in one go.
pub fn build_context(p: u64, seed: u64, word_pairs: usize) -> Result<PipelineContext> {
    let group = build_group(p, seed)?;
    let setup = build_setup(&group, seed)?;
    let tb = Arc::new(build_toolbox(&group, setup, seed, word_pairs)?);
    let k = KField::new(tb.clone())?;
    let cob = build_basis(&k, seed, &mut |_| {})?;
    PipelineContext::new(tb, k, cob)
}
