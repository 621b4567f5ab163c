//! Random codebooks, pretty-good-measurement decoders, tender instruments
//! and exact evaluation of the sequential decoder.

mod codebook;
mod measure;
mod povm;
mod sequential;
mod word;

pub use codebook::{
    codebook_seed, codebook_sizes, sample_codebook, split_seed, trial_seed, Codebook,
};
pub use measure::{
    disturbance_check, identification_check, pgm_decoder, tender_apply, Branch, DisturbanceCheck,
    IdentificationCheck, TenderInstrument, PGM_SUPPORT_FLOOR, SQRT_RECONSTRUCTION_TOL,
};
pub use povm::{Outcome, Povm, POVM_PSD_TOL, POVM_SUM_TOL};
pub use sequential::{
    average_error, sequential_decode_exact, simulate_draw, ChainOutcome, Evaluation, SeedRecord,
    SequentialDecoder, SimReport, SimulationSpec, StageReport,
};
pub use word::{averaged_word_state, AveragingMode};
