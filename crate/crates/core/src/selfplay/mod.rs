//! Self-play harnesses: single-attacker training under a fixed regime and
//! restricted iterative best response between attacker and defender, with
//! pluggable trainers and per-generation diagnostics.

mod stage1;
mod stage2;
mod trainers;

pub use stage1::{run_stage1, Block, Regime, Stage1Config, Stage1Outcome, Stage1Row, STAGE1_CSV_HEADER};
pub use stage2::{
    population, run_stage2, write_generation_csv, GenerationLog, PopulationDiagnostics, Stage2Config, Stage2Outcome,
    GENERATION_CSV_HEADER, POPULATION_LAYOUT_LIMIT,
};
pub use trainers::{
    reference_attacker_trainer, reference_defender_trainer, AttackerTrainer, AttackerTrainerMode, DefenderResponse,
    DefenderSpace, DefenderTrainer, FamilyBox, FixedDefender, IdentityTrainer, ReferenceAttacker,
    ReferenceAttackerConfig, ReferenceDefender,
};
