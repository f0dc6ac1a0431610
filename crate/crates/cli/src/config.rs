use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use latent_battleship::attackers::{AttackerSpec, ParticleSettings, ProbMapSettings};
use latent_battleship::board::LayoutSet;
use latent_battleship::board::{Board, BoardConfig};
use latent_battleship::defenders::{
    DefenderFamily, ExplicitDistribution, FamilyTag, LatentDistribution, SamplerSettings, ScoredDistribution,
};
use latent_battleship::game::SolverSettings;
use latent_battleship::selfplay::{FamilyBox, ReferenceAttackerConfig, Stage1Config, Stage2Config};

use crate::error::CliError;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "LATENT_BATTLESHIP_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed for evaluation and shift-metric sampling.
    pub seed: u64,
    /// Worker threads for parallel episodes; 0 uses every core.
    pub workers: usize,
    pub output_dir: PathBuf,
    pub board: BoardConfig,
    pub defenders: DefendersBlock,
    pub attacker: AttackerBlock,
    pub eval: EvalBlock,
    pub solver: SolverSettings,
    pub polytope: PolytopeBlock,
    pub shift: ShiftBlock,
    pub pareto: ParetoBlock,
    pub stage1: Stage1Config,
    pub stage2: Stage2Config,
    pub attacker_trainer: ReferenceAttackerConfig,
    pub defender_trainer: DefenderTrainerBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            workers: 0,
            output_dir: PathBuf::from("out"),
            board: BoardConfig::standard(),
            defenders: DefendersBlock::default(),
            attacker: AttackerBlock::default(),
            eval: EvalBlock::default(),
            solver: SolverSettings::default(),
            polytope: PolytopeBlock::default(),
            shift: ShiftBlock::default(),
            pareto: ParetoBlock::default(),
            stage1: Stage1Config::default(),
            stage2: Stage2Config::default(),
            attacker_trainer: ReferenceAttackerConfig::default(),
            defender_trainer: DefenderTrainerBlock::default(),
        }
    }
}

/// A scripted family by name with an optional strength override, or an
/// explicit distribution given as nonnegative masses over the board's
/// layouts in canonical enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRef {
    #[serde(default = "uniform_tag")]
    pub family: FamilyTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

fn uniform_tag() -> FamilyTag {
    FamilyTag::Uniform
}

impl FamilyRef {
    pub fn new(family: FamilyTag) -> Self {
        FamilyRef {
            family,
            strength: None,
            masses: None,
        }
    }

    pub fn label(&self) -> String {
        match &self.masses {
            Some(_) => "explicit".into(),
            None => self.family.to_string(),
        }
    }

    pub fn family(&self) -> Result<DefenderFamily, CliError> {
        DefenderFamily::from_tag(self.family, self.strength).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefendersBlock {
    pub nominal: FamilyRef,
    pub stress: FamilyRef,
    /// Distributions covered by `eval`.
    pub evaluate: Vec<FamilyRef>,
    pub sampler: SamplerSettings,
}

impl Default for DefendersBlock {
    fn default() -> Self {
        DefendersBlock {
            nominal: FamilyRef::new(FamilyTag::Uniform),
            stress: FamilyRef::new(FamilyTag::Spread),
            evaluate: FamilyTag::SCRIPTED.iter().map(|&t| FamilyRef::new(t)).collect(),
            sampler: SamplerSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackerKind {
    Random,
    #[default]
    Probmap,
    Particle,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackerBlock {
    pub kind: AttackerKind,
    pub probmap: ProbMapSettings,
    pub particle: ParticleSettings,
    /// Firing order for `kind = "fixed"`.
    pub order: Vec<usize>,
}

impl Default for AttackerBlock {
    fn default() -> Self {
        AttackerBlock {
            kind: AttackerKind::Probmap,
            probmap: ProbMapSettings::default(),
            particle: ParticleSettings::default(),
            order: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalBlock {
    pub episodes: usize,
    /// Confidence level for reported radii.
    pub delta: f64,
}

impl Default for EvalBlock {
    fn default() -> Self {
        EvalBlock {
            episodes: 500,
            delta: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolytopeKind {
    /// Every distribution over layouts.
    #[default]
    Simplex,
    /// Convex hull of the listed scripted families.
    Families,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolytopeBlock {
    pub kind: PolytopeKind,
    pub families: Vec<FamilyRef>,
}

impl Default for PolytopeBlock {
    fn default() -> Self {
        PolytopeBlock {
            kind: PolytopeKind::Simplex,
            families: FamilyTag::SCRIPTED.iter().map(|&t| FamilyRef::new(t)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftBlock {
    pub samples: usize,
    pub families: Vec<FamilyRef>,
}

impl Default for ShiftBlock {
    fn default() -> Self {
        ShiftBlock {
            samples: 20_000,
            families: FamilyTag::SCRIPTED.iter().map(|&t| FamilyRef::new(t)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParetoBlock {
    pub lambdas: Vec<f64>,
}

impl Default for ParetoBlock {
    fn default() -> Self {
        ParetoBlock {
            lambdas: (0..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefenderSpaceKind {
    /// Exact best response over the configured polytope.
    Polytope,
    /// Hill-climb over family feature weights.
    #[default]
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefenderTrainerBlock {
    pub space: DefenderSpaceKind,
    pub family: FamilyBox,
}

impl Default for DefenderTrainerBlock {
    fn default() -> Self {
        DefenderTrainerBlock {
            space: DefenderSpaceKind::Family,
            family: FamilyBox::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &key_hint(&e, text)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let config = |e: latent_battleship::Error| CliError::Config(e.to_string());
        self.board.validate().map_err(config)?;
        self.stage1.validate().map_err(config)?;
        self.stage2.validate().map_err(config)?;
        if self.eval.episodes == 0 {
            return Err(CliError::Config("eval.episodes: must be at least 1".into()));
        }
        if !(self.eval.delta > 0.0 && self.eval.delta < 1.0) {
            return Err(CliError::Config(format!(
                "eval.delta: {} is outside (0, 1)",
                self.eval.delta
            )));
        }
        if !(self.solver.gap_tol >= 0.0) || self.solver.max_iters == 0 {
            return Err(CliError::Config(
                "solver: gap_tol must be >= 0 and max_iters >= 1".into(),
            ));
        }
        if self.attacker.kind == AttackerKind::Fixed && self.attacker.order.is_empty() {
            return Err(CliError::Config(
                "attacker.order: required when kind = \"fixed\"".into(),
            ));
        }
        if let Some(l) = self.pareto.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(CliError::Config(format!("pareto.lambdas: {l} is outside [0, 1]")));
        }
        if self.shift.samples < 100 {
            return Err(CliError::Config("shift.samples: must be at least 100".into()));
        }
        for r in self
            .defenders
            .evaluate
            .iter()
            .chain([&self.defenders.nominal, &self.defenders.stress])
            .chain(&self.polytope.families)
            .chain(&self.shift.families)
        {
            r.family()?;
        }
        Ok(())
    }

    pub fn board(&self) -> Result<Arc<Board>, CliError> {
        Ok(Board::new(self.board.clone())?)
    }

    pub fn attacker(&self) -> AttackerSpec {
        match self.attacker.kind {
            AttackerKind::Random => AttackerSpec::Random,
            AttackerKind::Probmap => AttackerSpec::ProbMap(self.attacker.probmap),
            AttackerKind::Particle => AttackerSpec::Particle(self.attacker.particle),
            AttackerKind::Fixed => AttackerSpec::Fixed(self.attacker.order.clone()),
        }
    }

    pub fn distribution(&self, board: &Arc<Board>, r: &FamilyRef) -> Result<LatentDistribution, CliError> {
        if r.masses.is_some() {
            let universe = LayoutSet::shared(board, board.config().enumeration_guard)
                .ok_or_else(|| CliError::Config("masses: explicit distributions need an enumerable board".into()))?;
            return Ok(LatentDistribution::Explicit(self.explicit(&universe, r)?));
        }
        let family = r.family()?;
        let mut scored = ScoredDistribution::new(Arc::clone(board), family);
        scored.sampler = self.defenders.sampler;
        Ok(LatentDistribution::Scored(scored))
    }

    pub fn explicit(&self, universe: &Arc<LayoutSet>, r: &FamilyRef) -> Result<ExplicitDistribution, CliError> {
        match &r.masses {
            Some(m) => ExplicitDistribution::from_masses(Arc::clone(universe), m.clone())
                .map_err(|e| CliError::Config(format!("masses: {e}"))),
            None => Ok(ExplicitDistribution::from_family(Arc::clone(universe), &r.family()?)),
        }
    }
}

/// Appends the offending line, which names the key, to a parse error.
fn key_hint(e: &toml::de::Error, text: &str) -> String {
    match e.span() {
        Some(span) => {
            let line_no = text[..span.start].matches('\n').count() + 1;
            let line = text.lines().nth(line_no - 1).unwrap_or("").trim();
            format!(" (line {line_no}: `{line}`)")
        }
        None => String::new(),
    }
}
