use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{Board, Layout};
use crate::{Error, Result};

/// Scripted defender family labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FamilyTag {
    Uniform,
    Edge,
    Cluster,
    Spread,
    Parity,
    /// Arbitrary feature weights, e.g. produced by a defender trainer.
    Custom,
}

impl FamilyTag {
    pub const SCRIPTED: [FamilyTag; 5] = [
        FamilyTag::Uniform,
        FamilyTag::Edge,
        FamilyTag::Cluster,
        FamilyTag::Spread,
        FamilyTag::Parity,
    ];
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyTag::Uniform => "UNIFORM",
            FamilyTag::Edge => "EDGE",
            FamilyTag::Cluster => "CLUSTER",
            FamilyTag::Spread => "SPREAD",
            FamilyTag::Parity => "PARITY",
            FamilyTag::Custom => "CUSTOM",
        })
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "UNIFORM" => Ok(FamilyTag::Uniform),
            "EDGE" => Ok(FamilyTag::Edge),
            "CLUSTER" => Ok(FamilyTag::Cluster),
            "SPREAD" => Ok(FamilyTag::Spread),
            "PARITY" => Ok(FamilyTag::Parity),
            "CUSTOM" => Ok(FamilyTag::Custom),
            _ => Err(Error::InvalidConfig(format!("unknown defender family `{s}`"))),
        }
    }
}

/// Linear weights on the three layout features. The unnormalized log-weight
/// of a layout is `edge * edge_frac + spread * centroid_spread + parity * even_frac`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub edge: f64,
    pub spread: f64,
    pub parity: f64,
}

impl ScoreWeights {
    pub fn is_zero(&self) -> bool {
        self.edge == 0.0 && self.spread == 0.0 && self.parity == 0.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.edge, self.spread, self.parity]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        ScoreWeights {
            edge: a[0],
            spread: a[1],
            parity: a[2],
        }
    }
}

pub const DEFAULT_EDGE_STRENGTH: f64 = 4.0;
pub const DEFAULT_CLUSTER_STRENGTH: f64 = 1.5;
pub const DEFAULT_SPREAD_STRENGTH: f64 = 1.5;
pub const DEFAULT_PARITY_STRENGTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenderFamily {
    pub tag: FamilyTag,
    pub weights: ScoreWeights,
}

impl DefenderFamily {
    pub fn uniform() -> Self {
        DefenderFamily {
            tag: FamilyTag::Uniform,
            weights: ScoreWeights::default(),
        }
    }

    pub fn edge(alpha: f64) -> Self {
        Self::tagged(
            FamilyTag::Edge,
            ScoreWeights {
                edge: alpha,
                ..Default::default()
            },
        )
    }

    pub fn cluster(beta: f64) -> Self {
        Self::tagged(
            FamilyTag::Cluster,
            ScoreWeights {
                spread: -beta,
                ..Default::default()
            },
        )
    }

    pub fn spread(beta: f64) -> Self {
        Self::tagged(
            FamilyTag::Spread,
            ScoreWeights {
                spread: beta,
                ..Default::default()
            },
        )
    }

    pub fn parity(gamma: f64) -> Self {
        Self::tagged(
            FamilyTag::Parity,
            ScoreWeights {
                parity: gamma,
                ..Default::default()
            },
        )
    }

    pub fn custom(weights: ScoreWeights) -> Self {
        Self::tagged(FamilyTag::Custom, weights)
    }

    fn tagged(tag: FamilyTag, weights: ScoreWeights) -> Self {
        DefenderFamily { tag, weights }
    }

    /// The family with its default strength (or `strength` when given).
    pub fn from_tag(tag: FamilyTag, strength: Option<f64>) -> Result<Self> {
        Ok(match tag {
            FamilyTag::Uniform => Self::uniform(),
            FamilyTag::Edge => Self::edge(strength.unwrap_or(DEFAULT_EDGE_STRENGTH)),
            FamilyTag::Cluster => Self::cluster(strength.unwrap_or(DEFAULT_CLUSTER_STRENGTH)),
            FamilyTag::Spread => Self::spread(strength.unwrap_or(DEFAULT_SPREAD_STRENGTH)),
            FamilyTag::Parity => Self::parity(strength.unwrap_or(DEFAULT_PARITY_STRENGTH)),
            FamilyTag::Custom => return Err(Error::InvalidConfig("CUSTOM families need explicit weights".into())),
        })
    }

    pub fn score(&self, board: &Board, layout: &Layout) -> f64 {
        if self.weights.is_zero() {
            return 0.0;
        }
        let f = LayoutFeatures::of(board, layout);
        self.weights.edge * f.edge_frac + self.weights.spread * f.centroid_spread + self.weights.parity * f.even_frac
    }
}

impl fmt::Display for DefenderFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.weights;
        match self.tag {
            FamilyTag::Uniform => write!(f, "UNIFORM"),
            FamilyTag::Edge => write!(f, "EDGE(alpha={})", w.edge),
            FamilyTag::Cluster => write!(f, "CLUSTER(beta={})", -w.spread),
            FamilyTag::Spread => write!(f, "SPREAD(beta={})", w.spread),
            FamilyTag::Parity => write!(f, "PARITY(gamma={})", w.parity),
            FamilyTag::Custom => write!(f, "CUSTOM(edge={},spread={},parity={})", w.edge, w.spread, w.parity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutFeatures {
    /// Fraction of occupied cells on the outer ring.
    pub edge_frac: f64,
    /// Mean Euclidean distance between ship centroids over all ship pairs.
    pub centroid_spread: f64,
    /// Fraction of occupied cells with even `row + col`.
    pub even_frac: f64,
}

impl LayoutFeatures {
    pub fn of(board: &Board, layout: &Layout) -> Self {
        let occ = layout.occupied();
        let n = occ.len() as f64;
        let centroids: Vec<(f64, f64)> = layout
            .all_ship_cells()
            .iter()
            .map(|cells| {
                let (mut r, mut c) = (0.0, 0.0);
                for cell in cells.iter() {
                    let (cr, cc) = board.row_col(cell);
                    r += cr as f64;
                    c += cc as f64;
                }
                let k = cells.len() as f64;
                (r / k, c / k)
            })
            .collect();
        let mut total = 0.0;
        let mut pairs = 0usize;
        for i in 0..centroids.len() {
            for j in i + 1..centroids.len() {
                let (dr, dc) = (centroids[i].0 - centroids[j].0, centroids[i].1 - centroids[j].1);
                total += (dr * dr + dc * dc).sqrt();
                pairs += 1;
            }
        }
        LayoutFeatures {
            edge_frac: occ.intersection(board.outer_ring()).len() as f64 / n,
            centroid_spread: if pairs == 0 { 0.0 } else { total / pairs as f64 },
            even_frac: occ.intersection(board.even_cells()).len() as f64 / n,
        }
    }
}
