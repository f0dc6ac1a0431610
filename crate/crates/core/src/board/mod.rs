//! The deterministic Battleship environment.

mod cells;
mod config;
mod episode;
mod layout;
mod state;

pub use cells::{CellSet, MAX_CELLS};
pub use config::{Board, BoardConfig, Orientation, Placement, ShipPlacement, DEFAULT_ENUMERATION_GUARD};
pub use episode::{rollout, write_shot_log_csv, EpisodeResult};
pub use layout::{count_layouts, enumerate_layouts, sample_uniform_layout, Layout, LayoutSet};
pub use state::{Channel, InfoKey, Observation, ObservationTensor, PublicState, Shot, SinkRecord};
