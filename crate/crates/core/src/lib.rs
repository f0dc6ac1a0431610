//! Adversarial hidden-layout Battleship.
//!
//! A defender picks a distribution over legal ship layouts once, before the
//! episode starts; the attacker then fires under partial observability and
//! pays one unit per shot until every ship is sunk. This crate provides the
//! exact environment, scripted defender and attacker families, an exact
//! minimax solver for small boards, the evaluation and certification
//! statistics, and the two self-play harnesses built on top of them.

pub mod attackers;
pub mod board;
pub mod defenders;
pub mod error;
pub mod evaluation;
pub mod game;
pub mod seed;
pub mod selfplay;

pub use error::{Error, Result};
