//! Simulation of a converter-free OAM mode sorter.
//!
//! A binary tree of modified Mach-Zehnder interferometers separates light by
//! orbital angular momentum `l`: the stage at level `n` rotates one arm by
//! `pi/2^n` (phase `l pi/2^n`) and shifts the other by a tunable `k pi/2^n`,
//! so each stage reads off one binary digit of `l - k`. FRFT stages appended
//! after the OAM tree do the same for the mode order `2p + |l|`.
//!
//! Two engines are provided:
//!
//! * the mode-space engine ([`stage`], [`tree`]) acts exactly on mode labels;
//! * the grid engine ([`field`]) rotates and interferes sampled fields and
//!   projects the result back onto the LG basis.
//!
//! [`netlist`] reads and writes the line-oriented network description used by
//! the command-line tool.

pub mod elements;
pub mod error;
pub mod field;
pub mod mode_basis;
pub mod netlist;
pub mod stage;
pub mod tree;

pub use elements::{
    beamsplitter, frft_phase, phase_shifter_phase, rotator_phase, FrftSpec, PhaseShifterSpec,
    RotatorSpec,
};
pub use error::{Error, Result};
pub use field::{
    apply_phase, decompose, rotate_field, simulate_stage_field, simulate_tree_field, split_combine,
    Decomposition, Field,
};
pub use mode_basis::{mode_order, overlap, sample_lg, BeamGeometry, ModeIndex};
pub use netlist::{parse_netlist, Netlist, NetlistError};
pub use stage::{branch_predicate, stage_transfer, Port, StageKind, StageOutput, StageSpec};
pub use tree::{
    append_frft_sorter, build_tree, route, simulate_tree, PortDistribution, PortLabel, Sorter,
    SorterDistribution, SorterTree,
};
