//! Depth- and fidelity-optimal mapping of quantum circuits onto rectangular
//! qubit grids whose rows can be shifted horizontally, as in Rydberg atom
//! arrays. Circuits are routed with swap gates and row displacements; the
//! combined problem is encoded as linear integer constraints and solved by an
//! external SMT solver with iterative deepening over the horizon.

pub mod bench;
pub mod circuit;
pub mod displacement;
pub mod error;
pub mod mapping;
pub mod model;
pub mod oracle;
pub mod schedule;
pub mod solver;
pub mod topology;
pub mod verify;

pub use circuit::{parse_circuit, GateOp, QuantumCircuit};
pub use error::{Error, Result};
pub use mapping::MappingResult;
pub use schedule::{Objective, Placement, TechnologyParams};
pub use solver::{map_circuit, SolveConfig};
pub use topology::{build_grid, extend_topology, grid_for_circuit, Edge, GridTopology};
