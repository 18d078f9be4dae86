//! Face-milling surface topography simulation.
//!
//! A circular-insert cutter is swept through a z-map height field by chaining
//! homogeneous transforms (edge → tool → spindle → workpiece). The resulting
//! field can be scored with areal roughness parameters, written to disk, and
//! generated in bulk over Latin-hypercube parameter samples.

pub mod config;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod export;
pub mod grid;
pub mod kinematics;
pub mod roughness;
pub mod surface_io;
pub mod tool;

pub use config::{parse_config, ConfigDocument};
pub use engine::{simulate, simulate_reference, SimulationConfig, SimulationResult};
pub use error::{Error, FormatError, Result};
pub use grid::{GridSpec, HeightField};
pub use surface_io::{decode_surface, encode_surface, read_surface, write_surface};
