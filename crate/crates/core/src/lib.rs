pub mod amalgam;
pub mod cli;
pub mod condition;
pub mod dot;
pub mod error;
pub mod gen;
pub mod io;
pub mod order;
pub mod sim;
pub mod space;
pub mod symsys;
pub mod violation;

pub use error::{Error, Result};
pub use order::{BarrierMap, HeightedOrder, Point, Universe};
pub use violation::{Outcome, Violation};
