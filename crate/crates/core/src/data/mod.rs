//! Sequence ingestion and serialization, reference-frame normalization,
//! windowing, split handling, and the deterministic synthetic 2-body
//! generator.

mod io;
mod split;
mod synth;
mod window;

pub use io::{load_sequences, load_sequences_from_reader, write_sequences, write_sequences_to_string};
pub use split::{split, SplitConfig};
pub use synth::{synth_generate, SynthStyle};
pub use window::{normalize_pair, window, NormalizeMode, Window};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// One recorded sequence: label metadata plus `[F, bodies*J, 3]` millimeter
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRecord {
    pub id: String,
    pub action: String,
    pub couple: u32,
    pub fps: f64,
    pub frames: Tensor,
}

impl SequenceRecord {
    pub fn frame_count(&self) -> usize {
        self.frames.shape()[0]
    }

    pub fn node_count(&self) -> usize {
        self.frames.shape()[1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.rank() != 3 || self.frames.shape()[2] != 3 {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {}: frames must be [F, nodes, 3], got {:?}",
                    self.id,
                    self.frames.shape()
                ),
            });
        }
        if !(self.fps > 0.0) {
            return Err(Error::Ingestion {
                message: format!("sequence {}: fps must be positive", self.id),
            });
        }
        if !self.frames.all_finite() {
            return Err(Error::Ingestion {
                message: format!("sequence {}: non-finite coordinate", self.id),
            });
        }
        Ok(())
    }
}
