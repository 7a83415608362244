//! Dense f64 tensors, a seeded counter-based generator, and a reverse-mode
//! tape over the fixed operator set the forecasting model uses.

pub mod gradcheck;
pub mod rng;
pub mod tape;
pub mod tensor;

pub use gradcheck::finite_difference_check;
pub use rng::Rng;
pub use tape::{Activation, Gradients, NodeId, Tape};
pub use tensor::{matmul_batched, Tensor};
