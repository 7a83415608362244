pub mod ablate;
pub mod dct_check;
pub mod eval;
pub mod init_study;
pub mod synth;
pub mod train;
