//! Dressed-atom multiphoton spectroscopy of degenerate two-level atoms.
//!
//! A resonant π-polarized coupling field dresses the Zeeman sublevels of an
//! `F_g → F_e` transition. A weak, linearly polarized probe then reveals one-
//! and two-photon transitions between bare survivor states and dressed
//! doublets. [`pathway`] predicts those resonances from the dressed picture;
//! [`obe`] computes the steady-state probe absorption from the full Lindblad
//! master equation and serves as the numerical reference.

pub mod angular;
pub mod config;
pub mod dressed;
pub mod error;
pub mod liouville;
pub mod obe;
pub mod par;
pub mod pathway;
pub mod pumping;
pub mod run;
pub mod system;
pub mod trace;

pub use error::{DamsError, Result};
