//! Standard-library companion to `sobomark-core`: file formats, attack
//! simulators, synthetic covers, batch evaluation, and the CLI.

pub mod attacks;
pub mod cli;
pub mod imgio;
pub mod keyfile;
pub mod presets;
pub mod report;
pub mod testimage;
