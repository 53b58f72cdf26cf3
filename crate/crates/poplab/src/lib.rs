//! Standard-library companion to `poplab-core`: edge-list files, the
//! graph spec mini-language, JSON/CSV run records, experiment drivers and
//! the pieces behind the `poplab` command-line tool.

pub mod edgelist;
pub mod experiment;
pub mod graphspec;
pub mod record;
pub mod verify;
pub mod walk;

pub use poplab_core;
