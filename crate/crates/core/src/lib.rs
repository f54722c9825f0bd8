//! Concept flows for timestamped, topic-labeled text.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`ingest`]: load the corpus, tokenize, pick each topic's top-K concepts.
//! 2. [`slicing`]: cut time into uniform base slices, then merge them between
//!    boundaries where concept occurrence rates change significantly.
//! 3. [`features`]: per slice, describe each concept by its normalized word
//!    embedding joined with its weighted document-occurrence row.
//! 4. [`projection`]: embed every slice's concepts on a line with a t-SNE
//!    whose cost also pulls concepts toward their previous-slice positions.
//! 5. [`layout`]: stack the frames into flow lines with a spring time axis,
//!    compressed streamlines and grid-searched labels.
//!
//! [`pipeline`] wires the stages together and manages reprojection sessions.

pub mod features;
pub mod ingest;
pub mod layout;
pub mod pipeline;
pub mod projection;
pub mod slicing;
