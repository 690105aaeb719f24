pub mod dsl;
pub mod export;
pub mod forms;
pub mod gallery;
pub mod grid;
pub mod growth;
pub mod kv;
pub mod pipeline;
pub mod registry;
pub mod reconstruct;
pub mod reparam;
pub mod verify;
