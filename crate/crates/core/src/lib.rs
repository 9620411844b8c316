pub mod engine;
pub mod lean;
pub mod llm;
pub mod rewrite;
pub mod verify;
pub mod pipeline;
