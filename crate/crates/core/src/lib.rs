pub mod combin;
pub mod error;
pub mod esp;
pub mod circuit;
pub mod states;
