pub mod circuit;
pub mod traces;
