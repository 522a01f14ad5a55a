pub mod error;
pub mod eval;
pub mod cli;
pub mod corpus;
pub mod decode;
pub mod model;
pub mod numcore;
pub mod training;
