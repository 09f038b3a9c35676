pub mod seq;
pub mod pg;
