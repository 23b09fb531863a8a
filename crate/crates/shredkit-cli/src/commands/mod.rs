pub mod analyze;
pub mod classify;
pub mod compare;
pub mod extract_solos;
pub mod train_generate;
pub mod validate;
