pub mod catms;
pub mod gde;
pub mod modelgen;
pub mod parsekit;
pub mod session;
pub mod strategies;
