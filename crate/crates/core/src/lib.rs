pub mod bundle;
pub mod cli;
pub mod embed;
pub mod exact;
pub mod test_config;
pub mod toric;
