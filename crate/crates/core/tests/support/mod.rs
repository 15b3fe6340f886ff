pub mod fixtures;
pub mod pdg_oracle;
