pub mod git_fixture;
pub mod metric_oracle;
