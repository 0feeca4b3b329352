use std::path::Path;

use serde::{Deserialize, Serialize};
use z2harm::leafspace::LeafGraph;

use crate::error::CliError;
use crate::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    Json,
    Dot,
}

pub fn export_graph(graph: &LeafGraph, format: GraphFormat, path: &Path) -> Result<(), CliError> {
    match format {
        GraphFormat::Json => json::write(path, graph),
        GraphFormat::Dot => std::fs::write(path, graph.to_dot()).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
    }
}

pub fn import_graph(path: &Path) -> Result<LeafGraph, CliError> {
    json::read(path)
}
