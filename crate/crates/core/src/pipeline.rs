//! Whole-commit analysis: parse both versions, build their graphs, align
//! them and encode the change.

use crate::cfg::ControlFlowGraph;
use crate::differ::{align_versions, ChangeSet};
use crate::encoder::{encode_with, ContextEncodedRepresentation, EncodeError, EncodeMode, Side};
use crate::model::{Diagnostic, SourceVersion, VersionLabel};
use crate::parser::parse_version;
use crate::pdg::{build_cfgs, build_pdg_from, ProgramDependenceGraph};

#[derive(Clone, Debug)]
pub struct VersionAnalysis {
    pub version: SourceVersion,
    pub cfgs: Vec<ControlFlowGraph>,
    pub pdg: ProgramDependenceGraph,
    pub diagnostics: Vec<Diagnostic>,
}

impl VersionAnalysis {
    pub fn side(&self) -> Side<'_> {
        Side {
            version: &self.version,
            pdg: &self.pdg,
        }
    }
}

/// `files` holds (path, text) pairs.
pub fn analyze_version(label: VersionLabel, files: &[(String, String)]) -> VersionAnalysis {
    let (version, mut diagnostics) = parse_version(label, files);
    let cfgs = build_cfgs(&version);
    for (cfg, unit) in cfgs.iter().zip(&version.methods) {
        let line = version.statements[unit.entry()].line_span.0;
        diagnostics.extend(cfg.diagnostics.iter().map(|m| Diagnostic {
            path: unit.file.clone(),
            line,
            message: m.clone(),
        }));
    }
    let pdg = build_pdg_from(&version, &cfgs);
    VersionAnalysis {
        version,
        cfgs,
        pdg,
        diagnostics,
    }
}

#[derive(Clone, Debug)]
pub struct CommitAnalysis {
    pub before: VersionAnalysis,
    pub after: VersionAnalysis,
    pub changes: ChangeSet,
}

impl CommitAnalysis {
    /// `files` holds (path, before text, after text); an empty text stands
    /// for a file absent from that version.
    pub fn new<P, B, A>(files: &[(P, B, A)]) -> Self
    where
        P: AsRef<str>,
        B: AsRef<str>,
        A: AsRef<str>,
    {
        let pick = |f: &dyn Fn(&(P, B, A)) -> &str| -> Vec<(String, String)> {
            files
                .iter()
                .filter(|t| !f(t).is_empty())
                .map(|t| (t.0.as_ref().to_string(), f(t).to_string()))
                .collect()
        };
        let before = analyze_version(VersionLabel::Before, &pick(&|t| t.1.as_ref()));
        let after = analyze_version(VersionLabel::After, &pick(&|t| t.2.as_ref()));
        let changes = align_versions(&before.version, &after.version);
        CommitAnalysis {
            before,
            after,
            changes,
        }
    }

    pub fn diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.before
            .diagnostics
            .iter()
            .chain(&self.after.diagnostics)
    }

    pub fn encode(
        &self,
        mode: EncodeMode,
        budget: usize,
    ) -> Result<ContextEncodedRepresentation, EncodeError> {
        encode_with(
            self.before.side(),
            self.after.side(),
            &self.changes,
            mode,
            budget,
        )
    }
}
