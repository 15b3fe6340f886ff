//! Statement-level analysis of Java-subset sources: parsing, control flow,
//! program dependence graphs, slicing and context-encoded change
//! representations.

pub mod cfg;
mod defuse;
pub mod differ;
pub mod encoder;
mod lexer;
pub mod model;
pub mod parser;
pub mod pdg;
pub mod pipeline;
pub mod slicer;

pub use cfg::{build_cfg, CfgNode, ControlFlowGraph};
pub use defuse::{classify, extract_def_use, DefUse};
pub use differ::{align_versions, lcs_pairs, ChangeSet};
pub use encoder::{
    encode_change, encode_with, token_len, truncate, ContextEncodedRepresentation, EncodeError,
    EncodeMode, EncodedEntry, Marker, Side,
};
pub use model::*;
pub use parser::{parse_file, parse_version, segment_statements, ParseError, ParsedFile};
pub use pdg::{
    build_pdg, control_dependences, data_dependences, DepKind, Edge, ProgramDependenceGraph,
};
pub use pipeline::{analyze_version, CommitAnalysis, VersionAnalysis};
pub use slicer::{slice, Directions, EdgeKinds, Slice, SliceConfig, SliceError};
