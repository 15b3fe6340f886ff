//! Commit corpora: mining and filtering, text-similarity metrics and a
//! retrieval baseline for message generation.
pub mod metrics;
pub mod miner;
pub mod retrieval;

pub use metrics::{
    bleu4, meteor, rouge_l, score_pair, tokenize, MessageTokens, MetricReport, PairScores,
};
pub use miner::{
    build_record, clean_message, filter_commit, mine_repo, read_corpus, read_corpus_file,
    read_repo_list, write_corpus, CommitRecord, CorpusError, CorpusStats, DropReason, FileVersions,
    FilterConfig, MineError, MinedRepo, RawCommit, ReadCorpus, Verdict,
};
pub use retrieval::{
    cosine, evaluate, nearest, run_experiment, split_by_repo, vectorize, BowVector, Evaluation,
    Example, ExperimentConfig, ReportRow, ReportSections, ReportTable, RetrievalError, Retriever,
    SplitRatios,
};
