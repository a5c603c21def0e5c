//! Token alignment, pooled error rates and group bias measures.

mod align;
mod bias;
mod rate;
mod table;
mod tokenize;

pub use align::{align, edit_distance, AlignOp, AlignmentResult, OpKind};
pub use bias::{
    bias_report, individual_bias, overall_bias, BiasReport, GroupBias, StyleBias, StyleRates,
};
pub use rate::{corpus_error_rate, group_scores, ErrorCounts, GroupScore, ScoredPair};
pub use table::{
    parse_wer_table, read_hypotheses, read_wer_table, render_bias_csv, render_bias_text,
    render_group_scores_csv, parse_group_scores_csv, LabeledReport, WerTable, WerTableRow,
};
pub use tokenize::{tokenize, TokenMode, TokenizeOptions};
