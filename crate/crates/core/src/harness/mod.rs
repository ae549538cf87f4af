//! Evaluation protocol, λ sweeps, split audits and report output.

mod audit;
mod emit;
mod protocol;
mod report;
mod sweep;

pub use audit::{audit_split, AuditOptions, AuditReport, DEFAULT_AUDIT_MARGIN};
pub use emit::{curve_svg, emit_curve, emit_reports, format_table, parse_csv, to_csv, write_text, ReportFormat, CSV_COLUMNS};
pub use protocol::{
    build_predictor, carve_validation, inverted_sampler, run_protocol, PredictorSpec, ProtocolOptions, DEFAULT_VAL_SIZE,
};
pub use report::{evaluate, Cell, EvalContext, EvalMode, EvalReport};
pub use sweep::{lambda_sweep, validate_grid, SweepCurve, SweepPoint, DEFAULT_LAMBDA_GRID};
