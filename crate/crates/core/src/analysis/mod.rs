//! Factorization constants, collapse certificates, lower bounds and a
//! distortion search.

mod baudier;
mod bound;
mod certificates;
mod report;
mod search;

pub use baudier::{baudier_check_exhaustive, baudier_check_sampled, BaudierCheck};
pub use bound::{delta_scale, lower_bound_solve};
pub use certificates::{
    check_two_sided, collapse_certificate, diamond_collapse_certificate, laakso_collapse_certificate,
    midpoint_selector, tree_collapse_certificate, CollapseCertificate, MidpointChoice, Pick,
    CERTIFICATE_RTOL,
};
pub use report::{
    factorization_report, factorization_report_with, pair_ratios, FactorizationReport, ReportOptions,
    ScanMode, DEFAULT_SAMPLE_SIZE, DEFAULT_SAMPLE_THRESHOLD,
};
pub use search::{distortion_search, SearchResult};
