pub mod metrics;
pub mod report;

pub use metrics::{
    alignment_rate, histogram_csv, histogram_gnuplot, pitch_histogram, posterior_accuracy,
    style_divergence, tonality_score,
};
pub use report::MetricReport;
