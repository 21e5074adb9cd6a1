//! Distribution of X/Y error rates over short segments with random frame
//! angles, printed as a coarse text histogram.

use rfiqkd::harness::{evaluate_histogram, HistogramSettings, Mode, RunConfig};

fn main() -> rfiqkd::Result<()> {
    let config = RunConfig {
        mode: Mode::Mc,
        histogram: HistogramSettings {
            segments: 500,
            segment_pulses: 100_000,
            ..HistogramSettings::default()
        },
        ..RunConfig::default()
    };
    let h = evaluate_histogram(&config)?;
    println!("{} error rates, {} segments skipped", h.total(), h.skipped);
    for (k, counts) in h.counts.chunks(10).enumerate() {
        let n: u64 = counts.iter().sum();
        println!("{:.2}-{:.2} {:>5} {}", k as f64 * 0.05, (k + 1) as f64 * 0.05, n, "#".repeat((n / 10) as usize));
    }
    Ok(())
}
