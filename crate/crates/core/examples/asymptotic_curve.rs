//! Asymptotic key rate per pulse against fiber length at a fixed frame angle.

use rfiqkd::channel::{analytic_observables, ChannelModel, DriftProcess};
use rfiqkd::config::ProtocolConfig;
use rfiqkd::decoy::asymptotic_rate_from_observables;

fn main() -> rfiqkd::Result<()> {
    let cfg = ProtocolConfig::default();
    let beta = DriftProcess::default().beta_initial;
    println!("{:>6} {:>12} {:>10} {:>10}", "km", "R", "y1_lower", "c1_lower");
    for km in (0..=80).step_by(10) {
        let model = ChannelModel::default().with_length(km as f64);
        let report = asymptotic_rate_from_observables(&analytic_observables(&cfg, &model, beta), &cfg)?;
        let (y1, c1) = report.bounds.as_ref().map_or((0.0, 0.0), |b| (b.y1_lower, b.c1_lower));
        println!("{km:>6} {:>12.4e} {y1:>10.5} {c1:>10.5}", report.rate);
    }
    Ok(())
}
