//! Single-photon correlations under a turning reference frame. C stays at
//! 2V² whatever the angle; the key rate at a fixed distance does not.

use rfiqkd::channel::{analytic_observables, ChannelModel};
use rfiqkd::config::ProtocolConfig;
use rfiqkd::correlation::{quality_parameter, rotated_expectations};
use rfiqkd::decoy::asymptotic_rate_from_observables;

fn main() -> rfiqkd::Result<()> {
    let cfg = ProtocolConfig::default();
    let model = ChannelModel::default().with_length(25.0);
    println!("{:>6} {:>8} {:>8} {:>8} {:>12}", "beta", "<XX>", "<XY>", "C", "R(25 km)");
    for k in 0..=16 {
        let beta = k as f64 * std::f64::consts::FRAC_PI_8;
        let c = rotated_expectations(beta, model.visibility)?;
        let r = asymptotic_rate_from_observables(&analytic_observables(&cfg, &model, beta), &cfg)?.rate;
        println!("{beta:>6.3} {:>8.4} {:>8.4} {:>8.5} {r:>12.4e}", c.exp_xx, c.exp_xy, quality_parameter(&c));
    }
    Ok(())
}
