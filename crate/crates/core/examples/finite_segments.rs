//! Finite-size key rate for segments of 5, 50 and 200 seconds at 1 MHz.

use rfiqkd::channel::{analytic_observables, ChannelModel, DriftProcess};
use rfiqkd::config::ProtocolConfig;
use rfiqkd::finite::{finite_key_rate_from_observables, FiniteKeyContext};

fn main() -> rfiqkd::Result<()> {
    let cfg = ProtocolConfig::default();
    let beta = DriftProcess::default().beta_initial;
    let segments = [5.0, 50.0, 200.0];
    println!("{:>6} {:>12} {:>12} {:>12}", "km", "5 s", "50 s", "200 s");
    for km in (0..=70).step_by(5) {
        let obs = analytic_observables(&cfg, &ChannelModel::default().with_length(km as f64), beta);
        let mut line = format!("{km:>6}");
        for s in segments {
            let ctx = FiniteKeyContext::for_segment(&cfg, &obs, s, 1e6);
            let r = finite_key_rate_from_observables(&obs, &cfg, &ctx)?;
            line += &format!(" {:>12.4e}", r.rate());
        }
        println!("{line}");
    }
    Ok(())
}
