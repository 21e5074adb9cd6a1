//! Decoy bounds against the simulator's true single-photon values.

use rfiqkd::channel::{ChannelModel, DriftProcess};
use rfiqkd::config::ProtocolConfig;
use rfiqkd::harness::validate_point;

fn main() -> rfiqkd::Result<()> {
    let cfg = ProtocolConfig::default().with_total_pulses(5_000_000);
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8}", "km", "y1_lower", "y1_true", "e1zz_up", "e1zz_true", "c1_low", "c1_true");
    for km in [0.0, 10.0, 25.0] {
        let c = validate_point(&cfg, &ChannelModel::default().with_length(km), &DriftProcess::default(), 11)?;
        if !c.checked() {
            println!("{km:>4} {:?}", c.status);
            continue;
        }
        println!(
            "{km:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>8.4} {:>8.4}",
            c.y1_lower, c.y1_true, c.e1zz_upper, c.e1zz_true, c.c1_lower, c.c1_true
        );
    }
    Ok(())
}
