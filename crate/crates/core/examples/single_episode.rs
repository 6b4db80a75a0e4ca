//! Run one episode with the nominal robot and default gait and print the
//! metrics. Pass `quantized` to use the sensor path.

use gantry_hopper::config::RunConfig;
use gantry_hopper::sim::{run_episode, summarize, SensorMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::default();
    for arg in std::env::args().skip(1) {
        if arg == "quantized" {
            config.sim.sensor_mode = SensorMode::Quantized;
        } else {
            config = config.with_overrides(&[arg])?;
        }
    }
    let log = run_episode(&config)?;
    let m = summarize(&log);
    println!("status            {:?}", m.status);
    println!(
        "hop cycles        {} ({} consecutive)",
        m.hops, m.max_consecutive_hops
    );
    println!("speed             {:.3} m/s", m.speed);
    println!("mean stance       {:.3} s", m.mean_stance);
    println!("mean flight       {:.3} s", m.mean_flight);
    println!("apex hip height   {:.3} m", m.apex_height);
    println!("cost of transport {:.2}", m.cost_of_transport);
    println!("saturated samples {}", m.saturated_samples);
    Ok(())
}
