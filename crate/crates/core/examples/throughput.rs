use shotspec_core::estimator::{BinAccumulator, DEFAULT_BIN_DT};
use shotspec_core::params::{FeedbackParams, LaserParams};
use shotspec_core::sim::{simulate_into, SimConfig};
use std::time::Instant;

fn main() {
    // Feedback path at acceptance parameters, 1/20 of the duration.
    let laser = LaserParams::new(1.0, 1e4, 0.0);
    let fbl = FeedbackParams::new(9.0);
    let mut cfg = SimConfig::new(1200.0, 1);
    cfg.warmup = 200.0;
    let mut acc = BinAccumulator::new(DEFAULT_BIN_DT, 1000.0).unwrap();
    let t0 = Instant::now();
    let d = simulate_into(&laser, Some(&fbl), &cfg, |t| acc.push(t)).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let events = d.pump_events + d.loss_events;
    println!("fbl: {events} events in {dt:.2}s = {:.1} ns/event, clip {:.4}%", dt/events as f64*1e9, d.clipped_fraction*100.0);

    let laser = LaserParams::new(1.0, 1e4, 0.0);
    let mut acc = BinAccumulator::new(DEFAULT_BIN_DT, 1000.0).unwrap();
    let t0 = Instant::now();
    let d = simulate_into(&laser, None, &cfg, |t| acc.push(t)).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let events = d.pump_events + d.loss_events;
    println!("p=0: {events} events in {dt:.2}s = {:.1} ns/event", dt/events as f64*1e9);

    let laser = LaserParams::new(1.0, 1e4, 1.0);
    let mut acc = BinAccumulator::new(DEFAULT_BIN_DT, 1000.0).unwrap();
    let t0 = Instant::now();
    let d = simulate_into(&laser, None, &cfg, |t| acc.push(t)).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let events = d.pump_events + d.loss_events;
    println!("p=1: {events} events in {dt:.2}s = {:.1} ns/event", dt/events as f64*1e9);
}
