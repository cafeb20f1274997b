//! Event-level Monte Carlo of pump, cavity loss, photodetection and negative
//! feedback.
//!
//! The saturated-regime picture is a birth-death process on the intracavity
//! photon number: every pump event adds one photon, losses fire at the
//! instantaneous rate `kappa * u`, and each lost photon is a detection with
//! probability `detector_efficiency`. Pump regularity is realized as a gamma
//! renewal process whose inter-event intervals have squared coefficient of
//! variation `1 - p`, which reproduces the closed-form spectra exactly for
//! Poissonian (`p = 0`) and perfectly regular (`p = 1`) pumps throughout the
//! analysis band, and their low-frequency behaviour in between. Pump noise
//! with negative effective variance (`p < 0`) has no event-level realization
//! and stays engine-only.
//!
//! With feedback, the detection train drives a single-pole low-pass filter
//! and the pump rate follows `R(t) = R0 * max(0, 1 - lambda*(i(t) - i_ref)/i_ref)`.
//! Pump events are scheduled through time rescaling: a unit-mean renewal
//! interval is drawn in operational time and consumed by integrating `R(t)`.
//! Between events the filter decays exponentially, so the integral has a
//! closed form on every substep and the only approximation left is the
//! clipping bookkeeping at the substep boundaries; `rate_integration_step`
//! caps the substep length. Clipped time is monitored and reported because a
//! clipped loop is outside the linear feedback model.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result};
use crate::math;
use crate::params::{FeedbackParams, LaserParams};

/// The deterministic RNG used by every stochastic path in this crate.
pub type SimRng = rand_xoshiro::Xoshiro256PlusPlus;

/// Simulation window and numerical knobs. Times are in the same unit as the
/// physical rates (1/kappa when kappa = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total simulated time, including the warmup.
    pub duration: f64,
    /// RNG seed; identical configuration and seed reproduce the event train
    /// byte for byte.
    pub seed: u64,
    /// Initial interval discarded before events are emitted.
    pub warmup: f64,
    /// Maximum substep for integrating the time-varying pump rate.
    pub rate_integration_step: f64,
    /// Probability that a lost photon registers at the detector.
    pub detector_efficiency: f64,
}

impl SimConfig {
    pub fn new(duration: f64, seed: u64) -> Self {
        SimConfig {
            duration,
            seed,
            warmup: 100.0,
            rate_integration_step: 0.005,
            detector_efficiency: 1.0,
        }
    }

    pub fn validate(&self, kappa: f64, feedback_active: bool) -> Result<()> {
        if !self.duration.is_finite() || !self.warmup.is_finite() || self.warmup < 0.0 {
            return Err(Error::InvalidParameter {
                name: "warmup",
                value: self.warmup,
                reason: "must be finite and >= 0",
            });
        }
        if self.duration <= self.warmup {
            return Err(Error::InvalidParameter {
                name: "duration",
                value: self.duration,
                reason: "must exceed the warmup",
            });
        }
        if self.rate_integration_step <= 0.0 || !self.rate_integration_step.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate_integration_step",
                value: self.rate_integration_step,
                reason: "must be finite and > 0",
            });
        }
        if feedback_active && self.rate_integration_step > 0.01 / kappa {
            return Err(Error::InvalidParameter {
                name: "rate_integration_step",
                value: self.rate_integration_step,
                reason: "must be <= 0.01/kappa while the feedback loop is active",
            });
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "detector_efficiency",
                value: self.detector_efficiency,
                reason: "must be in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Scenario echo and seed carried by an event train.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub scenario: String,
    pub seed: u64,
}

/// Strictly increasing photodetection timestamps over `[0, t_end]`, counted
/// from the end of the warmup.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTrain {
    times: Vec<f64>,
    t_end: f64,
    meta: TrainMeta,
}

impl EventTrain {
    pub fn new(times: Vec<f64>, t_end: f64, meta: TrainMeta) -> Result<Self> {
        if t_end <= 0.0 || !t_end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_end",
                value: t_end,
                reason: "must be finite and > 0",
            });
        }
        let in_range = times.first().is_none_or(|&t| t >= 0.0)
            && times.last().is_none_or(|&t| t <= t_end);
        if !in_range || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "times",
                value: f64::NAN,
                reason: "must be strictly increasing within [0, t_end]",
            });
        }
        Ok(EventTrain { times, t_end, meta })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Run summary reported alongside the events.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Time-averaged intracavity photon number over the measurement window.
    pub mean_photon_number: f64,
    /// Detections per unit time over the measurement window.
    pub mean_detection_rate: f64,
    /// Fraction of the measurement window during which the pump rate was
    /// clipped at zero.
    pub clipped_fraction: f64,
    pub pump_events: u64,
    pub loss_events: u64,
    pub detections: u64,
    /// Clipped fraction above 1%: the linear feedback model is violated.
    pub clipping_warning: bool,
    /// Steady-state photon number below 1e3: linearization is shaky.
    pub low_photon_warning: bool,
}

impl Diagnostics {
    pub fn warnings(&self) -> Vec<String> {
        let mut msgs = Vec::new();
        if self.clipping_warning {
            msgs.push(alloc::format!(
                "pump rate clipped at zero for {:.2}% of the run: linear feedback model violated",
                self.clipped_fraction * 100.0
            ));
        }
        if self.low_photon_warning {
            msgs.push(String::from(
                "steady-state photon number below 1e3: linearized spectra may not apply",
            ));
        }
        msgs
    }
}

/// Event train plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub train: EventTrain,
    pub diagnostics: Diagnostics,
}

/// Draw one pump inter-event interval for a pump of the given regularity and
/// mean rate: gamma renewal with shape `1/(1-p)`, exponential at `p = 0`,
/// the deterministic interval `1/rate` at `p = 1`.
pub fn sample_pump_interval(pump_regularity: f64, rate: f64, rng: &mut SimRng) -> Result<f64> {
    if rate <= 0.0 || !rate.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rate",
            value: rate,
            reason: "must be finite and > 0",
        });
    }
    let sampler = PumpSampler::new(pump_regularity)?;
    Ok(sampler.unit_interval(rng) / rate)
}

/// Unit-mean renewal interval sampler in operational time.
#[derive(Debug, Clone)]
enum PumpSampler {
    Poisson,
    Regular,
    Renewal(Gamma<f64>),
}

impl PumpSampler {
    fn new(pump_regularity: f64) -> Result<Self> {
        if !pump_regularity.is_finite() || !(0.0..=1.0).contains(&pump_regularity) {
            return Err(Error::PumpRegularityOutOfRange {
                value: pump_regularity,
            });
        }
        Ok(if pump_regularity == 0.0 {
            PumpSampler::Poisson
        } else if pump_regularity == 1.0 {
            PumpSampler::Regular
        } else {
            let shape = 1.0 / (1.0 - pump_regularity);
            let gamma = Gamma::new(shape, 1.0 / shape)
                .expect("gamma parameters are positive by construction");
            PumpSampler::Renewal(gamma)
        })
    }

    #[inline]
    fn unit_interval(&self, rng: &mut SimRng) -> f64 {
        match self {
            PumpSampler::Poisson => rng.sample(Exp1),
            PumpSampler::Regular => 1.0,
            PumpSampler::Renewal(gamma) => gamma.sample(rng),
        }
    }
}

/// What a single stepping call produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Pump,
    Loss { detected: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
struct LoopState {
    efficiency: f64,
    bandwidth: f64,
    /// Mean detected current the loop regulates towards.
    reference: f64,
    /// Low-pass filtered detection rate.
    filtered: f64,
}

/// Stepping kernel: advances the trajectory one event (pump or loss) at a
/// time. Exposed mainly for tests and diagnostics; `simulate` and
/// `simulate_into` drive it over a full run.
#[derive(Debug, Clone)]
pub struct Stepper {
    rng: SimRng,
    pump: PumpSampler,
    pump_rate: f64,
    kappa: f64,
    eta: f64,
    feedback: Option<LoopState>,
    step_cap: f64,
    t: f64,
    u: u64,
    /// Constant-rate pumping: absolute time of the scheduled pump event.
    next_pump: f64,
    /// Feedback: remaining operational time until the next pump event.
    pump_budget: f64,
    clipped_time: f64,
}

impl Stepper {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pump_rate: f64,
        pump_regularity: f64,
        kappa: f64,
        detector_efficiency: f64,
        feedback: Option<&FeedbackParams>,
        rate_integration_step: f64,
        initial_photons: u64,
        seed: u64,
    ) -> Result<Self> {
        if pump_rate <= 0.0 || !pump_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "pump_rate",
                value: pump_rate,
                reason: "must be finite and > 0",
            });
        }
        if kappa < 0.0 || !kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must be finite and >= 0",
            });
        }
        if !(detector_efficiency > 0.0 && detector_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "detector_efficiency",
                value: detector_efficiency,
                reason: "must be in (0, 1]",
            });
        }
        if !(rate_integration_step > 0.0 && rate_integration_step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rate_integration_step",
                value: rate_integration_step,
                reason: "must be > 0",
            });
        }
        let pump = PumpSampler::new(pump_regularity)?;
        let mut rng = SimRng::seed_from_u64(seed);
        let feedback = feedback.map(|f| LoopState {
            efficiency: f.efficiency,
            bandwidth: f.filter_bandwidth,
            reference: detector_efficiency * pump_rate,
            filtered: detector_efficiency * pump_rate,
        });
        let first_budget = pump.unit_interval(&mut rng);
        let next_pump = first_budget / pump_rate;
        Ok(Stepper {
            rng,
            pump,
            pump_rate,
            kappa,
            eta: detector_efficiency,
            feedback,
            step_cap: rate_integration_step,
            t: 0.0,
            u: initial_photons,
            next_pump,
            pump_budget: first_budget,
            clipped_time: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn photon_number(&self) -> u64 {
        self.u
    }

    /// Current low-pass photocurrent estimate, when a loop is closed.
    pub fn filtered_current(&self) -> Option<f64> {
        self.feedback.as_ref().map(|f| f.filtered)
    }

    /// Total time the pump rate has spent clipped at zero so far.
    pub fn clipped_time(&self) -> f64 {
        self.clipped_time
    }

    /// Advance to the next event: the exponential loss race against the
    /// scheduled (possibly rate-modulated) pump event.
    pub fn step(&mut self) -> Event {
        assert!(self.u < 1_000_000_000, "photon number diverged");
        if self.feedback.is_some() {
            self.step_feedback()
        } else {
            self.step_const_rate()
        }
    }

    #[inline]
    fn draw_detected(&mut self) -> bool {
        self.eta >= 1.0 || self.rng.random::<f64>() < self.eta
    }

    fn step_const_rate(&mut self) -> Event {
        let loss_rate = self.kappa * self.u as f64;
        if loss_rate > 0.0 {
            let dt_loss: f64 = self.rng.sample::<f64, _>(Exp1) / loss_rate;
            let t_loss = self.t + dt_loss;
            if t_loss < self.next_pump {
                self.t = t_loss;
                self.u -= 1;
                let detected = self.draw_detected();
                return Event {
                    time: self.t,
                    kind: EventKind::Loss { detected },
                };
            }
        }
        self.t = self.next_pump;
        self.u += 1;
        self.next_pump = self.t + self.pump.unit_interval(&mut self.rng) / self.pump_rate;
        Event {
            time: self.t,
            kind: EventKind::Pump,
        }
    }

    fn step_feedback(&mut self) -> Event {
        let loss_rate = self.kappa * self.u as f64;
        let dt_to_loss = if loss_rate > 0.0 {
            self.rng.sample::<f64, _>(Exp1) / loss_rate
        } else {
            f64::INFINITY
        };
        let t_loss = self.t + dt_to_loss;

        loop {
            let fb = self.feedback.as_ref().expect("feedback stepping requires a loop");
            // R(t + d) = max(0, asym - decay * exp(-bandwidth d)): the filter
            // relaxes between events, so the rate only rises until the next
            // detection kicks it down again.
            let asym = self.pump_rate * (1.0 + fb.efficiency);
            let decay = self.pump_rate * fb.efficiency * fb.filtered / fb.reference;
            let bw = fb.bandwidth;
            let remaining_to_loss = t_loss - self.t;

            if decay > asym * (1.0 + 1e-12) {
                // Clipped right now; R stays exactly zero until the filter
                // output falls back to the clipping threshold. (Exactly at
                // the threshold the unclipped branch takes over, keeping the
                // substep length bounded away from zero.)
                let until_positive = math::ln(decay / asym) / bw;
                let h = until_positive.min(self.step_cap).min(remaining_to_loss);
                self.clipped_time += h;
                self.advance_filtered(h);
                if h == remaining_to_loss {
                    self.t = t_loss;
                    return self.emit_loss();
                }
                self.t += h;
                continue;
            }

            let reaches_loss = remaining_to_loss <= self.step_cap;
            let h = if reaches_loss { remaining_to_loss } else { self.step_cap };
            // Operational time over the substep in closed form.
            let em1 = math::exp_m1(-bw * h);
            let gained = asym * h + decay / bw * em1;
            if gained < self.pump_budget {
                self.pump_budget -= gained;
                self.decay_filtered_by(1.0 + em1);
                if reaches_loss {
                    self.t = t_loss;
                    return self.emit_loss();
                }
                self.t += h;
                continue;
            }

            // The pump fires inside this substep.
            let (d, em1_at_d) =
                solve_operational_time(asym, decay, bw, self.pump_budget, h, gained);
            self.decay_filtered_by(1.0 + em1_at_d);
            self.t += d;
            self.u += 1;
            self.pump_budget = self.pump.unit_interval(&mut self.rng);
            return Event {
                time: self.t,
                kind: EventKind::Pump,
            };
        }
    }

    fn emit_loss(&mut self) -> Event {
        debug_assert!(self.u > 0);
        self.u -= 1;
        let detected = self.draw_detected();
        if detected && let Some(fb) = self.feedback.as_mut() {
            // Unit-area detection impulse through the single-pole filter.
            fb.filtered += fb.bandwidth;
        }
        Event {
            time: self.t,
            kind: EventKind::Loss { detected },
        }
    }

    #[inline]
    fn advance_filtered(&mut self, dt: f64) {
        if let Some(fb) = self.feedback.as_mut() {
            fb.filtered *= math::exp(-fb.bandwidth * dt);
        }
    }

    #[inline]
    fn decay_filtered_by(&mut self, factor: f64) {
        if let Some(fb) = self.feedback.as_mut() {
            fb.filtered *= factor;
        }
    }
}

/// Find `d` in (0, h] where the accumulated operational time
/// `asym*d + decay/bw*(exp(-bw*d) - 1)` reaches `target`. The integrand is
/// non-negative and non-decreasing over the substep, so safeguarded Newton
/// iteration converges in a couple of steps from a linear seed. Returns the
/// root and `exp(-bw*d) - 1` evaluated there, which the caller reuses for the
/// filter decay.
fn solve_operational_time(
    asym: f64,
    decay: f64,
    bw: f64,
    target: f64,
    h: f64,
    gained_over_h: f64,
) -> (f64, f64) {
    let mut lo = 0.0f64;
    let mut hi = h;
    let mut d = h * (target / gained_over_h).min(1.0);
    let mut em1 = 0.0;
    for _ in 0..64 {
        em1 = math::exp_m1(-bw * d);
        let f = asym * d + decay / bw * em1 - target;
        if f >= 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        if f.abs() <= 1e-9 * target.max(1e-300) || (hi - lo) <= 1e-12 * h {
            break;
        }
        let slope = asym - decay * (1.0 + em1);
        let newton = if slope > 0.0 { d - f / slope } else { f64::NAN };
        d = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    (d.min(h), em1)
}

fn scenario_echo(laser: &LaserParams, fbl: Option<&FeedbackParams>, cfg: &SimConfig) -> String {
    match fbl {
        None => alloc::format!(
            "single(p={}, R={}, kappa={}, eta={})",
            laser.pump_regularity, laser.pump_rate, laser.kappa, cfg.detector_efficiency
        ),
        Some(f) => alloc::format!(
            "fbl(p={}, R={}, kappa={}, lambda={}, bandwidth={}, eta={})",
            laser.pump_regularity,
            laser.pump_rate,
            laser.kappa,
            f.efficiency,
            f.filter_bandwidth,
            cfg.detector_efficiency
        ),
    }
}

/// Run a trajectory and hand every post-warmup detection timestamp (counted
/// from the end of the warmup) to `sink`. This is the streaming core of
/// [`simulate`]; binning long runs through it avoids holding hundreds of
/// millions of timestamps in memory.
pub fn simulate_into<F: FnMut(f64)>(
    laser: &LaserParams,
    fbl: Option<&FeedbackParams>,
    cfg: &SimConfig,
    mut sink: F,
) -> Result<Diagnostics> {
    laser.validate()?;
    if !(0.0..=1.0).contains(&laser.pump_regularity) {
        return Err(Error::PumpRegularityOutOfRange {
            value: laser.pump_regularity,
        });
    }
    if let Some(f) = fbl {
        f.validate()?;
    }
    cfg.validate(laser.kappa, fbl.is_some())?;

    let steady_photons = laser.pump_rate / laser.kappa;
    let initial_photons = (steady_photons + 0.5) as u64;
    let mut stepper = Stepper::new(
        laser.pump_rate,
        laser.pump_regularity,
        laser.kappa,
        cfg.detector_efficiency,
        fbl,
        cfg.rate_integration_step,
        initial_photons,
        cfg.seed,
    )?;

    let warmup = cfg.warmup;
    let duration = cfg.duration;
    let span = duration - warmup;
    let mut photon_time_integral = 0.0;
    let mut clipped_at_warmup = if warmup == 0.0 { Some(0.0) } else { None };
    let mut pump_events = 0u64;
    let mut loss_events = 0u64;
    let mut detections = 0u64;
    let mut t_prev = 0.0f64;

    loop {
        let photons_before = stepper.photon_number() as f64;
        let event = stepper.step();
        let lo = t_prev.max(warmup);
        let hi = event.time.min(duration);
        if hi > lo {
            photon_time_integral += photons_before * (hi - lo);
        }
        if clipped_at_warmup.is_none() && event.time >= warmup {
            clipped_at_warmup = Some(stepper.clipped_time());
        }
        if event.time > duration {
            break;
        }
        match event.kind {
            EventKind::Pump => pump_events += 1,
            EventKind::Loss { detected } => {
                loss_events += 1;
                if detected && event.time >= warmup {
                    detections += 1;
                    sink(event.time - warmup);
                }
            }
        }
        t_prev = event.time;
    }

    // The final step may overshoot the end of the run by one inter-event
    // interval; at the rates of interest that bias is negligible.
    let clipped = (stepper.clipped_time() - clipped_at_warmup.unwrap_or(0.0)).max(0.0);
    let clipped_fraction = (clipped / span).min(1.0);
    Ok(Diagnostics {
        mean_photon_number: photon_time_integral / span,
        mean_detection_rate: detections as f64 / span,
        clipped_fraction,
        pump_events,
        loss_events,
        detections,
        clipping_warning: clipped_fraction > 0.01,
        low_photon_warning: steady_photons < 1e3,
    })
}

/// Run a trajectory and collect the detection train.
pub fn simulate(
    laser: &LaserParams,
    fbl: Option<&FeedbackParams>,
    cfg: &SimConfig,
) -> Result<SimOutput> {
    let mut times: Vec<f64> = Vec::new();
    let diagnostics = simulate_into(laser, fbl, cfg, |t| {
        // Distinct events can collide after the warmup shift at the f64
        // resolution limit; keep the train strictly increasing.
        match times.last() {
            Some(&last) if t <= last => times.push(last.next_up()),
            _ => times.push(t),
        }
    })?;
    let train = EventTrain::new(
        times,
        cfg.duration - cfg.warmup,
        TrainMeta {
            scenario: scenario_echo(laser, fbl, cfg),
            seed: cfg.seed,
        },
    )?;
    Ok(SimOutput { train, diagnostics })
}
