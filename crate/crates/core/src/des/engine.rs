use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::dispatch::{dispatch, HospitalLoad};
use super::metrics::{HospitalMetrics, SimulationResult, TraceRow};
use super::trend::queue_growth_detected;
use super::StrategyProfile;
use crate::scenario::{Position, Scenario, ServiceModel};
use crate::stochastic::{stream_rng, KdeFit, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    /// Patient reaches the hospital.
    Arrive(usize),
    /// Service of the patient finishes.
    Depart(usize),
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // Reversed so that BinaryHeap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
struct Patient {
    request_time: f64,
    hospital: usize,
    rejections: u32,
    travel: f64,
    arrive: f64,
    start: f64,
    /// Uniform draw used for exponential service.
    service_u: f64,
    /// Seed for KDE service sampling.
    service_seed: u64,
}

#[derive(Debug, Default)]
struct Station {
    busy: u32,
    queue: VecDeque<usize>,
    in_transit: u32,
    // Integrals over the metric window.
    last_change: f64,
    queue_area: f64,
    busy_area: f64,
    quarter_area: [f64; 4],
    served: u64,
    dispatched: u64,
    sum_travel: f64,
    sum_queue: f64,
    sum_service: f64,
    rejections: u64,
    forced: u64,
}

enum Service {
    Exponential(f64),
    Kde(KdeFit),
}

impl Service {
    fn duration(&self, p: &Patient) -> f64 {
        match self {
            Service::Exponential(rate) => -(1.0 - p.service_u).ln() / rate,
            Service::Kde(fit) => {
                let mut rng = ChaCha8Rng::seed_from_u64(p.service_seed);
                fit.sample(&mut rng) / 60.0
            }
        }
    }
}

/// A scenario prepared for repeated runs.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    services: Vec<Service>,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let services = scenario
            .hospitals
            .iter()
            .map(|h| match &h.service {
                ServiceModel::Exponential { rate } => Service::Exponential(*rate),
                ServiceModel::Kde { samples, bandwidth, .. } => {
                    Service::Kde(KdeFit::fit(samples, *bandwidth).expect("validated scenario"))
                }
            })
            .collect();
        Self { scenario, services }
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn run(&self, profile: &StrategyProfile, seed: u64) -> SimulationResult {
        Run::new(self, profile, seed).execute()
    }
}

/// Runs one replication. Deterministic in `seed`; arrival times, pickup
/// locations and service draws are tied to the patient, not to the
/// profile, so different profiles see common random numbers.
pub fn run_simulation(scenario: &Scenario, profile: &StrategyProfile, seed: u64) -> SimulationResult {
    Simulator::new(scenario).run(profile, seed)
}

struct Run<'s, 'a> {
    sim: &'s Simulator<'a>,
    profile: &'s StrategyProfile,
    seed: u64,
    warmup: f64,
    horizon: f64,
    events: BinaryHeap<Event>,
    seq: u64,
    patients: Vec<Patient>,
    stations: Vec<Station>,
    trace: Option<Vec<TraceRow>>,
    served_total: u64,
    lost: u64,
    redirected: u64,
    forced: u64,
}

impl<'s, 'a> Run<'s, 'a> {
    fn new(sim: &'s Simulator<'a>, profile: &'s StrategyProfile, seed: u64) -> Self {
        assert_eq!(
            profile.len(),
            sim.scenario.hospital_count(),
            "profile length must match hospital count"
        );
        let warmup = sim.scenario.warmup();
        let stations = (0..sim.scenario.hospital_count())
            .map(|_| Station {
                last_change: warmup,
                ..Default::default()
            })
            .collect();
        Self {
            sim,
            profile,
            seed,
            warmup,
            horizon: sim.scenario.horizon,
            events: BinaryHeap::new(),
            seq: 0,
            patients: Vec::new(),
            stations,
            trace: sim.scenario.options.trace.then(Vec::new),
            served_total: 0,
            lost: 0,
            redirected: 0,
            forced: 0,
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    /// Accumulates time integrals of station `j` up to `now`.
    fn advance(&mut self, j: usize, now: f64) {
        let st = &mut self.stations[j];
        let from = st.last_change.max(self.warmup);
        let to = now.min(self.horizon);
        if to > from {
            let q = st.queue.len() as f64;
            st.queue_area += q * (to - from);
            st.busy_area += f64::from(st.busy) * (to - from);
            let window = self.horizon - self.warmup;
            // Split the interval over the four quarters of the window.
            for (k, area) in st.quarter_area.iter_mut().enumerate() {
                let qa = self.warmup + window * k as f64 / 4.0;
                let qb = self.warmup + window * (k + 1) as f64 / 4.0;
                let overlap = to.min(qb) - from.max(qa);
                if overlap > 0.0 {
                    *area += q * overlap;
                }
            }
        }
        st.last_change = now;
    }

    fn execute(mut self) -> SimulationResult {
        let scenario = self.sim.scenario;
        let mut arrival_rng = stream_rng(self.seed, 0, None, Stream::Arrivals);
        let mut location_rng = stream_rng(self.seed, 0, None, Stream::Locations);
        let mut service_rng = stream_rng(self.seed, 0, None, Stream::Service);
        let peak_rate = scenario.arrivals.rate * scenario.arrivals.max_scale();

        let mut next_request = if peak_rate > 0.0 {
            next_arrival(0.0, peak_rate, scenario, &mut arrival_rng)
        } else {
            f64::INFINITY
        };

        loop {
            let next_event = self.events.peek().map_or(f64::INFINITY, |e| e.time);
            if next_request <= next_event {
                if next_request > self.horizon {
                    break;
                }
                let t = next_request;
                let pos = scenario.sample_position(&mut location_rng);
                let service_u: f64 = service_rng.random();
                let service_seed: u64 = service_rng.random();
                self.on_request(t, pos, service_u, service_seed);
                next_request = next_arrival(t, peak_rate, scenario, &mut arrival_rng);
            } else {
                if next_event > self.horizon {
                    break;
                }
                let ev = self.events.pop().expect("peeked");
                match ev.kind {
                    EventKind::Arrive(p) => self.on_arrive(ev.time, p),
                    EventKind::Depart(p) => self.on_depart(ev.time, p),
                }
            }
        }
        for j in 0..self.stations.len() {
            self.advance(j, self.horizon);
        }
        self.finish()
    }

    fn on_request(&mut self, t: f64, pos: Position, service_u: f64, service_seed: u64) {
        let scenario = self.sim.scenario;
        let opts = &scenario.options;
        let by_travel = scenario.hospitals_by_travel(&pos, t);
        let loads: Vec<HospitalLoad> = self
            .stations
            .iter()
            .map(|s| HospitalLoad {
                admitted: s.busy + s.queue.len() as u32 + if opts.count_in_transit { s.in_transit } else { 0 },
                queue_len: s.queue.len() as u32,
            })
            .collect();
        let d = dispatch(
            &by_travel,
            self.profile,
            &loads,
            &scenario.hospitals,
            opts.forced_rule,
            opts.overflow,
        );
        let counted = t >= self.warmup;
        if counted {
            for &r in &d.rejections {
                self.stations[r].rejections += 1;
            }
        }
        if !d.rejections.is_empty() {
            self.redirected += 1;
        }
        let Some(j) = d.hospital else {
            self.lost += 1;
            return;
        };
        if d.forced {
            self.forced += 1;
            if counted {
                self.stations[j].forced += 1;
            }
        }
        let travel = by_travel.iter().find(|(i, _)| *i == j).expect("listed").1;
        let id = self.patients.len();
        self.patients.push(Patient {
            request_time: t,
            hospital: j,
            rejections: d.rejections.len() as u32,
            travel,
            arrive: f64::NAN,
            start: f64::NAN,
            service_u,
            service_seed,
        });
        if counted {
            self.stations[j].dispatched += 1;
        }
        self.stations[j].in_transit += 1;
        if travel == 0.0 {
            self.on_arrive(t, id);
        } else {
            self.schedule(t + travel, EventKind::Arrive(id));
        }
    }

    fn on_arrive(&mut self, t: f64, p: usize) {
        let j = self.patients[p].hospital;
        self.advance(j, t);
        self.patients[p].arrive = t;
        let st = &mut self.stations[j];
        st.in_transit -= 1;
        if st.busy < self.sim.scenario.hospitals[j].servers {
            st.busy += 1;
            self.start_service(t, p);
        } else {
            st.queue.push_back(p);
        }
    }

    fn start_service(&mut self, t: f64, p: usize) {
        let j = self.patients[p].hospital;
        self.patients[p].start = t;
        let d = self.sim.services[j].duration(&self.patients[p]);
        self.schedule(t + d, EventKind::Depart(p));
    }

    fn on_depart(&mut self, t: f64, p: usize) {
        let j = self.patients[p].hospital;
        self.advance(j, t);
        self.served_total += 1;
        let pat = &self.patients[p];
        if pat.request_time >= self.warmup {
            let queue = pat.start - pat.arrive;
            let service = t - pat.start;
            let st = &mut self.stations[j];
            st.served += 1;
            st.sum_travel += pat.travel;
            st.sum_queue += queue;
            st.sum_service += service;
            if let Some(trace) = &mut self.trace {
                trace.push(TraceRow {
                    patient_id: p as u64,
                    request_time: pat.request_time,
                    hospital_id: self.sim.scenario.hospitals[j].id,
                    n_rejections: pat.rejections,
                    travel: pat.travel,
                    queue,
                    service,
                });
            }
        }
        let st = &mut self.stations[j];
        match st.queue.pop_front() {
            Some(next) => self.start_service(t, next),
            None => st.busy -= 1,
        }
    }

    fn finish(self) -> SimulationResult {
        let scenario = self.sim.scenario;
        let window = self.horizon - self.warmup;
        let mut overcrowded = false;
        let hospitals = self
            .stations
            .iter()
            .enumerate()
            .map(|(j, st)| {
                let n = st.served as f64;
                let mean = |s: f64| if st.served > 0 { s / n } else { 0.0 };
                let (mt, mq, ms) = (mean(st.sum_travel), mean(st.sum_queue), mean(st.sum_service));
                let total = mt + mq + ms;
                let quarter_queue = st.quarter_area.map(|a| a / (window / 4.0));
                overcrowded |= queue_growth_detected(&quarter_queue);
                HospitalMetrics {
                    id: scenario.hospitals[j].id,
                    served: st.served,
                    dispatched: st.dispatched,
                    mean_travel: mt,
                    mean_queue: mq,
                    mean_service: ms,
                    total_time: total,
                    score: (st.served > 0 && total > 0.0).then(|| n / total),
                    arrival_rate: st.dispatched as f64 / window,
                    mean_queue_length: st.queue_area / window,
                    utilization: st.busy_area / window / f64::from(scenario.hospitals[j].servers),
                    quarter_queue,
                    rejections: st.rejections,
                    forced: st.forced,
                }
            })
            .collect();
        SimulationResult {
            hospitals,
            window,
            total_arrivals: self.patients.len() as u64 + self.lost,
            served_total: self.served_total,
            in_system_at_end: self
                .stations
                .iter()
                .map(|s| u64::from(s.busy) + s.queue.len() as u64)
                .sum(),
            in_transit_at_end: self.stations.iter().map(|s| u64::from(s.in_transit)).sum(),
            lost: self.lost,
            redirected: self.redirected,
            forced_assignments: self.forced,
            overcrowded,
            trace: self.trace,
        }
    }
}

/// Next request time after `t` from a Poisson process thinned by the
/// hour-of-day scale.
fn next_arrival<R: Rng + ?Sized>(mut t: f64, peak_rate: f64, scenario: &Scenario, rng: &mut R) -> f64 {
    let max_scale = scenario.arrivals.max_scale();
    loop {
        let gap: f64 = Exp1.sample(rng);
        t += gap / peak_rate;
        if scenario.arrivals.hourly_scale.is_none() {
            return t;
        }
        if rng.random::<f64>() * max_scale < scenario.arrivals.scale_at(t) {
            return t;
        }
    }
}

#[cfg(test)]
mod tests;
