use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::stats::{BucketCounter, MomentAccumulator};
use super::{Conservation, SimConfig, SimResult};
use crate::model::{Scenario, SlotKind};

const BUCKET_MAX: usize = 64;
const HISTOGRAM_BINS: usize = 64;

struct Station {
    /// Arrival times of queued packets, head first.
    queue: VecDeque<f64>,
    /// The head-of-line packet is in backoff.
    active: bool,
    stage: u32,
    counter: u64,
    hol_start: f64,
    nonempty_since: f64,
    rng: ChaCha8Rng,
}

pub(super) struct Engine<'a> {
    scenario: &'a Scenario,
    cfg: &'a SimConfig,
    stations: Vec<Station>,
    windows: Vec<u64>,
    arrival_rng: ChaCha8Rng,
    inter_arrival: Option<Exp<f64>>,
    next_arrival: f64,
    now: f64,
    slot: u64,
    /// Start of the measured period; infinite during warmup.
    warm_time: f64,

    measured_slots: u64,
    delivered: u64,
    eligible_delivered: u64,
    eligible_dropped: u64,
    transmissions: u64,
    collisions: u64,
    active_station_slots: u64,
    nonempty_time: f64,
    by_stage: BucketCounter,
    by_occupancy: BucketCounter,
    delay: MomentAccumulator,
    access: MomentAccumulator,
    pgf_half_sum: f64,
    histogram: Vec<u64>,
    totals: Conservation,
}

impl<'a> Engine<'a> {
    pub fn new(scenario: &'a Scenario, cfg: &'a SimConfig) -> Self {
        let mac = &scenario.mac;
        // integer windows per stage until they stop changing or overflow
        let last_stage = match (mac.retry_limit, mac.cap_stage()) {
            (Some(k), Some(j)) => k.min(j),
            (Some(k), None) => k,
            (None, Some(j)) => j,
            (None, None) => 2048,
        };
        let mut windows = Vec::new();
        for stage in 0..=last_stage {
            let w = mac.window(stage);
            windows.push(mac.window_slots(stage));
            if w >= 2f64.powi(62) {
                break;
            }
        }
        let stations = (0..scenario.n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(u64::from(i) + 1);
                Station {
                    queue: VecDeque::new(),
                    active: false,
                    stage: 0,
                    counter: 0,
                    hol_start: 0.0,
                    nonempty_since: 0.0,
                    rng,
                }
            })
            .collect();
        let mut arrival_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        arrival_rng.set_stream(0);
        let rate = f64::from(scenario.n) * scenario.lambda_per_us();
        let inter_arrival = (!cfg.saturated && rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
        let collect_cap = if cfg.collect.delay_samples { cfg.sample_cap } else { 0 };
        let mut e = Engine {
            scenario,
            cfg,
            stations,
            windows,
            arrival_rng,
            inter_arrival,
            next_arrival: f64::INFINITY,
            now: 0.0,
            slot: 0,
            warm_time: f64::INFINITY,
            measured_slots: 0,
            delivered: 0,
            eligible_delivered: 0,
            eligible_dropped: 0,
            transmissions: 0,
            collisions: 0,
            active_station_slots: 0,
            nonempty_time: 0.0,
            by_stage: BucketCounter::new(BUCKET_MAX),
            by_occupancy: BucketCounter::new(BUCKET_MAX),
            delay: MomentAccumulator::new(collect_cap),
            access: MomentAccumulator::new(collect_cap),
            pgf_half_sum: 0.0,
            histogram: vec![0; HISTOGRAM_BINS],
            totals: Conservation {
                arrivals: 0,
                delivered: 0,
                dropped: 0,
                blocked: 0,
                queued_at_end: 0,
            },
        };
        if let Some(exp) = e.inter_arrival {
            e.next_arrival = exp.sample(&mut e.arrival_rng);
        }
        if cfg.saturated {
            for i in 0..e.stations.len() {
                e.stations[i].queue.push_back(0.0);
                e.totals.arrivals += 1;
                e.start_backoff(i, 0.0);
            }
        }
        e
    }

    fn window(&self, stage: u32) -> u64 {
        self.windows[(stage as usize).min(self.windows.len() - 1)]
    }

    fn start_backoff(&mut self, i: usize, at: f64) {
        let w = self.window(0);
        let st = &mut self.stations[i];
        st.active = true;
        st.stage = 0;
        st.hol_start = at;
        st.counter = st.rng.random_range(0..w);
    }

    fn measuring(&self) -> bool {
        self.slot >= self.cfg.warmup_slots
    }

    fn done(&self) -> bool {
        self.slot >= self.cfg.total_slots
            || self
                .cfg
                .stop_after_delivered
                .is_some_and(|k| self.eligible_delivered >= k)
    }

    pub fn run(mut self) -> SimResult {
        while !self.done() {
            if self.slot == self.cfg.warmup_slots && self.warm_time.is_infinite() {
                self.warm_time = self.now;
            }
            if !self.skip_idle() {
                self.step();
            }
        }
        self.finish()
    }

    /// Process a run of idle slots without arrivals in one go. Returns false
    /// when the next slot needs the full treatment.
    fn skip_idle(&mut self) -> bool {
        let mut c_min = u64::MAX;
        let mut n_active = 0u64;
        for st in &self.stations {
            if st.active {
                n_active += 1;
                c_min = c_min.min(st.counter);
            }
        }
        if c_min == 0 {
            return false;
        }
        let sigma = self.scenario.timing.duration(SlotKind::Idle);
        let arrival_free = if self.next_arrival.is_finite() {
            ((self.next_arrival - self.now) / sigma).floor().max(0.0)
        } else {
            f64::INFINITY
        };
        let boundary = if self.slot < self.cfg.warmup_slots {
            self.cfg.warmup_slots
        } else {
            self.cfg.total_slots
        };
        let k = (c_min as f64).min(arrival_free).min((boundary - self.slot) as f64);
        if k < 1.0 {
            return false;
        }
        let k = k as u64;
        for st in &mut self.stations {
            if st.active {
                st.counter -= k;
            }
        }
        if self.measuring() {
            self.measured_slots += k;
            self.active_station_slots += n_active * k;
        }
        self.now += k as f64 * sigma;
        self.slot += k;
        true
    }

    fn step(&mut self) {
        let measuring = self.measuring();
        let mut tx = Vec::new();
        let mut n_active = 0u64;
        for (i, st) in self.stations.iter_mut().enumerate() {
            if st.active {
                n_active += 1;
                if st.counter == 0 {
                    tx.push(i);
                } else {
                    st.counter -= 1;
                }
            }
        }
        let kind = match tx.len() {
            0 => SlotKind::Idle,
            k if k as u32 <= self.scenario.m => SlotKind::Success,
            _ => SlotKind::Collision,
        };
        let end = self.now + self.scenario.timing.duration(kind);

        self.arrivals_until(end);

        let collided = kind == SlotKind::Collision;
        if measuring {
            self.measured_slots += 1;
            self.active_station_slots += n_active;
            self.transmissions += tx.len() as u64;
            if collided {
                self.collisions += tx.len() as u64;
            }
        }
        for &i in &tx {
            if measuring && self.cfg.collect.pc_by_state {
                let st = &self.stations[i];
                self.by_stage.record(st.stage as usize, collided);
                self.by_occupancy.record(st.queue.len(), collided);
            }
            if collided {
                self.collide(i, end);
            } else {
                self.deliver(i, end, measuring);
            }
        }
        for i in 0..self.stations.len() {
            if !self.stations[i].active && !self.stations[i].queue.is_empty() {
                self.start_backoff(i, end);
            }
        }
        self.now = end;
        self.slot += 1;
    }

    fn arrivals_until(&mut self, end: f64) {
        let Some(exp) = self.inter_arrival else { return };
        let n = self.stations.len();
        while self.next_arrival < end {
            let t = self.next_arrival;
            let i = self.arrival_rng.random_range(0..n);
            self.totals.arrivals += 1;
            let q = self.stations[i].queue.len();
            if self.cfg.buffer.is_some_and(|cap| q >= cap) {
                self.totals.blocked += 1;
            } else {
                if t >= self.warm_time && self.cfg.collect.queue_samples {
                    self.histogram[q.min(HISTOGRAM_BINS - 1)] += 1;
                    self.pgf_half_sum += 0.5f64.powi(q.min(1100) as i32);
                }
                let st = &mut self.stations[i];
                if q == 0 {
                    st.nonempty_since = t;
                }
                st.queue.push_back(t);
            }
            self.next_arrival = t + exp.sample(&mut self.arrival_rng);
        }
    }

    /// Remove the head-of-line packet at time `end`.
    fn pop_head(&mut self, i: usize, end: f64) -> f64 {
        let warm = self.warm_time;
        let st = &mut self.stations[i];
        let arrival = st.queue.pop_front().expect("transmitting station has a packet");
        st.active = false;
        if st.queue.is_empty() {
            let from = st.nonempty_since.max(warm);
            if end > from {
                self.nonempty_time += end - from;
            }
        }
        if self.cfg.saturated {
            st.queue.push_back(end);
            st.nonempty_since = end;
            self.totals.arrivals += 1;
        }
        arrival
    }

    fn deliver(&mut self, i: usize, end: f64, measuring: bool) {
        let hol_start = self.stations[i].hol_start;
        let arrival = self.pop_head(i, end);
        self.totals.delivered += 1;
        if measuring {
            self.delivered += 1;
        }
        if arrival >= self.warm_time {
            self.eligible_delivered += 1;
            self.delay.push(end - arrival);
            self.access.push(end - hol_start);
        }
    }

    fn collide(&mut self, i: usize, end: f64) {
        let next = self.stations[i].stage + 1;
        if self.scenario.mac.retry_limit.is_some_and(|k| next > k) {
            let arrival = self.pop_head(i, end);
            self.totals.dropped += 1;
            if arrival >= self.warm_time {
                self.eligible_dropped += 1;
            }
            return;
        }
        let w = self.window(next);
        let st = &mut self.stations[i];
        st.stage = next;
        st.counter = st.rng.random_range(0..w);
    }

    fn finish(mut self) -> SimResult {
        let end = self.now;
        let warm = self.warm_time;
        for st in &self.stations {
            self.totals.queued_at_end += st.queue.len() as u64;
            if !st.queue.is_empty() {
                let from = st.nonempty_since.max(warm);
                if end > from {
                    self.nonempty_time += end - from;
                }
            }
        }
        let n = f64::from(self.scenario.n);
        let slots = self.measured_slots as f64;
        let elapsed = if warm.is_finite() { end - warm } else { 0.0 };
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
        let throughput_pps = ratio(self.delivered as f64 * 1e6, elapsed);
        let queue_samples: u64 = self.histogram.iter().sum();
        let retry = self.scenario.mac.retry_limit.is_some();
        let delay = self.delay.summary();
        let access = self.access.summary();
        SimResult {
            seed: self.cfg.seed,
            slots: self.measured_slots,
            elapsed_us: elapsed,
            delivered: self.delivered,
            throughput_pps,
            throughput_bps: throughput_pps * self.scenario.payload_bits,
            packets_per_slot: ratio(self.delivered as f64, slots),
            tau_measured: ratio(self.transmissions as f64, n * slots),
            rho_measured: ratio(self.active_station_slots as f64, n * slots),
            // summed busy periods can overshoot the elapsed time by rounding
            rho_time_measured: ratio(self.nonempty_time, n * elapsed).clamp(0.0, 1.0),
            p_t_measured: ratio(self.transmissions as f64, self.active_station_slots as f64),
            p_c_overall: ratio(self.collisions as f64, self.transmissions as f64),
            p_c_by_stage: self.by_stage.buckets(),
            p_c_by_occupancy: self.by_occupancy.buckets(),
            delay,
            access_delay: access,
            delay_samples: self.delay.into_samples(),
            access_delay_samples: self.access.into_samples(),
            queue_pgf_half: (queue_samples > 0).then(|| self.pgf_half_sum / queue_samples as f64),
            queue_histogram: self.histogram,
            loss_rate: retry.then(|| {
                ratio(
                    self.eligible_dropped as f64,
                    (self.eligible_dropped + self.eligible_delivered) as f64,
                )
            }),
            conservation: self.totals,
        }
    }
}
