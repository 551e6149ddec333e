//! Domain types shared by the analytic model, the capacity optimiser and the
//! simulator.
//!
//! Durations are microseconds, rates bits per second, arrival rates packets
//! per second. All types are plain immutable values once constructed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw PHY/MAC timing ingredients from which slot durations are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingComponents {
    pub phy_header_us: f64,
    pub mac_header_bits: f64,
    pub data_rate_bps: f64,
    pub payload_bits: f64,
    pub difs_us: f64,
    pub sifs_us: f64,
    /// Idle (mini) slot length, sigma.
    pub mini_slot_us: f64,
    pub ack_bits: f64,
    pub rts_bits: f64,
    pub cts_bits: f64,
    #[serde(default)]
    pub propagation_us: f64,
}

impl TimingComponents {
    /// 802.11a-style parameters at 6 Mbit/s with a 1023-byte payload.
    ///
    /// RTS and CTS frames are 20 and 14 bytes.
    pub fn table1() -> Self {
        TimingComponents {
            phy_header_us: 20.0,
            mac_header_bits: 244.0,
            data_rate_bps: 6.0e6,
            payload_bits: 8184.0,
            difs_us: 34.0,
            sifs_us: 16.0,
            mini_slot_us: 9.0,
            ack_bits: 112.0,
            rts_bits: 160.0,
            cts_bits: 112.0,
            propagation_us: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phy_header_us", self.phy_header_us),
            ("mac_header_bits", self.mac_header_bits),
            ("data_rate_bps", self.data_rate_bps),
            ("payload_bits", self.payload_bits),
            ("difs_us", self.difs_us),
            ("sifs_us", self.sifs_us),
            ("mini_slot_us", self.mini_slot_us),
            ("ack_bits", self.ack_bits),
            ("rts_bits", self.rts_bits),
            ("cts_bits", self.cts_bits),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    format!("timing.components.{field}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !(self.propagation_us.is_finite() && self.propagation_us >= 0.0) {
            return Err(Error::invalid(
                "timing.components.propagation_us",
                format!("must be finite and >= 0, got {}", self.propagation_us),
            ));
        }
        Ok(())
    }

    fn airtime_us(&self, bits: f64) -> f64 {
        bits / self.data_rate_bps * 1e6
    }

    /// PHY + MAC header time, H.
    pub fn header_us(&self) -> f64 {
        self.phy_header_us + self.airtime_us(self.mac_header_bits)
    }

    pub fn payload_us(&self) -> f64 {
        self.airtime_us(self.payload_bits)
    }

    pub fn ack_us(&self) -> f64 {
        self.airtime_us(self.ack_bits)
    }

    pub fn rts_us(&self) -> f64 {
        self.airtime_us(self.rts_bits)
    }

    pub fn cts_us(&self) -> f64 {
        self.airtime_us(self.cts_bits)
    }
}

/// Channel access model that determines how slot durations are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessModel {
    /// ALOHA-like: idle, collision and success slots all last `H + PL/rate`.
    EqualSlot,
    Basic,
    RtsCts,
    Custom,
}

impl std::fmt::Display for AccessModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AccessModel::EqualSlot => "equal-slot",
            AccessModel::Basic => "basic",
            AccessModel::RtsCts => "rts-cts",
            AccessModel::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Durations of idle, collision and success slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotTiming {
    pub model: AccessModel,
    pub t_idle_us: f64,
    pub t_coll_us: f64,
    pub t_succ_us: f64,
}

impl SlotTiming {
    pub fn custom(t_idle_us: f64, t_coll_us: f64, t_succ_us: f64) -> Result<Self> {
        Self::tagged(AccessModel::Custom, t_idle_us, t_coll_us, t_succ_us)
    }

    /// Equal-length slots of duration `t_us`.
    pub fn equal(t_us: f64) -> Result<Self> {
        Self::tagged(AccessModel::EqualSlot, t_us, t_us, t_us)
    }

    fn tagged(model: AccessModel, t_idle_us: f64, t_coll_us: f64, t_succ_us: f64) -> Result<Self> {
        let timing = SlotTiming {
            model,
            t_idle_us,
            t_coll_us,
            t_succ_us,
        };
        timing.validate()?;
        Ok(timing)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("t_idle_us", self.t_idle_us),
            ("t_coll_us", self.t_coll_us),
            ("t_succ_us", self.t_succ_us),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    format!("timing.{field}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        match self.model {
            AccessModel::EqualSlot
                if self.t_idle_us != self.t_coll_us || self.t_coll_us != self.t_succ_us =>
            {
                Err(Error::invalid(
                    "timing",
                    "equal-slot timing requires t_idle_us = t_coll_us = t_succ_us",
                ))
            }
            AccessModel::Basic if self.t_coll_us >= self.t_succ_us => Err(Error::invalid(
                "timing",
                "basic access requires t_coll_us < t_succ_us",
            )),
            _ => Ok(()),
        }
    }

    /// Duration of slot `kind`.
    pub fn duration(&self, kind: SlotKind) -> f64 {
        match kind {
            SlotKind::Idle => self.t_idle_us,
            SlotKind::Collision => self.t_coll_us,
            SlotKind::Success => self.t_succ_us,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Idle,
    Collision,
    Success,
}

/// Derive slot durations for `model` from raw timing components.
///
/// Propagation delay is carried by the components but not added; use
/// [`make_slot_timing_with_propagation`] to charge it on busy slots.
pub fn make_slot_timing(components: &TimingComponents, model: AccessModel) -> Result<SlotTiming> {
    build_slot_timing(components, model, false)
}

/// As [`make_slot_timing`], adding the propagation delay once to every
/// collision and success slot.
pub fn make_slot_timing_with_propagation(
    components: &TimingComponents,
    model: AccessModel,
) -> Result<SlotTiming> {
    build_slot_timing(components, model, true)
}

fn build_slot_timing(
    components: &TimingComponents,
    model: AccessModel,
    include_propagation: bool,
) -> Result<SlotTiming> {
    components.validate()?;
    let c = components;
    let frame = c.header_us() + c.payload_us();
    let (idle, coll, succ) = match model {
        AccessModel::EqualSlot => (frame, frame, frame),
        AccessModel::Basic => (
            c.mini_slot_us,
            frame + c.difs_us,
            frame + c.sifs_us + c.ack_us() + c.difs_us,
        ),
        AccessModel::RtsCts => (
            c.mini_slot_us,
            c.rts_us() + c.difs_us,
            c.rts_us() + c.cts_us() + frame + 3.0 * c.sifs_us + c.ack_us() + c.difs_us,
        ),
        AccessModel::Custom => {
            return Err(Error::invalid(
                "timing.model",
                "custom timing takes explicit durations, not components",
            ))
        }
    };
    let extra = if include_propagation { c.propagation_us } else { 0.0 };
    let (coll, succ) = match model {
        // keep the three durations equal
        AccessModel::EqualSlot => (coll + extra, succ + extra),
        _ => (coll + extra, succ + extra),
    };
    let idle = if model == AccessModel::EqualSlot { idle + extra } else { idle };
    SlotTiming::tagged(model, idle, coll, succ)
}

/// Exponential-backoff parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacParams {
    /// Minimum contention window, CWmin.
    pub w0: u32,
    /// Backoff factor; the window after `i` failures is `r^i * w0`.
    pub r: f64,
    /// Maximum number of retransmissions before the packet is dropped.
    pub retry_limit: Option<u32>,
    pub cw_max: Option<u64>,
}

impl MacParams {
    pub fn new(w0: u32, r: f64, retry_limit: Option<u32>, cw_max: Option<u64>) -> Result<Self> {
        let mac = MacParams {
            w0,
            r,
            retry_limit,
            cw_max,
        };
        mac.validate()?;
        Ok(mac)
    }

    /// Plain exponential backoff without retry limit or window cap.
    pub fn unlimited(w0: u32, r: f64) -> Result<Self> {
        Self::new(w0, r, None, None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w0 < 1 {
            return Err(Error::invalid("mac.w0", "must be >= 1"));
        }
        if !(self.r.is_finite() && self.r > 1.0) {
            return Err(Error::invalid(
                "mac.r",
                format!("backoff factor must be finite and > 1, got {}", self.r),
            ));
        }
        if let Some(cw) = self.cw_max {
            if cw < u64::from(self.w0) {
                return Err(Error::invalid("mac.cw_max", "must be >= w0"));
            }
            self.cap_stage_checked()?;
        }
        Ok(())
    }

    fn cap_stage_checked(&self) -> Result<Option<u32>> {
        let Some(cw) = self.cw_max else {
            return Ok(None);
        };
        let ratio = cw as f64 / f64::from(self.w0);
        let j = (ratio.ln() / self.r.ln()).round();
        let rebuilt = f64::from(self.w0) * self.r.powf(j);
        if (rebuilt - cw as f64).abs() > 1e-9 * cw as f64 {
            return Err(Error::invalid(
                "mac.cw_max",
                format!(
                    "cw_max / w0 = {ratio} is not an integral power of r = {}",
                    self.r
                ),
            ));
        }
        Ok(Some(j as u32))
    }

    /// Number of doublings after which the window stops growing, if capped.
    pub fn cap_stage(&self) -> Option<u32> {
        self.cap_stage_checked().ok().flatten()
    }

    /// Contention window at 0-based backoff stage `stage` (real-valued when
    /// `r` is not an integer).
    pub fn window(&self, stage: u32) -> f64 {
        match self.cap_stage() {
            Some(j) if stage >= j => self.cw_max.unwrap_or(u64::MAX) as f64,
            _ => f64::from(self.w0) * self.r.powi(stage as i32),
        }
    }

    /// Integer window used by the simulator: the real window rounded down,
    /// at least one slot.
    pub fn window_slots(&self, stage: u32) -> u64 {
        let w = self.window(stage);
        ((w + 1e-9).floor() as u64).max(1)
    }

    /// Same parameters with retry limit `k`.
    pub fn with_retry(&self, k: u32) -> Self {
        MacParams {
            retry_limit: Some(k),
            ..*self
        }
    }

    pub fn has_limits(&self) -> bool {
        self.retry_limit.is_some() || self.cw_max.is_some()
    }
}

/// Full network description: `n` saturated-or-not stations with Poisson
/// arrivals sharing an `m`-packet reception channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub n: u32,
    pub m: u32,
    /// Per-station Poisson arrival rate, packets per second.
    pub lambda_pps: f64,
    pub payload_bits: f64,
    pub timing: SlotTiming,
    pub mac: MacParams,
}

impl Scenario {
    pub fn new(
        n: u32,
        m: u32,
        lambda_pps: f64,
        payload_bits: f64,
        timing: SlotTiming,
        mac: MacParams,
    ) -> Result<Self> {
        let s = Scenario {
            n,
            m,
            lambda_pps,
            payload_bits,
            timing,
            mac,
        };
        s.validate()?;
        Ok(s)
    }

    /// The 50-station reference network with the given access model,
    /// `W0 = 16` and zero load.
    pub fn table1(model: AccessModel, n: u32, m: u32, r: f64) -> Result<Self> {
        let comps = TimingComponents::table1();
        let timing = make_slot_timing(&comps, model)?;
        Scenario::new(n, m, 0.0, comps.payload_bits, timing, MacParams::unlimited(16, r)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("n", "need at least one station"));
        }
        if self.m < 1 {
            return Err(Error::invalid("m", "MPR capability must be >= 1"));
        }
        if !(self.lambda_pps.is_finite() && self.lambda_pps >= 0.0) {
            return Err(Error::invalid(
                "lambda_pps",
                format!("must be finite and >= 0, got {}", self.lambda_pps),
            ));
        }
        if !(self.payload_bits.is_finite() && self.payload_bits > 0.0) {
            return Err(Error::invalid("payload_bits", "must be finite and > 0"));
        }
        self.timing.validate()?;
        self.mac.validate()
    }

    /// MPR capability clamped to the number of stations.
    pub fn effective_m(&self) -> u32 {
        self.m.min(self.n)
    }

    /// Aggregate offered load `N * lambda`, packets per second.
    pub fn offered_load_pps(&self) -> f64 {
        f64::from(self.n) * self.lambda_pps
    }

    pub fn offered_load_bps(&self) -> f64 {
        self.offered_load_pps() * self.payload_bits
    }

    /// Per-station arrival rate in packets per microsecond.
    pub fn lambda_per_us(&self) -> f64 {
        self.lambda_pps * 1e-6
    }

    pub fn with_lambda(&self, lambda_pps: f64) -> Result<Self> {
        let mut s = *self;
        s.lambda_pps = lambda_pps;
        s.validate()?;
        Ok(s)
    }

    /// Same scenario with aggregate offered load `load_pps` split evenly.
    pub fn with_offered_load(&self, load_pps: f64) -> Result<Self> {
        self.with_lambda(load_pps / f64::from(self.n))
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        let mut s = *self;
        s.mac.r = r;
        s.validate()?;
        Ok(s)
    }

    pub fn with_m(&self, m: u32) -> Result<Self> {
        let mut s = *self;
        s.m = m;
        s.validate()?;
        Ok(s)
    }

    pub fn with_mac(&self, mac: MacParams) -> Result<Self> {
        let mut s = *self;
        s.mac = mac;
        s.validate()?;
        Ok(s)
    }

    /// Parse the JSON scenario format (see the README for the schema).
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.into_scenario()
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    n: u32,
    m: u32,
    #[serde(default)]
    lambda_pps: f64,
    payload_bits: Option<f64>,
    timing: TimingFile,
    mac: MacFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimingFile {
    model: AccessModel,
    components: Option<TimingComponents>,
    #[serde(default)]
    include_propagation: bool,
    t_idle_us: Option<f64>,
    t_coll_us: Option<f64>,
    t_succ_us: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MacFile {
    w0: u32,
    r: f64,
    retry_limit: Option<u32>,
    cw_max: Option<u64>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let t = self.timing;
        let explicit = [t.t_idle_us, t.t_coll_us, t.t_succ_us];
        let (timing, component_payload) = match (t.components, explicit) {
            (Some(comps), [None, None, None]) => {
                let timing = if t.include_propagation {
                    make_slot_timing_with_propagation(&comps, t.model)?
                } else {
                    make_slot_timing(&comps, t.model)?
                };
                (timing, Some(comps.payload_bits))
            }
            (None, [Some(idle), Some(coll), Some(succ)]) => {
                (SlotTiming::tagged(t.model, idle, coll, succ)?, None)
            }
            (Some(_), _) => {
                return Err(Error::invalid(
                    "timing",
                    "give either `components` or explicit t_*_us durations, not both",
                ))
            }
            (None, _) => {
                return Err(Error::invalid(
                    "timing",
                    "explicit timing needs all of t_idle_us, t_coll_us, t_succ_us",
                ))
            }
        };
        let payload_bits = match (self.payload_bits, component_payload) {
            (Some(p), Some(c)) if p != c => {
                return Err(Error::invalid(
                    "payload_bits",
                    format!("{p} disagrees with timing.components.payload_bits = {c}"),
                ))
            }
            (Some(p), _) => p,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::invalid(
                    "payload_bits",
                    "required when timing durations are explicit",
                ))
            }
        };
        let mac = MacParams::new(self.mac.w0, self.mac.r, self.mac.retry_limit, self.mac.cw_max)?;
        Scenario::new(self.n, self.m, self.lambda_pps, payload_bits, timing, mac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table1_equal_slot_duration() {
        let t = make_slot_timing(&TimingComponents::table1(), AccessModel::EqualSlot).unwrap();
        let expected = 20.0 + 244.0 / 6.0 + 8184.0 / 6.0;
        assert!((t.t_succ_us - expected).abs() < 1e-9);
        assert!((t.t_succ_us - 1424.67).abs() < 0.01);
        assert_eq!(t.t_idle_us, t.t_coll_us);
        assert_eq!(t.t_coll_us, t.t_succ_us);
    }

    #[test]
    fn table1_basic_slots() {
        let t = make_slot_timing(&TimingComponents::table1(), AccessModel::Basic).unwrap();
        assert_eq!(t.t_idle_us, 9.0);
        let frame = 20.0 + 244.0 / 6.0 + 8184.0 / 6.0;
        assert!((t.t_coll_us - (frame + 34.0)).abs() < 1e-9);
        assert!((t.t_succ_us - (frame + 16.0 + 112.0 / 6.0 + 34.0)).abs() < 1e-9);
    }

    #[test]
    fn rts_cts_collision_is_short() {
        let t = make_slot_timing(&TimingComponents::table1(), AccessModel::RtsCts).unwrap();
        assert!((t.t_coll_us - (160.0 / 6.0 + 34.0)).abs() < 1e-9);
        assert!(t.t_coll_us < t.t_succ_us);
    }

    #[test]
    fn propagation_is_opt_in() {
        let mut c = TimingComponents::table1();
        c.propagation_us = 1.0;
        let plain = make_slot_timing(&c, AccessModel::Basic).unwrap();
        let with = make_slot_timing_with_propagation(&c, AccessModel::Basic).unwrap();
        assert_eq!(plain.t_succ_us + 1.0, with.t_succ_us);
        assert_eq!(plain.t_coll_us + 1.0, with.t_coll_us);
        assert_eq!(plain.t_idle_us, with.t_idle_us);
    }

    #[test]
    fn mac_rejects_r_one_and_bad_cap() {
        assert!(MacParams::unlimited(16, 1.0).is_err());
        assert!(MacParams::new(16, 2.0, None, Some(1000)).is_err());
        assert!(MacParams::new(16, 2.0, None, Some(8)).is_err());
        let mac = MacParams::new(16, 2.0, None, Some(1024)).unwrap();
        assert_eq!(mac.cap_stage(), Some(6));
        assert_eq!(mac.window(5), 512.0);
        assert_eq!(mac.window(6), 1024.0);
        assert_eq!(mac.window(9), 1024.0);
    }

    #[test]
    fn scenario_json_with_components() {
        let text = r#"{
            "n": 50, "m": 1, "lambda_pps": 2.0,
            "timing": { "model": "basic", "components": {
                "phy_header_us": 20, "mac_header_bits": 244, "data_rate_bps": 6e6,
                "payload_bits": 8184, "difs_us": 34, "sifs_us": 16, "mini_slot_us": 9,
                "ack_bits": 112, "rts_bits": 160, "cts_bits": 112 } },
            "mac": { "w0": 16, "r": 2.0 }
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.payload_bits, 8184.0);
        assert_eq!(s.timing.t_idle_us, 9.0);
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn scenario_json_errors_name_the_field() {
        let text = r#"{ "n": 5, "m": 1, "payload_bits": 100,
            "timing": { "model": "custom", "t_idle_us": 1, "t_coll_us": -2, "t_succ_us": 3 },
            "mac": { "w0": 16, "r": 2.0 } }"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("t_coll_us"), "{err}");

        let text = r#"{ "n": 5, "m": 1, "payload_bits": 100,
            "timing": { "model": "custom", "t_idle_us": 1, "t_coll_us": 2, "t_succ_us": 3 },
            "mac": { "w0": 16, "r": 1.0 } }"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("mac.r"), "{err}");
    }

    fn components() -> impl Strategy<Value = TimingComponents> {
        (
            1.0..100.0f64,
            1.0..1000.0f64,
            1e5..1e8f64,
            8.0..20000.0f64,
            1.0..100.0f64,
            1.0..50.0f64,
            1.0..30.0f64,
            (1.0..500.0f64, 1.0..500.0f64, 1.0..500.0f64),
            0.0..5.0f64,
        )
            .prop_map(|(phy, mac, rate, pl, difs, sifs, sigma, (ack, rts, cts), prop)| {
                TimingComponents {
                    phy_header_us: phy,
                    mac_header_bits: mac,
                    data_rate_bps: rate,
                    payload_bits: pl,
                    difs_us: difs,
                    sifs_us: sifs,
                    mini_slot_us: sigma,
                    ack_bits: ack,
                    rts_bits: rts,
                    cts_bits: cts,
                    propagation_us: prop,
                }
            })
    }

    proptest! {
        #[test]
        fn slot_invariants_hold(c in components()) {
            for model in [AccessModel::EqualSlot, AccessModel::Basic, AccessModel::RtsCts] {
                let t = make_slot_timing(&c, model).unwrap();
                prop_assert!(t.t_idle_us > 0.0 && t.t_coll_us > 0.0 && t.t_succ_us > 0.0);
                let again = make_slot_timing(&c, model).unwrap();
                prop_assert_eq!(t, again);
                match model {
                    AccessModel::EqualSlot => {
                        prop_assert_eq!(t.t_idle_us, t.t_coll_us);
                        prop_assert_eq!(t.t_coll_us, t.t_succ_us);
                    }
                    AccessModel::Basic => prop_assert!(t.t_coll_us < t.t_succ_us),
                    _ => {}
                }
            }
        }
    }
}
