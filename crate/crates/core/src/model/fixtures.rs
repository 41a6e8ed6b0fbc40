//! Small reference models used in tests.

use super::{CausalModel, DocBuilder, ModelDoc};

/// Root causes `u` (0.6); `u` triggers `p` (0.9, or 0.1 without `u`); `p`
/// causes `s` (0.7).
pub fn m1_doc() -> ModelDoc {
    DocBuilder::new("omega")
        .simple("u")
        .process("p")
        .simple("s")
        .causes("omega", "u")
        .triggers("u", "p")
        .causes("p", "s")
        .causal("omega", &[(&["u"], 0.6), (&[], 0.4)])
        .effectual("p", &[(&["u"], 0.9), (&[], 0.1)])
        .causal("p", &[(&["s"], 0.7), (&[], 0.3)])
        .build()
}

pub fn m1() -> CausalModel {
    CausalModel::from_doc(&m1_doc()).expect("fixture is valid")
}

/// Tables for the two-process co-occurrence fragment: `a` causes `{x, y}`,
/// `b` causes `{y}`, and the root decides which of `a`, `b` run.
#[derive(Clone, Copy, Debug)]
pub struct CoOccurrenceTables {
    /// `a`'s causal table over `[xy, x only, y only, nothing]`.
    pub a: [f64; 4],
    /// `p̃r(y/b)`.
    pub b_y: f64,
    /// Root prior over `[ab, a¬b, ¬ab, ¬a¬b]`.
    pub prior: [f64; 4],
}

impl Default for CoOccurrenceTables {
    fn default() -> Self {
        CoOccurrenceTables {
            a: [0.3, 0.2, 0.1, 0.4],
            b_y: 0.5,
            prior: [0.5, 0.2, 0.1, 0.2],
        }
    }
}

pub fn co_occurrence_doc(t: &CoOccurrenceTables) -> ModelDoc {
    DocBuilder::new("omega")
        .simple("ta")
        .simple("tb")
        .process("a")
        .process("b")
        .simple("x")
        .simple("y")
        .causes("omega", "ta")
        .causes("omega", "tb")
        .triggers("ta", "a")
        .triggers("tb", "b")
        .causes("a", "x")
        .causes("a", "y")
        .causes("b", "y")
        .causal(
            "omega",
            &[
                (&["ta", "tb"], t.prior[0]),
                (&["ta"], t.prior[1]),
                (&["tb"], t.prior[2]),
                (&[], t.prior[3]),
            ],
        )
        .effectual("a", &[(&["ta"], 1.0), (&[], 0.0)])
        .effectual("b", &[(&["tb"], 1.0), (&[], 0.0)])
        .causal(
            "a",
            &[(&["x", "y"], t.a[0]), (&["x"], t.a[1]), (&["y"], t.a[2]), (&[], t.a[3])],
        )
        .causal("b", &[(&["y"], t.b_y), (&[], 1.0 - t.b_y)])
        .build()
}

/// The co-occurrence fragment with its default tables: `pr(ab) = 0.5`,
/// `pr(a¬b) = 0.2`, `a` → `{xy: 0.3, x: 0.2, y: 0.1, ∅: 0.4}`, `b` → `{y: 0.5}`.
pub fn co_occurrence() -> CausalModel {
    CausalModel::from_doc(&co_occurrence_doc(&CoOccurrenceTables::default())).expect("fixture is valid")
}

/// Warning fragment: logistics movement and fighter dispersal both cause an
/// abnormal takeoff/landing count (and their own command-net traffic); a
/// sensor report process is triggered by the count together with ECCM
/// activity and sensor condition.
pub fn warning_fragment_doc() -> ModelDoc {
    DocBuilder::new("omega")
        .simple("logistics-start")
        .simple("dispersal-start")
        .simple("eccm")
        .simple("sensor-degraded")
        .process("logistics-movement")
        .process("fighter-dispersal")
        .simple("logistics-net-traffic")
        .simple("tactical-net-traffic")
        .simple("takeoff-landings")
        .process("sensor-report")
        .causes("omega", "logistics-start")
        .causes("omega", "dispersal-start")
        .causes("omega", "eccm")
        .causes("omega", "sensor-degraded")
        .triggers("logistics-start", "logistics-movement")
        .triggers("dispersal-start", "fighter-dispersal")
        .causes("logistics-movement", "logistics-net-traffic")
        .causes("logistics-movement", "takeoff-landings")
        .causes("fighter-dispersal", "tactical-net-traffic")
        .causes("fighter-dispersal", "takeoff-landings")
        .triggers("takeoff-landings", "sensor-report")
        .triggers("eccm", "sensor-report")
        .triggers("sensor-degraded", "sensor-report")
        .causal(
            "omega",
            &[
                (&[], 0.324),
                (&["logistics-start"], 0.081),
                (&["dispersal-start"], 0.036),
                (&["dispersal-start", "logistics-start"], 0.009),
                (&["eccm"], 0.108),
                (&["eccm", "logistics-start"], 0.027),
                (&["dispersal-start", "eccm"], 0.012),
                (&["dispersal-start", "eccm", "logistics-start"], 0.003),
                (&["sensor-degraded"], 0.216),
                (&["logistics-start", "sensor-degraded"], 0.054),
                (&["dispersal-start", "sensor-degraded"], 0.024),
                (&["dispersal-start", "logistics-start", "sensor-degraded"], 0.006),
                (&["eccm", "sensor-degraded"], 0.072),
                (&["eccm", "logistics-start", "sensor-degraded"], 0.018),
                (&["dispersal-start", "eccm", "sensor-degraded"], 0.008),
                (&["dispersal-start", "eccm", "logistics-start", "sensor-degraded"], 0.002),
            ],
        )
        .effectual("logistics-movement", &[(&["logistics-start"], 0.9), (&[], 0.0)])
        .effectual("fighter-dispersal", &[(&["dispersal-start"], 0.8), (&[], 0.0)])
        .causal(
            "logistics-movement",
            &[
                (&["logistics-net-traffic", "takeoff-landings"], 0.5),
                (&["logistics-net-traffic"], 0.2),
                (&["takeoff-landings"], 0.2),
                (&[], 0.1),
            ],
        )
        .causal(
            "fighter-dispersal",
            &[
                (&["tactical-net-traffic", "takeoff-landings"], 0.6),
                (&["tactical-net-traffic"], 0.1),
                (&["takeoff-landings"], 0.2),
                (&[], 0.1),
            ],
        )
        .effectual(
            "sensor-report",
            &[
                (&[], 0.02),
                (&["takeoff-landings"], 0.9),
                (&["eccm"], 0.2),
                (&["eccm", "takeoff-landings"], 0.5),
                (&["sensor-degraded"], 0.1),
                (&["sensor-degraded", "takeoff-landings"], 0.6),
                (&["eccm", "sensor-degraded"], 0.3),
                (&["eccm", "sensor-degraded", "takeoff-landings"], 0.4),
            ],
        )
        .build()
}
