#![allow(dead_code)]

use causalkit::event::EventId;
use causalkit::model::{CausalModel, DocBuilder};
use rand::Rng;

pub fn ids(v: &[&str]) -> Vec<EventId> {
    v.iter().map(|s| EventId::from(*s)).collect()
}

/// Tables for the two-stage fragment where `a` causes `x` and `y` while `b`
/// causes `z`. Process `c` needs `x`; `d` reads `y` and `z`.
#[derive(Clone, Debug)]
pub struct TwoStage {
    /// Root prior over `[{}, ta, tb, ta+tb]`.
    pub prior: [f64; 4],
    /// `a` and `b` effectual values with and without their trigger.
    pub eff_a: [f64; 2],
    pub eff_b: [f64; 2],
    /// `a`'s causal table over `[{}, x, y, xy]`.
    pub causal_a: [f64; 4],
    /// `p̃r(z/b)`.
    pub b_z: f64,
    /// `c` when `x` occurred; without `x` it never occurs.
    pub eff_c: f64,
    /// `d` over `[{}, y, z, yz]`, with the first entry zero.
    pub eff_d: [f64; 4],
    pub causal_c: f64,
    pub causal_d: f64,
}

fn dist<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

impl TwoStage {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let p = dist(rng, 4);
        let a = dist(rng, 4);
        TwoStage {
            prior: [p[0], p[1], p[2], p[3]],
            eff_a: [rng.random(), rng.random()],
            eff_b: [rng.random(), rng.random()],
            causal_a: [a[0], a[1], a[2], a[3]],
            b_z: rng.random(),
            eff_c: rng.random(),
            eff_d: [0.0, rng.random(), rng.random(), rng.random()],
            causal_c: rng.random(),
            causal_d: rng.random(),
        }
    }

    pub fn model(&self) -> CausalModel {
        let doc = DocBuilder::new("omega")
            .simple("ta")
            .simple("tb")
            .process("a")
            .process("b")
            .simple("x")
            .simple("y")
            .simple("z")
            .process("c")
            .process("d")
            .simple("c-out")
            .simple("d-out")
            .causes("omega", "ta")
            .causes("omega", "tb")
            .triggers("ta", "a")
            .triggers("tb", "b")
            .causes("a", "x")
            .causes("a", "y")
            .causes("b", "z")
            .triggers("x", "c")
            .triggers("y", "d")
            .triggers("z", "d")
            .causes("c", "c-out")
            .causes("d", "d-out")
            .causal(
                "omega",
                &[(&[], self.prior[0]), (&["ta"], self.prior[1]), (&["tb"], self.prior[2]), (&["ta", "tb"], self.prior[3])],
            )
            .effectual("a", &[(&[], self.eff_a[0]), (&["ta"], self.eff_a[1])])
            .effectual("b", &[(&[], self.eff_b[0]), (&["tb"], self.eff_b[1])])
            .causal(
                "a",
                &[(&[], self.causal_a[0]), (&["x"], self.causal_a[1]), (&["y"], self.causal_a[2]), (&["x", "y"], self.causal_a[3])],
            )
            .causal("b", &[(&[], 1.0 - self.b_z), (&["z"], self.b_z)])
            .effectual("c", &[(&[], 0.0), (&["x"], self.eff_c)])
            .effectual(
                "d",
                &[(&[], self.eff_d[0]), (&["y"], self.eff_d[1]), (&["z"], self.eff_d[2]), (&["y", "z"], self.eff_d[3])],
            )
            .causal("c", &[(&[], 1.0 - self.causal_c), (&["c-out"], self.causal_c)])
            .causal("d", &[(&[], 1.0 - self.causal_d), (&["d-out"], self.causal_d)])
            .build();
        CausalModel::from_doc(&doc).expect("valid fragment")
    }

    /// `pr(a∧b)` straight from the root prior and the effectual values.
    pub fn pr_ab(&self) -> f64 {
        let pa = |t: bool| self.eff_a[t as usize];
        let pb = |t: bool| self.eff_b[t as usize];
        self.prior[0] * pa(false) * pb(false)
            + self.prior[1] * pa(true) * pb(false)
            + self.prior[2] * pa(false) * pb(true)
            + self.prior[3] * pa(true) * pb(true)
    }

    /// `pr(a∧b∧c∧d)`: sum over what `a` and `b` cause, with `x` required for `c`.
    pub fn pr_abcd(&self) -> f64 {
        let mut total = 0.0;
        for (k, &wa) in self.causal_a.iter().enumerate() {
            let (x, y) = (k & 1 == 1, k & 2 == 2);
            if !x {
                continue;
            }
            for (z, wb) in [(false, 1.0 - self.b_z), (true, self.b_z)] {
                let d = self.eff_d[(y as usize) | (z as usize) << 1];
                total += wa * wb * self.eff_c * d;
            }
        }
        self.pr_ab() * total
    }

    /// `pr(a∧b∧c) = eff_c(x) · p̃r(x/a) · pr(a∧b)`.
    pub fn pr_abc(&self) -> f64 {
        let x_from_a = self.causal_a[1] + self.causal_a[3];
        self.eff_c * x_from_a * self.pr_ab()
    }
}

/// Joint over four events from a first-order chain `a -> b -> c -> d`,
/// indexed by mask with bit 0 = a.
pub fn chain_joint(pa: f64, b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Vec<f64> {
    (0..16usize)
        .map(|m| {
            let bit = |i: usize| m >> i & 1 == 1;
            let f = |p: f64, on: bool| if on { p } else { 1.0 - p };
            f(pa, bit(0)) * f(b[bit(0) as usize], bit(1)) * f(c[bit(1) as usize], bit(2)) * f(d[bit(2) as usize], bit(3))
        })
        .collect()
}

/// Marginal `pr(all of mask)` of a joint indexed by mask.
pub fn marginal(joint: &[f64], mask: u32) -> f64 {
    joint
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as u32 & mask == mask)
        .map(|(_, v)| v)
        .sum()
}

/// The alternative legal order over `a, b, c, d` that grows the chain
/// `a, b, c, d` one link at a time.
pub const CHAIN_ORDER: [&str; 15] = [
    "a", "b", "a,b", "c", "b,c", "a,c", "a,b,c", "d", "c,d", "b,d", "b,c,d", "a,d", "a,c,d", "a,b,d", "a,b,c,d",
];

/// The entries of [`CHAIN_ORDER`] that a chain needs; the rest are defaulted.
pub const CHAIN_COMMITTED: [&str; 7] = ["a", "b", "a,b", "c", "b,c", "d", "c,d"];
