//! Sampling grids over (label, t) and the per-node field record.
//!
//! A grid is written as comma-separated axis ranges `name=lo:hi:n`, e.g.
//!
//! ```text
//! q=0:1e4:10,s=-1e4:1e4:10,xi=-3:-0.05:10,tau=0:1:1
//! ```
//!
//! The vertical axis is either `r` (metres) or `xi` (vertical phase, so that
//! r = m(s) + ξ/k); the time axis is either `t` (seconds) or `tau` (wave
//! periods).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{KinematicsError, LabelPoint, LeeWave};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("malformed grid axis '{0}' (expected name=lo:hi:n)")]
    Syntax(String),
    #[error("unknown grid axis '{0}'")]
    UnknownAxis(String),
    #[error("grid axis '{0}' given twice")]
    Duplicate(&'static str),
    #[error("grid axis '{0}' missing")]
    Missing(&'static str),
    #[error("grid axis '{axis}': {reason}")]
    Range { axis: &'static str, reason: &'static str },
    #[error("grid node outside the admissible domain: {0}")]
    Domain(#[from] KinematicsError),
}

/// One (label, t) evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub label: LabelPoint,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn point(lo: f64) -> Self {
        Self { lo, hi: lo, n: 1 }
    }

    /// i-th of n equispaced points; a single point sits at `lo`.
    pub fn uniform(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * (i as f64 / (self.n - 1) as f64)
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * rng.random::<f64>()
        }
    }

    fn check(&self, axis: &'static str) -> Result<(), GridError> {
        if self.n == 0 {
            Err(GridError::Range {
                axis,
                reason: "count must be at least 1",
            })
        } else if !(self.lo.is_finite() && self.hi.is_finite()) {
            Err(GridError::Range {
                axis,
                reason: "non-finite bound",
            })
        } else if self.hi < self.lo {
            Err(GridError::Range {
                axis,
                reason: "upper bound below lower bound",
            })
        } else {
            Ok(())
        }
    }

    fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split(':');
        let lo = parts.next()?.trim().parse().ok()?;
        let hi = parts.next()?.trim().parse().ok()?;
        let n = parts.next()?.trim().parse().ok()?;
        parts.next().is_none().then_some(Self { lo, hi, n })
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "range")]
pub enum Vertical {
    /// Label r, metres.
    R(AxisRange),
    /// Vertical phase ξ = k(r − m(s)).
    Xi(AxisRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "range")]
pub enum Time {
    /// Seconds.
    T(AxisRange),
    /// Wave periods.
    Tau(AxisRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Sampling {
    /// Tensor product of equispaced points, lexicographic in (q, s, r, t).
    Uniform,
    /// As many independent uniform draws as the tensor product has points.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q: AxisRange,
    pub s: AxisRange,
    pub vertical: Vertical,
    pub time: Time,
    pub sampling: Sampling,
}

impl GridSpec {
    /// 10 × 10 × 10 × 1 random draws over q ∈ [0, 10⁴], s ∈ [−10⁴, 10⁴],
    /// ξ ∈ [−3, −0.05] and one wave period.
    pub fn default_random(seed: u64) -> Self {
        Self {
            q: AxisRange::new(0.0, 1e4, 10),
            s: AxisRange::new(-1e4, 1e4, 10),
            vertical: Vertical::Xi(AxisRange::new(-3.0, -0.05, 10)),
            time: Time::Tau(AxisRange::new(0.0, 1.0, 1)),
            sampling: Sampling::Random { seed },
        }
    }

    pub fn with_sampling(self, sampling: Sampling) -> Self {
        Self { sampling, ..self }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.sampling {
            Sampling::Uniform => None,
            Sampling::Random { seed } => Some(seed),
        }
    }

    fn vertical_range(&self) -> &AxisRange {
        match &self.vertical {
            Vertical::R(a) | Vertical::Xi(a) => a,
        }
    }

    fn time_range(&self) -> &AxisRange {
        match &self.time {
            Time::T(a) | Time::Tau(a) => a,
        }
    }

    pub fn len(&self) -> usize {
        self.q.n * self.s.n * self.vertical_range().n * self.time_range().n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self) -> Result<(), GridError> {
        self.q.check("q")?;
        self.s.check("s")?;
        match &self.vertical {
            Vertical::R(a) => a.check("r")?,
            Vertical::Xi(a) => a.check("xi")?,
        }
        match &self.time {
            Time::T(a) => a.check("t"),
            Time::Tau(a) => a.check("tau"),
        }
    }

    fn node(&self, flow: &LeeWave, q: f64, s: f64, v: f64, t: f64) -> Node {
        let r = match self.vertical {
            Vertical::R(_) => v,
            Vertical::Xi(_) => flow.trough_m(s) + v / flow.wave().k,
        };
        let t = match self.time {
            Time::T(_) => t,
            Time::Tau(_) => t * flow.period(),
        };
        Node {
            label: LabelPoint::new(q, s, r),
            t,
        }
    }

    /// All nodes, each checked against the admissible domain and the ξ guard.
    pub fn nodes(&self, flow: &LeeWave) -> Result<Vec<Node>, GridError> {
        self.check()?;
        let (vr, tr) = (*self.vertical_range(), *self.time_range());
        let mut nodes = Vec::with_capacity(self.len());
        match self.sampling {
            Sampling::Uniform => {
                for i in 0..self.q.n {
                    for j in 0..self.s.n {
                        for l in 0..vr.n {
                            for m in 0..tr.n {
                                nodes.push(self.node(
                                    flow,
                                    self.q.uniform(i),
                                    self.s.uniform(j),
                                    vr.uniform(l),
                                    tr.uniform(m),
                                ));
                            }
                        }
                    }
                }
            }
            Sampling::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..self.len() {
                    let q = self.q.random(&mut rng);
                    let s = self.s.random(&mut rng);
                    let v = vr.random(&mut rng);
                    let t = tr.random(&mut rng);
                    nodes.push(self.node(flow, q, s, v, t));
                }
            }
        }
        for node in &nodes {
            flow.check_label(&node.label)?;
            flow.guarded_phase(&node.label, node.t)?;
        }
        Ok(nodes)
    }
}

impl FromStr for GridSpec {
    type Err = GridError;

    /// Parses the axis list; sampling defaults to uniform.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (mut q, mut s, mut vertical, mut time) = (None, None, None, None);
        for item in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, range) = item
                .split_once('=')
                .ok_or_else(|| GridError::Syntax(item.to_string()))?;
            let range = AxisRange::parse(range).ok_or_else(|| GridError::Syntax(item.to_string()))?;
            let (slot, axis): (&mut Option<_>, &'static str) = match name.trim() {
                "q" => (&mut q, "q"),
                "s" => (&mut s, "s"),
                "r" | "xi" => (&mut vertical, "r/xi"),
                "t" | "tau" => (&mut time, "t/tau"),
                other => return Err(GridError::UnknownAxis(other.to_string())),
            };
            if slot.is_some() {
                return Err(GridError::Duplicate(axis));
            }
            *slot = Some((name.trim(), range));
        }
        let q = q.ok_or(GridError::Missing("q"))?.1;
        let s = s.ok_or(GridError::Missing("s"))?.1;
        let vertical = match vertical.ok_or(GridError::Missing("r/xi"))? {
            ("r", a) => Vertical::R(a),
            (_, a) => Vertical::Xi(a),
        };
        let time = match time.ok_or(GridError::Missing("t/tau"))? {
            ("t", a) => Time::T(a),
            (_, a) => Time::Tau(a),
        };
        let spec = Self {
            q,
            s,
            vertical,
            time,
            sampling: Sampling::Uniform,
        };
        spec.check()?;
        Ok(spec)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={},s={},", self.q, self.s)?;
        match &self.vertical {
            Vertical::R(a) => write!(f, "r={a},")?,
            Vertical::Xi(a) => write!(f, "xi={a},")?,
        }
        match &self.time {
            Time::T(a) => write!(f, "t={a}"),
            Time::Tau(a) => write!(f, "tau={a}"),
        }
    }
}

/// All fields at one node. Column order is that of [`FieldRecord::HEADER`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldRecord {
    pub q: f64,
    pub s: f64,
    pub r: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub rho: f64,
    pub pressure: f64,
    pub temperature: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma_abs: f64,
}

impl FieldRecord {
    pub const HEADER: [&'static str; 17] = [
        "q",
        "s",
        "r",
        "t",
        "x",
        "y",
        "z",
        "u",
        "v",
        "w",
        "rho",
        "P",
        "T",
        "gamma1",
        "gamma2",
        "gamma3",
        "gamma_abs",
    ];

    pub fn values(&self) -> [f64; 17] {
        [
            self.q,
            self.s,
            self.r,
            self.t,
            self.x,
            self.y,
            self.z,
            self.u,
            self.v,
            self.w,
            self.rho,
            self.pressure,
            self.temperature,
            self.gamma1,
            self.gamma2,
            self.gamma3,
            self.gamma_abs,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::reference_flow;

    #[test]
    fn parse_and_display_round_trip() {
        let text = "q=0:10000:3,s=-5000:5000:2,xi=-3:-0.05:4,tau=0:1:5";
        let spec: GridSpec = text.parse().unwrap();
        assert_eq!(spec.len(), 120);
        assert_eq!(spec.to_string(), text);
        assert_eq!(spec.to_string().parse::<GridSpec>().unwrap(), spec);
        assert!(matches!(spec.vertical, Vertical::Xi(_)));
        assert!(matches!(spec.time, Time::Tau(_)));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            "q=0:1,s=0:0:1,r=-30:-30:1,t=0:0:1".parse::<GridSpec>(),
            Err(GridError::Syntax(_))
        ));
        assert!(matches!(
            "q=0:1:1,s=0:0:1,r=-30:-30:1".parse::<GridSpec>(),
            Err(GridError::Missing(_))
        ));
        assert!(matches!(
            "q=0:1:1,s=0:0:1,r=-30:-30:1,xi=-1:-1:1,t=0:0:1".parse::<GridSpec>(),
            Err(GridError::Duplicate(_))
        ));
        assert!(matches!(
            "q=0:1:1,p=0:0:1".parse::<GridSpec>(),
            Err(GridError::UnknownAxis(_))
        ));
        assert!(matches!(
            "q=0:1:0,s=0:0:1,r=-30:-30:1,t=0:0:1".parse::<GridSpec>(),
            Err(GridError::Range { .. })
        ));
    }

    #[test]
    fn single_point_grid() {
        let flow = reference_flow();
        let spec: GridSpec = "q=100:100:1,s=0:0:1,r=-200:-200:1,t=3:3:1".parse().unwrap();
        let nodes = spec.nodes(&flow).unwrap();
        assert_eq!(
            nodes,
            vec![Node {
                label: LabelPoint::new(100.0, 0.0, -200.0),
                t: 3.0
            }]
        );
    }

    #[test]
    fn uniform_order_is_lexicographic() {
        let flow = reference_flow();
        let spec: GridSpec = "q=0:1000:2,s=0:100:2,r=-300:-200:2,t=0:10:2".parse().unwrap();
        let nodes = spec.nodes(&flow).unwrap();
        assert_eq!(nodes.len(), 16);
        assert_eq!(nodes[1].t, 10.0);
        assert_eq!(nodes[2].label.r, -200.0);
        assert_eq!(nodes[4].label.s, 100.0);
        assert_eq!(nodes[8].label.q, 1000.0);
    }

    #[test]
    fn random_grid_is_seeded_and_in_range() {
        let flow = reference_flow();
        let spec = GridSpec::default_random(7);
        let a = spec.nodes(&flow).unwrap();
        let b = spec.nodes(&flow).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        let c = GridSpec::default_random(8).nodes(&flow).unwrap();
        assert_ne!(a, c);
        for n in &a {
            let xi = flow.vertical_phase(n.label.s, n.label.r);
            assert!((-3.0 - 1e-12..=-0.05 + 1e-12).contains(&xi));
            assert!(n.t >= 0.0 && n.t <= flow.period());
        }
    }

    #[test]
    fn out_of_domain_grid_is_rejected() {
        let flow = reference_flow();
        let spec: GridSpec = "q=0:0:1,s=0:0:1,r=-10:-10:1,t=0:0:1".parse().unwrap();
        assert!(matches!(spec.nodes(&flow), Err(GridError::Domain(_))));
        let spec: GridSpec = "q=0:0:1,s=0:0:1,xi=-0.0001:-0.0001:1,t=0:0:1".parse().unwrap();
        assert!(spec.nodes(&flow).is_err());
    }
}
