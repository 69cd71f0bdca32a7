//! Synthetic group movement with known leaders.
//!
//! Every trial is a sequence of events. Each event has a pre-coordination
//! interval in which individuals start moving, a coordination interval in
//! which the whole group travels, and a post interval in which everybody
//! slows down and stops. The next event starts from the stopped positions.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::Label;
use crate::error::{Error, Result};
use crate::timeseries::Dataset;

type Vec2 = [f64; 2];

/// Minimum distance pursuers in the threshold model keep from the leader.
const LT_STANDOFF: f64 = 2.0;
/// Upper bound of the extra personal distance, in units of `circle_radius`.
const LT_SPACING: f64 = 1.75;
/// Probability per step that an individual over its threshold starts moving.
const LT_ACTIVATION: f64 = 0.5;
/// Share of the post interval in which individuals slow down and close in;
/// the rest is a wait at rest before the next event.
const POST_ACTIVE_FRACTION: f64 = 0.5;
/// Speed of pursuers closing in after coordination, relative to their own.
const CLOSING_FACTOR: f64 = 2.0;
const HM_RANKS: usize = 4;
const HM_ALLOCATION: [f64; HM_RANKS] = [0.4, 0.3, 0.2, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    /// Dictatorship: one leader, everybody else pursues it.
    Dm,
    /// Hierarchy: four ranked initiators, each pursuing the one above.
    Hm,
    /// Linear threshold contagion over `kappa` nearest neighbours.
    Lt { kappa: usize, rho: f64 },
    /// No leader; everybody heads for a shared destination.
    Random,
    /// Dictatorship whose leader changes every event.
    RotatingDm,
}

impl Model {
    pub fn label(&self) -> Label {
        match self {
            Model::Dm | Model::RotatingDm => Label::Dm,
            Model::Hm => Label::Hm,
            Model::Lt { .. } => Label::Lt,
            Model::Random => Label::Random,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Dm => f.write_str("dm"),
            Model::Hm => f.write_str("hm"),
            Model::Lt { kappa, rho } => write!(f, "lt:{kappa}:{rho}"),
            Model::Random => f.write_str("random"),
            Model::RotatingDm => f.write_str("rotating_dm"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    /// Accepts `dm`, `hm`, `random`, `rotating_dm` and `lt:<kappa>:<rho>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSimConfig(format!("unknown model `{s}`"));
        match s.to_ascii_lowercase().as_str() {
            "dm" => Ok(Model::Dm),
            "hm" => Ok(Model::Hm),
            "random" => Ok(Model::Random),
            "rotating_dm" | "rotating" => Ok(Model::RotatingDm),
            other => {
                let mut parts = other.strip_prefix("lt:").ok_or_else(bad)?.split(':');
                let kappa = parts.next().and_then(|k| k.parse().ok()).ok_or_else(bad)?;
                let rho = parts.next().and_then(|r| r.parse().ok()).ok_or_else(bad)?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(Model::Lt { kappa, rho })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub model: Model,
    pub n: usize,
    pub events: usize,
    pub pre_len: usize,
    pub coord_len: usize,
    pub post_len: usize,
    pub leader_speed: f64,
    pub heading_noise_sigma: f64,
    /// Defaults to `pre_len / 2`.
    pub lag_max: Option<usize>,
    /// Delay between consecutive hierarchy ranks; defaults to `pre_len / 10`.
    pub hm_rank_lag: Option<usize>,
    pub circle_radius: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: Model::Dm,
            n: 20,
            events: 10,
            pre_len: 100,
            coord_len: 100,
            post_len: 100,
            leader_speed: 1.0,
            heading_noise_sigma: 0.1,
            lag_max: None,
            hm_rank_lag: None,
            circle_radius: 10.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn new(model: Model) -> Self {
        SimConfig {
            model,
            ..Default::default()
        }
    }

    pub fn lag_max(&self) -> usize {
        self.lag_max.unwrap_or(self.pre_len / 2)
    }

    pub fn hm_rank_lag(&self) -> usize {
        self.hm_rank_lag.unwrap_or((self.pre_len / 10).max(1))
    }

    pub fn event_len(&self) -> usize {
        self.pre_len + self.coord_len + self.post_len
    }

    pub fn total_len(&self) -> usize {
        self.events * self.event_len()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSimConfig(msg));
        if self.n < 2 {
            return fail(format!("n must be >= 2, got {}", self.n));
        }
        if self.events == 0 || self.pre_len == 0 || self.coord_len == 0 || self.post_len == 0 {
            return fail("events and interval lengths must be >= 1".into());
        }
        if self.lag_max() >= self.pre_len {
            return fail(format!(
                "lag_max {} must be below pre_len {}",
                self.lag_max(),
                self.pre_len
            ));
        }
        if !(self.leader_speed > 0.0 && self.leader_speed.is_finite()) {
            return fail(format!("leader_speed must be positive, got {}", self.leader_speed));
        }
        if !(self.heading_noise_sigma >= 0.0 && self.heading_noise_sigma.is_finite()) {
            return fail(format!(
                "heading_noise_sigma must be >= 0, got {}",
                self.heading_noise_sigma
            ));
        }
        if !(self.circle_radius > 0.0 && self.circle_radius.is_finite()) {
            return fail(format!("circle_radius must be positive, got {}", self.circle_radius));
        }
        match self.model {
            Model::Lt { kappa, rho } => {
                if kappa == 0 || kappa >= self.n {
                    return fail(format!("kappa must be in [1, n), got {kappa} with n = {}", self.n));
                }
                if !(rho > 0.0 && rho <= 1.0) {
                    return fail(format!("rho must be in (0, 1], got {rho}"));
                }
            }
            Model::Hm => {
                if self.n < HM_RANKS {
                    return fail(format!("hierarchy needs n >= {HM_RANKS}, got {}", self.n));
                }
                if (HM_RANKS - 1) * self.hm_rank_lag() + 1 >= self.pre_len {
                    return fail(format!(
                        "hm_rank_lag {} leaves rank {HM_RANKS} no room in pre_len {}",
                        self.hm_rank_lag(),
                        self.pre_len
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Ground truth for one scheduled event. Step indices are global.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTruth {
    pub start: usize,
    pub coord_start: usize,
    pub post_start: usize,
    pub end: usize,
    pub leader: usize,
    /// Rank 1 to 4 initiators, hierarchy model only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hm_ranks: Option<Vec<usize>>,
    /// Step within the event at which each individual started moving.
    pub departures: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub config: SimConfig,
    pub dataset: Dataset,
    pub events: Vec<EventTruth>,
}

/// Truth sidecar written next to a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub format_version: u32,
    pub config: SimConfig,
    pub entity_ids: Vec<String>,
    pub events: Vec<EventTruth>,
}

impl Trial {
    pub fn truth(&self) -> TruthFile {
        TruthFile {
            format_version: 1,
            config: self.config.clone(),
            entity_ids: self.dataset.entity_ids().to_vec(),
            events: self.events.clone(),
        }
    }

    /// The scheduled event containing global step `step`.
    pub fn event_at(&self, step: usize) -> Option<&EventTruth> {
        self.events.iter().find(|e| (e.start..e.end).contains(&step))
    }
}

#[derive(Debug, Clone, Copy)]
enum Goal {
    Heading(Vec2),
    Pursue(usize),
    Destination(Vec2),
}

struct Plan {
    goal: Goal,
    speed: f64,
    noisy: bool,
    standoff: f64,
}

struct Simulator {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    pos: Vec<Vec2>,
    frames: Vec<Vec<Vec2>>,
}

/// Generates one trial; a pure function of `config`.
pub fn simulate(config: &SimConfig) -> Result<Trial> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.heading_noise_sigma)
        .map_err(|e| Error::InvalidSimConfig(e.to_string()))?;
    let pos = (0..config.n)
        .map(|_| uniform_in_circle(&mut rng, config.circle_radius))
        .collect();
    let mut sim = Simulator {
        cfg: config.clone(),
        rng,
        noise,
        pos,
        frames: Vec::with_capacity(config.total_len()),
    };

    let n = config.n;
    let fixed_leader = sim.rng.random_range(0..n);
    let hm_ranks = {
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut sim.rng);
        ids.truncate(HM_RANKS.min(n));
        ids
    };

    let mut events = Vec::with_capacity(config.events);
    for e in 0..config.events {
        let start = e * config.event_len();
        let leader = match config.model {
            Model::RotatingDm => e % n,
            Model::Hm => hm_ranks[0],
            Model::Random => 0,
            _ => fixed_leader,
        };
        let departures = match config.model {
            Model::Dm | Model::RotatingDm => sim.dictatorship(leader),
            Model::Hm => sim.hierarchy(&hm_ranks),
            Model::Lt { kappa, rho } => sim.threshold(leader, kappa, rho),
            Model::Random => sim.leaderless(),
        };
        events.push(EventTruth {
            start,
            coord_start: start + config.pre_len,
            post_start: start + config.pre_len + config.coord_len,
            end: start + config.event_len(),
            leader,
            hm_ranks: (config.model == Model::Hm).then(|| hm_ranks.clone()),
            departures,
        });
    }

    let dataset = sim.into_dataset()?;
    Ok(Trial {
        config: config.clone(),
        dataset,
        events,
    })
}

/// `trials` independent trials with seeds `base_seed + index`.
pub fn run_trial_suite(config: &SimConfig, trials: usize, base_seed: u64) -> Result<Vec<Trial>> {
    if trials == 0 {
        return Err(Error::InvalidSimConfig("trials must be >= 1".into()));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            simulate(&SimConfig {
                seed: base_seed.wrapping_add(i),
                ..config.clone()
            })
        })
        .collect()
}

fn uniform_in_circle(rng: &mut impl Rng, radius: f64) -> Vec2 {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random::<f64>() * TAU;
    [r * a.cos(), r * a.sin()]
}

fn unit(angle: f64) -> Vec2 {
    [angle.cos(), angle.sin()]
}

fn distance(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Splits `count` followers over the ranks by largest remainder.
fn allocate(count: usize) -> [usize; HM_RANKS] {
    let exact = HM_ALLOCATION.map(|p| p * count as f64);
    let mut out = exact.map(|x| x.floor() as usize);
    let mut left = count - out.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..HM_RANKS).collect();
    by_remainder.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for k in by_remainder {
        if left == 0 {
            break;
        }
        out[k] += 1;
        left -= 1;
    }
    out
}

enum Activation {
    /// Departure step of every individual, fixed in advance.
    Scheduled(Vec<Option<usize>>),
    /// Neighbour-threshold contagion; the leader and a random half of the
    /// group start together.
    Threshold { leader: usize, kappa: usize, rho: f64 },
}

impl Simulator {
    fn random_heading(&mut self) -> Vec2 {
        let a = self.rng.random::<f64>() * TAU;
        unit(a)
    }

    /// Random heading within 90 degrees of the direction from the group
    /// centre to `leader`.
    fn outward_heading(&mut self, leader: usize) -> Vec2 {
        let n = self.cfg.n as f64;
        let c = self.pos.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
        let away = (self.pos[leader][1] - c[1]).atan2(self.pos[leader][0] - c[0]);
        unit(away + (self.rng.random::<f64>() - 0.5) * std::f64::consts::PI)
    }

    fn follower_lag(&mut self) -> usize {
        1 + self.rng.random_range(0..=self.cfg.lag_max())
    }

    fn plan(&self, goal: Goal, noisy: bool) -> Plan {
        Plan {
            goal,
            speed: self.cfg.leader_speed,
            noisy,
            standoff: 0.0,
        }
    }

    fn dictatorship(&mut self, leader: usize) -> Vec<Option<usize>> {
        let heading = self.random_heading();
        let mut departures = vec![None; self.cfg.n];
        let mut plans = Vec::with_capacity(self.cfg.n);
        for (i, slot) in departures.iter_mut().enumerate() {
            if i == leader {
                *slot = Some(0);
                plans.push(self.plan(Goal::Heading(heading), false));
            } else {
                *slot = Some(self.follower_lag());
                plans.push(self.plan(Goal::Pursue(leader), true));
            }
        }
        self.run_event(&plans, Activation::Scheduled(departures))
    }

    fn hierarchy(&mut self, ranks: &[usize]) -> Vec<Option<usize>> {
        let n = self.cfg.n;
        let heading = self.random_heading();
        let lag = self.cfg.hm_rank_lag();
        let mut departures = vec![None; n];
        let mut goals = vec![Goal::Heading(heading); n];
        for (k, &id) in ranks.iter().enumerate() {
            departures[id] = Some(k * lag);
            if k > 0 {
                goals[id] = Goal::Pursue(ranks[k - 1]);
            }
        }
        let mut rest: Vec<usize> = (0..n).filter(|i| !ranks.contains(i)).collect();
        rest.shuffle(&mut self.rng);
        let mut rest = rest.into_iter();
        for (k, count) in allocate(n - ranks.len()).into_iter().enumerate() {
            for id in rest.by_ref().take(count) {
                let depart = ((ranks.len() - 1) * lag + self.follower_lag()).min(self.cfg.pre_len - 1);
                departures[id] = Some(depart);
                goals[id] = Goal::Pursue(ranks[k]);
            }
        }
        let plans: Vec<Plan> = (0..n).map(|i| self.plan(goals[i], i != ranks[0])).collect();
        self.run_event(&plans, Activation::Scheduled(departures))
    }

    fn threshold(&mut self, leader: usize, kappa: usize, rho: f64) -> Vec<Option<usize>> {
        let heading = self.outward_heading(leader);
        let plans: Vec<Plan> = (0..self.cfg.n)
            .map(|i| {
                if i == leader {
                    self.plan(Goal::Heading(heading), false)
                } else {
                    // personal distances keep pursuers from merging into one track
                    let spacing = self.rng.random::<f64>() * LT_SPACING * self.cfg.circle_radius;
                    Plan {
                        standoff: LT_STANDOFF + spacing,
                        ..self.plan(Goal::Pursue(leader), true)
                    }
                }
            })
            .collect();
        self.run_event(&plans, Activation::Threshold { leader, kappa, rho })
    }

    fn leaderless(&mut self) -> Vec<Option<usize>> {
        let n = self.cfg.n;
        let v = self.cfg.leader_speed;
        let centre = self.pos.iter().fold([0.0, 0.0], |acc, p| {
            [acc[0] + p[0] / n as f64, acc[1] + p[1] / n as f64]
        });
        // far enough that the group is still travelling when coordination ends
        let reach = 0.8 * (self.cfg.pre_len + self.cfg.coord_len) as f64 * v;
        let h = self.random_heading();
        let common = [centre[0] + reach * h[0], centre[1] + reach * h[1]];
        let speed = Normal::new(v, 0.2 * v).expect("positive speed");
        let plans: Vec<Plan> = (0..n)
            .map(|_| {
                let offset = uniform_in_circle(&mut self.rng, self.cfg.circle_radius);
                Plan {
                    goal: Goal::Destination([common[0] + offset[0], common[1] + offset[1]]),
                    speed: speed.sample(&mut self.rng).clamp(0.5 * v, 1.5 * v),
                    noisy: true,
                    standoff: 0.0,
                }
            })
            .collect();
        self.run_event(&plans, Activation::Scheduled(vec![Some(0); n]))
    }

    /// Indices of the `kappa` individuals nearest to `i`, ties by index.
    fn nearest(&self, i: usize, kappa: usize) -> Vec<usize> {
        let mut others: Vec<(f64, usize)> = (0..self.cfg.n)
            .filter(|&j| j != i)
            .map(|j| (distance(self.pos[i], self.pos[j]), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        others.into_iter().take(kappa).map(|(_, j)| j).collect()
    }

    fn contagion(&mut self, tau: usize, leader: usize, kappa: usize, rho: f64, active: &mut [Option<usize>]) {
        let pre = self.cfg.pre_len;
        if tau == 0 {
            for (i, slot) in active.iter_mut().enumerate() {
                if i == leader || self.rng.random_bool(LT_ACTIVATION) {
                    *slot = Some(0);
                }
            }
        } else if tau < pre {
            // decide on the previous step's state, then apply together
            let ready: Vec<usize> = (0..self.cfg.n)
                .filter(|&i| active[i].is_none())
                .filter(|&i| {
                    let moving = self.nearest(i, kappa).iter().filter(|&&j| active[j].is_some()).count();
                    moving as f64 / kappa as f64 >= rho
                })
                .collect();
            for i in ready {
                if self.rng.random_bool(LT_ACTIVATION) {
                    active[i] = Some(tau);
                }
            }
        } else if tau == pre {
            // coordination: the whole group is on the move
            for slot in active.iter_mut().filter(|s| s.is_none()) {
                *slot = Some(pre);
            }
        }
    }

    /// Advances one event and returns each individual's departure step.
    fn run_event(&mut self, plans: &[Plan], activation: Activation) -> Vec<Option<usize>> {
        let n = self.cfg.n;
        let moving_until = self.cfg.pre_len + self.cfg.coord_len;
        let active = (self.cfg.post_len as f64 * POST_ACTIVE_FRACTION).max(1.0);
        let quiet_from = moving_until + active as usize;
        let stops: Vec<f64> = (0..n).map(|_| active - self.rng.random::<f64>() * active).collect();
        let rest: Vec<f64> = (0..n)
            .map(|_| self.cfg.circle_radius * self.rng.random::<f64>().sqrt())
            .collect();
        let (mut depart, threshold) = match activation {
            Activation::Scheduled(d) => (d, None),
            Activation::Threshold { leader, kappa, rho } => (vec![None; n], Some((leader, kappa, rho))),
        };
        for tau in 0..self.cfg.event_len() {
            if let Some((leader, kappa, rho)) = threshold {
                self.contagion(tau, leader, kappa, rho, &mut depart);
            }
            if self.frames.is_empty() {
                self.frames.push(self.pos.clone());
                continue;
            }
            let prev = self.pos.clone();
            for (i, plan) in plans.iter().enumerate() {
                // one draw per individual per step keeps the stream aligned
                let jitter = self.noise.sample(&mut self.rng);
                if !depart[i].is_some_and(|d| d <= tau) || tau >= quiet_from {
                    continue;
                }
                let post_phase = tau >= moving_until;
                let factor = if post_phase {
                    (1.0 - (tau - moving_until) as f64 / stops[i]).max(0.0)
                } else {
                    1.0
                };
                let mut step = plan.speed * factor;
                let angle = match plan.goal {
                    Goal::Heading(h) => h[1].atan2(h[0]),
                    Goal::Pursue(j) => {
                        // pursuers close in on their target before stopping
                        let standoff = if post_phase { plan.standoff.max(rest[i]) } else { plan.standoff };
                        let speed = if post_phase { CLOSING_FACTOR * plan.speed } else { plan.speed };
                        step = speed.min(distance(prev[i], prev[j]) - standoff);
                        (prev[j][1] - prev[i][1]).atan2(prev[j][0] - prev[i][0])
                    }
                    Goal::Destination(p) => {
                        step = step.min(distance(prev[i], p));
                        (p[1] - prev[i][1]).atan2(p[0] - prev[i][0])
                    }
                };
                if step <= 0.0 {
                    continue;
                }
                let angle = if plan.noisy { angle + jitter } else { angle };
                let d = unit(angle);
                self.pos[i] = [prev[i][0] + step * d[0], prev[i][1] + step * d[1]];
            }
            self.frames.push(self.pos.clone());
        }
        depart
    }

    fn into_dataset(self) -> Result<Dataset> {
        let n = self.cfg.n;
        let t = self.frames.len();
        let mut values = Vec::with_capacity(n * 2 * t);
        for i in 0..n {
            for d in 0..2 {
                values.extend(self.frames.iter().map(|f| f[i][d]));
            }
        }
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(ids, 2, t, values)
    }
}
