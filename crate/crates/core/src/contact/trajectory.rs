use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::indenter::{IndenterShape, Pose};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// Vertical indentation followed by horizontal translations at constant depth.
    VerticalThenShear,
    /// Oblique approach followed by random 3D perturbations near first contact.
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    /// Current indenter pose (the horizontal position includes the offset).
    pub indenter_pose: Pose,
    /// Horizontal offset from the first-contact pose (mm).
    pub lateral_offset: [f64; 2],
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub shape: IndenterShape,
    pub first_contact: Pose,
    pub steps: Vec<TrajectoryStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub steps: usize,
    pub max_depth: f64,
    pub min_depth: f64,
    pub max_lateral: f64,
    /// Per-axis bound on the pose change between consecutive steps (mm).
    pub max_step: f64,
    pub vertical_fraction: f64,
    pub layer_size: [f64; 2],
    /// Extra clearance between the swept footprint and the layer edge (mm).
    pub edge_margin: f64,
    pub indenters: Vec<IndenterShape>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            steps: 50,
            max_depth: 2.0,
            min_depth: 0.5,
            max_lateral: 3.0,
            max_step: 0.1,
            vertical_fraction: 0.8,
            layer_size: [30.0, 30.0],
            edge_margin: 0.2,
            indenters: default_indenter_set(),
        }
    }
}

/// Twenty-one indenters: the six test families plus size variants.
pub fn default_indenter_set() -> Vec<IndenterShape> {
    let mut set = Vec::with_capacity(21);
    for r in [1.5, 2.0, 2.5, 3.0, 4.0, 5.0] {
        set.push(IndenterShape::Sphere { radius: r });
    }
    for r in [1.0, 1.5, 2.0, 3.0] {
        set.push(IndenterShape::FlatCircle { radius: r });
    }
    for s in [2.0, 3.0, 4.0, 6.0] {
        set.push(IndenterShape::FlatSquare { side: s });
    }
    for s in [3.0, 4.5, 6.0, 8.0] {
        set.push(IndenterShape::FlatTriangle { side: s });
    }
    for deg in [5.0f64, 10.0, 15.0] {
        set.push(IndenterShape::TiltedPlane {
            angle: deg.to_radians(),
            radius: 4.0,
        });
    }
    set
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("trajectory config: {m}")));
        if self.steps == 0 {
            return bad("steps must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.max_depth > 0.0 && self.max_depth <= 2.0) {
            return bad("max_depth must lie in (0, 2] mm");
        }
        if !(self.min_depth > 0.0 && self.min_depth <= self.max_depth) {
            return bad("min_depth must lie in (0, max_depth]");
        }
        if !(self.max_lateral >= 0.0 && self.max_lateral <= 3.0) {
            return bad("max_lateral must lie in [0, 3] mm");
        }
        if !(0.0..=1.0).contains(&self.vertical_fraction) {
            return bad("vertical_fraction must lie in [0, 1]");
        }
        if self.indenters.is_empty() {
            return bad("indenter set is empty");
        }
        let vertical_steps = (self.max_depth / self.max_step).ceil() as usize;
        if vertical_steps >= self.steps {
            return bad("too few steps to reach max_depth under the per-step bound");
        }
        for shape in &self.indenters {
            shape.validate()?;
            let clearance = self.clearance(shape);
            if 2.0 * clearance > self.layer_size[0].min(self.layer_size[1]) {
                return bad(&format!("indenter {shape} does not fit in the layer"));
            }
        }
        Ok(())
    }

    fn clearance(&self, shape: &IndenterShape) -> f64 {
        shape.reach(self.max_depth) + self.max_lateral + self.edge_margin
    }
}

/// Fraction `s ∈ (0, 1]` of the remaining move that respects the per-axis bound.
fn bounded_fraction(delta: &[f64], max_step: f64) -> f64 {
    let largest = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if largest <= max_step {
        1.0
    } else {
        max_step / largest
    }
}

/// Draws one indentation trajectory. Deterministic in `seed`.
pub fn generate_trajectory(seed: u64, config: &TrajectoryConfig) -> Result<Trajectory> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let shape = config.indenters[rng.gen_range(0..config.indenters.len())];
    let clearance = config.clearance(&shape);
    let [w, h] = config.layer_size;
    let first_contact = Pose {
        x: rng.gen_range(clearance..=w - clearance),
        y: rng.gen_range(clearance..=h - clearance),
        depth: 0.0,
        yaw: rng.gen_range(0.0..2.0 * PI),
    };
    let kind = if rng.gen_bool(config.vertical_fraction) {
        TrajectoryKind::VerticalThenShear
    } else {
        TrajectoryKind::Perturbed
    };

    // State: lateral offset (dx, dy) and depth.
    let path = match kind {
        TrajectoryKind::VerticalThenShear => vertical_then_shear(&mut rng, config),
        TrajectoryKind::Perturbed => perturbed(&mut rng, config),
    };
    let steps = path
        .into_iter()
        .enumerate()
        .map(|(step_index, [dx, dy, depth])| TrajectoryStep {
            indenter_pose: Pose {
                x: first_contact.x + dx,
                y: first_contact.y + dy,
                depth,
                yaw: first_contact.yaw,
            },
            lateral_offset: [dx, dy],
            step_index,
        })
        .collect();
    Ok(Trajectory {
        kind,
        shape,
        first_contact,
        steps,
    })
}

fn vertical_then_shear(rng: &mut ChaCha8Rng, config: &TrajectoryConfig) -> Vec<[f64; 3]> {
    let target_depth = rng.gen_range(config.min_depth..=config.max_depth);
    let vertical = (target_depth / config.max_step).ceil().max(1.0) as usize;
    let mut path = Vec::with_capacity(config.steps);
    for k in 1..=vertical {
        path.push([0.0, 0.0, target_depth * k as f64 / vertical as f64]);
    }

    // Straight legs between random waypoints inside the lateral disc; the
    // disc is convex, so every intermediate point stays inside it.
    let mut pos = [0.0, 0.0];
    let mut waypoint = random_in_disc(rng, config.max_lateral);
    while path.len() < config.steps {
        let delta = [waypoint[0] - pos[0], waypoint[1] - pos[1]];
        let s = bounded_fraction(&delta, config.max_step);
        pos = [pos[0] + s * delta[0], pos[1] + s * delta[1]];
        path.push([pos[0], pos[1], target_depth]);
        if s == 1.0 {
            waypoint = random_in_disc(rng, config.max_lateral);
        }
    }
    path
}

fn perturbed(rng: &mut ChaCha8Rng, config: &TrajectoryConfig) -> Vec<[f64; 3]> {
    let approach_depth = rng.gen_range(config.min_depth.min(0.3)..=config.max_depth.min(1.0));
    let tilt = rng.gen_range(0.0..PI / 4.0);
    let azimuth = rng.gen_range(0.0..2.0 * PI);
    let lateral_total = (approach_depth * tilt.tan()).min(config.max_lateral);
    let goal = [
        lateral_total * azimuth.cos(),
        lateral_total * azimuth.sin(),
        approach_depth,
    ];

    let mut path = Vec::with_capacity(config.steps);
    let mut state = [0.0, 0.0, 0.0];
    while path.len() < config.steps && state != goal {
        let delta = [goal[0] - state[0], goal[1] - state[1], goal[2] - state[2]];
        let s = bounded_fraction(&delta, config.max_step);
        state = if s == 1.0 {
            goal
        } else {
            [state[0] + s * delta[0], state[1] + s * delta[1], state[2] + s * delta[2]]
        };
        path.push(state);
    }

    let min_depth = config.max_step.min(config.min_depth);
    while path.len() < config.steps {
        let inc = [
            rng.gen_range(-config.max_step..=config.max_step),
            rng.gen_range(-config.max_step..=config.max_step),
            rng.gen_range(-config.max_step..=config.max_step),
        ];
        let mut next = [state[0] + inc[0], state[1] + inc[1], state[2] + inc[2]];
        if next[0].hypot(next[1]) > config.max_lateral {
            next[0] = state[0];
            next[1] = state[1];
        }
        next[2] = next[2].clamp(min_depth, config.max_depth);
        state = next;
        path.push(state);
    }
    path
}

fn random_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen_range(0.0..2.0 * PI);
    [r * a.cos(), r * a.sin()]
}
