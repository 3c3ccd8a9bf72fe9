use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rigid indenter geometry in its local frame. Dimensions in mm, angles in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndenterShape {
    /// Spherically-ended cylinder. The cap uses the paraboloidal profile
    /// `r² / 2R` of small-strain contact theory.
    Sphere { radius: f64 },
    FlatCircle { radius: f64 },
    FlatSquare { side: f64 },
    /// Equilateral triangle, centred on its centroid.
    FlatTriangle { side: f64 },
    /// Flat face tilted by `angle` over a circular footprint of `radius`.
    /// The lowest point sits on the footprint rim at local `-x`.
    TiltedPlane { angle: f64, radius: f64 },
}

impl IndenterShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            IndenterShape::Sphere { radius } | IndenterShape::FlatCircle { radius } => radius > 0.0,
            IndenterShape::FlatSquare { side } | IndenterShape::FlatTriangle { side } => side > 0.0,
            IndenterShape::TiltedPlane { angle, radius } => {
                angle > 0.0 && angle < PI / 2.0 && radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid indenter dimensions: {self:?}")))
        }
    }

    /// Radius (from the pose centre) of the disc that contains every point
    /// the indenter can touch at the given depth.
    pub fn reach(&self, depth: f64) -> f64 {
        match *self {
            IndenterShape::Sphere { radius } => (2.0 * radius * depth).sqrt().min(radius),
            IndenterShape::FlatCircle { radius } => radius,
            IndenterShape::FlatSquare { side } => side / std::f64::consts::SQRT_2,
            IndenterShape::FlatTriangle { side } => side / 3f64.sqrt(),
            IndenterShape::TiltedPlane { radius, .. } => radius,
        }
    }

    /// Height of the indenter surface above its lowest point at local
    /// coordinates `(x, y)`; infinite where the indenter has no face.
    /// `rounding` is the plan-view corner radius applied to flat polygons.
    pub fn profile(&self, x: f64, y: f64, rounding: f64) -> f64 {
        match *self {
            IndenterShape::Sphere { radius } => {
                let r2 = x * x + y * y;
                if r2 < radius * radius {
                    r2 / (2.0 * radius)
                } else {
                    f64::INFINITY
                }
            }
            IndenterShape::FlatCircle { radius } => {
                if x * x + y * y <= radius * radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            IndenterShape::FlatSquare { side } => {
                flat_if_inside(rounded_polygon_sdf(&square(side), side / 2.0, rounding, x, y))
            }
            IndenterShape::FlatTriangle { side } => {
                let inradius = side / (2.0 * 3f64.sqrt());
                flat_if_inside(rounded_polygon_sdf(&triangle(side), inradius, rounding, x, y))
            }
            IndenterShape::TiltedPlane { angle, radius } => {
                if x * x + y * y <= radius * radius {
                    angle.tan() * (x + radius)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            IndenterShape::Sphere { .. } => "sphere",
            IndenterShape::FlatCircle { .. } => "flat_circle",
            IndenterShape::FlatSquare { .. } => "flat_square",
            IndenterShape::FlatTriangle { .. } => "flat_triangle",
            IndenterShape::TiltedPlane { .. } => "tilted_plane",
        }
    }
}

impl fmt::Display for IndenterShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IndenterShape::Sphere { radius } => write!(f, "sphere(r={radius})"),
            IndenterShape::FlatCircle { radius } => write!(f, "flat_circle(r={radius})"),
            IndenterShape::FlatSquare { side } => write!(f, "flat_square(s={side})"),
            IndenterShape::FlatTriangle { side } => write!(f, "flat_triangle(s={side})"),
            IndenterShape::TiltedPlane { angle, radius } => {
                write!(f, "tilted_plane(a={angle:.4},r={radius})")
            }
        }
    }
}

fn flat_if_inside(sdf: f64) -> f64 {
    if sdf <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn square(side: f64) -> Vec<[f64; 2]> {
    let h = side / 2.0;
    vec![[-h, -h], [h, -h], [h, h], [-h, h]]
}

fn triangle(side: f64) -> Vec<[f64; 2]> {
    let circumradius = side / 3f64.sqrt();
    (0..3)
        .map(|k| {
            let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
            [circumradius * a.cos(), circumradius * a.sin()]
        })
        .collect()
}

/// Signed distance to a regular polygon whose corners are rounded with
/// radius `rounding`: shrink about the centroid by `rounding`, then offset.
fn rounded_polygon_sdf(vertices: &[[f64; 2]], inradius: f64, rounding: f64, x: f64, y: f64) -> f64 {
    let rounding = rounding.clamp(0.0, 0.999 * inradius);
    let scale = (inradius - rounding) / inradius;
    let shrunk: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0] * scale, v[1] * scale]).collect();
    polygon_sdf(&shrunk, x, y) - rounding
}

/// Signed distance to a simple polygon, negative inside.
pub(crate) fn polygon_sdf(vertices: &[[f64; 2]], x: f64, y: f64) -> f64 {
    let n = vertices.len();
    let mut d2 = f64::INFINITY;
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + n - 1) % n];
        let e = [b[0] - a[0], b[1] - a[1]];
        let w = [x - a[0], y - a[1]];
        let t = ((w[0] * e[0] + w[1] * e[1]) / (e[0] * e[0] + e[1] * e[1])).clamp(0.0, 1.0);
        let dx = w[0] - e[0] * t;
        let dy = w[1] - e[1] * t;
        d2 = d2.min(dx * dx + dy * dy);
        if (a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
    }
    if inside {
        -d2.sqrt()
    } else {
        d2.sqrt()
    }
}

/// Indenter placement: centre `(x, y)` in layer coordinates (mm), penetration
/// `depth` below the undeformed surface (mm) and `yaw` about the surface normal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indenter {
    pub shape: IndenterShape,
    pub pose: Pose,
}

impl Indenter {
    pub fn new(shape: IndenterShape, pose: Pose) -> Self {
        Self { shape, pose }
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if !(self.pose.depth >= 0.0) || !self.pose.depth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "indentation depth must be non-negative, got {}",
                self.pose.depth
            )));
        }
        Ok(())
    }

    /// Undeformed gap at layer point `(x, y)`: indenter surface height minus
    /// the flat surface. Negative values are geometric interpenetration.
    pub fn initial_gap(&self, x: f64, y: f64, rounding: f64) -> f64 {
        let (s, c) = self.pose.yaw.sin_cos();
        let dx = x - self.pose.x;
        let dy = y - self.pose.y;
        let lx = c * dx + s * dy;
        let ly = -s * dx + c * dy;
        self.shape.profile(lx, ly, rounding) - self.pose.depth
    }

    pub fn reach(&self) -> f64 {
        self.shape.reach(self.pose.depth)
    }
}
