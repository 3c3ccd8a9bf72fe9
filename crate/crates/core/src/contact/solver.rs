use serde::{Deserialize, Serialize};

use super::halfspace::ElasticHalfSpace;
use super::indenter::Indenter;
use super::influence::{Convolver, InfluenceKernel};
use crate::error::{Error, Result};

/// Square grid of traction cells in layer coordinates (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactGrid {
    /// Lower-left corner of cell `(0, 0)`.
    pub origin: [f64; 2],
    /// Cell edge length.
    pub cell: f64,
    pub n: usize,
}

impl ContactGrid {
    pub fn centered(center: [f64; 2], half_width: f64, n: usize) -> Self {
        Self {
            origin: [center[0] - half_width, center[1] - half_width],
            cell: 2.0 * half_width / n as f64,
            n,
        }
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.cell,
            self.origin[1] + (j as f64 + 0.5) * self.cell,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NormalSolver {
    /// Constrained conjugate gradient with FFT-accelerated deflections.
    ConjugateGradient,
    /// Projected (over-relaxed) Gauss–Seidel sweeps on the dense LCP.
    ProjectedGaussSeidel { relaxation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub method: NormalSolver,
    /// Bound on `max |min(gap, k₀·p)|` relative to the penetration depth.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: NormalSolver::ConjugateGradient,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// Force on the gel surface at a node, with the node's undeformed position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalForce {
    pub position: [f64; 2],
    /// (Fx, Fy, Fz) in N; compression is negative z.
    pub force: [f64; 3],
}

/// Surface tractions for one indentation step.
///
/// `pressure` is the normal traction pressing into the gel (N/mm², ≥ 0) and
/// `shear` the tangential traction on the gel surface. Both are indexed
/// `j * n + i` with `i` along x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSolution {
    pub grid: ContactGrid,
    pub pressure: Vec<f64>,
    pub shear: Vec<[f64; 2]>,
    pub nodal_forces: Vec<NodalForce>,
    /// Final gap per cell (mm); infinite where the indenter has no face.
    #[serde(skip)]
    pub gap: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl ContactSolution {
    pub fn empty(grid: ContactGrid) -> Self {
        let len = grid.len();
        Self {
            grid,
            pressure: vec![0.0; len],
            shear: vec![[0.0; 2]; len],
            nodal_forces: Vec::new(),
            gap: vec![f64::INFINITY; len],
            iterations: 0,
            residual: 0.0,
        }
    }

    /// Component-wise integral of the traction grids, in the gel frame (N).
    pub fn total_force(&self) -> [f64; 3] {
        let a = self.grid.cell_area();
        let mut f = [0.0; 3];
        for (p, s) in self.pressure.iter().zip(&self.shear) {
            f[0] += s[0] * a;
            f[1] += s[1] * a;
            f[2] -= p * a;
        }
        f
    }

    /// Total normal load magnitude `Σ p·A` (N).
    pub fn normal_force(&self) -> f64 {
        self.pressure.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn nodal_force_sum(&self) -> [f64; 3] {
        self.nodal_forces.iter().fold([0.0; 3], |mut acc, nf| {
            for c in 0..3 {
                acc[c] += nf.force[c];
            }
            acc
        })
    }

    pub(crate) fn rebuild_nodal_forces(&mut self) {
        let a = self.grid.cell_area();
        let n = self.grid.n;
        self.nodal_forces.clear();
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let p = self.pressure[k];
                let s = self.shear[k];
                if p > 0.0 || s != [0.0, 0.0] {
                    self.nodal_forces.push(NodalForce {
                        position: self.grid.cell_center(i, j),
                        force: [s[0] * a, s[1] * a, -p * a],
                    });
                }
            }
        }
    }

    /// Largest `p·gap` over loaded cells.
    pub fn complementarity_residual(&self) -> f64 {
        self.pressure
            .iter()
            .zip(&self.gap)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, g)| (p * g).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves the frictionless normal contact of a rigid indenter on the
/// half-space with default solver settings.
pub fn solve_normal_contact(
    halfspace: &ElasticHalfSpace,
    indenter: &Indenter,
    grid_n: usize,
) -> Result<ContactSolution> {
    solve_normal_contact_with(halfspace, indenter, grid_n, &SolverSettings::default())
}

pub fn solve_normal_contact_with(
    halfspace: &ElasticHalfSpace,
    indenter: &Indenter,
    grid_n: usize,
    settings: &SolverSettings,
) -> Result<ContactSolution> {
    halfspace.validate()?;
    indenter.validate()?;
    if grid_n < 16 {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be at least 16, got {grid_n}"
        )));
    }

    let pose = indenter.pose;
    let reach = indenter.reach();
    let [w, h] = halfspace.layer_size;
    if pose.x - reach < 0.0 || pose.y - reach < 0.0 || pose.x + reach > w || pose.y + reach > h {
        return Err(Error::Domain(format!(
            "indenter footprint (reach {reach:.3} mm at ({:.3}, {:.3})) leaves the {w}×{h} mm layer",
            pose.x, pose.y
        )));
    }

    let half = (reach * 1.05).max(0.05);
    let grid = ContactGrid::centered([pose.x, pose.y], half, grid_n);
    if pose.depth == 0.0 {
        return Ok(ContactSolution::empty(grid));
    }

    let n = grid_n;
    let mut g0 = vec![f64::INFINITY; n * n];
    for j in 0..n {
        for i in 0..n {
            let [x, y] = grid.cell_center(i, j);
            g0[j * n + i] = indenter.initial_gap(x, y, grid.cell);
        }
    }
    let candidate: Vec<bool> = g0.iter().map(|&g| g < 0.0).collect();
    if !candidate.iter().any(|&c| c) {
        return Ok(ContactSolution::empty(grid));
    }

    let kernel = InfluenceKernel::new(n, grid.cell, halfspace.surface_compliance());
    let problem = Lcp {
        kernel: &kernel,
        g0: &g0,
        candidate: &candidate,
        scale: pose.depth,
        tolerance: settings.tolerance,
        max_iterations: settings.max_iterations,
    };
    let (pressure, iterations) = match settings.method {
        NormalSolver::ConjugateGradient => problem.solve_cg()?,
        NormalSolver::ProjectedGaussSeidel { relaxation } => {
            if !(relaxation > 0.0 && relaxation < 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "relaxation must lie in (0, 2), got {relaxation}"
                )));
            }
            problem.solve_pgs(relaxation)?
        }
    };

    let deflection = Convolver::new(&kernel).apply(&pressure);
    let gap: Vec<f64> = g0.iter().zip(&deflection).map(|(g, w)| g + w).collect();
    let residual = problem.residual(&pressure, &gap);

    let mut sol = ContactSolution {
        grid,
        pressure,
        shear: vec![[0.0; 2]; n * n],
        nodal_forces: Vec::new(),
        gap,
        iterations,
        residual,
    };
    sol.rebuild_nodal_forces();
    Ok(sol)
}

struct Lcp<'a> {
    kernel: &'a InfluenceKernel,
    g0: &'a [f64],
    candidate: &'a [bool],
    scale: f64,
    tolerance: f64,
    max_iterations: usize,
}

impl Lcp<'_> {
    fn residual(&self, p: &[f64], gap: &[f64]) -> f64 {
        let k0 = self.kernel.self_term();
        let mut r: f64 = 0.0;
        for k in 0..p.len() {
            if self.candidate[k] {
                r = r.max(gap[k].min(k0 * p[k]).abs());
            }
        }
        r / self.scale
    }

    /// Displacement-controlled constrained conjugate gradient.
    fn solve_cg(&self) -> Result<(Vec<f64>, usize)> {
        let conv = Convolver::new(self.kernel);
        let k0 = self.kernel.self_term();
        let len = self.g0.len();
        let mut p: Vec<f64> = (0..len)
            .map(|k| if self.candidate[k] { -0.1 * self.g0[k] / k0 } else { 0.0 })
            .collect();
        let mut t = vec![0.0; len];
        let mut g_old = 1.0;
        let mut conjugate = false;
        let mut residual = f64::INFINITY;

        for it in 0..self.max_iterations {
            let w = conv.apply(&p);
            let gap: Vec<f64> = (0..len)
                .map(|k| if self.candidate[k] { w[k] + self.g0[k] } else { f64::INFINITY })
                .collect();
            residual = self.residual(&p, &gap);
            if residual <= self.tolerance {
                return Ok((p, it));
            }

            let active_mask: Vec<bool> = (0..len).map(|k| self.candidate[k] && p[k] > 0.0).collect();
            let active = |k: usize| active_mask[k];
            let g_norm: f64 = (0..len).filter(|&k| active(k)).map(|k| gap[k] * gap[k]).sum();
            let beta = if conjugate && g_old > 0.0 { g_norm / g_old } else { 0.0 };
            for k in 0..len {
                t[k] = if active(k) { gap[k] + beta * t[k] } else { 0.0 };
            }
            g_old = g_norm;

            let r = conv.apply(&t);
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..len {
                if active(k) {
                    num += gap[k] * t[k];
                    den += r[k] * t[k];
                }
            }
            let tau = if den > 0.0 { num / den } else { 0.0 };
            for k in 0..len {
                if active(k) {
                    p[k] = (p[k] - tau * t[k]).max(0.0);
                }
            }
            let mut overlap = false;
            for k in 0..len {
                if self.candidate[k] && p[k] == 0.0 && gap[k] < 0.0 {
                    // Restart from steepest descent whenever cells re-enter.
                    p[k] = -tau * gap[k];
                    overlap = true;
                }
            }
            conjugate = !overlap;
        }
        Err(Error::SolverFailure {
            iterations: self.max_iterations,
            residual,
        })
    }

    fn solve_pgs(&self, relaxation: f64) -> Result<(Vec<f64>, usize)> {
        let n = self.kernel.grid_size();
        let k0 = self.kernel.self_term();
        let cells: Vec<usize> = (0..self.g0.len()).filter(|&k| self.candidate[k]).collect();
        let coords: Vec<(isize, isize)> =
            cells.iter().map(|&k| ((k % n) as isize, (k / n) as isize)).collect();
        let m = cells.len();
        let mut p = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mut residual = f64::INFINITY;

        for sweep in 0..self.max_iterations {
            for a in 0..m {
                let gap = w[a] + self.g0[cells[a]];
                let next = (p[a] - relaxation * gap / k0).max(0.0);
                let delta = next - p[a];
                if delta != 0.0 {
                    p[a] = next;
                    let (ia, ja) = coords[a];
                    for (b, &(ib, jb)) in coords.iter().enumerate() {
                        w[b] += delta * self.kernel.at(ib - ia, jb - ja);
                    }
                }
            }
            residual = (0..m)
                .map(|a| (w[a] + self.g0[cells[a]]).min(k0 * p[a]).abs())
                .fold(0.0, f64::max)
                / self.scale;
            if residual <= self.tolerance {
                let mut full = vec![0.0; self.g0.len()];
                for (a, &k) in cells.iter().enumerate() {
                    full[k] = p[a];
                }
                return Ok((full, sweep + 1));
            }
        }
        Err(Error::SolverFailure {
            iterations: self.max_iterations,
            residual,
        })
    }
}
