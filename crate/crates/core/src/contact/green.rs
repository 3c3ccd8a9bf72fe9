//! Point-load Green's functions of the elastic half-space.
//!
//! Coordinates are relative to the load point with `depth` measured into the
//! solid. Returned vertical components are positive into the solid.

use std::f64::consts::PI;

use super::halfspace::ElasticHalfSpace;
use super::solver::ContactSolution;
use crate::error::{Error, Result};

#[inline]
fn prefactor(hs: &ElasticHalfSpace) -> f64 {
    (1.0 + hs.poisson_ratio) / (2.0 * PI * hs.modulus())
}

/// Displacement per unit normal load (Boussinesq).
#[inline]
pub fn boussinesq(x: f64, y: f64, depth: f64, hs: &ElasticHalfSpace) -> [f64; 3] {
    let nu = hs.poisson_ratio;
    let c = prefactor(hs);
    let rho = (x * x + y * y + depth * depth).sqrt();
    let rho3 = rho * rho * rho;
    let radial = depth / rho3 - (1.0 - 2.0 * nu) / (rho * (rho + depth));
    [
        c * x * radial,
        c * y * radial,
        c * (depth * depth / rho3 + 2.0 * (1.0 - nu) / rho),
    ]
}

/// Displacement per unit tangential load along +x (Cerruti).
#[inline]
pub fn cerruti(x: f64, y: f64, depth: f64, hs: &ElasticHalfSpace) -> [f64; 3] {
    let nu = hs.poisson_ratio;
    let c = prefactor(hs);
    let rho = (x * x + y * y + depth * depth).sqrt();
    let rho3 = rho * rho * rho;
    let rz = rho + depth;
    let k = 1.0 - 2.0 * nu;
    [
        c * (1.0 / rho + x * x / rho3 + k * (1.0 / rz - x * x / (rho * rz * rz))),
        c * (x * y / rho3 - k * x * y / (rho * rz * rz)),
        c * (x * depth / rho3 + k * x / (rho * rz)),
    ]
}

/// Concentrated surface loads equivalent to a traction solution.
#[derive(Debug, Clone)]
pub struct SurfaceLoads {
    /// (x, y, normal load into the solid, tangential x, tangential y) in mm and N.
    loads: Vec<[f64; 5]>,
    cell: f64,
    surface_z: f64,
    hs: ElasticHalfSpace,
}

const NEAR_FIELD_CELLS: f64 = 2.0;
const SUBDIVISIONS: usize = 4;

impl SurfaceLoads {
    pub fn new(solution: &ContactSolution, hs: &ElasticHalfSpace) -> Self {
        let grid = solution.grid;
        let a = grid.cell_area();
        let mut loads = Vec::new();
        for j in 0..grid.n {
            for i in 0..grid.n {
                let k = j * grid.n + i;
                let p = solution.pressure[k];
                let s = solution.shear[k];
                if p != 0.0 || s[0] != 0.0 || s[1] != 0.0 {
                    let [x, y] = grid.cell_center(i, j);
                    loads.push([x, y, p * a, s[0] * a, s[1] * a]);
                }
            }
        }
        Self {
            loads,
            cell: grid.cell,
            surface_z: hs.gel_thickness,
            hs: *hs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    fn accumulate(&self, out: &mut [f64; 3], dx: f64, dy: f64, depth: f64, load: &[f64; 5], w: f64) {
        if dx * dx + dy * dy + depth * depth < 1e-24 {
            return;
        }
        let b = boussinesq(dx, dy, depth, &self.hs);
        let cx = cerruti(dx, dy, depth, &self.hs);
        // Load along +y: swap the roles of x and y.
        let cy = cerruti(dy, dx, depth, &self.hs);
        let (pz, qx, qy) = (load[2] * w, load[3] * w, load[4] * w);
        out[0] += pz * b[0] + qx * cx[0] + qy * cy[1];
        out[1] += pz * b[1] + qx * cx[1] + qy * cy[0];
        out[2] += pz * b[2] + qx * cx[2] + qy * cy[2];
    }

    /// Displacement of a gel-frame point (z up, surface at `gel_thickness`),
    /// returned in the gel frame.
    pub fn displacement(&self, point: [f64; 3]) -> Result<[f64; 3]> {
        let [x, y, z] = point;
        if !(z >= -1e-12 && z <= self.surface_z + 1e-12) {
            return Err(Error::Domain(format!(
                "evaluation point z = {z} outside the gel (0..{})",
                self.surface_z
            )));
        }
        let depth = (self.surface_z - z).max(0.0);
        let near2 = (NEAR_FIELD_CELLS * self.cell).powi(2);
        let mut u = [0.0; 3];
        for load in &self.loads {
            let dx = x - load[0];
            let dy = y - load[1];
            if dx * dx + dy * dy + depth * depth >= near2 {
                self.accumulate(&mut u, dx, dy, depth, load, 1.0);
            } else {
                // Cell-averaged kernel: midpoint rule over sub-cells.
                let s = self.cell / SUBDIVISIONS as f64;
                let w = 1.0 / (SUBDIVISIONS * SUBDIVISIONS) as f64;
                for a in 0..SUBDIVISIONS {
                    for b in 0..SUBDIVISIONS {
                        let ox = -0.5 * self.cell + (a as f64 + 0.5) * s;
                        let oy = -0.5 * self.cell + (b as f64 + 0.5) * s;
                        self.accumulate(&mut u, dx - ox, dy - oy, depth, load, w);
                    }
                }
            }
        }
        Ok([u[0], u[1], -u[2]])
    }
}

impl ContactSolution {
    /// Displacement (mm, gel frame) at a gel-frame point from the superposed
    /// Boussinesq and Cerruti responses of every loaded cell.
    pub fn displacement_at(&self, point: [f64; 3], halfspace: &ElasticHalfSpace) -> Result<[f64; 3]> {
        SurfaceLoads::new(self, halfspace).displacement(point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs() -> ElasticHalfSpace {
        ElasticHalfSpace::new(50e3, 0.3, 0.9).unwrap()
    }

    #[test]
    fn boussinesq_surface_deflection() {
        let h = hs();
        let r: f64 = 1.7;
        let uz = boussinesq(r, 0.0, 0.0, &h)[2];
        let expected = (1.0 - 0.09) / (PI * h.modulus() * r);
        assert!((uz - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn surface_reciprocity() {
        // Betti: u_x at A from a normal load at B equals u_z at B from an
        // x-load at A, for any pair of surface points.
        let h = hs();
        let (bx, by) = (1.3, -0.4);
        let ux_at_a = boussinesq(-bx, -by, 0.0, &h)[0];
        let uz_at_b = cerruti(bx, by, 0.0, &h)[2];
        assert!((ux_at_a - uz_at_b).abs() < 1e-12 * uz_at_b.abs());
    }

    /// Navier's equation `μ∇²u + (λ+μ)∇(∇·u) = 0` by central differences.
    fn navier_residual(f: impl Fn(f64, f64, f64) -> [f64; 3], p: [f64; 3], h: &ElasticHalfSpace) -> f64 {
        let e = h.modulus();
        let nu = h.poisson_ratio;
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let d = 1e-3;
        let at = |dx: [f64; 3]| f(p[0] + dx[0], p[1] + dx[1], p[2] + dx[2]);
        let unit = |k: usize, s: f64| {
            let mut v = [0.0; 3];
            v[k] = s;
            v
        };
        let mut worst: f64 = 0.0;
        let scale = f(p[0], p[1], p[2]).iter().map(|v| v.abs()).fold(0.0, f64::max) / (p[2] * p[2]);
        for c in 0..3 {
            let u0 = at([0.0; 3])[c];
            let mut lap = 0.0;
            for k in 0..3 {
                lap += (at(unit(k, d))[c] - 2.0 * u0 + at(unit(k, -d))[c]) / (d * d);
            }
            let mut grad_div = 0.0;
            for k in 0..3 {
                if k == c {
                    grad_div += (at(unit(k, d))[k] - 2.0 * u0 + at(unit(k, -d))[k]) / (d * d);
                } else {
                    let mut pp = [0.0; 3];
                    pp[c] = d;
                    pp[k] = d;
                    let mut pm = pp;
                    pm[k] = -d;
                    let mut mp = pp;
                    mp[c] = -d;
                    let mut mm = [0.0; 3];
                    mm[c] = -d;
                    mm[k] = -d;
                    grad_div += (at(pp)[k] - at(pm)[k] - at(mp)[k] + at(mm)[k]) / (4.0 * d * d);
                }
            }
            worst = worst.max((mu * lap + (lambda + mu) * grad_div).abs() / (mu * scale));
        }
        worst
    }

    #[test]
    fn kernels_satisfy_navier_equation() {
        let h = hs();
        for p in [[0.7, -0.3, 1.1], [-1.5, 0.9, 0.6], [0.2, 0.1, 2.5]] {
            let rb = navier_residual(|x, y, z| boussinesq(x, y, z, &h), p, &h);
            let rc = navier_residual(|x, y, z| cerruti(x, y, z, &h), p, &h);
            assert!(rb < 1e-4, "boussinesq residual {rb}");
            assert!(rc < 1e-4, "cerruti residual {rc}");
        }
    }

    /// σ_zz, σ_xz, σ_yz vanish on the free surface away from the load.
    #[test]
    fn surface_is_traction_free() {
        let h = hs();
        let e = h.modulus();
        let nu = h.poisson_ratio;
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let d = 1e-5;
        for kernel in [boussinesq, cerruti] {
            let f = |x: f64, y: f64, z: f64| kernel(x, y, z, &h);
            let (x, y) = (0.8, -0.5);
            // One-sided differences in depth at the surface.
            let dz = |c: usize| (-3.0 * f(x, y, 0.0)[c] + 4.0 * f(x, y, d)[c] - f(x, y, 2.0 * d)[c]) / (2.0 * d);
            let dx = |c: usize| (f(x + d, y, 0.0)[c] - f(x - d, y, 0.0)[c]) / (2.0 * d);
            let dy = |c: usize| (f(x, y + d, 0.0)[c] - f(x, y - d, 0.0)[c]) / (2.0 * d);
            let div = dx(0) + dy(1) + dz(2);
            let szz = lambda * div + 2.0 * mu * dz(2);
            let sxz = mu * (dz(0) + dx(2));
            let syz = mu * (dz(1) + dy(2));
            let scale = mu * f(x, y, 0.0).iter().map(|v| v.abs()).fold(0.0, f64::max);
            for s in [szz, sxz, syz] {
                assert!(s.abs() < 1e-4 * scale, "traction {s} vs scale {scale}");
            }
        }
    }
}
