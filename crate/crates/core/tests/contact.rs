use std::f64::consts::PI;

use tactile_sim::contact::green::{boussinesq, cerruti};
use tactile_sim::contact::{
    flat_punch_force, generate_trajectory, hertz_force, solve_normal_contact, solve_normal_contact_with, ElasticHalfSpace,
    Indenter, IndenterShape, NormalSolver, Pose, SolverSettings, TrajectoryConfig, TrajectoryKind,
};
use tactile_sim::Error;

fn sphere(radius: f64, depth: f64) -> Indenter {
    Indenter::new(IndenterShape::Sphere { radius }, Pose { x: 15.0, y: 15.0, depth, yaw: 0.0 })
}

#[test]
fn hertz_load_within_three_percent() {
    let hs = ElasticHalfSpace::default();
    for d in [0.2, 0.5, 1.0] {
        let sol = solve_normal_contact(&hs, &sphere(3.0, d), 64).unwrap();
        let f = hertz_force(hs.effective_modulus(), 3.0, d);
        let rel = (sol.normal_force() - f).abs() / f;
        assert!(rel < 0.03, "depth {d}: {} vs {f}", sol.normal_force());
    }
}

#[test]
fn hertz_grid_refinement_converges() {
    let hs = ElasticHalfSpace::default();
    let a = solve_normal_contact(&hs, &sphere(3.0, 0.5), 32).unwrap().normal_force();
    let b = solve_normal_contact(&hs, &sphere(3.0, 0.5), 64).unwrap().normal_force();
    assert!((a - b).abs() / b < 0.02, "{a} vs {b}");
}

#[test]
fn hertz_load_scales_with_depth_to_three_halves() {
    let hs = ElasticHalfSpace::default();
    let depths: [f64; 5] = [0.2, 0.35, 0.5, 0.7, 1.0];
    let pts: Vec<(f64, f64)> = depths
        .iter()
        .map(|&d| (d.ln(), solve_normal_contact(&hs, &sphere(3.0, d), 64).unwrap().normal_force().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 1.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn flat_punch_within_five_percent() {
    let hs = ElasticHalfSpace::default();
    let ind = Indenter::new(IndenterShape::FlatCircle { radius: 2.0 }, Pose { x: 15.0, y: 15.0, depth: 0.3, yaw: 0.0 });
    let sol = solve_normal_contact(&hs, &ind, 64).unwrap();
    let f = flat_punch_force(hs.effective_modulus(), 2.0, 0.3);
    assert!((sol.normal_force() - f).abs() / f < 0.05);
}

#[test]
fn complementarity_holds() {
    let hs = ElasticHalfSpace::default();
    for shape in [
        IndenterShape::Sphere { radius: 2.0 },
        IndenterShape::FlatSquare { side: 3.0 },
        IndenterShape::FlatTriangle { side: 4.5 },
        IndenterShape::TiltedPlane { angle: 10f64.to_radians(), radius: 4.0 },
    ] {
        let ind = Indenter::new(shape, Pose { x: 14.0, y: 16.0, depth: 0.6, yaw: 0.4 });
        let sol = solve_normal_contact(&hs, &ind, 48).unwrap();
        assert!(sol.pressure.iter().all(|&p| p >= 0.0), "{shape}");
        assert!(sol.gap.iter().all(|&g| g >= -1e-9 * 0.6), "{shape}");
        let pmax = sol.pressure.iter().cloned().fold(0.0, f64::max);
        assert!(sol.complementarity_residual() <= 1e-8 * pmax * 0.6, "{shape}");
    }
}

#[test]
fn nodal_forces_sum_to_total() {
    let hs = ElasticHalfSpace::default();
    let sol = solve_normal_contact(&hs, &sphere(2.5, 0.8), 48).unwrap().apply_shear([0.3, -0.1], &hs);
    let (t, s) = (sol.total_force(), sol.nodal_force_sum());
    for c in 0..3 {
        assert!((t[c] - s[c]).abs() <= 1e-9 * t[2].abs(), "channel {c}");
    }
}

#[test]
fn zero_depth_gives_no_load() {
    let hs = ElasticHalfSpace::default();
    let sol = solve_normal_contact(&hs, &sphere(3.0, 0.0), 32).unwrap();
    assert_eq!(sol.normal_force(), 0.0);
    assert!(sol.nodal_forces.is_empty());
}

#[test]
fn indenter_outside_layer_is_a_domain_error() {
    let hs = ElasticHalfSpace::default();
    let ind = Indenter::new(IndenterShape::Sphere { radius: 3.0 }, Pose { x: 1.0, y: 15.0, depth: 1.0, yaw: 0.0 });
    assert!(matches!(solve_normal_contact(&hs, &ind, 32), Err(Error::Domain(_))));
}

#[test]
fn invalid_material_rejected() {
    assert!(ElasticHalfSpace::new(50e3, 0.5, 0.9).is_err());
    assert!(ElasticHalfSpace::new(-1.0, 0.3, 0.9).is_err());
    assert!(ElasticHalfSpace::new(50e3, 0.3, -0.1).is_err());
}

#[test]
fn gauss_seidel_agrees_with_conjugate_gradient() {
    let hs = ElasticHalfSpace::default();
    let ind = Indenter::new(IndenterShape::FlatSquare { side: 3.0 }, Pose { x: 15.0, y: 15.0, depth: 0.4, yaw: 0.3 });
    let cg = solve_normal_contact(&hs, &ind, 24).unwrap();
    let pgs = solve_normal_contact_with(
        &hs,
        &ind,
        24,
        &SolverSettings {
            method: NormalSolver::ProjectedGaussSeidel { relaxation: 1.6 },
            ..SolverSettings::default()
        },
    )
    .unwrap();
    let (a, b) = (cg.normal_force(), pgs.normal_force());
    assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
}

#[test]
fn yaw_and_translation_leave_sphere_load_unchanged() {
    let hs = ElasticHalfSpace::default();
    let a = solve_normal_contact(&hs, &sphere(3.0, 0.5), 48).unwrap().normal_force();
    let moved = Indenter::new(IndenterShape::Sphere { radius: 3.0 }, Pose { x: 11.0, y: 19.0, depth: 0.5, yaw: 1.1 });
    let b = solve_normal_contact(&hs, &moved, 48).unwrap().normal_force();
    assert!((a - b).abs() / a < 1e-6);
}

#[test]
fn shear_zero_offset_is_frictionless() {
    let hs = ElasticHalfSpace::default();
    let sol = solve_normal_contact(&hs, &sphere(3.0, 0.5), 32).unwrap();
    let s = sol.apply_shear([0.0, 0.0], &hs);
    assert_eq!(s.total_force()[0], 0.0);
    assert_eq!(s.total_force()[1], 0.0);
}

#[test]
fn saturated_shear_meets_coulomb_bound_along_offset() {
    let hs = ElasticHalfSpace::default();
    let sol = solve_normal_contact(&hs, &sphere(3.0, 0.5), 48).unwrap();
    let s = sol.apply_shear([-300.0, 400.0], &hs);
    assert_eq!(s.slip_fraction(&hs), 1.0);
    let t = s.total_force();
    let mag = t[0].hypot(t[1]);
    assert!((mag - 0.9 * t[2].abs()).abs() / mag < 1e-6);
    assert!((t[0] / mag + 0.6).abs() < 1e-9 && (t[1] / mag - 0.8).abs() < 1e-9);
    assert_eq!(s.pressure, sol.pressure);
}

#[test]
fn small_offset_sticks_and_grows_linearly() {
    let hs = ElasticHalfSpace::default();
    let sol = solve_normal_contact(&hs, &sphere(3.0, 1.0), 48).unwrap();
    let a = sol.apply_shear([0.001, 0.0], &hs);
    let b = sol.apply_shear([0.002, 0.0], &hs);
    assert!(a.slip_fraction(&hs) < 0.5);
    assert!(b.total_force()[0] > a.total_force()[0]);
    assert!(b.total_force()[0] <= 2.0 * a.total_force()[0] * (1.0 + 1e-12));
}

#[test]
fn boussinesq_matches_closed_form() {
    let hs = ElasticHalfSpace::default();
    let (e, nu) = (hs.modulus(), hs.poisson_ratio);
    let g = hs.shear_modulus();
    let (x, y, z): (f64, f64, f64) = (0.7, -0.4, 1.3);
    let r = (x * x + y * y + z * z).sqrt();
    let u = boussinesq(x, y, z, &hs);
    let uz = (1.0 + nu) / (2.0 * PI * e * r) * (2.0 * (1.0 - nu) + z * z / (r * r));
    let ux = 1.0 / (4.0 * PI * g) * (x * z / r.powi(3) - (1.0 - 2.0 * nu) * x / (r * (r + z)));
    assert!((u[2] - uz).abs() < 1e-12 * uz.abs());
    assert!((u[0] - ux).abs() < 1e-12 * ux.abs().max(1e-12));
}

#[test]
fn cerruti_mirror_symmetry() {
    let hs = ElasticHalfSpace::default();
    let a = cerruti(0.8, 0.5, 1.0, &hs);
    let b = cerruti(0.8, -0.5, 1.0, &hs);
    assert!((a[0] - b[0]).abs() < 1e-15);
    assert!((a[1] + b[1]).abs() < 1e-15);
    let c = cerruti(-0.8, 0.5, 1.0, &hs);
    assert!((a[0] - c[0]).abs() < 1e-15);
    assert!((a[2] + c[2]).abs() < 1e-15);
}

#[test]
fn trajectories_respect_bounds() {
    let cfg = TrajectoryConfig::default();
    for seed in 0..300 {
        let t = generate_trajectory(seed, &cfg).unwrap();
        assert_eq!(t.steps.len(), cfg.steps);
        let reach = t.shape.reach(cfg.max_depth);
        let mut prev = t.first_contact;
        for s in &t.steps {
            let p = s.indenter_pose;
            assert!(p.depth >= 0.0 && p.depth <= cfg.max_depth + 1e-12);
            assert!(s.lateral_offset[0].hypot(s.lateral_offset[1]) <= cfg.max_lateral + 1e-9);
            assert!((p.x - prev.x).abs() <= cfg.max_step + 1e-12);
            assert!((p.y - prev.y).abs() <= cfg.max_step + 1e-12);
            assert!((p.depth - prev.depth).abs() <= cfg.max_step + 1e-12);
            assert!(p.x - reach >= 0.0 && p.x + reach <= 30.0 && p.y - reach >= 0.0 && p.y + reach <= 30.0);
            prev = p;
        }
    }
}

#[test]
fn trajectory_kind_fraction() {
    let cfg = TrajectoryConfig::default();
    let n = 10_000;
    let vertical = (0..n)
        .filter(|&s| generate_trajectory(s, &cfg).unwrap().kind == TrajectoryKind::VerticalThenShear)
        .count();
    let frac = vertical as f64 / n as f64;
    assert!((frac - 0.8).abs() <= 0.02, "{frac}");
}
