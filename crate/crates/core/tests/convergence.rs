mod common;

use rand::Rng;

use quasivem::assembly::Discretization;
use quasivem::convergence::{
    compute_errors, eoc, run_convergence, ConvergenceConfig, ConvergenceError, MeshSource, SolverChoice, CSV_HEADER,
};
use quasivem::mesh::{element_geometry, generate, write_mesh, MeshKind};
use quasivem::polyquad::integrate_element;
use quasivem::problems::{exact_norms_on, paper_problem, poisson_patch_problem, Poly2};
use quasivem::solver::{fixed_point_solve, SolverOptions};
use quasivem::vemspace::interpolate_global;

fn config(mesh: MeshKind, n0: usize, levels: usize, degree: usize) -> ConvergenceConfig {
    ConvergenceConfig {
        mesh: MeshSource::Generated(mesh),
        n0,
        levels,
        degree,
        ..Default::default()
    }
}

#[test]
fn interpolant_errors_drop_by_four_under_refinement() {
    let problem = paper_problem();
    let u = problem.exact_u.clone().unwrap();
    let mut errs = Vec::new();
    for n in [16, 32] {
        let mesh = generate(MeshKind::Squares, n, 0).unwrap();
        let disc = Discretization::new(&mesh, 1, &problem).unwrap();
        let uh = interpolate_global(|x| u(x), &mesh, disc.dofmap());
        errs.push(compute_errors(&disc, &mesh, &uh, &problem).unwrap().l2_rel);
    }
    let ratio = errs[0] / errs[1];
    assert!((ratio / 4.0 - 1.0).abs() <= 0.15, "{ratio}");
}

#[test]
fn zero_solution_has_unit_relative_error() {
    // Error norms use exactness 2k + 2 while |u|^2 has degree 8, so only
    // k = 3 reproduces the normaliser to round-off.
    let problem = paper_problem();
    let mesh = generate(MeshKind::Voronoi, 6, 0).unwrap();
    for (k, tol) in [(1, 1e-6), (2, 1e-9), (3, 1e-14)] {
        let disc = Discretization::new(&mesh, k, &problem).unwrap();
        let e = compute_errors(&disc, &mesh, &vec![0.0; disc.dofmap().n_dofs()], &problem).unwrap();
        assert!((e.l2_rel - 1.0).abs() < tol, "k={k}: {e:?}");
        assert!((e.h1_rel - 1.0).abs() < tol, "k={k}: {e:?}");
    }
    let disc = Discretization::new(&mesh, 3, &problem).unwrap();
    let e = compute_errors(&disc, &mesh, &vec![0.0; disc.dofmap().n_dofs()], &problem).unwrap();
    let (nu, ng) = exact_norms_on(&problem, &mesh).unwrap();
    assert!((e.l2 - nu).abs() < 1e-15 && (e.h1 - ng).abs() < 1e-15);
}

#[test]
fn quadratic_solution_is_reproduced_at_degree_two() {
    let problem = poisson_patch_problem(Poly2::new(vec![(2, 0, 1.0), (0, 2, 1.0)]));
    for kind in MeshKind::ALL {
        let mesh = generate(kind, 5, 3).unwrap();
        let disc = Discretization::new(&mesh, 2, &problem).unwrap();
        let r = fixed_point_solve(&disc, &problem, &SolverOptions::default(), None).unwrap();
        let e = compute_errors(&disc, &mesh, &r.solution, &problem).unwrap();
        assert!(e.l2_rel <= 1e-10 && e.h1_rel <= 1e-10, "{kind}: {e:?}");
    }
}

#[test]
fn patch_problems_are_exact_on_every_family() {
    for kind in MeshKind::ALL {
        for k in 1..=3 {
            for d in 0..=k {
                let problem = poisson_patch_problem(Poly2::patch(d));
                let cfg = ConvergenceConfig {
                    absolute_errors: true,
                    ..config(kind, 3, 2, k)
                };
                let study = run_convergence(&cfg, &problem).unwrap();
                assert!(study.converged());
                for l in &study.levels {
                    assert!(l.errors.l2 <= 1e-9 && l.errors.h1 <= 1e-9, "{kind} k={k} d={d}: {:?}", l.errors);
                }
            }
        }
    }
}

#[test]
fn linear_rates_on_squares() {
    let study = run_convergence(&config(MeshKind::Squares, 8, 4, 1), &paper_problem()).unwrap();
    let last = &study.levels.last().unwrap().record;
    assert!((last.eoc_l2.unwrap() - 2.0).abs() <= 0.1, "{last:?}");
    assert!((last.eoc_h1.unwrap() - 1.0).abs() <= 0.1, "{last:?}");
    let ndofs: Vec<usize> = study.levels.iter().map(|l| l.record.ndof).collect();
    assert!(ndofs.windows(2).all(|w| w[1] > w[0]));
    for l in &study.levels {
        assert!(l.record.fp_iters.is_some() && l.record.nr_iters.is_some());
    }
}

/// (DOF, L2 error, H1 error, L2 order, H1 order) of the reference table.
const PUBLISHED: [(usize, f64, f64, f64, f64); 6] = [
    (9, 1.30e-2, 9.44e-2, f64::NAN, f64::NAN),
    (34, 3.40e-3, 4.96e-2, 2.018, 0.967),
    (129, 8.16e-4, 2.51e-2, 2.140, 1.022),
    (510, 1.89e-4, 1.25e-2, 2.131, 1.012),
    (2042, 4.49e-5, 6.26e-3, 2.070, 1.001),
    (8162, 1.11e-5, 3.12e-3, 2.011, 1.006),
];

/// Range of `eoc` over errors within half a unit of their third significant
/// digit.
fn eoc_range(prev: (f64, usize), curr: (f64, usize)) -> (f64, f64) {
    let half_ulp = |e: f64| 0.005 * 10f64.powf(e.log10().floor());
    let (dp, dc) = (half_ulp(prev.0), half_ulp(curr.0));
    let lo = eoc((prev.0 - dp, prev.1), (curr.0 + dc, curr.1)).unwrap();
    let hi = eoc((prev.0 + dp, prev.1), (curr.0 - dc, curr.1)).unwrap();
    (lo, hi)
}

#[test]
fn published_error_pairs_reproduce_published_orders() {
    let mut within = 0;
    for w in PUBLISHED.windows(2) {
        let (p, c) = (w[0], w[1]);
        for (ep, ec, published) in [(p.1, c.1, c.3), (p.2, c.2, c.4)] {
            let got = eoc((ep, p.0), (ec, c.0)).unwrap();
            let (lo, hi) = eoc_range((ep, p.0), (ec, c.0));
            assert!(lo - 5e-4 <= published && published <= hi + 5e-4, "{published} outside [{lo}, {hi}]");
            assert!((got - published).abs() <= 0.007, "{got} vs {published}");
            if (got - published).abs() <= 0.002 {
                within += 1;
            }
        }
    }
    // The remaining five differ by more because the inputs are rounded.
    assert_eq!(within, 5);
}

#[test]
fn csv_is_reproducible() {
    let cfg = config(MeshKind::Voronoi, 4, 2, 1);
    let a = run_convergence(&cfg, &paper_problem()).unwrap().to_csv();
    let b = run_convergence(&cfg, &paper_problem()).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a.lines().next(), Some(CSV_HEADER));
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn level_count_rules() {
    let problem = paper_problem();
    assert!(matches!(
        run_convergence(&config(MeshKind::Squares, 4, 0, 1), &problem),
        Err(ConvergenceError::TooFewLevels(0))
    ));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pmesh");
    write_mesh(&generate(MeshKind::Triangles, 4, 0).unwrap(), &path).unwrap();
    let cfg = ConvergenceConfig {
        mesh: MeshSource::File(path),
        levels: 1,
        ..Default::default()
    };
    let study = run_convergence(&cfg, &problem).unwrap();
    assert_eq!(study.levels.len(), 1);
    assert!(study.levels[0].record.eoc_l2.is_none());
}

#[test]
fn single_solver_choices_fill_one_column() {
    let problem = paper_problem();
    for (choice, fp, nr) in [(SolverChoice::FixedPoint, true, false), (SolverChoice::Newton, false, true)] {
        let cfg = ConvergenceConfig {
            solver: choice,
            ..config(MeshKind::RandomQuads, 4, 2, 1)
        };
        let study = run_convergence(&cfg, &problem).unwrap();
        for l in &study.levels {
            assert_eq!(l.record.fp_iters.is_some(), fp);
            assert_eq!(l.record.nr_iters.is_some(), nr);
        }
    }
}

#[test]
fn absolute_errors_flag_skips_normalisation() {
    let problem = paper_problem();
    let rel = run_convergence(&config(MeshKind::Squares, 4, 2, 1), &problem).unwrap();
    let abs_cfg = ConvergenceConfig {
        absolute_errors: true,
        ..config(MeshKind::Squares, 4, 2, 1)
    };
    let abs = run_convergence(&abs_cfg, &problem).unwrap();
    for (r, a) in rel.levels.iter().zip(&abs.levels) {
        assert_eq!(a.record.err_l2_rel, r.errors.l2);
        assert_eq!(a.record.err_h1_rel, r.errors.h1);
        assert!((a.record.eoc_l2.unwrap_or(0.0) - r.record.eoc_l2.unwrap_or(0.0)).abs() < 1e-12);
    }
}

#[test]
fn source_satisfies_the_weak_form() {
    // int kappa(u) grad u . grad v - f v = 0 for v = b (1 + c1 x + c2 y + c3 xy)
    // with the bubble b = x(1-x) y(1-y).
    let problem = paper_problem();
    let (u, grad) = (problem.exact_u.clone().unwrap(), problem.exact_grad.clone().unwrap());
    let mesh = generate(MeshKind::Squares, 8, 0).unwrap();
    let mut rng = common::rng(12);
    for _ in 0..10 {
        let c: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let v = |x: [f64; 2]| {
            let b = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
            b * (1.0 + c[0] * x[0] + c[1] * x[1] + c[2] * x[0] * x[1])
        };
        let grad_v = |x: [f64; 2]| {
            let (bx, by) = (x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]));
            let q = 1.0 + c[0] * x[0] + c[1] * x[1] + c[2] * x[0] * x[1];
            [
                (1.0 - 2.0 * x[0]) * by * q + bx * by * (c[0] + c[2] * x[1]),
                bx * (1.0 - 2.0 * x[1]) * q + bx * by * (c[1] + c[2] * x[0]),
            ]
        };
        let (mut res, mut scale) = (0.0, 0.0);
        for cell in 0..mesh.n_cells() {
            let g = element_geometry(&mesh, cell);
            let terms = |x: [f64; 2]| {
                let (du, dv) = (grad(x), grad_v(x));
                let flux = (problem.kappa)(u(x)) * (du[0] * dv[0] + du[1] * dv[1]);
                (flux, (problem.f)(x) * v(x))
            };
            res += integrate_element(&g, 12, |x| {
                let (a, b) = terms(x);
                a - b
            });
            scale += integrate_element(&g, 12, |x| {
                let (a, b) = terms(x);
                a.abs() + b.abs()
            });
        }
        assert!(res.abs() <= 1e-12 * scale, "{res:e} of {scale:e}");
    }
}
