//! Release gate. Nine numbered criteria, one test and one PASS line each.
//!
//! Every tolerance is pinned here, next to the assertion that uses it.
//! The suite builds its own reference data: closed-form uniform and 1D
//! states, a dense radial oracle, and manufactured fields whose defects
//! are known analytically.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use sspf::ellipticity::{
    check_wall_conditions, make_barrier, max_sound_speed, maxpoint_diagnostics,
    parabolic_measure, parabolic_measure_profile, verify_max_principle, BarrierSpec, Verdict,
    WallNorms,
};
use sspf::exact::{
    sample_radial_to_grid, solve_1d, solve_radial, uniform_flow, Branch1d, Ic1d, Profile1d, Sign,
};
use sspf::field::{grad_chi_at, reflect_even, residual_chi, transform, ScalarField, TransformOp};
use sspf::field::Variable;
use sspf::gas::GasModel;
use sspf::grid::{GridSpec, WallEdge, WallSet};
use sspf::solver::{solve_dirichlet, SolveReport, SolverConfig};

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn fmt_sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

/// Verification gauge: the field's own sound-speed sup, padded one ulp-scale
/// step so the precondition c <= c_hat is immune to rounding.
fn auto_chat(field: &ScalarField, gas: &GasModel) -> f64 {
    max_sound_speed(field, gas).unwrap() * (1.0 + 1e-12)
}

/// Absolute residual target for the suite's solves: far below the h^2
/// discretization error everywhere it is used, but above the rounding floor
/// of the residual evaluation itself, which for O(1)-amplitude fields at
/// 129^2 sits near eps |chi| c^2 / h^2 ~ 3e-10 and blocks the default
/// amplitude-blind tolerance.
const SOLVE_TOL: f64 = 1e-9;

fn solve(boundary: &ScalarField, gas: &GasModel) -> (ScalarField, SolveReport) {
    let config = SolverConfig {
        residual_tol: Some(SOLVE_TOL),
        ..SolverConfig::default()
    };
    let (field, report) = solve_dirichlet(*boundary.grid(), boundary, gas, &config, None)
        .expect("solve failed");
    assert!(
        report.converged,
        "solver stalled: {} iterations, residual history tail {:?}, max_l {}, \
         guard hits {}, clamped {}",
        report.iterations,
        report.residual_history.last(),
        report.max_l_interior,
        report.l_guard_hits,
        report.c2_clamped_nodes
    );
    (field, report)
}

fn gas_radial() -> GasModel {
    GasModel::new(1.4, 1.0, 1.0).unwrap()
}

/// Dense outward radial integration from r = 1; the oracle for curved
/// solves. Interpolation error is far below every tolerance that uses it.
fn radial_profile() -> &'static Profile1d {
    static RADIAL: OnceLock<Profile1d> = OnceLock::new();
    RADIAL.get_or_init(|| {
        let ic = Ic1d {
            coord: 1.0,
            chi: -2.0,
            dchi: 0.3,
        };
        let p = solve_radial(&gas_radial(), 2, ic, 1.45, 8001).unwrap();
        assert!(!p.truncated, "radial oracle truncated: {:?}", p.sonic_points);
        p
    })
}

struct Case {
    name: &'static str,
    gas: GasModel,
    boundary: ScalarField,
}

/// Six elliptic boundary-value problems spanning gamma and wall layouts.
/// `n` is the long-axis node count; wall cases use n/2 + 1 across the half
/// domain so their reflections land on the n-point full grid.
fn elliptic_cases(n: usize) -> Vec<Case> {
    let nh = n / 2 + 1;
    let mut cases = Vec::new();
    let eps = 0.01;
    let bump = move |xi: [f64; 2]| eps * ((PI * xi[0] / 0.6).cos() + (PI * xi[1] / 0.6).cos());
    let r2 = |xi: [f64; 2]| xi[0] * xi[0] + xi[1] * xi[1];

    let g = GridSpec::from_extent([-0.3, -0.3], [0.3, 0.3], [n, n]).unwrap();
    let gas = GasModel::new(0.5, 1.0, 1.0).unwrap().with_bernoulli(-1.0);
    let v = [0.1, -0.1];
    let boundary = ScalarField::from_fn(g, Variable::Chi, |xi| {
        v[0] * xi[0] + v[1] * xi[1] - 0.5 * r2(xi) + bump(xi)
    })
    .unwrap();
    cases.push(Case {
        name: "gamma 0.5, free",
        gas,
        boundary,
    });

    let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
    let v = [0.2, 0.1];
    let boundary = ScalarField::from_fn(g, Variable::Chi, |xi| {
        v[0] * xi[0] + v[1] * xi[1] - 0.5 * r2(xi) + bump(xi)
    })
    .unwrap();
    cases.push(Case {
        name: "gamma 1, free",
        gas,
        boundary,
    });

    let g = GridSpec::from_extent([0.72, 0.72], [0.92, 0.92], [n, n]).unwrap();
    let boundary = sample_radial_to_grid(radial_profile(), g).unwrap();
    cases.push(Case {
        name: "gamma 1.4, radial patch",
        gas: gas_radial(),
        boundary,
    });

    let g = GridSpec::from_extent([0.0, -0.25], [0.25, 0.25], [nh, n])
        .unwrap()
        .with_walls(WallSet::single(WallEdge::Left));
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap().with_bernoulli(1.2);
    let boundary = ScalarField::from_fn(g, Variable::Chi, |xi| {
        0.2 * xi[1] - 0.5 * r2(xi) + 0.01 * (PI * xi[1] / 0.5).cos() * (xi[0] / 0.25).powi(2)
    })
    .unwrap();
    cases.push(Case {
        name: "gamma 1.4, left wall",
        gas,
        boundary,
    });

    let g = GridSpec::from_extent([-0.25, 0.0], [0.25, 0.25], [n, nh])
        .unwrap()
        .with_walls(WallSet::single(WallEdge::Bottom));
    let gas = GasModel::new(2.0, 1.0, 1.0).unwrap().with_bernoulli(1.0);
    let boundary = ScalarField::from_fn(g, Variable::Chi, |xi| {
        0.15 * xi[0] - 0.5 * r2(xi) + 0.01 * (PI * xi[0] / 0.5).cos() * (xi[1] / 0.25).powi(2)
    })
    .unwrap();
    cases.push(Case {
        name: "gamma 2, bottom wall",
        gas,
        boundary,
    });

    let g = GridSpec::from_extent([-0.3, -0.3], [0.0, 0.0], [n, n])
        .unwrap()
        .with_walls(WallSet::empty().with(WallEdge::Right).with(WallEdge::Top));
    let gas = GasModel::new(0.5, 1.0, 1.0).unwrap().with_bernoulli(-1.0);
    let boundary =
        ScalarField::from_fn(g, Variable::Chi, |xi| -0.5 * r2(xi) + bump(xi)).unwrap();
    cases.push(Case {
        name: "gamma 0.5, two walls",
        gas,
        boundary,
    });

    cases
}

#[test]
fn criterion_1_uniform_states_are_discrete_solutions() {
    let t0 = Instant::now();
    // (gamma, bernoulli A, velocity, additive constant)
    let states: [(f64, f64, [f64; 2]); 5] = [
        (0.5, -1.0, [0.1, -0.1]),
        (1.0, 0.0, [0.3, -0.2]),
        (1.4, 1.0, [0.1, 0.2]),
        (2.0, 1.0, [0.2, -0.1]),
        (3.0, 2.0, [0.3, -0.2]),
    ];
    let a_prime = 0.0;
    let mut worst = 0.0f64;
    for (gamma, a, v) in states {
        let gas = GasModel::new(gamma, 1.0, 1.0).unwrap().with_bernoulli(a);
        let c2 = gas
            .sound_speed_sq(a_prime + 0.5 * (v[0] * v[0] + v[1] * v[1]), &[0.0, 0.0])
            .unwrap();
        for n in [33usize, 257] {
            let g = GridSpec::from_extent([-0.5, -0.5], [0.5, 0.5], [n, n]).unwrap();
            let f = uniform_flow(v, a_prime, &gas, g).unwrap();
            let norm = inf_norm(residual_chi(&f, &gas).unwrap().values());
            let tol = 1e-9 * (1.0 + c2);
            assert!(
                norm <= tol,
                "gamma {gamma}, {n}x{n}: residual {norm:.3e} > {tol:.3e}"
            );
            worst = worst.max(norm / (1.0 + c2));
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "criterion 1 took {dt:?}");
    println!(
        "criterion 1 (uniform states solve the discrete equation): PASS \
         (worst scaled residual {worst:.3e}, {dt:.2?})"
    );
}

#[test]
fn criterion_2_solver_reproduces_uniform_flow() {
    let t0 = Instant::now();
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap().with_bernoulli(1.0);
    let g = GridSpec::from_extent([-0.3, -0.3], [0.3, 0.3], [129, 129]).unwrap();
    let exact = uniform_flow([0.1, -0.05], 0.0, &gas, g).unwrap();
    let (solved, report) =
        solve_dirichlet(g, &exact, &gas, &SolverConfig::default(), None).unwrap();
    assert!(report.converged);
    assert!(report.iterations <= 50, "{} iterations", report.iterations);
    let err = solved.max_abs_diff(&exact).unwrap();
    assert!(err <= 1e-9, "recovered uniform flow off by {err:.3e}");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "criterion 2 took {dt:?}");
    println!(
        "criterion 2 (solver reproduces uniform flow): PASS \
         (max error {err:.3e}, {} iterations, {dt:.2?})",
        report.iterations
    );
}

#[test]
fn criterion_3_curved_solve_converges_at_second_order() {
    let t0 = Instant::now();
    let gas = gas_radial();
    let config = SolverConfig {
        residual_tol: Some(SOLVE_TOL),
        ..SolverConfig::default()
    };
    let mut errs = Vec::new();
    for n in [33usize, 65, 129] {
        let g = GridSpec::from_extent([0.72, 0.72], [0.92, 0.92], [n, n]).unwrap();
        let oracle = sample_radial_to_grid(radial_profile(), g).unwrap();
        let (solved, report) = solve_dirichlet(g, &oracle, &gas, &config, None).unwrap();
        assert!(
            report.converged,
            "{n}x{n} solve stalled: {} iterations, history tail {:?}, max_l {}, \
             guard hits {}, clamped {}",
            report.iterations,
            &report.residual_history[report.residual_history.len().saturating_sub(4)..],
            report.max_l_interior,
            report.l_guard_hits,
            report.c2_clamped_nodes
        );
        errs.push(solved.max_abs_diff(&oracle).unwrap());
    }
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    for (p, pair) in orders.iter().zip(["33 -> 65", "65 -> 129"]) {
        assert!(
            (1.7..=2.3).contains(p),
            "observed order {p:.3} over {pair} outside [1.7, 2.3]; errors {}", fmt_sci(&errs)
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "criterion 3 took {dt:?}");
    println!(
        "criterion 3 (curved solve is second order): PASS \
         (orders {:.2} and {:.2}, errors {}, {dt:.2?})",
        orders[0], orders[1],
        fmt_sci(&errs)
    );
}

#[test]
fn criterion_4_interior_maxima_are_detected_not_invented() {
    let deltas = [0.001, 0.01, 0.05, 0.1];
    let mut checks = 0usize;
    for case in elliptic_cases(65) {
        let (solved, report) = solve(&case.boundary, &case.gas);
        assert!(
            report.max_l_interior < 1.0,
            "{}: interior L reached {}",
            case.name,
            report.max_l_interior
        );
        let chat = auto_chat(&solved, &case.gas);
        for &delta in &deltas {
            let barrier = make_barrier(solved.grid(), chat, delta).unwrap();
            let rep = verify_max_principle(&solved, &case.gas, &barrier, delta, None).unwrap();
            assert!(
                rep.verdict != Verdict::ViolationCandidate,
                "{} at delta {delta}: spurious interior max {} at {:?}",
                case.name,
                rep.argmax_value,
                rep.argmax_xi
            );
            checks += 1;
        }
    }
    assert_eq!(checks, 24);

    // Negative control: a radial cap whose pseudo-Mach tops out at 0.999 on
    // an interior ring. Not a solution; the verifier must say so loudly.
    let g = GridSpec::from_extent([-0.9, -0.9], [0.9, 0.9], [641, 641]).unwrap();
    let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
    let rstar2 = 2.0f64 / 3.0;
    let fmax = rstar2.sqrt() * (1.0 - rstar2 / 2.0);
    let k = 0.999 / fmax;
    let control = ScalarField::from_fn(g, Variable::Chi, |xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        k * (-r2 / 2.0) * (1.0 - r2 / 4.0)
    })
    .unwrap();
    let chat = auto_chat(&control, &gas);
    let barrier = make_barrier(&g, chat, 0.05).unwrap();
    let rep = verify_max_principle(&control, &gas, &barrier, 0.05, None).unwrap();
    assert_eq!(rep.verdict, Verdict::ViolationCandidate);
    assert!(
        rep.residual_inf >= 1e3 * rep.tol,
        "control is not flagrant: residual {:.3e} vs tol {:.3e}",
        rep.residual_inf,
        rep.tol
    );
    println!(
        "criterion 4 (ellipticity verdicts): PASS \
         ({checks} clean verifications; control residual/tol = {:.0})",
        rep.residual_inf / rep.tol
    );
}

#[test]
fn criterion_5_parabolic_band_occupancy() {
    let band = 1e-3;
    let mut worst = 0.0f64;
    for (coarse, fine) in elliptic_cases(33).into_iter().zip(elliptic_cases(129)) {
        let (f33, _) = solve(&coarse.boundary, &coarse.gas);
        let (f129, _) = solve(&fine.boundary, &fine.gas);
        let m33 = parabolic_measure(&f33, &coarse.gas, band).unwrap();
        let m129 = parabolic_measure(&f129, &fine.gas, band).unwrap();
        assert!(
            m129 <= m33 + 1e-12,
            "{}: band occupancy grew {m33:.3e} -> {m129:.3e}",
            coarse.name
        );
        assert!(m129 < 0.02, "{}: band occupancy {m129}", coarse.name);
        worst = worst.max(m129);
    }

    // Controls with known occupancy: a rarefaction sits in the band at every
    // sample; an affine profile away from sonic never touches it.
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
    let rare = solve_1d(
        &gas,
        Branch1d::Rarefaction(Sign::Plus),
        Ic1d {
            coord: 0.0,
            chi: -3.0,
            dchi: 1.0,
        },
        [0.0, 0.8],
        201,
    )
    .unwrap();
    assert_eq!(parabolic_measure_profile(&rare, &gas, band).unwrap(), 1.0);
    let affine = solve_1d(
        &gas,
        Branch1d::Affine,
        Ic1d {
            coord: 0.0,
            chi: -1.0,
            dchi: 0.2,
        },
        [-0.35, 0.75],
        121,
    )
    .unwrap();
    assert!(!affine.truncated);
    assert_eq!(parabolic_measure_profile(&affine, &gas, band).unwrap(), 0.0);
    println!(
        "criterion 5 (near-sonic band occupancy): PASS \
         (worst fine-grid occupancy {worst:.3e}; controls 1.0 and 0.0 exact)"
    );
}

#[test]
fn criterion_6_exact_profiles_hit_their_identities() {
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
    // Affine branch: psi = chi + xi^2/2 is affine, so its second difference
    // vanishes to rounding at any spacing.
    let p = solve_1d(
        &gas,
        Branch1d::Affine,
        Ic1d {
            coord: 0.0,
            chi: -1.0,
            dchi: 0.2,
        },
        [-0.35, 0.75],
        221,
    )
    .unwrap();
    assert!(!p.truncated, "affine window clipped: {:?}", p.sonic_points);
    let h = p.coord[1] - p.coord[0];
    let psi: Vec<f64> = p
        .coord
        .iter()
        .zip(&p.chi)
        .map(|(&x, &c)| c + 0.5 * x * x)
        .collect();
    let mut worst_psi = 0.0f64;
    for i in 1..psi.len() - 1 {
        worst_psi = worst_psi.max((psi[i - 1] - 2.0 * psi[i] + psi[i + 1]).abs() / (h * h));
    }
    assert!(worst_psi <= 1e-9, "affine psi'' reached {worst_psi:.3e}");

    // Rarefaction branch: exactly parabolic, L = 1 at every sample.
    let p = solve_1d(
        &gas,
        Branch1d::Rarefaction(Sign::Plus),
        Ic1d {
            coord: 0.0,
            chi: -3.0,
            dchi: 1.0,
        },
        [0.0, 0.8],
        201,
    )
    .unwrap();
    let mut worst_l = 0.0f64;
    for i in 0..p.coord.len() {
        let c2 = gas.sound_speed_sq(p.chi[i], &[p.dchi[i], 0.0]).unwrap();
        worst_l = worst_l.max((p.dchi[i].abs() / c2.sqrt() - 1.0).abs());
    }
    assert!(worst_l <= 1e-9, "rarefaction |L - 1| reached {worst_l:.3e}");
    println!(
        "criterion 6 (exact 1D identities): PASS \
         (psi'' {worst_psi:.3e}, |L - 1| {worst_l:.3e})"
    );
}

#[test]
fn criterion_7_wall_runs_match_their_reflections() {
    // (i) Verdicts computed on the half domain equal verdicts on the evenly
    // reflected full domain, wall by wall.
    let cases = elliptic_cases(65);
    for case in &cases[3..] {
        let (solved, _) = solve(&case.boundary, &case.gas);
        let chat = auto_chat(&solved, &case.gas);
        let mut full = solved.clone();
        let walls: Vec<WallEdge> = solved.grid().walls.iter().collect();
        for w in walls {
            full = reflect_even(&full, w, None).unwrap();
        }
        for delta in [0.01, 0.05] {
            let bh = make_barrier(solved.grid(), chat, delta).unwrap();
            let vh = verify_max_principle(&solved, &case.gas, &bh, delta, None)
                .unwrap()
                .verdict;
            let bf = make_barrier(full.grid(), chat, delta).unwrap();
            let vf = verify_max_principle(&full, &case.gas, &bf, delta, None)
                .unwrap()
                .verdict;
            assert_eq!(vh, vf, "{} at delta {delta}", case.name);
        }
    }

    // (ii) The one-sided wall estimators converge at the generic stencil
    // order on a manufactured slip field with a nonzero third normal
    // derivative (chi_nnn -> 3 here).
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap().with_bernoulli(1.2);
    let mut norms: Vec<WallNorms> = Vec::new();
    for n in [33usize, 65, 129, 257] {
        let g = GridSpec::from_extent([0.0, -0.25], [0.25, 0.25], [n / 2 + 1, n])
            .unwrap()
            .with_walls(WallSet::single(WallEdge::Left));
        let f = ScalarField::from_fn(g, Variable::Chi, |xi| {
            0.2 * xi[1] - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1])
                + 0.5 * xi[0].powi(3) * (2.0 * PI * xi[1]).cos()
        })
        .unwrap();
        norms.push(check_wall_conditions(&f, &gas, WallEdge::Left).unwrap());
    }
    let probes: [(&str, fn(&WallNorms) -> f64); 4] = [
        ("chi_n", |w| w.chi_n),
        ("chi_nt", |w| w.chi_nt),
        ("chi_ntt", |w| w.chi_ntt),
        ("c2_n", |w| w.c2_n),
    ];
    let mut shown = Vec::new();
    for (label, get) in probes {
        let v: Vec<f64> = norms.iter().map(get).collect();
        for k in 0..v.len() - 1 {
            let p = (v[k] / v[k + 1]).log2();
            assert!(
                (1.7..=2.3).contains(&p),
                "{label} order {p:.3} at refinement {k} outside [1.7, 2.3]; norms {}", fmt_sci(&v)
            );
            if k == v.len() - 2 {
                shown.push(format!("{label} {p:.2}"));
            }
        }
    }
    let d3 = norms.last().unwrap().chi_nnn;
    assert!((d3 - 3.0).abs() <= 1e-3, "chi_nnn limit {d3} vs 3");

    // (iii) On converged wall solves the same norms are even: they drop at
    // least as fast (they superconverge; the even extension kills the h^2
    // truncation term).
    let mut chi_n = Vec::new();
    for n in [33usize, 65, 129] {
        let case = &elliptic_cases(n)[3];
        let (solved, _) = solve(&case.boundary, &case.gas);
        chi_n.push(
            check_wall_conditions(&solved, &case.gas, WallEdge::Left)
                .unwrap()
                .chi_n,
        );
    }
    for k in 0..chi_n.len() - 1 {
        let p = (chi_n[k] / chi_n[k + 1]).log2();
        assert!(
            p >= 1.7,
            "solved wall norm order {p:.3} below 1.7; norms {}", fmt_sci(&chi_n)
        );
    }
    println!(
        "criterion 7 (wall treatment): PASS \
         (verdicts match reflections; estimator orders {}; chi_nnn -> {d3:.4}; \
          solved slip norms {})",
        shown.join(", "),
        fmt_sci(&chi_n)
    );
}

#[test]
fn criterion_8_symmetries_map_solutions_to_solutions() {
    let cases = elliptic_cases(65);
    let base = &cases[0];
    let tight = SolverConfig {
        residual_tol: Some(1e-12),
        ..SolverConfig::default()
    };
    let (chi0, report) =
        solve_dirichlet(*base.boundary.grid(), &base.boundary, &base.gas, &tight, None).unwrap();
    assert!(report.converged);
    let n0 = inf_norm(residual_chi(&chi0, &base.gas).unwrap().values());

    let ops = [
        ("translate", TransformOp::Translate([0.08, -0.04])),
        ("rotate quarter", TransformOp::RotateQuarter(1)),
        ("scale 0.5", TransformOp::Scale(0.5)),
        ("scale 2", TransformOp::Scale(2.0)),
    ];
    for (name, op) in ops {
        let t_gas = match op {
            TransformOp::Scale(s) => base.gas.velocity_scaled(s),
            _ => base.gas.clone(),
        };
        let mapped = transform(&chi0, op).unwrap();
        let rt = inf_norm(residual_chi(&mapped, &t_gas).unwrap().values());
        assert!(
            (rt - n0).abs() <= 1e-10,
            "{name}: residual norm moved {n0:.3e} -> {rt:.3e}"
        );
        let tb = transform(&base.boundary, op).unwrap();
        let (solved_t, rep_t) = solve_dirichlet(*tb.grid(), &tb, &t_gas, &tight, None).unwrap();
        assert!(rep_t.converged, "{name}: transformed solve stalled");
        let agree = solved_t.max_abs_diff(&mapped).unwrap();
        assert!(
            agree <= 1e-9,
            "{name}: transformed solve differs from mapped solution by {agree:.3e}"
        );
    }
    println!(
        "criterion 8 (symmetry equivariance): PASS \
         (4 ops; base residual {n0:.3e})"
    );
}

/// The synthetic stationary state of the interior-maximum analysis: gradient
/// and Hessian chosen so the first-order condition and the field equation
/// hold exactly at one point, in a frame rotated by theta.
#[allow(clippy::too_many_arguments)]
fn synthetic_state(
    gamma: f64,
    l: f64,
    c: f64,
    theta: f64,
    b1: f64,
    b2: f64,
    grid: GridSpec,
    p: [f64; 2],
) -> (ScalarField, GasModel, BarrierSpec) {
    let u = l * c;
    let chi0 = -1.0;
    let a = chi0 + u * u / 2.0 + c * c / (gamma - 1.0);
    let gas = GasModel::new(gamma, 1.0, 1.0).unwrap().with_bernoulli(a);
    let denom = 2.0 + (gamma - 1.0) * l * l;
    let h11 = (-c * b1 - (gamma - 1.0) * l * l * l) / (l * denom);
    let h12 = -c * c * b2 / (u * denom);
    let h22 = (l * l - 1.0) * h11 + l * l - 2.0;
    let (ct, st) = (theta.cos(), theta.sin());
    let gl = [u * ct, u * st];
    let hl = [
        [
            ct * ct * h11 - 2.0 * ct * st * h12 + st * st * h22,
            ct * st * (h11 - h22) + (ct * ct - st * st) * h12,
        ],
        [
            ct * st * (h11 - h22) + (ct * ct - st * st) * h12,
            st * st * h11 + 2.0 * ct * st * h12 + ct * ct * h22,
        ],
    ];
    let field = ScalarField::from_fn(grid, Variable::Chi, |xi| {
        let d = [xi[0] - p[0], xi[1] - p[1]];
        chi0
            + gl[0] * d[0]
            + gl[1] * d[1]
            + 0.5
                * (hl[0][0] * d[0] * d[0]
                    + 2.0 * hl[0][1] * d[0] * d[1]
                    + hl[1][1] * d[1] * d[1])
    })
    .unwrap();
    let kb = 0.05;
    let gb = [b1 * ct - b2 * st, b1 * st + b2 * ct];
    let barrier = BarrierSpec {
        center: [p[0] - gb[0] / kb, p[1] - gb[1] / kb],
        delta: 0.05,
        c_hat: 1.0,
        beta: 1.0,
    };
    (field, gas, barrier)
}

#[test]
fn criterion_9_maxpoint_identities() {
    // (a) On the synthetic state the frame identities hold to rounding.
    let grid = GridSpec::from_extent([-0.2, -0.2], [0.2, 0.2], [9, 9]).unwrap();
    let (field, gas, barrier) = synthetic_state(1.4, 0.9, 1.0, 0.35, 0.02, -0.013, grid, [0.0, 0.0]);
    let d = maxpoint_diagnostics(&field, &gas, &barrier, [4, 4]).unwrap();
    assert!(d.chi11_mismatch <= 1e-10, "chi11 mismatch {:.3e}", d.chi11_mismatch);
    assert!(d.balance_mismatch <= 1e-10, "balance mismatch {:.3e}", d.balance_mismatch);

    // (b) On a solved near-sonic wall flow, the same identities hold at the
    // discrete argmax of L^2 + b within the reported defect and h^2 scale.
    // A solved elliptic field has no strict interior maximum of L^2 + b, so
    // the discrete argmax abuts the boundary and is not stationary; the
    // diagnostics measure that defect, and the continuum relation says the
    // chi11 identity shifts by exactly c delta_1 / (L (2 + (gamma-1) L^2)).
    // We verify the shift two-sided: a wrong formula would miss by O(1).
    let g = GridSpec::from_extent([-0.2, 0.0], [0.2, 0.1], [129, 33])
        .unwrap()
        .with_walls(WallSet::single(WallEdge::Bottom));
    let u = 0.6;
    let amp = -0.02;
    let gas = GasModel::new(1.4, 1.0, 1.0).unwrap().with_bernoulli(1.23);
    let boundary = ScalarField::from_fn(g, Variable::Chi, |xi| {
        u * xi[0] - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1])
            + amp * (PI * xi[0] / 0.4).cos() * (xi[1] / 0.1).powi(2)
    })
    .unwrap();
    let (solved, report) = solve(&boundary, &gas);
    let full = reflect_even(&solved, WallEdge::Bottom, None).unwrap();
    let chat = auto_chat(&full, &gas);
    let delta = 0.001;
    let barrier = make_barrier(full.grid(), chat, delta).unwrap();
    let gf = *full.grid();
    let mut best = (f64::NEG_INFINITY, [0usize; 2]);
    for i1 in 1..gf.dims[0] - 1 {
        for i2 in 1..gf.dims[1] - 1 {
            let grad = grad_chi_at(&full, i1, i2);
            let c2 = gas.sound_speed_sq(full.value(i1, i2), &grad).unwrap();
            let fv = (grad[0] * grad[0] + grad[1] * grad[1]) / c2 + barrier.eval(gf.xi(i1, i2));
            if fv > best.0 {
                best = (fv, [i1, i2]);
            }
        }
    }
    let diag = maxpoint_diagnostics(&full, &gas, &barrier, best.1).unwrap();
    assert!(report.max_l_interior < 1.0, "solve left the subsonic regime");
    assert!(diag.l >= 0.9, "argmax is not near-sonic: L = {:.4}", diag.l);
    // Identity (a), defect-corrected: the mismatch must track the correction
    // term itself, not merely sit below correction plus slack. The slack is
    // a multiple of fd_scale because delta_1 is itself an h^2-accurate
    // measurement of the continuum defect.
    let denom = diag.l * (2.0 + (gas.gamma - 1.0) * diag.l * diag.l);
    let correction = diag.c * diag.stationarity_defect[0].abs() / denom;
    let slack_a = 50.0 * diag.fd_scale + 1e-8;
    assert!(
        (diag.chi11_mismatch - correction).abs() <= slack_a,
        "chi11 mismatch {:.3e} off defect correction {:.3e} by more than {:.3e}",
        diag.chi11_mismatch,
        correction,
        slack_a
    );
    // Identity (c) is the field equation in the rotated frame; its residual
    // at a converged node is pure stencil noise on the h^2 scale, and does
    // not depend on stationarity at all.
    let bound_c = 10.0 * diag.fd_scale + 1e-8;
    assert!(
        diag.balance_mismatch <= bound_c,
        "balance mismatch {:.3e} above {bound_c:.3e}",
        diag.balance_mismatch
    );
    println!(
        "criterion 9 (interior-maximum identities): PASS \
         (synthetic exact to 1e-10; solved argmax L {:.3}, chi11 mismatch {:.2e} \
          tracks defect correction {:.2e} within {:.2e}, balance {:.2e} within {:.2e})",
        diag.l, diag.chi11_mismatch, correction, slack_a, diag.balance_mismatch, bound_c
    );
}
