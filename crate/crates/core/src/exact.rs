//! Reference solutions: uniform flows, the 1D similarity ODE with its affine
//! and rarefaction branches, and the radial reduction integrated to
//! reference accuracy.
//!
//! The radial reduction substitutes chi = chi(r) into the chi-form equation:
//! `c^2 (chi'' + (d-1) chi'/r) - (chi')^2 chi'' = (chi')^2 - d c^2`.
//! With d = 1 this is the 1D equation, so the two paths cross-check each
//! other. Radial profiles are a testing device for the 2D solver; the flow
//! content lives in the closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, Variable};
use crate::gas::GasModel;
use crate::grid::GridSpec;
use crate::ode::{dopri5, EndReason};

/// Integration tolerance for reference profiles.
pub const PROFILE_TOL: f64 = 1e-10;
/// Relative sonic-degeneracy threshold: integration stops when
/// |c^2 - (chi')^2| < SONIC_REL * c^2.
pub const SONIC_REL: f64 = 1e-8;

/// Branch selector for the 1D equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch1d {
    /// chi'' = -1 wherever the flow is not parabolic.
    Affine,
    /// Parabolic branch c^2 = (chi')^2 with the sign of chi'.
    Rarefaction(Sign),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn matches(self, v: f64) -> bool {
        match self {
            Sign::Plus => v > 0.0,
            Sign::Minus => v < 0.0,
        }
    }
}

/// Initial condition (coordinate, chi, chi') for the 1D and radial problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ic1d {
    pub coord: f64,
    pub chi: f64,
    pub dchi: f64,
}

/// Sampled profile chi(coordinate) with its derivative. `coord` is xi for
/// 1D solutions and r >= 0 for radial ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile1d {
    pub coord: Vec<f64>,
    pub chi: Vec<f64>,
    pub dchi: Vec<f64>,
    /// Coordinates where the parabolic degeneracy L = 1 cut the output.
    pub sonic_points: Vec<f64>,
    /// True when the output covers less than the requested interval.
    pub truncated: bool,
    pub radial: bool,
}

impl Profile1d {
    pub fn len(&self) -> usize {
        self.coord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coord.is_empty()
    }
}

/// Sound speed of a uniform flow `chi = v.xi - |xi|^2/2 + a_prime` under
/// `gas`: constant on the whole plane.
pub fn uniform_c2(gas: &GasModel, v: [f64; 2], a_prime: f64) -> Result<f64> {
    // chi + |grad chi|^2/2 = a_prime + |v|^2/2 identically.
    gas.sound_speed_sq(a_prime + 0.5 * (v[0] * v[0] + v[1] * v[1]), &[0.0, 0.0])
        .map_err(|e| match e {
            Error::InvalidState { .. } => Error::state(format!(
                "uniform flow with v = ({}, {}), A' = {a_prime} has nonpositive c^2",
                v[0], v[1]
            )),
            other => other,
        })
}

/// The constant-velocity solution `chi = v.xi - |xi|^2/2 + a_prime`.
/// Quadratic, so its discrete residual vanishes identically.
pub fn uniform_flow(
    v: [f64; 2],
    a_prime: f64,
    gas: &GasModel,
    grid: GridSpec,
) -> Result<ScalarField> {
    if !(v[0].is_finite() && v[1].is_finite() && a_prime.is_finite()) {
        return Err(Error::InvalidArgument(
            "uniform flow parameters must be finite".into(),
        ));
    }
    uniform_c2(gas, v, a_prime)?;
    ScalarField::from_fn(grid, Variable::Chi, |xi| {
        v[0] * xi[0] + v[1] * xi[1] - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1]) + a_prime
    })
}

fn sample_mesh(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidArgument(format!(
            "bad interval [{a}, {b}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least two sample points".into(),
        ));
    }
    let h = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k + 1 == n { b } else { a + k as f64 * h })
        .collect())
}

/// Closed-form solutions of the 1D similarity equation
/// `c^2 chi'' - (chi')^2 chi'' = (chi')^2 - c^2` on `interval`, sampled at
/// `n` uniform points. The affine branch truncates at sonic points; the
/// rarefaction branch is parabolic on its whole domain.
pub fn solve_1d(
    gas: &GasModel,
    branch: Branch1d,
    ic: Ic1d,
    interval: [f64; 2],
    n: usize,
) -> Result<Profile1d> {
    if !(ic.coord.is_finite() && ic.chi.is_finite() && ic.dchi.is_finite()) {
        return Err(Error::InvalidArgument("non-finite initial data".into()));
    }
    match branch {
        Branch1d::Affine => solve_1d_affine(gas, ic, interval, n),
        Branch1d::Rarefaction(sign) => solve_1d_rarefaction(gas, sign, ic, interval, n),
    }
}

fn solve_1d_affine(gas: &GasModel, ic: Ic1d, interval: [f64; 2], n: usize) -> Result<Profile1d> {
    let c2 = gas.sound_speed_sq(ic.chi, &[ic.dchi, 0.0])?;
    let scale = c2.max(ic.dchi * ic.dchi);
    if (ic.dchi * ic.dchi - c2).abs() < SONIC_REL * scale {
        return Err(Error::Precondition(
            "affine branch requires a non-parabolic initial state".into(),
        ));
    }
    // chi'' = -1 keeps chi + (chi')^2/2 constant, so c is constant along the
    // branch and the sonic points are chi'(xi) = +-c in closed form.
    let c = c2.sqrt();
    let s_lo = ic.coord + ic.dchi - c;
    let s_hi = ic.coord + ic.dchi + c;
    // Connected non-parabolic component containing the IC.
    let (lo, hi, lo_sonic, hi_sonic) = if ic.coord < s_lo {
        (f64::NEG_INFINITY, s_lo, false, true)
    } else if ic.coord < s_hi {
        (s_lo, s_hi, true, true)
    } else {
        (s_hi, f64::INFINITY, true, false)
    };
    let (a, b) = (interval[0], interval[1]);
    if b <= a {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let (ta, tb) = (a.max(lo), b.min(hi));
    if tb <= ta {
        return Err(Error::Degenerate(
            "interval lies entirely beyond a sonic point".into(),
        ));
    }
    let mut sonic_points = Vec::new();
    if lo_sonic && ta == lo {
        sonic_points.push(lo);
    }
    if hi_sonic && tb == hi {
        sonic_points.push(hi);
    }
    let truncated = ta > a || tb < b;
    let coord = sample_mesh(ta, tb, n)?;
    let mut chi = Vec::with_capacity(n);
    let mut dchi = Vec::with_capacity(n);
    for &x in &coord {
        let s = x - ic.coord;
        chi.push(ic.chi + ic.dchi * s - 0.5 * s * s);
        dchi.push(ic.dchi - s);
    }
    Ok(Profile1d {
        coord,
        chi,
        dchi,
        sonic_points,
        truncated,
        radial: false,
    })
}

fn solve_1d_rarefaction(
    gas: &GasModel,
    sign: Sign,
    ic: Ic1d,
    interval: [f64; 2],
    n: usize,
) -> Result<Profile1d> {
    let gamma = gas.gamma;
    let coord = sample_mesh(interval[0], interval[1], n)?;
    if gas.is_isothermal() {
        // c = c0 everywhere, so chi' = +-c0 and chi is affine.
        if !sign.matches(ic.dchi) || (ic.dchi.abs() - gas.c0).abs() > 1e-9 * gas.c0 {
            return Err(Error::InconsistentIc(format!(
                "isothermal rarefaction needs chi' = {}c0, got {}",
                match sign {
                    Sign::Plus => "+",
                    Sign::Minus => "-",
                },
                ic.dchi
            )));
        }
        let slope = match sign {
            Sign::Plus => gas.c0,
            Sign::Minus => -gas.c0,
        };
        let chi = coord
            .iter()
            .map(|&x| ic.chi + slope * (x - ic.coord))
            .collect();
        let dchi = vec![slope; n];
        return Ok(Profile1d {
            coord,
            chi,
            dchi,
            sonic_points: Vec::new(),
            truncated: false,
            radial: false,
        });
    }
    if (1.0 + gamma).abs() < 1e-12 {
        return Err(Error::Degenerate(
            "rarefaction closed form degenerates at gamma = -1".into(),
        ));
    }
    if ic.dchi == 0.0 {
        return Err(Error::InconsistentIc(
            "rarefaction initial point sits at the vacuum vertex".into(),
        ));
    }
    if !sign.matches(ic.dchi) {
        return Err(Error::InconsistentIc(
            "rarefaction sign contradicts the initial chi'".into(),
        ));
    }
    // c^2 = (chi')^2 forces chi = A + (1-gamma)(xi - xi1)^2 / (2(1+gamma)).
    let c2 = gas.sound_speed_sq_raw(ic.chi, &[ic.dchi, 0.0]);
    let scale = gas.c0 * gas.c0 + ic.dchi * ic.dchi;
    if (c2 - ic.dchi * ic.dchi).abs() > 1e-9 * scale {
        return Err(Error::InconsistentIc(format!(
            "initial state violates c^2 = (chi')^2: c^2 = {c2}, (chi')^2 = {}",
            ic.dchi * ic.dchi
        )));
    }
    let vertex = ic.coord - (1.0 + gamma) * ic.dchi / (1.0 - gamma);
    if vertex >= interval[0] && vertex <= interval[1] {
        return Err(Error::Degenerate(format!(
            "vacuum vertex xi = {vertex} lies inside the sample interval"
        )));
    }
    let k = (1.0 - gamma) / (2.0 * (1.0 + gamma));
    let chi = coord
        .iter()
        .map(|&x| gas.bernoulli_a + k * (x - vertex) * (x - vertex))
        .collect();
    let dchi = coord.iter().map(|&x| 2.0 * k * (x - vertex)).collect();
    Ok(Profile1d {
        coord,
        chi,
        dchi,
        sonic_points: Vec::new(),
        truncated: false,
        radial: false,
    })
}

/// Integrate the radial reduction from `ic` out to `r1`, sampling `n`
/// uniform points. `d` is the space dimension in the source term. Regular
/// centers (r0 = 0, chi' = 0) use the limiting equation chi''(0) = -1.
/// Integration stops with a sonic flag when |c^2 - (chi')^2| < 1e-8 c^2.
pub fn solve_radial(
    gas: &GasModel,
    d: u32,
    ic: Ic1d,
    r1: f64,
    n: usize,
) -> Result<Profile1d> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(ic.coord.is_finite() && ic.coord >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial radius must be nonnegative, got {}",
            ic.coord
        )));
    }
    if ic.coord == 0.0 && ic.dchi != 0.0 {
        return Err(Error::Precondition(
            "a center initial point requires chi'(0) = 0".into(),
        ));
    }
    if !(r1 > ic.coord) {
        return Err(Error::InvalidArgument(format!(
            "outer radius {r1} must exceed the initial radius {}",
            ic.coord
        )));
    }
    gas.sound_speed_sq(ic.chi, &[ic.dchi, 0.0])?;

    let dm1 = (d - 1) as f64;
    let mut rhs = |r: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let (chi, u) = (y[0], y[1]);
        let c2 = gas.sound_speed_sq(chi, &[u, 0.0])?;
        let u2 = u * u;
        let denom = c2 - u2;
        // Tighter than the stop predicate so truncation wins over a hard
        // error while the sonic radius is being localized.
        if denom.abs() < 0.1 * SONIC_REL * c2 {
            return Err(Error::Degenerate(format!(
                "sonic degeneracy at r = {r}"
            )));
        }
        let upp = if r == 0.0 {
            // u = 0 here; the limit of (u2 - d c^2 - c^2 dm1 u/r) / denom.
            -1.0
        } else {
            (u2 - d as f64 * c2 - c2 * dm1 * u / r) / denom
        };
        Ok([u, upp])
    };

    let samples = sample_mesh(ic.coord, r1, n)?;
    let (mesh, skip_first) = if samples[0] == ic.coord {
        (samples[1..].to_vec(), true)
    } else {
        (samples.clone(), false)
    };

    let mut coord = Vec::with_capacity(n);
    let mut chi = Vec::with_capacity(n);
    let mut dchi = Vec::with_capacity(n);
    if skip_first {
        coord.push(ic.coord);
        chi.push(ic.chi);
        dchi.push(ic.dchi);
    }

    let sonic_stop = |y: &[f64; 2]| -> bool {
        let c2 = gas.sound_speed_sq_raw(y[0], &[y[1], 0.0]);
        c2 <= 0.0 || (c2 - y[1] * y[1]).abs() < SONIC_REL * c2
    };

    let end = dopri5::<2>(
        &mut rhs,
        ic.coord,
        [ic.chi, ic.dchi],
        &mesh,
        PROFILE_TOL,
        |_, r, y| {
            coord.push(r);
            chi.push(y[0]);
            dchi.push(y[1]);
        },
        |_, y| sonic_stop(y),
    )?;

    let (sonic_points, truncated) = match end.reason {
        EndReason::Completed => (Vec::new(), false),
        EndReason::Stop => (vec![end.x], true),
        EndReason::Stall => {
            // The integrator crept to the edge of the solution's domain.
            // A sonic endpoint is the only degeneracy the equation admits
            // with c^2 bounded away from zero; classify by the final state.
            let (cf, uf) = (end.y[0], end.y[1]);
            let c2 = gas.sound_speed_sq_raw(cf, &[uf, 0.0]);
            let gauge = c2.abs().max(uf * uf);
            if c2 > 0.0 && (c2 - uf * uf).abs() <= 1e-4 * gauge {
                (vec![end.x], true)
            } else if c2 <= 1e-6 * gas.c0 * gas.c0 {
                return Err(Error::state(format!(
                    "radial solution reaches near-vacuum at r = {:.9}",
                    end.x
                )));
            } else {
                return Err(Error::Degenerate(format!(
                    "radial integration stalled at r = {:.9}",
                    end.x
                )));
            }
        }
    };
    if coord.len() < 2 {
        return Err(Error::Degenerate(format!(
            "sonic degeneracy at r = {:.6} leaves no usable interval",
            end.x
        )));
    }
    Ok(Profile1d {
        coord,
        chi,
        dchi,
        sonic_points,
        truncated,
        radial: true,
    })
}

/// Sample a radial profile onto a 2D grid about the origin with cubic
/// Hermite interpolation on the profile mesh. Every node radius must lie
/// inside the profile's coordinate range.
pub fn sample_radial_to_grid(profile: &Profile1d, grid: GridSpec) -> Result<ScalarField> {
    if !profile.radial {
        return Err(Error::Precondition(
            "grid sampling needs a radial profile".into(),
        ));
    }
    if profile.len() < 2 {
        return Err(Error::Precondition("profile too short to sample".into()));
    }
    let r_lo = profile.coord[0];
    let r_hi = profile.coord[profile.len() - 1];
    let mut values = Vec::with_capacity(grid.len());
    for i1 in 0..grid.dims[0] {
        for i2 in 0..grid.dims[1] {
            let xi = grid.xi(i1, i2);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let tol = 1e-12 * (1.0 + r_hi.abs());
            if r < r_lo - tol || r > r_hi + tol {
                return Err(Error::Precondition(format!(
                    "node radius {r} outside profile range [{r_lo}, {r_hi}]"
                )));
            }
            values.push(hermite_eval(profile, r.clamp(r_lo, r_hi)));
        }
    }
    ScalarField::from_values(grid, Variable::Chi, values)
}

/// Piecewise cubic Hermite using the stored (chi, chi') pairs; quartic-order
/// accurate in the profile mesh width.
fn hermite_eval(profile: &Profile1d, r: f64) -> f64 {
    let n = profile.len();
    // Uniform mesh; locate the bracketing cell.
    let h = (profile.coord[n - 1] - profile.coord[0]) / (n - 1) as f64;
    let mut k = (((r - profile.coord[0]) / h) as usize).min(n - 2);
    // Guard against roundoff placing r outside [coord[k], coord[k+1]].
    while k > 0 && r < profile.coord[k] {
        k -= 1;
    }
    while k + 2 < n && r > profile.coord[k + 1] {
        k += 1;
    }
    let (x0, x1) = (profile.coord[k], profile.coord[k + 1]);
    let w = x1 - x0;
    let t = (r - x0) / w;
    let (f0, f1) = (profile.chi[k], profile.chi[k + 1]);
    let (g0, g1) = (profile.dchi[k] * w, profile.dchi[k + 1] * w);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * g0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * g1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::residual_chi;
    use crate::gas::{pseudo_mach_classify, TypeTag, DEFAULT_TOL_L};
    use approx::assert_relative_eq;

    #[test]
    fn uniform_flow_residual_vanishes() {
        let gas = GasModel::new(2.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::from_extent([-0.5, -0.5], [0.5, 0.5], [17, 17]).unwrap();
        let f = uniform_flow([0.0, 0.0], -1.0, &gas, grid).unwrap();
        let r = residual_chi(&f, &gas).unwrap();
        assert!(r.inf_norm() <= 1e-12);
    }

    #[test]
    fn uniform_flow_classification_matches_radius() {
        // v = 0, gamma = 2, A' = -1: c^2 = 1 and L(xi) = |xi|.
        let gas = GasModel::new(2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(uniform_c2(&gas, [0.0, 0.0], -1.0).unwrap(), 1.0);
        let grid = GridSpec::from_extent([-0.6, -0.6], [0.6, 0.6], [5, 5]).unwrap();
        let f = uniform_flow([0.0, 0.0], -1.0, &gas, grid).unwrap();
        let st = crate::field::point_state(&f, &gas, 2, 2).unwrap();
        assert_relative_eq!(st.l, 0.0);
        assert_eq!(st.tag, TypeTag::Elliptic);
        let corner = crate::field::grad_chi_at(&f, 0, 0);
        let (l, tag) =
            pseudo_mach_classify(&corner, 1.0, DEFAULT_TOL_L).unwrap();
        assert_relative_eq!(l, (2.0f64 * 0.36).sqrt(), max_relative = 1e-12);
        assert_eq!(tag, TypeTag::Elliptic);
    }

    #[test]
    fn isothermal_uniform_flow_stagnates_at_v() {
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::from_extent([0.5, -0.5], [1.5, 0.5], [5, 5]).unwrap();
        let f = uniform_flow([1.0, 0.0], 0.3, &gas, grid).unwrap();
        // Node (2,2) sits at xi = (1, 0) = v: stagnation, L = 0.
        let st = crate::field::point_state(&f, &gas, 2, 2).unwrap();
        assert!(st.l <= 1e-12);
        assert_eq!(st.tag, TypeTag::Elliptic);
        // Far away the flow must be hyperbolic: L = |v - xi| / c0 large.
        let (l, tag) = pseudo_mach_classify(&[5.0, 0.0], 1.0, DEFAULT_TOL_L).unwrap();
        assert!(l > 1.0);
        assert_eq!(tag, TypeTag::Hyperbolic);
    }

    #[test]
    fn uniform_flow_rejects_nonpositive_sound_speed() {
        let gas = GasModel::new(2.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::from_extent([-0.5, -0.5], [0.5, 0.5], [5, 5]).unwrap();
        match uniform_flow([0.0, 0.0], 1.0, &gas, grid) {
            Err(Error::InvalidState { .. }) => {}
            other => panic!("expected invalid state, got {other:?}"),
        }
    }

    #[test]
    fn affine_branch_truncates_at_sonic_points() {
        // gamma = 1, c0 = 1, IC (0, -10, 0): chi = -10 - xi^2/2, sonic at +-1.
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -10.0,
            dchi: 0.0,
        };
        let p = solve_1d(&gas, Branch1d::Affine, ic, [-2.0, 2.0], 101).unwrap();
        assert!(p.truncated);
        assert_eq!(p.sonic_points, vec![-1.0, 1.0]);
        assert_relative_eq!(p.coord[0], -1.0);
        assert_relative_eq!(p.coord[100], 1.0);
        for (x, (c, dc)) in p.coord.iter().zip(p.chi.iter().zip(&p.dchi)) {
            assert_relative_eq!(*c, -10.0 - 0.5 * x * x, epsilon = 1e-12);
            assert_relative_eq!(*dc, -x, epsilon = 1e-12);
        }
        // L = |chi'| / c0 = 1 exactly at the cut ends.
        assert_relative_eq!(p.dchi[0].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn affine_branch_untruncated_inside_sonic_interval() {
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -10.0,
            dchi: 0.0,
        };
        let p = solve_1d(&gas, Branch1d::Affine, ic, [-0.5, 0.5], 11).unwrap();
        assert!(!p.truncated);
        assert!(p.sonic_points.is_empty());
    }

    #[test]
    fn affine_branch_rejects_parabolic_ic() {
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -10.0,
            dchi: 1.0,
        };
        assert!(matches!(
            solve_1d(&gas, Branch1d::Affine, ic, [-0.5, 0.5], 11),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn supersonic_affine_ic_truncates_on_one_side() {
        // chi'(0) = 2 > c0 = 1: sonic points at xi = 1 and 3; the component
        // containing 0 is (-inf, 1).
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -10.0,
            dchi: 2.0,
        };
        let p = solve_1d(&gas, Branch1d::Affine, ic, [-1.0, 4.0], 51).unwrap();
        assert!(p.truncated);
        assert_eq!(p.sonic_points, vec![1.0]);
        assert_relative_eq!(p.coord[50], 1.0);
    }

    #[test]
    fn isothermal_rarefaction_is_affine_and_parabolic() {
        let gas = GasModel::new(1.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: 0.0,
            dchi: 1.0,
        };
        let p = solve_1d(&gas, Branch1d::Rarefaction(Sign::Plus), ic, [-1.0, 1.0], 21).unwrap();
        for (x, (c, dc)) in p.coord.iter().zip(p.chi.iter().zip(&p.dchi)) {
            assert_relative_eq!(*c, *x, epsilon = 1e-14);
            assert_relative_eq!(*dc, 1.0);
        }
        // Parabolic everywhere: L = |chi'|/c0 = 1 at every sample.
        for (c, dc) in p.chi.iter().zip(&p.dchi) {
            let c2 = gas.sound_speed_sq(*c, &[*dc, 0.0]).unwrap();
            assert!((dc.abs() / c2.sqrt() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn rarefaction_closed_form_gamma_three() {
        // gamma = 3 vertex at 0: chi = -xi^2/4, c^2 = (chi')^2 = xi^2/4.
        let gas = GasModel::new(3.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -0.25,
            dchi: -0.5,
        };
        let p = solve_1d(&gas, Branch1d::Rarefaction(Sign::Minus), ic, [0.5, 2.0], 31).unwrap();
        for (x, (c, dc)) in p.coord.iter().zip(p.chi.iter().zip(&p.dchi)) {
            assert_relative_eq!(*c, -0.25 * x * x, epsilon = 1e-12);
            assert_relative_eq!(*dc, -0.5 * x, epsilon = 1e-12);
            let c2 = gas.sound_speed_sq(*c, &[*dc, 0.0]).unwrap();
            assert_relative_eq!(c2, dc * dc, max_relative = 1e-12);
            assert!((dc.abs() / c2.sqrt() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn rarefaction_rejects_inconsistent_ic() {
        let gas = GasModel::new(3.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -0.1,
            dchi: -0.5,
        };
        assert!(matches!(
            solve_1d(&gas, Branch1d::Rarefaction(Sign::Minus), ic, [0.5, 2.0], 11),
            Err(Error::InconsistentIc(_))
        ));
    }

    #[test]
    fn rarefaction_rejects_vertex_in_interval() {
        let gas = GasModel::new(3.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -0.25,
            dchi: -0.5,
        };
        assert!(matches!(
            solve_1d(&gas, Branch1d::Rarefaction(Sign::Minus), ic, [-0.5, 2.0], 11),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn regular_center_reproduces_uniform_flow() {
        // gamma = 2, A' = -1: the unique regular radial solution is the
        // uniform flow chi = -r^2/2 - 1 with c^2 = 1.
        let gas = GasModel::new(2.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -1.0,
            dchi: 0.0,
        };
        let p = solve_radial(&gas, 2, ic, 0.9, 181).unwrap();
        assert!(!p.truncated);
        for (r, (c, dc)) in p.coord.iter().zip(p.chi.iter().zip(&p.dchi)) {
            assert!((c - (-0.5 * r * r - 1.0)).abs() <= 1e-9, "chi({r}) = {c}");
            assert!((dc - (-r)).abs() <= 1e-9);
        }
    }

    #[test]
    fn center_curvature_is_minus_one_for_any_gas() {
        for (gamma, d, chi0) in [(1.4, 2u32, -0.5), (1.0, 3, 0.2), (2.5, 1, -2.0)] {
            let gas = GasModel::new(gamma, 1.0, 1.0).unwrap();
            let ic = Ic1d {
                coord: 0.0,
                chi: chi0,
                dchi: 0.0,
            };
            let r1 = 1e-3;
            let p = solve_radial(&gas, d, ic, r1, 11).unwrap();
            let u = p.dchi[10];
            assert!(
                (u / r1 + 1.0).abs() < 1e-5,
                "gamma={gamma} d={d}: chi''(0) ~ {}",
                u / r1
            );
        }
    }

    #[test]
    fn radial_d1_matches_affine_closed_form() {
        let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -2.0,
            dchi: 0.3,
        };
        let p = solve_radial(&gas, 1, ic, 2.0, 41).unwrap();
        let q = solve_1d(&gas, Branch1d::Affine, ic, [1.0, 2.0], 41).unwrap();
        assert!(!p.truncated && !q.truncated);
        for k in 0..41 {
            assert!((p.coord[k] - q.coord[k]).abs() <= 1e-13);
            assert!((p.chi[k] - q.chi[k]).abs() <= 1e-9, "k={k}");
            assert!((p.dchi[k] - q.dchi[k]).abs() <= 1e-9);
        }
    }

    #[test]
    fn radial_integration_stops_at_sonic_radius() {
        // Uniform-flow profile has L = r: sonic exactly at r = 1.
        let gas = GasModel::new(2.0, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 0.0,
            chi: -1.0,
            dchi: 0.0,
        };
        let p = solve_radial(&gas, 2, ic, 1.05, 211).unwrap();
        assert!(p.truncated);
        assert_eq!(p.sonic_points.len(), 1);
        assert!(
            (p.sonic_points[0] - 1.0).abs() < 1e-4,
            "sonic at {}",
            p.sonic_points[0]
        );
        assert!(*p.coord.last().unwrap() < 1.0);
    }

    #[test]
    fn annulus_profile_truncates_at_its_sonic_radius() {
        // The [1, 2] request dies where L reaches 1 from below; the valid
        // profile ends just short of r ~ 1.5282 with a sonic flag.
        let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -2.0,
            dchi: 0.3,
        };
        let p = solve_radial(&gas, 2, ic, 2.0, 2001).unwrap();
        assert!(p.truncated);
        assert_eq!(p.sonic_points.len(), 1);
        assert!(
            (p.sonic_points[0] - 1.5282).abs() < 1e-3,
            "sonic at {}",
            p.sonic_points[0]
        );
    }

    #[test]
    fn annulus_profile_samples_onto_grid_with_small_residual() {
        let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -2.0,
            dchi: 0.3,
        };
        let p = solve_radial(&gas, 2, ic, 1.5, 2001).unwrap();
        assert!(!p.truncated, "sonic at {:?}", p.sonic_points);
        // Square with all node radii inside [1, 1.5].
        let grid = GridSpec::from_extent([0.74, 0.74], [1.04, 1.04], [33, 33]).unwrap();
        let f = sample_radial_to_grid(&p, grid).unwrap();
        let r = residual_chi(&f, &gas).unwrap();
        let h = grid.spacing[0];
        assert!(
            r.inf_norm() < 10.0 * h * h,
            "residual {} at h = {h}",
            r.inf_norm()
        );
    }

    #[test]
    fn sampled_grid_refines_at_second_order() {
        let gas = GasModel::new(1.4, 1.0, 1.0).unwrap();
        let ic = Ic1d {
            coord: 1.0,
            chi: -2.0,
            dchi: 0.3,
        };
        let p = solve_radial(&gas, 2, ic, 1.5, 4001).unwrap();
        let mut errs = Vec::new();
        // Stay away from the sonic radius ~1.528 where chi'''' blows up and
        // the h^2 regime needs very fine grids.
        for nn in [17usize, 33, 65] {
            let grid = GridSpec::from_extent([0.72, 0.72], [0.92, 0.92], [nn, nn]).unwrap();
            let f = sample_radial_to_grid(&p, grid).unwrap();
            errs.push(residual_chi(&f, &gas).unwrap().inf_norm());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (1.7..=2.3).contains(&order),
                "order {order} from errors {errs:?}"
            );
        }
    }
}
