//! Verification machinery for the interior ellipticity principle: barrier
//! construction, interior-maximum detection for L^2 + b, parabolic-band
//! measurement, maximum-point proof diagnostics, and wall-identity checks.
//!
//! The discrete comparisons all carry a tolerance k h^2 scale(second
//! derivatives): a continuum statement about maxima can be displaced by one
//! node on a grid, so equalities are enforced up to the stencil error model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Profile1d;
use crate::field::{grad_chi_at, reflect_even, residual_chi, ScalarField, Variable};
use crate::gas::GasModel;
use crate::grid::{GridSpec, WallEdge};

/// Default multiplier for the h^2-scaled comparison tolerance.
pub const DEFAULT_K_VER: f64 = 10.0;

/// Quadratic radial barrier b(xi) = (delta/c_hat^2) beta |xi - center|^2 / 2.
///
/// With beta = min(1, c_hat/R) both norm bounds hold on the radius-R ball
/// about the center: sup |grad b| = (delta/c_hat^2) beta R <= delta/c_hat and
/// sup |hess b| = (delta/c_hat^2) beta <= delta/c_hat^2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierSpec {
    pub center: [f64; 2],
    pub delta: f64,
    pub c_hat: f64,
    pub beta: f64,
}

impl BarrierSpec {
    pub fn eval(&self, xi: [f64; 2]) -> f64 {
        let dx = xi[0] - self.center[0];
        let dy = xi[1] - self.center[1];
        self.coefficient() * 0.5 * (dx * dx + dy * dy)
    }

    pub fn grad(&self, xi: [f64; 2]) -> [f64; 2] {
        let k = self.coefficient();
        [k * (xi[0] - self.center[0]), k * (xi[1] - self.center[1])]
    }

    /// The scalar delta beta / c_hat^2 multiplying the quadratic.
    pub fn coefficient(&self) -> f64 {
        self.delta / (self.c_hat * self.c_hat) * self.beta
    }

    /// Closed-form sup of |grad b| over the radius-`radius` ball.
    pub fn grad_sup(&self, radius: f64) -> f64 {
        self.coefficient() * radius
    }

    /// Closed-form sup of |hess b| (constant).
    pub fn hess_sup(&self) -> f64 {
        self.coefficient()
    }
}

/// Build the barrier for a rectangular domain: center at the centroid, with
/// the center snapped onto each wall plane (for axes carrying exactly one
/// wall) so that even reflection maps the barrier to itself; R is the max
/// center-to-corner distance and beta = min(1, c_hat/R).
pub fn make_barrier(domain: &GridSpec, c_hat: f64, delta: f64) -> Result<BarrierSpec> {
    if !(delta >= 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    if !(c_hat > 0.0 && c_hat.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "c_hat must be positive, got {c_hat}"
        )));
    }
    let mut center = domain.centroid();
    for axis in 0..2 {
        let (low, high) = match axis {
            0 => (WallEdge::Left, WallEdge::Right),
            _ => (WallEdge::Bottom, WallEdge::Top),
        };
        let has_low = domain.walls.contains(low);
        let has_high = domain.walls.contains(high);
        if has_low != has_high {
            let e = if has_low { low } else { high };
            center[axis] = domain.wall_plane(e);
        }
    }
    let hi = domain.upper();
    let mut radius: f64 = 0.0;
    for cx in [domain.origin[0], hi[0]] {
        for cy in [domain.origin[1], hi[1]] {
            radius = radius.max(((cx - center[0]).powi(2) + (cy - center[1]).powi(2)).sqrt());
        }
    }
    let beta = if radius > 0.0 {
        (c_hat / radius).min(1.0)
    } else {
        1.0
    };
    Ok(BarrierSpec {
        center,
        delta,
        c_hat,
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    MaxOnBoundary,
    UniformlySubElliptic,
    ViolationCandidate,
}

/// Outcome of a maximum-principle check. A ViolationCandidate indicts the
/// data, not the principle: `residual_inf` tells whether the field solves
/// the equation in the first place.
#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub verdict: Verdict,
    /// Node of the global max of L^2 + b, folded back onto the input grid
    /// for wall runs.
    pub argmax_node: [usize; 2],
    pub argmax_xi: [f64; 2],
    pub argmax_value: f64,
    pub max_interior_l2: f64,
    pub max_boundary_value: f64,
    pub residual_inf: f64,
    pub tol: f64,
    pub delta: f64,
    pub barrier: BarrierSpec,
    /// Wall-identity norms, one entry per wall edge of the input grid.
    pub wall_norms: Vec<WallNorms>,
}

/// Gradient of chi honoring wall symmetry: the normal component on a wall
/// edge vanishes identically, other boundary components use one-sided
/// stencils.
fn grad_wall_aware(field: &ScalarField, i1: usize, i2: usize) -> [f64; 2] {
    let g = field.grid();
    let mut grad = grad_chi_at(field, i1, i2);
    for edge in g.walls.iter() {
        if g.on_edge(edge, i1, i2) {
            grad[edge.normal_axis()] = 0.0;
        }
    }
    grad
}

/// L^2 at every node of the closure; errors on c^2 <= 0.
fn l2_values(field: &ScalarField, gas: &GasModel) -> Result<Vec<f64>> {
    let g = *field.grid();
    let mut out = Vec::with_capacity(g.len());
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let grad = grad_wall_aware(field, i1, i2);
            let chi = field.value(i1, i2);
            let c2 = gas
                .sound_speed_sq(chi, &grad)
                .map_err(|e| crate::field::attach_node(e, [i1, i2]))?;
            out.push((grad[0] * grad[0] + grad[1] * grad[1]) / c2);
        }
    }
    Ok(out)
}

/// Largest sound speed over the closure, with the same wall-aware
/// gradient the verifier uses. The usual source of the gauge c_hat: walls
/// do not change the supremum under even reflection, so a cap taken here
/// survives the verifier's reflection step.
pub fn max_sound_speed(field: &ScalarField, gas: &GasModel) -> Result<f64> {
    if field.var() != Variable::Chi {
        return Err(Error::Precondition(
            "sound speeds need a chi field".into(),
        ));
    }
    let g = field.grid();
    let mut best = f64::NEG_INFINITY;
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let grad = grad_wall_aware(field, i1, i2);
            let c2 = gas
                .sound_speed_sq(field.value(i1, i2), &grad)
                .map_err(|e| crate::field::attach_node(e, [i1, i2]))?;
            best = best.max(c2.sqrt());
        }
    }
    Ok(best)
}

/// Check the maximum principle for L^2 + b on the field. Wall edges are
/// resolved by even reflection (once per axis), after which wall-plane
/// nodes are ordinary interior nodes; the verdict is computed on the
/// reflected domain exactly as the proof mechanism prescribes.
pub fn verify_max_principle(
    field: &ScalarField,
    gas: &GasModel,
    barrier: &BarrierSpec,
    delta: f64,
    k_ver: Option<f64>,
) -> Result<EllipticityReport> {
    let k_ver = k_ver.unwrap_or(DEFAULT_K_VER);
    if !(k_ver > 0.0 && k_ver.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance factor must be positive, got {k_ver}"
        )));
    }
    if field.var() != Variable::Chi {
        return Err(Error::Precondition(
            "maximum-principle checks run on chi fields".into(),
        ));
    }
    let residual_inf = residual_chi(field, gas)?.inf_norm();
    let wall_norms = field
        .grid()
        .walls
        .iter()
        .map(|e| check_wall_conditions(field, gas, e))
        .collect::<Result<Vec<_>>>()?;

    // Even reflection, at most once per axis; slip is a precondition and
    // reflect_even enforces it.
    let mut work = field.clone();
    let mut folds: Vec<(usize, f64)> = Vec::new();
    for axis in 0..2 {
        let edge = work
            .grid()
            .walls
            .iter()
            .find(|e| e.normal_axis() == axis);
        if let Some(edge) = edge {
            folds.push((axis, work.grid().wall_plane(edge)));
            work = reflect_even(&work, edge, None)?;
        }
    }

    let g = *work.grid();
    let l2 = l2_values(&work, gas)?;
    let b: Vec<f64> = {
        let mut v = Vec::with_capacity(g.len());
        for i1 in 0..g.dims[0] {
            for i2 in 0..g.dims[1] {
                v.push(barrier.eval(g.xi(i1, i2)));
            }
        }
        v
    };
    let f: Vec<f64> = l2.iter().zip(&b).map(|(a, b)| a + b).collect();

    // Stencil-error tolerance from the measured second derivatives of F.
    let [h1, h2] = g.spacing;
    let mut scale = 0.0f64;
    for i1 in 1..g.dims[0] - 1 {
        for i2 in 1..g.dims[1] - 1 {
            let at = |a: usize, b: usize| f[g.idx(a, b)];
            let f11 = (at(i1 + 1, i2) - 2.0 * at(i1, i2) + at(i1 - 1, i2)) / (h1 * h1);
            let f22 = (at(i1, i2 + 1) - 2.0 * at(i1, i2) + at(i1, i2 - 1)) / (h2 * h2);
            let f12 = (at(i1 + 1, i2 + 1) - at(i1 + 1, i2 - 1) - at(i1 - 1, i2 + 1)
                + at(i1 - 1, i2 - 1))
                / (4.0 * h1 * h2);
            scale = scale.max(f11.abs() + 2.0 * f12.abs() + f22.abs());
        }
    }
    let h = g.max_spacing();
    let tol = k_ver * h * h * scale;

    // Hypothesis checks on the closure.
    let c_cap = barrier.c_hat * (1.0 + 1e-12);
    let l_cap = 1.0 + tol;
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let idx = g.idx(i1, i2);
            let grad = grad_wall_aware(&work, i1, i2);
            let c2 = gas.sound_speed_sq(work.value(i1, i2), &grad)?;
            if c2.sqrt() > c_cap {
                return Err(Error::Precondition(format!(
                    "c = {:.6} exceeds c_hat = {} at node ({i1}, {i2})",
                    c2.sqrt(),
                    barrier.c_hat
                )));
            }
            if l2[idx].sqrt() > l_cap {
                return Err(Error::Precondition(format!(
                    "L = {:.6} exceeds 1 + tol = {l_cap:.6} at node ({i1}, {i2})",
                    l2[idx].sqrt()
                )));
            }
        }
    }

    // A node is boundary iff it lies on a non-wall edge; wall-plane nodes
    // that survive reflection (opposed wall pairs) count as interior.
    let is_boundary = |i1: usize, i2: usize| {
        WallEdge::ALL
            .into_iter()
            .any(|e| g.on_edge(e, i1, i2) && !g.walls.contains(e))
    };

    let mut max_interior = f64::NEG_INFINITY;
    let mut max_boundary = f64::NEG_INFINITY;
    let mut max_interior_l2 = f64::NEG_INFINITY;
    let mut argmax = (0usize, 0usize);
    let mut argmax_val = f64::NEG_INFINITY;
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let v = f[g.idx(i1, i2)];
            if v > argmax_val {
                argmax_val = v;
                argmax = (i1, i2);
            }
            if is_boundary(i1, i2) {
                max_boundary = max_boundary.max(v);
            } else {
                max_interior = max_interior.max(v);
                max_interior_l2 = max_interior_l2.max(l2[g.idx(i1, i2)]);
            }
        }
    }

    let verdict = if max_interior <= max_boundary + tol {
        Verdict::MaxOnBoundary
    } else if max_interior_l2 <= 1.0 - delta + tol {
        Verdict::UniformlySubElliptic
    } else {
        Verdict::ViolationCandidate
    };

    // Fold the argmax back onto the input grid.
    let mut xi = g.xi(argmax.0, argmax.1);
    for &(axis, plane) in &folds {
        if (xi[axis] - plane).abs() > 0.0 {
            let gap = g.spacing[axis] * 0.25;
            let mirrored = 2.0 * plane - xi[axis];
            let orig = field.grid();
            let lo = orig.origin[axis] - gap;
            let hi = orig.upper()[axis] + gap;
            if !(xi[axis] > lo && xi[axis] < hi) && mirrored > lo && mirrored < hi {
                xi[axis] = mirrored;
            }
        }
    }
    let orig = field.grid();
    let node = [
        ((xi[0] - orig.origin[0]) / orig.spacing[0]).round() as usize,
        ((xi[1] - orig.origin[1]) / orig.spacing[1]).round() as usize,
    ];
    let argmax_xi = orig.xi(node[0].min(orig.dims[0] - 1), node[1].min(orig.dims[1] - 1));

    Ok(EllipticityReport {
        verdict,
        argmax_node: node,
        argmax_xi,
        argmax_value: argmax_val,
        max_interior_l2,
        max_boundary_value: max_boundary,
        residual_inf,
        tol,
        delta,
        barrier: *barrier,
        wall_norms,
    })
}

/// Fraction of strict-interior nodes with |L - 1| <= band.
pub fn parabolic_measure(field: &ScalarField, gas: &GasModel, band: f64) -> Result<f64> {
    if !(band >= 0.0 && band.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "band must be nonnegative, got {band}"
        )));
    }
    let g = *field.grid();
    let mut hits = 0usize;
    let mut total = 0usize;
    for i1 in 1..g.dims[0] - 1 {
        for i2 in 1..g.dims[1] - 1 {
            let grad = grad_wall_aware(field, i1, i2);
            let c2 = gas
                .sound_speed_sq(field.value(i1, i2), &grad)
                .map_err(|e| crate::field::attach_node(e, [i1, i2]))?;
            let l = ((grad[0] * grad[0] + grad[1] * grad[1]) / c2).sqrt();
            if (l - 1.0).abs() <= band {
                hits += 1;
            }
            total += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Per-field fractions for a refinement family.
pub fn parabolic_measure_family(
    fields: &[ScalarField],
    gas: &GasModel,
    band: f64,
) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| parabolic_measure(f, gas, band))
        .collect()
}

/// Fraction of profile samples with |L - 1| <= band, for 1D controls.
pub fn parabolic_measure_profile(
    profile: &Profile1d,
    gas: &GasModel,
    band: f64,
) -> Result<f64> {
    if !(band >= 0.0 && band.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "band must be nonnegative, got {band}"
        )));
    }
    if profile.coord.is_empty() {
        return Err(Error::Precondition("empty profile".into()));
    }
    let mut hits = 0usize;
    for k in 0..profile.coord.len() {
        let c2 = gas.sound_speed_sq(profile.chi[k], &[profile.dchi[k]])?;
        let l = profile.dchi[k].abs() / c2.sqrt();
        if (l - 1.0).abs() <= band {
            hits += 1;
        }
    }
    Ok(hits as f64 / profile.coord.len() as f64)
}

/// Proof-frame diagnostics at a candidate maximum point of L^2 + b.
#[derive(Debug, Clone, Serialize)]
pub struct MaxpointDiagnostics {
    pub node: [usize; 2],
    pub xi: [f64; 2],
    pub l: f64,
    pub c: f64,
    /// Unit vector of the rotated 1-axis (the grad-chi direction).
    pub frame_e1: [f64; 2],
    /// Measured chi_11 in the rotated frame.
    pub chi11: f64,
    /// First-order-condition prediction for chi_11.
    pub chi11_formula: f64,
    pub chi11_mismatch: f64,
    /// Measured |chi_1j| for the tangential direction.
    pub cross: f64,
    /// Measured sum of tangential second derivatives.
    pub chi_jj: f64,
    /// (L^2 - 1) chi_11 + L^2 - d: the chi-equation's exact consequence.
    pub balance_rhs: f64,
    pub balance_mismatch: f64,
    /// (L^2 - 1)(chi_11 + 1) + L^2 - d: variant form; coincides with the
    /// balance form at L = 1 (they differ by exactly L^2 - 1).
    pub sonic_rhs: f64,
    pub sonic_mismatch: f64,
    /// Measured discrete gradient of L^2 + b at the point, rotated frame.
    /// Zero at an exact stationary point; feeds the chi11 error bound.
    pub stationarity_defect: [f64; 2],
    /// h^2 times the third-derivative estimate: the stencil error scale.
    pub fd_scale: f64,
}

/// Diagnostics for the proof's maximum-point argument at `point`.
///
/// Preconditions: the point is strict interior, carries L > 0, and is a
/// local max of L^2 + b among its 8 neighbors up to the second-order slack
/// 10 h^2 scale(local F hessian); a discrete max cannot be certified more
/// tightly than the stencil curvature error.
pub fn maxpoint_diagnostics(
    field: &ScalarField,
    gas: &GasModel,
    barrier: &BarrierSpec,
    point: [usize; 2],
) -> Result<MaxpointDiagnostics> {
    let g = *field.grid();
    let [i1, i2] = point;
    if !g.is_interior(i1, i2) {
        return Err(Error::Precondition(format!(
            "node ({i1}, {i2}) is not interior"
        )));
    }

    let f_at = |a: usize, b: usize| -> Result<f64> {
        let grad = grad_wall_aware(field, a, b);
        let c2 = gas
            .sound_speed_sq(field.value(a, b), &grad)
            .map_err(|e| crate::field::attach_node(e, [a, b]))?;
        Ok((grad[0] * grad[0] + grad[1] * grad[1]) / c2 + barrier.eval(g.xi(a, b)))
    };

    let [h1, h2] = g.spacing;
    let mut patch = [[0.0f64; 3]; 3];
    for (a, row) in patch.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = f_at(i1 + a - 1, i2 + b - 1)?;
        }
    }
    let f0 = patch[1][1];
    let f11 = (patch[2][1] - 2.0 * f0 + patch[0][1]) / (h1 * h1);
    let f22 = (patch[1][2] - 2.0 * f0 + patch[1][0]) / (h2 * h2);
    let f12 = (patch[2][2] - patch[2][0] - patch[0][2] + patch[0][0]) / (4.0 * h1 * h2);
    let local_scale = f11.abs() + 2.0 * f12.abs() + f22.abs();
    let h = g.max_spacing();
    let slack = DEFAULT_K_VER * h * h * local_scale + 1e-12 * (1.0 + f0.abs());
    for (a, row) in patch.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if (a, b) != (1, 1) && v > f0 + slack {
                return Err(Error::Precondition(format!(
                    "node ({i1}, {i2}) is not a local max of L^2 + b: neighbor \
                     ({}, {}) exceeds it by {:.3e} (slack {:.3e})",
                    i1 + a - 1,
                    i2 + b - 1,
                    v - f0,
                    slack
                )));
            }
        }
    }

    let v = |a: usize, b: usize| field.value(a, b);
    let grad = [
        (v(i1 + 1, i2) - v(i1 - 1, i2)) / (2.0 * h1),
        (v(i1, i2 + 1) - v(i1, i2 - 1)) / (2.0 * h2),
    ];
    let q = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
    if q == 0.0 {
        return Err(Error::Precondition(format!(
            "L vanishes at node ({i1}, {i2}); the proof frame is undefined"
        )));
    }
    let chi0 = v(i1, i2);
    let c2 = gas
        .sound_speed_sq(chi0, &grad)
        .map_err(|e| crate::field::attach_node(e, point))?;
    let c = c2.sqrt();
    let l = q / c;

    let h11 = (v(i1 + 1, i2) - 2.0 * chi0 + v(i1 - 1, i2)) / (h1 * h1);
    let h22 = (v(i1, i2 + 1) - 2.0 * chi0 + v(i1, i2 - 1)) / (h2 * h2);
    let h12 = (v(i1 + 1, i2 + 1) - v(i1 + 1, i2 - 1) - v(i1 - 1, i2 + 1) + v(i1 - 1, i2 - 1))
        / (4.0 * h1 * h2);

    // Rotate so axis 1 is the grad-chi direction.
    let e = [grad[0] / q, grad[1] / q];
    let t = [-e[1], e[0]];
    let chi11 = e[0] * (h11 * e[0] + h12 * e[1]) + e[1] * (h12 * e[0] + h22 * e[1]);
    let cross = (e[0] * (h11 * t[0] + h12 * t[1]) + e[1] * (h12 * t[0] + h22 * t[1])).abs();
    let chi_jj = t[0] * (h11 * t[0] + h12 * t[1]) + t[1] * (h12 * t[0] + h22 * t[1]);

    let gb = barrier.grad(g.xi(i1, i2));
    let b1 = gb[0] * e[0] + gb[1] * e[1];
    let gamma = gas.gamma;
    let denom = l * (2.0 + (gamma - 1.0) * l * l);
    let chi11_formula = (-c * b1 - (gamma - 1.0) * l * l * l) / denom;

    let l2 = l * l;
    let d = 2.0;
    let balance_rhs = (l2 - 1.0) * chi11 + l2 - d;
    let sonic_rhs = (l2 - 1.0) * (chi11 + 1.0) + l2 - d;

    let df = [
        (patch[2][1] - patch[0][1]) / (2.0 * h1),
        (patch[1][2] - patch[1][0]) / (2.0 * h2),
    ];
    let defect = [df[0] * e[0] + df[1] * e[1], df[0] * t[0] + df[1] * t[1]];

    let fd_scale = h * h * third_derivative_estimate(field, i1, i2);

    Ok(MaxpointDiagnostics {
        node: point,
        xi: g.xi(i1, i2),
        l,
        c,
        frame_e1: e,
        chi11,
        chi11_formula,
        chi11_mismatch: (chi11 - chi11_formula).abs(),
        cross,
        chi_jj,
        balance_rhs,
        balance_mismatch: (chi_jj - balance_rhs).abs(),
        sonic_rhs,
        sonic_mismatch: (chi_jj - sonic_rhs).abs(),
        stationarity_defect: defect,
        fd_scale,
    })
}

/// Max over both axes of a third-difference estimate of chi at a node;
/// central 5-point where the stencil fits, one-sided otherwise.
fn third_derivative_estimate(field: &ScalarField, i1: usize, i2: usize) -> f64 {
    let g = field.grid();
    let mut worst = 0.0f64;
    for axis in 0..2 {
        let n = g.dims[axis];
        let i = if axis == 0 { i1 } else { i2 };
        let h = g.spacing[axis];
        let at = |k: usize| {
            if axis == 0 {
                field.value(k, i2)
            } else {
                field.value(i1, k)
            }
        };
        let d3 = if i >= 2 && i + 2 < n {
            (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) / (2.0 * h * h * h)
        } else if i + 3 < n {
            (-at(i) + 3.0 * at(i + 1) - 3.0 * at(i + 2) + at(i + 3)) / (h * h * h)
        } else if i >= 3 {
            (at(i) - 3.0 * at(i - 1) + 3.0 * at(i - 2) - at(i - 3)) / (h * h * h)
        } else {
            0.0
        };
        worst = worst.max(d3.abs());
    }
    worst
}

/// One-sided wall-identity norms: normal derivative, its first and second
/// tangential derivatives, the normal derivative of c^2, and the third
/// normal derivative. All are O(h^2) for a discrete solution with slip.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WallNorms {
    pub edge: WallEdge,
    pub chi_n: f64,
    pub chi_nt: f64,
    pub chi_ntt: f64,
    pub c2_n: f64,
    pub chi_nnn: f64,
}

impl WallNorms {
    /// Whether the slip norm indicates a violated wall condition.
    pub fn slip_violation(&self, tol: f64) -> bool {
        self.chi_n > tol
    }
}

/// Evaluate the wall identities on a declared wall edge.
pub fn check_wall_conditions(
    field: &ScalarField,
    gas: &GasModel,
    edge: WallEdge,
) -> Result<WallNorms> {
    let g = *field.grid();
    if !g.walls.contains(edge) {
        return Err(Error::InvalidArgument(format!(
            "{} edge is not declared as a wall",
            edge.name()
        )));
    }
    let axis = edge.normal_axis();
    let tangential = 1 - axis;
    if g.dims[axis] < 5 {
        return Err(Error::Precondition(format!(
            "third-order wall stencils need at least 5 nodes normal to the \
             {} edge, grid has {}",
            edge.name(),
            g.dims[axis]
        )));
    }
    let hn = g.spacing[axis];
    let ht = g.spacing[tangential];
    let nt = g.dims[tangential];
    let sign = if edge.is_low_side() { 1.0 } else { -1.0 };
    let wall_index = |k: usize| if edge.is_low_side() { k } else { g.dims[axis] - 1 - k };
    let node = |k: usize, t: usize| -> (usize, usize) {
        if axis == 0 {
            (wall_index(k), t)
        } else {
            (t, wall_index(k))
        }
    };
    let chi = |k: usize, t: usize| {
        let (a, b) = node(k, t);
        field.value(a, b)
    };

    // chi_n along the wall, then its tangential derivatives.
    let chi_n: Vec<f64> = (0..nt)
        .map(|t| sign * (-3.0 * chi(0, t) + 4.0 * chi(1, t) - chi(2, t)) / (2.0 * hn))
        .collect();
    let mut max_n = 0.0f64;
    let mut max_nt = 0.0f64;
    let mut max_ntt = 0.0f64;
    for t in 0..nt {
        max_n = max_n.max(chi_n[t].abs());
        let dt = if t == 0 {
            (-3.0 * chi_n[0] + 4.0 * chi_n[1] - chi_n[2]) / (2.0 * ht)
        } else if t + 1 == nt {
            (3.0 * chi_n[t] - 4.0 * chi_n[t - 1] + chi_n[t - 2]) / (2.0 * ht)
        } else {
            (chi_n[t + 1] - chi_n[t - 1]) / (2.0 * ht)
        };
        max_nt = max_nt.max(dt.abs());
        if t > 0 && t + 1 < nt {
            let dtt = (chi_n[t + 1] - 2.0 * chi_n[t] + chi_n[t - 1]) / (ht * ht);
            max_ntt = max_ntt.max(dtt.abs());
        }
    }

    // c^2 on the first three layers, then its one-sided normal derivative.
    let mut max_c2n = 0.0f64;
    for t in 0..nt {
        let c2_layer = |k: usize| -> Result<f64> {
            let (a, b) = node(k, t);
            let grad = grad_wall_aware(field, a, b);
            gas.sound_speed_sq(field.value(a, b), &grad)
                .map_err(|e| crate::field::attach_node(e, [a, b]))
        };
        let (c0, c1, c2v) = (c2_layer(0)?, c2_layer(1)?, c2_layer(2)?);
        let d = sign * (-3.0 * c0 + 4.0 * c1 - c2v) / (2.0 * hn);
        max_c2n = max_c2n.max(d.abs());
    }

    let mut max_nnn = 0.0f64;
    for t in 0..nt {
        let d = sign
            * (-5.0 * chi(0, t) + 18.0 * chi(1, t) - 24.0 * chi(2, t) + 14.0 * chi(3, t)
                - 3.0 * chi(4, t))
            / (2.0 * hn * hn * hn);
        max_nnn = max_nnn.max(d.abs());
    }

    Ok(WallNorms {
        edge,
        chi_n: max_n,
        chi_nt: max_nt,
        chi_ntt: max_ntt,
        c2_n: max_c2n,
        chi_nnn: max_nnn,
    })
}

/// One delta's verdict within a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaEntry {
    pub delta: f64,
    pub verdict: Verdict,
    pub max_interior_l2: f64,
    pub tol: f64,
}

/// Verdicts across a delta sweep. `largest_non_violating` is the empirical
/// delta margin: the largest tested delta whose verdict is not a violation
/// candidate, an observation about this field, not a certified bound.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaSweep {
    pub entries: Vec<DeltaEntry>,
    pub largest_non_violating: Option<f64>,
}

pub fn sweep_delta(
    field: &ScalarField,
    gas: &GasModel,
    c_hat: f64,
    deltas: &[f64],
    k_ver: Option<f64>,
) -> Result<DeltaSweep> {
    let mut entries = Vec::with_capacity(deltas.len());
    let mut largest = None;
    for &delta in deltas {
        let barrier = make_barrier(field.grid(), c_hat, delta)?;
        let report = verify_max_principle(field, gas, &barrier, delta, k_ver)?;
        if report.verdict != Verdict::ViolationCandidate {
            largest = Some(largest.map_or(delta, |b: f64| b.max(delta)));
        }
        entries.push(DeltaEntry {
            delta,
            verdict: report.verdict,
            max_interior_l2: report.max_interior_l2,
            tol: report.tol,
        });
    }
    Ok(DeltaSweep {
        entries,
        largest_non_violating: largest,
    })
}
