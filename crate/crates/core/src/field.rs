//! Nodal scalar fields, finite-difference calculus, residuals of the
//! similarity potential equation, chi/psi conversion, symmetry transforms and
//! even reflection across slip walls.
//!
//! All interior derivatives are second-order central stencils, exact on
//! quadratic polynomials; the uniform-flow family is quadratic, so those
//! fields have exactly zero residual at any resolution. One-sided stencils of
//! the same order appear only in boundary diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{pseudo_mach_classify, GasModel, TypeTag, DEFAULT_TOL_L};
use crate::grid::{GridSpec, WallEdge, WallSet};

/// What a field's nodal values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    /// chi = psi - |xi|^2/2, the variable with xi-independent coefficients.
    Chi,
    /// The self-similar potential psi.
    Psi,
    /// Derived diagnostic data (residuals); not a flow variable.
    Residual,
}

/// Immutable nodal scalar field on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: GridSpec,
    var: Variable,
    values: Vec<f64>,
}

/// Local state at a node: position, chi, pseudo-velocity, Hessian, sound
/// speed and pseudo-Mach classification.
#[derive(Debug, Clone, Copy)]
pub struct PointState {
    pub xi: [f64; 2],
    pub chi: f64,
    pub grad_chi: [f64; 2],
    pub hess_chi: [[f64; 2]; 2],
    pub c2: f64,
    pub l: f64,
    pub tag: TypeTag,
}

impl PointState {
    /// Flow velocity v = grad(psi) = grad(chi) + xi.
    pub fn velocity(&self) -> [f64; 2] {
        [self.grad_chi[0] + self.xi[0], self.grad_chi[1] + self.xi[1]]
    }
}

/// Gradient and Hessian samples on the interior nodes, stored on the interior
/// index range `1..dims-1` of the parent grid.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub interior_dims: [usize; 2],
    pub grad1: Vec<f64>,
    pub grad2: Vec<f64>,
    pub hess11: Vec<f64>,
    pub hess22: Vec<f64>,
    pub hess12: Vec<f64>,
}

/// Symmetry transforms of the equation: the solution set is closed under all
/// of them. Scaling by s maps chi to `s^2 chi(xi/s)` and must be paired with
/// [`GasModel::velocity_scaled`] to keep the isothermal sound speed and the
/// Bernoulli constant consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformOp {
    Translate([f64; 2]),
    /// Counterclockwise quarter turns (grid-exact; no interpolation).
    RotateQuarter(u32),
    Scale(f64),
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, var: Variable, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::state(format!(
                "non-finite field value at flat index {bad}"
            )));
        }
        Ok(ScalarField { grid, var, values })
    }

    pub fn from_fn(grid: GridSpec, var: Variable, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..grid.dims[0] {
            for i2 in 0..grid.dims[1] {
                values.push(f(grid.xi(i1, i2)));
            }
        }
        ScalarField::from_values(grid, var, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn var(&self) -> Variable {
        self.var
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.idx(i1, i2)]
    }

    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid-weighted L2 norm: sqrt(h1 h2 sum v^2).
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.spacing[0] * self.grid.spacing[1];
        (w * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Max nodal difference against a field with the same layout.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::InvalidArgument(
                "fields live on different grid layouts".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

#[inline]
fn d1(minus: f64, plus: f64, h: f64) -> f64 {
    (plus - minus) / (2.0 * h)
}

#[inline]
fn d2(minus: f64, center: f64, plus: f64, h: f64) -> f64 {
    (plus - 2.0 * center + minus) / (h * h)
}

/// One-sided second-order first derivative taking f at offsets 0, 1, 2 from
/// the boundary, with `sign` +1 when the stencil advances along +axis.
#[inline]
fn d1_one_sided(f0: f64, f1: f64, f2: f64, h: f64, sign: f64) -> f64 {
    sign * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
}

/// Chi value at a node, converting on the fly for psi fields.
#[inline]
fn chi_value(field: &ScalarField, i1: usize, i2: usize) -> f64 {
    let v = field.value(i1, i2);
    match field.var() {
        Variable::Chi => v,
        Variable::Psi => {
            let xi = field.grid().xi(i1, i2);
            v - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1])
        }
        Variable::Residual => v,
    }
}

/// Pseudo-velocity grad(chi) at any node: central stencils in the interior,
/// one-sided second-order stencils on the boundary (diagnostics use only).
pub fn grad_chi_at(field: &ScalarField, i1: usize, i2: usize) -> [f64; 2] {
    let g = *field.grid();
    let n = g.dims;
    let mut grad = [0.0; 2];
    for axis in 0..2 {
        let h = g.spacing[axis];
        let i = if axis == 0 { i1 } else { i2 };
        let at = |k: usize| -> f64 {
            if axis == 0 {
                chi_value(field, k, i2)
            } else {
                chi_value(field, i1, k)
            }
        };
        grad[axis] = if i == 0 {
            d1_one_sided(at(0), at(1), at(2), h, 1.0)
        } else if i + 1 == n[axis] {
            d1_one_sided(at(i), at(i - 1), at(i - 2), h, -1.0)
        } else {
            d1(at(i - 1), at(i + 1), h)
        };
    }
    grad
}

/// Full local state at an interior node.
pub fn point_state(field: &ScalarField, gas: &GasModel, i1: usize, i2: usize) -> Result<PointState> {
    point_state_tol(field, gas, i1, i2, DEFAULT_TOL_L)
}

pub fn point_state_tol(
    field: &ScalarField,
    gas: &GasModel,
    i1: usize,
    i2: usize,
    tol_l: f64,
) -> Result<PointState> {
    let g = *field.grid();
    if field.var() == Variable::Residual {
        return Err(Error::Precondition(
            "residual fields carry no flow state".into(),
        ));
    }
    if !g.is_interior(i1, i2) {
        return Err(Error::Precondition(format!(
            "node ({i1}, {i2}) is not interior"
        )));
    }
    let [h1, h2] = g.spacing;
    let v = |a: usize, b: usize| chi_value(field, a, b);
    let chi = v(i1, i2);
    let grad = [
        d1(v(i1 - 1, i2), v(i1 + 1, i2), h1),
        d1(v(i1, i2 - 1), v(i1, i2 + 1), h2),
    ];
    let h11 = d2(v(i1 - 1, i2), chi, v(i1 + 1, i2), h1);
    let h22 = d2(v(i1, i2 - 1), chi, v(i1, i2 + 1), h2);
    let h12 = (v(i1 + 1, i2 + 1) - v(i1 + 1, i2 - 1) - v(i1 - 1, i2 + 1) + v(i1 - 1, i2 - 1))
        / (4.0 * h1 * h2);
    let c2 = gas
        .sound_speed_sq(chi, &grad)
        .map_err(|e| attach_node(e, [i1, i2]))?;
    let (l, tag) = pseudo_mach_classify(&grad, c2, tol_l)?;
    Ok(PointState {
        xi: g.xi(i1, i2),
        chi,
        grad_chi: grad,
        hess_chi: [[h11, h12], [h12, h22]],
        c2,
        l,
        tag,
    })
}

pub(crate) fn attach_node(e: Error, node: [usize; 2]) -> Error {
    match e {
        Error::InvalidState { message, .. } => Error::InvalidState {
            message,
            node: Some(node),
        },
        other => other,
    }
}

/// Bulk gradient/Hessian evaluation on all interior nodes.
pub fn derivatives(field: &ScalarField) -> Derivatives {
    let g = *field.grid();
    let [n1, n2] = g.dims;
    let [h1, h2] = g.spacing;
    let idims = [n1 - 2, n2 - 2];
    let len = idims[0] * idims[1];
    let mut out = Derivatives {
        interior_dims: idims,
        grad1: Vec::with_capacity(len),
        grad2: Vec::with_capacity(len),
        hess11: Vec::with_capacity(len),
        hess22: Vec::with_capacity(len),
        hess12: Vec::with_capacity(len),
    };
    let v = |a: usize, b: usize| chi_value(field, a, b);
    for i1 in 1..n1 - 1 {
        for i2 in 1..n2 - 1 {
            let c = v(i1, i2);
            out.grad1.push(d1(v(i1 - 1, i2), v(i1 + 1, i2), h1));
            out.grad2.push(d1(v(i1, i2 - 1), v(i1, i2 + 1), h2));
            out.hess11.push(d2(v(i1 - 1, i2), c, v(i1 + 1, i2), h1));
            out.hess22.push(d2(v(i1, i2 - 1), c, v(i1, i2 + 1), h2));
            out.hess12.push(
                (v(i1 + 1, i2 + 1) - v(i1 + 1, i2 - 1) - v(i1 - 1, i2 + 1) + v(i1 - 1, i2 - 1))
                    / (4.0 * h1 * h2),
            );
        }
    }
    out
}

/// Interior residual of the chi-form equation,
/// `R = c^2 lap(chi) - sum_ij chi_i chi_j chi_ij - |grad chi|^2 + d c^2`,
/// on the same grid with zeros on the boundary ring. `R = 0` identifies
/// discrete solutions.
pub fn residual_chi(field: &ScalarField, gas: &GasModel) -> Result<ScalarField> {
    if field.var() != Variable::Chi {
        return Err(Error::Precondition("residual_chi expects a chi field".into()));
    }
    let g = *field.grid();
    let [n1, n2] = g.dims;
    let [h1, h2] = g.spacing;
    let mut r = vec![0.0; g.len()];
    let v = |a: usize, b: usize| field.value(a, b);
    for i1 in 1..n1 - 1 {
        for i2 in 1..n2 - 1 {
            let c = v(i1, i2);
            let g1 = d1(v(i1 - 1, i2), v(i1 + 1, i2), h1);
            let g2 = d1(v(i1, i2 - 1), v(i1, i2 + 1), h2);
            let h11 = d2(v(i1 - 1, i2), c, v(i1 + 1, i2), h1);
            let h22 = d2(v(i1, i2 - 1), c, v(i1, i2 + 1), h2);
            let h12 = (v(i1 + 1, i2 + 1) - v(i1 + 1, i2 - 1) - v(i1 - 1, i2 + 1)
                + v(i1 - 1, i2 - 1))
                / (4.0 * h1 * h2);
            let c2 = gas
                .sound_speed_sq(c, &[g1, g2])
                .map_err(|e| attach_node(e, [i1, i2]))?;
            let q2 = g1 * g1 + g2 * g2;
            r[g.idx(i1, i2)] = c2 * (h11 + h22)
                - (g1 * g1 * h11 + 2.0 * g1 * g2 * h12 + g2 * g2 * h22)
                - q2
                + 2.0 * c2;
        }
    }
    ScalarField::from_values(g, Variable::Residual, r)
}

/// Interior residual of the psi-form equation,
/// `R = c^2 lap(psi) - sum_ij (psi_i - xi_i)(psi_j - xi_j) psi_ij`, with the
/// sound speed evaluated through the chi variables. Algebraically identical
/// to [`residual_chi`] after conversion; kept for fields delivered as psi.
pub fn residual_psi(field: &ScalarField, gas: &GasModel) -> Result<ScalarField> {
    if field.var() != Variable::Psi {
        return Err(Error::Precondition("residual_psi expects a psi field".into()));
    }
    let g = *field.grid();
    let [n1, n2] = g.dims;
    let [h1, h2] = g.spacing;
    let mut r = vec![0.0; g.len()];
    let v = |a: usize, b: usize| field.value(a, b);
    for i1 in 1..n1 - 1 {
        for i2 in 1..n2 - 1 {
            let xi = g.xi(i1, i2);
            let c = v(i1, i2);
            let p1 = d1(v(i1 - 1, i2), v(i1 + 1, i2), h1);
            let p2 = d1(v(i1, i2 - 1), v(i1, i2 + 1), h2);
            let h11 = d2(v(i1 - 1, i2), c, v(i1 + 1, i2), h1);
            let h22 = d2(v(i1, i2 - 1), c, v(i1, i2 + 1), h2);
            let h12 = (v(i1 + 1, i2 + 1) - v(i1 + 1, i2 - 1) - v(i1 - 1, i2 + 1)
                + v(i1 - 1, i2 - 1))
                / (4.0 * h1 * h2);
            let u = [p1 - xi[0], p2 - xi[1]];
            let chi = c - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1]);
            let c2 = gas
                .sound_speed_sq(chi, &u)
                .map_err(|e| attach_node(e, [i1, i2]))?;
            r[g.idx(i1, i2)] = c2 * (h11 + h22)
                - (u[0] * u[0] * h11 + 2.0 * u[0] * u[1] * h12 + u[1] * u[1] * h22);
        }
    }
    ScalarField::from_values(g, Variable::Residual, r)
}

/// Chi <-> psi conversion: psi = chi + |xi|^2/2 nodewise.
pub fn convert(field: &ScalarField) -> Result<ScalarField> {
    let (target, sign) = match field.var() {
        Variable::Chi => (Variable::Psi, 1.0),
        Variable::Psi => (Variable::Chi, -1.0),
        Variable::Residual => {
            return Err(Error::Precondition(
                "residual fields cannot be converted".into(),
            ))
        }
    };
    let g = *field.grid();
    let mut values = Vec::with_capacity(g.len());
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let xi = g.xi(i1, i2);
            values.push(field.value(i1, i2) + sign * 0.5 * (xi[0] * xi[0] + xi[1] * xi[1]));
        }
    }
    ScalarField::from_values(g, target, values)
}

/// Flow velocity v = grad(chi) + xi = grad(psi) at every node (one-sided
/// stencils on the boundary).
pub fn velocity(field: &ScalarField) -> Result<Vec<[f64; 2]>> {
    if field.var() == Variable::Residual {
        return Err(Error::Precondition(
            "residual fields carry no flow state".into(),
        ));
    }
    let g = *field.grid();
    let mut out = Vec::with_capacity(g.len());
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let grad = grad_chi_at(field, i1, i2);
            let xi = g.xi(i1, i2);
            out.push([grad[0] + xi[0], grad[1] + xi[1]]);
        }
    }
    Ok(out)
}

/// Apply a symmetry transform. Metadata-exact: grids map to grids and no
/// interpolation happens. Only chi fields transform this way.
pub fn transform(field: &ScalarField, op: TransformOp) -> Result<ScalarField> {
    if field.var() != Variable::Chi {
        return Err(Error::Precondition(
            "symmetry transforms apply to chi fields; convert first".into(),
        ));
    }
    match op {
        TransformOp::Translate(v0) => {
            if !(v0[0].is_finite() && v0[1].is_finite()) {
                return Err(Error::InvalidArgument("translation must be finite".into()));
            }
            let mut g = *field.grid();
            g.origin = [g.origin[0] + v0[0], g.origin[1] + v0[1]];
            ScalarField::from_values(g, Variable::Chi, field.values().to_vec())
        }
        TransformOp::RotateQuarter(k) => {
            let mut out = field.clone();
            for _ in 0..(k % 4) {
                out = rotate_once(&out)?;
            }
            Ok(out)
        }
        TransformOp::Scale(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "scale factor must be positive, got {s}"
                )));
            }
            let old = field.grid();
            let mut g = GridSpec::new(
                [s * old.origin[0], s * old.origin[1]],
                [s * old.spacing[0], s * old.spacing[1]],
                old.dims,
            )?;
            g.walls = old.walls;
            let values = field.values().iter().map(|v| s * s * v).collect();
            ScalarField::from_values(g, Variable::Chi, values)
        }
    }
}

/// One counterclockwise quarter turn: new xi = (-xi_2, xi_1).
fn rotate_once(field: &ScalarField) -> Result<ScalarField> {
    let old = *field.grid();
    let [n1, n2] = old.dims;
    let hi = old.upper();
    let mut g = GridSpec::new(
        [-hi[1], old.origin[0]],
        [old.spacing[1], old.spacing[0]],
        [n2, n1],
    )?;
    let mut walls = WallSet::empty();
    for e in old.walls.iter() {
        walls = walls.with(match e {
            WallEdge::Left => WallEdge::Bottom,
            WallEdge::Right => WallEdge::Top,
            WallEdge::Bottom => WallEdge::Right,
            WallEdge::Top => WallEdge::Left,
        });
    }
    g.walls = walls;
    let mut values = Vec::with_capacity(old.len());
    for a in 0..n2 {
        for b in 0..n1 {
            values.push(field.value(b, n2 - 1 - a));
        }
    }
    ScalarField::from_values(g, Variable::Chi, values)
}

/// Even reflection across a wall edge, doubling the domain. The input must
/// satisfy discrete slip on that edge; `slip_tol` overrides the default
/// tolerance model `1e-9 (1+|chi|_inf) + (10/3) h^2 max|chi_nnn|`.
pub fn reflect_even(
    field: &ScalarField,
    edge: WallEdge,
    slip_tol: Option<f64>,
) -> Result<ScalarField> {
    if field.var() != Variable::Chi {
        return Err(Error::Precondition(
            "even reflection applies to chi fields".into(),
        ));
    }
    let g = *field.grid();
    let axis = edge.normal_axis();
    let n = g.dims[axis];
    let h = g.spacing[axis];

    let slip = wall_normal_derivative_max(field, edge);
    let tol = slip_tol.unwrap_or_else(|| {
        // The one-sided slip estimator errs by h^2 chi_nnn / 3 plus an h^3
        // term. Discretely even fields (mirror-ghost solver output) have
        // vanishing chi_nnn at the wall, so the h^3 floor carries them.
        let third = wall_normal_third_derivative_max(field, edge).unwrap_or(0.0);
        let scale = 1.0 + field.inf_norm();
        1e-9 * scale + (10.0 / 3.0) * h * h * third + 10.0 * h * h * h * scale
    });
    if slip > tol {
        return Err(Error::Precondition(format!(
            "slip violated on {} edge: max |chi_n| = {slip:.3e} exceeds tolerance {tol:.3e}",
            edge.name()
        )));
    }

    let mut dims = g.dims;
    dims[axis] = 2 * n - 1;
    let mut origin = g.origin;
    if edge.is_low_side() {
        origin[axis] -= (n - 1) as f64 * h;
    }
    let mut out = GridSpec::new(origin, g.spacing, dims)?;

    // The mirrored extreme edges on the reflection axis inherit the opposite
    // edge's wall flag; perpendicular walls survive as they are.
    let opposite = match edge {
        WallEdge::Left => WallEdge::Right,
        WallEdge::Right => WallEdge::Left,
        WallEdge::Bottom => WallEdge::Top,
        WallEdge::Top => WallEdge::Bottom,
    };
    let mut walls = WallSet::empty();
    if g.walls.contains(opposite) {
        walls = walls.with(edge).with(opposite);
    }
    for e in WallEdge::ALL {
        if e.normal_axis() != axis && g.walls.contains(e) {
            walls = walls.with(e);
        }
    }
    out.walls = walls;

    let w = n - 1;
    let source = |k: usize| -> usize {
        if edge.is_low_side() {
            k.abs_diff(w)
        } else {
            w - k.abs_diff(w)
        }
    };
    let mut values = Vec::with_capacity(out.len());
    for i1 in 0..out.dims[0] {
        for i2 in 0..out.dims[1] {
            let (s1, s2) = if axis == 0 {
                (source(i1), i2)
            } else {
                (i1, source(i2))
            };
            values.push(field.value(s1, s2));
        }
    }
    ScalarField::from_values(out, Variable::Chi, values)
}

/// Max over the wall edge of the one-sided second-order normal derivative.
pub fn wall_normal_derivative_max(field: &ScalarField, edge: WallEdge) -> f64 {
    let g = *field.grid();
    let axis = edge.normal_axis();
    let tangential = 1 - axis;
    let mut worst = 0.0f64;
    for t in 0..g.dims[tangential] {
        let f = |k: usize| wall_value(field, edge, k, t);
        let d = d1_one_sided(f(0), f(1), f(2), g.spacing[axis], wall_sign(edge));
        worst = worst.max(d.abs());
    }
    worst
}

/// Max over the wall edge of the one-sided second-order third normal
/// derivative; needs 5 nodes along the normal.
pub fn wall_normal_third_derivative_max(field: &ScalarField, edge: WallEdge) -> Option<f64> {
    let g = *field.grid();
    let axis = edge.normal_axis();
    if g.dims[axis] < 5 {
        return None;
    }
    let tangential = 1 - axis;
    let h = g.spacing[axis];
    let mut worst = 0.0f64;
    for t in 0..g.dims[tangential] {
        let f = |k: usize| wall_value(field, edge, k, t);
        let d = wall_sign(edge)
            * (-5.0 * f(0) + 18.0 * f(1) - 24.0 * f(2) + 14.0 * f(3) - 3.0 * f(4))
            / (2.0 * h * h * h);
        worst = worst.max(d.abs());
    }
    Some(worst)
}

/// Field value at normal offset `k` from the wall, tangential index `t`.
/// The stencil sign flips on high-side walls because the inward normal points
/// along the negative axis there.
pub(crate) fn wall_value(field: &ScalarField, edge: WallEdge, k: usize, t: usize) -> f64 {
    let g = field.grid();
    let axis = edge.normal_axis();
    let i = if edge.is_low_side() {
        k
    } else {
        g.dims[axis] - 1 - k
    };
    if axis == 0 {
        field.value(i, t)
    } else {
        field.value(t, i)
    }
}

pub(crate) fn wall_sign(edge: WallEdge) -> f64 {
    if edge.is_low_side() {
        1.0
    } else {
        -1.0
    }
}


impl ScalarField {
    /// Retag a residual field as chi so the geometric transforms apply to it.
    /// Test support for symmetry checks; not part of the flow-variable API.
    #[doc(hidden)]
    pub fn retag_chi(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            var: Variable::Chi,
            values: self.values.clone(),
        }
    }
}
