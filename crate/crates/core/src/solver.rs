//! Newton solver for the Dirichlet problem of the chi equation on a
//! rectangle, with optional slip walls closed by even-reflection ghost
//! nodes.
//!
//! Unknowns are the interior nodes plus wall-edge nodes; the remaining edge
//! nodes carry Dirichlet data. A Picard warmup freezes the coefficients and
//! solves the linearized equation, then full Newton steps with the analytic
//! Jacobian (including the sound-speed variation) finish to the residual
//! target. Both phases backtrack on the residual max-norm, so the recorded
//! history is nonincreasing past the first accepted step. Deterministic:
//! fixed assembly order, deterministic pivoting, no threading.

use serde::Serialize;

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::field::{wall_normal_derivative_max, ScalarField, Variable};
use crate::gas::GasModel;
use crate::grid::{GridSpec, NodeRole, WallEdge};

/// Iteration controls. `None` tolerances resolve against the sound-speed
/// estimate c2_hat taken from the initial state.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_newton_iters: usize,
    /// Absolute residual max-norm target; default 1e-10 * (1 + c2_hat).
    pub residual_tol: Option<f64>,
    pub backtrack_factor: f64,
    pub min_step: f64,
    pub picard_warmup_iters: usize,
    /// Lower clamp for c^2 during iteration only; default 1e-8 * c2_hat.
    pub c2_floor: Option<f64>,
    /// Pseudo-Mach damping threshold; steps are damped while any unknown
    /// node reaches L >= l_guard.
    pub l_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_newton_iters: 50,
            residual_tol: None,
            backtrack_factor: 0.5,
            min_step: (2.0f64).powi(-20),
            picard_warmup_iters: 5,
            c2_floor: None,
            l_guard: 0.999999,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.max_newton_iters >= 1
            && self.residual_tol.map_or(true, |t| t > 0.0 && t.is_finite())
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.min_step > 0.0
            && self.min_step < 1.0
            && self.c2_floor.map_or(true, |f| f > 0.0 && f.is_finite())
            && self.l_guard > 0.0
            && self.l_guard < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "solver config violates its invariants".into(),
            ))
        }
    }
}

/// Slip-consistency norm for one wall edge of the solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WallSlip {
    pub edge: WallEdge,
    pub max_normal_derivative: f64,
}

/// Outcome of a solve. `residual_history[0]` is the initial state's norm;
/// one entry follows per accepted iterate.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub max_l_interior: f64,
    pub l_guard_hits: usize,
    pub c2_clamped_nodes: usize,
    pub uniformly_elliptic: bool,
    pub wall_slip: Vec<WallSlip>,
    pub residual_tol: f64,
    pub c2_floor: f64,
    pub c2_hat: f64,
}

struct Workspace {
    grid: GridSpec,
    gas: GasModel,
    /// Full nodal values; Dirichlet entries never change.
    values: Vec<f64>,
    /// Unknown id per node, row-major; None marks Dirichlet nodes.
    unknown_of: Vec<Option<usize>>,
    /// Node per unknown id.
    nodes: Vec<(usize, usize)>,
    c2_floor: f64,
}

struct NodeDerivs {
    g1: f64,
    g2: f64,
    h11: f64,
    h22: f64,
    h12: f64,
}

/// Per-node residual evaluation summary.
struct EvalStats {
    norm_inf: f64,
    clamped: usize,
    max_l: f64,
}

impl Workspace {
    /// Neighbor index along one axis with even reflection across wall edges.
    #[inline]
    fn nb(&self, i: usize, step: isize, axis: usize) -> usize {
        let n = self.grid.dims[axis];
        let j = i as isize + step;
        if j < 0 {
            (-j) as usize
        } else if j as usize >= n {
            2 * (n - 1) - j as usize
        } else {
            j as usize
        }
    }

    #[inline]
    fn value(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.idx(i1, i2)]
    }

    fn derivs(&self, i1: usize, i2: usize) -> NodeDerivs {
        let [h1, h2] = self.grid.spacing;
        let (e, w) = (self.nb(i1, 1, 0), self.nb(i1, -1, 0));
        let (n, s) = (self.nb(i2, 1, 1), self.nb(i2, -1, 1));
        let c = self.value(i1, i2);
        let (ve, vw) = (self.value(e, i2), self.value(w, i2));
        let (vn, vs) = (self.value(i1, n), self.value(i1, s));
        NodeDerivs {
            g1: (ve - vw) / (2.0 * h1),
            g2: (vn - vs) / (2.0 * h2),
            h11: (ve - 2.0 * c + vw) / (h1 * h1),
            h22: (vn - 2.0 * c + vs) / (h2 * h2),
            h12: (self.value(e, n) - self.value(e, s) - self.value(w, n) + self.value(w, s))
                / (4.0 * h1 * h2),
        }
    }

    /// Clamped sound speed and whether the clamp fired.
    #[inline]
    fn c2_at(&self, chi: f64, g: &[f64; 2]) -> (f64, bool) {
        let raw = self.gas.sound_speed_sq_raw(chi, g);
        if raw < self.c2_floor {
            (self.c2_floor, true)
        } else {
            (raw, false)
        }
    }

    /// Residual at every unknown node; errors on non-finite state.
    fn eval_residual(&self, out: &mut [f64]) -> Result<EvalStats> {
        let mut stats = EvalStats {
            norm_inf: 0.0,
            clamped: 0,
            max_l: 0.0,
        };
        for (k, &(i1, i2)) in self.nodes.iter().enumerate() {
            let d = self.derivs(i1, i2);
            let chi = self.value(i1, i2);
            let (c2, clamped) = self.c2_at(chi, &[d.g1, d.g2]);
            if clamped {
                stats.clamped += 1;
            }
            let q2 = d.g1 * d.g1 + d.g2 * d.g2;
            let r = c2 * (d.h11 + d.h22)
                - (d.g1 * d.g1 * d.h11 + 2.0 * d.g1 * d.g2 * d.h12 + d.g2 * d.g2 * d.h22)
                - q2
                + 2.0 * c2;
            if !r.is_finite() {
                return Err(Error::state_at("non-finite residual", [i1, i2]));
            }
            out[k] = r;
            stats.norm_inf = stats.norm_inf.max(r.abs());
            stats.max_l = stats.max_l.max((q2 / c2).sqrt());
        }
        Ok(stats)
    }

    /// Assemble the linear model of the residual at the current state into a
    /// band matrix over the unknowns. `newton` includes the sound-speed
    /// variation and the gradient terms of the full Jacobian; otherwise the
    /// Picard frozen-coefficient operator is produced.
    fn assemble(&self, newton: bool, kl: usize, ku: usize) -> Result<BandMatrix> {
        let [h1, h2] = self.grid.spacing;
        let gamma = self.gas.gamma;
        let mut a = BandMatrix::zeros(self.nodes.len(), kl, ku);
        for (row, &(i1, i2)) in self.nodes.iter().enumerate() {
            let d = self.derivs(i1, i2);
            let chi = self.value(i1, i2);
            let (c2, clamped) = self.c2_at(chi, &[d.g1, d.g2]);
            // dR/d(derivative) factors at this node.
            let r_h11 = c2 - d.g1 * d.g1;
            let r_h22 = c2 - d.g2 * d.g2;
            let r_h12 = -2.0 * d.g1 * d.g2;
            let (r_g1, r_g2, r_chi) = if newton {
                let lap2 = d.h11 + d.h22 + 2.0;
                let (dc2_chi, dc2_g) = if clamped || self.gas.is_isothermal() {
                    (0.0, 0.0)
                } else {
                    (1.0 - gamma, 1.0 - gamma)
                };
                (
                    dc2_g * d.g1 * lap2 - 2.0 * d.g1 * d.h11 - 2.0 * d.g2 * d.h12 - 2.0 * d.g1,
                    dc2_g * d.g2 * lap2 - 2.0 * d.g2 * d.h22 - 2.0 * d.g1 * d.h12 - 2.0 * d.g2,
                    dc2_chi * lap2,
                )
            } else {
                // Picard: frozen c^2 and coefficients; the |grad chi|^2 term
                // contributes g_bar . grad(delta).
                (-d.g1, -d.g2, 0.0)
            };

            let mut add = |ii1: usize, ii2: usize, v: f64| {
                if let Some(col) = self.unknown_of[self.grid.idx(ii1, ii2)] {
                    a.add(row, col, v);
                }
            };
            let (e, w) = (self.nb(i1, 1, 0), self.nb(i1, -1, 0));
            let (n, s) = (self.nb(i2, 1, 1), self.nb(i2, -1, 1));
            add(
                i1,
                i2,
                r_h11 * (-2.0 / (h1 * h1)) + r_h22 * (-2.0 / (h2 * h2)) + r_chi,
            );
            add(e, i2, r_h11 / (h1 * h1) + r_g1 / (2.0 * h1));
            add(w, i2, r_h11 / (h1 * h1) - r_g1 / (2.0 * h1));
            add(i1, n, r_h22 / (h2 * h2) + r_g2 / (2.0 * h2));
            add(i1, s, r_h22 / (h2 * h2) - r_g2 / (2.0 * h2));
            let cross = r_h12 / (4.0 * h1 * h2);
            add(e, n, cross);
            add(w, s, cross);
            add(e, s, -cross);
            add(w, n, -cross);
        }
        Ok(a)
    }
}

/// Solve the Dirichlet problem on `grid` with boundary chi taken from the
/// non-wall edge nodes of `boundary`. Wall edges of the grid are closed by
/// even-reflection ghosts. Returns the solution field and a report; only
/// hard failures (bad input, degenerate state) are errors: running out of
/// iterations reports `converged: false` with the best iterate.
pub fn solve_dirichlet(
    grid: GridSpec,
    boundary: &ScalarField,
    gas: &GasModel,
    config: &SolverConfig,
    initial_guess: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    config.validate()?;
    if grid.walls.len() == 4 {
        return Err(Error::InvalidArgument(
            "all four edges are walls; at least one Dirichlet edge is required".into(),
        ));
    }
    if !grid.same_layout(boundary.grid()) {
        return Err(Error::InvalidArgument(
            "boundary field layout does not match the grid".into(),
        ));
    }
    if boundary.var() != Variable::Chi {
        return Err(Error::Precondition("boundary data must be a chi field".into()));
    }
    if let Some(g) = initial_guess {
        if !grid.same_layout(g.grid()) {
            return Err(Error::InvalidArgument(
                "initial guess layout does not match the grid".into(),
            ));
        }
        if g.var() != Variable::Chi {
            return Err(Error::Precondition("initial guess must be a chi field".into()));
        }
    }

    let [n1, n2] = grid.dims;
    let mut unknown_of = vec![None; grid.len()];
    let mut nodes = Vec::new();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            if grid.node_role(i1, i2) != NodeRole::Dirichlet {
                unknown_of[grid.idx(i1, i2)] = Some(nodes.len());
                nodes.push((i1, i2));
            }
        }
    }

    let mut values = vec![0.0; grid.len()];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            if grid.node_role(i1, i2) == NodeRole::Dirichlet {
                values[grid.idx(i1, i2)] = boundary.value(i1, i2);
            }
        }
    }
    match initial_guess {
        Some(g) => {
            for &(i1, i2) in &nodes {
                values[grid.idx(i1, i2)] = g.value(i1, i2);
            }
        }
        None => coons_guess(&grid, boundary, &mut values, &unknown_of)?,
    }

    let mut ws = Workspace {
        grid,
        gas: *gas,
        values,
        unknown_of,
        nodes,
        c2_floor: f64::MIN_POSITIVE,
    };

    // Sound-speed gauge from the initial state.
    let c2_hat = if gas.is_isothermal() {
        gas.c0 * gas.c0
    } else {
        let mut best = 0.0f64;
        for &(i1, i2) in &ws.nodes {
            let d = ws.derivs(i1, i2);
            let raw = gas.sound_speed_sq_raw(ws.value(i1, i2), &[d.g1, d.g2]);
            if raw.is_finite() {
                best = best.max(raw);
            }
        }
        if best <= 0.0 {
            return Err(Error::state(
                "no node of the initial state has positive c^2",
            ));
        }
        best
    };
    let residual_tol = config.residual_tol.unwrap_or(1e-10 * (1.0 + c2_hat));
    ws.c2_floor = config.c2_floor.unwrap_or(1e-8 * c2_hat);

    // Band extents from the actual coupling pattern.
    let (mut kl, mut ku) = (0usize, 0usize);
    for (row, &(i1, i2)) in ws.nodes.iter().enumerate() {
        for s1 in [-1isize, 0, 1] {
            for s2 in [-1isize, 0, 1] {
                let j1 = ws.nb(i1, s1, 0);
                let j2 = ws.nb(i2, s2, 1);
                if let Some(col) = ws.unknown_of[ws.grid.idx(j1, j2)] {
                    if col < row {
                        kl = kl.max(row - col);
                    } else {
                        ku = ku.max(col - row);
                    }
                }
            }
        }
    }

    let n_unknowns = ws.nodes.len();
    let mut residual = vec![0.0; n_unknowns];
    let mut trial_residual = vec![0.0; n_unknowns];
    let mut stats = ws.eval_residual(&mut residual)?;
    let mut history = vec![stats.norm_inf];
    let mut l_guard_hits = 0usize;
    let mut iterations = 0usize;
    let mut converged = stats.norm_inf <= residual_tol;
    let total_budget = config.picard_warmup_iters + config.max_newton_iters;

    while !converged && iterations < total_budget {
        let newton = iterations >= config.picard_warmup_iters;
        let a = ws.assemble(newton, kl, ku)?;
        let mut delta = residual.iter().map(|r| -r).collect::<Vec<_>>();
        a.factor()?.solve(&mut delta);

        // Backtracking on the residual max-norm with L-guard damping.
        let mut alpha = 1.0f64;
        let saved = ws.values.clone();
        let mut accepted = false;
        loop {
            for (k, &(i1, i2)) in ws.nodes.iter().enumerate() {
                ws.values[ws.grid.idx(i1, i2)] = saved[ws.grid.idx(i1, i2)] + alpha * delta[k];
            }
            match ws.eval_residual(&mut trial_residual) {
                Ok(t) => {
                    let guard_ok = t.max_l < config.l_guard || t.max_l <= stats.max_l;
                    if t.max_l >= config.l_guard {
                        l_guard_hits += 1;
                    }
                    if t.norm_inf < stats.norm_inf && guard_ok {
                        stats = t;
                        std::mem::swap(&mut residual, &mut trial_residual);
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {}
            }
            alpha *= config.backtrack_factor;
            if alpha < config.min_step {
                break;
            }
        }
        if !accepted {
            ws.values = saved;
            break;
        }
        iterations += 1;
        history.push(stats.norm_inf);
        converged = stats.norm_inf <= residual_tol;
    }

    if stats.clamped > n_unknowns / 100 {
        return Err(Error::Degenerate(format!(
            "sound speed clamped on {} of {} unknowns at termination",
            stats.clamped, n_unknowns
        )));
    }

    let field = ScalarField::from_values(ws.grid, Variable::Chi, ws.values)?;
    let wall_slip = ws
        .grid
        .walls
        .iter()
        .map(|edge| WallSlip {
            edge,
            max_normal_derivative: wall_normal_derivative_max(&field, edge),
        })
        .collect::<Vec<_>>();

    let report = SolveReport {
        converged,
        iterations,
        residual_history: history,
        max_l_interior: stats.max_l,
        l_guard_hits,
        c2_clamped_nodes: stats.clamped,
        uniformly_elliptic: stats.max_l < config.l_guard && stats.clamped == 0,
        wall_slip,
        residual_tol,
        c2_floor: ws.c2_floor,
        c2_hat,
    };
    Ok((field, report))
}

/// Default initial guess: transfinite (Coons) blend of the boundary data in
/// psi = chi + |xi|^2/2, where uniform flows are bilinear, minus the
/// |xi|^2/2 correction. Wall edges carry no data and are synthesized from
/// the opposite edge (or from their corner values when both opposing edges
/// are walls).
fn coons_guess(
    grid: &GridSpec,
    boundary: &ScalarField,
    values: &mut [f64],
    unknown_of: &[Option<usize>],
) -> Result<()> {
    let [n1, n2] = grid.dims;
    let q = |i1: usize, i2: usize| {
        let xi = grid.xi(i1, i2);
        0.5 * (xi[0] * xi[0] + xi[1] * xi[1])
    };
    let psi_data = |i1: usize, i2: usize| boundary.value(i1, i2) + q(i1, i2);

    let is_wall = |e: WallEdge| grid.walls.contains(e);
    // Edge arrays in psi, indexed by the tangential coordinate.
    let mut west = vec![0.0; n2];
    let mut east = vec![0.0; n2];
    let mut south = vec![0.0; n1];
    let mut north = vec![0.0; n1];
    for j in 0..n2 {
        if !is_wall(WallEdge::Left) {
            west[j] = psi_data(0, j);
        }
        if !is_wall(WallEdge::Right) {
            east[j] = psi_data(n1 - 1, j);
        }
    }
    for i in 0..n1 {
        if !is_wall(WallEdge::Bottom) {
            south[i] = psi_data(i, 0);
        }
        if !is_wall(WallEdge::Top) {
            north[i] = psi_data(i, n2 - 1);
        }
    }
    // Synthesize wall edges: copy the opposite edge when it has data, else
    // blend linearly between the corner values of the perpendicular edges.
    let fill_axis0 = |own: &mut Vec<f64>, opp: &Vec<f64>, opp_is_wall: bool,
                      south: &Vec<f64>, north: &Vec<f64>, i: usize| {
        if !opp_is_wall {
            own.clone_from(opp);
        } else {
            for (j, v) in own.iter_mut().enumerate() {
                let t = j as f64 / (n2 - 1) as f64;
                *v = (1.0 - t) * south[i] + t * north[i];
            }
        }
    };
    if is_wall(WallEdge::Left) {
        let e = east.clone();
        fill_axis0(&mut west, &e, is_wall(WallEdge::Right), &south, &north, 0);
    }
    if is_wall(WallEdge::Right) {
        let w = west.clone();
        fill_axis0(&mut east, &w, is_wall(WallEdge::Left), &south, &north, n1 - 1);
    }
    if is_wall(WallEdge::Bottom) {
        if !is_wall(WallEdge::Top) {
            south.clone_from(&north);
        } else {
            for (i, v) in south.iter_mut().enumerate() {
                let t = i as f64 / (n1 - 1) as f64;
                *v = (1.0 - t) * west[0] + t * east[0];
            }
        }
    }
    if is_wall(WallEdge::Top) {
        if !is_wall(WallEdge::Bottom) {
            north.clone_from(&south);
        } else {
            for (i, v) in north.iter_mut().enumerate() {
                let t = i as f64 / (n1 - 1) as f64;
                *v = (1.0 - t) * west[n2 - 1] + t * east[n2 - 1];
            }
        }
    }

    for i1 in 0..n1 {
        let u = i1 as f64 / (n1 - 1) as f64;
        for i2 in 0..n2 {
            let w = i2 as f64 / (n2 - 1) as f64;
            let idx = grid.idx(i1, i2);
            if unknown_of[idx].is_none() {
                continue;
            }
            let coons = (1.0 - u) * west[i2] + u * east[i2] + (1.0 - w) * south[i1]
                + w * north[i1]
                - ((1.0 - u) * (1.0 - w) * south[0]
                    + u * (1.0 - w) * south[n1 - 1]
                    + (1.0 - u) * w * north[0]
                    + u * w * north[n1 - 1]);
            values[idx] = coons - q(i1, i2);
        }
    }
    Ok(())
}
