//! Brute-force oracle: minimise the per-mode energy
//!
//! ```text
//! Q_k(u) = int_0^{r_end} (h^{n-1} u'^2 + lambda_k h^{n-3} u^2) dr / u(0)^2
//! ```
//!
//! over continuous piecewise-linear `u` on a graded grid. Fixing `u(0) = 1`
//! turns the minimisation into one symmetric tridiagonal solve. Nothing
//! here shares code with the shooting solvers beyond profile evaluation.

use serde::{Deserialize, Serialize};

use crate::closed_forms::multiplicity;
use crate::error::SolveError;
use crate::ode::{Control, Dopri5, ErrorScale};
use crate::profile::Profile;
use crate::radial_solver::{Method, ModeEigenvalue, ModeProblem, OuterCondition};
use crate::tridiag;

/// Grid parameters. Nodes equidistribute the density `1 / (h(r) + floor)`,
/// so spacing follows the local orbit radius: fine near the boundary sphere
/// where modes decay fastest and near the pole where `h` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nodes: usize,
    pub floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes: 4000,
            floor: 0.02,
        }
    }
}

impl GridSpec {
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            nodes,
            ..Self::default()
        }
    }
}

/// Node positions `0 = r_0 < r_1 < ... < r_N = r_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

impl Grid {
    pub fn build(p: &Profile, r_end: f64, spec: GridSpec) -> Result<Self, SolveError> {
        if spec.nodes < 16 {
            return Err(SolveError::Domain(format!("grid needs at least 16 cells, got {}", spec.nodes)));
        }
        if !(spec.floor > 0.0) {
            return Err(SolveError::Domain("grid floor must be positive".into()));
        }
        if !(r_end > 0.0 && r_end <= p.total_length()) {
            return Err(SolveError::Domain(format!("grid end {r_end} outside (0, L]")));
        }
        let a = spec.floor;
        let scale = ErrorScale::Mixed { rel: 1e-12, abs: 1e-14 };
        let quadrature_failed = |e| SolveError::Domain(format!("grid construction failed: {e}"));

        // total stretched length
        let mut ode = Dopri5::new(scale, 1_000_000);
        let mut xi_total = 0.0;
        for (i, seg) in p.segments().iter().enumerate() {
            let from = seg.r_start;
            let to = seg.r_end.min(r_end);
            if to <= from {
                break;
            }
            let seg = &p.segments()[i];
            let out = ode
                .integrate(
                    |r, _: &[f64; 1]| [1.0 / (seg.value(r) + a)],
                    from,
                    to,
                    [xi_total],
                    |_, _| Control::Continue,
                )
                .map_err(quadrature_failed)?;
            xi_total = out.y[0];
        }

        // invert: dr/dxi = h(r) + a
        let n = spec.nodes;
        let dxi = xi_total / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut ode = Dopri5::new(scale, 1_000_000);
        let mut r = 0.0;
        for i in 0..n - 1 {
            let out = ode
                .integrate(
                    |_, s: &[f64; 1]| [p.value(s[0].min(r_end)) + a],
                    i as f64 * dxi,
                    (i + 1) as f64 * dxi,
                    [r],
                    |_, _| Control::Continue,
                )
                .map_err(quadrature_failed)?;
            r = out.y[0];
            nodes.push(r);
        }
        nodes.push(r_end);
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolveError::Domain("grid nodes are not strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Every `stride`-th node; nested in the original grid.
    pub fn coarsen(&self, stride: usize) -> Option<Self> {
        if stride == 0 || !self.cells().is_multiple_of(stride) || self.cells() / stride < 16 {
            return None;
        }
        Some(Self {
            nodes: self.nodes.iter().copied().step_by(stride).collect(),
        })
    }
}

fn trivially_zero(mp: &ModeProblem) -> bool {
    mp.mode == 0 && !matches!(mp.outer, OuterCondition::Dirichlet(_))
}

/// Discrete minimum of the per-mode energy on `grid`, whose last node must
/// be the outer end of `mp`.
pub fn fd_sigma_on_grid(p: &Profile, mp: &ModeProblem, grid: &Grid) -> Result<f64, SolveError> {
    if trivially_zero(mp) {
        return Ok(0.0);
    }
    let r = grid.nodes();
    let cells = grid.cells();
    let stiff_power = (mp.dimension - 1) as i32;
    let mass_power = mp.dimension as i32 - 3;
    let lam = mp.lambda();

    let mut diag = vec![0.0; cells + 1];
    let mut off = vec![0.0; cells];
    let heights: Vec<f64> = r.iter().map(|&x| p.value(x)).collect();
    for e in 0..cells {
        let dr = r[e + 1] - r[e];
        let mid = 0.5 * (r[e] + r[e + 1]);
        let stiff = p.value(mid).powi(stiff_power) / dr;
        diag[e] += stiff;
        diag[e + 1] += stiff;
        off[e] -= stiff;
        for j in [e, e + 1] {
            if heights[j] > 0.0 {
                diag[j] += 0.5 * lam * dr * heights[j].powi(mass_power);
            }
        }
    }

    // essential condition at the outer node removes it from the unknowns
    let essential = !matches!(mp.outer, OuterCondition::Neumann(_));
    let last = if essential { cells - 1 } else { cells };
    if last == 0 {
        return Ok(diag[0]);
    }
    let interior_diag = &diag[1..=last];
    let coupling = &off[1..last];
    let mut rhs = vec![0.0; last];
    rhs[0] = -off[0];
    let u = tridiag::solve(coupling, interior_diag, coupling, &rhs)
        .ok_or(SolveError::SingularSystem { mode: mp.mode })?;
    let sigma = diag[0] + off[0] * u[0];
    if !sigma.is_finite() {
        return Err(SolveError::SingularSystem { mode: mp.mode });
    }
    Ok(sigma)
}

/// Oracle eigenvalue on a fresh grid; the residual is the Richardson
/// error estimate against the nested half-resolution grid.
pub fn fd_mode(p: &Profile, mp: &ModeProblem, spec: GridSpec) -> Result<ModeEigenvalue, SolveError> {
    let end = mp.outer_end(p)?;
    if trivially_zero(mp) {
        return Ok(ModeEigenvalue::exact(mp.dimension, 0, 0.0, Method::FdOracle));
    }
    let grid = Grid::build(p, end, spec)?;
    let sigma = fd_sigma_on_grid(p, mp, &grid)?;
    let residual = match grid.coarsen(2) {
        Some(half) => (sigma - fd_sigma_on_grid(p, mp, &half)?).abs() / 3.0,
        None => f64::NAN,
    };
    Ok(ModeEigenvalue {
        mode: mp.mode,
        sigma,
        multiplicity: multiplicity(mp.dimension, mp.mode),
        method: Method::FdOracle,
        residual,
        bound_gap: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub sigma: f64,
    /// Richardson extrapolation from this and the previous resolution,
    /// assuming second-order convergence.
    pub extrapolated: Option<f64>,
    /// Observed order from this and the two previous resolutions.
    pub observed_order: Option<f64>,
}

/// Oracle values over a list of increasing node counts.
pub fn fd_convergence_study(
    p: &Profile,
    mp: &ModeProblem,
    node_counts: &[usize],
    floor: f64,
) -> Result<Vec<ConvergenceRow>, SolveError> {
    if node_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolveError::Domain("node counts must be increasing".into()));
    }
    let end = mp.outer_end(p)?;
    let finest = *node_counts
        .last()
        .ok_or_else(|| SolveError::Domain("no node counts given".into()))?;
    let fine = Grid::build(p, end, GridSpec { nodes: finest, floor })?;

    let mut sigmas = Vec::with_capacity(node_counts.len());
    for &count in node_counts {
        let grid = match fine.coarsen(finest / count) {
            Some(g) if finest % count == 0 => g,
            _ if count == finest => fine.clone(),
            _ => Grid::build(p, end, GridSpec { nodes: count, floor })?,
        };
        sigmas.push(fd_sigma_on_grid(p, mp, &grid)?);
    }

    let rows = node_counts
        .iter()
        .enumerate()
        .map(|(i, &nodes)| {
            let sigma = sigmas[i];
            let extrapolated = (i >= 1).then(|| {
                let ratio = nodes as f64 / node_counts[i - 1] as f64;
                sigma + (sigma - sigmas[i - 1]) / (ratio * ratio - 1.0)
            });
            let observed_order = (i >= 2).then(|| {
                let ratio = nodes as f64 / node_counts[i - 1] as f64;
                let prev = sigmas[i - 2] - sigmas[i - 1];
                let cur = sigmas[i - 1] - sigma;
                (prev / cur).abs().ln() / ratio.ln()
            });
            ConvergenceRow {
                nodes,
                sigma,
                extrapolated,
                observed_order,
            }
        })
        .collect();
    Ok(rows)
}
