//! Energy, positive-commutator and local smoothing diagnostics for computed
//! linear trajectories.

use serde::Serialize;

use crate::cubes::{band_lp_x, band_lp_y, cube_l2_table, l_box, lp_xs_norm, xj_norm, yj_upper, CubeSum, CubeSystem};
use crate::error::{QslError, Result};
use crate::grid::{l1_l2, linf_l2, Grid, SampledField, C64};
use crate::lp::{wedge_multiplier, WedgeConfig};

use super::linear::{LinearOperator, LinearProblem};
use super::multiplier::{apply_t_with, Multiplier};

fn require_band(problem: &LinearProblem) -> Result<usize> {
    problem
        .band()
        .ok_or_else(|| QslError::Unsupported("diagnostic needs a band-localized problem".into()))
}

fn same_grid(problem: &LinearProblem, u: &SampledField) -> Result<()> {
    if u.grid() != problem.grid() {
        return Err(QslError::Shape("trajectory and problem grids differ".into()));
    }
    Ok(())
}

fn zero_or(f: &Option<SampledField>, grid: &Grid) -> SampledField {
    f.clone().unwrap_or_else(|| SampledField::zeros(grid))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub band: usize,
    /// `||u||^2_{L^inf L2}`.
    pub energy: f64,
    /// `||u_0||^2_{L2}`.
    pub datum: f64,
    /// `||u||_{X_j} ||f||_{Y_j}`.
    pub cross: f64,
    /// Smallest `C` with `energy <= datum + C cross`.
    pub constant: f64,
    /// `max_t | ||u(t)||^2 - ||u_0||^2 | / ||u_0||^2`.
    pub drift: f64,
}

/// Energy bound for a band problem.
pub fn energy_check(problem: &LinearProblem, u: &SampledField) -> Result<EnergyReport> {
    same_grid(problem, u)?;
    let j = require_band(problem)?;
    let g = u.grid();
    let f = zero_or(&problem.forcing, g);
    let energy = linf_l2(u).powi(2);
    let datum = g.l2(&problem.datum).powi(2);
    let cross = xj_norm(u, j) * yj_upper(&f, j);
    let excess = (energy - datum).max(0.0);
    let constant = if excess == 0.0 { 0.0 } else { excess / cross };
    let drift = (0..g.nt())
        .map(|t| (u.l2_at(t).powi(2) - datum).abs())
        .fold(0.0, f64::max)
        / datum.max(f64::MIN_POSITIVE);
    Ok(EnergyReport {
        band: j,
        energy,
        datum,
        cross,
        constant,
        drift,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub t: f64,
    /// Centered difference of `<u, M u>`.
    pub lhs: f64,
    /// `-2 Im <(D_t + A) u, M u>`.
    pub evolution: f64,
    /// `<i [A, M] u, u>`.
    pub commutator: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub max_residual: f64,
    /// `max_residual` over the largest term magnitude.
    pub relative: f64,
}

/// Check `d/dt <u, Mu> = -2 Im <(D_t + A)u, Mu> + <i[A, M]u, u>` on a
/// trajectory, with `D_t = -i d_t` and time derivatives by centered
/// differences between samples. The residual is second order in the
/// sample spacing.
pub fn commutator_identity_check(problem: &LinearProblem, u: &SampledField, m: &Multiplier) -> Result<IdentityReport> {
    same_grid(problem, u)?;
    let g = u.grid();
    if g.nt() < 3 {
        return Err(QslError::InvalidGrid("identity check needs at least 3 time samples".into()));
    }
    let op = LinearOperator::new(problem)?;
    let dt = g.dt();
    let nt = g.nt();
    let mu: Vec<Vec<C64>> = (0..nt).map(|t| m.apply(g, u.slice(t))).collect();
    let q: Vec<f64> = (0..nt).map(|t| g.inner(u.slice(t), &mu[t]).re).collect();
    let rows: Vec<IdentityRow> = crate::par::map_range(nt - 2, |i| {
        let n = i + 1;
        let lhs = (q[n + 1] - q[n - 1]) / (2.0 * dt);
        let au = op.apply_a(n, u.slice(n));
        let full: Vec<C64> = u
            .slice(n + 1)
            .iter()
            .zip(u.slice(n - 1))
            .zip(&au)
            .map(|((a, b), c)| (a - b) * C64::new(0.0, -1.0 / (2.0 * dt)) + c)
            .collect();
        let evolution = -2.0 * g.inner(&full, &mu[n]).im;
        let commutator = 2.0 * g.inner(&au, &mu[n]).im;
        IdentityRow {
            t: g.time(n),
            lhs,
            evolution,
            commutator,
            residual: (lhs - evolution - commutator).abs(),
        }
    });
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let scale = rows
        .iter()
        .map(|r| r.lhs.abs().max(r.evolution.abs()).max(r.commutator.abs()))
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        rows,
        max_residual,
        relative: if scale > 0.0 { max_residual / scale } else { max_residual },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositiveCommutatorReport {
    pub j: usize,
    pub l: usize,
    /// `<i [-Laplacian, M] u, u>` over space-time.
    pub form: f64,
    /// `2^{-j} <-4 d(a' d u), u>`, the leading part of `form`.
    pub main: f64,
    /// `|<([-Laplacian, T] + 4 d a' d) u, u>| / ||u||^2`, uniform in `j`.
    pub remainder: f64,
    /// `2^{j-l} ||psi(2^{-l}(x - c)) u||^2`.
    pub lower: f64,
    /// `lower / (form + 2^{-j} ||u||^2)`.
    pub ratio: f64,
    /// `||(1 - theta) u_hat|| / ||u_hat||` for the wedge of the multiplier axis.
    pub leakage: f64,
    pub hypothesis_violated: bool,
}

fn laplacian(g: &Grid, slice: &[C64]) -> Vec<C64> {
    let mut s = slice.to_vec();
    let xi = g.abs_xi();
    g.apply_multiplier(&mut s, |p| C64::new(-xi[p] * xi[p], 0.0));
    s
}

/// Positive commutator bound for `A = -Laplacian` on a band field `u`.
pub fn positive_commutator_check(u: &SampledField, m: &Multiplier) -> Result<PositiveCommutatorReport> {
    let g = u.grid();
    let (j, l) = (m.j, m.l);
    let a = m.weight(g);
    let ad = m.weight_derivative(g);
    let bump = m.bump(g);
    let comp = u.map_slices(|_, s| {
        let t_u = apply_t_with(g, &a, m.axis, s);
        let mut out: Vec<C64> = laplacian(g, &t_u).iter().map(|z| -z).collect();
        let t_lap = apply_t_with(g, &a, m.axis, &laplacian(g, s));
        out.iter_mut().zip(&t_lap).for_each(|(o, z)| *o += z);
        s.copy_from_slice(&out);
    });
    let main = u.map_slices(|_, s| {
        let mut du = g.derivative(s, m.axis);
        du.iter_mut().zip(&ad).for_each(|(z, w)| *z *= -4.0 * w);
        s.copy_from_slice(&g.derivative(&du, m.axis));
    });
    let local = u.map_slices(|_, s| s.iter_mut().zip(&bump).for_each(|(z, b)| *z *= b.sqrt()));
    let norm_sq = u.spacetime_inner(u).re;
    let scale = 2f64.powi(-(j as i32));
    let form = scale * comp.spacetime_inner(u).re;
    let main_form = scale * main.spacetime_inner(u).re;
    let remainder = comp.sub(&main).spacetime_inner(u).re.abs() / norm_sq;
    let lower = 2f64.powi(j as i32 - l as i32) * local.spacetime_inner(&local).re;
    let theta_axis = if g.dim() == 1 { 1 } else { m.axis + 1 };
    let theta = wedge_multiplier(g, theta_axis, WedgeConfig::default())?;
    let (mut out, mut total) = (0.0, 0.0);
    for t in 0..g.nt() {
        let mut s = u.slice(t).to_vec();
        g.forward(&mut s);
        for (z, th) in s.iter().zip(&theta) {
            total += z.norm_sqr();
            out += (1.0 - th).powi(2) * z.norm_sqr();
        }
    }
    let leakage = if total > 0.0 { (out / total).sqrt() } else { 0.0 };
    Ok(PositiveCommutatorReport {
        j,
        l,
        form,
        main: main_form,
        remainder,
        lower,
        ratio: lower / (form + scale * norm_sq),
        leakage,
        hypothesis_violated: leakage > 0.01,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CubeRow {
    pub l: usize,
    pub cube: usize,
    /// `2^{j-l} ||u||^2_{L2 L2([0,1] x Q)}`.
    pub local: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalSmoothingReport {
    pub j: usize,
    /// `||u||_{l^2_j X_j}`.
    pub lhs: f64,
    /// `||u_0||_{L2} + ||f||_{l^2_j Y_j}`.
    pub rhs: f64,
    /// `lhs / rhs`, `None` when both vanish.
    pub ratio: Option<f64>,
    pub w_norm: f64,
    /// Right side of the per-cube bound:
    /// `||u||^2_{L^inf L2} + ||u||_{X_j} ||f||_{Y_j} + (2^{-j} + ||w||^2) ||u||^2_{X_j}`.
    pub cube_bound: f64,
    pub cubes: Vec<CubeRow>,
    pub max_cube_ratio: f64,
}

/// Largest admissible `||w||_{l^2 X^s}` for the local smoothing bound.
pub const SMALLNESS: f64 = 0.1;

/// Local smoothing diagnostics of a band trajectory. Refuses metrics whose
/// argument is not small in `l^2 X^s`.
pub fn local_smoothing_report(problem: &LinearProblem, u: &SampledField, s: f64) -> Result<LocalSmoothingReport> {
    same_grid(problem, u)?;
    let j = require_band(problem)?;
    let g = u.grid();
    let w_norm = match &problem.metric.w {
        Some(w) if !problem.metric.is_identity() => lp_xs_norm(w, CubeSum::Two, s).value,
        _ => 0.0,
    };
    if w_norm > SMALLNESS {
        return Err(QslError::Smallness {
            what: "||w||_{l2 X^s}",
            value: w_norm,
            limit: SMALLNESS,
        });
    }
    let f = zero_or(&problem.forcing, g);
    let lhs = band_lp_x(u, j, CubeSum::Two);
    let rhs = g.l2(&problem.datum) + band_lp_y(&f, j, CubeSum::Two);
    let ratio = if rhs > 0.0 {
        Some(lhs / rhs)
    } else if lhs == 0.0 {
        None
    } else {
        Some(f64::INFINITY)
    };
    let xj = xj_norm(u, j);
    let cube_bound =
        linf_l2(u).powi(2) + xj * yj_upper(&f, j) + (2f64.powi(-(j as i32)) + w_norm * w_norm) * xj * xj;
    let table = cube_l2_table(u);
    let mut cubes = Vec::new();
    for (l, row) in table.iter().enumerate().take(j.min(l_box(g)) + 1) {
        let w = 2f64.powi(j as i32 - l as i32);
        for (q, v) in row.iter().enumerate() {
            let local = w * v * v;
            cubes.push(CubeRow {
                l,
                cube: q,
                local,
                ratio: if cube_bound > 0.0 { local / cube_bound } else { 0.0 },
            });
        }
    }
    let max_cube_ratio = cubes.iter().map(|c| c.ratio).fold(0.0, f64::max);
    Ok(LocalSmoothingReport {
        j,
        lhs,
        rhs,
        ratio,
        w_norm,
        cube_bound,
        cubes,
        max_cube_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CubeCommutatorRow {
    /// Cube side in units of `2^j`.
    pub m: usize,
    pub cubes: usize,
    /// `sum_Q ||[A, chi_Q] u||^2_{L1 L2} / sum_Q ||chi_Q u||^2_{L^inf L2}`.
    pub ratio: f64,
}

/// Commutators of the flat operator with smooth cutoffs on cubes of side
/// `M 2^j`; the ratio should scale like `M^{-2}`.
pub fn cube_commutator_diagnostic(u: &SampledField, j: usize, ms: &[usize]) -> Result<Vec<CubeCommutatorRow>> {
    let g = u.grid();
    ms.iter()
        .map(|&m| {
            if !m.is_power_of_two() {
                return Err(QslError::Unsupported(format!("cube factor {m} is not a power of two")));
            }
            let scale = j + m.trailing_zeros() as usize;
            if scale >= l_box(g) {
                return Err(QslError::Unsupported(format!(
                    "cubes of scale {scale} do not subdivide a box of length {}",
                    g.length()
                )));
            }
            let sys = CubeSystem::new(g, scale);
            let (mut num, mut den) = (0.0, 0.0);
            for q in 0..sys.len() {
                let chi = sys.cutoff(q);
                let cu = u.map_slices(|_, s| s.iter_mut().zip(chi).for_each(|(z, c)| *z *= c));
                let comm = cu.map_slices(|t, s| {
                    let lap_chi_u = laplacian(g, s);
                    let mut out: Vec<C64> = lap_chi_u.iter().map(|z| -z).collect();
                    let lap_u = laplacian(g, u.slice(t));
                    out.iter_mut()
                        .zip(lap_u.iter().zip(chi))
                        .for_each(|(o, (z, c))| *o += z * c);
                    s.copy_from_slice(&out);
                });
                num += l1_l2(&comm).powi(2);
                den += linf_l2(&cu).powi(2);
            }
            Ok(CubeCommutatorRow {
                m,
                cubes: sys.len(),
                ratio: if den > 0.0 { num / den } else { 0.0 },
            })
        })
        .collect()
}
