//! Classical numerical range `W(T) = {⟨Tx, x⟩ : ‖x‖ = 1}` and numerical
//! radius `ω(T) = max |W(T)|`.
//!
//! Everything here runs off the support function of `W(T)`:
//! `h(θ) = λ_max(H_θ(T)) = max_{w ∈ W(T)} Re(e^{iθ} w)`, and `ω(T) = max_θ h(θ)`.
//! A top eigenvector of `H_θ` generates the boundary point of `W(T)` with
//! outward normal `e^{−iθ}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    eig_hermitian, operator_norm, rotated_hermitian_part, schatten_norm, spectrum, ComplexMatrix, C64,
};
use crate::sdp::{self, SdpProblem, SdpStatus, WarmStart};

/// Coarse grid size of the θ-sweep.
pub const SWEEP_GRID: usize = 1024;
/// Golden-section refinement stops at this bracket width.
pub const REFINE_WIDTH: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Numerical radius together with where it is attained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RangeEstimate {
    pub omega: f64,
    /// Angle maximizing `λ_max(H_θ)`.
    pub theta_star: f64,
    /// Unit vector with `|⟨T x*, x*⟩| ≈ omega`.
    pub witness: Vec<C64>,
    /// Boundary points of `W(T)` on the sweep grid, in θ order.
    pub boundary: Vec<C64>,
    /// Error bound `‖T‖(1 − cos(π/N)) + refinement width`.
    pub tol: f64,
}

/// Top eigenpair of `H_θ(T)`.
fn support(t: &ComplexMatrix, theta: f64) -> Result<(f64, Vec<C64>)> {
    let h = rotated_hermitian_part(t, theta)?;
    let eig = eig_hermitian(&h, f64::INFINITY)?;
    Ok((eig.max_value(), eig.top_vector()))
}

/// Maximizes `f` on `[a, b]` by golden-section search; returns the best
/// abscissa seen and its value.
pub(crate) fn golden_max<F>(mut a: f64, mut b: f64, width: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > width {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximizes a function of a phase over a uniform grid of `grid` points on
/// `[0, 2π)`, then refines the best grid cell by golden section.
pub(crate) fn phase_sweep<F>(grid: usize, width: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let step = TAU / grid as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..grid {
        let theta = j as f64 * step;
        let v = f(theta)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    let refined = golden_max(best.0 - step, best.0 + step, width, &mut f)?;
    Ok(if refined.1 > best.1 { refined } else { best })
}

/// `ω(T)` by a θ-sweep of `λ_max(H_θ)` with golden-section refinement.
pub fn numerical_radius(t: &ComplexMatrix, tol: f64) -> Result<RangeEstimate> {
    let n = t.ensure_square()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let mut e1 = vec![C64::new(0.0, 0.0); n];
    e1[0] = C64::new(1.0, 0.0);
    if t.max_abs() == 0.0 {
        return Ok(RangeEstimate {
            omega: 0.0,
            theta_star: 0.0,
            witness: e1,
            boundary: vec![C64::new(0.0, 0.0)],
            tol: 0.0,
        });
    }

    let step = TAU / SWEEP_GRID as f64;
    let mut boundary = Vec::with_capacity(SWEEP_GRID);
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..SWEEP_GRID {
        let theta = j as f64 * step;
        let (lam, x) = support(t, theta)?;
        boundary.push(t.quadratic_form(&x));
        if lam > best.1 {
            best = (theta, lam);
        }
    }
    let (mut theta_star, mut value) = golden_max(best.0 - step, best.0 + step, REFINE_WIDTH, |th| {
        Ok(support(t, th)?.0)
    })?;
    if best.1 > value {
        (theta_star, value) = best;
    }
    theta_star = theta_star.rem_euclid(TAU);
    let (_, witness) = support(t, theta_star)?;
    let omega = value.max(t.quadratic_form(&witness).norm());
    let tol = operator_norm(t) * (1.0 - (PI / SWEEP_GRID as f64).cos()) + REFINE_WIDTH;
    Ok(RangeEstimate {
        omega,
        theta_star,
        witness,
        boundary,
        tol,
    })
}

/// `⟨T x_j, x_j⟩` for a top eigenvector `x_j` of `H_{θ_j}`, `θ_j = 2πj/N`.
pub fn boundary_points(t: &ComplexMatrix, count: usize) -> Result<Vec<C64>> {
    t.ensure_square()?;
    if count < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 boundary points, got {count}")));
    }
    (0..count)
        .map(|j| {
            let theta = TAU * j as f64 / count as f64;
            let (_, x) = support(t, theta)?;
            Ok(t.quadratic_form(&x))
        })
        .collect()
}

/// Largest violation `max_θ Re(e^{iθ} z) − λ_max(H_θ(T))` over the sweep grid,
/// refined around the worst grid point. Nonpositive iff `z ∈ closure W(T)`
/// (up to the grid resolution).
pub fn support_violation(t: &ComplexMatrix, z: C64) -> Result<f64> {
    t.ensure_square()?;
    let g = |theta: f64| -> Result<f64> {
        let h = rotated_hermitian_part(t, theta)?;
        let top = eig_hermitian(&h, f64::INFINITY)?.max_value();
        Ok((C64::from_polar(1.0, theta) * z).re - top)
    };
    Ok(phase_sweep(SWEEP_GRID, 1e-10, g)?.1)
}

/// Whether `z` lies in the closure of `W(T)` up to `tol`.
pub fn contains_point(t: &ComplexMatrix, z: C64, tol: f64) -> bool {
    support_violation(t, z).is_ok_and(|v| v <= tol)
}

/// `ν(A) = max{|Tr(ρA)| : ρ ⪰ 0, Tr ρ = 1}`, computed as a phase sweep over
/// SDPs `max_ρ Re(e^{iφ} Tr(ρA))`.
pub fn state_radius_sdp(a: &ComplexMatrix) -> Result<f64> {
    let k = a.ensure_square()?;
    let tol = 1e-9;
    let mut warm: Option<WarmStart> = None;
    let objective = |phi: f64, warm: &mut Option<WarmStart>| -> Result<f64> {
        // Re(e^{iφ} Tr(ρA)) = Tr(ρ H_φ(A)) for Hermitian ρ.
        let h = rotated_hermitian_part(a, phi)?;
        let p = SdpProblem::new(h.scale_real(-1.0), vec![(ComplexMatrix::identity(k), 1.0)])?;
        let sol = sdp::solve_warm(&p, tol, sdp::DEFAULT_MAX_ITER, warm.as_ref())?;
        if sol.status != SdpStatus::Optimal {
            return Err(Error::NoConvergence("state-radius SDP"));
        }
        *warm = Some(sol.warm);
        Ok(-sol.value)
    };
    let (_, value) = phase_sweep(64, 1e-5, |phi| objective(phi, &mut warm))?;
    Ok(value)
}

/// `n·ω(A) − ‖A‖₁` for `A ∈ M_n`; never below roundoff.
pub fn trace_radius_inequality_gap(a: &ComplexMatrix) -> Result<f64> {
    let n = a.ensure_square()?;
    let omega = numerical_radius(a, 1e-10)?.omega;
    Ok(n as f64 * omega - schatten_norm(a, 1.0)?)
}

/// Whether every eigenvalue of `T` passes [`contains_point`].
pub fn spectrum_containment_check(t: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(spectrum(t)?.into_iter().all(|lam| contains_point(t, lam, tol)))
}
