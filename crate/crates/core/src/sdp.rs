//! Small dense semidefinite programs over Hermitian matrices.
//!
//! Standard form:
//!
//! ```text
//!   minimize   ⟨C, Y⟩
//!   subject to ⟨A_i, Y⟩ = b_i,   i = 1..m
//!              Y ⪰ 0
//! ```
//!
//! with `⟨A, B⟩ = Re Tr(A* B)`, which is real and equals `Tr(AB)` on Hermitian
//! matrices. The variable stays complex Hermitian throughout; PSD projections
//! use the complex Hermitian eigensolver directly.
//!
//! [`solve`] runs an alternating direction augmented Lagrangian method on the
//! dual problem. Each iteration is one eigendecomposition of a `d×d`
//! Hermitian matrix plus a solve against the precomputed pseudo-inverse of the
//! constraint Gram matrix. The primal iterate is PSD by construction; only the
//! affine residual has to converge.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eig_hermitian, ComplexMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200_000;

/// Standard-form SDP. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    dim: usize,
    objective: ComplexMatrix,
    constraints: Vec<ComplexMatrix>,
    rhs: DVector<f64>,
    /// Moore–Penrose pseudo-inverse of `G_ij = ⟨A_i, A_j⟩`.
    gram_pinv: DMatrix<f64>,
    /// Distance of `b` from the range of the constraint map.
    rhs_inconsistency: f64,
}

impl SdpProblem {
    pub fn new(objective: ComplexMatrix, constraints: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let dim = objective.ensure_square()?;
        let dev = objective.hermitian_deviation();
        if dev > 1e-12 * (1.0 + objective.max_abs()) {
            return Err(Error::NotHermitian(dev));
        }
        let mut mats = Vec::with_capacity(constraints.len());
        let mut rhs = Vec::with_capacity(constraints.len());
        for (a, b) in constraints {
            if a.rows() != dim || a.cols() != dim {
                return Err(Error::Dimension(format!(
                    "constraint is {}x{}, variable is {dim}x{dim}",
                    a.rows(),
                    a.cols()
                )));
            }
            let dev = a.hermitian_deviation();
            if dev > 1e-12 * (1.0 + a.max_abs()) {
                return Err(Error::NotHermitian(dev));
            }
            if !b.is_finite() {
                return Err(Error::NonFinite);
            }
            mats.push(a.hermitian_part());
            rhs.push(b);
        }
        let m = mats.len();
        let gram = DMatrix::from_fn(m, m, |i, j| mats[i].inner(&mats[j]));
        let gram_pinv = symmetric_pinv(&gram);
        let rhs = DVector::from_vec(rhs);
        let rhs_inconsistency = if m == 0 {
            0.0
        } else {
            (&gram * (&gram_pinv * &rhs) - &rhs).norm()
        };
        Ok(Self {
            dim,
            objective: objective.hermitian_part(),
            constraints: mats,
            rhs,
            gram_pinv,
            rhs_inconsistency,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &ComplexMatrix {
        &self.objective
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn rhs(&self) -> &[f64] {
        self.rhs.as_slice()
    }

    /// `A(Y) = (⟨A_i, Y⟩)_i`.
    pub fn apply_constraints(&self, y: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|a| a.inner(y)))
    }

    /// `A*(z) = Σ z_i A_i`.
    pub fn adjoint_constraints(&self, z: &DVector<f64>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim).into_na();
        for (a, &zi) in self.constraints.iter().zip(z.iter()) {
            if zi != 0.0 {
                out.zip_apply(a.as_na(), |o, x| *o += x * zi);
            }
        }
        ComplexMatrix::from_na(out)
    }

    /// `‖A(Y) − b‖₂`.
    pub fn constraint_residual(&self, y: &ComplexMatrix) -> f64 {
        (self.apply_constraints(y) - &self.rhs).norm()
    }

    /// Lower bound on the optimal value valid for any multipliers `z`, given
    /// that every feasible point has trace `trace`:
    /// `⟨C, Y⟩ = ⟨C − A*(z), Y⟩ + bᵀz ≥ bᵀz + trace·min(0, λ_min(C − A*(z)))`.
    pub fn dual_bound(&self, z: &[f64], trace: f64) -> Result<f64> {
        let z = DVector::from_column_slice(z);
        let slack = &self.objective - &self.adjoint_constraints(&z);
        let floor = eig_hermitian(&slack, f64::INFINITY)?.min_value();
        Ok(self.rhs.dot(&z) + trace * floor.min(0.0))
    }

    fn consistent(&self) -> bool {
        self.rhs_inconsistency <= 1e-9 * (1.0 + self.rhs.norm())
    }
}

/// Pseudo-inverse of a real symmetric PSD matrix, dropping eigenvalues below
/// a relative threshold.
fn symmetric_pinv(g: &DMatrix<f64>) -> DMatrix<f64> {
    let m = g.nrows();
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let cutoff = 1e-12 * top.max(f64::MIN_POSITIVE);
    let mut out = DMatrix::zeros(m, m);
    for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            let v = eig.eigenvectors.column(idx);
            out += (v.clone() * v.transpose()) / lam;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// PSD primal solution.
    pub y: ComplexMatrix,
    /// `⟨C, Y⟩`.
    pub value: f64,
    /// Dual objective `bᵀz`; a lower bound on the optimum once dual residuals vanish.
    pub dual_value: f64,
    /// Equality multipliers `z`.
    pub multipliers: Vec<f64>,
    /// `‖A(Y) − b‖₂`, or the converged gap between the PSD cone and the
    /// affine set when `status` is `Infeasible`.
    pub primal_residual: f64,
    /// Most negative eigenvalue of the affinely-projected iterate before the
    /// final clipping to the PSD cone.
    pub eig_floor: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Solver state for warm-starting a neighbouring problem.
    pub warm: WarmStart,
}

/// Solver state carried between related solves.
#[derive(Debug, Clone)]
pub struct WarmStart {
    x: ComplexMatrix,
    s: ComplexMatrix,
    mu: f64,
}

impl WarmStart {
    /// Warm start from a primal point only.
    pub fn from_primal(x: ComplexMatrix) -> Self {
        let d = x.rows();
        Self {
            x,
            s: ComplexMatrix::zeros(d, d),
            mu: 1.0,
        }
    }
}

/// Nearest PSD matrix in Frobenius norm.
pub fn project_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h, 1e-10 * (1.0 + h.max_abs()))?;
    Ok(eig.map_values(|x| x.max(0.0)))
}

/// Orthogonal projection onto `{Z Hermitian : ⟨A_i, Z⟩ = b_i}`.
pub fn project_affine(p: &SdpProblem, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !p.consistent() {
        return Err(Error::InconsistentConstraints(p.rhs_inconsistency));
    }
    if y.rows() != p.dim || y.cols() != p.dim {
        return Err(Error::Dimension("variable size".into()));
    }
    if p.constraints.is_empty() {
        return Ok(y.hermitian_part());
    }
    let r = p.apply_constraints(y) - &p.rhs;
    let z = &p.gram_pinv * r;
    Ok(&y.hermitian_part() - &p.adjoint_constraints(&z))
}

pub fn solve(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    solve_warm(p, tol, max_iter, None)
}

/// Dual ADMM for the standard-form SDP.
///
/// With penalty `μ` and multipliers `z` (dual variables), slack `S`, primal `X`:
///
/// ```text
///   z ← G⁺ ( μ(b − A(X)) + A(C − S) )
///   V ← C − A*(z) − μX
///   S ← V₊,   X ← (V₋)/μ          (spectral positive/negative parts)
/// ```
///
/// The dual residual `A*(z) + S − C` equals `μ(X_new − X_old)`.
pub fn solve_warm(p: &SdpProblem, tol: f64, max_iter: usize, warm: Option<&WarmStart>) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let d = p.dim;
    if !p.consistent() {
        let y = ComplexMatrix::zeros(d, d);
        return Ok(SdpSolution {
            value: 0.0,
            dual_value: 0.0,
            multipliers: vec![0.0; p.constraints.len()],
            primal_residual: p.rhs_inconsistency,
            eig_floor: 0.0,
            status: SdpStatus::Infeasible,
            iterations: 0,
            warm: WarmStart::from_primal(y.clone()),
            y,
        });
    }
    let c = &p.objective;
    let b = &p.rhs;
    let b_scale = 1.0 + b.norm();
    let c_scale = 1.0 + c.frobenius_norm();

    let (mut x, mut s, mut mu) = match warm {
        Some(w) if w.x.rows() == d => (w.x.clone(), w.s.clone(), w.mu),
        _ => (ComplexMatrix::zeros(d, d), ComplexMatrix::zeros(d, d), 1.0),
    };
    let mut z = DVector::zeros(p.constraints.len());

    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut window_pres = f64::INFINITY;
    let mut ratio_acc = 0.0;
    let mut ratio_count = 0;

    for it in 1..=max_iter {
        iterations = it;
        let ax = p.apply_constraints(&x);
        let rhs = (b - &ax) * mu + p.apply_constraints(&(c - &s));
        z = &p.gram_pinv * rhs;
        let v = &(c - &p.adjoint_constraints(&z)) - &x.scale_real(mu);
        let eig = eig_hermitian(&v, 1e-8 * (1.0 + v.max_abs()))?;
        let s_new = eig.map_values(|l| l.max(0.0));
        let x_new = eig.map_values(|l| (-l).max(0.0) / mu);

        let dres = mu * x_new.distance(&x) / c_scale;
        x = x_new;
        s = s_new;
        let pres = p.constraint_residual(&x) / b_scale;
        let pobj = c.inner(&x);
        let dobj = b.dot(&z);
        if !pobj.is_finite() || !dobj.is_finite() {
            return Err(Error::NaN("sdp solve"));
        }
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        if pres <= tol && dres <= tol && gap <= tol {
            status = SdpStatus::Optimal;
            break;
        }
        if x.max_abs() > 1e12 {
            return Err(Error::Unbounded);
        }

        // Penalty balancing: μ weights primal feasibility in the z-step.
        ratio_acc += (pres.max(1e-300) / dres.max(1e-300)).ln();
        ratio_count += 1;
        if ratio_count == 10 {
            let mean = ratio_acc / ratio_count as f64;
            if mean > 1.0_f64.ln() + 0.7 {
                mu = (mu * 1.6).min(1e6);
            } else if mean < -0.7 {
                mu = (mu / 1.6).max(1e-6);
            }
            ratio_acc = 0.0;
            ratio_count = 0;
        }

        if it % 2000 == 0 {
            if pres > 10.0 * tol && pres > 0.95 * window_pres {
                if let Some(gap) = alternating_projection_gap(p, &x, tol)? {
                    let y = x.clone();
                    return Ok(SdpSolution {
                        value: c.inner(&y),
                        dual_value: dobj,
                        multipliers: z.as_slice().to_vec(),
                        primal_residual: gap,
                        eig_floor: 0.0,
                        status: SdpStatus::Infeasible,
                        iterations,
                        warm: WarmStart { x, s, mu },
                        y,
                    });
                }
            }
            window_pres = pres;
        }
    }

    let warm = WarmStart {
        x: x.clone(),
        s,
        mu,
    };
    finish(p, x, z.as_slice().to_vec(), status, iterations, tol, warm)
}

/// Projects the final iterate onto the affine set, records the eigenvalue
/// floor, clips back to the cone, and recomputes residuals from scratch.
fn finish(
    p: &SdpProblem,
    x: ComplexMatrix,
    multipliers: Vec<f64>,
    mut status: SdpStatus,
    iterations: usize,
    tol: f64,
    warm: WarmStart,
) -> Result<SdpSolution> {
    let affine = project_affine(p, &x)?;
    let eig = eig_hermitian(&affine, 1e-8 * (1.0 + affine.max_abs()))?;
    let eig_floor = eig.min_value();
    let y = if eig_floor >= 0.0 {
        affine
    } else {
        eig.map_values(|l| l.max(0.0))
    };
    let primal_residual = p.constraint_residual(&y);
    let scale = 1.0 + p.rhs.norm();
    if status == SdpStatus::Optimal && (primal_residual > tol * scale || eig_floor < -tol * scale) {
        status = SdpStatus::MaxIterations;
    }
    Ok(SdpSolution {
        value: p.objective.inner(&y),
        dual_value: p.rhs.iter().zip(&multipliers).map(|(b, z)| b * z).sum(),
        multipliers,
        primal_residual,
        eig_floor,
        status,
        iterations,
        warm,
        y,
    })
}

/// Alternating projections between the PSD cone and the affine set. Returns
/// the gap when the displacement vector settles at a nonzero length above
/// `10·tol`, `None` when the sets appear to intersect.
fn alternating_projection_gap(p: &SdpProblem, start: &ComplexMatrix, tol: f64) -> Result<Option<f64>> {
    let mut s = project_psd(start)?;
    let mut prev: Option<ComplexMatrix> = None;
    for _ in 0..5000 {
        let a = project_affine(p, &s)?;
        let disp = &a - &s;
        let gap = disp.frobenius_norm();
        if gap <= 10.0 * tol {
            return Ok(None);
        }
        if let Some(prev) = &prev {
            if disp.distance(prev) <= 1e-3 * tol {
                return Ok(Some(gap));
            }
        }
        prev = Some(disp);
        s = project_psd(&a)?;
    }
    Ok(None)
}

/// Coordinates of a Hermitian matrix in an orthonormal real basis:
/// diagonal entries, then `√2·Re` and `√2·Im` of the strict upper triangle.
/// Frobenius inner products become dot products.
fn hvec(h: &ComplexMatrix) -> DVector<f64> {
    let d = h.rows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(h[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            let z = h[(i, j)];
            out.push(std::f64::consts::SQRT_2 * z.re);
            out.push(std::f64::consts::SQRT_2 * z.im);
        }
    }
    DVector::from_vec(out)
}

fn hunvec(v: &DVector<f64>, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d).into_na();
    for i in 0..d {
        m[(i, i)] = v[i].into();
    }
    let mut idx = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = nalgebra::Complex::new(v[idx], v[idx + 1]) / std::f64::consts::SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            idx += 2;
        }
    }
    ComplexMatrix::from_na(m)
}

/// Result of [`solve_least_squares`].
#[derive(Debug, Clone)]
pub struct LeastSquaresSolution {
    /// PSD iterate; satisfies the constraints up to `primal_residual`.
    pub y: ComplexMatrix,
    /// `‖L(Y) − c‖₂` at `y`.
    pub misfit: f64,
    pub primal_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Constrained least squares over the PSD cone:
///
/// ```text
///   minimize   ½ Σ_i (⟨L_i, Y⟩ − c_i)²
///   subject to ⟨A_j, Y⟩ = b_j,  Y ⪰ 0
/// ```
///
/// with the constraints taken from `p` (its objective is ignored). Primal
/// ADMM on the splitting `Y = Z`, `Z ⪰ 0`: the `Y`-step is an equality
/// constrained quadratic solved by a precomputed affine map, the `Z`-step a
/// PSD projection.
pub fn solve_least_squares(
    p: &SdpProblem,
    fit: &[(ComplexMatrix, f64)],
    tol: f64,
    max_iter: usize,
    start: Option<&ComplexMatrix>,
) -> Result<LeastSquaresSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    if !p.consistent() {
        return Err(Error::InconsistentConstraints(p.rhs_inconsistency));
    }
    let d = p.dim;
    let dim = d * d;
    for (l, c) in fit {
        if l.rows() != d || l.cols() != d {
            return Err(Error::Dimension("fit functional size".into()));
        }
        if !c.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let mut lmat = DMatrix::zeros(fit.len(), dim);
    for (i, (l, _)) in fit.iter().enumerate() {
        lmat.set_row(i, &hvec(&l.hermitian_part()).transpose());
    }
    let c = DVector::from_iterator(fit.len(), fit.iter().map(|(_, c)| *c));
    let mut amat = DMatrix::zeros(p.constraints.len(), dim);
    for (j, a) in p.constraints.iter().enumerate() {
        amat.set_row(j, &hvec(a).transpose());
    }
    let ltl = lmat.transpose() * &lmat;
    let ltc = lmat.transpose() * &c;

    // y = P r + q solves min ½‖Ly − c‖² + ρ/2‖y − v‖² s.t. Ay = b with r = Lᵀc + ρv.
    let affine_map = |rho: f64| -> Result<(DMatrix<f64>, DVector<f64>)> {
        let h = &ltl + DMatrix::identity(dim, dim) * rho;
        let hinv = h
            .cholesky()
            .ok_or(Error::NoConvergence("least-squares normal matrix not positive definite"))?
            .inverse();
        let ha = &hinv * amat.transpose();
        let schur_pinv = symmetric_pinv(&(&amat * &ha));
        let pmat = &hinv - &ha * &schur_pinv * ha.transpose();
        let q = &ha * (&schur_pinv * &p.rhs);
        Ok((pmat, q))
    };

    let mut rho = 1.0;
    let (mut pmat, mut q) = affine_map(rho)?;
    let mut z = match start {
        Some(s) if s.rows() == d && s.cols() == d => hvec(&project_psd(&s.hermitian_part())?),
        _ => DVector::zeros(dim),
    };
    let mut u = DVector::zeros(dim);
    let scale = 1.0 + c.norm() + p.rhs.norm();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let y = &pmat * (&ltc + (&z - &u) * rho) + &q;
        let z_new = hvec(&project_psd(&hunvec(&(&y + &u), d))?);
        let primal = (&y - &z_new).norm();
        let dual = rho * (&z_new - &z).norm();
        u += &y - &z_new;
        z = z_new;
        if primal <= tol * scale && dual <= tol * scale {
            converged = true;
            break;
        }
        if it % 50 == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u /= factor;
                (pmat, q) = affine_map(rho)?;
            }
        }
    }
    let y = hunvec(&z, d);
    Ok(LeastSquaresSolution {
        misfit: (&lmat * &z - &c).norm(),
        primal_residual: p.constraint_residual(&y),
        y,
        converged,
        iterations,
    })
}

/// Residuals recomputed from scratch for a claimed solution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KktReport {
    pub feasibility_residual: f64,
    /// `max(0, −λ_min(Y))`.
    pub psd_violation: f64,
    pub objective: f64,
    /// Whether the stored fields agree with the recomputed ones within `tol`.
    pub consistent: bool,
}

pub fn check_kkt(p: &SdpProblem, s: &SdpSolution, tol: f64) -> Result<KktReport> {
    let feasibility_residual = p.constraint_residual(&s.y);
    let eig = eig_hermitian(&s.y, 1e-8 * (1.0 + s.y.max_abs()))?;
    let psd_violation = (-eig.min_value()).max(0.0);
    let objective = p.objective.inner(&s.y);
    let consistent = (objective - s.value).abs() <= tol * (1.0 + objective.abs())
        && (s.status == SdpStatus::Infeasible || (feasibility_residual - s.primal_residual).abs() <= tol);
    Ok(KktReport {
        feasibility_residual,
        psd_violation,
        objective,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{
        ginibre, random_hermitian, rng_from_seed, ComplexMatrix, C64,
    };

    fn e(d: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(d, d, i, j)
    }

    fn trace_problem(d: usize, objective: ComplexMatrix) -> SdpProblem {
        SdpProblem::new(objective, vec![(ComplexMatrix::identity(d), 1.0)]).unwrap()
    }

    #[test]
    fn minimize_trace_with_pinned_entry() {
        let p = SdpProblem::new(ComplexMatrix::identity(2), vec![(e(2, 0, 0), 1.0)]).unwrap();
        let s = solve(&p, 1e-9, 100_000).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-7, "value {}", s.value);
        assert!(s.y.max_abs_diff(&e(2, 0, 0)) < 1e-6);
        let kkt = check_kkt(&p, &s, 1e-7).unwrap();
        assert!(kkt.feasibility_residual <= 1e-7 && kkt.psd_violation <= 1e-7 && kkt.consistent);
    }

    #[test]
    fn state_maximization_matches_top_eigenvalue() {
        let mut rng = rng_from_seed(21);
        for d in [2, 3, 5] {
            let h = random_hermitian(d, &mut rng);
            let p = trace_problem(d, h.scale_real(-1.0));
            let s = solve(&p, 1e-9, 100_000).unwrap();
            assert_eq!(s.status, SdpStatus::Optimal);
            let top = eig_hermitian(&h, 1e-12).unwrap().max_value();
            assert!((-s.value - top).abs() < 1e-6, "d={d}: {} vs {top}", -s.value);
        }
    }

    #[test]
    fn dual_bound_brackets_optimum() {
        let mut rng = rng_from_seed(23);
        let h = random_hermitian(3, &mut rng);
        let p = trace_problem(3, h.clone());
        let s = solve(&p, 1e-9, 100_000).unwrap();
        let lo = p.dual_bound(&s.multipliers, 1.0).unwrap();
        let exact = eig_hermitian(&h, 1e-12).unwrap().min_value();
        assert!(lo <= exact + 1e-12 && exact - lo < 1e-7, "{lo} vs {exact}");
        // any multiplier gives a valid bound
        assert!(p.dual_bound(&[-5.0], 1.0).unwrap() <= exact + 1e-12);
    }

    #[test]
    fn hvec_is_an_isometry() {
        let mut rng = rng_from_seed(4);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        assert!((hvec(&a).dot(&hvec(&b)) - a.inner(&b)).abs() < 1e-12);
        assert!(hunvec(&hvec(&a), 4).max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn least_squares_matches_spectral_projection() {
        // Nearest density matrix to a Hermitian H in Frobenius norm: shift the
        // eigenvalues and clip, with the shift fixed by the trace.
        let mut rng = rng_from_seed(8);
        let d = 3;
        let h = random_hermitian(d, &mut rng);
        let p = trace_problem(d, ComplexMatrix::zeros(d, d));
        let mut fit = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let m = e(d, i, j);
                for f in [m.hermitian_part(), m.scale(nalgebra::Complex::new(0.0, -1.0)).hermitian_part()] {
                    let target = f.inner(&h);
                    fit.push((f, target));
                }
            }
        }
        let s = solve_least_squares(&p, &fit, 1e-11, 50_000, None).unwrap();
        assert!(s.converged);
        let eig = eig_hermitian(&h, 1e-12).unwrap();
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let tr: f64 = eig.values.iter().map(|l| (l - mid).max(0.0)).sum();
            if tr > 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let expected = eig.map_values(|l| (l - lo).max(0.0));
        assert!(s.y.max_abs_diff(&expected) < 1e-7, "{}", s.y.max_abs_diff(&expected));
    }

    #[test]
    fn maximally_mixed_choi_is_feasible() {
        // Unital spectrahedron for k = n = 2: Tr_in J = I_2.
        let (k, n) = (2, 2);
        let mut cons = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut b = ComplexMatrix::zeros(n, n).into_na();
                if i == j {
                    b[(i, i)] = C64::new(1.0, 0.0);
                    cons.push((crate::matrix::kron(&ComplexMatrix::identity(k), &ComplexMatrix::from_na(b)), 1.0));
                } else {
                    b[(i, j)] = C64::new(0.5, 0.0);
                    b[(j, i)] = C64::new(0.5, 0.0);
                    cons.push((crate::matrix::kron(&ComplexMatrix::identity(k), &ComplexMatrix::from_na(b.clone())), 0.0));
                    b[(i, j)] = C64::new(0.0, 0.5);
                    b[(j, i)] = C64::new(0.0, -0.5);
                    cons.push((crate::matrix::kron(&ComplexMatrix::identity(k), &ComplexMatrix::from_na(b)), 0.0));
                }
            }
        }
        let p = SdpProblem::new(ComplexMatrix::zeros(4, 4), cons).unwrap();
        let mixed = ComplexMatrix::identity(4).scale_real(0.5);
        assert!(p.constraint_residual(&mixed) < 1e-15);
        let s = solve(&p, 1e-8, 10_000).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!(s.primal_residual <= 1e-8 * 3.0);

        let fake = SdpSolution {
            y: mixed.clone(),
            value: 0.0,
            dual_value: 0.0,
            multipliers: vec![],
            primal_residual: 0.0,
            eig_floor: 0.5,
            status: SdpStatus::Optimal,
            iterations: 0,
            warm: WarmStart::from_primal(mixed),
        };
        let kkt = check_kkt(&p, &fake, 1e-12).unwrap();
        assert_eq!(kkt.feasibility_residual, 0.0);
        assert!(kkt.consistent);
    }

    #[test]
    fn detects_infeasibility() {
        // Y_00 = -1 cannot hold for PSD Y.
        let p = SdpProblem::new(ComplexMatrix::zeros(2, 2), vec![(e(2, 0, 0), -1.0)]).unwrap();
        let s = solve(&p, 1e-7, 50_000).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
        assert!((s.primal_residual - 1.0).abs() < 1e-4, "gap {}", s.primal_residual);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let p = SdpProblem::new(
            ComplexMatrix::zeros(2, 2),
            vec![(e(2, 0, 0), 1.0), (e(2, 0, 0), 2.0)],
        )
        .unwrap();
        assert!(matches!(
            project_affine(&p, &ComplexMatrix::zeros(2, 2)),
            Err(Error::InconsistentConstraints(_))
        ));
        assert_eq!(solve(&p, 1e-7, 100).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn redundant_constraints_are_fine() {
        let p = SdpProblem::new(
            ComplexMatrix::identity(2),
            vec![(e(2, 0, 0), 1.0), (e(2, 0, 0).scale_real(2.0), 2.0)],
        )
        .unwrap();
        let s = solve(&p, 1e-9, 100_000).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn project_psd_examples() {
        let d = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(project_psd(&d).unwrap().max_abs_diff(&want) < 1e-15);

        let mut rng = rng_from_seed(4);
        let g = ginibre(3, 3, &mut rng);
        let psd = &g * &g.adjoint();
        assert!(project_psd(&psd).unwrap().max_abs_diff(&psd) < 1e-12);

        // Nearest-point property against sampled PSD competitors.
        let h = random_hermitian(3, &mut rng);
        let p = project_psd(&h).unwrap();
        assert!(eig_hermitian(&p, 1e-12).unwrap().min_value() >= -1e-12);
        let best = h.distance(&p);
        for _ in 0..100 {
            let g = ginibre(3, 3, &mut rng).scale_real(0.7);
            let q = &g * &g.adjoint();
            assert!(best <= h.distance(&q) + 1e-12);
        }
    }

    #[test]
    fn project_affine_examples() {
        let p = trace_problem(2, ComplexMatrix::zeros(2, 2));
        let z = project_affine(&p, &ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(z.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let feasible = ComplexMatrix::from_real_rows(&[[0.3, 0.1], [0.1, 0.7]]).unwrap();
        assert!(project_affine(&p, &feasible).unwrap().max_abs_diff(&feasible) < 1e-12);

        let mut rng = rng_from_seed(8);
        let cons = (0..3).map(|_| (random_hermitian(3, &mut rng), 0.5)).collect();
        let p = SdpProblem::new(ComplexMatrix::zeros(3, 3), cons).unwrap();
        let y = random_hermitian(3, &mut rng);
        let once = project_affine(&p, &y).unwrap();
        let twice = project_affine(&p, &once).unwrap();
        assert!(p.constraint_residual(&once) < 1e-10);
        assert!(once.max_abs_diff(&twice) < 1e-10);
    }

    #[test]
    fn kkt_reports_injected_violation() {
        let p = SdpProblem::new(ComplexMatrix::identity(2), vec![(e(2, 0, 0), 1.0)]).unwrap();
        let mut s = solve(&p, 1e-9, 100_000).unwrap();
        let bump = e(2, 1, 1).scale_real(-0.01);
        s.y = &s.y + &bump;
        let kkt = check_kkt(&p, &s, 1e-7).unwrap();
        assert!((kkt.psd_violation - 0.01).abs() < 1e-8, "{}", kkt.psd_violation);
        assert!(!kkt.consistent);
    }

    #[test]
    fn solve_is_deterministic() {
        let mut rng = rng_from_seed(31);
        let h = random_hermitian(4, &mut rng);
        let p = trace_problem(4, h);
        let a = solve(&p, 1e-8, 50_000).unwrap();
        let b = solve(&p, 1e-8, 50_000).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn rejects_bad_problems() {
        let t = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(SdpProblem::new(t.clone(), vec![]), Err(Error::NotHermitian(_))));
        assert!(SdpProblem::new(ComplexMatrix::zeros(2, 2), vec![(t, 1.0)]).is_err());
        assert!(SdpProblem::new(
            ComplexMatrix::zeros(2, 2),
            vec![(ComplexMatrix::identity(3), 1.0)]
        )
        .is_err());
    }
}
