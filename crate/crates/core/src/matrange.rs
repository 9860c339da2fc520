//! Oracles over the n'th matricial range `W^n(T) = {Φ(T) : Φ: M_k → M_n unital CP}`.
//!
//! Every oracle reduces to SDPs over the Choi spectrahedron
//! `{J ⪰ 0 : Tr_in J = I_n}`. The basic primitive is the support function
//!
//! ```text
//!   σ(W) = max { Re Tr(W Φ(T)) : Φ unital CP },
//! ```
//!
//! a linear SDP since `Re Tr(W Φ_J(T)) = Tr(herm(Tᵀ ⊗ W) J)`.
//!
//! Maps on `C*(T)` are represented by maps on all of `M_k`; every UCP map on
//! `C*(T)` extends to one on `M_k`, and restriction goes the other way, so the
//! two families produce the same set of values `Φ(T)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    kron, normalize, operator_norm, polar_unitary, rng_from_seed, schatten_norm, spectrum, svd,
    vector_norm,
    ComplexMatrix, Seed, C64,
};
use crate::numrange::{contains_point, numerical_radius, phase_sweep};
use crate::sdp::{self, SdpProblem, SdpStatus, WarmStart};
use crate::ucp::{self, normalize_unital, random_ucp_with, state_map, ChoiMap};

/// Default solver tolerance for the SDPs inside the oracles.
pub const SDP_TOL: f64 = 1e-8;
/// Iteration cap for a single SDP solve inside an oracle.
pub const SDP_MAX_ITER: usize = 50_000;
/// Phase grid of the ν^n sweep.
pub const NU_GRID: usize = 64;
pub const DEFAULT_RESTARTS: usize = 5;
pub const ASCENT_MAX_ITER: usize = 200;
pub const ASCENT_STAGNATION: f64 = 1e-9;

/// `(A, b)` pairs pinning `Φ_J(A) = target` through real and imaginary parts of
/// each entry. With `hermitian` set only the upper triangle is pinned, which
/// suffices when both `A` and `target` are Hermitian.
fn image_constraints(
    a: &ComplexMatrix,
    n: usize,
    target: &ComplexMatrix,
    hermitian: bool,
) -> Vec<(ComplexMatrix, f64)> {
    let at = a.transpose();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if hermitian && j < i {
                continue;
            }
            // Φ(A)_ij = Tr((Aᵀ ⊗ E_ji) J)
            let m = kron(&at, &ComplexMatrix::unit(n, n, j, i));
            let re = m.hermitian_part();
            let im = m.scale(C64::new(0.0, -1.0)).hermitian_part();
            let t = target[(i, j)];
            if re.max_abs() > 0.0 {
                out.push((re, t.re));
            }
            if im.max_abs() > 0.0 && !(hermitian && i == j) {
                out.push((im, t.im));
            }
        }
    }
    out
}

fn unital_constraints(k: usize, n: usize) -> Vec<(ComplexMatrix, f64)> {
    image_constraints(&ComplexMatrix::identity(k), n, &ComplexMatrix::identity(n), true)
}

/// Objective matrix `herm(Tᵀ ⊗ W)`: `Tr(C J) = Re Tr(W Φ_J(T))`.
fn linear_objective(t: &ComplexMatrix, w: &ComplexMatrix) -> ComplexMatrix {
    kron(&t.transpose(), w).hermitian_part()
}

/// `Re Tr(W X)`.
fn pairing(w: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    (w * x).trace().re
}

/// Solution of one support-function SDP, with the witness repaired to an
/// exactly unital CP map.
#[derive(Debug, Clone)]
pub(crate) struct SupportPoint {
    pub map: ChoiMap,
    pub image: ComplexMatrix,
    pub value: f64,
    pub optimal: bool,
    pub warm: WarmStart,
}

/// `argmax { Re Tr(W Φ(T)) : Φ ∈ UCP(M_k, M_n) }`.
pub(crate) fn support_sdp(
    t: &ComplexMatrix,
    w: &ComplexMatrix,
    tol: f64,
    warm: Option<&WarmStart>,
) -> Result<SupportPoint> {
    let k = t.ensure_square()?;
    let n = w.ensure_square()?;
    let p = SdpProblem::new(linear_objective(t, w).scale_real(-1.0), unital_constraints(k, n))?;
    let sol = sdp::solve_warm(&p, tol, SDP_MAX_ITER, warm)?;
    let map = normalize_unital(&ChoiMap::from_choi(k, n, sol.y)?)?;
    let image = map.apply(t)?;
    Ok(SupportPoint {
        value: pairing(w, &image),
        image,
        map,
        optimal: sol.status == SdpStatus::Optimal,
        warm: sol.warm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupremumMethod {
    SweepSdp,
    AlternatingAscent,
}

/// A supremum over `W^n(T)` with the map that attains it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupremumResult {
    /// Objective at `witness`; the larger of the search result and the
    /// explicit lower-bound construction.
    pub value: f64,
    pub witness: ChoiMap,
    /// Objective at an explicitly constructed map.
    pub lower_bound: f64,
    /// The closed-form value the supremum is known to equal.
    pub upper_bound: f64,
    pub method: SupremumMethod,
    /// Every SDP reached its tolerance and every ascent stagnated before the
    /// iteration cap.
    pub converged: bool,
    /// Best objective found by the SDP search alone, without the explicit
    /// construction.
    pub search_value: f64,
    /// Final objective of each ascent run, the phase-probe run first (empty
    /// for sweeps).
    pub restart_values: Vec<f64>,
}

/// `ν^n(T) = sup { |Tr X| : X ∈ W^n(T) }`.
///
/// `|Tr Φ(T)|` is maximized through phase sweeps of the linear SDPs
/// `max Re(e^{iφ} Tr Φ(T))`; the set of traces `{Tr X}` is convex, so the sweep
/// only carries grid error, which the golden-section step removes.
pub fn nu_n(t: &ComplexMatrix, n: usize, tol: f64) -> Result<SupremumResult> {
    check_dims(t, n)?;
    let est = numerical_radius(t, 1e-10)?;
    let lower_map = state_map(&est.witness, n)?;
    let lower_bound = lower_map.apply(t)?.trace().norm();
    let upper_bound = n as f64 * est.omega;

    let id = ComplexMatrix::identity(n);
    let mut warm: Option<WarmStart> = None;
    let mut best: Option<SupportPoint> = None;
    let mut all_optimal = true;
    let mut eval = |phi: f64| -> Result<f64> {
        let w = id.scale(C64::from_polar(1.0, phi));
        let sp = support_sdp(t, &w, tol.min(SDP_TOL), warm.as_ref())?;
        all_optimal &= sp.optimal;
        warm = Some(sp.warm.clone());
        let v = sp.value;
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(sp);
        }
        Ok(v)
    };
    phase_sweep(NU_GRID, 1e-4, &mut eval)?;
    let best = best.expect("sweep evaluates at least one phase");
    let search_value = best.image.trace().norm();
    let (value, witness) = if search_value >= lower_bound {
        (search_value, best.map)
    } else {
        (lower_bound, lower_map)
    };
    Ok(SupremumResult {
        value,
        witness,
        lower_bound,
        upper_bound,
        method: SupremumMethod::SweepSdp,
        converged: all_optimal,
        search_value,
        restart_values: Vec::new(),
    })
}


fn check_dims(t: &ComplexMatrix, n: usize) -> Result<usize> {
    let k = t.ensure_square()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    Ok(k)
}

/// Objective maximized by an alternating ascent. Each is a supremum of
/// `Re Tr(W X)` over a family of `W`, which is what makes the ascent work:
/// fix `X` and pick the best `W`, then fix `W` and solve the support SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    /// `‖X‖₁ = max { Re Tr(WX) : ‖W‖ ≤ 1 }`.
    TraceNorm,
    /// `‖X‖ = max { Re Tr(v u* X) : ‖u‖ = ‖v‖ = 1 }`.
    OperatorNorm,
    /// `ω(X) = max { Re Tr(e^{iθ} x x* X) : ‖x‖ = 1 }`.
    NumericalRadius,
}

impl Objective {
    fn value(self, x: &ComplexMatrix) -> Result<f64> {
        match self {
            Objective::TraceNorm => schatten_norm(x, 1.0),
            Objective::OperatorNorm => Ok(operator_norm(x)),
            Objective::NumericalRadius => Ok(numerical_radius(x, 1e-10)?.omega),
        }
    }

    /// A maximizing `W` for the current `X`.
    fn direction(self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Objective::TraceNorm => Ok(polar_unitary(x)?.adjoint()),
            Objective::OperatorNorm => {
                let s = svd(x);
                let u = ComplexMatrix::column_vector(&s.u.column(0));
                let v = ComplexMatrix::column_vector(&s.v.column(0));
                Ok(&v * &u.adjoint())
            }
            Objective::NumericalRadius => {
                let est = numerical_radius(x, 1e-10)?;
                let v = ComplexMatrix::column_vector(&est.witness);
                Ok((&v * &v.adjoint()).scale(C64::from_polar(1.0, est.theta_star)))
            }
        }
    }
}

struct Ascent {
    map: ChoiMap,
    value: f64,
    converged: bool,
}

/// Alternate between the best linear functional for the current point and
/// the support SDP for that functional, until the objective stops improving.
fn ascend(t: &ComplexMatrix, start: ChoiMap, obj: Objective, tol: f64, max_iter: usize) -> Result<Ascent> {
    let mut map = start;
    let mut x = map.apply(t)?;
    let mut value = obj.value(&x)?;
    let mut warm: Option<WarmStart> = None;
    let mut all_optimal = true;
    for _ in 0..max_iter {
        let w = obj.direction(&x)?;
        let sp = support_sdp(t, &w, tol, warm.as_ref())?;
        all_optimal &= sp.optimal;
        warm = Some(sp.warm);
        let next = obj.value(&sp.image)?;
        let gain = next - value;
        if gain > 0.0 {
            map = sp.map;
            x = sp.image;
            value = next;
        }
        if gain <= ASCENT_STAGNATION * (1.0 + value) {
            return Ok(Ascent {
                map,
                value,
                converged: all_optimal,
            });
        }
    }
    Ok(Ascent {
        map,
        value,
        converged: false,
    })
}

/// Seed used by the oracles when the caller does not supply one.
pub const ORACLE_SEED: Seed = 0x6d72_6b5f_7365_6564;

/// Number of scalar directions `W = e^{iφ} I` probed before the ascent.
pub const PHASE_PROBES: usize = 16;

/// Restarted ascent. The first run starts from the best of [`PHASE_PROBES`]
/// support points in scalar directions `W = e^{iφ}I`; each objective here has
/// its maximum at a scalar point, and the probes land next to it. The
/// remaining `restarts` runs start from random UCP maps of Kraus rank `n`
/// drawn from the stream seeded by `seed`.
fn ascent_search(
    t: &ComplexMatrix,
    n: usize,
    obj: Objective,
    tol: f64,
    restarts: usize,
    seed: Seed,
) -> Result<(Option<Ascent>, Vec<f64>, bool)> {
    let k = t.ensure_square()?;
    let mut rng = rng_from_seed(seed);
    let mut best: Option<Ascent> = None;
    let mut values = Vec::with_capacity(restarts);
    let mut converged = true;
    let mut probe: Option<(f64, ChoiMap)> = None;
    let mut warm: Option<WarmStart> = None;
    let id = ComplexMatrix::identity(n);
    for j in 0..PHASE_PROBES {
        let phi = std::f64::consts::TAU * j as f64 / PHASE_PROBES as f64;
        let sp = support_sdp(t, &id.scale(C64::from_polar(1.0, phi)), tol.min(SDP_TOL), warm.as_ref())?;
        converged &= sp.optimal;
        warm = Some(sp.warm);
        let v = obj.value(&sp.image)?;
        if probe.as_ref().is_none_or(|(b, _)| v > *b) {
            probe = Some((v, sp.map));
        }
    }
    let starts = probe
        .map(|(_, m)| Ok(m))
        .into_iter()
        .chain((0..restarts).map(|_| random_ucp_with(k, n, n, &mut rng)));
    for start in starts {
        let start = start?;
        let run = ascend(t, start, obj, tol.min(SDP_TOL), ASCENT_MAX_ITER)?;
        converged &= run.converged;
        values.push(run.value);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok((best, values, converged))
}

fn assemble(
    search: (Option<Ascent>, Vec<f64>, bool),
    lower_map: ChoiMap,
    lower_bound: f64,
    upper_bound: f64,
) -> SupremumResult {
    let (best, restart_values, converged) = search;
    let search_value = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value);
    let (value, witness) = match best {
        Some(b) if b.value >= lower_bound => (b.value, b.map),
        _ => (lower_bound, lower_map),
    };
    SupremumResult {
        value,
        witness,
        lower_bound,
        upper_bound,
        method: SupremumMethod::AlternatingAscent,
        converged,
        search_value,
        restart_values,
    }
}

/// `ω^n(T) = sup { ‖X‖₁ : X ∈ W^n(T) }`.
pub fn omega_n(t: &ComplexMatrix, n: usize, tol: f64, restarts: usize) -> Result<SupremumResult> {
    omega_n_seeded(t, n, tol, restarts, ORACLE_SEED)
}

pub fn omega_n_seeded(t: &ComplexMatrix, n: usize, tol: f64, restarts: usize, seed: Seed) -> Result<SupremumResult> {
    check_dims(t, n)?;
    let est = numerical_radius(t, 1e-10)?;
    let lower_map = state_map(&est.witness, n)?;
    let lower_bound = schatten_norm(&lower_map.apply(t)?, 1.0)?;
    let search = ascent_search(t, n, Objective::TraceNorm, tol, restarts, seed)?;
    Ok(assemble(search, lower_map, lower_bound, n as f64 * est.omega))
}

/// `sup { ‖X‖ : X ∈ W^n(T) }`; equals `‖T‖` once `n ≥ 2`, and `ω(T)` for `n = 1`.
pub fn sup_opnorm(t: &ComplexMatrix, n: usize, tol: f64, restarts: usize) -> Result<SupremumResult> {
    sup_opnorm_seeded(t, n, tol, restarts, ORACLE_SEED)
}

pub fn sup_opnorm_seeded(t: &ComplexMatrix, n: usize, tol: f64, restarts: usize, seed: Seed) -> Result<SupremumResult> {
    let k = check_dims(t, n)?;
    let est = numerical_radius(t, 1e-10)?;
    let (lower_map, upper_bound) = if n == 1 {
        (state_map(&est.witness, 1)?, est.omega)
    } else {
        (top_singular_compression(t, k, n)?, operator_norm(t))
    };
    let lower_bound = operator_norm(&lower_map.apply(t)?);
    let search = ascent_search(t, n, Objective::OperatorNorm, tol, restarts, seed)?;
    Ok(assemble(search, lower_map, lower_bound, upper_bound))
}

/// Compression `A ↦ V*(A ⊗ I_n)V` whose range contains `v₁ ⊗ e₀` and
/// `u₁ ⊗ e₀` for the top singular pair `T v₁ = ‖T‖ u₁`. Then
/// `⟨Φ(T) a, b⟩ = ⟨T v₁, u₁⟩ = ‖T‖` for the matching unit vectors `a, b`.
fn top_singular_compression(t: &ComplexMatrix, k: usize, n: usize) -> Result<ChoiMap> {
    let s = svd(t);
    let v1 = s.v.column(0);
    let u1 = s.u.column(0);
    // Gram–Schmidt on {v₁, u₁} inside C^k.
    let mut basis = vec![v1.clone()];
    let overlap: C64 = v1.iter().zip(&u1).map(|(v, u)| v.conj() * u).sum();
    let rest: Vec<C64> = u1.iter().zip(&v1).map(|(u, v)| u - overlap * v).collect();
    if vector_norm(&rest) > 1e-8 {
        basis.push(normalize(&rest));
    }
    // Columns q ⊗ e₀ for the basis, then e₀ ⊗ e_m for m ≥ 1; the latter are
    // orthogonal to every column of the first kind.
    let r = n;
    let mut v = ComplexMatrix::zeros(k * r, n).into_na();
    for (col, q) in basis.iter().take(n).enumerate() {
        for a in 0..k {
            v[(a * r, col)] = q[a];
        }
    }
    for col in basis.len().min(n)..n {
        let m = col - basis.len().min(n) + 1;
        v[(m, col)] = C64::new(1.0, 0.0);
    }
    ucp::from_isometry(&ComplexMatrix::from_na(v), k, r)
}

/// `sup { ω(X) : X ∈ W^n(T) }`; equals `ω(T)`.
pub fn sup_inner_radius(t: &ComplexMatrix, n: usize, tol: f64, restarts: usize) -> Result<SupremumResult> {
    sup_inner_radius_seeded(t, n, tol, restarts, ORACLE_SEED)
}

pub fn sup_inner_radius_seeded(
    t: &ComplexMatrix,
    n: usize,
    tol: f64,
    restarts: usize,
    seed: Seed,
) -> Result<SupremumResult> {
    check_dims(t, n)?;
    let est = numerical_radius(t, 1e-10)?;
    let lower_map = state_map(&est.witness, n)?;
    let lower_bound = numerical_radius(&lower_map.apply(t)?, 1e-10)?.omega;
    let search = ascent_search(t, n, Objective::NumericalRadius, tol, restarts, seed)?;
    Ok(assemble(search, lower_map, lower_bound, est.omega))
}

/// Frank–Wolfe iterations spent before the projection solve.
pub const FW_INITIAL_ITER: usize = 8;
/// Residual tolerance of the projection solve. The separating direction is
/// only determined to about `√(ε/d)` by a projection whose distance is off by
/// `ε`, so this is far tighter than the membership tolerance.
pub const PROJECTION_TOL: f64 = 1e-12;
/// Iteration cap of the projection and feasibility solves.
pub const MEMBERSHIP_MAX_ITER: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipStatus {
    Member,
    NonMember,
    Undecided,
}

/// Outcome of [`membership`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    /// For `Member`, a validated UCP map with `‖Φ(T) − X‖_F ≤ tol`.
    pub witness: Option<ChoiMap>,
    /// Frobenius distance from `X` to the nearest `Φ(T)` found.
    pub distance: f64,
    /// Certified lower bound on the distance from `X` to `W^n(T)`, from a
    /// separating functional whose support value is bounded through SDP
    /// duality.
    pub distance_lower_bound: f64,
    pub tol: f64,
}

/// Search state: the best point `Y = Φ(T)` found and the best certified
/// lower bound on `dist(X, W^n(T))`.
struct Search<'a> {
    t: &'a ComplexMatrix,
    x: &'a ComplexMatrix,
    map: ChoiMap,
    y: ComplexMatrix,
    lower: f64,
    warm: Option<WarmStart>,
}

impl<'a> Search<'a> {
    fn new(t: &'a ComplexMatrix, x: &'a ComplexMatrix) -> Result<Self> {
        let map = ChoiMap::maximally_mixed(t.rows(), x.rows());
        let y = map.apply(t)?;
        Ok(Self {
            t,
            x,
            map,
            y,
            lower: 0.0,
            warm: None,
        })
    }

    fn distance(&self) -> f64 {
        self.x.distance(&self.y)
    }

    fn offer(&mut self, map: ChoiMap) -> Result<()> {
        let y = map.apply(self.t)?;
        if self.x.distance(&y) < self.distance() {
            self.map = map;
            self.y = y;
        }
        Ok(())
    }

    /// Separation along `G = X − Y`: with `σ = max_{Z ∈ W^n(T)} Re⟨G, Z⟩/‖G‖`,
    /// every point of the range is at least `Re⟨G, X⟩/‖G‖ − σ` away from `X`.
    /// `σ` is bounded above through the dual multipliers of the support SDP.
    /// Returns the support point, which is also the Frank–Wolfe vertex.
    fn cut(&mut self) -> Result<Option<ChoiMap>> {
        let g = self.x - &self.y;
        let gnorm = g.frobenius_norm();
        if gnorm == 0.0 {
            return Ok(None);
        }
        let w = g.adjoint().scale_real(1.0 / gnorm);
        let k = self.t.rows();
        let n = self.x.rows();
        let p = SdpProblem::new(linear_objective(self.t, &w).scale_real(-1.0), unital_constraints(k, n))?;
        let sol = sdp::solve_warm(&p, SDP_TOL, SDP_MAX_ITER, self.warm.as_ref())?;
        // Every feasible Choi matrix has trace n.
        let sigma_upper = -p.dual_bound(&sol.multipliers, n as f64)?;
        self.lower = self.lower.max(pairing(&w, self.x) - sigma_upper);
        self.warm = Some(sol.warm.clone());
        Ok(Some(normalize_unital(&ChoiMap::from_choi(k, n, sol.y)?)?))
    }

    /// Frank–Wolfe step with exact line search toward the cut's vertex.
    fn frank_wolfe_step(&mut self) -> Result<()> {
        let Some(vertex) = self.cut()? else {
            return Ok(());
        };
        let d = &vertex.apply(self.t)? - &self.y;
        let dd = d.inner(&d);
        if dd > 0.0 {
            let gamma = ((self.x - &self.y).inner(&d) / dd).clamp(0.0, 1.0);
            if gamma > 0.0 {
                self.map = self.map.mix(&vertex, gamma)?;
                self.y = self.map.apply(self.t)?;
            }
        }
        Ok(())
    }

    fn settled(&self, tol: f64) -> bool {
        self.distance() <= tol || self.lower > 10.0 * tol
    }
}

/// Decide `X ∈ W^n(T)` to tolerance `tol`.
///
/// * `Member`: a UCP map `Φ` passing validation with `‖Φ(T) − X‖_F ≤ tol`.
/// * `NonMember`: a separating functional certifies distance `> 10·tol`.
/// * `Undecided`: neither certificate was produced.
///
/// A few Frank–Wolfe steps on `min ‖X − Φ(T)‖` settle points far from the
/// boundary. Otherwise the projection of `X` onto `W^n(T)` is computed as a
/// least-squares SDP over Choi matrices; its residual direction gives the
/// separating functional. Near-members get a final SDP pinning `Φ(T) = X`
/// exactly. Every candidate map is repaired to an exactly unital one before
/// it is measured.
pub fn membership(t: &ComplexMatrix, x: &ComplexMatrix, tol: f64) -> Result<MembershipVerdict> {
    let k = t.ensure_square()?;
    let n = x.ensure_square()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if x.as_na().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut search = Search::new(t, x)?;
    for _ in 0..FW_INITIAL_ITER {
        if search.settled(tol) {
            break;
        }
        search.frank_wolfe_step()?;
    }
    if let Some(v) = verdict_from(&search, tol) {
        return Ok(v);
    }

    let scale = 1.0 + x.frobenius_norm();
    let unital = SdpProblem::new(ComplexMatrix::zeros(k * n, k * n), unital_constraints(k, n))?;
    let fit = image_constraints(t, n, x, false);
    let proj = sdp::solve_least_squares(
        &unital,
        &fit,
        PROJECTION_TOL,
        MEMBERSHIP_MAX_ITER,
        Some(search.map.choi()),
    )?;
    search.offer(normalize_unital(&ChoiMap::from_choi(k, n, proj.y)?)?)?;
    if search.distance() > tol {
        search.cut()?;
    }
    if let Some(v) = verdict_from(&search, tol) {
        return Ok(v);
    }

    let mut constraints = unital_constraints(k, n);
    constraints.extend(fit);
    let pinned = SdpProblem::new(ComplexMatrix::zeros(k * n, k * n), constraints)?;
    let start = WarmStart::from_primal(search.map.choi().clone());
    match sdp::solve_warm(&pinned, 1e-2 * tol / scale, MEMBERSHIP_MAX_ITER, Some(&start)) {
        Ok(sol) => search.offer(normalize_unital(&ChoiMap::from_choi(k, n, sol.y)?)?)?,
        Err(Error::InconsistentConstraints(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(verdict_from(&search, tol).unwrap_or(MembershipVerdict {
        status: MembershipStatus::Undecided,
        witness: None,
        distance: search.distance(),
        distance_lower_bound: search.lower,
        tol,
    }))
}

fn verdict_from(fw: &Search<'_>, tol: f64) -> Option<MembershipVerdict> {
    let distance = fw.distance();
    if distance <= tol && ucp::validate(&fw.map, tol).passes {
        Some(MembershipVerdict {
            status: MembershipStatus::Member,
            witness: Some(fw.map.clone()),
            distance,
            distance_lower_bound: 0.0,
            tol,
        })
    } else if fw.lower > 10.0 * tol {
        Some(MembershipVerdict {
            status: MembershipStatus::NonMember,
            witness: None,
            distance,
            distance_lower_bound: fw.lower,
            tol,
        })
    } else {
        None
    }
}

/// Operators whose matricial ranges have a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KnownOperator {
    /// `[[0, r], [0, 0]]`: `W^n = { B ∈ M_n : ω(B) ≤ r/2 }`.
    JordanNilpotent2 { r: f64 },
    /// Unilateral shift: `W^n = { B ∈ M_n : ‖B‖ ≤ 1 }`.
    UnilateralShift,
}

/// `W^n` of a [`KnownOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownRange {
    pub operator: KnownOperator,
    pub n: usize,
}

impl KnownRange {
    pub fn new(operator: KnownOperator, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if let KnownOperator::JordanNilpotent2 { r } = operator {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidArgument(format!("r must be finite and nonnegative, got {r}")));
            }
        }
        Ok(Self { operator, n })
    }
}

/// Closed-form membership `X ∈ W^n`, up to `tol` in the defining inequality.
pub fn known_membership(range: &KnownRange, x: &ComplexMatrix, tol: f64) -> Result<bool> {
    let n = x.ensure_square()?;
    if n != range.n {
        return Err(Error::Dimension(format!("X is {n}x{n}, range is W^{}", range.n)));
    }
    Ok(match range.operator {
        KnownOperator::JordanNilpotent2 { r } => numerical_radius(x, 1e-12)?.omega <= r / 2.0 + tol,
        KnownOperator::UnilateralShift => operator_norm(x) <= 1.0 + tol,
    })
}

/// `sup { ‖X‖_p : X ∈ W^n }` in closed form.
///
/// The shift gives `n^{1/p}` for every `p ≥ 1` (attained at `I_n`). For
/// `[[0, r], [0, 0]]` only `p = 1` (`n·r/2`) and `p = ∞` (`r` for `n ≥ 2`,
/// `r/2` for `n = 1`) are available: for `1 < p < ∞` the value
/// `(r/2)·n^{1/p}` at scalar points is beaten by `r·E₁₂`, and no closed form
/// is known.
pub fn sup_schatten_known(range: &KnownRange, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent {p} < 1")));
    }
    let n = range.n as f64;
    match range.operator {
        KnownOperator::UnilateralShift => Ok(if p.is_infinite() { 1.0 } else { n.powf(1.0 / p) }),
        KnownOperator::JordanNilpotent2 { r } => {
            if p == 1.0 {
                Ok(n * r / 2.0)
            } else if p.is_infinite() {
                Ok(if range.n == 1 { r / 2.0 } else { r })
            } else {
                Err(Error::InvalidArgument(format!(
                    "no closed form for the nilpotent range at p = {p}; only p = 1 and p = ∞"
                )))
            }
        }
    }
}

/// `Σ_j A_j* X_j A_j`, after checking `Σ_j A_j* A_j = I` to `tol`.
pub fn cstar_combination(xs: &[ComplexMatrix], coeffs: &[ComplexMatrix], tol: f64) -> Result<ComplexMatrix> {
    if xs.is_empty() || xs.len() != coeffs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} matrices but {} coefficients",
            xs.len(),
            coeffs.len()
        )));
    }
    let n = xs[0].ensure_square()?;
    let m = coeffs[0].cols();
    let mut sum = ComplexMatrix::zeros(m, m);
    let mut out = ComplexMatrix::zeros(m, m);
    for (x, a) in xs.iter().zip(coeffs) {
        if x.rows() != n || x.cols() != n || a.rows() != n || a.cols() != m {
            return Err(Error::Dimension(format!(
                "expected X_j {n}x{n} and A_j {n}x{m}, got {}x{} and {}x{}",
                x.rows(),
                x.cols(),
                a.rows(),
                a.cols()
            )));
        }
        sum = &sum + &(&a.adjoint() * a);
        out = &out + &(&(&a.adjoint() * x) * a);
    }
    let dev = sum.distance(&ComplexMatrix::identity(m));
    if dev > tol {
        return Err(Error::InvalidArgument(format!("Σ A_j* A_j deviates from I by {dev:.3e}")));
    }
    Ok(out)
}

/// Report of [`lemma_inclusion_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    /// Every eigenvalue of `S` lies in `W(T)`.
    pub spectral_side: bool,
    /// Every sampled element of `W^n(S)` was certified a member of `W^n(T)`.
    pub sampled_inclusion: bool,
    /// Samples whose membership came back `Undecided`.
    pub undecided: usize,
    /// A sampled element certified outside `W^n(T)`.
    pub counterexample: Option<ComplexMatrix>,
}

/// For normal `S`: `σ(S) ⊆ W(T)` should hold exactly when `W^n(S) ⊆ W^n(T)`.
/// The right side is sampled with `λ I_n` for each eigenvalue `λ` of `S`
/// and with `Φ(S)` for random UCP maps `Φ`.
pub fn lemma_inclusion_check(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    n: usize,
    tol: f64,
    samples: usize,
    seed: Seed,
) -> Result<InclusionReport> {
    let ks = s.ensure_square()?;
    t.ensure_square()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let dev = s.normality_deviation();
    if dev > tol.max(1e-10) * (1.0 + s.max_abs()) {
        return Err(Error::NotNormal(dev));
    }
    let eigs = spectrum(s)?;
    let spectral_side = eigs.iter().all(|&z| contains_point(t, z, tol));

    let mut candidates: Vec<ComplexMatrix> = eigs.iter().map(|&z| ComplexMatrix::scalar(n, z)).collect();
    let mut rng = rng_from_seed(seed);
    for _ in 0..samples {
        candidates.push(random_ucp_with(ks, n, ks * n, &mut rng)?.apply(s)?);
    }
    let mut undecided = 0;
    let mut counterexample = None;
    for x in candidates {
        match membership(t, &x, tol)?.status {
            MembershipStatus::Member => {}
            MembershipStatus::Undecided => undecided += 1,
            MembershipStatus::NonMember => {
                counterexample.get_or_insert(x);
            }
        }
    }
    Ok(InclusionReport {
        spectral_side,
        sampled_inclusion: undecided == 0 && counterexample.is_none(),
        undecided,
        counterexample,
    })
}

/// `W^m(W^n(T)) ⊆ W^m(T)`: for random UCP maps `Φ: M_k → M_n` and
/// `Ψ: M_n → M_m`, `Ψ(Φ(T))` must be certified a member of `W^m(T)`.
/// True when every trial passes.
pub fn composition_inclusion_check(
    t: &ComplexMatrix,
    n: usize,
    m: usize,
    trials: usize,
    tol: f64,
    seed: Seed,
) -> Result<bool> {
    let k = check_dims(t, n)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let phi = random_ucp_with(k, n, k * n, &mut rng)?;
        let psi = random_ucp_with(n, m, n * m, &mut rng)?;
        let x = psi.apply(&phi.apply(t)?)?;
        if membership(t, &x, tol)?.status != MembershipStatus::Member {
            return Ok(false);
        }
    }
    Ok(true)
}
