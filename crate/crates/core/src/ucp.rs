//! Unital completely positive maps `Φ: M_k → M_n` stored as Choi matrices.
//!
//! Convention: `J = Σ_{ab} E_ab ⊗ Φ(E_ab)`, a `(k·n)×(k·n)` matrix with entry
//! `J[(a,i),(b,j)] = Φ(E_ab)_ij` at position `(a·n + i, b·n + j)`. Then
//!
//! * `Φ(A) = Tr_in((Aᵀ ⊗ I_n) J)`, i.e. `Φ(A)_ij = Σ_ab A_ab J[(a,i),(b,j)]`;
//! * `Φ` is completely positive iff `J ⪰ 0`;
//! * `Φ` is unital iff `Tr_in J = Φ(I_k) = I_n`.
//!
//! Kraus operators are `n×k` matrices with `Φ(A) = Σ K A K*`; in this
//! convention `J = Σ vec(K) vec(K)*` with `vec(K)[(a,i)] = K_ia`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    abs, eig_hermitian, haar_isometry_with, kron, partial_trace, psd_sqrt, rng_from_seed,
    vector_norm, ComplexMatrix, MatrixFile, Seed, Subsystem, C64,
};

/// Kraus extraction drops Choi eigenvalues below this fraction of `Tr J`.
pub const KRAUS_CUTOFF: f64 = 1e-10;

/// A linear map `M_k → M_n` given by its Choi matrix. Constructors in this
/// module only produce unital completely positive maps; [`ChoiMap::from_choi`]
/// accepts anything of the right shape so that [`validate`] can inspect it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiFile", into = "ChoiFile")]
pub struct ChoiMap {
    k: usize,
    n: usize,
    choi: ComplexMatrix,
}

/// JSON layout: the Choi matrix in the matrix file format plus `k` and `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiFile {
    pub k: usize,
    pub n: usize,
    #[serde(flatten)]
    pub matrix: MatrixFile,
}

impl TryFrom<ChoiFile> for ChoiMap {
    type Error = Error;

    fn try_from(f: ChoiFile) -> Result<Self> {
        ChoiMap::from_choi(f.k, f.n, ComplexMatrix::try_from(f.matrix)?)
    }
}

impl From<ChoiMap> for ChoiFile {
    fn from(m: ChoiMap) -> Self {
        ChoiFile {
            k: m.k,
            n: m.n,
            matrix: m.choi.into(),
        }
    }
}

impl ChoiMap {
    pub fn from_choi(k: usize, n: usize, choi: ComplexMatrix) -> Result<Self> {
        if k == 0 || n == 0 || choi.rows() != k * n || choi.cols() != k * n {
            return Err(Error::Dimension(format!(
                "Choi matrix of M_{k} → M_{n} must be {0}x{0}, got {1}x{2}",
                k * n,
                choi.rows(),
                choi.cols()
            )));
        }
        Ok(Self { k, n, choi })
    }

    /// Input dimension `k`.
    pub fn input_dim(&self) -> usize {
        self.k
    }

    /// Output dimension `n`.
    pub fn output_dim(&self) -> usize {
        self.n
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix {
        self.choi
    }

    /// The identity map on `M_k`.
    pub fn identity(k: usize) -> Self {
        from_kraus(&[ComplexMatrix::identity(k)]).expect("identity is unital")
    }

    /// `A ↦ (Tr A / k) I_n`, whose Choi matrix is `I_{kn}/k`.
    pub fn maximally_mixed(k: usize, n: usize) -> Self {
        Self {
            k,
            n,
            choi: ComplexMatrix::identity(k * n).scale_real(1.0 / k as f64),
        }
    }

    /// `Φ(A)`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        apply(self, a)
    }

    /// Convex combination `(1 − t)·self + t·other`; unital CP maps form a
    /// convex set.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::Dimension("mixing maps of different shapes".into()));
        }
        Ok(Self {
            k: self.k,
            n: self.n,
            choi: &self.choi.scale_real(1.0 - t) + &other.choi.scale_real(t),
        })
    }

    /// `Tr_in J`, which is `Φ(I_k)`.
    pub fn unit_image(&self) -> ComplexMatrix {
        partial_trace(&self.choi, self.k, self.n, Subsystem::Input).expect("shape checked at construction")
    }
}

/// `Φ(A) = Tr_in((Aᵀ ⊗ I_n) J)`, evaluated entrywise without forming the
/// Kronecker product.
pub fn apply(phi: &ChoiMap, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (k, n) = (phi.k, phi.n);
    if a.rows() != k || a.cols() != k {
        return Err(Error::Dimension(format!(
            "map acts on M_{k}, argument is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let j = phi.choi.as_na();
    let a = a.as_na();
    Ok(ComplexMatrix::from_fn(n, n, |i, jj| {
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..k {
            for y in 0..k {
                acc += a[(x, y)] * j[(x * n + i, y * n + jj)];
            }
        }
        acc
    }))
}

/// Complete positivity and unitality diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub passes: bool,
    /// Smallest eigenvalue of `J`.
    pub psd_floor: f64,
    /// `‖Tr_in J − I_n‖_F`.
    pub unitality_residual: f64,
}

pub fn validate(phi: &ChoiMap, tol: f64) -> Validation {
    let hermitian_dev = phi.choi.hermitian_deviation();
    let psd_floor = match eig_hermitian(&phi.choi, f64::INFINITY) {
        Ok(e) => e.min_value() - hermitian_dev,
        Err(_) => f64::NEG_INFINITY,
    };
    let unitality_residual = phi.unit_image().distance(&ComplexMatrix::identity(phi.n));
    Validation {
        passes: psd_floor >= -tol && unitality_residual <= tol && hermitian_dev <= tol,
        psd_floor,
        unitality_residual,
    }
}

fn ensure_valid(phi: &ChoiMap, tol: f64) -> Result<()> {
    let v = validate(phi, tol);
    if v.psd_floor < -tol {
        return Err(Error::NotCompletelyPositive(v.psd_floor));
    }
    if v.unitality_residual > tol {
        return Err(Error::NotUnital(v.unitality_residual));
    }
    Ok(())
}

/// Choi matrix of `A ↦ Σ K A K*` for `n×k` Kraus operators with
/// `Σ K K* = I_n`.
pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<ChoiMap> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
    let (n, k) = (first.rows(), first.cols());
    let mut unit = ComplexMatrix::zeros(n, n);
    let mut choi = ComplexMatrix::zeros(k * n, k * n).into_na();
    for op in kraus {
        if op.rows() != n || op.cols() != k {
            return Err(Error::Dimension("Kraus operators of different shapes".into()));
        }
        unit = &unit + &(op * &op.adjoint());
        let v: Vec<C64> = (0..k * n).map(|idx| op[(idx % n, idx / n)]).collect();
        for r in 0..k * n {
            for c in 0..k * n {
                choi[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    let residual = unit.distance(&ComplexMatrix::identity(n));
    if residual > 1e-8 {
        return Err(Error::NotUnital(residual));
    }
    Ok(ChoiMap {
        k,
        n,
        choi: ComplexMatrix::from_na(choi),
    })
}

/// `Φ(A) = V*(A ⊗ I_r)V` with an isometry `V: C^n → C^k ⊗ C^r`.
#[derive(Debug, Clone)]
pub struct StinespringForm {
    /// `(k·r)×n` isometry; row `(a, m)` sits at `a·r + m`.
    pub v: ComplexMatrix,
    /// Multiplicity (Kraus rank).
    pub r: usize,
    /// The `r` Kraus operators (`n×k`) the isometry is stacked from.
    pub kraus: Vec<ComplexMatrix>,
}

impl StinespringForm {
    pub fn input_dim(&self) -> usize {
        self.v.rows() / self.r
    }

    /// `V*(A ⊗ I_r)V`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.rows() * self.r != self.v.rows() || !a.is_square() {
            return Err(Error::Dimension("argument does not match the dilation".into()));
        }
        let pi = kron(a, &ComplexMatrix::identity(self.r));
        Ok(&(&self.v.adjoint() * &pi) * &self.v)
    }

    /// Builds the dilation from Kraus operators with `Σ K K* = I_n`.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let r = kraus.len();
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (n, k) = (first.rows(), first.cols());
        let v = ComplexMatrix::from_fn(k * r, n, |row, i| {
            let (a, m) = (row / r, row % r);
            kraus[m][(i, a)].conj()
        });
        Ok(Self { v, r, kraus })
    }
}

/// Minimal Stinespring dilation from the eigendecomposition of `J`.
pub fn stinespring(phi: &ChoiMap, tol: f64) -> Result<StinespringForm> {
    ensure_valid(phi, tol)?;
    let (k, n) = (phi.k, phi.n);
    let eig = eig_hermitian(&phi.choi, f64::INFINITY)?;
    let cutoff = KRAUS_CUTOFF * phi.choi.trace().re;
    let mut kraus = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate().rev() {
        if lam <= cutoff {
            continue;
        }
        let w = eig.vectors.column(idx);
        let s = lam.sqrt();
        kraus.push(ComplexMatrix::from_fn(n, k, |i, a| w[a * n + i] * s));
    }
    if kraus.is_empty() {
        return Err(Error::NotCompletelyPositive(eig.max_value()));
    }
    StinespringForm::from_kraus(kraus)
}

/// Random UCP map `A ↦ V*(A ⊗ I_r)V` for a Haar isometry `V`.
pub fn random_ucp(k: usize, n: usize, r: usize, seed: Seed) -> Result<ChoiMap> {
    random_ucp_with(k, n, r, &mut rng_from_seed(seed))
}

pub fn random_ucp_with<R: rand::Rng + ?Sized>(k: usize, n: usize, r: usize, rng: &mut R) -> Result<ChoiMap> {
    if k == 0 || n == 0 || r == 0 || k * r < n {
        return Err(Error::InvalidArgument(format!(
            "random UCP map needs k·r >= n, got k={k}, n={n}, r={r}"
        )));
    }
    let v = haar_isometry_with(k * r, n, rng)?;
    from_isometry(&v, k, r)
}

/// The map `A ↦ V*(A ⊗ I_r)V` for an isometry `V: C^n → C^k ⊗ C^r`, with rows
/// of `V` indexed by `(a, m) ↦ a·r + m`.
pub fn from_isometry(v: &ComplexMatrix, k: usize, r: usize) -> Result<ChoiMap> {
    if v.rows() != k * r || r == 0 {
        return Err(Error::Dimension(format!(
            "isometry has {} rows, expected {k}·{r}",
            v.rows()
        )));
    }
    let n = v.cols();
    let kraus: Vec<ComplexMatrix> = (0..r)
        .map(|m| ComplexMatrix::from_fn(n, k, |i, a| v[(a * r + m, i)].conj()))
        .collect();
    from_kraus(&kraus)
}

/// `Φ_x(Z) = ⟨Zx, x⟩ I_n`.
pub fn state_map(x: &[C64], n: usize) -> Result<ChoiMap> {
    let norm = vector_norm(x);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("state vector has norm {norm}")));
    }
    let k = x.len();
    let w: Vec<C64> = x.iter().map(|z| z.conj()).collect();
    let outer = ComplexMatrix::from_fn(k, k, |a, b| w[a] * w[b].conj());
    Ok(ChoiMap {
        k,
        n,
        choi: kron(&outer, &ComplexMatrix::identity(n)),
    })
}


/// `Ψ ∘ Φ` for `Φ: M_k → M_n`, `Ψ: M_n → M_m`.
pub fn compose(psi: &ChoiMap, phi: &ChoiMap) -> Result<ChoiMap> {
    if psi.k != phi.n {
        return Err(Error::Dimension(format!(
            "cannot compose M_{} → M_{} after M_{} → M_{}",
            psi.k, psi.n, phi.k, phi.n
        )));
    }
    let (k, m) = (phi.k, psi.n);
    let mut choi = ComplexMatrix::zeros(k * m, k * m).into_na();
    for a in 0..k {
        for b in 0..k {
            let img = apply(psi, &apply(phi, &ComplexMatrix::unit(k, k, a, b))?)?;
            for i in 0..m {
                for j in 0..m {
                    choi[(a * m + i, b * m + j)] = img[(i, j)];
                }
            }
        }
    }
    Ok(ChoiMap {
        k,
        n: m,
        choi: ComplexMatrix::from_na(choi),
    })
}

/// `λ_min(Φ(|T|²)^{1/2} − |Φ(T)|)`, nonnegative for every unital CP map.
pub fn kadison_schwarz_gap(phi: &ChoiMap, t: &ComplexMatrix) -> Result<f64> {
    ensure_valid(phi, 1e-8)?;
    let t_sq = &t.adjoint() * t;
    let lhs = psd_sqrt(&apply(phi, &t_sq)?)?;
    let rhs = abs(&apply(phi, t)?)?;
    let diff = (&lhs - &rhs).hermitian_part();
    Ok(eig_hermitian(&diff, f64::INFINITY)?.min_value())
}

/// Congruence `J ↦ (I ⊗ M^{-1/2}) J (I ⊗ M^{-1/2})` with `M = Tr_in J`, which
/// turns any PSD `J` with invertible `Tr_in J` into an exactly unital map.
/// Negative eigenvalues of `J` are clipped first.
pub fn normalize_unital(phi: &ChoiMap) -> Result<ChoiMap> {
    let (k, n) = (phi.k, phi.n);
    let eig = eig_hermitian(&phi.choi, 1e-6 * (1.0 + phi.choi.max_abs()))?;
    let psd = eig.map_values(|x| x.max(0.0));
    let unit = partial_trace(&psd, k, n, Subsystem::Input)?;
    let ue = eig_hermitian(&unit, 1e-8)?;
    if ue.min_value() <= 1e-12 {
        return Err(Error::NotUnital(ue.min_value()));
    }
    let inv_sqrt = ue.map_values(|x| 1.0 / x.sqrt());
    let s = kron(&ComplexMatrix::identity(k), &inv_sqrt);
    let choi = (&(&s * &psd) * &s).hermitian_part();
    Ok(ChoiMap { k, n, choi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ginibre, random_matrix, random_unit_vector, random_unitary};

    fn jordan() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()
    }

    /// `Tr_in((Aᵀ ⊗ I) J)`, the defining formula, computed the long way.
    fn apply_by_definition(phi: &ChoiMap, a: &ComplexMatrix) -> ComplexMatrix {
        let big = &kron(&a.transpose(), &ComplexMatrix::identity(phi.n)) * phi.choi();
        partial_trace(&big, phi.k, phi.n, Subsystem::Input).unwrap()
    }

    fn kraus_apply(kraus: &[ComplexMatrix], a: &ComplexMatrix) -> ComplexMatrix {
        kraus
            .iter()
            .map(|k| &(k * a) * &k.adjoint())
            .reduce(|x, y| &x + &y)
            .unwrap()
    }

    #[test]
    fn identity_map_choi() {
        let phi = ChoiMap::identity(3);
        let mut want = ComplexMatrix::zeros(9, 9);
        for i in 0..3 {
            for j in 0..3 {
                want = &want + &kron(&ComplexMatrix::unit(3, 3, i, j), &ComplexMatrix::unit(3, 3, i, j));
            }
        }
        assert!(phi.choi().max_abs_diff(&want) < 1e-15);
        let mut rng = rng_from_seed(1);
        let a = ginibre(3, 3, &mut rng);
        assert!(phi.apply(&a).unwrap().max_abs_diff(&a) < 1e-14);
        let v = validate(&phi, 1e-12);
        assert!(v.passes && v.unitality_residual == 0.0);
    }

    #[test]
    fn apply_matches_defining_formula() {
        let mut rng = rng_from_seed(2);
        let phi = random_ucp_with(3, 2, 2, &mut rng).unwrap();
        let a = ginibre(3, 3, &mut rng);
        assert!(phi.apply(&a).unwrap().max_abs_diff(&apply_by_definition(&phi, &a)) < 1e-13);
        assert!(matches!(phi.apply(&ginibre(2, 2, &mut rng)), Err(Error::Dimension(_))));
    }

    #[test]
    fn state_map_via_kraus() {
        let mut rng = rng_from_seed(3);
        let (k, n) = (3, 2);
        let x = random_unit_vector(k, &mut rng);
        let kraus: Vec<ComplexMatrix> = (0..n)
            .map(|j| ComplexMatrix::from_fn(n, k, |i, a| if i == j { x[a].conj() } else { C64::new(0.0, 0.0) }))
            .collect();
        let phi = from_kraus(&kraus).unwrap();
        let direct = state_map(&x, n).unwrap();
        assert!(phi.choi().max_abs_diff(direct.choi()) < 1e-14);
        let z = ginibre(k, k, &mut rng);
        let want = ComplexMatrix::scalar(n, z.quadratic_form(&x));
        assert!(phi.apply(&z).unwrap().max_abs_diff(&want) < 1e-10);
        assert!(phi.apply(&z).unwrap().max_abs_diff(&kraus_apply(&kraus, &z)) < 1e-10);
    }

    #[test]
    fn unitary_conjugation_choi() {
        let mut rng = rng_from_seed(4);
        let u = random_unitary(2, &mut rng);
        let phi = from_kraus(&[u.clone()]).unwrap();
        let id = ChoiMap::identity(2);
        let lift = kron(&ComplexMatrix::identity(2), &u);
        let want = &(&lift * id.choi()) * &lift.adjoint();
        assert!(phi.choi().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn from_kraus_rejects_non_unital() {
        let k = ComplexMatrix::identity(2).scale_real(0.9);
        assert!(matches!(from_kraus(&[k]), Err(Error::NotUnital(_))));
        assert!(from_kraus(&[]).is_err());
    }

    #[test]
    fn apply_examples() {
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let phi = state_map(&x, 2).unwrap();
        assert!(phi
            .apply(&ComplexMatrix::unit(2, 2, 0, 0))
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(2))
            < 1e-15);
        assert!(phi.apply(&jordan()).unwrap().max_abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let phi = state_map(&x, 2).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(phi.apply(&jordan()).unwrap().max_abs_diff(&half) < 1e-15);

        let rnd = random_ucp(3, 2, 2, 9).unwrap();
        assert!(rnd
            .apply(&ComplexMatrix::identity(3))
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(2))
            < 1e-8);
        assert!(state_map(&[C64::new(2.0, 0.0)], 1).is_err());
    }

    #[test]
    fn validate_catches_violations() {
        // J = diag(1, 1, 0, 0); push one kernel direction to −0.01.
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let phi = state_map(&x, 2).unwrap();
        let bump = ComplexMatrix::unit(4, 4, 3, 3).scale_real(-0.01);
        let broken = ChoiMap::from_choi(2, 2, phi.choi() + &bump).unwrap();
        let v = validate(&broken, 1e-9);
        assert!(!v.passes);
        assert!((v.psd_floor + 0.01).abs() < 1e-12);

        // Transpose map: Choi matrix is SWAP, eigenvalues ±1.
        let swap = ComplexMatrix::from_fn(4, 4, |r, c| {
            let (a, i) = (r / 2, r % 2);
            let (b, j) = (c / 2, c % 2);
            if a == j && i == b {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let transpose = ChoiMap::from_choi(2, 2, swap).unwrap();
        let t = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(transpose.apply(&t).unwrap(), t.transpose());
        let v = validate(&transpose, 1e-9);
        assert!(!v.passes);
        assert!((v.psd_floor + 1.0).abs() < 1e-12);
        assert!(v.unitality_residual < 1e-15);
    }

    #[test]
    fn stinespring_examples() {
        let id = stinespring(&ChoiMap::identity(3), 1e-9).unwrap();
        assert_eq!(id.r, 1);
        assert!((&id.v.adjoint() * &id.v).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        let mut rng = rng_from_seed(5);
        let a = ginibre(3, 3, &mut rng);
        assert!(id.apply(&a).unwrap().max_abs_diff(&a) < 1e-10);

        let x = random_unit_vector(3, &mut rng);
        let sm = stinespring(&state_map(&x, 2).unwrap(), 1e-9).unwrap();
        assert_eq!(sm.r, 2);

        let phi = random_ucp(3, 2, 2, 17).unwrap();
        let st = stinespring(&phi, 1e-9).unwrap();
        assert_eq!(st.r, 2);
        assert!((&st.v.adjoint() * &st.v).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
        let a = ginibre(3, 3, &mut rng);
        assert!(st.apply(&a).unwrap().max_abs_diff(&phi.apply(&a).unwrap()) < 1e-8);
        let back = from_kraus(&st.kraus).unwrap();
        assert!(back.choi().max_abs_diff(phi.choi()) < 1e-7);

        let swap_like = ChoiMap::from_choi(1, 1, ComplexMatrix::identity(1).scale_real(-1.0)).unwrap();
        assert!(stinespring(&swap_like, 1e-9).is_err());
    }

    #[test]
    fn random_ucp_examples() {
        let phi = random_ucp(2, 2, 1, 3).unwrap();
        let st = stinespring(&phi, 1e-9).unwrap();
        assert_eq!(st.r, 1);
        let u = &st.kraus[0];
        assert!((&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);

        let phi = random_ucp(2, 3, 2, 4).unwrap();
        assert!(validate(&phi, 1e-9).passes);
        assert_eq!(random_ucp(2, 3, 2, 4).unwrap(), phi);
        assert!(random_ucp(2, 3, 1, 4).is_err());
    }

    #[test]
    fn compose_examples() {
        let phi = random_ucp(3, 2, 3, 6).unwrap();
        let c = compose(&ChoiMap::identity(2), &phi).unwrap();
        assert!(c.choi().max_abs_diff(phi.choi()) < 1e-14);

        let mut rng = rng_from_seed(7);
        let y = random_unit_vector(2, &mut rng);
        let sy = state_map(&y, 3).unwrap();
        let c = compose(&sy, &phi).unwrap();
        let a = ginibre(3, 3, &mut rng);
        let want = ComplexMatrix::scalar(3, phi.apply(&a).unwrap().quadratic_form(&y));
        assert!(c.apply(&a).unwrap().max_abs_diff(&want) < 1e-10);

        let psi = random_ucp(2, 4, 2, 8).unwrap();
        let c = compose(&psi, &phi).unwrap();
        assert!(validate(&c, 1e-8).passes);
        assert!(c
            .apply(&a)
            .unwrap()
            .max_abs_diff(&psi.apply(&phi.apply(&a).unwrap()).unwrap())
            < 1e-8);
        assert!(compose(&phi, &phi).is_err());
    }

    #[test]
    fn kadison_schwarz_examples() {
        let mut rng = rng_from_seed(10);
        let d = ComplexMatrix::from_diagonal(&[C64::new(1.0, 1.0), C64::new(-2.0, 0.0), C64::new(0.0, 0.5)]);
        let u = random_unitary(3, &mut rng);
        let normal = &(&u.adjoint() * &d) * &u;
        let gap = kadison_schwarz_gap(&ChoiMap::identity(3), &normal).unwrap();
        assert!(gap.abs() < 1e-9, "{gap}");

        let t = random_matrix(3, &mut rng);
        let x = random_unit_vector(3, &mut rng);
        let gap = kadison_schwarz_gap(&state_map(&x, 2).unwrap(), &t).unwrap();
        let tx = t.mul_vec(&x);
        let want = vector_norm(&tx) - t.quadratic_form(&x).norm();
        assert!((gap - want).abs() < 1e-10);
        assert!(want >= 0.0);

        let broken = ChoiMap::from_choi(3, 1, ComplexMatrix::identity(3)).unwrap();
        assert!(kadison_schwarz_gap(&broken, &t).is_err());
    }

    #[test]
    fn normalize_unital_repairs_scaling() {
        let phi = random_ucp(3, 2, 2, 12).unwrap();
        let lift = kron(
            &ComplexMatrix::identity(3),
            &ComplexMatrix::from_real_rows(&[[1.1, 0.05], [0.05, 0.9]]).unwrap(),
        );
        let skewed = ChoiMap::from_choi(3, 2, &(&lift * phi.choi()) * &lift).unwrap();
        assert!(!validate(&skewed, 1e-6).passes);
        let fixed = normalize_unital(&skewed).unwrap();
        let v = validate(&fixed, 1e-12);
        assert!(v.passes, "{v:?}");
    }

    #[test]
    fn json_layout() {
        let phi = ChoiMap::identity(1);
        let s = serde_json::to_string(&phi).unwrap();
        assert_eq!(s, r#"{"k":1,"n":1,"rows":1,"cols":1,"data":[[1.0,0.0]]}"#);
        let back: ChoiMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
        assert!(serde_json::from_str::<ChoiMap>(r#"{"k":2,"n":1,"rows":1,"cols":1,"data":[[1.0,0.0]]}"#).is_err());
    }
}
