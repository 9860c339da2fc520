//! Property batteries over seeded random instances.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use clap::ValueEnum;
use mrk_core::matrange::{
    composition_inclusion_check, cstar_combination, lemma_inclusion_check, membership, nu_n, omega_n,
    sup_inner_radius, MembershipStatus, DEFAULT_RESTARTS, SDP_TOL,
};
use mrk_core::matrix::{
    complex_gaussian, haar_isometry_with, operator_norm, random_matrix, random_unitary, rng_from_seed,
    schatten_norm, spectrum, ComplexMatrix, Rng64, Seed, C64,
};
use mrk_core::numrange::{boundary_points, numerical_radius, state_radius_sdp, support_violation};
use mrk_core::ucp::{self, from_kraus, random_ucp_with, validate};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{to_value, CliError, Outcome};

const MEMBER_TOL: f64 = 1e-6;
const BOUNDARY_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    #[value(name = "theoremA")]
    TheoremA,
    #[value(name = "theoremB")]
    TheoremB,
    #[value(name = "theoremC")]
    TheoremC,
    Nu,
    Omega,
    Cstar,
    Lemma,
    All,
}

impl Suite {
    const EACH: [Suite; 7] = [
        Suite::TheoremA,
        Suite::TheoremB,
        Suite::TheoremC,
        Suite::Nu,
        Suite::Omega,
        Suite::Cstar,
        Suite::Lemma,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::TheoremA => "theoremA",
            Suite::TheoremB => "theoremB",
            Suite::TheoremC => "theoremC",
            Suite::Nu => "nu",
            Suite::Omega => "omega",
            Suite::Cstar => "cstar",
            Suite::Lemma => "lemma",
            Suite::All => "all",
        }
    }
}

/// One checked property: the worst residual over all checks must not exceed
/// `tolerance`. Status properties count mismatches against a tolerance of 0.
#[derive(Debug, Serialize)]
struct Property {
    suite: &'static str,
    name: &'static str,
    tolerance: f64,
    worst: f64,
    checks: usize,
    pass: bool,
    /// First instance whose residual exceeded the tolerance.
    offending: Option<Value>,
}

impl Property {
    fn new(suite: Suite, name: &'static str, tolerance: f64) -> Self {
        Property {
            suite: suite.name(),
            name,
            tolerance,
            worst: 0.0,
            checks: 0,
            pass: true,
            offending: None,
        }
    }

    fn observe(&mut self, residual: f64, instance: impl FnOnce() -> Value) {
        self.checks += 1;
        let r = if residual.is_nan() { f64::INFINITY } else { residual.abs() };
        self.worst = self.worst.max(r);
        if r > self.tolerance && self.pass {
            self.pass = false;
            self.offending = Some(instance());
        }
    }

    fn mismatch(&mut self, ok: bool, instance: impl FnOnce() -> Value) {
        self.observe(if ok { 0.0 } else { 1.0 }, instance);
    }
}

/// Instance parameters shared by every suite.
struct Draw {
    k: Option<usize>,
    n: Option<usize>,
}

struct Trial {
    seed: Seed,
    k: usize,
    n: usize,
}

impl Trial {
    fn new(base: Seed, suite: Suite, index: usize, draw: &Draw) -> (Self, Rng64) {
        let seed = base ^ ((suite as u64 + 1) << 40) ^ index as u64;
        let mut rng = rng_from_seed(seed);
        let k = draw.k.unwrap_or_else(|| rng.random_range(2..=4));
        let n = draw.n.unwrap_or_else(|| rng.random_range(1..=3));
        (Trial { seed, k, n }, rng)
    }

    fn record(&self, t: &ComplexMatrix, extra: Value) -> Value {
        json!({ "trial_seed": self.seed, "k": self.k, "n": self.n, "T": t, "extra": extra })
    }
}

fn omega(t: &ComplexMatrix) -> Result<f64, CliError> {
    Ok(numerical_radius(t, 1e-12)?.omega)
}

fn random_normal(k: usize, rng: &mut Rng64, scale: f64) -> ComplexMatrix {
    let u = random_unitary(k, rng);
    let d: Vec<C64> = (0..k).map(|_| complex_gaussian(rng) * scale).collect();
    &(&u * &ComplexMatrix::from_diagonal(&d)) * &u.adjoint()
}

fn theorem_a(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::TheoremA;
    let mut translation = Property::new(s, "translation", 1e-8);
    let mut unitary = Property::new(s, "unitary invariance", 1e-8);
    let mut spectral = Property::new(s, "spectrum containment", 1e-7);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let t = random_matrix(tr.k, &mut rng);
        let u = random_unitary(tr.k, &mut rng);
        let conj = &(&u.adjoint() * &t) * &u;
        // Rotating β by whole grid steps shifts the boundary grid by that many indices.
        let alpha = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let shift = rng.random_range(0..BOUNDARY_POINTS);
        let beta = C64::from_polar(rng.random_range(0.2..2.0), TAU * shift as f64 / BOUNDARY_POINTS as f64);
        let affine = &ComplexMatrix::scalar(tr.k, alpha) + &t.scale(beta);
        let base = boundary_points(&t, BOUNDARY_POINTS)?;
        let moved = boundary_points(&affine, BOUNDARY_POINTS)?;
        let dev = moved
            .iter()
            .enumerate()
            .map(|(j, z)| (z - (alpha + beta * base[(j + shift) % BOUNDARY_POINTS])).norm())
            .fold(0.0, f64::max);
        translation.observe(dev, || tr.record(&t, json!({ "alpha": alpha, "beta": beta })));
        let dev = boundary_points(&conj, BOUNDARY_POINTS)?
            .iter()
            .zip(&base)
            .map(|(z, w)| (z - w).norm())
            .fold(0.0, f64::max);
        unitary.observe(dev, || tr.record(&t, json!({ "U": u })));
        let mut worst: f64 = 0.0;
        for lam in spectrum(&t)? {
            worst = worst.max(support_violation(&t, lam)?);
        }
        spectral.observe(worst.max(0.0), || tr.record(&t, Value::Null));
    }
    Ok(vec![translation, unitary, spectral])
}

fn theorem_b(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::TheoremB;
    let mut adjoint = Property::new(s, "adjoint", 1e-8);
    let mut unitary = Property::new(s, "unitary invariance", 1e-8);
    let mut sandwich = Property::new(s, "norm sandwich", 1e-8);
    let mut normal = Property::new(s, "normal equality", 1e-8);
    let mut direct = Property::new(s, "direct sum", 1e-8);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let t = random_matrix(tr.k, &mut rng);
        let w = omega(&t)?;
        adjoint.observe(omega(&t.adjoint())? - w, || tr.record(&t, Value::Null));
        let u = random_unitary(tr.k, &mut rng);
        let conj = &(&u.adjoint() * &t) * &u;
        unitary.observe(omega(&conj)? - w, || tr.record(&t, json!({ "U": u })));
        let norm = operator_norm(&t);
        sandwich.observe((0.5 * norm - w).max(w - norm).max(0.0), || tr.record(&t, Value::Null));
        let nt = random_normal(tr.k, &mut rng, 1.0);
        normal.observe(omega(&nt)? - operator_norm(&nt), || tr.record(&nt, Value::Null));
        let other = random_matrix(2, &mut rng);
        let dev = omega(&t.direct_sum(&other))? - w.max(omega(&other)?);
        direct.observe(dev, || tr.record(&t, json!({ "S": other })));
    }
    Ok(vec![adjoint, unitary, sandwich, normal, direct])
}

fn theorem_c(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::TheoremC;
    let mut adjoint_w = Property::new(s, "adjoint witness", 1e-8);
    let mut adjoint_o = Property::new(s, "adjoint oracle", 0.0);
    let mut unitary_w = Property::new(s, "unitary witness", 1e-8);
    let mut unitary_o = Property::new(s, "unitary oracle", 0.0);
    let mut scalar = Property::new(s, "scalar image", 1e-8);
    let mut affine_w = Property::new(s, "affine witness", 1e-8);
    let mut affine_o = Property::new(s, "affine oracle", 0.0);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let (k, n) = (tr.k, tr.n);
        let t = random_matrix(k, &mut rng);
        let phi = random_ucp_with(k, n, k * n, &mut rng)?;
        let x = phi.apply(&t)?;
        let rec = |extra: Value| tr.record(&t, extra);

        // W^n(T*) = {X* : X ∈ W^n(T)}
        adjoint_w.observe(phi.apply(&t.adjoint())?.max_abs_diff(&x.adjoint()), || rec(json!({ "map": phi })));
        let outside = &x + &ComplexMatrix::scalar(n, C64::new(0.0, 2.0 * operator_norm(&t) + 1.0));
        for (y, expect) in [(&x, MembershipStatus::Member), (&outside, MembershipStatus::NonMember)] {
            let s1 = membership(&t, y, MEMBER_TOL)?.status;
            let s2 = membership(&t.adjoint(), &y.adjoint(), MEMBER_TOL)?.status;
            adjoint_o.mismatch(s1 == expect && s2 == expect, || rec(json!({ "X": y, "expected": expect })));
        }

        // W^n(U*TU) = W^n(T), witnessed by Φ ∘ Ad_U.
        let u = random_unitary(k, &mut rng);
        let conj = &(&u.adjoint() * &t) * &u;
        let composed = ucp::compose(&phi, &from_kraus(std::slice::from_ref(&u))?)?;
        unitary_w.observe(composed.apply(&conj)?.max_abs_diff(&x), || rec(json!({ "map": phi, "U": u })));
        let st = membership(&conj, &x, MEMBER_TOL)?.status;
        unitary_o.mismatch(st == MembershipStatus::Member, || rec(json!({ "X": x, "U": u })));

        // W^n(αI) = {αI_n}; W^n(βT + αI) = βW^n(T) + αI_n with the same witness.
        let alpha = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let beta = C64::from_polar(rng.random_range(0.2..2.0), rng.random_range(0.0..TAU));
        let image = phi.apply(&ComplexMatrix::scalar(k, alpha))?;
        scalar.observe(image.max_abs_diff(&ComplexMatrix::scalar(n, alpha)), || rec(json!({ "alpha": alpha })));
        let ta = &t.scale(beta) + &ComplexMatrix::scalar(k, alpha);
        let xa = &x.scale(beta) + &ComplexMatrix::scalar(n, alpha);
        let v = membership(&t, &x, MEMBER_TOL)?;
        match v.witness {
            Some(w) => {
                let excess = w.apply(&ta)?.distance(&xa) - beta.norm() * MEMBER_TOL;
                affine_w.observe(excess.max(0.0), || rec(json!({ "X": x, "alpha": alpha, "beta": beta })));
            }
            None => affine_w.observe(f64::INFINITY, || rec(json!({ "X": x, "verdict": v }))),
        }
        let st = membership(&ta, &xa, MEMBER_TOL)?.status;
        affine_o.mismatch(st == MembershipStatus::Member, || {
            rec(json!({ "X": x, "alpha": alpha, "beta": beta }))
        });
    }
    Ok(vec![adjoint_w, adjoint_o, unitary_w, unitary_o, scalar, affine_w, affine_o])
}

fn nu_suite(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::Nu;
    let mut equality = Property::new(s, "nu^n = n omega", 1e-4);
    let mut unitary = Property::new(s, "unitary invariance", 1e-5);
    let mut adjoint = Property::new(s, "adjoint invariance", 1e-5);
    let mut state = Property::new(s, "nu^1 = state radius", 1e-5);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let n = tr.n;
        let t = random_matrix(tr.k, &mut rng);
        let target = n as f64 * omega(&t)?;
        let res = nu_n(&t, n, SDP_TOL)?;
        let dev = (res.value - target).abs().max((res.search_value - target).abs());
        equality.observe(dev, || tr.record(&t, json!({ "nu": res.value, "search": res.search_value })));
        let u = random_unitary(tr.k, &mut rng);
        let conj = &(&u.adjoint() * &t) * &u;
        unitary.observe(nu_n(&conj, n, SDP_TOL)?.value - res.value, || tr.record(&t, json!({ "U": u })));
        adjoint.observe(nu_n(&t.adjoint(), n, SDP_TOL)?.value - res.value, || tr.record(&t, Value::Null));
        let level_one = if n == 1 { res.value } else { nu_n(&t, 1, SDP_TOL)?.value };
        state.observe(level_one - state_radius_sdp(&t)?, || tr.record(&t, Value::Null));
    }
    Ok(vec![equality, unitary, adjoint, state])
}

fn omega_suite(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::Omega;
    let mut equality = Property::new(s, "omega^n = n omega", 1e-4);
    let mut inner = Property::new(s, "inner radius = omega", 1e-4);
    let mut hierarchy = Property::new(s, "nu^n <= omega^n <= n norm", 1e-5);
    let mut witness = Property::new(s, "witness reproduces value", 1e-6);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let n = tr.n;
        let t = random_matrix(tr.k, &mut rng);
        let w = omega(&t)?;
        let om = omega_n(&t, n, SDP_TOL, DEFAULT_RESTARTS)?;
        let dev = (om.value - n as f64 * w).abs().max((om.search_value - n as f64 * w).abs());
        equality.observe(dev, || tr.record(&t, json!({ "omega_n": om.value, "search": om.search_value })));
        let ir = sup_inner_radius(&t, n, SDP_TOL, DEFAULT_RESTARTS)?;
        let dev = (ir.value - w).abs().max((ir.search_value - w).abs());
        inner.observe(dev, || tr.record(&t, json!({ "inner": ir.value })));
        let nu = nu_n(&t, n, SDP_TOL)?.value;
        let excess = (nu - om.value).max(om.value - n as f64 * operator_norm(&t)).max(0.0);
        hierarchy.observe(excess, || tr.record(&t, json!({ "nu": nu, "omega_n": om.value })));
        let reproduced = if validate(&om.witness, MEMBER_TOL).passes {
            (schatten_norm(&om.witness.apply(&t)?, 1.0)? - om.value).abs()
        } else {
            f64::INFINITY
        };
        witness.observe(reproduced, || tr.record(&t, json!({ "witness": om.witness })));
    }
    Ok(vec![equality, inner, hierarchy, witness])
}

fn cstar_suite(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::Cstar;
    let mut combos = Property::new(s, "C*-combinations stay in range", 0.0);
    let mut composition = Property::new(s, "composition inclusion", 0.0);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let (k, n) = (tr.k, tr.n);
        let t = random_matrix(k, &mut rng);
        let m = rng.random_range(2..=3usize);
        let mut xs = Vec::with_capacity(m);
        for _ in 0..m {
            let r = rng.random_range(n.div_ceil(k)..=k * n);
            xs.push(random_ucp_with(k, n, r, &mut rng)?.apply(&t)?);
        }
        // Blocks of an isometry C^n → C^{mn} satisfy Σ A_j* A_j = I.
        let v = haar_isometry_with(m * n, n, &mut rng)?;
        let coeffs: Vec<ComplexMatrix> = (0..m)
            .map(|j| ComplexMatrix::from_fn(n, n, |a, b| v[(j * n + a, b)]))
            .collect();
        let x = cstar_combination(&xs, &coeffs, 1e-10)?;
        let st = membership(&t, &x, MEMBER_TOL)?.status;
        combos.mismatch(st == MembershipStatus::Member, || {
            tr.record(&t, json!({ "members": xs, "coefficients": coeffs, "status": st }))
        });
        let outer = rng.random_range(1..=3usize);
        let ok = composition_inclusion_check(&t, n, outer, 3, MEMBER_TOL, tr.seed)?;
        composition.mismatch(ok, || tr.record(&t, json!({ "m": outer, "trials": 3 })));
    }
    Ok(vec![combos, composition])
}

fn lemma_suite(trials: usize, draw: &Draw, seed: Seed) -> Result<Vec<Property>, CliError> {
    let s = Suite::Lemma;
    let mut forward = Property::new(s, "spectrum inside implies inclusion", 0.0);
    let mut converse = Property::new(s, "spectrum outside is refuted", 0.0);
    for i in 0..trials {
        let (tr, mut rng) = Trial::new(seed, s, i, draw);
        let (k, n) = (tr.k, tr.n);
        let t = random_matrix(k, &mut rng);
        let ks = rng.random_range(2..=3usize);
        // Even trials put σ(S) well inside W(T), odd trials put one eigenvalue
        // far outside it.
        let boundary = boundary_points(&t, 64)?;
        let center = t.trace() / k as f64;
        let mut eigs: Vec<C64> = (0..ks)
            .map(|_| {
                let w: Vec<f64> = (0..boundary.len()).map(|_| rng.random::<f64>()).collect();
                let total: f64 = w.iter().sum();
                let z = boundary.iter().zip(&w).map(|(z, wj)| z * wj).sum::<C64>() / total;
                center + (z - center) * 0.9
            })
            .collect();
        let outside = i % 2 == 1;
        if outside {
            eigs[0] = center + C64::from_polar(2.0 * operator_norm(&t) + 1.0, rng.random_range(0.0..TAU));
        }
        let u = random_unitary(ks, &mut rng);
        let sm = &(&u * &ComplexMatrix::from_diagonal(&eigs)) * &u.adjoint();
        let rep = lemma_inclusion_check(&sm, &t, n, MEMBER_TOL, 2, tr.seed)?;
        let rec = || tr.record(&t, json!({ "S": sm, "report": to_value(&rep) }));
        if outside {
            converse.mismatch(!rep.spectral_side && rep.counterexample.is_some(), rec);
        } else {
            forward.mismatch(rep.spectral_side && rep.sampled_inclusion, rec);
        }
    }
    Ok(vec![forward, converse])
}

pub fn run(suite: Suite, trials: usize, k: Option<usize>, n: Option<usize>, seed: Seed) -> Result<Outcome, CliError> {
    if k == Some(0) || n == Some(0) {
        return Err(mrk_core::Error::InvalidArgument("dimensions must be positive".into()).into());
    }
    let draw = Draw { k, n };
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut props = Vec::new();
    for s in suites {
        let battery = match s {
            Suite::TheoremA => theorem_a,
            Suite::TheoremB => theorem_b,
            Suite::TheoremC => theorem_c,
            Suite::Nu => nu_suite,
            Suite::Omega => omega_suite,
            Suite::Cstar => cstar_suite,
            Suite::Lemma => lemma_suite,
            Suite::All => unreachable!("expanded above"),
        };
        props.extend(battery(trials, &draw, seed)?);
    }

    let pass = props.iter().all(|p| p.pass);
    let mut text = String::new();
    for p in &props {
        let tag = if p.pass { "PASS" } else { "FAIL" };
        writeln!(
            text,
            "{tag} {}/{}: worst {:.3e} (tol {:.0e}, {} checks)",
            p.suite, p.name, p.worst, p.tolerance, p.checks
        )
        .unwrap();
        if let Some(inst) = &p.offending {
            writeln!(text, "  offending instance: {inst}").unwrap();
        }
    }
    let failed = props.iter().filter(|p| !p.pass).count();
    writeln!(text, "{} of {} properties passed", props.len() - failed, props.len()).unwrap();
    for p in props.iter().filter(|p| !p.pass) {
        eprintln!("mrk: property {}/{} failed", p.suite, p.name);
    }
    Ok(Outcome {
        code: if pass { 0 } else { 1 },
        inputs: json!({ "suite": suite, "trials": trials, "k": k, "n": n }),
        results: json!({ "pass": pass, "properties": props }),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_keeps_first_offender() {
        let mut p = Property::new(Suite::Nu, "x", 1e-3);
        p.observe(-1e-4, || json!(0));
        p.observe(0.5, || json!(1));
        p.observe(0.7, || json!(2));
        assert!(!p.pass);
        assert_eq!(p.worst, 0.7);
        assert_eq!(p.offending, Some(json!(1)));
        assert_eq!(p.checks, 3);
    }

    #[test]
    fn nan_residual_fails() {
        let mut p = Property::new(Suite::Lemma, "x", 1.0);
        p.observe(f64::NAN, || Value::Null);
        assert!(!p.pass && p.worst.is_infinite());
    }

    #[test]
    fn trials_are_reproducible() {
        let draw = Draw { k: None, n: Some(2) };
        let (a, mut ra) = Trial::new(5, Suite::Omega, 3, &draw);
        let (b, mut rb) = Trial::new(5, Suite::Omega, 3, &draw);
        assert_eq!((a.seed, a.k, a.n), (b.seed, b.k, b.n));
        assert_eq!(ra.random::<u64>(), rb.random::<u64>());
        let (c, _) = Trial::new(5, Suite::Cstar, 3, &draw);
        assert_ne!(a.seed, c.seed);
    }
}
