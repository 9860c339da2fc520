use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use mrk_core::matrange::{membership, nu_n, omega_n_seeded, MembershipStatus, SupremumResult};
use mrk_core::matrix::{
    complex_gaussian, random_hermitian, random_matrix, random_unitary, rng_from_seed, spectrum, ComplexMatrix, Seed,
    C64,
};
use mrk_core::numrange::{boundary_points, numerical_radius};
use serde_json::json;

use crate::plot;
use crate::report::{read_matrix, to_value, write_file, CliError, Outcome};
use crate::RandomKind;

pub fn fmt_c(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn fmt_vec(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|&z| fmt_c(z)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn radius(path: &Path, tol: f64) -> Result<Outcome, CliError> {
    let t = read_matrix(path)?;
    let est = numerical_radius(&t, tol)?;
    let text = format!(
        "omega   = {}\ntheta*  = {}\nwitness = {}\n",
        est.omega,
        est.theta_star,
        fmt_vec(&est.witness)
    );
    Ok(Outcome {
        code: 0,
        inputs: json!({ "matrix": path, "tol": tol }),
        results: json!({
            "omega": est.omega,
            "theta_star": est.theta_star,
            "witness": est.witness,
            "tol": est.tol,
        }),
        text,
    })
}

pub fn range(path: &Path, points: usize, svg: Option<&Path>, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let t = read_matrix(path)?;
    let boundary = boundary_points(&t, points)?;
    let eigenvalues = spectrum(&t)?;
    let thetas: Vec<f64> = (0..points).map(|j| TAU * j as f64 / points as f64).collect();

    let mut table = String::from("theta,re,im\n");
    for (theta, z) in thetas.iter().zip(&boundary) {
        writeln!(table, "{theta},{},{}", z.re, z.im).unwrap();
    }
    let mut text = String::new();
    match csv {
        Some(out) => {
            write_file(out, &table)?;
            writeln!(text, "wrote {points} boundary points to {}", out.display()).unwrap();
        }
        None => text.push_str(&table),
    }
    if let Some(out) = svg {
        write_file(out, &plot::range_svg(&boundary, &eigenvalues))?;
        writeln!(text, "wrote figure to {}", out.display()).unwrap();
    }
    let rows: Vec<_> = thetas
        .iter()
        .zip(&boundary)
        .map(|(theta, z)| json!({ "theta": theta, "re": z.re, "im": z.im }))
        .collect();
    Ok(Outcome {
        code: 0,
        inputs: json!({ "matrix": path, "points": points, "svg": svg, "csv": csv }),
        results: json!({ "boundary": rows, "eigenvalues": eigenvalues }),
        text,
    })
}

fn supremum_text(name: &str, n: usize, res: &SupremumResult) -> String {
    format!(
        "{name}^{n}  = {}\nsearch   = {}\nbounds   = [{}, {}]\nmethod   = {:?}\nconverged = {}\n",
        res.value, res.search_value, res.lower_bound, res.upper_bound, res.method, res.converged
    )
}

fn supremum_code(res: &SupremumResult) -> u8 {
    if res.converged {
        0
    } else {
        3
    }
}

pub fn nu(path: &Path, n: usize, tol: f64) -> Result<Outcome, CliError> {
    let t = read_matrix(path)?;
    let res = nu_n(&t, n, tol)?;
    Ok(Outcome {
        code: supremum_code(&res),
        inputs: json!({ "matrix": path, "n": n, "tol": tol }),
        text: supremum_text("nu", n, &res),
        results: to_value(&res),
    })
}

pub fn omega(path: &Path, n: usize, tol: f64, restarts: usize, seed: Seed) -> Result<Outcome, CliError> {
    let t = read_matrix(path)?;
    let res = omega_n_seeded(&t, n, tol, restarts, seed)?;
    Ok(Outcome {
        code: supremum_code(&res),
        inputs: json!({ "matrix": path, "n": n, "tol": tol, "restarts": restarts }),
        text: supremum_text("omega", n, &res),
        results: to_value(&res),
    })
}

pub fn member(t_path: &Path, x_path: &Path, tol: f64) -> Result<Outcome, CliError> {
    let t = read_matrix(t_path)?;
    let x = read_matrix(x_path)?;
    let v = membership(&t, &x, tol)?;
    let code = match v.status {
        MembershipStatus::Member => 0,
        MembershipStatus::NonMember => 1,
        MembershipStatus::Undecided => 3,
    };
    let text = format!(
        "status      = {:?}\ndistance    = {:.6e}\nlower bound = {:.6e}\n",
        v.status, v.distance, v.distance_lower_bound
    );
    Ok(Outcome {
        code,
        inputs: json!({ "t": t_path, "x": x_path, "tol": tol }),
        results: to_value(&v),
        text,
    })
}

pub fn random_of_kind(size: usize, kind: RandomKind, seed: Seed) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    match kind {
        RandomKind::Ginibre => random_matrix(size, &mut rng),
        RandomKind::Hermitian => random_hermitian(size, &mut rng),
        RandomKind::Unitary => random_unitary(size, &mut rng),
        RandomKind::Normal => {
            let u = random_unitary(size, &mut rng);
            let d: Vec<C64> = (0..size).map(|_| complex_gaussian(&mut rng)).collect();
            &(&u * &ComplexMatrix::from_diagonal(&d)) * &u.adjoint()
        }
    }
}

pub fn random(size: usize, kind: RandomKind, out: Option<&Path>, seed: Seed) -> Result<Outcome, CliError> {
    if size == 0 {
        return Err(mrk_core::Error::InvalidArgument("matrix size must be positive".into()).into());
    }
    let m = random_of_kind(size, kind, seed);
    let body = serde_json::to_string(&m).expect("matrix serializes") + "\n";
    let text = match out {
        Some(path) => {
            write_file(path, &body)?;
            format!("wrote {size}x{size} {kind:?} matrix to {}\n", path.display())
        }
        None => body,
    };
    Ok(Outcome {
        code: 0,
        inputs: json!({ "size": size, "kind": kind, "out": out }),
        results: json!({ "matrix": m }),
        text,
    })
}
