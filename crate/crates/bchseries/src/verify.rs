//! Built-in cross-check battery.
//!
//! Each check pits one evaluation route against an independent one on seeded
//! random inputs and reports point counts, failures, and singularity
//! rejections. `bchseries verify` runs the whole battery.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeffs::CoeffEngine;
use crate::lattice_sums::{s_brute, s_closed_terms, SumSpec};
use crate::matops::{
    convert_form, eigendecompose, hadamard_conjugate, hadamard_conjugate_eigenbasis, BchEngine,
    ConvertDirection,
};
use crate::{CMatrix, C64};

/// Margin used when sampling test points: every hyperbolic argument must sit
/// at least this far (in |sinh|) from a singularity. Distinct from the
/// engine's evaluation threshold `delta`.
pub const SAMPLING_MARGIN: f64 = 1e-3;

const SAMPLING_ATTEMPTS: usize = 500;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub points: usize,
    pub failures: usize,
    /// Points that could not be evaluated because the engine rejected them
    /// as singular (counted, not silently dropped).
    pub rejected: usize,
    pub max_rel_err: f64,
    pub tol: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.rejected == 0 && self.points > 0
    }

    pub fn status(&self) -> &'static str {
        if self.passed() {
            "pass"
        } else if self.rejected > 0 && self.failures == 0 {
            "partial"
        } else {
            "fail"
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub max_convolution_order: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// Run every check with one seeded generator.
pub fn run_all(engine: &BchEngine, seed: u64, max_convolution_order: usize) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check_dual_form(engine.coeffs(), &mut rng),
        check_sum_agreement(engine.coeffs().delta(), &mut rng),
        check_convolution(engine.coeffs(), &mut rng, max_convolution_order),
        check_finite_examples(engine.coeffs(), &mut rng),
        check_hadamard_two_path(&mut rng),
        check_first_order_consistency(engine, &mut rng),
    ];
    VerifyReport {
        seed,
        max_convolution_order,
        checks,
    }
}

/// A complex argument with |sinh| bounded away from zero.
pub fn sample_arg(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let z = C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.2..1.2));
        if z.sinh().norm() >= SAMPLING_MARGIN {
            return z;
        }
    }
}

/// Real eigenvalue tuples whose pairwise differences stay off sinh zeros.
pub fn sample_eig_tuple(rng: &mut ChaCha8Rng, len: usize) -> Option<Vec<C64>> {
    'outer: for _ in 0..SAMPLING_ATTEMPTS {
        let eigs: Vec<C64> = (0..len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        for i in 0..len {
            for j in 0..len {
                if i != j && (eigs[i] - eigs[j]).sinh().norm() < SAMPLING_MARGIN {
                    continue 'outer;
                }
            }
        }
        return Some(eigs);
    }
    None
}

/// Real argument vectors whose contiguous block sums stay off sinh zeros.
pub fn sample_l_vector(rng: &mut ChaCha8Rng, len: usize) -> Option<Vec<C64>> {
    'outer: for _ in 0..SAMPLING_ATTEMPTS {
        let l: Vec<C64> = (0..len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        for i in 0..len {
            let mut acc = C64::new(0.0, 0.0);
            for item in l.iter().skip(i) {
                acc += item;
                if acc.sinh().norm() < SAMPLING_MARGIN {
                    continue 'outer;
                }
            }
        }
        return Some(l);
    }
    None
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    })
}

pub fn random_real_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-scale..scale), 0.0))
}

/// Random real symmetric matrix rescaled to the requested spectral radius.
pub fn random_symmetric_matrix(rng: &mut ChaCha8Rng, d: usize, spectral_radius: f64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = C64::new(rng.random_range(-1.0..1.0), 0.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let top = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.abs()));
    if top > 0.0 {
        m.scale(spectral_radius / top)
    } else {
        m
    }
}

fn coth(x: C64) -> C64 {
    x.cosh() / x.sinh()
}

/// Printed order-1 coefficient, transcribed termwise over L₁ = a₁ − a₂.
pub fn g1_reference(l1: C64) -> C64 {
    l1 / l1.sinh() + (-l1) / (-l1).sinh()
}

/// Printed order-2 coefficient over (L₁, L₂). The third term's coth takes
/// −L₂ (not −L₁): with −L₁ the whole coefficient fails to vanish when all
/// arguments go to zero, which the order-2 term must.
pub fn g2_reference(l1: C64, l2: C64) -> C64 {
    coth(l1) / (l1 + l2).sinh() * (l1 + l2)
        + 1.0 / (-l1).sinh() * (1.0 / l2.sinh()) * (-l1 + l2)
        + coth(-l2) / (-l1 - l2).sinh() * (-l1 - l2)
}

/// Printed order-3 coefficient over (L₁, L₂, L₃).
pub fn g3_reference(l1: C64, l2: C64, l3: C64) -> C64 {
    (coth(l1) * coth(l1 + l2) - 1.0 / 3.0) / (l1 + l2 + l3).sinh() * (l1 + l2 + l3)
        + 1.0 / (-l1).sinh() * (coth(l2) / (l2 + l3).sinh()) * (-l1 + l2 + l3)
        + coth(-l2) / (-l1 - l2).sinh() * (1.0 / l3.sinh()) * (-l1 - l2 + l3)
        + (coth(-l3) * coth(-l2 - l3) - 1.0 / 3.0) / (-l1 - l2 - l3).sinh() * (-l1 - l2 - l3)
}

fn check_dual_form(coeffs: &CoeffEngine, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let tol = 1e-10;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for len in 0..=6usize {
        for _ in 0..100 {
            let args: Vec<C64> = (0..len).map(|_| sample_arg(rng)).collect();
            points += 1;
            match (coeffs.f_via_t(&args), coeffs.f_via_a(&args)) {
                (Ok(ft), Ok(fa)) => {
                    let rel = (ft - fa).norm() / fa.norm().max(1.0);
                    max_rel = max_rel.max(rel);
                    if rel > tol {
                        failures += 1;
                    }
                }
                _ => rejected += 1,
            }
        }
    }
    CheckOutcome {
        name: "dual_form_f",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}

fn check_sum_agreement(delta: f64, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let tol = 1e-9;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for n in 1..=4usize {
        for m in [0u32, 1, 2, 3, 5, 8] {
            for _ in 0..50 {
                let Some(l) = sample_l_vector(rng, n) else {
                    rejected += 1;
                    continue;
                };
                let spec = SumSpec { n, m, l };
                points += 1;
                let brute = match s_brute(&spec) {
                    Ok(v) => v,
                    Err(_) => {
                        rejected += 1;
                        continue;
                    }
                };
                match s_closed_terms(&spec, delta) {
                    Ok(terms) => {
                        let closed: C64 = terms.iter().sum();
                        let rel = if m == 0 {
                            // brute is exactly zero; judge the cancellation
                            // against the largest cancelling term
                            let scale = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
                            closed.norm() / scale
                        } else {
                            (closed - brute).norm() / brute.norm().max(1.0)
                        };
                        max_rel = max_rel.max(rel);
                        if rel > tol {
                            failures += 1;
                        }
                    }
                    Err(_) => rejected += 1,
                }
            }
        }
    }
    CheckOutcome {
        name: "sum_closed_vs_brute",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}

fn check_convolution(coeffs: &CoeffEngine, rng: &mut ChaCha8Rng, max_order: usize) -> CheckOutcome {
    let tol = 1e-10;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for order in 1..=max_order {
        for _ in 0..50 {
            let Some(eigs) = sample_eig_tuple(rng, order + 1) else {
                rejected += 1;
                continue;
            };
            points += 1;
            match coeffs.convolution_terms(order, &eigs) {
                Ok(terms) => {
                    let sum: C64 = terms.iter().sum();
                    let max_term = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
                    let rel = sum.norm() / max_term;
                    max_rel = max_rel.max(rel);
                    if rel > tol {
                        failures += 1;
                    }
                }
                Err(_) => rejected += 1,
            }
        }
    }
    CheckOutcome {
        name: "convolution_identity",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}

fn check_finite_examples(coeffs: &CoeffEngine, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let tol = 1e-12;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for order in 1..=3usize {
        for _ in 0..50 {
            let Some(eigs) = sample_eig_tuple(rng, order + 1) else {
                rejected += 1;
                continue;
            };
            points += 1;
            let l: Vec<C64> = eigs.windows(2).map(|w| w[0] - w[1]).collect();
            let want = match order {
                1 => g1_reference(l[0]),
                2 => g2_reference(l[0], l[1]),
                _ => g3_reference(l[0], l[1], l[2]),
            };
            match coeffs.g_coefficient(order, &eigs) {
                Ok(got) => {
                    let rel = (got - want).norm() / want.norm().max(1.0);
                    max_rel = max_rel.max(rel);
                    if rel > tol {
                        failures += 1;
                    }
                }
                Err(_) => rejected += 1,
            }
        }
    }
    CheckOutcome {
        name: "finite_example_regeneration",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}

fn check_hadamard_two_path(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let tol = 1e-10;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for _ in 0..50 {
        let d = 2 + (points % 4);
        let a = random_complex_matrix(rng, d, 0.8);
        let b = random_complex_matrix(rng, d, 1.0);
        points += 1;
        match (
            hadamard_conjugate(&a, &b),
            hadamard_conjugate_eigenbasis(&a, &b),
        ) {
            (Ok(direct), Ok(eig)) => {
                let rel = (direct.clone() - eig).norm() / direct.norm().max(1.0);
                max_rel = max_rel.max(rel);
                if rel > tol {
                    failures += 1;
                }
            }
            _ => rejected += 1,
        }
    }
    CheckOutcome {
        name: "hadamard_two_path",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}

fn check_first_order_consistency(engine: &BchEngine, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let tol = 1e-10;
    let mut points = 0;
    let mut failures = 0;
    let mut rejected = 0;
    let mut max_rel = 0.0f64;
    for _ in 0..20 {
        let d = 3;
        let x = random_real_matrix(rng, d, 0.8);
        let y = random_real_matrix(rng, d, 1.0);
        points += 1;
        let via_standard = match engine.bch_first_order_standard(&x, &y) {
            Ok(v) => v,
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        let (a, b) = convert_form(&x, &y, ConvertDirection::StandardToSymmetric);
        let via_symmetric =
            match eigendecompose(&a).and_then(|spec| engine.order_terms_with(&spec, &b, 1)) {
                Ok((terms, _)) => &x + &terms[0],
                Err(_) => {
                    rejected += 1;
                    continue;
                }
            };
        let rel = (via_standard.clone() - via_symmetric).norm() / via_standard.norm().max(1.0);
        max_rel = max_rel.max(rel);
        if rel > tol {
            failures += 1;
        }
    }
    CheckOutcome {
        name: "first_order_consistency",
        points,
        failures,
        rejected,
        max_rel_err: max_rel,
        tol,
    }
}
