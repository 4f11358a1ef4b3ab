//! Constrained lattice sums and their closed forms.
//!
//! `S_N(L_1..L_N)` is a sum of exponential weights over strictly increasing
//! N-tuples drawn from a centered lattice of `m` points (half-integers when
//! `m` is even). [`s_brute`] enumerates it directly; [`s_closed`] evaluates
//! the (N+1)-term closed form built from vertex factors. The two are each
//! other's oracle. [`f_hat_from_partitions`] assembles the per-order series
//! factor from these sums over all splittings of the argument string, and
//! [`f_hat_pivot_assembly`] cross-checks it against the coth/tanh form.

use num_traits::ToPrimitive;

use crate::coeffs::{a_coeff, compositions, CoeffEngine};
use crate::error::{Error, Result};
use crate::C64;

/// Largest number of lattice tuples [`s_brute`] will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// One constrained sum: `n` summation variables, lattice size `m`, and the
/// complex arguments standing in for the commutator strings.
#[derive(Debug, Clone)]
pub struct SumSpec {
    pub n: usize,
    pub m: u32,
    pub l: Vec<C64>,
}

impl SumSpec {
    pub fn new(m: u32, l: Vec<C64>) -> Result<Self> {
        if l.is_empty() {
            return Err(Error::input("SumSpec needs at least one argument"));
        }
        Ok(SumSpec { n: l.len(), m, l })
    }
}

/// `Π_{j=1}^{r-1} (coth(x_j) − 1)`; the empty product is 1.
pub fn s_product(args: &[C64], delta: f64) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for (index, &x) in args.iter().enumerate() {
        let s = x.sinh();
        if s.norm() < delta {
            return Err(Error::Singular {
                index,
                modulus: s.norm(),
            });
        }
        prod *= x.cosh() / s - 1.0;
    }
    Ok(prod)
}

/// `Σ̂_r(x_1..x_r) = s_{r-1}(x_1..x_{r-1}) / sinh(x_r)`; `Σ̂_0 = 1`.
pub fn vertex_factor(args: &[C64], delta: f64) -> Result<C64> {
    match args.split_last() {
        None => Ok(C64::new(1.0, 0.0)),
        Some((&last, head)) => {
            let s = last.sinh();
            if s.norm() < delta {
                return Err(Error::Singular {
                    index: args.len() - 1,
                    modulus: s.norm(),
                });
            }
            Ok(s_product(head, delta)? / s)
        }
    }
}

/// The closed form of the constrained sum: one term per vertex,
///
/// `Σ_{r=0}^{N} Σ̂_r(−L_r, −L_{r-1}−L_r, …, −L_1−⋯−L_r)
///   · Σ̂_{N−r}(L_{r+1}, L_{r+1}+L_{r+2}, …, L_{r+1}+⋯+L_N)
///   · e^{m(−L_1−⋯−L_r + L_{r+1}+⋯+L_N)}`.
///
/// A singular factor is reported with the term index `r` that produced it.
pub fn s_closed(spec: &SumSpec, delta: f64) -> Result<C64> {
    Ok(s_closed_terms(spec, delta)?.iter().sum())
}

/// The `N+1` vertex terms of [`s_closed`] individually. At `m = 0` they
/// cancel exactly, so their largest magnitude is the right scale for
/// judging the quality of that cancellation.
pub fn s_closed_terms(spec: &SumSpec, delta: f64) -> Result<Vec<C64>> {
    let n = spec.n;
    let l = &spec.l;
    let m = spec.m as f64;
    let mut terms = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut left = Vec::with_capacity(r);
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=r {
            acc -= l[r - k];
            left.push(acc);
        }
        let mut right = Vec::with_capacity(n - r);
        let mut acc = C64::new(0.0, 0.0);
        for item in l.iter().take(n).skip(r) {
            acc += item;
            right.push(acc);
        }
        let exponent = match (left.last(), right.last()) {
            (Some(&a), Some(&b)) => a + b,
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => C64::new(0.0, 0.0),
        };
        let remap = |e: Error| match e {
            Error::Singular { modulus, .. } => Error::Singular { index: r, modulus },
            other => other,
        };
        let term = vertex_factor(&left, delta).map_err(remap)?
            * vertex_factor(&right, delta).map_err(remap)?
            * (exponent * m).exp();
        terms.push(term);
    }
    Ok(terms)
}

fn binomial_capped(m: u64, n: u64, cap: u128) -> Option<u128> {
    if n > m {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc.checked_mul((m - k) as u128)?;
        acc /= (k + 1) as u128;
        if acc > cap.saturating_mul(1_000) {
            return None;
        }
    }
    Some(acc)
}

/// Direct enumeration of the constrained sum. Lattice values are handled as
/// exact integer doublings `2n = 2j − (m−1)`, `j = 0..m−1`, so half-integer
/// endpoints for even `m` stay exact. Fewer than `n` lattice points gives 0.
pub fn s_brute(spec: &SumSpec) -> Result<C64> {
    let n = spec.n;
    let m = spec.m as u64;
    if (m as usize) < n {
        return Ok(C64::new(0.0, 0.0));
    }
    let count = binomial_capped(m, n as u64, BRUTE_FORCE_CAP)
        .filter(|&c| c <= BRUTE_FORCE_CAP)
        .ok_or(Error::EnumerationBound {
            count: u128::MAX,
            cap: BRUTE_FORCE_CAP,
        })?;
    if count > BRUTE_FORCE_CAP {
        return Err(Error::EnumerationBound {
            count,
            cap: BRUTE_FORCE_CAP,
        });
    }

    // lexicographic enumeration of increasing index tuples j_1 < … < j_n
    let mut idx: Vec<u64> = (0..n as u64).collect();
    let mut total = C64::new(0.0, 0.0);
    loop {
        let mut term = C64::new(1.0, 0.0);
        for (k, &j) in idx.iter().enumerate() {
            let two_n = 2 * j as i64 - (m as i64 - 1);
            term *= (spec.l[k] * two_n as f64).exp();
        }
        total += term;

        // advance
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(total * (2f64.powi(n as i32)));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] <= m - (n - pos) as u64 {
                for p in pos + 1..n {
                    idx[p] = idx[p - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Assembles `F̂_N` by splitting the argument string into consecutive
/// substrings in every way; a substring of length `k` contributes its summed
/// arguments to a lower-order closed sum with weight `2^{k-1}/k!`.
pub fn f_hat_from_partitions(spec: &SumSpec, delta: f64) -> Result<C64> {
    if spec.n > 6 {
        return Err(Error::input(format!(
            "partition assembly supports N <= 6, got {}",
            spec.n
        )));
    }
    let mut total = C64::new(0.0, 0.0);
    for comp in compositions(spec.n)?.iter() {
        let mut weight = 1.0;
        let mut block_sums = Vec::with_capacity(comp.parts().len());
        let mut cursor = 0usize;
        for &k in comp.parts() {
            let k = k as usize;
            weight *= a_coeff(k).to_f64().expect("a_k fits f64");
            block_sums.push(spec.l[cursor..cursor + k].iter().sum());
            cursor += k;
        }
        let inner = SumSpec {
            n: block_sums.len(),
            m: spec.m,
            l: block_sums,
        };
        total += s_closed(&inner, delta)? * weight;
    }
    Ok(total)
}

/// The same quantity assembled the other way: `Σ_r F̂_r F̂_{N−r} e^{m(…)}`
/// with the string arguments of the closed form. Used to cross-check
/// [`f_hat_from_partitions`] against the coth/tanh coefficient machinery.
pub fn f_hat_pivot_assembly(spec: &SumSpec, engine: &CoeffEngine) -> Result<C64> {
    let n = spec.n;
    let l = &spec.l;
    let m = spec.m as f64;
    let mut total = C64::new(0.0, 0.0);
    for r in 0..=n {
        let mut left = Vec::with_capacity(r);
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=r {
            acc -= l[r - k];
            left.push(acc);
        }
        let mut right = Vec::with_capacity(n - r);
        let mut acc = C64::new(0.0, 0.0);
        for item in l.iter().take(n).skip(r) {
            acc += item;
            right.push(acc);
        }
        let exponent = match (left.last(), right.last()) {
            (Some(&a), Some(&b)) => a + b,
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => C64::new(0.0, 0.0),
        };
        total += engine.f_factor(&left)? * engine.f_factor(&right)? * (exponent * m).exp();
    }
    Ok(total)
}
