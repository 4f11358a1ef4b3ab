//! Scalar coefficient machinery.
//!
//! Everything here is exact-rational bookkeeping plus pointwise evaluation of
//! hyperbolic functions. The central objects are:
//!
//! - `t_r`: Taylor coefficients of `tanh` at 0, computed exactly.
//! - `a_r = 2^{r-1} / r!`: the weight picked up when `r-1` consecutive coth
//!   factors are collapsed out of a product.
//! - ordered compositions of `r`, which index the terms of the `f` functions.
//! - `f_{r-1}` in two algebraically equal forms (`t`-weighted coth products
//!   and `a`-weighted (coth − 1) products), each other's oracle.
//! - `F̂_r = f_{r-1} / sinh`, and the per-order series coefficient
//!   [`CoeffEngine::g_coefficient`] assembled from F̂ pairs in "pivot form".
//!
//! All evaluation is pure; [`CoeffTable`] and [`CoeffEngine`] are immutable
//! once built and safe to share across threads.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::C64;

/// Largest order for which exact `t_r` / `a_r` tables may be built.
pub const MAX_TABLE_ORDER: usize = 32;

/// Largest `r` for which compositions are enumerated (2^{r-1} of them).
pub const MAX_COMPOSITION_ORDER: usize = 16;

/// Default modulus threshold on sinh factors below which an argument is
/// treated as sitting on a (possibly removable) singularity.
pub const DEFAULT_DELTA: f64 = 1e-6;

fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Taylor coefficients `t_0..t_{k_max}` of `tanh` at 0, exact.
///
/// Computed by dividing the sinh series by the cosh series in rational
/// arithmetic: `t_n = sinh_n − Σ_{j<n} t_j · cosh_{n−j}`.
pub fn tanh_taylor(k_max: usize) -> Result<Vec<BigRational>> {
    if k_max == 0 || k_max > MAX_TABLE_ORDER {
        return Err(Error::input(format!(
            "tanh table order must be in 1..={MAX_TABLE_ORDER}, got {k_max}"
        )));
    }
    let sinh_c = |n: usize| {
        if n % 2 == 1 {
            BigRational::new(BigInt::one(), factorial(n))
        } else {
            BigRational::zero()
        }
    };
    let cosh_c = |n: usize| {
        if n.is_multiple_of(2) {
            BigRational::new(BigInt::one(), factorial(n))
        } else {
            BigRational::zero()
        }
    };
    let mut t = Vec::with_capacity(k_max + 1);
    for n in 0..=k_max {
        let mut val = sinh_c(n);
        for (j, tj) in t.iter().enumerate().take(n) {
            val -= tj * cosh_c(n - j);
        }
        t.push(val);
    }
    Ok(t)
}

/// The exact rational `a_r = 2^{r-1} / r!` for `r ≥ 1`.
pub fn a_coeff(r: usize) -> BigRational {
    assert!(r >= 1, "a_coeff is defined for r >= 1");
    BigRational::new(BigInt::from(2u8).pow(r as u32 - 1), factorial(r))
}

/// An ordered tuple of positive integers with a fixed total.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }
}

type CompositionCache = Mutex<BTreeMap<usize, Arc<Vec<Composition>>>>;

fn composition_cache() -> &'static CompositionCache {
    static CACHE: OnceLock<CompositionCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// All 2^{r-1} ordered compositions of `r`, lexicographically sorted.
///
/// The enumeration is iterative (one bitmask per cut pattern) and the result
/// for each `r` is cached process-wide; this sits in the inner loop of every
/// `f` evaluation.
pub fn compositions(r: usize) -> Result<Arc<Vec<Composition>>> {
    if r == 0 || r > MAX_COMPOSITION_ORDER {
        return Err(Error::input(format!(
            "composition order must be in 1..={MAX_COMPOSITION_ORDER}, got {r}"
        )));
    }
    let mut cache = composition_cache()
        .lock()
        .expect("composition cache poisoned");
    if let Some(hit) = cache.get(&r) {
        return Ok(Arc::clone(hit));
    }
    let mut all = Vec::with_capacity(1usize << (r - 1));
    for mask in 0u32..(1u32 << (r - 1)) {
        // bit i set = cut after position i+1 of the string 1..r
        let mut parts = Vec::new();
        let mut run = 1u32;
        for i in 0..(r - 1) {
            if mask >> i & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        all.push(Composition { parts });
    }
    all.sort();
    let arc = Arc::new(all);
    cache.insert(r, Arc::clone(&arc));
    Ok(arc)
}

/// Exact coefficient tables `t_0..t_{k_max}` and `a_1..a_{k_max}`, with
/// double-precision copies for evaluation.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    k_max: usize,
    t: Vec<BigRational>,
    a: Vec<BigRational>,
    t_f64: Vec<f64>,
    a_f64: Vec<f64>,
}

impl CoeffTable {
    pub fn new(k_max: usize) -> Result<Self> {
        let t = tanh_taylor(k_max)?;
        let a: Vec<BigRational> = (1..=k_max).map(a_coeff).collect();
        let t_f64 = t
            .iter()
            .map(|v| v.to_f64().expect("t_r fits f64"))
            .collect();
        let a_f64 = a
            .iter()
            .map(|v| v.to_f64().expect("a_r fits f64"))
            .collect();
        Ok(CoeffTable {
            k_max,
            t,
            a,
            t_f64,
            a_f64,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `t_r` as an exact rational, `0 ≤ r ≤ k_max`.
    pub fn t(&self, r: usize) -> &BigRational {
        &self.t[r]
    }

    /// `a_r` as an exact rational, `1 ≤ r ≤ k_max`.
    pub fn a(&self, r: usize) -> &BigRational {
        &self.a[r - 1]
    }

    pub fn t_f64(&self, r: usize) -> f64 {
        self.t_f64[r]
    }

    pub fn a_f64(&self, r: usize) -> f64 {
        self.a_f64[r - 1]
    }
}

/// Immutable evaluation context: a coefficient table plus the degeneracy
/// threshold `delta` applied to every sinh factor.
#[derive(Debug, Clone)]
pub struct CoeffEngine {
    table: CoeffTable,
    delta: f64,
}

impl CoeffEngine {
    pub fn new(table: CoeffTable, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::input(format!("delta must be positive, got {delta}")));
        }
        Ok(CoeffEngine { table, delta })
    }

    /// Full-order table with the default threshold.
    pub fn with_defaults() -> Self {
        CoeffEngine {
            table: CoeffTable::new(MAX_TABLE_ORDER).expect("default table"),
            delta: DEFAULT_DELTA,
        }
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn coth_values(&self, args: &[C64], checked: bool) -> Result<Vec<C64>> {
        args.iter()
            .enumerate()
            .map(|(index, &x)| {
                let s = x.sinh();
                if checked && s.norm() < self.delta {
                    return Err(Error::Singular {
                        index,
                        modulus: s.norm(),
                    });
                }
                Ok(x.cosh() / s)
            })
            .collect()
    }

    fn f_impl(&self, args: &[C64], via_a: bool, checked: bool) -> Result<C64> {
        let r = args.len() + 1;
        if r > MAX_COMPOSITION_ORDER {
            return Err(Error::input(format!(
                "f supports at most {} arguments, got {}",
                MAX_COMPOSITION_ORDER - 1,
                args.len()
            )));
        }
        if args.is_empty() {
            return Ok(C64::new(1.0, 0.0));
        }
        let coth = self.coth_values(args, checked)?;
        let mut sum = C64::new(0.0, 0.0);
        for comp in compositions(r)?.iter() {
            let parts = comp.parts();
            let mut weight = 1.0;
            for &p in parts {
                weight *= if via_a {
                    self.table.a_f64(p as usize)
                } else {
                    self.table.t_f64(p as usize)
                };
            }
            if weight == 0.0 {
                continue;
            }
            // one coth factor per proper prefix sum of the composition
            let mut term = C64::new(weight, 0.0);
            let mut prefix = 0usize;
            for &p in &parts[..parts.len() - 1] {
                prefix += p as usize;
                let c = coth[prefix - 1];
                term *= if via_a { c - 1.0 } else { c };
            }
            sum += term;
        }
        Ok(sum)
    }

    /// `f_{r-1}(x_1..x_{r-1})` as a tanh-weighted sum of coth products.
    ///
    /// For each composition `(p_0..p_n)` of `r` the term is
    /// `t_{p_0}···t_{p_n} · Π coth(x_s)` with one factor per proper prefix
    /// sum `s` of the composition. Errors with the offending argument index
    /// if any `|sinh(x_j)| < delta`.
    pub fn f_via_t(&self, args: &[C64]) -> Result<C64> {
        self.f_impl(args, false, true)
    }

    /// The same function as [`Self::f_via_t`] through the other expansion:
    /// `a_{p_0}···a_{p_n} · Π (coth(x_s) − 1)`. Kept as an independent oracle.
    pub fn f_via_a(&self, args: &[C64]) -> Result<C64> {
        self.f_impl(args, true, true)
    }

    fn f_factor_impl(&self, args: &[C64], checked: bool) -> Result<C64> {
        match args.split_last() {
            None => Ok(C64::new(1.0, 0.0)),
            Some((&last, head)) => {
                let s = last.sinh();
                if checked && s.norm() < self.delta {
                    return Err(Error::Singular {
                        index: args.len() - 1,
                        modulus: s.norm(),
                    });
                }
                Ok(self.f_impl(head, false, checked)? / s)
            }
        }
    }

    /// `F̂_r(x_1..x_r) = f_{r-1}(x_1..x_{r-1}) / sinh(x_r)`; `F̂_0 = 1`.
    pub fn f_factor(&self, args: &[C64]) -> Result<C64> {
        self.f_factor_impl(args, true)
    }

    fn pivot_args(order: usize, eigs: &[C64], r: usize) -> (Vec<C64>, Vec<C64>) {
        let pivot = eigs[r];
        let u: Vec<C64> = (1..=r).map(|k| pivot - eigs[r - k]).collect();
        let v: Vec<C64> = (1..=order - r).map(|k| pivot - eigs[r + k]).collect();
        (u, v)
    }

    fn g_impl(&self, order: usize, eigs: &[C64], checked: bool) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for r in 0..=order {
            let (u, v) = Self::pivot_args(order, eigs, r);
            let linear = 2.0 * eigs[r] - eigs[0] - eigs[order];
            total += self.f_factor_impl(&u, checked)? * self.f_factor_impl(&v, checked)? * linear;
        }
        Ok(total)
    }

    fn validate_g_input(order: usize, eigs: &[C64]) -> Result<()> {
        if order == 0 {
            return Err(Error::input("g_coefficient requires order >= 1"));
        }
        if eigs.len() != order + 1 {
            return Err(Error::input(format!(
                "g_coefficient of order {order} needs {} eigenvalues, got {}",
                order + 1,
                eigs.len()
            )));
        }
        Ok(())
    }

    /// The order-N scalar coefficient evaluated on one eigenvalue tuple
    /// `(a_1, …, a_{N+1})` in pivot form:
    ///
    /// `Σ_{r=0}^{N} F̂_r(p−a_r, …, p−a_1) · F̂_{N−r}(p−a_{r+2}, …, p−a_{N+1})
    ///   · (2p − a_1 − a_{N+1})` with pivot `p = a_{r+1}`.
    ///
    /// Signals [`Error::Degenerate`] when any required sinh factor is within
    /// `delta` of zero; callers own the fallback policy.
    pub fn g_coefficient(&self, order: usize, eigs: &[C64]) -> Result<C64> {
        Self::validate_g_input(order, eigs)?;
        self.g_impl(order, eigs, true).map_err(|e| match e {
            Error::Singular { index, modulus } => Error::Degenerate { index, modulus },
            other => other,
        })
    }

    /// [`Self::g_coefficient`] with the degeneracy guard disabled. May return
    /// non-finite values; intended for perturbed fallback evaluation.
    pub fn g_coefficient_unchecked(&self, order: usize, eigs: &[C64]) -> Result<C64> {
        Self::validate_g_input(order, eigs)?;
        self.g_impl(order, eigs, false)
    }

    /// The `N+1` products `F̂_r · F̂_{N−r}` of the pivot form, without the
    /// linear factor. Their sum vanishes identically; tests pin that.
    pub fn convolution_terms(&self, order: usize, eigs: &[C64]) -> Result<Vec<C64>> {
        Self::validate_g_input(order, eigs)?;
        (0..=order)
            .map(|r| {
                let (u, v) = Self::pivot_args(order, eigs, r);
                Ok(self.f_factor(&u)? * self.f_factor(&v)?)
            })
            .collect()
    }
}
