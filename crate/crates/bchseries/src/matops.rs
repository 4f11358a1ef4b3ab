//! Dense complex matrix engine.
//!
//! Eigendecomposition (complex Schur plus triangular back-substitution),
//! matrix exponential and principal logarithm, Hadamard conjugation, the
//! standard/symmetric form conversions, and the truncated series itself:
//! every order-k term is evaluated by weighting index tuples in the
//! eigenbasis of the first matrix with the scalar coefficient from
//! [`crate::coeffs`].

use nalgebra::DVector;

use crate::coeffs::{CoeffEngine, CoeffTable, MAX_TABLE_ORDER};
use crate::error::{branch_cut, Error, Result};
use crate::{CMatrix, C64};

/// Dimension cap for the order-N tuple evaluation (cost is O(d^{N+1})).
pub const DEFAULT_DIM_CAP: usize = 16;

/// Truncation-order cap.
pub const DEFAULT_ORDER_CAP: usize = 6;

/// Hard budget on index tuples per order term.
pub const TUPLE_BUDGET: u128 = 100_000_000;

/// Eigenvector bases with a larger condition estimate are rejected.
pub const CONDITION_CAP: f64 = 1e8;

/// Default perturbation scale of the degeneracy fallback. Larger values keep
/// the perturbed hyperbolic factors well conditioned; the extrapolation step
/// removes the systematic error they introduce.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Which flavour of the two-exponential product a matrix pair describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BchForm {
    /// `(A, B)` in `log(e^A e^{2B} e^A)`.
    Symmetric,
    /// `(X, Y)` in `log(e^X e^Y)`.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvertDirection {
    StandardToSymmetric,
    SymmetricToStandard,
}

/// A matrix pair plus the form tag under which it should be interpreted.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    pub a: CMatrix,
    pub b: CMatrix,
    pub form: BchForm,
}

impl MatrixPair {
    pub fn new(a: CMatrix, b: CMatrix, form: BchForm) -> Result<Self> {
        ensure_square("first matrix", &a)?;
        ensure_square("second matrix", &b)?;
        if a.nrows() != b.nrows() {
            return Err(Error::input(format!(
                "matrix dimensions differ: {} vs {}",
                a.nrows(),
                b.nrows()
            )));
        }
        Ok(MatrixPair { a, b, form })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// The pair as `(A, B)` of the symmetric product, converting if needed.
    pub fn into_symmetric(self) -> (CMatrix, CMatrix) {
        match self.form {
            BchForm::Symmetric => (self.a, self.b),
            BchForm::Standard => {
                convert_form(&self.a, &self.b, ConvertDirection::StandardToSymmetric)
            }
        }
    }
}

fn ensure_square(label: &str, m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::input(format!(
            "{label} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(format!("{label} has non-finite entries")));
    }
    Ok(())
}

/// Eigendecomposition of a diagonalizable matrix: `A = V · diag(λ) · V⁻¹`
/// with eigenvalues in a deterministic order (real part, then imaginary).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<C64>,
    basis: CMatrix,
    basis_inverse: CMatrix,
    condition: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &CMatrix {
        &self.basis_inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V⁻¹ M V`.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.basis_inverse * m * &self.basis
    }

    /// `V M V⁻¹`.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.basis * m * &self.basis_inverse
    }

    /// Mean modulus of consecutive eigenvalue gaps in sorted order; 1 when
    /// the spectrum is a single point (or a single eigenvalue).
    pub fn mean_gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            return 1.0;
        }
        let sum: f64 = self
            .eigenvalues
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum();
        let mean = sum / (self.eigenvalues.len() - 1) as f64;
        if mean < 1e-300 {
            1.0
        } else {
            mean
        }
    }
}

/// Eigenvectors of an upper-triangular matrix by back-substitution, with
/// guarded denominators so repeated eigenvalues degrade into (nearly)
/// parallel columns instead of dividing by zero. Defective inputs then fail
/// the condition gate downstream.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let d = t.nrows();
    let scale = t.norm().max(1.0);
    let smin = f64::EPSILON * scale;
    let mut y = CMatrix::zeros(d, d);
    for k in 0..d {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    y
}

/// Decompose `A` into eigenvalues and a (phase-normalized, sorted)
/// eigenvector basis. Rejects defective or ill-conditioned inputs: the
/// reconstruction residual must satisfy `‖VΛV⁻¹ − A‖_F ≤ 1e-10·max(1,‖A‖_F)`
/// and the basis condition estimate must stay below [`CONDITION_CAP`].
pub fn eigendecompose(a: &CMatrix) -> Result<Spectrum> {
    ensure_square("matrix", a)?;
    let d = a.nrows();
    if d == 0 {
        return Err(Error::input("empty matrix"));
    }

    let schur = a
        .clone()
        .try_schur(1e-15, 200_000)
        .ok_or(Error::Defective {
            residual: f64::INFINITY,
            condition: f64::INFINITY,
        })?;
    let (q, t) = schur.unpack();
    let y = triangular_eigenvectors(&t);
    let mut basis = q * y;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (t[(i, i)], t[(j, j)]);
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&i| t[(i, i)]).collect();
    let mut sorted = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &basis.column(src));
    }
    basis = sorted;

    // unit columns with the dominant entry rotated to the positive real axis
    for mut col in basis.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            let lead = col
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or(C64::new(1.0, 0.0));
            let phase = if lead.norm() > 0.0 {
                lead / lead.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            let factor = phase.conj() / norm;
            for z in col.iter_mut() {
                *z *= factor;
            }
        }
    }

    let basis_inverse = basis.clone().lu().try_inverse().ok_or(Error::Defective {
        residual: f64::INFINITY,
        condition: f64::INFINITY,
    })?;

    let svals = basis.clone().svd(false, false).singular_values;
    let smax = svals.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let smin = svals.iter().fold(f64::INFINITY, |acc, &s| acc.min(s));
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };

    let lam = CMatrix::from_diagonal(&DVector::from_vec(eigenvalues.clone()));
    let residual = (&basis * lam * &basis_inverse - a).norm();
    let bound = 1e-10 * a.norm().max(1.0);
    if residual > bound || condition > CONDITION_CAP {
        return Err(Error::Defective {
            residual,
            condition,
        });
    }

    Ok(Spectrum {
        eigenvalues,
        basis,
        basis_inverse,
        condition,
    })
}

/// Matrix exponential (Padé scaling-and-squaring kernel).
pub fn mat_exp(m: &CMatrix) -> CMatrix {
    m.exp()
}

fn log_via_spectrum(spec: &Spectrum) -> Result<CMatrix> {
    for &lambda in spec.eigenvalues() {
        if lambda.re <= 0.0 && lambda.im.abs() <= 1e-12 * lambda.norm().max(1.0) {
            return Err(branch_cut(lambda));
        }
    }
    let logs = DVector::from_iterator(spec.dim(), spec.eigenvalues().iter().map(|l| l.ln()));
    Ok(spec.from_eigenbasis(&CMatrix::from_diagonal(&logs)))
}

/// Gregory series `log M = 2·atanh((M−I)(M+I)⁻¹)`, usable near the identity.
fn log_gregory(m: &CMatrix) -> Result<CMatrix> {
    let d = m.nrows();
    let eye = CMatrix::identity(d, d);
    let w = (m - &eye)
        * (m + &eye)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("log: M + I is singular".into()))?;
    let w2 = &w * &w;
    let mut power = w.clone();
    let mut acc = CMatrix::zeros(d, d);
    for k in 0..120 {
        let term = power.scale(2.0 / (2 * k + 1) as f64);
        acc += &term;
        if term.norm() <= 1e-16 * acc.norm().max(1.0) {
            return Ok(acc);
        }
        power *= &w2;
    }
    Err(Error::Numerical(
        "log series did not converge; matrix too far from identity".into(),
    ))
}

/// Principal matrix logarithm.
///
/// Diagonalizable inputs go through the eigenbasis; if the decomposition is
/// rejected but the matrix is close to the identity, an inverse-hyperbolic
/// series is used instead. Eigenvalues on the closed negative real axis are
/// a branch error.
pub fn mat_log_principal(m: &CMatrix) -> Result<CMatrix> {
    ensure_square("matrix", m)?;
    match eigendecompose(m) {
        Ok(spec) => log_via_spectrum(&spec),
        Err(err @ Error::Defective { .. }) => {
            let d = m.nrows();
            if (m - CMatrix::identity(d, d)).norm() < 0.5 {
                log_gregory(m)
            } else {
                Err(err)
            }
        }
        Err(e) => Err(e),
    }
}

/// `e^A B e^{−A}` by direct exponentials.
pub fn hadamard_conjugate(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_square("first matrix", a)?;
    ensure_square("second matrix", b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::input("hadamard_conjugate needs equal dimensions"));
    }
    Ok(mat_exp(a) * b * mat_exp(&-a))
}

/// The same conjugation evaluated entrywise in the eigenbasis of `A`:
/// entry `(i, j)` of the transformed matrix picks up `e^{λ_i − λ_j}`.
pub fn hadamard_conjugate_eigenbasis(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() || b.nrows() != b.ncols() {
        return Err(Error::input("hadamard_conjugate needs equal dimensions"));
    }
    let spec = eigendecompose(a)?;
    let mut bt = spec.to_eigenbasis(b);
    for i in 0..spec.dim() {
        for j in 0..spec.dim() {
            bt[(i, j)] *= (spec.eigenvalues()[i] - spec.eigenvalues()[j]).exp();
        }
    }
    Ok(spec.from_eigenbasis(&bt))
}

/// Convert between the standard pair `(X, Y)` of `log(e^X e^Y)` and the
/// symmetric pair `(A, B)` of `log(e^A e^{2B} e^A)`:
/// `(A, B) = (X/2, e^{X/2} Y e^{−X/2} / 2)` and back. The two directions are
/// mutual inverses.
pub fn convert_form(m1: &CMatrix, m2: &CMatrix, dir: ConvertDirection) -> (CMatrix, CMatrix) {
    match dir {
        ConvertDirection::StandardToSymmetric => {
            let a = m1.scale(0.5);
            let b = (mat_exp(&a) * m2 * mat_exp(&-(&a))).scale(0.5);
            (a, b)
        }
        ConvertDirection::SymmetricToStandard => {
            let x = m1.scale(2.0);
            let y = (mat_exp(&-m1) * m2 * mat_exp(m1)).scale(2.0);
            (x, y)
        }
    }
}

/// Result of one truncated evaluation.
#[derive(Debug, Clone)]
pub struct TruncationReport {
    /// The truncated value of `log(e^A e^{2B} e^A)`.
    pub z: CMatrix,
    /// Truncation order N.
    pub order: usize,
    /// Frobenius norm of each retained term, orders 1..=N.
    pub term_norms: Vec<f64>,
    /// Index tuples that needed the perturbed-average degeneracy fallback.
    pub fallback_count: usize,
    /// `‖Z_N − log(e^A e^{2B} e^A)‖_F` when an oracle comparison was requested.
    pub oracle_error: Option<f64>,
}

/// The truncation engine: coefficient tables plus fallback parameters.
#[derive(Debug, Clone)]
pub struct BchEngine {
    coeffs: CoeffEngine,
    epsilon: f64,
}

impl Default for BchEngine {
    fn default() -> Self {
        BchEngine {
            coeffs: CoeffEngine::with_defaults(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl BchEngine {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::input(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(BchEngine {
            coeffs: CoeffEngine::new(CoeffTable::new(MAX_TABLE_ORDER)?, delta)?,
            epsilon,
        })
    }

    pub fn coeffs(&self) -> &CoeffEngine {
        &self.coeffs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Scalar coefficient with the degeneracy policy applied.
    ///
    /// Tuples whose eigenvalues all coincide take the exact scalar-case
    /// limit (2 at order one, 0 above). Other degenerate tuples are averaged
    /// over the `±ε` position-scaled perturbations (cancelling the odd error
    /// orders) at two perturbation sizes, and the remaining `ε²` term is
    /// removed by extrapolation; a non-finite result escalates `ε` by 16 up
    /// to twice. Everything is deterministic.
    fn g_with_fallback(
        &self,
        order: usize,
        eigs: &[C64],
        gap: f64,
        fallback_count: &mut usize,
    ) -> Result<C64> {
        let scale = eigs.iter().map(|e| e.norm()).fold(1.0f64, f64::max);
        if eigs.iter().all(|e| (e - eigs[0]).norm() <= 1e-13 * scale) {
            return Ok(if order == 1 {
                C64::new(2.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            });
        }
        match self.coeffs.g_coefficient(order, eigs) {
            Ok(v) => Ok(v),
            Err(Error::Degenerate { .. }) => {
                *fallback_count += 1;
                let mut eps = self.epsilon;
                for _ in 0..3 {
                    let averaged = |eps: f64| -> Result<C64> {
                        let shift = |sign: f64| -> Vec<C64> {
                            eigs.iter()
                                .enumerate()
                                .map(|(i, &e)| e + sign * eps * (i + 1) as f64 * gap)
                                .collect()
                        };
                        let plus = self.coeffs.g_coefficient_unchecked(order, &shift(1.0))?;
                        let minus = self.coeffs.g_coefficient_unchecked(order, &shift(-1.0))?;
                        Ok((plus + minus) * 0.5)
                    };
                    let fine = averaged(eps)?;
                    let coarse = averaged(2.0 * eps)?;
                    let value = (fine * 4.0 - coarse) / 3.0;
                    if value.re.is_finite() && value.im.is_finite() {
                        return Ok(value);
                    }
                    eps *= 16.0;
                }
                Err(Error::Numerical(
                    "degeneracy fallback failed to escape the singular set".into(),
                ))
            }
            Err(e) => Err(e),
        }
    }

    /// One order-k term in the eigenbasis:
    /// `T̃_k[n_1, n_{k+1}] = Σ_{n_2..n_k} g_k(λ_{n_1}, …, λ_{n_{k+1}})
    ///  · B̃_{n_1 n_2} ⋯ B̃_{n_k n_{k+1}}`.
    fn order_term_tilde(
        &self,
        spectrum: &Spectrum,
        b_tilde: &CMatrix,
        order: usize,
        gap: f64,
        fallback_count: &mut usize,
    ) -> Result<CMatrix> {
        let d = spectrum.dim();
        let mut term = CMatrix::zeros(d, d);
        let mut idx = vec![0usize; order + 1];
        let mut eigs = vec![C64::new(0.0, 0.0); order + 1];
        loop {
            let mut prod = C64::new(1.0, 0.0);
            for w in 0..order {
                prod *= b_tilde[(idx[w], idx[w + 1])];
                if prod.re == 0.0 && prod.im == 0.0 {
                    break;
                }
            }
            if prod.re != 0.0 || prod.im != 0.0 {
                for (slot, &i) in eigs.iter_mut().zip(idx.iter()) {
                    *slot = spectrum.eigenvalues()[i];
                }
                let g = self.g_with_fallback(order, &eigs, gap, fallback_count)?;
                term[(idx[0], idx[order])] += g * prod;
            }

            let mut pos = order + 1;
            loop {
                if pos == 0 {
                    return Ok(term);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < d {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// The per-order terms `T_1..T_N` of the series, mapped back to the
    /// original basis, plus the number of fallback evaluations.
    pub fn order_terms(
        &self,
        a: &CMatrix,
        b: &CMatrix,
        order: usize,
    ) -> Result<(Vec<CMatrix>, usize)> {
        let spectrum = eigendecompose(a)?;
        self.order_terms_with(&spectrum, b, order)
    }

    pub fn order_terms_with(
        &self,
        spectrum: &Spectrum,
        b: &CMatrix,
        order: usize,
    ) -> Result<(Vec<CMatrix>, usize)> {
        let d = spectrum.dim();
        ensure_square("second matrix", b)?;
        if b.nrows() != d {
            return Err(Error::input("matrix dimensions differ"));
        }
        if d > DEFAULT_DIM_CAP {
            return Err(Error::input(format!(
                "dimension {d} exceeds the cap {DEFAULT_DIM_CAP} for tuple evaluation"
            )));
        }
        if order > DEFAULT_ORDER_CAP {
            return Err(Error::input(format!(
                "order {order} exceeds the cap {DEFAULT_ORDER_CAP}"
            )));
        }
        if (d as u128).pow(order as u32 + 1) > TUPLE_BUDGET {
            return Err(Error::input(format!(
                "d^(N+1) = {}^{} exceeds the tuple budget {TUPLE_BUDGET}",
                d,
                order + 1
            )));
        }
        let b_tilde = spectrum.to_eigenbasis(b);
        let gap = spectrum.mean_gap();
        let mut fallback_count = 0usize;
        let mut terms = Vec::with_capacity(order);
        for k in 1..=order {
            let tilde = self.order_term_tilde(spectrum, &b_tilde, k, gap, &mut fallback_count)?;
            terms.push(spectrum.from_eigenbasis(&tilde));
        }
        Ok((terms, fallback_count))
    }

    /// Truncated series `Z_N = 2A + Σ_{k=1}^{N} T_k`. The order-0 content is
    /// exactly `2A`; `order` may be 0.
    pub fn bch_truncated(
        &self,
        a: &CMatrix,
        b: &CMatrix,
        order: usize,
    ) -> Result<TruncationReport> {
        ensure_square("first matrix", a)?;
        let spectrum = eigendecompose(a)?;
        self.bch_truncated_with(&spectrum, a, b, order)
    }

    /// As [`Self::bch_truncated`] with a precomputed spectrum of `a`.
    pub fn bch_truncated_with(
        &self,
        spectrum: &Spectrum,
        a: &CMatrix,
        b: &CMatrix,
        order: usize,
    ) -> Result<TruncationReport> {
        let (terms, fallback_count) = self.order_terms_with(spectrum, b, order)?;
        let mut z = a.scale(2.0);
        let mut term_norms = Vec::with_capacity(order);
        for t in &terms {
            term_norms.push(t.norm());
            z += t;
        }
        Ok(TruncationReport {
            z,
            order,
            term_norms,
            fallback_count,
            oracle_error: None,
        })
    }

    /// First-order standard-form evaluation
    /// `Z ≈ X + [w/(2 sinh(w/2))] e^{w/2}`-weighted `Y` in the eigenbasis of
    /// `X`, `w = λ_i − λ_j`. The removable point `w = 0` takes its limit 1;
    /// a small sinh away from `w = 0` (a genuine pole) is an error.
    pub fn bch_first_order_standard(&self, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        ensure_square("first matrix", x)?;
        ensure_square("second matrix", y)?;
        if x.nrows() != y.nrows() {
            return Err(Error::input("matrix dimensions differ"));
        }
        let spec = eigendecompose(x)?;
        let delta = self.coeffs.delta();
        let mut yt = spec.to_eigenbasis(y);
        for i in 0..spec.dim() {
            for j in 0..spec.dim() {
                let u = (spec.eigenvalues()[i] - spec.eigenvalues()[j]) * 0.5;
                let s = u.sinh();
                let c = if s.norm() < delta {
                    if u.norm() < 0.5 {
                        // u/sinh(u) = 1 − u²/6 + 7u⁴/360 + O(u⁶)
                        let u2 = u * u;
                        (1.0 - u2 / 6.0 + u2 * u2 * (7.0 / 360.0)) * u.exp()
                    } else {
                        return Err(Error::Singular {
                            index: i * spec.dim() + j,
                            modulus: s.norm(),
                        });
                    }
                } else {
                    u / s * u.exp()
                };
                yt[(i, j)] *= c;
            }
        }
        Ok(x + spec.from_eigenbasis(&yt))
    }

    /// Evaluate `[g(L_i + ⋯ + L_j) B_1⋯B_N]` in the eigenbasis: each index
    /// tuple is weighted by `g(λ_{n_i} − λ_{n_{j+1}})`. Indices are 1-based
    /// over the `N` factors.
    pub fn apply_string_function(
        &self,
        g: impl Fn(C64) -> C64,
        i: usize,
        j: usize,
        spectrum: &Spectrum,
        bs: &[CMatrix],
    ) -> Result<CMatrix> {
        let n = bs.len();
        if n == 0 || i == 0 || i > j || j > n {
            return Err(Error::input(format!(
                "string indices must satisfy 1 <= i <= j <= {n}, got ({i}, {j})"
            )));
        }
        let d = spectrum.dim();
        for b in bs {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::input("matrix dimensions differ"));
            }
        }
        if (d as u128).pow(n as u32 + 1) > TUPLE_BUDGET {
            return Err(Error::input("tuple budget exceeded"));
        }
        let tildes: Vec<CMatrix> = bs.iter().map(|b| spectrum.to_eigenbasis(b)).collect();
        let mut out = CMatrix::zeros(d, d);
        let mut idx = vec![0usize; n + 1];
        loop {
            let mut prod = C64::new(1.0, 0.0);
            for (w, tilde) in tildes.iter().enumerate() {
                prod *= tilde[(idx[w], idx[w + 1])];
            }
            if prod.re != 0.0 || prod.im != 0.0 {
                let weight = g(spectrum.eigenvalues()[idx[i - 1]] - spectrum.eigenvalues()[idx[j]]);
                out[(idx[0], idx[n])] += weight * prod;
            }
            let mut pos = n + 1;
            loop {
                if pos == 0 {
                    return Ok(spectrum.from_eigenbasis(&out));
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < d {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}
