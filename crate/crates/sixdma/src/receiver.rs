//! MMSE combining, SINR/rate evaluation, and the fractional-programming
//! reformulation of the weighted sum rate.
//!
//! The FP transform rewrites `sum_k w_k log2(1 + sinr_k)` as a block-concave
//! function of auxiliary variables `alpha` (per-UT SINR surrogate) and `beta`
//! (scaled matched-filter surrogate) plus a quadratic form in the channel.
//! With `alpha` and `beta` at their closed-form optima the transformed
//! objective equals the weighted sum rate exactly, which is the identity the
//! pose optimizers rely on: their subproblem objectives are extractions of
//! the quadratic part at fixed `alpha`, `beta`, and combiner.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::{Complex, Error, Result};

/// Collective combining matrix, one column per UT; same row count as the
/// channel matrix.
pub type CombinerMatrix = DMatrix<Complex>;

/// Auxiliary state of the fractional-programming reformulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpState {
    /// Per-UT SINR surrogate, non-negative.
    pub alpha: Vec<f64>,
    /// Per-UT complex matched-filter surrogate.
    #[serde(with = "crate::serde_util::complex_list")]
    pub beta: Vec<Complex>,
}

impl FpState {
    /// Closed-form optimal state for the given channel and combiner.
    pub fn optimal(h: &ChannelMatrix, w: &CombinerMatrix, weights: &[f64], noise: f64) -> Self {
        let alpha = update_alpha(h, w, noise);
        let beta = update_beta(h, w, &alpha, weights, noise);
        Self {
            alpha: alpha.as_slice().to_vec(),
            beta: beta.as_slice().to_vec(),
        }
    }

    pub fn alpha_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.alpha)
    }

    pub fn beta_vec(&self) -> DVector<Complex> {
        DVector::from_column_slice(&self.beta)
    }
}

/// MMSE receive combiner `W = (H H^H + noise I)^{-1} H`, the per-UT SINR
/// maximizer. `noise` is the normalized noise power `sigma^2 / p` and must be
/// positive so the Gram matrix is invertible.
pub fn mmse_combiner(h: &ChannelMatrix, noise: f64) -> Result<CombinerMatrix> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("channel matrix"));
    }
    if !(noise > 0.0) {
        return Err(Error::InvalidConfig(
            "normalized noise power must be positive".into(),
        ));
    }
    let n = h.nrows();
    let gram = h * h.adjoint() + DMatrix::<Complex>::identity(n, n) * Complex::from(noise);
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::NonFinite("regularized Gram matrix"))?;
    Ok(chol.solve(h))
}

/// Signal and interference-plus-noise powers of UT `k` under combiner column
/// `w_k`: `(|w_k^H h_k|^2, sum_{k' != k} |w_k^H h_{k'}|^2 + ||w_k||^2 noise)`.
fn link_powers(h: &ChannelMatrix, w_k: &DVector<Complex>, k: usize, noise: f64) -> (f64, f64) {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for kp in 0..h.ncols() {
        let cross: Complex = w_k.dotc(&h.column(kp));
        if kp == k {
            signal = cross.norm_sqr();
        } else {
            interference += cross.norm_sqr();
        }
    }
    (signal, interference + w_k.norm_squared() * noise)
}

/// SINR of UT `k` for combiner column `w_k`. A zero combiner yields zero.
pub fn sinr(h: &ChannelMatrix, w_k: &DVector<Complex>, k: usize, noise: f64) -> f64 {
    let (signal, denom) = link_powers(h, w_k, k, noise);
    if denom <= 0.0 {
        return 0.0;
    }
    signal / denom
}

/// Per-UT SINRs for a full combining matrix.
pub fn per_ut_sinrs(h: &ChannelMatrix, w: &CombinerMatrix, noise: f64) -> DVector<f64> {
    DVector::from_iterator(
        h.ncols(),
        (0..h.ncols()).map(|k| sinr(h, &w.column(k).into_owned(), k, noise)),
    )
}

/// Per-UT achievable rates `log2(1 + sinr_k)` in bps/Hz.
pub fn rates(h: &ChannelMatrix, w: &CombinerMatrix, noise: f64) -> DVector<f64> {
    per_ut_sinrs(h, w, noise).map(|s| (1.0 + s).log2())
}

/// Weighted sum rate `sum_k w_k log2(1 + sinr_k)`.
pub fn wsr(h: &ChannelMatrix, w: &CombinerMatrix, weights: &[f64], noise: f64) -> f64 {
    rates(h, w, noise)
        .iter()
        .zip(weights)
        .map(|(r, wk)| wk * r)
        .sum()
}

/// Optimal `alpha_k`: the SINR of UT k.
pub fn update_alpha(h: &ChannelMatrix, w: &CombinerMatrix, noise: f64) -> DVector<f64> {
    per_ut_sinrs(h, w, noise)
}

/// Optimal `beta_k = sqrt(w_k (1 + alpha_k)) w_k^H h_k / B_k` with
/// `B_k = sum_{k'} |w_k^H h_{k'}|^2 + ||w_k||^2 noise`. Zero when `B_k` is
/// zero (dead UT).
pub fn update_beta(
    h: &ChannelMatrix,
    w: &CombinerMatrix,
    alpha: &DVector<f64>,
    weights: &[f64],
    noise: f64,
) -> DVector<Complex> {
    DVector::from_iterator(
        h.ncols(),
        (0..h.ncols()).map(|k| {
            let w_k = w.column(k).into_owned();
            let (signal, rest) = link_powers(h, &w_k, k, noise);
            let b_k = signal + rest;
            if b_k <= 0.0 {
                return Complex::ZERO;
            }
            let num: Complex = w_k.dotc(&h.column(k));
            num * ((weights[k] * (1.0 + alpha[k])).sqrt() / b_k)
        }),
    )
}

/// The transformed objective
/// `sum_k w_k [log2(1+alpha_k) - alpha_k]
///  + sum_k 2 sqrt(w_k (1+alpha_k)) Re{conj(beta_k) A_k} - |beta_k|^2 B_k`,
/// where `A_k = w_k^H h_k` and `B_k = ||w_k||^2 noise + sum_{k'} |w_k^H h_{k'}|^2`.
///
/// Logarithms are base 2 so that, at the optimal `alpha`/`beta`, the value
/// equals the weighted sum rate in bps/Hz.
pub fn quadratic_objective(
    h: &ChannelMatrix,
    w: &CombinerMatrix,
    alpha: &DVector<f64>,
    beta: &DVector<Complex>,
    weights: &[f64],
    noise: f64,
) -> f64 {
    let mut total = 0.0;
    for k in 0..h.ncols() {
        let w_k = w.column(k).into_owned();
        let (signal, rest) = link_powers(h, &w_k, k, noise);
        let b_k = signal + rest;
        let a_k: Complex = w_k.dotc(&h.column(k));
        total += weights[k] * ((1.0 + alpha[k]).log2() - alpha[k]);
        total += 2.0 * (weights[k] * (1.0 + alpha[k])).sqrt() * (beta[k].conj() * a_k).re
            - beta[k].norm_sqr() * b_k;
    }
    total
}

/// Per-AP coefficients of the quadratic part for the rows owned by one AP.
///
/// For row set `S` (one row uni-polarized, two dual-polarized), the part of
/// the transformed objective depending on the entries `H[r, k]`, `r in S`, is
/// `sum_k 2 Re{c_k^T h_{S,k}} - h_{S,k}^H V h_{S,k}` up to a constant, where
/// `h_{S,k}` stacks that AP's channel entries toward UT k.
#[derive(Debug, Clone, PartialEq)]
pub struct ApCoeffs {
    /// `c[(k, p)]`: linear coefficient for UT k, branch p.
    pub c: DMatrix<Complex>,
    /// Hermitian PSD branch coupling matrix `V = sum_k |beta_k|^2 w_{S,k} w_{S,k}^H`.
    pub v: DMatrix<Complex>,
}

impl ApCoeffs {
    pub fn branches(&self) -> usize {
        self.v.nrows()
    }
}

/// Computes [`ApCoeffs`] for the AP owning `rows` of the channel matrix.
pub fn ap_coeffs(
    rows: &[usize],
    h: &ChannelMatrix,
    w: &CombinerMatrix,
    alpha: &DVector<f64>,
    beta: &DVector<Complex>,
    weights: &[f64],
) -> ApCoeffs {
    let k_total = h.ncols();
    let p_total = rows.len();
    let mut c = DMatrix::<Complex>::zeros(k_total, p_total);
    let mut v = DMatrix::<Complex>::zeros(p_total, p_total);

    // V = sum_k |beta_k|^2 w_S w_S^H over this AP's rows.
    for k in 0..k_total {
        let b2 = beta[k].norm_sqr();
        for (pi, &ri) in rows.iter().enumerate() {
            for (pj, &rj) in rows.iter().enumerate() {
                v[(pi, pj)] += Complex::from(b2) * w[(ri, k)] * w[(rj, k)].conj();
            }
        }
    }

    // Residual combined signal of UT k under combiner k' with this AP's rows
    // removed: sum_{r not in S} w_{r,k'} conj(H[r,k]).
    let mut residual = DMatrix::<Complex>::zeros(k_total, k_total);
    for kp in 0..k_total {
        for k in 0..k_total {
            let mut acc = Complex::ZERO;
            for r in 0..h.nrows() {
                if !rows.contains(&r) {
                    acc += w[(r, kp)] * h[(r, k)].conj();
                }
            }
            residual[(k, kp)] = acc;
        }
    }

    for k in 0..k_total {
        for (p, &r) in rows.iter().enumerate() {
            let mut val = Complex::from((weights[k] * (1.0 + alpha[k])).sqrt())
                * beta[k].conj()
                * w[(r, k)].conj();
            for kp in 0..k_total {
                val -= Complex::from(beta[kp].norm_sqr()) * w[(r, kp)].conj() * residual[(k, kp)];
            }
            c[(k, p)] = val;
        }
    }

    ApCoeffs { c, v }
}

/// Uni-polarized per-AP coefficients `({c_{k,m}}, v_m)` for AP `m`.
pub fn coeffs_cv(
    m: usize,
    h: &ChannelMatrix,
    w: &CombinerMatrix,
    alpha: &DVector<f64>,
    beta: &DVector<Complex>,
    weights: &[f64],
) -> (Vec<Complex>, f64) {
    let coeffs = ap_coeffs(&[m], h, w, alpha, beta, weights);
    let c = coeffs.c.column(0).iter().copied().collect();
    (c, coeffs.v[(0, 0)].re)
}
