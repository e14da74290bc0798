//! Per-AP orientation optimization on the Stiefel manifold
//! `{A : A^T A = I}` of 3x2 (uni-polarized) or 3x3 (dual-polarized) frames.
//!
//! The objective is evaluated through the channel (aperture projection and
//! polarization match are not smooth in closed form at their kinks), so the
//! Euclidean gradient is taken numerically by entrywise forward differences.
//! It is projected onto the tangent space, combined into a Polak-Ribiere
//! conjugate direction via vector transport, stepped with Armijo
//! backtracking, and mapped back to the manifold with a QR retraction whose
//! sign convention fixes a positive diagonal of the R factor.

use nalgebra::{DMatrix, Matrix3, Matrix3xX, Vector3};

use crate::{Complex, Error, Result};

/// One additive term of the orientation objective: the paths of a single
/// (UT, realization) pair seen by the AP being optimized, with the
/// position-dependent phases folded into `base`.
#[derive(Debug, Clone)]
pub struct OrientationTerm {
    dirs: Vec<Vector3<f64>>,
    fields: Vec<Vector3<f64>>,
    /// `conj(f_l(q)) a_l lambda / (4 pi d)`: everything except the
    /// orientation-dependent loss factors.
    base: Vec<Complex>,
    /// Linear coefficient per polarization branch.
    c: Vec<Complex>,
    /// Hermitian PSD branch coupling matrix.
    v: DMatrix<Complex>,
    weight: f64,
}

impl OrientationTerm {
    pub fn new(
        dirs: Vec<Vector3<f64>>,
        fields: Vec<Vector3<f64>>,
        base: Vec<Complex>,
        c: Vec<Complex>,
        v: DMatrix<Complex>,
        weight: f64,
    ) -> Self {
        assert_eq!(dirs.len(), fields.len());
        assert_eq!(dirs.len(), base.len());
        assert_eq!(v.nrows(), c.len());
        Self {
            dirs,
            fields,
            base,
            c,
            v,
            weight,
        }
    }
}

/// Orientation subproblem for one AP: evaluates the extraction
/// `Q(A) = sum_t w_t [sum_p 2 Re{h_p c_p} - h^H V h]` where
/// `h_p(A) = sum_l base_l sqrt(max(d_l^T u, 0)) |e_l^T v_p|`.
#[derive(Debug, Clone)]
pub struct OrientationProblem {
    pub terms: Vec<OrientationTerm>,
}

impl OrientationProblem {
    /// Evaluates the objective for an arbitrary (not necessarily orthonormal)
    /// frame, as required by the numeric gradient.
    pub fn objective(&self, a: &Matrix3xX<f64>) -> f64 {
        let branches = a.ncols() - 1;
        let u: Vector3<f64> = a.column(0).into();
        let mut total = 0.0;
        let mut h = [Complex::ZERO; 2];
        for t in &self.terms {
            debug_assert_eq!(t.c.len(), branches);
            for p in 0..branches {
                let vp: Vector3<f64> = a.column(1 + p).into();
                let mut acc = Complex::ZERO;
                for l in 0..t.dirs.len() {
                    let ap = t.dirs[l].dot(&u).max(0.0);
                    if ap > 0.0 {
                        acc += t.base[l] * (ap.sqrt() * t.fields[l].dot(&vp).abs());
                    }
                }
                h[p] = acc;
            }
            let mut val = 0.0;
            for p in 0..branches {
                val += 2.0 * (h[p] * t.c[p]).re;
            }
            for pi in 0..branches {
                for pj in 0..branches {
                    val -= (h[pi].conj() * t.v[(pi, pj)] * h[pj]).re;
                }
            }
            total += t.weight * val;
        }
        total
    }
}

/// Entrywise forward-difference Euclidean gradient of `f` at `a`.
pub fn euclidean_grad<F: Fn(&Matrix3xX<f64>) -> f64>(
    f: F,
    a: &Matrix3xX<f64>,
    step: f64,
) -> Matrix3xX<f64> {
    let f0 = f(a);
    let mut grad = Matrix3xX::zeros(a.ncols());
    let mut probe = a.clone();
    for col in 0..a.ncols() {
        for row in 0..3 {
            let orig = probe[(row, col)];
            probe[(row, col)] = orig + step;
            grad[(row, col)] = (f(&probe) - f0) / step;
            probe[(row, col)] = orig;
        }
    }
    grad
}

/// Central-difference variant, used by tests to cross-check the forward
/// scheme.
pub fn euclidean_grad_central<F: Fn(&Matrix3xX<f64>) -> f64>(
    f: F,
    a: &Matrix3xX<f64>,
    step: f64,
) -> Matrix3xX<f64> {
    let mut grad = Matrix3xX::zeros(a.ncols());
    let mut probe = a.clone();
    for col in 0..a.ncols() {
        for row in 0..3 {
            let orig = probe[(row, col)];
            probe[(row, col)] = orig + step;
            let fp = f(&probe);
            probe[(row, col)] = orig - step;
            let fm = f(&probe);
            probe[(row, col)] = orig;
            grad[(row, col)] = (fp - fm) / (2.0 * step);
        }
    }
    grad
}

/// Orthogonal projection of an ambient gradient onto the tangent space at
/// `a`: `egrad - a (a^T egrad + egrad^T a) / 2`.
pub fn riemannian_grad(a: &Matrix3xX<f64>, egrad: &Matrix3xX<f64>) -> Matrix3xX<f64> {
    let sym = (a.transpose() * egrad + egrad.transpose() * a) * 0.5;
    egrad - a * sym
}

/// Transports a tangent direction to the tangent space at `a_new` by the
/// same symmetric projection.
pub fn transport(mu: &Matrix3xX<f64>, a_new: &Matrix3xX<f64>) -> Matrix3xX<f64> {
    riemannian_grad(a_new, mu)
}

/// `||Z^T A + A^T Z||_F`: zero exactly when `Z` is tangent at `A`.
pub fn tangency_defect(a: &Matrix3xX<f64>, z: &Matrix3xX<f64>) -> f64 {
    (z.transpose() * a + a.transpose() * z).norm()
}

/// QR retraction: the orthonormal factor of `a + step`, with the sign
/// convention that the R factor has a positive diagonal. A zero step returns
/// `a` unchanged. Fails when `a + step` loses column rank.
pub fn retract(a: &Matrix3xX<f64>, step: &Matrix3xX<f64>) -> Result<Matrix3xX<f64>> {
    if step.iter().all(|x| *x == 0.0) {
        return Ok(a.clone());
    }
    let moved = a + step;
    let p = moved.ncols();
    let dm = DMatrix::from_iterator(3, p, moved.iter().cloned());
    let scale = dm.norm().max(1.0);
    let qr = dm.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..p {
        let diag = r[(i, i)];
        if diag.abs() < 1e-12 * scale {
            return Err(Error::DegenerateStep);
        }
        if diag < 0.0 {
            for row in 0..3 {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    Ok(Matrix3xX::from_iterator(p, q.iter().cloned()))
}

/// Conjugate-gradient options. Defaults: Armijo with initial step 1, shrink
/// 0.5, sufficient-increase coefficient 1e-4, minimum step 1e-10; forward
/// differences with absolute step 1e-6; restart every `3 * entries`
/// iterations.
#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Stop when the objective increase falls below this threshold.
    pub eps: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub armijo_init: f64,
    pub armijo_shrink: f64,
    pub armijo_c1: f64,
    pub tau_min: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iters: 200,
            fd_step: 1e-6,
            armijo_init: 1.0,
            armijo_shrink: 0.5,
            armijo_c1: 1e-4,
            tau_min: 1e-10,
        }
    }
}

/// Outcome of one orientation solve.
#[derive(Debug, Clone)]
pub struct CgResult {
    pub orientation: Matrix3xX<f64>,
    /// Objective at the start point and after each accepted step;
    /// non-decreasing.
    pub trace: Vec<f64>,
    /// `||A^T A - I||_F` of every iterate, including the start point.
    pub defects: Vec<f64>,
    pub iterations: usize,
}

fn frobenius_dot(a: &Matrix3xX<f64>, b: &Matrix3xX<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

struct LineSearchHit {
    point: Matrix3xX<f64>,
    value: f64,
}

fn armijo<F: Fn(&Matrix3xX<f64>) -> f64>(
    f: &F,
    a: &Matrix3xX<f64>,
    mu: &Matrix3xX<f64>,
    slope: f64,
    q0: f64,
    opts: &CgOptions,
) -> Option<LineSearchHit> {
    let mut tau = opts.armijo_init;
    while tau >= opts.tau_min {
        if let Ok(candidate) = retract(a, &(mu * tau)) {
            let value = f(&candidate);
            if value >= q0 + opts.armijo_c1 * tau * slope {
                return Some(LineSearchHit {
                    point: candidate,
                    value,
                });
            }
        }
        tau *= opts.armijo_shrink;
    }
    None
}

/// Riemannian conjugate-gradient ascent of `f` over the Stiefel manifold,
/// starting from the orthonormal frame `a0`. Uses the PR+ coefficient
/// `max(0, <g+, g+ - T(g)> / <g, g>)` with periodic restarts; a failed line
/// search falls back to steepest ascent once before terminating.
pub fn optimize_orientation<F: Fn(&Matrix3xX<f64>) -> f64>(
    f: F,
    a0: &Matrix3xX<f64>,
    opts: &CgOptions,
) -> CgResult {
    let restart_every = 3 * 3 * a0.ncols();
    let mut a = a0.clone();
    let mut value = f(&a);
    let mut trace = vec![value];
    let mut defects = vec![crate::channel::orthonormality_defect(&a)];
    let mut grad = riemannian_grad(&a, &euclidean_grad(&f, &a, opts.fd_step));
    let mut mu = grad.clone();
    let mut iterations = 0;

    for n in 0..opts.max_iters {
        let mut slope = frobenius_dot(&grad, &mu);
        if slope <= 0.0 {
            // Not an ascent direction; reset to steepest ascent.
            mu = grad.clone();
            slope = frobenius_dot(&grad, &grad);
        }

        let hit = match armijo(&f, &a, &mu, slope, value, opts) {
            Some(hit) => hit,
            None => {
                // Retry once along the gradient itself.
                mu = grad.clone();
                let slope = frobenius_dot(&grad, &grad);
                match armijo(&f, &a, &mu, slope, value, opts) {
                    Some(hit) => hit,
                    None => break,
                }
            }
        };

        let improvement = hit.value - value;
        a = hit.point;
        value = hit.value;
        trace.push(value);
        defects.push(crate::channel::orthonormality_defect(&a));
        iterations += 1;

        let grad_new = riemannian_grad(&a, &euclidean_grad(&f, &a, opts.fd_step));
        let kappa = if (n + 1) % restart_every == 0 {
            0.0
        } else {
            let denom = frobenius_dot(&grad, &grad);
            if denom <= 0.0 {
                0.0
            } else {
                let diff = &grad_new - transport(&grad, &a);
                (frobenius_dot(&grad_new, &diff) / denom).max(0.0)
            }
        };
        mu = &grad_new + transport(&mu, &a) * kappa;
        grad = grad_new;

        if improvement < opts.eps {
            break;
        }
    }

    CgResult {
        orientation: a,
        trace,
        defects,
        iterations,
    }
}

/// Z-Y-Z Euler rotation `Rz(alpha) Ry(beta) Rz(gamma)`; the identity at zero
/// angles.
pub fn euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    let rz1 = Matrix3::new(
        alpha.cos(),
        -alpha.sin(),
        0.0,
        alpha.sin(),
        alpha.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    );
    let ry = Matrix3::new(
        beta.cos(),
        0.0,
        beta.sin(),
        0.0,
        1.0,
        0.0,
        -beta.sin(),
        0.0,
        beta.cos(),
    );
    let rz2 = Matrix3::new(
        gamma.cos(),
        -gamma.sin(),
        0.0,
        gamma.sin(),
        gamma.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    );
    rz1 * ry * rz2
}
