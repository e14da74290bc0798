//! Per-AP position optimization.
//!
//! The position subproblem maximizes, over one AP's moving box,
//! `F(q) = sum_t 2 Re{f(q)^H b0_t} - f(q)^H C_t f(q)` where `f(q)` is the
//! unit-modulus phase vector of the AP's paths and each term `t` covers one
//! (UT, realization) pair. The quadratic penalty is majorized by its largest
//! eigenvalue (`C_t` has rank at most the number of polarization branches, so
//! the eigenvalue is available in closed form), which collapses the surrogate
//! into a plain cosine sum
//! `Fbar(q) = sum 2 |b_l| cos(2 pi d_l^T q / lambda - angle(b_l))`
//! with analytic gradient, Hessian, and the Lipschitz-style constant
//! `delta = 24 pi^2 / lambda^2 * sum |b_l|` dominating the Hessian. One
//! iteration takes a gradient step of length `1/delta` and clamps back into
//! the box; each step is re-anchored, so the true objective never decreases.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::scene::BoxRegion;
use crate::Complex;

/// One additive term of the position objective: the paths of a single
/// (UT, realization) pair seen by the AP being optimized.
#[derive(Debug, Clone)]
pub struct PositionTerm {
    dirs: Vec<Vector3<f64>>,
    /// Linear part `B c` with `B = [G^1 a, ..., G^P a]`.
    b0: DVector<Complex>,
    /// Quadratic penalty matrix `B V B^H` (Hermitian PSD, rank <= P).
    c_tilde: DMatrix<Complex>,
    /// Largest eigenvalue of `c_tilde`, exact from the P x P product.
    eigmax: f64,
    weight: f64,
}

impl PositionTerm {
    /// Builds a term from the per-path arrival directions, gain-scaled
    /// path-response columns `B` (one column per polarization branch), linear
    /// coefficients `c`, branch coupling `V`, and an averaging weight.
    pub fn new(
        dirs: Vec<Vector3<f64>>,
        gain_prv: DMatrix<Complex>,
        c: DVector<Complex>,
        v: DMatrix<Complex>,
        weight: f64,
    ) -> Self {
        assert_eq!(dirs.len(), gain_prv.nrows());
        assert_eq!(gain_prv.ncols(), c.len());
        assert_eq!(v.nrows(), c.len());
        let b0 = &gain_prv * &c;
        // f^H B W B^H f reproduces the branch quadratic h_S^H V h_S exactly
        // when W = V^T (h_S collects B^T conj(f), which conjugates V's
        // off-diagonal couplings).
        let v_t = v.transpose();
        let c_tilde = &gain_prv * &v_t * gain_prv.adjoint();
        let eigmax = product_eigmax(&v_t, &(gain_prv.adjoint() * &gain_prv));
        Self {
            dirs,
            b0,
            c_tilde,
            eigmax,
            weight,
        }
    }

    pub fn num_paths(&self) -> usize {
        self.dirs.len()
    }
}

/// Largest eigenvalue of `B V B^H`, computed from the small product
/// `V (B^H B)` whose eigenvalues are real and non-negative.
fn product_eigmax(v: &DMatrix<Complex>, gram: &DMatrix<Complex>) -> f64 {
    let s = v * gram;
    match s.nrows() {
        0 => 0.0,
        1 => s[(0, 0)].re.max(0.0),
        2 => {
            let tr = (s[(0, 0)] + s[(1, 1)]).re;
            let det = (s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)]).re;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            (0.5 * (tr + disc)).max(0.0)
        }
        // Branch counts beyond dual polarization do not occur.
        n => panic!("unsupported branch count {n}"),
    }
}

/// Phase vector `f(q)` with entry `l = exp(j 2 pi d_l^T q / lambda)`.
fn phase_vector(dirs: &[Vector3<f64>], q: &Vector3<f64>, lambda: f64) -> DVector<Complex> {
    DVector::from_iterator(
        dirs.len(),
        dirs.iter()
            .map(|d| Complex::from_polar(1.0, std::f64::consts::TAU * d.dot(q) / lambda)),
    )
}

/// The position subproblem for one AP.
#[derive(Debug, Clone)]
pub struct PositionProblem {
    pub terms: Vec<PositionTerm>,
    pub lambda: f64,
    pub region: BoxRegion,
}

impl PositionProblem {
    /// True subproblem objective `F(q)`, the extraction of the transformed
    /// sum-rate objective restricted to this AP's channel entries.
    pub fn objective(&self, q: &Vector3<f64>) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let f = phase_vector(&t.dirs, q, self.lambda);
            let lin: Complex = f.dotc(&t.b0);
            let quad = (f.adjoint() * &t.c_tilde * &f)[(0, 0)].re;
            total += t.weight * (2.0 * lin.re - quad);
        }
        total
    }

    /// Majorization-minimization surrogate anchored at `anchor`.
    pub fn build_surrogate(&self, anchor: &Vector3<f64>) -> SurrogateTerms {
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut constant = 0.0;
        let mut delta = 0.0;
        for t in &self.terms {
            let f_anchor = phase_vector(&t.dirs, anchor, self.lambda);
            // b = (eigmax I - C) f_anchor + b0
            let mut b = &f_anchor * Complex::from(t.eigmax) - &t.c_tilde * &f_anchor;
            b += &t.b0;
            let amps: Vec<f64> = b.iter().map(|z| z.norm()).collect();
            let phases: Vec<f64> = b.iter().map(|z| z.arg()).collect();
            delta += t.weight * amps.iter().sum::<f64>();
            // Offset making fbar + constant a minorant of the objective:
            // -eigmax L - Re{f_i^H (eigmax I - C) f_i}, both constant in q.
            let l = t.num_paths() as f64;
            let quad_anchor = (f_anchor.adjoint() * &t.c_tilde * &f_anchor)[(0, 0)].re;
            constant += t.weight * (-t.eigmax * l - (t.eigmax * l - quad_anchor));
            terms.push(TermSurrogate {
                dirs: t.dirs.clone(),
                amps,
                phases,
                eigmax: t.eigmax,
                c_tilde: t.c_tilde.clone(),
                f_anchor,
                weight: t.weight,
            });
        }
        delta *= 24.0 * std::f64::consts::PI.powi(2) / self.lambda.powi(2);
        SurrogateTerms {
            anchor: *anchor,
            lambda: self.lambda,
            terms,
            constant,
            delta,
        }
    }
}

/// One term of the anchored surrogate.
#[derive(Debug, Clone)]
pub struct TermSurrogate {
    pub dirs: Vec<Vector3<f64>>,
    /// `|b_l|`
    pub amps: Vec<f64>,
    /// `angle(b_l)`
    pub phases: Vec<f64>,
    pub eigmax: f64,
    pub c_tilde: DMatrix<Complex>,
    pub f_anchor: DVector<Complex>,
    pub weight: f64,
}

/// Anchored surrogate of the position objective: cosine sum, gradient,
/// Hessian, the dominating constant `delta`, and the offset tying it back to
/// the true objective.
#[derive(Debug, Clone)]
pub struct SurrogateTerms {
    pub anchor: Vector3<f64>,
    pub lambda: f64,
    pub terms: Vec<TermSurrogate>,
    /// `fbar(q) + constant <= F(q)` for all q, with equality at the anchor.
    pub constant: f64,
    /// `delta I >= hessian(fbar)(q)` everywhere.
    pub delta: f64,
}

impl SurrogateTerms {
    fn angle(&self, d: &Vector3<f64>, q: &Vector3<f64>, phase: f64) -> f64 {
        std::f64::consts::TAU * d.dot(q) / self.lambda - phase
    }

    /// `Fbar(q) = sum 2 |b_l| cos(2 pi d_l^T q / lambda - angle(b_l))`.
    pub fn f_bar(&self, q: &Vector3<f64>) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let mut acc = 0.0;
            for l in 0..t.dirs.len() {
                acc += 2.0 * t.amps[l] * self.angle(&t.dirs[l], q, t.phases[l]).cos();
            }
            total += t.weight * acc;
        }
        total
    }

    /// Analytic gradient of `f_bar`.
    pub fn grad(&self, q: &Vector3<f64>) -> Vector3<f64> {
        let scale = -4.0 * std::f64::consts::PI / self.lambda;
        let mut g = Vector3::zeros();
        for t in &self.terms {
            for l in 0..t.dirs.len() {
                let s = t.amps[l] * self.angle(&t.dirs[l], q, t.phases[l]).sin();
                g += t.dirs[l] * (t.weight * scale * s);
            }
        }
        g
    }

    /// Analytic Hessian of `f_bar`.
    pub fn hessian(&self, q: &Vector3<f64>) -> Matrix3<f64> {
        let scale = -8.0 * std::f64::consts::PI.powi(2) / self.lambda.powi(2);
        let mut h = Matrix3::zeros();
        for t in &self.terms {
            for l in 0..t.dirs.len() {
                let c = t.amps[l] * self.angle(&t.dirs[l], q, t.phases[l]).cos();
                let d = &t.dirs[l];
                h += d * d.transpose() * (t.weight * scale * c);
            }
        }
        h
    }

    /// Minorant of the true objective: `f_bar(q) + constant`.
    pub fn minorant(&self, q: &Vector3<f64>) -> f64 {
        self.f_bar(q) + self.constant
    }

    /// Actual quadratic penalty `f^H C f` of term `idx` at `q` (unweighted).
    pub fn penalty_value(&self, idx: usize, q: &Vector3<f64>) -> f64 {
        let t = &self.terms[idx];
        let f = phase_vector(&t.dirs, q, self.lambda);
        (f.adjoint() * &t.c_tilde * &f)[(0, 0)].re
    }

    /// Majorized upper bound on the quadratic penalty of term `idx` at `q`:
    /// `f^H L f - 2 Re{f^H (L - C) f_i} + f_i^H (L - C) f_i` with
    /// `L = eigmax I`. Equals the penalty at the anchor.
    pub fn penalty_bound(&self, idx: usize, q: &Vector3<f64>) -> f64 {
        let t = &self.terms[idx];
        let f = phase_vector(&t.dirs, q, self.lambda);
        let lam_f: DVector<Complex> = &f * Complex::from(t.eigmax);
        let gap_anchor = &t.f_anchor * Complex::from(t.eigmax) - &t.c_tilde * &t.f_anchor;
        let quad = f.dotc(&lam_f).re;
        let cross = f.dotc(&gap_anchor).re;
        let anchor = t.f_anchor.dotc(&gap_anchor).re;
        quad - 2.0 * cross + anchor
    }
}

/// Componentwise clamp of a position onto its moving region.
pub fn project_box(q: &Vector3<f64>, region: &BoxRegion) -> Vector3<f64> {
    region.clamp(q)
}

/// Outcome of one position-subproblem solve.
#[derive(Debug, Clone)]
pub struct PositionResult {
    pub position: Vector3<f64>,
    /// True objective at the start point and after each accepted step;
    /// non-decreasing.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Projected majorize-and-step iteration: at each anchor take the exact
/// maximizer of the quadratic minorant, `clamp(q + grad/delta)`, and stop
/// when the surrogate improvement drops below `eps1`, the step count hits
/// `max_iters`, or floating-point noise produces a non-improving step.
pub fn optimize_position(
    problem: &PositionProblem,
    start: &Vector3<f64>,
    eps1: f64,
    max_iters: usize,
) -> PositionResult {
    let mut q = project_box(start, &problem.region);
    let mut trace = vec![problem.objective(&q)];
    let mut iterations = 0;

    for _ in 0..max_iters {
        let surrogate = problem.build_surrogate(&q);
        if surrogate.delta <= 0.0 {
            // All |b| vanish: the objective is constant in q.
            break;
        }
        let step = surrogate.grad(&q) / surrogate.delta;
        let candidate = project_box(&(q + step), &problem.region);
        let fbar_old = surrogate.f_bar(&q);
        let fbar_new = surrogate.f_bar(&candidate);
        if fbar_new < fbar_old {
            break;
        }
        let obj_new = problem.objective(&candidate);
        if obj_new < *trace.last().unwrap() {
            break;
        }
        q = candidate;
        trace.push(obj_new);
        iterations += 1;
        if fbar_new - fbar_old < eps1 {
            break;
        }
    }

    PositionResult {
        position: q,
        trace,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const LAMBDA: f64 = 0.125;

    fn unit_box() -> BoxRegion {
        BoxRegion {
            min: Vector3::zeros(),
            max: Vector3::new(2.0 * LAMBDA, 2.0 * LAMBDA, 2.0 * LAMBDA),
        }
    }

    fn random_dir(rng: &mut ChaCha12Rng) -> Vector3<f64> {
        Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize()
    }

    fn random_q(rng: &mut ChaCha12Rng) -> Vector3<f64> {
        Vector3::new(
            rng.random_range(0.0..2.0 * LAMBDA),
            rng.random_range(0.0..2.0 * LAMBDA),
            rng.random_range(0.0..2.0 * LAMBDA),
        )
    }

    /// Random uni-polarized problem with K terms of L paths each.
    fn random_problem(k: usize, l: usize, rng: &mut ChaCha12Rng) -> PositionProblem {
        let terms = (0..k)
            .map(|_| {
                let dirs: Vec<_> = (0..l).map(|_| random_dir(rng)).collect();
                let b = DMatrix::from_fn(l, 1, |_, _| {
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let c = DVector::from_fn(1, |_, _| {
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let v = DMatrix::from_element(1, 1, Complex::from(rng.random_range(0.0..1.0)));
                PositionTerm::new(dirs, b, c, v, 1.0)
            })
            .collect();
        PositionProblem {
            terms,
            lambda: LAMBDA,
            region: unit_box(),
        }
    }

    #[test]
    fn project_box_cases() {
        let region = unit_box();
        let inside = Vector3::new(0.1, 0.1, 0.1);
        assert_eq!(project_box(&inside, &region), inside);
        let above = Vector3::new(1.0, 1.0, 1.0);
        assert_eq!(project_box(&above, &region), region.max);
        let mixed = Vector3::new(-0.5, 0.1, 9.0);
        assert_eq!(
            project_box(&mixed, &region),
            Vector3::new(0.0, 0.1, 2.0 * LAMBDA)
        );
    }

    #[test]
    fn mm_bound_tight_at_anchor() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10 {
            let problem = random_problem(3, 4, &mut rng);
            let anchor = random_q(&mut rng);
            let s = problem.build_surrogate(&anchor);
            for idx in 0..s.terms.len() {
                let bound = s.penalty_bound(idx, &anchor);
                let actual = s.penalty_value(idx, &anchor);
                assert!(
                    (bound - actual).abs() < 1e-10 * (1.0 + actual.abs()),
                    "anchor gap {}",
                    bound - actual
                );
            }
            // The minorant touches the true objective at the anchor.
            assert_relative_eq!(
                s.minorant(&anchor),
                problem.objective(&anchor),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn mm_bound_valid_at_random_points() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let problem = random_problem(3, 4, &mut rng);
        let anchor = random_q(&mut rng);
        let s = problem.build_surrogate(&anchor);
        for _ in 0..100 {
            let q = random_q(&mut rng);
            for idx in 0..s.terms.len() {
                assert!(
                    s.penalty_bound(idx, &q) >= s.penalty_value(idx, &q) - 1e-9,
                    "bound violated"
                );
            }
            assert!(s.minorant(&q) <= problem.objective(&q) + 1e-9);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_surrogate() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let dirs: Vec<_> = (0..4).map(|_| random_dir(&mut rng)).collect();
        let b = DMatrix::from_fn(4, 1, |_, _| Complex::new(0.3, -0.2));
        let term = PositionTerm::new(
            dirs,
            b,
            DVector::from_element(1, Complex::ZERO),
            DMatrix::from_element(1, 1, Complex::ZERO),
            1.0,
        );
        let problem = PositionProblem {
            terms: vec![term],
            lambda: LAMBDA,
            region: unit_box(),
        };
        let s = problem.build_surrogate(&Vector3::zeros());
        assert_eq!(s.delta, 0.0);
        for _ in 0..5 {
            let q = random_q(&mut rng);
            assert_eq!(s.f_bar(&q), 0.0);
            assert_eq!(problem.objective(&q), 0.0);
        }
    }

    #[test]
    fn full_bound_expression_offsets_f_bar_by_a_constant() {
        // The literal surrogate right-hand side differs from f_bar only by
        // terms constant in q, because f^H (eigmax I) f = eigmax * L for
        // unit-modulus phase vectors.
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let problem = random_problem(2, 5, &mut rng);
        let anchor = random_q(&mut rng);
        let s = problem.build_surrogate(&anchor);
        let rhs_full = |q: &Vector3<f64>| -> f64 {
            let mut total = s.f_bar(q);
            for t in &s.terms {
                let f = phase_vector(&t.dirs, q, s.lambda);
                let lam_quad = f.dotc(&f).re * t.eigmax; // literal f^H Lambda f
                let gap = &t.f_anchor * Complex::from(t.eigmax) - &t.c_tilde * &t.f_anchor;
                let anchor_quad = t.f_anchor.dotc(&gap).re;
                total -= t.weight * (lam_quad + anchor_quad);
            }
            total
        };
        let offsets: Vec<f64> = (0..20)
            .map(|_| {
                let q = random_q(&mut rng);
                rhs_full(&q) - s.f_bar(&q)
            })
            .collect();
        let spread = offsets.iter().cloned().fold(f64::MIN, f64::max)
            - offsets.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-9, "offset spread {spread}");
    }

    #[test]
    fn f_bar_single_real_path() {
        // One path with b real positive: f_bar(0) = 2 |b|.
        let dirs = vec![Vector3::new(1.0, 0.0, 0.0)];
        let b = DMatrix::from_element(1, 1, Complex::from(0.7));
        let term = PositionTerm::new(
            dirs,
            b,
            DVector::from_element(1, Complex::ONE),
            DMatrix::from_element(1, 1, Complex::ZERO),
            1.0,
        );
        let problem = PositionProblem {
            terms: vec![term],
            lambda: LAMBDA,
            region: unit_box(),
        };
        let s = problem.build_surrogate(&Vector3::zeros());
        assert_relative_eq!(s.f_bar(&Vector3::zeros()), 2.0 * 0.7, epsilon = 1e-12);
    }

    #[test]
    fn f_bar_bounded_by_amplitude_sum() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let problem = random_problem(3, 5, &mut rng);
        let s = problem.build_surrogate(&random_q(&mut rng));
        let cap: f64 = s
            .terms
            .iter()
            .map(|t| t.weight * 2.0 * t.amps.iter().sum::<f64>())
            .sum();
        for _ in 0..50 {
            assert!(s.f_bar(&random_q(&mut rng)).abs() <= cap + 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let problem = random_problem(3, 4, &mut rng);
        let s = problem.build_surrogate(&random_q(&mut rng));
        let h = 1e-7 * LAMBDA;
        for _ in 0..50 {
            let q = random_q(&mut rng);
            let g = s.grad(&q);
            let mut fd = Vector3::zeros();
            for axis in 0..3 {
                let mut qp = q;
                let mut qm = q;
                qp[axis] += h;
                qm[axis] -= h;
                fd[axis] = (s.f_bar(&qp) - s.f_bar(&qm)) / (2.0 * h);
            }
            let rel = (g - fd).norm() / g.norm().max(1e-12);
            assert!(rel < 1e-6, "relative gradient error {rel}");
        }
    }

    #[test]
    fn gradient_zero_at_cosine_peak() {
        // Single path, b real positive: the peak sits at q = 0 where the
        // angle is zero.
        let dirs = vec![Vector3::new(0.6, 0.48, 0.64).normalize()];
        let term = PositionTerm::new(
            dirs,
            DMatrix::from_element(1, 1, Complex::from(1.0)),
            DVector::from_element(1, Complex::ONE),
            DMatrix::from_element(1, 1, Complex::ZERO),
            1.0,
        );
        let problem = PositionProblem {
            terms: vec![term],
            lambda: LAMBDA,
            region: unit_box(),
        };
        let s = problem.build_surrogate(&Vector3::zeros());
        assert!(s.grad(&Vector3::zeros()).norm() < 1e-12);
    }

    #[test]
    fn gradient_zero_for_zero_b() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let dirs: Vec<_> = (0..3).map(|_| random_dir(&mut rng)).collect();
        let term = PositionTerm::new(
            dirs,
            DMatrix::zeros(3, 1),
            DVector::from_element(1, Complex::ONE),
            DMatrix::from_element(1, 1, Complex::ZERO),
            1.0,
        );
        let problem = PositionProblem {
            terms: vec![term],
            lambda: LAMBDA,
            region: unit_box(),
        };
        let s = problem.build_surrogate(&random_q(&mut rng));
        assert_eq!(s.grad(&random_q(&mut rng)), Vector3::zeros());
    }

    #[test]
    fn delta_dominates_hessian() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let problem = random_problem(3, 4, &mut rng);
        let s = problem.build_surrogate(&random_q(&mut rng));
        for _ in 0..100 {
            let q = random_q(&mut rng);
            let gap = Matrix3::identity() * s.delta - s.hessian(&q);
            let min_eig = gap
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::MAX, f64::min);
            assert!(min_eig >= -1e-9, "delta fails to dominate: {min_eig}");
        }
    }

    #[test]
    fn delta_scales_linearly_with_b() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let dirs: Vec<_> = (0..4).map(|_| random_dir(&mut rng)).collect();
        let b = DMatrix::from_fn(4, 1, |_, _| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let make = |scale: f64| {
            let term = PositionTerm::new(
                dirs.clone(),
                &b * Complex::from(scale),
                DVector::from_element(1, Complex::ONE),
                DMatrix::from_element(1, 1, Complex::ZERO),
                1.0,
            );
            PositionProblem {
                terms: vec![term],
                lambda: LAMBDA,
                region: unit_box(),
            }
            .build_surrogate(&Vector3::zeros())
            .delta
        };
        assert_relative_eq!(make(2.0), 2.0 * make(1.0), epsilon = 1e-10);
    }

    #[test]
    fn optimizer_skips_on_zero_delta() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let dirs: Vec<_> = (0..3).map(|_| random_dir(&mut rng)).collect();
        let term = PositionTerm::new(
            dirs,
            DMatrix::zeros(3, 1),
            DVector::from_element(1, Complex::ONE),
            DMatrix::from_element(1, 1, Complex::ZERO),
            1.0,
        );
        let problem = PositionProblem {
            terms: vec![term],
            lambda: LAMBDA,
            region: unit_box(),
        };
        let start = Vector3::new(0.01, 0.02, 0.03);
        let res = optimize_position(&problem, &start, 1e-3, 100);
        assert_eq!(res.position, start);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn optimizer_aligns_single_path_phase() {
        // Single LoS path with real positive coefficient: the step sequence
        // drives the cosine angle to zero modulo 2 pi, and the magnitude of
        // the channel stays constant (phase-only dependence).
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..5 {
            let dirs = vec![random_dir(&mut rng)];
            let a = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b = DMatrix::from_element(1, 1, a);
            let c = DVector::from_element(1, Complex::from(rng.random_range(0.2..1.0)));
            let v = DMatrix::from_element(1, 1, Complex::from(1e-3));
            let term = PositionTerm::new(dirs.clone(), b.clone(), c, v, 1.0);
            let problem = PositionProblem {
                terms: vec![term],
                lambda: LAMBDA,
                region: unit_box(),
            };
            let start = random_q(&mut rng);
            let res = optimize_position(&problem, &start, 1e-9, 2000);
            assert!(problem.objective(&res.position) >= problem.objective(&start) - 1e-12);

            // Terminal angle of the surrogate cosine is ~0 mod 2 pi.
            let s = problem.build_surrogate(&res.position);
            let t = &s.terms[0];
            let angle = std::f64::consts::TAU * t.dirs[0].dot(&res.position) / LAMBDA
                - t.phases[0];
            assert!(angle.cos() > 0.999, "cos(angle) = {}", angle.cos());
        }
    }

    #[test]
    fn optimizer_trace_monotone_and_feasible() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..10 {
            let problem = random_problem(3, 4, &mut rng);
            let res = optimize_position(&problem, &random_q(&mut rng), 1e-6, 300);
            for pair in res.trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-12);
            }
            assert!(problem.region.contains(&res.position));
        }
    }

    #[test]
    fn optimizer_matches_grid_search_on_tiny_instance() {
        // K = 1, L = 2 with a genuine interference-style quadratic term; the
        // global maximum over the box is found by a dense grid.
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for trial in 0..5 {
            let dirs: Vec<_> = (0..2).map(|_| random_dir(&mut rng)).collect();
            let b = DMatrix::from_fn(2, 1, |_, _| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let c = DVector::from_fn(1, |_, _| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let v = DMatrix::from_element(1, 1, Complex::from(rng.random_range(0.0..0.3)));
            let problem = PositionProblem {
                terms: vec![PositionTerm::new(dirs, b, c, v, 1.0)],
                lambda: LAMBDA,
                region: unit_box(),
            };

            let n = 41;
            let mut best = f64::MIN;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let q = Vector3::new(
                            2.0 * LAMBDA * i as f64 / (n - 1) as f64,
                            2.0 * LAMBDA * j as f64 / (n - 1) as f64,
                            2.0 * LAMBDA * k as f64 / (n - 1) as f64,
                        );
                        best = best.max(problem.objective(&q));
                    }
                }
            }

            let res = optimize_position(&problem, &random_q(&mut rng), 1e-9, 2000);
            let achieved = problem.objective(&res.position);
            assert!(
                achieved >= best - 0.01 * best.abs().max(1e-6),
                "trial {trial}: achieved {achieved} vs grid {best}"
            );
        }
    }
}
