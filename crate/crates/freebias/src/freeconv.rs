//! Free additive convolution via subordination, convolution roots, and the
//! Voiculescu/R-transforms via holomorphic inversion of F.

use crate::error::{Error, Result};
use crate::holomorphic::{
    cauchy_transform, AnalyticTransform, TransformKind, TruncatedCone,
};
use crate::measure::ProbabilityMeasure;
use crate::C64;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// The two subordination functions for a pair of laws, plus the inputs they
/// came from.
#[derive(Debug, Clone)]
pub struct SubordinatorPair {
    pub omega_left: AnalyticTransform,
    pub omega_right: AnalyticTransform,
    pub mu: ProbabilityMeasure,
    pub nu: ProbabilityMeasure,
}

/// A certified (heuristic) cone of univalence for F.
#[derive(Debug, Clone)]
pub struct ConeEstimate {
    pub cone: TruncatedCone,
    pub basis: String,
}

impl ConeEstimate {
    /// Default cone from the variance bound |phi(w)| <= 2 sigma^2 / Im w:
    /// Gamma_{1, beta} with beta = max(10 sigma, 10).
    pub fn from_variance(variance: f64) -> Self {
        let beta = (10.0 * variance.max(0.0).sqrt()).max(10.0);
        ConeEstimate {
            cone: TruncatedCone { alpha: 1.0, beta },
            basis: format!("variance bound, sigma^2 = {variance}"),
        }
    }
}

/// Voiculescu transform value with its cone-membership flag.
#[derive(Debug, Clone, Copy)]
pub struct PhiValue {
    pub value: C64,
    /// False when the point is outside the certified cone (the value is
    /// still the analytic continuation computed by the solver).
    pub in_cone: bool,
}

fn h_of(f: &AnalyticTransform, w: C64) -> Result<C64> {
    Ok(f.eval(w)? - w)
}

/// Subordinator on the transform level: the fixed point of
/// w -> z + h_nu(z + h_mu(w)), h = F - id, iterated from w0 = z. The map is
/// an analytic self-map of C+, so plain iteration converges to its
/// Denjoy-Wolff point.
pub fn subordinator_transforms(
    f_mu: &AnalyticTransform,
    f_nu: &AnalyticTransform,
    z: C64,
    tol: f64,
    max_iter: usize,
) -> Result<C64> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("subordinator tolerance must be positive".into()));
    }
    let map = |w: C64| -> Result<C64> { Ok(z + h_of(f_nu, z + h_of(f_mu, w)?)?) };
    let mut w = z;
    let mut last_step = f64::INFINITY;
    // Plain iteration converges globally but its rate degrades to 1 near
    // the real axis, so switch to damped Newton on T(w) - w once the easy
    // contraction has been used up.
    for _ in 0..300.min(max_iter) {
        let next = map(w)?;
        last_step = (next - w).norm();
        w = next;
        if last_step < tol {
            return Ok(w);
        }
    }
    for _ in 0..max_iter {
        let r = map(w)? - w;
        last_step = r.norm();
        if last_step < tol {
            return Ok(w);
        }
        let h = 1e-7 * (1.0 + w.norm());
        let tp = (map(w + h)? - map(w - h)?) / (2.0 * h);
        let deriv = tp - 1.0;
        if deriv.norm() < 1e-300 {
            break;
        }
        let mut step = r / deriv;
        let mut k = 0;
        while (w - step).im <= 0.0 && k < 60 {
            step *= 0.5;
            k += 1;
        }
        if k == 60 {
            break;
        }
        w -= step;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: last_step,
        last: w,
    })
}

/// omega_{mu,nu}(z): the subordination function with G_{mu boxplus nu}(z) =
/// G_mu(omega_{mu,nu}(z)).
pub fn subordinator(
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    z: C64,
    tol: f64,
) -> Result<C64> {
    let f_mu = cauchy_transform(mu).reciprocal();
    let f_nu = cauchy_transform(nu).reciprocal();
    subordinator_transforms(&f_mu, &f_nu, z, tol, DEFAULT_MAX_ITER)
}

/// Both subordination functions as lazily-evaluated transforms.
pub fn subordinator_pair(mu: &ProbabilityMeasure, nu: &ProbabilityMeasure) -> SubordinatorPair {
    let (m, n) = (mu.clone(), nu.clone());
    let left = {
        let (m, n) = (m.clone(), n.clone());
        AnalyticTransform::new(TransformKind::Derived, "omega_left", move |z| {
            subordinator(&m, &n, z, DEFAULT_TOL)
        })
    };
    let right = AnalyticTransform::new(TransformKind::Derived, "omega_right", move |z| {
        subordinator(&n, &m, z, DEFAULT_TOL)
    });
    SubordinatorPair {
        omega_left: left,
        omega_right: right,
        mu: mu.clone(),
        nu: nu.clone(),
    }
}

/// G of the free convolution of two transform-level laws.
pub fn free_convolve_transforms(
    g_mu: &AnalyticTransform,
    g_nu: &AnalyticTransform,
) -> AnalyticTransform {
    let g = g_mu.clone();
    let f_mu = g_mu.reciprocal();
    let f_nu = g_nu.reciprocal();
    AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("boxplus({},{})", g_mu.provenance, g_nu.provenance),
        move |z| {
            let w = subordinator_transforms(&f_mu, &f_nu, z, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            g.eval(w)
        },
    )
}

pub fn free_convolve(mu: &ProbabilityMeasure, nu: &ProbabilityMeasure) -> AnalyticTransform {
    free_convolve_transforms(&cauchy_transform(mu), &cauchy_transform(nu))
}

/// G of mu^{boxplus n} by left-folding the subordination evaluator.
pub fn nfold_convolve(mu: &ProbabilityMeasure, n: usize) -> Result<AnalyticTransform> {
    if n == 0 {
        return Err(Error::Precondition("nfold_convolve requires n >= 1".into()));
    }
    let g = cauchy_transform(mu);
    let mut acc = g.clone();
    for _ in 1..n {
        acc = free_convolve_transforms(&acc, &g);
    }
    Ok(acc)
}

/// Damped Newton for F(w) = z, seeded at w0; the step is halved while the
/// iterate would leave C+. The derivative is the (holomorphic) central
/// difference of F, which is exact to O(h^2) everywhere we need it.
pub fn f_inverse(
    f: &AnalyticTransform,
    z: C64,
    seed: C64,
    tol: f64,
    max_iter: usize,
) -> Result<C64> {
    let mut w = seed;
    if !(w.im > 0.0) {
        w = C64::new(w.re, z.im.max(1e-6));
    }
    let scale = 1.0 + z.norm();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let fw = f.eval(w)?;
        residual = (fw - z).norm();
        if residual < tol * scale {
            return Ok(w);
        }
        let h = 1e-7 * (1.0 + w.norm());
        let fp = (f.eval(w + h)? - f.eval(w - h)?) / (2.0 * h);
        if fp.norm() < 1e-300 {
            break;
        }
        let mut step = (fw - z) / fp;
        // keep the iterate in the upper half plane
        let mut k = 0;
        while (w - step).im <= 0.0 && k < 60 {
            step *= 0.5;
            k += 1;
        }
        if k == 60 {
            break;
        }
        w -= step;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
        last: w,
    })
}

/// phi_mu(z) = F_mu^{-1}(z) - z on the transform level, with an explicit cone.
pub fn voiculescu_transform_of(
    f: &AnalyticTransform,
    z: C64,
    cone: &ConeEstimate,
    tol: f64,
    max_iter: usize,
) -> Result<PhiValue> {
    let w = f_inverse(f, z, z, tol, max_iter)?;
    Ok(PhiValue {
        value: w - z,
        in_cone: cone.cone.contains(z),
    })
}

/// phi_mu(z) with the default variance-based cone.
pub fn voiculescu_transform(
    mu: &ProbabilityMeasure,
    z: C64,
    cone_hint: Option<ConeEstimate>,
) -> Result<PhiValue> {
    let cone = cone_hint.unwrap_or_else(|| {
        ConeEstimate::from_variance(mu.moments().variance.unwrap_or(1.0))
    });
    let f = cauchy_transform(mu).reciprocal();
    voiculescu_transform_of(&f, z, &cone, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// R_mu(z) = phi_mu(1/z) for small z off the real line.
pub fn r_transform(mu: &ProbabilityMeasure, z_small: C64) -> Result<PhiValue> {
    if z_small.norm() == 0.0 {
        return Err(Error::Precondition("r_transform requires z != 0".into()));
    }
    let w = 1.0 / z_small;
    // F-inversion runs on C+; reach C- arguments by Schwarz reflection.
    if w.im > 0.0 {
        voiculescu_transform(mu, w, None)
    } else if w.im < 0.0 {
        let phi = voiculescu_transform(mu, w.conj(), None)?;
        Ok(PhiValue {
            value: phi.value.conj(),
            in_cone: phi.in_cone,
        })
    } else {
        Err(Error::Precondition("r_transform requires z off the real axis".into()))
    }
}

/// Solve omega_n(z) = z/n + (1 - 1/n) F_mu(z) = y and return (z, F_mu(z));
/// F_mu(z) is F of the n-th convolution root at y.
pub(crate) fn convolution_root_with_z(
    f_mu: &AnalyticTransform,
    n: f64,
    y: C64,
    tol: f64,
    max_iter: usize,
) -> Result<(C64, C64)> {
    if !(n >= 1.0) {
        return Err(Error::Precondition("convolution root requires n >= 1".into()));
    }
    let c = 1.0 - 1.0 / n;
    // omega_n has several preimages of y once n is large; the root-law one
    // sits near n y - (n-1) F_mu(y) (from F_root ~ F_mu to first order), so
    // seed there rather than at y itself.
    let mut z = n * y - (n - 1.0) * f_mu.eval(y)?;
    if !(z.im > 0.0) {
        z = C64::new(z.re, y.im);
    }
    let scale = 1.0 + y.norm();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let fz = f_mu.eval(z)?;
        let r = z / n + c * fz - y;
        residual = r.norm();
        if residual < tol * scale {
            return Ok((z, fz));
        }
        let h = 1e-7 * (1.0 + z.norm());
        let fp = (f_mu.eval(z + h)? - f_mu.eval(z - h)?) / (2.0 * h);
        let deriv = C64::new(1.0 / n, 0.0) + c * fp;
        if deriv.norm() < 1e-300 {
            break;
        }
        let mut step = r / deriv;
        let mut k = 0;
        while (z - step).im <= 0.0 && k < 60 {
            step *= 0.5;
            k += 1;
        }
        if k == 60 {
            break;
        }
        z -= step;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
        last: z,
    })
}

/// F_nu(y) where nu^{boxplus n} = mu, via the closed-form subordinator
/// omega_n of the root decomposition.
pub fn convolution_root_f(
    mu: &ProbabilityMeasure,
    n: f64,
    y: C64,
    tol: f64,
) -> Result<C64> {
    let f_mu = cauchy_transform(mu).reciprocal();
    Ok(convolution_root_with_z(&f_mu, n, y, tol, DEFAULT_MAX_ITER)?.1)
}

/// A priori support bound for all convolution roots: hull within [-R, R]
/// after centering gives [-R - sigma^2 - 1, R + sigma^2 + 1], shifted back.
pub fn root_support_bound(mu: &ProbabilityMeasure) -> Result<(f64, f64)> {
    let (lo, hi) = mu.support_hull();
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition("root support bound needs compact support".into()));
    }
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let var = m.variance_or_err()?;
    let r = (hi - mean).abs().max((lo - mean).abs());
    Ok((mean - r - var - 1.0, mean + r + var + 1.0))
}

/// Residual of the iid replace-one identity
/// G_{S_n_circ}(z) = G_{X_circ}(omega_{X, S_{n-1}}(z)) for S_n = mu^{boxplus n}.
pub fn replace_one_check(mu: &ProbabilityMeasure, n: usize, z: C64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("replace_one_check requires n >= 2".into()));
    }
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let var = m.variance_or_err()?;
    if mean.abs() > 1e-12 || !(var > 0.0) {
        return Err(Error::Precondition(
            "replace_one_check requires mean 0 and nonzero variance".into(),
        ));
    }
    let g_sn = nfold_convolve(mu, n)?;
    let lhs = crate::transforms::free_zero_bias_transform(&g_sn, 0.0, n as f64 * var)?.eval(z)?;

    let g_rest = nfold_convolve(mu, n - 1)?;
    let f_mu = cauchy_transform(mu).reciprocal();
    let f_rest = g_rest.reciprocal();
    let omega = subordinator_transforms(&f_mu, &f_rest, z, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let rhs = crate::transforms::free_zero_bias(mu)?.eval(omega)?;
    Ok((lhs - rhs).norm())
}
