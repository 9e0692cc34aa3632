//! Free Levy-Khintchine machinery: build freely infinitely divisible laws
//! from Levy triples, recover Levy measures from laws, the compound free
//! Poisson construction, and a closed-form oracle gallery. The gallery
//! functions are deliberately independent code paths from the generic
//! solver so each can check the other.

use crate::error::{Error, Result};
use crate::freeconv::{
    convolution_root_with_z, f_inverse, PhiValue, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::holomorphic::{
    cauchy_transform, principal_cbrt, principal_sqrt, tail_normalization_check,
    AnalyticTransform, TransformKind,
};
use crate::measure::ProbabilityMeasure;
use crate::C64;

/// Residual bound the fixed-point/Newton solution must satisfy in the
/// defining identity (z+m) G - 1 = sigma^2 G G_Y(1/G).
pub const LEVY_RESIDUAL_BOUND: f64 = 1e-9;

/// A free Levy triple (m, sigma^2, law of Y): phi_X(z) = m + sigma^2 G_Y(z).
/// Y needs no moments at all; the moment conditions fall on X.
#[derive(Debug, Clone)]
pub struct LevyTriple {
    pub mean: f64,
    pub variance: f64,
    pub levy: ProbabilityMeasure,
}

impl LevyTriple {
    pub fn new(mean: f64, variance: f64, levy: ProbabilityMeasure) -> Result<Self> {
        if !(variance > 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::Parse("Levy triple requires finite mean and variance > 0".into()));
        }
        Ok(LevyTriple { mean, variance, levy })
    }
}

/// phi_X(z) = m + sigma^2 G_Y(z), analytic on all of C+.
pub fn phi_from_levy(t: &LevyTriple, z: C64) -> Result<C64> {
    let g = cauchy_transform(&t.levy).eval(z)?;
    Ok(t.mean + t.variance * g)
}

/// G_X for the freely infinitely divisible law with the given triple.
/// Solves F_X(z) via the fixed point of w -> z - phi(w) (a self-map of C+,
/// since Im phi <= 0), with a damped-Newton fallback after 200 iterations.
pub fn cauchy_from_levy(t: &LevyTriple) -> AnalyticTransform {
    let triple = t.clone();
    let g_levy = cauchy_transform(&t.levy);
    AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("LK(m={},s2={},{})", t.mean, t.variance, g_levy.provenance),
        move |z| {
            let phi = |w: C64| -> Result<C64> {
                Ok(triple.mean + triple.variance * g_levy.eval(w)?)
            };
            let scale = 1.0 + z.norm();
            let mut w = z;
            let mut converged = false;
            for _ in 0..200 {
                let next = z - phi(w)?;
                let step = (next - w).norm();
                w = next;
                if step < DEFAULT_TOL * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                // Newton on Phi(w) = w + phi(w) - z
                let mut residual = f64::INFINITY;
                let mut done = false;
                for _ in 0..DEFAULT_MAX_ITER {
                    let r = w + phi(w)? - z;
                    residual = r.norm();
                    if residual < DEFAULT_TOL * scale {
                        done = true;
                        break;
                    }
                    let h = 1e-7 * (1.0 + w.norm());
                    let dphi = (phi(w + h)? - phi(w - h)?) / (2.0 * h);
                    let deriv = C64::new(1.0, 0.0) + dphi;
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
                if !done {
                    return Err(Error::NonConvergence {
                        iterations: DEFAULT_MAX_ITER,
                        residual,
                        last: w,
                    });
                }
            }
            let g = 1.0 / w;
            // defining identity: (z-m) G - 1 = sigma^2 G G_Y(F)
            debug_assert!(
                ((z - triple.mean) * g - 1.0 - triple.variance * g * g_levy.eval(w)?).norm()
                    < LEVY_RESIDUAL_BOUND * scale,
                "Levy residual out of bounds at {z}"
            );
            Ok(g)
        },
    )
}

/// G_Y recovered from a freely infinitely divisible law:
/// G_Y(z) = (phi_mu(z) - m) / sigma^2. The tail-normalization check filters
/// inputs that cannot carry an LK structure at the tested scale.
pub fn levy_from_measure(mu: &ProbabilityMeasure) -> Result<AnalyticTransform> {
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let variance = m.variance_or_err()?;
    if !(variance > 0.0) {
        return Err(Error::Precondition("levy_from_measure requires nonzero variance".into()));
    }
    let f = cauchy_transform(mu).reciprocal();
    let t = AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("levy_of({})", f.provenance),
        move |z| {
            let w = f_inverse(&f, z, z, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            Ok((w - z - mean) / variance)
        },
    );
    let tail = tail_normalization_check(&t, 1e3)?;
    if tail > 1e-2 {
        return Err(Error::Verification(format!(
            "not consistent with free infinite divisibility at tested scale (tail defect {tail:.3e})"
        )));
    }
    Ok(t)
}

/// Voiculescu transform of `mu` straight from the triple machinery, kept for
/// callers that want the phi value with its cone flag.
pub fn phi_of_measure(mu: &ProbabilityMeasure, z: C64) -> Result<PhiValue> {
    crate::freeconv::voiculescu_transform(mu, z, None)
}

/// Compound free Poisson triple: rate lambda, iid jumps U give
/// (m, sigma^2, nu) = (lambda E[U], lambda E[U^2], square_bias(U)).
pub fn compound_free_poisson(lambda: f64, jump: &ProbabilityMeasure) -> Result<LevyTriple> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Precondition("compound free Poisson requires lambda > 0".into()));
    }
    let m = jump.moments();
    let eu = m.mean_or_err()?;
    let eu2 = m.second_moment_or_err()?;
    if eu2 == 0.0 {
        return Err(Error::Precondition(
            "compound free Poisson requires nonzero second moment of the jump".into(),
        ));
    }
    LevyTriple::new(lambda * eu, lambda * eu2, crate::transforms::square_bias(jump)?)
}

/// G of the square-biased n-th convolution root at w:
/// G_{X_box_{n,n}}(w) = (w/sigma^2) (F_mu^{-1}(F_root(w)) / F_root(w) - 1),
/// where the Newton iterate of the root solve already is F_mu^{-1}(F_root(w)).
/// mu is centered internally; as n grows the values approach G_Y.
pub fn levy_from_roots(mu: &ProbabilityMeasure, n: f64, w: C64) -> Result<C64> {
    if !(n >= 1.0) {
        return Err(Error::Precondition("levy_from_roots requires n >= 1".into()));
    }
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let variance = m.variance_or_err()?;
    if !(variance > 0.0) {
        return Err(Error::Precondition("levy_from_roots requires nonzero variance".into()));
    }
    // center at the transform level (F_{X-m}(z) = F_X(z+m) - m) so named
    // laws keep their exact closed forms instead of a grid approximation
    let g_mu = cauchy_transform(mu);
    let f = AnalyticTransform::new(
        crate::holomorphic::TransformKind::ReciprocalF,
        format!("centered_F({})", g_mu.provenance),
        // G_{X-m}(z) = G_X(z + m), so F centers by pullback alone.
        move |z| Ok(1.0 / g_mu.eval(z + mean)?),
    );
    let (z_root, f_root) = convolution_root_with_z(&f, n, w, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(w / variance * (z_root / f_root - 1.0))
}

// ----- closed-form gallery -------------------------------------------------

/// Density of the mean-0 variance-sigma^2 law with Levy measure
/// Semicircle(0, t): sigma^2 sqrt(4(sigma^2+t) - x^2) / (2 pi (t x^2 + sigma^4))
/// on |x| <= 2 sqrt(sigma^2 + t).
pub fn gallery_semicircle_levy_density(s2: f64, t: f64, x: f64) -> f64 {
    let disc = 4.0 * (s2 + t) - x * x;
    if disc <= 0.0 {
        return 0.0;
    }
    s2 * disc.sqrt() / (2.0 * std::f64::consts::PI * (t * x * x + s2 * s2))
}

/// Cauchy transform of the "Azadi Tower" law: the root of the depressed
/// cubic G^3 - G + 1/z = 0 with Cauchy asymptotics. The Cardano radical
/// r(z) = cbrt(-1/(2z) + sqrt(1/(4z^2) - 1/27)) (principal branches) gives
/// the three roots u_k = r e^{2 pi i k/3}, G_k = u_k + 1/(3 u_k); exactly one
/// of them lies in the lower half plane for z in C+, and that is G_X(z).
pub fn gallery_azadi_cauchy(z: C64) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::Precondition("gallery_azadi_cauchy needs z in C+".into()));
    }
    let inv2z = -0.5 / z;
    let rad = principal_sqrt(0.25 / (z * z) - 1.0 / 27.0);
    let r = principal_cbrt(inv2z + rad);
    if r.norm() == 0.0 {
        return Err(Error::AmbiguousRoot("degenerate Cardano radical".into()));
    }
    let rot = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut picked: Option<C64> = None;
    let mut u = r;
    for _ in 0..3 {
        let g = u + 1.0 / (3.0 * u);
        if g.im < 0.0 {
            if picked.is_some() {
                return Err(Error::AmbiguousRoot(
                    "two cubic roots in the lower half plane".into(),
                ));
            }
            picked = Some(g);
        }
        u *= rot;
    }
    picked.ok_or_else(|| Error::AmbiguousRoot("no cubic root in the lower half plane".into()))
}

/// Support half-width of the Azadi Tower density: (3/2) sqrt(3).
pub fn azadi_support_radius() -> f64 {
    1.5 * 3.0_f64.sqrt()
}

/// Density of the Azadi Tower law on the punctured interval
/// [-(3/2) sqrt 3, (3/2) sqrt 3] \ {0}.
pub fn gallery_azadi_density(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Precondition(
            "Azadi density formula is singular at 0; evaluate on the punctured interval".into(),
        ));
    }
    let r = 1.5 * 3.0_f64.sqrt();
    if x.abs() >= r {
        return Ok(0.0);
    }
    let s = (0.25 / (x * x) - 1.0 / 27.0).sqrt();
    let a = 0.5 / x.abs();
    Ok(3.0_f64.sqrt() / (2.0 * std::f64::consts::PI) * ((a + s).cbrt() - (a - s).cbrt()))
}

/// Cauchy transform of the mean-0 variance-sigma^2 law with CauchyLaw(0,1)
/// Levy measure: G = (z - i - sqrt((z+i)^2 - 4 sigma^2)) / (2 (sigma^2 - iz)).
/// The square root is realized as sqrt(z+i-2s) sqrt(z+i+2s) (both factors in
/// C+), the branch with the ~(z+i) asymptotics the formula requires.
pub fn gallery_cauchy_levy(s2: f64, z: C64) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::Precondition("gallery_cauchy_levy needs z in C+".into()));
    }
    let i = C64::new(0.0, 1.0);
    let s = s2.sqrt();
    let root = principal_sqrt(z + i - 2.0 * s) * principal_sqrt(z + i + 2.0 * s);
    Ok((z - i - root) / (2.0 * (s2 - i * z)))
}

/// Density of the Cauchy-Levy law, strictly positive on all of R.
pub fn gallery_cauchy_levy_density(s2: f64, x: f64) -> f64 {
    let q = x * x - 1.0 - 4.0 * s2;
    let disc = (q * q + 4.0 * x * x).sqrt();
    let a0 = ((disc + q) / 2.0).max(0.0).sqrt();
    let b0 = ((disc - q) / 2.0).max(0.0).sqrt();
    (x.abs() * a0 + s2 * (b0 + 1.0) - x * x)
        / (2.0 * std::f64::consts::PI * (s2 * s2 + x * x))
}

/// Pick the candidate branch with Cauchy-transform asymptotics: the unique
/// function among the candidates with |iy w(iy) - 1| < threshold at y = 1e3
/// (checked at y = 1e2 as well). Anything else is an ambiguity error.
pub fn polynomial_root_select(
    candidates: &[Box<dyn Fn(C64) -> Result<C64> + '_>],
    threshold: f64,
) -> Result<usize> {
    if candidates.len() < 2 {
        return Err(Error::Precondition("root selection needs at least 2 candidates".into()));
    }
    let score_at = |f: &dyn Fn(C64) -> Result<C64>, y: f64| -> f64 {
        let z = C64::new(0.0, y);
        match f(z) {
            Ok(w) => (z * w - 1.0).norm(),
            Err(_) => f64::INFINITY,
        }
    };
    let mut hits = Vec::new();
    for (k, f) in candidates.iter().enumerate() {
        let s3 = score_at(f, 1e3);
        let s2 = score_at(f, 1e2);
        if s3 < threshold && s2 < 10.0 * threshold {
            hits.push((k, s3));
        }
    }
    match hits.len() {
        0 => Err(Error::AmbiguousRoot(format!(
            "no candidate within {threshold} of Cauchy asymptotics"
        ))),
        1 => Ok(hits[0].0),
        _ => Err(Error::AmbiguousRoot(format!(
            "{} candidates within {threshold} of Cauchy asymptotics",
            hits.len()
        ))),
    }
}
