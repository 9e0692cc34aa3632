//! Complex-analytic kernel: principal roots with the theta-in-[0,2pi)
//! convention, truncated cones (Stolz angles), and Cauchy-type transforms as
//! shareable evaluators on the upper half plane.

use crate::error::{Error, Result};
use crate::measure::ProbabilityMeasure;
use crate::C64;
use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// Principal square root with argument taken in [0, 2pi): for zeta = r e^{i theta},
/// theta in [0, 2pi), returns r^{1/2} e^{i theta/2}. Image lies in the closed
/// upper half plane; holomorphic off [0, infinity).
pub fn principal_sqrt<T: Float + FloatConst>(zeta: Complex<T>) -> Complex<T> {
    let r = zeta.norm();
    if r == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let mut theta = zeta.arg(); // (-pi, pi]
    if theta < T::zero() {
        theta = theta + T::PI() + T::PI();
    }
    Complex::from_polar(r.sqrt(), theta / (T::one() + T::one()))
}

/// Principal cube root with the same [0, 2pi) convention, so that
/// cbrt(-delta) = e^{i pi/3} delta^{1/3} for delta > 0.
pub fn principal_cbrt<T: Float + FloatConst>(zeta: Complex<T>) -> Complex<T> {
    let r = zeta.norm();
    if r == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let mut theta = zeta.arg();
    if theta < T::zero() {
        theta = theta + T::PI() + T::PI();
    }
    let three = T::one() + T::one() + T::one();
    Complex::from_polar(r.cbrt(), theta / three)
}

/// Stolz angle: z belongs iff alpha * Im z > |Re z| and |z| > beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedCone {
    pub alpha: f64,
    pub beta: f64,
}

impl TruncatedCone {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::Precondition("cone parameters must be positive".into()));
        }
        Ok(TruncatedCone { alpha, beta })
    }

    pub fn contains(&self, z: C64) -> bool {
        self.alpha * z.im > z.re.abs() && z.norm() > self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    CauchyG,
    ReciprocalF,
    Voiculescu,
    RTransform,
    Derived,
}

type Evaluator = Arc<dyn Fn(C64) -> Result<C64> + Send + Sync>;

/// A holomorphic function on C+, carried around as a pure evaluator plus a
/// tag saying which half-plane contract it promises.
#[derive(Clone)]
pub struct AnalyticTransform {
    evaluator: Evaluator,
    pub kind: TransformKind,
    pub provenance: String,
}

impl fmt::Debug for AnalyticTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticTransform")
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl AnalyticTransform {
    pub fn new(
        kind: TransformKind,
        provenance: impl Into<String>,
        eval: impl Fn(C64) -> Result<C64> + Send + Sync + 'static,
    ) -> Self {
        AnalyticTransform {
            evaluator: Arc::new(eval),
            kind,
            provenance: provenance.into(),
        }
    }

    /// Evaluate at a point of the open upper half plane.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Precondition(format!(
                "evaluation point {z} must lie in the open upper half plane"
            )));
        }
        let v = (self.evaluator)(z)?;
        #[cfg(debug_assertions)]
        {
            match self.kind {
                TransformKind::CauchyG => {
                    debug_assert!(
                        v.im <= 1e-12 && v.norm() <= 1.0 / z.im + 1e-9,
                        "Cauchy transform contract violated at {z}: {v} ({})",
                        self.provenance
                    );
                }
                TransformKind::ReciprocalF => {
                    debug_assert!(
                        v.im >= z.im - 1e-9 * (1.0 + z.im),
                        "reciprocal transform contract violated at {z}: {v} ({})",
                        self.provenance
                    );
                }
                _ => {}
            }
        }
        Ok(v)
    }

    /// Bulk evaluation, parallel over points; output order matches input.
    pub fn eval_many(&self, points: &[C64]) -> Vec<Result<C64>> {
        points.par_iter().map(|&z| self.eval(z)).collect()
    }

    /// 1/G, promoted to the ReciprocalF contract.
    pub fn reciprocal(&self) -> AnalyticTransform {
        let inner = self.clone();
        AnalyticTransform::new(
            TransformKind::ReciprocalF,
            format!("1/({})", inner.provenance),
            move |z| Ok(C64::new(1.0, 0.0) / inner.eval(z)?),
        )
    }
}

/// Cauchy transform G_mu(z) = integral of 1/(z - t) d mu(t), exact for every
/// measure variant (closed forms for named laws, exact piecewise-linear
/// integral for grids).
pub fn cauchy_transform(mu: &ProbabilityMeasure) -> AnalyticTransform {
    let m = mu.clone();
    AnalyticTransform::new(TransformKind::CauchyG, describe(mu), move |z| Ok(cauchy_value(&m, z)))
}

fn describe(mu: &ProbabilityMeasure) -> String {
    match mu {
        ProbabilityMeasure::Atomic { atoms } => format!("G[atomic:{}]", atoms.len()),
        ProbabilityMeasure::GridDensity { grid, .. } => format!("G[grid:{}]", grid.len()),
        ProbabilityMeasure::Semicircle { mean, variance } => {
            format!("G[semicircle m={mean} v={variance}]")
        }
        ProbabilityMeasure::Arcsine { left, right } => format!("G[arcsine {left},{right}]"),
        ProbabilityMeasure::FreePoisson { rate, jump } => {
            format!("G[free_poisson l={rate} a={jump}]")
        }
        ProbabilityMeasure::CauchyLaw { location, scale } => {
            format!("G[cauchy x0={location} g={scale}]")
        }
        ProbabilityMeasure::Mixture { components, .. } => format!("G[mixture:{}]", components.len()),
    }
}

pub(crate) fn cauchy_value(mu: &ProbabilityMeasure, z: C64) -> C64 {
    match mu {
        ProbabilityMeasure::Atomic { atoms } => atoms
            .iter()
            .map(|a| a.weight / (z - a.location))
            .sum(),
        ProbabilityMeasure::GridDensity { grid, values } => grid_cauchy(grid, values, z),
        ProbabilityMeasure::Semicircle { mean, variance } => {
            // (w - sqrt(w - 2s)sqrt(w + 2s)) / (2 s^2), w = z - mean; the
            // branch product equals sqrt(w^2 - 4s^2) with the ~w asymptotics.
            let s = variance.sqrt();
            let w = z - mean;
            let root = principal_sqrt(w - 2.0 * s) * principal_sqrt(w + 2.0 * s);
            // (w - root)/(2 s^2) in the cancellation-free form
            2.0 / (w + root)
        }
        ProbabilityMeasure::Arcsine { left, right } => {
            let root = principal_sqrt(z - left) * principal_sqrt(z - right);
            1.0 / root
        }
        ProbabilityMeasure::FreePoisson { rate, jump } => {
            let s = rate.sqrt();
            let e1 = (1.0 - s) * (1.0 - s) * jump;
            let e2 = (1.0 + s) * (1.0 + s) * jump;
            let root = principal_sqrt(z - e1) * principal_sqrt(z - e2);
            // (z + (1-rate) jump - root)/(2 jump z) rationalized: the
            // numerator difference-of-squares collapses to 4 jump z, leaving
            // a cancellation-free reciprocal that is also sign-uniform in
            // the jump.
            2.0 / (z + (1.0 - rate) * jump + root)
        }
        ProbabilityMeasure::CauchyLaw { location, scale } => {
            1.0 / (z - location + C64::new(0.0, *scale))
        }
        ProbabilityMeasure::Mixture { weights, components } => weights
            .iter()
            .zip(components)
            .map(|(w, c)| *w * cauchy_value(c, z))
            .sum(),
    }
}

/// Exact Cauchy transform of the piecewise-linear interpolant: on a cell
/// [t1, t2] with density a + b(t - t1),
///   int (a + b(t-t1))/(z - t) dt = a L + b ((z - t1) L - dt),
/// where L = log(z - t1) - log(z - t2) (principal logs; both arguments stay
/// in C+ so no branch cut is crossed).
fn grid_cauchy(grid: &[f64], values: &[f64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..grid.len() - 1 {
        let (t1, t2) = (grid[i], grid[i + 1]);
        let (v1, v2) = (values[i], values[i + 1]);
        if v1 == 0.0 && v2 == 0.0 {
            continue;
        }
        let dt = t2 - t1;
        let b = (v2 - v1) / dt;
        let l = (z - t1).ln() - (z - t2).ln();
        acc += v1 * l + b * ((z - t1) * l - dt);
    }
    acc
}

/// |iy G(iy) - 1| at y = y_max; a mass-1 diagnostic for derived transforms.
pub fn tail_normalization_check(t: &AnalyticTransform, y_max: f64) -> Result<f64> {
    if !(y_max >= 100.0) {
        return Err(Error::Precondition("tail check requires y_max >= 100".into()));
    }
    let z = C64::new(0.0, y_max);
    let g = t.eval(z)?;
    Ok((z * g - 1.0).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sqrt_examples() {
        let v = principal_sqrt(c(-1.0, 0.0));
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-15);
        let v = principal_sqrt(c(4.0, 0.0));
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        // -2i = 2 e^{i 3pi/2}, half angle 3pi/4
        let v = principal_sqrt(c(0.0, -2.0));
        assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cbrt_examples() {
        let v = principal_cbrt(c(8.0, 0.0));
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        // cbrt(-8) = 2 e^{i pi/3} = 1 + sqrt(3) i
        let v = principal_cbrt(c(-8.0, 0.0));
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 3.0f64.sqrt(), epsilon = 1e-12);
        // -i = e^{i 3pi/2}, third angle pi/2
        let v = principal_cbrt(c(0.0, -1.0));
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cauchy_examples() {
        let g0 = cauchy_transform(&ProbabilityMeasure::point_mass(0.0));
        let v = g0.eval(c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, -1.0, epsilon = 1e-15);

        let sc = cauchy_transform(&ProbabilityMeasure::semicircle(0.0, 1.0).unwrap());
        let v = sc.eval(c(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 1.0 - 2.0f64.sqrt(), epsilon = 1e-12);

        let arc = cauchy_transform(&ProbabilityMeasure::arcsine(-1.0, 1.0).unwrap());
        let v = arc.eval(c(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, -1.0 / 5.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn reciprocal_examples() {
        let f0 = cauchy_transform(&ProbabilityMeasure::point_mass(0.0)).reciprocal();
        let v = f0.eval(c(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-14);

        let fs = cauchy_transform(&ProbabilityMeasure::semicircle(0.0, 1.0).unwrap()).reciprocal();
        let v = fs.eval(c(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 2.0f64.sqrt() + 1.0, epsilon = 1e-12);

        let fa = cauchy_transform(&ProbabilityMeasure::point_mass(2.0)).reciprocal();
        let v = fa.eval(c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tail_checks() {
        let g0 = cauchy_transform(&ProbabilityMeasure::point_mass(0.0));
        assert!(tail_normalization_check(&g0, 1e3).unwrap() < 1e-15);

        let sc = cauchy_transform(&ProbabilityMeasure::semicircle(0.0, 1.0).unwrap());
        assert!(tail_normalization_check(&sc, 1e3).unwrap() <= 1e-5);

        let half = AnalyticTransform::new(TransformKind::Derived, "1/(2z)", |z| Ok(0.5 / z));
        assert_abs_diff_eq!(tail_normalization_check(&half, 1e3).unwrap(), 0.5, epsilon = 1e-12);

        assert!(tail_normalization_check(&g0, 50.0).is_err());
    }

    #[test]
    fn cone_membership() {
        let cone = TruncatedCone::new(1.0, 2.0).unwrap();
        assert!(cone.contains(c(0.0, 3.0)));
        assert!(!cone.contains(c(0.0, 1.0))); // below truncation
        assert!(!cone.contains(c(5.0, 4.0))); // outside angle
        assert!(TruncatedCone::new(0.0, 1.0).is_err());
    }

    #[test]
    fn eval_rejects_lower_half_plane() {
        let g = cauchy_transform(&ProbabilityMeasure::rademacher());
        assert!(g.eval(c(0.0, -1.0)).is_err());
        assert!(g.eval(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn grid_quadrature_matches_atomic_mollification() {
        // Narrow triangular bumps at +-1 vs the Rademacher atoms.
        let bw = 1e-4;
        let mut grid = vec![-3.0, -2.0];
        let mut values = vec![0.0, 0.0];
        for center in [-1.0, 1.0] {
            for (dx, v) in [(-bw, 0.0), (0.0, 0.5 / bw), (bw, 0.0)] {
                grid.push(center + dx);
                values.push(v);
            }
        }
        grid.extend_from_slice(&[2.0, 3.0]);
        values.extend_from_slice(&[0.0, 0.0]);
        let gd = ProbabilityMeasure::grid_density(grid, values, 1e-9).unwrap();
        let g_grid = cauchy_transform(&gd);
        let g_atom = cauchy_transform(&ProbabilityMeasure::rademacher());
        let z = c(0.3, 1.0);
        let d = (g_grid.eval(z).unwrap() - g_atom.eval(z).unwrap()).norm();
        // The analytic mollification error is ~1e-9, but the bump slope
        // (0.5/bw^2 = 5e7) amplifies ulp-level rounding in the exact cell
        // integral to a ~2e-8 floor.
        assert!(d < 5e-8, "mollification mismatch {d:e}");
    }

    #[test]
    fn bulk_eval_is_ordered() {
        let g = cauchy_transform(&ProbabilityMeasure::semicircle(0.0, 1.0).unwrap());
        let pts: Vec<C64> = (0..64).map(|i| c(i as f64 * 0.1 - 3.0, 0.5)).collect();
        let bulk = g.eval_many(&pts);
        for (z, r) in pts.iter().zip(bulk) {
            assert_eq!(r.unwrap(), g.eval(*z).unwrap());
        }
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(re in -50.0f64..50.0, im in -50.0f64..50.0) {
            let z = c(re, im);
            let s = principal_sqrt(z);
            prop_assert!(s.im >= -1e-15);
            prop_assert!((s * s - z).norm() <= 1e-12 * (1.0 + z.norm()));
        }

        #[test]
        fn cbrt_cubes_back(re in -50.0f64..50.0, im in -50.0f64..50.0) {
            let z = c(re, im);
            let s = principal_cbrt(z);
            prop_assert!((s * s * s - z).norm() <= 1e-12 * (1.0 + z.norm()));
        }

        #[test]
        fn sqrt_product_rule_lower_half(re1 in -10.0f64..10.0, im1 in -10.0f64..-1e-3,
                                        re2 in -10.0f64..10.0, im2 in -10.0f64..-1e-3) {
            // zeta, xi in C- => sqrt(zeta xi) = -sqrt(zeta) sqrt(xi)
            let zeta = c(re1, im1);
            let xi = c(re2, im2);
            let lhs = principal_sqrt(zeta * xi);
            let rhs = -principal_sqrt(zeta) * principal_sqrt(xi);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }

        #[test]
        fn cauchy_contract_random_atomic(
            locs in proptest::collection::vec(-5.0f64..5.0, 1..5),
            re in -10.0f64..10.0,
            im in 1e-3f64..10.0,
        ) {
            let w = 1.0 / locs.len() as f64;
            let atoms: Vec<Atom> = locs.iter().enumerate()
                .map(|(i, &x)| Atom { location: x + 15.0 * i as f64, weight: w })
                .collect();
            let mu = ProbabilityMeasure::atomic(atoms).unwrap();
            let g = cauchy_transform(&mu).eval(c(re, im)).unwrap();
            prop_assert!(g.im < 0.0);
            prop_assert!(g.norm() <= 1.0 / im + 1e-12);
        }

        #[test]
        fn symmetric_reflection(re in -5.0f64..5.0, im in 1e-2f64..5.0) {
            // G(-conj z) = -conj(G(z)) for symmetric measures
            let g = cauchy_transform(&ProbabilityMeasure::rademacher());
            let z = c(re, im);
            let lhs = g.eval(-z.conj()).unwrap();
            let rhs = -g.eval(z).unwrap().conj();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
