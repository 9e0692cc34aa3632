//! Probability measures on the real line: atomic, grid-density, named
//! closed-form families, and mixtures. Immutable after construction; every
//! constructor validates the variant's mass invariant.

use crate::error::{Error, Result};

pub const ATOM_MASS_TOL: f64 = 1e-12;
/// Default tolerance on trapezoid mass of grid densities.
pub const DEFAULT_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityMeasure {
    Atomic {
        atoms: Vec<Atom>,
    },
    /// Piecewise-linear density sampled on a strictly ascending grid.
    GridDensity {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
    /// Semicircle law of the given mean and variance (radius 2*sqrt(variance)).
    Semicircle {
        mean: f64,
        variance: f64,
    },
    /// Arcsine law on [left, right].
    Arcsine {
        left: f64,
        right: f64,
    },
    /// Free Poisson (Marchenko-Pastur) law with rate and jump size.
    FreePoisson {
        rate: f64,
        jump: f64,
    },
    CauchyLaw {
        location: f64,
        scale: f64,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<ProbabilityMeasure>,
    },
}

/// Moments that may individually be undefined (CauchyLaw has none).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentSummary {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub second_moment: Option<f64>,
    pub abs_first_moment: Option<f64>,
}

impl MomentSummary {
    /// Mean, erroring when undefined.
    pub fn mean_or_err(&self) -> Result<f64> {
        self.mean
            .ok_or_else(|| Error::Precondition("finite mean required".into()))
    }

    pub fn variance_or_err(&self) -> Result<f64> {
        self.variance
            .ok_or_else(|| Error::Precondition("finite variance required".into()))
    }

    pub fn second_moment_or_err(&self) -> Result<f64> {
        self.second_moment
            .ok_or_else(|| Error::Precondition("finite second moment required".into()))
    }
}

impl ProbabilityMeasure {
    // ----- constructors ------------------------------------------------

    pub fn atomic(mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Parse("atomic measure needs at least one atom".into()));
        }
        for a in &atoms {
            if !a.location.is_finite() || !a.weight.is_finite() {
                return Err(Error::Parse("atom fields must be finite".into()));
            }
            if a.weight <= 0.0 {
                return Err(Error::Parse(format!(
                    "atom weight must be positive, got {}",
                    a.weight
                )));
            }
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::Parse("atom locations must be distinct".into()));
        }
        let mass: f64 = atoms.iter().map(|a| a.weight).sum();
        if (mass - 1.0).abs() > ATOM_MASS_TOL {
            return Err(Error::Parse(format!(
                "atom weights sum to {mass}, expected 1 within {ATOM_MASS_TOL:.0e}"
            )));
        }
        Ok(ProbabilityMeasure::Atomic { atoms })
    }

    pub fn point_mass(location: f64) -> Self {
        ProbabilityMeasure::Atomic {
            atoms: vec![Atom { location, weight: 1.0 }],
        }
    }

    /// Half mass at -1, half at +1.
    pub fn rademacher() -> Self {
        ProbabilityMeasure::Atomic {
            atoms: vec![
                Atom { location: -1.0, weight: 0.5 },
                Atom { location: 1.0, weight: 0.5 },
            ],
        }
    }

    pub fn grid_density(grid: Vec<f64>, values: Vec<f64>, mass_tol: f64) -> Result<Self> {
        if grid.len() < 8 {
            return Err(Error::Parse("grid density needs at least 8 points".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::Parse("grid and values must have equal length".into()));
        }
        if grid.iter().any(|x| !x.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("grid and values must be finite".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("grid must be strictly ascending".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::Parse("density values must be nonnegative".into()));
        }
        let mass = trapezoid(&grid, &values);
        if (mass - 1.0).abs() > mass_tol {
            return Err(Error::MassDeficit { mass, tol: mass_tol });
        }
        Ok(ProbabilityMeasure::GridDensity { grid, values })
    }

    pub fn semicircle(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::Parse("semicircle requires finite mean and variance > 0".into()));
        }
        Ok(ProbabilityMeasure::Semicircle { mean, variance })
    }

    pub fn arcsine(left: f64, right: f64) -> Result<Self> {
        if !(left < right) || !left.is_finite() || !right.is_finite() {
            return Err(Error::Parse("arcsine requires finite left < right".into()));
        }
        Ok(ProbabilityMeasure::Arcsine { left, right })
    }

    pub fn free_poisson(rate: f64, jump: f64) -> Result<Self> {
        if !(rate > 0.0) || jump == 0.0 || !rate.is_finite() || !jump.is_finite() {
            return Err(Error::Parse("free Poisson requires rate > 0 and jump != 0".into()));
        }
        Ok(ProbabilityMeasure::FreePoisson { rate, jump })
    }

    pub fn cauchy_law(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !location.is_finite() || !scale.is_finite() {
            return Err(Error::Parse("Cauchy law requires finite location and scale > 0".into()));
        }
        Ok(ProbabilityMeasure::CauchyLaw { location, scale })
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<ProbabilityMeasure>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::Parse(
                "mixture weights and components must be nonempty and equal in length".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Parse("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DEFAULT_MASS_TOL {
            return Err(Error::Parse(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        // Renormalize exactly so downstream mass checks see unit mass.
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(ProbabilityMeasure::Mixture { weights, components })
    }

    // ----- moments ------------------------------------------------------

    pub fn moments(&self) -> MomentSummary {
        match self {
            ProbabilityMeasure::Atomic { atoms } => {
                let mean: f64 = atoms.iter().map(|a| a.weight * a.location).sum();
                let m2: f64 = atoms.iter().map(|a| a.weight * a.location * a.location).sum();
                let abs1: f64 = atoms.iter().map(|a| a.weight * a.location.abs()).sum();
                summary(mean, m2, abs1)
            }
            ProbabilityMeasure::GridDensity { grid, values } => {
                let mean = trapezoid_weighted(grid, values, |x| x);
                let m2 = trapezoid_weighted(grid, values, |x| x * x);
                let abs1 = trapezoid_weighted(grid, values, |x| x.abs());
                summary(mean, m2, abs1)
            }
            ProbabilityMeasure::Semicircle { mean, variance } => {
                let m2 = variance + mean * mean;
                let abs1 = semicircle_abs_moment(*mean, *variance);
                summary(*mean, m2, abs1)
            }
            ProbabilityMeasure::Arcsine { left, right } => {
                let c = 0.5 * (left + right);
                let r = 0.5 * (right - left);
                let m2 = c * c + 0.5 * r * r;
                summary(c, m2, arcsine_abs_moment(c, r))
            }
            ProbabilityMeasure::FreePoisson { rate, jump } => {
                let mean = rate * jump;
                let m2 = rate * jump * jump + mean * mean;
                // All mass sits on one side of 0 (sign of jump), so E|X| = |m|.
                summary(mean, m2, mean.abs())
            }
            ProbabilityMeasure::CauchyLaw { .. } => MomentSummary::default(),
            ProbabilityMeasure::Mixture { weights, components } => {
                let parts: Vec<MomentSummary> = components.iter().map(|c| c.moments()).collect();
                let combine = |f: fn(&MomentSummary) -> Option<f64>| -> Option<f64> {
                    let mut acc = 0.0;
                    for (w, p) in weights.iter().zip(&parts) {
                        acc += w * f(p)?;
                    }
                    Some(acc)
                };
                let mean = combine(|p| p.mean);
                let m2 = combine(|p| p.second_moment);
                let abs1 = combine(|p| p.abs_first_moment);
                MomentSummary {
                    mean,
                    second_moment: m2,
                    variance: match (mean, m2) {
                        (Some(m), Some(s)) => Some((s - m * m).max(0.0)),
                        _ => None,
                    },
                    abs_first_moment: abs1,
                }
            }
        }
    }

    // ----- support ------------------------------------------------------

    /// Smallest closed interval containing the support; +-inf for CauchyLaw.
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            ProbabilityMeasure::Atomic { atoms } => {
                (atoms[0].location, atoms[atoms.len() - 1].location)
            }
            ProbabilityMeasure::GridDensity { grid, values } => {
                let first = values.iter().position(|&v| v > 0.0);
                match first {
                    Some(i) => {
                        let j = values.iter().rposition(|&v| v > 0.0).unwrap();
                        // A positive sample spreads linearly into its neighbor cells.
                        (grid[i.saturating_sub(1)], grid[(j + 1).min(grid.len() - 1)])
                    }
                    None => (grid[0], grid[0]),
                }
            }
            ProbabilityMeasure::Semicircle { mean, variance } => {
                let r = 2.0 * variance.sqrt();
                (mean - r, mean + r)
            }
            ProbabilityMeasure::Arcsine { left, right } => (*left, *right),
            ProbabilityMeasure::FreePoisson { rate, jump } => {
                let s = rate.sqrt();
                let e1 = (1.0 - s) * (1.0 - s) * jump;
                let e2 = (1.0 + s) * (1.0 + s) * jump;
                let (mut lo, mut hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                if *rate < 1.0 {
                    // Atom at 0 carries mass 1 - rate.
                    lo = lo.min(0.0);
                    hi = hi.max(0.0);
                }
                (lo, hi)
            }
            ProbabilityMeasure::CauchyLaw { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ProbabilityMeasure::Mixture { components, .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in components {
                    let (a, b) = c.support_hull();
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                (lo, hi)
            }
        }
    }

    // ----- affine maps ----------------------------------------------------

    /// Law of X + c.
    pub fn shift(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Precondition("shift must be finite".into()));
        }
        Ok(match self {
            ProbabilityMeasure::Atomic { atoms } => ProbabilityMeasure::Atomic {
                atoms: atoms
                    .iter()
                    .map(|a| Atom { location: a.location + c, weight: a.weight })
                    .collect(),
            },
            ProbabilityMeasure::GridDensity { grid, values } => ProbabilityMeasure::GridDensity {
                grid: grid.iter().map(|x| x + c).collect(),
                values: values.clone(),
            },
            ProbabilityMeasure::Semicircle { mean, variance } => ProbabilityMeasure::Semicircle {
                mean: mean + c,
                variance: *variance,
            },
            ProbabilityMeasure::Arcsine { left, right } => ProbabilityMeasure::Arcsine {
                left: left + c,
                right: right + c,
            },
            // Free Poisson is not closed under translation; materialize.
            ProbabilityMeasure::FreePoisson { .. } => self.to_grid_approximation()?.shift(c)?,
            ProbabilityMeasure::CauchyLaw { location, scale } => ProbabilityMeasure::CauchyLaw {
                location: location + c,
                scale: *scale,
            },
            ProbabilityMeasure::Mixture { weights, components } => ProbabilityMeasure::Mixture {
                weights: weights.clone(),
                components: components
                    .iter()
                    .map(|m| m.shift(c))
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }

    /// Law of alpha * X, alpha != 0.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::Precondition("scale factor must be finite and nonzero".into()));
        }
        Ok(match self {
            ProbabilityMeasure::Atomic { atoms } => {
                let mut atoms: Vec<Atom> = atoms
                    .iter()
                    .map(|a| Atom { location: alpha * a.location, weight: a.weight })
                    .collect();
                atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
                ProbabilityMeasure::Atomic { atoms }
            }
            ProbabilityMeasure::GridDensity { grid, values } => {
                let (grid, values): (Vec<f64>, Vec<f64>) = if alpha > 0.0 {
                    (
                        grid.iter().map(|x| alpha * x).collect(),
                        values.iter().map(|v| v / alpha).collect(),
                    )
                } else {
                    (
                        grid.iter().rev().map(|x| alpha * x).collect(),
                        values.iter().rev().map(|v| v / -alpha).collect(),
                    )
                };
                ProbabilityMeasure::GridDensity { grid, values }
            }
            ProbabilityMeasure::Semicircle { mean, variance } => ProbabilityMeasure::Semicircle {
                mean: alpha * mean,
                variance: alpha * alpha * variance,
            },
            ProbabilityMeasure::Arcsine { left, right } => {
                let (a, b) = (alpha * left, alpha * right);
                ProbabilityMeasure::Arcsine { left: a.min(b), right: a.max(b) }
            }
            ProbabilityMeasure::FreePoisson { rate, jump } => ProbabilityMeasure::FreePoisson {
                rate: *rate,
                jump: alpha * jump,
            },
            ProbabilityMeasure::CauchyLaw { location, scale } => ProbabilityMeasure::CauchyLaw {
                location: alpha * location,
                scale: alpha.abs() * scale,
            },
            ProbabilityMeasure::Mixture { weights, components } => ProbabilityMeasure::Mixture {
                weights: weights.clone(),
                components: components
                    .iter()
                    .map(|m| m.scale(alpha))
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }

    /// Direct grid materialization of a named law from its closed-form
    /// density (cosine-spaced against edge singularities, renormalized).
    /// Atomic parts (free Poisson with rate < 1) come back as a mixture.
    pub fn to_grid_approximation(&self) -> Result<Self> {
        const N: usize = 4097;
        match self {
            ProbabilityMeasure::Semicircle { mean, variance } => {
                let r = 2.0 * variance.sqrt();
                let dens = |x: f64| {
                    let d = 4.0 * variance - (x - mean) * (x - mean);
                    if d > 0.0 { d.sqrt() / (2.0 * std::f64::consts::PI * variance) } else { 0.0 }
                };
                grid_from_density(dens, mean - r, mean + r, N)
            }
            ProbabilityMeasure::Arcsine { left, right } => {
                let dens = |x: f64| {
                    let d = (x - left) * (right - x);
                    if d > 0.0 { 1.0 / (std::f64::consts::PI * d.sqrt()) } else { 0.0 }
                };
                grid_from_density(dens, *left, *right, N)
            }
            ProbabilityMeasure::FreePoisson { rate, jump } => {
                let s = rate.sqrt();
                let (e1, e2) = ((1.0 - s) * (1.0 - s) * jump, (1.0 + s) * (1.0 + s) * jump);
                let (lo, hi) = (e1.min(e2), e1.max(e2));
                let a = jump.abs();
                let dens = move |x: f64| {
                    let d = (x - lo) * (hi - x);
                    if d > 0.0 && x != 0.0 {
                        d.sqrt() / (2.0 * std::f64::consts::PI * a * x.abs())
                    } else {
                        0.0
                    }
                };
                let ac = grid_from_density(dens, lo, hi, N)?;
                if *rate < 1.0 {
                    ProbabilityMeasure::mixture(
                        vec![1.0 - rate, *rate],
                        vec![ProbabilityMeasure::point_mass(0.0), ac],
                    )
                } else {
                    Ok(ac)
                }
            }
            _ => Err(Error::Precondition(
                "grid materialization only defined for compactly supported named laws".into(),
            )),
        }
    }
}

fn summary(mean: f64, m2: f64, abs1: f64) -> MomentSummary {
    MomentSummary {
        mean: Some(mean),
        second_moment: Some(m2),
        variance: Some((m2 - mean * mean).max(0.0)),
        abs_first_moment: Some(abs1),
    }
}

/// Trapezoid rule over an ascending grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Trapezoid rule for integral of f(x) * rho(x).
pub fn trapezoid_weighted(grid: &[f64], values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] * f(x[0]) + v[1] * f(x[1])))
        .sum()
}

/// E|X| for the semicircle law: |m| when 0 is outside the support, otherwise
/// Simpson quadrature of the closed density (smooth integrand).
/// E|X| for the semicircle: substitute x = m + r cos(theta) so the density
/// becomes (2/pi) sin^2(theta); |x| changes sign at theta0 = arccos(-m/r)
/// and each piece integrates in closed form.
fn semicircle_abs_moment(mean: f64, variance: f64) -> f64 {
    let r = 2.0 * variance.sqrt();
    if mean.abs() >= r {
        return mean.abs();
    }
    let a = |t: f64| mean * (0.5 * t - 0.25 * (2.0 * t).sin()) + r * t.sin().powi(3) / 3.0;
    let theta0 = (-mean / r).acos();
    (2.0 / std::f64::consts::PI) * (2.0 * a(theta0) - a(0.0) - a(std::f64::consts::PI))
}

/// E|X| for the arcsine law with center c and half-width r: write X = c + r cos(Theta),
/// Theta uniform on [0, pi], and integrate |c + r cos| in closed form.
fn arcsine_abs_moment(c: f64, r: f64) -> f64 {
    if c.abs() >= r {
        return c.abs();
    }
    let theta0 = (-c / r).acos(); // sign change of c + r cos(theta)
    (c * (2.0 * theta0 - std::f64::consts::PI) + 2.0 * r * theta0.sin()) / std::f64::consts::PI
}

/// Sample a density on a cosine-spaced grid over [a, b] and renormalize to
/// unit trapezoid mass (tolerates integrable edge singularities).
pub fn grid_from_density(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<ProbabilityMeasure> {
    assert!(n >= 8 && b > a);
    let mut grid = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        // Endpoint-clustered nodes; the exact endpoints are nudged inward so
        // edge singularities are sampled at finite values.
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
        let x = 0.5 * (a + b) - 0.5 * (b - a) * theta.cos();
        grid.push(x);
        let v = f(x);
        values.push(if v.is_finite() && v > 0.0 { v } else { 0.0 });
    }
    let mass = trapezoid(&grid, &values);
    if !(mass > 0.0) {
        return Err(Error::MassDeficit { mass, tol: DEFAULT_MASS_TOL });
    }
    for v in &mut values {
        *v /= mass;
    }
    ProbabilityMeasure::grid_density(grid, values, DEFAULT_MASS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rademacher_moments() {
        let m = ProbabilityMeasure::rademacher().moments();
        assert_eq!(m.mean, Some(0.0));
        assert_eq!(m.variance, Some(1.0));
        assert_eq!(m.abs_first_moment, Some(1.0));
    }

    #[test]
    fn semicircle_moments() {
        let m = ProbabilityMeasure::semicircle(0.0, 2.0).unwrap().moments();
        assert_eq!(m.mean, Some(0.0));
        assert_eq!(m.variance, Some(2.0));
        // E|X| = 8 sigma / (3 pi) for the centered semicircle.
        let expected = 8.0 * 2.0_f64.sqrt() / (3.0 * std::f64::consts::PI);
        assert_abs_diff_eq!(m.abs_first_moment.unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn cauchy_moments_undefined() {
        let m = ProbabilityMeasure::cauchy_law(0.0, 1.0).unwrap().moments();
        assert_eq!(m.mean, None);
        assert_eq!(m.variance, None);
    }

    #[test]
    fn support_hulls() {
        assert_eq!(ProbabilityMeasure::rademacher().support_hull(), (-1.0, 1.0));
        assert_eq!(
            ProbabilityMeasure::semicircle(0.0, 1.0).unwrap().support_hull(),
            (-2.0, 2.0)
        );
        assert_eq!(
            ProbabilityMeasure::arcsine(0.0, 3.0).unwrap().support_hull(),
            (0.0, 3.0)
        );
        assert_eq!(
            ProbabilityMeasure::free_poisson(1.0, 1.0).unwrap().support_hull(),
            (0.0, 4.0)
        );
        // rate < 1 keeps the atom at 0 inside the hull even for shifted edges
        let (lo, hi) = ProbabilityMeasure::free_poisson(0.25, -1.0).unwrap().support_hull();
        assert_eq!(hi, 0.0);
        assert_abs_diff_eq!(lo, -2.25, epsilon = 1e-12);
    }

    #[test]
    fn shift_and_scale_named() {
        let d = ProbabilityMeasure::point_mass(0.0).shift(3.0).unwrap();
        assert_eq!(d.support_hull(), (3.0, 3.0));

        let s = ProbabilityMeasure::semicircle(0.0, 1.0).unwrap().scale(2.0).unwrap();
        assert_eq!(s, ProbabilityMeasure::Semicircle { mean: 0.0, variance: 4.0 });

        let a = ProbabilityMeasure::arcsine(-1.0, 1.0).unwrap().shift(1.0).unwrap();
        assert_eq!(a, ProbabilityMeasure::Arcsine { left: 0.0, right: 2.0 });
    }

    #[test]
    fn free_poisson_shift_materializes() {
        let fp = ProbabilityMeasure::free_poisson(1.0, 1.0).unwrap();
        let shifted = fp.shift(0.5).unwrap();
        let (lo, hi) = shifted.support_hull();
        assert!(lo > 0.3 && lo < 0.7, "lo = {lo}");
        assert!((hi - 4.5).abs() < 0.2, "hi = {hi}");
        let m = shifted.moments();
        assert_abs_diff_eq!(m.mean.unwrap(), 1.5, epsilon = 1e-3);
    }

    #[test]
    fn atomic_rejects_bad_weights() {
        assert!(ProbabilityMeasure::atomic(vec![
            Atom { location: 0.0, weight: 0.5 },
            Atom { location: 1.0, weight: 0.6 },
        ])
        .is_err());
        assert!(ProbabilityMeasure::atomic(vec![
            Atom { location: 0.0, weight: 0.5 },
            Atom { location: 0.0, weight: 0.5 },
        ])
        .is_err());
    }

    #[test]
    fn grid_mass_checked() {
        let grid: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let ok = vec![1.0; 9];
        assert!(ProbabilityMeasure::grid_density(grid.clone(), ok, 1e-6).is_ok());
        let bad = vec![0.9; 9];
        assert!(matches!(
            ProbabilityMeasure::grid_density(grid, bad, 1e-6),
            Err(Error::MassDeficit { .. })
        ));
    }

    #[test]
    fn mixture_weights_validated() {
        let comps = vec![ProbabilityMeasure::point_mass(0.0), ProbabilityMeasure::point_mass(1.0)];
        assert!(ProbabilityMeasure::mixture(vec![0.5, 0.4], comps.clone()).is_err());
        let m = ProbabilityMeasure::mixture(vec![0.25, 0.75], comps).unwrap();
        assert_abs_diff_eq!(m.moments().mean.unwrap(), 0.75, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn scale_variance_quadratic(alpha in -4.0f64..4.0, locs in proptest::collection::vec(-5.0f64..5.0, 2..6)) {
            prop_assume!(alpha.abs() > 1e-3);
            let mut atoms: Vec<Atom> = Vec::new();
            let w = 1.0 / locs.len() as f64;
            for (i, &x) in locs.iter().enumerate() {
                atoms.push(Atom { location: x + i as f64 * 20.0, weight: w });
            }
            let mu = ProbabilityMeasure::atomic(atoms).unwrap();
            let v0 = mu.moments().variance.unwrap();
            let v1 = mu.scale(alpha).unwrap().moments().variance.unwrap();
            prop_assert!((v1 - alpha * alpha * v0).abs() <= 1e-9 * (1.0 + v1.abs()));
        }

        #[test]
        fn shift_moves_hull(c in -10.0f64..10.0) {
            let mu = ProbabilityMeasure::rademacher();
            let (lo, hi) = mu.shift(c).unwrap().support_hull();
            prop_assert!((lo - (-1.0 + c)).abs() < 1e-12);
            prop_assert!((hi - (1.0 + c)).abs() < 1e-12);
        }
    }
}
