//! Measure transformations: square bias, inverse square bias, El Gordo,
//! geometric-mean combination, free zero bias, and the classical zero bias.
//! Operations defined through the Cauchy transform return evaluators; the
//! measure-valued ones return measures directly.

use crate::error::{Error, Result};
use crate::holomorphic::{cauchy_transform, principal_sqrt, AnalyticTransform, TransformKind};
use crate::measure::{trapezoid, Atom, ProbabilityMeasure};
use crate::RunConfig;

/// Square bias: d mu_box / d mu = x^2 / E[X^2]. Returns delta_0 when the
/// second moment vanishes.
pub fn square_bias(mu: &ProbabilityMeasure) -> Result<ProbabilityMeasure> {
    let m2 = mu.moments().second_moment.ok_or_else(|| {
        Error::Precondition("second moment required for square bias".into())
    })?;
    if m2 == 0.0 {
        return Ok(ProbabilityMeasure::point_mass(0.0));
    }
    match mu {
        ProbabilityMeasure::Atomic { atoms } => {
            let reweighted: Vec<Atom> = atoms
                .iter()
                .filter(|a| a.location != 0.0)
                .map(|a| Atom {
                    location: a.location,
                    weight: a.weight * a.location * a.location / m2,
                })
                .collect();
            // Weights already sum to 1 exactly up to rounding; renormalize
            // the rounding away so the constructor's 1e-12 check holds.
            normalize_atoms(reweighted)
        }
        ProbabilityMeasure::GridDensity { grid, values } => {
            let mut v: Vec<f64> = grid
                .iter()
                .zip(values)
                .map(|(x, r)| x * x * r)
                .collect();
            let mass = trapezoid(grid, &v);
            if !(mass > 0.0) {
                return Ok(ProbabilityMeasure::point_mass(0.0));
            }
            for w in &mut v {
                *w /= mass;
            }
            ProbabilityMeasure::grid_density(grid.clone(), v, 1e-9)
        }
        ProbabilityMeasure::Mixture { weights, components } => {
            // Mixture rule: W_box is the mixture of the X_i^box with weights
            // w_i E[X_i^2] / E[W^2].
            let mut new_w = Vec::new();
            let mut new_c = Vec::new();
            for (w, c) in weights.iter().zip(components) {
                let m2i = c.moments().second_moment.ok_or_else(|| {
                    Error::Precondition("second moment required for square bias".into())
                })?;
                if m2i == 0.0 {
                    continue; // contributes zero weight
                }
                new_w.push(w * m2i / m2);
                new_c.push(square_bias(c)?);
            }
            if new_c.is_empty() {
                return Ok(ProbabilityMeasure::point_mass(0.0));
            }
            if new_c.len() == 1 {
                return Ok(new_c.pop_unwrap());
            }
            ProbabilityMeasure::mixture(new_w, new_c)
        }
        ProbabilityMeasure::CauchyLaw { .. } => {
            Err(Error::Precondition("second moment required for square bias".into()))
        }
        // Compactly supported named laws go through a grid.
        _ => square_bias(&mu.to_grid_approximation()?),
    }
}

trait PopUnwrap<T> {
    fn pop_unwrap(&mut self) -> T;
}
impl<T> PopUnwrap<T> for Vec<T> {
    fn pop_unwrap(&mut self) -> T {
        self.pop().expect("nonempty")
    }
}

fn normalize_atoms(mut atoms: Vec<Atom>) -> Result<ProbabilityMeasure> {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if !(total > 0.0) {
        return Ok(ProbabilityMeasure::point_mass(0.0));
    }
    for a in &mut atoms {
        a.weight /= total;
    }
    ProbabilityMeasure::atomic(atoms)
}

/// E[X^{-2}], erroring when the integral diverges.
fn inverse_second_moment(mu: &ProbabilityMeasure) -> Result<f64> {
    let diverged = || Error::Precondition("inverse second moment infinite".into());
    match mu {
        ProbabilityMeasure::Atomic { atoms } => {
            if atoms.iter().any(|a| a.location == 0.0) {
                return Err(diverged());
            }
            Ok(atoms.iter().map(|a| a.weight / (a.location * a.location)).sum())
        }
        ProbabilityMeasure::GridDensity { grid, values } => {
            // Exact integral of the linear interpolant against x^{-2};
            // any cell meeting 0 with nonzero values makes it infinite.
            let mut acc = 0.0;
            for i in 0..grid.len() - 1 {
                let (t1, t2) = (grid[i], grid[i + 1]);
                let (v1, v2) = (values[i], values[i + 1]);
                if v1 == 0.0 && v2 == 0.0 {
                    continue;
                }
                if t1 <= 0.0 && t2 >= 0.0 {
                    return Err(diverged());
                }
                let b = (v2 - v1) / (t2 - t1);
                let a = v1 - b * t1; // rho(t) = a + b t on the cell
                acc += a * (1.0 / t1 - 1.0 / t2) + b * (t2 / t1).ln();
            }
            Ok(acc)
        }
        ProbabilityMeasure::Mixture { weights, components } => {
            let mut acc = 0.0;
            for (w, c) in weights.iter().zip(components) {
                acc += w * inverse_second_moment(c)?;
            }
            Ok(acc)
        }
        ProbabilityMeasure::CauchyLaw { .. } => Err(diverged()),
        _ => inverse_second_moment(&mu.to_grid_approximation()?),
    }
}

/// Inverse square bias: d mu_invbox / d mu = x^{-2} / E[X^{-2}]; delta_0 maps
/// to itself, any other mass at 0 is rejected.
pub fn inverse_square_bias(mu: &ProbabilityMeasure) -> Result<ProbabilityMeasure> {
    if let ProbabilityMeasure::Atomic { atoms } = mu {
        if atoms.len() == 1 && atoms[0].location == 0.0 {
            return Ok(ProbabilityMeasure::point_mass(0.0));
        }
    }
    let total = inverse_second_moment(mu)?;
    match mu {
        ProbabilityMeasure::Atomic { atoms } => normalize_atoms(
            atoms
                .iter()
                .map(|a| Atom {
                    location: a.location,
                    weight: a.weight / (a.location * a.location),
                })
                .collect(),
        ),
        ProbabilityMeasure::GridDensity { grid, values } => {
            let mut v: Vec<f64> = grid
                .iter()
                .zip(values)
                .map(|(x, r)| if *x == 0.0 { 0.0 } else { r / (x * x) })
                .collect();
            let mass = trapezoid(grid, &v);
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::Precondition("inverse second moment infinite".into()));
            }
            for w in &mut v {
                *w /= mass;
            }
            ProbabilityMeasure::grid_density(grid.clone(), v, 1e-9)
        }
        ProbabilityMeasure::Mixture { weights, components } => {
            let mut new_w = Vec::new();
            let mut new_c = Vec::new();
            for (w, c) in weights.iter().zip(components) {
                new_w.push(w * inverse_second_moment(c)? / total);
                new_c.push(inverse_square_bias(c)?);
            }
            ProbabilityMeasure::mixture(new_w, new_c)
        }
        ProbabilityMeasure::CauchyLaw { .. } => {
            Err(Error::Precondition("inverse second moment infinite".into()))
        }
        _ => inverse_square_bias(&mu.to_grid_approximation()?),
    }
}

/// El Gordo on the transform level: G(z) -> -sqrt(G(z)/z).
pub fn el_gordo_transform(g: &AnalyticTransform) -> AnalyticTransform {
    let inner = g.clone();
    AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("elgordo({})", inner.provenance),
        move |z| Ok(-principal_sqrt(inner.eval(z)? / z)),
    )
}

pub fn el_gordo(mu: &ProbabilityMeasure) -> AnalyticTransform {
    el_gordo_transform(&cauchy_transform(mu))
}

/// Geometric mean of two Cauchy transforms: sqrt(G_mu) sqrt(G_nu), which
/// equals -sqrt(G_mu G_nu) since both factors lie in C-.
pub fn flat_combine_transforms(g1: &AnalyticTransform, g2: &AnalyticTransform) -> AnalyticTransform {
    let (a, b) = (g1.clone(), g2.clone());
    AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("flat({},{})", a.provenance, b.provenance),
        move |z| Ok(principal_sqrt(a.eval(z)?) * principal_sqrt(b.eval(z)?)),
    )
}

pub fn flat_combine(mu: &ProbabilityMeasure, nu: &ProbabilityMeasure) -> AnalyticTransform {
    flat_combine_transforms(&cauchy_transform(mu), &cauchy_transform(nu))
}

/// Free zero bias on the transform level. For a mean-m variance-s2 law with
/// Cauchy transform g, G_{X_circ}(z) = -sqrt(((z-m) g(z) - 1)/s2); the
/// centered transform is shifted back by m, which is exactly this formula.
pub fn free_zero_bias_transform(g: &AnalyticTransform, mean: f64, variance: f64) -> Result<AnalyticTransform> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::Precondition("free zero bias requires finite nonzero variance".into()));
    }
    let inner = g.clone();
    Ok(AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("fzb({},m={mean},v={variance})", inner.provenance),
        move |z| {
            let gv = inner.eval(z)?;
            Ok(-principal_sqrt(((z - mean) * gv - 1.0) / variance))
        },
    ))
}

pub fn free_zero_bias(mu: &ProbabilityMeasure) -> Result<AnalyticTransform> {
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let variance = m.variance_or_err()?;
    free_zero_bias_transform(&cauchy_transform(mu), mean, variance)
}

/// The raw "square bias then El Gordo" composite without centering:
/// -sqrt((z G(z) - E[X]/z - 1)/E[X^2]). Coincides with free_zero_bias exactly
/// when the mean vanishes; kept separate so the difference is observable.
pub fn box_flat_raw(mu: &ProbabilityMeasure) -> Result<AnalyticTransform> {
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let m2 = m.second_moment_or_err()?;
    if m2 == 0.0 {
        return Err(Error::Precondition("box_flat_raw requires nonzero second moment".into()));
    }
    let inner = cauchy_transform(mu);
    Ok(AnalyticTransform::new(
        TransformKind::CauchyG,
        format!("boxflat({})", inner.provenance),
        move |z| {
            let gv = inner.eval(z)?;
            Ok(-principal_sqrt((z * gv - mean / z - 1.0) / m2))
        },
    ))
}

// ----- classical zero bias ---------------------------------------------

/// Density of U * W at t, where W has law `w_box` (assumed the square bias of
/// a centered measure) and U is uniform on [0,1]:
/// rho*(t) = E[ 1{t between 0 and W} / |W| ].
fn u_mixture_density(w_box: &ProbabilityMeasure, t: f64) -> f64 {
    match w_box {
        ProbabilityMeasure::Atomic { atoms } => atoms
            .iter()
            .filter(|a| a.location != 0.0)
            .map(|a| {
                let (lo, hi) = (a.location.min(0.0), a.location.max(0.0));
                // two-sided average at the jump points, so grid nodes that
                // land exactly on 0 or an atom carry the midpoint value
                let ind = if t > lo && t < hi {
                    1.0
                } else if (t == lo || t == hi) && lo < hi {
                    0.5
                } else {
                    0.0
                };
                ind * a.weight / a.location.abs()
            })
            .sum(),
        ProbabilityMeasure::GridDensity { grid, values } => {
            // integral of rho(x)/|x| over {x : t between 0 and x}
            let mut acc = 0.0;
            for i in 0..grid.len() - 1 {
                let (x1, x2) = (grid[i], grid[i + 1]);
                let (v1, v2) = (values[i], values[i + 1]);
                if v1 == 0.0 && v2 == 0.0 {
                    continue;
                }
                // clip the cell to the active region
                let (lo, hi) = if t >= 0.0 { (x1.max(t), x2) } else { (x1, x2.min(t)) };
                if hi <= lo {
                    continue;
                }
                let interp = |x: f64| v1 + (v2 - v1) * (x - x1) / (x2 - x1);
                let f = |x: f64| if x == 0.0 { 0.0 } else { interp(x) / x.abs() };
                // Simpson on the clipped cell; integrand is smooth there.
                let mid = 0.5 * (lo + hi);
                acc += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
            }
            acc
        }
        ProbabilityMeasure::Mixture { weights, components } => weights
            .iter()
            .zip(components)
            .map(|(w, c)| w * u_mixture_density(c, t))
            .sum(),
        other => match other.to_grid_approximation() {
            Ok(g) => u_mixture_density(&g, t),
            Err(_) => 0.0,
        },
    }
}

fn atomic_breakpoints(mu: &ProbabilityMeasure, out: &mut Vec<f64>) {
    match mu {
        ProbabilityMeasure::Atomic { atoms } => out.extend(atoms.iter().map(|a| a.location)),
        ProbabilityMeasure::Mixture { components, .. } => {
            for c in components {
                atomic_breakpoints(c, out);
            }
        }
        _ => {}
    }
}

/// Classical zero bias X* as a grid density: law of U * X_box for the
/// centered variable, shifted back by the mean.
pub fn classical_zero_bias(mu: &ProbabilityMeasure, grid_points: usize) -> Result<ProbabilityMeasure> {
    let m = mu.moments();
    let mean = m.mean_or_err()?;
    let variance = m.variance_or_err()?;
    if !(variance > 0.0) {
        return Err(Error::Precondition("classical zero bias requires nonzero variance".into()));
    }
    let centered = mu.shift(-mean)?;
    let w_box = square_bias(&centered)?;

    let (hlo, hhi) = w_box.support_hull();
    let lo = hlo.min(0.0);
    let hi = hhi.max(0.0);
    let span = hi - lo;
    let delta = 1e-9 * span;

    // Uniform grid plus tight straddles of the jump points (0 and any atoms
    // of the square bias), so the piecewise-constant parts stay exact.
    let n = grid_points.max(16);
    let mut grid: Vec<f64> = (0..n).map(|i| lo + span * i as f64 / (n - 1) as f64).collect();
    let mut breaks = vec![0.0];
    atomic_breakpoints(&w_box, &mut breaks);
    for b in breaks {
        for s in [-1.0, 1.0] {
            let x = b + s * delta;
            if x > lo && x < hi {
                grid.push(x);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut values: Vec<f64> = grid.iter().map(|&t| u_mixture_density(&w_box, t)).collect();
    let mass = trapezoid(&grid, &values);
    if !(mass > 0.5) {
        return Err(Error::MassDeficit { mass, tol: 1e-6 });
    }
    for v in &mut values {
        *v /= mass;
    }
    ProbabilityMeasure::grid_density(grid, values, 1e-9)?.shift(mean)
}

// ----- chain plumbing ----------------------------------------------------

#[derive(Debug, Clone)]
pub enum ChainStep {
    SquareBias,
    InverseSquareBias,
    ElGordo,
    FlatCombine(ProbabilityMeasure),
    FreeZeroBias,
    ClassicalZeroBias,
    Shift(f64),
    Scale(f64),
}

#[derive(Debug, Clone)]
pub enum ChainOutput {
    Measure(ProbabilityMeasure),
    Transform(AnalyticTransform),
}

/// Audit trail for a chain of bias steps applied to one input measure.
#[derive(Debug, Clone)]
pub struct BiasChainRecord {
    pub input: ProbabilityMeasure,
    pub steps: Vec<ChainStep>,
    pub output: ChainOutput,
}

/// Apply a chain of steps. Transform-valued intermediates are materialized
/// back into measures (via Stieltjes inversion) whenever the next step needs
/// a measure.
pub fn apply_chain(
    input: &ProbabilityMeasure,
    steps: &[ChainStep],
    cfg: &RunConfig,
) -> Result<BiasChainRecord> {
    if steps.is_empty() {
        return Err(Error::Precondition("transform chain must be nonempty".into()));
    }
    let mut current = ChainOutput::Measure(input.clone());
    for step in steps {
        let mu = match &current {
            ChainOutput::Measure(m) => m.clone(),
            ChainOutput::Transform(t) => crate::inversion::measure_from_transform(t, cfg)?,
        };
        current = match step {
            ChainStep::SquareBias => ChainOutput::Measure(square_bias(&mu)?),
            ChainStep::InverseSquareBias => ChainOutput::Measure(inverse_square_bias(&mu)?),
            ChainStep::ElGordo => ChainOutput::Transform(el_gordo(&mu)),
            ChainStep::FlatCombine(partner) => ChainOutput::Transform(flat_combine(&mu, partner)),
            ChainStep::FreeZeroBias => ChainOutput::Transform(free_zero_bias(&mu)?),
            ChainStep::ClassicalZeroBias => {
                ChainOutput::Measure(classical_zero_bias(&mu, cfg.grid_points)?)
            }
            ChainStep::Shift(c) => ChainOutput::Measure(mu.shift(*c)?),
            ChainStep::Scale(a) => ChainOutput::Measure(mu.scale(*a)?),
        };
    }
    Ok(BiasChainRecord {
        input: input.clone(),
        steps: steps.to_vec(),
        output: current,
    })
}
