//! The map `μ ↦ ν = G(μ)` and its images under free convolution powers.
//!
//! `ν = βδ₀ + σ` where `σ` has density `(F_μ^{<−1>})'` on `(F_μ(β), F_μ(1)]`
//! and `F_μ(t) = S_μ(t − 1)^{−1/2}`. The density is recovered from divided
//! differences of the quantile table, so `CDF_ν(F_μ(t)) = t` holds cell by cell.
//!
//! For powers, the table of `μ` is transformed before recovery:
//! `F_{μ^{⊞n}}(t) = √n·F_μ((t + n − 1)/n)` and `F_{μ^{⊠n}}(t) = F_μ(t)ⁿ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Atom, EvalConfig, Family, Measure};
use crate::scalar::Real;
use crate::xform::{f_table, f_table_from, FTable};

/// Lower tail removed from an unbounded-below support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation<T> {
    /// Abscissa below which nothing is tabulated.
    pub lower: T,
    /// Mass of the removed tail.
    pub tail_mass: T,
}

/// Metadata accompanying a computed image measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageReport<T> {
    pub atom_at_zero: T,
    /// Smallest and largest tabulated support point (the atom location for point masses).
    pub support: (T, T),
    /// Total mass of the produced measure.
    pub mass: T,
    /// Set when a value is assigned by convention rather than computed.
    pub convention: Option<String>,
    pub truncation: Option<Truncation<T>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub measure: Measure<T>,
    pub report: ImageReport<T>,
}

impl<T: Real> Image<T> {
    pub(crate) fn new(measure: Measure<T>) -> Self {
        let (lo, hi) = if measure.has_density() {
            let g = measure.grid();
            (g[0], g[g.len() - 1])
        } else {
            measure.support_hull()
        };
        let report = ImageReport {
            atom_at_zero: measure.atom_at_zero(),
            support: (lo, hi),
            mass: measure.total_mass(),
            convention: None,
            truncation: None,
            notes: Vec::new(),
        };
        Image { measure, report }
    }

    fn with_convention(mut self, what: &str) -> Self {
        self.report.convention = Some(what.to_string());
        self
    }

    fn checked(self) -> Result<Self> {
        let v = self.measure.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Numerical(format!(
                "produced measure violates invariants: {}",
                v.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ")
            )))
        }
    }
}

const DIRAC_ZERO_CONVENTION: &str = "G(δ₀) := δ₀ (B_n = 0 for every n)";

fn checked_input<T: Real>(mu: &Measure<T>) -> Result<()> {
    let v = mu.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(v))
    }
}

/// Builds `atom·δ₀ + σ` from a quantile table of `F`.
///
/// Nodes sit at every table value and at every cell midpoint. Table-value
/// ordinates interpolate the neighbouring cell averages `Δt/ΔF` (linear
/// extrapolation at the two ends, clamped at zero); each midpoint ordinate is
/// then set so the cell carries exactly its mass `Δt`.
pub fn measure_from_table<T: Real>(table: &FTable<T>, atom: T) -> Result<Measure<T>> {
    let (p, f) = (&table.probabilities, &table.values);
    let k = p.len();
    if k < 3 {
        return Err(Error::InvalidParameter(
            "quantile table needs at least 3 points".into(),
        ));
    }
    let mut width = Vec::with_capacity(k - 1);
    let mut avg = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let df = f[i + 1] - f[i];
        if !(df > T::zero()) {
            return Err(Error::Numerical(format!(
                "quantile table not strictly increasing at t = {}",
                p[i]
            )));
        }
        width.push(df);
        avg.push((p[i + 1] - p[i]) / df);
    }
    // Value at the right end of cell `i` of the line through the averages of
    // cells `i` and `j`, placed at their midpoints.
    let at_node = |i: usize, j: usize, x: T| -> T {
        let (xi, xj) = (f[i] + width[i] * T::lit(0.5), f[j] + width[j] * T::lit(0.5));
        (avg[i] + (avg[j] - avg[i]) * (x - xi) / (xj - xi)).max(T::zero())
    };
    let mut node = Vec::with_capacity(k);
    node.push(at_node(0, 1, f[0]));
    node.extend((1..k - 1).map(|i| at_node(i - 1, i, f[i])));
    node.push(at_node(k - 3, k - 2, f[k - 1]));

    let two = T::lit(2.0);
    let mut grid = Vec::with_capacity(2 * k - 1);
    let mut dens = Vec::with_capacity(2 * k - 1);
    for i in 0..k - 1 {
        grid.push(f[i]);
        dens.push(node[i]);
        grid.push(f[i] + width[i] * T::lit(0.5));
        dens.push((two * avg[i] - (node[i] + node[i + 1]) * T::lit(0.5)).max(T::zero()));
    }
    grid.push(f[k - 1]);
    dens.push(node[k - 1]);

    let mut atoms = Vec::new();
    if atom > T::zero() {
        atoms.push(Atom::new(T::zero(), atom));
    }
    Ok(Measure::from_raw(atoms, grid, dens))
}

/// `ν = G(μ)`: the limit law of `B_n^{1/2n}`.
pub fn gmap<T: Real>(mu: &Measure<T>, cfg: &EvalConfig<T>) -> Result<Image<T>> {
    checked_input(mu)?;
    if let Some(lambda) = mu.as_point_mass() {
        let img = Image::new(Measure::dirac(lambda.sqrt()));
        return Ok(if lambda == T::zero() {
            img.with_convention(DIRAC_ZERO_CONVENTION)
        } else {
            img
        });
    }
    let table = f_table(mu, cfg)?;
    Image::new(measure_from_table(&table, mu.atom_at_zero())?).checked()
}

/// `G(μ^{⊞n})`: density `√n·f(t/√n)` and atom `max{0, nβ − (n − 1)}`.
pub fn gmap_boxplus_power<T: Real>(
    mu: &Measure<T>,
    n: usize,
    cfg: &EvalConfig<T>,
) -> Result<Image<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("power n must be >= 1".into()));
    }
    if n == 1 {
        return gmap(mu, cfg);
    }
    checked_input(mu)?;
    let nf = T::count(n);
    if let Some(lambda) = mu.as_point_mass() {
        let img = Image::new(Measure::dirac((nf * lambda).sqrt()));
        return Ok(if lambda == T::zero() {
            img.with_convention(DIRAC_ZERO_CONVENTION)
        } else {
            img
        });
    }
    let beta = mu.atom_at_zero();
    let beta_n = boxplus_atom(beta, n);
    // (β_n + n − 1)/n, which equals β whenever β_n > 0.
    let lower = if beta_n > T::zero() {
        beta
    } else {
        (nf - T::one()) / nf
    };
    let base = f_table_from(mu, lower, cfg)?;
    let root_n = nf.sqrt();
    let shift = nf - T::one();
    let table = FTable {
        probabilities: base
            .probabilities
            .iter()
            .map(|&t| if t == T::one() { t } else { nf * t - shift })
            .collect(),
        values: base.values.iter().map(|&v| root_n * v).collect(),
        beta: beta_n,
    };
    let mut img = Image::new(measure_from_table(&table, beta_n)?);
    img.report.notes.push(format!(
        "atom at zero max{{0, n·β − (n − 1)}} = {beta_n} for n = {n}"
    ));
    img.checked()
}

/// `G(μ^{⊠n})`: density `(1/n)·t^{(1−n)/n}·f(t^{1/n})`, atom `β` unchanged.
pub fn gmap_boxtimes_power<T: Real>(
    mu: &Measure<T>,
    n: usize,
    cfg: &EvalConfig<T>,
) -> Result<Image<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("power n must be >= 1".into()));
    }
    if n == 1 {
        return gmap(mu, cfg);
    }
    checked_input(mu)?;
    let half_n = T::count(n) * T::lit(0.5);
    if let Some(lambda) = mu.as_point_mass() {
        let img = Image::new(Measure::dirac(lambda.powf(half_n)));
        return Ok(if lambda == T::zero() {
            img.with_convention(DIRAC_ZERO_CONVENTION)
        } else {
            img
        });
    }
    let base = f_table(mu, cfg)?;
    let exp =
        i32::try_from(n).map_err(|_| Error::InvalidParameter(format!("power {n} too large")))?;
    let table = FTable {
        probabilities: base.probabilities.clone(),
        values: base.values.iter().map(|&v| v.powi(exp)).collect(),
        beta: base.beta,
    };
    Image::new(measure_from_table(&table, base.beta)?).checked()
}

/// Atom at zero of `μ^{⊞n}` given `β = μ({0})`.
pub fn boxplus_atom<T: Real>(beta: T, n: usize) -> T {
    let nf = T::count(n);
    (nf * beta - (nf - T::one())).max(T::zero())
}

/// `(‖h⁻¹‖₂⁻¹, ‖h‖₂) = (m₋₁^{−1/2}, m₁^{1/2})`, with lower end 0 when `m₋₁ = ∞`.
pub fn support_bounds<T: Real>(mu: &Measure<T>) -> Result<(T, T)> {
    let upper = mu.moment(T::one())?.sqrt();
    if mu.atom_at_zero() > T::zero() {
        return Ok((T::zero(), upper));
    }
    let m_inv = mu.moment(-T::one())?;
    let lower = if m_inv.is_finite() {
        m_inv.sqrt().recip()
    } else {
        T::zero()
    };
    Ok((lower, upper))
}

/// Analytic `G` of a named family, tabulated on `points` nodes where the
/// density is not linear.
pub fn gmap_closed_form<T: Real>(family: Family<T>, points: usize) -> Result<Measure<T>> {
    family.check()?;
    match family {
        Family::PointMass { lambda } => Ok(Measure::dirac(lambda.sqrt())),
        Family::MarchenkoPastur { c } => Ok(marchenko_pastur_image(c)),
        Family::QuarterCircleSquared => Ok(marchenko_pastur_image(T::one())),
        Family::Projection { alpha } => {
            if points < 2 {
                return Err(Error::InvalidParameter("need at least 2 points".into()));
            }
            let one = T::one();
            let top = alpha.sqrt();
            let grid: Vec<T> = (0..points)
                .map(|i| top * T::count(i) / T::count(points - 1))
                .collect();
            let dens = grid
                .iter()
                .map(|&t| {
                    let d = t * t - one;
                    T::lit(2.0) * t * (one - alpha) / (d * d)
                })
                .collect();
            Ok(Measure::from_raw(
                vec![Atom::new(T::zero(), one - alpha)],
                grid,
                dens,
            ))
        }
    }
}

fn marchenko_pastur_image<T: Real>(c: T) -> Measure<T> {
    let one = T::one();
    let lo = (c - one).max(T::zero()).sqrt();
    let hi = c.sqrt();
    let atoms = if c < one {
        vec![Atom::new(T::zero(), one - c)]
    } else {
        vec![]
    };
    let two = T::lit(2.0);
    Measure::from_raw(atoms, vec![lo, hi], vec![two * lo, two * hi])
}

/// Exact CDF of `G(family)` at `x`.
pub fn closed_form_cdf<T: Real>(family: Family<T>, x: T) -> T {
    let one = T::one();
    let zero = T::zero();
    if x < zero {
        return zero;
    }
    match family {
        Family::PointMass { lambda } => {
            if x >= lambda.sqrt() {
                one
            } else {
                zero
            }
        }
        Family::MarchenkoPastur { c } => mp_image_cdf(c, x),
        Family::QuarterCircleSquared => mp_image_cdf(one, x),
        Family::Projection { alpha } => {
            if x * x >= alpha {
                one
            } else {
                (one - alpha) / (one - x * x)
            }
        }
    }
}

fn mp_image_cdf<T: Real>(c: T, x: T) -> T {
    let one = T::one();
    let atom = (one - c).max(T::zero());
    let lo2 = (c - one).max(T::zero());
    let x2 = x * x;
    if x2 <= lo2 {
        atom
    } else if x2 >= c {
        one
    } else {
        atom + x2 - lo2
    }
}
