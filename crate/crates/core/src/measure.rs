//! Compactly supported probability measures on `[0, ∞)`.
//!
//! A [`Measure`] is a finite set of atoms plus a piecewise-linear density
//! tabulated on a strictly increasing grid. The density is zero outside the
//! grid. Every operation here is exact for that contract: cell integrals of
//! the linear pieces are done in closed form or with rules that are exact for
//! the integrand degree.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_unit;
use crate::scalar::Real;

/// Number of density nodes used for named families with a continuous part.
pub const DEFAULT_FAMILY_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom<T> {
    pub location: T,
    pub mass: T,
}

impl<T> Atom<T> {
    pub fn new(location: T, mass: T) -> Self {
        Atom { location, mass }
    }
}

/// One broken invariant, as reported by [`Measure::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MassNotOne { mass: f64 },
    NegativeSupport { location: f64 },
    DuplicateAtom { location: f64 },
    AtomMassOutOfRange { location: f64, mass: f64 },
    NonIncreasingGrid { index: usize },
    NegativeDensity { index: usize },
    LengthMismatch { grid: usize, density: usize },
    NonFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MassNotOne { mass } => write!(f, "total mass {mass} differs from 1"),
            Violation::NegativeSupport { location } => {
                write!(f, "negative support point {location}")
            }
            Violation::DuplicateAtom { location } => write!(f, "duplicate atom at {location}"),
            Violation::AtomMassOutOfRange { location, mass } => {
                write!(f, "atom at {location} has mass {mass} outside (0, 1]")
            }
            Violation::NonIncreasingGrid { index } => {
                write!(f, "density grid not strictly increasing at index {index}")
            }
            Violation::NegativeDensity { index } => {
                write!(f, "negative density ordinate at index {index}")
            }
            Violation::LengthMismatch { grid, density } => {
                write!(f, "grid has {grid} abscissae but {density} ordinates")
            }
            Violation::NonFinite => write!(f, "non-finite value in measure"),
        }
    }
}

/// Numerical knobs for the transform pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig<T> {
    /// Gauss–Legendre nodes per density cell.
    pub quad_points: usize,
    /// Relative bracket width at which root refinement stops.
    pub root_tol: T,
    /// Points in the quantile table of `F`.
    pub grid_size: usize,
    /// Offset of the first table point from the left end of `(β, 1]`,
    /// as a fraction of the interval length.
    pub eps_boundary: T,
}

impl<T: Real> Default for EvalConfig<T> {
    fn default() -> Self {
        EvalConfig {
            quad_points: 4,
            root_tol: T::lit(1e-13).max(T::epsilon() * T::lit(4.0)),
            grid_size: 2048,
            eps_boundary: T::lit(1e-10).max(T::epsilon()),
        }
    }
}

impl<T: Real> EvalConfig<T> {
    pub fn check(&self) -> Result<()> {
        if self.quad_points == 0 || self.grid_size < 3 {
            return Err(Error::InvalidParameter(format!(
                "quad_points must be >= 1 and grid_size >= 3 (got {} and {})",
                self.quad_points, self.grid_size
            )));
        }
        if !(self.root_tol > T::zero()) || !(self.eps_boundary > T::zero()) {
            return Err(Error::InvalidParameter(
                "root_tol and eps_boundary must be positive".into(),
            ));
        }
        if self.eps_boundary >= T::lit(0.5) {
            return Err(Error::InvalidParameter("eps_boundary must be < 0.5".into()));
        }
        Ok(())
    }
}

/// Closed-form families with known images under the G map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    PointMass {
        lambda: T,
    },
    Projection {
        alpha: T,
    },
    MarchenkoPastur {
        c: T,
    },
    /// Law of `h²` for a quarter-circular `h`; coincides with Marchenko–Pastur at `c = 1`.
    QuarterCircleSquared,
}

impl<T: Real> Family<T> {
    pub const NAMES: [&'static str; 4] = [
        "point_mass",
        "projection",
        "marchenko_pastur",
        "quarter_circle_squared",
    ];

    /// Builds a family from its name and `key = value` parameters.
    pub fn from_name(name: &str, params: &[(String, T)]) -> Result<Self> {
        let get = |keys: &[&str]| -> Result<T> {
            params
                .iter()
                .find(|(k, _)| keys.contains(&k.as_str()))
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("family {name} needs parameter {}", keys[0]))
                })
        };
        let fam = match name {
            "point_mass" | "dirac" => Family::PointMass {
                lambda: get(&["lambda", "location"])?,
            },
            "projection" => Family::Projection {
                alpha: get(&["alpha"])?,
            },
            "marchenko_pastur" | "mp" | "free_poisson" => Family::MarchenkoPastur {
                c: get(&["c", "lambda"])?,
            },
            "quarter_circle_squared" => Family::QuarterCircleSquared,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown family {other:?}; expected one of {:?}",
                    Self::NAMES
                )))
            }
        };
        fam.check()?;
        Ok(fam)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        match *self {
            Family::PointMass { lambda } if !(lambda >= T::zero() && lambda.is_finite()) => {
                bad(format!("point_mass needs lambda >= 0, got {lambda}"))
            }
            Family::Projection { alpha } if !(alpha > T::zero() && alpha < T::one()) => {
                bad(format!("projection needs alpha in (0,1), got {alpha}"))
            }
            Family::MarchenkoPastur { c } if !(c > T::zero() && c.is_finite()) => {
                bad(format!("marchenko_pastur needs c > 0, got {c}"))
            }
            _ => Ok(()),
        }
    }
}

/// Atoms plus a piecewise-linear density on `[t₀, t_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<T> {
    atoms: Vec<Atom<T>>,
    grid: Vec<T>,
    density: Vec<T>,
    /// Density mass accumulated up to each grid node.
    cumulative: Vec<T>,
}

impl<T: Real> Measure<T> {
    /// Builds a measure and checks every invariant.
    pub fn new(atoms: Vec<Atom<T>>, grid: Vec<T>, density: Vec<T>) -> Result<Self> {
        let m = Self::from_raw(atoms, grid, density);
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidMeasure(v))
        }
    }

    /// Builds a measure without checking invariants. Atoms are sorted by
    /// location; a grid/density length mismatch leaves the density empty.
    pub fn from_raw(mut atoms: Vec<Atom<T>>, grid: Vec<T>, density: Vec<T>) -> Self {
        atoms.sort_by(|a, b| {
            a.location
                .partial_cmp(&b.location)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut m = Measure {
            atoms,
            grid,
            density,
            cumulative: Vec::new(),
        };
        m.cumulative = m.accumulate();
        m
    }

    pub fn dirac(location: T) -> Self {
        Self::from_raw(vec![Atom::new(location, T::one())], vec![], vec![])
    }

    /// Constructs a named family. `points` is the number of density nodes used
    /// when the family has a continuous part.
    pub fn named(family: Family<T>, points: usize) -> Result<Self> {
        family.check()?;
        match family {
            Family::PointMass { lambda } => Ok(Self::dirac(lambda)),
            Family::Projection { alpha } => Self::new(
                vec![
                    Atom::new(T::zero(), T::one() - alpha),
                    Atom::new(T::one(), alpha),
                ],
                vec![],
                vec![],
            ),
            Family::MarchenkoPastur { c } => marchenko_pastur(c, points),
            Family::QuarterCircleSquared => marchenko_pastur(T::one(), points),
        }
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn density(&self) -> &[T] {
        &self.density
    }

    pub fn has_density(&self) -> bool {
        self.grid.len() >= 2 && self.grid.len() == self.density.len()
    }

    /// Mass of the atom at zero (`β`).
    pub fn atom_at_zero(&self) -> T {
        self.atoms
            .iter()
            .filter(|a| a.location == T::zero())
            .map(|a| a.mass)
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn atom_mass(&self) -> T {
        self.atoms
            .iter()
            .map(|a| a.mass)
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn density_mass(&self) -> T {
        self.cumulative.last().copied().unwrap_or_else(T::zero)
    }

    pub fn total_mass(&self) -> T {
        self.atom_mass() + self.density_mass()
    }

    /// `Some(λ)` when the measure is a single atom carrying all the mass.
    pub fn as_point_mass(&self) -> Option<T> {
        if self.atoms.len() == 1 && self.density_mass() == T::zero() {
            Some(self.atoms[0].location)
        } else {
            None
        }
    }

    pub fn is_dirac_zero(&self) -> bool {
        self.as_point_mass() == Some(T::zero())
    }

    /// Smallest and largest point of the support.
    pub fn support_hull(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for a in &self.atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        if self.has_density() {
            lo = lo.min(self.grid[0]);
            hi = hi.max(self.grid[self.grid.len() - 1]);
        }
        (lo, hi)
    }

    /// Same law pushed forward by `t ↦ k·t`, `k > 0`.
    pub fn scaled(&self, k: T) -> Self {
        Self::from_raw(
            self.atoms
                .iter()
                .map(|a| Atom::new(a.location * k, a.mass))
                .collect(),
            self.grid.iter().map(|&t| t * k).collect(),
            self.density.iter().map(|&f| f / k).collect(),
        )
    }

    /// Every broken invariant; empty iff the measure is valid.
    pub fn validate(&self) -> Vec<Violation> {
        self.violations(true)
    }

    /// As [`Measure::validate`] but for laws on the whole real line.
    pub fn validate_real_line(&self) -> Vec<Violation> {
        self.violations(false)
    }

    fn violations(&self, nonnegative: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let finite = self
            .atoms
            .iter()
            .all(|a| a.location.is_finite() && a.mass.is_finite())
            && self.grid.iter().chain(&self.density).all(|x| x.is_finite());
        if !finite {
            out.push(Violation::NonFinite);
            return out;
        }
        for a in &self.atoms {
            if nonnegative && a.location < T::zero() {
                out.push(Violation::NegativeSupport {
                    location: a.location.to_f64_lossy(),
                });
            }
            if !(a.mass > T::zero() && a.mass <= T::one()) {
                out.push(Violation::AtomMassOutOfRange {
                    location: a.location.to_f64_lossy(),
                    mass: a.mass.to_f64_lossy(),
                });
            }
        }
        for w in self.atoms.windows(2) {
            if w[0].location == w[1].location {
                out.push(Violation::DuplicateAtom {
                    location: w[0].location.to_f64_lossy(),
                });
            }
        }
        if self.grid.len() != self.density.len() {
            out.push(Violation::LengthMismatch {
                grid: self.grid.len(),
                density: self.density.len(),
            });
        } else {
            if let Some(&t0) = self.grid.first() {
                if nonnegative && t0 < T::zero() {
                    out.push(Violation::NegativeSupport {
                        location: t0.to_f64_lossy(),
                    });
                }
            }
            for (i, w) in self.grid.windows(2).enumerate() {
                if !(w[1] > w[0]) {
                    out.push(Violation::NonIncreasingGrid { index: i + 1 });
                }
            }
            for (i, f) in self.density.iter().enumerate() {
                if *f < T::zero() {
                    out.push(Violation::NegativeDensity { index: i });
                }
            }
        }
        let mass = self.total_mass();
        if !((mass - T::one()).abs() <= T::mass_tolerance()) {
            out.push(Violation::MassNotOne {
                mass: mass.to_f64_lossy(),
            });
        }
        out
    }

    fn accumulate(&self) -> Vec<T> {
        if self.grid.len() != self.density.len() || self.grid.is_empty() {
            return Vec::new();
        }
        let mut cum = Vec::with_capacity(self.grid.len());
        let mut acc = T::zero();
        cum.push(acc);
        for i in 1..self.grid.len() {
            let h = self.grid[i] - self.grid[i - 1];
            acc = acc + h * (self.density[i] + self.density[i - 1]) * T::lit(0.5);
            cum.push(acc);
        }
        cum
    }

    /// Density value at `x` (zero outside the grid).
    pub fn density_at(&self, x: T) -> T {
        if !self.has_density() {
            return T::zero();
        }
        let n = self.grid.len();
        if x < self.grid[0] || x > self.grid[n - 1] {
            return T::zero();
        }
        let i = self.cell_index(x);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let w = (x - t0) / (t1 - t0);
        self.density[i] + (self.density[i + 1] - self.density[i]) * w
    }

    /// Index `i` of the cell `[t_i, t_{i+1}]` containing `x`, clamped.
    fn cell_index(&self, x: T) -> usize {
        let n = self.grid.len();
        let k = self.grid.partition_point(|&t| t <= x);
        k.saturating_sub(1).min(n - 2)
    }

    /// Density mass on `[t₀, x]`.
    fn density_cdf(&self, x: T) -> T {
        if !self.has_density() || x <= self.grid[0] {
            return T::zero();
        }
        let n = self.grid.len();
        if x >= self.grid[n - 1] {
            return self.cumulative[n - 1];
        }
        let i = self.cell_index(x);
        let fx = self.density_at(x);
        self.cumulative[i] + (x - self.grid[i]) * (self.density[i] + fx) * T::lit(0.5)
    }

    /// `μ([0, x])`.
    pub fn cdf(&self, x: T) -> T {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.location <= x)
            .map(|a| a.mass)
            .fold(T::zero(), |a, b| a + b);
        (atoms + self.density_cdf(x)).min(T::one()).max(T::zero())
    }

    /// `μ([0, x))`.
    pub fn cdf_left(&self, x: T) -> T {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.location < x)
            .map(|a| a.mass)
            .fold(T::zero(), |a, b| a + b);
        (atoms + self.density_cdf(x)).min(T::one()).max(T::zero())
    }

    /// Points where the CDF changes its functional form.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.atoms.iter().map(|a| a.location).collect();
        if self.has_density() {
            pts.extend_from_slice(&self.grid);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        pts.dedup();
        pts
    }

    /// Generalized inverse `inf{x : cdf(x) ≥ q}` for `q ∈ (0, 1)`.
    pub fn quantile(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::Domain(format!("quantile level {q} outside (0,1)")));
        }
        let pts = self.breakpoints();
        if pts.is_empty() {
            return Err(Error::Precondition("quantile of an empty measure".into()));
        }
        let j = pts.partition_point(|&b| self.cdf(b) < q);
        if j >= pts.len() {
            // Total mass falls short of q by rounding.
            return Ok(pts[pts.len() - 1]);
        }
        let b = pts[j];
        if j == 0 || self.cdf_left(b) < q {
            return Ok(b);
        }
        // Inside (pts[j-1], b): no atoms, density linear on one cell.
        let a = pts[j - 1];
        if !self.has_density() || a < self.grid[0] || b > self.grid[self.grid.len() - 1] {
            return Ok(b);
        }
        let i = self.cell_index(a);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let r = q - self.cdf(a) + self.density_cdf(a) - self.cumulative[i];
        let f0 = self.density[i];
        let slope = (self.density[i + 1] - f0) / (t1 - t0);
        // Solve f0·y + slope·y²/2 = r for y = x − t0.
        let half = slope * T::lit(0.5);
        let disc = (f0 * f0 + T::lit(4.0) * half * r).max(T::zero());
        let denom = f0 + disc.sqrt();
        let y = if denom > T::zero() {
            T::lit(2.0) * r / denom
        } else {
            T::zero()
        };
        Ok((t0 + y).max(a).min(b))
    }

    /// `∫ t^p dμ(t)`. Negative powers of an atom at zero are an error; a
    /// density whose negative moment diverges yields `+∞`.
    pub fn moment(&self, p: T) -> Result<T> {
        let mut acc = T::zero();
        for a in &self.atoms {
            if a.location == T::zero() {
                if p < T::zero() {
                    return Err(Error::InfiniteMoment(format!(
                        "moment of order {p} with an atom of mass {} at 0",
                        a.mass
                    )));
                }
                if p == T::zero() {
                    acc = acc + a.mass;
                }
            } else {
                acc = acc + a.mass * a.location.powf(p);
            }
        }
        if self.has_density() {
            acc = acc + self.density_moment(p);
        }
        Ok(acc)
    }

    fn density_moment(&self, p: T) -> T {
        let (xs, ws) = gauss_legendre_unit::<T>(8);
        let mut acc = T::zero();
        for i in 0..self.grid.len() - 1 {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            let (fa, fb) = (self.density[i], self.density[i + 1]);
            let h = b - a;
            if a == T::zero() {
                // Exact: ∫₀ʰ t^p (fa + s·t) dt.
                let s = (fb - fa) / h;
                let one = T::one();
                let two = T::lit(2.0);
                let lead = if fa == T::zero() {
                    T::zero()
                } else if p <= -one {
                    return T::infinity();
                } else {
                    fa * h.powf(p + one) / (p + one)
                };
                let lin = if s == T::zero() {
                    T::zero()
                } else if p <= -two {
                    return T::infinity();
                } else {
                    s * h.powf(p + two) / (p + two)
                };
                acc = acc + lead + lin;
            } else {
                let cell: T = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| {
                        let t = a + h * x;
                        w * t.powf(p) * (fa + (fb - fa) * x)
                    })
                    .sum();
                acc = acc + cell * h;
            }
        }
        acc
    }

    /// Quadrature rule for `∫ g dμ`: atoms followed by `quad_points` Gauss
    /// nodes per density cell, with weights that already include the density.
    pub fn quadrature(&self, quad_points: usize) -> (Vec<T>, Vec<T>) {
        let mut nodes: Vec<T> = self.atoms.iter().map(|a| a.location).collect();
        let mut weights: Vec<T> = self.atoms.iter().map(|a| a.mass).collect();
        if self.has_density() {
            let (xs, ws) = gauss_legendre_unit::<T>(quad_points);
            for i in 0..self.grid.len() - 1 {
                let (a, b) = (self.grid[i], self.grid[i + 1]);
                let (fa, fb) = (self.density[i], self.density[i + 1]);
                if fa == T::zero() && fb == T::zero() {
                    continue;
                }
                let h = b - a;
                for (&x, &w) in xs.iter().zip(&ws) {
                    nodes.push(a + h * x);
                    weights.push(w * h * (fa + (fb - fa) * x));
                }
            }
        }
        (nodes, weights)
    }
}

const DEEP_NODES_PER_DECADE: f64 = 8.0;

/// Marchenko–Pastur law with parameter `c` tabulated on about `points` nodes.
///
/// Nodes are clustered toward both edges of `[a, b]`. The ordinates are
/// chosen so that the trapezoid mass of every cell equals its
/// exact mass, which absorbs the `t^{-1/2}` singularity at 0 when `c = 1`.
fn marchenko_pastur<T: Real>(c: T, points: usize) -> Result<Measure<T>> {
    if points < 4 {
        return Err(Error::InvalidParameter(format!(
            "marchenko_pastur needs at least 4 density points, got {points}"
        )));
    }
    let cf = c.to_f64_lossy();
    let (a, b) = ((cf.sqrt() - 1.0).powi(2), (cf.sqrt() + 1.0).powi(2));
    let rad = 0.5 * (b - a);
    let m = points - 1;
    // Smoothstep in the angle: nodes cluster quadratically in θ at both edges,
    // so t − a ∝ i⁴ near an edge.
    let theta = |i: usize| {
        let w = i as f64 / m as f64;
        std::f64::consts::PI * w * w * (3.0 - 2.0 * w)
    };
    // a + rad·(1 − cos θ), written to avoid cancellation near θ = 0.
    let node = |th: f64| a + 2.0 * rad * (0.5 * th).sin().powi(2);
    // Angles whose nodes stay strictly increasing once rounded to `T`.
    // When the support reaches 0 the quantile map near 0 depends on the mass
    // far below the first node, so geometric nodes are added down to 1e-24.
    let mut raw: Vec<f64> = Vec::new();
    let mut first = 1;
    if a == 0.0 {
        // Hand over to the regular nodes once their ratio is below the
        // geometric one.
        let ratio = 10f64.powf(1.0 / DEEP_NODES_PER_DECADE);
        while first + 1 < m && node(theta(first + 1)) > ratio * node(theta(first)) {
            first += 1;
        }
        let t_join = node(theta(first));
        let mut k = 0;
        loop {
            let t = 10f64.powf(-24.0 + k as f64 / DEEP_NODES_PER_DECADE);
            if t >= t_join / ratio.sqrt() {
                break;
            }
            raw.push(2.0 * (t / (2.0 * rad)).sqrt().asin());
            k += 1;
        }
    }
    raw.extend((first..m).map(theta));
    let mut angles: Vec<f64> = Vec::with_capacity(raw.len() + 2);
    let mut last = T::lit(a);
    angles.push(0.0);
    for th in raw {
        let t = T::lit(node(th));
        if t > last && t < T::lit(b) {
            angles.push(th);
            last = t;
        }
    }
    angles.push(std::f64::consts::PI);
    let mut grid: Vec<f64> = angles.iter().map(|&th| node(th)).collect();
    let m = grid.len() - 1;
    grid[0] = a;
    grid[m] = b;
    let dens = |t: f64| marchenko_pastur_density(cf, t);
    let mut density: Vec<f64> = grid.iter().map(|&t| dens(t)).collect();

    // Exact mass of a cell in the angle variable, where the integrand
    // rad²·sin²θ / (2π t(θ)) is smooth.
    let (xs, ws) = gauss_legendre_unit::<f64>(16);
    let cell_mass = |th0: f64, th1: f64| -> f64 {
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let th = th0 + (th1 - th0) * x;
                let s = th.sin();
                w * rad * rad * s * s / (2.0 * std::f64::consts::PI * node(th))
            })
            .sum::<f64>()
            * (th1 - th0)
    };
    // Ordinates are re-solved outward from the exact value at the middle node
    // so that every cell carries its exact mass.
    let mid = m / 2;
    for i in (0..mid).rev() {
        let mass = cell_mass(angles[i], angles[i + 1]);
        density[i] = (2.0 * mass / (grid[i + 1] - grid[i]) - density[i + 1]).max(0.0);
    }
    for i in mid..m {
        let mass = cell_mass(angles[i], angles[i + 1]);
        density[i + 1] = (2.0 * mass / (grid[i + 1] - grid[i]) - density[i]).max(0.0);
    }

    let mut atoms = Vec::new();
    if cf < 1.0 {
        atoms.push(Atom::new(T::zero(), T::one() - c));
    }
    Measure::new(
        atoms,
        grid.into_iter().map(T::lit).collect(),
        density.into_iter().map(T::lit).collect(),
    )
}

/// Exact Marchenko–Pastur density, for oracles and plots.
pub fn marchenko_pastur_density(c: f64, t: f64) -> f64 {
    let (a, b) = ((c.sqrt() - 1.0).powi(2), (c.sqrt() + 1.0).powi(2));
    if t <= a || t >= b {
        0.0
    } else {
        ((t - a) * (b - t)).sqrt() / (2.0 * std::f64::consts::PI * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(c: f64) -> Measure<f64> {
        Measure::named(Family::MarchenkoPastur { c }, DEFAULT_FAMILY_POINTS).unwrap()
    }

    #[test]
    fn projection_atoms() {
        let m = Measure::<f64>::named(Family::Projection { alpha: 0.5 }, 0).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(0.0, 0.5), Atom::new(1.0, 0.5)]);
    }

    #[test]
    fn point_mass_atom() {
        let m = Measure::<f64>::named(Family::PointMass { lambda: 1.0 }, 0).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(1.0, 1.0)]);
        assert_eq!(m.as_point_mass(), Some(1.0));
    }

    #[test]
    fn marchenko_pastur_one_mass_and_mean() {
        let m = mp(1.0);
        assert!(m.atoms().is_empty());
        assert_eq!(m.grid()[0], 0.0);
        assert!((m.grid()[m.grid().len() - 1] - 4.0).abs() < 1e-12);
        assert!((m.total_mass() - 1.0).abs() < 1e-6, "{}", m.total_mass());
        assert!((m.moment(1.0).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn marchenko_pastur_small_c_has_atom() {
        let m = mp(0.5);
        assert_eq!(m.atoms(), &[Atom::new(0.0, 0.5)]);
        assert!((m.total_mass() - 1.0).abs() < 1e-6);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn quarter_circle_squared_is_mp_one() {
        let q = Measure::<f64>::named(Family::QuarterCircleSquared, 257).unwrap();
        let m = Measure::<f64>::named(Family::MarchenkoPastur { c: 1.0 }, 257).unwrap();
        assert_eq!(q, m);
    }

    #[test]
    fn bad_parameters_rejected() {
        for fam in [
            Family::Projection { alpha: 0.0 },
            Family::Projection { alpha: 1.0 },
            Family::MarchenkoPastur { c: 0.0 },
            Family::PointMass { lambda: -1.0 },
        ] {
            assert!(matches!(
                Measure::<f64>::named(fam, 100),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn moments_of_simple_measures() {
        let d = Measure::<f64>::dirac(4.0);
        assert_eq!(d.moment(1.0).unwrap(), 4.0);
        let p = Measure::<f64>::named(Family::Projection { alpha: 0.7 }, 0).unwrap();
        assert!((p.moment(2.0).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(p.moment(-1.0), Err(Error::InfiniteMoment(_))));
        assert!((p.moment(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn marchenko_pastur_mean_equals_c() {
        for c in [0.5, 1.0, 2.0] {
            let m = mp(c);
            assert!((m.moment(1.0).unwrap() - c).abs() < 1e-4, "c={c}");
            assert!((m.moment(0.0).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn inverse_moment() {
        // MP(c), c > 1: ∫ t⁻¹ dμ = 1/(c−1).
        let m = mp(2.0);
        assert!((m.moment(-1.0).unwrap() - 1.0).abs() < 1e-4);
        // Singular at zero when c = 1.
        assert!(mp(1.0).moment(-1.0).unwrap().is_infinite());
    }

    #[test]
    fn cdf_examples() {
        let p = Measure::<f64>::named(Family::Projection { alpha: 0.5 }, 0).unwrap();
        assert_eq!(p.cdf(0.5), 0.5);
        assert_eq!(p.cdf_left(0.0), 0.0);
        assert_eq!(p.cdf(0.0), 0.5);
        let d = Measure::<f64>::dirac(2.0);
        assert_eq!(d.cdf(3.0), 1.0);
        assert_eq!(d.cdf(1.999), 0.0);
    }

    #[test]
    fn quantile_of_linear_density() {
        // Density 2t on [0, 1]: CDF t², quantile √q.
        let m = Measure::new(vec![], vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        for q in [0.01f64, 0.25, 0.5, 0.9] {
            assert!((m.quantile(q).unwrap() - q.sqrt()).abs() < 1e-14);
        }
        assert!(matches!(m.quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(m.quantile(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn quantile_with_atoms() {
        let p = Measure::<f64>::named(Family::Projection { alpha: 0.3 }, 0).unwrap();
        assert_eq!(p.quantile(0.5).unwrap(), 0.0);
        assert_eq!(p.quantile(0.7).unwrap(), 0.0);
        assert_eq!(p.quantile(0.71).unwrap(), 1.0);
    }

    #[test]
    fn validate_reports() {
        assert!(mp(1.0).validate().is_empty());
        let m = mp(1.0);
        let doubled = Measure::from_raw(
            vec![],
            m.grid().to_vec(),
            m.density().iter().map(|f| 2.0 * f).collect(),
        );
        let v = doubled.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::MassNotOne { .. }));

        let neg = Measure::<f64>::from_raw(vec![Atom::new(-1.0, 1.0)], vec![], vec![]);
        assert_eq!(
            neg.validate(),
            vec![Violation::NegativeSupport { location: -1.0 }]
        );

        let dup = Measure::<f64>::from_raw(
            vec![Atom::new(0.0, 0.5), Atom::new(0.0, 0.5)],
            vec![],
            vec![],
        );
        assert!(dup
            .validate()
            .contains(&Violation::DuplicateAtom { location: 0.0 }));
    }

    #[test]
    fn scaled_measure() {
        let m = mp(1.0);
        let s = m.scaled(4.0);
        assert!((s.moment(1.0).unwrap() - 4.0 * m.moment(1.0).unwrap()).abs() < 1e-12);
        assert!((s.total_mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn f32_marchenko_pastur() {
        let m = Measure::<f32>::named(Family::MarchenkoPastur { c: 2.0 }, 1025).unwrap();
        assert!((m.moment(1.0).unwrap() - 2.0).abs() < 1e-3);
    }
}
