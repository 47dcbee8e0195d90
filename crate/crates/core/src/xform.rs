//! Moment series `ψ`, its inverse `χ`, and the S-transform on the real slice.
//!
//! For a measure `μ` on `[0, ∞)` with `β = μ({0})`,
//! `ψ_μ(x) = ∫ xt/(1 − xt) dμ(t)` maps `(−∞, 0)` increasingly onto `(β − 1, 0)`,
//! so `χ_μ` and `S_μ(z) = (1 + z)/z · χ_μ(z)` are evaluated there by bracketed
//! inversion of a monotone function. No complex arithmetic is involved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{EvalConfig, Measure};
use crate::root::solve_increasing_negative_from;
use crate::scalar::Real;

/// Discretized `μ` ready for repeated transform evaluation.
#[derive(Debug, Clone)]
pub struct Transform<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    beta: T,
    first_moment: T,
    point_mass: Option<T>,
    root_tol: T,
}

impl<T: Real> Transform<T> {
    pub fn new(mu: &Measure<T>, cfg: &EvalConfig<T>) -> Result<Self> {
        cfg.check()?;
        if mu.is_dirac_zero() {
            return Err(Error::Precondition(
                "transforms are undefined for the point mass at 0".into(),
            ));
        }
        let (nodes, weights) = mu.quadrature(cfg.quad_points);
        let first_moment = mu.moment(T::one())?;
        Ok(Transform {
            nodes,
            weights,
            beta: mu.atom_at_zero(),
            first_moment,
            point_mass: mu.as_point_mass(),
            root_tol: cfg.root_tol,
        })
    }

    /// `μ({0})`.
    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn first_moment(&self) -> T {
        self.first_moment
    }

    fn psi_unchecked(&self, x: T) -> T {
        let one = T::one();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| {
                let xt = x * t;
                w * xt / (one - xt)
            })
            .sum()
    }

    /// `1 + ψ_μ(x) = ∫ 1/(1 − xt) dμ`, summed without cancellation.
    fn one_plus_psi(&self, x: T) -> T {
        let one = T::one();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w / (one - x * t))
            .sum()
    }

    /// `ψ_μ(x)` for `x < 0`.
    pub fn psi(&self, x: T) -> Result<T> {
        if !(x < T::zero()) {
            return Err(Error::Domain(format!(
                "psi is evaluated on the negative axis only, got x = {x}"
            )));
        }
        Ok(self.psi_unchecked(x))
    }

    fn check_z(&self, z: T) -> Result<()> {
        if !(z > self.beta - T::one() && z < T::zero()) {
            return Err(Error::Domain(format!(
                "z = {z} outside ({}, 0)",
                self.beta - T::one()
            )));
        }
        Ok(())
    }

    /// The unique `x < 0` with `ψ_μ(x) = z`, for `z ∈ (β − 1, 0)`.
    pub fn chi(&self, z: T) -> Result<T> {
        self.chi_split(z, T::one() + z)
    }

    /// `χ_μ(z)` given both `z` and `1 + z`. Near `z = −1` the equation is
    /// solved in the form `1 + ψ(x) = 1 + z`, which keeps relative accuracy.
    fn chi_split(&self, z: T, one_plus_z: T) -> Result<T> {
        self.chi_from(z, one_plus_z, -T::one())
    }

    fn chi_from(&self, z: T, one_plus_z: T, guess: T) -> Result<T> {
        self.check_z(z)?;
        if one_plus_z < T::lit(0.5) {
            solve_increasing_negative_from(
                |x| self.one_plus_psi(x),
                one_plus_z,
                self.root_tol,
                guess,
            )
        } else {
            solve_increasing_negative_from(|x| self.psi_unchecked(x), z, self.root_tol, guess)
        }
    }

    /// `S_μ(z) = (1 + z)/z · χ_μ(z)` for `z ∈ (β − 1, 0)`.
    pub fn s(&self, z: T) -> Result<T> {
        self.s_split(z, T::one() + z)
    }

    fn s_split(&self, z: T, one_plus_z: T) -> Result<T> {
        Ok(self.s_from(z, one_plus_z, -T::one())?.0)
    }

    /// `S(z)` and `χ(z)`, with the root search started at `guess`.
    fn s_from(&self, z: T, one_plus_z: T, guess: T) -> Result<(T, T)> {
        if let Some(lambda) = self.point_mass {
            self.check_z(z)?;
            return Ok((T::one() / lambda, z / (lambda * one_plus_z)));
        }
        let x = self.chi_from(z, one_plus_z, guess)?;
        Ok((one_plus_z / z * x, x))
    }

    /// `S_μ(0) = 1/m₁`.
    pub fn s_at_zero(&self) -> T {
        T::one() / self.first_moment
    }

    /// `F(t) = S_μ(t − 1)^{−1/2}` for `t ∈ (β, 1]`.
    pub fn f(&self, t: T) -> Result<T> {
        Ok(self.f_from(t, -T::one())?.0)
    }

    /// `F(t)` and the root `χ(t − 1)` it came from (`0` at `t = 1`).
    fn f_from(&self, t: T, guess: T) -> Result<(T, T)> {
        if t == T::one() {
            return Ok((self.s_at_zero().sqrt().recip(), T::zero()));
        }
        let (s, x) = self.s_from(t - T::one(), t, guess)?;
        Ok((s.sqrt().recip(), x))
    }
}

/// `ψ_μ(x)` for `x < 0`.
pub fn psi<T: Real>(mu: &Measure<T>, x: T, cfg: &EvalConfig<T>) -> Result<T> {
    Transform::new(mu, cfg)?.psi(x)
}

/// `χ_μ(z)` for `z ∈ (β − 1, 0)`.
pub fn chi<T: Real>(mu: &Measure<T>, z: T, cfg: &EvalConfig<T>) -> Result<T> {
    Transform::new(mu, cfg)?.chi(z)
}

/// `S_μ(z)` for `z ∈ (β − 1, 0)`.
pub fn s_transform<T: Real>(mu: &Measure<T>, z: T, cfg: &EvalConfig<T>) -> Result<T> {
    Transform::new(mu, cfg)?.s(z)
}

/// `S_μ(0) = 1/m₁(μ)`.
pub fn s_at_zero<T: Real>(mu: &Measure<T>) -> Result<T> {
    if mu.is_dirac_zero() {
        return Err(Error::Precondition(
            "S(0) undefined for the point mass at 0".into(),
        ));
    }
    Ok(T::one() / mu.moment(T::one())?)
}

/// Rows `(z, χ(z), S(z))` at `points` equally spaced interior points of `(β − 1, 0)`.
pub fn transform_table<T: Real>(
    mu: &Measure<T>,
    points: usize,
    cfg: &EvalConfig<T>,
) -> Result<Vec<(T, T, T)>> {
    let tr = Transform::new(mu, cfg)?;
    let span = T::one() - tr.beta();
    (1..=points)
        .map(|k| {
            let z = -span * T::count(k) / T::count(points + 1);
            let x = tr.chi(z)?;
            Ok((z, x, tr.s(z)?))
        })
        .collect()
}

/// The strictly increasing quantile map `t ↦ F_μ(t)` tabulated on a subinterval of `(β, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FTable<T> {
    pub probabilities: Vec<T>,
    pub values: Vec<T>,
    /// Atom of `μ` at zero.
    pub beta: T,
}

impl<T: Real> FTable<T> {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Linear interpolation of `F` inside the tabulated range.
    pub fn eval(&self, t: T) -> Option<T> {
        interp(&self.probabilities, &self.values, t)
    }

    /// Linear interpolation of `F^{<−1>}` inside the tabulated range.
    pub fn inverse(&self, s: T) -> Option<T> {
        interp(&self.values, &self.probabilities, s)
    }

    /// Index of the first pair of entries that fails strict increase.
    pub fn first_non_increasing(&self) -> Option<usize> {
        self.values
            .windows(2)
            .zip(self.probabilities.windows(2))
            .position(|(v, p)| !(v[1] > v[0]) || !(p[1] > p[0]))
    }
}

fn interp<T: Real>(xs: &[T], ys: &[T], x: T) -> Option<T> {
    let n = xs.len();
    if n < 2 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    Some(ys[k - 1] + (ys[k] - ys[k - 1]) * w)
}

const TABLE_CHUNK: usize = 64;

/// Probability grid on `(lower, 1]` from `u(w) = 4w³ − 3w⁴`: cubic clustering
/// at `lower`, quadratic clustering at 1, widest spacing `1.78/K` in between.
pub(crate) fn probability_grid<T: Real>(lower: T, cfg: &EvalConfig<T>) -> Vec<T> {
    let k = cfg.grid_size;
    let span = T::one() - lower;
    let eps = cfg.eps_boundary;
    let mut out: Vec<T> = (0..k - 1)
        .map(|i| {
            let w = T::count(i) / T::count(k - 1);
            let u = w * w * w * (T::lit(4.0) - T::lit(3.0) * w);
            lower + span * (eps + (T::one() - eps) * u)
        })
        .collect();
    out.push(T::one());
    out
}

/// Tabulates `F_μ(t) = S_μ(t − 1)^{−1/2}` on `grid_size` points of `(β + ε, 1]`.
pub fn f_table<T: Real>(mu: &Measure<T>, cfg: &EvalConfig<T>) -> Result<FTable<T>> {
    f_table_from(mu, mu.atom_at_zero(), cfg)
}

/// Tabulates `F_μ` on `(lower + ε, 1]` for some `lower ≥ β`.
pub fn f_table_from<T: Real>(mu: &Measure<T>, lower: T, cfg: &EvalConfig<T>) -> Result<FTable<T>> {
    if mu.as_point_mass().is_some() {
        return Err(Error::Precondition(
            "F is constant for a point mass; the quantile table is undefined".into(),
        ));
    }
    let tr = Transform::new(mu, cfg)?;
    let beta = tr.beta();
    if !(lower >= beta && lower < T::one()) {
        return Err(Error::Domain(format!(
            "table lower end {lower} outside [{beta}, 1)"
        )));
    }
    let probabilities = probability_grid(lower, cfg);
    // Fixed chunks, each solved left to right with the previous root as the
    // starting point; the result does not depend on the thread count.
    let values = probabilities
        .par_chunks(TABLE_CHUNK)
        .map(|chunk| {
            let mut guess = -T::one();
            chunk
                .iter()
                .map(|&t| {
                    let (f, x) = tr.f_from(t, guess)?;
                    if x < T::zero() {
                        guess = x;
                    }
                    Ok(f)
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<Vec<T>>>>()?
        .concat();
    let table = resolvable(probabilities, values, cfg.root_tol)?;
    Ok(FTable { beta, ..table })
}

/// Drops table points whose value is within solver tolerance of the previous
/// kept value. A drop larger than that is an error.
fn resolvable<T: Real>(probabilities: Vec<T>, values: Vec<T>, tol: T) -> Result<FTable<T>> {
    let band = |v: T| T::lit(16.0) * tol * v.abs();
    let n = values.len();
    let (mut p, mut f) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, (&t, &v)) in probabilities.iter().zip(&values).enumerate() {
        let Some(&last) = f.last() else {
            p.push(t);
            f.push(v);
            continue;
        };
        if v > last + band(last) {
            p.push(t);
            f.push(v);
        } else if v < last - band(last) || !v.is_finite() {
            return Err(Error::Numerical(format!(
                "F table not strictly increasing at t = {} (F = {last} then {v}); \
                 grid too coarse or tolerance too loose",
                probabilities[i - 1]
            )));
        } else if i == n - 1 && f.len() > 1 {
            *p.last_mut().unwrap() = t;
            *f.last_mut().unwrap() = v;
        }
    }
    Ok(FTable {
        probabilities: p,
        values: f,
        beta: T::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Family, DEFAULT_FAMILY_POINTS};

    fn cfg() -> EvalConfig<f64> {
        EvalConfig::default()
    }

    fn mp(c: f64) -> Measure<f64> {
        Measure::named(Family::MarchenkoPastur { c }, DEFAULT_FAMILY_POINTS).unwrap()
    }

    fn projection(alpha: f64) -> Measure<f64> {
        Measure::named(Family::Projection { alpha }, 0).unwrap()
    }

    /// ψ of the exact Marchenko–Pastur law by the midpoint rule in the angle
    /// variable `t = a + r(1 − cos θ)`, where the integrand is smooth.
    fn psi_mp_reference(c: f64, x: f64, n: usize) -> f64 {
        let (a, b) = ((c.sqrt() - 1.0).powi(2), (c.sqrt() + 1.0).powi(2));
        let r = 0.5 * (b - a);
        let h = std::f64::consts::PI / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) * h;
            let t = a + 2.0 * r * (0.5 * th).sin().powi(2);
            let dens_dt = r * r * th.sin().powi(2) / (2.0 * std::f64::consts::PI * t);
            acc += dens_dt * x * t / (1.0 - x * t);
        }
        acc * h
    }

    #[test]
    fn psi_of_dirac_and_projection() {
        let d = Measure::dirac(1.0);
        assert!((psi(&d, -1.0, &cfg()).unwrap() + 0.5).abs() < 1e-15);
        let p = projection(0.5);
        assert!((psi(&p, -3.0, &cfg()).unwrap() + 0.375).abs() < 1e-15);
        assert!(matches!(psi(&p, 0.0, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(psi(&p, 0.5, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_of_marchenko_pastur_matches_reference() {
        let reference = psi_mp_reference(1.0, -1.0, 1_000_000);
        let got = psi(&mp(1.0), -1.0, &cfg()).unwrap();
        assert!((got - reference).abs() < 1e-8, "{got} vs {reference}");
    }

    #[test]
    fn chi_examples() {
        let d = Measure::dirac(1.0);
        assert!((chi(&d, -0.5, &cfg()).unwrap() + 1.0).abs() < 1e-12);
        let p = projection(0.5);
        // αx/(1 − x) = −0.25 at α = 0.5 gives x = −1.
        assert!((chi(&p, -0.25, &cfg()).unwrap() + 1.0).abs() < 1e-11);
        assert!((chi(&p, -0.375, &cfg()).unwrap() + 3.0).abs() < 1e-11);
        assert!(matches!(chi(&p, -0.5, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(chi(&p, 0.0, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn chi_round_trip_marchenko_pastur() {
        for c in [0.5, 1.0, 2.0] {
            let tr = Transform::new(&mp(c), &cfg()).unwrap();
            let lo = tr.beta() - 1.0;
            for k in 1..=50 {
                let z = lo * k as f64 / 51.0;
                let x = tr.chi(z).unwrap();
                assert!((tr.psi(x).unwrap() - z).abs() <= 1e-10, "c={c} z={z}");
            }
        }
    }

    #[test]
    fn s_transform_closed_forms() {
        for c in [0.5, 1.0, 2.0] {
            let tr = Transform::new(&mp(c), &cfg()).unwrap();
            for z in [-0.75, -0.5, -0.25] {
                if z <= tr.beta() - 1.0 {
                    continue;
                }
                let s = tr.s(z).unwrap();
                assert!((s - 1.0 / (z + c)).abs() < 1e-6, "c={c} z={z} s={s}");
            }
        }
        for alpha in [0.3, 0.5, 0.7] {
            let tr = Transform::new(&projection(alpha), &cfg()).unwrap();
            for k in 1..10 {
                let z = -alpha * k as f64 / 10.0;
                let s = tr.s(z).unwrap();
                assert!((s - (z + 1.0) / (z + alpha)).abs() < 1e-6);
            }
        }
        let tr = Transform::new(&Measure::dirac(3.0), &cfg()).unwrap();
        assert!((tr.s(-0.4).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn s_at_zero_examples() {
        assert!((s_at_zero(&mp(2.0)).unwrap() - 0.5).abs() < 1e-5);
        assert_eq!(s_at_zero(&Measure::dirac(4.0)).unwrap(), 0.25);
        assert!((s_at_zero(&projection(0.4)).unwrap() - 2.5).abs() < 1e-14);
        assert!(s_at_zero(&Measure::dirac(0.0)).is_err());
    }

    #[test]
    fn f_table_marchenko_pastur() {
        for c in [0.5, 1.0, 2.0] {
            let table = f_table(&mp(c), &cfg()).unwrap();
            assert_eq!(table.len(), cfg().grid_size);
            assert_eq!(*table.probabilities.last().unwrap(), 1.0);
            for (&t, &f) in table.probabilities.iter().zip(&table.values) {
                assert!((f - (t - 1.0 + c).sqrt()).abs() < 1e-5, "c={c} t={t}");
            }
            let f1 = *table.values.last().unwrap();
            assert!((f1 * f1 - c).abs() < 1e-4);
        }
    }

    #[test]
    fn f_table_projection() {
        let alpha = 0.3;
        let table = f_table(&projection(alpha), &cfg()).unwrap();
        for (&t, &f) in table.probabilities.iter().zip(&table.values) {
            assert!((f - ((t - 1.0 + alpha) / t).sqrt()).abs() < 1e-5);
        }
    }

    #[test]
    fn f_table_rejects_point_mass() {
        assert!(matches!(
            f_table(&Measure::dirac(2.0), &cfg()),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            f_table(&Measure::dirac(0.0), &cfg()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lower_end_approaches_inverse_moment() {
        // MP(2): m₋₁ = 1, so F(β + ε)² → 1 as ε → 0.
        let mu = mp(2.0);
        let m_inv = mu.moment(-1.0).unwrap();
        let tr = Transform::new(&mu, &cfg()).unwrap();
        let e1 = (tr.f(1e-2).unwrap().powi(2) - 1.0 / m_inv).abs();
        let e2 = (tr.f(1e-4).unwrap().powi(2) - 1.0 / m_inv).abs();
        assert!(e2 < e1, "{e1} {e2}");
    }

    #[test]
    fn transform_table_rows() {
        let rows = transform_table(&mp(1.0), 9, &cfg()).unwrap();
        assert_eq!(rows.len(), 9);
        for (z, x, s) in rows {
            assert!(x < 0.0);
            assert!((s - 1.0 / (z + 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn single_precision_s_transform() {
        let mu = Measure::<f32>::named(Family::MarchenkoPastur { c: 2.0 }, 1025).unwrap();
        let tr = Transform::new(&mu, &EvalConfig::default()).unwrap();
        let s = tr.s(-0.5).unwrap();
        assert!((s - 1.0 / 1.5).abs() < 1e-3, "{s}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn psi_strictly_increasing(a in -50.0f64..-1e-3, b in -50.0f64..-1e-3) {
                prop_assume!((a - b).abs() > 1e-9);
                let (x1, x2) = if a < b { (a, b) } else { (b, a) };
                for mu in [mp(0.5), projection(0.3), Measure::dirac(2.0)] {
                    let tr = Transform::new(&mu, &cfg()).unwrap();
                    prop_assert!(tr.psi(x1).unwrap() < tr.psi(x2).unwrap());
                }
            }

            #[test]
            fn psi_range(x in -1e4f64..-1e-6) {
                let mu = mp(0.5);
                let tr = Transform::new(&mu, &cfg()).unwrap();
                let v = tr.psi(x).unwrap();
                prop_assert!(v > tr.beta() - 1.0 && v < 0.0);
            }
        }
    }
}
