//! Law `γ` of the Lyapunov exponents `L = ln Λ`.
//!
//! `γ` is the pushforward of `ν = G(μ)` by `ln`, with density `eᵗ·f(eᵗ)`. It
//! requires `μ({0}) = 0`. When `ν` reaches down to 0 (`m₋₁(μ) = ∞`) the law
//! of `L` is unbounded below and is truncated at a small tail quantile.

use crate::error::{Error, Result};
use crate::gmap::{gmap, support_bounds, Image, Truncation};
use crate::measure::{EvalConfig, Measure};
use crate::scalar::Real;

/// Tail mass cut from an unbounded-below exponent law.
pub const TAIL_MASS: f64 = 1e-7;

/// Log-grid nodes per quantile-table point.
const LOG_OVERSAMPLING: usize = 8;

/// `γ` for `μ` with no atom at zero.
pub fn lyapunov_distribution<T: Real>(mu: &Measure<T>, cfg: &EvalConfig<T>) -> Result<Image<T>> {
    let beta = mu.atom_at_zero();
    if beta > T::zero() {
        return Err(Error::Precondition(format!(
            "Lyapunov exponent law needs μ({{0}}) = 0, got {beta}"
        )));
    }
    if let Some(lambda) = mu.as_point_mass() {
        return Ok(Image::new(Measure::dirac(lambda.ln() * T::lit(0.5))));
    }
    let nu = gmap(mu, cfg)?.measure;
    let (lower, _) = support_bounds(mu)?;
    let unbounded = lower == T::zero();
    let grid = nu.grid();
    let (s_first, s_last) = (grid[0], grid[grid.len() - 1]);
    let s_cut = if unbounded {
        nu.quantile(T::lit(TAIL_MASS))?.max(s_first)
    } else {
        s_first
    };
    let (t_lo, t_hi) = (s_cut.ln(), s_last.ln());

    let n_log = cfg.grid_size * LOG_OVERSAMPLING;
    let mut nodes: Vec<T> = (0..n_log)
        .map(|i| t_lo + (t_hi - t_lo) * T::count(i) / T::count(n_log - 1))
        .collect();
    nodes.extend(grid.iter().filter(|&&s| s > s_cut).map(|&s| s.ln()));
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    nodes.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (T::one() + b.abs()));

    let dens: Vec<T> = nodes
        .iter()
        .map(|&t| {
            let s = t.exp();
            s * nu.density_at(s.min(s_last).max(s_first))
        })
        .collect();
    let gamma = Measure::from_raw(vec![], nodes, dens);
    let mut img = Image::new(gamma);
    if unbounded {
        img.report.truncation = Some(Truncation {
            lower: t_lo,
            tail_mass: nu.cdf(s_cut),
        });
        img.report.notes.push(format!(
            "support unbounded below; tabulated from t = {t_lo} (tail mass {})",
            nu.cdf(s_cut)
        ));
    }
    let v = img.measure.validate_real_line();
    if !v.is_empty() {
        return Err(Error::Numerical(format!(
            "exponent law violates invariants: {}",
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Family, DEFAULT_FAMILY_POINTS};

    fn mp(c: f64) -> Measure<f64> {
        Measure::named(Family::MarchenkoPastur { c }, DEFAULT_FAMILY_POINTS).unwrap()
    }

    #[test]
    fn marchenko_pastur_exponent_law() {
        for lambda in [1.5, 2.0] {
            let img = lyapunov_distribution(&mp(lambda), &EvalConfig::default()).unwrap();
            let g = &img.measure;
            assert!(img.report.truncation.is_none());
            let (lo, hi) = (0.5 * (lambda - 1.0f64).ln(), 0.5 * lambda.ln());
            for i in 1..50 {
                let t = lo + (hi - lo) * i as f64 / 50.0;
                assert!((g.density_at(t) - 2.0 * (2.0 * t).exp()).abs() < 1e-3);
            }
            assert!((g.total_mass() - 1.0).abs() < 1e-5);
            let top = g.grid()[g.grid().len() - 1];
            let argmax = g
                .grid()
                .iter()
                .zip(g.density())
                .fold(
                    (0.0, f64::MIN),
                    |acc, (&t, &f)| if f > acc.1 { (t, f) } else { acc },
                )
                .0;
            assert!((argmax - top).abs() < 1e-3);
        }
    }

    #[test]
    fn triangle_law() {
        let img = lyapunov_distribution(&mp(1.0), &EvalConfig::default()).unwrap();
        let tr = img.report.truncation.expect("unbounded below");
        assert!(tr.tail_mass < 1e-6);
        let g = &img.measure;
        assert!((g.total_mass() - 1.0).abs() < 1e-5);
        assert!(g.grid()[g.grid().len() - 1].abs() < 1e-6);
        // Quantiles of γ are logs of quantiles of ν (CDF t², quantile √q).
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let expect = 0.5 * q.ln();
            assert!((g.quantile(q).unwrap() - expect).abs() < 1e-4, "q={q}");
        }
    }

    #[test]
    fn point_mass_and_atom_cases() {
        let img = lyapunov_distribution(&Measure::dirac(4.0), &EvalConfig::default()).unwrap();
        assert_eq!(img.measure.as_point_mass(), Some(0.5 * 4.0f64.ln()));
        let p = Measure::named(Family::Projection { alpha: 0.5 }, 0).unwrap();
        assert!(matches!(
            lyapunov_distribution(&p, &EvalConfig::default()),
            Err(Error::Precondition(_))
        ));
        assert!(lyapunov_distribution(&mp(0.5), &EvalConfig::default()).is_err());
    }
}
