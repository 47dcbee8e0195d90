use freegeo::{
    f_table, gmap, gmap_boxplus_power, gmap_boxtimes_power, lyapunov_distribution, EvalConfig,
    EvalConfig32, EvalConfig64, Family, Family64, Measure, Measure32, Measure64, Transform,
    DEFAULT_FAMILY_POINTS,
};
use proptest::prelude::*;

fn named(f: Family64) -> Measure64 {
    Measure::named(f, DEFAULT_FAMILY_POINTS).unwrap()
}

fn families() -> Vec<(String, Measure64)> {
    let mut out = Vec::new();
    for c in [0.5, 1.0, 2.0] {
        out.push((format!("mp({c})"), named(Family::MarchenkoPastur { c })));
    }
    for alpha in [0.3, 0.7] {
        out.push((
            format!("projection({alpha})"),
            named(Family::Projection { alpha }),
        ));
    }
    out.push((
        "point_mass(2)".into(),
        named(Family::PointMass { lambda: 2.0 }),
    ));
    out.push((
        "quarter_circle_squared".into(),
        named(Family::QuarterCircleSquared),
    ));
    out
}

fn cfg() -> EvalConfig64 {
    EvalConfig::default()
}

#[test]
fn psi_chi_round_trip_on_every_family() {
    for (name, mu) in families() {
        let tr = Transform::new(&mu, &cfg()).unwrap();
        let lo = tr.beta() - 1.0;
        for k in 1..=50 {
            let z = lo * k as f64 / 51.0;
            let x = tr.chi(z).unwrap();
            let err = (tr.psi(x).unwrap() - z).abs();
            assert!(err <= 1e-10, "{name} z={z} err={err}");
        }
    }
}

#[test]
fn quantile_tables_increase_strictly() {
    for (name, mu) in families() {
        if mu.as_point_mass().is_some() {
            continue;
        }
        let t = f_table(&mu, &cfg()).unwrap();
        assert!(t.first_non_increasing().is_none(), "{name}");
        assert!(t.values.windows(2).all(|w| w[1] > w[0]), "{name}");
    }
}

#[test]
fn every_produced_measure_has_unit_mass_and_keeps_its_atom() {
    let c = cfg();
    for (name, mu) in families() {
        assert!((mu.total_mass() - 1.0).abs() <= 1e-6, "{name}");
        let nu = gmap(&mu, &c).unwrap().measure;
        assert!((nu.total_mass() - 1.0).abs() <= 1e-6, "G {name}");
        assert_eq!(nu.atom_at_zero(), mu.atom_at_zero(), "G {name}");
        for n in [2, 3] {
            let p = gmap_boxplus_power(&mu, n, &c).unwrap().measure;
            assert!((p.total_mass() - 1.0).abs() <= 1e-6, "boxplus {n} {name}");
            let t = gmap_boxtimes_power(&mu, n, &c).unwrap().measure;
            assert!((t.total_mass() - 1.0).abs() <= 1e-6, "boxtimes {n} {name}");
            assert_eq!(t.atom_at_zero(), mu.atom_at_zero(), "boxtimes {n} {name}");
        }
        if mu.atom_at_zero() == 0.0 {
            let g = lyapunov_distribution(&mu, &c).unwrap().measure;
            assert!((g.total_mass() - 1.0).abs() <= 1e-5, "gamma {name}");
        }
    }
}

#[test]
fn image_cdf_inverts_the_quantile_table() {
    for (name, mu) in families() {
        if mu.as_point_mass().is_some() {
            continue;
        }
        let table = f_table(&mu, &cfg()).unwrap();
        let nu = gmap(&mu, &cfg()).unwrap().measure;
        let p = &table.probabilities;
        for i in 1..p.len() - 1 {
            let cell = (p[i + 1] - p[i - 1]).max(1e-12);
            let err = (nu.cdf(table.values[i]) - p[i]).abs();
            assert!(err <= cell, "{name} t={} err={err}", p[i]);
        }
    }
}

#[test]
fn quantile_of_triangle_law() {
    let nu = gmap(&named(Family::MarchenkoPastur { c: 1.0 }), &cfg())
        .unwrap()
        .measure;
    assert!((nu.quantile(0.25).unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn single_precision_pipeline() {
    let mu = Measure32::named(Family::MarchenkoPastur { c: 2.0 }, 1025).unwrap();
    let cfg = EvalConfig32 {
        grid_size: 512,
        ..EvalConfig::default()
    };
    let nu = gmap(&mu, &cfg).unwrap().measure;
    assert!((nu.total_mass() - 1.0).abs() < 1e-4);
    for i in 1..20 {
        let x = 1.0 + (2f32.sqrt() - 1.0) * i as f32 / 20.0;
        assert!((nu.cdf(x) - (x * x - 1.0)).abs() < 2e-3, "x={x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cdf_and_quantile_agree(q in 1e-6f64..1.0 - 1e-6) {
        let mu = named(Family::MarchenkoPastur { c: 0.5 });
        // q inside the atom maps to 0; otherwise cdf(quantile(q)) ≈ q.
        let x = mu.quantile(q).unwrap();
        if q <= 0.5 {
            prop_assert_eq!(x, 0.0);
        } else {
            prop_assert!((mu.cdf(x) - q).abs() < 1e-9);
        }
    }

    #[test]
    fn zeroth_moment_is_one(c in 0.05f64..5.0) {
        let mu = Measure::named(Family::MarchenkoPastur { c }, 513).unwrap();
        prop_assert!((mu.moment(0.0).unwrap() - 1.0).abs() <= 1e-6);
        prop_assert!((mu.moment(1.0).unwrap() - c).abs() <= 1e-4 * c.max(1.0));
    }

    #[test]
    fn projection_images_keep_the_atom(alpha in 0.05f64..0.95) {
        let mu = Measure::named(Family::Projection { alpha }, 0).unwrap();
        let nu = gmap(&mu, &cfg()).unwrap().measure;
        prop_assert_eq!(nu.atom_at_zero(), mu.atom_at_zero());
        prop_assert!((nu.total_mass() - 1.0).abs() <= 1e-6);
        let top = nu.grid()[nu.grid().len() - 1];
        prop_assert!((top - alpha.sqrt()).abs() < 1e-9);
    }
}
