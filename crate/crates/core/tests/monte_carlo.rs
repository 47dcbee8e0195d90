use freegeo::{
    ks_report, lyapunov_empirical, simulate, Family, Measure, Measure64, Method, SimConfig,
    DEFAULT_FAMILY_POINTS,
};

fn mp(c: f64) -> Measure64 {
    Measure::named(Family::MarchenkoPastur { c }, DEFAULT_FAMILY_POINTS).unwrap()
}

fn triangle() -> Measure64 {
    Measure::new(vec![], vec![0.0, 1.0], vec![0.0, 2.0]).unwrap()
}

#[test]
fn larger_matrices_fit_better() {
    let ks = |dim| {
        let cfg = SimConfig {
            dim,
            n_factors: 100,
            trials: 1,
            seed: 7,
            method: Method::QrLog,
        };
        ks_report(&simulate(&mp(1.0), &cfg).unwrap(), &triangle())
            .unwrap()
            .ks_distance
    };
    let (small, large) = (ks(100), ks(400));
    println!("ks(N=100) = {small}, ks(N=400) = {large}");
    assert!(small > large);
}

#[test]
fn exponents_of_marchenko_pastur_two_stay_in_their_interval() {
    let cfg = SimConfig {
        dim: 200,
        n_factors: 200,
        trials: 2,
        seed: 7,
        method: Method::QrLog,
    };
    let sample = simulate(&mp(2.0), &cfg).unwrap();
    let (logs, dropped) = lyapunov_empirical(&sample);
    assert_eq!(dropped, 0);
    let hi = 0.5 * 2f64.ln();
    let outside = logs.values.iter().filter(|&&l| l <= 0.0 || l > hi).count();
    let frac = outside as f64 / logs.len() as f64;
    println!("fraction outside (0, ln 2 / 2]: {frac}");
    assert!(frac <= 0.02);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let cfg = SimConfig {
        dim: 40,
        n_factors: 6,
        trials: 5,
        seed: 123,
        method: Method::QrLog,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&mp(1.0), &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    let direct = SimConfig {
        method: Method::Direct,
        ..cfg
    };
    let a = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate(&mp(1.0), &direct).unwrap());
    assert_eq!(a, simulate(&mp(1.0), &direct).unwrap());
}
