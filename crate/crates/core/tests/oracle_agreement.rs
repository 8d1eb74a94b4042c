//! Free-fermion results against dense many-body evolution of the spin chain.

use approx::assert_abs_diff_eq;
use ising_echo::fermion::{diagonalize_chain, evolve_covariance, uniform_ground_state};
use ising_echo::observables::{
    gaussian_rate_correlator, gaussian_rate_mode_sum, sigma_z_expectation, sigma_zz_connected,
};
use ising_echo::oracle::{
    build_spin_hamiltonian, ground_state_with_energy, oracle_echo, oracle_variance, OracleQuench,
};
use ising_echo::{
    single_defect_echo, Boundary, Channel, FieldConfiguration, QuenchDynamics, QuenchProtocol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_protocol() -> QuenchProtocol {
    QuenchProtocol::new(8, 1.5, 0.5, 0.1, 1).unwrap()
}

#[test]
fn ground_energy_matches_dense_spectrum() {
    for (lambda, boundary) in [
        (1.5, Boundary::PeriodicSpin),
        (0.5, Boundary::PeriodicSpin),
        (1.0, Boundary::PeriodicSpin),
        (0.7, Boundary::Open),
    ] {
        let p = reference_protocol().with_boundary(boundary).unwrap();
        let fields = FieldConfiguration::uniform(8, lambda);
        let ff = diagonalize_chain(&fields, &p).unwrap().ground_energy();
        let (ed, _) = ground_state_with_energy(&build_spin_hamiltonian(&fields, 1.0, boundary).unwrap()).unwrap();
        assert_abs_diff_eq!(ff, ed, epsilon = 1e-10);
    }
}

#[test]
fn ground_state_correlators() {
    let p = reference_protocol();
    let c0 = uniform_ground_state(&p, 1.5).unwrap();
    let (_, g) = ground_state_with_energy(
        &build_spin_hamiltonian(&FieldConfiguration::uniform(8, 1.5), 1.0, Boundary::PeriodicSpin).unwrap(),
    )
    .unwrap();
    assert_abs_diff_eq!(sigma_z_expectation(&c0, 0).unwrap(), g.sigma_z(0), epsilon = 1e-9);
    for j in 1..8 {
        let ed = g.sigma_zz(0, j) - g.sigma_z(0) * g.sigma_z(j);
        assert_abs_diff_eq!(sigma_zz_connected(&c0, 0, j).unwrap(), ed, epsilon = 1e-9);
    }
}

#[test]
fn evolved_magnetization() {
    let p = reference_protocol();
    let ff = QuenchDynamics::new(&p).unwrap();
    let ed = OracleQuench::new(&p).unwrap();
    for (channel, decomp) in [(Channel::UpUp, ff.up()), (Channel::DownDown, ff.down())] {
        let ct = evolve_covariance(ff.initial(), decomp, 1.0);
        let psi = ed.evolve(channel, 1.0);
        for site in [0, 1, 4] {
            assert_abs_diff_eq!(
                sigma_z_expectation(&ct, site).unwrap(),
                psi.sigma_z(site),
                epsilon = 1e-8
            );
        }
    }
}

/// Dense-evolution echo of the reference protocol (N = 8, 1.5 -> 0.5,
/// epsilon = 0.1, d = 1), tabulated with `OracleQuench::echo`.
const REFERENCE_ECHO: [(f64, f64); 4] = [
    (0.5, 9.976_773_492_223_003e-1),
    (1.0, 9.930_484_936_619_218e-1),
    (2.0, 9.865_846_351_906_558e-1),
    (5.0, 9.486_519_507_735_156e-1),
];

#[test]
fn echo_matches_tabulated_oracle() {
    let p = reference_protocol();
    let ff = QuenchDynamics::new(&p).unwrap();
    for (t, want) in REFERENCE_ECHO {
        assert_abs_diff_eq!(oracle_echo(&p, t).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.echo_at(t).unwrap(), want, epsilon = 1e-8);
    }
}

#[test]
fn echo_series_matches_oracle_pointwise() {
    let times: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
    for p in [
        reference_protocol(),
        QuenchProtocol::new(8, 0.4, 1.3, 3.0, 5).unwrap(),
        QuenchProtocol {
            n: 7,
            j: 1.0,
            lambda_i: 0.9,
            lambda_f: 0.6,
            epsilon: 0.8,
            d: 3,
            boundary: Boundary::Open,
        },
        QuenchProtocol::new(6, 1.1, 0.8, 2.0, 2).unwrap().with_coupling(0.7).unwrap(),
    ] {
        p.validate().unwrap();
        let series = ising_echo::echo_timeseries(&p, &times).unwrap();
        let ed = OracleQuench::new(&p).unwrap();
        for (t, l) in series.times.iter().zip(&series.echo) {
            assert_abs_diff_eq!(*l, ed.echo(*t), epsilon = 1e-8);
        }
    }
}

#[test]
fn single_defect_matches_oracle() {
    let times: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
    let p = QuenchProtocol::new(8, 1.2, 0.6, 0.5, 3).unwrap();
    let ff = single_defect_echo(&p, &times).unwrap();
    let ed = OracleQuench::single_defect(&p).unwrap();
    for (t, l) in ff.times.iter().zip(&ff.echo) {
        assert_abs_diff_eq!(*l, ed.echo(*t), epsilon = 1e-8);
    }
}

#[test]
fn gaussian_rate_matches_dense_variance() {
    for n in [4usize, 6, 8] {
        for lambda_i in [0.5, 0.7, 1.0, 1.5] {
            for d in 0..n {
                let p = QuenchProtocol::new(n, lambda_i, 0.5, 0.1, d).unwrap();
                let decomp = diagonalize_chain(&FieldConfiguration::uniform(n, lambda_i), &p).unwrap();
                let c0 = uniform_ground_state(&p, lambda_i).unwrap();
                let corr = gaussian_rate_correlator(&c0, p.epsilon, d).unwrap().alpha;
                let modes = gaussian_rate_mode_sum(&decomp, p.epsilon, d).unwrap().alpha;
                let ed = oracle_variance(&p).unwrap();
                assert_abs_diff_eq!(corr, ed, epsilon = 1e-9);
                assert!((modes - corr).abs() <= 1e-6 * corr.abs(), "n={n} l={lambda_i} d={d}");
            }
        }
    }
}

#[test]
fn randomized_protocols_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [4usize, 6, 8] {
        for _ in 0..20 {
            let p = QuenchProtocol::new(
                n,
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.05..20.0),
                rng.gen_range(0..n),
            )
            .unwrap();
            let ff = QuenchDynamics::new(&p).unwrap();
            let ed = OracleQuench::new(&p).unwrap();
            for _ in 0..4 {
                let t = rng.gen_range(0.0..10.0);
                let diff = (ff.echo_at(t).unwrap() - ed.echo(t)).abs();
                assert!(diff < 1e-7, "{p:?} t={t} diff={diff}");
            }
        }
    }
}
