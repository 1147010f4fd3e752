use magnon_core::sphere::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A: f64 = 2.5e-3;
const EPS: f64 = 15.96;

fn low_modes() -> Vec<SphereMode> {
    solve_modes(EPS, A, (5e9, 32e9), 3, &[Family::TE, Family::TM], &ScanOptions::default()).unwrap().modes
}

fn te1() -> SphereMode {
    mode_at(Family::TE, 1, 1, EPS, A, &ScanOptions::default()).unwrap()
}

#[test]
fn roots_satisfy_matching_condition() {
    for m in low_modes() {
        let f = characteristic_value(m.id.family, m.id.ell, m.eps_r, m.ka).unwrap();
        let d = characteristic_derivative(m.id.family, m.id.ell, m.eps_r, m.ka).unwrap();
        assert!((f / d).norm() < 1e-10 * m.ka.norm(), "{}: residual {}", m.id, f);
    }
}

#[test]
fn lowest_te_root_for_eps_16() {
    let m = mode_at(Family::TE, 1, 1, 16.0, 1.0, &ScanOptions::default()).unwrap();
    assert!(m.ka.re > 0.6 && m.ka.re < 0.9, "{}", m.ka);
}

#[test]
fn argument_principle_counts_the_te1_root() {
    let f = |z| characteristic_value(Family::TE, 1, 16.0, z).unwrap();
    let n = winding_number(f, (0.6, 0.9), (-0.2, 0.05));
    assert!((n - 1.0).abs() < 1e-6, "{n}");
}

#[test]
fn vacuum_limit_has_no_confined_roots() {
    let opts = ScanOptions { q_min: 10.0, ..Default::default() };
    let r = solve_modes(1.0 + 1e-9, A, (1e9, 60e9), 3, &[Family::TE, Family::TM], &opts).unwrap();
    assert!(r.modes.is_empty(), "{:?}", r.modes);
}

#[test]
fn radius_scaling() {
    let small = low_modes();
    let big = solve_modes(EPS, 2.0 * A, (2.5e9, 16e9), 3, &[Family::TE, Family::TM], &ScanOptions::default())
        .unwrap()
        .modes;
    assert_eq!(small.len(), big.len());
    for (s, b) in small.iter().zip(&big) {
        assert_eq!(s.id, b.id);
        assert!((s.freq / b.freq - 2.0).abs() < 1e-10);
        assert!((s.q_rad / b.q_rad - 1.0).abs() < 1e-10);
    }
}

#[test]
fn frequency_falls_with_permittivity() {
    let mut last = f64::INFINITY;
    for k in 0..9 {
        let eps = 12.0 + k as f64;
        let f = mode_at(Family::TE, 1, 1, eps, A, &ScanOptions::default()).unwrap().freq;
        assert!(f < last);
        last = f;
    }
}

#[test]
fn finer_scan_moves_frequencies_less_than_a_kilohertz() {
    let coarse = low_modes();
    let opts = ScanOptions { cell_width: 0.0493 / 4.0, ..Default::default() };
    let fine = solve_modes(EPS, A, (5e9, 32e9), 3, &[Family::TE, Family::TM], &opts).unwrap().modes;
    assert_eq!(coarse.len(), fine.len());
    for (c, f) in coarse.iter().zip(&fine) {
        assert_eq!(c.id, f.id);
        assert!((c.freq - f.freq).abs() < 1e3);
    }
}

#[test]
fn modes_sorted_and_labelled() {
    let modes = low_modes();
    assert!(modes.windows(2).all(|w| w[0].freq <= w[1].freq));
    let first = &modes[0];
    assert_eq!((first.id.family, first.id.ell, first.id.q), (Family::TE, 1, 1));
    assert!(modes.iter().any(|m| m.id.family == Family::TE && m.freq > 10e9 && m.freq < 18e9));
}

#[test]
fn degenerate_members_share_frequency_and_q() {
    for m in low_modes().iter().take(4) {
        let members = m.id.members();
        assert_eq!(members.len(), 2 * m.id.ell as usize + 1);
        for id in members {
            let mm = m.member(id.m, id.parity).unwrap();
            assert_eq!(mm.freq, m.freq);
            assert_eq!(mm.q_rad, m.q_rad);
            let s = field_at(&mm, A, Spherical::new(0.6 * A, 1.1, 0.4));
            assert!(s.e.iter().chain(&s.h).all(|c| c.is_finite()));
        }
    }
}

#[test]
fn tangential_fields_continuous_at_surface() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let modes = low_modes();
    for k in 0..100 {
        let base = modes[k % modes.len()];
        let members = base.id.members();
        let id = members[k % members.len()];
        let mode = base.member(id.m, id.parity).unwrap();
        let theta = rng.random_range(0.05..std::f64::consts::PI - 0.05);
        let phi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let inner = field_at(&mode, A, Spherical::new(A, theta, phi));
        let outer = field_at(&mode, A, Spherical::new(A * (1.0 + 1e-15), theta, phi));
        let scale = inner.e.iter().chain(&inner.h).map(|c| c.norm()).fold(0.0, f64::max);
        for i in 1..3 {
            assert!((inner.e[i] - outer.e[i]).norm() < 1e-8 * scale, "{} E{i}", mode.id);
            assert!((inner.h[i] - outer.h[i]).norm() < 1e-8 * scale, "{} H{i}", mode.id);
        }
    }
}

#[test]
fn te_has_no_radial_electric_field() {
    let mode = te1().member(1, Parity::Sin).unwrap();
    for &(r, t, p) in &[(0.3, 0.4, 1.0), (1.0, 2.0, 3.0), (2.5, 1.2, -0.7)] {
        let s = field_at(&mode, A, Spherical::new(r * A, t, p));
        assert_eq!(s.e[0], Complex64::new(0.0, 0.0));
    }
}

#[test]
fn axisymmetric_members_do_not_depend_on_phi() {
    for mode in low_modes().iter().take(3) {
        let a = field_at(mode, A, Spherical::new(0.7 * A, 0.9, 0.0));
        for phi in [0.5, 2.0, 4.0] {
            let b = field_at(mode, A, Spherical::new(0.7 * A, 0.9, phi));
            for i in 0..3 {
                assert!((a.e[i] - b.e[i]).norm() <= 1e-14 * (1.0 + a.e[i].norm()));
                assert!((a.h[i] - b.h[i]).norm() <= 1e-14 * (1.0 + a.h[i].norm()));
            }
        }
    }
}

#[test]
fn azimuthal_dependence_is_exact() {
    let c = te1().member(1, Parity::Cos).unwrap();
    let s = te1().member(1, Parity::Sin).unwrap();
    // cos(phi + pi/2) = -sin(phi)
    let p = Spherical::new(0.5 * A, 0.8, 0.3);
    let q = Spherical::new(0.5 * A, 0.8, 0.3 + std::f64::consts::FRAC_PI_2);
    let (fc, fs) = (field_at(&c, A, q), field_at(&s, A, p));
    assert!((fc.h[0] + fs.h[0]).norm() < 1e-12 * fs.h[0].norm());
}

/// `int E1* . E2 dV` over the sphere.
fn overlap(a: &SphereMode, b: &SphereMode) -> Complex64 {
    let (x, w) = gauss_legendre(40);
    let nphi = 16;
    let mut sum = Complex64::new(0.0, 0.0);
    for (xr, wr) in x.iter().zip(&w) {
        let r = 0.5 * A * (xr + 1.0);
        for (u, wu) in x.iter().zip(&w) {
            for k in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                let p = Spherical::new(r, u.acos(), phi);
                let (ea, eb) = (field_at(a, A, p).e, field_at(b, A, p).e);
                let dot: Complex64 = ea.iter().zip(&eb).map(|(p, q)| p.conj() * q).sum();
                sum += dot * (wr * 0.5 * A * r * r * wu * 2.0 * std::f64::consts::PI / nphi as f64);
            }
        }
    }
    sum
}

#[test]
fn distinct_modes_are_orthogonal() {
    let modes = low_modes();
    let te1 = modes[0];
    let others = [te1.member(1, Parity::Cos).unwrap(), te1.member(1, Parity::Sin).unwrap(), modes[1], modes[2]];
    let n1 = overlap(&te1, &te1).norm();
    for o in &others {
        let n2 = overlap(o, o).norm();
        let c = overlap(&te1, o).norm();
        assert!(c < 1e-6 * (n1 * n2).sqrt(), "{} vs {}: {c}", te1.id, o.id);
    }
}

#[test]
fn filling_factor_trivial_domains() {
    let m = te1();
    assert_eq!(filling_factor(&m, A, A).unwrap(), 1.0);
    let xi = filling_factor(&m, A, 2.0 * A).unwrap();
    assert!(xi > 0.0 && xi < 1.0);
}

#[test]
fn low_order_modes_store_most_magnetic_energy_inside() {
    for m in low_modes().iter().take(3) {
        let xi = filling_factor(m, A, 2.0 * A).unwrap();
        assert!(xi > 0.5, "{}: {xi}", m.id);
    }
}

#[test]
fn extraction_round_trip() {
    let target = te1();
    let fit = extract_permittivity(target.freq, (Family::TE, 1, 1), A, (14.0, 18.0), &PermittivityOptions::default())
        .unwrap();
    assert!((fit.epsilon - EPS).abs() < 1e-4, "{}", fit.epsilon);
    assert!((fit.mode.freq - target.freq).abs() < 1e3);
    assert!(fit.delta_f_curve.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(fit.curve_csv().starts_with("epsilon,delta_f_hz\n"));
}

#[test]
fn radius_tolerance_gives_uncertainty() {
    let target = te1();
    let opts = PermittivityOptions { radius_tolerance_m: 5e-6, ..Default::default() };
    let fit = extract_permittivity(target.freq, (Family::TE, 1, 1), A, (14.0, 18.0), &opts).unwrap();
    // f ~ 1/(n a) gives d eps / eps ~ 2 da / a
    let expect = 2.0 * EPS * 5e-6 / A;
    assert!((fit.uncertainty / expect - 1.0).abs() < 0.2, "{} vs {expect}", fit.uncertainty);
}

#[test]
fn extraction_from_measured_mode_one() {
    // The enclosure and support raise the measured frequency above the
    // free-sphere value, so the free-space model returns a lower permittivity.
    let fit = extract_permittivity(15.732e9, (Family::TE, 1, 1), A, (10.0, 18.0), &PermittivityOptions::default())
        .unwrap();
    assert!(fit.epsilon > 12.5 && fit.epsilon < EPS, "{}", fit.epsilon);
}

#[test]
fn unbracketed_range_is_an_error() {
    let r = extract_permittivity(40e9, (Family::TE, 1, 1), A, (14.0, 18.0), &PermittivityOptions::default());
    assert!(matches!(r, Err(magnon_core::SphereError::Bracket { .. })));
}

#[test]
fn mode_list_csv_round_trip() {
    let modes = low_modes();
    let text = modes_csv(&modes);
    assert!(text.starts_with("family,ell,q,freq_hz,q_rad\n"));
    let back = parse_modes_csv(&text).unwrap();
    assert_eq!(back.len(), modes.len());
    for (m, (fam, l, q, f, qr)) in modes.iter().zip(back) {
        assert_eq!((m.id.family, m.id.ell, m.id.q), (fam, l, q));
        assert_eq!(m.freq, f);
        assert_eq!(m.q_rad, qr);
    }
}

#[test]
fn field_map_has_one_row_per_grid_point() {
    let text = field_map_csv(&te1(), A, FieldComponent::ALL[3], 2.0 * A, 9);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_m,z_m,re,im"));
    assert_eq!(lines.count(), 81);
}
