use magnon_core::coupled::{linspace, transmission_map, two_mode_branches, Noise};
use magnon_core::dataset;
use magnon_core::fitting::*;
use magnon_core::{CoupledSystem, FitError, MagnonBranch, PhotonMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn lorentzian(f0: f64, width: f64, height: f64) -> impl Fn(f64) -> f64 {
    move |f| {
        let d = 2.0 * (f - f0) / width;
        height / (1.0 + d * d)
    }
}

fn trace(lo: f64, hi: f64, n: usize, y: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    linspace(lo, hi, n).into_iter().map(|f| (f, y(f))).collect()
}

fn p95(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let rank = (0.95 * v.len() as f64).ceil() as usize;
    v[rank.max(1) - 1]
}

// Mode i from the table, in g/2pi units.
fn mode_i() -> (f64, f64) {
    let row = dataset::mode("i").unwrap();
    (row.omega_hz, 0.5 * row.g_over_pi_hz)
}

const SLOPE: f64 = 24.49e9;

fn branch_points(omega_c: f64, g: f64, b: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for &x in b {
        let (u, l) = two_mode_branches(omega_c, SLOPE * x, g);
        pts.push((x, u));
        pts.push((x, l));
    }
    pts
}

#[test]
fn single_lorentzian_width_is_fwhm() {
    let t = trace(-50.0, 50.0, 2001, lorentzian(3.0, 4.0, 1.0));
    let peaks = find_peaks(&t, 0.1).unwrap();
    assert_eq!(peaks.len(), 1);
    let p = peaks.peaks[0];
    assert!((p.freq - 3.0).abs() < 0.05 + 1e-12);
    assert!((p.width - 4.0).abs() < 0.05, "{}", p.width);
}

#[test]
fn lorentzians_five_widths_apart_are_resolved() {
    let (a, b) = (lorentzian(0.0, 1.0, 1.0), lorentzian(5.0, 1.0, 0.7));
    let t = trace(-10.0, 15.0, 2501, |f| a(f) + b(f));
    let peaks = find_peaks(&t, 0.1).unwrap();
    assert_eq!(peaks.len(), 2);
    assert!((peaks.peaks[0].freq - 0.0).abs() < 0.02);
    assert!((peaks.peaks[1].freq - 5.0).abs() < 0.02);
}

#[test]
fn refined_peak_within_one_bin() {
    let t = trace(0.0, 10.0, 101, lorentzian(4.537, 1.0, 1.0));
    let peaks = find_peaks(&t, 0.1).unwrap();
    let f = refine_peak(&t, peaks.peaks[0].index);
    assert!((f - 4.537).abs() < 0.1);
    assert!((f - 4.537).abs() < (peaks.peaks[0].freq - 4.537).abs() + 1e-12);
}

#[test]
fn fano_tends_to_lorentzian_for_large_q() {
    let q = 1e5;
    let (f0, gamma, height) = (10.0, 2.0, 3.0);
    let fano = FanoParams { f0, gamma, q_fano: q, amplitude: height / (q * q), offset: 0.5 };
    let l = lorentzian(f0, gamma, height);
    for f in linspace(0.0, 20.0, 41) {
        let want = l(f) + 0.5;
        // Leading correction is 2 d / (q gamma) relative to the peak.
        assert!((fano.eval(f) - want).abs() < 1e-4 * height, "{f}");
    }
}

fn fano_trace(p: &FanoParams) -> Vec<(f64, f64)> {
    trace(p.f0 - 20.0 * p.gamma, p.f0 + 20.0 * p.gamma, 801, |f| p.eval(f))
}

#[test]
fn fano_fit_invariant_under_amplitude_rescaling() {
    let truth = FanoParams { f0: 12.3e9, gamma: 3.2e6, q_fano: 2.5, amplitude: 0.4, offset: 0.1 };
    let base = fano_trace(&truth);
    let init = FanoParams { f0: truth.f0 + 0.3e6, gamma: 4e6, q_fano: 3.0, amplitude: 0.3, offset: 0.0 };
    let a = fit_fano(&base, &init).unwrap().params;
    let c = 37.5;
    let scaled: Vec<(f64, f64)> = base.iter().map(|&(f, y)| (f, c * y)).collect();
    let init_c = FanoParams { amplitude: c * init.amplitude, offset: c * init.offset, ..init };
    let b = fit_fano(&scaled, &init_c).unwrap().params;
    assert!(((a.f0 - b.f0) / a.gamma).abs() < 1e-8);
    assert!((a.gamma / b.gamma - 1.0).abs() < 1e-8);
    assert!((a.q_fano / b.q_fano - 1.0).abs() < 1e-8);
    assert!((c * a.amplitude / b.amplitude - 1.0).abs() < 1e-8);
}

#[test]
fn fano_needs_enough_points() {
    let init = FanoParams { f0: 0.0, gamma: 1.0, q_fano: 1.0, amplitude: 1.0, offset: 0.0 };
    let r = fit_fano(&[(0.0, 1.0), (1.0, 2.0), (2.0, 1.0)], &init);
    assert!(matches!(r, Err(FitError::TooFewPoints { .. })), "{r:?}");
}

#[test]
fn crossing_round_trip_with_free_magnon() {
    let (omega_c, g) = mode_i();
    let pts = branch_points(omega_c, g, &linspace(0.3, 1.0, 141));
    let fit = fit_avoided_crossing(&pts, Side::Both, CrossingFixed::default()).unwrap();
    assert!((fit.omega_c / omega_c - 1.0).abs() < 1e-4);
    assert!((fit.g / g - 1.0).abs() < 1e-4, "{}", fit.g);
    assert!((fit.slope / SLOPE - 1.0).abs() < 1e-4);
    assert!(fit.offset.abs() < 1e-4 * omega_c);
}

#[test]
fn uncoupled_lines_fit_zero_coupling() {
    let (omega_c, _) = mode_i();
    let pts = branch_points(omega_c, 0.0, &linspace(0.3, 1.0, 141));
    let fixed = CrossingFixed { slope: Some(SLOPE), offset: Some(0.0) };
    let fit = fit_avoided_crossing(&pts, Side::Both, fixed).unwrap();
    assert!(fit.g.abs() <= 1e3, "{}", fit.g);
    assert!((fit.omega_c / omega_c - 1.0).abs() < 1e-9);
}

fn noisy(pts: &[(f64, f64)], rel: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.iter()
        .map(|&(b, f)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (b, f * (1.0 + rel * z))
        })
        .collect()
}

#[test]
fn crossing_g_robust_to_one_percent_noise() {
    let (omega_c, g) = mode_i();
    let b_cross = omega_c / SLOPE;
    let pts = branch_points(omega_c, g, &linspace(b_cross, 1.0, 200));
    let fixed = CrossingFixed { slope: Some(SLOPE), offset: Some(0.0) };
    let errs: Vec<f64> = (0..100)
        .map(|seed| {
            let fit = fit_avoided_crossing(&noisy(&pts, 0.01, seed), Side::Right, fixed).unwrap();
            (fit.g / g - 1.0).abs()
        })
        .collect();
    let worst = p95(errs);
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn left_and_right_fits_agree_within_uncertainty() {
    let (omega_c, g) = mode_i();
    let pts = noisy(&branch_points(omega_c, g, &linspace(0.3, 1.0, 281)), 0.002, 5);
    let fixed = CrossingFixed { slope: Some(SLOPE), offset: Some(0.0) };
    let r = fit_avoided_crossing(&pts, Side::Right, fixed).unwrap();
    let l = fit_avoided_crossing(&pts, Side::Left, fixed).unwrap();
    let sigma = r.uncertainty[1].hypot(l.uncertainty[1]);
    assert!(sigma > 0.0 && sigma.is_finite());
    assert!((r.g - l.g).abs() < 3.0 * sigma, "{} vs {} +/- {sigma}", r.g, l.g);
}

fn two_mode_system(omega_c: f64, g: f64) -> CoupledSystem {
    let photon = PhotonMode::new("c", omega_c, 10e6).unwrap();
    let magnon = MagnonBranch::new(SLOPE, 0.0, 2e6).unwrap();
    CoupledSystem::with_symmetric_ports(vec![photon], vec![magnon], vec![vec![g]], 0.5).unwrap()
}

#[test]
fn ridges_follow_the_analytic_branches() {
    let (omega_c, g) = (12e9, 0.4e9);
    let sys = two_mode_system(omega_c, g);
    let b = linspace(0.4, 0.6, 81);
    let f = linspace(11e9, 13e9, 801);
    let bin = f[1] - f[0];
    let map = transmission_map(&sys, &b, &f, None).unwrap().to_db_map();
    for refine in [false, true] {
        let opts = RidgeOptions { refine, ..RidgeOptions::default() };
        let ridges: Vec<_> = extract_ridges(&map, &opts).into_iter().filter(|r| r.len() > 40).collect();
        assert_eq!(ridges.len(), 2, "refine {refine}");
        let mut checked = 0;
        for r in &ridges {
            for &(x, y) in &r.points {
                let (u, l) = two_mode_branches(omega_c, SLOPE * x, g);
                let want = if (y - u).abs() < (y - l).abs() { u } else { l };
                if want < f[2] || want > f[f.len() - 3] {
                    continue;
                }
                assert!((y - want).abs() <= bin, "B {x}: {y} vs {want}");
                checked += 1;
            }
        }
        assert!(checked > 80, "{checked}");
    }
}

#[test]
fn uncoupled_photon_gives_flat_ridge_and_no_fit() {
    let sys = two_mode_system(12e9, 0.0);
    let b = linspace(0.4, 0.6, 61);
    let f = linspace(11e9, 13e9, 401);
    let map = transmission_map(&sys, &b, &f, None).unwrap().to_db_map();
    let ridges = extract_ridges(&map, &RidgeOptions::default());
    assert_eq!(ridges.len(), 1);
    assert!(ridges[0].points.iter().all(|&(_, y)| (y - 12e9).abs() <= f[1] - f[0]));
    let magnon = MagnonBranch::new(SLOPE, 0.0, 2e6).unwrap();
    let report = fit_map(&map, sys.photons(), &magnon, &[], &PipelineOptions::default());
    assert!(report.fits.is_empty(), "{:?}", report.fits);
}

#[test]
fn end_to_end_single_mode() {
    let (omega_c, g) = (12e9, 0.4e9);
    let sys = two_mode_system(omega_c, g);
    let b = linspace(0.35, 0.75, 201);
    let f = linspace(10.5e9, 14e9, 1401);
    let map = transmission_map(&sys, &b, &f, Some(Noise { amplitude: 0.01, seed: 3 })).unwrap().to_db_map();
    let magnon = sys.magnons()[0].clone();
    let report = fit_map(&map, sys.photons(), &magnon, &[Some(0.8)], &PipelineOptions::default());
    assert!(report.unmatched.is_empty());
    let fit = &report.fits[0];
    assert!((fit.crossing.g / g - 1.0).abs() < 0.01, "{}", fit.crossing.g);
    assert!((fit.crossing.omega_c / omega_c - 1.0).abs() < 1e-3);
    assert!(fit.report.chi_eff.is_some());
}
