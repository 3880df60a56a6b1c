//! Values produced by the engines and frozen after cross-checking.

use std::f64::consts::PI;

use lgq_core::closed_form;
use lgq_core::model::{dimensionless_from_si, CouplingForm, PhysicalSetup, Sign};
use lgq_core::scan::{self, Engine, ScanGrid, ScanWindow};
use lgq_core::{ModelParams, OscillatorInit, SignPair};

const PM: SignPair = SignPair(Sign::Plus, Sign::Minus);
const MP: SignPair = SignPair(Sign::Minus, Sign::Plus);
const MM: SignPair = SignPair(Sign::Minus, Sign::Minus);

fn scan(params: ModelParams, init: OscillatorInit) -> ScanGrid {
    scan::grid_scan(&params, &init, ScanWindow::default(), Engine::Closed, None).unwrap()
}

fn sizes(grid: &ScanGrid, pair: SignPair) -> Vec<usize> {
    scan::region_mask(grid, pair).components.iter().map(|c| c.size).collect()
}

#[test]
fn quasiprob_at_first_locus() {
    let r = closed_form::quasiprob(2.0 * PI / 3.0, 7.0 * PI / 3.0, &ModelParams::from_eight_lambda_sq(1e-2), &OscillatorInit::Ground)
        .unwrap();
    assert!((r.get(PM) - -6.172_095_996_552_773e-4).abs() < 1e-15);
}

#[test]
fn ground_components() {
    let g = scan(ModelParams::from_eight_lambda_sq(1e-2), OscillatorInit::Ground);
    assert!(sizes(&g, SignPair::ALL[0]).is_empty());
    assert_eq!(sizes(&g, PM), vec![4851; 4]);
    assert_eq!(sizes(&g, MP), vec![4851; 4]);
    assert_eq!(sizes(&g, MM), vec![4950; 4]);

    let m = scan::region_mask(&g, PM);
    let mins: Vec<(usize, usize)> = m.components.iter().map(|c| c.min_cell).collect();
    assert_eq!(mins, vec![(66, 233), (134, 167), (134, 367), (334, 367)]);
    assert_eq!(m.components[0].bbox, (2, 99, 201, 298));
}

#[test]
fn refined_ground_minima() {
    let g = scan(ModelParams::from_eight_lambda_sq(1e-2), OscillatorInit::Ground);
    let cases = [(PM, (66, 233), -6.172_714_196_88e-4), (MP, (33, 66), -6.172_714_197_2e-4), (MM, (33, 167), -6.218_737_282_28e-4)];
    for (pair, seed, want) in cases {
        let r = scan::refine_minimum(&g, pair, seed).unwrap();
        assert!((r.value - want).abs() < 1e-14, "{pair}: {:e}", r.value);
    }
    let r = scan::refine_minimum(&g, MM, (33, 167)).unwrap();
    assert!((r.tau1 - PI / 3.0).abs() < 1e-4 && (r.tau2 - 5.0 * PI / 3.0).abs() < 1e-4);
}

#[test]
fn thermal_grid_minima() {
    for (nbar, want) in [(1.0, -1.873_927_330_509_062e-5), (5.0, -6.866_297_125_157_628e-5)] {
        let g = scan(ModelParams::from_eight_lambda_sq(1e-4), OscillatorInit::Thermal { nbar });
        let (r, c, v) = scan::global_min_cell(&g, MM).unwrap();
        assert_eq!((r, c), (33, 167));
        assert!((v - want).abs() < 1e-18);
    }
}

#[test]
fn squeezed_components() {
    let boosted = scan(ModelParams::from_eight_lambda_sq(1e-4), OscillatorInit::squeezed_real(5.0));
    assert!(sizes(&boosted, SignPair::ALL[0]).is_empty());
    assert_eq!(sizes(&boosted, MM), vec![9817; 4]);
    let (_, _, v) = scan::global_min_cell(&boosted, MM).unwrap();
    assert!((v - -4.762_022_929_909_39e-2).abs() < 1e-14);

    let flipped = scan(ModelParams::from_eight_lambda_sq(1e-4), OscillatorInit::squeezed_real(-5.0));
    assert!(sizes(&flipped, SignPair::ALL[0]).is_empty());
    assert!(sizes(&flipped, MM).is_empty());
    assert_eq!(sizes(&flipped, PM), vec![9801; 4]);
    assert_eq!(sizes(&flipped, MP), vec![9801; 4]);
}

#[test]
fn negative_area_grows_then_saturates() {
    let counts: Vec<usize> = [0.0, 0.01, 0.035]
        .iter()
        .map(|&l| scan::region_mask(&scan(ModelParams::new(l), OscillatorInit::Ground), PM).negative_cells())
        .collect();
    assert_eq!(counts, vec![0, 19404, 19404]);
}

#[test]
fn reference_coupling_estimates() {
    let s = PhysicalSetup::reference();
    let approx = dimensionless_from_si(&s, CouplingForm::Approximate).unwrap();
    let exact = dimensionless_from_si(&s, CouplingForm::Exact).unwrap();
    assert!((approx.lambda_sq / 1.648_432_008_025e-28 - 1.0).abs() < 1e-10);
    assert!((exact.lambda_sq / 1.767_663_577_209e-28 - 1.0).abs() < 1e-10);
    assert!((approx.nbar / 3.125_492_870_414_2e13 - 1.0).abs() < 1e-10);
}

#[test]
fn scans_are_repeatable() {
    let p = ModelParams::from_eight_lambda_sq(1e-2).with_omega_ratio(0.3);
    let w = ScanWindow::new(0.0, 4.0 * PI, 101);
    let a = scan::grid_scan(&p, &OscillatorInit::Ground, w, Engine::Closed, Some(1)).unwrap();
    let b = scan::grid_scan(&p, &OscillatorInit::Ground, w, Engine::Closed, Some(4)).unwrap();
    let c = scan::grid_scan(&p, &OscillatorInit::Ground, w, Engine::Closed, None).unwrap();
    let bits = |g: &ScanGrid| -> Vec<u64> {
        g.cells.iter().flatten().flat_map(|v| v.iter().map(|x| x.to_bits())).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(bits(&a), bits(&c));
}

#[test]
fn uncoupled_scan_is_trivial() {
    let g = scan(ModelParams::new(0.0), OscillatorInit::Ground);
    for v in g.cells.iter().flatten() {
        for pair in SignPair::ALL {
            let (s1, s2) = (pair.s1(), pair.s2());
            assert!((v[pair.index()] - 0.25 * (1.0 + s1 + s2 + s1 * s2)).abs() < 1e-15);
        }
    }
    for pair in SignPair::ALL {
        assert!(sizes(&g, pair).is_empty());
    }
}

#[test]
fn close_branches_keep_high_fidelity() {
    use lgq_core::fock::{FockConfig, FockSpace};
    use num_complex::Complex64;
    let p = ModelParams::new(1e-3);
    for n in [60, 120] {
        let space = FockSpace::build(FockConfig::new(n), &p).unwrap();
        let s = space.appendix_state(Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0), PI).unwrap();
        assert!(s.fidelity >= 0.999);
        assert!((s.fidelity - 0.999_996_021_470_434_6).abs() < 1e-12);
    }
}
