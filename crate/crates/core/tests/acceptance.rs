//! Acceptance gate: one line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use lgq_core::closed_form::{self, ground_minimum_loci, min_quasiprob_predicted, negativity_closed};
use lgq_core::fock::{self, FockConfig, FockSpace};
use lgq_core::model::{dimensionless_from_si, CouplingForm, PhysicalSetup, Sign};
use lgq_core::scan::{self, Engine, ScanGrid, ScanWindow};
use lgq_core::semiclassical::{self, MeanFieldState};
use lgq_core::{ModelParams, OscillatorInit, SignPair};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const PP: SignPair = SignPair(Sign::Plus, Sign::Plus);
const PM: SignPair = SignPair(Sign::Plus, Sign::Minus);
const MP: SignPair = SignPair(Sign::Minus, Sign::Plus);
const MM: SignPair = SignPair(Sign::Minus, Sign::Minus);

fn closed_scan(params: &ModelParams, init: &OscillatorInit) -> ScanGrid {
    scan::grid_scan(params, init, ScanWindow::default(), Engine::Closed, None).expect("closed scan")
}

/// Lowest cell over all sign pairs, refined.
fn refined_global_min(grid: &ScanGrid) -> Result<(SignPair, scan::RefinedMinimum), String> {
    let (pair, (row, col, _)) = SignPair::ALL
        .iter()
        .filter_map(|&p| scan::global_min_cell(grid, p).map(|m| (p, m)))
        .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
        .ok_or("empty grid")?;
    let seed = scan::local_min_near(grid, pair, grid.tau1_axis[row], grid.tau2_axis[col]).ok_or("no seed")?;
    scan::refine_minimum(grid, pair, seed).map(|r| (pair, r)).map_err(|e| e.to_string())
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut max_fock = 0;
    for i in 0..100 {
        let lambda = rng.random_range(0.0..=0.1);
        let ratio = rng.random_range(0.0..=2.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let a = rng.random_range(0.0..=4.0 * PI);
        let b = rng.random_range(0.0..=4.0 * PI);
        let (t1, t2) = (a.min(b), a.max(b));
        let init = match i % 3 {
            0 => OscillatorInit::Ground,
            1 => OscillatorInit::Thermal { nbar: rng.random_range(0.0..=2.0) },
            _ => OscillatorInit::Squeezed {
                zeta_abs: rng.random_range(0.0..=1.0),
                theta: rng.random_range(0.0..2.0 * PI),
            },
        };
        let params = ModelParams::new(lambda).with_omega_ratio(ratio).with_phi(phi);
        let closed = closed_form::quasiprob(t1, t2, &params, &init).map_err(|e| e.to_string())?;
        let (space, state) = fock::build_adaptive(&params, &init, fock::DEFAULT_TOL_TRUNCATION)
            .map_err(|e| e.to_string())?;
        max_fock = max_fock.max(space.n_fock());
        let oracle = space
            .quasiprob_oracle(&state, t1, t2, &params.measurement_axis())
            .map_err(|e| e.to_string())?;
        for k in 0..4 {
            worst = worst.max((closed.q[k] - oracle.q[k]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("max |dq| = {worst:.2e} over 100 tuples, n_fock <= {max_fock}, {secs:.1} s");
    if worst <= 1e-8 && secs < 120.0 && max_fock <= 80 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_ground_minima() -> Outcome {
    let params = ModelParams::from_eight_lambda_sq(1e-2);
    let grid = closed_scan(&params, &OscillatorInit::Ground);
    let target = -0.5 * params.lambda_sq();
    let mut notes = Vec::new();
    let mut ok = true;
    for locus in ground_minimum_loci() {
        let seed = scan::local_min_near(&grid, locus.pair, locus.tau1, locus.tau2).ok_or("no seed")?;
        let r = scan::refine_minimum(&grid, locus.pair, seed).map_err(|e| e.to_string())?;
        let rel = (r.value - target).abs() / target.abs();
        let dist = (r.tau1 - locus.tau1).abs().max((r.tau2 - locus.tau2).abs());
        ok &= rel <= 0.05 && dist <= 0.05;
        notes.push(format!(
            "{} ({:.2}, {:.2})pi: {:.3}% @ {:.4} rad",
            locus.pair,
            locus.tau1 / PI,
            locus.tau2 / PI,
            100.0 * rel,
            dist
        ));
    }
    let detail = notes.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_negative_regions() -> Outcome {
    let grid = closed_scan(&ModelParams::from_eight_lambda_sq(1e-2), &OscillatorInit::Ground);
    let counts: Vec<usize> = SignPair::ALL.iter().map(|&p| scan::region_mask(&grid, p).negative_cells()).collect();
    let detail = format!("negative cells pp/pm/mp/mm = {counts:?}");
    if counts[PP.index()] == 0 && counts[PM.index()] > 0 && counts[MP.index()] > 0 && counts[MM.index()] > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c4_thermal_scaling() -> Outcome {
    let params = ModelParams::from_eight_lambda_sq(1e-4);
    let mut notes = Vec::new();
    let mut ok = true;
    for nbar in [1.0, 5.0] {
        let init = OscillatorInit::Thermal { nbar };
        let (pair, r) = refined_global_min(&closed_scan(&params, &init))?;
        let target = min_quasiprob_predicted(&init, params.lambda).map_err(|e| e.to_string())?.value;
        let rel = (r.value - target).abs() / target.abs();
        ok &= rel <= 0.05;
        notes.push(format!("nbar={nbar}: {:.5e} vs {:.5e} ({pair}, {:.2}%)", r.value, target, 100.0 * rel));
    }
    let detail = notes.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_squeezed() -> Outcome {
    let params = ModelParams::from_eight_lambda_sq(1e-4);
    let boosted = OscillatorInit::squeezed_real(5.0);
    let grid = closed_scan(&params, &boosted);
    let grid_min = SignPair::ALL
        .iter()
        .filter_map(|&p| scan::global_min_cell(&grid, p))
        .map(|m| m.2)
        .fold(f64::INFINITY, f64::min);
    let target = min_quasiprob_predicted(&boosted, params.lambda).map_err(|e| e.to_string())?.value;
    let factor = target / grid_min;
    let within = grid_min < 0.0 && (1.0 / 3.0..=3.0).contains(&factor);

    let flipped = closed_scan(&params, &OscillatorInit::squeezed_real(-5.0));
    let equal_signs: Vec<usize> =
        [PP, MM].iter().map(|&p| scan::region_mask(&flipped, p).negative_cells()).collect();
    let detail = format!(
        "zeta=5 grid min {grid_min:.4e} vs {target:.4e} (factor {factor:.2}); zeta=-5 negative cells pp/mm = {equal_signs:?}"
    );
    if within && equal_signs.iter().all(|&c| c == 0) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_negativity() -> Outcome {
    let mut worst = 0.0f64;
    let mut max_n = 0.0f64;
    for lambda in [0.01, 0.1, 0.3] {
        let params = ModelParams::new(lambda);
        let space = FockSpace::build(FockConfig::new(40), &params).map_err(|e| e.to_string())?;
        let state = space.build_initial(&OscillatorInit::Ground).map_err(|e| e.to_string())?;
        for i in 0..50 {
            let tau = 2.0 * PI * i as f64 / 49.0;
            let oracle = space.negativity_oracle(&state, tau).map_err(|e| e.to_string())?;
            let closed = negativity_closed(tau, lambda);
            worst = worst.max((oracle - closed).abs());
            max_n = max_n.max(oracle).max(closed);
        }
    }

    // q_{+-}(0, tau) against N^2 at lambda = 1e-2, Omega = phi = 0
    let lambda = 0.01;
    let params = ModelParams::new(lambda);
    let space = FockSpace::build(FockConfig::new(40), &params).map_err(|e| e.to_string())?;
    let state = space.build_initial(&OscillatorInit::Ground).map_err(|e| e.to_string())?;
    let bound = 4.0 * lambda * lambda / (1.0 - 4.0 * lambda * lambda);
    let mut worst_rel = 0.0f64;
    // both vanish at tau = 0 and 2 pi
    for i in 1..49 {
        let tau = 2.0 * PI * i as f64 / 49.0;
        let q = closed_form::quasiprob(0.0, tau, &params, &OscillatorInit::Ground).map_err(|e| e.to_string())?;
        let n = space.negativity_oracle(&state, tau).map_err(|e| e.to_string())?;
        worst_rel = worst_rel.max((q.get(PM) - n * n).abs() / (n * n));
    }
    let detail = format!(
        "max |dN| = {worst:.2e}, max N = {max_n:.4}, |q - N^2|/N^2 <= {worst_rel:.3e} (bound {bound:.3e})"
    );
    if worst <= 1e-8 && max_n <= 0.5 && worst_rel <= bound * (1.0 + 1e-6) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_suppression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = 0;
    let mut counterexamples = 0;
    let mut draws = 0;
    while found < 1000 {
        draws += 1;
        let ratio = rng.random_range(0.0..=2.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let tau2 = rng.random_range(0.0..=4.0 * PI);
        let pair = SignPair::ALL[rng.random_range(0..4)];
        let base = ModelParams::new(0.0).with_omega_ratio(ratio).with_phi(phi);
        let q0 = closed_form::quasiprob(0.0, tau2, &base, &OscillatorInit::Ground).map_err(|e| e.to_string())?.get(pair);
        if q0 >= 0.0 {
            continue;
        }
        found += 1;
        for lambda in [0.01, 0.05, 0.1] {
            let p = ModelParams { lambda, ..base };
            let q = closed_form::quasiprob(0.0, tau2, &p, &OscillatorInit::Ground).map_err(|e| e.to_string())?.get(pair);
            if q < q0 {
                counterexamples += 1;
            }
        }
    }
    let detail = format!("{found} violating draws (of {draws}), {counterexamples} counterexamples");
    if counterexamples == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_si_estimate() -> Outcome {
    let est = dimensionless_from_si(&PhysicalSetup::reference(), CouplingForm::Approximate)
        .map_err(|e| e.to_string())?;
    let rel_l = (est.lambda_sq - 1.7e-28).abs() / 1.7e-28;
    let rel_n = (est.nbar_lambda_sq() - 0.5e-14).abs() / 0.5e-14;
    let detail = format!(
        "lambda^2 = {:.4e} ({:.1}%), nbar lambda^2 = {:.4e} ({:.1}%)",
        est.lambda_sq,
        100.0 * rel_l,
        est.nbar_lambda_sq(),
        100.0 * rel_n
    );
    if rel_l <= 0.05 && rel_n <= 0.10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_mean_field() -> Outcome {
    let params = ModelParams::from_eight_lambda_sq(1e-2);
    let window = ScanWindow::new(0.0, 4.0 * PI, 101);
    let cells = semiclassical::ns_scan(&window.axis(), &params, semiclassical::default_dtau())
        .map_err(|e| e.to_string())?;
    let mut min_q = f64::INFINITY;
    let mut worst = 0.0f64;
    for q in cells.iter().flatten() {
        for pair in SignPair::ALL {
            let v = q[pair.index()];
            let free = 0.25 * (1.0 + pair.s1() + pair.s2() + pair.s1() * pair.s2());
            min_q = min_q.min(v);
            worst = worst.max((v - free).abs());
        }
    }
    let mut drift = 0.0f64;
    let mut state = MeanFieldState::initial();
    for tau in window.axis() {
        state = semiclassical::ns_evolve(&state, tau, semiclassical::default_dtau(), &params)
            .map_err(|e| e.to_string())?;
        drift = drift.max(state.q_mean.abs());
    }
    let detail = format!("min q = {min_q:.3e}, max |q - q_free| = {worst:.2e}, max |<q>| = {drift:.2e}");
    if min_q >= 0.0 && worst <= 1e-10 && drift <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_small_coupling_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (lo, hi) = (0.8 * 16.0, 1.2 * 16.0);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let a = rng.random_range(0.0..=4.0 * PI);
        let b = rng.random_range(0.0..=4.0 * PI);
        let (t1, t2) = (a.min(b), a.max(b));
        let pair = SignPair::ALL[rng.random_range(0..4)];
        let err = |lambda: f64| -> Result<f64, String> {
            let exact = closed_form::quasiprob(t1, t2, &ModelParams::new(lambda), &OscillatorInit::Ground)
                .map_err(|e| e.to_string())?
                .get(pair);
            Ok((exact - closed_form::quasiprob_small_lambda(t1, t2, lambda, pair).value).abs())
        };
        ratios.push(err(0.01)? / err(0.005)?);
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let detail = format!("error ratio on halving lambda in [{min:.3}, {max:.3}] over 20 points");
    if min >= lo && max <= hi {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Fidelities at lambda = 0.1, 0.01, 0.001 for xi = +-5, tau = pi, from the Fock oracle.
const SUPERPOSITION_FIDELITY: [f64; 3] = [9.607894391523195e-1, 9.996000799893384e-1, 9.999960000079984e-1];

fn superposition_fidelities() -> Result<Vec<f64>, String> {
    let (xi0, xi1) = (Complex64::new(5.0, 0.0), Complex64::new(-5.0, 0.0));
    [0.1, 0.01, 0.001]
        .iter()
        .map(|&lambda| {
            let params = ModelParams::new(lambda);
            let init = OscillatorInit::CoherentSuperposition { xi0, xi1 };
            let space = FockSpace::build(FockConfig::for_problem(&params, &init), &params).map_err(|e| e.to_string())?;
            space.appendix_state(xi0, xi1, PI).map(|s| s.fidelity).map_err(|e| e.to_string())
        })
        .collect()
}

fn c11_superposition_fidelity() -> Outcome {
    let f = superposition_fidelities()?;
    let monotone = f[0] < f[1] && f[1] < f[2];
    let pinned = f.iter().zip(SUPERPOSITION_FIDELITY).all(|(a, b)| (a - b).abs() <= 1e-9);
    let detail = format!("F = {:.9} / {:.9} / {:.9}", f[0], f[1], f[2]);
    if monotone && f[2] > 0.999 && pinned {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("ground-state minima", c2_ground_minima),
        ("negative regions", c3_negative_regions),
        ("thermal scaling", c4_thermal_scaling),
        ("squeezed boost", c5_squeezed),
        ("negativity", c6_negativity),
        ("suppression", c7_suppression),
        ("SI estimator", c8_si_estimate),
        ("mean-field model", c9_mean_field),
        ("small-coupling order", c10_small_coupling_order),
        ("coherent-superposition fidelity", c11_superposition_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
