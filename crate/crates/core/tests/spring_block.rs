use slipstab::closed_forms::{spring_block_critical, SpringBlockParams, SpringBlockVerdict};
use slipstab::friction::{EvolutionLaw, RateState};
use slipstab::simulate::{
    deviation_peaks, estimate_critical_stiffness, simulate_spring_block, BlockState,
    EstimateOptions,
};

fn friction() -> RateState {
    RateState::new(0.01, 0.015, 1e-5, 1e6, 1e-3).unwrap()
}

fn analytic(p: &RateState, m: f64) -> (f64, f64) {
    match spring_block_critical(&SpringBlockParams::new(1.0, m, *p).unwrap()) {
        SpringBlockVerdict::Critical { k_cr, omega } => (k_cr, omega),
        SpringBlockVerdict::AlwaysStable => unreachable!(),
    }
}

/// Mass giving m V_o^2 / (a sigma_o L) = ratio.
fn mass_for(p: &RateState, ratio: f64) -> f64 {
    ratio * p.a * p.sigma_o * p.l / (p.v_o * p.v_o)
}

#[test]
fn quasi_static_estimate_matches_linear_theory() {
    let p = friction();
    let (k_cr, omega) = analytic(&p, 0.0);
    let est = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, 0.0, &EstimateOptions::default_for(&p)).unwrap();
    assert!((est.k_cr / k_cr - 1.0).abs() < 0.02, "{est:?}");
    assert!((est.omega / omega - 1.0).abs() < 0.02, "{est:?}");
    assert!((omega - 0.5f64.sqrt() * p.v_o / p.l).abs() < 1e-9 * omega);
}

#[test]
fn inertial_estimate_matches_linear_theory() {
    let p = friction();
    let m = mass_for(&p, 0.5);
    let (k_cr, omega) = analytic(&p, m);
    assert!((k_cr / (1.5 * p.sigma_o * (p.b - p.a) / p.l) - 1.0).abs() < 1e-12);
    let est = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, m, &EstimateOptions::default_for(&p)).unwrap();
    assert!((est.k_cr / k_cr - 1.0).abs() < 0.02, "{est:?}");
    assert!((est.omega / omega - 1.0).abs() < 0.02, "{est:?}");
}

#[test]
fn evolution_laws_share_the_linear_threshold() {
    let p = friction();
    let opts = EstimateOptions::default_for(&p);
    let ageing = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, 0.0, &opts).unwrap();
    let slip = estimate_critical_stiffness(&p, EvolutionLaw::Slip, 0.0, &opts).unwrap();
    assert!((ageing.k_cr / slip.k_cr - 1.0).abs() < 0.02);
    assert!((ageing.omega / slip.omega - 1.0).abs() < 0.02);
}

#[test]
fn estimate_insensitive_to_perturbation_size() {
    let p = friction();
    let mut opts = EstimateOptions::default_for(&p);
    let small = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, 0.0, &opts).unwrap();
    opts.perturbation = 1e-2;
    let large = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, 0.0, &opts).unwrap();
    assert!((small.k_cr / large.k_cr - 1.0).abs() < 0.005, "{small:?} {large:?}");
}

#[test]
fn neutral_frequency_independent_of_mass() {
    let p = friction();
    let opts = EstimateOptions::default_for(&p);
    let light = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, mass_for(&p, 0.1), &opts).unwrap();
    let heavy = estimate_critical_stiffness(&p, EvolutionLaw::Ageing, mass_for(&p, 1.0), &opts).unwrap();
    assert!((light.omega / heavy.omega - 1.0).abs() < 0.02, "{light:?} {heavy:?}");
}

#[test]
fn tolerance_halving_converges() {
    use slipstab::simulate::{simulate_with, SimOptions};
    let p = friction();
    let (k_cr, _) = analytic(&p, 0.0);
    let init = BlockState { v: 1.05 * p.v_o, ..BlockState::steady(&p) };
    for (law, m) in [(EvolutionLaw::Slip, 0.0), (EvolutionLaw::Ageing, mass_for(&p, 0.5))] {
        let params = SpringBlockParams::new(1.2 * k_cr * (1.0 + m * p.v_o * p.v_o / (p.a * p.sigma_o * p.l)), m, p).unwrap();
        let run = |tol: f64| {
            let mut opts = SimOptions::new(60.0 * p.l / p.v_o, tol);
            opts.output_interval = Some(0.5 * p.l / p.v_o);
            simulate_with(&params, law, &init, &opts).unwrap()
        };
        let tol = 1e-9;
        let a = run(tol);
        let b = run(0.5 * tol);
        assert_eq!(a.times, b.times);
        assert_eq!(a.times.len(), 121);
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert!((sa.v / sb.v - 1.0).abs() < 10.0 * tol, "{law:?} {} {}", sa.v, sb.v);
            assert!((sa.theta / sb.theta - 1.0).abs() < 10.0 * tol);
        }
    }
}

#[test]
fn inertial_block_oscillates_at_neutral_frequency_near_threshold() {
    let p = friction();
    let m = mass_for(&p, 0.5);
    let (k_cr, omega) = analytic(&p, m);
    let params = SpringBlockParams::new(k_cr, m, p).unwrap();
    let init = BlockState { v: 1.001 * p.v_o, ..BlockState::steady(&p) };
    let tr = simulate_spring_block(&params, EvolutionLaw::Ageing, &init, 200.0 * p.l / p.v_o, 1e-10).unwrap();
    let peaks = deviation_peaks(&tr, p.v_o);
    let late: Vec<_> = peaks.iter().filter(|pk| pk.0 > 40.0 * p.l / p.v_o).collect();
    assert!(late.len() > 10);
    // |V - V_o| peaks twice per period
    let half = (late[late.len() - 1].0 - late[0].0) / (late.len() - 1) as f64;
    assert!((std::f64::consts::PI / half / omega - 1.0).abs() < 0.02);
}
