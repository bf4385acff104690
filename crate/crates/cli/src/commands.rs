use std::path::{Path, PathBuf};

use slipstab::closed_forms::{spring_block_critical, SpringBlockParams, SpringBlockVerdict};
use slipstab::dispersion::{count_unstable, unstable_roots, CharParams};
use slipstab::friction::{EvolutionLaw, RateState, DEFAULT_FRICTION_COEFFICIENT};
use slipstab::material::{effective_medium, make_bimaterial, BiMaterial, ShearStiffness};
use slipstab::neutral::{critical_mode, critical_mode_nondim, q_grid, sweep_q, StabilityVerdict};
use slipstab::presets::{FIGURE_B_OVER_A, FIGURE_PRESETS};
use slipstab::simulate::{estimate_critical_stiffness, simulate_with, BlockState, EstimateOptions, SimOptions, Termination};

use crate::config::{InputError, Opts};
use crate::output::{num, Table};
use crate::verify;

#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    Solver(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<slipstab::Error> for Failure {
    fn from(e: slipstab::Error) -> Self {
        match e {
            slipstab::Error::InvalidParameter { name, .. } => Failure::Input(InputError::new(field_of(name), e.to_string())),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn field_of(core_name: &str) -> String {
    match core_name {
        "L" => "l".into(),
        "V_o" => "v_o".into(),
        "K" => "stiffness".into(),
        "m" => "mass".into(),
        other => other.to_string(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(InputError::new("out", format!("cannot write {}: {e}", path.display())))
}

pub type Outcome = Result<(), Failure>;

fn need<T>(field: &str, v: Option<T>) -> Result<T, InputError> {
    v.ok_or_else(|| InputError::new(field, "required"))
}

fn positive(field: &str, v: f64) -> Result<f64, InputError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(InputError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn need_positive(field: &str, v: Option<f64>) -> Result<f64, InputError> {
    positive(field, need(field, v)?)
}

fn raw_given(o: &Opts) -> bool {
    [o.c44, o.c45, o.c55, o.rho].iter().any(Option::is_some) || prime_given(o)
}

fn prime_given(o: &Opts) -> bool {
    [o.c44_prime, o.c45_prime, o.c55_prime, o.rho_prime].iter().any(Option::is_some)
}

fn stiffness(o: &Opts, prime: bool) -> Result<ShearStiffness, InputError> {
    let sfx = if prime { "_prime" } else { "" };
    let (c44, c45, c55, rho) = if prime {
        (o.c44_prime, o.c45_prime, o.c55_prime, o.rho_prime)
    } else {
        (o.c44, o.c45, o.c55, o.rho)
    };
    let c44 = need_positive(&format!("c44{sfx}"), c44)?;
    let c55 = positive(&format!("c55{sfx}"), c55.unwrap_or(c44))?;
    let c45 = c45.unwrap_or(0.0);
    if !c45.is_finite() || c44 * c55 - c45 * c45 <= 0.0 {
        return Err(InputError::new(format!("c45{sfx}"), "stiffness is not positive definite (c45^2 >= c44 c55)"));
    }
    let rho = need_positive(&format!("rho{sfx}"), rho)?;
    Ok(ShearStiffness::new(c44, c45, c55, rho))
}

/// Both solids as given: raw stiffnesses, or ratios on a unit slow solid.
/// The flag tells whether absolute moduli and speeds are known.
fn material(o: &Opts) -> Result<(BiMaterial, bool), Failure> {
    if raw_given(o) {
        for (field, v) in [("mu_ratio", o.mu_ratio), ("speed_ratio", o.speed_ratio)] {
            if v.is_some() {
                return Err(InputError::new(field, "conflicts with raw stiffness inputs").into());
            }
        }
        let first = effective_medium(&stiffness(o, false)?)?;
        let second = if prime_given(o) {
            effective_medium(&stiffness(o, true)?)?
        } else {
            first
        };
        return Ok((make_bimaterial(first, second), true));
    }
    let mu_ratio = positive("mu_ratio", o.mu_ratio.unwrap_or(1.0))?;
    let speed_ratio = positive("speed_ratio", o.speed_ratio.unwrap_or(1.0))?;
    Ok((BiMaterial::from_ratios(mu_ratio, speed_ratio)?, false))
}

enum Scale {
    Nondimensional { q: Option<f64>, b_over_a: f64 },
    Dimensional(RateState),
}

fn friction_given(o: &Opts) -> bool {
    [o.a, o.b, o.l, o.sigma_o, o.v_o, o.f].iter().any(Option::is_some)
}

fn rate_state(o: &Opts) -> Result<RateState, Failure> {
    let a = need_positive("a", o.a)?;
    let b = need("b", o.b)?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(InputError::new("b", format!("must be non-negative and finite, got {b}")).into());
    }
    let l = need_positive("l", o.l)?;
    let sigma_o = need_positive("sigma_o", o.sigma_o)?;
    let v_o = need_positive("v_o", o.v_o)?;
    let f = o.f.unwrap_or(DEFAULT_FRICTION_COEFFICIENT);
    if !(f >= 0.0 && f.is_finite()) {
        return Err(InputError::new("f", format!("must be non-negative, got {f}")).into());
    }
    Ok(RateState::with_friction_coefficient(a, b, l, sigma_o, v_o, f)?)
}

fn scale(o: &Opts) -> Result<Scale, Failure> {
    let nondim = o.q.is_some() || o.b_over_a.is_some();
    if friction_given(o) {
        if nondim {
            let field = if o.q.is_some() { "q" } else { "b_over_a" };
            return Err(InputError::new(field, "conflicts with dimensional friction inputs (a, b, l, sigma_o, v_o, f)").into());
        }
        return Ok(Scale::Dimensional(rate_state(o)?));
    }
    let b_over_a = need("b_over_a", o.b_over_a)
        .map_err(|_| InputError::new("b_over_a", "required (or give a, b, l, sigma_o, v_o)"))?;
    if !(b_over_a >= 0.0 && b_over_a.is_finite()) {
        return Err(InputError::new("b_over_a", format!("must be non-negative and finite, got {b_over_a}")).into());
    }
    let q = o.q.map(|q| positive("q", q)).transpose()?;
    Ok(Scale::Nondimensional { q, b_over_a })
}

fn dimensional_material(o: &Opts) -> Result<BiMaterial, Failure> {
    let (bm, absolute) = material(o)?;
    if !absolute {
        return Err(InputError::new("c44", "dimensional runs need raw stiffnesses (c44, rho, ...)").into());
    }
    Ok(bm)
}

struct Grid {
    min: f64,
    max: f64,
    points: usize,
    log: bool,
}

fn grid(o: &Opts, default_log: bool) -> Result<Grid, InputError> {
    let min = positive("q_min", o.q_min.unwrap_or(1e-2))?;
    let max = positive("q_max", o.q_max.unwrap_or(1e2))?;
    if max <= min {
        return Err(InputError::new("q_max", format!("must exceed q_min ({min}), got {max}")));
    }
    let points = o.q_points.unwrap_or(200);
    if points < 2 {
        return Err(InputError::new("q_points", format!("must be at least 2, got {points}")));
    }
    Ok(Grid {
        min,
        max,
        points,
        log: o.log.unwrap_or(default_log),
    })
}

fn law(o: &Opts) -> Result<EvolutionLaw, InputError> {
    match &o.law {
        None => Ok(EvolutionLaw::Ageing),
        Some(s) => s
            .parse()
            .map_err(|_| InputError::new("law", format!("expected `ageing` or `slip`, got `{s}`"))),
    }
}

fn mass(o: &Opts) -> Result<f64, InputError> {
    let m = o.mass.unwrap_or(0.0);
    if !(m >= 0.0 && m.is_finite()) {
        return Err(InputError::new("mass", format!("must be non-negative, got {m}")));
    }
    Ok(m)
}

pub fn medium(o: &Opts) -> Outcome {
    if !raw_given(o) {
        return Err(InputError::new("c44", "required").into());
    }
    let first = effective_medium(&stiffness(o, false)?)?;
    let second = if prime_given(o) { effective_medium(&stiffness(o, true)?)? } else { first };
    let bm = make_bimaterial(first, second);
    let mut t = Table::new("medium", o, &["solid", "mu", "c1", "role"]);
    t.comment(&format!("mu_ratio (fast/slow): {}", num(bm.mu_ratio)));
    t.comment(&format!("speed_ratio (fast/slow): {}", num(bm.speed_ratio)));
    let role = |is_first: bool| if is_first != bm.swapped { "slow" } else { "fast" };
    for (name, m, is_first) in [("first", first, true), ("second", second, false)] {
        t.row([name.into(), num(m.mu), num(m.c1), role(is_first).into()]);
    }
    print_or_write(&t, o)
}

pub fn kcr(o: &Opts) -> Outcome {
    match o.model.as_deref().unwrap_or("continuum") {
        "continuum" => kcr_continuum(o),
        "spring-block" => kcr_spring_block(o),
        other => Err(InputError::new("model", format!("expected `continuum` or `spring-block`, got `{other}`")).into()),
    }
}

fn print_or_write(t: &Table, o: &Opts) -> Outcome {
    t.write_to(o.out.as_deref()).map_err(|e| io_failure(o.out.as_deref().unwrap_or(Path::new("-")), e))
}

fn always_stable() -> Outcome {
    println!("always-stable");
    Ok(())
}

fn kcr_continuum(o: &Opts) -> Outcome {
    match scale(o)? {
        Scale::Nondimensional { q, b_over_a } => {
            if b_over_a <= 1.0 {
                return always_stable();
            }
            let q = need("q", q)?;
            let (bm, _) = material(o)?;
            let v = critical_mode_nondim(q, b_over_a, &bm)?;
            let mode = match v {
                StabilityVerdict::AlwaysStable => return always_stable(),
                StabilityVerdict::IllDefined(why) => return Err(Failure::Solver(why)),
                StabilityVerdict::CriticalMode(m) => m,
            };
            let mut t = Table::new("kcr", o, &["q", "branch", "c_over_c1", "k_hat"]);
            t.row([num(q), mode.branch.to_string(), num(mode.c_over_c1), num(mode.k_hat)]);
            print_or_write(&t, o)
        }
        Scale::Dimensional(p) => {
            if !p.is_velocity_weakening() {
                return always_stable();
            }
            let bm = dimensional_material(o)?;
            let mode = match critical_mode(&p, &bm)? {
                StabilityVerdict::AlwaysStable => return always_stable(),
                StabilityVerdict::IllDefined(why) => return Err(Failure::Solver(why)),
                StabilityVerdict::CriticalMode(m) => m,
            };
            let q = slipstab::friction::nondim_q(&p, &bm.slow)?;
            let k = mode.k_mag.expect("dimensional mode carries |k|");
            let omega = mode.omega.expect("dimensional mode carries omega");
            let mut t = Table::new("kcr", o, &["q", "branch", "c_over_c1", "k_hat", "k", "c", "omega"]);
            t.comment("k in 1/m, c in m/s, omega in 1/s");
            t.row([
                num(q),
                mode.branch.to_string(),
                num(mode.c_over_c1),
                num(mode.k_hat),
                num(k),
                num(mode.c_over_c1 * bm.slow.c1),
                num(omega),
            ]);
            print_or_write(&t, o)
        }
    }
}

fn kcr_spring_block(o: &Opts) -> Outcome {
    let p = rate_state(o)?;
    let m = mass(o)?;
    if !p.is_velocity_weakening() {
        return always_stable();
    }
    let (k_cr, omega) = match spring_block_critical(&SpringBlockParams::new(1.0, m, p)?) {
        SpringBlockVerdict::AlwaysStable => return always_stable(),
        SpringBlockVerdict::Critical { k_cr, omega } => (k_cr, omega),
    };
    let mut opts = EstimateOptions::default_for(&p);
    if let Some(d) = o.duration {
        opts.sim.duration = positive("duration", d)?;
    }
    if let Some(tol) = o.tol {
        opts.sim.rtol = positive("tol", tol)?;
    }
    let est = estimate_critical_stiffness(&p, law(o)?, m, &opts)?;
    let mut t = Table::new("kcr", o, &["k_cr", "omega", "k_cr_ode", "omega_ode"]);
    t.comment("stiffness in Pa/m, frequency in 1/s");
    t.row([num(k_cr), num(omega), num(est.k_cr), num(est.omega)]);
    print_or_write(&t, o)
}

fn sweep_scale(o: &Opts) -> Result<(BiMaterial, f64), Failure> {
    match scale(o)? {
        Scale::Dimensional(_) => Err(InputError::new("a", "sweeps are nondimensional; give b_over_a instead").into()),
        Scale::Nondimensional { b_over_a, .. } => {
            if b_over_a <= 1.0 {
                return Err(InputError::new("b_over_a", "must exceed 1 for a sweep (b <= a is always stable)").into());
            }
            Ok((material(o)?.0, b_over_a))
        }
    }
}

pub fn sweep(o: &Opts) -> Outcome {
    let (bm, b_over_a) = sweep_scale(o)?;
    let g = grid(o, false)?;
    let qs = q_grid(g.min, g.max, g.points, g.log)?;
    let rows = sweep_q(&qs, b_over_a, &bm)?;
    let mut t = Table::new("sweep", o, &["q", "branch", "c_over_c1", "k_hat"]);
    for r in rows {
        t.row([num(r.q), r.branch.to_string(), num(r.c_over_c1), num(r.k_hat)]);
    }
    print_or_write(&t, o)
}

/// Writes `fig1.csv` ... `fig8.csv` into `dir`; returns the paths in order.
pub fn write_figures(o: &Opts, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let b_over_a = o.b_over_a.unwrap_or(FIGURE_B_OVER_A);
    if !(b_over_a > 1.0 && b_over_a.is_finite()) {
        return Err(InputError::new("b_over_a", format!("must exceed 1, got {b_over_a}")).into());
    }
    let g = grid(o, true)?;
    let qs = q_grid(g.min, g.max, g.points, g.log)?;
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let mut written = Vec::new();
    for preset in FIGURE_PRESETS {
        let rows = sweep_q(&qs, b_over_a, &preset.bimaterial())?;
        let describe = |t: &mut Table| {
            t.comment(&format!(
                "speed_ratio: {}, mu_ratio: {}, b_over_a: {}",
                num(preset.speed_ratio),
                num(preset.mu_ratio),
                num(b_over_a)
            ));
            t.comment(&format!(
                "q grid: min {}, max {}, points {}, log {}",
                num(g.min),
                num(g.max),
                g.points,
                g.log
            ));
        };
        let mut k_table = Table::new("figures", o, &["q", "branch", "k_hat"]);
        let mut c_table = Table::new("figures", o, &["q", "branch", "c_over_c1"]);
        describe(&mut k_table);
        describe(&mut c_table);
        for r in &rows {
            k_table.row([num(r.q), r.branch.to_string(), num(r.k_hat)]);
            c_table.row([num(r.q), r.branch.to_string(), num(r.c_over_c1)]);
        }
        for (n, t) in [(preset.k_figure, &k_table), (preset.c_figure, &c_table)] {
            let path = dir.join(format!("fig{n}.csv"));
            t.write_to(Some(&path)).map_err(|e| io_failure(&path, e))?;
            written.push(path);
        }
    }
    written.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
    Ok(written)
}

pub fn figures(o: &Opts) -> Outcome {
    let dir = need("out", o.out.clone())?;
    for path in write_figures(o, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

pub fn roots(o: &Opts) -> Outcome {
    let (cp, unit) = match scale(o)? {
        Scale::Nondimensional { q, b_over_a } => {
            if b_over_a <= 1.0 {
                return Err(InputError::new("b_over_a", "normalized wavenumbers need b_over_a > 1; use dimensional inputs").into());
            }
            let q = need("q", q)?;
            let k_hat = need_positive("k_hat", o.k_hat)?;
            let (bm, _) = material(o)?;
            (CharParams::nondimensional(k_hat, q, b_over_a, &bm)?, "V_o/L")
        }
        Scale::Dimensional(p) => {
            let k = need_positive("k", o.k)?;
            let bm = dimensional_material(o)?;
            (CharParams::new(k, &p, &bm)?, "1/s")
        }
    };
    let count = count_unstable(&cp)?;
    let located = unstable_roots(&cp);
    let mut t = Table::new("roots", o, &["index", "re", "im"]);
    t.comment(&format!("n_unstable: {}", count.n_unstable));
    t.comment(&format!("winding: {}", num(count.winding)));
    t.comment(&format!("samples: {}", count.samples));
    t.comment(&format!("located roots below, rates in units of {unit}"));
    for (i, z) in located.iter().enumerate() {
        t.row([i.to_string(), num(z.re), num(z.im)]);
    }
    print_or_write(&t, o)
}

pub fn simulate(o: &Opts) -> Outcome {
    let p = rate_state(o)?;
    let k = need_positive("stiffness", o.stiffness)?;
    let params = SpringBlockParams::new(k, mass(o)?, p)?;
    let mut opts = SimOptions::default_for(&p);
    if let Some(d) = o.duration {
        opts.duration = positive("duration", d)?;
    }
    if let Some(tol) = o.tol {
        opts.rtol = positive("tol", tol)?;
    }
    opts.output_interval = o.dt.map(|dt| positive("dt", dt)).transpose()?;
    let steady = BlockState::steady(&p);
    let init = BlockState {
        v: positive("v_init", o.v_init.unwrap_or(steady.v))?,
        theta: positive("theta_init", o.theta_init.unwrap_or(steady.theta))?,
        tau: o.tau_init.unwrap_or(steady.tau),
    };
    let traj = simulate_with(&params, law(o)?, &init, &opts)?;
    let mut t = Table::new("simulate", o, &["t", "V", "theta", "tau"]);
    t.comment("t in s, V in m/s, theta in s, tau in Pa");
    for (time, s) in traj.times.iter().zip(&traj.states) {
        t.row([num(*time), num(s.v), num(s.theta), num(s.tau)]);
    }
    print_or_write(&t, o)?;
    if traj.meta.termination == Termination::BlowUp {
        let last = traj.times.last().copied().unwrap_or(0.0);
        return Err(Failure::Solver(format!("slip velocity exceeded the blow-up bound at t = {last} s")));
    }
    Ok(())
}

pub fn verify_all(_o: &Opts) -> Outcome {
    let outcomes = verify::run_all();
    for oc in &outcomes {
        println!("{oc}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Solver(format!("{failed} verification check(s) failed")));
    }
    Ok(())
}
