//! One test per acceptance criterion. Each prints a `criterion N: PASS|FAIL`
//! line (written straight to stderr so it survives output capture) and then
//! asserts the same condition.

use std::io::Write;
use std::time::{Duration, Instant};

use cvqkd::attack::{
    build_state, feasible_eta_interval, min_epr_variance, nla_equivalent, nla_transmittance, solve_t, v_phi_for,
    AttackConfig, EprSource, NoiseModel,
};
use cvqkd::channel::{target_from_system, FiberLosses, FiberSpec, LinkGeometry};
use cvqkd::gaussian::{CovarianceMatrix, SymplecticTransform};
use cvqkd::keyrate::{merged_cloner_rate, secret_key_rate, Protocol};
use cvqkd::scenario::{AttackModel, ScenarioParams, SourceSpec};
use cvqkd::sweep::{cutoff_distance, feasible_gain_region, find_threshold_gain, run_sweep, Cutoff, ScenarioId, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, checks: &[(String, bool)]) -> bool {
    let pass = checks.iter().all(|(_, ok)| *ok);
    let mut err = std::io::stderr().lock();
    for (what, ok) in checks {
        let _ = writeln!(err, "  [{}] {what}", if *ok { "ok" } else { "FAILED" });
    }
    let _ = writeln!(err, "criterion {criterion}: {}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn check(what: impl Into<String>, ok: bool) -> (String, bool) {
    (what.into(), ok)
}

fn fig1b_base() -> ScenarioParams {
    ScenarioParams::default()
}

#[test]
fn criterion_1_attack_ordering() {
    let start = Instant::now();
    let base = fig1b_base();
    let rate = |p: ScenarioParams| p.evaluate().unwrap().rate_raw;
    let individual = rate(ScenarioParams { model: AttackModel::Individual, ..base.clone() });
    let collective = rate(ScenarioParams { model: AttackModel::Collective, ..base.clone() });
    let limit = rate(ScenarioParams { source: SourceSpec::Unbounded, ..base.clone() });
    let v_min = base.min_source_variance().unwrap();
    let n = 21;
    let vs: Vec<f64> = (0..n).map(|i| v_min * (1e3 / v_min).powf(i as f64 / (n - 1) as f64)).collect();
    let tel: Vec<f64> = vs.iter().map(|&v| rate(ScenarioParams { source: SourceSpec::Fixed(v), ..base.clone() })).collect();
    let ordered = tel.iter().all(|&r| individual + 1e-9 >= r && r + 1e-9 >= collective);
    let monotone = tel.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let elapsed = start.elapsed();
    let ok = report(
        1,
        &[
            check(format!("R_ind {individual:.6} >= R_tel(V) >= R_coll {collective:.6} on {n} points"), ordered),
            check("R_tel non-increasing in V_rho", monotone),
            check(format!("|R_tel(inf) - R_coll| = {:.2e} < 1e-3", (limit - collective).abs()), (limit - collective).abs() < 1e-3),
            check(format!("|R_tel(V_min) - R_ind| = {:.2e} < 1e-3", (tel[0] - individual).abs()), (tel[0] - individual).abs() < 1e-3),
            check(format!("runtime {elapsed:.1?} < 1 min"), elapsed < Duration::from_secs(60)),
        ],
    );
    assert!(ok);
}

#[test]
fn criterion_2_worst_case_placement() {
    let start = Instant::now();
    let mut checks = Vec::new();
    for l_total in [50.0, 100.0] {
        let base = ScenarioParams { l_total, ..Default::default() };
        let spec = SweepSpec::preset(ScenarioId::Stations, base, Some(21)).unwrap();
        let result = run_sweep(&spec);
        let step = l_total / 20.0;
        let at = |i: usize, j: usize| result.points[i * 21 + j].report().map(|r| r.rate_raw);
        let feasible: Vec<(usize, usize, f64)> =
            (0..21).flat_map(|i| (i..21).map(move |j| (i, j))).map(|(i, j)| (i, j, at(i, j).unwrap())).collect();
        let (mi, mj, _) = feasible.iter().cloned().fold((0, 0, f64::INFINITY), |m, p| if p.2 < m.2 { p } else { m });
        checks.push(check(
            format!("L_total={l_total}: minimum at (L1,L2)=({}, {})", mi as f64 * step, mj as f64 * step),
            (mi, mj) == (0, 0),
        ));
        let along_l2 = (0..21).all(|i| (i + 1..21).all(|j| at(i, j - 1).unwrap() <= at(i, j).unwrap() + 1e-9));
        checks.push(check(format!("L_total={l_total}: non-increasing as L2 -> L1 at every L1"), along_l2));
        let along_l1 = (1..21).all(|i| at(i - 1, i - 1).unwrap() <= at(i, i).unwrap() + 1e-9);
        checks.push(check(format!("L_total={l_total}: non-increasing as L1 -> 0 at L2 = L1"), along_l1));
    }
    let elapsed = start.elapsed();
    checks.push(check(format!("runtime {elapsed:.1?} < 5 min"), elapsed < Duration::from_secs(300)));
    assert!(report(2, &checks));
}

#[test]
fn criterion_3_fiber_limited_gain() {
    let collective = ScenarioParams { model: AttackModel::Collective, ..Default::default() }.evaluate().unwrap().rate_raw;
    let limited = |fiber: FiberSpec| {
        ScenarioParams { eve_fiber: Some(fiber), ..Default::default() }.evaluate().unwrap().rate_raw / collective
    };
    let hollow = limited(FiberSpec::hollowcore());
    let g652 = limited(FiberSpec::g652());
    let ok = report(
        3,
        &[
            check(format!("hollow-core ratio {hollow:.4} in [1.15, 1.45]"), (1.15..=1.45).contains(&hollow)),
            check(format!("G.652 ratio {g652:.4} in [2.1, 2.7]"), (2.1..=2.7).contains(&g652)),
        ],
    );
    assert!(ok);
}

#[test]
fn criterion_4_cutoff_distances() {
    let base = ScenarioParams { epsilon: 0.1, ..Default::default() };
    let cutoff = |p: ScenarioParams| match cutoff_distance(&p, 1e-2).unwrap() {
        Cutoff::Found(l) => l,
        Cutoff::Beyond(l) => l,
    };
    let coll = cutoff(ScenarioParams { model: AttackModel::Collective, ..base.clone() });
    let g652 = cutoff(ScenarioParams { eve_fiber: Some(FiberSpec::g652()), ..base.clone() });
    let hollow = cutoff(ScenarioParams { eve_fiber: Some(FiberSpec::hollowcore()), ..base.clone() });
    let ok = report(
        4,
        &[
            check(format!("collective cutoff {coll:.2} km in 30 +- 5"), (coll - 30.0).abs() <= 5.0),
            check(format!("G.652-limited cutoff {g652:.2} km in 50 +- 10"), (g652 - 50.0).abs() <= 10.0),
            check(format!("hollow-core-limited cutoff {hollow:.2} km in 170 +- 20"), (hollow - 170.0).abs() <= 20.0),
        ],
    );
    assert!(ok);
}

#[test]
fn criterion_5_threshold_existence() {
    let mut checks = Vec::new();
    let l2s: Vec<f64> = (0..=10).map(|i| 5.0 * i as f64).collect();
    for fiber in FiberSpec::catalog() {
        let base = ScenarioParams { eve_fiber: Some(fiber.clone()), ..Default::default() };
        let name = fiber.name().to_string();
        match (find_threshold_gain(&base, 1.0, 20.0, 1e-3), find_threshold_gain(&base, 1.0, 20.0, 5e-4)) {
            (Ok(a), Ok(b)) => {
                checks.push(check(format!("{name}: G_th = {:.4} finite", a.gain), a.gain.is_finite()));
                checks.push(check(
                    format!("{name}: tolerance halving moves G_th by {:.1e} <= 1e-3", (a.gain - b.gain).abs()),
                    (a.gain - b.gain).abs() <= 1e-3,
                ));
            }
            (a, b) => {
                checks.push(check(format!("{name}: threshold search failed: {:?} / {:?}", a.err(), b.err()), false));
                continue;
            }
        }
        for (gain, want) in [(1.0, 0.0), (20.0, 50.0)] {
            let rates: Vec<f64> = l2s
                .iter()
                .map(|&l2| ScenarioParams { l2, nla_gain: gain, ..base.clone() }.evaluate().unwrap().rate_raw)
                .collect();
            let argmin = l2s[rates.iter().enumerate().fold(0, |m, (i, r)| if *r < rates[m] { i } else { m })];
            checks.push(check(format!("{name}: at G={gain} worst L2 = {argmin} (want {want})"), argmin == want));
        }
    }
    assert!(report(5, &checks));
}

#[test]
fn criterion_6_fixed_variance_boundaries() {
    let base = ScenarioParams { eve_fiber: Some(FiberSpec::hollowcore()), ..Default::default() };
    let individual = ScenarioParams { model: AttackModel::Individual, ..base.clone() }.evaluate().unwrap().rate_raw;
    let collective = ScenarioParams { model: AttackModel::Collective, ..base.clone() }.evaluate().unwrap().rate_raw;
    let l2s: Vec<f64> = (0..=10).map(|i| 5.0 * i as f64).collect();
    let strips = feasible_gain_region(&base, 1.1, &l2s).unwrap();
    let mut worst_left = 0.0f64;
    let mut all_left = true;
    for s in &strips {
        match &s.left {
            Some(Ok(r)) => worst_left = worst_left.max((r.rate_raw - individual).abs()),
            _ => all_left = false,
        }
    }
    let right = strips.last().unwrap().right.as_ref().map(|r| r.rate_raw).unwrap_or(f64::NAN);
    let ok = report(
        6,
        &[
            check(format!("left boundary exists for all {} L2 values", strips.len()), all_left),
            check(format!("max |R_left - R_ind| = {worst_left:.2e} < 1e-3"), all_left && worst_left < 1e-3),
            check(
                format!("|R_right(L2=L_total) - R_coll| = {:.2e} < 1e-2", (right - collective).abs()),
                (right - collective).abs() < 1e-2,
            ),
        ],
    );
    assert!(ok);
}

fn max_entry_diff(a: &CovarianceMatrix, want: &[[f64; 4]; 4]) -> f64 {
    let m = a.matrix();
    (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (m[(i, j)] - want[i][j]).abs()).fold(0.0, f64::max)
}

fn two_mode(v: f64, c: f64, b: f64) -> [[f64; 4]; 4] {
    [[v, 0.0, c, 0.0], [0.0, v, 0.0, -c], [c, 0.0, b, 0.0], [0.0, -c, 0.0, b]]
}

#[test]
fn criterion_7_model_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v_a = 4.0;
    let v = v_a + 1.0;

    // (a) ideal model, all trusted transmittances 1
    let mut worst_a = 0.0f64;
    for _ in 0..200 {
        let (g, t, eta) = (rng.random_range(1.0..100.0), rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let (v_rho, v_phi): (f64, f64) = (rng.random_range(1.0..50.0), rng.random_range(1.0..50.0));
        let cfg = AttackConfig { g, t, eta, v_rho, v_phi, losses: FiberLosses::LOSSLESS, nla_gain: 1.0 };
        let ab = build_state(&cfg, v_a).unwrap().reduced_ab().unwrap();
        let b = t * g * v + t * (g - 1.0) * v_rho + (1.0 - t) * (eta * v_rho + (1.0 - eta) * v_phi)
            - 2.0 * (t * (1.0 - t) * (g - 1.0) * eta * (v_rho * v_rho - 1.0)).sqrt();
        worst_a = worst_a.max(max_entry_diff(&ab, &two_mode(v, (t * g * (v * v - 1.0)).sqrt(), b)));
    }

    // (b) solved configurations reproduce the target channel
    let mut worst_b = 0.0f64;
    let mut solved = 0;
    while solved < 100 {
        let l_total = rng.random_range(5.0..100.0);
        let target = target_from_system(0.275, l_total, rng.random_range(0.0..0.1)).unwrap();
        let l1 = rng.random_range(0.0..l_total);
        let l2 = rng.random_range(l1..=l_total);
        let fiber = FiberSpec::catalog()[rng.random_range(0..4)].clone();
        let losses = LinkGeometry::new(l1, l2, l_total, fiber).unwrap().losses();
        let g = 10f64.powf(rng.random_range(1.0..4.0));
        let Ok(t) = solve_t(&target, g, &losses) else { continue };
        let Ok(v_min) = min_epr_variance(&target, g, t, &losses) else { continue };
        let v_rho = v_min.variance() * rng.random_range(1.0..20.0);
        let model = NoiseModel { g, t, v_rho, losses };
        let (lo, hi) = feasible_eta_interval(&target, &model).unwrap();
        let eta = lo + (hi.min(1.0 - 1e-6) - lo).max(0.0) * rng.random_range(0.0..1.0);
        let v_phi = v_phi_for(&target, &model, eta).unwrap();
        let cfg = AttackConfig { g, t, eta, v_rho, v_phi, losses, nla_gain: 1.0 };
        let ab = build_state(&cfg, v_a).unwrap().reduced_ab().unwrap();
        let tt = target.transmittance();
        let want = two_mode(v, (tt * (v * v - 1.0)).sqrt(), tt * v + 1.0 - tt + tt * target.excess_noise());
        worst_b = worst_b.max(max_entry_diff(&ab, &want));
        solved += 1;
    }

    // (c) one merged station: unit squeezer gain, no distributed entanglement reaching Bob
    let p = Protocol::default();
    let mut worst_c = 0.0f64;
    for (l, l_total, fiber) in [(0.0, 50.0, FiberSpec::hollowcore()), (10.0, 50.0, FiberSpec::g652()), (30.0, 60.0, FiberSpec::lowloss())] {
        let target = target_from_system(0.275, l_total, 0.04).unwrap();
        let losses = LinkGeometry::new(l, l, l_total, fiber).unwrap().losses();
        let t = solve_t(&target, 1.0, &losses).unwrap();
        let model = NoiseModel { g: 1.0, t, v_rho: 3.0, losses };
        let v_phi = v_phi_for(&target, &model, 0.0).unwrap();
        let cfg = AttackConfig { g: 1.0, t, eta: 0.0, v_rho: 3.0, v_phi, losses, nla_gain: 1.0 };
        let tel = secret_key_rate(&build_state(&cfg, v_a).unwrap(), &p).unwrap().rate_raw;
        let cloner = merged_cloner_rate(&target, &p, &losses).unwrap().rate_raw;
        worst_c = worst_c.max((tel - cloner).abs());
    }

    let ok = report(
        7,
        &[
            check(format!("(a) ideal-model covariance, max entry error {worst_a:.1e} < 1e-9"), worst_a < 1e-9),
            check(format!("(b) 100 solved configs, max entry error {worst_b:.1e} < 1e-6"), worst_b < 1e-6),
            check(format!("(c) merged station vs cloner, max rate difference {worst_c:.1e} < 1e-6"), worst_c < 1e-6),
        ],
    );
    assert!(ok);
}

fn random_circuit(rng: &mut ChaCha8Rng, modes: usize) -> SymplecticTransform {
    let mut total = SymplecticTransform::identity(modes);
    for _ in 0..rng.random_range(1..8) {
        let a = rng.random_range(0..modes);
        let b = (a + rng.random_range(1..modes)) % modes;
        let local = match rng.random_range(0..3) {
            0 => (SymplecticTransform::beamsplitter(rng.random_range(0.0..=1.0)).unwrap(), vec![a, b]),
            1 => (SymplecticTransform::two_mode_squeezer(rng.random_range(1.0..8.0)).unwrap(), vec![a, b]),
            _ => (SymplecticTransform::phase_flip(), vec![a]),
        };
        total = total.then(&local.0.embed(&local.1, modes).unwrap()).unwrap();
    }
    total
}

#[test]
fn criterion_8_numerical_core() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut residual, mut entropy, mut spectrum) = (0.0f64, 0.0f64, 0.0f64);
    let (mut pure_cases, mut spectrum_cases) = (0, 0);
    for _ in 0..500 {
        let n = rng.random_range(2..=5);
        let s = random_circuit(&mut rng, n);
        residual = residual.max(s.symplectic_residual());

        // pure input: EPR pair plus vacua; conditioning keeps entries below 100
        let mut pure = CovarianceMatrix::epr_state(rng.random_range(1.0..50.0), ["m0", "m1"]).unwrap();
        for i in 2..n {
            pure = pure.tensor(&CovarianceMatrix::vacuum(format!("m{i}"))).unwrap();
        }
        let out = s.apply(&pure).unwrap();
        if out.matrix().amax() < 100.0 {
            entropy = entropy.max(out.von_neumann_entropy().unwrap());
            pure_cases += 1;
        }

        let mut vars: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..20.0)).collect();
        let mut mixed = CovarianceMatrix::thermal(vars[0], "m0").unwrap();
        for (i, &v) in vars.iter().enumerate().skip(1) {
            mixed = mixed.tensor(&CovarianceMatrix::thermal(v, format!("m{i}")).unwrap()).unwrap();
        }
        let out = s.apply(&mixed).unwrap();
        if out.matrix().amax() < 1e3 {
            vars.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in out.symplectic_eigenvalues().unwrap().values().iter().zip(&vars) {
                spectrum = spectrum.max((a - b).abs() / b);
            }
            spectrum_cases += 1;
        }
    }

    let mut nla_exact = true;
    for _ in 0..500 {
        let src = EprSource::from_squeezing(rng.random_range(0.0..0.999)).unwrap();
        let t4 = rng.random_range(1e-6..=1.0);
        let (eq, t4g) = nla_equivalent(&src, t4, 1.0).unwrap();
        nla_exact &= eq == src && t4g == t4 && nla_transmittance(t4, 1.0).unwrap() == t4;
    }

    let mut exponent = 0.0f64;
    for _ in 0..500 {
        let f = FiberSpec::new("x", rng.random_range(0.01..1.0)).unwrap();
        let (a, b) = (rng.random_range(0.0..300.0), rng.random_range(0.0..300.0));
        let db = f.loss_db(a + b).unwrap();
        exponent = exponent.max((db - f.loss_db(a).unwrap() - f.loss_db(b).unwrap()).abs() / db.max(1.0));
        let t = f.transmittance(a + b).unwrap();
        let prod = f.transmittance(a).unwrap() * f.transmittance(b).unwrap();
        exponent = exponent.max(((t / prod).log10()).abs());
    }

    let ok = report(
        8,
        &[
            check(format!("symplectic residual {residual:.1e} < 1e-10 over 500 circuits"), residual < 1e-10),
            check(format!("pure-state entropy {entropy:.1e} < 1e-9 over {pure_cases} states"), entropy < 1e-9 && pure_cases >= 100),
            check(format!("spectrum invariance, relative error {spectrum:.1e} < 1e-8 over {spectrum_cases} states"), spectrum < 1e-8 && spectrum_cases >= 100),
            check("NLA at G = 1 is the identity, bit for bit", nla_exact),
            check(format!("transmittance multiplicativity, exponent error {exponent:.1e} <= 1e-14"), exponent <= 1e-14),
        ],
    );
    assert!(ok);
}
