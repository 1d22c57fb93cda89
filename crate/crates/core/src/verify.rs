//! The acceptance suite: eleven numbered checks spanning every module,
//! runnable twice into sibling directories to prove byte determinism.
//!
//! Each criterion is a self-contained function that computes its own
//! inputs, writes plot-ready artifacts, and reports a pass/fail line with
//! the measured numbers. Numerical shortfalls are reported, never masked:
//! a criterion that cannot hold at desk scale shows up as FAIL with the
//! honest measurement in its detail string.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bifurcation::{
    build_singular_solution, count_lambda_crossings, trace_diagram, DiagramOptions, SingularOptions,
};
use crate::bubbles::{detect_bubbles, oscillation_report, BubbleReport, DEFAULT_MIN_PHI};
use crate::csvout::{fmt_float, Table};
use crate::error::{Error, ErrorCode, Result};
use crate::nonlinearity::{NonlinearitySpec, Variant};
use crate::profiles::Profile;
use crate::recurrence::{compute_hat_recurrence, compute_recurrence, DEFAULT_TOL};
use crate::solver::{
    gelfand_oracle, identity_residuals, pohozaev_residual, shoot_first_zero, RadialSolution,
    SolverOptions,
};

/// Outcome of one numbered acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured numbers and gates, deterministic across runs.
    pub detail: String,
}

/// One line per criterion, e.g. `criterion 03 PASS monotonicity and tails: ...`.
pub fn format_line(r: &CriterionResult) -> String {
    format!(
        "criterion {:02} {} {}: {}",
        r.index,
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.detail
    )
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::write(dir.join(name), content)
        .map_err(|e| Error::new(ErrorCode::Io, format!("writing {name}: {e}")))
}

fn gelfand_spec() -> Result<NonlinearitySpec> {
    NonlinearitySpec::new(1.0, Variant::UnitH)
}

fn blended_spec() -> Result<NonlinearitySpec> {
    NonlinearitySpec::new(3.0, Variant::H4 { tau0: 1.0 })
}

const A1_P3: f64 = 1.464_101_615_137_754_6;

fn criterion_1(dir: &Path) -> Result<CriterionResult> {
    let ps = [2.1, 2.5, 3.0, 4.0, 6.0, 10.0];
    let mut table = Table::new(&["p", "max_rel_residual"]);
    let mut worst = 0.0f64;
    for &p in &ps {
        let t = compute_recurrence(p, 200, DEFAULT_TOL)?;
        let m = (0..=200)
            .map(|k| t.identity_residual(k))
            .fold(0.0, f64::max);
        table.push_floats(&[p, m]);
        worst = worst.max(m);
    }
    write_artifact(dir, "recurrence_identity.csv", &table.render())?;
    Ok(CriterionResult {
        index: 1,
        name: "recurrence identity",
        passed: worst < 1e-10,
        detail: format!(
            "max rel residual {worst:.3e} over p in {{2.1,2.5,3,4,6,10}}, K=200 (gate 1e-10)"
        ),
    })
}

fn criterion_2(dir: &Path) -> Result<CriterionResult> {
    let t3 = compute_recurrence(3.0, 1, DEFAULT_TOL)?;
    let t4 = compute_recurrence(4.0, 1, DEFAULT_TOL)?;
    let hat = compute_hat_recurrence(1, DEFAULT_TOL)?;
    let r3 = t3.row(1).unwrap();
    let r4 = t4.row(1).unwrap();
    // a_1(4) follows from the defining cubic: delta^3 + delta^2 + delta = 1
    // and a_1 = 2 - 4 delta^3 give 1.3571470 (a published rounding shows
    // ...490, which contradicts the formula next to it by 2e-6).
    let golden: [(&str, f64, f64); 6] = [
        ("delta_1(3)", r3.delta, 0.366_025_4),
        ("a_1(3)", r3.a, 1.464_101_6),
        ("delta_1(4)", r4.delta, 0.543_689_0),
        ("a_1(4)", r4.a, 1.357_147_0),
        ("c_hat_1", hat[1].c_hat, 0.203_188),
        ("a_hat_1", hat[1].a_hat, 1.187_249),
    ];
    let mut table = Table::new(&["name", "computed", "expected", "abs_err"]);
    let mut worst = 0.0f64;
    for (name, computed, expected) in golden {
        let err = (computed - expected).abs();
        table.push_raw(vec![
            name.to_string(),
            fmt_float(computed),
            fmt_float(expected),
            fmt_float(err),
        ]);
        worst = worst.max(err);
    }
    write_artifact(dir, "golden_values.csv", &table.render())?;
    Ok(CriterionResult {
        index: 2,
        name: "recurrence golden values",
        passed: worst < 1e-6,
        detail: format!("max abs deviation {worst:.3e} over 6 first-row constants (gate 1e-6)"),
    })
}

fn criterion_3(dir: &Path) -> Result<CriterionResult> {
    let mut table = Table::new(&["p", "a_decreasing", "d_increasing", "tail_over_limit"]);
    let mut passed = true;
    let mut details = Vec::new();
    for &p in &[3.0, 4.0, 6.0] {
        let t = compute_recurrence(p, 200, DEFAULT_TOL)?;
        let rows = t.rows();
        let a_dec = rows.windows(2).all(|w| w[1].a < w[0].a);
        let d_inc = rows[1..]
            .windows(2)
            .all(|w| w[1].d.unwrap() > w[0].d.unwrap());
        let tail = 200.0 * (1.0 - rows[200].d.unwrap());
        let ratio = tail / (3.0 / (p - 2.0));
        let ok = a_dec && d_inc && (ratio - 1.0).abs() <= 0.25;
        passed &= ok;
        details.push(format!("p={p}: tail/limit {ratio:.4}"));
        table.push_raw(vec![
            fmt_float(p),
            a_dec.to_string(),
            d_inc.to_string(),
            fmt_float(ratio),
        ]);
    }
    write_artifact(dir, "tails.csv", &table.render())?;
    Ok(CriterionResult {
        index: 3,
        name: "monotonicity and tails",
        passed,
        detail: format!("{} (tail gate 25%)", details.join(", ")),
    })
}

fn criterion_4(dir: &Path) -> Result<CriterionResult> {
    let singular_a = A1_P3;
    let cases = [
        (
            "regular0",
            Profile::Regular0,
            4.0,
            2.0,
            Some(2.0 * 2.0_f64.sqrt()),
        ),
        (
            "singular_a1",
            Profile::singular(singular_a, None)?,
            2.0 * singular_a,
            singular_a * singular_a / 2.0,
            None,
        ),
        ("tilde0", Profile::Tilde0, 4.0, 2.0, None),
    ];
    let mut table = Table::new(&[
        "profile",
        "max_residual",
        "mass",
        "mass_target",
        "phi_max",
        "phi_target",
    ]);
    let mut passed = true;
    let mut worst_res = 0.0f64;
    for (name, profile, mass_target, phi_target, argmax_target) in cases {
        // Log-radius residual over r in [1e-6, 1e6].
        let mut res = 0.0f64;
        for i in 0..=600 {
            let s = -6.0 * std::f64::consts::LN_10
                + 12.0 * std::f64::consts::LN_10 * (i as f64) / 600.0;
            res = res.max(profile.residual_log_radius(s).abs());
        }
        let mass = profile.mass(1e-10)?;
        let (argmax, phi) = profile.phi_max();
        let mut ok =
            res < 1e-10 && (mass - mass_target).abs() < 1e-8 && (phi - phi_target).abs() < 1e-10;
        if let Some(target) = argmax_target {
            ok &= (argmax - target).abs() < 1e-6;
        }
        passed &= ok;
        worst_res = worst_res.max(res);
        table.push_raw(vec![
            name.to_string(),
            fmt_float(res),
            fmt_float(mass),
            fmt_float(mass_target),
            fmt_float(phi),
            fmt_float(phi_target),
        ]);
    }
    write_artifact(dir, "profiles.csv", &table.render())?;
    Ok(CriterionResult {
        index: 4,
        name: "profile exactness",
        passed,
        detail: format!(
            "max residual {worst_res:.3e} (gate 1e-10), masses to 1e-8, density peaks to 1e-10"
        ),
    })
}

const GELFAND_MUS: [f64; 6] = [
    0.5,
    1.0,
    1.386_294_361_119_890_6, // 2 log 2, the fold
    2.0,
    3.0,
    4.0,
];

fn criterion_5(dir: &Path) -> Result<CriterionResult> {
    let spec = gelfand_spec()?;
    let opts = SolverOptions::default();
    let mut table = Table::new(&["mu", "lambda", "oracle", "rel_err"]);
    let mut worst = 0.0f64;
    let mut fold_err = f64::NAN;
    for &mu in &GELFAND_MUS {
        let shot = shoot_first_zero(&spec, mu, &opts)?;
        let oracle = gelfand_oracle(mu);
        let rel = (shot.lambda_of_mu - oracle).abs() / oracle;
        if mu == GELFAND_MUS[2] {
            fold_err = (shot.lambda_of_mu - 2.0).abs();
        }
        worst = worst.max(rel);
        table.push_floats(&[mu, shot.lambda_of_mu, oracle, rel]);
    }
    write_artifact(dir, "gelfand_oracle.csv", &table.render())?;
    Ok(CriterionResult {
        index: 5,
        name: "solver oracle",
        passed: worst < 1e-6 && fold_err < 1e-6,
        detail: format!(
            "max rel err {worst:.3e} over 6 heights, fold |lambda - 2| = {fold_err:.3e} (gates 1e-6)"
        ),
    })
}

/// Deterministic 64-bit generator for the identity spot checks.
fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct IdentityStats {
    id0: f64,
    id2: f64,
    poho: Option<f64>,
}

fn identity_stats(sol: &RadialSolution, seed: u64) -> Result<IdentityStats> {
    let n = sol.len();
    let mut id0 = 0.0f64;
    for i in 0..n {
        id0 = id0.max((-sol.v[i] - sol.a[i]).abs());
    }
    let mut state = seed;
    let mut id2 = 0.0f64;
    for _ in 0..100 {
        let i = (splitmix(&mut state) % (n as u64 - 1)) as usize;
        let j = i + 1 + (splitmix(&mut state) % (n as u64 - 1 - i as u64)) as usize;
        let (_, two_point) = identity_residuals(sol, i, j)?;
        id2 = id2.max(two_point.abs());
    }
    let poho = sol.fu.is_some().then(|| {
        (0..n)
            .filter_map(|i| pohozaev_residual(sol, i))
            .fold(0.0f64, |acc, r| acc.max(r.abs()))
    });
    Ok(IdentityStats { id0, id2, poho })
}

fn criterion_6(dir: &Path) -> Result<CriterionResult> {
    let opts = SolverOptions::default();
    let mut runs: Vec<(String, RadialSolution)> = Vec::new();
    let gelfand = gelfand_spec()?;
    for &mu in &GELFAND_MUS {
        runs.push((
            format!("unit_h mu={mu}"),
            shoot_first_zero(&gelfand, mu, &opts)?.solution,
        ));
    }
    let blended = blended_spec()?;
    for &mu in &[2.0, 4.0, 5.0, 6.0] {
        runs.push((
            format!("blended mu={mu}"),
            shoot_first_zero(&blended, mu, &opts)?.solution,
        ));
    }

    let mut table = Table::new(&["run", "id0_max", "id2_max", "poho_max"]);
    let (mut worst0, mut worst2, mut worst_p) = (0.0f64, 0.0f64, 0.0f64);
    let mut poho_checked = 0usize;
    for (i, (name, sol)) in runs.iter().enumerate() {
        let stats = identity_stats(sol, 0x5EED_0000 + i as u64)?;
        worst0 = worst0.max(stats.id0);
        worst2 = worst2.max(stats.id2);
        if let Some(p) = stats.poho {
            worst_p = worst_p.max(p);
            poho_checked += 1;
        }
        table.push_raw(vec![
            name.clone(),
            fmt_float(stats.id0),
            fmt_float(stats.id2),
            stats.poho.map(fmt_float).unwrap_or_default(),
        ]);
    }
    write_artifact(dir, "identities.csv", &table.render())?;
    Ok(CriterionResult {
        index: 6,
        name: "green identities",
        passed: worst0 < 1e-8 && worst2 < 1e-7 && worst_p < 1e-7,
        detail: format!(
            "flux max {worst0:.3e} (gate 1e-8), two-point max {worst2:.3e}, \
             balance max {worst_p:.3e} on {poho_checked}/{} runs with representable F (gates 1e-7)",
            runs.len()
        ),
    })
}

fn bubble_csv(reports: &[BubbleReport]) -> String {
    let mut table = Table::new(&[
        "k",
        "s_k",
        "u_k",
        "ratio",
        "phi",
        "psi",
        "energy_pm",
        "energy_e",
        "loc",
        "tower",
    ]);
    for b in reports {
        table.push_raw(vec![
            b.k.to_string(),
            fmt_float(b.s_k),
            fmt_float(b.u_k),
            fmt_float(b.ratio),
            fmt_float(b.phi_k),
            fmt_float(b.psi_k),
            fmt_float(b.energy_pm),
            fmt_float(b.energy_e),
            fmt_float(b.loc_stat),
            b.tower.to_string(),
        ]);
    }
    table.render()
}

fn criterion_7(dir: &Path) -> Result<CriterionResult> {
    let spec = blended_spec()?;
    let opts = SolverOptions::default();
    let table = compute_recurrence(3.0, 8, DEFAULT_TOL)?;

    let mut phi0_gaps = Vec::new();
    let mut mu6: Option<(Vec<BubbleReport>, RadialSolution)> = None;
    for &mu in &[4.0, 5.0, 6.0] {
        let shot = shoot_first_zero(&spec, mu, &opts)?;
        let bubbles = detect_bubbles(&spec, &shot.solution, Some(&table), DEFAULT_MIN_PHI)?;
        phi0_gaps.push((bubbles[0].phi_k - 2.0).abs());
        if mu == 6.0 {
            mu6 = Some((bubbles, shot.solution));
        }
    }
    let (bubbles, sol) = mu6.unwrap();
    write_artifact(dir, "bubble_tower_mu6.csv", &bubble_csv(&bubbles))?;
    {
        let mut trend = Table::new(&["mu", "phi0_gap"]);
        for (i, &mu) in [4.0, 5.0, 6.0].iter().enumerate() {
            trend.push_floats(&[mu, phi0_gaps[i]]);
        }
        write_artifact(dir, "bubble_trend.csv", &trend.render())?;
    }

    let osc = oscillation_report(&sol, &bubbles, Some(&table))?;
    let b0 = &bubbles[0];
    let top0 = osc[0].top_beta;
    let have_b1 = bubbles.len() > 1 && bubbles[1].tower;
    let (ratio1_err, phi1_err) = if have_b1 {
        let b1 = &bubbles[1];
        let delta1 = table.row(1).unwrap().delta;
        let phi1_target = A1_P3 * A1_P3 / 2.0;
        (
            (b1.ratio - delta1).abs() / delta1,
            (b1.phi_k - phi1_target).abs() / phi1_target,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let trend_ok = phi0_gaps.windows(2).all(|w| w[1] <= w[0]);

    let passed = (1.6..=2.05).contains(&b0.phi_k)
        && (1.7..=2.3).contains(&b0.psi_k)
        && (1.6..=2.2).contains(&top0)
        && have_b1
        && ratio1_err < 0.20
        && phi1_err < 0.30
        && trend_ok;
    Ok(CriterionResult {
        index: 7,
        name: "bubble tower",
        passed,
        detail: format!(
            "mu=6: phi0 {:.4}, psi0 {:.4}, top0 {:.4}; bubble1 height off {:.1}% (gate 20%), \
             phi1 off {:.1}% (gate 30%); |phi0-2| trend {} over mu=4,5,6",
            b0.phi_k,
            b0.psi_k,
            top0,
            100.0 * ratio1_err,
            100.0 * phi1_err,
            if trend_ok {
                "nonincreasing"
            } else {
                "NOT monotone"
            }
        ),
    })
}

fn criterion_8(dir: &Path) -> Result<CriterionResult> {
    let spec = gelfand_spec()?;
    let shot = shoot_first_zero(&spec, 4.0, &SolverOptions::default())?;
    let bubbles = detect_bubbles(&spec, &shot.solution, None, DEFAULT_MIN_PHI)?;
    write_artifact(dir, "subcritical_mu4.csv", &bubble_csv(&bubbles))?;

    let one_bubble = bubbles.len() == 1;
    let e_total: f64 = bubbles.iter().map(|b| b.energy_e).sum();
    let e_err = (e_total - 4.0).abs() / 4.0;
    let osc = oscillation_report(&shot.solution, &bubbles, None)?;
    let top = osc[0].top_beta;
    let top_err = (top - 4.0).abs() / 4.0;

    // The exponent statistic converges to 4 only as mu grows; its closed
    // form 4 log((1+b)/2)/log b sits 29.6% below 4 at mu = 4, so the 20%
    // gate records an honest FAIL at this height.
    let passed = one_bubble && e_err < 0.25 && top_err < 0.20;
    Ok(CriterionResult {
        index: 8,
        name: "subcritical contrast",
        passed,
        detail: format!(
            "bubbles {} (want 1), energy total {e_total:.6} off 4 by {:.1}% (gate 25%), \
             top exponent {top:.4} off 4 by {:.1}% (gate 20%)",
            bubbles.len(),
            100.0 * e_err,
            100.0 * top_err
        ),
    })
}

fn criterion_9(dir: &Path) -> Result<CriterionResult> {
    let spec = blended_spec()?;
    let opts = DiagramOptions::default();
    let grid: Vec<f64> = (0..17).map(|i| 2.0 + 4.0 * (i as f64) / 16.0).collect();
    let diagram = trace_diagram(&spec, &grid, &opts)?;
    let singular = build_singular_solution(&spec, &SingularOptions::default())?;
    write_artifact(dir, "diagram.csv", &diagram.to_csv())?;
    write_artifact(dir, "singular.csv", &singular.to_csv())?;

    let crossings = count_lambda_crossings(&spec, &diagram, &opts.solver, 20)?;
    let json = serde_json::to_string_pretty(&crossings)
        .map_err(|e| Error::new(ErrorCode::Io, format!("crossings json: {e}")))?;
    write_artifact(dir, "crossings.json", &json)?;

    let zs: Vec<usize> = diagram.rows.iter().filter_map(|r| r.z).collect();
    let z_monotone = zs.windows(2).all(|w| w[1] >= w[0]);
    let z_top = zs.last().copied().unwrap_or(0);
    let passed = diagram.failures.is_empty()
        && crossings.count >= 2
        && zs.len() == diagram.rows.len()
        && z_monotone
        && z_top >= 3;
    Ok(CriterionResult {
        index: 9,
        name: "diagram oscillation",
        passed,
        detail: format!(
            "{} sign changes of lambda - lambda_star (want >= 2) at mu = {:?}; \
             Z {} from {} to {z_top} (want nondecreasing, >= 3)",
            crossings.count,
            crossings
                .crossings
                .iter()
                .map(|m| (m * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            if z_monotone {
                "nondecreasing"
            } else {
                "NOT monotone"
            },
            zs.first().copied().unwrap_or(0)
        ),
    })
}

fn criterion_10(dir: &Path) -> Result<CriterionResult> {
    let hat = compute_hat_recurrence(1, DEFAULT_TOL)?;
    let t50 = compute_recurrence(50.0, 1, DEFAULT_TOL)?;
    let a_gap = (t50.row(1).unwrap().a - hat[1].a_hat).abs();
    let c_gap = (t50.pow_delta(1) - hat[1].c_hat).abs();
    let a_near2 = compute_recurrence(2.005, 1, DEFAULT_TOL)?.row(1).unwrap().a;
    let d_near2 = compute_recurrence(2.05, 1, DEFAULT_TOL)?
        .row(1)
        .unwrap()
        .delta;

    let mut table = Table::new(&["quantity", "value", "gate"]);
    for (name, value, gate) in [
        ("a_1(50) - a_hat_1", a_gap, "< 0.02"),
        ("delta_1(50)^49 - c_hat_1", c_gap, "< 0.02"),
        ("a_1(2.005)", a_near2, "> 1.98"),
        ("delta_1(2.05)", d_near2, "< 0.05"),
    ] {
        table.push_raw(vec![name.to_string(), fmt_float(value), gate.to_string()]);
    }
    write_artifact(dir, "limit_cases.csv", &table.render())?;

    let passed = a_gap < 0.02 && c_gap < 0.02 && a_near2 > 1.98 && d_near2 < 0.05;
    Ok(CriterionResult {
        index: 10,
        name: "limit cases",
        passed,
        detail: format!(
            "|a_1(50) - a_hat_1| = {a_gap:.4}, |delta_1(50)^49 - c_hat_1| = {c_gap:.4} (gates 0.02); \
             a_1(2.005) = {a_near2:.4} (> 1.98), delta_1(2.05) = {d_near2:.4} (< 0.05)"
        ),
    })
}

/// Run criteria 1 through 10, writing artifacts into `dir`.
pub fn run_criteria(dir: &Path) -> Result<Vec<CriterionResult>> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::new(ErrorCode::Io, format!("creating {}: {e}", dir.display())))?;
    let checks: [fn(&Path) -> Result<CriterionResult>; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut results = Vec::with_capacity(11);
    for (i, check) in checks.iter().enumerate() {
        let result = match check(dir) {
            Ok(r) => r,
            Err(e) if e.code == ErrorCode::Io => return Err(e),
            Err(e) => CriterionResult {
                index: i + 1,
                name: "(errored)",
                passed: false,
                detail: format!("failed to run: {e}"),
            },
        };
        results.push(result);
    }
    let summary = serde_json::to_string_pretty(&results)
        .map_err(|e| Error::new(ErrorCode::Io, format!("summary json: {e}")))?;
    write_artifact(dir, "summary.json", &summary)?;
    Ok(results)
}

fn snapshot_dir(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::new(ErrorCode::Io, format!("reading {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::new(ErrorCode::Io, e.to_string()))?;
        let path = entry.path();
        if path.is_file() {
            let bytes = fs::read(&path).map_err(|e| Error::new(ErrorCode::Io, e.to_string()))?;
            files.push((entry.file_name().to_string_lossy().into_owned(), bytes));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(files)
}

/// Run the whole suite twice into `scratch/pass1` and `scratch/pass2`,
/// append the determinism criterion comparing the two trees byte for byte,
/// and return the eleven results.
pub fn run_acceptance(scratch: &Path) -> Result<Vec<CriterionResult>> {
    let passes: Vec<PathBuf> = ["pass1", "pass2"].iter().map(|n| scratch.join(n)).collect();
    for dir in &passes {
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(|e| {
                Error::new(ErrorCode::Io, format!("clearing {}: {e}", dir.display()))
            })?;
        }
    }
    let mut results = run_criteria(&passes[0])?;
    let second = run_criteria(&passes[1])?;

    let first_files = snapshot_dir(&passes[0])?;
    let second_files = snapshot_dir(&passes[1])?;
    let mut mismatch = None;
    if first_files.len() != second_files.len() {
        mismatch = Some(format!(
            "file count {} vs {}",
            first_files.len(),
            second_files.len()
        ));
    } else {
        for (a, b) in first_files.iter().zip(&second_files) {
            if a.0 != b.0 {
                mismatch = Some(format!("file sets diverge at {} vs {}", a.0, b.0));
                break;
            }
            if a.1 != b.1 {
                mismatch = Some(format!("{} differs between runs", a.0));
                break;
            }
        }
    }
    let verdicts_agree = results.len() == second.len()
        && results
            .iter()
            .zip(&second)
            .all(|(a, b)| a.passed == b.passed && a.detail == b.detail);

    results.push(CriterionResult {
        index: 11,
        name: "determinism",
        passed: mismatch.is_none() && verdicts_agree,
        detail: match mismatch {
            None if verdicts_agree => format!(
                "two runs, {} artifacts each, byte-identical",
                first_files.len()
            ),
            None => "artifacts identical but verdicts differ".to_string(),
            Some(m) => m,
        },
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values_hold() {
        let dir = tempfile::tempdir().unwrap();
        let r = criterion_2(dir.path()).unwrap();
        assert!(r.passed, "{}", r.detail);
    }

    #[test]
    fn identity_and_limit_checks_hold() {
        let dir = tempfile::tempdir().unwrap();
        let r = criterion_1(dir.path()).unwrap();
        assert!(r.passed, "{}", r.detail);
        let r = criterion_10(dir.path()).unwrap();
        assert!(r.passed, "{}", r.detail);
    }

    #[test]
    fn subcritical_contrast_reports_the_honest_shortfall() {
        let dir = tempfile::tempdir().unwrap();
        let r = criterion_8(dir.path()).unwrap();
        // The bubble count and energy checks hold; the top exponent sits
        // 29.6% off its asymptote at mu = 4, so the criterion fails with
        // the measurement on record.
        assert!(!r.passed);
        assert!(r.detail.contains("bubbles 1 (want 1)"), "{}", r.detail);
        assert!(
            r.detail.contains("29.5%") || r.detail.contains("29.6%"),
            "{}",
            r.detail
        );
    }

    #[test]
    fn lines_are_numbered_and_tagged() {
        let line = format_line(&CriterionResult {
            index: 3,
            name: "monotonicity and tails",
            passed: true,
            detail: "ok".to_string(),
        });
        assert_eq!(line, "criterion 03 PASS monotonicity and tails: ok");
    }
}
