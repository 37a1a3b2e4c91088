//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::*;
use num::Zero;
use rand::Rng;
use reeb_eh::optimizer::{find_critical_points, Classification, SearchOptions};
use reeb_eh::quadrature::quadrature_oracle;
use reeb_eh::scalar::{int, rat, to_f64, Rational};
use reeb_eh::testconfig::{build_total, calibrate, CalibrationStatus, FsDictionary, PLConcaveFunction, TotalPolytope, CALIBRATION_TOL, DEFAULT_STEP};
use reeb_eh::{ReebCalculus, ReebVector};
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn xi(a0: Rational, a: Vec<Rational>) -> ReebVector {
    ReebVector::new(a0, a)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let calc = ReebCalculus::new(rect(1, 6));
    let xi0 = ReebVector::constant(2);
    let plus = xi(int(1), vec![rat(1, 5), int(0)]);
    let (v0, s0) = (calc.volume(&xi0).map_err(|e| e.to_string())?, calc.scal(&xi0).map_err(|e| e.to_string())?);
    let (vp, sp) = (calc.volume(&plus).map_err(|e| e.to_string())?, calc.scal(&plus).map_err(|e| e.to_string())?);
    let elapsed = start.elapsed().as_secs_f64();
    ensure(v0 == int(24) && s0 == int(28), format!("V(xi0)={v0}, S(xi0)={s0}"))?;
    ensure(vp == rat(625, 24) && sp == rat(125, 4), format!("V(xi+)={vp}, S(xi+)={sp}"))?;
    ensure(elapsed < 1.0, format!("runtime {elapsed:.3}s"))?;
    Ok(format!("V(xi0)={v0} S(xi0)={s0} V(xi+)={vp} S(xi+)={sp} in {elapsed:.3}s"))
}

fn criterion_2() -> Outcome {
    let calc = ReebCalculus::new(rect(1, 6));
    let xi0 = ReebVector::constant(2);
    let plus = xi(int(1), vec![rat(1, 5), int(0)]);
    let e0 = calc.eh(&xi0).map_err(|e| e.to_string())?;
    let ep = calc.eh(&plus).map_err(|e| e.to_string())?;
    let ord = calc.eh_compare(&plus, &xi0).map_err(|e| e.to_string())?;
    ensure(e0.eh_power == rat(343, 9), format!("eh_power(xi0)={}", e0.eh_power))?;
    ensure(ep.eh_power == int(45), format!("eh_power(xi+)={}", ep.eh_power))?;
    ensure(ord == std::cmp::Ordering::Greater, format!("eh_compare(xi+, xi0)={ord:?}"))?;
    Ok(format!("eh_power(xi0)={} eh_power(xi+)={} compare=GREATER", e0.eh_power, ep.eh_power))
}

fn criterion_3() -> Outcome {
    let cases = derivative_cases(2024);
    let polys: std::collections::BTreeSet<_> = cases.iter().map(|c| c.0.clone()).collect();
    ensure(cases.len() >= 20 && polys.len() >= 3, "too few cases")?;
    let (mut g, mut h) = (0.0f64, 0.0f64);
    for (name, p, chi) in &cases {
        let fd = fd_check(&ReebCalculus::new(p.clone()), chi, rat(1, 100_000));
        ensure(fd.euler_exact, format!("Euler identity fails on {name} at {chi}"))?;
        g = g.max(fd.grad_rel);
        h = h.max(fd.hess_rel);
    }
    ensure(g <= 1e-6 && h <= 1e-6, format!("max rel err gradient {g:.2e}, hessian {h:.2e}"))?;
    Ok(format!("{} points on {} polytopes; max rel err gradient {g:.2e}, hessian {h:.2e}; Euler exact", cases.len(), polys.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (i, (p, chi)) in oracle_cases(77).into_iter().enumerate() {
        let calc = ReebCalculus::new(p.clone());
        let n = p.dim() as i32;
        for (boundary, exact) in [(false, calc.volume(&chi)), (true, calc.scal(&chi))] {
            let exact = to_f64(&exact.map_err(|e| e.to_string())?);
            let est = quadrature_oracle(&calc, &chi, if boundary { n } else { n + 1 }, boundary, 1_000_000, 1000 * (1 + boundary as u64) + i as u64)
                .map_err(|e| e.to_string())?;
            let sigmas = (est.value - exact).abs() / est.std_error.max(f64::MIN_POSITIVE);
            worst = worst.max(if est.agrees_with(exact, 3.0) { sigmas.min(3.0) } else { sigmas });
            ensure(est.agrees_with(exact, 3.0), format!("case {i} ({}) off by {sigmas:.2} sigma", if boundary { "S" } else { "V" }))?;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("runtime {elapsed:.1}s"))?;
    Ok(format!("10 instances, N=1e6, worst deviation {worst:.2} sigma, {elapsed:.2}s"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let opts = SearchOptions { seed: 7, ..SearchOptions::default() };
    let set = find_critical_points(&ReebCalculus::new(rect(1, 6)), &opts, &[]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let c_star = 1.0 / (6.0 * 5f64.sqrt());
    let saddle = set
        .points
        .iter()
        .any(|p| p.classification == Classification::Saddle && p.chi == ReebVector::constant(2));
    ensure(saddle, "no saddle at (1;0,0)")?;
    let minima: Vec<_> = set.points.iter().filter(|p| p.classification == Classification::Minimum).collect();
    ensure(minima.len() == 2, format!("{} minima", minima.len()))?;
    let mut max_dist = 0.0f64;
    let mut max_rel = 0.0f64;
    for sign in [1.0, -1.0] {
        let target = [1.0, 0.0, sign * c_star];
        let m = minima
            .iter()
            .find(|p| (p.coords[2] - target[2]).abs() < 1e-3)
            .ok_or(format!("no minimum near c = {:+.7}", target[2]))?;
        let chi = m.chi.to_f64();
        let d = chi.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_dist = max_dist.max(d);
        max_rel = max_rel.max((to_f64(&m.eh_power) - 37.5).abs() / 37.5);
    }
    ensure(max_dist <= 1e-6, format!("minima off by {max_dist:.2e}"))?;
    ensure(max_rel <= 1e-9, format!("eh_power off by {max_rel:.2e} relative"))?;
    let p14 = find_critical_points(&ReebCalculus::new(rect(1, 4)), &opts, &[]).map_err(|e| e.to_string())?;
    ensure(
        p14.points.len() == 1 && p14.points[0].chi == ReebVector::constant(2),
        format!("P_(1,4) has {} critical points", p14.points.len()),
    )?;
    ensure(elapsed < 10.0, format!("runtime {elapsed:.2}s"))?;
    Ok(format!(
        "{} points; saddle at xi0; minima within {max_dist:.1e} of (1;0,±{c_star:.7}); eh_power rel err {max_rel:.1e}; P_(1,4) unique at xi0; {elapsed:.2}s",
        set.points.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_reeb-eh")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("reeb-eh {args:?} exited with {:?}", out.status.code()));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("rect_1_6.json");
    std::fs::write(
        &path,
        r#"{"dim": 2, "facets": [{"normal": [1, 0], "offset": "1"}, {"normal": [-1, 0], "offset": "1"},
            {"normal": [0, 1], "offset": "6"}, {"normal": [0, -1], "offset": "6"}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let report = run_cli(&["eval", "--polytope", path.to_str().unwrap()])?;
    let audit = &report["result"]["rectangle_audit"];
    let mut detail = Vec::new();
    for side in ["plus", "minus"] {
        let a = &audit[side];
        ensure(a["eh"]["V"] == "625/24" && a["eh"]["S"] == "125/4", format!("{side}: values {:?}", a["eh"]))?;
        ensure(a["stationary"] == false, format!("{side}: stationary flag {}", a["stationary"]))?;
        let grad: Vec<f64> = a["slice_gradient"].as_array().ok_or("slice_gradient missing")?.iter().filter_map(Value::as_f64).collect();
        ensure(grad.iter().any(|g| *g != 0.0), format!("{side}: zero directional derivative"))?;
        detail.push(format!("{side}: dEH/db = {:+.6e}", grad[0]));
    }
    Ok(format!("eval report records xi± non-stationary ({}), compare_to_xi0 = {}", detail.join(", "), audit["plus"]["compare_to_xi0"]))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7007);
    for case in 0..100 {
        let p = pool(case, &mut r);
        let calc = ReebCalculus::new(p.clone());
        let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
        let lambda = rat(r.gen_range(1..40), r.gen_range(1..40));
        let (a, b) = (calc.eh(&chi).map_err(|e| e.to_string())?, calc.eh(&chi.scaled(&lambda)).map_err(|e| e.to_string())?);
        let n = p.dim();
        ensure(
            b.s == &a.s / num::pow::pow(lambda.clone(), n) && b.v == &a.v / num::pow::pow(lambda.clone(), n + 1) && b.eh_power == a.eh_power,
            format!("scaling case {case}"),
        )?;
    }
    for case in 0..50 {
        let p = pool(case, &mut r);
        let (a, inv) = unimodular(&mut r, p.dim(), 1 + case % 7);
        let q = p.apply_unimodular(&a).map_err(|e| e.to_string())?;
        let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
        let e1 = ReebCalculus::new(p).eh(&chi).map_err(|e| e.to_string())?;
        let e2 = ReebCalculus::new(q).eh(&transport(&chi, &inv)).map_err(|e| e.to_string())?;
        ensure(e1.v == e2.v && e1.s == e2.s && e1.eh_power == e2.eh_power, format!("lattice case {case}"))?;
    }
    for case in 0..30 {
        let p = pool(case, &mut r);
        let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
        let reference = ReebCalculus::new(p.clone()).eh(&chi).map_err(|e| e.to_string())?;
        let seeded = ReebCalculus::with_parts(p.clone(), p.triangulate_seeded(r.gen()), p.facet_chart_seeded(r.gen()));
        let other = seeded.eh(&chi).map_err(|e| e.to_string())?;
        ensure(other.v == reference.v && other.s == reference.s, format!("triangulation case {case}"))?;
    }
    Ok("100 scaling cases, 50 unimodular transforms, 30 triangulation seeds: all exact".into())
}

fn criterion_8() -> Outcome {
    let polys = [segment(), rect(1, 2), triangle(), hirzebruch(3, 1, 1)];
    let mut checks = 0;
    for p in &polys {
        let base = ReebCalculus::new(p.clone());
        let chi = ReebVector::constant(p.dim());
        let vol = base.volume(&chi).map_err(|e| e.to_string())?;
        for c in [rat(1, 2), int(2)] {
            let total = build_total(p, &PLConcaveFunction::constant(p.dim(), c)).map_err(|e| e.to_string())?;
            let mu = total.mu_max(&chi).map_err(|e| e.to_string())?;
            for j in 0..=9 {
                let s = rat(j, 10) / &mu;
                let v = total.v_s(&chi, &s).map_err(|e| e.to_string())?.value;
                ensure(v == vol, format!("V_s - Vol = {} at s = {s}", &v - &vol))?;
                checks += 1;
            }
        }
    }
    for (p, h, chi) in subterm_cases() {
        let total = build_total(&p, &h).map_err(|e| e.to_string())?;
        let base = ReebCalculus::new(p);
        let s = total.s_s(&chi, &Rational::zero(), FsDictionary::default()).map_err(|e| e.to_string())?;
        ensure(s.exact == base.scal(&chi).map_err(|e| e.to_string())? && s.fs_wedge == 0.0 && s.fs_moment == 0.0, "S_0 != Scal")?;
        checks += 1;
    }
    Ok(format!("{checks} exact checks: V_s = Vol on 4 polytopes for s up to 0.9/mu_max, S_0 = Scal for piecewise h"))
}

fn criterion_9() -> Outcome {
    let shipped = FsDictionary::default();
    let cal = calibrate(shipped).map_err(|e| e.to_string())?;
    let worst = cal.checks.iter().filter(|c| !c.passed).map(|c| format!("{} {:.1e}", c.name, c.residual)).next();
    match cal.status {
        CalibrationStatus::Calibrated => {
            // branch (a): every gate check already passed at its tolerance
            ensure(cal.checks.iter().all(|c| c.passed && c.tolerance <= CALIBRATION_TOL.max(1e-5)), "calibrated with a failing check")?;
            let (p, h, chi) = subterm_cases().remove(1);
            let total = build_total(&p, &h).map_err(|e| e.to_string())?;
            let ds = total.ds_check(&chi, shipped, &rat(DEFAULT_STEP.0, DEFAULT_STEP.1), &cal).map_err(|e| e.to_string())?;
            ensure(ds.passed, "ds_check failed")?;
            Ok(format!("branch (a): dictionary {} calibrated", shipped.name()))
        }
        CalibrationStatus::Failed => {
            // branch (b): the failure must propagate to every test-configuration output
            let (p, h, chi) = subterm_cases().remove(1);
            let total = build_total(&p, &h).map_err(|e| e.to_string())?;
            let s = total.mu_max(&chi).map_err(|e| e.to_string())?.recip() * rat(1, 4);
            let eh = total.eh_s(&chi, &s, shipped, cal.status).map_err(|e| e.to_string())?;
            let sf = total.sasaki_futaki(&chi, shipped, cal.status).map_err(|e| e.to_string())?;
            ensure(!eh.calibration_status.trusted() && !sf.calibration_status.trusted(), "failed status not propagated")?;
            let blocked = total.ds_check(&chi, shipped, &rat(DEFAULT_STEP.0, DEFAULT_STEP.1), &cal).is_err();
            ensure(blocked, "ds_check ran on an uncalibrated dictionary")?;
            let json = reeb_eh::json::sf_report(&sf);
            ensure(json["calibration_status"] == "failed" && json["trusted"] == false, "report not marked")?;
            Ok(format!(
                "branch (b): dictionary {} reports calibration_status=failed (first failing check: {}); SF/EH_s marked untrusted",
                shipped.name(),
                worst.unwrap_or_default()
            ))
        }
        other => Err(format!("unexpected status {other:?}")),
    }
}

fn criterion_10(c8: bool, c9: bool) -> Outcome {
    ensure(c8 && c9, "criteria 8-9 must pass")?;
    let mut worst = 0.0f64;
    for (i, (p, h, chi)) in subterm_cases().into_iter().enumerate() {
        let total = build_total(&p, &h).map_err(|e| e.to_string())?;
        let s = total.mu_max(&chi).map_err(|e| e.to_string())?.recip() * rat(1, 3);
        let lifted = TotalPolytope::lifted(&chi, &s);
        let n = p.dim() as i32;
        let pairs = [
            (to_f64(&total.total_volume(&chi, &s).map_err(|e| e.to_string())?), n + 2, false),
            (to_f64(&total.total_scal(&chi, &s).map_err(|e| e.to_string())?), n + 1, true),
        ];
        for (exact, k, boundary) in pairs {
            let est = quadrature_oracle(total.total(), &lifted, k, boundary, 1_000_000, 90 + 2 * i as u64 + boundary as u64).map_err(|e| e.to_string())?;
            let sigmas = (est.value - exact).abs() / est.std_error.max(f64::MIN_POSITIVE);
            ensure(est.agrees_with(exact, 3.0), format!("case {i}: {sigmas:.2} sigma"))?;
            worst = worst.max(sigmas.min(3.0));
        }
    }
    Ok(format!("Q sub-terms on 3 configurations within {worst:.2} sigma of the (n+1)-dimensional oracle, N=1e6; criteria 8-9 pass"))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "exact golden values", criterion_1()),
        (2, "exact EH comparables", criterion_2()),
        (3, "derivative correctness", criterion_3()),
        (4, "oracle equivalence", criterion_4()),
        (5, "critical-point recovery", criterion_5()),
        (6, "discrepancy report", criterion_6()),
        (7, "invariance suite", criterion_7()),
        (8, "test-configuration identities", criterion_8()),
        (9, "calibration gate", criterion_9()),
    ];
    let c10 = criterion_10(results[7].2.is_ok(), results[8].2.is_ok());
    results.push((10, "desk-scale test-configuration acceptance", c10));
    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {id:>2} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:>2} ({name}): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
