//! scratch probe (will be removed)
use difftrio::cases::*;
use difftrio::fdm::{solve_fdm, FdmGrid};
use difftrio::integrate::ToleranceSpec;
use difftrio::metrics::*;
use difftrio::model::*;
use difftrio::oracle::certified_reference;
use difftrio::rc::{solve_rc, DtPolicy};
use difftrio::spectral::solve_spectral;

fn rc_report(p: &DiffusionProblem, d: &DimensionlessProblem, oracle: &SolutionField,
             x_out: &[f64], out: &OutputGrid, r: usize, pol: DtPolicy) -> ErrorReport {
    let rc = solve_rc(p, r, pol, out).unwrap();
    let rc_d = nondimensionalize_field(&rc, p).unwrap();
    let rs = resample_to_grid(&rc_d, x_out).unwrap();
    error_report(&rs, oracle, &d.coeffs, p.horizon).unwrap()
}

#[test]
fn probe_case1_rc_adaptive() {
    let p = linear_heat_case();
    let d = nondimensionalize(&p).unwrap();
    let grid = FdmGrid::new(100).unwrap();
    let x_out = grid.nodes();
    let out = OutputGrid::new(d.horizon, 1.0).unwrap();
    let (oracle, _) = certified_reference(&d, 100, 0, 2, &out, &x_out).unwrap();
    for r in [2usize, 3, 100] {
        for (a, rl) in [(1e-4, 1e-4), (2e-3, 1e-4)] {
            let rep = rc_report(&p, &d, &oracle.field, &x_out, &out, r,
                                DtPolicy::AdaptiveRk { abs_tol: a, rel_tol: rl });
            println!("R{r}C ark(a={a:.0e}): field={:.3e} flux={:.3e} scd={:.2} rcpu={:.3}",
                rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h);
        }
    }
}

#[test]
fn probe_case2() {
    let p = nonlinear_moisture_case();
    let d = nondimensionalize(&p).unwrap();
    let grid = FdmGrid::new(100).unwrap();
    let x_out = grid.nodes();
    let out = OutputGrid::new(d.horizon, 1.0).unwrap();
    let t0 = std::time::Instant::now();
    let (oracle, at) = certified_reference(&d, 100, 0, 2, &out, &x_out).unwrap();
    println!("case2 cert: {:?} (attempts {}) in {:.1}s", oracle.certificate, at.len(), t0.elapsed().as_secs_f64());

    for tol_v in [1e-4, 3e-5] {
        let tol = ToleranceSpec::tight(tol_v, tol_v);
        let f = solve_fdm(&d, &grid, &tol, &out).unwrap();
        let rep = error_report(&f, &oracle.field, &d.coeffs, p.horizon).unwrap();
        println!("FDM tol={tol_v:.0e}: field={:.3e} flux={:.3e} scd={:.2} rcpu={:.2}", rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h);
    }
    for tol_v in [1e-4, 1e-5, 1e-6] {
        let tol = ToleranceSpec::tight(tol_v, tol_v);
        let s = solve_spectral(&d, 10, &tol, &out, &x_out).unwrap();
        let rep = error_report(&s, &oracle.field, &d.coeffs, p.horizon).unwrap();
        println!("SP n=10 tol={tol_v:.0e}: field={:.3e} flux={:.3e} scd={:.2} rcpu={:.3}", rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h);
    }
    let pv0 = 1583.5172653553673_f64;
    for r in [2usize, 3, 100] {
        let rep = rc_report(&p, &d, &oracle.field, &x_out, &out, r, DtPolicy::Auto { factor: 0.5 });
        println!("R{r}C euler: field={:.3e} flux={:.3e} scd={:.2} rcpu={:.3}", rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h);
        for (a, rl) in [(1e-4, 1e-4), (pv0*1e-4, 1e-4)] {
            let rep = rc_report(&p, &d, &oracle.field, &x_out, &out, r,
                                DtPolicy::AdaptiveRk { abs_tol: a, rel_tol: rl });
            println!("R{r}C ark(a={a:.1e}): field={:.3e} flux={:.3e} scd={:.2} rcpu={:.3}",
                rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h);
        }
    }
}

#[test]
fn probe_case2_spectrum() {
    let p = nonlinear_moisture_case();
    let d = nondimensionalize(&p).unwrap();
    let x_out: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let out = OutputGrid::new(d.horizon, 1.0).unwrap();
    let s = solve_spectral(&d, 32, &ToleranceSpec::tight(1e-10, 1e-10), &out, &x_out).unwrap();
    let modal = s.modal.as_ref().unwrap();
    // max |a_k| over all output times
    let mut max_abs = vec![0.0f64; 33];
    for ti in 0..s.nt() {
        for (k, &c) in modal.row(ti).iter().enumerate() {
            max_abs[k] = max_abs[k].max(c.abs());
        }
    }
    for (k, v) in max_abs.iter().enumerate() {
        println!("a[{k}] max = {v:.3e}");
    }
    let tail: f64 = max_abs[11..].iter().sum();
    println!("tail sum beyond k=10: {tail:.3e}");
}

#[test]
fn probe_sweeps() {
    let rs = [2usize, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100];
    for case in ["heat", "moist"] {
        let p = if case == "heat" { linear_heat_case() } else { nonlinear_moisture_case() };
        let d = nondimensionalize(&p).unwrap();
        let grid = FdmGrid::new(100).unwrap();
        let x_out = grid.nodes();
        let out = OutputGrid::new(d.horizon, 1.0).unwrap();
        let (oracle, _) = certified_reference(&d, 100, 0, 2, &out, &x_out).unwrap();
        for pol_name in ["euler", "ark"] {
            println!("=== {case} {pol_name}");
            for &r in &rs {
                let pol = if pol_name == "euler" {
                    DtPolicy::Auto { factor: 0.5 }
                } else if case == "heat" {
                    DtPolicy::AdaptiveRk { abs_tol: 2e-3, rel_tol: 1e-4 }
                } else {
                    DtPolicy::AdaptiveRk { abs_tol: 1e-4, rel_tol: 1e-4 }
                };
                let rep = rc_report(&p, &d, &oracle.field, &x_out, &out, r, pol);
                println!("r={r}: field={:.3e} flux={:.3e}", rep.field_eps_inf, rep.flux_eps_inf);
            }
        }
    }
}

#[test]
fn probe_case1_fdm_capped() {
    let p = linear_heat_case();
    let d = nondimensionalize(&p).unwrap();
    let grid = FdmGrid::new(100).unwrap();
    let x_out = grid.nodes();
    let out = OutputGrid::new(d.horizon, 1.0).unwrap();
    let (oracle, _) = certified_reference(&d, 100, 0, 2, &out, &x_out).unwrap();
    let cap = difftrio::rc::cfl_max_step(d.fo, grid.dx());
    println!("cap = {cap:.4e}");
    for (tol_v, max_step) in [
        (1e-4, Some(cap)),
        (1e-4, Some(0.7 * cap)),
        (1.5e-4, Some(cap)),
        (2e-4, Some(cap)),
        (3e-4, Some(cap)),
    ] {
        let tol = ToleranceSpec { abs_tol: tol_v, rel_tol: tol_v, initial_step: None, max_step };
        let f = solve_fdm(&d, &grid, &tol, &out).unwrap();
        let rep = error_report(&f, &oracle.field, &d.coeffs, p.horizon).unwrap();
        println!(
            "FDM tol={tol_v:.1e} cap={:?}: field={:.3e} flux={:.3e} scd={:.2} rcpu={:.2}",
            max_step.map(|m| (m / cap * 10.0).round() / 10.0),
            rep.field_eps_inf, rep.flux_eps_inf, rep.scd, rep.r_cpu_ms_per_h
        );
    }
}

#[test]
fn probe_case1_fdm_fine() {
    let p = linear_heat_case();
    let d = nondimensionalize(&p).unwrap();
    let grid = FdmGrid::new(100).unwrap();
    let x_out = grid.nodes();
    let out = OutputGrid::new(d.horizon, 1.0).unwrap();
    let (oracle, _) = certified_reference(&d, 100, 0, 2, &out, &x_out).unwrap();
    for tol_v in [4.0e-5, 4.25e-5, 4.5e-5, 4.75e-5, 5.0e-5, 5.5e-5, 6.0e-5] {
        let tol = ToleranceSpec::tight(tol_v, tol_v);
        let f = solve_fdm(&d, &grid, &tol, &out).unwrap();
        let rep = error_report(&f, &oracle.field, &d.coeffs, p.horizon).unwrap();
        println!(
            "FDM tol={tol_v:.2e}: field={:.3e} flux={:.3e} scd={:.3}",
            rep.field_eps_inf, rep.flux_eps_inf, rep.scd
        );
    }
}
