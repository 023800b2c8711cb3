//! Lasso-IR over a budget grid next to LS, including a sample where its
//! residuals stop being well defined.

use ivreg::lasso_ir::{default_budget_grid, fit_lasso_ir, select_budget};
use ivreg::oracle::simulate;
use ivreg::{build_design, fit_ls, Coefficients, Interval, IntervalSample, Tau, Variant};

fn main() -> ivreg::Result<()> {
    let mut truth = Coefficients::zeros(2);
    truth.b1 = vec![0.5, 0.1];
    truth.b2 = vec![0.45, 0.35];
    truth.delta = Interval::new(30.0, 5.0)?;
    let s = simulate(59, 2, &truth, 1.0, 3)?;
    let tau = Tau::default();
    let d = build_design(&s, Variant::ModelM)?;

    println!("{:>8} {:>10} {:>10}  spread coefficients", "t", "objective", "|a_a|_1");
    for t in default_budget_grid(&s, tau)?.into_iter().step_by(4) {
        let fit = fit_lasso_ir(&d, tau, t)?;
        let l1: f64 = fit.a_a.iter().map(|v| v.abs()).sum();
        println!("{t:8.4} {:10.4} {l1:10.4}  {:.4?}", fit.objective, fit.spread_coefficients());
    }
    let grid = default_budget_grid(&s, tau)?;
    println!("cv-selected t = {:.4}", select_budget(&s, tau, &grid, 5, 0)?);
    println!("LS mse {:.4}", fit_ls(&d, tau)?.mse);

    // spreads track mids except one response with almost no spread
    let x: Vec<Vec<Interval>> = (1..=12).map(|i| vec![Interval::new(i as f64, i as f64).unwrap()]).collect();
    let mut y: Vec<Interval> = (1..=12).map(|i| Interval::new(2.0 * i as f64, 2.0 * i as f64).unwrap()).collect();
    y[11] = Interval::new(24.0, 0.5)?;
    let d = build_design(&IntervalSample::with_default_names(y, x)?, Variant::ModelM)?;
    let fit = fit_lasso_ir(&d, tau, 0.0)?;
    println!("tied fit: Hukuhara residuals exist = {}", fit.hukuhara_residuals_exist);
    let ls = fit_ls(&d, tau)?;
    println!("LS on the same data: Gamma violation {:.1e}", ls.diagnostics["gamma_violation"]);
    Ok(())
}
