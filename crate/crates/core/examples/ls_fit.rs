//! Constrained least squares on a simulated sample, full model and Model M.

use ivreg::oracle::simulate;
use ivreg::{build_design, fit_ls, Coefficients, Interval, Tau, Variant};

fn main() -> ivreg::Result<()> {
    let mut truth = Coefficients::zeros(2);
    truth.b1 = vec![0.45, 0.05];
    truth.b2 = vec![0.26, 0.17];
    truth.b3 = vec![0.02, 0.0];
    truth.b4 = vec![0.0, 0.1];
    truth.delta = Interval::new(40.0, 6.0)?;
    let s = simulate(59, 2, &truth, 1.5, 7)?;

    for variant in [Variant::Full, Variant::ModelM] {
        let fit = fit_ls(&build_design(&s, variant)?, Tau::default())?;
        let c = &fit.coefficients;
        println!("{variant:?}");
        println!("  b1 {:.4?}  b2 {:.4?}  b3 {:.4?}  b4 {:.4?}", c.b1, c.b2, c.b3, c.b4);
        println!("  delta = [{:.4}, {:.4}]  mse {:.4}", c.delta.inf(), c.delta.sup(), fit.mse);
        println!("  Gamma violation {:.1e}", fit.diagnostics["gamma_violation"]);
    }
    Ok(())
}
