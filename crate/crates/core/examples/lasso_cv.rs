//! Per-block cross-validated Lasso, with the MSE and 1SE selections.

use ivreg::lasso::{cross_validate, fit_lasso, LambdaRule};
use ivreg::oracle::simulate;
use ivreg::{Coefficients, Interval, Tau, Variant};

fn main() -> ivreg::Result<()> {
    let mut truth = Coefficients::zeros(3);
    truth.b1 = vec![1.2, 0.0, -0.4];
    truth.b2 = vec![0.5, 0.0, 0.0];
    truth.delta = Interval::new(2.0, 1.0)?;
    let s = simulate(80, 3, &truth, 2.0, 11)?;
    let tau = Tau::default();

    let path = cross_validate(&s, Variant::ModelM, tau, 5, 42)?;
    for (name, block) in [("mid", &path.mid), ("spread", &path.spr)] {
        let best = block.lambdas.iter().position(|&l| l == block.lambda_mse).unwrap_or(0);
        println!(
            "{name:6} lambda_mse {:.4} (cv {:.4} +- {:.4})  lambda_1se {:.4}",
            block.lambda_mse, block.cv_mean[best], block.cv_std_err[best], block.lambda_1se
        );
    }

    for rule in [LambdaRule::Mse, LambdaRule::OneSe] {
        let fit = fit_lasso(&s, Variant::ModelM, tau, rule, 5, 42)?;
        let c = &fit.coefficients;
        println!("{rule:?}: b1 {:.3?}  b2 {:.3?}  mse {:.4}", c.b1, c.b2, fit.mse);
    }
    Ok(())
}
