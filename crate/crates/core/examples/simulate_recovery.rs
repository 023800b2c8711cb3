//! Noiseless data recover the planted coefficients; noise shows the spread.

use ivreg::oracle::simulate;
use ivreg::{build_design, fit_ls, Coefficients, Interval, Tau, Variant};

fn main() -> ivreg::Result<()> {
    let mut truth = Coefficients::zeros(2);
    truth.b1 = vec![0.8, -0.3];
    truth.b2 = vec![0.4, 0.1];
    truth.b3 = vec![0.05, 0.2];
    truth.b4 = vec![-0.2, 0.0];
    let planted = truth.to_vec();

    for noise in [0.0, 0.5, 2.0] {
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let s = simulate(59, 2, &truth, noise, seed)?;
            let fit = fit_ls(&build_design(&s, Variant::Full)?, Tau::default())?;
            for (a, b) in fit.coefficients.to_vec().iter().zip(&planted) {
                worst = worst.max((a - b).abs());
            }
        }
        println!("noise {noise:3.1}: max coefficient error over 20 seeds {worst:.2e}");
    }
    truth.delta = Interval::new(1.0, 0.5)?;
    let a = simulate(10, 2, &truth, 1.0, 5)?;
    let b = simulate(10, 2, &truth, 1.0, 5)?;
    println!("same seed, same sample: {}", a == b);
    Ok(())
}
