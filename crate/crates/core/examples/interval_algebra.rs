//! Interval arithmetic in midpoint/spread form and the `d_tau` metric.

use ivreg::interval::{aumann_mean, d_tau_covariance, d_tau_variance};
use ivreg::{Interval, Tau};

fn main() -> ivreg::Result<()> {
    let a = Interval::from_endpoints(1.0, 5.0)?;
    let b = Interval::new(-1.0, 0.5)?;
    println!("a = [{}, {}]  mid {} spr {}", a.inf(), a.sup(), a.mid(), a.spr());

    // a + (-2) b: the spread scales by |delta|
    let c = a.add_scaled(-2.0, &b);
    println!("a - 2b (Minkowski) = [{}, {}]", c.inf(), c.sup());
    let back = c.hukuhara_diff(&b.scale(-2.0))?;
    println!("(a - 2b) -H (-2b)  = [{}, {}]", back.inf(), back.sup());
    match b.hukuhara_diff(&a) {
        Ok(_) => println!("b -H a exists"),
        Err(e) => println!("b -H a: {e}"),
    }

    for t in [0.1, 0.5, 0.9] {
        println!("d_tau(a, b), tau = {t}: {:.4}", a.d_tau(&b, Tau::new(t)?));
    }

    let u = [a, b, c];
    let tau = Tau::default();
    let m = aumann_mean(&u)?;
    println!("Aumann mean = [{:.4}, {:.4}]", m.inf(), m.sup());
    println!("variance {:.4}, cov(u, u) {:.4}", d_tau_variance(&u, tau)?, d_tau_covariance(&u, &u, tau)?);
    Ok(())
}
