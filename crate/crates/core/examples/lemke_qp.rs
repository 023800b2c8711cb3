//! A small inequality-constrained QP solved by Lemke pivoting, checked
//! against active-set enumeration.

use ivreg::lcp::{lemke_solve, solve_qp_detailed, Lcp, Qp};
use ivreg::oracle::brute_force_qp;
use nalgebra::{DMatrix, DVector};

fn main() -> ivreg::Result<()> {
    // min 1/2 z'Qz + c'z  s.t.  z >= 0, z1 + z2 <= 1
    let qp = Qp::new(
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        DVector::from_vec(vec![-2.0, -3.0]),
        DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, -1.0]),
        DVector::from_vec(vec![0.0, 0.0, -1.0]),
    )?;
    let sol = solve_qp_detailed(&qp)?;
    println!("z          = {:?}", sol.z.as_slice());
    println!("multipliers= {:?}", sol.lcp.lambda.as_slice());
    println!("pivots {}, complementarity {:.1e}, stationarity {:.1e}", sol.lcp.pivots, sol.lcp.complementarity(), sol.stationarity);
    if let Some(z) = brute_force_qp(&qp)? {
        println!("enumeration: z = {:?}, objective gap {:.1e}", z.as_slice(), qp.objective(&sol.z) - qp.objective(&z));
    }

    // a raw LCP: w = Mx + q, w, x >= 0, w'x = 0
    let lcp = Lcp::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), DVector::from_vec(vec![-5.0, -6.0]))?;
    let s = lemke_solve(&lcp, 100)?;
    println!("LCP: x = {:?}, w = {:?}, status {:?}", s.lambda.as_slice(), s.omega.as_slice(), s.status);
    Ok(())
}
