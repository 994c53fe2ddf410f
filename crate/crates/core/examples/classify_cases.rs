//! Case labels for a few `(N, p, q)`.

use semilinear_lab::data::classify_case;

fn main() -> semilinear_lab::Result<()> {
    for (n, p, q) in [(2, 2.0, 3.0), (2, 1.5, 4.0), (1, 3.0, 3.0), (1, 1.2, 4.0), (2, 1.0, 2.0), (1, 1.2, 2.0)] {
        let l = classify_case(n, p, q)?;
        println!("N={n} p={p} q={q}: case {} ((q+1)/(pq-1) = {:.4}, N/2 = {}, 1+2/N = {:.4})", l.case, l.ratio, l.half_dim, l.fujita);
    }
    match classify_case(1, 0.5, 1.0) {
        Err(e) => println!("N=1 p=0.5 q=1: {e}"),
        Ok(l) => println!("unexpected case {}", l.case),
    }
    Ok(())
}
