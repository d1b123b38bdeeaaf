//! Boosting a plane wave symbolically: the result is again a free solution.

use schro::gauge::{covariance_defect, phase_f_expr, push_forward_expr, schrodinger_operator, GaugeMap, PhysicalConstants};
use schro::symexpr::{compare, parse, Expr};

fn main() -> schro::Result<()> {
    let consts = PhysicalConstants::new(1.0, 1.0)?;
    let v = [0.75];
    let psi = parse("exp(i*2*y1 - i*2*t)")?;

    let moved = push_forward_expr(&GaugeMap::boost(v.to_vec(), consts), &psi)?;
    println!("psi      = {psi}");
    println!("boosted  = {moved}");

    let s0 = schrodinger_operator(&moved, None, 1, &consts);
    println!("S0 boosted: max |.| = {:.2e}", compare(&s0, &Expr::zero(), 1e-9)?.max_dev);

    let f = phase_f_expr(&v, &consts);
    let defect = covariance_defect(&f, &parse("y1^2")?, &v, &consts)?;
    println!("F = {f}");
    println!("covariance defect on y1^2: {:.2e}", compare(&defect, &Expr::zero(), 1e-9)?.max_dev);
    Ok(())
}
