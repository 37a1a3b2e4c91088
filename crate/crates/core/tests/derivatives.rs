mod common;

use common::*;
use reeb_eh::scalar::rat;
use reeb_eh::ReebCalculus;

#[test]
fn gradient_and_hessian_match_central_differences() {
    let cases = derivative_cases(2024);
    assert!(cases.len() >= 20);
    for (name, p, chi) in &cases {
        let calc = ReebCalculus::new(p.clone());
        let fd = fd_check(&calc, chi, rat(1, 100_000));
        assert!(fd.euler_exact, "{name} at {chi}");
        assert!(fd.grad_rel <= 1e-6, "{name} at {chi}: gradient rel err {:e}", fd.grad_rel);
        assert!(fd.hess_rel <= 1e-6, "{name} at {chi}: hessian rel err {:e}", fd.hess_rel);
    }
}

#[test]
fn three_dimensional_derivatives() {
    let mut r = rng(5);
    for p in [cube(&[1, 2, 1]), prism(2)] {
        let calc = ReebCalculus::new(p.clone());
        for _ in 0..3 {
            let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
            let fd = fd_check(&calc, &chi, rat(1, 100_000));
            assert!(fd.euler_exact);
            assert!(fd.grad_rel <= 1e-6 && fd.hess_rel <= 1e-6, "{chi}: {:e} {:e}", fd.grad_rel, fd.hess_rel);
        }
    }
}

#[test]
fn futaki_pairing_is_directional_derivative() {
    let mut r = rng(11);
    let p = random_hirzebruch(&mut r);
    let calc = ReebCalculus::new(p.clone());
    let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
    let zeta = in_cone_point(&p, &mut r, 3, rat(-1, 3));
    let f = calc.futaki(&chi, &zeta).unwrap();
    let g = calc.derivatives(&chi).unwrap().eh_gradient();
    let dir: f64 = g.iter().zip(zeta.to_f64()).map(|(a, b)| a * b).sum();
    assert!((f.value - dir).abs() <= 1e-12 * dir.abs().max(1.0), "{} vs {dir}", f.value);
}
