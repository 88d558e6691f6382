use hoairy::fredholm::{Fredholm, DEFAULT_M_X, DEFAULT_M_Y, DEFAULT_M_Z, DEFAULT_SIGMA_M_Z, DEFAULT_STEP_M};
use hoairy::weights::{make_fermi, make_smoothed_step};

#[test]
fn routes_agree_and_refine() {
    let w = make_fermi(1.0).unwrap();
    for n in 1..=2 {
        let f = Fredholm::new(n).unwrap();
        for t in [-1.0, 0.0, 1.0] {
            for lambda in [0.5, 1.0] {
                let h = f.det_halfline(t, lambda, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap().det;
                let h2 = f.det_halfline(t, lambda, &w, 2 * DEFAULT_M_X, 2 * DEFAULT_M_Z).unwrap().det;
                let s = f.det_sigma(t, lambda, &w, DEFAULT_SIGMA_M_Z, DEFAULT_M_Y).unwrap().det;
                let s2 = f.det_sigma(t, lambda, &w, 2 * DEFAULT_SIGMA_M_Z, 2 * DEFAULT_M_Y).unwrap().det;
                println!("n={n} t={t} l={lambda} h={h:.15} dh={:.1e} ds={:.1e} h-s={:.1e}", h2 - h, s2 - s, h - s);
                assert!((h - s).abs() < 1e-8 && (h2 - h).abs() < 1e-8 && (s2 - s).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn steep_fermi_approaches_step() {
    let f = Fredholm::new(1).unwrap();
    let w = make_smoothed_step(200.0).unwrap();
    for t in [-2.0, 0.0, 2.0] {
        let s = f.det_step(t, 1.0, DEFAULT_STEP_M).unwrap().det;
        let h = f.det_halfline(t, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap().det;
        println!("t={t} step={s:.12} steep={h:.12} diff={:.2e}", h - s);
        assert!((h - s).abs() < 1e-3);
    }
}
