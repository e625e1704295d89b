#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use kitaev_potts::gme::{ConfigClassState, ProductAnsatz};

/// Coarse grid over the four angles, then repeated zooms around the best
/// point. Independent of the Nelder-Mead path used by the library.
pub fn grid_search_gme(state: &ConfigClassState) -> f64 {
    let f = |p: [f64; 4]| state.overlap(&ProductAnsatz::new(p[0], p[1], p[2], p[3])).norm_sqr();
    let mut centre = [FRAC_PI_2 / 2.0, FRAC_PI_2 / 2.0, PI, PI];
    let mut half = [FRAC_PI_2 / 2.0, FRAC_PI_2 / 2.0, PI, PI];
    let mut best = (f(centre), centre);
    for round in 0..60 {
        let k = if round == 0 { 16 } else { 7 };
        let axis = |d: usize, i: usize| centre[d] - half[d] + 2.0 * half[d] * i as f64 / (k - 1) as f64;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for e in 0..k {
                        let p = [axis(0, a), axis(1, b), axis(2, c), axis(3, e)];
                        let v = f(p);
                        if v > best.0 {
                            best = (v, p);
                        }
                    }
                }
            }
        }
        centre = best.1;
        let shrink = if round == 0 { 2.0 / (k - 1) as f64 } else { 0.6 };
        half = half.map(|h| h * shrink);
    }
    -best.0.log2()
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.abs().ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}
