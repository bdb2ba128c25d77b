use gelfand_core::Complex64;

/// `min_t max(|α₁ + β₁t|, |α₂ + β₂t|)` by coarse-to-fine grid search over the
/// complex line `{c : v₀·c = 1}` of a two-column family.
pub fn grid_minimax(v: &[Vec<Complex64>]) -> f64 {
    let norm0 = v[0][0].norm_sqr() + v[0][1].norm_sqr();
    let c0 = [v[0][0].conj() / norm0, v[0][1].conj() / norm0];
    let n = [v[0][1], -v[0][0]];
    let alpha: Vec<Complex64> = v[1..].iter().map(|r| r[0] * c0[0] + r[1] * c0[1]).collect();
    let beta: Vec<Complex64> = v[1..].iter().map(|r| r[0] * n[0] + r[1] * n[1]).collect();
    let f = |t: Complex64| alpha.iter().zip(&beta).map(|(a, b)| (a + b * t).norm()).fold(0.0, f64::max);

    let bmax = beta.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let amax = alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if bmax < 1e-14 {
        return f(Complex64::new(0.0, 0.0));
    }
    // any t with f(t) ≤ f(0) has |t| ≤ (f(0) + max|α|) / max|β|
    let mut half = (f(Complex64::new(0.0, 0.0)) + amax) / bmax;
    let mut centre = Complex64::new(0.0, 0.0);
    let mut best = f(centre);
    const STEPS: i32 = 40;
    for _ in 0..80 {
        let h = half / STEPS as f64;
        let mut next = centre;
        for a in -STEPS..=STEPS {
            for b in -STEPS..=STEPS {
                let t = centre + Complex64::new(a as f64 * h, b as f64 * h);
                let val = f(t);
                if val < best {
                    best = val;
                    next = t;
                }
            }
        }
        centre = next;
        half = 8.0 * h;
    }
    best
}
