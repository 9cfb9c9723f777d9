//! Adaptive Gauss–Kronrod integration and Gauss–Hermite rules.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Integral<F> {
    pub value: F,
    pub error: F,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<F> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_intervals: usize,
}

impl<F: Real> Default for AdaptiveOptions<F> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-8),
            abs_tol: lit(1e-14),
            max_intervals: 2000,
        }
    }
}

fn gk15<F: Real, G: FnMut(F) -> F>(f: &mut G, a: F, b: F) -> (F, F) {
    let half = lit::<F>(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * lit(x);
        let s = f(c - dx) + f(c + dx);
        kronrod = kronrod + s * lit(w);
        if j % 2 == 1 {
            gauss = gauss + s * lit(WG[j / 2]);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest
/// error estimate until the total estimate meets the tolerance.
pub fn integrate<F, G>(mut f: G, a: F, b: F, opts: AdaptiveOptions<F>) -> Result<Integral<F>>
where
    F: Real,
    G: FnMut(F) -> F,
{
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let value: F = pieces.iter().map(|p| p.2).sum();
        let error: F = pieces.iter().map(|p| p.3).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                intervals: pieces.len(),
            });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: to_f64(error),
                intervals: pieces.len(),
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = lit::<F>(0.5) * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Gauss–Hermite rule for weight `exp(-x²)`: returns `(nodes, weights)`.
///
/// Roots are found by Newton iteration on the orthonormal Hermite recurrence,
/// seeded with the usual asymptotic guesses.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
