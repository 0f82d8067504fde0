//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Integrands are complex-valued; real integrals go through [`integrate_real`].
//! The subdivision is global: the interval with the largest error estimate is
//! bisected until the summed estimate meets the tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and work limit for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 4000,
            initial_panels: 8,
        }
    }
}

impl QuadratureOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |f|, used to judge cancellation.
    pub abs_value: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).norm(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Integrates a complex function over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<Quadrature>
where
    F: FnMut(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("quadrature bounds must be finite"));
    }
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            abs_value: 0.0,
            evaluations: 0,
        });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            kronrod(&mut f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * n0;

    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs_value: f64 = panels.iter().map(|p| p.abs_value).sum();
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                abs_value,
                evaluations,
            });
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {error:e} above target {target:e} after {} panels",
                panels.len()
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature("interval underflow".into()));
        }
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
        evaluations += 30;
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|q| q.value.re)
}
