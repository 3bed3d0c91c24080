use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 4.0;

/// Sine integral Si(y) = int_0^y sin(s)/s ds.
///
/// Power series on |y| <= 4. Beyond that, Si = pi/2 + Im(e^{-it} E1(it)),
/// with E1 from its continued fraction evaluated by the modified Lentz
/// method.
pub fn sine_integral(y: f64) -> f64 {
    let t = y.abs();
    let v = if t <= SERIES_LIMIT { series(t) } else { continued_fraction(t) };
    v.copysign(y)
}

fn series(t: f64) -> f64 {
    let t2 = t * t;
    let mut term = t;
    let mut sum = t;
    let mut k = 1.0;
    loop {
        term *= -t2 / ((2.0 * k) * (2.0 * k + 1.0));
        let c = term / (2.0 * k + 1.0);
        sum += c;
        if c.abs() < 1e-17 * sum.abs().max(1e-300) {
            return sum;
        }
        k += 1.0;
    }
}

fn continued_fraction(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, t);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..1000 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let e = Complex64::new(t.cos(), -t.sin()) * h;
    FRAC_PI_2 + e.im
}
