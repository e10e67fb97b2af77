//! Adaptive Dormand-Prince 5(4) integration for planar systems, used by the
//! phase-plane shooting solver.

pub type State = [f64; 2];

/// One accepted step, with endpoint derivatives for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub x0: f64,
    pub y0: State,
    pub f0: State,
    pub x1: f64,
    pub y1: State,
    pub f1: State,
}

impl Step {
    /// Cubic Hermite evaluation inside the step.
    pub fn eval(&self, x: f64) -> State {
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_step: 1.0,
            initial_step: 1e-3,
        }
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = rhs(x, y)` from `x0` to at most `x_end`, invoking
/// `on_step` after every accepted step. Returns the final `(x, y)`.
pub fn integrate(
    rhs: impl Fn(f64, State) -> State,
    mut x: f64,
    mut y: State,
    x_end: f64,
    opts: &OdeOptions,
    mut on_step: impl FnMut(&Step) -> Control,
) -> (f64, State) {
    let mut h = opts.initial_step.min(opts.max_step);
    let mut f0 = rhs(x, y);
    let mut k = [[0.0f64; 2]; 7];
    while x < x_end {
        h = h.min(x_end - x).min(opts.max_step);
        k[0] = f0;
        let lin = |y: State, coeffs: &[f64], k: &[[f64; 2]; 7], h: f64| -> State {
            let mut out = y;
            for (j, &c) in coeffs.iter().enumerate() {
                out[0] += h * c * k[j][0];
                out[1] += h * c * k[j][1];
            }
            out
        };
        k[1] = rhs(x + h / 5.0, lin(y, &A2, &k, h));
        k[2] = rhs(x + 3.0 * h / 10.0, lin(y, &A3, &k, h));
        k[3] = rhs(x + 4.0 * h / 5.0, lin(y, &A4, &k, h));
        k[4] = rhs(x + 8.0 * h / 9.0, lin(y, &A5, &k, h));
        k[5] = rhs(x + h, lin(y, &A6, &k, h));
        let y5 = lin(y, &B5, &k, h);
        k[6] = rhs(x + h, y5);
        let y4 = lin(y, &B4, &k, h);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max(((y5[i] - y4[i]) / sc).abs());
        }
        if err <= 1.0 || h <= 1e-12 {
            let step = Step {
                x0: x,
                y0: y,
                f0,
                x1: x + h,
                y1: y5,
                f1: k[6],
            };
            x += h;
            y = y5;
            f0 = k[6]; // FSAL
            if matches!(on_step(&step), Control::Stop) {
                return (x, y);
            }
        }
        let fac = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= fac;
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = -y, exact period 2 pi
        let rhs = |_x: f64, y: State| [y[1], -y[0]];
        let (x, y) = integrate(
            rhs,
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &OdeOptions::default(),
            |_| Control::Continue,
        );
        assert!((x - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((y[0] - 1.0).abs() < 1e-9, "y0 = {}", y[0]);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn hermite_dense_output() {
        let rhs = |x: f64, _y: State| [x.cos(), -x.sin()];
        let mut worst: f64 = 0.0;
        integrate(
            rhs,
            0.0,
            [0.0, 1.0],
            3.0,
            &OdeOptions {
                max_step: 0.3,
                ..OdeOptions::default()
            },
            |s| {
                let xm = 0.5 * (s.x0 + s.x1);
                let y = s.eval(xm);
                worst = worst.max((y[0] - xm.sin()).abs());
                Control::Continue
            },
        );
        assert!(worst < 1e-7, "hermite error {worst}");
    }
}
