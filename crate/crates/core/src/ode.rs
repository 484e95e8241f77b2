//! Dormand–Prince 5(4) with dense output and sign-change event location.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 4],
}

impl<const N: usize> Step<N> {
    /// Fourth-order interpolant on `[t0, t1]`.
    pub fn at(&self, t: f64) -> [f64; N] {
        if t == self.t1 {
            return self.y1;
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        std::array::from_fn(|i| {
            let [r2, r3, r4, r5] = [
                self.cont[0][i],
                self.cont[1][i],
                self.cont[2][i],
                self.cont[3][i],
            ];
            self.y0[i] + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub tol: Tolerances,
    pub accepted: usize,
    pub rejected: usize,
    h: f64,
    k1: Option<[f64; N]>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl<const N: usize> Dopri5<N> {
    pub fn new(t0: f64, y0: [f64; N], tol: Tolerances) -> Self {
        Dopri5 {
            t: t0,
            y: y0,
            tol,
            accepted: 0,
            rejected: 0,
            h: 0.0,
            k1: None,
        }
    }

    /// Move to a new state (after an event), keeping the step-size estimate.
    pub fn reset(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
        self.k1 = None;
    }

    fn norm(&self, v: &[f64; N], scale_a: &[f64; N], scale_b: &[f64; N]) -> f64 {
        let s: f64 = (0..N)
            .map(|i| {
                let sk = self.tol.abs + self.tol.rel * scale_a[i].abs().max(scale_b[i].abs());
                (v[i] / sk).powi(2)
            })
            .sum();
        (s / N as f64).sqrt()
    }

    fn initial_step<F>(&self, f: &mut F, k1: &[f64; N]) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let d0 = self.norm(&self.y, &self.y, &self.y);
        let d1 = self.norm(k1, &self.y, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = axpy(&self.y, h0, &[(1.0, k1)]);
        let k2 = f(self.t + h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
        let d2 = self.norm(&diff, &self.y, &self.y) / h0;
        let m = d1.max(d2);
        let h1 = if m <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / m).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Take one accepted step not going past `t_limit` and no longer than `max_step`.
    pub fn step<F>(&mut self, f: &mut F, t_limit: f64, max_step: f64) -> Result<Step<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let k1 = match self.k1 {
            Some(k) => k,
            None => f(self.t, &self.y),
        };
        let span = t_limit - self.t;
        if span <= 0.0 {
            return Err(Error::InvalidArgument(
                "step requested past the time limit".into(),
            ));
        }
        if span < 1e-12 * self.t.abs().max(1.0) {
            // A sliver left over after an event: an Euler step is exact to rounding.
            let t0 = self.t;
            let y0 = self.y;
            let y1 = axpy(&y0, span, &[(1.0, &k1)]);
            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y0[i]);
            self.t = t_limit;
            self.y = y1;
            self.k1 = None;
            self.accepted += 1;
            return Ok(Step {
                t0,
                t1: t_limit,
                y0,
                y1,
                cont: [ydiff, [0.0; N], [0.0; N], [0.0; N]],
            });
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(f, &k1).max(1e-10 * self.t.abs().max(1.0));
        }
        let mut h = self.h.min(max_step).min(span);
        let mut last_rejected = false;
        loop {
            if h < 1e-14 * self.t.abs().max(1.0) || !h.is_finite() {
                return Err(Error::StepFailure {
                    t: self.t,
                    state: self.y.to_vec(),
                });
            }
            let t = self.t;
            let y = self.y;
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y1 = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y1);
            let err: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let en = self.norm(&err, &y, &y1);
            if !en.is_finite() {
                self.rejected += 1;
                h *= 0.1;
                last_rejected = true;
                continue;
            }
            let fac = if en == 0.0 {
                10.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 10.0)
            };
            if en <= 1.0 {
                let t1 = if h == span { t_limit } else { t + h };
                let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                let r5: [f64; N] = std::array::from_fn(|i| {
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                });
                let step = Step {
                    t0: t,
                    t1,
                    y0: y,
                    y1,
                    cont: [ydiff, bspl, r4, r5],
                };
                self.t = t1;
                self.y = y1;
                self.k1 = Some(k7);
                self.h = if last_rejected {
                    h * fac.min(1.0)
                } else {
                    h * fac
                };
                self.accepted += 1;
                return Ok(step);
            }
            self.rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
        }
    }
}

/// Root of `g` on `[a, b]` given `g(a) ≥ 0 > g(b)`, by the Illinois variant
/// of regula falsi, to a bracket width of `tol`.
pub fn locate_root<G: FnMut(f64) -> f64>(mut g: G, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut ga = g(a);
    let mut gb = g(b);
    if ga == 0.0 {
        return a;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if gc == 0.0 {
            return c;
        }
        if (gc > 0.0) == (ga > 0.0) {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// First event over `step`: event `k` fires when `g(k, y)` goes from
/// non-negative at the step start to negative at the step end.
/// Returns the event index and its located time.
pub fn first_event<const N: usize, G>(
    step: &Step<N>,
    count: usize,
    g: G,
    tol: f64,
) -> Option<(usize, f64)>
where
    G: Fn(usize, &[f64; N]) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for k in 0..count {
        let g0 = g(k, &step.y0);
        let g1 = g(k, &step.y1);
        if g0 >= 0.0 && g1 < 0.0 {
            let t = locate_root(|t| g(k, &step.at(t)), step.t0, step.t1, tol);
            if best.is_none_or(|(_, tb)| t < tb) {
                best = Some((k, t));
            }
        }
    }
    best
}
