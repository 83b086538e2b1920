//! Globally adaptive 21-point Gauss–Kronrod quadrature for real or complex
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    /// Some panels stopped at the rounding or width floor rather than at tolerance.
    pub floor_limited: bool,
}

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Kronrod estimate with its embedded 10-point Gauss error.
fn gauss_kronrod<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut abs_sum = fc.magnitude() * WGK[10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error, abs_sum * half.abs())
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_panels(f, &[a, b], opts)
}

/// Integrates over consecutive intervals between the sorted `points`.
pub fn integrate_panels<T, F>(mut f: F, points: &[f64], opts: &QuadOptions) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if points.len() < 2 {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
            floor_limited: false,
        });
    }
    let span = (points[points.len() - 1] - points[0]).abs();
    let min_width = span * 1e-13;

    let mut heap = BinaryHeap::new();
    let mut settled_value = T::zero();
    let mut settled_error = 0.0;
    let mut floor_limited = false;
    let mut evaluations = 0;

    let push = |heap: &mut BinaryHeap<Panel<T>>,
                    settled_value: &mut T,
                    settled_error: &mut f64,
                    floor_limited: &mut bool,
                    f: &mut F,
                    a: f64,
                    b: f64| {
        let (value, error, abs_int) = gauss_kronrod(f, a, b);
        let roundoff = 50.0 * f64::EPSILON * abs_int;
        if (b - a).abs() <= min_width || (error <= roundoff && error > 0.0) {
            *settled_value = *settled_value + value;
            *settled_error += error;
            *floor_limited = true;
        } else {
            heap.push(Panel { a, b, value, error });
        }
    };

    for w in points.windows(2) {
        if w[1] != w[0] {
            push(&mut heap, &mut settled_value, &mut settled_error, &mut floor_limited, &mut f, w[0], w[1]);
            evaluations += 21;
        }
    }

    let mut subdivisions = 0;
    loop {
        let (value, error) = heap.iter().fold((settled_value, settled_error), |(v, e), p| {
            (v + p.value, e + p.error)
        });
        let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
        if error <= target || heap.is_empty() {
            if error > target && !floor_limited {
                return Err(Error::IntegrationFailure {
                    estimate: error,
                    tolerance: target,
                });
            }
            return Ok(Estimate {
                value,
                error,
                evaluations,
                floor_limited,
            });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::IntegrationFailure {
                estimate: error,
                tolerance: target,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        push(&mut heap, &mut settled_value, &mut settled_error, &mut floor_limited, &mut f, worst.a, mid);
        push(&mut heap, &mut settled_value, &mut settled_error, &mut floor_limited, &mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
    }
}
