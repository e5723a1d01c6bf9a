//! Contour placement, truncation and trapezoidal integration.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

use super::kernel::{log_gamma_term, log_linear_term, Constraint, MellinKernel};
use super::{ContourSpec, MbEstimate, MellinError, Refinement};

/// Drop in log-magnitude (nats) below the peak at which the contour is cut;
/// e^-37 is just under 1e-16.
const TRUNCATION_DROP: f64 = 37.0;
/// Looser drop required on the boundary of a two-dimensional grid.
const RING_DROP: f64 = 30.0;
const SCAN_STEP: f64 = 0.25;
const MAX_HEIGHT: f64 = 5000.0;
const INITIAL_STEP: f64 = 0.5;
const MAX_NODES_PER_PASS: usize = 60_000_000;
/// Relative accuracy of a single integrand value, limited by log-gamma.
const ROUNDING_FLOOR: f64 = 1e-13;
/// Abscissa search is confined to this distance from a finite strip edge.
const SEARCH_SPAN: f64 = 120.0;
/// Pole clearances tried, in order, by the automatic abscissa search before
/// falling back to the caller's margin. The trapezoid error decays like
/// `exp(-2π d / h)` in the clearance `d`, so a contour that hugs a pole costs
/// far more nodes than the small gain in integrand magnitude is worth.
const PREFERRED_CLEARANCE: [f64; 2] = [0.3, 0.15];

fn search_margins(margin: f64) -> impl Iterator<Item = f64> {
    PREFERRED_CLEARANCE
        .into_iter()
        .filter(move |&c| c > margin)
        .chain(std::iter::once(margin))
}

/// Evaluates `(1/2πi) ∮ kernel(s) ds` along `Re s = c`.
pub fn eval_kernel_1d(kernel: &MellinKernel, contour: &ContourSpec) -> Result<MbEstimate, MellinError> {
    if kernel.is_bivariate() {
        return Err(MellinError::Domain(
            "kernel depends on a second contour variable".into(),
        ));
    }
    let Some(constant) = kernel.constant_log()? else {
        return Ok(zero_estimate(1));
    };
    check_decay(kernel)?;
    let sigma = resolve_abscissa_1d(kernel, contour)?;
    let height = match contour.half_height {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(MellinError::Domain(format!("half height must be positive, got {t}"))),
        None => scan_height(|y| kernel.log_variable(Complex64::new(sigma, y), Complex64::default()).re)?,
    };
    let grid = Grid {
        kernel,
        constant,
        sigma,
        tau: f64::NAN,
        height: [height, 0.0],
    };
    let est = refine(&grid, [contour.refinement, Refinement::Nodes(1)], contour.abs_tol, false)?;
    finish(est)
}

/// Evaluates `(1/2πi)² ∮∮ kernel(s, ζ) ds dζ` on the tensor grid of two
/// vertical contours.
pub fn eval_kernel_2d(
    kernel: &MellinKernel,
    contour_s: &ContourSpec,
    contour_z: &ContourSpec,
) -> Result<MbEstimate, MellinError> {
    let Some(constant) = kernel.constant_log()? else {
        return Ok(zero_estimate(2));
    };
    check_decay(kernel)?;
    let (sigma, tau) = resolve_abscissae_2d(kernel, contour_s, contour_z)?;
    let mut height = [0.0; 2];
    for (axis, spec) in [contour_s, contour_z].into_iter().enumerate() {
        height[axis] = match spec.half_height {
            Some(t) if t > 0.0 => t,
            Some(t) => {
                return Err(MellinError::Domain(format!("half height must be positive, got {t}")))
            }
            None => scan_height(|y| {
                let (ys, yz) = if axis == 0 { (y, 0.0) } else { (0.0, y) };
                kernel
                    .log_variable(Complex64::new(sigma, ys), Complex64::new(tau, yz))
                    .re
            })?,
        };
    }
    let grow = [contour_s.half_height.is_none(), contour_z.half_height.is_none()];
    let mut grid = Grid {
        kernel,
        constant,
        sigma,
        tau,
        height,
    };
    // Axis scans can miss off-axis ridges, so the grid boundary is checked
    // and the box enlarged until the ring is negligible.
    for _ in 0..8 {
        let ring = grid.ring_drop([INITIAL_STEP, INITIAL_STEP]);
        let mut grown = false;
        for axis in 0..2 {
            if ring[axis] < RING_DROP {
                if !grow[axis] {
                    return Err(MellinError::NoDecay(format!(
                        "integrand on the edge of axis {axis} is only {:.1} nats below its peak",
                        ring[axis]
                    )));
                }
                grid.height[axis] *= 1.5;
                grown = true;
            }
        }
        if !grown {
            let est = refine(
                &grid,
                [contour_s.refinement, contour_z.refinement],
                contour_s.abs_tol.max(contour_z.abs_tol),
                true,
            )?;
            return finish(est);
        }
        if grid.height[0].max(grid.height[1]) > MAX_HEIGHT {
            break;
        }
    }
    Err(MellinError::NoDecay(
        "two-dimensional integrand still significant on the grid boundary".into(),
    ))
}

/// Writes integrand samples on the resolved contour(s) to CSV with columns
/// `im_s, im_zeta, re_integrand, im_integrand`.
pub fn dump_integrand_csv<W: Write>(
    kernel: &MellinKernel,
    contour_s: &ContourSpec,
    contour_z: Option<&ContourSpec>,
    step: f64,
    writer: W,
) -> Result<(), MellinError> {
    if !(step > 0.0) {
        return Err(MellinError::Domain(format!("dump step must be positive, got {step}")));
    }
    let dump_err = |e: csv::Error| MellinError::Dump(e.to_string());
    let constant = kernel.constant_log()?.unwrap_or(Complex64::new(f64::NEG_INFINITY, 0.0));
    let (sigma, tau, hs, hz) = match contour_z {
        None => {
            let sigma = resolve_abscissa_1d(kernel, contour_s)?;
            let t = contour_s.half_height.map_or_else(
                || scan_height(|y| kernel.log_variable(Complex64::new(sigma, y), Complex64::default()).re),
                Ok,
            )?;
            (sigma, 0.0, t, 0.0)
        }
        Some(cz) => {
            let (sigma, tau) = resolve_abscissae_2d(kernel, contour_s, cz)?;
            let ts = contour_s.half_height.map_or_else(
                || {
                    scan_height(|y| {
                        kernel.log_variable(Complex64::new(sigma, y), Complex64::new(tau, 0.0)).re
                    })
                },
                Ok,
            )?;
            let tz = cz.half_height.map_or_else(
                || {
                    scan_height(|y| {
                        kernel.log_variable(Complex64::new(sigma, 0.0), Complex64::new(tau, y)).re
                    })
                },
                Ok,
            )?;
            (sigma, tau, ts, tz)
        }
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["im_s", "im_zeta", "re_integrand", "im_integrand"])
        .map_err(dump_err)?;
    let ns = (hs / step).ceil() as i64;
    let nz = (hz / step).ceil() as i64;
    for i in -ns..=ns {
        for j in -nz..=nz {
            let (ys, yz) = (i as f64 * step, j as f64 * step);
            let s = Complex64::new(sigma, ys);
            let z = Complex64::new(tau, yz);
            let f = integrand(kernel, constant, s, z);
            w.write_record([
                format!("{ys:.6}"),
                format!("{yz:.6}"),
                format!("{:.17e}", f.re),
                format!("{:.17e}", f.im),
            ])
            .map_err(dump_err)?;
        }
    }
    w.flush().map_err(|e| MellinError::Dump(e.to_string()))
}

/// Automatically chosen abscissae and the log of the peak integrand
/// magnitude near the real axis there, prefactor included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub abscissa: [f64; 2],
    pub log_peak: f64,
}

/// Where the engine would place the contour(s) for `kernel`, and how large
/// the integrand is there. Comparing `log_peak` across equivalent
/// representations of one quantity tells which suffers least cancellation.
pub fn auto_placement(kernel: &MellinKernel, pole_margin: f64) -> Result<Placement, MellinError> {
    let Some(constant) = kernel.constant_log()? else {
        return Ok(Placement {
            abscissa: [f64::NAN, f64::NAN],
            log_peak: f64::NEG_INFINITY,
        });
    };
    let spec = ContourSpec {
        pole_margin,
        ..ContourSpec::default()
    };
    let (sigma, tau, bivariate) = if kernel.is_bivariate() {
        let (s, t) = resolve_abscissae_2d(kernel, &spec, &spec)?;
        (s, t, true)
    } else {
        (resolve_abscissa_1d(kernel, &spec)?, f64::NAN, false)
    };
    let tau_eval = if bivariate { tau } else { 0.0 };
    Ok(Placement {
        abscissa: [sigma, tau],
        log_peak: proxy(kernel, sigma, tau_eval, bivariate) + constant.re + kernel.prefactor.abs().ln(),
    })
}

fn zero_estimate(_dims: usize) -> MbEstimate {
    MbEstimate {
        value: 0.0,
        error: 0.0,
        imag: 0.0,
        l1: 0.0,
        abscissa: [f64::NAN; 2],
        half_height: [0.0, 0.0],
        step: [0.0, 0.0],
        nodes: 0,
    }
}

fn check_decay(kernel: &MellinKernel) -> Result<(), MellinError> {
    let rate = kernel.min_decay_rate();
    if rate <= 1e-12 {
        return Err(MellinError::NoDecay(format!(
            "gamma balance gives exponential decay rate {rate:.3e} along some direction"
        )));
    }
    Ok(())
}

fn integrand(kernel: &MellinKernel, constant: Complex64, s: Complex64, z: Complex64) -> Complex64 {
    let l = constant + kernel.log_variable(s, z);
    if l.re == f64::NEG_INFINITY {
        return Complex64::default();
    }
    l.exp() * kernel.prefactor * kernel.weight_at(s, z)
}

// ---------------------------------------------------------------------------
// Abscissa selection

fn interval_on_axis(
    constraints: &[Constraint],
    axis: usize,
    other: f64,
    margin: f64,
) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for c in constraints {
        let lo_c = c.lo + margin;
        let hi_c = c.hi - margin;
        let (coef, other_coef) = if axis == 0 { (c.a, c.b) } else { (c.b, c.a) };
        if coef == 0.0 && other_coef == 0.0 {
            continue;
        }
        if lo_c >= hi_c {
            return None;
        }
        let rest = c.c + other_coef * other;
        if coef == 0.0 {
            if !(rest > lo_c && rest < hi_c) {
                return None;
            }
            continue;
        }
        let (x, y) = ((lo_c - rest) / coef, (hi_c - rest) / coef);
        let (l, h) = if coef > 0.0 { (x, y) } else { (y, x) };
        lo = lo.max(l);
        hi = hi.min(h);
    }
    (lo < hi).then_some((lo, hi))
}

fn clamp_interval((lo, hi): (f64, f64)) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + SEARCH_SPAN),
        (false, true) => (hi - SEARCH_SPAN, hi),
        (false, false) => (-SEARCH_SPAN / 2.0, SEARCH_SPAN / 2.0),
    }
}

/// Log-magnitude proxy for how large the integrand is near the real axis;
/// a few heights are probed so that zeros of denominator gammas on the real
/// axis do not masquerade as small integrands.
fn proxy(kernel: &MellinKernel, sigma: f64, tau: f64, bivariate: bool) -> f64 {
    const HEIGHTS: [f64; 2] = [0.0, 0.75];
    let mut best = f64::NEG_INFINITY;
    for &ys in &HEIGHTS {
        for &yz in if bivariate { &HEIGHTS[..] } else { &HEIGHTS[..1] } {
            let v = kernel
                .log_variable(Complex64::new(sigma, ys), Complex64::new(tau, yz))
                .re;
            if v.is_nan() {
                return f64::INFINITY;
            }
            best = best.max(v);
        }
    }
    best
}

fn validate_point(
    kernel: &MellinKernel,
    sigma: f64,
    tau: f64,
    margin: f64,
) -> Result<(), MellinError> {
    let (distance, term) = kernel.pole_distance(sigma, tau);
    if distance < margin {
        return Err(MellinError::PoleOnContour {
            term,
            distance,
            margin,
        });
    }
    Ok(())
}

fn minimize_on_interval(f: impl Fn(f64) -> f64, (lo, hi): (f64, f64)) -> f64 {
    const SAMPLES: usize = 256;
    let step = (hi - lo) / SAMPLES as f64;
    let pts: Vec<f64> = (0..=SAMPLES)
        .map(|i| (lo + (i as f64) * step).clamp(lo, hi))
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    let (imin, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut a = pts[imin.saturating_sub(1)];
    let mut b = pts[(imin + 1).min(SAMPLES)];
    // Golden-section refinement inside the bracketing cells.
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if (b - a).abs() < 1e-6 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let best = 0.5 * (a + b);
    if f(best) <= vals[imin] {
        best
    } else {
        pts[imin]
    }
}

fn resolve_abscissa_1d(kernel: &MellinKernel, spec: &ContourSpec) -> Result<f64, MellinError> {
    let margin = spec.pole_margin;
    if let Some(c) = spec.abscissa {
        validate_point(kernel, c, 0.0, margin)?;
        return Ok(c);
    }
    let constraints = kernel.constraints();
    let strip = search_margins(margin)
        .find_map(|m| interval_on_axis(&constraints, 0, 0.0, m))
        .ok_or_else(|| {
            MellinError::ContourInfeasible("no vertical strip separates the pole sets".into())
        })?;
    let best = minimize_on_interval(|x| proxy(kernel, x, 0.0, false), clamp_interval(strip));
    validate_point(kernel, best, 0.0, margin)?;
    Ok(best)
}

fn resolve_abscissae_2d(
    kernel: &MellinKernel,
    spec_s: &ContourSpec,
    spec_z: &ContourSpec,
) -> Result<(f64, f64), MellinError> {
    let margin = spec_s.pole_margin.max(spec_z.pole_margin);
    let constraints = kernel.constraints();
    let infeasible = || MellinError::ContourInfeasible("no pair of abscissae separates the pole sets".into());
    let f = |s: f64, t: f64| proxy(kernel, s, t, true);
    let (sigma, tau) = match (spec_s.abscissa, spec_z.abscissa) {
        (Some(s), Some(t)) => (s, t),
        (Some(s), None) => {
            let iv = search_margins(margin)
                .find_map(|m| interval_on_axis(&constraints, 1, s, m))
                .ok_or_else(infeasible)?;
            (s, minimize_on_interval(|t| f(s, t), clamp_interval(iv)))
        }
        (None, Some(t)) => {
            let iv = search_margins(margin)
                .find_map(|m| interval_on_axis(&constraints, 0, t, m))
                .ok_or_else(infeasible)?;
            (minimize_on_interval(|s| f(s, t), clamp_interval(iv)), t)
        }
        (None, None) => search_margins(margin)
            .find_map(|m| auto_place_2d(kernel, &constraints, m))
            .ok_or_else(infeasible)?,
    };
    validate_point(kernel, sigma, tau, margin)?;
    Ok((sigma, tau))
}

fn auto_place_2d(
    kernel: &MellinKernel,
    constraints: &[Constraint],
    margin: f64,
) -> Option<(f64, f64)> {
    const COARSE: usize = 48;
    let f = |s: f64, t: f64| proxy(kernel, s, t, true);
    let tau_range = clamp_interval(kernel.tau_interval(margin)?);
    let dt = (tau_range.1 - tau_range.0) / COARSE as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut cell = (dt, dt);
    for i in 0..COARSE {
        let tau = tau_range.0 + (i as f64 + 0.5) * dt;
        let Some(iv) = interval_on_axis(constraints, 0, tau, margin) else {
            continue;
        };
        let (lo, hi) = clamp_interval(iv);
        let ds = (hi - lo) / COARSE as f64;
        for j in 0..COARSE {
            let sigma = lo + (j as f64 + 0.5) * ds;
            let v = f(sigma, tau);
            if best.is_none_or(|b| v < b.2) {
                best = Some((sigma, tau, v));
                cell = (ds, dt);
            }
        }
    }
    let (mut s, mut t, mut v) = best?;
    // Pattern search, staying inside the admissible region.
    let feasible = |s: f64, t: f64| kernel.pole_distance(s, t).0 >= margin;
    let (mut hs, mut ht) = (cell.0 / 2.0, cell.1 / 2.0);
    while hs.max(ht) > 1e-4 {
        let mut moved = false;
        for (ds, dt) in [(hs, 0.0), (-hs, 0.0), (0.0, ht), (0.0, -ht)] {
            let (s2, t2) = (s + ds, t + dt);
            if !feasible(s2, t2) {
                continue;
            }
            let v2 = f(s2, t2);
            if v2 < v {
                (s, t, v) = (s2, t2, v2);
                moved = true;
                break;
            }
        }
        if !moved {
            hs /= 2.0;
            ht /= 2.0;
        }
    }
    Some((s, t))
}

// ---------------------------------------------------------------------------
// Truncation

fn scan_height(log_mag: impl Fn(f64) -> f64) -> Result<f64, MellinError> {
    let mut peak = log_mag(0.0);
    let mut below = 0;
    let mut y = 0.0;
    while y < MAX_HEIGHT {
        y += SCAN_STEP;
        let v = log_mag(y);
        if v.is_nan() {
            return Err(MellinError::NoDecay(format!("integrand undefined at height {y}")));
        }
        if v > peak {
            peak = v;
            below = 0;
        } else if v < peak - TRUNCATION_DROP {
            below += 1;
            if below >= 4 && y >= 1.0 {
                return Ok(y);
            }
        } else {
            below = 0;
        }
    }
    Err(MellinError::NoDecay(format!(
        "integrand still within {TRUNCATION_DROP} nats of its peak at height {MAX_HEIGHT}"
    )))
}

// ---------------------------------------------------------------------------
// Trapezoidal passes

struct Grid<'a> {
    kernel: &'a MellinKernel,
    constant: Complex64,
    sigma: f64,
    tau: f64,
    height: [f64; 2],
}

#[derive(Default, Clone, Copy)]
struct PassSums {
    full: Complex64,
    coarse: Complex64,
    l1: f64,
}

/// Splits the kernel into s-only, ζ-only and joint pieces so the tensor
/// grid costs one evaluation per node for the joint terms only.
struct Split {
    s_only: Vec<usize>,
    z_only: Vec<usize>,
    joint: Vec<usize>,
    lin_s: Vec<usize>,
    lin_z: Vec<usize>,
    lin_joint: Vec<usize>,
}

impl Split {
    fn new(k: &MellinKernel) -> Self {
        let mut sp = Split {
            s_only: vec![],
            z_only: vec![],
            joint: vec![],
            lin_s: vec![],
            lin_z: vec![],
            lin_joint: vec![],
        };
        for (i, g) in k.gammas.iter().enumerate() {
            match (g.a != 0.0, g.b != 0.0) {
                (true, false) => sp.s_only.push(i),
                (false, true) => sp.z_only.push(i),
                (true, true) => sp.joint.push(i),
                _ => {}
            }
        }
        for (i, l) in k.linears.iter().enumerate() {
            match (l.a != 0.0, l.b != 0.0) {
                (true, false) => sp.lin_s.push(i),
                (false, true) => sp.lin_z.push(i),
                (true, true) => sp.lin_joint.push(i),
                _ => {}
            }
        }
        sp
    }
}

impl Grid<'_> {
    fn axis_logs(&self, split: &Split, axis: usize, n: i64, h: f64) -> Vec<Complex64> {
        let k = self.kernel;
        let zero = Complex64::default();
        (-n..=n)
            .map(|j| {
                let y = j as f64 * h;
                let (s, z) = if axis == 0 {
                    (Complex64::new(self.sigma, y), zero)
                } else {
                    (zero, Complex64::new(self.tau, y))
                };
                let v = if axis == 0 { s } else { z };
                let mut acc = v * k.log_arg[axis];
                let (gs, ls) = if axis == 0 {
                    (&split.s_only, &split.lin_s)
                } else {
                    (&split.z_only, &split.lin_z)
                };
                for &i in gs {
                    acc += log_gamma_term(&k.gammas[i], s, z);
                }
                for &i in ls {
                    acc += log_linear_term(&k.linears[i], s, z);
                }
                acc
            })
            .collect()
    }

    fn nodes(&self, h: [f64; 2], bivariate: bool) -> [i64; 2] {
        let n0 = (self.height[0] / h[0]).ceil() as i64;
        let n1 = if bivariate {
            (self.height[1] / h[1]).ceil() as i64
        } else {
            0
        };
        // Even counts keep the half-resolution subgrid aligned with the ends.
        [n0 + (n0 & 1), n1 + (n1 & 1)]
    }

    fn node_value(
        &self,
        split: &Split,
        ls: Complex64,
        lz: Complex64,
        s: Complex64,
        z: Complex64,
    ) -> Complex64 {
        let k = self.kernel;
        let mut l = self.constant + ls + lz;
        for &i in &split.joint {
            l += log_gamma_term(&k.gammas[i], s, z);
        }
        for &i in &split.lin_joint {
            l += log_linear_term(&k.linears[i], s, z);
        }
        if l.re == f64::NEG_INFINITY {
            return Complex64::default();
        }
        let mut v = l.exp();
        if k.weight.is_some() {
            v *= k.weight_at(s, z);
        }
        v
    }

    /// Trapezoid sums on the grid with steps `h`, together with the sum on
    /// the subgrid of doubled steps.
    fn pass(&self, h: [f64; 2], bivariate: bool) -> Result<PassSums, MellinError> {
        let split = Split::new(self.kernel);
        let [n0, n1] = self.nodes(h, bivariate);
        let total = ((2 * n0 + 1) as usize).saturating_mul((2 * n1 + 1) as usize);
        if total > MAX_NODES_PER_PASS {
            return Err(MellinError::ToleranceNotMet {
                value: f64::NAN,
                error: f64::INFINITY,
            });
        }
        let logs_s = self.axis_logs(&split, 0, n0, h[0]);
        let logs_z = if bivariate {
            self.axis_logs(&split, 1, n1, h[1])
        } else {
            vec![Complex64::default()]
        };
        let tau = if bivariate { self.tau } else { 0.0 };
        let rows: Vec<PassSums> = (0..logs_s.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = PassSums::default();
                let ys = (i as i64 - n0) as f64 * h[0];
                let s = Complex64::new(self.sigma, ys);
                let row_even = (i as i64 - n0) % 2 == 0;
                for (j, &lz) in logs_z.iter().enumerate() {
                    let yz = (j as i64 - n1) as f64 * h[1];
                    let z = Complex64::new(tau, yz);
                    let v = self.node_value(&split, logs_s[i], lz, s, z);
                    acc.full += v;
                    acc.l1 += v.norm();
                    if row_even && (j as i64 - n1) % 2 == 0 {
                        acc.coarse += v;
                    }
                }
                acc
            })
            .collect();
        let mut sums = PassSums::default();
        for r in rows {
            sums.full += r.full;
            sums.coarse += r.coarse;
            sums.l1 += r.l1;
        }
        let weight = if bivariate {
            h[0] * h[1] / (4.0 * PI * PI)
        } else {
            h[0] / (2.0 * PI)
        };
        let coarse_weight = if bivariate { 4.0 * weight } else { 2.0 * weight };
        let pre = self.kernel.prefactor;
        Ok(PassSums {
            full: sums.full * weight * pre,
            coarse: sums.coarse * coarse_weight * pre,
            l1: sums.l1 * weight * pre.abs(),
        })
    }

    /// Nats by which the integrand on the outer rows (axis 0) and columns
    /// (axis 1) of the grid lies below the grid maximum.
    fn ring_drop(&self, h: [f64; 2]) -> [f64; 2] {
        let split = Split::new(self.kernel);
        let [n0, n1] = self.nodes(h, true);
        let logs_s = self.axis_logs(&split, 0, n0, h[0]);
        let logs_z = self.axis_logs(&split, 1, n1, h[1]);
        let rows: Vec<(f64, f64, f64)> = (0..logs_s.len())
            .into_par_iter()
            .map(|i| {
                let ys = (i as i64 - n0) as f64 * h[0];
                let s = Complex64::new(self.sigma, ys);
                let edge_row = i == 0 || i == logs_s.len() - 1;
                let (mut peak, mut row_edge, mut col_edge) =
                    (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (j, &lz) in logs_z.iter().enumerate() {
                    let yz = (j as i64 - n1) as f64 * h[1];
                    let z = Complex64::new(self.tau, yz);
                    let mut l = logs_s[i] + lz;
                    for &t in &split.joint {
                        l += log_gamma_term(&self.kernel.gammas[t], s, z);
                    }
                    for &t in &split.lin_joint {
                        l += log_linear_term(&self.kernel.linears[t], s, z);
                    }
                    peak = peak.max(l.re);
                    if edge_row {
                        row_edge = row_edge.max(l.re);
                    }
                    if j == 0 || j == logs_z.len() - 1 {
                        col_edge = col_edge.max(l.re);
                    }
                }
                (peak, row_edge, col_edge)
            })
            .collect();
        let peak = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let row_edge = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let col_edge = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
        [peak - row_edge, peak - col_edge]
    }
}

fn refine(
    grid: &Grid<'_>,
    modes: [Refinement; 2],
    abs_tol: f64,
    bivariate: bool,
) -> Result<MbEstimate, MellinError> {
    let axes = if bivariate { 2 } else { 1 };
    let mut h = [INITIAL_STEP; 2];
    let mut adaptive = [false; 2];
    let mut rel_tol = f64::INFINITY;
    let mut max_halvings = 0;
    for axis in 0..axes {
        match modes[axis] {
            Refinement::Nodes(n) => {
                if n < 2 {
                    return Err(MellinError::Domain(format!("need at least 2 nodes, got {n}")));
                }
                h[axis] = 2.0 * grid.height[axis] / n as f64;
            }
            Refinement::Adaptive {
                rel_tol: tol,
                max_halvings: m,
            } => {
                adaptive[axis] = true;
                rel_tol = rel_tol.min(tol);
                max_halvings = max_halvings.max(m);
                h[axis] = INITIAL_STEP.min(grid.height[axis] / 4.0);
            }
        }
    }
    let mut level = 0;
    loop {
        let sums = grid.pass(h, bivariate)?;
        let diff = (sums.full.re - sums.coarse.re).abs();
        let floor = ROUNDING_FLOOR * sums.l1;
        let [n0, n1] = grid.nodes(h, bivariate);
        let estimate = MbEstimate {
            value: sums.full.re,
            error: diff + floor,
            imag: sums.full.im,
            l1: sums.l1,
            abscissa: [grid.sigma, grid.tau],
            half_height: [n0 as f64 * h[0], if bivariate { n1 as f64 * h[1] } else { 0.0 }],
            step: [h[0], if bivariate { h[1] } else { 0.0 }],
            nodes: ((2 * n0 + 1) * (2 * n1 + 1)) as usize,
        };
        let any_adaptive = adaptive[..axes].iter().any(|&a| a);
        if !any_adaptive {
            return Ok(estimate);
        }
        if level >= 1 && diff <= (rel_tol * sums.full.re.abs()).max(abs_tol).max(floor) {
            return Ok(estimate);
        }
        if level >= max_halvings {
            return Err(MellinError::ToleranceNotMet {
                value: estimate.value,
                error: estimate.error,
            });
        }
        for axis in 0..axes {
            if adaptive[axis] {
                h[axis] /= 2.0;
            }
        }
        level += 1;
    }
}

fn finish(est: MbEstimate) -> Result<MbEstimate, MellinError> {
    let allowed = 1e-9 * est.value.abs() + 10.0 * est.error;
    if est.imag.abs() > allowed {
        return Err(MellinError::ImaginaryResidue {
            value: est.value,
            imag: est.imag,
        });
    }
    Ok(est)
}
