//! Numerical integration of the Painlevé systems along complex paths.
//!
//! Solutions are meromorphic, so the integrator leaves the (x, y) chart when
//! a pole is near and continues in the blow-up chart whose exceptional
//! coordinate w vanishes there. Poles are the zeros of w, refined by Newton
//! iteration off the path.

use crate::algebra::{q_to_f64, Coeff, Poly, Var, Q};
use crate::catalog::System;
use crate::charts::ChartId;
use crate::local::{local_integrals, poincare_linearize_at, LocalIntegrals};
use crate::series::{all_series, z0_var, LaurentSeriesSolution};
use crate::soic::{movable_points, painleve_coordinates, transformed_system, BlowupChartMap};
use crate::weyl::boutroux_hamiltonian;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub type C = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynError {
    #[error("step size underflow at s = {s} (z = {z}); last state {state:?}")]
    StepUnderflow { s: f64, z: C, state: Vec<C> },
    #[error("step budget exhausted at s = {s}")]
    TooManySteps { s: f64 },
    #[error("unreduced blow-up state at z = {0}")]
    Unreduced(C),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("invalid path: {0}")]
    Path(String),
    #[error("symbol {0} has no value")]
    Unbound(String),
    #[error("ill-conditioned Laurent fit (aliasing {0:e}); use a smaller radius")]
    IllConditioned(f64),
    #[error("{0}")]
    Setup(String),
}

pub type Result<T> = std::result::Result<T, DynError>;

/// Evaluates a polynomial with parameters bound to complex values.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(C, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn compile(p: &Poly, vars: &[Var], params: &BTreeMap<Var, C>) -> Result<Self> {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let mut coef = C::new(q_to_f64(c), 0.0);
            let mut ex = Vec::new();
            for &(v, e) in m.pairs() {
                if let Some(i) = vars.iter().position(|w| *w == v) {
                    ex.push((i, e));
                } else if let Some(val) = params.get(&v) {
                    coef *= val.powi(e);
                } else {
                    return Err(DynError::Unbound(v.name()));
                }
            }
            terms.push((coef, ex));
        }
        Ok(CompiledPoly { terms })
    }

    pub fn eval(&self, vals: &[C]) -> C {
        let mut s = C::new(0.0, 0.0);
        for (c, ex) in &self.terms {
            let mut t = *c;
            for &(i, e) in ex {
                t *= ipow(vals[i], e);
            }
            s += t;
        }
        s
    }
}

fn ipow(x: C, e: i32) -> C {
    let mut r = C::new(1.0, 0.0);
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.inv()
    } else {
        r
    }
}

/// dY/dz = F(z, Y).
pub trait Field {
    fn dim(&self) -> usize;
    fn eval(&self, z: C, y: &[C], out: &mut [C]);
}

/// Polynomial field in dependent variables and z.
#[derive(Clone, Debug)]
pub struct PolyField {
    rhs: Vec<CompiledPoly>,
}

impl PolyField {
    /// `vars` lists the dependent variables followed by the independent one.
    pub fn new(rhs: &[Poly], vars: &[Var], params: &BTreeMap<Var, C>) -> Result<Self> {
        if vars.len() != rhs.len() + 1 {
            return Err(DynError::Setup("one independent variable expected".into()));
        }
        let rhs = rhs.iter().map(|p| CompiledPoly::compile(p, vars, params)).collect::<Result<_>>()?;
        Ok(PolyField { rhs })
    }

    /// An autonomous field: the independent variable does not occur.
    pub fn autonomous(rhs: &[Poly], vars: &[Var], params: &BTreeMap<Var, C>) -> Result<Self> {
        let mut all = vars.to_vec();
        all.push(Var::fresh("t"));
        PolyField::new(rhs, &all, params)
    }
}

impl Field for PolyField {
    fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn eval(&self, z: C, y: &[C], out: &mut [C]) {
        let mut vals = [C::new(0.0, 0.0); 8];
        vals[..y.len()].copy_from_slice(y);
        vals[y.len()] = z;
        for (o, p) in out.iter_mut().zip(&self.rhs) {
            *o = p.eval(&vals[..=y.len()]);
        }
    }
}

/// Closure adaptor.
pub struct FnField<F: Fn(C, &[C], &mut [C])> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(C, &[C], &mut [C])> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: C, y: &[C], out: &mut [C]) {
        (self.f)(z, y, out)
    }
}

// ---------------------------------------------------------------------------
// Paths and options

/// Piecewise-linear path in the z-plane, parameterized by arc length.
#[derive(Clone, Debug, Serialize)]
pub struct PathSpec {
    #[serde(serialize_with = "ser_cvec")]
    pub waypoints: Vec<C>,
    cumulative: Vec<f64>,
}

impl PathSpec {
    pub fn new(waypoints: Vec<C>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(DynError::Path("at least two waypoints".into()));
        }
        let mut cumulative = vec![0.0];
        for w in waypoints.windows(2) {
            let d = (w[1] - w[0]).norm();
            if d == 0.0 || !d.is_finite() {
                return Err(DynError::Path("consecutive waypoints must be distinct and finite".into()));
            }
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Ok(PathSpec { waypoints, cumulative })
    }

    pub fn segment(a: C, b: C) -> Result<Self> {
        PathSpec::new(vec![a, b])
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn reversed(&self) -> Self {
        let mut w = self.waypoints.clone();
        w.reverse();
        PathSpec::new(w).expect("reversal keeps waypoints distinct")
    }

    fn leg(&self, s: f64) -> usize {
        let n = self.waypoints.len() - 1;
        (0..n).find(|&i| s < self.cumulative[i + 1]).unwrap_or(n - 1)
    }

    fn leg_geometry(&self, i: usize) -> (C, C, f64, f64) {
        let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
        let (s0, s1) = (self.cumulative[i], self.cumulative[i + 1]);
        (a, (b - a) / (s1 - s0), s0, s1)
    }

    pub fn point(&self, s: f64) -> C {
        let (a, u, s0, _) = self.leg_geometry(self.leg(s));
        a + u * (s - s0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Leave the base chart when the pole coordinate exceeds this.
    pub switch_out: f64,
    /// Return to the base chart when it drops below this.
    pub switch_back: f64,
    pub max_events: usize,
    pub max_steps: usize,
    /// Bound the local error per unit arc length rather than per step, so
    /// the accumulated error along a path stays near rtol times its length.
    pub per_unit_step: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-10, atol: 1e-12, max_step: 0.1, switch_out: 10.0, switch_back: 5.0, max_events: 1000, max_steps: 2_000_000, per_unit_step: true }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.max_step > 0.0) {
            return Err(DynError::Options("tolerances and max step must be positive".into()));
        }
        if !(0.0 < self.switch_back && self.switch_back < self.switch_out) {
            return Err(DynError::Options("need 0 < switch_back < switch_out".into()));
        }
        Ok(())
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.atol *= rtol / self.rtol;
        self.rtol = rtol;
        self
    }
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4) with the order-4 continuous extension

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const CN: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Dense output of one accepted step over [s0, s0 + h].
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub s0: f64,
    pub h: f64,
    /// z at s0 and dz/ds on the step.
    pub z0: C,
    pub dir: C,
    rc: [Vec<C>; 5],
}

impl DenseStep {
    pub fn state(&self, s: f64) -> Vec<C> {
        let th = ((s - self.s0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        (0..self.rc[0].len())
            .map(|i| self.rc[0][i] + (self.rc[1][i] + (self.rc[2][i] + (self.rc[3][i] + self.rc[4][i] * th1) * th) * th1) * th)
            .collect()
    }

    pub fn z(&self, s: f64) -> C {
        self.z0 + self.dir * (s - self.s0)
    }
}

pub struct StepInfo<'a> {
    pub s0: f64,
    pub s1: f64,
    pub y0: &'a [C],
    pub y1: &'a [C],
    /// dY/ds at both ends.
    pub k0: &'a [C],
    pub k1: &'a [C],
    pub dense: &'a DenseStep,
    pub local_error: f64,
}

pub enum Flow {
    Continue,
    Stop,
}

pub struct DriveEnd {
    pub s: f64,
    pub y: Vec<C>,
    pub h: f64,
    pub stopped: bool,
    pub steps: usize,
}

fn deriv<F: Field + ?Sized>(f: &F, z: C, dir: C, y: &[C]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); y.len()];
    f.eval(z, y, &mut out);
    for o in out.iter_mut() {
        *o *= dir;
    }
    out
}

fn finite(y: &[C]) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite() && c.norm() < 1e150)
}

/// Integrates from s_start to s_end along the path, calling `on_step` after
/// every accepted step; steps never straddle a waypoint.
pub fn drive<F: Field + ?Sized>(
    f: &F,
    path: &PathSpec,
    s_start: f64,
    s_end: f64,
    y0: Vec<C>,
    h0: Option<f64>,
    opts: &IntegratorOptions,
    mut on_step: impl FnMut(&StepInfo) -> Flow,
) -> Result<DriveEnd> {
    let expo = if opts.per_unit_step { 0.25 } else { 0.2 };
    let n = y0.len();
    let mut s = s_start;
    let mut y = y0;
    let mut h = h0.unwrap_or(opts.max_step * 0.01).min(opts.max_step);
    let mut steps = 0;
    let mut rejected_last = false;
    while s < s_end - 1e-14 * (1.0 + s_end.abs()) {
        if steps >= opts.max_steps {
            return Err(DynError::TooManySteps { s });
        }
        let leg = path.leg(s + 1e-15 * (1.0 + s.abs()));
        let (a, dir, ls0, ls1) = path.leg_geometry(leg);
        let stop = ls1.min(s_end);
        let mut hh = h.min(stop - s);
        if stop - s - hh < 1e-12 * (1.0 + s.abs()) {
            hh = stop - s;
        }
        let z0 = a + dir * (s - ls0);
        if hh < 1e-13 * (1.0 + s.abs()) && stop - s > hh {
            return Err(DynError::StepUnderflow { s, z: z0, state: y });
        }
        let mut k: Vec<Vec<C>> = Vec::with_capacity(7);
        k.push(deriv(f, z0, dir, &y));
        let mut ok = finite(&k[0]);
        for st in 1..7 {
            if !ok {
                break;
            }
            let yi: Vec<C> = (0..n).map(|i| y[i] + (0..st).map(|j| k[j][i] * A[st][j]).sum::<C>() * hh).collect();
            if !finite(&yi) {
                ok = false;
                break;
            }
            k.push(deriv(f, z0 + dir * (CN[st] * hh), dir, &yi));
            ok = finite(&k[st]);
        }
        let mut err = f64::INFINITY;
        let mut y1 = Vec::new();
        let mut err_abs = 0.0;
        if ok {
            y1 = (0..n).map(|i| y[i] + (0..6).map(|j| k[j][i] * A[6][j]).sum::<C>() * hh).collect();
            let mut acc = 0.0;
            for i in 0..n {
                let e = ((0..7).map(|j| k[j][i] * E[j]).sum::<C>() * hh).norm();
                err_abs = f64::max(err_abs, e);
                let sc = opts.atol + opts.rtol * y[i].norm().max(y1[i].norm());
                acc += (e / sc).powi(2);
            }
            err = (acc / n as f64).sqrt();
            if opts.per_unit_step {
                err /= hh;
            }
            if !finite(&y1) {
                err = f64::INFINITY;
            }
        }
        steps += 1;
        if err <= 1.0 {
            let rc0 = y.clone();
            let rc1: Vec<C> = (0..n).map(|i| y1[i] - y[i]).collect();
            let rc2: Vec<C> = (0..n).map(|i| k[0][i] * hh - rc1[i]).collect();
            let rc3: Vec<C> = (0..n).map(|i| rc1[i] - k[6][i] * hh - rc2[i]).collect();
            let rc4: Vec<C> = (0..n).map(|i| (0..7).map(|j| k[j][i] * D[j]).sum::<C>() * hh).collect();
            let dense = DenseStep { s0: s, h: hh, z0, dir, rc: [rc0, rc1, rc2, rc3, rc4] };
            let flow = on_step(&StepInfo { s0: s, s1: s + hh, y0: &y, y1: &y1, k0: &k[0], k1: &k[6], dense: &dense, local_error: err_abs });
            s += hh;
            y = y1;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-expo)).clamp(0.2, 5.0) };
            let fac = if rejected_last { fac.min(1.0) } else { fac };
            // keep a waypoint-clipped step from collapsing the estimate
            h = (h.max(hh) * fac).min(opts.max_step);
            rejected_last = false;
            if let Flow::Stop = flow {
                return Ok(DriveEnd { s, y, h, stopped: true, steps });
            }
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-expo)).clamp(0.1, 0.9) } else { 0.1 };
            h = hh * fac;
            rejected_last = true;
            if h < 1e-13 * (1.0 + s.abs()) {
                return Err(DynError::StepUnderflow { s, z: z0, state: y });
            }
        }
    }
    Ok(DriveEnd { s, y, h, stopped: false, steps })
}

// ---------------------------------------------------------------------------
// Single-chart integration

#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub s: f64,
    #[serde(serialize_with = "ser_c")]
    pub z: C,
    #[serde(serialize_with = "ser_cvec")]
    pub state: Vec<C>,
    pub local_error: f64,
}

#[derive(Clone, Debug)]
pub struct RawTrajectory {
    pub samples: Vec<Sample>,
    pub dense: Vec<DenseStep>,
}

impl RawTrajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("nonempty")
    }

    pub fn state_at(&self, s: f64) -> Option<Vec<C>> {
        self.dense.iter().find(|d| s >= d.s0 && s <= d.s0 + d.h).map(|d| d.state(s))
    }
}

/// Integrates in one chart along the path, with no switching.
pub fn integrate_complex<F: Field + ?Sized>(f: &F, init: &[C], path: &PathSpec, opts: &IntegratorOptions) -> Result<RawTrajectory> {
    opts.validate()?;
    if init.len() != f.dim() || !finite(init) {
        return Err(DynError::Setup("initial state must be finite and match the field".into()));
    }
    let mut samples = vec![Sample { s: 0.0, z: path.point(0.0), state: init.to_vec(), local_error: 0.0 }];
    let mut dense = Vec::new();
    drive(f, path, 0.0, path.length(), init.to_vec(), None, opts, |st| {
        samples.push(Sample { s: st.s1, z: st.dense.z(st.s1), state: st.y1.to_vec(), local_error: st.local_error });
        dense.push(st.dense.clone());
        Flow::Continue
    })?;
    Ok(RawTrajectory { samples, dense })
}

// ---------------------------------------------------------------------------
// Numeric atlas

/// A blow-up chart compiled for numerics.
#[derive(Clone, Debug)]
pub struct NumChart {
    pub label: String,
    /// Base coordinate with a pole (0 = x, 1 = y): it equals w^(−order).
    pub pole_var: usize,
    pub order: u32,
    /// x, y in terms of (u, w, z).
    forward: [CompiledPoly; 2],
    /// u in terms of (x, y, z, w).
    inverse_u: CompiledPoly,
    pub field: PolyField,
    /// Lowest power of w in x, y and its coefficient in (u, z).
    leading: [(i32, CompiledPoly); 2],
}

impl NumChart {
    fn build(map: &BlowupChartMap, params: &BTreeMap<Var, C>) -> Result<Self> {
        let sys = transformed_system(map).map_err(|e| DynError::Setup(e.to_string()))?;
        let [u, v, w] = map.target_vars;
        let [x, y, z] = map.base_vars;
        let [a, b] = sys.dependent();
        if sys.independent != 1 || [a, b] != [0, 2] {
            return Err(DynError::Setup("chart must keep z as the independent variable".into()));
        }
        let field = PolyField::new(&sys.rhs, &[u, w, v], params)?;
        let (rel, rel_p) = &map.cover_relation;
        let pole_var = if *rel == x { 0 } else if *rel == y { 1 } else { return Err(DynError::Setup("cover relation".into())) };
        let tau = map.cover_var;
        let order = rel_p.as_monomial().map(|(m, _)| -m.exp(tau)).filter(|k| *k > 0).ok_or_else(|| DynError::Setup("cover relation".into()))? as u32;
        let fw = |bv: Var| -> Result<CompiledPoly> { CompiledPoly::compile(&map.forward.image(bv), &[u, w, v], params) };
        let forward = [fw(x)?, fw(y)?];
        let inverse_u = CompiledPoly::compile(&map.inverse.image(u), &[x, y, z, tau], params)?;
        let lead = |bv: Var| -> Result<(i32, CompiledPoly)> {
            let p = map.forward.image(bv);
            let e = p.low_degree_in(w).unwrap_or(0);
            let c = p.collect(w).remove(&e).unwrap_or_else(Poly::zero);
            Ok((e, CompiledPoly::compile(&c, &[u, v], params)?))
        };
        let leading = [lead(x)?, lead(y)?];
        Ok(NumChart { label: map.label.clone(), pole_var, order, forward, inverse_u, field, leading })
    }

    pub fn to_base(&self, state: &[C], z: C) -> [C; 2] {
        let v = [state[0], state[1], z];
        [self.forward[0].eval(&v), self.forward[1].eval(&v)]
    }

    /// All lifts of a base point: the k-th roots w of 1 / (pole coordinate).
    pub fn lifts(&self, base: [C; 2], z: C) -> Vec<[C; 2]> {
        let p = base[self.pole_var];
        if p.norm() == 0.0 {
            return Vec::new();
        }
        let k = self.order as f64;
        let w0 = p.inv().powf(1.0 / k);
        (0..self.order)
            .map(|j| {
                let w = w0 * C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k);
                [self.inverse_u.eval(&[base[0], base[1], z, w]), w]
            })
            .collect()
    }
}

/// Base system and blow-up charts of one equation with numeric parameters.
#[derive(Debug)]
pub struct NumAtlas {
    pub system: System,
    pub params: BTreeMap<Var, C>,
    pub base: PolyField,
    pub charts: Vec<NumChart>,
}

/// Symbolic Laurent series through n = 10, shared by all trajectories.
fn series_table(sys: System) -> &'static [LaurentSeriesSolution] {
    static TABLE: [OnceLock<Vec<LaurentSeriesSolution>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let i = System::ALL.iter().position(|s| *s == sys).expect("builtin");
    TABLE[i].get_or_init(|| all_series(&sys.ode(), &sys.weights(), 10).unwrap_or_default())
}

impl NumAtlas {
    pub fn new(system: System, params: &BTreeMap<Var, C>) -> Result<Self> {
        let mut full = BTreeMap::new();
        for p in system.parameters() {
            let v = params.get(&p).copied().ok_or_else(|| DynError::Unbound(p.name()))?;
            full.insert(p, v);
        }
        let ode = system.ode();
        let [x, y, z] = ChartId::Orig.vars();
        let base = PolyField::new(&[ode.f.clone(), ode.g.clone()], &[x, y, z], &full)?;
        let maps = painleve_coordinates(system).map_err(|e| DynError::Setup(e.to_string()))?;
        let charts = maps.iter().map(|m| NumChart::build(m, &full)).collect::<Result<_>>()?;
        Ok(NumAtlas { system, params: full, base, charts })
    }

    /// |y| for P_I and P_II; max(|x|, |y|) for P_IV, which has poles in x.
    pub fn trigger(&self, base: [C; 2]) -> f64 {
        match self.system {
            System::P4 => base[0].norm().max(base[1].norm()),
            _ => base[1].norm(),
        }
    }

    /// Chart and lift with the smallest transformed state.
    pub fn select_chart(&self, base: [C; 2], z: C) -> Option<(usize, [C; 2])> {
        let mut best: Option<(usize, [C; 2], f64)> = None;
        for (i, c) in self.charts.iter().enumerate() {
            for l in c.lifts(base, z) {
                let n = l[0].norm().max(l[1].norm());
                if n.is_finite() && best.as_ref().map_or(true, |b| n < b.2) {
                    best = Some((i, l, n));
                }
            }
        }
        best.map(|(i, l, _)| (i, l))
    }

    fn series(&self) -> &'static [LaurentSeriesSolution] {
        series_table(self.system)
    }
}

// ---------------------------------------------------------------------------
// Switching integration

#[derive(Clone, Debug, Serialize)]
pub struct LeadingTerm {
    pub exponent: i32,
    #[serde(serialize_with = "ser_c")]
    pub coefficient: C,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleEvent {
    #[serde(serialize_with = "ser_c")]
    pub location: C,
    pub order: u32,
    pub chart: String,
    /// Leading Laurent terms of x and y in T = z − z★.
    pub leading: [LeadingTerm; 2],
    /// u at the pole: the free datum of the pole on the exceptional divisor.
    #[serde(serialize_with = "ser_c")]
    pub divisor_coordinate: C,
    /// Arc parameter of closest approach and distance from the path.
    pub s_closest: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    /// "base" or a blow-up chart label.
    pub chart: String,
    pub samples: Vec<Sample>,
    #[serde(skip)]
    chart_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Junction {
    pub s: f64,
    pub from: String,
    pub to: String,
    /// Relative mismatch between the base points of both sides.
    pub defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub system: System,
    pub segments: Vec<Segment>,
    pub poles: Vec<PoleEvent>,
    /// Arc parameters of close approaches whose zero of w was not found
    /// near the path.
    pub unrefined: Vec<f64>,
    pub junctions: Vec<Junction>,
    #[serde(serialize_with = "ser_cvec")]
    pub final_base: Vec<C>,
    #[serde(serialize_with = "ser_c")]
    pub final_z: C,
    #[serde(skip)]
    pub atlas: Arc<NumAtlas>,
}

impl Trajectory {
    /// Base-chart (x, y) at every sample.
    pub fn base_samples(&self) -> Vec<(f64, C, [C; 2], &str, f64)> {
        let mut out = Vec::new();
        for seg in &self.segments {
            for s in &seg.samples {
                let b = match seg.chart_index {
                    None => [s.state[0], s.state[1]],
                    Some(i) => self.atlas.charts[i].to_base(&s.state, s.z),
                };
                out.push((s.s, s.z, b, seg.chart.as_str(), s.local_error));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["arc_param", "re_z", "im_z", "chart", "re_x", "im_x", "re_y", "im_y", "local_error"])?;
        for (s, z, b, chart, e) in self.base_samples() {
            wr.write_record([
                format!("{s:.15e}"),
                format!("{:.15e}", z.re),
                format!("{:.15e}", z.im),
                chart.to_string(),
                format!("{:.15e}", b[0].re),
                format!("{:.15e}", b[0].im),
                format!("{:.15e}", b[1].re),
                format!("{:.15e}", b[1].im),
                format!("{e:.3e}"),
            ])?;
        }
        wr.flush()
    }

    pub fn poles_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.poles).expect("serializable")
    }
}

fn relative_gap(a: [C; 2], b: [C; 2]) -> f64 {
    let scale = 1.0 + a[0].norm().max(a[1].norm());
    (a[0] - b[0]).norm().max((a[1] - b[1]).norm()) / scale
}

/// Integrates one of the builtin systems along the path, switching into the
/// blow-up chart nearest to the approached Laurent balance whenever the pole
/// coordinate exceeds `switch_out`, and back below `switch_back`.
pub fn integrate_with_switching(sys: System, params: &BTreeMap<Var, C>, init: [C; 2], path: &PathSpec, opts: &IntegratorOptions) -> Result<Trajectory> {
    let atlas = Arc::new(NumAtlas::new(sys, params)?);
    integrate_in_atlas(atlas, init, path, opts)
}

pub fn integrate_in_atlas(atlas: Arc<NumAtlas>, init: [C; 2], path: &PathSpec, opts: &IntegratorOptions) -> Result<Trajectory> {
    opts.validate()?;
    if !finite(&init) {
        return Err(DynError::Setup("initial state must be finite".into()));
    }
    let total = path.length();
    let mut segments: Vec<Segment> = Vec::new();
    let mut poles = Vec::new();
    let mut junctions = Vec::new();
    let mut unrefined = Vec::new();
    let mut s = 0.0;
    let z_init = path.point(0.0);
    // start in a chart if the initial point is already near a pole
    let mut current: Option<usize> = None;
    let mut state = init.to_vec();
    if atlas.trigger(init) > opts.switch_out {
        let (i, l) = atlas.select_chart(init, z_init).ok_or(DynError::Unreduced(z_init))?;
        current = Some(i);
        state = l.to_vec();
    }
    let mut h: Option<f64> = None;
    let mut events = 0;
    while s < total - 1e-14 * (1.0 + total) {
        let label = current.map_or("base".to_string(), |i| atlas.charts[i].label.clone());
        let mut seg = Segment { chart: label.clone(), samples: vec![Sample { s, z: path.point(s), state: state.clone(), local_error: 0.0 }], chart_index: current };
        let field: &PolyField = current.map_or(&atlas.base, |i| &atlas.charts[i].field);
        let mut next: Option<Option<usize>> = None;
        let mut dense_keep: Vec<DenseStep> = Vec::new();
        let mut pole_brackets: Vec<usize> = Vec::new();
        let end = drive(field, path, s, total, state.clone(), h, opts, |st| {
            seg.samples.push(Sample { s: st.s1, z: st.dense.z(st.s1), state: st.y1.to_vec(), local_error: st.local_error });
            match current {
                None => {
                    if atlas.trigger([st.y1[0], st.y1[1]]) > opts.switch_out {
                        next = Some(Some(usize::MAX));
                        return Flow::Stop;
                    }
                }
                Some(i) => {
                    let d0 = 2.0 * (st.y0[1].conj() * st.k0[1]).re;
                    let d1 = 2.0 * (st.y1[1].conj() * st.k1[1]).re;
                    if d0 < 0.0 && d1 >= 0.0 {
                        dense_keep.push(st.dense.clone());
                        pole_brackets.push(dense_keep.len() - 1);
                    }
                    let b = atlas.charts[i].to_base(st.y1, st.dense.z(st.s1));
                    if atlas.trigger(b) < opts.switch_back {
                        next = Some(None);
                        return Flow::Stop;
                    }
                    if st.y1[0].norm() > 1e4 {
                        next = Some(Some(usize::MAX));
                        return Flow::Stop;
                    }
                }
            }
            Flow::Continue
        })?;
        if let Some(i) = current {
            for &k in &pole_brackets {
                match refine_pole(&atlas, i, &dense_keep[k]) {
                    Some(ev) => poles.push(ev),
                    None => unrefined.push(dense_keep[k].s0),
                }
            }
        }
        s = end.s;
        state = end.y.clone();
        let z_here = path.point(s);
        segments.push(seg);
        match next {
            None => break,
            Some(target) => {
                events += 1;
                if events > opts.max_events {
                    return Err(DynError::TooManySteps { s });
                }
                let base = current.map_or([state[0], state[1]], |i| atlas.charts[i].to_base(&state, z_here));
                let (to, new_state) = match target {
                    None => (None, base.to_vec()),
                    Some(_) => {
                        let (j, l) = atlas.select_chart(base, z_here).ok_or(DynError::Unreduced(z_here))?;
                        if l[0].norm() > 1e4 {
                            return Err(DynError::Unreduced(z_here));
                        }
                        (Some(j), l.to_vec())
                    }
                };
                let back = to.map_or([new_state[0], new_state[1]], |j| atlas.charts[j].to_base(&new_state, z_here));
                junctions.push(Junction {
                    s,
                    from: current.map_or("base".into(), |i| atlas.charts[i].label.clone()),
                    to: to.map_or("base".into(), |j| atlas.charts[j].label.clone()),
                    defect: relative_gap(base, back),
                });
                current = to;
                state = new_state;
                h = Some(end.h * 0.1);
            }
        }
    }
    let z_end = path.point(total);
    let final_base = current.map_or([state[0], state[1]], |i| atlas.charts[i].to_base(&state, z_end)).to_vec();
    Ok(Trajectory { system: atlas.system, segments, poles, unrefined, junctions, final_base, final_z: z_end, atlas })
}

fn chart_deriv(ch: &NumChart, z: C, y: &[C]) -> [C; 2] {
    let mut out = [C::new(0.0, 0.0); 2];
    ch.field.eval(z, y, &mut out);
    out
}

/// Chart state at z_to, integrating straight from (z_from, y_from).
pub fn chart_state_at(ch: &NumChart, z_from: C, y_from: &[C], z_to: C) -> Result<Vec<C>> {
    if (z_to - z_from).norm() < 1e-15 {
        return Ok(y_from.to_vec());
    }
    let path = PathSpec::segment(z_from, z_to)?;
    let opts = IntegratorOptions { rtol: 1e-13, atol: 1e-15, max_step: 0.02, per_unit_step: false, ..Default::default() };
    let end = drive(&ch.field, &path, 0.0, path.length(), y_from.to_vec(), None, &opts, |_| Flow::Continue)?;
    Ok(end.y)
}

fn refine_pole(atlas: &NumAtlas, ci: usize, step: &DenseStep) -> Option<PoleEvent> {
    let ch = &atlas.charts[ci];
    let ddist = |s: f64| -> f64 {
        let y = step.state(s);
        let k = chart_deriv(ch, step.z(s), &y);
        (y[1].conj() * k[1] * step.dir).re
    };
    let (mut lo, mut hi) = (step.s0, step.s0 + step.h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ddist(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sc = 0.5 * (lo + hi);
    let zc = step.z(sc);
    let yc = step.state(sc);
    // Newton on w(z) = 0, confined to a disc around the closest approach
    // sized by the linear estimate of the distance to the zero.
    let wc = chart_deriv(ch, zc, &yc)[1];
    let reach = 4.0 * (yc[1] / wc).norm() + 1e-3;
    let mut zk = zc;
    let mut yk = yc.clone();
    let mut converged = false;
    for _ in 0..40 {
        let k = chart_deriv(ch, zk, &yk);
        let mut dz = -yk[1] / k[1];
        if !(dz.re.is_finite() && dz.im.is_finite()) {
            return None;
        }
        if dz.norm() > 0.5 * reach {
            dz *= 0.5 * reach / dz.norm();
        }
        zk += dz;
        if (zk - zc).norm() > reach {
            return None;
        }
        yk = chart_state_at(ch, zc, &yc, zk).ok()?;
        if dz.norm() < 1e-13 * (1.0 + zk.norm()) || yk[1].norm() < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && yk[1].norm() > 1e-10 {
        return None;
    }
    let wp = chart_deriv(ch, zk, &yk)[1];
    let lead = |i: usize| -> LeadingTerm {
        let (e, c) = &ch.leading[i];
        LeadingTerm { exponent: *e, coefficient: c.eval(&[yk[0], zk]) * ipow(wp, *e) }
    };
    Some(PoleEvent {
        location: zk,
        order: ch.order,
        chart: ch.label.clone(),
        leading: [lead(0), lead(1)],
        divisor_coordinate: yk[0],
        s_closest: sc,
        distance: (zk - zc).norm(),
    })
}

// ---------------------------------------------------------------------------
// Laurent refit

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientFit {
    /// "x" (Aₙ) or "y" (Bₙ).
    pub side: String,
    pub n: usize,
    pub exponent: i64,
    #[serde(serialize_with = "ser_c")]
    pub fitted: C,
    #[serde(serialize_with = "ser_copt")]
    pub exact: Option<C>,
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefitReport {
    pub balance: (String, String),
    pub radius: f64,
    pub coefficients: Vec<CoefficientFit>,
    pub max_deviation: f64,
}

/// Least-squares fit of x·T^p and y·T^q by polynomials of degree < n_terms
/// from samples on a circle |T| = radius around the pole. Equispaced circle
/// samples make the monomials orthogonal, so the fit is a discrete Fourier
/// projection; a half-resolution fit bounds the aliasing error.
pub fn laurent_refit(traj: &Trajectory, pole: &PoleEvent, n_terms: usize, radius: f64) -> Result<RefitReport> {
    let atlas = &traj.atlas;
    let ci = atlas.charts.iter().position(|c| c.label == pole.chart).ok_or_else(|| DynError::Setup("pole chart".into()))?;
    let ch = &atlas.charts[ci];
    let zs = pole.location;
    let y0 = vec![pole.divisor_coordinate, C::new(0.0, 0.0)];
    let m = 64usize.max(4 * n_terms);
    let mut pts: Vec<(C, [C; 2])> = Vec::with_capacity(m);
    let mut z_prev = zs;
    let mut y_prev = y0;
    for j in 0..m {
        let t = C::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
        let y = chart_state_at(ch, z_prev, &y_prev, zs + t)?;
        pts.push((t, ch.to_base(&y, zs + t)));
        z_prev = zs + t;
        y_prev = y;
    }
    let series = atlas.series();
    let (p, q) = series.first().map(|s| (s.p, s.q)).ok_or_else(|| DynError::Setup("no Laurent series".into()))?;
    let fit = |stride: usize, side: usize, exp: i64| -> Vec<C> {
        let sel: Vec<&(C, [C; 2])> = pts.iter().step_by(stride).collect();
        (0..n_terms)
            .map(|n| sel.iter().map(|(t, b)| b[side] * ipow(*t, exp as i32) * ipow(*t, -(n as i32))).sum::<C>() / sel.len() as f64)
            .collect()
    };
    let (fx, fy) = (fit(1, 0, p), fit(1, 1, q));
    let (hx, hy) = (fit(2, 0, p), fit(2, 1, q));
    let alias = (0..n_terms).map(|n| ((fx[n] - hx[n]).norm() + (fy[n] - hy[n]).norm()) * radius.powi(n as i32)).fold(0.0, f64::max);
    if alias > 1e-6 {
        return Err(DynError::IllConditioned(alias));
    }
    let ser = series
        .iter()
        .min_by(|a, b| {
            let d = |s: &LaurentSeriesSolution| (fx[0] - q_c(&s.balance.0)).norm() + (fy[0] - q_c(&s.balance.1)).norm();
            d(a).partial_cmp(&d(b)).unwrap()
        })
        .unwrap();
    let mut vals: HashMap<Var, C> = atlas.params.iter().map(|(k, v)| (*k, *v)).collect();
    vals.insert(z0_var(), zs);
    let exact = |c: &Poly| -> Option<C> {
        if ser.free_symbols.iter().any(|f| c.depends_on(*f)) {
            None
        } else {
            Some(c.eval_c64(&vals))
        }
    };
    let mut coefficients = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (side, fitted, coeffs, lead) in [("x", &fx, &ser.a, p), ("y", &fy, &ser.b, q)] {
        for n in 0..n_terms.min(coeffs.len()) {
            let e = exact(&coeffs[n]);
            let dev = e.map(|v| (v - fitted[n]).norm());
            if let Some(d) = dev {
                max_dev = max_dev.max(d);
            }
            coefficients.push(CoefficientFit { side: side.into(), n, exponent: n as i64 - lead, fitted: fitted[n], exact: e, deviation: dev });
        }
    }
    Ok(RefitReport {
        balance: (crate::algebra::fmt_q(&ser.balance.0), crate::algebra::fmt_q(&ser.balance.1)),
        radius,
        coefficients,
        max_deviation: max_dev,
    })
}

fn q_c(v: &Q) -> C {
    C::new(q_to_f64(v), 0.0)
}

// ---------------------------------------------------------------------------
// Invariants along trajectories

/// max |H(z) − H(z₀) + Q(z)| over base-chart segments, with Q′ = −∂H/∂z
/// integrated alongside the system; for P_I, Q = ∫ y dz. Zero exactly
/// because dH/dz = ∂H/∂z along solutions.
pub fn hamiltonian_relation_defect(traj: &Trajectory, path: &PathSpec, opts: &IntegratorOptions) -> Result<f64> {
    let sys = traj.system;
    let [x, y, z] = ChartId::Orig.vars();
    let h = CompiledPoly::compile(&sys.hamiltonian(), &[x, y, z], &traj.atlas.params)?;
    let dhz = CompiledPoly::compile(&sys.hamiltonian().diff(z), &[x, y, z], &traj.atlas.params)?;
    let base = &traj.atlas.base;
    let aug = FnField {
        dim: 3,
        f: |zz: C, st: &[C], out: &mut [C]| {
            base.eval(zz, &st[..2], &mut out[..2]);
            out[2] = -dhz.eval(&[st[0], st[1], zz]);
        },
    };
    let mut worst: f64 = 0.0;
    for seg in traj.segments.iter().filter(|s| s.chart_index.is_none()) {
        let (a, b) = (seg.samples.first().unwrap(), seg.samples.last().unwrap());
        if b.s - a.s < 1e-9 {
            continue;
        }
        let h0 = h.eval(&[a.state[0], a.state[1], a.z]);
        let init = vec![a.state[0], a.state[1], C::new(0.0, 0.0)];
        drive(&aug, path, a.s, b.s, init, None, opts, |st| {
            let zz = st.dense.z(st.s1);
            let hv = h.eval(&[st.y1[0], st.y1[1], zz]);
            worst = worst.max((hv - h0 + st.y1[2]).norm());
            Flow::Continue
        })?;
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDriftReport {
    /// max |Cᵢ(t) − Cᵢ(t₀)| for C₁ and C₂.
    pub drift: [f64; 2],
    #[serde(serialize_with = "ser_c")]
    pub c1_at_start: C,
    pub max_c1_minus_pole: f64,
    pub samples: usize,
    pub truncation: usize,
}

/// Evaluates the truncated local integrals C₁, C₂ at the movable point along
/// the chart segment containing the pole.
pub fn local_integral_drift(traj: &Trajectory, pole: &PoleEvent, n: usize, radius: f64) -> Result<LocalDriftReport> {
    let sys = traj.system;
    let atlas = &traj.atlas;
    let (chart, point, _, _) = movable_points(sys)
        .map_err(|e| DynError::Setup(e.to_string()))?
        .into_iter()
        .next()
        .ok_or_else(|| DynError::Setup("no movable point".into()))?;
    let vf = sys.chart_field(chart);
    let lin = poincare_linearize_at(&vf, &point, n).map_err(|e| DynError::Setup(e.to_string()))?;
    let li: LocalIntegrals = local_integrals(&lin).map_err(|e| DynError::Setup(e.to_string()))?;
    let [x, y, z] = ChartId::Orig.vars();
    let others: Vec<Var> = [x, y].into_iter().filter(|v| *v != li.anchor).collect();
    let vars = [others[0], z, li.w];
    let c1 = CompiledPoly::compile(&li.c1, &vars, &atlas.params)?;
    let c2 = CompiledPoly::compile(&li.c2, &vars, &atlas.params)?;
    let ci = atlas.charts.iter().position(|c| c.label == pole.chart).ok_or_else(|| DynError::Setup("pole chart".into()))?;
    let ch = &atlas.charts[ci];
    let seg = traj
        .segments
        .iter()
        .find(|s| s.chart_index == Some(ci) && s.samples.first().unwrap().s <= pole.s_closest && s.samples.last().unwrap().s >= pole.s_closest)
        .ok_or_else(|| DynError::Setup("pole segment".into()))?;
    let other_idx = if li.anchor == x { 1 } else { 0 };
    let t = crate::charts::transition_map(&lin.weights, ChartId::Orig, lin.chart);
    let first_coord = CompiledPoly::compile(&t.forward.image(lin.vars[0]).subs(t.sigma, &Poly::var(li.w)).expect("monomial"), &[x, y, z, li.w], &atlas.params)?;
    let target = q_c(&lin.point[0]);
    let mut pts: Vec<(C, C, C)> = Vec::new();
    // The prefactor w^(−k) amplifies roundoff as w → 0, so only the annulus
    // radius/2 ≤ |w| ≤ radius is sampled.
    for smp in seg.samples.iter().filter(|s| s.state[1].norm() <= radius && s.state[1].norm() >= 0.5 * radius) {
        let b = ch.to_base(&smp.state, smp.z);
        pts.push((b[other_idx], smp.z, smp.state[1]));
    }
    if pts.is_empty() {
        return Err(DynError::Setup("no samples inside the neighbourhood".into()));
    }
    // the lift w with anchor = w^k that lands on the fixed point
    let (bx, zz, w0) = pts[0];
    let k = li.anchor_exponent.unsigned_abs() as u32;
    let anchor_val = ipow(w0, -(ch.order as i32));
    let sign = (0..k)
        .map(|j| C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .min_by(|a, b| {
            let d = |r: &C| {
                let w = w0 * *r;
                let base = if li.anchor == x { [anchor_val, bx] } else { [bx, anchor_val] };
                (first_coord.eval(&[base[0], base[1], zz, w]) - target).norm()
            };
            d(a).partial_cmp(&d(b)).unwrap()
        })
        .unwrap();
    let vals: Vec<(C, C)> = pts.iter().map(|(b, zz, w)| (c1.eval(&[*b, *zz, *w * sign]), c2.eval(&[*b, *zz, *w * sign]))).collect();
    let (a1, a2) = vals[0];
    let drift = [
        vals.iter().map(|(v1, _)| (v1 - a1).norm()).fold(0.0, f64::max),
        vals.iter().map(|(_, v2)| (v2 - a2).norm()).fold(0.0, f64::max),
    ];
    let max_c1 = vals.iter().map(|(v1, _)| (v1 - pole.location).norm()).fold(0.0, f64::max);
    Ok(LocalDriftReport { drift, c1_at_start: a1, max_c1_minus_pole: max_c1, samples: vals.len(), truncation: n })
}

// ---------------------------------------------------------------------------
// Boutroux flows at infinity

#[derive(Clone, Debug, Serialize)]
pub struct EnergyDrift {
    pub drift: f64,
    #[serde(serialize_with = "ser_c")]
    pub h0: C,
    pub steps: usize,
    pub max_state: f64,
}

/// Autonomous flow on {ε₃ = 0}, integrated along t = direction·s for
/// s ∈ [0, t_len]; returns max |H − H(0)| for the Boutroux Hamiltonian.
pub fn boutroux_energy_drift(sys: System, init: [C; 2], direction: C, t_len: f64, opts: &IntegratorOptions) -> Result<EnergyDrift> {
    opts.validate()?;
    let vf = sys.chart_field(ChartId::C3);
    let rhs = vf.infinity_restriction();
    let v = ChartId::C3.vars();
    let none = BTreeMap::new();
    let field = PolyField::autonomous(&rhs, &v[..2], &none)?;
    let h = CompiledPoly::compile(&boutroux_hamiltonian(sys), &v[..2], &none)?;
    let h0 = h.eval(&init);
    let path = PathSpec::segment(C::new(0.0, 0.0), direction / direction.norm() * t_len)?;
    let mut drift: f64 = 0.0;
    let mut max_state: f64 = 0.0;
    let end = drive(&field, &path, 0.0, t_len, init.to_vec(), None, opts, |st| {
        drift = drift.max((h.eval(st.y1) - h0).norm());
        max_state = max_state.max(st.y1[0].norm().max(st.y1[1].norm()));
        Flow::Continue
    })?;
    Ok(EnergyDrift { drift, h0, steps: end.steps, max_state })
}

// ---------------------------------------------------------------------------
// Level sets

#[derive(Clone, Debug, Serialize)]
pub struct LevelSet {
    pub c: f64,
    pub spacing: f64,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

impl LevelSet {
    pub fn points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.polylines.iter().flatten()
    }
}

/// Marching squares for H = c on a real window [x0, x1] × [y0, y1] with
/// `resolution` cells per side; segments are chained into polylines.
pub fn level_set_sampler(sys: System, c_values: &[f64], window: [f64; 4], resolution: usize) -> Vec<LevelSet> {
    let [x0, x1, y0, y1] = window;
    if resolution == 0 || !(x1 > x0 && y1 > y0) {
        return Vec::new();
    }
    let v = ChartId::C3.vars();
    let h = CompiledPoly::compile(&boutroux_hamiltonian(sys), &v[..2], &BTreeMap::new()).expect("no parameters");
    let n = resolution;
    let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let grid: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| h.eval(&[C::new(x0 + i as f64 * dx, 0.0), C::new(y0 + j as f64 * dy, 0.0)]).re).collect()).collect();
    c_values
        .iter()
        .map(|&c| {
            let f = |i: usize, j: usize| grid[i][j] - c;
            // edge id: (i, j, 0) from (i,j) to (i+1,j); (i, j, 1) from (i,j) to (i,j+1)
            let point = |e: (usize, usize, u8)| -> (f64, f64) {
                let (i, j, d) = e;
                let (i2, j2) = if d == 0 { (i + 1, j) } else { (i, j + 1) };
                let (a, b) = (f(i, j), f(i2, j2));
                let t = if a == b { 0.5 } else { a / (a - b) };
                let (xa, ya) = (x0 + i as f64 * dx, y0 + j as f64 * dy);
                if d == 0 {
                    (xa + t * dx, ya)
                } else {
                    (xa, ya + t * dy)
                }
            };
            let mut segs: Vec<[(usize, usize, u8); 2]> = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let corners = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
                    let code: u8 = corners.iter().enumerate().map(|(k, v)| if *v >= 0.0 { 1u8 << k } else { 0 }).sum();
                    // edges: bottom, right, top, left
                    let e = [(i, j, 0u8), (i + 1, j, 1u8), (i, j + 1, 0u8), (i, j, 1u8)];
                    let centre = corners.iter().sum::<f64>() / 4.0;
                    let pairs: &[(usize, usize)] = match code {
                        0 | 15 => &[],
                        1 | 14 => &[(3, 0)],
                        2 | 13 => &[(0, 1)],
                        3 | 12 => &[(3, 1)],
                        4 | 11 => &[(1, 2)],
                        6 | 9 => &[(0, 2)],
                        7 | 8 => &[(2, 3)],
                        5 => if centre >= 0.0 { &[(3, 2), (0, 1)] } else { &[(3, 0), (1, 2)] },
                        10 => if centre >= 0.0 { &[(0, 3), (1, 2)] } else { &[(0, 1), (2, 3)] },
                        _ => unreachable!(),
                    };
                    for (a, b) in pairs {
                        segs.push([e[*a], e[*b]]);
                    }
                }
            }
            LevelSet { c, spacing: dx.max(dy), polylines: chain(&segs).into_iter().map(|pl| pl.into_iter().map(point).collect()).collect() }
        })
        .collect()
}

fn chain<K: Copy + Ord>(segs: &[[K; 2]]) -> Vec<Vec<K>> {
    let mut adj: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        adj.entry(s[0]).or_default().push(i);
        adj.entry(s[1]).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    // open chains start at endpoints of degree one
    let mut starts: Vec<usize> = (0..segs.len()).filter(|&i| segs[i].iter().any(|k| adj[k].len() == 1)).collect();
    starts.extend(0..segs.len());
    for st in starts {
        if used[st] {
            continue;
        }
        used[st] = true;
        let [a, b] = segs[st];
        let (first, mut cur) = if adj[&a].len() == 1 { (a, b) } else { (a, b) };
        let mut line = vec![first, cur];
        loop {
            let next = adj[&cur].iter().copied().find(|&k| !used[k]);
            match next {
                Some(k) => {
                    used[k] = true;
                    cur = if segs[k][0] == cur { segs[k][1] } else { segs[k][0] };
                    line.push(cur);
                }
                None => break,
            }
        }
        out.push(line);
    }
    out
}

pub fn write_level_sets_csv<W: Write>(sets: &[LevelSet], w: W) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["c", "polyline", "x", "y"])?;
    for ls in sets {
        for (k, pl) in ls.polylines.iter().enumerate() {
            for (x, y) in pl {
                wr.write_record([format!("{}", ls.c), k.to_string(), format!("{x:.12e}"), format!("{y:.12e}")])?;
            }
        }
    }
    wr.flush()
}

// ---------------------------------------------------------------------------
// Serialization helpers: complex numbers as [re, im].

fn ser_c<S: serde::Serializer>(c: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

fn ser_copt<S: serde::Serializer>(c: &Option<C>, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.map(|c| [c.re, c.im]).serialize(s)
}

fn ser_cvec<S: serde::Serializer>(v: &[C], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
}

/// Rational parameter values as complex numbers.
pub fn numeric_params<'a>(vals: impl IntoIterator<Item = (&'a Var, &'a Q)>) -> BTreeMap<Var, C> {
    vals.into_iter().map(|(v, q)| (*v, q.to_c64())).collect()
}
