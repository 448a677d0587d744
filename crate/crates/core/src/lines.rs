//! Field lines on time slices, Gauss linking, and leaves of the kernel
//! distributions of `F` and `*F`.

use std::cell::Cell;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{kernel_2form, null_space, Event, FourVector, TwoForm, DEFAULT_TOL, NORM_FLOOR};
use crate::maps::HopfScalar;
use crate::observer::{split, Observer};
use crate::ode::DormandPrince;
use crate::solutions::FieldSolution;

/// Spatial vector of length 3.
pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Electric,
    Magnetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Closed,
    MaxLength,
    FieldFloor,
    LeftDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    /// Upper bound on the integrator step, in arc length.
    pub arc_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_length: f64,
    pub field_floor: f64,
    pub closure_tol: f64,
    /// Minimum direction cosine at the closing crossing.
    pub closure_cos: f64,
    /// Half-width of the cube `|x|, |y|, |z| <= box_half`.
    pub box_half: f64,
    /// Integrate the raw field instead of its unit direction.
    pub raw: bool,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            arc_step: 0.01,
            rtol: 1e-9,
            atol: 1e-12,
            max_length: 200.0,
            field_floor: 1e-12,
            closure_tol: 1e-4,
            closure_cos: 0.999,
            box_half: 20.0,
            raw: false,
        }
    }
}

/// A traced polyline on a slice `t = const`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldLine {
    pub points: Vec<Event>,
    pub arc_step: f64,
    pub closed: bool,
    pub termination: Termination,
}

/// Positions closer than this count as a closed polyline when read back.
pub const POLYLINE_CLOSURE_TOL: f64 = 1e-4;

impl FieldLine {
    /// Polyline from stored points; closed iff the end points agree to
    /// [`POLYLINE_CLOSURE_TOL`]. The arc step is the median spacing.
    pub fn from_points(points: Vec<Event>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidParameter("a polyline needs at least three points".into()));
        }
        let closed = dist(&points[0].spatial(), &points[points.len() - 1].spatial()) < POLYLINE_CLOSURE_TOL;
        let mut gaps: Vec<f64> = points
            .windows(2)
            .map(|w| dist(&w[0].spatial(), &w[1].spatial()))
            .collect();
        gaps.sort_by(f64::total_cmp);
        let arc_step = gaps[gaps.len() / 2];
        let termination = if closed {
            Termination::Closed
        } else {
            Termination::MaxLength
        };
        Ok(FieldLine {
            points,
            arc_step,
            closed,
            termination,
        })
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| dist(&w[0].spatial(), &w[1].spatial()))
            .sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        write_rows(&mut w, &self.points)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        write_rows(&mut w, &self.points)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "x", "y", "z"] {
            return Err(Error::Io(format!("expected header t,x,y,z in {}", path.display())));
        }
        let mut points = Vec::new();
        for rec in r.deserialize() {
            let row: [f64; 4] = rec?;
            points.push(Event::from_array(row));
        }
        Self::from_points(points)
    }
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, points: &[Event]) -> Result<()> {
    w.write_record(["t", "x", "y", "z"])?;
    for p in points {
        w.write_record(p.to_array().map(|c| format!("{c:.16e}")))?;
    }
    Ok(())
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &Vec3, b: &Vec3) -> f64 {
    norm(&sub(a, b))
}

/// Spatial `E` or `B` of the static observer.
pub fn slice_field(s: &FieldSolution, which: FieldKind, t: f64, x: &Vec3) -> Result<Vec3> {
    let f = s.f(&Event::new(t, x[0], x[1], x[2]))?;
    let eb = split(&f, &Observer::stationary());
    Ok(match which {
        FieldKind::Electric => eb.e.space_part(),
        FieldKind::Magnetic => eb.b.space_part(),
    })
}

/// Sentinel for "field below floor" raised inside the right-hand side.
fn floor_error(m: f64) -> Error {
    Error::DegenerateField { magnitude: m }
}

/// Integrates `x' = dir(x)` from `seed` with closure detection.
fn trace_direction_field<F>(
    mut dir: F,
    t0: f64,
    seed: Vec3,
    params: &TraceParams,
    on_accept: &dyn Fn(&Vec3),
) -> Result<FieldLine>
where
    F: FnMut(&Vec3) -> Result<Vec3>,
{
    let d0 = dir(&seed)?;
    let d0n = norm(&d0);
    let unit0 = d0.map(|c| c / d0n);
    let mut ode = DormandPrince::new(params.rtol, params.atol, params.arc_step);
    let mut pts: Vec<Vec3> = vec![seed];
    let mut arc = 0.0;
    let mut y = seed;
    // plane through the seed, normal to the initial direction
    let g = |p: &Vec3| dot(&sub(p, &seed), &unit0);
    let min_arc_before_closure = 20.0 * params.arc_step;
    let termination = loop {
        let (yn, _h) = match ode.advance(&mut dir, &y) {
            Ok(v) => v,
            Err(Error::DegenerateField { .. }) | Err(Error::Singularity(_)) => break Termination::FieldFloor,
            Err(e) => return Err(e),
        };
        let step_len = dist(&y, &yn);
        if arc + step_len > min_arc_before_closure && g(&y) < 0.0 && g(&yn) >= 0.0 {
            if let Some(q) = refine_crossing(&mut dir, &y, &yn, &g)? {
                let dq = dir(&q)?;
                let cosine = dot(&dq, &unit0) / norm(&dq);
                if dist(&q, &seed) < params.closure_tol && cosine > params.closure_cos {
                    if dist(&y, &q) < 0.1 * params.arc_step && pts.len() > 2 {
                        pts.pop();
                    }
                    pts.push(q);
                    break Termination::Closed;
                }
            }
        }
        arc += step_len;
        y = yn;
        on_accept(&y);
        pts.push(y);
        if y.iter().any(|c| c.abs() > params.box_half) {
            break Termination::LeftDomain;
        }
        if arc >= params.max_length {
            break Termination::MaxLength;
        }
    };
    Ok(FieldLine {
        points: pts.into_iter().map(|p| Event::new(t0, p[0], p[1], p[2])).collect(),
        arc_step: params.arc_step,
        closed: termination == Termination::Closed,
        termination,
    })
}

/// One classical fifth-order step of fixed size, used to land on the closing plane.
fn fixed_step<F: FnMut(&Vec3) -> Result<Vec3>>(dir: &mut F, y: &Vec3, h: f64) -> Result<Vec3> {
    let k1 = dir(y)?;
    let at = |k: &Vec3, c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    let k2 = dir(&at(&k1, 0.5 * h))?;
    let k3 = dir(&at(&k2, 0.5 * h))?;
    let k4 = dir(&at(&k3, h))?;
    Ok([0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Secant search in the step size for `g = 0` between `y` and `yn`.
fn refine_crossing<F, G>(dir: &mut F, y: &Vec3, yn: &Vec3, g: &G) -> Result<Option<Vec3>>
where
    F: FnMut(&Vec3) -> Result<Vec3>,
    G: Fn(&Vec3) -> f64,
{
    let speed = norm(&dir(y)?);
    if speed == 0.0 {
        return Ok(None);
    }
    let mut h0 = 0.0;
    let mut g0 = g(y);
    let mut h1 = dist(y, yn) / speed;
    let mut g1 = g(yn);
    let mut q = *yn;
    for _ in 0..30 {
        if (g1 - g0).abs() < 1e-300 {
            break;
        }
        let h2 = h1 - g1 * (h1 - h0) / (g1 - g0);
        q = fixed_step(dir, y, h2)?;
        let g2 = g(&q);
        h0 = h1;
        g0 = g1;
        h1 = h2;
        g1 = g2;
        if g2.abs() < 1e-14 {
            break;
        }
    }
    Ok(Some(q))
}

/// Field line of the static observer's `E` or `B` on the slice `t = t0`.
pub fn trace_line(s: &FieldSolution, which: FieldKind, t0: f64, seed: Vec3, params: &TraceParams) -> Result<FieldLine> {
    let m0 = norm(&slice_field(s, which, t0, &seed)?);
    if !(m0 > params.field_floor) {
        return Err(Error::DegenerateField { magnitude: m0 });
    }
    let floor = params.field_floor;
    let raw = params.raw;
    let dir = |x: &Vec3| -> Result<Vec3> {
        let v = slice_field(s, which, t0, x)?;
        let m = norm(&v);
        if !(m > floor) {
            return Err(floor_error(m));
        }
        Ok(if raw { v } else { v.map(|c| c / m) })
    };
    trace_direction_field(dir, t0, seed, params, &|_| {})
}

/// Outcome of [`gauss_linking`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linking {
    pub raw: f64,
    pub nearest: i64,
    /// `|raw - nearest| > 0.05`.
    pub flagged: bool,
}

/// Gauss double integral over two closed polylines by the midpoint rule.
pub fn gauss_linking(a: &FieldLine, b: &FieldLine) -> Result<Linking> {
    if !a.closed || !b.closed {
        return Err(Error::NotClosed);
    }
    let pa: Vec<Vec3> = a.points.iter().map(|p| p.spatial()).collect();
    let pb: Vec<Vec3> = b.points.iter().map(|p| p.spatial()).collect();
    let min_allowed = 10.0 * a.arc_step.max(b.arc_step);
    let mut min_d = f64::INFINITY;
    for x in &pa {
        for y in &pb {
            min_d = min_d.min(dist(x, y));
        }
    }
    if min_d <= min_allowed {
        return Err(Error::CurvesTooClose { distance: min_d });
    }
    let segments = |p: &[Vec3]| -> Vec<(Vec3, Vec3)> {
        (0..p.len())
            .map(|i| {
                let (u, v) = (p[i], p[(i + 1) % p.len()]);
                ([0, 1, 2].map(|k| 0.5 * (u[k] + v[k])), sub(&v, &u))
            })
            .filter(|(_, d)| norm(d) > 0.0)
            .collect()
    };
    let (sa, sb) = (segments(&pa), segments(&pb));
    let rows: Vec<f64> = sa
        .iter()
        .map(|(ma, da)| {
            let terms: Vec<f64> = sb
                .iter()
                .map(|(mb, db)| {
                    let r = sub(ma, mb);
                    let n = norm(&r);
                    dot(&cross(da, db), &r) / (n * n * n)
                })
                .collect();
            crate::quadrature::pairwise_sum(&terms)
        })
        .collect();
    let raw = crate::quadrature::pairwise_sum(&rows) / (4.0 * PI);
    let nearest = raw.round();
    Ok(Linking {
        raw,
        nearest: nearest as i64,
        flagged: (raw - nearest).abs() > 0.05,
    })
}

/// Which kernel distribution a leaf integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    /// Integral surfaces of `ker F`.
    Magnetic,
    /// Integral surfaces of `ker *F`.
    Electric,
}

/// Mesh of events on one leaf; rows advance along the first kernel
/// direction, columns along the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafMesh {
    pub n1: usize,
    pub n2: usize,
    /// Row-major, `events[i * n2 + j]`.
    pub events: Vec<Event>,
    pub scalar_deviation: Option<f64>,
}

impl LeafMesh {
    pub fn at(&self, i: usize, j: usize) -> Event {
        self.events[i * self.n2 + j]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Largest continuation angle accepted between neighboring kernel bases.
pub const KERNEL_FLIP_ANGLE: f64 = 0.3;

/// Orthonormal kernel pair `(k1, k2)` of `ker F` or `ker *F` at an event.
pub fn kernel_basis(s: &FieldSolution, kind: LeafKind, p: &Event) -> Result<[FourVector; 2]> {
    let (f, g) = s.fields(p)?;
    basis_of(match kind {
        LeafKind::Magnetic => &f,
        LeafKind::Electric => &g,
    })
}

fn basis_of(f: &TwoForm) -> Result<[FourVector; 2]> {
    let k = kernel_2form(f, DEFAULT_TOL)?;
    if k.len() != 2 {
        return Err(Error::NonSimple {
            phi: crate::forms::invariants(f).phi,
        });
    }
    Ok([k[0], k[1]])
}

fn orthonormalize(a: FourVector, b: FourVector) -> Option<[FourVector; 2]> {
    let na = a.euclid_norm();
    if na < 1e-12 {
        return None;
    }
    let a = a * (1.0 / na);
    let b = b - a * a.euclid_dot(&b);
    let nb = b.euclid_norm();
    if nb < 1e-12 {
        return None;
    }
    Some([a, b * (1.0 / nb)])
}

/// Projects the previous basis onto the new kernel; fails with `KernelFlip`
/// if either direction turns by more than [`KERNEL_FLIP_ANGLE`].
fn continue_basis(prev: &[FourVector; 2], new: &[FourVector; 2]) -> Result<[FourVector; 2]> {
    let proj = |v: &FourVector| new[0] * new[0].euclid_dot(v) + new[1] * new[1].euclid_dot(v);
    let out = orthonormalize(proj(&prev[0]), proj(&prev[1])).ok_or(Error::KernelFlip { angle: PI / 2.0 })?;
    for i in 0..2 {
        let angle = out[i].euclid_dot(&prev[i]).clamp(-1.0, 1.0).acos();
        if angle > KERNEL_FLIP_ANGLE {
            return Err(Error::KernelFlip { angle });
        }
    }
    Ok(out)
}

/// One midpoint step along basis vector `idx`, returning the new event and basis.
fn leaf_step(
    s: &FieldSolution,
    kind: LeafKind,
    p: &Event,
    basis: &[FourVector; 2],
    idx: usize,
    h: f64,
) -> Result<(Event, [FourVector; 2])> {
    let mid = p.offset(basis[idx] * (0.5 * h));
    let bm = continue_basis(basis, &kernel_basis(s, kind, &mid)?)?;
    let next = p.offset(bm[idx] * h);
    let bn = continue_basis(&bm, &kernel_basis(s, kind, &next)?)?;
    Ok((next, bn))
}

/// Leaf mesh of `n1 x n2` events through `seed`, with step `h` in both
/// directions. With `tracked`, also the largest chordal distance of that
/// scalar from its seed value.
pub fn trace_leaf(
    s: &FieldSolution,
    kind: LeafKind,
    seed: &Event,
    steps: (usize, usize),
    h: f64,
    tracked: Option<HopfScalar>,
) -> Result<LeafMesh> {
    let (n1, n2) = steps;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(
            "leaf mesh needs at least one row and column".into(),
        ));
    }
    let b0 = kernel_basis(s, kind, seed)?;
    let mut spine = Vec::with_capacity(n1);
    spine.push((*seed, b0));
    for i in 1..n1 {
        let (p, b) = spine[i - 1];
        spine.push(leaf_step(s, kind, &p, &b, 0, h)?);
    }
    let mut events = Vec::with_capacity(n1 * n2);
    for (p0, b0) in spine {
        let (mut p, mut b) = (p0, b0);
        events.push(p);
        for _ in 1..n2 {
            (p, b) = leaf_step(s, kind, &p, &b, 1, h)?;
            events.push(p);
        }
    }
    let scalar_deviation = tracked.map(|which| {
        let v0 = which.value(seed);
        events
            .iter()
            .map(|e| which.value(e).chordal_distance(&v0))
            .fold(0.0, f64::max)
    });
    Ok(LeafMesh {
        n1,
        n2,
        events,
        scalar_deviation,
    })
}

/// Direction of `ker F` tangent to the slice, `k2^0 k1 - k1^0 k2` normalized.
pub fn slice_direction(basis: &[FourVector; 2]) -> Option<FourVector> {
    let v = basis[0] * basis[1].0[0] - basis[1] * basis[0].0[0];
    let n = v.euclid_norm();
    (n > 1e-12).then(|| v * (1.0 / n))
}

/// Curve `leaf ∩ {t = t0}` through `seed`, traced as a direction field with
/// orientation fixed by continuity from `initial`.
pub fn trace_leaf_slice(
    s: &FieldSolution,
    kind: LeafKind,
    t0: f64,
    seed: Vec3,
    initial: Vec3,
    params: &TraceParams,
) -> Result<FieldLine> {
    let reference = Cell::new(initial);
    let dir = |x: &Vec3| -> Result<Vec3> {
        let p = Event::new(t0, x[0], x[1], x[2]);
        let basis = kernel_basis(s, kind, &p)?;
        let v = slice_direction(&basis)
            .ok_or(Error::DegenerateField { magnitude: 0.0 })?
            .space_part();
        let r = reference.get();
        Ok(if dot(&v, &r) < 0.0 { v.map(|c| -c) } else { v })
    };
    let first = dir(&seed)?;
    reference.set(first);
    let update = |y: &Vec3| {
        if let Ok(v) = dir(y) {
            reference.set(v);
        }
    };
    trace_direction_field(dir, t0, seed, params, &update)
}

/// Largest distance from a vertex of one polyline to the other polyline.
pub fn hausdorff_distance(a: &FieldLine, b: &FieldLine) -> f64 {
    let one_sided = |p: &FieldLine, q: &FieldLine| {
        let segs: Vec<(Vec3, Vec3)> = q.points.windows(2).map(|w| (w[0].spatial(), w[1].spatial())).collect();
        p.points
            .iter()
            .map(|x| {
                let x = x.spatial();
                segs.iter()
                    .map(|(u, v)| point_segment_distance(&x, u, v))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

fn point_segment_distance(x: &Vec3, u: &Vec3, v: &Vec3) -> f64 {
    let d = sub(v, u);
    let dd = dot(&d, &d);
    let s = if dd > 0.0 {
        (dot(&sub(x, u), &d) / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(x, &[u[0] + s * d[0], u[1] + s * d[1], u[2] + s * d[2]])
}

/// Shared direction of `ker F` and `ker *F`, with the smallest principal
/// angle between the two planes (zero for null fields).
pub fn shared_null_direction(f: &TwoForm, g: &TwoForm) -> Result<(FourVector, f64)> {
    let kf = basis_of(f)?;
    let kg = basis_of(g)?;
    let m = Matrix2::from_fn(|i, j| kf[i].euclid_dot(&kg[j]));
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.expect("U"), svd.v_t.expect("V^T"));
    let imax = if svd.singular_values[0] >= svd.singular_values[1] {
        0
    } else {
        1
    };
    let cos = svd.singular_values[imax].min(1.0);
    let l1 = kf[0] * u[(0, imax)] + kf[1] * u[(1, imax)];
    let l2 = kg[0] * v_t[(imax, 0)] + kg[1] * v_t[(imax, 1)];
    let l = (l1 + l2) * 0.5;
    let l = l * (1.0 / l.euclid_norm());
    let l = if l.0[0] < 0.0 { -l } else { l };
    Ok((l, cos.acos()))
}

/// `dim(ker F ∩ {v^0 = 0})`: 1 when the kernel meets the slice transversally,
/// 2 when the whole kernel lies in the slice.
pub fn slice_intersection_dimension(f: &TwoForm, tol: f64) -> Result<usize> {
    if f.norm_sq() < NORM_FLOOR {
        return Err(Error::ZeroForm);
    }
    let m = f.matrix();
    let basis = null_space(&Matrix4::from_fn(|a, b| m[a][b]), tol);
    if basis.len() != 2 {
        return Err(Error::NonSimple {
            phi: crate::forms::invariants(f).phi,
        });
    }
    let scale = basis[0].0[0].abs().max(basis[1].0[0].abs());
    Ok(if scale <= tol { 2 } else { 1 })
}
