//! The map tower from Minkowski space to the three-sphere and on to the
//! two-sphere, with exact Jacobians and pullbacks of the normalized area form.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::dual::{Cplx, Jet, Scalar};
use crate::error::{Error, Result};
use crate::forms::{Event, FourVector, TwoForm, PAIRS};

/// Above this modulus the reciprocal chart `w -> 1/w` is used.
pub const CHART_SWITCH: f64 = 10.0;

/// Minimum |u4| for the coordinate expressions of the pulled-back forms.
pub const U4_FLOOR: f64 = 1e-6;

/// Minimum distance from the projection pole (0, 0, 0, -1).
pub const POLE_FLOOR: f64 = 1e-6;

/// Point on the unit three-sphere in C^2 = R^4, `(u1 + i u2, u3 + i u4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S3Point(pub [f64; 4]);

impl S3Point {
    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn from_vector(v: [f64; 4]) -> Result<Self> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize onto S^3".into()));
        }
        Ok(S3Point(v.map(|c| c / n)))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Multiplication of both complex coordinates by `e^{i alpha}`.
    pub fn rotate_fiber(&self, alpha: f64) -> S3Point {
        let (c, s) = (alpha.cos(), alpha.sin());
        let [u1, u2, u3, u4] = self.0;
        S3Point([c * u1 - s * u2, s * u1 + c * u2, c * u3 - s * u4, s * u3 + c * u4])
    }
}

/// Point of the compactified complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StereoPoint {
    Finite { re: f64, im: f64 },
    AtInfinity,
}

impl StereoPoint {
    /// Chordal distance on the unit-diameter-normalized sphere, finite at infinity.
    pub fn chordal_distance(&self, other: &StereoPoint) -> f64 {
        match (self, other) {
            (StereoPoint::AtInfinity, StereoPoint::AtInfinity) => 0.0,
            (StereoPoint::Finite { re, im }, StereoPoint::AtInfinity)
            | (StereoPoint::AtInfinity, StereoPoint::Finite { re, im }) => 2.0 / (1.0 + re * re + im * im).sqrt(),
            (StereoPoint::Finite { re: a, im: b }, StereoPoint::Finite { re: c, im: d }) => {
                let num = ((a - c).powi(2) + (b - d).powi(2)).sqrt();
                2.0 * num / ((1.0 + a * a + b * b) * (1.0 + c * c + d * d)).sqrt()
            }
        }
    }
}

/// Target chart of a scalar map, which fixes the area density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Chart {
    /// Stereographic coordinate `w` of the two-sphere.
    Stereo,
    /// The coordinate `1/w`, used near `w = infinity`.
    StereoReciprocal,
    /// Flat coordinates with area form `density * dy1 ^ dy2`.
    Planar { density: f64 },
}

impl Chart {
    /// Coefficient of `dy1 ^ dy2` in the target area form.
    ///
    /// On the sphere, `(1/2 pi i) dw ^ dwbar / (1 + |w|^2)^2` equals
    /// `-(1/pi) dRe w ^ dIm w / (1 + |w|^2)^2`, in either chart.
    pub fn density<R: Scalar>(&self, coords: [R; 2]) -> R {
        match *self {
            Chart::Stereo | Chart::StereoReciprocal => {
                let q = coords[0] * coords[0] + coords[1] * coords[1] + 1.0;
                (q * q * PI).recip() * -1.0
            }
            Chart::Planar { density } => R::cst(density),
        }
    }
}

/// Coordinates of a scalar map's value in its chart.
#[derive(Clone, Copy, Debug)]
pub struct ChartValue<R> {
    pub coords: [R; 2],
    pub chart: Chart,
}

/// A map from spacetime into a two-dimensional target with an area form.
///
/// Implementations are generic over the scalar type so that the same code
/// yields values, Jacobians, and (nested) second derivatives.
pub trait ScalarMap: Send + Sync {
    fn chart_value<R: Scalar>(&self, p: [R; 4]) -> Result<ChartValue<R>>;
}

/// First-order jet of a scalar map at an event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetValue {
    pub chart: Chart,
    pub coords: [f64; 2],
    /// Rows: the two chart coordinates; columns: d/dt, d/dx, d/dy, d/dz.
    pub jacobian: [[f64; 4]; 2],
}

impl JetValue {
    pub fn evaluate<M: ScalarMap>(map: &M, p: &Event) -> Result<JetValue> {
        let cv = map.chart_value(Jet::seed(p.to_array()))?;
        Ok(JetValue {
            chart: cv.chart,
            coords: cv.coords.map(|c| c.v),
            jacobian: [cv.coords[0].d, cv.coords[1].d],
        })
    }

    /// The value as a point of the compactified plane (sphere charts only).
    pub fn value(&self) -> StereoPoint {
        let [a, b] = self.coords;
        match self.chart {
            Chart::Stereo | Chart::Planar { .. } => StereoPoint::Finite { re: a, im: b },
            Chart::StereoReciprocal => {
                let n = a * a + b * b;
                if n == 0.0 {
                    StereoPoint::AtInfinity
                } else {
                    StereoPoint::Finite { re: a / n, im: -b / n }
                }
            }
        }
    }
}

/// Pullback of the chart's area form, `density * (dy1 ^ dy2)`, on raw
/// components.
pub(crate) fn pullback_components<R: Scalar, M: ScalarMap>(map: &M, p: [R; 4]) -> Result<[R; 6]> {
    Ok(pull_chart(map.chart_value(Jet::seed(p))?))
}

#[inline]
pub(crate) fn pull_chart<R: Scalar>(cv: ChartValue<Jet<R>>) -> [R; 6] {
    let dens = cv.chart.density([cv.coords[0].v, cv.coords[1].v]);
    let (a, b) = (cv.coords[0].d, cv.coords[1].d);
    PAIRS.map(|(i, j)| dens * (a[i] * b[j] - a[j] * b[i]))
}

/// Pullback of the target area form through a first-order jet.
pub fn pullback_area(jet: &JetValue) -> TwoForm {
    let dens: f64 = jet.chart.density(jet.coords);
    let [a, b] = jet.jacobian;
    TwoForm(PAIRS.map(|(i, j)| dens * (a[i] * b[j] - a[j] * b[i])))
}

/// The compactifying map to the three-sphere, on raw components.
#[inline]
pub(crate) fn omega<R: Scalar>(p: [R; 4]) -> [R; 4] {
    let [t, x, y, z] = p;
    let a = (x * x + y * y + z * z - t * t + 1.0) * 0.5;
    let inv = (a * a + t * t).recip();
    let am1 = a - 1.0;
    [
        (a * x - t * z) * inv,
        (a * y + t * am1) * inv,
        (a * z + t * x) * inv,
        (a * am1 - t * y) * inv,
    ]
}

/// Numerator and denominator of the Hopf map `Pi_k`.
#[inline]
pub(crate) fn hopf_parts<R: Scalar>(k: HopfIndex, u: [R; 4]) -> (Cplx<R>, Cplx<R>) {
    let [u1, u2, u3, u4] = u;
    match k {
        HopfIndex::One => (Cplx::new(u1, u2), Cplx::new(u3, u4)),
        HopfIndex::Two => (Cplx::new(u2, u3), Cplx::new(u1, u4)),
        HopfIndex::Three => (Cplx::new(u3, u1), Cplx::new(u2, u4)),
    }
}

/// `num/den` in whichever sphere chart keeps the modulus bounded.
#[inline]
pub(crate) fn stereo_ratio<R: Scalar>(num: Cplx<R>, den: Cplx<R>) -> ChartValue<R> {
    let (n2, d2) = (num.norm_sqr_value(), den.norm_sqr_value());
    if n2 > CHART_SWITCH * CHART_SWITCH * d2 {
        let w = den.quotient(num);
        ChartValue {
            coords: [w.re, w.im],
            chart: Chart::StereoReciprocal,
        }
    } else {
        let w = num.quotient(den);
        ChartValue {
            coords: [w.re, w.im],
            chart: Chart::Stereo,
        }
    }
}

/// Which of the three cyclically related Hopf maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HopfIndex {
    One,
    Two,
    Three,
}

impl HopfIndex {
    pub const ALL: [HopfIndex; 3] = [HopfIndex::One, HopfIndex::Two, HopfIndex::Three];

    pub fn from_number(k: usize) -> Result<Self> {
        match k {
            1 => Ok(HopfIndex::One),
            2 => Ok(HopfIndex::Two),
            3 => Ok(HopfIndex::Three),
            _ => Err(Error::InvalidParameter(format!("Hopf index {k} not in 1..=3"))),
        }
    }

    pub fn number(self) -> usize {
        match self {
            HopfIndex::One => 1,
            HopfIndex::Two => 2,
            HopfIndex::Three => 3,
        }
    }
}

pub fn omega_map(p: &Event) -> S3Point {
    let u = omega(p.to_array());
    debug_assert!({
        let t = p.t;
        let a = 0.5 * (p.radius().powi(2) - t * t + 1.0);
        a * a + t * t > 0.0
    });
    S3Point(u)
}

/// `Omega(p)` together with its 4x4 Jacobian `d u_A / d x^a`.
pub fn omega_jacobian(p: &Event) -> (S3Point, [[f64; 4]; 4]) {
    let u = omega(Jet::seed(p.to_array()));
    (S3Point(u.map(|c| c.v)), u.map(|c| c.d))
}

pub fn hopf_map(k: HopfIndex, u: &S3Point) -> StereoPoint {
    let (num, den) = hopf_parts(k, u.0);
    if den.re == 0.0 && den.im == 0.0 {
        return StereoPoint::AtInfinity;
    }
    let w = num.quotient(den);
    StereoPoint::Finite { re: w.re, im: w.im }
}

/// The spacetime scalars `Pi_k o Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HopfScalar {
    Phi,
    Theta,
    Psi,
}

impl HopfScalar {
    pub fn hopf_index(self) -> HopfIndex {
        match self {
            HopfScalar::Phi => HopfIndex::One,
            HopfScalar::Theta => HopfIndex::Two,
            HopfScalar::Psi => HopfIndex::Three,
        }
    }

    /// Plain value at an event.
    pub fn value(self, p: &Event) -> StereoPoint {
        hopf_map(self.hopf_index(), &omega_map(p))
    }
}

impl ScalarMap for HopfScalar {
    fn chart_value<R: Scalar>(&self, p: [R; 4]) -> Result<ChartValue<R>> {
        let (num, den) = hopf_parts(self.hopf_index(), omega(p));
        Ok(stereo_ratio(num, den))
    }
}

/// Jet of `phi`, `theta` or `psi` at an event.
pub fn scalar_field(which: HopfScalar, p: &Event) -> JetValue {
    JetValue::evaluate(&which, p).expect("Hopf scalars are defined everywhere")
}

/// Future-pointing, unit-Euclidean generator of `ker dOmega`.
pub fn kernel_of_domega(p: &Event) -> Result<FourVector> {
    let (_, jac) = omega_jacobian(p);
    let mat = Matrix4::from_fn(|i, j| jac[i][j]);
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..4).collect();
    let s = svd.singular_values;
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let smax = s[order[0]];
    let rank = order.iter().filter(|&&i| s[i] > 1e-10 * smax).count().min(3);
    if rank < 3 {
        return Err(Error::RankDeficient { rank });
    }
    let row = v_t.row(order[3]);
    let mut k = FourVector([row[0], row[1], row[2], row[3]]);
    if k.0[0] < 0.0 {
        k = -k;
    }
    Ok(k.normalized())
}

/// Antisymmetric 4x4 array of a two-form on R^4 in embedding coordinates.
pub type EmbeddedTwoForm = [[f64; 4]; 4];

/// The pulled-back area forms `f^k = Pi_k^* eps` in the coordinates
/// (u1, u2, u3) of S^3, embedded in a 4x4 array with a vanishing u4 row.
pub fn s3_fk(k: HopfIndex, u: &S3Point, u4_floor: f64) -> Result<EmbeddedTwoForm> {
    let [u1, u2, u3, u4] = u.0;
    if u4.abs() <= u4_floor {
        return Err(Error::ChartSingularity("u4 = 0 in the coordinate expressions of f^k"));
    }
    // coefficients of du1^du2, du2^du3, du3^du1
    let (c12, c23, c31) = match k {
        HopfIndex::One => (-1.0, -u2 / u4, u1 / u4),
        HopfIndex::Two => (u2 / u4, -1.0, -u3 / u4),
        HopfIndex::Three => (-u1 / u4, u3 / u4, -1.0),
    };
    let mut f = [[0.0; 4]; 4];
    let mut put = |i: usize, j: usize, v: f64| {
        f[i][j] = v / PI;
        f[j][i] = -v / PI;
    };
    put(0, 1, c12);
    put(1, 2, c23);
    put(2, 0, c31);
    Ok(f)
}

/// Stereographic chart of S^3 projected from (0, 0, 0, -1), with the round
/// metric `4 delta / (1 + |x|^2)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S3ChartPoint(pub [f64; 3]);

impl S3ChartPoint {
    pub fn from_s3(u: &S3Point) -> Result<Self> {
        let [u1, u2, u3, u4] = u.0;
        let pole_dist = (u1 * u1 + u2 * u2 + u3 * u3 + (u4 + 1.0).powi(2)).sqrt();
        if pole_dist < POLE_FLOOR {
            return Err(Error::ChartSingularity("too close to the projection pole"));
        }
        Ok(S3ChartPoint([u1, u2, u3].map(|c| c / (1.0 + u4))))
    }

    pub fn to_s3(&self) -> S3Point {
        let s: f64 = self.0.iter().map(|c| c * c).sum();
        let [x1, x2, x3] = self.0;
        let d = 1.0 + s;
        S3Point([2.0 * x1 / d, 2.0 * x2 / d, 2.0 * x3 / d, (1.0 - s) / d])
    }

    /// Conformal factor `L` with `g = L^2 delta`.
    pub fn conformal_factor(&self) -> f64 {
        2.0 / (1.0 + self.0.iter().map(|c| c * c).sum::<f64>())
    }

    /// `d u_i / d x_j` for i, j in 1..=3.
    pub fn embedding_jacobian(&self) -> [[f64; 3]; 3] {
        let s: f64 = self.0.iter().map(|c| c * c).sum();
        let d = (1.0 + s).powi(2);
        let mut j = [[0.0; 3]; 3];
        for (a, row) in j.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                let delta = if a == b { 1.0 + s } else { 0.0 };
                *e = 2.0 * (delta - 2.0 * self.0[a] * self.0[b]) / d;
            }
        }
        j
    }
}

/// `f^k` pulled back to the stereographic chart, as a 3x3 antisymmetric array.
pub fn s3_fk_chart(k: HopfIndex, u: &S3Point) -> Result<[[f64; 3]; 3]> {
    let chart = S3ChartPoint::from_s3(u)?;
    let f = s3_fk(k, u, U4_FLOOR)?;
    let j = chart.embedding_jacobian();
    let mut out = [[0.0; 3]; 3];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..3 {
                for l in 0..3 {
                    s += j[i][a] * f[i][l] * j[l][b];
                }
            }
            *e = s;
        }
    }
    Ok(out)
}

/// `X^k = *f^k` in the stereographic chart (covariant components).
pub fn s3_xk(k: HopfIndex, u: &S3Point) -> Result<[f64; 3]> {
    let chart = S3ChartPoint::from_s3(u)?;
    let f = s3_fk_chart(k, u)?;
    // *f_i = 1/2 sqrt(g) eps_ijk f^jk = (1/L) * 1/2 eps_ijk f_jk for g = L^2 delta
    let inv_l = 1.0 / chart.conformal_factor();
    Ok([f[1][2] * inv_l, f[2][0] * inv_l, f[0][1] * inv_l])
}

/// Round-metric inner product `X^i . X^j`.
pub fn s3_xk_inner(i: HopfIndex, j: HopfIndex, u: &S3Point) -> Result<f64> {
    let chart = S3ChartPoint::from_s3(u)?;
    let (a, b) = (s3_xk(i, u)?, s3_xk(j, u)?);
    let l = chart.conformal_factor();
    Ok((a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (l * l))
}

/// Max-norm residuals of `f^1 + pi X^2 ^ X^3` and `f^2 - pi X^1 ^ X^3` in the chart.
pub fn s3_simp_residuals(u: &S3Point) -> Result<(f64, f64)> {
    let x: Vec<[f64; 3]> = HopfIndex::ALL.iter().map(|&k| s3_xk(k, u)).collect::<Result<_>>()?;
    let f1 = s3_fk_chart(HopfIndex::One, u)?;
    let f2 = s3_fk_chart(HopfIndex::Two, u)?;
    let wedge = |p: &[f64; 3], q: &[f64; 3], a: usize, b: usize| p[a] * q[b] - p[b] * q[a];
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            r1 = r1.max((f1[a][b] + PI * wedge(&x[1], &x[2], a, b)).abs());
            r2 = r2.max((f2[a][b] - PI * wedge(&x[0], &x[2], a, b)).abs());
        }
    }
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::hodge_dual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_event(rng: &mut ChaCha8Rng, half: f64) -> Event {
        Event::from_array([0; 4].map(|_| rng.random_range(-half..half)))
    }

    fn random_s3(rng: &mut ChaCha8Rng) -> S3Point {
        loop {
            let v = [0; 4].map(|_| rng.random_range(-1.0..1.0));
            if let Ok(u) = S3Point::from_vector(v) {
                return u;
            }
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_map(&Event::ORIGIN).0, [0.0, 0.0, 0.0, -1.0]);
        assert_eq!(omega_map(&Event::new(0.0, 1.0, 0.0, 0.0)).0, [1.0, 0.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let p = random_event(&mut rng, 3.0);
            assert!((omega_map(&p).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_at_time_zero_is_inverse_stereographic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let mut p = random_event(&mut rng, 3.0);
            p.t = 0.0;
            let r2 = p.radius().powi(2);
            assert!((omega_map(&p).0[3] - (r2 - 1.0) / (r2 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_jacobian_is_tangent_to_the_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = random_event(&mut rng, 3.0);
            let (u, j) = omega_jacobian(&p);
            for a in 0..4 {
                let dot: f64 = (0..4).map(|i| u.0[i] * j[i][a]).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hopf_map_examples() {
        assert_eq!(
            hopf_map(HopfIndex::One, &S3Point([1.0, 0.0, 0.0, 0.0])),
            StereoPoint::AtInfinity
        );
        match hopf_map(HopfIndex::One, &S3Point([0.0, 0.0, 0.0, -1.0])) {
            StereoPoint::Finite { re, im } => assert!(re == 0.0 && im == 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hopf_maps_are_fiber_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let u = random_s3(&mut rng);
            let v = u.rotate_fiber(rng.random_range(0.0..6.3));
            let (a, b) = (hopf_map(HopfIndex::One, &u), hopf_map(HopfIndex::One, &v));
            let scale = match a {
                StereoPoint::Finite { re, im } => 1.0 + re.hypot(im),
                StereoPoint::AtInfinity => 1.0,
            };
            assert!(a.chordal_distance(&b) < 1e-12 * scale, "{a:?} {b:?}");
        }
    }

    #[test]
    fn scalar_field_examples() {
        let j = scalar_field(HopfScalar::Phi, &Event::ORIGIN);
        assert_eq!(j.value(), StereoPoint::Finite { re: 0.0, im: 0.0 });
        let j = scalar_field(HopfScalar::Phi, &Event::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(j.chart, Chart::StereoReciprocal);
        assert_eq!(j.value(), StereoPoint::AtInfinity);
    }

    #[test]
    fn scalar_field_jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..100 {
            let p = random_event(&mut rng, 2.0);
            for which in [HopfScalar::Phi, HopfScalar::Theta, HopfScalar::Psi] {
                let jet = scalar_field(which, &p);
                for a in 0..4 {
                    let mut e = [0.0; 4];
                    e[a] = h;
                    let plus = p.offset(FourVector(e));
                    let minus = p.offset(FourVector(e.map(|c| -c)));
                    let (cp, cm) = (
                        which.chart_value(plus.to_array()).unwrap(),
                        which.chart_value(minus.to_array()).unwrap(),
                    );
                    if cp.chart != jet.chart || cm.chart != jet.chart {
                        continue;
                    }
                    for c in 0..2 {
                        let fd = (cp.coords[c] - cm.coords[c]) / (2.0 * h);
                        let scale = 1.0 + jet.jacobian[c][a].abs();
                        assert!((fd - jet.jacobian[c][a]).abs() < 1e-6 * scale, "{which:?} {a} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn constant_map_pulls_back_to_zero() {
        let jet = JetValue {
            chart: Chart::Stereo,
            coords: [0.3, -0.2],
            jacobian: [[0.0; 4]; 2],
        };
        assert_eq!(pullback_area(&jet), TwoForm::ZERO);
    }

    #[test]
    fn hopf_pullbacks_satisfy_the_dual_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let p = random_event(&mut rng, 3.0);
            let f_phi = pullback_area(&scalar_field(HopfScalar::Phi, &p));
            let f_theta = pullback_area(&scalar_field(HopfScalar::Theta, &p));
            let res = hodge_dual(&f_phi) + f_theta;
            assert!(res.norm_inf() < 1e-8 * (1.0 + f_phi.norm_inf()));
        }
    }

    #[test]
    fn domega_kernel_is_null_and_annihilated() {
        let p = Event::new(0.0, 1.0, 0.0, 0.0);
        let k = kernel_of_domega(&p).unwrap();
        let (_, j) = omega_jacobian(&p);
        for row in j {
            let d: f64 = (0..4).map(|a| row[a] * k.0[a]).sum();
            assert!(d.abs() < 1e-8);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = kernel_of_domega(&random_event(&mut rng, 3.0)).unwrap();
            assert!(k.eta_dot(&k).abs() < 1e-8);
            assert!(k.0[0] > 0.0);
        }
    }

    #[test]
    fn fk_examples() {
        let f = s3_fk(HopfIndex::One, &S3Point([0.0, 0.0, 0.0, 1.0]), U4_FLOOR).unwrap();
        assert!((f[0][1] + 1.0 / PI).abs() < 1e-15);
        assert_eq!(f[1][2], 0.0);
        assert_eq!(f[2][0], 0.0);
        assert!(matches!(
            s3_fk(HopfIndex::Two, &S3Point([1.0, 0.0, 0.0, 0.0]), U4_FLOOR),
            Err(Error::ChartSingularity(_))
        ));
    }

    /// Oracle: Pi_k as a function of (u1, u2, u3) with u4 eliminated, differentiated
    /// by dual numbers, and pulled back through the sphere's area form.
    fn fk_by_dual_numbers(k: HopfIndex, u: &S3Point) -> [[f64; 3]; 3] {
        let sign = u.0[3].signum();
        let [a, b, c, _] = Jet::seed([u.0[0], u.0[1], u.0[2], 0.0]);
        let u4 = (-(a * a + b * b + c * c) + 1.0).sqrt() * sign;
        let (num, den) = hopf_parts(k, [a, b, c, u4]);
        let cv = stereo_ratio(num, den);
        let dens = cv.chart.density([cv.coords[0].v, cv.coords[1].v]);
        let (p, q) = (cv.coords[0].d, cv.coords[1].d);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = dens * (p[i] * q[j] - p[j] * q[i]);
            }
        }
        out
    }

    #[test]
    fn fk_matches_dual_number_pullback() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut checked = 0;
        while checked < 200 {
            let u = random_s3(&mut rng);
            if u.0[3].abs() <= 0.1 {
                continue;
            }
            checked += 1;
            for k in HopfIndex::ALL {
                let f = s3_fk(k, &u, U4_FLOOR).unwrap();
                let oracle = fk_by_dual_numbers(k, &u);
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((f[i][j] - oracle[i][j]).abs() < 1e-9, "k={k:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn xk_are_orthonormal_up_to_pi() {
        let u = S3Point([0.5, 0.5, 0.5, 0.5]);
        let one = s3_xk_inner(HopfIndex::One, HopfIndex::One, &u).unwrap();
        assert!((one - 1.0 / (PI * PI)).abs() < 1e-12);
        assert!((one - 0.101321).abs() < 1e-6);
        assert!(s3_xk_inner(HopfIndex::One, HopfIndex::Two, &u).unwrap().abs() < 1e-9);
        let (r1, r2) = s3_simp_residuals(&u).unwrap();
        assert!(r1 < 1e-9 && r2 < 1e-9);
    }

    #[test]
    fn chart_rejects_pole_and_round_trips() {
        assert!(S3ChartPoint::from_s3(&S3Point([0.0, 0.0, 0.0, -1.0])).is_err());
        let u = S3Point::from_vector([0.2, -0.4, 0.1, 0.7]).unwrap();
        let back = S3ChartPoint::from_s3(&u).unwrap().to_s3();
        for i in 0..4 {
            assert!((back.0[i] - u.0[i]).abs() < 1e-14);
        }
    }
}
