//! 1+3 split of a two-form relative to a constant observer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{hodge_dual, invariants, FourVector, TwoForm, ETA, NORM_FLOOR};

/// Algebraic type of a field at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    Null,
    MagneticallyDominated,
    ElectricallyDominated,
    NonSimple,
}

impl FieldClass {
    pub fn label(self) -> &'static str {
        match self {
            FieldClass::Null => "null",
            FieldClass::MagneticallyDominated => "magnetically_dominated",
            FieldClass::ElectricallyDominated => "electrically_dominated",
            FieldClass::NonSimple => "non_simple",
        }
    }
}

/// Constant future-directed unit timelike vector field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    v: FourVector,
}

impl Observer {
    /// `v = d/dt`.
    pub fn stationary() -> Self {
        Observer {
            v: FourVector::new(1.0, 0.0, 0.0, 0.0),
        }
    }

    /// `v = gamma (1, beta)`.
    pub fn boosted(beta: [f64; 3]) -> Result<Self> {
        let b2: f64 = beta.iter().map(|b| b * b).sum();
        if !(b2 < 1.0) {
            return Err(Error::InvalidParameter(format!("boost speed^2 = {b2} is not below 1")));
        }
        let g = 1.0 / (1.0 - b2).sqrt();
        Ok(Observer {
            v: FourVector::new(g, g * beta[0], g * beta[1], g * beta[2]),
        })
    }

    /// Normalizes a future-directed timelike vector.
    pub fn from_velocity(v: FourVector) -> Result<Self> {
        let n = v.eta_dot(&v);
        if !(n > 0.0 && v.0[0] > 0.0) {
            return Err(Error::InvalidParameter(
                "observer velocity must be future timelike".into(),
            ));
        }
        Ok(Observer {
            v: v * (1.0 / n.sqrt()),
        })
    }

    pub fn velocity(&self) -> FourVector {
        self.v
    }

    /// Three-velocity `v^i / v^0`.
    pub fn beta(&self) -> [f64; 3] {
        let s = self.v.space_part();
        s.map(|c| c / self.v.0[0])
    }
}

/// Electric and magnetic four-vectors, both orthogonal to the observer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EBPair {
    pub e: FourVector,
    pub b: FourVector,
}

impl EBPair {
    /// Squared rest-frame norm of `E`.
    pub fn e_sq(&self) -> f64 {
        -self.e.eta_dot(&self.e)
    }

    pub fn b_sq(&self) -> f64 {
        -self.b.eta_dot(&self.b)
    }

    /// Rest-frame dot product `E.B`.
    pub fn e_dot_b(&self) -> f64 {
        -self.e.eta_dot(&self.b)
    }
}

fn raise_contraction(f: &TwoForm, v: &FourVector) -> FourVector {
    let low = f.contract(v);
    FourVector([0, 1, 2, 3].map(|a| ETA[a] * low.0[a]))
}

/// `E^a = F^a_b v^b`, `B^a = -*F^a_b v^b`.
pub fn split(f: &TwoForm, obs: &Observer) -> EBPair {
    let v = obs.velocity();
    EBPair {
        e: raise_contraction(f, &v),
        b: -raise_contraction(&hodge_dual(f), &v),
    }
}

fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `S^a = eta^aa eps_abcd v^b E^c B^d`: the rest-frame `E x B`, orthogonal to `v`.
pub fn poynting(f: &TwoForm, obs: &Observer) -> Result<FourVector> {
    let eb = split(f, obs);
    let v = obs.velocity();
    let mut s = [0.0; 4];
    for (a, sa) in s.iter_mut().enumerate() {
        let mut acc = 0.0;
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let e = levi_civita(a, b, c, d);
                    if e != 0.0 {
                        acc += e * v.0[b] * eb.e.0[c] * eb.b.0[d];
                    }
                }
            }
        }
        *sa = ETA[a] * acc;
    }
    let s = FourVector(s);
    let mag = (-s.eta_dot(&s)).max(0.0).sqrt();
    let scale = (eb.e_sq() * eb.b_sq()).sqrt();
    if mag <= 1e-12 * scale || mag * mag < NORM_FLOOR {
        return Err(Error::ZeroPoynting);
    }
    Ok(s)
}

/// Unit (rest-frame) Poynting direction.
pub fn poynting_direction(f: &TwoForm, obs: &Observer) -> Result<FourVector> {
    let s = poynting(f, obs)?;
    Ok(s * (1.0 / (-s.eta_dot(&s)).sqrt()))
}

/// Classification from the invariants alone, hence observer independent.
pub fn classify(f: &TwoForm, tol: f64) -> Result<FieldClass> {
    let n2 = f.norm_sq();
    if n2 < NORM_FLOOR {
        return Err(Error::ZeroForm);
    }
    let inv = invariants(f);
    Ok(if inv.phi.abs() > tol * n2 {
        FieldClass::NonSimple
    } else if inv.psi.abs() <= tol * n2 {
        FieldClass::Null
    } else if inv.psi > 0.0 {
        FieldClass::MagneticallyDominated
    } else {
        FieldClass::ElectricallyDominated
    })
}

/// Observer that sees only `B` (magnetically dominated) or only `E`
/// (electrically dominated), moving with the drift velocity `E x B / max(E^2, B^2)`.
pub fn rest_observer(f: &TwoForm, tol: f64) -> Result<Observer> {
    let class = classify(f, tol)?;
    let eb = split(f, &Observer::stationary());
    let (e, b) = (eb.e.space_part(), eb.b.space_part());
    let exb = [
        e[1] * b[2] - e[2] * b[1],
        e[2] * b[0] - e[0] * b[2],
        e[0] * b[1] - e[1] * b[0],
    ];
    let denom = match class {
        FieldClass::MagneticallyDominated => eb.b_sq(),
        FieldClass::ElectricallyDominated => eb.e_sq(),
        FieldClass::NonSimple => {
            return Err(Error::NonSimple { phi: invariants(f).phi });
        }
        FieldClass::Null => {
            return Err(Error::DegenerateField {
                magnitude: invariants(f).psi.abs(),
            });
        }
    };
    // |E x B| / max(E^2, B^2) = min(|E|,|B|)/max(|E|,|B|) < 1 when E.B = 0.
    let beta = exb.map(|c| c / denom);
    Observer::boosted(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::TwoForm;
    use proptest::prelude::*;

    fn spatial(v: &FourVector) -> [f64; 3] {
        v.space_part()
    }

    #[test]
    fn static_split_examples() {
        let eb = split(&TwoForm::basis(0, 1), &Observer::stationary());
        assert_eq!(spatial(&eb.e), [1.0, 0.0, 0.0]);
        assert_eq!(eb.e.0[0], 0.0);
        assert_eq!(eb.b.max_abs(), 0.0);
        // B = (-F23, F13, -F12)
        let eb = split(&TwoForm([0.0, 0.0, 0.0, 3.0, 2.0, 1.0]), &Observer::stationary());
        assert_eq!(spatial(&eb.b), [-1.0, 2.0, -3.0]);
    }

    #[test]
    fn boost_along_magnetic_field_keeps_e_zero() {
        // B = (0,0,1): F12 = -1
        let f = TwoForm([0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let obs = Observer::boosted([0.0, 0.0, 0.6]).unwrap();
        let eb = split(&f, &obs);
        assert!(eb.e.max_abs() < 1e-15);
        assert!((eb.b_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn poynting_examples() {
        // E = x, B = y  =>  S = z
        let f = TwoForm([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) + TwoForm([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let s = poynting(&f, &Observer::stationary()).unwrap();
        assert_eq!(s.0, [0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            poynting(&TwoForm::basis(0, 1), &Observer::stationary()),
            Err(Error::ZeroPoynting)
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&TwoForm::basis(0, 1), 1e-9).unwrap(),
            FieldClass::ElectricallyDominated
        );
        assert_eq!(
            classify(&TwoForm::basis(1, 2), 1e-9).unwrap(),
            FieldClass::MagneticallyDominated
        );
        let null = TwoForm([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(classify(&null, 1e-9).unwrap(), FieldClass::Null);
        let ns = TwoForm::basis(0, 1) + TwoForm::basis(2, 3);
        assert_eq!(classify(&ns, 1e-9).unwrap(), FieldClass::NonSimple);
        assert!(matches!(classify(&TwoForm::ZERO, 1e-9), Err(Error::ZeroForm)));
    }

    #[test]
    fn rest_observer_removes_the_weaker_field() {
        // E = (0.3,0,0), B = (0,1,0): magnetically dominated, E.B = 0
        let f = TwoForm([0.3, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let eb = split(&f, &rest_observer(&f, 1e-9).unwrap());
        assert!(eb.e.max_abs() < 1e-14);
        let g = TwoForm([1.0, 0.0, 0.0, 0.0, 0.4, 0.0]);
        let eb = split(&g, &rest_observer(&g, 1e-9).unwrap());
        assert!(eb.b.max_abs() < 1e-14);
        assert!(rest_observer(&TwoForm([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]), 1e-9).is_err());
    }

    fn two_form() -> impl Strategy<Value = TwoForm> {
        prop::array::uniform6(-2.0f64..2.0).prop_map(TwoForm)
    }

    fn observer() -> impl Strategy<Value = Observer> {
        (prop::array::uniform3(-1.0f64..1.0), 0.0f64..0.95).prop_map(|(d, speed)| {
            let n = d.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-9);
            Observer::boosted(d.map(|c| c / n * speed)).unwrap()
        })
    }

    /// `F'_ab = M^c_a M^d_b F_cd` for the symmetric boost taking `d/dt` to `v`.
    fn boost_components(f: &TwoForm, v: &FourVector) -> TwoForm {
        let g = v.0[0];
        let u = v.space_part();
        let u2: f64 = u.iter().map(|c| c * c).sum();
        let mut m = [[0.0; 4]; 4];
        m[0][0] = g;
        for i in 0..3 {
            m[0][i + 1] = u[i];
            m[i + 1][0] = u[i];
            for j in 0..3 {
                let extra = if u2 > 0.0 { (g - 1.0) * u[i] * u[j] / u2 } else { 0.0 };
                m[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + extra;
            }
        }
        let fm = f.matrix();
        let mut out = TwoForm::ZERO;
        for (k, &(a, b)) in crate::forms::PAIRS.iter().enumerate() {
            let mut acc = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    acc += m[c][a] * m[d][b] * fm[c][d];
                }
            }
            out.0[k] = acc;
        }
        out
    }

    proptest! {
        #[test]
        fn invariants_from_split(f in two_form(), obs in observer()) {
            let eb = split(&f, &obs);
            let inv = invariants(&f);
            let scale = 1.0 + eb.e_sq() + eb.b_sq();
            prop_assert!((inv.psi - (eb.b_sq() - eb.e_sq())).abs() < 1e-10 * scale);
            prop_assert!((inv.phi - eb.e_dot_b()).abs() < 1e-10 * scale);
            let v = obs.velocity();
            prop_assert!(eb.e.eta_dot(&v).abs() < 1e-10 * scale);
            prop_assert!(eb.b.eta_dot(&v).abs() < 1e-10 * scale);
            prop_assert!((v.eta_dot(&v) - 1.0).abs() < 1e-12 * v.0[0] * v.0[0]);
        }

        #[test]
        fn classification_is_observer_independent(
            a in prop::array::uniform4(-2.0f64..2.0),
            b in prop::array::uniform4(-2.0f64..2.0),
            obs in observer(),
        ) {
            let mut f = TwoForm::ZERO;
            for (k, &(i, j)) in crate::forms::PAIRS.iter().enumerate() {
                f.0[k] = a[i] * b[j] - a[j] * b[i];
            }
            let n2 = f.norm_sq();
            prop_assume!(invariants(&f).psi.abs() > 1e-6 * n2);
            let g = boost_components(&f, &obs.velocity());
            prop_assert_eq!(classify(&f, 1e-9).unwrap(), classify(&g, 1e-9).unwrap());
        }

        #[test]
        fn poynting_is_orthogonal_to_observer_e_and_b(f in two_form(), obs in observer()) {
            if let Ok(s) = poynting(&f, &obs) {
                let eb = split(&f, &obs);
                let v = obs.velocity();
                let scale = (1.0 + eb.e_sq()) * (1.0 + eb.b_sq()) * v.0[0].powi(2);
                prop_assert!(s.eta_dot(&v).abs() < 1e-9 * scale);
                prop_assert!(s.eta_dot(&eb.e).abs() < 1e-9 * scale * (1.0 + eb.e_sq()).sqrt());
                prop_assert!(s.eta_dot(&eb.b).abs() < 1e-9 * scale * (1.0 + eb.b_sq()).sqrt());
            }
        }
    }
}
