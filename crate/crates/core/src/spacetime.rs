//! Inertial frames on flat Newtonian space-time.
//!
//! A fiducial orthonormal frame is fixed once; every [`Observer`] is stored by the
//! fiducial coordinates of its origin event and of its velocity. Coordinates of an
//! event for an observer `(x0, u)` are `(x - x0 - τ(x - x0) u, τ(x - x0))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A space-time point in some observer's coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub y: Vec<f64>,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(y: Vec<f64>, t: f64) -> Self {
        Self { y, t }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }
}

/// An inertial reference frame `(x0, u)` relative to the fiducial rest frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObserverRepr", into = "ObserverRepr")]
pub struct Observer {
    b: Vec<f64>,
    t0: f64,
    u: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ObserverRepr {
    n: usize,
    b: Vec<f64>,
    t0: f64,
    u: Vec<f64>,
}

impl TryFrom<ObserverRepr> for Observer {
    type Error = Error;

    fn try_from(r: ObserverRepr) -> Result<Self> {
        check_dim(r.n, r.b.len())?;
        Observer::new(r.b, r.t0, r.u)
    }
}

impl From<Observer> for ObserverRepr {
    fn from(o: Observer) -> Self {
        ObserverRepr { n: o.dim(), b: o.b, t0: o.t0, u: o.u }
    }
}

impl Observer {
    /// `b` and `t0` locate the origin event, `u` is the velocity, all in fiducial coordinates.
    pub fn new(b: Vec<f64>, t0: f64, u: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidParameter("observer dimension must be at least 1".into()));
        }
        check_dim(b.len(), u.len())?;
        Ok(Self { b, t0, u })
    }

    /// The fiducial observer itself.
    pub fn rest(n: usize) -> Self {
        Self { b: vec![0.0; n], t0: 0.0, u: vec![0.0; n] }
    }

    pub fn moving(u: Vec<f64>) -> Self {
        Self { b: vec![0.0; u.len()], t0: 0.0, u }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    pub fn time_offset(&self) -> f64 {
        self.t0
    }

    pub fn velocity(&self) -> &[f64] {
        &self.u
    }

    /// Coordinates this observer assigns to an event given in fiducial coordinates.
    pub fn coords_of(&self, event: &SpacetimePoint) -> Result<SpacetimePoint> {
        check_dim(self.dim(), event.dim())?;
        let dt = event.t - self.t0;
        let y = (0..self.dim()).map(|k| event.y[k] - self.b[k] - dt * self.u[k]).collect();
        Ok(SpacetimePoint { y, t: dt })
    }

    /// Fiducial coordinates of the event with the given coordinates in this frame.
    pub fn event_of(&self, p: &SpacetimePoint) -> Result<SpacetimePoint> {
        check_dim(self.dim(), p.dim())?;
        let y = (0..self.dim()).map(|k| p.y[k] + self.b[k] + p.t * self.u[k]).collect();
        Ok(SpacetimePoint { y, t: p.t + self.t0 })
    }

    /// The observer `b` with `transition_between(self, b) == g`.
    pub fn transformed(&self, g: &GalileanTransition) -> Result<Observer> {
        check_dim(self.dim(), g.dim())?;
        let n = self.dim();
        let u = (0..n).map(|k| self.u[k] - g.v[k]).collect();
        let b = (0..n).map(|k| self.b[k] - g.w[k] - g.t0 * self.u[k]).collect();
        Ok(Observer { b, t0: self.t0 - g.t0, u })
    }
}

/// The affine change of coordinates `(y, t) ↦ (y + w + v (t + t0), t + t0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransitionRepr", into = "TransitionRepr")]
pub struct GalileanTransition {
    v: Vec<f64>,
    w: Vec<f64>,
    t0: f64,
}

#[derive(Serialize, Deserialize)]
struct TransitionRepr {
    n: usize,
    v: Vec<f64>,
    w: Vec<f64>,
    t0: f64,
}

impl TryFrom<TransitionRepr> for GalileanTransition {
    type Error = Error;

    fn try_from(r: TransitionRepr) -> Result<Self> {
        check_dim(r.n, r.v.len())?;
        GalileanTransition::new(r.v, r.w, r.t0)
    }
}

impl From<GalileanTransition> for TransitionRepr {
    fn from(g: GalileanTransition) -> Self {
        TransitionRepr { n: g.dim(), v: g.v, w: g.w, t0: g.t0 }
    }
}

impl GalileanTransition {
    pub fn new(v: Vec<f64>, w: Vec<f64>, t0: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("transition dimension must be at least 1".into()));
        }
        check_dim(v.len(), w.len())?;
        Ok(Self { v, w, t0 })
    }

    pub fn identity(n: usize) -> Self {
        Self { v: vec![0.0; n], w: vec![0.0; n], t0: 0.0 }
    }

    /// A pure boost `(y, t) ↦ (y + v t, t)`.
    pub fn boost(v: Vec<f64>) -> Self {
        let n = v.len();
        Self { v, w: vec![0.0; n], t0: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn velocity(&self) -> &[f64] {
        &self.v
    }

    pub fn shift(&self) -> &[f64] {
        &self.w
    }

    pub fn time_shift(&self) -> f64 {
        self.t0
    }

    pub fn is_identity(&self) -> bool {
        self.t0 == 0.0 && self.v.iter().chain(&self.w).all(|&x| x == 0.0)
    }

    pub fn apply(&self, p: &SpacetimePoint) -> Result<SpacetimePoint> {
        check_dim(self.dim(), p.dim())?;
        Ok(self.apply_unchecked(&p.y, p.t))
    }

    pub(crate) fn apply_unchecked(&self, y: &[f64], t: f64) -> SpacetimePoint {
        let tt = t + self.t0;
        let y = (0..self.dim()).map(|k| y[k] + self.w[k] + self.v[k] * tt).collect();
        SpacetimePoint { y, t: tt }
    }

    /// Preimage of `p` under this transition.
    pub fn apply_inverse(&self, p: &SpacetimePoint) -> Result<SpacetimePoint> {
        check_dim(self.dim(), p.dim())?;
        Ok(self.apply_inverse_unchecked(&p.y, p.t))
    }

    pub(crate) fn apply_inverse_unchecked(&self, y: &[f64], t: f64) -> SpacetimePoint {
        let y = (0..self.dim()).map(|k| y[k] - self.w[k] - self.v[k] * t).collect();
        SpacetimePoint { y, t: t - self.t0 }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &GalileanTransition) -> Result<GalileanTransition> {
        check_dim(self.dim(), first.dim())?;
        let n = self.dim();
        Ok(GalileanTransition {
            v: (0..n).map(|k| first.v[k] + self.v[k]).collect(),
            w: (0..n).map(|k| first.w[k] + self.w[k] - first.v[k] * self.t0).collect(),
            t0: first.t0 + self.t0,
        })
    }

    pub fn inverse(&self) -> GalileanTransition {
        let n = self.dim();
        GalileanTransition {
            v: self.v.iter().map(|x| -x).collect(),
            w: (0..n).map(|k| -self.w[k] - self.v[k] * self.t0).collect(),
            t0: -self.t0,
        }
    }

    /// Componentwise max-norm distance between two transitions.
    pub fn distance(&self, other: &GalileanTransition) -> f64 {
        let dv = self.v.iter().zip(&other.v).map(|(a, b)| (a - b).abs());
        let dw = self.w.iter().zip(&other.w).map(|(a, b)| (a - b).abs());
        dv.chain(dw).fold((self.t0 - other.t0).abs(), f64::max)
    }
}

/// The transition taking `a`-coordinates of an event to its `b`-coordinates.
pub fn transition_between(a: &Observer, b: &Observer) -> Result<GalileanTransition> {
    check_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let t0 = a.t0 - b.t0;
    Ok(GalileanTransition {
        v: (0..n).map(|k| a.u[k] - b.u[k]).collect(),
        w: (0..n).map(|k| a.b[k] - b.b[k] - t0 * a.u[k]).collect(),
        t0,
    })
}

/// `count` points with all coordinates uniform in `[-half_width, half_width]`.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, count: usize, half_width: f64) -> Vec<SpacetimePoint> {
    (0..count)
        .map(|_| {
            let y = (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect();
            SpacetimePoint { y, t: rng.gen_range(-half_width..half_width) }
        })
        .collect()
}

/// An observer with every component uniform in `[-half_width, half_width]`.
pub fn random_observer<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> Observer {
    let mut c = || rng.gen_range(-half_width..half_width);
    let b = (0..n).map(|_| c()).collect();
    let t0 = c();
    let u = (0..n).map(|_| c()).collect();
    Observer { b, t0, u }
}

/// A transition with every component uniform in `[-half_width, half_width]`.
pub fn random_transition<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> GalileanTransition {
    let mut c = || rng.gen_range(-half_width..half_width);
    let v = (0..n).map(|_| c()).collect();
    let w = (0..n).map(|_| c()).collect();
    GalileanTransition { v, w, t0: c() }
}

pub fn random_observer_triples<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    half_width: f64,
) -> Vec<(Observer, Observer, Observer)> {
    (0..count)
        .map(|_| {
            (
                random_observer(rng, n, half_width),
                random_observer(rng, n, half_width),
                random_observer(rng, n, half_width),
            )
        })
        .collect()
}
