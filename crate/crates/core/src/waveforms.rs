//! Wave exterior calculus on the coordinates `(y1..yn, t, r)`.
//!
//! Forms carry [`Expr`] coefficients indexed by increasing subsets of the
//! coordinate list, stored as bitmasks (bit `i` is coordinate `Var::from_index(i, n)`).
//! Wave functions are r-free representatives; the factor `exp(imr/ħ)` is implicit.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::gauge::PhysicalConstants;
use crate::spacetime::GalileanTransition;
use crate::symexpr::random::{random_expr, ExprShape};
use crate::symexpr::{compare, Expr, Var};

/// Largest spatial dimension representable by the bitmask encoding.
pub const MAX_DIM: usize = 30;

fn var_bit(n: usize, v: Var) -> Result<u32> {
    match v {
        Var::Y(k) if k >= n => Err(Error::InvalidParameter(format!("coordinate {v} outside dimension {n}"))),
        _ => Ok(1 << v.index(n)),
    }
}

fn mask_indices(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of `dx_A ∧ dx_B` relative to `dx_{A∪B}` for disjoint `A`, `B`.
fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    for j in mask_indices(b) {
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A differential form of fixed degree with expression coefficients.
#[derive(Clone, Debug)]
pub struct WaveForm {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<u32, Expr>,
}

impl WaveForm {
    pub fn zero(n: usize, degree: usize) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::InvalidParameter(format!("spatial dimension {n} exceeds {MAX_DIM}")));
        }
        if degree > n + 2 {
            return Err(Error::InvalidParameter(format!("degree {degree} exceeds {}", n + 2)));
        }
        Ok(WaveForm { n, degree, coeffs: BTreeMap::new() })
    }

    fn empty(n: usize, degree: usize) -> Self {
        WaveForm { n, degree, coeffs: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn scalar(n: usize, e: Expr) -> Result<Self> {
        let mut w = Self::zero(n, 0)?;
        w.insert(0, e);
        Ok(w)
    }

    /// `c · dx_{v1} ∧ … ∧ dx_{vk}` in the given order (sign applied when sorting).
    pub fn monomial(n: usize, c: Expr, vars: &[Var]) -> Result<Self> {
        let mut w = Self::zero(n, vars.len())?;
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &v in vars {
            let bit = var_bit(n, v)?;
            if mask & bit != 0 {
                return Ok(w);
            }
            sign *= wedge_sign(mask, bit);
            mask |= bit;
        }
        w.insert(mask, c.scale(Complex64::new(sign, 0.0)));
        Ok(w)
    }

    /// The coordinate 1-form `dx_v`.
    pub fn differential(n: usize, v: Var) -> Result<Self> {
        Self::monomial(n, Expr::one(), &[v])
    }

    /// Builds a form from `(increasing coordinate list, coefficient)` pairs.
    pub fn from_terms(n: usize, degree: usize, terms: Vec<(Vec<Var>, Expr)>) -> Result<Self> {
        let mut w = Self::zero(n, degree)?;
        for (vars, c) in terms {
            if vars.len() != degree {
                return Err(Error::DimensionMismatch { expected: degree, found: vars.len() });
            }
            w = w.add(&Self::monomial(n, c, &vars)?)?;
        }
        Ok(w)
    }

    fn insert(&mut self, mask: u32, e: Expr) {
        if e.is_zero() {
            return;
        }
        let sum = match self.coeffs.remove(&mask) {
            Some(old) => Expr::add(&old, &e),
            None => e,
        };
        if !sum.is_zero() {
            self.coeffs.insert(mask, sum);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `dx_{v1} ∧ … ∧ dx_{vk}`, with the sign of the permutation to increasing order.
    pub fn coefficient(&self, vars: &[Var]) -> Expr {
        if vars.len() != self.degree {
            return Expr::zero();
        }
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &v in vars {
            let Ok(bit) = var_bit(self.n, v) else { return Expr::zero() };
            if mask & bit != 0 {
                return Expr::zero();
            }
            sign *= wedge_sign(mask, bit);
            mask |= bit;
        }
        match self.coeffs.get(&mask) {
            Some(c) if sign < 0.0 => -c,
            Some(c) => c.clone(),
            None => Expr::zero(),
        }
    }

    /// Non-zero terms as `(increasing coordinates, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<Var>, &Expr)> + '_ {
        self.coeffs
            .iter()
            .map(move |(&m, c)| (mask_indices(m).map(|i| Var::from_index(i, self.n)).collect(), c))
    }

    fn check_compatible(&self, other: &WaveForm) -> Result<()> {
        check_dim(self.n, other.n)?;
        check_dim(self.degree, other.degree)
    }

    pub fn add(&self, other: &WaveForm) -> Result<WaveForm> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&m, c) in &other.coeffs {
            out.insert(m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &WaveForm) -> Result<WaveForm> {
        self.add(&other.scale(&Expr::real(-1.0)))
    }

    /// Multiplies every coefficient by `f`.
    pub fn scale(&self, f: &Expr) -> WaveForm {
        let mut out = Self::empty(self.n, self.degree);
        for (&m, c) in &self.coeffs {
            out.insert(m, c * f);
        }
        out
    }

    pub fn wedge(&self, other: &WaveForm) -> Result<WaveForm> {
        check_dim(self.n, other.n)?;
        let mut out = Self::empty(self.n, self.degree + other.degree);
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &other.coeffs {
                if a & b != 0 {
                    continue;
                }
                out.insert(a | b, (ca * cb).scale(Complex64::new(wedge_sign(a, b), 0.0)));
            }
        }
        Ok(out)
    }

    /// Coordinate exterior derivative, with `r` treated as an ordinary coordinate.
    pub fn d(&self) -> WaveForm {
        let mut out = Self::empty(self.n, self.degree + 1);
        for (&m, c) in &self.coeffs {
            for j in 0..self.n + 2 {
                let bit = 1u32 << j;
                if m & bit != 0 {
                    continue;
                }
                let dc = c.diff(Var::from_index(j, self.n));
                if !dc.is_zero() {
                    out.insert(m | bit, dc.scale(Complex64::new(wedge_sign(bit, m), 0.0)));
                }
            }
        }
        out
    }

    /// `d̃ω = dω + (im/ħ) dr ∧ ω`.
    pub fn wave_d(&self, consts: &PhysicalConstants) -> WaveForm {
        let dr = Self::differential(self.n, Var::R).expect("r is always a coordinate");
        let twist = dr.wedge(self).expect("same dimension").scale(&Expr::constant(consts.i_m_over_hbar()));
        self.d().add(&twist).expect("same shape")
    }

    /// Interior product `i_X ω`.
    pub fn interior(&self, x: &WaveVectorField) -> Result<WaveForm> {
        check_dim(self.n, x.dim())?;
        if self.degree == 0 {
            return Self::zero(self.n, 0);
        }
        let mut out = Self::zero(self.n, self.degree - 1)?;
        for (&m, c) in &self.coeffs {
            for (pos, i) in mask_indices(m).enumerate() {
                let comp = &x.components[i];
                if comp.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.insert(m & !(1 << i), (c * comp).scale(Complex64::new(sign, 0.0)));
            }
        }
        Ok(out)
    }

    /// Largest randomized deviation between corresponding coefficients.
    pub fn max_deviation(&self, other: &WaveForm, tol: f64) -> Result<f64> {
        self.check_compatible(other)?;
        let mut masks: Vec<u32> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        masks.sort_unstable();
        masks.dedup();
        let zero = Expr::zero();
        let mut dev = 0.0f64;
        for m in masks {
            let a = self.coeffs.get(&m).unwrap_or(&zero);
            let b = other.coeffs.get(&m).unwrap_or(&zero);
            dev = dev.max(compare(a, b, tol)?.max_dev);
        }
        Ok(dev)
    }

    /// Randomized equality of all coefficients.
    pub fn equals(&self, other: &WaveForm, tol: f64) -> bool {
        self.max_deviation(other, tol).map(|d| d <= tol).unwrap_or(false)
    }
}

impl fmt::Display for WaveForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (k, (vars, c)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let basis = vars.iter().map(|v| format!("d{v}")).collect::<Vec<_>>().join(" ∧ ");
            let coeff = c.to_string();
            let coeff = if coeff.contains(' ') { format!("({coeff})") } else { coeff };
            match (basis.is_empty(), c.is_one()) {
                (true, _) => f.write_str(&coeff)?,
                (false, true) => f.write_str(&basis)?,
                (false, false) => write!(f, "{coeff} {basis}")?,
            }
        }
        Ok(())
    }
}

/// `Σ f_k ∂_{y_k} + g ∂_t + h ∂_r`.
#[derive(Clone, Debug)]
pub struct WaveVectorField {
    components: Vec<Expr>,
}

impl WaveVectorField {
    pub fn new(f: Vec<Expr>, g: Expr, h: Expr) -> Self {
        let mut components = f;
        components.push(g);
        components.push(h);
        WaveVectorField { components }
    }

    pub fn zero(n: usize) -> Self {
        WaveVectorField { components: vec![Expr::zero(); n + 2] }
    }

    /// The coordinate field `∂_v`.
    pub fn coordinate(n: usize, v: Var) -> Self {
        let mut x = Self::zero(n);
        x.components[v.index(n)] = Expr::one();
        x
    }

    /// Components over `(∂_{y1}..∂_{yn}, ∂_t, ∂_r)`.
    pub fn from_components(components: Vec<Expr>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: components.len() });
        }
        Ok(WaveVectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len() - 2
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn f(&self) -> &[Expr] {
        &self.components[..self.dim()]
    }

    pub fn g(&self) -> &Expr {
        &self.components[self.dim()]
    }

    pub fn h(&self) -> &Expr {
        &self.components[self.dim() + 1]
    }

    /// `X` acting as a derivation on an expression that may depend on `r`.
    pub fn derivation(&self, e: &Expr) -> Expr {
        let n = self.dim();
        Expr::sum(self.components.iter().enumerate().map(|(i, c)| c * e.diff(Var::from_index(i, n))))
    }

    /// `Σ f_k ∂_kψ + g ∂_tψ + (im/ħ) h ψ` on an r-free representative.
    pub fn act(&self, psi: &Expr, consts: &PhysicalConstants) -> Expr {
        let mut terms: Vec<Expr> = self.f().iter().enumerate().map(|(k, f)| f * psi.diff(Var::Y(k))).collect();
        terms.push(self.g() * psi.diff(Var::T));
        terms.push((self.h() * psi).scale(consts.i_m_over_hbar()));
        Expr::sum(terms)
    }

    pub fn require_r_free(&self) -> Result<()> {
        self.components.iter().try_for_each(Expr::require_r_free)
    }
}

impl fmt::Display for WaveVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let mut first = true;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let v = Var::from_index(i, n);
            let coeff = c.to_string();
            if c.is_one() {
                write!(f, "∂{v}")?;
            } else if coeff.contains(' ') {
                write!(f, "({coeff}) ∂{v}")?;
            } else {
                write!(f, "{coeff} ∂{v}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// The first-order operator `ψ ↦ Σ f_k ∂_kψ + g ∂_tψ + (im/ħ) h ψ` attached to `x`.
pub fn schrodinger_operator_of_field<'a>(
    x: &'a WaveVectorField,
    consts: &PhysicalConstants,
) -> impl Fn(&Expr) -> Expr + 'a {
    let consts = *consts;
    move |psi| x.act(psi, &consts)
}

/// Symmetric bilinear form over the coordinate basis `(y1..yn, t, r)`.
#[derive(Clone, Debug)]
pub struct Metric {
    n: usize,
    entries: Vec<Vec<Expr>>,
}

impl Metric {
    /// Builds a metric from a full matrix; rejects asymmetric input.
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let size = entries.len();
        if size < 2 {
            return Err(Error::InvalidParameter("metric needs at least the t and r rows".into()));
        }
        for row in &entries {
            check_dim(size, row.len())?;
        }
        for i in 0..size {
            for j in 0..i {
                if entries[i][j].to_string() != entries[j][i].to_string() {
                    return Err(Error::InvalidParameter(format!("metric entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(Metric { n: size - 2, entries })
    }

    /// `Σ dy_k² + dt⊗dr + dr⊗dt`; the same matrix is the contravariant form.
    pub fn schrodinger(n: usize) -> Self {
        Self::perturbed(n, &vec![0.0; n], 0.0, 1.0)
    }

    /// `Σ dy_k² + Σ B_k dy_k∨dr + C dr⊗dr + D dt∨dr`.
    pub fn perturbed(n: usize, b: &[f64], c: f64, d: f64) -> Self {
        assert_eq!(b.len(), n, "one B_k per spatial coordinate");
        let size = n + 2;
        let mut entries = vec![vec![Expr::zero(); size]; size];
        for k in 0..n {
            entries[k][k] = Expr::one();
            entries[k][n + 1] = Expr::real(b[k]);
            entries[n + 1][k] = Expr::real(b[k]);
        }
        entries[n][n + 1] = Expr::real(d);
        entries[n + 1][n] = Expr::real(d);
        entries[n + 1][n + 1] = Expr::real(c);
        Metric { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    /// Real matrix of a constant-coefficient metric.
    pub fn constant_matrix(&self) -> Result<DMatrix<f64>> {
        let size = self.n + 2;
        let mut out = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                let c = self.entries[i][j]
                    .as_const()
                    .ok_or_else(|| Error::InvalidParameter(format!("metric entry ({i},{j}) is not constant")))?;
                if c.im != 0.0 {
                    return Err(Error::InvalidParameter(format!("metric entry ({i},{j}) is not real")));
                }
                out[(i, j)] = c.re;
            }
        }
        Ok(out)
    }

    fn from_matrix(n: usize, m: &DMatrix<f64>) -> Self {
        let entries = (0..n + 2).map(|i| (0..n + 2).map(|j| Expr::real(m[(i, j)])).collect()).collect();
        Metric { n, entries }
    }

    /// Contravariant form of a constant metric.
    pub fn inverse(&self) -> Result<Metric> {
        let m = self.constant_matrix()?;
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("metric is degenerate".into()))?;
        Ok(Self::from_matrix(self.n, &inv))
    }

    /// `(positive, negative)` eigenvalue counts of a constant metric.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let eig = SymmetricEigen::new(self.constant_matrix()?);
        let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        Ok((pos, neg))
    }

    /// `i_X μ`, the 1-form with components `Σ_i X^i μ_ij`.
    pub fn lower(&self, x: &WaveVectorField) -> Result<WaveForm> {
        check_dim(self.n, x.dim())?;
        let mut w = WaveForm::zero(self.n, 1)?;
        for j in 0..self.n + 2 {
            let c = Expr::sum((0..self.n + 2).map(|i| &x.components[i] * &self.entries[i][j]));
            w.insert(1 << j, c);
        }
        Ok(w)
    }

    /// Raises a 1-form with this matrix taken as the contravariant metric.
    pub fn raise_with(&self, form: &WaveForm) -> Result<WaveVectorField> {
        check_dim(self.n, form.dim())?;
        check_dim(1, form.degree())?;
        let size = self.n + 2;
        let comps = (0..size)
            .map(|i| {
                Expr::sum((0..size).map(|j| {
                    let a = form.coefficient(&[Var::from_index(j, self.n)]);
                    &self.entries[i][j] * a
                }))
            })
            .collect();
        Ok(WaveVectorField { components: comps })
    }

    /// Solves `i_X μ = form` for a constant metric.
    pub fn raise(&self, form: &WaveForm) -> Result<WaveVectorField> {
        self.inverse()?.raise_with(form)
    }
}

/// Exact Jacobian of the affine change `(y, t, r) ↦ (y + w + (t+t0)v, t + t0, r − ⟨y + w + ½(t+t0)v, v⟩ − c)`.
pub fn transition_jacobian(g: &GalileanTransition) -> DMatrix<f64> {
    let n = g.dim();
    let v = g.velocity();
    let size = n + 2;
    let mut j = DMatrix::zeros(size, size);
    for k in 0..n {
        j[(k, k)] = 1.0;
        j[(k, n)] = v[k];
        j[(n + 1, k)] = -v[k];
    }
    j[(n, n)] = 1.0;
    j[(n + 1, n)] = -0.5 * v.iter().map(|x| x * x).sum::<f64>();
    j[(n + 1, n + 1)] = 1.0;
    j
}

/// `max |Jᵀ M J − M|` for the Jacobian of `g` lifted to the bundle coordinates.
pub fn metric_invariance_residual(metric: &Metric, g: &GalileanTransition) -> Result<f64> {
    check_dim(metric.dim(), g.dim())?;
    let m = metric.constant_matrix()?;
    let j = transition_jacobian(g);
    let pulled = j.transpose() * &m * j;
    Ok((pulled - m).amax())
}

/// `Ω = dy1 ∧ … ∧ dyn ∧ dt ∧ dr`.
pub fn schrodinger_volume(n: usize) -> Result<WaveForm> {
    let mut w = WaveForm::zero(n, n + 2)?;
    w.insert((1u32 << (n + 2)) - 1, Expr::one());
    Ok(w)
}

fn require_spatial(psi: &Expr, n: usize) -> Result<()> {
    psi.require_r_free()?;
    let found = psi.spatial_dim();
    if found > n {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(())
}

/// `d̃ψ` for a wave function in `n` spatial dimensions.
pub fn wave_d_function(psi: &Expr, n: usize, consts: &PhysicalConstants) -> Result<WaveForm> {
    require_spatial(psi, n)?;
    Ok(WaveForm::scalar(n, psi.clone())?.wave_d(consts))
}

/// Solves `i_{∇ψ} μ = d̃ψ`.
pub fn wave_gradient(psi: &Expr, n: usize, consts: &PhysicalConstants) -> Result<WaveVectorField> {
    let form = wave_d_function(psi, n, consts)?;
    // the Schrödinger metric is its own inverse in this basis
    Metric::schrodinger(n).raise_with(&form)
}

/// The coefficient of `d̃(i_Y Ω)` against `Ω`.
pub fn wave_divergence(y: &WaveVectorField, consts: &PhysicalConstants) -> Result<Expr> {
    y.require_r_free()?;
    let n = y.dim();
    let vol = schrodinger_volume(n)?;
    let top = vol.interior(y)?.wave_d(consts);
    Ok(top.coefficient(&Var::all(n)))
}

/// `Δψ = div(∇ψ)`.
pub fn schrodinger_laplace(psi: &Expr, n: usize, consts: &PhysicalConstants) -> Result<Expr> {
    wave_divergence(&wave_gradient(psi, n, consts)?, consts)
}

/// `Σ ∂²ψ/∂y_k² + (2im/ħ) ∂ψ/∂t`, computed directly.
pub fn laplace_coordinates(psi: &Expr, n: usize, consts: &PhysicalConstants) -> Expr {
    let mut terms: Vec<Expr> = (0..n).map(|k| psi.diff(Var::Y(k)).diff(Var::Y(k))).collect();
    terms.push(psi.diff(Var::T).scale(consts.i_m_over_hbar() * 2.0));
    Expr::sum(terms)
}

/// A form of the given degree whose coefficients are random members of the `shape` class.
pub fn random_form<R: Rng>(rng: &mut R, n: usize, degree: usize, shape: &ExprShape) -> Result<WaveForm> {
    let mut w = WaveForm::zero(n, degree)?;
    for mask in 0u32..(1 << (n + 2)) {
        if mask.count_ones() as usize == degree && rng.gen_bool(0.6) {
            w.insert(mask, random_expr(rng, n, shape));
        }
    }
    Ok(w)
}

/// A vector field with random components of the `shape` class.
pub fn random_field<R: Rng>(rng: &mut R, n: usize, shape: &ExprShape) -> WaveVectorField {
    WaveVectorField { components: (0..n + 2).map(|_| random_expr(rng, n, shape)).collect() }
}
