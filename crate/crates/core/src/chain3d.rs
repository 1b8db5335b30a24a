//! The 3D chain complex `0 → V0' → V2 → V3 → V0' → 0`, its torsions and
//! their Grassmann generating functions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grassmann::{
    apply_product, invert_operator_on_one, FirstOrderOperator, Gen, GeneratorRegistry,
    GrassmannElement, Monomial,
};
use crate::linalg::Matrix;
use crate::scalars::{Scalar, Vertex, ZetaAssignment};
use crate::triangulation::{SimplexClass, Triangulation};

/// Expresses every coordinate of a simplex through its leading ones.
///
/// Coordinates `y_v` attached to the vertices `v` of a simplex obey
/// `Σ y_v = 0` and `Σ ζ_v y_v = 0`, so all but the first `n - 2` are
/// determined. Row `p` of the result holds the coefficients of `y_{v_p}`
/// over the leading coordinates.
pub fn coordinate_coefficients(z: &ZetaAssignment, labels: &[Vertex]) -> Result<Vec<Vec<Scalar>>> {
    let n = labels.len();
    let lead = n - 2;
    let (t1, t2) = (labels[n - 2], labels[n - 1]);
    let d12 = z.inv_diff(t1, t2)?;
    let mut out = Vec::with_capacity(n);
    for p in 0..lead {
        let mut row = vec![Scalar::zero(); lead];
        row[p] = Scalar::one();
        out.push(row);
    }
    let mut r1 = Vec::with_capacity(lead);
    let mut r2 = Vec::with_capacity(lead);
    for &l in &labels[..lead] {
        r1.push(-z.diff(l, t2)? * &d12);
        r2.push(z.diff(l, t1)? * &d12);
    }
    out.push(r1);
    out.push(r2);
    Ok(out)
}

fn label_string(labels: &[Vertex]) -> String {
    if labels.iter().all(|&v| v < 10) {
        labels.iter().map(|v| v.to_string()).collect()
    } else {
        labels.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("_")
    }
}

/// Generator name of a face or facet class; label sets shared by several
/// classes get a `#k` suffix.
pub fn simplex_names(prefix: &str, classes: &[SimplexClass]) -> Vec<String> {
    let mut count: HashMap<&[Vertex], usize> = HashMap::new();
    for c in classes {
        *count.entry(&c.labels).or_default() += 1;
    }
    let mut seen: HashMap<&[Vertex], usize> = HashMap::new();
    classes
        .iter()
        .map(|c| {
            let base = format!("{prefix}{}", label_string(&c.labels));
            if count[c.labels.as_slice()] > 1 {
                let k = seen.entry(&c.labels).or_default();
                *k += 1;
                format!("{base}#{}", *k - 1)
            } else {
                base
            }
        })
        .collect()
}

/// Base name (`1234`, or `1234#id` when labels repeat) of every top cell.
pub fn cell_names(t: &Triangulation) -> Vec<String> {
    let mut count: HashMap<&[Vertex], usize> = HashMap::new();
    for c in t.cells() {
        *count.entry(&c.vertices).or_default() += 1;
    }
    t.cells()
        .iter()
        .map(|c| {
            let base = label_string(&c.vertices);
            if count[c.vertices.as_slice()] > 1 {
                format!("{base}#{}", c.id)
            } else {
                base
            }
        })
        .collect()
}

/// Grassmann generators of a 3D complex: `b1_r`, `b2_r` per tetrahedron and
/// `a_s` per 2-face.
#[derive(Clone, Debug)]
pub struct Vars3 {
    pub registry: Arc<GeneratorRegistry>,
    /// `(b1, b2)` for each cell, by cell index.
    pub b: Vec<(Gen, Gen)>,
    /// Generator of each 2-face class.
    pub a: Vec<Gen>,
}

impl Vars3 {
    pub fn b_names(t: &Triangulation) -> Vec<(String, String)> {
        cell_names(t)
            .into_iter()
            .map(|n| (format!("b1_{n}"), format!("b2_{n}")))
            .collect()
    }

    pub fn a_names(t: &Triangulation) -> Vec<String> {
        simplex_names("a", &t.classification().simplices[2])
    }

    /// Registry holding the generators of every listed complex: all `b`,
    /// then inner faces, then boundary faces, then `extra`, each group in
    /// order of first appearance.
    pub fn registry_for(ts: &[&Triangulation], extra: &[&str]) -> Result<Arc<GeneratorRegistry>> {
        let mut names: Vec<String> = Vec::new();
        let push = |n: String, names: &mut Vec<String>| {
            if !names.contains(&n) {
                names.push(n);
            }
        };
        for t in ts {
            for (b1, b2) in Self::b_names(t) {
                push(b1, &mut names);
                push(b2, &mut names);
            }
        }
        for inner in [true, false] {
            for t in ts {
                let classes = &t.classification().simplices[2];
                for (c, n) in classes.iter().zip(Self::a_names(t)) {
                    if c.is_inner() == inner {
                        push(n, &mut names);
                    }
                }
            }
        }
        for e in extra {
            push(e.to_string(), &mut names);
        }
        GeneratorRegistry::new(names)
    }

    pub fn new(t: &Triangulation) -> Result<Self> {
        Self::in_registry(t, &Self::registry_for(&[t], &[])?)
    }

    pub fn in_registry(t: &Triangulation, registry: &Arc<GeneratorRegistry>) -> Result<Self> {
        if t.dimension() != 3 {
            return Err(Error::Precondition("3D complex required".into()));
        }
        let b = Self::b_names(t)
            .iter()
            .map(|(x, y)| Ok((registry.index(x)?, registry.index(y)?)))
            .collect::<Result<_>>()?;
        let a = Self::a_names(t)
            .iter()
            .map(|n| registry.index(n))
            .collect::<Result<_>>()?;
        Ok(Self { registry: registry.clone(), b, a })
    }

    /// Generators `(b1, b2)` of every tetrahedron followed by the inner
    /// faces in class order: the measure `db da_inner`.
    pub fn measure(&self, t: &Triangulation) -> Vec<Gen> {
        let mut m: Vec<Gen> = self.b.iter().flat_map(|&(x, y)| [x, y]).collect();
        m.extend(t.classification().inner(2).map(|(k, _)| self.a[k]));
        m
    }

    pub fn inner_a_mask(&self, t: &Triangulation) -> Monomial {
        t.classification().inner(2).fold(0, |m, (k, _)| m | 1 << self.a[k])
    }

    pub fn boundary_a(&self, t: &Triangulation) -> Vec<Gen> {
        t.classification().boundary(2).map(|(k, _)| self.a[k]).collect()
    }
}

/// Face class of each slot of each cell.
fn face_table(t: &Triangulation) -> Vec<[usize; 4]> {
    (0..t.cells().len())
        .map(|k| std::array::from_fn(|s| t.facet_class(k, s)))
        .collect()
}

/// Vertex class of each local vertex position of each cell.
fn vertex_table(t: &Triangulation) -> Vec<Vec<usize>> {
    let c = t.classification();
    (0..t.cells().len())
        .map(|k| (0..=t.dimension()).map(|p| c.class_of(k, 1 << p)).collect())
        .collect()
}

/// Column index of every inner vertex class, or `None`.
fn inner_vertex_columns(t: &Triangulation) -> (Vec<Option<usize>>, Vec<Vertex>) {
    let c = t.classification();
    let mut col = vec![None; c.count(0)];
    let mut labels = Vec::new();
    for (k, s) in c.inner(0) {
        col[k] = Some(labels.len());
        labels.push(s.labels[0]);
    }
    (col, labels)
}

/// `f2`: rows are 2-face classes, columns inner vertices.
pub fn build_f2(t: &Triangulation, z: &ZetaAssignment) -> Result<Matrix> {
    let c = t.classification();
    let (vcol, vlabels) = inner_vertex_columns(t);
    let faces = &c.simplices[2];
    let mut m = Matrix::labeled(
        simplex_names("a", faces),
        vlabels.iter().map(|v| format!("u{v}")).collect(),
    );
    for (row, s) in faces.iter().enumerate() {
        let (cell, mask) = s.members[0];
        let [i, j, k] = [s.labels[0], s.labels[1], s.labels[2]];
        let inv_ij = z.inv_diff(i, j)?;
        let inv_ik = z.inv_diff(i, k)?;
        let coeffs = [&inv_ij - &inv_ik, -inv_ij, inv_ik];
        for (lab, coef) in s.labels.iter().zip(coeffs) {
            let local = t.cell(cell).mask_of(&[*lab]).unwrap();
            debug_assert!(mask & local != 0);
            if let Some(col) = vcol[c.class_of(cell, local)] {
                m.add_to(row, col, &coef);
            }
        }
    }
    Ok(m)
}

/// `f3`: rows are the two leading coordinates of every tetrahedron,
/// columns the 2-face classes.
pub fn build_f3(t: &Triangulation, z: &ZetaAssignment) -> Result<Matrix> {
    let c = t.classification();
    let faces = face_table(t);
    let names = cell_names(t);
    let mut m = Matrix::labeled(
        names.iter().flat_map(|n| [format!("b1_{n}"), format!("b2_{n}")]).collect(),
        simplex_names("a", &c.simplices[2]),
    );
    for (k, cell) in t.cells().iter().enumerate() {
        let v = &cell.vertices;
        // y_{r,v0} = x_(012),v0 - x_(013),v0 + x_(023),v0
        // y_{r,v1} = x_(012),v1 - x_(013),v1 - x_(123),v1
        let terms: [[(usize, usize, i64); 3]; 2] = [
            [(3, 0, 1), (2, 0, -1), (1, 0, 1)],
            [(3, 1, 1), (2, 1, -1), (0, 1, -1)],
        ];
        for (row, list) in terms.iter().enumerate() {
            for &(slot, pos, sign) in list {
                let face: Vec<Vertex> = cell.facet(slot);
                let coeffs = coordinate_coefficients(z, &face)?;
                let p = face.iter().position(|&x| x == v[pos]).unwrap();
                let val = &coeffs[p][0] * Scalar::from_integer(sign.into());
                m.add_to(2 * k + row, faces[k][slot], &val);
            }
        }
    }
    Ok(m)
}

/// `f4`: rows are inner vertices, columns the tetrahedron coordinates.
pub fn build_f4(t: &Triangulation, z: &ZetaAssignment) -> Result<Matrix> {
    let (vcol, vlabels) = inner_vertex_columns(t);
    let verts = vertex_table(t);
    let names = cell_names(t);
    let mut m = Matrix::labeled(
        vlabels.iter().map(|v| format!("v{v}")).collect(),
        names.iter().flat_map(|n| [format!("b1_{n}"), format!("b2_{n}")]).collect(),
    );
    for (k, cell) in t.cells().iter().enumerate() {
        let coeffs = coordinate_coefficients(z, &cell.vertices)?;
        let eps = Scalar::from_integer(cell.epsilon.into());
        for p in 0..4 {
            if let Some(row) = vcol[verts[k][p]] {
                for l in 0..2 {
                    m.add_to(row, 2 * k + l, &(&eps * &coeffs[p][l]));
                }
            }
        }
    }
    Ok(m)
}

/// Checks `f3 f2 = 0` and `f4 f3 = 0`.
pub fn check_complex(t: &Triangulation, z: &ZetaAssignment) -> Result<bool> {
    let f2 = build_f2(t, z)?;
    let f3 = build_f3(t, z)?;
    let f4 = build_f4(t, z)?;
    Ok(f3.mul(&f2)?.is_zero() && f4.mul(&f3)?.is_zero())
}

/// Reidemeister torsion of one restricted complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Torsion {
    Value(Scalar),
    /// No τ-chain exists; the torsion is taken to vanish.
    NoChain,
}

impl Torsion {
    pub fn value(&self) -> Scalar {
        match self {
            Torsion::Value(v) => v.clone(),
            Torsion::NoChain => Scalar::zero(),
        }
    }
}

/// Matrices and the fixed `f2`/`f4` minors shared by every subset `C`.
#[derive(Clone, Debug)]
pub struct TorsionSetup {
    pub f2: Matrix,
    pub f3: Matrix,
    pub f4: Matrix,
    /// Inner face classes, in the fixed order.
    pub inner_faces: Vec<usize>,
    pub boundary_faces: Vec<usize>,
    /// Rows of `f2` (face classes) used in its minor.
    pub f2_rows: Vec<usize>,
    /// Columns of `f4` used in its minor.
    pub f4_cols: Vec<usize>,
    /// `minor f2 · minor f4`, or `None` when no τ-chain can exist.
    pub denominator: Option<Scalar>,
}

impl TorsionSetup {
    pub fn new(t: &Triangulation, z: &ZetaAssignment) -> Result<Self> {
        let c = t.classification();
        let f2 = build_f2(t, z)?;
        let f3 = build_f3(t, z)?;
        let f4 = build_f4(t, z)?;
        let inner_faces: Vec<usize> = c.inner(2).map(|(k, _)| k).collect();
        let boundary_faces: Vec<usize> = c.boundary(2).map(|(k, _)| k).collect();
        let n0 = f2.cols();
        let restricted = f2.submatrix(&inner_faces, &(0..n0).collect::<Vec<_>>())?;
        let f2_rows: Vec<usize> = restricted
            .independent_rows()
            .into_iter()
            .map(|k| inner_faces[k])
            .collect();
        let f4_cols = f4.independent_cols();
        let denominator = if f2_rows.len() == n0 && f4_cols.len() == n0 {
            let m2 = f2.minor(&f2_rows, &(0..n0).collect::<Vec<_>>())?;
            let m4 = f4.minor(&(0..n0).collect::<Vec<_>>(), &f4_cols)?;
            Some(m2 * m4)
        } else {
            None
        };
        Ok(Self { f2, f3, f4, inner_faces, boundary_faces, f2_rows, f4_cols, denominator })
    }

    /// Required cardinality `2 N3 - N2'` of a subset `C`.
    pub fn subset_size(&self) -> usize {
        self.f3.rows().saturating_sub(self.inner_faces.len())
    }

    /// Torsion of the complex restricted to the inner faces followed by
    /// the boundary faces `c` (face class indices, in the given order).
    pub fn torsion(&self, c: &[usize]) -> Result<Torsion> {
        if c.len() != self.subset_size() {
            return Err(Error::Precondition(format!(
                "subset has {} faces, expected {}",
                c.len(),
                self.subset_size()
            )));
        }
        for s in c {
            if !self.boundary_faces.contains(s) {
                return Err(Error::Precondition(format!("face {s} is not a boundary face")));
            }
        }
        let Some(den) = &self.denominator else {
            return Ok(Torsion::NoChain);
        };
        let cols: Vec<usize> = self
            .inner_faces
            .iter()
            .chain(c)
            .copied()
            .filter(|k| !self.f2_rows.contains(k))
            .collect();
        let rows: Vec<usize> = (0..self.f3.rows()).filter(|r| !self.f4_cols.contains(r)).collect();
        let num = self.f3.minor(&rows, &cols)?;
        if num.is_zero() {
            Ok(Torsion::NoChain)
        } else {
            Ok(Torsion::Value(num / den))
        }
    }
}

pub fn torsion_tau(t: &Triangulation, z: &ZetaAssignment, c: &[usize]) -> Result<Torsion> {
    TorsionSetup::new(t, z)?.torsion(c)
}

/// `∏ ζ_{s2 s3} / (∏ ζ_{l1 l2} · ∏ ζ_{r3 r4})` over inner faces, inner edges
/// and all tetrahedra.
pub fn prefactor(t: &Triangulation, z: &ZetaAssignment) -> Result<Scalar> {
    let c = t.classification();
    let mut num = Scalar::one();
    for (_, s) in c.inner(2) {
        num *= z.diff(s.labels[1], s.labels[2])?;
    }
    let mut den = Scalar::one();
    for (_, e) in c.inner(1) {
        den *= z.diff(e.labels[0], e.labels[1])?;
    }
    for cell in t.cells() {
        den *= z.diff(cell.vertices[2], cell.vertices[3])?;
    }
    Ok(num / den)
}

pub fn invariant_i0(t: &Triangulation, z: &ZetaAssignment, c: &[usize]) -> Result<Scalar> {
    Ok(prefactor(t, z)? * torsion_tau(t, z, c)?.value())
}

/// `Φ_r` for the cell with index `k`.
pub fn phi(t: &Triangulation, z: &ZetaAssignment, vars: &Vars3, k: usize) -> Result<GrassmannElement> {
    let cell = t.cell(k);
    let v = &cell.vertices;
    let faces: [usize; 4] = std::array::from_fn(|s| t.facet_class(k, s));
    // faces (123), (124), (134), (234) are slots 3, 2, 1, 0
    let a = [vars.a[faces[3]], vars.a[faces[2]], vars.a[faces[1]], vars.a[faces[0]]];
    let (b1, b2) = vars.b[k];
    let one = Scalar::one();
    let row1 = [one.clone(), -one.clone(), one.clone(), Scalar::zero()];
    let row2 = [
        -(z.diff(v[0], v[2])? * z.inv_diff(v[1], v[2])?),
        z.diff(v[0], v[3])? * z.inv_diff(v[1], v[3])?,
        Scalar::zero(),
        -one,
    ];
    let reg = &vars.registry;
    let mut out = GrassmannElement::zero(reg);
    for (b, row) in [(b1, row1), (b2, row2)] {
        for (ag, coef) in a.iter().zip(row) {
            out += &GrassmannElement::product_of(reg, &[b, *ag], coef);
        }
    }
    Ok(out)
}

/// `W_r = exp Φ_r`.
pub fn weight_w(t: &Triangulation, z: &ZetaAssignment, vars: &Vars3, k: usize) -> Result<GrassmannElement> {
    phi(t, z, vars, k)?.exp()
}

/// `d_i^a` for each inner vertex, in class order.
pub fn vertex_face_operators(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
) -> Result<Vec<(Vertex, FirstOrderOperator)>> {
    let f2 = build_f2(t, z)?;
    let (_, labels) = inner_vertex_columns(t);
    Ok(labels
        .iter()
        .enumerate()
        .map(|(col, &v)| {
            let mut d = FirstOrderOperator::new();
            for row in 0..f2.rows() {
                d.add(vars.a[row], f2.get(row, col).clone());
            }
            (v, d)
        })
        .collect())
}

/// `d_i^b` for each inner vertex, in class order.
pub fn vertex_tetra_operators(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
) -> Result<Vec<(Vertex, FirstOrderOperator)>> {
    let f4 = build_f4(t, z)?;
    let (_, labels) = inner_vertex_columns(t);
    Ok(labels
        .iter()
        .enumerate()
        .map(|(row, &v)| {
            let mut d = FirstOrderOperator::new();
            for (k, &(b1, b2)) in vars.b.iter().enumerate() {
                d.add(b1, f4.get(row, 2 * k).clone());
                d.add(b2, f4.get(row, 2 * k + 1).clone());
            }
            (v, d)
        })
        .collect())
}

/// `(∏ d_i^a)^{-1} 1` and `(∏ d_i^b)^{-1} 1` with the canonical choice.
pub fn vertex_preimages(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
) -> Result<(GrassmannElement, GrassmannElement)> {
    let da: Vec<_> = vertex_face_operators(t, z, vars)?.into_iter().map(|x| x.1).collect();
    let db: Vec<_> = vertex_tetra_operators(t, z, vars)?.into_iter().map(|x| x.1).collect();
    Ok((
        invert_operator_on_one(&vars.registry, &da)?,
        invert_operator_on_one(&vars.registry, &db)?,
    ))
}

/// `∫ ∏_r weights[r] · insertion  db da_inner`, the measure ordered as in
/// [`Vars3::measure`].
///
/// Each tetrahedron's pair `db1 db2` is integrated as soon as its weight
/// has been multiplied in; a term is dropped once it lacks an inner face
/// generator that no remaining factor can supply.
pub fn integrate_weights(
    t: &Triangulation,
    vars: &Vars3,
    weights: &[GrassmannElement],
    insertion: &GrassmannElement,
) -> Result<GrassmannElement> {
    let n = t.cells().len();
    let inner_mask = vars.inner_a_mask(t);
    let mut pending: Vec<Monomial> = vec![0; n + 1];
    for k in (0..n).rev() {
        let faces: Monomial = (0..4).fold(0, |m, s| m | 1 << vars.a[t.facet_class(k, s)]);
        pending[k] = pending[k + 1] | (faces & inner_mask);
    }
    let mut acc = insertion.clone();
    for (k, w) in weights.iter().enumerate() {
        let need = inner_mask & !pending[k + 1];
        acc = acc.try_mul_filtered(w, |m| m & need == need)?;
        let (b1, b2) = vars.b[k];
        acc = acc.right_derivative(b1).right_derivative(b2);
    }
    let inner: Vec<Gen> = t.classification().inner(2).map(|(k, _)| vars.a[k]).collect();
    crate::grassmann::integrate_measure(&acc, &inner)
}

/// Generating function `T` with given vertex preimages `u` and `w`.
pub fn generating_function_t_with(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
    u: &GrassmannElement,
    w: &GrassmannElement,
) -> Result<GrassmannElement> {
    let one = GrassmannElement::one(&vars.registry);
    let da: Vec<_> = vertex_face_operators(t, z, vars)?.into_iter().map(|x| x.1).collect();
    let db: Vec<_> = vertex_tetra_operators(t, z, vars)?.into_iter().map(|x| x.1).collect();
    if apply_product(&da, u) != one || apply_product(&db, w) != one {
        return Err(Error::OperatorInversion("given preimage does not map to 1".into()));
    }
    let weights = (0..t.cells().len())
        .map(|k| weight_w(t, z, vars, k))
        .collect::<Result<Vec<_>>>()?;
    integrate_weights(t, vars, &weights, &(u * w))
}

pub fn generating_function_t(t: &Triangulation, z: &ZetaAssignment) -> Result<GrassmannElement> {
    let vars = Vars3::new(t)?;
    let (u, w) = vertex_preimages(t, z, &vars)?;
    generating_function_t_with(t, z, &vars, &u, &w)
}

/// `F = prefactor · T`.
pub fn generating_function_f(t: &Triangulation, z: &ZetaAssignment) -> Result<GrassmannElement> {
    Ok(generating_function_t(t, z)?.scale(&prefactor(t, z)?))
}

/// Coefficients of `T` keyed by subsets of boundary faces (ascending
/// face class order), paired with the minor-based torsions.
pub fn torsion_table(
    t: &Triangulation,
    z: &ZetaAssignment,
) -> Result<BTreeMap<Vec<usize>, (Scalar, Scalar)>> {
    let vars = Vars3::new(t)?;
    let tt = generating_function_t(t, z)?;
    let setup = TorsionSetup::new(t, z)?;
    let k = setup.subset_size();
    let mut out = BTreeMap::new();
    for subset in subsets(&setup.boundary_faces, k) {
        let mask = subset.iter().fold(0, |m, s| m | 1 << vars.a[*s]);
        // coefficient of a_{c1} … a_{ck} in the given order
        let gens: Vec<Gen> = subset.iter().map(|s| vars.a[*s]).collect();
        let sign = GrassmannElement::product_of(&vars.registry, &gens, Scalar::one()).coefficient(mask);
        let coef = tt.coefficient(mask) * sign;
        out.insert(subset.clone(), (coef, setup.torsion(&subset)?.value()));
    }
    Ok(out)
}

/// All `k`-element subsets of `items`, keeping their relative order.
pub fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mut rest in subsets(&items[1..], k - 1) {
        rest.insert(0, items[0].clone());
        out.push(rest);
    }
    out.extend(subsets(&items[1..], k));
    out
}
