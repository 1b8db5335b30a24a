//! Tetrahedron weights, their deformations, consistent α-systems and the
//! 2→3 and 1→4 relations.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::chain3d::{phi, vertex_face_operators, vertex_tetra_operators, weight_w, Vars3};
use crate::error::{Error, Result};
use crate::grassmann::{integrate_measure, invert_operator_on_one, GrassmannElement};
use crate::linalg::Matrix;
use crate::scalars::{sample_scalar, Scalar, Vertex, ZetaAssignment};
use crate::triangulation::{pachner_move, PachnerMove, Triangulation};

/// Deformation parameters keyed by the ascending vertex labels of a top
/// cell. Cells with equal labels share a value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaSystem {
    pub values: BTreeMap<Vec<Vertex>, Scalar>,
}

/// `α_{ijkl}` per tetrahedron.
pub type AlphaSystem3 = AlphaSystem;

impl AlphaSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, labels: &[Vertex], value: Scalar) {
        let mut k = labels.to_vec();
        k.sort_unstable();
        self.values.insert(k, value);
    }

    pub fn with(mut self, labels: &[Vertex], value: Scalar) -> Self {
        self.set(labels, value);
        self
    }

    /// Value for the given labels; absent entries count as zero.
    pub fn get(&self, labels: &[Vertex]) -> Scalar {
        let mut k = labels.to_vec();
        k.sort_unstable();
        self.values.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    /// The same value on every cell of the listed complexes.
    pub fn constant(ts: &[&Triangulation], value: Scalar) -> Self {
        let mut a = Self::new();
        for t in ts {
            for c in t.cells() {
                a.set(&c.vertices, value.clone());
            }
        }
        a
    }
}

/// `∫∫ X db1 db2` over the `b` pair of cell `k`, `db1` innermost.
fn integrate_b(vars: &Vars3, k: usize, x: &GrassmannElement) -> Result<GrassmannElement> {
    let (b1, b2) = vars.b[k];
    integrate_measure(x, &[b1, b2])
}

/// `𝒲_r = ∫∫ W_r db1 db2`.
pub fn integrated_weight(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
    k: usize,
) -> Result<GrassmannElement> {
    integrate_b(vars, k, &weight_w(t, z, vars, k)?)
}

/// `W̃_r = exp(Φ_r + ε_r ζ_{r3 r4} α_r b2 b1)`.
pub fn deformed_weight(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
    k: usize,
    alpha: &Scalar,
) -> Result<GrassmannElement> {
    let cell = t.cell(k);
    let (b1, b2) = vars.b[k];
    let c = Scalar::from_integer(cell.epsilon.into())
        * z.diff(cell.vertices[2], cell.vertices[3])?
        * alpha;
    let extra = GrassmannElement::product_of(&vars.registry, &[b2, b1], c);
    (&phi(t, z, vars, k)? + &extra).exp()
}

/// `𝒲̃_r = ∫∫ W̃_r db1 db2`.
pub fn deformed_integrated_weight(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
    k: usize,
    alpha: &Scalar,
) -> Result<GrassmannElement> {
    integrate_b(vars, k, &deformed_weight(t, z, vars, k, alpha)?)
}

/// Coefficient of the degree-4 term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Deg4Coefficient {
    /// `ε_r ζ_{r3 r4} ∏_{i<j} ζ_{r_i r_j}`.
    Printed,
    /// `ε_r ζ_{r1 r2} ζ_{r1 r3} ζ_{r1 r4}`, the form under which the 2→3
    /// relation holds.
    Balanced,
}

/// `𝒲_r + κ_r · a_{123} a_{124} a_{134} a_{234}`.
pub fn deformed_weight_deg4(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars3,
    k: usize,
    kind: Deg4Coefficient,
) -> Result<GrassmannElement> {
    let cell = t.cell(k);
    let v = &cell.vertices;
    let mut c = Scalar::from_integer(cell.epsilon.into());
    match kind {
        Deg4Coefficient::Printed => {
            c *= z.diff(v[2], v[3])?;
            for i in 0..4 {
                for j in i + 1..4 {
                    c *= z.diff(v[i], v[j])?;
                }
            }
        }
        Deg4Coefficient::Balanced => {
            c *= z.diff(v[0], v[1])? * z.diff(v[0], v[2])? * z.diff(v[0], v[3])?;
        }
    }
    let faces = [3, 2, 1, 0].map(|s| vars.a[t.facet_class(k, s)]);
    let extra = GrassmannElement::product_of(&vars.registry, &faces, c);
    Ok(&integrated_weight(t, z, vars, k)? + &extra)
}

/// Labels of the codimension-2 simplices of every listed complex.
fn hinge_labels(ts: &[&Triangulation]) -> BTreeSet<Vec<Vertex>> {
    ts.iter()
        .flat_map(|t| {
            t.classification().simplices[t.dimension() - 2].iter().map(|e| e.labels.clone())
        })
        .collect()
}

/// `Σ ζ_ij α_{ij…}` over the oriented link of a codimension-2 simplex.
pub fn link_sum(
    t: &Triangulation,
    z: &ZetaAssignment,
    hinge: &[Vertex],
    alpha: &AlphaSystem,
) -> Result<Scalar> {
    let Ok(link) = t.oriented_link_of(hinge) else {
        return Ok(Scalar::zero());
    };
    let mut s = Scalar::zero();
    for (id, i, j) in link {
        s += z.diff(i, j)? * alpha.get(&t.cell_by_id(id)?.vertices);
    }
    Ok(s)
}

/// Linear system of the balance conditions between two sides of a move:
/// one row per codimension-2 simplex, one column per top-cell label set.
pub fn alpha_equations(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
) -> Result<(Matrix, Vec<Vec<Vertex>>)> {
    let keys: Vec<Vec<Vertex>> = lhs
        .cells()
        .iter()
        .chain(rhs.cells())
        .map(|c| c.vertices.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let edges = hinge_labels(&[lhs, rhs]);
    let mut m = Matrix::labeled(
        edges.iter().map(|e| format!("hinge{e:?}")).collect(),
        keys.iter().map(|k| format!("alpha{k:?}")).collect(),
    );
    for (row, e) in edges.iter().enumerate() {
        for (col, key) in keys.iter().enumerate() {
            let unit = AlphaSystem::new().with(key, Scalar::one());
            let v = link_sum(lhs, z, e, &unit)? - link_sum(rhs, z, e, &unit)?;
            m.set(row, col, v);
        }
    }
    Ok((m, keys))
}

/// Whether the link sums agree between the two sides.
pub fn is_consistent(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
    alpha: &AlphaSystem,
) -> Result<bool> {
    for e in hinge_labels(&[lhs, rhs]) {
        if link_sum(lhs, z, &e, alpha)? != link_sum(rhs, z, &e, alpha)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Basis of all consistent α-systems for a move.
pub fn consistent_alpha_basis(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
) -> Result<Vec<AlphaSystem3>> {
    let (m, keys) = alpha_equations(lhs, rhs, z)?;
    Ok(m.null_space()
        .into_iter()
        .map(|v| AlphaSystem3 { values: keys.iter().cloned().zip(v).collect() })
        .collect())
}

/// Random combination of the basis systems.
pub fn random_consistent_alpha<R: Rng>(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
    rng: &mut R,
) -> Result<AlphaSystem3> {
    let mut out = AlphaSystem3::new();
    for c in lhs.cells().iter().chain(rhs.cells()) {
        out.set(&c.vertices, Scalar::zero());
    }
    for b in consistent_alpha_basis(lhs, rhs, z)? {
        let c = sample_scalar(rng);
        for (k, v) in b.values {
            let cur = out.get(&k);
            out.set(&k, cur + &c * v);
        }
    }
    Ok(out)
}

/// Completes the α's given on the left-hand side of a move to a
/// consistent system; free right-hand parameters are set to zero.
pub fn solve_alpha_move(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
    given: &AlphaSystem3,
) -> Result<AlphaSystem3> {
    let (m, keys) = alpha_equations(lhs, rhs, z)?;
    let lhs_keys: BTreeSet<Vec<Vertex>> = lhs.cells().iter().map(|c| c.vertices.clone()).collect();
    let unknown: Vec<usize> = (0..keys.len()).filter(|&k| !lhs_keys.contains(&keys[k])).collect();
    // m_u x_u = -m_k x_k, solved through the augmented matrix
    let mut aug = Matrix::zeros(m.rows(), unknown.len() + 1);
    for r in 0..m.rows() {
        for (c, &k) in unknown.iter().enumerate() {
            aug.set(r, c, m.get(r, k).clone());
        }
        let mut rhs_v = Scalar::zero();
        for (k, key) in keys.iter().enumerate() {
            if lhs_keys.contains(key) {
                rhs_v -= m.get(r, k) * given.get(key);
            }
        }
        aug.set(r, unknown.len(), rhs_v);
    }
    let (red, pivots) = aug.rref();
    if pivots.contains(&unknown.len()) {
        return Err(Error::InconsistentAlpha(
            "left-hand values admit no consistent completion".into(),
        ));
    }
    let mut out = AlphaSystem3::new();
    for key in &lhs_keys {
        out.set(key, given.get(key));
    }
    for &k in &unknown {
        out.set(&keys[k], Scalar::zero());
    }
    for (row, &p) in pivots.iter().enumerate() {
        out.set(&keys[unknown[p]], red.get(row, unknown.len()).clone());
    }
    Ok(out)
}

/// Left side `{1234, 1235}` and right side `{1245, 1345, 2345}` of the
/// 2→3 move, sharing one orientation with `ε_1234 = +1`.
pub fn move_23_sides() -> Result<(Triangulation, Triangulation)> {
    let lhs = Triangulation::glue_by_labels(3, &[vec![1, 2, 3, 4], vec![1, 2, 3, 5]])?;
    let (rhs, _) = pachner_move(&lhs, PachnerMove::TwoThree, &[0, 1], None)?;
    Ok((lhs, rhs))
}

/// `{1234}` and its cone `{1235, 1245, 1345, 2345}` over the new vertex 5,
/// with `ε_1234 = +1`.
pub fn move_14_sides() -> Result<(Triangulation, Triangulation)> {
    move_14_sides_oriented(1)
}

pub fn move_14_sides_oriented(epsilon: i8) -> Result<(Triangulation, Triangulation)> {
    let lhs = Triangulation::simplex(&[1, 2, 3, 4])?.with_epsilons(&[epsilon])?;
    let (rhs, _) = pachner_move(&lhs, PachnerMove::OneFour, &[0], Some(5))?;
    Ok((lhs, rhs))
}

/// Both sides of a relation and their difference.
#[derive(Clone, Debug)]
pub struct MoveCheck {
    pub lhs: GrassmannElement,
    pub rhs: GrassmannElement,
    pub difference: GrassmannElement,
}

impl MoveCheck {
    pub fn new(lhs: GrassmannElement, rhs: GrassmannElement) -> Self {
        let difference = &lhs - &rhs;
        Self { lhs, rhs, difference }
    }

    pub fn holds(&self) -> bool {
        self.difference.is_zero()
    }
}

fn cell_index(t: &Triangulation, labels: &[Vertex]) -> usize {
    t.cells().iter().position(|c| c.vertices == labels).expect("cell present")
}

/// `∫ ∏ weights · da_{faces}` with the listed inner faces as the measure.
fn integrate_faces(
    t: &Triangulation,
    vars: &Vars3,
    factors: &[(Vec<Vertex>, GrassmannElement)],
    faces: &[[Vertex; 3]],
) -> Result<GrassmannElement> {
    let mut acc = GrassmannElement::one(&vars.registry);
    for (_, w) in factors {
        acc = &acc * w;
    }
    let measure = faces
        .iter()
        .map(|f| {
            let k = t.cells().iter().position(|c| f.iter().all(|v| c.vertices.contains(v))).unwrap();
            let cls = t.class_of_labels(k, f).unwrap();
            vars.a[cls]
        })
        .collect::<Vec<_>>();
    integrate_measure(&acc, &measure)
}

fn ratio(z: &ZetaAssignment, num: &[(Vertex, Vertex)], den: &[(Vertex, Vertex)]) -> Result<Scalar> {
    let mut r = Scalar::one();
    for &(i, j) in num {
        r *= z.diff(i, j)?;
    }
    for &(i, j) in den {
        r *= z.inv_diff(i, j)?;
    }
    Ok(r)
}

/// Both sides of the 2→3 relation for arbitrary per-cell integrated
/// weights, evaluated without any consistency check.
pub fn move_23_relation(
    z: &ZetaAssignment,
    sides: &(Triangulation, Triangulation),
    weight: impl Fn(&Triangulation, &Vars3, usize) -> Result<GrassmannElement>,
) -> Result<MoveCheck> {
    let (lhs, rhs) = sides;
    let reg = Vars3::registry_for(&[lhs, rhs], &[])?;
    let vl = Vars3::in_registry(lhs, &reg)?;
    let vr = Vars3::in_registry(rhs, &reg)?;
    let factors = |t: &Triangulation, v: &Vars3, cells: &[[Vertex; 4]]| {
        cells
            .iter()
            .map(|c| Ok((c.to_vec(), weight(t, v, cell_index(t, c))?)))
            .collect::<Result<Vec<_>>>()
    };
    let l = integrate_faces(lhs, &vl, &factors(lhs, &vl, &[[1, 2, 3, 4], [1, 2, 3, 5]])?, &[[1, 2, 3]])?
        .scale(&ratio(z, &[(2, 3)], &[(3, 4), (3, 5)])?);
    let r = integrate_faces(
        rhs,
        &vr,
        &factors(rhs, &vr, &[[1, 2, 4, 5], [1, 3, 4, 5], [2, 3, 4, 5]])?,
        &[[1, 4, 5], [2, 4, 5], [3, 4, 5]],
    )?
    .scale(&-ratio(z, &[], &[(4, 5)])?);
    Ok(MoveCheck::new(l, r))
}

fn require_consistent(
    lhs: &Triangulation,
    rhs: &Triangulation,
    z: &ZetaAssignment,
    alpha: &AlphaSystem3,
) -> Result<()> {
    if is_consistent(lhs, rhs, z, alpha)? {
        Ok(())
    } else {
        Err(Error::Precondition("α-system is not consistent for this move".into()))
    }
}

/// Deformed 2→3 relation; `alpha` must be consistent.
pub fn verify_move_23(z: &ZetaAssignment, alpha: &AlphaSystem3) -> Result<MoveCheck> {
    let sides = move_23_sides()?;
    require_consistent(&sides.0, &sides.1, z, alpha)?;
    move_23_unchecked(z, alpha, &sides)
}

/// The 2→3 relation without the consistency precondition.
pub fn move_23_unchecked(
    z: &ZetaAssignment,
    alpha: &AlphaSystem3,
    sides: &(Triangulation, Triangulation),
) -> Result<MoveCheck> {
    move_23_relation(z, sides, |t, v, k| {
        deformed_integrated_weight(t, z, v, k, &alpha.get(&t.cell(k).vertices))
    })
}

/// 2→3 relation for the degree-4 deformation with the orientation signs
/// of `sides`.
pub fn move_23_deg4(
    z: &ZetaAssignment,
    sides: &(Triangulation, Triangulation),
    kind: Deg4Coefficient,
) -> Result<MoveCheck> {
    move_23_relation(z, sides, |t, v, k| deformed_weight_deg4(t, z, v, k, kind))
}

pub fn verify_move_23_deg4(z: &ZetaAssignment) -> Result<MoveCheck> {
    move_23_deg4(z, &move_23_sides()?, Deg4Coefficient::Balanced)
}

/// Deformed 1→4 relation; `alpha` must be consistent.
pub fn verify_move_14(z: &ZetaAssignment, alpha: &AlphaSystem3) -> Result<MoveCheck> {
    verify_move_14_on(z, alpha, &move_14_sides()?)
}

pub fn verify_move_14_on(
    z: &ZetaAssignment,
    alpha: &AlphaSystem3,
    (lhs, rhs): &(Triangulation, Triangulation),
) -> Result<MoveCheck> {
    let (lhs, rhs) = (lhs.clone(), rhs.clone());
    require_consistent(&lhs, &rhs, z, alpha)?;
    let reg = Vars3::registry_for(&[&lhs, &rhs], &[])?;
    let vr = Vars3::in_registry(&rhs, &reg)?;
    let da: Vec<_> = vertex_face_operators(&rhs, z, &vr)?.into_iter().map(|x| x.1).collect();
    let db: Vec<_> = vertex_tetra_operators(&rhs, z, &vr)?.into_iter().map(|x| x.1).collect();
    let u = invert_operator_on_one(&reg, &da)?;
    let w = invert_operator_on_one(&reg, &db)?;
    move_14_with(z, alpha, &lhs, &rhs, &u, &w)
}

/// 1→4 relation with given vertex weights `u5`, `w5` in the registry of
/// both sides. The right-hand side carries the sign `ε_1234`; reversing
/// the orientation flips `w5` and so the sign of the integral.
pub fn move_14_with(
    z: &ZetaAssignment,
    alpha: &AlphaSystem3,
    lhs: &Triangulation,
    rhs: &Triangulation,
    u: &GrassmannElement,
    w: &GrassmannElement,
) -> Result<MoveCheck> {
    let reg = u.registry().clone();
    let vl = Vars3::in_registry(lhs, &reg)?;
    let vr = Vars3::in_registry(rhs, &reg)?;
    let l = deformed_integrated_weight(lhs, z, &vl, 0, &alpha.get(&[1, 2, 3, 4]))?
        .scale(&z.inv_diff(3, 4)?);
    let order = [[1, 2, 3, 5], [1, 2, 4, 5], [1, 3, 4, 5], [2, 3, 4, 5]];
    let mut acc = u * w;
    let mut measure = Vec::new();
    for c in &order {
        let k = cell_index(rhs, c);
        acc = &deformed_weight(rhs, z, &vr, k, &alpha.get(c))? * &acc;
        measure.extend([vr.b[k].0, vr.b[k].1]);
    }
    for f in [[1, 2, 5], [1, 3, 5], [1, 4, 5], [2, 3, 5], [2, 4, 5], [3, 4, 5]] {
        let k = rhs.cells().iter().position(|c| f.iter().all(|v| c.vertices.contains(v))).unwrap();
        measure.push(vr.a[rhs.class_of_labels(k, &f).unwrap()]);
    }
    let sign = Scalar::from_integer(lhs.cell(0).epsilon.into());
    let r = integrate_measure(&acc, &measure)?.scale(&(sign * ratio(z, &[], &[(1, 5), (4, 5)])?));
    Ok(MoveCheck::new(l, r))
}
