//! Orderly mappings, the deformed invariant `G` and the lens-space tables.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chain3d::{integrate_weights, prefactor, vertex_face_operators, vertex_tetra_operators, Vars3};
use crate::error::{Error, Result};
use crate::grassmann::GrassmannElement;
use crate::linalg::SkewMatrix;
use crate::scalars::{Scalar, Vertex, ZetaAssignment};
use crate::triangulation::{build_lens, excise_chain_and_double, CellId, Triangulation};
use crate::weights3d::deformed_weight;

/// The value of α for which the exponent of `G` is `bᵀ f3 a + bᵀ C b`.
pub fn alpha_for_g() -> Scalar {
    Scalar::from_integer((-2).into())
}

/// One tetrahedron chosen in the star of each inner vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderlyMapping {
    pub assignment: BTreeMap<Vertex, CellId>,
}

/// Cell ids in the star of every inner vertex.
pub fn stars(t: &Triangulation) -> BTreeMap<Vertex, BTreeSet<CellId>> {
    t.inner_vertices()
        .into_iter()
        .map(|v| {
            let star = t.cells().iter().filter(|c| c.vertices.contains(&v)).map(|c| c.id).collect();
            (v, star)
        })
        .collect()
}

/// Builds a mapping by repeatedly removing a tetrahedron with a free face;
/// a vertex that stops being inner is assigned the tetrahedron whose
/// removal freed it. Cells in `avoid` are never removed.
pub fn construct_orderly(t: &Triangulation, avoid: &BTreeSet<CellId>) -> Result<OrderlyMapping> {
    let mut current = t.clone();
    let mut inner: BTreeSet<Vertex> = current.inner_vertices().into_iter().collect();
    let mut out = OrderlyMapping::default();
    while !inner.is_empty() {
        let mut chosen = None;
        for k in 0..current.cells().len() {
            let cell = current.cell(k);
            if avoid.contains(&cell.id) || (0..4).all(|s| current.partner(k, s).is_some()) {
                continue;
            }
            let next = current.remove_cells(&[cell.id])?;
            let still: BTreeSet<Vertex> = next.inner_vertices().into_iter().collect();
            let freed: Vec<Vertex> = inner.difference(&still).copied().collect();
            if freed.len() <= 1 {
                chosen = Some((cell.id, next, still, freed));
                break;
            }
        }
        let Some((id, next, still, freed)) = chosen else {
            return Err(Error::Orderly("peeling stalled".into()));
        };
        if let Some(&v) = freed.first() {
            out.assignment.insert(v, id);
        }
        current = next;
        inner = still;
    }
    Ok(out)
}

/// Strict predecessors of each vertex under `S_i ≤ S_j if f(S_i) ∈ S_j`,
/// or `None` when the relation has a cycle.
fn predecessors(
    stars: &BTreeMap<Vertex, BTreeSet<CellId>>,
    m: &OrderlyMapping,
) -> Option<BTreeMap<Vertex, BTreeSet<Vertex>>> {
    let mut direct: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
    for (&i, r) in &m.assignment {
        for (&j, s) in stars {
            if i != j && s.contains(r) {
                direct.entry(j).or_default().insert(i);
            }
        }
    }
    let mut out = BTreeMap::new();
    for &v in stars.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Vertex> = direct.get(&v).into_iter().flatten().copied().collect();
        while let Some(x) = stack.pop() {
            if x == v {
                return None;
            }
            if seen.insert(x) {
                stack.extend(direct.get(&x).into_iter().flatten().copied());
            }
        }
        out.insert(v, seen);
    }
    Some(out)
}

pub fn is_orderly(t: &Triangulation, m: &OrderlyMapping) -> bool {
    let stars = stars(t);
    let keys: BTreeSet<Vertex> = m.assignment.keys().copied().collect();
    if keys != stars.keys().copied().collect() {
        return false;
    }
    let images: BTreeSet<CellId> = m.assignment.values().copied().collect();
    if images.len() != m.assignment.len() {
        return false;
    }
    if m.assignment.iter().any(|(v, r)| !stars[v].contains(r)) {
        return false;
    }
    predecessors(&stars, m).is_some()
}

/// `R_k`: the star of `k` minus every star preceding it.
pub fn free_cells(t: &Triangulation, m: &OrderlyMapping, k: Vertex) -> Result<BTreeSet<CellId>> {
    let stars = stars(t);
    let star = stars.get(&k).ok_or(Error::MissingVertex(k))?;
    let pred = predecessors(&stars, m).ok_or_else(|| Error::Orderly("mapping has a cycle".into()))?;
    let mut out = star.clone();
    for i in &pred[&k] {
        for r in &stars[i] {
            out.remove(r);
        }
    }
    Ok(out)
}

/// Changes the image of `S_k` to `r` within `R_k`.
pub fn elementary_move(
    t: &Triangulation,
    m: &OrderlyMapping,
    k: Vertex,
    r: CellId,
) -> Result<OrderlyMapping> {
    if !free_cells(t, m, k)?.contains(&r) {
        return Err(Error::Orderly(format!("cell {r} is not free for vertex {k}")));
    }
    let mut out = m.clone();
    out.assignment.insert(k, r);
    if !is_orderly(t, &out) {
        return Err(Error::Orderly("move produced a non-orderly mapping".into()));
    }
    Ok(out)
}

/// Degree-one vertex weights with `d_i^a u_i = 1` and `d_i^b w_i = 1`,
/// both taken in the tetrahedron `tetra[i]`.
#[derive(Clone, Debug)]
pub struct VertexWeights {
    pub u: BTreeMap<Vertex, GrassmannElement>,
    pub w: BTreeMap<Vertex, GrassmannElement>,
    pub tetra: BTreeMap<Vertex, CellId>,
}

impl VertexWeights {
    /// Weights chosen according to `m`, with distinct faces for distinct
    /// vertices.
    pub fn according_to(
        t: &Triangulation,
        z: &ZetaAssignment,
        vars: &Vars3,
        m: &OrderlyMapping,
    ) -> Result<Self> {
        let da: BTreeMap<Vertex, _> = vertex_face_operators(t, z, vars)?.into_iter().collect();
        let db: BTreeMap<Vertex, _> = vertex_tetra_operators(t, z, vars)?.into_iter().collect();
        let mut used = BTreeSet::new();
        let mut out = Self { u: BTreeMap::new(), w: BTreeMap::new(), tetra: m.assignment.clone() };
        for (&v, &id) in &m.assignment {
            let k = t.index_of(id)?;
            let cell = t.cell(k);
            let pos = cell.position(v).ok_or(Error::Orderly(format!("cell {id} misses vertex {v}")))?;
            let d = &da[&v];
            let face = (0..4)
                .filter(|&s| s != pos)
                .map(|s| vars.a[t.facet_class(k, s)])
                .find(|g| !used.contains(g) && !d.coefficient(*g).is_zero())
                .ok_or_else(|| Error::OperatorInversion(format!("no free face for vertex {v}")))?;
            used.insert(face);
            let ua = GrassmannElement::product_of(&vars.registry, &[face], d.coefficient(face).recip());
            let (b1, b2) = vars.b[k];
            let e = &db[&v];
            let g = if e.coefficient(b1).is_zero() { b2 } else { b1 };
            let wb = GrassmannElement::product_of(&vars.registry, &[g], e.coefficient(g).recip());
            out.u.insert(v, ua);
            out.w.insert(v, wb);
        }
        Ok(out)
    }

    /// `∏ u_i · ∏ w_i` in ascending vertex order.
    pub fn insertion(&self, vars: &Vars3) -> GrassmannElement {
        let mut acc = GrassmannElement::one(&vars.registry);
        for x in self.u.values().chain(self.w.values()) {
            acc = &acc * x;
        }
        acc
    }
}

/// `G` for a constant α; `alpha_for_g()` gives the exponent
/// `bᵀ f3 a + bᵀ C b` literally.
pub fn invariant_g(
    t: &Triangulation,
    z: &ZetaAssignment,
    m: &OrderlyMapping,
    alpha: &Scalar,
) -> Result<GrassmannElement> {
    if !is_orderly(t, m) {
        return Err(Error::Orderly("mapping is not orderly".into()));
    }
    let vars = Vars3::new(t)?;
    let weights = (0..t.cells().len())
        .map(|k| deformed_weight(t, z, &vars, k, alpha))
        .collect::<Result<Vec<_>>>()?;
    let vw = VertexWeights::according_to(t, z, &vars, m)?;
    Ok(integrate_weights(t, &vars, &weights, &vw.insertion(&vars))?.scale(&prefactor(t, z)?))
}

/// The quadratic exponent on `b`'s and inner `a`'s as a skew matrix.
#[derive(Clone, Debug)]
pub struct QuadraticFormData {
    /// `b1_r, b2_r` for every cell in order, then inner faces.
    pub variables: Vec<String>,
    pub matrix: SkewMatrix,
    pub prefactor: Scalar,
}

impl QuadraticFormData {
    pub fn new(t: &Triangulation, z: &ZetaAssignment, alpha: &Scalar) -> Result<Self> {
        let c = t.classification();
        let n_cells = t.cells().len();
        let mut face_col = BTreeMap::new();
        let mut variables: Vec<String> = Vars3::b_names(t).into_iter().flat_map(|(x, y)| [x, y]).collect();
        let names = Vars3::a_names(t);
        for (k, _) in c.inner(2) {
            face_col.insert(k, variables.len());
            variables.push(names[k].clone());
        }
        let mut m = SkewMatrix::zeros(variables.len());
        for (k, cell) in t.cells().iter().enumerate() {
            let v = &cell.vertices;
            let one = Scalar::one();
            let rows = [
                [one.clone(), -one.clone(), one.clone(), Scalar::zero()],
                [
                    -(z.diff(v[0], v[2])? * z.inv_diff(v[1], v[2])?),
                    z.diff(v[0], v[3])? * z.inv_diff(v[1], v[3])?,
                    Scalar::zero(),
                    -one,
                ],
            ];
            for (l, row) in rows.iter().enumerate() {
                for (slot, coef) in [3, 2, 1, 0].into_iter().zip(row) {
                    if let Some(&col) = face_col.get(&t.facet_class(k, slot)) {
                        if !coef.is_zero() {
                            m.add(2 * k + l, col, coef);
                        }
                    }
                }
            }
            let bb = -(Scalar::from_integer(cell.epsilon.into()) * z.diff(v[2], v[3])? * alpha);
            m.add(2 * k, 2 * k + 1, &bb);
        }
        debug_assert_eq!(variables.len(), 2 * n_cells + face_col.len());
        Ok(Self { variables, matrix: m, prefactor: prefactor(t, z)? })
    }

    /// `∫ exp(Σ_{i<j} M_ij v_i v_j)` with the first variable innermost.
    pub fn integral(&self) -> Scalar {
        let n = self.variables.len();
        let pf = self.matrix.pfaffian();
        if (n * n.saturating_sub(1) / 2) % 2 == 1 {
            -pf
        } else {
            pf
        }
    }
}

/// Degree-zero part of `G` through a Pfaffian; needs no inner vertices.
pub fn invariant_g_pfaffian(t: &Triangulation, z: &ZetaAssignment, alpha: &Scalar) -> Result<Scalar> {
    if !t.inner_vertices().is_empty() {
        return Err(Error::Precondition("the Pfaffian form needs a complex without inner vertices".into()));
    }
    let q = QuadraticFormData::new(t, z, alpha)?;
    Ok(&q.prefactor * q.integral())
}

/// `|G|` at degree zero for `L(p,q)` without the chain of step `n`, with
/// all α equal to one.
pub fn lens_table(p: usize, q: usize, n: usize, z: &ZetaAssignment) -> Result<Scalar> {
    let t = excise_chain_and_double(&build_lens(p, q)?, p, n)?;
    Ok(invariant_g_pfaffian(&t, z, &Scalar::one())?.abs())
}

/// Rows of the published tables: `(p, q, n, ζ, |G|)`.
pub const LENS_TABLE: [(usize, usize, usize, [i64; 4], i64); 18] = [
    (7, 1, 1, [1, 2, 3, 4], 153),
    (7, 1, 2, [1, 2, 3, 4], 313),
    (7, 1, 3, [1, 2, 3, 4], 381),
    (7, 1, 1, [1, 2, 4, 3], 92),
    (7, 1, 2, [1, 2, 4, 3], 324),
    (7, 1, 3, [1, 2, 4, 3], 452),
    (7, 2, 1, [1, 2, 3, 4], 12),
    (7, 2, 2, [1, 2, 3, 4], 108),
    (7, 2, 3, [1, 2, 3, 4], 153),
    (7, 2, 1, [1, 2, 4, 3], 61),
    (7, 2, 2, [1, 2, 4, 3], 39),
    (7, 2, 3, [1, 2, 4, 3], 92),
    (7, 3, 1, [1, 2, 3, 4], 39),
    (7, 3, 2, [1, 2, 3, 4], 92),
    (7, 3, 3, [1, 2, 3, 4], 61),
    (7, 3, 1, [1, 2, 4, 3], 108),
    (7, 3, 2, [1, 2, 4, 3], 153),
    (7, 3, 3, [1, 2, 4, 3], 12),
];
