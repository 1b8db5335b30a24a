//! The short 4D complex `0 → V2' → V3 → V4 → 0`, its gauge-transformed
//! Grassmann weights and the 3→3 and 2→4 relations.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chain3d::{coordinate_coefficients, simplex_names};
use crate::error::{Error, Result};
use crate::grassmann::{
    apply_product, integrate_product, invert_operator_on_one, FirstOrderOperator, Gen,
    GeneratorRegistry, GrassmannElement,
};
use crate::linalg::Matrix;
use crate::scalars::{Scalar, Vertex, ZetaAssignment};
use crate::triangulation::{pachner_move, PachnerMove, Triangulation};
use crate::weights3d::{is_consistent, AlphaSystem, MoveCheck};

/// `α_{{ijklm}}` per 4-simplex, keyed by the unordered quintuple.
pub type AlphaSystem4 = AlphaSystem;

/// Bases of the three spaces of the short 4D complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBasis4 {
    /// Class indices of the inner 2-faces, one coordinate `x_{s,s1}` each.
    pub inner_faces: Vec<usize>,
    /// Labels of every 3-face class, coordinates at its two smallest vertices.
    pub tetrahedra: Vec<Vec<Vertex>>,
    /// Vertices of every 4-simplex, coordinates at its three smallest vertices.
    pub simplices: Vec<Vec<Vertex>>,
}

impl ChainBasis4 {
    pub fn new(t: &Triangulation) -> Result<Self> {
        if t.dimension() != 4 {
            return Err(Error::Precondition("4D complex required".into()));
        }
        if !t.inner_vertices().is_empty() {
            return Err(Error::Precondition("the short 4D complex needs no inner vertices".into()));
        }
        let c = t.classification();
        Ok(Self {
            inner_faces: c.inner(2).map(|(k, _)| k).collect(),
            tetrahedra: c.simplices[3].iter().map(|s| s.labels.clone()).collect(),
            simplices: t.cells().iter().map(|c| c.vertices.clone()).collect(),
        })
    }

    /// `(N2', 2 N3, 3 N4)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.inner_faces.len(), 2 * self.tetrahedra.len(), 3 * self.simplices.len())
    }

    /// All coordinates of a cell with the given labels from its leading ones.
    pub fn expand(z: &ZetaAssignment, labels: &[Vertex], leading: &[Scalar]) -> Result<Vec<Scalar>> {
        let coeffs = coordinate_coefficients(z, labels)?;
        Ok(coeffs
            .iter()
            .map(|row| row.iter().zip(leading).map(|(a, b)| a * b).sum())
            .collect())
    }
}

fn tetra_names(prefix: &str, t: &Triangulation) -> Vec<String> {
    simplex_names(prefix, &t.classification().simplices[3])
}

/// Generators `a_r`, `b_r` of every 3-face class and the odd constant `e`.
#[derive(Clone, Debug)]
pub struct Vars4 {
    pub registry: Arc<GeneratorRegistry>,
    pub a: Vec<Gen>,
    pub b: Vec<Gen>,
    pub e: Gen,
}

impl Vars4 {
    /// Registry for all listed complexes: the `a`, `b` pairs in order of
    /// first appearance, then `e`.
    pub fn registry_for(ts: &[&Triangulation]) -> Result<Arc<GeneratorRegistry>> {
        let mut names: Vec<String> = Vec::new();
        for t in ts {
            for (a, b) in tetra_names("a", t).into_iter().zip(tetra_names("b", t)) {
                if !names.contains(&a) {
                    names.push(a);
                    names.push(b);
                }
            }
        }
        names.push("e".into());
        GeneratorRegistry::new(names)
    }

    pub fn new(t: &Triangulation) -> Result<Self> {
        Self::in_registry(t, &Self::registry_for(&[t])?)
    }

    pub fn in_registry(t: &Triangulation, registry: &Arc<GeneratorRegistry>) -> Result<Self> {
        if t.dimension() != 4 {
            return Err(Error::Precondition("4D complex required".into()));
        }
        let look = |names: Vec<String>| names.iter().map(|n| registry.index(n)).collect::<Result<Vec<_>>>();
        Ok(Self {
            registry: registry.clone(),
            a: look(tetra_names("a", t))?,
            b: look(tetra_names("b", t))?,
            e: registry.index("e")?,
        })
    }

    /// Measure `da db` of the inner 3-faces in class order.
    pub fn inner_measure(&self, t: &Triangulation) -> Vec<Gen> {
        t.classification().inner(3).flat_map(|(k, _)| [self.a[k], self.b[k]]).collect()
    }
}

fn sc(n: i64) -> Scalar {
    Scalar::from_integer(n.into())
}

/// Labels of `v` at the given positions.
fn pick(v: &[Vertex], pos: &[usize]) -> Vec<Vertex> {
    pos.iter().map(|&p| v[p]).collect()
}

/// `f3`: two rows per 3-face class, one column per inner 2-face.
pub fn build_f3_4d(t: &Triangulation, z: &ZetaAssignment) -> Result<Matrix> {
    let basis = ChainBasis4::new(t)?;
    let c = t.classification();
    let mut col = vec![None; c.count(2)];
    for (n, &k) in basis.inner_faces.iter().enumerate() {
        col[k] = Some(n);
    }
    let names: Vec<String> = tetra_names("", t);
    let mut m = Matrix::labeled(
        names.iter().flat_map(|n| [format!("a{n}"), format!("b{n}")]).collect(),
        basis.inner_faces.iter().map(|&k| format!("x{:?}", c.simplices[2][k].labels)).collect(),
    );
    // y_{r,0} = x_(012),0 - x_(013),0 + x_(023),0
    // y_{r,1} = x_(012),1 - x_(013),1 - x_(123),1
    let terms: [[([usize; 3], usize, i64); 3]; 2] = [
        [([0, 1, 2], 0, 1), ([0, 1, 3], 0, -1), ([0, 2, 3], 0, 1)],
        [([0, 1, 2], 1, 1), ([0, 1, 3], 1, -1), ([1, 2, 3], 1, -1)],
    ];
    for (r, class) in c.simplices[3].iter().enumerate() {
        let (cell, _) = class.members[0];
        let v = &class.labels;
        for (row, list) in terms.iter().enumerate() {
            for (pos, at, sign) in list {
                let face = pick(v, pos);
                let Some(j) = t.class_of_labels(cell, &face).and_then(|k| col[k]) else {
                    continue;
                };
                let coeffs = coordinate_coefficients(z, &face)?;
                let p = face.iter().position(|&x| x == v[*at]).unwrap();
                m.add_to(2 * r + row, j, &(&coeffs[p][0] * sc(*sign)));
            }
        }
    }
    Ok(m)
}

/// `f4`: three rows per 4-simplex, two columns per 3-face class.
pub fn build_f4_4d(t: &Triangulation, z: &ZetaAssignment) -> Result<Matrix> {
    let basis = ChainBasis4::new(t)?;
    let names: Vec<String> = tetra_names("", t);
    let mut m = Matrix::labeled(
        basis
            .simplices
            .iter()
            .flat_map(|u| (0..3).map(move |p| format!("z{u:?}_{}", u[p])))
            .collect(),
        names.iter().flat_map(|n| [format!("a{n}"), format!("b{n}")]).collect(),
    );
    let rows: [[([usize; 4], i64); 4]; 3] = [
        [([0, 1, 2, 3], 1), ([0, 1, 2, 4], -1), ([0, 1, 3, 4], 1), ([0, 2, 3, 4], -1)],
        [([0, 1, 2, 3], 1), ([0, 1, 2, 4], -1), ([0, 1, 3, 4], 1), ([1, 2, 3, 4], 1)],
        [([0, 1, 2, 3], 1), ([0, 1, 2, 4], -1), ([0, 2, 3, 4], -1), ([1, 2, 3, 4], 1)],
    ];
    for (k, cell) in t.cells().iter().enumerate() {
        let v = &cell.vertices;
        for (p, list) in rows.iter().enumerate() {
            for (pos, sign) in list {
                let face = pick(v, pos);
                let r = t.class_of_labels(k, &face).unwrap();
                let coeffs = coordinate_coefficients(z, &face)?;
                let at = face.iter().position(|&x| x == v[p]).unwrap();
                for l in 0..2 {
                    m.add_to(3 * k + p, 2 * r + l, &(&coeffs[at][l] * sc(*sign)));
                }
            }
        }
    }
    Ok(m)
}

/// Checks `f4 f3 = 0`.
pub fn check_complex_4d(t: &Triangulation, z: &ZetaAssignment) -> Result<bool> {
    Ok(build_f4_4d(t, z)?.mul(&build_f3_4d(t, z)?)?.is_zero())
}

/// Columns of 3-face `ijkl` of `f4` times `ζ_kl`; rows of `f3` divided by
/// `ζ_kl` and columns of inner 2-face `ijk` times `ζ_jk`.
pub fn gauge_transform(
    t: &Triangulation,
    z: &ZetaAssignment,
    f3: &Matrix,
    f4: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let basis = ChainBasis4::new(t)?;
    let (mut g3, mut g4) = (f3.clone(), f4.clone());
    for (r, v) in basis.tetrahedra.iter().enumerate() {
        let kl = z.diff(v[2], v[3])?;
        let inv = z.inv_diff(v[2], v[3])?;
        for l in 0..2 {
            g4.scale_col(2 * r + l, &kl);
            g3.scale_row(2 * r + l, &inv);
        }
    }
    let c = t.classification();
    for (j, &k) in basis.inner_faces.iter().enumerate() {
        let s = &c.simplices[2][k].labels;
        g3.scale_col(j, &z.diff(s[1], s[2])?);
    }
    Ok((g3, g4))
}

/// Rows of `f3` and columns of `f4` restricted to the inner 3-faces.
pub fn inner_block(t: &Triangulation, f3: &Matrix, f4: &Matrix) -> Result<(Matrix, Matrix)> {
    let inner: Vec<usize> = t.classification().inner(3).flat_map(|(r, _)| [2 * r, 2 * r + 1]).collect();
    let all3: Vec<usize> = (0..f3.cols()).collect();
    let all4: Vec<usize> = (0..f4.rows()).collect();
    Ok((f3.submatrix(&inner, &all3)?, f4.submatrix(&all4, &inner)?))
}

/// The three linear forms of the weight of cell `k`, in the order of the
/// rows of the gauge-transformed `f4`.
pub fn weight_forms_4d(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    k: usize,
) -> Result<[GrassmannElement; 3]> {
    let v = &t.cell(k).vertices;
    if v.len() != 5 {
        return Err(Error::Precondition("4-simplex required".into()));
    }
    let reg = &vars.registry;
    let face = |pos: [usize; 4]| t.class_of_labels(k, &pick(v, &pos)).unwrap();
    let (f0123, f0124, f0134, f0234, f1234) =
        (face([0, 1, 2, 3]), face([0, 1, 2, 4]), face([0, 1, 3, 4]), face([0, 2, 3, 4]), face([1, 2, 3, 4]));
    let zd = |i: usize, j: usize| z.diff(v[i], v[j]);
    let form = |list: Vec<(Gen, Scalar)>| {
        let mut x = GrassmannElement::zero(reg);
        for (g, c) in list {
            x.add_term(1 << g, c);
        }
        x
    };
    let (a, b) = (&vars.a, &vars.b);
    let l1 = form(vec![
        (a[f0123], zd(2, 3)?),
        (a[f0124], -zd(2, 4)?),
        (a[f0134], zd(3, 4)?),
        (a[f0234], -zd(3, 4)?),
    ]);
    let l2 = form(vec![
        (b[f0123], zd(2, 3)?),
        (b[f0124], -zd(2, 4)?),
        (b[f0134], zd(3, 4)?),
        (a[f1234], zd(3, 4)?),
    ]);
    let l3 = form(vec![
        (a[f0123], -zd(0, 3)?),
        (b[f0123], -zd(1, 3)?),
        (a[f0124], zd(0, 4)?),
        (b[f0124], zd(1, 4)?),
        (b[f0234], -zd(3, 4)?),
        (b[f1234], zd(3, 4)?),
    ]);
    Ok([l1, l2, l3])
}

/// `𝒲_{ijklm} = ζ_lm⁻¹ L1 L2 L3`.
pub fn weight_w_4d(t: &Triangulation, z: &ZetaAssignment, vars: &Vars4, k: usize) -> Result<GrassmannElement> {
    let [l1, l2, l3] = weight_forms_4d(t, z, vars, k)?;
    let v = &t.cell(k).vertices;
    Ok((&(&l1 * &l2) * &l3).scale(&z.inv_diff(v[3], v[4])?))
}

/// `𝒲 + α e`.
pub fn deformed_weight_4d(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    k: usize,
    alpha: &Scalar,
) -> Result<GrassmannElement> {
    let mut w = weight_w_4d(t, z, vars, k)?;
    w.add_term(1 << vars.e, alpha.clone());
    Ok(w)
}

/// `d_s`, summed over the 3-faces containing the 2-face `s`.
pub fn face_operator_4d(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    s: &[Vertex],
) -> Result<FirstOrderOperator> {
    let mut s = s.to_vec();
    s.sort_unstable();
    let mut d = FirstOrderOperator::new();
    let mut found = false;
    for (r, class) in t.classification().simplices[3].iter().enumerate() {
        let v = &class.labels;
        if !s.iter().all(|x| v.contains(x)) {
            continue;
        }
        found = true;
        let missing = v.iter().position(|x| !s.contains(x)).unwrap();
        let inv = z.inv_diff(v[2], v[3])?;
        let (ca, cb) = match missing {
            3 => (z.diff(v[1], v[2])? * &inv, -z.diff(v[0], v[2])? * &inv),
            2 => (-z.diff(v[1], v[3])? * &inv, z.diff(v[0], v[3])? * &inv),
            1 => (Scalar::one(), Scalar::zero()),
            _ => (Scalar::zero(), -Scalar::one()),
        };
        d.add(vars.a[r], ca);
        d.add(vars.b[r], cb);
    }
    if !found {
        return Err(Error::InvalidTriangulation(format!("no 2-face {s:?}")));
    }
    Ok(d)
}

/// `(∏ d_s)⁻¹ 1` over the listed 2-faces.
pub fn face_weight_4d(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    faces: &[Vec<Vertex>],
) -> Result<GrassmannElement> {
    let ops = faces
        .iter()
        .map(|s| face_operator_4d(t, z, vars, s))
        .collect::<Result<Vec<_>>>()?;
    invert_operator_on_one(&vars.registry, &ops)
}

/// Left side `{12345, 12346, 12356}` and right side
/// `{12456, 13456, 23456}` of the 3→3 move.
pub fn move_33_sides() -> Result<(Triangulation, Triangulation)> {
    let lhs = Triangulation::glue_by_labels(4, &[vec![1, 2, 3, 4, 5], vec![1, 2, 3, 4, 6], vec![1, 2, 3, 5, 6]])?;
    let (rhs, _) = pachner_move(&lhs, PachnerMove::ThreeThree, &[0, 1, 2], None)?;
    Ok((lhs, rhs))
}

/// Left side `{12345, 12346}` and right side
/// `{12356, 12456, 13456, 23456}` of the 2→4 move.
pub fn move_24_sides() -> Result<(Triangulation, Triangulation)> {
    let lhs = Triangulation::glue_by_labels(4, &[vec![1, 2, 3, 4, 5], vec![1, 2, 3, 4, 6]])?;
    let (rhs, _) = pachner_move(&lhs, PachnerMove::TwoFour, &[0, 1], None)?;
    Ok((lhs, rhs))
}

/// Consistent α-systems for both sides of a 4D move.
pub fn alpha_is_consistent_4d(
    sides: &(Triangulation, Triangulation),
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
) -> Result<bool> {
    is_consistent(&sides.0, &sides.1, z, alpha)
}

fn cell_at(t: &Triangulation, labels: &[Vertex]) -> Result<usize> {
    t.cells()
        .iter()
        .position(|c| c.vertices == labels)
        .ok_or_else(|| Error::InvalidTriangulation(format!("no cell {labels:?}")))
}

/// `∫ ∏ W̃_u · w ∏ da_r db_r` over the listed cells and 3-faces, without the
/// `ζ` factors of the measure.
pub fn integrate_cluster(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    alpha: &AlphaSystem4,
    cells: &[Vec<Vertex>],
    insertion: &GrassmannElement,
    tetrahedra: &[Vec<Vertex>],
) -> Result<GrassmannElement> {
    let mut factors = Vec::with_capacity(cells.len() + 1);
    for c in cells {
        let k = cell_at(t, c)?;
        factors.push(deformed_weight_4d(t, z, vars, k, &alpha.get(c))?);
    }
    factors.push(insertion.clone());
    let mut measure = Vec::with_capacity(2 * tetrahedra.len());
    for r in tetrahedra {
        let k = t.cells().iter().position(|c| r.iter().all(|x| c.vertices.contains(x))).unwrap_or(0);
        let cls = t
            .class_of_labels(k, r)
            .ok_or_else(|| Error::InvalidTriangulation(format!("no 3-face {r:?}")))?;
        measure.push(vars.a[cls]);
        measure.push(vars.b[cls]);
    }
    integrate_product(&factors, &measure)
}

fn measure_factor(z: &ZetaAssignment, tetrahedra: &[Vec<Vertex>]) -> Result<Scalar> {
    let mut f = Scalar::one();
    for r in tetrahedra {
        f *= z.inv_diff(r[2], r[3])?;
    }
    Ok(f)
}

fn require_consistent(sides: &(Triangulation, Triangulation), z: &ZetaAssignment, alpha: &AlphaSystem4) -> Result<()> {
    if alpha_is_consistent_4d(sides, z, alpha)? {
        Ok(())
    } else {
        Err(Error::InconsistentAlpha("α-system violates the 2-face balance".into()))
    }
}

/// Both sides of the 3→3 relation with explicit face weights `w123`, `w456`
/// in the registry of both sides.
pub fn move_33_with(
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
    sides: &(Triangulation, Triangulation),
    w123: &GrassmannElement,
    w456: &GrassmannElement,
) -> Result<MoveCheck> {
    let (lhs, rhs) = sides;
    let reg = w123.registry().clone();
    let (vl, vr) = (Vars4::in_registry(lhs, &reg)?, Vars4::in_registry(rhs, &reg)?);
    let lt = [vec![1, 2, 3, 4], vec![1, 2, 3, 5], vec![1, 2, 3, 6]];
    let rt = [vec![1, 4, 5, 6], vec![2, 4, 5, 6], vec![3, 4, 5, 6]];
    let l = integrate_cluster(
        lhs,
        z,
        &vl,
        alpha,
        &[vec![1, 2, 3, 4, 5], vec![1, 2, 3, 4, 6], vec![1, 2, 3, 5, 6]],
        w123,
        &lt,
    )?
    .scale(&measure_factor(z, &lt)?);
    let r = integrate_cluster(
        rhs,
        z,
        &vr,
        alpha,
        &[vec![1, 2, 4, 5, 6], vec![1, 3, 4, 5, 6], vec![2, 3, 4, 5, 6]],
        w456,
        &rt,
    )?
    .scale(&measure_factor(z, &rt)?);
    Ok(MoveCheck::new(l, r))
}

/// The 3→3 relation with `w123 = d123⁻¹1` and `w456 = d456⁻¹1`; `alpha`
/// must be consistent.
pub fn verify_move_33(z: &ZetaAssignment, alpha: &AlphaSystem4) -> Result<MoveCheck> {
    let sides = move_33_sides()?;
    require_consistent(&sides, z, alpha)?;
    move_33_unchecked(z, alpha, &sides)
}

pub fn move_33_unchecked(
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
    sides: &(Triangulation, Triangulation),
) -> Result<MoveCheck> {
    let reg = Vars4::registry_for(&[&sides.0, &sides.1])?;
    let w123 = face_weight_4d(&sides.0, z, &Vars4::in_registry(&sides.0, &reg)?, &[vec![1, 2, 3]])?;
    let w456 = face_weight_4d(&sides.1, z, &Vars4::in_registry(&sides.1, &reg)?, &[vec![4, 5, 6]])?;
    move_33_with(z, alpha, sides, &w123, &w456)
}

/// Both sides of the 2→4 relation with an explicit joint face weight.
pub fn move_24_with(
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
    sides: &(Triangulation, Triangulation),
    w: &GrassmannElement,
) -> Result<MoveCheck> {
    let (lhs, rhs) = sides;
    let reg = w.registry().clone();
    let (vl, vr) = (Vars4::in_registry(lhs, &reg)?, Vars4::in_registry(rhs, &reg)?);
    let lt = [vec![1, 2, 3, 4]];
    let rt = [
        vec![1, 2, 5, 6],
        vec![1, 3, 5, 6],
        vec![1, 4, 5, 6],
        vec![2, 3, 5, 6],
        vec![2, 4, 5, 6],
        vec![3, 4, 5, 6],
    ];
    let one = GrassmannElement::one(&reg);
    let l = integrate_cluster(lhs, z, &vl, alpha, &[vec![1, 2, 3, 4, 5], vec![1, 2, 3, 4, 6]], &one, &lt)?
        .scale(&measure_factor(z, &lt)?);
    let r = integrate_cluster(
        rhs,
        z,
        &vr,
        alpha,
        &[vec![1, 2, 3, 5, 6], vec![1, 2, 4, 5, 6], vec![1, 3, 4, 5, 6], vec![2, 3, 4, 5, 6]],
        w,
        &rt,
    )?
    .scale(&(-z.diff(5, 6)? * measure_factor(z, &rt)?));
    Ok(MoveCheck::new(l, r))
}

/// The 2→4 relation with `w = (d156 d256 d356 d456)⁻¹1`; `alpha` must be
/// consistent.
pub fn verify_move_24(z: &ZetaAssignment, alpha: &AlphaSystem4) -> Result<MoveCheck> {
    let sides = move_24_sides()?;
    require_consistent(&sides, z, alpha)?;
    move_24_unchecked(z, alpha, &sides)
}

pub fn move_24_unchecked(
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
    sides: &(Triangulation, Triangulation),
) -> Result<MoveCheck> {
    let reg = Vars4::registry_for(&[&sides.0, &sides.1])?;
    let vr = Vars4::in_registry(&sides.1, &reg)?;
    let faces = [vec![1, 5, 6], vec![2, 5, 6], vec![3, 5, 6], vec![4, 5, 6]];
    let w = face_weight_4d(&sides.1, z, &vr, &faces)?;
    move_24_with(z, alpha, sides, &w)
}

/// `∏ ζ_ij ∫ ∏ W̃ · w ∏ da db / ζ_kl` over inner edges, all cells and inner
/// 3-faces, with `w` the inverse of the product of the inner 2-face
/// operators. Defined up to an overall sign.
pub fn conjectured_invariant_4d(
    t: &Triangulation,
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
) -> Result<GrassmannElement> {
    conjectured_invariant_4d_in(t, z, alpha, &Vars4::registry_for(&[t])?)
}

pub fn conjectured_invariant_4d_in(
    t: &Triangulation,
    z: &ZetaAssignment,
    alpha: &AlphaSystem4,
    registry: &Arc<GeneratorRegistry>,
) -> Result<GrassmannElement> {
    ChainBasis4::new(t)?;
    let vars = Vars4::in_registry(t, registry)?;
    let c = t.classification();
    let faces: Vec<Vec<Vertex>> = c.inner(2).map(|(_, s)| s.labels.clone()).collect();
    let w = face_weight_4d(t, z, &vars, &faces)?;
    let mut factors = Vec::with_capacity(t.cells().len() + 1);
    for (k, cell) in t.cells().iter().enumerate() {
        factors.push(deformed_weight_4d(t, z, &vars, k, &alpha.get(&cell.vertices))?);
    }
    factors.push(w);
    let mut scale = Scalar::one();
    for (_, r) in c.inner(3) {
        scale *= z.inv_diff(r.labels[2], r.labels[3])?;
    }
    for (_, e) in c.inner(1) {
        scale *= z.diff(e.labels[0], e.labels[1])?;
    }
    Ok(integrate_product(&factors, &vars.inner_measure(t))?.scale(&scale))
}

/// Applies the product of the listed 2-face operators to `x`.
pub fn apply_face_operators(
    t: &Triangulation,
    z: &ZetaAssignment,
    vars: &Vars4,
    faces: &[Vec<Vertex>],
    x: &GrassmannElement,
) -> Result<GrassmannElement> {
    let ops = faces
        .iter()
        .map(|s| face_operator_4d(t, z, vars, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(apply_product(&ops, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{int, sample_distinct_zetas};
    use crate::weights3d::{consistent_alpha_basis, random_consistent_alpha};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_zeta() -> ZetaAssignment {
        ZetaAssignment::from_ints(&[0, 1, 3, 8, 17, 21]).unwrap()
    }

    fn zeta_alpha(z: &ZetaAssignment) -> AlphaSystem4 {
        let all: Vec<Vertex> = (1..=6).collect();
        let mut a = AlphaSystem4::new();
        for missing in 1..=6 {
            let key: Vec<Vertex> = all.iter().copied().filter(|&v| v != missing).collect();
            a.set(&key, z.get(missing).unwrap().clone());
        }
        a
    }

    #[test]
    fn complexes_and_gauge() {
        let z = reference_zeta();
        for (lhs, rhs) in [move_33_sides().unwrap(), move_24_sides().unwrap()] {
            for t in [&lhs, &rhs] {
                let f3 = build_f3_4d(t, &z).unwrap();
                let f4 = build_f4_4d(t, &z).unwrap();
                assert!(f4.mul(&f3).unwrap().is_zero());
                let (g3, g4) = gauge_transform(t, &z, &f3, &f4).unwrap();
                assert!(g4.mul(&g3).unwrap().is_zero());
                let (b3, b4) = inner_block(t, &f3, &f4).unwrap();
                assert!(b4.mul(&b3).unwrap().is_zero());
            }
        }
        let (lhs, _) = move_33_sides().unwrap();
        let (b3, b4) = inner_block(&lhs, &build_f3_4d(&lhs, &z).unwrap(), &build_f4_4d(&lhs, &z).unwrap()).unwrap();
        assert_eq!((b4.rows(), b4.cols(), b3.rows(), b3.cols()), (9, 6, 6, 1));
        let basis = ChainBasis4::new(&lhs).unwrap();
        assert_eq!(basis.dims(), (1, 24, 9));
        let (lhs24, _) = move_24_sides().unwrap();
        assert_eq!(build_f3_4d(&lhs24, &z).unwrap().cols(), 0);
        let cone = Triangulation::glue_by_labels(
            4,
            &[vec![1, 2, 3, 4, 6], vec![1, 2, 3, 5, 6], vec![1, 2, 4, 5, 6], vec![1, 3, 4, 5, 6], vec![2, 3, 4, 5, 6]],
        )
        .unwrap();
        assert!(matches!(build_f4_4d(&cone, &z), Err(Error::Precondition(_))));
    }

    #[test]
    fn forms_match_gauged_rows() {
        let z = sample_distinct_zetas(5, 3);
        let t = Triangulation::simplex(&[1, 2, 3, 4, 5]).unwrap();
        let vars = Vars4::new(&t).unwrap();
        let (_, g4) =
            gauge_transform(&t, &z, &build_f3_4d(&t, &z).unwrap(), &build_f4_4d(&t, &z).unwrap()).unwrap();
        let forms = weight_forms_4d(&t, &z, &vars, 0).unwrap();
        for (p, form) in forms.iter().enumerate() {
            for r in 0..5 {
                assert_eq!(form.coefficient(1 << vars.a[r]), *g4.get(p, 2 * r));
                assert_eq!(form.coefficient(1 << vars.b[r]), *g4.get(p, 2 * r + 1));
            }
        }
    }

    #[test]
    fn weight_expansion() {
        let z = sample_distinct_zetas(5, 11);
        let t = Triangulation::simplex(&[1, 2, 3, 4, 5]).unwrap();
        let vars = Vars4::new(&t).unwrap();
        let w = weight_w_4d(&t, &z, &vars, 0).unwrap();
        assert_eq!(w.len(), 72);
        assert!(w.is_odd() && w.terms().all(|(m, _)| m.count_ones() == 3));
        let diffs: Vec<Scalar> = (1..=5)
            .flat_map(|i| (1..=5).map(move |j| (i, j)))
            .filter(|(i, j)| i < j)
            .map(|(i, j)| z.diff(i, j).unwrap())
            .collect();
        for (_, c) in w.terms() {
            let ok = diffs.iter().any(|x| diffs.iter().any(|y| &(x * y) == c || &-(x * y) == c));
            assert!(ok, "coefficient {c} is not ±ζζ");
        }
        let reg = &vars.registry;
        let a1234b1234 = reg.monomial(&["a1234", "b1234", "b1235"]).unwrap();
        let zd = |i, j| z.diff(i, j).unwrap();
        let expect = zd(3, 4) * (zd(3, 4) * zd(2, 5) - zd(3, 5) * zd(2, 4)) * z.inv_diff(4, 5).unwrap();
        assert_eq!(w.coefficient(a1234b1234), expect);
        let mut alpha = AlphaSystem4::new();
        assert_eq!(deformed_weight_4d(&t, &z, &vars, 0, &alpha.get(&[1, 2, 3, 4, 5])).unwrap(), w);
        alpha.set(&[1, 2, 3, 4, 5], int(3));
        let d = deformed_weight_4d(&t, &z, &vars, 0, &alpha.get(&[1, 2, 3, 4, 5])).unwrap();
        assert_eq!(d.coefficient(1 << vars.e), int(3));
    }

    #[test]
    fn face_operators() {
        let z = sample_distinct_zetas(6, 5);
        let (lhs, rhs) = move_24_sides().unwrap();
        let reg = Vars4::registry_for(&[&lhs, &rhs]).unwrap();
        let v = Vars4::in_registry(&rhs, &reg).unwrap();
        let g = |n: &str| reg.index(n).unwrap();
        let op = |pairs: &[(&str, i64)]| {
            pairs.iter().fold(FirstOrderOperator::new(), |d, &(n, c)| d.with(g(n), int(c)))
        };
        let d = |s: &[Vertex]| face_operator_4d(&rhs, &z, &v, s).unwrap();
        assert_eq!(d(&[1, 5, 6]), op(&[("a1256", 1), ("a1356", 1), ("a1456", 1)]));
        assert_eq!(d(&[2, 5, 6]), op(&[("b1256", -1), ("a2356", 1), ("a2456", 1)]));
        assert_eq!(d(&[3, 5, 6]), op(&[("b1356", -1), ("b2356", -1), ("a3456", 1)]));
        assert_eq!(d(&[4, 5, 6]), op(&[("b1456", -1), ("b2456", -1), ("b3456", -1)]));

        let w = GrassmannElement::product_of(&reg, &[g("a1256"), g("b1256"), g("a3456"), g("b3456")], int(1));
        let faces = [vec![1, 5, 6], vec![2, 5, 6], vec![3, 5, 6], vec![4, 5, 6]];
        assert_eq!(apply_face_operators(&rhs, &z, &v, &faces, &w).unwrap(), GrassmannElement::one(&reg));

        let (l33, r33) = move_33_sides().unwrap();
        let reg = Vars4::registry_for(&[&l33, &r33]).unwrap();
        let vl = Vars4::in_registry(&l33, &reg).unwrap();
        let w123 = face_weight_4d(&l33, &z, &vl, &[vec![1, 2, 3]]).unwrap();
        let expect = GrassmannElement::generator(&reg, reg.index("a1234").unwrap())
            .scale(&(z.diff(3, 4).unwrap() * z.inv_diff(2, 3).unwrap()));
        assert_eq!(w123, expect);
        let vr = Vars4::in_registry(&r33, &reg).unwrap();
        let w456 = face_weight_4d(&r33, &z, &vr, &[vec![4, 5, 6]]).unwrap();
        assert_eq!(w456, -&GrassmannElement::generator(&reg, reg.index("b1456").unwrap()));

        for t in [&l33, &r33, &lhs, &rhs] {
            let vars = Vars4::new(t).unwrap();
            let (g3, _) =
                gauge_transform(t, &z, &build_f3_4d(t, &z).unwrap(), &build_f4_4d(t, &z).unwrap()).unwrap();
            let c = t.classification();
            for (j, (_, s)) in c.inner(2).enumerate() {
                let d = face_operator_4d(t, &z, &vars, &s.labels).unwrap();
                for r in 0..c.count(3) {
                    assert_eq!(d.coefficient(vars.a[r]), *g3.get(2 * r, j));
                    assert_eq!(d.coefficient(vars.b[r]), *g3.get(2 * r + 1, j));
                }
            }
        }
    }

    #[test]
    fn alpha_systems() {
        let z = reference_zeta();
        for sides in [move_33_sides().unwrap(), move_24_sides().unwrap()] {
            let ones = AlphaSystem4::constant(&[&sides.0, &sides.1], int(1));
            assert!(alpha_is_consistent_4d(&sides, &z, &ones).unwrap());
        }
        let s33 = move_33_sides().unwrap();
        assert!(alpha_is_consistent_4d(&s33, &z, &zeta_alpha(&z)).unwrap());
        let bad = zeta_alpha(&z).with(&[1, 2, 3, 4, 5], int(100));
        assert!(!alpha_is_consistent_4d(&s33, &z, &bad).unwrap());
        assert!(matches!(verify_move_33(&z, &bad), Err(Error::InconsistentAlpha(_))));
        assert!(!consistent_alpha_basis(&s33.0, &s33.1, &z).unwrap().is_empty());
    }

    #[test]
    fn relation_33() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for z in [reference_zeta(), sample_distinct_zetas(6, 1)] {
            let sides = move_33_sides().unwrap();
            let mut systems = vec![
                AlphaSystem4::new(),
                AlphaSystem4::constant(&[&sides.0, &sides.1], int(1)),
                zeta_alpha(&z),
            ];
            systems.push(random_consistent_alpha(&sides.0, &sides.1, &z, &mut rng).unwrap());
            for alpha in &systems {
                let check = verify_move_33(&z, alpha).unwrap();
                assert!(!check.lhs.is_zero());
                assert!(check.holds(), "3→3 fails for {alpha:?}");
            }
        }
    }

    #[test]
    fn relation_24() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let z = reference_zeta();
        let sides = move_24_sides().unwrap();
        let mut systems = vec![AlphaSystem4::new(), AlphaSystem4::constant(&[&sides.0, &sides.1], int(1))];
        systems.push(random_consistent_alpha(&sides.0, &sides.1, &z, &mut rng).unwrap());
        for alpha in &systems {
            let check = verify_move_24(&z, alpha).unwrap();
            assert!(!check.lhs.is_zero());
            assert!(check.holds(), "2→4 fails for {alpha:?}");
        }
        let reg = Vars4::registry_for(&[&sides.0, &sides.1]).unwrap();
        let names = ["a1256", "b1256", "a3456", "b3456"];
        let gens: Vec<Gen> = names.iter().map(|n| reg.index(n).unwrap()).collect();
        let w = GrassmannElement::product_of(&reg, &gens, int(1));
        assert!(move_24_with(&z, &systems[2], &sides, &w).unwrap().holds());
    }

    #[test]
    fn degree_in_alpha() {
        let z = reference_zeta();
        let sides = move_33_sides().unwrap();
        let basis = consistent_alpha_basis(&sides.0, &sides.1, &z).unwrap();
        let line = |t: i64| {
            let mut a = AlphaSystem4::new();
            for (k, v) in &basis[0].values {
                a.set(k, v * int(t));
            }
            move_33_unchecked(&z, &a, &sides).unwrap()
        };
        let (c0, c1, c2) = (line(0), line(1), line(2));
        for side in [|c: &MoveCheck| c.lhs.clone(), |c: &MoveCheck| c.rhs.clone()] {
            let second = &(&side(&c2) - &side(&c1).scale(&int(2))) + &side(&c0);
            assert!(second.is_zero());
        }
    }

    #[test]
    fn conjectured_invariant() {
        let z = reference_zeta();
        let t = Triangulation::simplex(&[1, 2, 3, 4, 5]).unwrap();
        let alpha = AlphaSystem4::new().with(&[1, 2, 3, 4, 5], int(2));
        let vars = Vars4::new(&t).unwrap();
        assert_eq!(
            conjectured_invariant_4d(&t, &z, &alpha).unwrap(),
            deformed_weight_4d(&t, &z, &vars, 0, &int(2)).unwrap()
        );
        for sides in [move_33_sides().unwrap(), move_24_sides().unwrap()] {
            let reg = Vars4::registry_for(&[&sides.0, &sides.1]).unwrap();
            let alpha = AlphaSystem4::constant(&[&sides.0, &sides.1], int(1));
            let l = conjectured_invariant_4d_in(&sides.0, &z, &alpha, &reg).unwrap();
            let r = conjectured_invariant_4d_in(&sides.1, &z, &alpha, &reg).unwrap();
            assert!(!l.is_zero());
            assert!(l == r || l == -&r);
        }
    }
}
