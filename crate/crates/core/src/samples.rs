//! Small named triangulations used by the test suites, the benches and the
//! command-line tool.

use crate::error::Result;
use crate::triangulation::{build_lens, excise_chain_and_double, pachner_move, PachnerMove, Triangulation};
use crate::scalars::Vertex;

pub fn single_tetrahedron() -> Result<Triangulation> {
    Triangulation::simplex(&[1, 2, 3, 4])
}

/// `1234` and `1235` glued along `123`.
pub fn glued_pair() -> Result<Triangulation> {
    Triangulation::glue_by_labels(3, &[vec![1, 2, 3, 4], vec![1, 2, 3, 5]])
}

/// Three tetrahedra around the edge `45`.
pub fn three_around_edge() -> Result<Triangulation> {
    Ok(pachner_move(&glued_pair()?, PachnerMove::TwoThree, &[0, 1], None)?.0)
}

/// Cone over the boundary of `1234` with apex 5.
pub fn cone() -> Result<Triangulation> {
    Ok(pachner_move(&single_tetrahedron()?, PachnerMove::OneFour, &[0], Some(5))?.0)
}

/// The cone with its cell `1235` coned again, apex 6.
pub fn double_cone() -> Result<Triangulation> {
    let t = cone()?;
    let k = t.cells().iter().find(|c| c.vertices == [1, 2, 3, 5]).map(|c| c.id).unwrap_or(0);
    Ok(pachner_move(&t, PachnerMove::OneFour, &[k], Some(6))?.0)
}

/// `n` tetrahedra `{k+1, …, k+4}`, each glued to the next along a face.
pub fn strip(n: usize) -> Result<Triangulation> {
    let cells: Vec<Vec<Vertex>> = (0..n as Vertex).map(|k| (k + 1..=k + 4).collect()).collect();
    Triangulation::glue_by_labels(3, &cells)
}

/// Lens space `L(p, q)` with a chain of two tetrahedra removed.
pub fn lens_minus_chain(p: usize, q: usize, n: usize) -> Result<Triangulation> {
    excise_chain_and_double(&build_lens(p, q)?, p, n)
}

/// Named 3D complexes with boundary.
pub fn complexes_3d() -> Result<Vec<(String, Triangulation)>> {
    let mut out = vec![
        ("tetrahedron".to_string(), single_tetrahedron()?),
        ("glued pair".to_string(), glued_pair()?),
        ("three around an edge".to_string(), three_around_edge()?),
        ("cone".to_string(), cone()?),
        ("double cone".to_string(), double_cone()?),
    ];
    for n in [3, 5] {
        out.push((format!("strip of {n}"), strip(n)?));
    }
    for (p, q, n) in [(7, 1, 1), (7, 2, 2), (7, 3, 3)] {
        out.push((format!("L({p},{q}) minus chain {n}"), lens_minus_chain(p, q, n)?));
    }
    Ok(out)
}

/// Both sides of the 4D moves: `3→3` left and right, `2→4` left and right.
pub fn clusters_4d() -> Result<Vec<(String, Triangulation)>> {
    let (l33, r33) = crate::chain4d::move_33_sides()?;
    let (l24, r24) = crate::chain4d::move_24_sides()?;
    Ok(vec![
        ("3-3 left".into(), l33),
        ("3-3 right".into(), r33),
        ("2-4 left".into(), l24),
        ("2-4 right".into(), r24),
    ])
}
