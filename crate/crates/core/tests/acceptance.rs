//! End-to-end acceptance checks, one line of output per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use num_traits::{Signed, Zero};
use pachner_core::chain3d::{check_complex, invariant_i0, torsion_table, TorsionSetup};
use pachner_core::chain4d::{
    build_f3_4d, build_f4_4d, conjectured_invariant_4d_in, gauge_transform, move_24_sides, move_33_sides,
    verify_move_24, verify_move_33, weight_w_4d, Vars4,
};
use pachner_core::invariant3d::{
    alpha_for_g, construct_orderly, elementary_move, free_cells, invariant_g, invariant_g_pfaffian, lens_table,
    OrderlyMapping, LENS_TABLE,
};
use pachner_core::samples;
use pachner_core::scalars::{int, sample_distinct_zetas};
use pachner_core::weights3d::{
    move_14_sides, move_23_deg4, move_23_sides, move_23_unchecked, random_consistent_alpha,
    verify_move_14, verify_move_23, verify_move_23_deg4, Deg4Coefficient,
};
use pachner_core::{
    pachner_move, AlphaSystem, GrassmannElement, Matrix, PachnerMove, Scalar, SkewMatrix, Triangulation,
    Vertex, ZetaAssignment,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn same_up_to_sign(x: &GrassmannElement, y: &GrassmannElement) -> bool {
    let y = y.embed(x.registry()).unwrap();
    *x == y || *x == -&y
}

fn lens_tables() -> Outcome {
    for (p, q, n, zs, expected) in LENS_TABLE {
        let z = ZetaAssignment::from_ints(&zs).unwrap();
        let v = lens_table(p, q, n, &z).map_err(|e| e.to_string())?;
        ensure(v == int(expected), || format!("L({p},{q}) n={n} zeta={zs:?}: got {v}, want {expected}"))?;
    }
    Ok(format!("{} published values reproduced", LENS_TABLE.len()))
}

fn chain_complexes() -> Outcome {
    let complexes = samples::complexes_3d().unwrap();
    for (name, t) in &complexes {
        let n = t.vertex_labels().len();
        for seed in 0..5 {
            let z = sample_distinct_zetas(n, seed);
            ensure(check_complex(t, &z).unwrap(), || format!("{name}, zeta seed {seed}"))?;
        }
    }
    let clusters = samples::clusters_4d().unwrap();
    for (name, t) in &clusters {
        for seed in 0..5 {
            let z = sample_distinct_zetas(6, seed);
            let f3 = build_f3_4d(t, &z).unwrap();
            let f4 = build_f4_4d(t, &z).unwrap();
            let (g3, g4) = gauge_transform(t, &z, &f3, &f4).unwrap();
            ensure(f4.mul(&f3).unwrap().is_zero(), || format!("{name}: f4 f3 != 0"))?;
            ensure(g4.mul(&g3).unwrap().is_zero(), || format!("{name}: gauged f4 f3 != 0"))?;
        }
    }
    Ok(format!("{} 3D complexes and {} 4D clusters at 5 zeta each", complexes.len(), clusters.len()))
}

fn moves_3d() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let (l23, r23) = move_23_sides().unwrap();
    let (l14, r14) = move_14_sides().unwrap();
    let mut checks = 0;
    for seed in 0..20 {
        let z5 = sample_distinct_zetas(5, 1000 + seed);
        ensure(verify_move_23(&z5, &AlphaSystem::new()).unwrap().holds(), || format!("2-3 at alpha 0, seed {seed}"))?;
        ensure(verify_move_14(&z5, &AlphaSystem::new()).unwrap().holds(), || format!("1-4 at alpha 0, seed {seed}"))?;
        ensure(verify_move_23_deg4(&z5).unwrap().holds(), || format!("2-3 degree 4, seed {seed}"))?;
        checks += 3;
        for k in 0..10 {
            let a = random_consistent_alpha(&l23, &r23, &z5, &mut rng).unwrap();
            ensure(verify_move_23(&z5, &a).unwrap().holds(), || format!("2-3, seed {seed}, alpha {k}"))?;
            let a = random_consistent_alpha(&l14, &r14, &z5, &mut rng).unwrap();
            ensure(verify_move_14(&z5, &a).unwrap().holds(), || format!("1-4, seed {seed}, alpha {k}"))?;
            checks += 2;
        }
    }
    let z = sample_distinct_zetas(5, 999);
    let mut bad = random_consistent_alpha(&l23, &r23, &z, &mut rng).unwrap();
    bad.set(&[1, 2, 4, 5], bad.get(&[1, 2, 4, 5]) + int(1));
    ensure(
        !move_23_unchecked(&z, &bad, &(l23.clone(), r23.clone())).unwrap().holds(),
        || "perturbed alpha still satisfies 2-3".into(),
    )?;
    let mut eps: Vec<i8> = l23.cells().iter().map(|c| c.epsilon).collect();
    eps[1] = -eps[1];
    let flipped = (l23.with_epsilons(&eps).unwrap(), r23.clone());
    ensure(
        !move_23_deg4(&z, &flipped, Deg4Coefficient::Balanced).unwrap().holds(),
        || "flipped orientation still satisfies the degree-4 relation".into(),
    )?;
    Ok(format!("{checks} exact identities at 20 zeta (seeds 1000..1019), both negative controls fail"))
}

fn zeta_alpha(z: &ZetaAssignment) -> AlphaSystem {
    let mut a = AlphaSystem::new();
    for missing in 1..=6 {
        let key: Vec<Vertex> = (1..=6).filter(|&v| v != missing).collect();
        a.set(&key, z.get(missing).unwrap().clone());
    }
    a
}

fn moves_4d() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s33 = move_33_sides().unwrap();
    let s24 = move_24_sides().unwrap();
    let mut checks = 0;
    for seed in 0..20 {
        let z = sample_distinct_zetas(6, 2000 + seed);
        let mut systems = vec![
            AlphaSystem::new(),
            AlphaSystem::constant(&[&s33.0, &s33.1], int(1)),
            zeta_alpha(&z),
        ];
        for _ in 0..10 {
            systems.push(random_consistent_alpha(&s33.0, &s33.1, &z, &mut rng).unwrap());
        }
        for (k, a) in systems.iter().enumerate() {
            ensure(verify_move_33(&z, a).unwrap().holds(), || format!("3-3, seed {seed}, alpha {k}"))?;
            checks += 1;
        }
    }
    let reference = ZetaAssignment::from_ints(&[0, 1, 3, 8, 17, 21]).unwrap();
    let mut points = vec![("reference".to_string(), reference)];
    points.extend((0..20).map(|s| (format!("seed {}", 3000 + s), sample_distinct_zetas(6, 3000 + s))));
    for (label, z) in &points {
        for a in [AlphaSystem::new(), random_consistent_alpha(&s24.0, &s24.1, z, &mut rng).unwrap()] {
            ensure(verify_move_24(z, &a).unwrap().holds(), || format!("2-4 at {label}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} exact identities (3-3 seeds 2000..2019, 2-4 at (0,1,3,8,17,21) and seeds 3000..3019)"))
}

fn structural_constants() -> Outcome {
    let t = Triangulation::simplex(&[1, 2, 3, 4, 5]).unwrap();
    let vars = Vars4::new(&t).unwrap();
    for seed in 0..5 {
        let z = sample_distinct_zetas(5, seed);
        let w = weight_w_4d(&t, &z, &vars, 0).unwrap();
        ensure(w.len() == 72, || format!("{} monomials", w.len()))?;
        let mut products = BTreeSet::new();
        let pairs: Vec<(Vertex, Vertex)> = (1..=5).flat_map(|i| (i + 1..=5).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                products.insert((z.diff(i, j).unwrap() * z.diff(k, l).unwrap()).abs());
            }
        }
        for (_, c) in w.terms() {
            ensure(products.contains(&c.abs()), || format!("coefficient {c} is not a product of two differences"))?;
        }
    }
    Ok("72 monomials, each coefficient a product of two zeta differences".into())
}

/// Sum over perfect matchings with the sign of the pairing permutation.
fn matching_sum(a: &Matrix, free: &[usize]) -> Scalar {
    if free.is_empty() {
        return int(1);
    }
    let i = free[0];
    let mut total = Scalar::zero();
    for (p, &j) in free.iter().enumerate().skip(1) {
        let rest: Vec<usize> = free.iter().copied().filter(|&x| x != i && x != j).collect();
        let sign = if p % 2 == 1 { int(1) } else { int(-1) };
        total += sign * a.get(i, j) * matching_sum(a, &rest);
    }
    total
}

fn oracle_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in (0..=8).step_by(2) {
        for _ in 0..5 {
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let v = int(rng.random_range(-5..=5));
                    m.set(i, j, v.clone());
                    m.set(j, i, -v);
                }
            }
            let pf = SkewMatrix::new(m.clone()).unwrap().pfaffian();
            let all: Vec<usize> = (0..n).collect();
            ensure(pf == matching_sum(&m, &all), || format!("Pfaffian mismatch at size {n}"))?;
            ensure(&pf * &pf == m.det().unwrap(), || format!("Pf^2 != det at size {n}"))?;
        }
    }
    let z = sample_distinct_zetas(7, 61);
    let small = [
        samples::single_tetrahedron().unwrap(),
        samples::glued_pair().unwrap(),
        samples::three_around_edge().unwrap(),
        samples::strip(4).unwrap(),
    ];
    for t in &small {
        for alpha in [alpha_for_g(), int(1), int(7)] {
            let g = invariant_g(t, &z, &OrderlyMapping::default(), &alpha).unwrap();
            ensure(invariant_g_pfaffian(t, &z, &alpha).unwrap() == g.scalar_part(), || {
                format!("G paths differ on {} cells", t.cells().len())
            })?;
        }
    }
    for t in &small[..3] {
        let table = torsion_table(t, &z).unwrap();
        let sign = table.values().find(|(c, _)| !c.is_zero()).map(|(c, tau)| c / tau);
        let Some(sign) = sign else {
            return Err("no nonzero torsion".into());
        };
        ensure(sign.abs() == int(1), || "T coefficient is not a torsion up to sign".into())?;
        for (coef, tau) in table.values() {
            ensure(*coef == tau * &sign, || "T coefficient differs from minor torsion".into())?;
        }
    }
    Ok("Pfaffian vs matching sum (n<=8), G paths on 4 complexes, T vs tau on 3 complexes".into())
}

/// `I_C` keyed by the labels of the boundary faces in `C`.
fn i0_by_labels(t: &Triangulation, z: &ZetaAssignment) -> BTreeMap<Vec<Vec<Vertex>>, Scalar> {
    let setup = TorsionSetup::new(t, z).unwrap();
    let faces = &t.classification().simplices[2];
    let mut out = BTreeMap::new();
    for c in pachner_core::chain3d::subsets(&setup.boundary_faces, setup.subset_size()) {
        let mut key: Vec<Vec<Vertex>> = c.iter().map(|&k| faces[k].labels.clone()).collect();
        key.sort();
        out.insert(key, invariant_i0(t, z, &c).unwrap());
    }
    out
}

fn invariance() -> Outcome {
    let z = sample_distinct_zetas(6, 71);
    let dc = samples::double_cone().unwrap();
    let m = construct_orderly(&dc, &BTreeSet::new()).unwrap();
    let g = invariant_g(&dc, &z, &m, &alpha_for_g()).unwrap();
    let mut moves = 0;
    for &k in m.assignment.keys() {
        for r in free_cells(&dc, &m, k).unwrap() {
            let h = elementary_move(&dc, &m, k, r).unwrap();
            let gh = invariant_g(&dc, &z, &h, &alpha_for_g()).unwrap();
            ensure(same_up_to_sign(&g, &gh), || format!("elementary move of vertex {k} to cell {r}"))?;
            moves += 1;
        }
    }
    let id = |l: [Vertex; 4]| dc.cells().iter().find(|c| c.vertices == l).unwrap().id;
    let (moved, _) = pachner_move(&dc, PachnerMove::TwoThree, &[id([1, 2, 4, 5]), id([1, 2, 5, 6])], None).unwrap();
    let m2 = construct_orderly(&moved, &BTreeSet::new()).unwrap();
    let g2 = invariant_g(&moved, &z, &m2, &alpha_for_g()).unwrap();
    ensure(same_up_to_sign(&g, &g2), || "interior 2-3 move changes G".into())?;
    let (back, _) = pachner_move(
        &moved,
        PachnerMove::ThreeTwo,
        &moved.cells().iter().rev().take(3).map(|c| c.id).collect::<Vec<_>>(),
        None,
    )
    .unwrap();
    let m3 = construct_orderly(&back, &BTreeSet::new()).unwrap();
    let g3 = invariant_g(&back, &z, &m3, &alpha_for_g()).unwrap();
    ensure(same_up_to_sign(&g, &g3), || "interior 3-2 move changes G".into())?;

    let cone = samples::cone().unwrap();
    let z5 = sample_distinct_zetas(5, 72);
    let map: BTreeMap<Vertex, Vertex> = [(5, 0)].into();
    let before = i0_by_labels(&cone, &z5);
    let after = i0_by_labels(&cone.relabel(&map).unwrap(), &z5.relabel(&map).unwrap());
    let ratio = before
        .iter()
        .find(|(_, v)| !v.is_zero())
        .map(|(k, v)| &after[k] / v)
        .ok_or("all I_C vanish")?;
    ensure(ratio.abs() == int(1), || format!("renumbering scales I_C by {ratio}"))?;
    for (k, v) in &before {
        ensure(after[k] == v * &ratio, || format!("renumbering changes I_C at {k:?}"))?;
    }

    let mut checked = 0;
    for seed in 0..5 {
        let z6 = if seed == 0 {
            ZetaAssignment::from_ints(&[0, 1, 3, 8, 17, 21]).unwrap()
        } else {
            sample_distinct_zetas(6, 4000 + seed)
        };
        for sides in [move_33_sides().unwrap(), move_24_sides().unwrap()] {
            let reg = Vars4::registry_for(&[&sides.0, &sides.1]).unwrap();
            let alpha = AlphaSystem::constant(&[&sides.0, &sides.1], int(1));
            let l = conjectured_invariant_4d_in(&sides.0, &z6, &alpha, &reg).unwrap();
            let r = conjectured_invariant_4d_in(&sides.1, &z6, &alpha, &reg).unwrap();
            ensure(!l.is_zero() && same_up_to_sign(&l, &r), || format!("4D expression differs, seed {seed}"))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{moves} elementary moves, interior 2-3 and 3-2, vertex renumbering, {checked} 4D comparisons"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("lens tables", lens_tables),
        ("chain-complex property", chain_complexes),
        ("3D move identities", moves_3d),
        ("4D move identities", moves_4d),
        ("structural constants", structural_constants),
        ("oracle equivalences", oracle_equivalences),
        ("invariance properties", invariance),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (r, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (k, ((name, _), (r, secs))) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
