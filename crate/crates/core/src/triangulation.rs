//! Glued-cell complexes in dimension 3 and 4.
//!
//! Top cells carry ascending global vertex labels and an orientation sign.
//! Facet slot `k` of a cell is the facet omitting its `k`-th vertex. Two
//! cells may share the same labels; they are always told apart by id.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalars::Vertex;

pub type CellId = u32;

/// Local vertex subset of a cell, bit `k` for its `k`-th vertex.
pub type LocalMask = u32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub vertices: Vec<Vertex>,
    pub epsilon: i8,
}

impl Cell {
    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    pub fn mask_of(&self, labels: &[Vertex]) -> Option<LocalMask> {
        labels
            .iter()
            .try_fold(0, |m, &v| Some(m | 1 << self.position(v)?))
    }

    pub fn labels_of(&self, mask: LocalMask) -> Vec<Vertex> {
        (0..self.vertices.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| self.vertices[k])
            .collect()
    }

    fn full_mask(&self) -> LocalMask {
        (1 << self.vertices.len()) - 1
    }

    /// Labels of facet slot `k`.
    pub fn facet(&self, slot: usize) -> Vec<Vertex> {
        self.labels_of(self.full_mask() & !(1 << slot))
    }
}

/// (cell index, slot) inside a [`Triangulation`].
pub type SlotRef = (usize, usize);

#[derive(Serialize, Deserialize)]
struct TriangulationFile {
    dimension: usize,
    cells: Vec<Cell>,
    gluings: Vec<[[u64; 2]; 2]>,
}

/// A sub-simplex of the complex: an equivalence class of local vertex
/// subsets of top cells under the facet gluings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexClass {
    pub labels: Vec<Vertex>,
    /// (cell index, local mask), sorted.
    pub members: Vec<(usize, LocalMask)>,
    pub boundary: bool,
}

impl SimplexClass {
    pub fn is_inner(&self) -> bool {
        !self.boundary
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    /// `simplices[k]` lists the `k`-dimensional classes for `k < dimension`.
    pub simplices: Vec<Vec<SimplexClass>>,
    lookup: HashMap<(usize, LocalMask), usize>,
}

impl Classification {
    /// Index of the class containing the given local simplex.
    pub fn class_of(&self, cell: usize, mask: LocalMask) -> usize {
        self.lookup[&(cell, mask)]
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices[k].len()
    }

    pub fn inner_count(&self, k: usize) -> usize {
        self.simplices[k].iter().filter(|s| s.is_inner()).count()
    }

    pub fn inner(&self, k: usize) -> impl Iterator<Item = (usize, &SimplexClass)> {
        self.simplices[k].iter().enumerate().filter(|(_, s)| s.is_inner())
    }

    pub fn boundary(&self, k: usize) -> impl Iterator<Item = (usize, &SimplexClass)> {
        self.simplices[k].iter().enumerate().filter(|(_, s)| s.boundary)
    }
}

#[derive(Debug)]
pub struct Triangulation {
    dimension: usize,
    cells: Vec<Cell>,
    glue: Vec<Vec<Option<SlotRef>>>,
    index: HashMap<CellId, usize>,
    classes: OnceLock<Classification>,
}

impl Clone for Triangulation {
    fn clone(&self) -> Self {
        Self {
            dimension: self.dimension,
            cells: self.cells.clone(),
            glue: self.glue.clone(),
            index: self.index.clone(),
            classes: OnceLock::new(),
        }
    }
}

impl PartialEq for Triangulation {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.cells == other.cells && self.glue == other.glue
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidTriangulation(msg.into())
}

/// Sign of the permutation sorting `seq`.
pub fn permutation_sign(seq: &[Vertex]) -> i8 {
    let mut s = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

impl Triangulation {
    /// Builds a complex from cells and glued slot pairs given by cell id.
    pub fn new(
        dimension: usize,
        cells: Vec<Cell>,
        gluings: &[((CellId, usize), (CellId, usize))],
    ) -> Result<Self> {
        if dimension != 3 && dimension != 4 {
            return Err(invalid(format!("dimension {dimension} not supported")));
        }
        let mut index = HashMap::new();
        for (k, c) in cells.iter().enumerate() {
            if c.vertices.len() != dimension + 1 {
                return Err(invalid(format!("cell {} has {} vertices", c.id, c.vertices.len())));
            }
            if c.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!("cell {} vertices not strictly ascending", c.id)));
            }
            if c.epsilon != 1 && c.epsilon != -1 {
                return Err(invalid(format!("cell {} has epsilon {}", c.id, c.epsilon)));
            }
            if index.insert(c.id, k).is_some() {
                return Err(invalid(format!("duplicate cell id {}", c.id)));
            }
        }
        let mut glue = vec![vec![None; dimension + 1]; cells.len()];
        for &((ia, sa), (ib, sb)) in gluings {
            let look = |id: CellId, s: usize| -> Result<SlotRef> {
                let k = *index
                    .get(&id)
                    .ok_or_else(|| invalid(format!("gluing names unknown cell {id}")))?;
                if s > dimension {
                    return Err(invalid(format!("cell {id} has no slot {s}")));
                }
                Ok((k, s))
            };
            let a = look(ia, sa)?;
            let b = look(ib, sb)?;
            if a == b {
                return Err(invalid(format!("slot {sa} of cell {ia} glued to itself")));
            }
            for (x, id, s) in [(a, ia, sa), (b, ib, sb)] {
                if glue[x.0][x.1].is_some() {
                    return Err(invalid(format!("slot {s} of cell {id} glued twice")));
                }
            }
            if cells[a.0].facet(a.1) != cells[b.0].facet(b.1) {
                return Err(invalid(format!(
                    "slot {sa} of cell {ia} and slot {sb} of cell {ib} carry different labels"
                )));
            }
            glue[a.0][a.1] = Some(b);
            glue[b.0][b.1] = Some(a);
        }
        Ok(Self {
            dimension,
            cells,
            glue,
            index,
            classes: OnceLock::new(),
        })
    }

    /// Cells with ids `0, 1, …` glued along every facet label set that
    /// occurs exactly twice, then oriented with the first cell positive.
    pub fn glue_by_labels(dimension: usize, cells: &[Vec<Vertex>]) -> Result<Self> {
        let cells: Vec<Cell> = cells
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let mut v = v.clone();
                v.sort_unstable();
                Cell { id: k as CellId, vertices: v, epsilon: 1 }
            })
            .collect();
        let mut by_facet: BTreeMap<Vec<Vertex>, Vec<(CellId, usize)>> = BTreeMap::new();
        for c in &cells {
            for s in 0..=dimension {
                by_facet.entry(c.facet(s)).or_default().push((c.id, s));
            }
        }
        let gluings: Vec<_> = by_facet
            .values()
            .filter(|v| v.len() == 2)
            .map(|v| (v[0], v[1]))
            .collect();
        Self::new(dimension, cells, &gluings)?.oriented()
    }

    /// A single top simplex with positive orientation.
    pub fn simplex(labels: &[Vertex]) -> Result<Self> {
        Self::glue_by_labels(labels.len() - 1, &[labels.to_vec()])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &Cell {
        &self.cells[k]
    }

    pub fn index_of(&self, id: CellId) -> Result<usize> {
        self.index
            .get(&id)
            .copied()
            .ok_or_else(|| invalid(format!("no cell with id {id}")))
    }

    pub fn cell_by_id(&self, id: CellId) -> Result<&Cell> {
        Ok(&self.cells[self.index_of(id)?])
    }

    pub fn partner(&self, cell: usize, slot: usize) -> Option<SlotRef> {
        self.glue[cell][slot]
    }

    pub fn gluing_pairs(&self) -> Vec<((CellId, usize), (CellId, usize))> {
        let mut out = Vec::new();
        for (k, slots) in self.glue.iter().enumerate() {
            for (s, p) in slots.iter().enumerate() {
                if let Some((k2, s2)) = *p {
                    if (k, s) < (k2, s2) {
                        out.push(((self.cells[k].id, s), (self.cells[k2].id, s2)));
                    }
                }
            }
        }
        out
    }

    pub fn vertex_labels(&self) -> BTreeSet<Vertex> {
        self.cells.iter().flat_map(|c| c.vertices.iter().copied()).collect()
    }

    pub fn with_epsilons(&self, eps: &[i8]) -> Result<Self> {
        if eps.len() != self.cells.len() {
            return Err(invalid("wrong number of orientation signs"));
        }
        let mut t = self.clone();
        for (c, &e) in t.cells.iter_mut().zip(eps) {
            if e != 1 && e != -1 {
                return Err(invalid(format!("epsilon {e}")));
            }
            c.epsilon = e;
        }
        Ok(t)
    }

    /// Propagates orientation signs from the first cell (set to +1) so
    /// that glued facets receive opposite induced orientations.
    pub fn oriented(&self) -> Result<Self> {
        let n = self.cells.len();
        let mut eps: Vec<Option<i8>> = vec![None; n];
        if n == 0 {
            return Ok(self.clone());
        }
        eps[0] = Some(1);
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            let ea = eps[a].unwrap();
            for sa in 0..=self.dimension {
                let Some((b, sb)) = self.glue[a][sa] else { continue };
                let eb = -ea * slot_sign(sa) * slot_sign(sb);
                match eps[b] {
                    None => {
                        eps[b] = Some(eb);
                        queue.push_back(b);
                    }
                    Some(e) if e != eb => {
                        return Err(Error::Orientation(format!(
                            "cell {} slot {sa} conflicts with cell {} slot {sb}",
                            self.cells[a].id, self.cells[b].id
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        if let Some(k) = eps.iter().position(Option::is_none) {
            return Err(Error::Orientation(format!(
                "cell {} is not connected to cell {}",
                self.cells[k].id, self.cells[0].id
            )));
        }
        self.with_epsilons(&eps.into_iter().map(Option::unwrap).collect::<Vec<_>>())
    }

    /// Glued facet pairs whose induced orientations agree.
    pub fn orientation_defects(&self) -> Vec<((CellId, usize), (CellId, usize))> {
        self.gluing_pairs()
            .into_iter()
            .filter(|&((ia, sa), (ib, sb))| {
                let ea = self.cells[self.index[&ia]].epsilon;
                let eb = self.cells[self.index[&ib]].epsilon;
                ea * slot_sign(sa) != -eb * slot_sign(sb)
            })
            .collect()
    }

    pub fn is_consistently_oriented(&self) -> bool {
        self.orientation_defects().is_empty()
    }

    pub fn classification(&self) -> &Classification {
        self.classes.get_or_init(|| self.classify_now())
    }

    fn classify_now(&self) -> Classification {
        let d = self.dimension;
        let n = self.cells.len();
        let width = 1usize << (d + 1);
        let mut parent: Vec<usize> = (0..n * width).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in 0..n {
            for sa in 0..=d {
                let Some((b, _)) = self.glue[a][sa] else { continue };
                let ca = &self.cells[a];
                let cb = &self.cells[b];
                let facet = ca.full_mask() & !(1 << sa);
                for sub in submasks(facet) {
                    let mb = cb.mask_of(&ca.labels_of(sub)).expect("glued facets share labels");
                    let x = find(&mut parent, a * width + sub as usize);
                    let y = find(&mut parent, b * width + mb as usize);
                    if x != y {
                        parent[x] = y;
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<(usize, LocalMask)>> = BTreeMap::new();
        for a in 0..n {
            for m in 1..self.cells[a].full_mask() {
                let r = find(&mut parent, a * width + m as usize);
                groups.entry(r).or_default().push((a, m));
            }
        }
        let mut simplices: Vec<Vec<SimplexClass>> = vec![Vec::new(); d];
        for members in groups.into_values() {
            let (a, m) = members[0];
            let labels = self.cells[a].labels_of(m);
            let boundary = members.iter().any(|&(c, mm)| {
                (0..=d).any(|s| self.glue[c][s].is_none() && mm & (1 << s) == 0)
            });
            simplices[labels.len() - 1].push(SimplexClass { labels, members, boundary });
        }
        let mut lookup = HashMap::new();
        for list in simplices.iter_mut() {
            list.sort_by(|x, y| (&x.labels, &x.members[0]).cmp(&(&y.labels, &y.members[0])));
            for (k, s) in list.iter().enumerate() {
                for &mem in &s.members {
                    lookup.insert(mem, k);
                }
            }
        }
        Classification { simplices, lookup }
    }

    /// Class index of facet slot `slot` of cell `cell`.
    pub fn facet_class(&self, cell: usize, slot: usize) -> usize {
        let mask = self.cells[cell].full_mask() & !(1 << slot);
        self.classification().class_of(cell, mask)
    }

    /// Class index of the sub-simplex of `cell` with the given labels.
    pub fn class_of_labels(&self, cell: usize, labels: &[Vertex]) -> Option<usize> {
        let m = self.cells[cell].mask_of(labels)?;
        Some(self.classification().class_of(cell, m))
    }

    pub fn inner_vertices(&self) -> Vec<Vertex> {
        self.classification()
            .inner(0)
            .map(|(_, s)| s.labels[0])
            .collect()
    }

    /// Alternating sum of simplex counts including top cells.
    pub fn euler_characteristic(&self) -> i64 {
        let c = self.classification();
        let mut chi = 0i64;
        for k in 0..self.dimension {
            let n = c.count(k) as i64;
            chi += if k % 2 == 0 { n } else { -n };
        }
        let top = self.cells.len() as i64;
        chi + if self.dimension % 2 == 0 { top } else { -top }
    }

    /// Boundary facets as label lists, sorted.
    pub fn boundary_facets(&self) -> Vec<Vec<Vertex>> {
        let mut out: Vec<Vec<Vertex>> = self
            .classification()
            .boundary(self.dimension - 1)
            .map(|(_, s)| s.labels.clone())
            .collect();
        out.sort();
        out
    }

    /// Oriented link of a codimension-2 simplex class: one ordered label
    /// pair `(i, j)` per containing cell, ordered so that
    /// `ε · sign(i, j, labels…) = -1`.
    pub fn oriented_link(&self, class: &SimplexClass) -> Vec<(CellId, Vertex, Vertex)> {
        class
            .members
            .iter()
            .map(|&(c, m)| {
                let cell = &self.cells[c];
                let rest = cell.labels_of(cell.full_mask() & !m);
                let (i, j) = (rest[0], rest[1]);
                let mut seq = vec![i, j];
                seq.extend(&class.labels);
                if cell.epsilon * permutation_sign(&seq) == -1 {
                    (cell.id, i, j)
                } else {
                    (cell.id, j, i)
                }
            })
            .collect()
    }

    /// Oriented link of every codimension-2 simplex carrying `labels`.
    pub fn oriented_link_of(&self, labels: &[Vertex]) -> Result<Vec<(CellId, Vertex, Vertex)>> {
        if labels.len() + 2 != self.dimension + 1 {
            return Err(invalid("link needs a codimension-2 simplex"));
        }
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        let classes: Vec<&SimplexClass> = self.classification().simplices[self.dimension - 2]
            .iter()
            .filter(|s| s.labels == sorted)
            .collect();
        if classes.is_empty() {
            return Err(invalid(format!("no simplex {sorted:?}")));
        }
        Ok(classes.into_iter().flat_map(|c| self.oriented_link(c)).collect())
    }

    /// Walks around a codimension-2 class through facet gluings. Returns
    /// true when the oriented link edges chain head to tail and, for inner
    /// classes, close into a single cycle through every member.
    pub fn link_closes(&self, class: &SimplexClass) -> bool {
        let link: HashMap<usize, (Vertex, Vertex)> = class
            .members
            .iter()
            .zip(self.oriented_link(class))
            .map(|(&(c, _), (_, i, j))| (c, (i, j)))
            .collect();
        let (start, _) = class.members[0];
        let mut visited = BTreeSet::new();
        let mut cur = start;
        loop {
            if !visited.insert(cur) {
                return cur == start && visited.len() == class.members.len() && !class.boundary;
            }
            let (i, j) = link[&cur];
            // facet containing the simplex and j, i.e. omitting i
            let slot = self.cells[cur].position(i).unwrap();
            let Some((next, _)) = self.glue[cur][slot] else {
                return class.boundary;
            };
            let Some(&(ni, _)) = link.get(&next) else { return false };
            if ni != j {
                return false;
            }
            cur = next;
        }
    }

    /// Problems preventing this from being a closed oriented
    /// pseudomanifold, each naming the cells involved.
    pub fn closed_manifold_defects(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, c) in self.cells.iter().enumerate() {
            for s in 0..=self.dimension {
                if self.glue[k][s].is_none() {
                    out.push(format!("slot {s} of cell {} is unglued", c.id));
                }
            }
        }
        for ((a, sa), (b, sb)) in self.orientation_defects() {
            out.push(format!("orientation mismatch: cell {a} slot {sa} vs cell {b} slot {sb}"));
        }
        if out.is_empty() {
            for s in &self.classification().simplices[self.dimension - 2] {
                if !self.link_closes(s) {
                    out.push(format!("link of {:?} is not a single cycle", s.labels));
                }
            }
        }
        out
    }

    /// Renames vertex labels; cells are re-sorted and their orientation
    /// signs adjusted so the geometric orientation is unchanged.
    pub fn relabel(&self, map: &BTreeMap<Vertex, Vertex>) -> Result<Self> {
        let mut perms = Vec::with_capacity(self.cells.len());
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let new: Vec<Vertex> = c.vertices.iter().map(|v| *map.get(v).unwrap_or(v)).collect();
            let mut order: Vec<usize> = (0..new.len()).collect();
            order.sort_by_key(|&k| new[k]);
            // old position k moves to new_pos[k]
            let mut new_pos = vec![0; new.len()];
            for (p, &k) in order.iter().enumerate() {
                new_pos[k] = p;
            }
            let sorted: Vec<Vertex> = order.iter().map(|&k| new[k]).collect();
            cells.push(Cell {
                id: c.id,
                vertices: sorted,
                epsilon: c.epsilon * permutation_sign(&new),
            });
            perms.push(new_pos);
        }
        let gluings: Vec<_> = self
            .gluing_pairs()
            .into_iter()
            .map(|((ia, sa), (ib, sb))| {
                let ka = self.index[&ia];
                let kb = self.index[&ib];
                ((ia, perms[ka][sa]), (ib, perms[kb][sb]))
            })
            .collect();
        Self::new(self.dimension, cells, &gluings)
    }

    /// Drops the listed cells; their partners' slots become boundary.
    pub fn remove_cells(&self, ids: &[CellId]) -> Result<Self> {
        for &id in ids {
            self.index_of(id)?;
        }
        let cells: Vec<Cell> = self
            .cells
            .iter()
            .filter(|c| !ids.contains(&c.id))
            .cloned()
            .collect();
        let gluings: Vec<_> = self
            .gluing_pairs()
            .into_iter()
            .filter(|((a, _), (b, _))| !ids.contains(a) && !ids.contains(b))
            .collect();
        Self::new(self.dimension, cells, &gluings)
    }

    pub fn to_json(&self) -> String {
        let file = TriangulationFile {
            dimension: self.dimension,
            cells: self.cells.clone(),
            gluings: self
                .gluing_pairs()
                .into_iter()
                .map(|((a, sa), (b, sb))| [[a as u64, sa as u64], [b as u64, sb as u64]])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TriangulationFile =
            serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        let conv = |x: u64| -> Result<u32> {
            u32::try_from(x).map_err(|_| invalid(format!("value {x} out of range")))
        };
        let gluings = file
            .gluings
            .iter()
            .map(|[[a, sa], [b, sb]]| {
                Ok(((conv(*a)?, conv(*sa)? as usize), (conv(*b)?, conv(*sb)? as usize)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.dimension, file.cells, &gluings)
    }
}

fn slot_sign(s: usize) -> i8 {
    if s % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Non-empty submasks of `m`.
fn submasks(m: LocalMask) -> impl Iterator<Item = LocalMask> {
    let mut s = m;
    std::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let out = s;
            s = (s - 1) & m;
            Some(out)
        }
    })
}

/// Bistellar moves supported by [`pachner_move`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PachnerMove {
    TwoThree,
    ThreeTwo,
    OneFour,
    FourOne,
    ThreeThree,
    TwoFour,
    FourTwo,
}

impl PachnerMove {
    pub fn dimension(self) -> usize {
        match self {
            Self::TwoThree | Self::ThreeTwo | Self::OneFour | Self::FourOne => 3,
            _ => 4,
        }
    }

    pub fn lhs_cells(self) -> usize {
        match self {
            Self::OneFour => 1,
            Self::TwoThree | Self::TwoFour => 2,
            Self::ThreeTwo | Self::ThreeThree => 3,
            Self::FourOne | Self::FourTwo => 4,
        }
    }
}

/// Replaces the cells `site` by the other side of the bistellar move and
/// returns the new complex together with the ids of the inserted cells.
///
/// The site cells are `V \ {b}` for `b` in a set `B` of labels of `V`;
/// they become the cells `V \ {a}` for `a ∈ V \ B`. A 1→4 move takes the
/// label of the new vertex.
pub fn pachner_move(
    t: &Triangulation,
    mv: PachnerMove,
    site: &[CellId],
    new_vertex: Option<Vertex>,
) -> Result<(Triangulation, Vec<CellId>)> {
    let bad = |m: String| Error::MoveSite(m);
    let d = t.dimension();
    if mv.dimension() != d {
        return Err(bad(format!("{mv:?} needs a {}-dimensional complex", mv.dimension())));
    }
    if site.len() != mv.lhs_cells() {
        return Err(bad(format!("{mv:?} needs {} cells", mv.lhs_cells())));
    }
    let idx: Vec<usize> = site.iter().map(|&id| t.index_of(id)).collect::<Result<_>>()?;
    if idx.iter().collect::<BTreeSet<_>>().len() != idx.len() {
        return Err(bad("repeated cell in site".into()));
    }
    let mut all: BTreeSet<Vertex> = BTreeSet::new();
    for &k in &idx {
        all.extend(&t.cell(k).vertices);
    }
    match (mv, new_vertex) {
        (PachnerMove::OneFour, Some(v)) => {
            if t.vertex_labels().contains(&v) {
                return Err(bad(format!("vertex {v} already exists")));
            }
            all.insert(v);
        }
        (PachnerMove::OneFour, None) => return Err(bad("1-4 needs a new vertex".into())),
        (_, Some(_)) => return Err(bad("only 1-4 introduces a vertex".into())),
        _ => {}
    }
    if all.len() != d + 2 {
        return Err(bad(format!("site spans {} labels, expected {}", all.len(), d + 2)));
    }
    // b(cell) = the label of V missing from it
    let missing: Vec<Vertex> = idx
        .iter()
        .map(|&k| *all.iter().find(|v| t.cell(k).position(**v).is_none()).unwrap())
        .collect();
    if missing.iter().collect::<BTreeSet<_>>().len() != missing.len() {
        return Err(bad("two site cells carry the same labels".into()));
    }
    for (x, &kx) in idx.iter().enumerate() {
        for (y, &ky) in idx.iter().enumerate() {
            if x == y {
                continue;
            }
            let slot = t.cell(kx).position(missing[y]).unwrap();
            let want = (ky, t.cell(ky).position(missing[x]).unwrap());
            if t.partner(kx, slot) != Some(want) {
                return Err(bad(format!(
                    "cells {} and {} are not glued along their common facet",
                    site[x], site[y]
                )));
            }
        }
    }
    if mv == PachnerMove::FourOne {
        let centre = all.iter().find(|v| !missing.contains(v)).unwrap();
        let c = t.classification();
        let k0 = idx[0];
        let vc = t.class_of_labels(k0, &[*centre]).unwrap();
        if c.simplices[0][vc].boundary || c.simplices[0][vc].members.len() != 4 {
            return Err(bad(format!("vertex {centre} is not an inner vertex of valence 4")));
        }
    }
    let a_set: Vec<Vertex> = all.iter().copied().filter(|v| !missing.contains(v)).collect();
    let next_id = t.cells().iter().map(|c| c.id).max().map_or(0, |m| m + 1);
    let new_cells: Vec<Cell> = a_set
        .iter()
        .enumerate()
        .map(|(k, a)| Cell {
            id: next_id + k as CellId,
            vertices: all.iter().copied().filter(|v| v != a).collect(),
            epsilon: 1,
        })
        .collect();
    let slot_of = |c: &Cell, v: Vertex| c.position(v).unwrap();

    // old site slot -> new slot replacing it on the external facet V \ {a, b}
    let mut moved: HashMap<SlotRef, (usize, usize)> = HashMap::new();
    for (x, &kx) in idx.iter().enumerate() {
        for (y, a) in a_set.iter().enumerate() {
            let old_slot = slot_of(t.cell(kx), *a);
            let new_slot = slot_of(&new_cells[y], missing[x]);
            moved.insert((kx, old_slot), (y, new_slot));
        }
    }
    let mut eps: Vec<Option<i8>> = vec![None; new_cells.len()];
    for (&(kx, so), &(y, sn)) in &moved {
        let e = t.cell(kx).epsilon * slot_sign(so) * slot_sign(sn);
        match eps[y] {
            None => eps[y] = Some(e),
            Some(f) if f != e => {
                return Err(Error::Orientation(format!(
                    "site cells induce conflicting orientations on new cell {}",
                    new_cells[y].id
                )))
            }
            Some(_) => {}
        }
    }
    let new_cells: Vec<Cell> = new_cells
        .into_iter()
        .zip(eps)
        .map(|(mut c, e)| {
            c.epsilon = e.unwrap();
            c
        })
        .collect();

    let site_set: BTreeSet<usize> = idx.iter().copied().collect();
    let mut cells: Vec<Cell> = t
        .cells()
        .iter()
        .enumerate()
        .filter(|(k, _)| !site_set.contains(k))
        .map(|(_, c)| c.clone())
        .collect();
    cells.extend(new_cells.iter().cloned());

    let resolve = |r: SlotRef| -> (CellId, usize) {
        match moved.get(&r) {
            Some(&(y, s)) => (new_cells[y].id, s),
            None => (t.cell(r.0).id, r.1),
        }
    };
    let mut gluings = Vec::new();
    for (k, c) in t.cells().iter().enumerate() {
        for s in 0..=d {
            let Some(p) = t.partner(k, s) else { continue };
            if (k, s) > p {
                continue;
            }
            let internal = site_set.contains(&k) && !moved.contains_key(&(k, s));
            if internal {
                continue;
            }
            let _ = c;
            gluings.push((resolve((k, s)), resolve(p)));
        }
    }
    for (y, a) in a_set.iter().enumerate() {
        for (z, a2) in a_set.iter().enumerate().skip(y + 1) {
            gluings.push((
                (new_cells[y].id, slot_of(&new_cells[y], *a2)),
                (new_cells[z].id, slot_of(&new_cells[z], *a)),
            ));
        }
    }
    let out = Triangulation::new(d, cells, &gluings)?;
    Ok((out, new_cells.iter().map(|c| c.id).collect()))
}

/// Cell id of the `j`-th tetrahedron of wedge `k` in [`build_lens`].
pub fn lens_cell_id(k: usize, j: usize) -> CellId {
    (4 * k + j) as CellId
}

/// Closed triangulation of the lens space `L(p, q)` with `4p` tetrahedra.
///
/// The bipyramid over a `p`-gon with apexes N, S is split into `p` wedges
/// through the centre O; wedge `k` spans equator vertices `x_k`, `x_{k+1}`
/// and is cut at the edge midpoint `M_k` into the four tetrahedra
/// `N O x_k M_k`, `N O M_k x_{k+1}`, `S O x_k M_k`, `S O M_k x_{k+1}`. Each
/// upper face is glued to the lower face obtained by turning through
/// `2πq/p`. Labels: N and S are 1, O is 2, every `x` is 3, every `M` is 4.
pub fn build_lens(p: usize, q: usize) -> Result<Triangulation> {
    if p < 2 || q == 0 || q >= p || p.gcd(&q) != 1 {
        return Err(Error::LensParameters(format!(
            "need p >= 2, 0 < q < p and gcd(p, q) = 1, got p = {p}, q = {q}"
        )));
    }
    #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
    enum G {
        N,
        S,
        O,
        X(usize),
        M(usize),
    }
    let label = |g: G| -> Vertex {
        match g {
            G::N | G::S => 1,
            G::O => 2,
            G::X(_) => 3,
            G::M(_) => 4,
        }
    };
    let mut tets: Vec<Vec<G>> = Vec::with_capacity(4 * p);
    for k in 0..p {
        let (x0, x1, m) = (G::X(k), G::X((k + 1) % p), G::M(k));
        for apex in [G::N, G::S] {
            tets.push(vec![apex, G::O, x0, m]);
            tets.push(vec![apex, G::O, m, x1]);
        }
    }
    // order within wedge: N-x_k, N-x_{k+1}, S-x_k, S-x_{k+1}
    let tets: Vec<Vec<G>> = tets
        .chunks(4)
        .flat_map(|w| [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()])
        .map(|mut t| {
            t.sort_by_key(|&g| label(g));
            t
        })
        .collect();
    let cells: Vec<Cell> = tets
        .iter()
        .enumerate()
        .map(|(k, t)| Cell {
            id: k as CellId,
            vertices: t.iter().map(|&g| label(g)).collect(),
            epsilon: 1,
        })
        .collect();
    let mut faces: HashMap<BTreeSet<G>, Vec<(CellId, usize)>> = HashMap::new();
    for (k, t) in tets.iter().enumerate() {
        for s in 0..4 {
            let f: BTreeSet<G> = t.iter().enumerate().filter(|(i, _)| *i != s).map(|(_, g)| *g).collect();
            faces.entry(f).or_default().push((k as CellId, s));
        }
    }
    let turn = |g: G| match g {
        G::N => G::S,
        G::X(j) => G::X((j + q) % p),
        G::M(j) => G::M((j + q) % p),
        other => other,
    };
    let mut gluings = Vec::new();
    let mut keys: Vec<&BTreeSet<G>> = faces.keys().collect();
    keys.sort();
    for f in keys {
        let occ = &faces[f];
        if occ.len() == 2 {
            gluings.push((occ[0], occ[1]));
        } else if f.contains(&G::N) {
            let image: BTreeSet<G> = f.iter().map(|&g| turn(g)).collect();
            let other = faces.get(&image).filter(|o| o.len() == 1).ok_or_else(|| {
                invalid(format!("upper face {f:?} has no matching lower face"))
            })?;
            gluings.push((occ[0], other[0]));
        }
    }
    Triangulation::new(3, cells, &gluings)?.oriented()
}

/// Removes the chain of two tetrahedra at wedges `0` and `n mod p` from a
/// lens triangulation; the edges 12 and 34 they share become doubled in
/// the result, whose boundary is a torus of 8 triangles.
pub fn excise_chain_and_double(t: &Triangulation, p: usize, n: usize) -> Result<Triangulation> {
    if n % p == 0 {
        return Err(Error::LensParameters(format!("n = {n} is divisible by p = {p}")));
    }
    let ids = [lens_cell_id(0, 1), lens_cell_id(n % p, 1)];
    let ka = t.index_of(ids[0])?;
    let kb = t.index_of(ids[1])?;
    for e in [[1, 2], [3, 4]] {
        let ca = t.class_of_labels(ka, &e);
        let cb = t.class_of_labels(kb, &e);
        if ca.is_none() || ca != cb {
            return Err(Error::MoveSite(format!(
                "cells {} and {} do not share edge {e:?}",
                ids[0], ids[1]
            )));
        }
    }
    t.remove_cells(&ids)
}
