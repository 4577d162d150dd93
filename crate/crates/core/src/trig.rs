//! Ideal triangulation model: parsing, validation, and derived combinatorics.
//!
//! A triangulation file lists tetrahedra and face gluings. Parsing derives
//! everything else: edge classes (walks around edges), cusp classes (vertex
//! orbits) with their link surfaces, a dual spanning tree with face-pairing
//! generators, edge relators, per-vertex developing words, and peripheral
//! loops on each cusp link together with their shape-exponent rows.
//!
//! Conventions fixed across the crate:
//! - a gluing permutation `perm` sends vertex v of the source tetrahedron to
//!   vertex `perm[v]` of the target, and face f to face `perm[f]`;
//! - edge pairs {01,23} carry z, {02,13} carry z', {03,12} carry z'';
//! - oriented triangulations use odd vertex permutations throughout.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Error)]
pub enum TrigError {
    #[error("MalformedInput: {0}")]
    MalformedInput(String),
    #[error("NonInvolutiveGluing: tet {tet} face {face} glued twice inconsistently")]
    NonInvolutiveGluing { tet: usize, face: usize },
    #[error("UngluedFace: tet {tet} face {face}")]
    UngluedFace { tet: usize, face: usize },
    #[error(
        "NonTorusLink: vertex link of cusp {cusp} is not a torus (euler characteristic {chi})"
    )]
    NonTorusLink { cusp: usize, chi: i64 },
    #[error("EdgeCountMismatch: {edges} edge classes for {tets} tetrahedra")]
    EdgeCountMismatch { edges: usize, tets: usize },
    #[error("CuspCountMismatch: declared {declared}, derived {derived}")]
    CuspCountMismatch { declared: usize, derived: usize },
    #[error("MissingPeripheralRows: cusp {0} has no meridian/longitude rows")]
    MissingPeripheralRows(usize),
    #[error("NonCoprimeFilling: slope ({p},{q}) for cusp {cusp} is not coprime")]
    NonCoprimeFilling { cusp: usize, p: i64, q: i64 },
    #[error("InconsistentPeripheralRows: rows for cusp {0} do not match any curve on its link")]
    InconsistentPeripheralRows(usize),
}

// ---------------------------------------------------------------------------
// file format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GluingRecord {
    pub tet: usize,
    pub face: usize,
    pub to_tet: usize,
    pub to_face: usize,
    pub perm: [usize; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveData {
    pub rows: Vec<[i64; 3]>,
    pub pi_offset: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeripheralData {
    pub meridian: CurveData,
    pub longitude: CurveData,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigFile {
    pub tet_count: usize,
    pub cusp_count: usize,
    pub gluings: Vec<GluingRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_cusp: Option<Vec<[usize; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peripheral: Option<Vec<Option<PeripheralData>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filling: Option<Vec<Option<[i64; 2]>>>,
}

// ---------------------------------------------------------------------------
// permutations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Permutation(pub [usize; 4]);

impl Permutation {
    pub fn try_new(p: [usize; 4]) -> Option<Permutation> {
        let mut seen = [false; 4];
        for &v in &p {
            if v > 3 || seen[v] {
                return None;
            }
            seen[v] = true;
        }
        Some(Permutation(p))
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn inverse(&self) -> Permutation {
        let mut q = [0; 4];
        for (i, &v) in self.0.iter().enumerate() {
            q[v] = i;
        }
        Permutation(q)
    }

    pub fn is_odd(&self) -> bool {
        let p = &self.0;
        let mut inv = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        inv % 2 == 1
    }
}

/// Slot index of an edge pair: {01,23} -> 0 (z), {02,13} -> 1 (z'),
/// {03,12} -> 2 (z'').
pub fn edge_slot(u: usize, v: usize) -> usize {
    debug_assert!(u != v);
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    match (a, b) {
        (0, 1) | (2, 3) => 0,
        (0, 2) | (1, 3) => 1,
        _ => 2,
    }
}

/// Corner labels around vertex v in counterclockwise order: the unique cyclic
/// class (a, b, c) with (v, a, b, c) an even permutation.
fn ccw_corners(v: usize) -> [usize; 3] {
    match v {
        0 => [1, 2, 3],
        1 => [0, 3, 2],
        2 => [0, 1, 3],
        _ => [0, 2, 1],
    }
}

// ---------------------------------------------------------------------------
// derived structures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Gluing {
    pub to_tet: usize,
    pub to_face: usize,
    pub perm: Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIncidence {
    pub tet: usize,
    /// unordered vertex pair, stored ascending
    pub verts: (usize, usize),
    /// face crossed when leaving this wedge in the walk
    pub crossing_face: usize,
}

impl EdgeIncidence {
    pub fn slot(&self) -> usize {
        edge_slot(self.verts.0, self.verts.1)
    }
}

#[derive(Debug, Clone)]
pub struct EdgeClass {
    pub cycle: Vec<EdgeIncidence>,
}

impl EdgeClass {
    pub fn valence(&self) -> usize {
        self.cycle.len()
    }

    /// Exponent triple (z, z', z'') counts per tetrahedron.
    pub fn slot_counts(&self, tet_count: usize) -> Vec<[i64; 3]> {
        let mut rows = vec![[0i64; 3]; tet_count];
        for inc in &self.cycle {
            rows[inc.tet][inc.slot()] += 1;
        }
        rows
    }
}

#[derive(Debug, Clone)]
pub struct CuspClass {
    pub id: usize,
    pub members: Vec<(usize, usize)>,
    pub base: (usize, usize),
}

/// A closed loop on a cusp link: the cyclic list of (tet, vertex, face)
/// crossings, its shape-exponent row, and a group word for it based at the
/// cusp's base incidence.
#[derive(Debug, Clone)]
pub struct LinkLoop {
    pub crossings: Vec<(usize, usize, usize)>,
    pub rows: Vec<[i64; 3]>,
    pub pi_offset: i64,
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct CuspCurves {
    pub meridian: Word,
    pub longitude: Word,
}

#[derive(Debug)]
pub struct Triangulation {
    pub tet_count: usize,
    pub cusp_count: usize,
    gluings: Vec<[Gluing; 4]>,
    pub filling: Vec<Option<(i64, i64)>>,
    pub peripheral_rows: Vec<Option<PeripheralData>>,
    edge_classes: Vec<EdgeClass>,
    cusp_classes: Vec<CuspClass>,
    cusp_of_vertex: Vec<[usize; 4]>,
    tree_face: Vec<[bool; 4]>,
    /// signed generator index at each (tet, face); 0 marks a tree face
    gen_at: Vec<[i32; 4]>,
    pub generator_pairs: Vec<FacePair>,
    relators: Vec<Word>,
    vertex_words: Vec<[Word; 4]>,
    link_loops: Vec<Vec<LinkLoop>>,
    cusp_curves: Vec<CuspCurves>,
}

impl Triangulation {
    pub fn parse(text: &str) -> Result<Triangulation, TrigError> {
        let file: TrigFile =
            serde_json::from_str(text).map_err(|e| TrigError::MalformedInput(e.to_string()))?;
        Triangulation::from_file(&file)
    }

    pub fn from_file(file: &TrigFile) -> Result<Triangulation, TrigError> {
        let n = file.tet_count;
        if n == 0 {
            return Err(TrigError::MalformedInput(
                "tet_count must be positive".into(),
            ));
        }
        if file.cusp_count == 0 {
            return Err(TrigError::MalformedInput(
                "cusp_count must be positive".into(),
            ));
        }

        // assemble the gluing involution; records may list one or both sides
        let mut slots: Vec<[Option<Gluing>; 4]> = vec![[None, None, None, None]; n];
        let mut insert = |tet: usize, face: usize, g: Gluing| -> Result<(), TrigError> {
            match &slots[tet][face] {
                None => {
                    slots[tet][face] = Some(g);
                    Ok(())
                }
                Some(old) => {
                    if old.to_tet == g.to_tet && old.to_face == g.to_face && old.perm == g.perm {
                        Ok(())
                    } else {
                        Err(TrigError::NonInvolutiveGluing { tet, face })
                    }
                }
            }
        };
        for rec in &file.gluings {
            if rec.tet >= n || rec.to_tet >= n || rec.face > 3 || rec.to_face > 3 {
                return Err(TrigError::MalformedInput(format!(
                    "gluing record out of range: tet {} face {} -> tet {} face {}",
                    rec.tet, rec.face, rec.to_tet, rec.to_face
                )));
            }
            let perm = Permutation::try_new(rec.perm).ok_or_else(|| {
                TrigError::MalformedInput(format!(
                    "perm {:?} is not a permutation of 0..3",
                    rec.perm
                ))
            })?;
            if perm.apply(rec.face) != rec.to_face {
                return Err(TrigError::MalformedInput(format!(
                    "perm {:?} does not map face {} to face {}",
                    rec.perm, rec.face, rec.to_face
                )));
            }
            if !perm.is_odd() {
                return Err(TrigError::MalformedInput(format!(
                    "perm {:?} is even; oriented triangulations glue faces by odd permutations",
                    rec.perm
                )));
            }
            if (rec.tet, rec.face) == (rec.to_tet, rec.to_face) {
                return Err(TrigError::NonInvolutiveGluing {
                    tet: rec.tet,
                    face: rec.face,
                });
            }
            insert(
                rec.tet,
                rec.face,
                Gluing {
                    to_tet: rec.to_tet,
                    to_face: rec.to_face,
                    perm,
                },
            )?;
            insert(
                rec.to_tet,
                rec.to_face,
                Gluing {
                    to_tet: rec.tet,
                    to_face: rec.face,
                    perm: perm.inverse(),
                },
            )?;
        }
        let mut gluings = Vec::with_capacity(n);
        for (t, row) in slots.into_iter().enumerate() {
            let mut out: Vec<Gluing> = Vec::with_capacity(4);
            for (f, g) in row.into_iter().enumerate() {
                match g {
                    Some(g) => out.push(g),
                    None => return Err(TrigError::UngluedFace { tet: t, face: f }),
                }
            }
            gluings.push([
                out[0].clone(),
                out[1].clone(),
                out[2].clone(),
                out[3].clone(),
            ]);
        }

        // connectivity of the face-pairing dual graph
        {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(t) = stack.pop() {
                for f in 0..4 {
                    let t2 = gluings[t][f].to_tet;
                    if !seen[t2] {
                        seen[t2] = true;
                        stack.push(t2);
                    }
                }
            }
            if !seen.iter().all(|&s| s) {
                return Err(TrigError::MalformedInput(
                    "triangulation is disconnected".into(),
                ));
            }
        }

        let cusp_classes = derive_cusp_classes(n, &gluings);

        // torus links first: a bad link usually breaks the edge count too,
        // and the link error is the informative one
        for c in &cusp_classes {
            let chi = link_euler_characteristic(&gluings, c);
            if chi != 0 {
                return Err(TrigError::NonTorusLink { cusp: c.id, chi });
            }
        }
        if cusp_classes.len() != file.cusp_count {
            return Err(TrigError::CuspCountMismatch {
                declared: file.cusp_count,
                derived: cusp_classes.len(),
            });
        }

        // optional declared labels must agree with the derived classes
        let mut cusp_of_vertex = vec![[usize::MAX; 4]; n];
        for c in &cusp_classes {
            for &(t, v) in &c.members {
                cusp_of_vertex[t][v] = c.id;
            }
        }
        if let Some(labels) = &file.vertex_cusp {
            if labels.len() != n {
                return Err(TrigError::MalformedInput(
                    "vertex_cusp must have one entry per tetrahedron".into(),
                ));
            }
            let mut class_label = vec![usize::MAX; cusp_classes.len()];
            for c in &cusp_classes {
                for &(t, v) in &c.members {
                    let l = labels[t][v];
                    if l >= file.cusp_count {
                        return Err(TrigError::MalformedInput(format!(
                            "vertex_cusp label {l} out of range"
                        )));
                    }
                    if class_label[c.id] == usize::MAX {
                        class_label[c.id] = l;
                    } else if class_label[c.id] != l {
                        return Err(TrigError::MalformedInput(format!(
                            "vertex_cusp labels split derived cusp class {}",
                            c.id
                        )));
                    }
                }
            }
            let mut used = vec![false; file.cusp_count];
            for &l in &class_label {
                if used[l] {
                    return Err(TrigError::MalformedInput(
                        "vertex_cusp labels identify distinct cusp classes".into(),
                    ));
                }
                used[l] = true;
            }
            // note: classes are re-indexed below only if labels permute them
            if class_label.iter().enumerate().any(|(i, &l)| i != l) {
                return Err(TrigError::MalformedInput(
                    "vertex_cusp labels must match derived cusp order (by lowest incidence)".into(),
                ));
            }
        }

        let edge_classes = derive_edge_classes(n, &gluings);
        if edge_classes.len() != n {
            return Err(TrigError::EdgeCountMismatch {
                edges: edge_classes.len(),
                tets: n,
            });
        }

        let (tree_face, gen_at, generator_pairs) = derive_spanning_tree(n, &gluings);
        let relators = derive_relators(&edge_classes, &gen_at);
        let vertex_words = derive_vertex_words(n, &gluings, &gen_at, &cusp_classes);
        let link_loops: Vec<Vec<LinkLoop>> = cusp_classes
            .iter()
            .map(|c| derive_link_loops(&gluings, c, &gen_at))
            .collect();

        // fillings
        let mut filling = vec![None; cusp_classes.len()];
        if let Some(spec) = &file.filling {
            if spec.len() != cusp_classes.len() {
                return Err(TrigError::MalformedInput(
                    "filling must have one entry per cusp".into(),
                ));
            }
            for (c, entry) in spec.iter().enumerate() {
                if let Some([p, q]) = entry {
                    if gcd(*p, *q) != 1 {
                        return Err(TrigError::NonCoprimeFilling {
                            cusp: c,
                            p: *p,
                            q: *q,
                        });
                    }
                    filling[c] = Some((*p, *q));
                }
            }
        }

        let mut peripheral_rows = vec![None; cusp_classes.len()];
        if let Some(per) = &file.peripheral {
            if per.len() != cusp_classes.len() {
                return Err(TrigError::MalformedInput(
                    "peripheral must have one entry per cusp".into(),
                ));
            }
            for (c, entry) in per.iter().enumerate() {
                if let Some(data) = entry {
                    if data.meridian.rows.len() != n || data.longitude.rows.len() != n {
                        return Err(TrigError::MalformedInput(format!(
                            "peripheral rows for cusp {c} must list one triple per tetrahedron"
                        )));
                    }
                    peripheral_rows[c] = Some(data.clone());
                }
            }
        }

        // peripheral words: match file rows onto link loops when present,
        // otherwise fall back to a derived independent pair
        let mut cusp_curves = Vec::with_capacity(cusp_classes.len());
        for c in 0..cusp_classes.len() {
            let curves = derive_cusp_curves(
                n,
                &edge_classes,
                &link_loops[c],
                peripheral_rows[c].as_ref(),
                c,
            )?;
            cusp_curves.push(curves);
        }

        Ok(Triangulation {
            tet_count: n,
            cusp_count: cusp_classes.len(),
            gluings,
            filling,
            peripheral_rows,
            edge_classes,
            cusp_classes,
            cusp_of_vertex,
            tree_face,
            gen_at,
            generator_pairs,
            relators,
            vertex_words,
            link_loops,
            cusp_curves,
        })
    }

    pub fn gluing(&self, tet: usize, face: usize) -> &Gluing {
        &self.gluings[tet][face]
    }

    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edge_classes
    }

    pub fn cusp_classes(&self) -> &[CuspClass] {
        &self.cusp_classes
    }

    pub fn cusp_of(&self, tet: usize, vertex: usize) -> usize {
        self.cusp_of_vertex[tet][vertex]
    }

    pub fn is_tree_face(&self, tet: usize, face: usize) -> bool {
        self.tree_face[tet][face]
    }

    /// Signed generator index at a face; 0 on tree faces.
    pub fn generator_at(&self, tet: usize, face: usize) -> i32 {
        self.gen_at[tet][face]
    }

    pub fn generator_count(&self) -> usize {
        self.generator_pairs.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn vertex_word(&self, tet: usize, vertex: usize) -> &Word {
        &self.vertex_words[tet][vertex]
    }

    pub fn link_loops(&self, cusp: usize) -> &[LinkLoop] {
        &self.link_loops[cusp]
    }

    /// Peripheral (meridian, longitude) words for a cusp: matched against the
    /// file's exponent rows when those are present, otherwise a derived
    /// independent pair of link curves.
    pub fn cusp_curves(&self, cusp: usize) -> &CuspCurves {
        &self.cusp_curves[cusp]
    }

    /// Edge-consistency exponent rows, one per edge class.
    pub fn edge_rows(&self) -> Vec<Vec<[i64; 3]>> {
        self.edge_classes
            .iter()
            .map(|e| e.slot_counts(self.tet_count))
            .collect()
    }

    /// Canonical file form: one record per face pair, ascending by the
    /// lexicographically smaller side. Parsing the result reproduces the
    /// derived structure byte for byte.
    pub fn to_file(&self) -> TrigFile {
        let mut records = Vec::new();
        for t in 0..self.tet_count {
            for f in 0..4 {
                let g = &self.gluings[t][f];
                if (t, f) <= (g.to_tet, g.to_face) {
                    records.push(GluingRecord {
                        tet: t,
                        face: f,
                        to_tet: g.to_tet,
                        to_face: g.to_face,
                        perm: g.perm.0,
                    });
                }
            }
        }
        let vertex_cusp = Some(self.cusp_of_vertex.clone());
        TrigFile {
            tet_count: self.tet_count,
            cusp_count: self.cusp_count,
            gluings: records,
            vertex_cusp,
            peripheral: Some(self.peripheral_rows.clone()),
            filling: Some(
                self.filling
                    .iter()
                    .map(|f| f.map(|(p, q)| [p, q]))
                    .collect(),
            ),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

// ---------------------------------------------------------------------------
// derivations
// ---------------------------------------------------------------------------

fn derive_cusp_classes(n: usize, gluings: &[[Gluing; 4]]) -> Vec<CuspClass> {
    let mut parent: Vec<usize> = (0..4 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in 0..n {
        for f in 0..4 {
            let g = &gluings[t][f];
            for v in 0..4 {
                if v == f {
                    continue;
                }
                let a = find(&mut parent, 4 * t + v);
                let b = find(&mut parent, 4 * g.to_tet + g.perm.apply(v));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi] = lo;
                }
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for t in 0..n {
        for v in 0..4 {
            let r = find(&mut parent, 4 * t + v);
            classes.entry(r).or_default().push((t, v));
        }
    }
    classes
        .into_values()
        .enumerate()
        .map(|(id, members)| {
            let base = members[0];
            CuspClass { id, members, base }
        })
        .collect()
}

/// Euler characteristic of one cusp's link surface. Triangles are the (tet,
/// vertex) incidences; sides and corners are glued across faces.
fn link_euler_characteristic(gluings: &[[Gluing; 4]], cusp: &CuspClass) -> i64 {
    let faces = cusp.members.len() as i64;

    // sides: (t, v, f) with f != v
    let mut sides: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for &(t, v) in &cusp.members {
        for f in 0..4 {
            if f != v {
                let id = sides.len();
                sides.insert((t, v, f), id);
            }
        }
    }
    let mut parent: Vec<usize> = (0..sides.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (&(t, v, f), &id) in &sides {
        let g = &gluings[t][f];
        let other = sides[&(g.to_tet, g.perm.apply(v), g.to_face)];
        let a = find(&mut parent, id);
        let b = find(&mut parent, other);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
        }
    }
    let side_ids: Vec<usize> = (0..sides.len()).collect();
    let edge_count = side_ids
        .iter()
        .map(|&i| find(&mut parent, i))
        .collect::<std::collections::BTreeSet<_>>()
        .len() as i64;

    // corners: (t, v, w) with w != v, glued across the two faces containing
    // the edge {v, w}
    let mut corners: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for &(t, v) in &cusp.members {
        for w in 0..4 {
            if w != v {
                let id = corners.len();
                corners.insert((t, v, w), id);
            }
        }
    }
    let mut cparent: Vec<usize> = (0..corners.len()).collect();
    for (&(t, v, w), &id) in &corners {
        for f in 0..4 {
            if f == v || f == w {
                continue;
            }
            let g = &gluings[t][f];
            let other = corners[&(g.to_tet, g.perm.apply(v), g.perm.apply(w))];
            let a = find(&mut cparent, id);
            let b = find(&mut cparent, other);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                cparent[hi] = lo;
            }
        }
    }
    let corner_ids: Vec<usize> = (0..corners.len()).collect();
    let vertex_count = corner_ids
        .iter()
        .map(|&i| find(&mut cparent, i))
        .collect::<std::collections::BTreeSet<_>>()
        .len() as i64;

    vertex_count - edge_count + faces
}

/// Walks around every edge. Each wedge (tet, edge pair) appears in exactly
/// one class cycle; the walk crosses one of the two faces containing the
/// edge, lands on the glued wedge, and continues through its other face.
fn derive_edge_classes(n: usize, gluings: &[[Gluing; 4]]) -> Vec<EdgeClass> {
    let pairs: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut assigned = vec![[false; 6]; n];
    let pair_index = |u: usize, v: usize| -> usize {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    let mut classes = Vec::new();
    for t0 in 0..n {
        for (pi0, &(u0, v0)) in pairs.iter().enumerate() {
            if assigned[t0][pi0] {
                continue;
            }
            // deterministic start: cross the smaller of the two free faces
            let f0 = (0..4).find(|&f| f != u0 && f != v0).unwrap();
            let mut cycle = Vec::new();
            let (mut t, mut u, mut v, mut f) = (t0, u0, v0, f0);
            loop {
                assigned[t][pair_index(u, v)] = true;
                cycle.push(EdgeIncidence {
                    tet: t,
                    verts: if u < v { (u, v) } else { (v, u) },
                    crossing_face: f,
                });
                let g = &gluings[t][f];
                let (t2, u2, v2) = (g.to_tet, g.perm.apply(u), g.perm.apply(v));
                let entered = g.to_face;
                let f2 = (0..4)
                    .find(|&x| x != u2 && x != v2 && x != entered)
                    .unwrap();
                t = t2;
                u = u2;
                v = v2;
                f = f2;
                if t == t0 && pair_index(u, v) == pi0 && f == f0 {
                    break;
                }
            }
            classes.push(EdgeClass { cycle });
        }
    }
    classes
}

/// Breadth-first dual spanning tree from tetrahedron 0, ties broken by the
/// smallest (tet, face). Non-tree face pairs get 1-based generator indices in
/// canonical pair order; the positive direction crosses from the
/// lexicographically smaller side.
type FacePair = ((usize, usize), (usize, usize));

fn derive_spanning_tree(
    n: usize,
    gluings: &[[Gluing; 4]],
) -> (Vec<[bool; 4]>, Vec<[i32; 4]>, Vec<FacePair>) {
    let mut tree_face = vec![[false; 4]; n];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        for f in 0..4 {
            let g = &gluings[t][f];
            if !visited[g.to_tet] {
                visited[g.to_tet] = true;
                tree_face[t][f] = true;
                tree_face[g.to_tet][g.to_face] = true;
                queue.push_back(g.to_tet);
            }
        }
    }
    let mut pairs = Vec::new();
    for t in 0..n {
        for f in 0..4 {
            if tree_face[t][f] {
                continue;
            }
            let g = &gluings[t][f];
            if (t, f) < (g.to_tet, g.to_face) {
                pairs.push(((t, f), (g.to_tet, g.to_face)));
            }
        }
    }
    pairs.sort();
    let mut gen_at = vec![[0i32; 4]; n];
    for (i, &((t1, f1), (t2, f2))) in pairs.iter().enumerate() {
        gen_at[t1][f1] = (i + 1) as i32;
        gen_at[t2][f2] = -((i + 1) as i32);
    }
    (tree_face, gen_at, pairs)
}

/// One relator per edge class: the crossing generators in walk order.
fn derive_relators(edge_classes: &[EdgeClass], gen_at: &[[i32; 4]]) -> Vec<Word> {
    edge_classes
        .iter()
        .map(|e| {
            let mut w = Word::empty();
            for inc in &e.cycle {
                w.push(gen_at[inc.tet][inc.crossing_face]);
            }
            w
        })
        .collect()
}

/// Word per (tet, vertex): crossing face f from incidence (t, v) reaches
/// (t2, perm v) with word gen(t, f)^{-1} * word(t, v). Applying the word's
/// image to the cusp's base ideal point reproduces the vertex's developed
/// position, for every representation satisfying the edge equations.
fn derive_vertex_words(
    n: usize,
    gluings: &[[Gluing; 4]],
    gen_at: &[[i32; 4]],
    cusps: &[CuspClass],
) -> Vec<[Word; 4]> {
    let mut words: Vec<[Word; 4]> = vec![std::array::from_fn(|_| Word::empty()); n];
    for cusp in cusps {
        let mut seen = vec![false; cusp.members.len()];
        let index: BTreeMap<(usize, usize), usize> = cusp
            .members
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let mut queue = std::collections::VecDeque::from([cusp.base]);
        seen[index[&cusp.base]] = true;
        while let Some((t, v)) = queue.pop_front() {
            for f in 0..4 {
                if f == v {
                    continue;
                }
                let g = &gluings[t][f];
                let nxt = (g.to_tet, g.perm.apply(v));
                let ni = index[&nxt];
                if seen[ni] {
                    continue;
                }
                seen[ni] = true;
                let mut w = Word::empty();
                w.push(-gen_at[t][f]);
                words[nxt.0][nxt.1] = w.concat(&words[t][v]);
                queue.push_back(nxt);
            }
        }
    }
    words
}

// ---------------------------------------------------------------------------
// link loops and their exponent rows
// ---------------------------------------------------------------------------

fn link_cross(gluings: &[[Gluing; 4]], t: usize, v: usize, f: usize) -> (usize, usize, usize) {
    let g = &gluings[t][f];
    (g.to_tet, g.perm.apply(v), g.to_face)
}

/// Loop generators of the cusp link: spanning tree over the link triangles,
/// one based loop per non-tree side.
type LinkParent = BTreeMap<(usize, usize), Option<((usize, usize), usize)>>;

fn derive_link_loops(
    gluings: &[[Gluing; 4]],
    cusp: &CuspClass,
    gen_at: &[[i32; 4]],
) -> Vec<LinkLoop> {
    let n = gluings.len();
    let base = cusp.base;
    let mut parent: LinkParent = BTreeMap::new();
    parent.insert(base, None);
    let mut order = vec![base];
    let mut tree_sides: std::collections::BTreeSet<((usize, usize), usize)> =
        std::collections::BTreeSet::new();
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some((t, v)) = queue.pop_front() {
        for f in 0..4 {
            if f == v {
                continue;
            }
            let (t2, v2, f2) = link_cross(gluings, t, v, f);
            if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry((t2, v2)) {
                slot.insert(Some(((t, v), f)));
                tree_sides.insert(((t, v), f));
                tree_sides.insert(((t2, v2), f2));
                order.push((t2, v2));
                queue.push_back((t2, v2));
            }
        }
    }
    let path_from_base = |node: (usize, usize)| -> Vec<(usize, usize, usize)> {
        let mut rev = Vec::new();
        let mut cur = node;
        while let Some(Some((prev, f))) = parent.get(&cur) {
            rev.push((prev.0, prev.1, *f));
            cur = *prev;
        }
        rev.reverse();
        rev
    };
    let mut loops = Vec::new();
    let mut seen: std::collections::BTreeSet<((usize, usize), usize)> =
        std::collections::BTreeSet::new();
    for &(t, v) in &order {
        for f in 0..4 {
            if f == v || tree_sides.contains(&((t, v), f)) {
                continue;
            }
            let (t2, v2, f2) = link_cross(gluings, t, v, f);
            if seen.contains(&((t, v), f)) {
                continue;
            }
            seen.insert(((t, v), f));
            seen.insert(((t2, v2), f2));
            let mut seq = path_from_base((t, v));
            seq.push((t, v, f));
            // reverse of the path base -> (t2, v2)
            for &(a, b, g) in path_from_base((t2, v2)).iter().rev() {
                seq.push(link_cross(gluings, a, b, g));
            }
            loops.push(build_loop(n, gluings, gen_at, seq));
        }
    }
    loops
}

/// Removes immediate backtracks (including across the cyclic wrap).
fn reduce_crossings(
    gluings: &[[Gluing; 4]],
    mut cur: Vec<(usize, usize, usize)>,
) -> Vec<(usize, usize, usize)> {
    loop {
        let mut changed = false;
        let mut out: Vec<(usize, usize, usize)> = Vec::with_capacity(cur.len());
        let mut i = 0;
        while i < cur.len() {
            if i + 1 < cur.len() {
                let (t, v, f) = cur[i];
                if link_cross(gluings, t, v, f) == cur[i + 1] {
                    i += 2;
                    changed = true;
                    continue;
                }
            }
            out.push(cur[i]);
            i += 1;
        }
        while out.len() >= 2 {
            let (t, v, f) = *out.last().unwrap();
            if link_cross(gluings, t, v, f) == out[0] {
                out.remove(0);
                out.pop();
                changed = true;
            } else {
                break;
            }
        }
        cur = out;
        if !changed {
            return cur;
        }
    }
}

/// Assembles a based loop: word from the raw crossings, exponent row from
/// the reduced cyclic pivot walk.
///
/// In each visited triangle the path turns around the corner shared by the
/// entry and exit sides; the similarity factor is that corner's shape slot,
/// inverted when the pivot sits on the right of the path. Consecutive pivots
/// at opposite endpoints of a shared side flip the developed side vector,
/// and the count of such flips fixes the pi-offset parity.
fn build_loop(
    n: usize,
    gluings: &[[Gluing; 4]],
    gen_at: &[[i32; 4]],
    raw: Vec<(usize, usize, usize)>,
) -> LinkLoop {
    let mut word = Word::empty();
    for &(t, _, f) in &raw {
        word.push(gen_at[t][f]);
    }
    let red = reduce_crossings(gluings, raw.clone());
    let mut rows = vec![[0i64; 3]; n];
    let mut pi_offset = 0i64;
    if !red.is_empty() {
        let k = red.len();
        let mut pivots = Vec::with_capacity(k);
        for i in 0..k {
            let (t, v, f_out) = red[i];
            let (pt, pv, pf) = red[(i + k - 1) % k];
            let (et, ev, f_in) = link_cross(gluings, pt, pv, pf);
            debug_assert_eq!((et, ev), (t, v), "loop not contiguous");
            debug_assert!(f_in != f_out, "backtrack survived reduction");
            let w = 6 - v - f_in - f_out;
            let order = ccw_corners(v);
            let idx = |x: usize| order.iter().position(|&y| y == x).unwrap();
            let (a, b, c) = (idx(w), idx(f_out), idx(f_in));
            let eps: i64 = if (b + 3 - a) % 3 == 1 && (c + 3 - b) % 3 == 1 {
                1
            } else {
                -1
            };
            rows[t][edge_slot(v, w)] += eps;
            pivots.push(w);
        }
        let mut flips = 0i64;
        for i in 0..k {
            let (t, _, f_out) = red[i];
            let g = &gluings[t][f_out];
            if g.perm.apply(pivots[i]) != pivots[(i + 1) % k] {
                flips += 1;
            }
        }
        pi_offset = flips % 2;
    }
    LinkLoop {
        crossings: raw,
        rows,
        pi_offset,
        word,
    }
}

// ---------------------------------------------------------------------------
// matching file rows onto link curves
// ---------------------------------------------------------------------------

/// Flattens per-tet triples into one real vector.
fn flatten(rows: &[[i64; 3]]) -> Vec<f64> {
    rows.iter()
        .flat_map(|r| r.iter().map(|&x| x as f64))
        .collect()
}

/// Picks two loops whose rows are independent modulo the edge rows and the
/// constant per-tet (1,1,1) rows, then expresses the file's meridian and
/// longitude over them. Integer coefficients are recovered by least squares
/// and verified; the words are the corresponding loop-word powers.
fn derive_cusp_curves(
    n: usize,
    edge_classes: &[EdgeClass],
    loops: &[LinkLoop],
    file_rows: Option<&PeripheralData>,
    cusp: usize,
) -> Result<CuspCurves, TrigError> {
    use nalgebra::{DMatrix, DVector};

    let dim = 3 * n;
    // lattice columns: edge rows, per-tet (1,1,1) rows
    let mut lattice: Vec<Vec<f64>> = edge_classes
        .iter()
        .map(|e| flatten(&e.slot_counts(n)))
        .collect();
    for t in 0..n {
        let mut row = vec![[0i64; 3]; n];
        row[t] = [1, 1, 1];
        lattice.push(flatten(&row));
    }

    let rank_of = |cols: &[Vec<f64>]| -> usize {
        if cols.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
        m.svd(false, false)
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-9)
            .count()
    };

    let mut basis: Vec<usize> = Vec::new();
    let mut cols = lattice.clone();
    let mut rank = rank_of(&cols);
    for (i, l) in loops.iter().enumerate() {
        if basis.len() == 2 {
            break;
        }
        let mut trial = cols.clone();
        trial.push(flatten(&l.rows));
        let trial_rank = rank_of(&trial);
        if trial_rank > rank {
            basis.push(i);
            cols = trial;
            rank = trial_rank;
        }
    }
    if basis.len() < 2 {
        return Err(TrigError::InconsistentPeripheralRows(cusp));
    }
    let (b0, b1) = (basis[0], basis[1]);

    let Some(file_rows) = file_rows else {
        // no rows supplied: the derived pair serves as the peripheral basis
        return Ok(CuspCurves {
            meridian: loops[b0].word.clone(),
            longitude: loops[b1].word.clone(),
        });
    };

    // solve file_row = a * L0 + b * L1 + (lattice combination)
    let solve_one = |curve: &CurveData| -> Result<Word, TrigError> {
        let mut columns: Vec<Vec<f64>> = vec![flatten(&loops[b0].rows), flatten(&loops[b1].rows)];
        columns.extend(lattice.iter().cloned());
        let a = DMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
        let rows_fixed: Vec<[i64; 3]> = curve.rows.iter().map(|r| [r[0], r[1], r[2]]).collect();
        let b = DVector::from_vec(flatten(&rows_fixed));
        let svd = a.clone().svd(true, true);
        let x = svd
            .solve(&b, 1e-10)
            .map_err(|_| TrigError::InconsistentPeripheralRows(cusp))?;
        let resid = (&a * &x - &b).norm();
        if resid > 1e-6 {
            return Err(TrigError::InconsistentPeripheralRows(cusp));
        }
        let ca = x[0].round();
        let cb = x[1].round();
        if (x[0] - ca).abs() > 1e-6 || (x[1] - cb).abs() > 1e-6 {
            return Err(TrigError::InconsistentPeripheralRows(cusp));
        }
        // offset parity: loop offsets plus one per (1,1,1) column
        let mut off = ca as i64 * loops[b0].pi_offset + cb as i64 * loops[b1].pi_offset;
        for (j, xv) in x.iter().enumerate().skip(2 + edge_classes.len()) {
            let r = xv.round();
            if (xv - r).abs() > 1e-6 {
                return Err(TrigError::InconsistentPeripheralRows(cusp));
            }
            let _ = j;
            off += r as i64;
        }
        if (off - curve.pi_offset).rem_euclid(2) != 0 {
            return Err(TrigError::InconsistentPeripheralRows(cusp));
        }
        Ok(loops[b0]
            .word
            .pow(ca as i64)
            .concat(&loops[b1].word.pow(cb as i64)))
    };

    Ok(CuspCurves {
        meridian: solve_one(&file_rows.meridian)?,
        longitude: solve_one(&file_rows.longitude)?,
    })
}
