//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shape_router::mesh::Point3;
use shape_router::rng::XorShift64Star;
use shape_router::{
    apply_grouping, parse_cla, DescriptorMap, GroupedClasses, Grouping, Mesh, ModelId, ShapeDescriptor,
};

pub const TAG: &str = "test/v1";

/// Class name and subclass sizes of the seven-class benchmark configuration.
pub const PSB7: [(&str, &[(&str, usize)]); 7] = [
    (
        "Airplanes",
        &[
            ("biplane", 14),
            ("commercial", 11),
            ("fighter_jet", 50),
            ("glider_airplane", 18),
            ("stealth_bomber", 5),
        ],
    ),
    ("Humans", &[("human", 50), ("human_arms_out", 20), ("walking", 8)]),
    ("Quadruped", &[("dog", 7), ("horse", 6)]),
    ("Blades", &[("axe", 4), ("knife", 7), ("sword", 15)]),
    ("Chairs", &[("dining_chair", 11), ("desk_chair", 15)]),
    (
        "Plants & trees",
        &[
            ("bush", 9),
            ("flowers", 4),
            ("potted_plant", 26),
            ("barren_tree", 11),
            ("conical_tree", 10),
        ],
    ),
    ("Cars", &[("race_car", 14), ("sedan", 10)]),
];

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn mini_dir() -> PathBuf {
    repo_root().join("data/mini")
}

/// `.cla` text for `layout`, numbering models consecutively from 0 in
/// layout order.
pub fn cla_text(layout: &[(&str, &[(&str, usize)])]) -> String {
    let subs: Vec<(&str, usize)> = layout.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let total: usize = subs.iter().map(|s| s.1).sum();
    let mut out = format!("PSB 1\n{} {}\n", subs.len(), total);
    let mut next = 0;
    for (name, n) in subs {
        let _ = writeln!(out, "\n{name} 0 {n}");
        for _ in 0..n {
            let _ = writeln!(out, "{next}");
            next += 1;
        }
    }
    out
}

pub fn grouping_text(layout: &[(&str, &[(&str, usize)])]) -> String {
    let mut out = String::new();
    for (class, subs) in layout {
        let _ = writeln!(out, "class {class}");
        for (s, _) in subs.iter() {
            let _ = writeln!(out, "    {s}");
        }
    }
    out
}

pub fn grouped(layout: &[(&str, &[(&str, usize)])]) -> GroupedClasses {
    let tree = parse_cla(&cla_text(layout)).unwrap();
    apply_grouping(&tree, &Grouping::parse(&grouping_text(layout)).unwrap()).unwrap()
}

pub fn random_descriptor(rng: &mut XorShift64Star, bins: usize) -> ShapeDescriptor {
    let w: Vec<f64> = (0..bins).map(|_| rng.next_f64()).collect();
    ShapeDescriptor::from_weights(&w, TAG).unwrap()
}

/// Random descriptors drawn from a handful of levels so ties occur.
pub fn coarse_descriptor(rng: &mut XorShift64Star, bins: usize) -> ShapeDescriptor {
    let w: Vec<f64> = (0..bins).map(|_| (rng.next_u64() % 3) as f64 + 1.0).collect();
    ShapeDescriptor::from_weights(&w, TAG).unwrap()
}

/// Clustered descriptors for `grouped`: every subclass gets its own centre
/// with 90% of the mass in a distinct bin, and members move at most
/// `jitter` of mass away from it.
pub fn clustered(grouped: &GroupedClasses, bins: usize, jitter: f64, seed: u64) -> DescriptorMap {
    let mut rng = XorShift64Star::new(seed);
    let mut out = DescriptorMap::new();
    let subs: Vec<_> = grouped.classes.iter().flat_map(|c| c.subclasses.iter()).collect();
    assert!(subs.len() <= bins);
    for (j, s) in subs.iter().enumerate() {
        let mut centre = vec![0.1 / bins as f64; bins];
        centre[j] += 0.9;
        for id in &s.members {
            let mut v = centre.clone();
            let amount = jitter * rng.next_f64();
            let from = j;
            let to = (rng.next_u64() % bins as u64) as usize;
            v[from] -= amount;
            v[to] += amount;
            out.insert(id.clone(), ShapeDescriptor::from_weights(&v, TAG).unwrap());
        }
    }
    out
}

/// Largest distance between two members of one subclass and smallest
/// distance between members of different subclasses.
pub fn spread_and_separation(grouped: &GroupedClasses, d: &DescriptorMap) -> (f64, f64) {
    let mut owner: BTreeMap<&ModelId, &str> = BTreeMap::new();
    for s in grouped.classes.iter().flat_map(|c| c.subclasses.iter()) {
        for m in &s.members {
            owner.insert(m, &s.name);
        }
    }
    let ids: Vec<&ModelId> = owner.keys().copied().collect();
    let (mut intra, mut inter) = (0.0f64, f64::INFINITY);
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let dist = l1(d[*a].bins(), d[*b].bins());
            if owner[a] == owner[b] {
                intra = intra.max(dist);
            } else {
                inter = inter.min(dist);
            }
        }
    }
    (intra, inter)
}

/// Independent L1 distance.
pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn box_mesh(dx: f64, dy: f64, dz: f64) -> Mesh {
    let mut v = Vec::new();
    for i in 0..8 {
        v.push([
            if i & 1 == 0 { 0.0 } else { dx },
            if i & 2 == 0 { 0.0 } else { dy },
            if i & 4 == 0 { 0.0 } else { dz },
        ]);
    }
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let t = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Mesh::new(v, t, "box").unwrap()
}

/// Unit-radius icosphere after `level` midpoint subdivisions.
pub fn icosphere(level: usize) -> Mesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Point3> = vec![
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let mut t: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid = BTreeMap::new();
        let mut next = Vec::with_capacity(t.len() * 4);
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push([
                    (v[a][0] + v[b][0]) / 2.0,
                    (v[a][1] + v[b][1]) / 2.0,
                    (v[a][2] + v[b][2]) / 2.0,
                ]);
                v.len() - 1
            })
        };
        for [a, b, c] in t {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        t = next;
    }
    for p in &mut v {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        *p = [p[0] / r, p[1] / r, p[2] / r];
    }
    Mesh::new(v, t, "sphere").unwrap()
}

/// Rotation about the unit `axis` by `angle` radians (Rodrigues).
pub fn rotation(axis: Point3, angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let k = 1.0 - c;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}

pub fn rigid(mesh: &Mesh, r: [[f64; 3]; 3], t: Point3) -> Mesh {
    mesh.map_vertices(|p| {
        let mut q = t;
        for (i, row) in r.iter().enumerate() {
            q[i] += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
        }
        q
    })
}

pub fn write_layout(dir: &Path, layout: &[(&str, &[(&str, usize)])]) -> (PathBuf, PathBuf) {
    let cla = dir.join("layout.cla");
    let grouping = dir.join("layout.grouping");
    std::fs::write(&cla, cla_text(layout)).unwrap();
    std::fs::write(&grouping, grouping_text(layout)).unwrap();
    (cla, grouping)
}

/// One box per model with a subclass-specific aspect ratio, posed by a
/// per-model rotation, translation and scale.
pub fn write_box_corpus(dir: &Path, layout: &[(&str, &[(&str, usize)])]) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = XorShift64Star::new(11);
    let mut id = 0;
    let mut sub = 0;
    for (_, subs) in layout {
        for (_, n) in subs.iter() {
            let (a, b) = (1.0 + 0.35 * sub as f64, 1.0 + 0.15 * (sub % 5) as f64);
            for _ in 0..*n {
                let base = box_mesh(1.0, a, b);
                let axis = [rng.next_f64() - 0.5, rng.next_f64() - 0.5, rng.next_f64() + 0.1];
                let s = 0.5 + 2.0 * rng.next_f64();
                let posed = rigid(&base, rotation(axis, 6.0 * rng.next_f64()), [rng.next_f64(), 3.0, -1.0])
                    .map_vertices(|p| [p[0] * s, p[1] * s, p[2] * s]);
                std::fs::write(dir.join(format!("m{id}.off")), posed.to_off()).unwrap();
                id += 1;
            }
            sub += 1;
        }
    }
}

pub fn ids(n: usize) -> Vec<ModelId> {
    (0..n as u64).map(ModelId::from_psb).collect()
}

/// Random layout with `classes` classes of 1..=`max_subs` subclasses of
/// 1..=`max_members` members, plus random descriptors for every member.
pub fn random_database(
    rng: &mut XorShift64Star,
    classes: usize,
    max_subs: usize,
    max_members: usize,
    bins: usize,
) -> (GroupedClasses, DescriptorMap) {
    use shape_router::taxonomy::{GeneralClass, Subclass};
    let mut next = 0u64;
    let mut descriptors = DescriptorMap::new();
    let mut out = GroupedClasses::default();
    for c in 0..classes {
        let subs = 1 + (rng.next_u64() % max_subs as u64) as usize;
        let mut subclasses = Vec::new();
        for s in 0..subs {
            let n = 1 + (rng.next_u64() % max_members as u64) as usize;
            let members: Vec<ModelId> = (0..n)
                .map(|_| {
                    let id = ModelId::from_psb(next);
                    next += 1;
                    descriptors.insert(id.clone(), coarse_descriptor(rng, bins));
                    id
                })
                .collect();
            subclasses.push(Subclass {
                name: format!("c{c}s{s}"),
                parent: "0".into(),
                members,
            });
        }
        out.classes.push(GeneralClass {
            name: format!("class{c}"),
            subclasses,
        });
    }
    (out, descriptors)
}
