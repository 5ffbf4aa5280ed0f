//! OFF mesh ingestion and area-weighted surface sampling.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, OffError, Result};
use crate::rng::XorShift64Star;

pub type Point3 = [f64; 3];

/// Triangulated surface. Construction validates indices, so every other
/// module can index `vertices` without bounds checks failing.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    source_id: String,
}

impl Mesh {
    pub fn new(
        vertices: Vec<Point3>,
        triangles: Vec<[usize; 3]>,
        source_id: impl Into<String>,
    ) -> Result<Self, OffError> {
        if vertices.is_empty() {
            return Err(OffError::NoVertices);
        }
        if triangles.is_empty() {
            return Err(OffError::NoTriangles);
        }
        for (i, t) in triangles.iter().enumerate() {
            if let Some(&index) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(OffError::IndexOutOfRange {
                    line: i,
                    index,
                    vertex_count: vertices.len(),
                });
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(OffError::RepeatedIndex(i));
            }
        }
        Ok(Mesh {
            vertices,
            triangles,
            source_id: source_id.into(),
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// Applies `f` to every vertex, keeping the connectivity.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().copied().map(f).collect(),
            triangles: self.triangles.clone(),
            source_id: self.source_id.clone(),
        }
    }

    pub fn triangle(&self, i: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Serializes as an OFF document that [`parse_off`] reads back exactly.
    pub fn to_off(&self) -> String {
        let mut out = String::new();
        out.push_str("OFF\n");
        let _ = writeln!(out, "{} {} 0", self.vertices.len(), self.triangles.len());
        for [x, y, z] in &self.vertices {
            let _ = writeln!(out, "{x:?} {y:?} {z:?}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(out, "3 {a} {b} {c}");
        }
        out
    }
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn triangle_area([a, b, c]: [Point3; 3]) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

pub fn surface_area(mesh: &Mesh) -> f64 {
    (0..mesh.triangles.len()).map(|i| triangle_area(mesh.triangle(i))).sum()
}

/// Lines of an OFF document with comments and blank lines removed.
fn logical_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, OffError> {
    tok.parse().map_err(|_| OffError::Syntax {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

/// Parses an OFF document. Polygons are fan-triangulated from their first
/// vertex; fan triangles that repeat a vertex index are dropped.
pub fn parse_off(text: &str) -> Result<Mesh, OffError> {
    parse_off_named(text, "")
}

pub fn parse_off_named(text: &str, source_id: &str) -> Result<Mesh, OffError> {
    let mut lines = logical_lines(text);
    let (_, header) = lines.next().ok_or(OffError::Empty)?;
    let mut header_tokens = header.split_whitespace();
    let magic = header_tokens.next().unwrap_or_default();
    if magic != "OFF" {
        return Err(OffError::BadMagic(magic.to_owned()));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, counts) = if rest.is_empty() {
        let (n, l) = lines
            .next()
            .ok_or_else(|| OffError::CountMismatch("missing count line".into()))?;
        (n, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (1, rest)
    };
    if counts.len() < 2 {
        return Err(OffError::Syntax {
            line: count_line,
            msg: "count line needs vertex and face counts".into(),
        });
    }
    let n_vertices: usize = parse_num(counts[0], count_line, "vertex count")?;
    let n_faces: usize = parse_num(counts[1], count_line, "face count")?;
    if n_vertices == 0 {
        return Err(OffError::NoVertices);
    }

    let mut vertices = Vec::with_capacity(n_vertices);
    for k in 0..n_vertices {
        let (line, l) = lines
            .next()
            .ok_or_else(|| OffError::CountMismatch(format!("declared {n_vertices} vertices, found {k}")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(OffError::Syntax {
                line,
                msg: "vertex needs 3 coordinates".into(),
            });
        }
        let mut p = [0.0; 3];
        for (dst, tok) in p.iter_mut().zip(&toks) {
            *dst = parse_num(tok, line, "coordinate")?;
        }
        vertices.push(p);
    }

    let mut triangles = Vec::with_capacity(n_faces);
    for k in 0..n_faces {
        let (line, l) = lines
            .next()
            .ok_or_else(|| OffError::CountMismatch(format!("declared {n_faces} faces, found {k}")))?;
        let mut toks = l.split_whitespace();
        let count: usize = parse_num(toks.next().unwrap_or_default(), line, "face size")?;
        if count < 3 {
            return Err(OffError::FaceTooSmall { line, count });
        }
        let mut face = Vec::with_capacity(count);
        for _ in 0..count {
            let tok = toks.next().ok_or_else(|| OffError::Syntax {
                line,
                msg: format!("face declares {count} vertices but lists fewer"),
            })?;
            let index: usize = parse_num(tok, line, "vertex index")?;
            if index >= n_vertices {
                return Err(OffError::IndexOutOfRange {
                    line,
                    index,
                    vertex_count: n_vertices,
                });
            }
            face.push(index);
        }
        // trailing tokens on a face line are colors
        for w in face[1..].windows(2) {
            let t = [face[0], w[0], w[1]];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                triangles.push(t);
            }
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(OffError::CountMismatch(format!(
            "unexpected data after {n_faces} faces at line {line}"
        )));
    }
    Mesh::new(vertices, triangles, source_id)
}

/// Reads an OFF file; the model id is the file stem.
pub fn load_off(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = model_id_from_path(path);
    parse_off_named(&text, &id).map_err(|source| Error::Mesh { id, source })
}

pub fn model_id_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Point3>,
    /// Index of the triangle each point was drawn from.
    pub triangles: Vec<usize>,
    pub seed: u64,
}

/// Draws `n` points uniformly over the surface: triangles are picked with
/// probability proportional to area, then a point inside with the
/// square-root barycentric map. Zero-area triangles are never picked.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<SurfaceSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for i in 0..mesh.triangles.len() {
        total += triangle_area(mesh.triangle(i));
        cumulative.push(total);
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let last_positive = cumulative
        .iter()
        .position(|&c| c == total)
        .unwrap_or(cumulative.len() - 1);

    let mut rng = XorShift64Star::new(seed);
    let mut points = Vec::with_capacity(n);
    let mut faces = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.next_f64() * total;
        let face = cumulative.partition_point(|&c| c <= target).min(last_positive);
        let [a, b, c] = mesh.triangle(face);
        let s = rng.next_f64().sqrt();
        let r = rng.next_f64();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - r), s * r);
        points.push([
            a[0] * wa + b[0] * wb + c[0] * wc,
            a[1] * wa + b[1] * wb + c[1] * wc,
            a[2] * wa + b[2] * wb + c[2] * wc,
        ]);
        faces.push(face);
    }
    Ok(SurfaceSample {
        points,
        triangles: faces,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    pub(crate) fn unit_cube() -> Mesh {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let quads = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [1, 2, 6, 5],
            [2, 3, 7, 6],
            [3, 0, 4, 7],
        ];
        let t = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        Mesh::new(v, t, "cube").unwrap()
    }

    #[test]
    fn minimal_document() {
        let m = parse_off(TRI).unwrap();
        assert_eq!(m.vertices().len(), 3);
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn bad_magic() {
        let err = parse_off(&TRI.replace("OFF", "OFX")).unwrap_err();
        assert_eq!(err, OffError::BadMagic("OFX".into()));
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let m = parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn counts_on_header_line_comments_and_blanks() {
        let doc = "# leading comment\nOFF 3 1 0\n\n0 0 0\n# mid\n1 0 0\n0 1 0\n\n3 0 1 2 255 0 0\n";
        let m = parse_off(doc).unwrap();
        assert_eq!(m.triangles().len(), 1);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            parse_off("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"),
            Err(OffError::CountMismatch(_))
        ));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n"),
            Err(OffError::IndexOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n"),
            Err(OffError::FaceTooSmall { count: 2, .. })
        ));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n3 0 1 2\n"),
            Err(OffError::CountMismatch(_))
        ));
        assert!(matches!(
            parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n"),
            Err(OffError::CountMismatch(_))
        ));
        assert_eq!(parse_off("  \n# only comments\n"), Err(OffError::Empty));
        assert_eq!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 0 1\n"),
            Err(OffError::NoTriangles)
        );
    }

    #[test]
    fn areas() {
        assert_eq!(surface_area(&parse_off(TRI).unwrap()), 0.5);
        assert!((surface_area(&unit_cube()) - 6.0).abs() < 1e-12);
        let degenerate = Mesh::new(vec![[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]], vec![[0, 1, 2]], "d").unwrap();
        assert_eq!(surface_area(&degenerate), 0.0);
    }

    #[test]
    fn samples_lie_on_single_triangle() {
        let m = parse_off(TRI).unwrap();
        let s = sample_surface(&m, 1000, 1).unwrap();
        assert_eq!(s.points.len(), 1000);
        for p in &s.points {
            assert_eq!(p[2], 0.0);
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = unit_cube();
        let a = sample_surface(&m, 500, 42).unwrap();
        let b = sample_surface(&m, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, sample_surface(&m, 500, 43).unwrap().points);
    }

    #[test]
    fn degenerate_triangles_never_sampled() {
        let m = Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 3], [0, 1, 2], [1, 3, 0]],
            "d",
        )
        .unwrap();
        let s = sample_surface(&m, 2000, 3).unwrap();
        assert!(s.triangles.iter().all(|&t| t == 1));
    }

    #[test]
    fn sampling_errors() {
        let m = parse_off(TRI).unwrap();
        assert!(matches!(sample_surface(&m, 0, 1), Err(Error::InvalidParameter(_))));
        let flat = Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], vec![[0, 1, 2]], "z").unwrap();
        assert!(matches!(sample_surface(&flat, 10, 1), Err(Error::ZeroArea)));
    }

    #[test]
    fn area_weighted_split_matches_binomial() {
        // triangle 0 has area 1.0, triangle 1 has area 0.5
        let m = Mesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [5.0, 0.0, 0.0],
                [6.0, 0.0, 0.0],
                [5.0, 1.0, 0.0],
            ],
            vec![[0, 1, 2], [3, 4, 5]],
            "two",
        )
        .unwrap();
        let n = 30_000;
        let s = sample_surface(&m, n, 11).unwrap();
        let first = s.triangles.iter().filter(|&&t| t == 0).count() as f64;
        let p = 2.0 / 3.0;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((first - mean).abs() <= 3.0 * sd, "{first} vs {mean} ± {sd}");
    }
}
