//! OBJ and PLY mesh readers, and a binary little-endian PLY writer.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use glam::{Vec3, Vec4};

use super::mesh::TriangleMesh;
use crate::error::{io_err, Error, Location, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    match format {
        MeshFormat::Obj => {
            let text = String::from_utf8_lossy(&bytes);
            parse_obj(&text, path)
        }
        MeshFormat::Ply => parse_ply(&bytes, path),
    }
}

// ---------------------------------------------------------------------------
// OBJ

/// Ambient and diffuse colors are combined as `0.25 * Ka + 0.75 * Kd`;
/// specular is ignored. A material without `Ka` uses its diffuse color.
fn material_color(ka: Option<Vec3>, kd: Option<Vec3>) -> Vec4 {
    let kd = kd.unwrap_or(Vec3::splat(0.5));
    let ka = ka.unwrap_or(kd);
    (ka * 0.25 + kd * 0.75).extend(1.0)
}

fn parse_mtl(text: &str) -> HashMap<String, Vec4> {
    let mut out = HashMap::new();
    let mut current: Option<(String, Option<Vec3>, Option<Vec3>)> = None;
    let parse3 = |toks: &[&str]| -> Option<Vec3> {
        let v: Vec<f32> = toks.iter().take(3).filter_map(|t| t.parse().ok()).collect();
        (v.len() == 3).then(|| Vec3::new(v[0], v[1], v[2]))
    };
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            Some("newmtl") => {
                if let Some((name, ka, kd)) = current.take() {
                    out.insert(name, material_color(ka, kd));
                }
                current = Some((toks[1..].join(" "), None, None));
            }
            Some("Ka") => {
                if let Some(c) = current.as_mut() {
                    c.1 = parse3(&toks[1..]);
                }
            }
            Some("Kd") => {
                if let Some(c) = current.as_mut() {
                    c.2 = parse3(&toks[1..]);
                }
            }
            _ => {}
        }
    }
    if let Some((name, ka, kd)) = current {
        out.insert(name, material_color(ka, kd));
    }
    out
}

pub(crate) fn parse_obj(text: &str, path: &Path) -> Result<TriangleMesh> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut materials: HashMap<String, Vec4> = HashMap::new();
    let mut current_material: Option<Vec4> = None;

    let mut v: Vec<Vec3> = Vec::new();
    let mut v_color: Vec<Option<Vec4>> = Vec::new();
    let mut vn: Vec<Vec3> = Vec::new();

    // Output vertices are unique (position, normal, material color) tuples.
    let mut index_of: HashMap<(u32, u32, [u32; 4]), u32> = HashMap::new();
    let mut positions = Vec::new();
    let mut normals: Vec<Option<Vec3>> = Vec::new();
    let mut colors = Vec::new();
    let mut triangles = Vec::new();

    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        location: Location::Line(line),
        message,
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        let Some(kw) = toks.next() else { continue };
        let rest: Vec<&str> = toks.collect();
        let floats = |n: usize| -> Result<Vec<f32>> {
            if rest.len() < n {
                return Err(perr(lineno, format!("expected {n} numbers after '{kw}'")));
            }
            rest.iter()
                .map(|t| {
                    t.parse::<f32>()
                        .map_err(|_| perr(lineno, format!("invalid number '{t}'")))
                })
                .collect()
        };
        match kw {
            "v" => {
                let f = floats(3)?;
                v.push(Vec3::new(f[0], f[1], f[2]));
                v_color.push((f.len() >= 6).then(|| Vec4::new(f[3], f[4], f[5], 1.0)));
            }
            "vn" => {
                let f = floats(3)?;
                vn.push(Vec3::new(f[0], f[1], f[2]));
            }
            "mtllib" => {
                let file = base.join(rest.join(" "));
                match std::fs::read_to_string(&file) {
                    Ok(mtl) => materials.extend(parse_mtl(&mtl)),
                    Err(e) => log::warn!(
                        "{}: cannot read material library {}: {e}",
                        path.display(),
                        file.display()
                    ),
                }
            }
            "usemtl" => {
                let name = rest.join(" ");
                current_material = materials.get(&name).copied();
                if current_material.is_none() {
                    log::warn!("{}:{lineno}: unknown material '{name}'", path.display());
                }
            }
            "f" => {
                if rest.len() < 3 {
                    return Err(perr(lineno, "face with fewer than 3 vertices".into()));
                }
                let mut poly = Vec::with_capacity(rest.len());
                for tok in &rest {
                    let mut parts = tok.split('/');
                    let resolve = |s: Option<&str>, count: usize| -> Result<Option<u32>> {
                        let Some(s) = s.filter(|s| !s.is_empty()) else {
                            return Ok(None);
                        };
                        let i: i64 = s
                            .parse()
                            .map_err(|_| perr(lineno, format!("invalid index '{s}'")))?;
                        let abs = if i < 0 { count as i64 + i } else { i - 1 };
                        if i == 0 || abs < 0 || abs >= count as i64 {
                            return Err(Error::IndexOutOfRange {
                                path: path.to_path_buf(),
                                location: Location::Line(lineno),
                                index: i,
                                count,
                            });
                        }
                        Ok(Some(abs as u32))
                    };
                    let vi = resolve(parts.next(), v.len())?
                        .ok_or_else(|| perr(lineno, format!("missing vertex index in '{tok}'")))?;
                    let _vt = parts.next();
                    let ni = resolve(parts.next(), vn.len())?;
                    let color = current_material
                        .or(v_color[vi as usize])
                        .unwrap_or(super::mesh::DEFAULT_COLOR);
                    let key = (
                        vi,
                        ni.map_or(u32::MAX, |n| n),
                        color.to_array().map(f32::to_bits),
                    );
                    let idx = *index_of.entry(key).or_insert_with(|| {
                        positions.push(v[vi as usize]);
                        normals.push(ni.map(|n| vn[n as usize]));
                        colors.push(color);
                        (positions.len() - 1) as u32
                    });
                    poly.push(idx);
                }
                for k in 1..poly.len() - 1 {
                    triangles.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    // Missing normals become zero vectors, which TriangleMesh replaces with
    // area-weighted normals.
    let normals = normals
        .into_iter()
        .map(|n| n.unwrap_or(Vec3::ZERO))
        .collect();
    TriangleMesh::new(positions, Some(normals), Some(colors), triangles)
}

// ---------------------------------------------------------------------------
// PLY

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    /// Divisor that maps an integer color channel onto `[0, 1]`.
    fn color_scale(self) -> f64 {
        match self {
            Self::I8 => 127.0,
            Self::U8 => 255.0,
            Self::I16 => 32767.0,
            Self::U16 => 65535.0,
            Self::I32 => i32::MAX as f64,
            Self::U32 => u32::MAX as f64,
            Self::F32 | Self::F64 => 1.0,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar {
        name: String,
        ty: Scalar,
    },
    List {
        name: String,
        count: Scalar,
        item: Scalar,
    },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
}

/// Pull-style value source over either encoding.
struct Body<'a> {
    bytes: &'a [u8],
    pos: usize,
    encoding: PlyEncoding,
    line: usize,
    tokens: std::vec::IntoIter<&'a str>,
    path: &'a Path,
}

impl<'a> Body<'a> {
    fn error(&self, message: String) -> Error {
        let location = match self.encoding {
            PlyEncoding::Ascii => Location::Line(self.line),
            PlyEncoding::BinaryLe => Location::Offset(self.pos as u64),
        };
        Error::Parse {
            path: self.path.to_path_buf(),
            location,
            message,
        }
    }

    fn next(&mut self, ty: Scalar) -> Result<f64> {
        match self.encoding {
            PlyEncoding::BinaryLe => {
                let n = ty.size();
                if self.pos + n > self.bytes.len() {
                    return Err(self.error(format!(
                        "unexpected end of data ({} bytes total)",
                        self.bytes.len()
                    )));
                }
                let v = ty.read_le(&self.bytes[self.pos..self.pos + n]);
                self.pos += n;
                Ok(v)
            }
            PlyEncoding::Ascii => loop {
                if let Some(t) = self.tokens.next() {
                    return t
                        .parse()
                        .map_err(|_| self.error(format!("invalid number '{t}'")));
                }
                if self.pos >= self.bytes.len() {
                    return Err(self.error("unexpected end of data".into()));
                }
                let end = self.bytes[self.pos..]
                    .iter()
                    .position(|&b| b == b'\n')
                    .map_or(self.bytes.len(), |e| self.pos + e + 1);
                let line = std::str::from_utf8(&self.bytes[self.pos..end])
                    .map_err(|_| self.error("invalid UTF-8".into()))?;
                self.pos = end;
                self.line += 1;
                self.tokens = line.split_whitespace().collect::<Vec<_>>().into_iter();
            },
        }
    }
}

pub(crate) fn parse_ply(bytes: &[u8], path: &Path) -> Result<TriangleMesh> {
    let perr = |loc: Location, message: String| Error::Parse {
        path: path.to_path_buf(),
        location: loc,
        message,
    };
    // Header.
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| {
                perr(
                    Location::Line(line_no + 1),
                    "header not terminated by end_header".into(),
                )
            })?;
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| perr(Location::Line(line_no + 1), "header is not UTF-8".into()))?
            .trim();
        pos += end + 1;
        line_no += 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let here = Location::Line(line_no);
        match toks.as_slice() {
            [] => {}
            ["ply"] if line_no == 1 => {}
            _ if line_no == 1 => return Err(perr(here, "missing 'ply' magic".into())),
            ["format", "ascii", _] => encoding = Some(PlyEncoding::Ascii),
            ["format", "binary_little_endian", _] => encoding = Some(PlyEncoding::BinaryLe),
            ["format", other, _] => {
                return Err(perr(here, format!("unsupported encoding '{other}'")))
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| perr(here, format!("invalid element count '{count}'")))?,
                props: Vec::new(),
            }),
            ["property", "list", c, i, name] => {
                let (Some(count), Some(item)) = (Scalar::parse(c), Scalar::parse(i)) else {
                    return Err(perr(here, format!("unknown list types '{c} {i}'")));
                };
                elements
                    .last_mut()
                    .ok_or_else(|| perr(here, "property before element".into()))?
                    .props
                    .push(Property::List {
                        name: name.to_string(),
                        count,
                        item,
                    });
            }
            ["property", ty, name] => {
                let ty =
                    Scalar::parse(ty).ok_or_else(|| perr(here, format!("unknown type '{ty}'")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| perr(here, "property before element".into()))?
                    .props
                    .push(Property::Scalar {
                        name: name.to_string(),
                        ty,
                    });
            }
            ["end_header"] => break,
            _ => return Err(perr(here, format!("unrecognized header line '{line}'"))),
        }
    }
    let encoding =
        encoding.ok_or_else(|| perr(Location::Line(line_no), "missing format line".into()))?;

    let mut body = Body {
        bytes,
        pos,
        encoding,
        line: line_no,
        tokens: Vec::new().into_iter(),
        path,
    };
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut colors = Vec::new();
    let mut have_normals = false;
    let mut have_colors = false;
    let mut triangles = Vec::new();
    let mut face_record_lines = Vec::new();

    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        if is_vertex {
            have_normals = el
                .props
                .iter()
                .any(|p| matches!(p, Property::Scalar { name, .. } if name == "nx"));
            have_colors = el
                .props
                .iter()
                .any(|p| matches!(p, Property::Scalar { name, .. } if name == "red"));
        }
        for _ in 0..el.count {
            let mut p = Vec3::ZERO;
            let mut n = Vec3::ZERO;
            let mut c = Vec4::new(0.5, 0.5, 0.5, 1.0);
            for prop in &el.props {
                match prop {
                    Property::Scalar { name, ty } => {
                        let val = body.next(*ty)?;
                        if !is_vertex {
                            continue;
                        }
                        let cv = (val / ty.color_scale()) as f32;
                        match name.as_str() {
                            "x" => p.x = val as f32,
                            "y" => p.y = val as f32,
                            "z" => p.z = val as f32,
                            "nx" => n.x = val as f32,
                            "ny" => n.y = val as f32,
                            "nz" => n.z = val as f32,
                            "red" => c.x = cv,
                            "green" => c.y = cv,
                            "blue" => c.z = cv,
                            "alpha" => c.w = cv,
                            _ => {}
                        }
                    }
                    Property::List { name, count, item } => {
                        let loc = match encoding {
                            PlyEncoding::Ascii => Location::Line(body.line),
                            PlyEncoding::BinaryLe => Location::Offset(body.pos as u64),
                        };
                        let len = body.next(*count)? as usize;
                        let mut idx = Vec::with_capacity(len);
                        for _ in 0..len {
                            idx.push(body.next(*item)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            if len < 3 {
                                return Err(perr(loc, format!("face with {len} vertices")));
                            }
                            for k in 1..len - 1 {
                                triangles.push([idx[0], idx[k], idx[k + 1]]);
                                face_record_lines.push(loc);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                positions.push(p);
                normals.push(n);
                colors.push(c);
            }
        }
    }
    let nv = positions.len();
    let triangles = triangles
        .into_iter()
        .zip(face_record_lines)
        .map(|(t, loc)| {
            let mut out = [0u32; 3];
            for (o, &i) in out.iter_mut().zip(&t) {
                if i < 0.0 || i as usize >= nv {
                    return Err(Error::IndexOutOfRange {
                        path: path.to_path_buf(),
                        location: loc,
                        index: i as i64,
                        count: nv,
                    });
                }
                *o = i as u32;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(
        positions,
        have_normals.then_some(normals),
        have_colors.then_some(colors),
        triangles,
    )
}

/// Serializes a mesh as binary little-endian PLY with float positions and
/// normals and 8-bit RGBA colors.
pub fn write_ply_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(256 + mesh.vertex_count() * 28 + mesh.triangle_count() * 13);
    let header = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property float nx\nproperty float ny\nproperty float nz\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertex_count(),
        mesh.triangle_count()
    );
    out.extend_from_slice(header.as_bytes());
    for ((p, n), c) in mesh
        .positions()
        .iter()
        .zip(mesh.normals())
        .zip(mesh.colors())
    {
        for v in p.to_array().into_iter().chain(n.to_array()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&crate::color::Rgba8::from_unit(*c).0);
    }
    for t in mesh.triangles() {
        out.push(3);
        for &i in t {
            out.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    out
}

pub fn write_ply(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let mut f = std::fs::File::create(&path).map_err(io_err(&path))?;
    f.write_all(&write_ply_bytes(mesh)).map_err(io_err(&path))
}
