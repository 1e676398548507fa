use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{halve_antipodal, GradientScheme, Shell, SphericalDesign};
use crate::eigen_laws::euler_rotation;
use crate::error::{Error, Result};

/// Directory overriding the bundled data files.
pub const DATA_DIR_ENV: &str = "ISOMAT_DATA_DIR";

macro_rules! bundled {
    ($name:literal) => {
        include_str!(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/designs/",
            $name,
            ".csv"
        ))
    };
}

pub struct BuiltinDesign {
    pub name: &'static str,
    pub order: usize,
    pub antipodal: bool,
    pub sha256: &'static str,
    text: &'static str,
}

const DESIGNS: [BuiltinDesign; 7] = [
    BuiltinDesign {
        name: "womersley14",
        order: 4,
        antipodal: false,
        sha256: "cd998b5ce35aaaaef70fb23f5b4a150ef7642fe630194714efd70fd446463136",
        text: bundled!("womersley14"),
    },
    BuiltinDesign {
        name: "icosahedron12",
        order: 5,
        antipodal: true,
        sha256: "bfbca873fc0027c083d5aa243c7f8f627ea0ad91fc3af1322c1b232acca2cfab",
        text: bundled!("icosahedron12"),
    },
    BuiltinDesign {
        name: "dodecahedron20",
        order: 5,
        antipodal: true,
        sha256: "0138bbbf43b3adfe215239e87e6412bf227ffb9bddc03d6c4d15fbaadedb0e4c",
        text: bundled!("dodecahedron20"),
    },
    BuiltinDesign {
        name: "antipodal_t7_32",
        order: 7,
        antipodal: true,
        sha256: "ee36ced08d11d497e1a6dda324e778eb82ca8a4407237ae7484749c83b83498f",
        text: bundled!("antipodal_t7_32"),
    },
    BuiltinDesign {
        name: "antipodal_t9_48",
        order: 9,
        antipodal: true,
        sha256: "a9397f6cd11e8f111a02c394006e4a8be3d9684840cf75260fcf6477a187c60b",
        text: bundled!("antipodal_t9_48"),
    },
    BuiltinDesign {
        name: "antipodal_t11_70",
        order: 11,
        antipodal: true,
        sha256: "3da3ab79d32ddd25785684dcf48badf302316e54bdb4891b249438048434b246",
        text: bundled!("antipodal_t11_70"),
    },
    BuiltinDesign {
        name: "philips32",
        order: 0,
        antipodal: false,
        sha256: "5aba7fb82cdee22f55b9bd0c8f75d89a25d7cb3a3f4d311396288c584761e89f",
        text: bundled!("philips32"),
    },
];

const ROTATIONS_TEXT: &str = bundled!("design4_rotations");
const ROTATIONS_SHA256: &str = "bb3e1854c79ed2cebba9d37aaf7403e82328ed06c37c7196c70d155529484b6e";

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Bundled text, or the file under `$ISOMAT_DATA_DIR/designs/` when set.
fn source(name: &str, bundled: &'static str, sha256: &str) -> Result<String> {
    let text = match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => {
            let path = Path::new(&dir).join("designs").join(format!("{name}.csv"));
            std::fs::read_to_string(&path).map_err(|e| Error::Data {
                file: path.display().to_string(),
                reason: e.to_string(),
            })?
        }
        None => bundled.to_string(),
    };
    if !sha256.is_empty() && hex_digest(text.as_bytes()) != sha256 {
        return Err(Error::Data {
            file: format!("{name}.csv"),
            reason: "checksum mismatch".into(),
        });
    }
    Ok(text)
}

#[derive(serde::Deserialize)]
struct PointRow {
    ux: f64,
    uy: f64,
    uz: f64,
}

fn parse_points(text: &str, name: &str) -> Result<Vec<[f64; 3]>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize::<PointRow>()
        .map(|r| {
            r.map(|p| [p.ux, p.uy, p.uz]).map_err(|e| Error::Data {
                file: name.into(),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// One of the bundled point sets, normalized to unit length.
pub fn builtin_design(name: &str) -> Result<SphericalDesign> {
    let d = DESIGNS
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown design {name}")))?;
    let text = source(d.name, d.text, d.sha256)?;
    SphericalDesign::normalized(parse_points(&text, name)?, d.order, d.antipodal)
}

/// Reads a `ux,uy,uz` point table and normalizes each point.
pub fn read_design<R: Read>(mut reader: R, name: &str) -> Result<SphericalDesign> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| Error::Data {
        file: name.into(),
        reason: e.to_string(),
    })?;
    SphericalDesign::normalized(parse_points(&text, name)?, 0, false)
}

/// Rotation table in the bundled `shell,phi,theta,psi` format.
pub fn format_rotation_table(angles: &[[f64; 3]]) -> String {
    let mut s = String::from("shell,phi,theta,psi\n");
    for (i, a) in angles.iter().enumerate() {
        s += &format!("{i},{:e},{:e},{:e}\n", a[0], a[1], a[2]);
    }
    s
}

pub fn builtin_design_names() -> Vec<&'static str> {
    DESIGNS.iter().map(|d| d.name).collect()
}

#[derive(serde::Deserialize)]
struct RotationRow {
    shell: usize,
    phi: f64,
    theta: f64,
    psi: f64,
}

fn design4_angles() -> Result<Vec<[f64; 3]>> {
    let text = source("design4_rotations", ROTATIONS_TEXT, ROTATIONS_SHA256)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = vec![[0.0; 3]; 4];
    for row in rdr.deserialize::<RotationRow>() {
        let r = row.map_err(|e| Error::Data {
            file: "design4_rotations.csv".into(),
            reason: e.to_string(),
        })?;
        if r.shell >= 4 {
            return Err(Error::Data {
                file: "design4_rotations.csv".into(),
                reason: "shell index out of range".into(),
            });
        }
        out[r.shell] = [r.phi, r.theta, r.psi];
    }
    Ok(out)
}

pub const DESIGN2_3_BVALUES: [f64; 7] = [560.0, 778.0, 996.0, 1276.0, 1556.0, 1898.0, 2240.0];
pub const DESIGN5_BVALUES: [f64; 15] = [
    62.0, 249.0, 560.0, 996.0, 1556.0, 2240.0, 3049.0, 3982.0, 5040.0, 6222.0, 7529.0, 8960.0,
    10516.0, 12196.0, 14000.0,
];

/// Design 4 shells before rotation: orders 5, 7, 9, 11.
pub fn design4_shells() -> Result<Vec<(f64, SphericalDesign)>> {
    Ok(vec![
        (560.0, builtin_design("icosahedron12")?),
        (996.0, builtin_design("antipodal_t7_32")?),
        (1556.0, builtin_design("antipodal_t9_48")?),
        (2240.0, builtin_design("antipodal_t11_70")?),
    ])
}

/// The five acquisition schemes, in order.
pub fn builtin_schemes() -> Result<Vec<(String, GradientScheme)>> {
    let womersley = builtin_design("womersley14")?;
    let ico = halve_antipodal(&builtin_design("icosahedron12")?)?;
    let dod = halve_antipodal(&builtin_design("dodecahedron20")?)?;
    let multi = |d: &SphericalDesign| {
        DESIGN2_3_BVALUES
            .iter()
            .map(|&b| Shell {
                b,
                design: d.clone(),
            })
            .collect()
    };

    let angles = design4_angles()?;
    let d4 = design4_shells()?
        .into_iter()
        .zip(angles)
        .map(|((b, d), a)| Shell {
            b,
            design: d.rotated(&euler_rotation(a[0], a[1], a[2])),
        })
        .collect();

    // scanner frame to the frame used for the tensor: u -> (ux, -uz, uy)
    let ph = builtin_design("philips32")?;
    let mapped = SphericalDesign {
        points: ph.points.iter().map(|p| [p[0], -p[2], p[1]]).collect(),
        order: 0,
        antipodal: false,
    };
    let mut tripled = mapped.clone();
    tripled.points = [mapped.points.clone(), mapped.points.clone(), mapped.points].concat();
    let d5 = DESIGN5_BVALUES
        .iter()
        .map(|&b| Shell {
            b,
            design: tripled.clone(),
        })
        .collect();

    Ok(vec![
        (
            "design1".into(),
            GradientScheme::new(
                vec![Shell {
                    b: 996.0,
                    design: womersley,
                }],
                1,
            )?,
        ),
        ("design2".into(), GradientScheme::new(multi(&ico), 1)?),
        ("design3".into(), GradientScheme::new(multi(&dod), 1)?),
        ("design4".into(), GradientScheme::new(d4, 1)?),
        ("design5".into(), GradientScheme::new(d5, 3)?),
    ])
}

pub fn builtin_scheme(name: &str) -> Result<GradientScheme> {
    builtin_schemes()?
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown scheme {name}")))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GradientRow {
    b: f64,
    ux: f64,
    uy: f64,
    uz: f64,
}

/// Reads a `b,ux,uy,uz` table; b = 0 rows are b₀ acquisitions.
pub fn read_gradient_table<R: Read>(reader: R, name: &str) -> Result<GradientScheme> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for r in rdr.deserialize::<GradientRow>() {
        let r = r.map_err(|e| Error::Data {
            file: name.into(),
            reason: e.to_string(),
        })?;
        rows.push((r.b, [r.ux, r.uy, r.uz]));
    }
    GradientScheme::from_acquisitions(&rows)
}

pub fn write_gradient_table<W: Write>(scheme: &GradientScheme, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (b, u) in scheme.acquisitions() {
        w.serialize(GradientRow {
            b,
            ux: u[0],
            uy: u[1],
            uz: u[2],
        })
        .map_err(|e| Error::Numeric(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Numeric(e.to_string()))
}
