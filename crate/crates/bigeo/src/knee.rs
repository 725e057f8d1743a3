//! Knee-joint frame pipeline: vertex-cloud ingestion, PCA frames, relative
//! femur/tibia motions and the per-grade regression table.
//!
//! Vertex clouds are plain "x y z" text (one triple per line, millimetres)
//! or OFF meshes (faces ignored). Subjects are listed in a JSON manifest:
//! an array of `{subject_id, kl_grade, femur_path, tibia_path}`.

use crate::error::{Error, Result};
use crate::explog::group_exp;
use crate::geodesic::geodesic;
use crate::group::{GroupId, GroupPoint, Tangent};
use crate::regression::{fit_biinvariant, Dataset, FitResult, Sample, SolverConfig};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Rigid frame of a bone: PCA orientation and centroid origin (mm).
#[derive(Clone, Debug)]
pub struct Frame {
    pub rotation: GroupPoint,
    pub origin: Vector3<f64>,
}

impl Frame {
    pub fn to_se3(&self) -> GroupPoint {
        GroupPoint::se3_from_parts(&self.rotation.rotation(), &self.origin).unwrap()
    }
}

/// One subject: KL grade plus the two bone frames.
#[derive(Clone, Debug)]
pub struct KneeRecord {
    pub subject_id: String,
    pub kl_grade: u8,
    pub femur_frame: Frame,
    pub tibia_frame: Frame,
}

impl KneeRecord {
    pub fn new(subject_id: String, kl_grade: u8, femur: Frame, tibia: Frame) -> Result<Self> {
        if kl_grade > 4 {
            return Err(Error::Usage(format!(
                "KL grade must be 0..=4, got {kl_grade}"
            )));
        }
        Ok(KneeRecord {
            subject_id,
            kl_grade,
            femur_frame: femur,
            tibia_frame: tibia,
        })
    }
}

/// Manifest entry on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub kl_grade: u8,
    pub femur_path: PathBuf,
    pub tibia_path: PathBuf,
}

/// Centroid origin plus positively oriented principal directions.
///
/// Columns are unit covariance eigenvectors sorted by descending eigenvalue;
/// the first two columns are sign-fixed so their largest-magnitude entry is
/// positive, and the third is their cross product (det = +1).
pub fn frame_from_vertices(vertices: &[Vector3<f64>]) -> Result<Frame> {
    if vertices.len() < 4 {
        return Err(Error::Usage(format!(
            "need at least 4 vertices, got {}",
            vertices.len()
        )));
    }
    let n = vertices.len() as f64;
    let centroid = vertices.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for v in vertices {
        let d = v - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if vals[2] <= 1e-12 * vals[0].max(1.0) {
        return Err(Error::Usage("vertices are (near-)coplanar".into()));
    }
    for w in 0..2 {
        let gap = (vals[w] - vals[w + 1]).abs() / vals[0].max(f64::MIN_POSITIVE);
        if gap < 1e-9 {
            return Err(Error::DegenerateSpectrum(format!(
                "eigenvalues {} and {} coincide (relative gap {gap:.3e})",
                vals[w],
                vals[w + 1]
            )));
        }
    }
    let mut cols = [Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
    for (k, &i) in order.iter().take(2).enumerate() {
        let mut c: Vector3<f64> = eig.eigenvectors.column(i).into();
        c /= c.norm();
        // Sign rule: largest-magnitude entry positive.
        let lead = (0..3).max_by(|a, b| c[*a].abs().total_cmp(&c[*b].abs())).unwrap();
        if c[lead] < 0.0 {
            c = -c;
        }
        cols[k] = c;
    }
    cols[2] = cols[0].cross(&cols[1]);
    let rot = Matrix3::from_columns(&cols);
    Ok(Frame {
        rotation: GroupPoint::so3_from_matrix(&rot)?,
        origin: centroid,
    })
}

/// Relative motion M = F_F (F_T)^-1 moving the tibia frame onto the femur
/// frame.
pub fn relative_motion(femur: &Frame, tibia: &Frame) -> GroupPoint {
    let rf = femur.rotation.rotation();
    let rt = tibia.rotation.rotation();
    let r = rf * rt.transpose();
    let x = femur.origin - r * tibia.origin;
    GroupPoint::se3_from_parts(&r, &x).unwrap()
}

/// Parse a vertex cloud: OFF if the first non-blank line is the "OFF"
/// keyword, plain x-y-z rows otherwise.
pub fn read_vertices(path: &Path) -> Result<Vec<Vector3<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let first = lines
        .next()
        .ok_or_else(|| Error::Io(format!("{}: empty vertex file", path.display())))?;
    if first.eq_ignore_ascii_case("OFF") {
        parse_off(lines, path)
    } else {
        let mut out = vec![parse_xyz(first, path)?];
        for line in lines {
            out.push(parse_xyz(line, path)?);
        }
        Ok(out)
    }
}

fn parse_xyz(line: &str, path: &Path) -> Result<Vector3<f64>> {
    let nums: Vec<f64> = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Io(format!("{}: bad vertex line '{line}'", path.display())))
        })
        .collect::<Result<_>>()?;
    if nums.len() != 3 {
        return Err(Error::Io(format!(
            "{}: expected 3 coordinates per line, got {}",
            path.display(),
            nums.len()
        )));
    }
    Ok(Vector3::new(nums[0], nums[1], nums[2]))
}

fn parse_off<'a, I: Iterator<Item = &'a str>>(
    mut lines: I,
    path: &Path,
) -> Result<Vec<Vector3<f64>>> {
    let counts = lines
        .next()
        .ok_or_else(|| Error::Io(format!("{}: OFF header missing counts line", path.display())))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Io(format!("{}: bad OFF counts line", path.display())))
        })
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::Io(format!(
            "{}: OFF counts line needs vertex and face counts",
            path.display()
        )));
    }
    let n_vertices = counts[0];
    let mut out = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let line = lines.next().ok_or_else(|| {
            Error::Io(format!("{}: OFF file truncated", path.display()))
        })?;
        out.push(parse_xyz(line, path)?);
    }
    // Faces are ignored.
    Ok(out)
}

/// Load the manifest and build one record per subject.
pub fn load_records(manifest_path: &Path) -> Result<Vec<KneeRecord>> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| Error::Io(format!("{}: {e}", manifest_path.display())))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::Io(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    entries
        .into_iter()
        .map(|entry| {
            let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            let femur = frame_from_vertices(&read_vertices(&resolve(&entry.femur_path))?)
                .map_err(|e| attach_subject(e, &entry.subject_id))?;
            let tibia = frame_from_vertices(&read_vertices(&resolve(&entry.tibia_path))?)
                .map_err(|e| attach_subject(e, &entry.subject_id))?;
            KneeRecord::new(entry.subject_id, entry.kl_grade, femur, tibia)
        })
        .collect()
}

fn attach_subject(e: Error, subject: &str) -> Error {
    match e {
        Error::DegenerateSpectrum(msg) => {
            Error::DegenerateSpectrum(format!("subject {subject}: {msg}"))
        }
        other => other,
    }
}

/// One row of the regression output table.
#[derive(Clone, Debug)]
pub struct KneeRow {
    pub grade: u8,
    pub t: f64,
    pub translational_norm: f64,
}

#[derive(Clone, Debug)]
pub struct KneeTable {
    pub rows: Vec<KneeRow>,
    pub fit: FitResult,
}

/// Regress relative motions against KL grades (t = grade/4) and report the
/// translational norm of the denoised configuration at each grade.
pub fn knee_regression(records: &[KneeRecord], cfg: &SolverConfig) -> Result<KneeTable> {
    if records.is_empty() {
        return Err(Error::Usage("no knee records".into()));
    }
    let samples = records
        .iter()
        .map(|r| {
            Sample::new(
                relative_motion(&r.femur_frame, &r.tibia_frame),
                r.kl_grade as f64 / 4.0,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let data = Dataset::new(samples)?;
    let fit = fit_biinvariant(&data, cfg)?;
    let rows = (0..=4u8)
        .map(|grade| {
            let t = grade as f64 / 4.0;
            let m = geodesic(t, &fit.params)?;
            let x = Vector3::from_iterator(m.translation());
            Ok(KneeRow {
                grade,
                t,
                translational_norm: x.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KneeTable { rows, fit })
}

/// Synthetic knee fixture with implanted joint-space narrowing.
///
/// A canonical anisotropic bone cloud (axis-aligned box grid with distinct
/// side lengths, so its PCA frame is the identity) is placed per subject:
/// the femur at a fixed pose, the tibia moved towards it linearly in the KL
/// grade, with a small per-subject pose jitter on top.
pub fn generate_fixture(dir: &Path, seed: u64, subjects_per_grade: usize) -> Result<PathBuf> {
    use crate::experiments::{sample_tangent, stage_rng};
    std::fs::create_dir_all(dir)?;
    let cloud = canonical_bone_cloud();
    let mut rng = stage_rng(seed, 7);
    let e = GroupPoint::identity(GroupId::SE3);
    let mut entries = Vec::new();
    for grade in 0..=4u8 {
        for s in 0..subjects_per_grade {
            let subject_id = format!("synth-{grade}-{s:02}");
            // Joint gap narrows by 4 mm per grade.
            let gap = 44.0 - 4.0 * grade as f64;
            let femur_pose =
                GroupPoint::se3_from_parts(&Matrix3::identity(), &Vector3::new(0.0, gap, 0.0))
                    .unwrap();
            let jitter = group_exp(&scale_pose_noise(sample_tangent(&mut rng, 1.0, &e)))?;
            let tibia_pose = GroupPoint::se3_from_parts(
                &Matrix3::identity(),
                &Vector3::new(0.0, -18.0, 0.0),
            )
            .unwrap()
            .compose(&jitter)?;
            let femur_path = dir.join(format!("{subject_id}_femur.xyz"));
            let tibia_path = dir.join(format!("{subject_id}_tibia.xyz"));
            write_cloud(&femur_path, &cloud, &femur_pose)?;
            write_cloud(&tibia_path, &cloud, &tibia_pose)?;
            entries.push(ManifestEntry {
                subject_id,
                kl_grade: grade,
                femur_path: femur_path.file_name().unwrap().into(),
                tibia_path: tibia_path.file_name().unwrap().into(),
            });
        }
    }
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, serde_json::to_string_pretty(&entries).unwrap())?;
    Ok(manifest)
}

/// Shrink an isotropic se(3) draw to fixture scale: ~5 mrad rotations and
/// ~0.5 mm translations.
fn scale_pose_noise(v: Tangent) -> Tangent {
    let c = v.identity_coords();
    let scaled = [
        0.005 * c[0],
        0.005 * c[1],
        0.005 * c[2],
        0.5 * c[3],
        0.5 * c[4],
        0.5 * c[5],
    ];
    Tangent::from_identity_coords(GroupId::SE3, &scaled).unwrap()
}

fn canonical_bone_cloud() -> Vec<Vector3<f64>> {
    // 5x4x3 grid of a 40x24x10 mm box: distinct covariance eigenvalues and
    // an identity PCA frame under the sign rule.
    let mut out = Vec::new();
    for i in 0..5 {
        for j in 0..4 {
            for k in 0..3 {
                out.push(Vector3::new(
                    -20.0 + 10.0 * i as f64,
                    -12.0 + 8.0 * j as f64,
                    -5.0 + 5.0 * k as f64,
                ));
            }
        }
    }
    out
}

fn write_cloud(path: &Path, cloud: &[Vector3<f64>], pose: &GroupPoint) -> Result<()> {
    let r = pose.rotation();
    let x = Vector3::from_iterator(pose.translation());
    let mut text = String::new();
    for v in cloud {
        let p = r * v + x;
        text.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    std::fs::write(path, text)?;
    Ok(())
}
