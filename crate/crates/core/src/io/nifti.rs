//! Single-file NIfTI-1 (`.nii` / `.nii.gz`) label maps.
//!
//! Only the fields needed to recover a label grid are interpreted: `dim`,
//! `datatype`, `pixdim`, `vox_offset` and the `scl_*` pair. Orientation
//! (qform/sform) is parsed past but not used.

use std::io::{Read, Write};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::volume::{GridGeometry, LabelVolume, MAX_LABEL};

pub const HEADER_SIZE: usize = 348;
pub const MAGIC_SINGLE_FILE: &[u8; 4] = b"n+1\0";
const DEFAULT_VOX_OFFSET: usize = 352;
const INTEGRAL_TOLERANCE: f64 = 1e-6;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_INT32: i16 = 8;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;
const DT_UINT16: i16 = 512;

const NIFTI_UNITS_MM: u8 = 2;
const NIFTI_XFORM_SCANNER_ANAT: i16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl HeaderReader<'_> {
    fn i16(&self, off: usize) -> i16 {
        let b = [self.bytes[off], self.bytes[off + 1]];
        match self.endian {
            Endian::Little => i16::from_le_bytes(b),
            Endian::Big => i16::from_be_bytes(b),
        }
    }

    fn f32(&self, off: usize) -> f32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        match self.endian {
            Endian::Little => f32::from_le_bytes(b),
            Endian::Big => f32::from_be_bytes(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DataType {
    U8,
    I16,
    U16,
    I32,
    F32,
    F64,
}

impl DataType {
    fn from_code(code: i16) -> Result<Self> {
        Ok(match code {
            DT_UINT8 => DataType::U8,
            DT_INT16 => DataType::I16,
            DT_UINT16 => DataType::U16,
            DT_INT32 => DataType::I32,
            DT_FLOAT32 => DataType::F32,
            DT_FLOAT64 => DataType::F64,
            other => {
                return Err(Error::Format(format!("unsupported NIfTI datatype code {other}")))
            }
        })
    }

    fn size(self) -> usize {
        match self {
            DataType::U8 => 1,
            DataType::I16 | DataType::U16 => 2,
            DataType::I32 | DataType::F32 => 4,
            DataType::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, DataType::F32 | DataType::F64)
    }
}

/// Parsed subset of a NIfTI-1 header.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub datatype: i16,
    pub vox_offset: usize,
    pub scl_slope: f32,
    pub scl_inter: f32,
    big_endian: bool,
}

impl NiftiHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(Error::Format(format!(
                "file is {} bytes, shorter than a NIfTI-1 header",
                bytes.len()
            )));
        }
        let sizeof_hdr: [u8; 4] = bytes[0..4].try_into().unwrap();
        let endian = if i32::from_le_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
            Endian::Little
        } else if i32::from_be_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
            Endian::Big
        } else {
            return Err(Error::Format("sizeof_hdr is not 348".into()));
        };
        if &bytes[344..348] != MAGIC_SINGLE_FILE {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected single-file NIfTI-1 \"n+1\"",
                String::from_utf8_lossy(&bytes[344..348])
            )));
        }
        let r = HeaderReader { bytes, endian };

        let ndim = r.i16(40);
        if !(1..=7).contains(&ndim) {
            return Err(Error::Format(format!("dim[0] = {ndim} out of range 1..=7")));
        }
        let mut dims = [1usize; 3];
        for axis in 1..=ndim as usize {
            let d = r.i16(40 + 2 * axis);
            if d < 1 {
                return Err(Error::Format(format!("dim[{axis}] = {d} must be >= 1")));
            }
            if axis <= 3 {
                dims[axis - 1] = d as usize;
            } else if d != 1 {
                return Err(Error::Format(format!(
                    "dim[{axis}] = {d}: only single-channel 3-D label maps are supported"
                )));
            }
        }

        let mut spacing = [1.0f64; 3];
        for (axis, s) in spacing.iter_mut().enumerate() {
            let p = r.f32(76 + 4 * (axis + 1));
            if axis < ndim as usize {
                let p = f64::from(p).abs();
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Format(format!("pixdim[{}] = {p} is not positive", axis + 1)));
                }
                *s = p;
            }
        }

        let datatype = r.i16(70);
        DataType::from_code(datatype)?;
        let vox_offset = r.f32(108);
        if !vox_offset.is_finite() || vox_offset < HEADER_SIZE as f32 || vox_offset.fract() != 0.0 {
            return Err(Error::Format(format!("invalid vox_offset {vox_offset}")));
        }
        let scl_slope = r.f32(112);
        let scl_inter = r.f32(116);
        if !scl_slope.is_finite() || !scl_inter.is_finite() {
            return Err(Error::Format("non-finite scl_slope/scl_inter".into()));
        }

        Ok(NiftiHeader {
            dims,
            spacing,
            datatype,
            vox_offset: vox_offset as usize,
            scl_slope,
            scl_inter,
            big_endian: endian == Endian::Big,
        })
    }

    fn scaling(&self) -> Option<(f64, f64)> {
        let slope = f64::from(self.scl_slope);
        let inter = f64::from(self.scl_inter);
        if slope == 0.0 || (slope == 1.0 && inter == 0.0) {
            None
        } else {
            Some((slope, inter))
        }
    }
}

/// Decodes a complete (already decompressed) NIfTI-1 byte stream.
pub fn decode(bytes: &[u8]) -> Result<LabelVolume> {
    let header = NiftiHeader::parse(bytes)?;
    let geometry = GridGeometry::new(header.dims, header.spacing)
        .map_err(|e| Error::Format(e.to_string()))?;
    let dtype = DataType::from_code(header.datatype)?;
    let n = geometry.len();
    let needed = n
        .checked_mul(dtype.size())
        .and_then(|b| b.checked_add(header.vox_offset))
        .ok_or_else(|| Error::Format("voxel data size overflows".into()))?;
    if bytes.len() < needed {
        return Err(Error::Format(format!(
            "truncated voxel data: {} bytes, expected at least {needed}",
            bytes.len()
        )));
    }
    let data = &bytes[header.vox_offset..needed];
    let endian = if header.big_endian {
        Endian::Big
    } else {
        Endian::Little
    };

    let scaling = header.scaling();
    let mut voxels = Vec::with_capacity(n);
    if dtype == DataType::U8 && scaling.is_none() {
        if let Some(index) = data.iter().position(|&v| v > MAX_LABEL) {
            return Err(Error::LabelDomain {
                value: f64::from(data[index]),
                index,
            });
        }
        voxels.extend_from_slice(data);
    } else {
        let width = dtype.size();
        for (index, raw) in data.chunks_exact(width).enumerate() {
            let value = read_scalar(raw, dtype, endian);
            let value = match scaling {
                Some((slope, inter)) => value * slope + inter,
                None => value,
            };
            voxels.push(coerce_label(value, index, dtype.is_float() || scaling.is_some())?);
        }
    }
    LabelVolume::new(geometry, voxels)
}

fn read_scalar(raw: &[u8], dtype: DataType, endian: Endian) -> f64 {
    macro_rules! num {
        ($t:ty) => {{
            let b = raw.try_into().unwrap();
            match endian {
                Endian::Little => <$t>::from_le_bytes(b) as f64,
                Endian::Big => <$t>::from_be_bytes(b) as f64,
            }
        }};
    }
    match dtype {
        DataType::U8 => f64::from(raw[0]),
        DataType::I16 => num!(i16),
        DataType::U16 => num!(u16),
        DataType::I32 => num!(i32),
        DataType::F32 => num!(f32),
        DataType::F64 => num!(f64),
    }
}

fn coerce_label(value: f64, index: usize, may_be_fractional: bool) -> Result<u8> {
    if !value.is_finite() {
        return Err(Error::Format(format!("non-finite value {value} at voxel {index}")));
    }
    let rounded = value.round();
    if may_be_fractional && (value - rounded).abs() > INTEGRAL_TOLERANCE {
        return Err(Error::LabelDomain { value, index });
    }
    if !(0.0..=f64::from(MAX_LABEL)).contains(&rounded) {
        return Err(Error::LabelDomain { value, index });
    }
    Ok(rounded as u8)
}

/// Encodes a label volume as little-endian uint8 NIfTI-1 with a scaled identity sform.
pub fn encode(vol: &LabelVolume) -> Result<Vec<u8>> {
    let g = vol.geometry();
    let mut h = vec![0u8; DEFAULT_VOX_OFFSET];
    let put_i16 = |h: &mut [u8], off: usize, v: i16| h[off..off + 2].copy_from_slice(&v.to_le_bytes());
    let put_f32 = |h: &mut [u8], off: usize, v: f32| h[off..off + 4].copy_from_slice(&v.to_le_bytes());

    h[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
    put_i16(&mut h, 40, 3);
    for axis in 0..3 {
        let d = i16::try_from(g.dims[axis]).map_err(|_| {
            Error::Format(format!("dimension {} too large for NIfTI-1", g.dims[axis]))
        })?;
        put_i16(&mut h, 42 + 2 * axis, d);
    }
    for axis in 3..7 {
        put_i16(&mut h, 42 + 2 * axis, 1);
    }
    put_i16(&mut h, 70, DT_UINT8);
    put_i16(&mut h, 72, 8);
    put_f32(&mut h, 76, 1.0);
    for axis in 0..3 {
        put_f32(&mut h, 80 + 4 * axis, g.spacing[axis] as f32);
    }
    put_f32(&mut h, 108, DEFAULT_VOX_OFFSET as f32);
    put_f32(&mut h, 112, 1.0);
    put_f32(&mut h, 116, 0.0);
    h[123] = NIFTI_UNITS_MM;
    put_f32(&mut h, 124, f32::from(MAX_LABEL));
    put_i16(&mut h, 254, NIFTI_XFORM_SCANNER_ANAT);
    for axis in 0..3 {
        put_f32(&mut h, 280 + 16 * axis + 4 * axis, g.spacing[axis] as f32);
    }
    h[344..348].copy_from_slice(MAGIC_SINGLE_FILE);

    let mut out = h;
    out.extend_from_slice(vol.voxels());
    Ok(out)
}

pub fn read_bytes(bytes: &[u8]) -> Result<LabelVolume> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut raw = Vec::new();
        MultiGzDecoder::new(bytes)
            .read_to_end(&mut raw)
            .map_err(|e| Error::Format(format!("gzip stream: {e}")))?;
        decode(&raw)
    } else {
        decode(bytes)
    }
}

pub fn write_bytes(vol: &LabelVolume, gzip: bool) -> Result<Vec<u8>> {
    let raw = encode(vol)?;
    if !gzip {
        return Ok(raw);
    }
    // GzEncoder writes mtime 0 and no filename, so output is reproducible.
    let mut enc = GzEncoder::new(Vec::with_capacity(raw.len() / 8), Compression::fast());
    enc.write_all(&raw)
        .and_then(|_| enc.finish())
        .map_err(|e| Error::Format(format!("gzip encode: {e}")))
}
