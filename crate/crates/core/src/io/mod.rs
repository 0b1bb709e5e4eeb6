//! Reading and writing label volumes.
//!
//! The container is chosen from the file name: `.rawvol` is the text debug
//! format, `.nii` and `.nii.gz` are NIfTI-1.

pub mod nifti;
pub mod raw;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::LabelVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeFormat {
    Nifti,
    NiftiGz,
    Raw,
}

impl VolumeFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?;
        if name.ends_with(".nii.gz") {
            Some(VolumeFormat::NiftiGz)
        } else if name.ends_with(".nii") {
            Some(VolumeFormat::Nifti)
        } else if name.ends_with(".rawvol") {
            Some(VolumeFormat::Raw)
        } else {
            None
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            VolumeFormat::Nifti => ".nii",
            VolumeFormat::NiftiGz => ".nii.gz",
            VolumeFormat::Raw => ".rawvol",
        }
    }
}

/// File name with any recognized volume extension removed.
pub fn subject_stem(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let format = VolumeFormat::from_path(path)?;
    Some(name[..name.len() - format.extension().len()].to_string())
}

pub fn read_label_volume(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match VolumeFormat::from_path(path) {
        Some(VolumeFormat::Raw) => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::Format(format!("{} is not UTF-8 text", path.display())))?;
            raw::parse(text)
        }
        // NIfTI input is sniffed for the gzip magic regardless of suffix.
        _ => nifti::read_bytes(&bytes),
    }
}

pub fn write_label_volume(vol: &LabelVolume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match VolumeFormat::from_path(path) {
        Some(VolumeFormat::Raw) => raw::render(vol).into_bytes(),
        Some(VolumeFormat::NiftiGz) => nifti::write_bytes(vol, true)?,
        Some(VolumeFormat::Nifti) => nifti::write_bytes(vol, false)?,
        None => {
            return Err(Error::Usage(format!(
                "{}: expected a .nii, .nii.gz or .rawvol file name",
                path.display()
            )))
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
