//! Device fingerprints (`fingerprint-v1`).
//!
//! A [`DeviceInfo`] is rendered as seven `key=value` lines in the fixed
//! order `lat`, `lon`, `browser`, `ip`, `os_name`, `os_version`, `mac`,
//! joined by a single LF with no trailing LF. Coordinates are fixed-point
//! with six decimals (negative zero prints as `0.000000`), the IP address
//! is printed in its standard textual form, and the MAC as six lowercase
//! colon-separated pairs. The checksum is the lowercase hex SHA-256 of those
//! bytes.

use alloc::format;
use alloc::string::String;
use core::net::IpAddr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

pub const FORMAT_VERSION: &str = "fingerprint-v1";

/// Decimal places used for coordinates unless configured otherwise.
pub const DEFAULT_COORDINATE_DECIMALS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid device field `{field}`: {reason}")]
pub struct InvalidField {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> InvalidField {
    InvalidField { field, reason: reason.into() }
}

/// Attributes collected from an employee's device at enrollment and login.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub latitude: f64,
    pub longitude: f64,
    pub browser: String,
    pub ip: String,
    pub os_name: String,
    pub os_version: String,
    pub mac: String,
}

/// Normalizes `AA-BB-CC-DD-EE-FF`, `aa:bb:..` or `aabbccddeeff` to
/// `aa:bb:cc:dd:ee:ff`.
pub fn normalize_mac(mac: &str) -> Option<String> {
    let mac = mac.trim();
    let digits: String = if mac.len() == 12 {
        String::from(mac)
    } else if mac.len() == 17 {
        let sep = mac.as_bytes()[2];
        if sep != b':' && sep != b'-' {
            return None;
        }
        let mut out = String::with_capacity(12);
        for (i, part) in mac.split(sep as char).enumerate() {
            if i >= 6 || part.len() != 2 {
                return None;
            }
            out.push_str(part);
        }
        out
    } else {
        return None;
    };
    if !digits.bytes().all(|b| b.is_ascii_hexdigit()) || digits.len() != 12 {
        return None;
    }
    let lower = digits.to_ascii_lowercase();
    let pairs: alloc::vec::Vec<&str> = (0..6).map(|i| &lower[2 * i..2 * i + 2]).collect();
    Some(pairs.join(":"))
}

fn coordinate(value: f64, min: f64, max: f64, field: &'static str, decimals: usize) -> Result<String, InvalidField> {
    if !(min..=max).contains(&value) {
        return Err(invalid(field, format!("{value} outside [{min}, {max}]")));
    }
    let text = format!("{value:.decimals$}");
    // -0.0 and tiny negatives round to a signed zero; print them unsigned.
    if text.starts_with('-') && text[1..].bytes().all(|b| b == b'0' || b == b'.') {
        return Ok(String::from(&text[1..]));
    }
    Ok(text)
}

fn text_field<'a>(value: &'a str, field: &'static str) -> Result<&'a str, InvalidField> {
    if value.is_empty() {
        return Err(invalid(field, "empty"));
    }
    if value.contains(['\n', '\r']) {
        return Err(invalid(field, "contains a line break"));
    }
    Ok(value)
}

impl DeviceInfo {
    /// The `fingerprint-v1` byte layout with six coordinate decimals.
    pub fn canonicalize(&self) -> Result<String, InvalidField> {
        self.canonicalize_with(DEFAULT_COORDINATE_DECIMALS)
    }

    /// Like [`DeviceInfo::canonicalize`] with a different coordinate
    /// precision. Anything other than six decimals is not `fingerprint-v1`.
    pub fn canonicalize_with(&self, decimals: usize) -> Result<String, InvalidField> {
        let lat = coordinate(self.latitude, -90.0, 90.0, "latitude", decimals)?;
        let lon = coordinate(self.longitude, -180.0, 180.0, "longitude", decimals)?;
        let browser = text_field(&self.browser, "browser")?;
        let ip: IpAddr = self
            .ip
            .trim()
            .parse()
            .map_err(|_| invalid("ip", format!("`{}` is not an IPv4 or IPv6 address", self.ip)))?;
        let os_name = text_field(&self.os_name, "os_name")?;
        let os_version = text_field(&self.os_version, "os_version")?;
        let mac = normalize_mac(&self.mac).ok_or_else(|| invalid("mac", format!("`{}` is not a MAC address", self.mac)))?;
        Ok(format!(
            "lat={lat}\nlon={lon}\nbrowser={browser}\nip={ip}\nos_name={os_name}\nos_version={os_version}\nmac={mac}"
        ))
    }

    /// 64 lowercase hex characters.
    pub fn checksum(&self) -> Result<String, InvalidField> {
        Ok(checksum_of(&self.canonicalize()?))
    }

    pub fn normalized_mac(&self) -> Result<String, InvalidField> {
        normalize_mac(&self.mac).ok_or_else(|| invalid("mac", format!("`{}` is not a MAC address", self.mac)))
    }
}

/// SHA-256 of an already canonical string.
pub fn checksum_of(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
