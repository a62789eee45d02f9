//! Contract-level error codes and their user-facing messages.
//!
//! The messages are the exact strings the deployed contracts revert with.
//! The same table ships as `resources/error_codes.json` so other tooling can
//! assert on the strings without linking this crate.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// The error-code table as published JSON.
pub const ERROR_CODES_JSON: &str = include_str!("../resources/error_codes.json");

/// A contract revert reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    EmptyEmail,
    EmptyPassword,
    EmptyDeviceInfo,
    EmptyMac,
    DuplicateUser,
    NullCaller,
    NotOwner,
    EmptyRole,
    EmptyRoleDescription,
    NoSuchUser,
    NoRoleAssigned,
    InvalidPassword,
    InvalidDevice,
    InvalidMac,
    WrongAccount,
    InvalidContractAddress,
    TerminateFailed,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 17] = [
        ErrorCode::EmptyEmail,
        ErrorCode::EmptyPassword,
        ErrorCode::EmptyDeviceInfo,
        ErrorCode::EmptyMac,
        ErrorCode::DuplicateUser,
        ErrorCode::NullCaller,
        ErrorCode::NotOwner,
        ErrorCode::EmptyRole,
        ErrorCode::EmptyRoleDescription,
        ErrorCode::NoSuchUser,
        ErrorCode::NoRoleAssigned,
        ErrorCode::InvalidPassword,
        ErrorCode::InvalidDevice,
        ErrorCode::InvalidMac,
        ErrorCode::WrongAccount,
        ErrorCode::InvalidContractAddress,
        ErrorCode::TerminateFailed,
    ];

    /// Stable machine name, e.g. `INVALID_PASSWORD`.
    pub const fn code(self) -> &'static str {
        match self {
            ErrorCode::EmptyEmail => "EMPTY_EMAIL",
            ErrorCode::EmptyPassword => "EMPTY_PASSWORD",
            ErrorCode::EmptyDeviceInfo => "EMPTY_DEVICE_INFO",
            ErrorCode::EmptyMac => "EMPTY_MAC",
            ErrorCode::DuplicateUser => "DUPLICATE_USER",
            ErrorCode::NullCaller => "NULL_CALLER",
            ErrorCode::NotOwner => "NOT_OWNER",
            ErrorCode::EmptyRole => "EMPTY_ROLE",
            ErrorCode::EmptyRoleDescription => "EMPTY_ROLE_DESCRIPTION",
            ErrorCode::NoSuchUser => "NO_SUCH_USER",
            ErrorCode::NoRoleAssigned => "NO_ROLE_ASSIGNED",
            ErrorCode::InvalidPassword => "INVALID_PASSWORD",
            ErrorCode::InvalidDevice => "INVALID_DEVICE",
            ErrorCode::InvalidMac => "INVALID_MAC",
            ErrorCode::WrongAccount => "WRONG_ACCOUNT",
            ErrorCode::InvalidContractAddress => "INVALID_CONTRACT_ADDRESS",
            ErrorCode::TerminateFailed => "TERMINATE_FAILED",
        }
    }

    /// The revert message.
    pub const fn message(self) -> &'static str {
        match self {
            ErrorCode::EmptyEmail => "name cannot be empty.",
            ErrorCode::EmptyPassword => "Password cannot be empty.",
            ErrorCode::EmptyDeviceInfo => "deviceInfo cannot be empty.",
            ErrorCode::EmptyMac => "macAddress cannot be empty.",
            ErrorCode::DuplicateUser => "Username already exists",
            ErrorCode::NullCaller => "Caller cannot be the null address.",
            ErrorCode::NotOwner => "Only the owner of the contract can perform this action.",
            ErrorCode::EmptyRole => "role cannot be empty.",
            ErrorCode::EmptyRoleDescription => "roleDescription cannot be empty.",
            ErrorCode::NoSuchUser => "User does not exist.",
            ErrorCode::NoRoleAssigned => "Role is not assigned.",
            ErrorCode::InvalidPassword => "Invalid password.",
            ErrorCode::InvalidDevice => "Invalid device location.",
            ErrorCode::InvalidMac => "Invalid MAC address.",
            ErrorCode::WrongAccount => "This is not your account",
            ErrorCode::InvalidContractAddress => "Invalid contract address",
            ErrorCode::TerminateFailed => "Failed to terminate contract execution",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl core::error::Error for ErrorCode {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error code")]
pub struct UnknownErrorCode;

impl FromStr for ErrorCode {
    type Err = UnknownErrorCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCode::ALL
            .iter()
            .copied()
            .find(|c| c.code() == s)
            .ok_or(UnknownErrorCode)
    }
}
