use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error_code::ErrorCode;
use crate::fingerprint::normalize_mac;
use crate::ledger::{AccountAddress, Digest, HashAlgorithm};

pub const NO_ROLE: &str = "NO_ROLE";
pub const NO_DESCRIPTION: &str = "NO_DESCRIPTION";
/// Stands in for password digests in every rendered view.
pub const REDACTED: &str = "«redacted»";

/// One enrolled employee.
///
/// Deliberately not `Serialize`: render through [`RedactedUser`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user_address: AccountAddress,
    pub email: String,
    pub password_hash: Digest,
    pub device_checksum: String,
    pub mac_address: String,
    pub role: String,
    pub role_description: String,
}

impl UserRecord {
    pub fn has_role(&self) -> bool {
        self.role != NO_ROLE
    }

    pub fn redacted(&self) -> RedactedUser<'_> {
        RedactedUser(self)
    }
}

/// Serializable view of a [`UserRecord`] with the password digest masked.
#[derive(Debug, Clone, Copy)]
pub struct RedactedUser<'a>(pub &'a UserRecord);

impl Serialize for RedactedUser<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let u = self.0;
        let mut s = serializer.serialize_struct("UserRecord", 7)?;
        s.serialize_field("user_address", &u.user_address)?;
        s.serialize_field("email", &u.email)?;
        s.serialize_field("password_hash", REDACTED)?;
        s.serialize_field("device_checksum", &u.device_checksum)?;
        s.serialize_field("mac_address", &u.mac_address)?;
        s.serialize_field("role", &u.role)?;
        s.serialize_field("role_description", &u.role_description)?;
        s.end()
    }
}

/// Which guards are live. Everything is on by default; switching one off is
/// only meant for fault-injection runs of the threat harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MfaPolicy {
    /// Compare the device checksum at login.
    pub check_device: bool,
    /// Restrict role assignment and user listing to the contract owner.
    pub owner_guard: bool,
}

impl Default for MfaPolicy {
    fn default() -> Self {
        MfaPolicy { check_device: true, owner_guard: true }
    }
}

/// Registration, role assignment and multi-factor login.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfaContract {
    owner: AccountAddress,
    user_count: u64,
    users: BTreeMap<String, UserRecord>,
    users_list: Vec<String>,
    hash: HashAlgorithm,
    policy: MfaPolicy,
}

fn mac_key(mac: &str) -> String {
    normalize_mac(mac).unwrap_or_else(|| mac.trim().to_ascii_lowercase())
}

impl MfaContract {
    /// The deployer becomes the owner for the contract's lifetime.
    pub fn new(owner: AccountAddress, hash: HashAlgorithm) -> Self {
        Self::with_policy(owner, hash, MfaPolicy::default())
    }

    pub fn with_policy(owner: AccountAddress, hash: HashAlgorithm, policy: MfaPolicy) -> Self {
        MfaContract { owner, user_count: 0, users: BTreeMap::new(), users_list: Vec::new(), hash, policy }
    }

    pub fn owner(&self) -> AccountAddress {
        self.owner
    }

    pub fn user_count(&self) -> u64 {
        self.user_count
    }

    pub fn user(&self, email: &str) -> Option<&UserRecord> {
        self.users.get(email)
    }

    pub fn policy(&self) -> MfaPolicy {
        self.policy
    }

    pub fn password_digest(&self, password: &str) -> Digest {
        self.hash.digest(password.as_bytes())
    }

    fn only_owner(&self, caller: AccountAddress) -> Result<(), ErrorCode> {
        if self.policy.owner_guard && caller != self.owner {
            return Err(ErrorCode::NotOwner);
        }
        Ok(())
    }

    /// Enrolls `email`, binding it to `caller`. The password is stored as a
    /// digest.
    pub fn register(
        &mut self,
        caller: AccountAddress,
        email: &str,
        password: &str,
        device_checksum: &str,
        mac_address: &str,
    ) -> Result<bool, ErrorCode> {
        if email.is_empty() {
            return Err(ErrorCode::EmptyEmail);
        }
        if password.is_empty() {
            return Err(ErrorCode::EmptyPassword);
        }
        let digest = self.password_digest(password);
        self.register_hashed(caller, email, digest, device_checksum, mac_address)
    }

    /// [`MfaContract::register`] with the password already digested. Used
    /// when replaying the ledger, which only ever holds the digest.
    pub fn register_hashed(
        &mut self,
        caller: AccountAddress,
        email: &str,
        password_hash: Digest,
        device_checksum: &str,
        mac_address: &str,
    ) -> Result<bool, ErrorCode> {
        if email.is_empty() {
            return Err(ErrorCode::EmptyEmail);
        }
        if device_checksum.is_empty() {
            return Err(ErrorCode::EmptyDeviceInfo);
        }
        if mac_address.is_empty() {
            return Err(ErrorCode::EmptyMac);
        }
        if caller.is_null() {
            return Err(ErrorCode::NullCaller);
        }
        if self.users.contains_key(email) {
            return Err(ErrorCode::DuplicateUser);
        }
        self.user_count += 1;
        self.users.insert(
            email.into(),
            UserRecord {
                user_address: caller,
                email: email.into(),
                password_hash,
                device_checksum: device_checksum.into(),
                mac_address: mac_key(mac_address),
                role: NO_ROLE.into(),
                role_description: NO_DESCRIPTION.into(),
            },
        );
        self.users_list.push(email.into());
        Ok(true)
    }

    pub fn assign_role(
        &mut self,
        caller: AccountAddress,
        email: &str,
        role: &str,
        role_description: &str,
    ) -> Result<bool, ErrorCode> {
        self.only_owner(caller)?;
        if role.is_empty() {
            return Err(ErrorCode::EmptyRole);
        }
        if role_description.is_empty() {
            return Err(ErrorCode::EmptyRoleDescription);
        }
        let user = self.users.get_mut(email).ok_or(ErrorCode::NoSuchUser)?;
        user.role = role.into();
        user.role_description = role_description.into();
        Ok(true)
    }

    /// Checks every factor in a fixed order and stops at the first mismatch:
    /// existence, role, password, device checksum, MAC, bound account.
    pub fn login(
        &self,
        caller: AccountAddress,
        email: &str,
        password: &str,
        device_checksum: &str,
        mac_address: &str,
    ) -> Result<bool, ErrorCode> {
        if email.is_empty() {
            return Err(ErrorCode::EmptyEmail);
        }
        if password.is_empty() {
            return Err(ErrorCode::EmptyPassword);
        }
        if device_checksum.is_empty() {
            return Err(ErrorCode::EmptyDeviceInfo);
        }
        if mac_address.is_empty() {
            return Err(ErrorCode::EmptyMac);
        }
        let user = self.users.get(email).ok_or(ErrorCode::NoSuchUser)?;
        if !user.has_role() {
            return Err(ErrorCode::NoRoleAssigned);
        }
        if user.password_hash != self.password_digest(password) {
            return Err(ErrorCode::InvalidPassword);
        }
        if self.policy.check_device && user.device_checksum != device_checksum {
            return Err(ErrorCode::InvalidDevice);
        }
        if user.mac_address != mac_key(mac_address) {
            return Err(ErrorCode::InvalidMac);
        }
        if user.user_address != caller {
            return Err(ErrorCode::WrongAccount);
        }
        Ok(true)
    }

    /// All users in registration order. Owner only.
    pub fn get_all_users(&self, caller: AccountAddress) -> Result<Vec<&UserRecord>, ErrorCode> {
        self.only_owner(caller)?;
        Ok(self.users_list.iter().map(|email| &self.users[email]).collect())
    }

    /// Emails in registration order.
    pub fn emails(&self) -> &[String] {
        &self.users_list
    }
}
