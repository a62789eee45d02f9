//! A deliberately weak, centralized directory used as the comparison
//! baseline: anyone inside the boundary is trusted.
//!
//! Login checks the password only. Role edits need no authority, the user
//! listing returns stored digests verbatim and the activity log is a plain
//! vector that any insider can rewrite without trace.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error_code::ErrorCode;
use crate::ledger::{Digest, HashAlgorithm};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectoryEntry {
    pub email: String,
    pub password_hash: Digest,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub time: u64,
    pub actor: String,
    pub action: String,
}

#[derive(Debug, Clone, Default)]
pub struct PerimeterDirectory {
    hash: HashAlgorithm,
    users: BTreeMap<String, DirectoryEntry>,
    log: Vec<LogEntry>,
}

impl PerimeterDirectory {
    pub fn new(hash: HashAlgorithm) -> Self {
        PerimeterDirectory { hash, ..Default::default() }
    }

    fn note(&mut self, time: u64, actor: &str, action: &str) {
        self.log.push(LogEntry { time, actor: actor.to_string(), action: action.to_string() });
    }

    pub fn register(&mut self, email: &str, password: &str, time: u64) -> Result<(), ErrorCode> {
        if self.users.contains_key(email) {
            return Err(ErrorCode::DuplicateUser);
        }
        let entry = DirectoryEntry {
            email: email.to_string(),
            password_hash: self.hash.digest(password.as_bytes()),
            role: String::new(),
        };
        self.users.insert(email.to_string(), entry);
        self.note(time, email, "register");
        Ok(())
    }

    /// `actor` is logged but never checked.
    pub fn assign_role(&mut self, actor: &str, email: &str, role: &str, time: u64) -> Result<(), ErrorCode> {
        let entry = self.users.get_mut(email).ok_or(ErrorCode::NoSuchUser)?;
        entry.role = role.to_string();
        self.note(time, actor, "assignRole");
        Ok(())
    }

    /// Whatever device the request comes from is irrelevant here.
    pub fn login(&mut self, email: &str, password: &str, time: u64) -> Result<(), ErrorCode> {
        let entry = self.users.get(email).ok_or(ErrorCode::NoSuchUser)?;
        if entry.password_hash != self.hash.digest(password.as_bytes()) {
            return Err(ErrorCode::InvalidPassword);
        }
        self.note(time, email, "login");
        Ok(())
    }

    pub fn list_users(&self) -> Vec<DirectoryEntry> {
        self.users.values().cloned().collect()
    }

    pub fn user(&self, email: &str) -> Option<&DirectoryEntry> {
        self.users.get(email)
    }

    /// Privileged sessions never expire in this model.
    pub fn session_active(&self, _granted_at: u64, _now: u64) -> bool {
        true
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn log_mut(&mut self) -> &mut Vec<LogEntry> {
        &mut self.log
    }

    /// Always succeeds: there is nothing to check the log against.
    pub fn audit(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn password_alone_is_enough() {
        let mut d = PerimeterDirectory::new(HashAlgorithm::Sha256);
        d.register("alice@x", "pw", 0).unwrap();
        assert_eq!(d.login("alice@x", "nope", 1), Err(ErrorCode::InvalidPassword));
        assert_eq!(d.login("alice@x", "pw", 2), Ok(()));
    }

    #[test]
    fn anyone_edits_roles_and_sees_hashes() {
        let mut d = PerimeterDirectory::new(HashAlgorithm::Sha256);
        d.register("bob@x", "pw", 0).unwrap();
        d.assign_role("charlie@x", "bob@x", "Admin", 1).unwrap();
        assert_eq!(d.user("bob@x").unwrap().role, "Admin");
        assert_eq!(d.list_users()[0].password_hash, HashAlgorithm::Sha256.digest(b"pw"));
    }

    #[test]
    fn log_rewrites_go_unnoticed() {
        let mut d = PerimeterDirectory::new(HashAlgorithm::Sha256);
        d.register("bob@x", "pw", 0).unwrap();
        d.log_mut().clear();
        assert!(d.audit());
    }
}
