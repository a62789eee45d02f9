use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 20-byte account identifier, rendered as `0x` plus 40 lowercase hex
/// digits. The all-zero value is the null address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AccountAddress([u8; 20]);

impl AccountAddress {
    pub const NULL: AccountAddress = AccountAddress([0; 20]);

    pub const fn new(bytes: [u8; 20]) -> Self {
        AccountAddress(bytes)
    }

    /// Address whose last eight bytes hold `n` big-endian. Handy for
    /// simulated nodes.
    pub const fn from_index(n: u64) -> Self {
        let mut bytes = [0u8; 20];
        let be = n.to_be_bytes();
        let mut i = 0;
        while i < 8 {
            bytes[12 + i] = be[i];
            i += 1;
        }
        AccountAddress(bytes)
    }

    pub fn is_null(&self) -> bool {
        self.0 == [0; 20]
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }
}

impl fmt::Display for AccountAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0x")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AccountAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("address must be 0x followed by 40 hex digits")]
pub struct ParseAddressError;

impl FromStr for AccountAddress {
    type Err = ParseAddressError;

    /// Accepts mixed case, as wallets print checksummed addresses.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex_part = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .ok_or(ParseAddressError)?;
        let mut bytes = [0u8; 20];
        hex::decode_to_slice(hex_part, &mut bytes).map_err(|_| ParseAddressError)?;
        Ok(AccountAddress(bytes))
    }
}

impl Serialize for AccountAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AccountAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn renders_lowercase_with_prefix() {
        let addr: AccountAddress = "0xf39Fd6e51aad88F6F4ce6aB8827279cfffB92266".parse().unwrap();
        assert_eq!(addr.to_string(), "0xf39fd6e51aad88f6f4ce6ab8827279cfffb92266");
        assert_eq!(addr.to_string().len(), 42);
    }

    #[test]
    fn null_sentinel() {
        assert!(AccountAddress::NULL.is_null());
        assert_eq!(
            AccountAddress::NULL.to_string(),
            "0x0000000000000000000000000000000000000000"
        );
        assert!(!AccountAddress::from_index(1).is_null());
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!("0x1234".parse::<AccountAddress>().is_err());
        assert!("f39fd6e51aad88f6f4ce6ab8827279cfffb92266".parse::<AccountAddress>().is_err());
        assert!("0xzz9fd6e51aad88f6f4ce6ab8827279cfffb92266".parse::<AccountAddress>().is_err());
    }
}
