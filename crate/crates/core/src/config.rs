//! Session configuration: ring parameters, sharing scheme, seeds and party
//! endpoints, loaded from a JSON file shared by all three parties and the
//! client.

use crate::error::{Error, Result};
use crate::prg::Seed;
use crate::ring::RingParams;
use crate::sim::FullSeeds;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedsConfig {
    pub s01: String,
    pub s02: String,
    pub s12: String,
    pub s012: String,
    pub s2: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartyAddr {
    pub id: u8,
    pub host: String,
    pub port: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionConfig {
    /// 8-byte session id, hex encoded.
    pub session_id: String,
    pub ell: u8,
    pub ellx: u8,
    #[serde(default)]
    pub frac_bits: Option<u8>,
    /// `"ass"` or `"rss"`.
    pub sharing: String,
    pub seeds: SeedsConfig,
    pub parties: Vec<PartyAddr>,
    #[serde(default = "default_batch")]
    pub batch: usize,
}

fn default_batch() -> usize {
    1
}

impl SessionConfig {
    pub fn from_json(json: &str) -> Result<SessionConfig> {
        let cfg: SessionConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<SessionConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<RingParams> {
        let frac = self.frac_bits.unwrap_or(self.ellx / 2);
        RingParams::new(self.ell, self.ellx, frac)
    }

    pub fn session_bytes(&self) -> Result<[u8; 8]> {
        let s = self.session_id.trim();
        if s.len() != 16 {
            return Err(Error::Config("session_id must be 8 bytes of hex".into()));
        }
        let mut out = [0u8; 8];
        for (i, b) in out.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Config("invalid session_id hex".into()))?;
        }
        Ok(out)
    }

    pub fn seeds(&self) -> Result<FullSeeds> {
        let s01 = Seed::from_hex(&self.seeds.s01)?;
        let s02 = Seed::from_hex(&self.seeds.s02)?;
        let s12 = Seed::from_hex(&self.seeds.s12)?;
        let client = FullSeeds::client_seed_from(&s01, &s02, &s12);
        Ok(FullSeeds {
            s01,
            s02,
            s12,
            s012: Seed::from_hex(&self.seeds.s012)?,
            s2: Seed::from_hex(&self.seeds.s2)?,
            client,
        })
    }

    pub fn rss(&self) -> bool {
        self.sharing == "rss"
    }

    pub fn addr_of(&self, id: u8) -> Result<&PartyAddr> {
        self.parties
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::Config(format!("no endpoint for party {id}")))
    }

    /// Structural checks plus advisory warnings (returned, not printed).
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let params = self.params()?;
        if self.ell % 8 != 0 {
            return Err(Error::Config("ell must be a multiple of 8 on the wire".into()));
        }
        match self.sharing.as_str() {
            "ass" | "rss" => {}
            other => return Err(Error::Config(format!("unknown sharing scheme {other:?}"))),
        }
        if self.parties.len() != 3 {
            return Err(Error::Config("exactly three parties required".into()));
        }
        for id in 0..3u8 {
            self.addr_of(id)?;
        }
        self.session_bytes()?;
        self.seeds()?;
        if self.batch == 0 {
            return Err(Error::Config("batch must be positive".into()));
        }
        if u32::from(params.ell()) < u32::from(params.ellx()) + 20 {
            warnings.push(format!(
                "ell - ellx = {} < 20: silent truncation failures occur with probability \
                 about 2^{}; widen the ring for production use",
                params.ell() - params.ellx(),
                i32::from(params.ellx()) + 1 - i32::from(params.ell()),
            ));
        }
        Ok(warnings)
    }

    /// A loopback config with freshly derived seeds; used by tests and the
    /// simulator CLI.
    pub fn loopback(ell: u8, ellx: u8, master: &[u8], base_port: u16) -> SessionConfig {
        let seeds = FullSeeds::from_master(master);
        SessionConfig {
            session_id: "0011223344556677".into(),
            ell,
            ellx,
            frac_bits: None,
            sharing: "ass".into(),
            seeds: SeedsConfig {
                s01: seeds.s01.to_hex(),
                s02: seeds.s02.to_hex(),
                s12: seeds.s12.to_hex(),
                s012: seeds.s012.to_hex(),
                s2: seeds.s2.to_hex(),
            },
            parties: (0..3)
                .map(|id| PartyAddr {
                    id,
                    host: "127.0.0.1".into(),
                    port: base_port + u16::from(id),
                })
                .collect(),
            batch: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_validate() {
        let cfg = SessionConfig::loopback(40, 16, b"cfg-test", 9400);
        let json = cfg.to_json();
        let back = SessionConfig::from_json(&json).unwrap();
        assert_eq!(back.ell, 40);
        assert!(back.validate().unwrap().is_empty());
        assert_eq!(back.params().unwrap().frac_bits(), 8);
    }

    #[test]
    fn narrow_ring_warns() {
        let cfg = SessionConfig::loopback(24, 16, b"warn", 9400);
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("ell - ellx"));
    }

    #[test]
    fn bad_configs_rejected() {
        let mut cfg = SessionConfig::loopback(40, 16, b"x", 9400);
        cfg.sharing = "garbled".into();
        assert!(cfg.validate().is_err());
        let mut cfg = SessionConfig::loopback(40, 16, b"x", 9400);
        cfg.session_id = "xyz".into();
        assert!(cfg.validate().is_err());
        let mut cfg = SessionConfig::loopback(40, 16, b"x", 9400);
        cfg.parties.pop();
        assert!(cfg.validate().is_err());
    }
}
