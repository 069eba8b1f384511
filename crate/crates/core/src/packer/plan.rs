use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// "80K" as 80 × 1024.
pub const DEFAULT_CHUNK_LEN: u64 = 81_920;
pub const BATCH_4M_BINARY: u64 = 4_194_304;
pub const BATCH_4M_DECIMAL: u64 = 4_000_000;

/// Throughput row: wallclock days per 10B training tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub name: String,
    pub model: String,
    pub context: u64,
    pub gpus: u32,
    pub days_per_10b: f64,
}

fn row(name: &str, model: &str, context: u64, gpus: u32, days: f64) -> HardwareProfile {
    HardwareProfile {
        name: name.to_owned(),
        model: model.to_owned(),
        context,
        gpus,
        days_per_10b: days,
    }
}

/// LLaMA-2 7B/13B on 80G A100s with ZeRO-3, FlashAttention 2, gradient
/// checkpointing and CPU offloading.
pub fn builtin_profiles() -> Vec<HardwareProfile> {
    vec![
        row("7b-4k-8xA100", "LLaMA-2 7B", 4_096, 8, 3.0),
        row("7b-80k-8xA100", "LLaMA-2 7B", 81_920, 8, 10.0),
        row("13b-4k-8xA100", "LLaMA-2 13B", 4_096, 8, 5.0),
        row("13b-64k-8xA100", "LLaMA-2 13B", 65_536, 8, 13.0),
        row("7b-4k-16xA100", "LLaMA-2 7B", 4_096, 16, 2.0),
        row("7b-80k-16xA100", "LLaMA-2 7B", 81_920, 16, 7.0),
        row("13b-4k-16xA100", "LLaMA-2 13B", 4_096, 16, 4.0),
        row("13b-64k-16xA100", "LLaMA-2 13B", 65_536, 16, 10.0),
    ]
}

/// Look a profile up by name (case-insensitive); `extra` rows shadow the
/// built-in table.
pub fn find_profile(name: &str, extra: &[HardwareProfile]) -> Option<HardwareProfile> {
    extra
        .iter()
        .cloned()
        .chain(builtin_profiles())
        .find(|p| p.name.eq_ignore_ascii_case(name))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPlan {
    pub token_budget: u64,
    pub batch_tokens: u64,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<HardwareProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_days: Option<f64>,
}

/// `steps = floor(budget / batch)`; days scale linearly with the budget.
pub fn training_plan(
    token_budget: u64,
    batch_tokens: u64,
    profile: Option<&HardwareProfile>,
) -> Result<TrainingPlan> {
    if batch_tokens == 0 {
        return Err(Error::invalid("batch_tokens", "must be positive"));
    }
    Ok(TrainingPlan {
        token_budget,
        batch_tokens,
        steps: token_budget / batch_tokens,
        estimated_days: profile.map(|p| token_budget as f64 / 1e10 * p.days_per_10b),
        profile: profile.cloned(),
    })
}

/// Parse counts like `5e9`, `4000000`, `80K`, `4M`, `5B`. Suffixes K, M,
/// G/B and T are powers of 1024 when `binary` is set and of 1000 otherwise.
pub fn parse_count(s: &str, binary: bool) -> Result<u64> {
    let bad = || Error::invalid("count", format!("cannot parse {s:?}"));
    let s = s.trim().replace('_', "");
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let (num, mult) = match s.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some(c @ ('K' | 'M' | 'G' | 'B' | 'T')) => {
            let exp = match c {
                'K' => 1,
                'M' => 2,
                'G' | 'B' => 3,
                _ => 4,
            };
            let base: u64 = if binary { 1024 } else { 1000 };
            (&s[..s.len() - 1], base.pow(exp))
        }
        _ => (s.as_str(), 1),
    };
    if let Ok(n) = num.parse::<u64>() {
        return n.checked_mul(mult).ok_or_else(bad);
    }
    let x: f64 = num.parse().map_err(|_| bad())?;
    let v = x * mult as f64;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(bad());
    }
    Ok(v as u64)
}
