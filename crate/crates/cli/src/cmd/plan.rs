use anyhow::{Context, Result};
use forge_core::packer::{find_profile, parse_count, training_plan, HardwareProfile};
use forge_core::Error;
use serde::Deserialize;

use super::{read_text, require, write_json, Ctx};
use crate::args::PlanArgs;

#[derive(Deserialize)]
struct ProfileFile {
    #[serde(default)]
    profile: Vec<HardwareProfile>,
}

/// `10.0`, `6.5`, `0.3`: at least one decimal, no float noise.
fn days(d: f64) -> String {
    let s = format!("{:.6}", d);
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_owned()
    }
}

pub fn plan(ctx: &Ctx, a: PlanArgs) -> Result<()> {
    let binary = !a.decimal;
    let tokens = parse_count(&a.tokens, binary)?;
    let batch = parse_count(&a.batch, binary)?;
    let extra = match &a.profiles {
        Some(p) => {
            require(p)?;
            let f: ProfileFile = toml::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?;
            f.profile
        }
        None => Vec::new(),
    };
    let profile = match &a.profile {
        Some(name) => Some(
            find_profile(name, &extra).ok_or_else(|| Error::invalid("profile", format!("unknown profile {name}")))?,
        ),
        None => None,
    };
    let plan = training_plan(tokens, batch, profile.as_ref())?;
    println!("steps {}", plan.steps);
    println!("token_budget {}", plan.token_budget);
    println!("batch_tokens {}", plan.batch_tokens);
    if let (Some(p), Some(d)) = (&plan.profile, plan.estimated_days) {
        println!("profile {}", p.name);
        println!("days {}", days(d));
    }
    if let Some(out) = &a.out {
        super::create_dir(out)?;
        write_json(&out.join("plan.json"), &plan)?;
        let mut rec = ctx.record("plan").config(&plan)?;
        if let Some(p) = &a.profiles {
            rec = rec.input("profiles", p)?;
        }
        rec.write(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::days;

    #[test]
    fn day_formatting() {
        assert_eq!(days(10.0), "10.0");
        assert_eq!(days(5.0), "5.0");
        assert_eq!(days(6.5), "6.5");
        assert_eq!(days(0.1 * 3.0), "0.3");
    }
}
