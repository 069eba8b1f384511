use anyhow::Result;
use forge_core::Error;

use crate::args::ReplayArgs;
use crate::runlog::{digest_path, RunRecord};

/// Swap the value of `--out` (either `--out x` or `--out=x`).
fn redirect(args: &[String], out: &str) -> Vec<String> {
    let mut res = Vec::with_capacity(args.len());
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            res.push(a.clone());
            res.push(out.to_owned());
            it.next();
        } else if a.starts_with("--out=") {
            res.push(format!("--out={out}"));
        } else {
            res.push(a.clone());
        }
    }
    res
}

pub fn replay(a: ReplayArgs, run: fn(Vec<String>) -> Result<()>) -> Result<()> {
    let rec = RunRecord::load(&a.run)?;
    if rec.args.first().map(String::as_str) == Some("replay") {
        return Err(Error::invalid("run", "refusing to replay a replay").into());
    }
    for input in &rec.inputs {
        let now = digest_path(&input.path)?;
        if now != input.sha256 {
            if a.force {
                log::warn!("{} changed since the recorded run", input.path.display());
            } else {
                return Err(Error::invalid(
                    "run",
                    format!("input {} changed since the recorded run (use --force)", input.path.display()),
                )
                .into());
            }
        }
    }
    let args = match &a.out {
        Some(out) => redirect(&rec.args, &out.to_string_lossy()),
        None => rec.args.clone(),
    };
    log::info!("replaying: forge {}", args.join(" "));
    run(args)
}

#[cfg(test)]
mod tests {
    use super::redirect;

    #[test]
    fn out_is_replaced() {
        let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(redirect(&v(&["mix", "--out", "a", "--seed", "1"]), "b"), v(&["mix", "--out", "b", "--seed", "1"]));
        assert_eq!(redirect(&v(&["curve", "--out=a"]), "b"), v(&["curve", "--out=b"]));
    }
}
