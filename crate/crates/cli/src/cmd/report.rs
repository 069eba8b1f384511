use anyhow::Result;
use forge_core::report::{
    default_bands, loss_diff_table, read_curve_csv, read_loss_csv, scaling_curve, Significance,
};
use serde_json::json;

use super::{require, write_json, write_text, Ctx};
use crate::args::{CurveArgs, LossdiffArgs};

pub fn lossdiff(ctx: &Ctx, a: LossdiffArgs) -> Result<()> {
    require(&a.baseline)?;
    let baseline = read_loss_csv(&a.baseline)?;
    let mut variants = Vec::new();
    for v in &a.variant {
        require(v)?;
        variants.extend(read_loss_csv(v)?);
    }
    let table = loss_diff_table(&baseline, &variants, a.threshold)?;
    let bands = default_bands();
    super::create_dir(&a.out)?;
    write_text(&a.out.join("lossdiff.csv"), table.to_csv())?;
    write_text(&a.out.join("lossdiff.md"), table.to_markdown(&bands))?;
    write_text(&a.out.join("lossdiff.svg"), table.to_svg(&bands))?;
    write_json(&a.out.join("lossdiff.json"), &table.rows)?;
    let count = |c: Significance| table.rows.iter().filter(|r| r.class == c).count();
    println!(
        "cells {} improvement {} none {} regression {}",
        table.rows.len(),
        count(Significance::Improvement),
        count(Significance::None),
        count(Significance::Regression)
    );
    let mut rec = ctx
        .record("lossdiff")
        .config(&json!({ "threshold": a.threshold }))?
        .input("baseline", &a.baseline)?;
    for v in &a.variant {
        rec = rec.input("variant", v)?;
    }
    rec.write(&a.out)
}

pub fn curve(ctx: &Ctx, a: CurveArgs) -> Result<()> {
    require(&a.points)?;
    let curve = scaling_curve(&read_curve_csv(&a.points)?)?;
    super::create_dir(&a.out)?;
    write_text(&a.out.join("curve.csv"), curve.to_csv())?;
    write_text(&a.out.join("curve.svg"), curve.to_svg())?;
    println!("points {}", curve.points.len());
    ctx.record("curve").input("points", &a.points)?.write(&a.out)
}
