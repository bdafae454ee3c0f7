//! Browser bindings: the rho sweep, lens cell counts and the octagon bounding chain.
//! Every export returns a JSON string so the page needs no generated type glue.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use rhoforge::bigint_to_json as big;
use rhoforge::fingroup::FiniteAbelianGroup;
use rhoforge::gcp::octagon;
use rhoforge::lensrho::{lens_count, rho_atiyah_bott, rho_lower_bound, rho_lower_bound_check, LensSpec};
use rhoforge::towers::{bounding_chain_from_polytopes, BoundingOptions};

/// Keeps the demo responsive; a Z_5 octagon tower already has 3750 cells.
const MAX_OCTAGON_ORDER: u64 = 5;
const MAX_SWEEP_ROWS: u64 = 5000;
const MAX_LENS_CELLS: u128 = 200_000;

pub fn rho_sweep_value(d: u32, from: u64, to: u64) -> Result<Value, String> {
    if from < 2 || to < from || to - from >= MAX_SWEEP_ROWS {
        return Err(format!("need 2 <= from <= to with at most {MAX_SWEEP_ROWS} rows"));
    }
    let rows: Vec<Value> = (from..=to)
        .map(|n| {
            let s = LensSpec::new(n, d);
            let rho = rho_atiyah_bott(s).map_err(|e| e.to_string())?;
            let check = rho_lower_bound_check(s).map_err(|e| e.to_string())?;
            Ok(json!({"N": n, "rho": rho, "lower_bound": rho_lower_bound(s), "outcome": check.as_str()}))
        })
        .collect::<Result<_, String>>()?;
    Ok(json!({"d": d, "rows": rows}))
}

pub fn lens_counts_value(n: u64, d: u32) -> Result<Value, String> {
    // the join has about (3N)^d cells before the quotient
    let estimate = (3 * n as u128).saturating_pow(d);
    if estimate > MAX_LENS_CELLS * n as u128 {
        return Err(format!("L({n}; d = {d}) is too large for the demo"));
    }
    let c = lens_count(LensSpec::new(n, d)).map_err(|e| e.to_string())?;
    Ok(json!({"N": n, "d": d, "dimension": 2 * d - 1, "f_vector": c.f_vector, "total": c.total, "top": c.top}))
}

pub fn octagon_chain_value(order: u64) -> Result<Value, String> {
    if !(2..=MAX_OCTAGON_ORDER).contains(&order) {
        return Err(format!("group order must be in 2..={MAX_OCTAGON_ORDER}"));
    }
    let g = FiniteAbelianGroup::cyclic(order).map_err(|e| e.to_string())?;
    let x = g.generator(0);
    let p = octagon(&g, &x, &x, &x, &x).map_err(|e| e.to_string())?;
    let b = bounding_chain_from_polytopes(&g, 2, std::slice::from_ref(&p), BoundingOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "group": g.to_string(),
        "cycle": p.chain_of().to_json_value(),
        "N": big(&b.multiplicity),
        "identity_holds": b.identity_holds,
        "shadow_is_zero": b.shadow.is_zero(),
        "complexity": big(&b.complexity()),
        "bound": big(&b.complexity_bound(&g)),
        "tower_cells": b.polytopes.iter().map(|s| s.tower_cells).sum::<usize>(),
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rho_sweep(d: u32, from: u32, to: u32) -> Result<String, JsError> {
    to_js(rho_sweep_value(d, from.into(), to.into()))
}

#[wasm_bindgen]
pub fn lens_counts(n: u32, d: u32) -> Result<String, JsError> {
    to_js(lens_counts_value(n.into(), d))
}

#[wasm_bindgen]
pub fn octagon_chain(order: u32) -> Result<String, JsError> {
    to_js(octagon_chain_value(order.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows() {
        let v = rho_sweep_value(2, 3, 10).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0]["outcome"], "out-of-hypothesis");
        assert_eq!(rows[1]["outcome"], "holds");
        assert!(rho_sweep_value(2, 1, 10).is_err());
    }

    #[test]
    fn lens() {
        let v = lens_counts_value(5, 2).unwrap();
        assert_eq!(v["total"], 24);
        assert!(lens_counts_value(2, 2).is_err());
        assert!(lens_counts_value(50, 6).is_err());
    }

    #[test]
    fn octagon_over_z2() {
        let v = octagon_chain_value(2).unwrap();
        assert_eq!(v["N"], 16);
        assert_eq!(v["identity_holds"], true);
        assert!(octagon_chain_value(9).is_err());
    }
}
