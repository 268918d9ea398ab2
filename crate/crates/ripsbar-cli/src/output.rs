use ripsbar::reduce::{PersistenceDiagram, Reduced};
use serde_json::json;

fn death_str(death: f64) -> String {
    if death.is_infinite() {
        "inf".to_string()
    } else {
        format!("{death}")
    }
}

/// `dim,birth,death` rows, `inf` for essential classes.
pub fn diagram_csv(diagram: &PersistenceDiagram) -> String {
    let mut out = String::from("dim,birth,death\n");
    for p in &diagram.pairs {
        out.push_str(&format!("{},{},{}\n", p.dim, p.birth, death_str(p.death)));
    }
    out
}

/// JSON mirror of the CSV with simplex bookkeeping, labels where the input
/// provided them, and optional generators. External indices are 1-based.
pub fn diagram_json(reduced: &Reduced, generators: bool) -> anyhow::Result<serde_json::Value> {
    let labels = reduced.complex.filtration.labels.clone();
    let name = |v: usize| -> serde_json::Value {
        match &labels {
            Some(l) => json!(l[v]),
            None => json!(v + 1),
        }
    };
    let gens = if generators {
        Some(reduced.generators()?)
    } else {
        None
    };
    let pairs: Vec<serde_json::Value> = reduced
        .diagram
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut obj = json!({
                "dim": p.dim,
                "birth": p.birth,
                "death": if p.death.is_infinite() {
                    serde_json::Value::Null
                } else {
                    json!(p.death)
                },
            });
            if let Some(gens) = &gens {
                let g = gens.iter().find(|g| g.pair_index == i).expect("one generator per pair");
                let chain: Vec<Vec<serde_json::Value>> = g
                    .simplices
                    .iter()
                    .map(|s| s.iter().map(|&v| name(v)).collect())
                    .collect();
                obj["generator"] = json!(chain);
            }
            obj
        })
        .collect();
    Ok(json!({ "pairs": pairs }))
}

/// `t,betti` rows of the step function.
pub fn betti_csv(curve: &[(f64, usize)]) -> String {
    let mut out = String::from("t,betti\n");
    for (t, b) in curve {
        out.push_str(&format!("{t},{b}\n"));
    }
    out
}
