//! Regenerates the bundled fan fixtures in fans/.
use serde_json::json;
use toric_stacks::fan_io::{emit_fan_file, FanFile};
use toric_stacks::raised_heights::anticanonical;
use toric_stacks::stacky_fan::known_fans::*;
use toric_stacks::stacky_fan::StackyFan;

fn sidecar(name: &str, fan: &StackyFan) -> String {
    let k = anticanonical(fan);
    let sectors: Vec<_> = fan
        .sectors()
        .iter()
        .map(|s| {
            json!({
                "y": s.y.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "g": s.g,
                "coords": s.coords.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "age": s.age.to_string(),
                "untwisted": s.untwisted,
                "label": s.label(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "name": name,
        "sectors": sectors,
        "minus_k": {
            "ray": k.ray.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "sector": k.sector.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }
    }))
    .unwrap()
}

fn main() {
    std::fs::create_dir_all("fans").unwrap();
    for (name, fan) in [
        ("p1", p1()),
        ("p12", p12()),
        ("p23", p23()),
        ("p2", p2()),
        ("p1xbmu2", p1xbmu2()),
    ] {
        let file = FanFile::from_fan(name, &fan);
        std::fs::write(format!("fans/{name}.json"), emit_fan_file(&file) + "\n").unwrap();
        std::fs::write(format!("fans/{name}.sectors.json"), sidecar(name, &fan) + "\n").unwrap();
    }
    // A structurally fine but geometrically incomplete fan for the failure path.
    let incomplete = json!({
        "name": "incomplete",
        "rig_rank": 1,
        "torsion_orders": [],
        "rays": [{"id": "plus", "b": [1]}],
        "max_cones": [["plus"]]
    });
    std::fs::write(
        "fans/incomplete.json",
        serde_json::to_string_pretty(&incomplete).unwrap() + "\n",
    )
    .unwrap();
    println!("fixtures written");
}
