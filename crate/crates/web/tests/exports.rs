use serde_json::Value;
use twdecomp_web::{analyze_json, decompose_json, ep_json};

fn grid_text(n: usize) -> String {
    let mut s = String::new();
    for i in 0..n {
        for j in 0..n {
            let v = i * n + j;
            if j + 1 < n {
                s.push_str(&format!("{v} {}\n", v + 1));
            }
            if i + 1 < n {
                s.push_str(&format!("{v} {}\n", v + n));
            }
        }
    }
    s
}

fn all_ok(v: &Value) -> bool {
    let checks = v["checks"].as_array().unwrap();
    !checks.is_empty() && checks.iter().all(|c| c[1] == true)
}

#[test]
fn analyze_cycle_with_chord() {
    let v: Value = serde_json::from_str(&analyze_json("1 2\n2 3\n3 4\n4 1\n1 3\n", false).unwrap()).unwrap();
    assert!(all_ok(&v));
    assert_eq!(v["report"]["outcome"]["analysis"]["treewidth"]["upper"], 2);
}

#[test]
fn decompose_grid_in_page() {
    let v: Value = serde_json::from_str(&decompose_json(&grid_text(12), true, 2, 2, 1, 0).unwrap()).unwrap();
    assert!(all_ok(&v));
    assert!(v["report"]["outcome"]["result"]["subgraphs"].as_array().unwrap().len() >= 2);
}

#[test]
fn ep_triangle() {
    let v: Value = serde_json::from_str(&ep_json("1 2\n2 3\n3 1\n", false, 1, 0).unwrap()).unwrap();
    assert!(all_ok(&v));
    assert!(v["report"]["outcome"]["outcome"]["branch"].get("Packing").is_some());
}

#[test]
fn bad_input_is_an_error() {
    assert!(analyze_json("1 x\n", false).is_err());
    assert!(decompose_json(&grid_text(4), true, 0, 2, 1, 0).is_err());
    assert!(decompose_json(&grid_text(4), true, 1, 2, 3, 0).is_err());
    assert!(analyze_json(&grid_text(21), true).is_err());
}
