use sigvol_demo::{decompose_text, explosion_json, shuffle_text, smile_json};

#[test]
fn algebra_operations() {
    assert_eq!(shuffle_text("12", "3").unwrap(), "123 + 132 + 312");
    assert_eq!(decompose_text("212", 0).unwrap(), "21 ⧢ 2 − 2·221");
    assert_eq!(decompose_text("12", 2).unwrap(), "1 ⧢ 2 − 21");
    assert!(decompose_text("", 0).is_err());
    assert!(shuffle_text("1a", "2").is_err());
}

#[test]
fn smile_payload() {
    let out: serde_json::Value = serde_json::from_str(&smile_json(3, -0.5, 1, 500, 20, 3).unwrap()).unwrap();
    assert_eq!(out["points"].as_array().unwrap().len(), 25);
    assert_eq!(out["predicted_martingale"], true);
    assert!(smile_json(3, -0.5, 1, 0, 20, 3).is_err());
}

#[test]
fn explosion_payload() {
    let out: serde_json::Value = serde_json::from_str(&explosion_json(3, -0.5, 6.0, 200, 1).unwrap()).unwrap();
    assert_eq!(out["n_exploded"], 0);
    assert!(explosion_json(3, 2.0, 6.0, 200, 1).is_err());
}
