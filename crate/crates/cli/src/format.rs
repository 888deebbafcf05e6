//! Number formatting shared by every report.

use serde_json::{json, Map, Value};

/// `x` with 10 significant digits, in plain notation unless very large or small.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // the exponent after rounding to 10 digits, so 9.99999999999 counts as 10
    let scientific = format!("{x:.9e}");
    let exponent: i32 = scientific
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if !(-5..15).contains(&exponent) {
        return scientific;
    }
    let decimals = (9 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Full binary value of `x`: the shortest round-trip decimal and the raw bits.
pub fn ieee(x: f64) -> Value {
    json!({ "decimal": format!("{x:?}"), "bits": format!("{:#018x}", x.to_bits()) })
}

/// Adds an `"ieee"` object for the named fields to a serialized report.
pub fn with_ieee(mut value: Value, fields: &[(&str, f64)]) -> Value {
    let mut bits = Map::new();
    for (name, x) in fields {
        bits.insert((*name).to_string(), ieee(*x));
    }
    if let Value::Object(map) = &mut value {
        map.insert("ieee".to_string(), Value::Object(bits));
    }
    value
}

pub fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

pub fn prefix(digits: &[u32]) -> String {
    let inner: Vec<String> = digits.iter().map(u32::to_string).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(2.0), "2.000000000");
        assert_eq!(sig10(2.2618595071429148), "2.261859507");
        assert_eq!(sig10(0.36907024642854), "0.3690702464");
        assert_eq!(sig10(9.99999999999), "10.00000000");
        assert_eq!(sig10(-1.5), "-1.500000000");
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(1.0e-7), "1.000000000e-7");
        assert_eq!(sig10(123456.0), "123456.0000");
    }

    #[test]
    fn ieee_fields_round_trip() {
        let x = 2.0f64.ln() / 3.0f64.ln();
        let value = ieee(x);
        let bits =
            u64::from_str_radix(value["bits"].as_str().unwrap().trim_start_matches("0x"), 16)
                .unwrap();
        assert_eq!(f64::from_bits(bits), x);
        assert_eq!(
            value["decimal"].as_str().unwrap().parse::<f64>().unwrap(),
            x
        );
    }
}
