//! Browser bindings for the evaluation engine.
//!
//! Each exported function is a thin wrapper over a plain Rust function in
//! [`ops`], so the logic is tested natively and the page only sees strings.

use wasm_bindgen::prelude::*;

pub mod ops {
    use pesto_core::evaluation::normalize as normalize_values;
    use pesto_core::{Dataset, Direction, EvaluationModel};

    /// The bundled OSSPAL model, pretty-printed.
    pub fn default_config() -> String {
        EvaluationModel::osspal().to_json_pretty()
    }

    /// A small three-candidate dataset for trying the page out.
    pub fn sample_csv() -> &'static str {
        include_str!("../../core/tests/data/three_candidates.csv")
    }

    fn model(config: &str) -> Result<EvaluationModel, String> {
        if config.trim().is_empty() {
            Ok(EvaluationModel::osspal())
        } else {
            EvaluationModel::from_json_str(config).map_err(|e| e.to_string())
        }
    }

    /// Scores `csv` under `config` (blank: OSSPAL). A non-blank `category`
    /// restricts the result to that block, as `pesto compare --category` does.
    pub fn compare(csv: &str, config: &str, category: &str) -> Result<String, String> {
        let dataset = Dataset::read_from(csv.as_bytes()).map_err(|e| e.to_string())?;
        let model = model(config)?;
        let result = pesto_core::evaluation::score_overall(&model, &dataset);
        let result = match category.trim() {
            "" => result,
            name => result.only_category(name).ok_or_else(|| {
                format!(
                    "unknown category {name:?}; valid categories: {}",
                    model.category_names().join(", ")
                )
            })?,
        };
        Ok(result.to_json())
    }

    /// Normalizes a JSON array of numbers (`null` for missing) onto [0, 1].
    pub fn normalize(values: &str, direction: &str) -> Result<String, String> {
        let values: Vec<Option<f64>> =
            serde_json::from_str(values).map_err(|e| format!("expected a JSON array of numbers or null: {e}"))?;
        let direction: Direction = serde_json::from_value(serde_json::Value::String(direction.into()))
            .map_err(|_| format!("direction must be higher_better or lower_better, got {direction:?}"))?;
        Ok(serde_json::to_string(&normalize_values(&values, direction)).expect("floats serialize"))
    }

    /// Validates a model and returns its canonical form.
    pub fn check_config(config: &str) -> Result<String, String> {
        EvaluationModel::from_json_str(config).map(|m| m.to_json_pretty()).map_err(|e| e.to_string())
    }
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = defaultConfig)]
pub fn default_config() -> String {
    ops::default_config()
}

#[wasm_bindgen(js_name = sampleCsv)]
pub fn sample_csv() -> String {
    ops::sample_csv().to_string()
}

#[wasm_bindgen]
pub fn compare(csv: &str, config: &str, category: &str) -> Result<String, JsError> {
    js(ops::compare(csv, config, category))
}

#[wasm_bindgen]
pub fn normalize(values: &str, direction: &str) -> Result<String, JsError> {
    js(ops::normalize(values, direction))
}

#[wasm_bindgen(js_name = checkConfig)]
pub fn check_config(config: &str) -> Result<String, JsError> {
    js(ops::check_config(config))
}
