//! Per-model token pricing with a context-size tier, in exact decimals.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::GatewayError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRates {
    pub input_rate_low: Decimal,
    pub output_rate_low: Decimal,
    pub input_rate_high: Decimal,
    pub output_rate_high: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricingTable {
    #[serde(default = "default_currency")]
    pub currency: String,
    /// Rates are quoted per this many tokens.
    pub per_tokens: u64,
    /// Prompts with more input tokens than this use the high tier.
    pub tier_boundary: u64,
    pub models: BTreeMap<String, ModelRates>,
}

fn default_currency() -> String {
    "USD".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceTier {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub model: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub tier: PriceTier,
    pub total_cost: Decimal,
}

impl PricingTable {
    /// Prices of the seven multimodal models studied, per 1M tokens.
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../assets/pricing.json")).expect("bundled pricing is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, GatewayError> {
        let table: PricingTable =
            serde_json::from_str(text).map_err(|e| GatewayError::Config(format!("pricing: {e}")))?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.per_tokens == 0 {
            return Err(GatewayError::Config("pricing: per_tokens must be positive".into()));
        }
        for (name, r) in &self.models {
            let rates = [
                r.input_rate_low,
                r.output_rate_low,
                r.input_rate_high,
                r.output_rate_high,
            ];
            if rates.iter().any(Decimal::is_sign_negative) {
                return Err(GatewayError::Config(format!("pricing: negative rate for {name}")));
            }
            if r.input_rate_high < r.input_rate_low || r.output_rate_high < r.output_rate_low {
                return Err(GatewayError::Config(format!(
                    "pricing: high tier cheaper than low tier for {name}"
                )));
            }
        }
        Ok(())
    }
}

pub fn estimate_cost(
    input_tokens: u64,
    output_tokens: u64,
    model: &str,
    table: &PricingTable,
) -> Result<CostEstimate, GatewayError> {
    let rates = table
        .models
        .get(model)
        .ok_or_else(|| GatewayError::UnknownModel(model.to_string()))?;
    let tier = if input_tokens > table.tier_boundary {
        PriceTier::High
    } else {
        PriceTier::Low
    };
    let (rate_in, rate_out) = match tier {
        PriceTier::Low => (rates.input_rate_low, rates.output_rate_low),
        PriceTier::High => (rates.input_rate_high, rates.output_rate_high),
    };
    let total = (Decimal::from(input_tokens) * rate_in + Decimal::from(output_tokens) * rate_out)
        / Decimal::from(table.per_tokens);
    Ok(CostEstimate {
        model: model.to_string(),
        input_tokens,
        output_tokens,
        tier,
        total_cost: total.normalize(),
    })
}
