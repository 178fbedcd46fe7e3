// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "artriage/model.hpp"
#include "artriage/reasoning.hpp"

namespace artriage {

struct PairingError : std::runtime_error {
    std::vector<std::string> unmatched;
    PairingError(std::string msg, std::vector<std::string> refs)
        : std::runtime_error(std::move(msg)), unmatched(std::move(refs)) {}
};

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GoldAnnotation {
    FindingRef ref;
    SecurityLabel gold_label = SecurityLabel::false_positive;
    std::string annotator_note;
};

struct PredictedLabel {
    FindingRef ref;
    SecurityLabel label = SecurityLabel::false_positive;
};

struct ConfusionMatrix {
    std::vector<std::string> labels;          // row/column order
    std::vector<std::vector<long>> cells;     // gold row x predicted column
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

enum class MetricsMode { binary, multiclass };

struct MetricsReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::map<std::string, ClassMetrics> per_class;
    ConfusionMatrix confusion;
    MetricsMode mode = MetricsMode::binary;
    // Zero-support classes are excluded from the macro F1 mean and listed here.
    std::vector<std::string> zero_support_excluded;
};

/// Collapses labels to security_relevant / non_security before scoring.
MetricsReport binary_metrics(const std::vector<GoldAnnotation>& gold,
                             const std::vector<PredictedLabel>& pred);

/// Four-label confusion and per-class metrics.
MetricsReport multiclass_metrics(const std::vector<GoldAnnotation>& gold,
                                 const std::vector<PredictedLabel>& pred);

struct PriceConfig {
    double input_price_per_million = 2.50;
    double output_price_per_million = 10.00;
};

struct CostRecord {
    long input_tokens = 0;
    long output_tokens = 0;
    double total_cost = 0.0; // exact, pre-rounding
    double per_finding_cost = 0.0;
    double per_artifact_cost = 0.0;
    double mean_seconds_per_finding = 0.0;

    bool operator==(const CostRecord&) const = default;
};

/// Exact token sums and cost arithmetic over a batch of traces.
CostRecord cost_summary(const std::vector<AgentTrace>& traces, const PriceConfig& prices,
                        long artifact_count);

/// "$X.YZ". Half-up by default; `round_up` ceils to the next cent (used for
/// the per-artifact display figure).
std::string format_currency(double amount, bool round_up = false);

std::vector<GoldAnnotation> read_gold_ndjson(const std::string& text);
std::string write_gold_ndjson(const std::vector<GoldAnnotation>& gold);

ojson metrics_to_json(const MetricsReport& report);
std::string confusion_to_text(const ConfusionMatrix& m);
ojson cost_to_json(const CostRecord& c);
CostRecord cost_from_json(const json& j);

} // namespace artriage
