// SPDX-License-Identifier: Apache-2.0
#include "artriage/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace artriage {

namespace {

// Pairs gold and predictions by rendered finding reference.
std::vector<std::pair<std::string, std::string>> pair_labels(
    const std::vector<GoldAnnotation>& gold, const std::vector<PredictedLabel>& pred,
    bool binary) {
    std::map<std::string, SecurityLabel> pred_by_ref;
    for (const auto& p : pred) pred_by_ref[p.ref.render()] = p.label;

    std::vector<std::string> unmatched;
    std::map<std::string, bool> seen_pred;
    for (const auto& [ref, _] : pred_by_ref) seen_pred[ref] = false;

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& g : gold) {
        auto ref = g.ref.render();
        auto it = pred_by_ref.find(ref);
        if (it == pred_by_ref.end()) {
            unmatched.push_back("gold-only: " + ref);
            continue;
        }
        seen_pred[ref] = true;
        auto to_name = [&](SecurityLabel l) {
            return binary ? to_string(label_category(l)) : to_string(l);
        };
        pairs.emplace_back(to_name(g.gold_label), to_name(it->second));
    }
    for (const auto& [ref, used] : seen_pred) {
        if (!used) unmatched.push_back("prediction-only: " + ref);
    }
    if (!unmatched.empty()) {
        std::string msg = "gold/prediction references do not pair:";
        for (const auto& u : unmatched) msg += " [" + u + "]";
        throw PairingError(msg, std::move(unmatched));
    }
    return pairs;
}

MetricsReport score(const std::vector<std::pair<std::string, std::string>>& pairs,
                    const std::vector<std::string>& labels, MetricsMode mode) {
    MetricsReport report;
    report.mode = mode;
    report.confusion.labels = labels;
    const size_t n = labels.size();
    report.confusion.cells.assign(n, std::vector<long>(n, 0));
    auto index_of = [&](const std::string& label) {
        return static_cast<size_t>(
            std::find(labels.begin(), labels.end(), label) - labels.begin());
    };

    long correct = 0;
    for (const auto& [g, p] : pairs) {
        report.confusion.cells[index_of(g)][index_of(p)] += 1;
        if (g == p) ++correct;
    }
    report.accuracy =
        pairs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pairs.size());

    double f1_sum = 0.0;
    long f1_classes = 0;
    for (size_t i = 0; i < n; ++i) {
        ClassMetrics m;
        long tp = report.confusion.cells[i][i];
        long row = 0, col = 0;
        for (size_t j = 0; j < n; ++j) {
            row += report.confusion.cells[i][j];
            col += report.confusion.cells[j][i];
        }
        m.support = row;
        m.precision = col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
        m.recall = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
        // With zero predicted and zero true positives, F1 is defined as 0.
        m.f1 = (m.precision + m.recall) == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        report.per_class[labels[i]] = m;
        if (m.support > 0) {
            f1_sum += m.f1;
            ++f1_classes;
        } else {
            report.zero_support_excluded.push_back(labels[i]);
        }
    }
    report.macro_f1 = f1_classes == 0 ? 0.0 : f1_sum / static_cast<double>(f1_classes);
    return report;
}

} // namespace

MetricsReport binary_metrics(const std::vector<GoldAnnotation>& gold,
                             const std::vector<PredictedLabel>& pred) {
    auto pairs = pair_labels(gold, pred, /*binary=*/true);
    return score(pairs,
                 {to_string(LabelCategory::non_security),
                  to_string(LabelCategory::security_relevant)},
                 MetricsMode::binary);
}

MetricsReport multiclass_metrics(const std::vector<GoldAnnotation>& gold,
                                 const std::vector<PredictedLabel>& pred) {
    auto pairs = pair_labels(gold, pred, /*binary=*/false);
    return score(pairs,
                 {to_string(SecurityLabel::contextual_risk),
                  to_string(SecurityLabel::hardening_recommendation),
                  to_string(SecurityLabel::benign_research_usage),
                  to_string(SecurityLabel::false_positive)},
                 MetricsMode::multiclass);
}

CostRecord cost_summary(const std::vector<AgentTrace>& traces, const PriceConfig& prices,
                        long artifact_count) {
    if (traces.empty()) throw EmptyInputError("cost_summary requires at least one trace");
    if (artifact_count < 1) throw EmptyInputError("artifact_count must be >= 1");
    CostRecord c;
    double seconds = 0.0;
    for (const auto& t : traces) {
        c.input_tokens += t.input_tokens;
        c.output_tokens += t.output_tokens;
        seconds += t.wall_seconds;
    }
    c.total_cost = static_cast<double>(c.input_tokens) * prices.input_price_per_million / 1e6 +
                   static_cast<double>(c.output_tokens) * prices.output_price_per_million / 1e6;
    c.per_finding_cost = c.total_cost / static_cast<double>(traces.size());
    c.per_artifact_cost = c.total_cost / static_cast<double>(artifact_count);
    c.mean_seconds_per_finding = seconds / static_cast<double>(traces.size());
    return c;
}

std::string format_currency(double amount, bool round_up) {
    double cents = amount * 100.0;
    double rounded = round_up ? std::ceil(cents - 1e-9) : std::floor(cents + 0.5);
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "$" << rounded / 100.0;
    return out.str();
}

std::vector<GoldAnnotation> read_gold_ndjson(const std::string& text) {
    std::vector<GoldAnnotation> out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            GoldAnnotation g;
            g.ref = ref_from_json(j);
            auto label = parse_security_label(j.at("gold_label").get<std::string>());
            if (!label) throw ParseError("unknown gold_label");
            g.gold_label = *label;
            g.annotator_note = j.value("annotator_note", std::string{});
            out.push_back(std::move(g));
        } catch (const std::exception& e) {
            throw ParseError("gold line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string write_gold_ndjson(const std::vector<GoldAnnotation>& gold) {
    std::string out;
    for (const auto& g : gold) {
        auto j = ref_to_json(g.ref);
        j["gold_label"] = to_string(g.gold_label);
        j["annotator_note"] = g.annotator_note;
        out += j.dump();
        out += '\n';
    }
    return out;
}

ojson metrics_to_json(const MetricsReport& report) {
    ojson j;
    j["mode"] = report.mode == MetricsMode::binary ? "binary" : "multiclass";
    j["accuracy"] = report.accuracy;
    j["macro_f1"] = report.macro_f1;
    ojson per_class;
    for (const auto& [label, m] : report.per_class) {
        per_class[label] = {{"precision", m.precision},
                            {"recall", m.recall},
                            {"f1", m.f1},
                            {"support", m.support}};
    }
    j["per_class"] = per_class;
    ojson confusion;
    confusion["labels"] = report.confusion.labels;
    confusion["cells"] = report.confusion.cells;
    j["confusion"] = confusion;
    j["zero_support_excluded"] = report.zero_support_excluded;
    return j;
}

std::string confusion_to_text(const ConfusionMatrix& m) {
    size_t width = 12;
    for (const auto& l : m.labels) width = std::max(width, l.size() + 2);
    std::ostringstream out;
    out << std::string(width, ' ') << "| predicted\n";
    out << std::string(width, ' ') << "|";
    for (const auto& l : m.labels) {
        out << " " << l;
    }
    out << "\n";
    for (size_t i = 0; i < m.labels.size(); ++i) {
        std::string row = m.labels[i];
        row.resize(width, ' ');
        out << row << "|";
        for (size_t jcol = 0; jcol < m.labels.size(); ++jcol) {
            std::string cell = std::to_string(m.cells[i][jcol]);
            std::string pad(m.labels[jcol].size() + 1 > cell.size()
                                ? m.labels[jcol].size() + 1 - cell.size()
                                : 1,
                            ' ');
            out << pad << cell;
        }
        out << "\n";
    }
    return out.str();
}

CostRecord cost_from_json(const json& j) {
    CostRecord c;
    c.input_tokens = j.at("input_tokens").get<long>();
    c.output_tokens = j.at("output_tokens").get<long>();
    c.total_cost = j.at("total_cost").get<double>();
    c.per_finding_cost = j.at("per_finding_cost").get<double>();
    c.per_artifact_cost = j.at("per_artifact_cost").get<double>();
    c.mean_seconds_per_finding = j.at("mean_seconds_per_finding").get<double>();
    return c;
}

ojson cost_to_json(const CostRecord& c) {
    ojson j;
    j["input_tokens"] = c.input_tokens;
    j["output_tokens"] = c.output_tokens;
    j["total_cost"] = c.total_cost;
    j["total_cost_display"] = format_currency(c.total_cost);
    j["per_finding_cost"] = c.per_finding_cost;
    j["per_artifact_cost"] = c.per_artifact_cost;
    // Per-artifact figure is displayed rounded up to the next cent.
    j["per_artifact_cost_display"] = format_currency(c.per_artifact_cost, /*round_up=*/true);
    j["mean_seconds_per_finding"] = c.mean_seconds_per_finding;
    return j;
}

} // namespace artriage
