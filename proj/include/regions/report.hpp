#ifndef REGIONS_REPORT_HPP
#define REGIONS_REPORT_HPP

// JSON documents for count results and verification reports.

#include "regions/counter.hpp"
#include "regions/verify.hpp"

#include <nlohmann/json.hpp>

namespace regions {

inline nlohmann::json pattern_to_json(const ActivationPattern& pattern) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& entry : pattern.layers) {
        layers.push_back(entry);
    }
    return layers;
}

/// {count, nodes, pruned, seconds, partial, witnesses?}. The count is a decimal
/// string so that it survives readers without big integers.
inline nlohmann::json count_result_to_json(const CountResult& result) {
    nlohmann::json doc;
    doc["count"] = to_string(result.count);
    doc["nodes"] = result.nodes_explored;
    doc["pruned"] = result.nodes_pruned;
    doc["seconds"] = result.seconds;
    doc["partial"] = result.partial;
    if (result.certified > 0) {
        doc["certified"] = result.certified;
        doc["certification_mismatches"] = result.certification_mismatches;
    }
    if (result.witnesses) {
        auto& list = doc["witnesses"] = nlohmann::json::array();
        for (const auto& w : *result.witnesses) {
            std::vector<double> point(w.point.data(), w.point.data() + w.point.size());
            nlohmann::json item{{"pattern", pattern_to_json(w.pattern)}, {"point", point}};
            if (std::isfinite(w.margin)) {
                item["margin"] = w.margin;
            } else {
                item["margin"] = "unbounded";
            }
            list.push_back(std::move(item));
        }
    }
    return doc;
}

inline nlohmann::json suite_to_json(const SuiteReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    return {{"suite", report.suite}, {"passed", report.passed()}, {"seconds", report.seconds}, {"checks", checks}};
}

} // namespace regions

#endif
