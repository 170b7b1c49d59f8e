#pragma once

// JSON and CSV encodings of reports and result tables. Key order is fixed by
// insertion (ordered_json), numbers are written in shortest round-trip form.

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "penh/demo.hpp"
#include "penh/diagnostics.hpp"
#include "penh/mixture.hpp"
#include "penh/regime.hpp"

namespace penh {

using Json = nlohmann::ordered_json;

inline Json to_json(const PowerEstimate& e) {
    return Json{{"mean", e.mean.value()}, {"se", e.se}, {"reps", e.reps}, {"seed", e.seed}};
}

inline Json to_json(const MomentEstimate& e) {
    return Json{{"mean", e.mean}, {"se", e.se}, {"reps", e.reps}, {"seed", e.seed}};
}

inline Json to_json(const SpikeAlternative& s) {
    return Json{{"coordinate", s.coordinate}, {"magnitude", s.magnitude}, {"n", s.n}, {"d", s.d}};
}

inline Json to_json(const MixtureDiagnostics& m) {
    return Json{{"n", m.n},
                {"d", m.d},
                {"second_moment_minus_one", m.second_moment_minus_one},
                {"dimension_bound", m.dimension_bound},
                {"power_gap_bound", m.power_gap_bound},
                {"within_dimension_bound", m.within_dimension_bound()}};
}

inline Json to_json(const BlindSpotReport& r) {
    return Json{{"test", r.test_name},
                {"coordinate", r.coordinate},
                {"spike", to_json(r.spike)},
                {"power_at_spike", to_json(r.power_at_spike)},
                {"size", to_json(r.size)},
                {"average_spike_power", to_json(r.average_spike_power)},
                {"gap_bound", r.gap_bound},
                {"gap_invariant_holds", r.gap_invariant_holds()},
                {"suggested_enhancement", r.suggested_enhancement}};
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

/// Flat row; also the CSV column order.
inline Json to_json(const ResultRow& r) {
    return Json{{"n", r.n},
                {"d", r.d},
                {"test", r.test},
                {"theta", r.theta},
                {"size", r.size.mean.value()},
                {"size_se", r.size.se},
                {"power", r.power.mean.value()},
                {"power_se", r.power.se},
                {"enhanced_power", r.enhanced_power ? Json(r.enhanced_power->mean.value()) : Json(nullptr)},
                {"enhanced_power_se", r.enhanced_power ? Json(r.enhanced_power->se) : Json(nullptr)},
                {"gap_bound", optional_number(r.gap_bound)},
                {"reps", r.size.reps},
                {"seed", r.size.seed}};
}

inline Json to_json(const ConsistencyPoint& p) {
    return Json{{"n", p.n}, {"d", p.d}, {"criterion", p.criterion}, {"chi2_power", p.chi2_power}};
}

inline Json to_json(const RemainderSummary& s) {
    return Json{{"n", s.n},
                {"d", s.d},
                {"reps", s.reps},
                {"p95_abs_remainder", s.p95_abs_remainder},
                {"max_abs_remainder", s.max_abs_remainder}};
}

inline Json to_json(const NontestabilityPoint& p) { return Json{{"n", p.n}, {"tv_bound", p.tv_bound}}; }

inline Json to_json(const EmbeddingReport& r) {
    Json ks = Json::array();
    for (const auto& k : r.coordinate_ks) ks.push_back(Json{{"statistic", k.statistic}, {"p_value", k.p_value}});
    return Json{{"d1", r.d1},
                {"d2", r.d2},
                {"n", r.n},
                {"reps", r.reps},
                {"seed", r.seed},
                {"coordinate_ks", ks},
                {"min_p_value", r.min_p_value},
                {"ks_level", kKsLevel},
                {"ks_rejects", r.ks_rejects},
                {"exact_tv", r.exact_tv},
                {"first_mean_large", r.first_mean_large},
                {"first_mean_large_se", r.first_mean_large_se},
                {"first_mean_small", r.first_mean_small},
                {"first_mean_small_se", r.first_mean_small_se},
                {"expected_first_mean", r.expected_first_mean},
                {"pulled_back_rejection", to_json(r.pulled_back_rejection)},
                {"direct_rejection", to_json(r.direct_rejection)}};
}

inline Json to_json(const DemoRow& r) {
    return Json{{"n", r.n},
                {"d", r.d},
                {"coordinate", r.coordinate},
                {"gap_bound", r.gap_bound},
                {"size_phi", to_json(r.size_phi)},
                {"power_phi", to_json(r.power_phi)},
                {"size_nu", to_json(r.size_nu)},
                {"power_nu", to_json(r.power_nu)},
                {"size_psi", to_json(r.size_psi)},
                {"power_psi", to_json(r.power_psi)},
                {"exact_size_nu", r.exact_size_nu},
                {"exact_power_nu", r.exact_power_nu},
                {"dominance_violations", r.dominance_violations},
                {"blind_spot_within_gap", r.blind_spot_within_gap},
                {"nu_detects_blind_spot", r.nu_detects_blind_spot},
                {"size_below_one", r.size_below_one},
                {"enhanceable", r.enhanceable()}};
}

inline Json to_json(const DemoReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    return Json{{"test", r.test},
                {"d_rule", r.d_rule},
                {"alpha", r.alpha},
                {"reps", r.reps},
                {"seed", r.seed},
                {"rows", rows},
                {"nu_size_decreasing", r.nu_size_decreasing},
                {"nu_power_increasing", r.nu_power_increasing},
                {"enhanceable", r.enhanceable()}};
}

template <class T>
Json to_json_array(const std::vector<T>& items) {
    Json out = Json::array();
    for (const auto& item : items) out.push_back(to_json(item));
    return out;
}

namespace detail {

inline std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_scalar(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return csv_field(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return fmt_num(v.get<double>());
    return v.dump();
}

inline void flatten(const Json& v, const std::string& prefix, Json& out) {
    if (v.is_object()) {
        for (const auto& [k, child] : v.items()) flatten(child, prefix.empty() ? k : prefix + "." + k, out);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
    } else {
        out[prefix] = v;
    }
}

} // namespace detail

/// Column names of a flattened object, in order.
inline std::vector<std::string> csv_columns(const Json& sample) {
    Json flat = Json::object();
    detail::flatten(sample, "", flat);
    std::vector<std::string> cols;
    for (const auto& [k, v] : flat.items()) cols.push_back(k);
    return cols;
}

/// CSV with a header row and CRLF line ends. Arrays become one row per
/// element; any other value becomes a single row. Nested keys are joined
/// with '.'. `columns` fixes the header (needed for empty tables).
inline std::string to_csv(const Json& value, std::vector<std::string> columns = {}) {
    std::vector<Json> rows;
    const auto add = [&](const Json& item) {
        Json flat = Json::object();
        detail::flatten(item, "", flat);
        rows.push_back(std::move(flat));
    };
    if (value.is_array()) {
        for (const auto& item : value) add(item);
    } else {
        add(value);
    }
    if (columns.empty()) {
        if (rows.empty()) return "";
        for (const auto& [k, v] : rows.front().items()) columns.push_back(k);
    }
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + detail::csv_field(columns[c]);
    out += "\r\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto it = row.find(columns[c]);
            out += (c ? "," : "") + (it != row.end() ? detail::csv_scalar(*it) : std::string());
        }
        out += "\r\n";
    }
    return out;
}

} // namespace penh
