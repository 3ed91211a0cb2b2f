#include "revkin/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace revkin::io {

using ordered_json = nlohmann::ordered_json;

namespace {

double require_number(const ordered_json& node, const char* key, const std::string& where) {
    if (!node.contains(key) || !node[key].is_number()) {
        throw ValidationError(where + ": missing or non-numeric field \"" + key + "\"");
    }
    return node[key].get<double>();
}

ordered_json parse(const std::string& text, const std::string& what) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

ordered_json configuration_json(const Configuration& config) {
    ordered_json terms = ordered_json::array();
    for (const auto& term : config.input().terms()) {
        terms.push_back({{"lambda", term.lambda}, {"mu", term.mu}});
    }
    ordered_json regions = ordered_json::array();
    for (const auto& region : config.regions()) {
        regions.push_back({{"id", region.id},
                           {"K1", region.params.K1},
                           {"k2", region.params.k2},
                           {"k3", region.params.k3},
                           {"k4", region.params.k4}});
    }
    return ordered_json{{"input", {{"terms", terms}}}, {"regions", regions}};
}

}  // namespace

Configuration configuration_from_json(const std::string& text) {
    const ordered_json root = parse(text, "configuration");
    if (!root.is_object() || !root.contains("input") || !root.contains("regions")) {
        throw ValidationError("configuration: need top-level \"input\" and \"regions\"");
    }
    const auto& input_node = root["input"];
    if (!input_node.is_object() || !input_node.contains("terms") ||
        !input_node["terms"].is_array()) {
        throw ValidationError("configuration: \"input.terms\" must be an array");
    }
    std::vector<PolyexpTerm> terms;
    for (const auto& term_node : input_node["terms"]) {
        PolyexpTerm term;
        term.lambda = require_number(term_node, "lambda", "input term");
        term.mu = require_number(term_node, "mu", "input term");
        terms.push_back(term);
    }
    if (!root["regions"].is_array()) {
        throw ValidationError("configuration: \"regions\" must be an array");
    }
    std::vector<Region> regions;
    for (const auto& region_node : root["regions"]) {
        if (!region_node.contains("id") || !region_node["id"].is_string()) {
            throw ValidationError("region: missing string field \"id\"");
        }
        Region region;
        region.id = region_node["id"].get<std::string>();
        const std::string where = "region " + region.id;
        region.params.K1 = require_number(region_node, "K1", where);
        region.params.k2 = require_number(region_node, "k2", where);
        region.params.k3 = require_number(region_node, "k3", where);
        region.params.k4 = require_number(region_node, "k4", where);
        regions.push_back(std::move(region));
    }
    return Configuration(std::move(regions), PolyexpInput(std::move(terms)));
}

Configuration read_configuration(const std::filesystem::path& path) {
    return configuration_from_json(read_text(path));
}

std::string configuration_to_json(const Configuration& config) {
    return configuration_json(config).dump(2) + "\n";
}

void write_configuration(const Configuration& config, const std::filesystem::path& path) {
    write_text_atomic(configuration_to_json(config), path);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string tac_table_to_csv(const TacTable& table) {
    std::string out = "region_id,time_min,value\n";
    for (const auto& curve : table.curves) {
        for (std::size_t l = 0; l < table.time_grid.size(); ++l) {
            out += curve.region_id;
            out += ',';
            out += format_double(table.time_grid[l]);
            out += ',';
            out += format_double(curve.values[l]);
            out += '\n';
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ValidationError(where + ": bad number \"" + text + "\"");
    }
}

}  // namespace

TacTable tac_table_from_csv(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    if (!std::getline(stream, line) || split_csv_line(line) !=
            std::vector<std::string>{"region_id", "time_min", "value"}) {
        throw ValidationError("tac csv: expected header region_id,time_min,value");
    }
    TacTable table;
    std::size_t cursor = 0;  // position within the current curve's grid
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw ValidationError("tac csv: expected 3 fields, got line \"" + line + "\"");
        }
        const double t = parse_double(fields[1], "tac csv");
        const double v = parse_double(fields[2], "tac csv");
        if (table.curves.empty() || table.curves.back().region_id != fields[0]) {
            for (const auto& curve : table.curves) {
                if (curve.region_id == fields[0]) {
                    throw ValidationError("tac csv: region " + fields[0] +
                                          " appears in non-contiguous blocks");
                }
            }
            table.curves.push_back({fields[0], {}});
            cursor = 0;
        }
        if (table.curves.size() == 1) {
            table.time_grid.push_back(t);
        } else {
            if (cursor >= table.time_grid.size() || table.time_grid[cursor] != t) {
                throw ValidationError("tac csv: time grid mismatch for region " + fields[0]);
            }
        }
        table.curves.back().values.push_back(v);
        ++cursor;
    }
    table.validate();
    return table;
}

void write_tac_table(const TacTable& table, const std::filesystem::path& path) {
    write_text_atomic(tac_table_to_csv(table), path);
}

TacTable read_tac_table(const std::filesystem::path& path) {
    return tac_table_from_csv(read_text(path));
}

std::string wb_samples_to_csv(const std::vector<WbSample>& samples) {
    std::string out = "time_min,cwb\n";
    for (const auto& sample : samples) {
        out += format_double(sample.time);
        out += ',';
        out += format_double(sample.value);
        out += '\n';
    }
    return out;
}

std::vector<WbSample> wb_samples_from_csv(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    if (!std::getline(stream, line) ||
        split_csv_line(line) != std::vector<std::string>{"time_min", "cwb"}) {
        throw ValidationError("whole-blood csv: expected header time_min,cwb");
    }
    std::vector<WbSample> samples;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ValidationError("whole-blood csv: expected 2 fields, got \"" + line + "\"");
        }
        samples.push_back({parse_double(fields[0], "whole-blood csv"),
                           parse_double(fields[1], "whole-blood csv")});
    }
    return samples;
}

void write_wb_samples(const std::vector<WbSample>& samples, const std::filesystem::path& path) {
    write_text_atomic(wb_samples_to_csv(samples), path);
}

std::vector<WbSample> read_wb_samples(const std::filesystem::path& path) {
    return wb_samples_from_csv(read_text(path));
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    std::string out = "time_min,cf,cb,ct\n";
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        out += format_double(trajectory.times[i]);
        out += ',';
        out += format_double(trajectory.cf[i]);
        out += ',';
        out += format_double(trajectory.cb[i]);
        out += ',';
        out += format_double(trajectory.cf[i] + trajectory.cb[i]);
        out += '\n';
    }
    return out;
}

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
    write_text_atomic(trajectory_to_csv(trajectory), path);
}

std::string expsum_to_json(const ExpPolySum& sum) {
    ordered_json terms = ordered_json::array();
    for (const auto& term : sum.terms) {
        terms.push_back({{"exponent", term.exponent}, {"coeffs", term.coeffs}});
    }
    return ordered_json{{"terms", terms}}.dump(2) + "\n";
}

ExpPolySum expsum_from_json(const std::string& text) {
    const ordered_json root = parse(text, "expsum");
    if (!root.contains("terms") || !root["terms"].is_array()) {
        throw ValidationError("expsum: need a \"terms\" array");
    }
    ExpPolySum sum;
    for (const auto& node : root["terms"]) {
        ExpPolyTerm term;
        term.exponent = require_number(node, "exponent", "expsum term");
        if (!node.contains("coeffs") || !node["coeffs"].is_array()) {
            throw ValidationError("expsum term: need a \"coeffs\" array");
        }
        for (const auto& c : node["coeffs"]) {
            if (!c.is_number()) throw ValidationError("expsum term: non-numeric coefficient");
            term.coeffs.push_back(c.get<double>());
        }
        sum.terms.push_back(std::move(term));
    }
    return sum;
}

namespace {

ordered_json witness_json(const Witness& witness) {
    return {{"label", witness.label}, {"region_ids", witness.region_ids}};
}

ordered_json richness_json(const RichnessReport& report) {
    ordered_json witnesses = ordered_json::array();
    for (const auto& witness : report.witnesses) witnesses.push_back(witness_json(witness));
    return {{"satisfied", report.satisfied},
            {"distinct_k34_count", report.distinct_k34_count},
            {"distinct_alpha_count", report.distinct_alpha_count},
            {"witnesses", witnesses},
            {"violations", report.violations}};
}

}  // namespace

std::string richness_report_to_json(const RichnessReport& report) {
    return richness_json(report).dump(2) + "\n";
}

std::string equivalence_report_to_json(const EquivalenceReport& report) {
    ordered_json out{{"equivalent", report.equivalent},
                     {"zeta", nullptr},
                     {"reindexing", nullptr},
                     {"max_param_deviation", report.max_param_deviation},
                     {"diagnostics", report.diagnostics}};
    if (report.zeta.has_value()) out["zeta"] = *report.zeta;
    if (report.reindexing.has_value()) out["reindexing"] = *report.reindexing;
    return out.dump(2) + "\n";
}

std::string fit_result_to_json(const FitResult& result) {
    ordered_json out{{"config", configuration_json(result.config)},
                     {"sse", result.sse},
                     {"converged", result.converged},
                     {"start_index", result.start_index},
                     {"iterations", result.iterations},
                     {"flags", result.flags},
                     {"start_sse", result.start_sse}};
    return out.dump(2) + "\n";
}

std::string uniqueness_report_to_json(const UniquenessReport& report) {
    ordered_json out{{"n_starts", report.n_starts},
                     {"n_converged", report.n_converged},
                     {"n_equivalent", report.n_equivalent},
                     {"zeta_values", report.zeta_values},
                     {"worst_deviation", report.worst_deviation},
                     {"passed", report.passed},
                     {"hypothesis_ok", report.hypothesis_ok},
                     {"notes", report.notes}};
    return out.dump(2) + "\n";
}

std::string fit_trace_to_csv(const std::vector<StartTracePoint>& trace) {
    std::string out = "start,iter,sse\n";
    for (const auto& point : trace) {
        out += std::to_string(point.start);
        out += ',';
        out += std::to_string(point.iter);
        out += ',';
        out += format_double(point.sse);
        out += '\n';
    }
    return out;
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
        if (!stream) throw ValidationError("cannot open " + tmp.string() + " for writing");
        stream << text;
        if (!stream.good()) throw ValidationError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) throw ValidationError("cannot open " + path.string());
    std::ostringstream out;
    out << stream.rdbuf();
    return out.str();
}

}  // namespace revkin::io
