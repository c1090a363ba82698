#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "erw/montecarlo.hpp"
#include "erw/observables.hpp"
#include "erw/version.hpp"

namespace erw {

// All floating-point output goes through one fixed format so artifacts are
// byte-stable across platforms with the same libc behavior for %.17g.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("io: cannot open " + path + " for writing");
    return out;
}

inline void write_checkpoints_csv(const std::string& path, const EnsembleSummary& summary) {
    auto out = open_output(path);
    out << "n,mean_speed,abs_moment_m1,abs_moment_m1_5,abs_moment_m2,return_prob,"
           "mean_xi,var_xi,mean_fluct,var_fluct\n";
    for (const auto& cp : summary.checkpoints) {
        out << cp.n << ',' << format_double(cp.speed.mean()) << ','
            << format_double(cp.speed.abs_moment(1.0)) << ','
            << format_double(cp.speed.abs_moment(1.5)) << ','
            << format_double(cp.speed.abs_moment(2.0)) << ','
            << format_double(cp.return_prob()) << ',' << format_double(cp.xi.mean()) << ','
            << format_double(cp.xi.variance()) << ',' << format_double(cp.fluct.mean()) << ','
            << format_double(cp.fluct.variance()) << '\n';
    }
    if (!out) throw std::runtime_error("io: failed while writing " + path);
}

inline void write_fluctuations_csv(const std::string& path,
                                   const std::vector<FluctuationRow>& rows) {
    auto out = open_output(path);
    out << "replica_index,delta_n,speed,xi,fluct_stat\n";
    for (const auto& row : rows) {
        out << row.replica_index << ',' << row.delta << ',' << format_double(row.speed) << ','
            << format_double(row.xi) << ',' << format_double(row.fluct) << '\n';
    }
    if (!out) throw std::runtime_error("io: failed while writing " + path);
}

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Elephant: return "elephant";
        case Variant::Positive: return "pos";
        case Variant::Negative: return "neg";
    }
    return "unknown";
}

// Derived constants echoed into every artifact so each run is
// self-describing. alpha is null outside its domain of definition.
inline nlohmann::ordered_json derived_json(const MemoryConfig& memory, int d) {
    const double p_eff = effective_memory(memory, d);
    nlohmann::ordered_json derived;
    derived["d"] = d;
    derived["p_effective"] = p_eff;
    derived["p_d"] = critical_p(d);
    derived["regime"] = regime_name(classify_regime(p_eff, d));
    if (p_eff >= 0.0 && p_eff < 0.5 && !(p_eff == 0.0 && d == 3))
        derived["alpha"] = alpha(p_eff, d);
    else
        derived["alpha"] = nullptr;
    derived["lambda2"] = second_eigenvalue(p_eff, d);
    derived["r_exponent"] = rate_exponent(p_eff, d);
    return derived;
}

// Worker count and output paths are deliberately not echoed: output bytes
// must not depend on how the run was scheduled.
inline nlohmann::ordered_json summary_json(const EnsembleSummary& summary) {
    const RunConfig& cfg = summary.config;
    nlohmann::ordered_json doc;
    nlohmann::ordered_json config;
    config["d1"] = cfg.d1;
    config["d2"] = cfg.d2;
    config["variant"] = variant_name(cfg.memory.variant);
    if (cfg.memory.variant == Variant::Elephant)
        config["p"] = cfg.memory.p;
    else
        config["ptilde"] = cfg.memory.p;
    config["steps"] = cfg.horizon;
    config["replicas"] = cfg.replicas;
    config["seed"] = cfg.base_seed;
    config["checkpoints"] = cfg.checkpoints;
    config["moments"] = cfg.moment_orders;
    doc["config"] = config;
    doc["derived"] = derived_json(cfg.memory, summary.d);

    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& cp : summary.checkpoints) {
        nlohmann::ordered_json row;
        row["n"] = cp.n;
        row["mean_speed"] = cp.speed.mean();
        nlohmann::ordered_json abs;
        for (const double m : cp.speed.abs_orders()) abs[format_double(m)] = cp.speed.abs_moment(m);
        row["abs_moments"] = abs;
        row["return_prob"] = cp.return_prob();
        row["mean_xi"] = cp.xi.mean();
        row["var_xi"] = cp.xi.variance();
        row["mean_fluct"] = cp.fluct.mean();
        row["var_fluct"] = cp.fluct.variance();
        row["mean_urn_dev"] = cp.urn_dev.mean();
        row["mean_zero_frac"] = cp.zero_frac.mean();
        results.push_back(row);
    }
    doc["results"] = results;
    doc["versions"] = {{"toolkit", kToolkitVersion}, {"schema", kSchemaVersion}};
    return doc;
}

inline void write_summary_json(const std::string& path, const EnsembleSummary& summary) {
    auto out = open_output(path);
    out << summary_json(summary).dump(2) << '\n';
    if (!out) throw std::runtime_error("io: failed while writing " + path);
}

struct CheckpointCsvRow {
    std::uint64_t n = 0;
    double mean_speed = 0.0;
    double abs_m1 = 0.0;
    double abs_m1_5 = 0.0;
    double abs_m2 = 0.0;
    double return_prob = 0.0;
    double mean_xi = 0.0;
    double var_xi = 0.0;
    double mean_fluct = 0.0;
    double var_fluct = 0.0;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

inline std::vector<CheckpointCsvRow> read_checkpoints_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("io: empty file " + path);
    std::vector<CheckpointCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw std::runtime_error("io: malformed row in " + path);
        CheckpointCsvRow row;
        row.n = std::stoull(f[0]);
        row.mean_speed = std::stod(f[1]);
        row.abs_m1 = std::stod(f[2]);
        row.abs_m1_5 = std::stod(f[3]);
        row.abs_m2 = std::stod(f[4]);
        row.return_prob = std::stod(f[5]);
        row.mean_xi = std::stod(f[6]);
        row.var_xi = std::stod(f[7]);
        row.mean_fluct = std::stod(f[8]);
        row.var_fluct = std::stod(f[9]);
        rows.push_back(row);
    }
    return rows;
}

struct FluctuationCsvRow {
    std::uint64_t replica_index = 0;
    std::uint64_t delta = 0;
    double speed = 0.0;
    double xi = 0.0;
    double fluct = 0.0;
};

inline std::vector<FluctuationCsvRow> read_fluctuations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("io: empty file " + path);
    std::vector<FluctuationCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw std::runtime_error("io: malformed row in " + path);
        rows.push_back(FluctuationCsvRow{std::stoull(f[0]), std::stoull(f[1]), std::stod(f[2]),
                                         std::stod(f[3]), std::stod(f[4])});
    }
    return rows;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    return doc;
}

}  // namespace erw
