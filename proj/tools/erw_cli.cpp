#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erw/analysis.hpp"
#include "erw/io.hpp"
#include "erw/montecarlo.hpp"
#include "erw/observables.hpp"
#include "erw/oracle.hpp"
#include "erw/svg.hpp"
#include "erw/verify.hpp"
#include "erw/version.hpp"

namespace {

struct MemoryFlags {
    double p = -1.0;
    double ptilde = -1.0;
    std::string variant = "elephant";
    bool p_given = false;
    bool ptilde_given = false;
};

void add_memory_flags(CLI::App* cmd, MemoryFlags& flags) {
    cmd->add_option("--p", flags.p, "memory parameter (elephant variant)");
    cmd->add_option("--ptilde", flags.ptilde, "reinforcement parameter (pos/neg variants)");
    cmd->add_option("--variant", flags.variant, "step rule: elephant, pos or neg")
        ->check(CLI::IsMember({"elephant", "pos", "neg"}));
}

erw::MemoryConfig resolve_memory(const CLI::App* cmd, MemoryFlags& flags) {
    flags.p_given = cmd->count("--p") > 0;
    flags.ptilde_given = cmd->count("--ptilde") > 0;
    if (flags.p_given && flags.ptilde_given)
        throw CLI::ValidationError("--p and --ptilde are mutually exclusive");
    if (flags.variant == "elephant") {
        if (flags.ptilde_given)
            throw CLI::ValidationError("--ptilde requires --variant pos or neg");
        if (!flags.p_given) throw CLI::ValidationError("the elephant variant needs --p");
        return erw::MemoryConfig::elephant(flags.p);
    }
    if (flags.p_given)
        throw CLI::ValidationError("reinforced variants take --ptilde, not --p");
    if (!flags.ptilde_given)
        throw CLI::ValidationError("variant " + flags.variant + " needs --ptilde");
    return flags.variant == "pos" ? erw::MemoryConfig::positive(flags.ptilde)
                                  : erw::MemoryConfig::negative(flags.ptilde);
}

int workers_default() {
    if (const char* env = std::getenv("ERW_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

nlohmann::ordered_json oracle_json(const erw::ExactDistribution& dist,
                                   const erw::GroupPresentation& pres,
                                   const erw::MemoryConfig& memory) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json config;
    config["d1"] = pres.d1();
    config["d2"] = pres.d2();
    config["variant"] = erw::variant_name(memory.variant);
    if (memory.variant == erw::Variant::Elephant)
        config["p"] = memory.p;
    else
        config["ptilde"] = memory.p;
    config["n"] = dist.horizon;
    doc["config"] = config;
    doc["derived"] = erw::derived_json(memory, pres.degree());
    nlohmann::ordered_json pmf;
    for (std::size_t k = 0; k < dist.pmf.size(); ++k)
        if (dist.pmf[k] != 0.0) pmf[std::to_string(k)] = dist.pmf[k];
    doc["pmf"] = pmf;
    doc["mean_delta"] = dist.mean_delta;
    doc["return_prob"] = dist.return_prob;
    nlohmann::ordered_json abs_m, xi_m;
    for (const auto& [m, v] : dist.abs_moments) abs_m[erw::format_double(m)] = v;
    for (const auto& [m, v] : dist.xi_moments) xi_m[erw::format_double(m)] = v;
    doc["abs_moments"] = abs_m;
    doc["xi_moments"] = xi_m;
    doc["martingale_mean"] = dist.martingale_mean;
    doc["versions"] = {{"toolkit", erw::kToolkitVersion}, {"schema", erw::kSchemaVersion}};
    return doc;
}

int cmd_simulate(int d1, int d2, const erw::MemoryConfig& memory, std::uint64_t steps,
                 std::uint64_t replicas, std::uint64_t seed,
                 const std::vector<std::uint64_t>& checkpoints,
                 const std::vector<double>& moments, const std::string& out_dir, int workers,
                 bool fluctuations, bool svg) {
    if (2 * d1 + d2 < 3)
        throw CLI::ValidationError("simulate needs a tree of degree d = 2*d1 + d2 >= 3");
    erw::RunConfig cfg;
    cfg.d1 = d1;
    cfg.d2 = d2;
    cfg.memory = memory;
    cfg.horizon = steps;
    cfg.replicas = replicas;
    cfg.base_seed = seed;
    cfg.checkpoints = checkpoints;
    if (!moments.empty()) cfg.moment_orders = moments;
    for (const double required : {1.0, 1.5, 2.0})
        if (std::find(cfg.moment_orders.begin(), cfg.moment_orders.end(), required) ==
            cfg.moment_orders.end())
            cfg.moment_orders.push_back(required);
    std::sort(cfg.moment_orders.begin(), cfg.moment_orders.end());
    cfg.workers = workers;
    cfg.record_fluctuations = fluctuations;

    const auto summary = erw::run_ensemble(cfg);
    std::filesystem::create_directories(out_dir);
    erw::write_checkpoints_csv(out_dir + "/checkpoints.csv", summary);
    erw::write_summary_json(out_dir + "/summary.json", summary);
    if (fluctuations)
        erw::write_fluctuations_csv(out_dir + "/fluctuations.csv", summary.fluctuations);
    if (svg) {
        const auto& last = summary.checkpoints.back();
        erw::write_histogram_svg(out_dir + "/hist_fluct.svg", last.fluct,
                                 erw::fluctuation_variance(summary.d),
                                 "fluctuation statistic at n=" + std::to_string(last.n));
        const double p_eff = erw::effective_memory(cfg.memory, summary.d);
        if (fluctuations && p_eff < 1.0) {
            const double rn = erw::rate(cfg.horizon, p_eff, summary.d);
            std::vector<double> xs, ys;
            xs.reserve(summary.fluctuations.size());
            ys.reserve(summary.fluctuations.size());
            for (const auto& row : summary.fluctuations) {
                xs.push_back(static_cast<double>(row.replica_index));
                ys.push_back(rn * row.xi);
            }
            erw::write_scatter_svg(out_dir + "/xi_scatter.svg", xs, ys,
                                   "r_n * Xi_n at n=" + std::to_string(cfg.horizon), "replica",
                                   "r_n * Xi_n");
        }
    }
    const auto& last = summary.checkpoints.back();
    std::cout << "group d1=" << d1 << " d2=" << d2 << " (degree " << summary.d << "), "
              << erw::variant_name(memory.variant) << " rule, effective p "
              << erw::format_double(erw::effective_memory(memory, summary.d)) << ", regime "
              << erw::regime_name(
                     erw::classify_regime(erw::effective_memory(memory, summary.d), summary.d))
              << "\n";
    std::cout << "replicas " << replicas << ", horizon " << steps << ", final mean speed "
              << erw::format_double(last.speed.mean()) << " (escape rate "
              << erw::format_double(erw::escape_rate(summary.d)) << ")\n";
    std::cout << "wrote " << out_dir << "/checkpoints.csv, " << out_dir << "/summary.json";
    if (fluctuations) std::cout << ", " << out_dir << "/fluctuations.csv";
    std::cout << "\n";
    return 0;
}

int cmd_oracle(int d1, int d2, const erw::MemoryConfig& memory, std::uint64_t n,
               const std::vector<double>& moments, const std::string& out_dir, bool compare_mc,
               std::uint64_t replicas, std::uint64_t seed) {
    const erw::GroupPresentation pres(d1, d2);
    const auto dist = erw::enumerate_exact(pres, memory, n,
                                           moments.empty() ? std::vector<double>{1.0, 2.0}
                                                           : moments);
    auto doc = oracle_json(dist, pres, memory);
    if (compare_mc) {
        erw::RunConfig cfg;
        cfg.d1 = d1;
        cfg.d2 = d2;
        cfg.memory = memory;
        cfg.horizon = n;
        cfg.replicas = replicas;
        cfg.base_seed = seed;
        cfg.checkpoints = {n};
        cfg.track_distance_pmf = true;
        const auto summary = erw::run_ensemble(cfg);
        const auto& counts = summary.checkpoints.back().delta_counts;
        nlohmann::ordered_json mc;
        mc["replicas"] = replicas;
        mc["seed"] = seed;
        nlohmann::ordered_json bins = nlohmann::ordered_json::array();
        double max_abs_z = 0.0;
        for (std::size_t k = 0; k < dist.pmf.size(); ++k) {
            const double q = dist.pmf[k];
            const double emp =
                static_cast<double>(counts[k]) / static_cast<double>(replicas);
            if (q == 0.0 && counts[k] == 0) continue;
            nlohmann::ordered_json bin;
            bin["delta"] = k;
            bin["exact"] = q;
            bin["empirical"] = emp;
            if (q > 0.0 && q < 1.0) {
                const double z =
                    (emp - q) / std::sqrt(q * (1.0 - q) / static_cast<double>(replicas));
                bin["z"] = z;
                max_abs_z = std::max(max_abs_z, std::abs(z));
            }
            bins.push_back(bin);
        }
        mc["bins"] = bins;
        mc["max_abs_z"] = max_abs_z;
        doc["mc"] = mc;
    }
    const std::string text = doc.dump(2);
    std::cout << text << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto out = erw::open_output(out_dir + "/oracle.json");
        out << text << "\n";
    }
    return 0;
}

int cmd_verify(bool quick, std::uint64_t seed) {
    const auto results = erw::run_verify(quick, seed);
    std::size_t failed = 0;
    std::printf("%-22s %-28s %s\n", "check", "point", "result");
    for (const auto& r : results) {
        std::printf("%-22s %-28s %s%s%s\n", r.check.c_str(), r.point.c_str(),
                    r.pass ? "PASS" : "FAIL", r.detail.empty() ? "" : "  ",
                    r.detail.c_str());
        if (!r.pass) ++failed;
    }
    std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}

int cmd_analyze(const std::string& in_dir, const std::string& out_dir, std::uint64_t burn_in,
                bool svg) {
    const auto rows = erw::read_checkpoints_csv(in_dir + "/checkpoints.csv");
    const auto summary = erw::read_json_file(in_dir + "/summary.json");
    const int d = summary.at("derived").at("d").get<int>();
    const double p_eff = summary.at("derived").at("p_effective").get<double>();
    std::vector<double> urn_dev;
    if (summary.contains("results"))
        for (const auto& row : summary.at("results"))
            urn_dev.push_back(row.value("mean_urn_dev", 0.0));

    std::vector<double> fluct_samples;
    std::vector<erw::FluctuationCsvRow> fluct_rows;
    const std::string fluct_path = in_dir + "/fluctuations.csv";
    if (std::filesystem::exists(fluct_path)) {
        fluct_rows = erw::read_fluctuations_csv(fluct_path);
        fluct_samples.reserve(fluct_rows.size());
        for (const auto& r : fluct_rows) fluct_samples.push_back(r.fluct);
    }

    const auto report = erw::analyze_checkpoints(rows, urn_dev, p_eff, d, burn_in, fluct_samples);
    const auto doc = erw::analysis_json(report);
    std::filesystem::create_directories(out_dir);
    {
        auto out = erw::open_output(out_dir + "/analysis.json");
        out << doc.dump(2) << "\n";
    }
    if (!fluct_rows.empty() && !report.p_excluded) {
        const double rn = erw::rate(rows.back().n, p_eff, d);
        auto out = erw::open_output(out_dir + "/xi_scatter.csv");
        out << "replica_index,xi,rn_xi\n";
        std::vector<double> xs, ys;
        for (const auto& r : fluct_rows) {
            out << r.replica_index << ',' << erw::format_double(r.xi) << ','
                << erw::format_double(rn * r.xi) << '\n';
            xs.push_back(static_cast<double>(r.replica_index));
            ys.push_back(rn * r.xi);
        }
        if (svg)
            erw::write_scatter_svg(out_dir + "/xi_scatter.svg", xs, ys, "r_n * Xi_n", "replica",
                                   "r_n * Xi_n");
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elephant random walk toolkit for regular trees"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo ensemble");
    int sim_d1 = 0, sim_d2 = 0;
    MemoryFlags sim_mem;
    std::uint64_t sim_steps = 0, sim_replicas = 1000, sim_seed = 1;
    std::vector<std::uint64_t> sim_checkpoints;
    std::vector<double> sim_moments;
    std::string sim_out = ".";
    int sim_workers = workers_default();
    bool sim_fluct = false, sim_svg = false;
    sim->add_option("--d1", sim_d1, "free factors Z")->required();
    sim->add_option("--d2", sim_d2, "involutive factors Z2")->required();
    add_memory_flags(sim, sim_mem);
    sim->add_option("--steps", sim_steps, "horizon n")->required();
    sim->add_option("--replicas", sim_replicas, "independent runs");
    sim->add_option("--seed", sim_seed, "base seed");
    sim->add_option("--checkpoints", sim_checkpoints, "recording times (default: geometric)")
        ->delimiter(',');
    sim->add_option("--moments", sim_moments, "absolute moment orders (default 1,1.5,2)")
        ->delimiter(',');
    sim->add_option("--out-dir", sim_out, "output directory");
    sim->add_option("--workers", sim_workers, "worker threads (or env ERW_WORKERS)");
    sim->add_flag("--fluctuations", sim_fluct, "write per-replica fluctuations.csv");
    sim->add_flag("--svg", sim_svg, "write SVG plots");

    // oracle
    auto* orc = app.add_subcommand("oracle", "exact small-horizon law by enumeration");
    int orc_d1 = 0, orc_d2 = 0;
    MemoryFlags orc_mem;
    std::uint64_t orc_n = 0, orc_replicas = 100000, orc_seed = 1;
    std::vector<double> orc_moments;
    std::string orc_out;
    bool orc_compare = false;
    orc->add_option("--d1", orc_d1, "free factors Z")->required();
    orc->add_option("--d2", orc_d2, "involutive factors Z2")->required();
    add_memory_flags(orc, orc_mem);
    orc->add_option("--n", orc_n, "horizon (enumeration budget: n <= 12, d^n <= 1e8)")
        ->required();
    orc->add_option("--moments", orc_moments, "moment orders (default 1,2)")->delimiter(',');
    orc->add_option("--out-dir", orc_out, "also write oracle.json here");
    orc->add_flag("--compare-mc", orc_compare, "run a paired ensemble and report z-scores");
    orc->add_option("--replicas", orc_replicas, "replicas for --compare-mc");
    orc->add_option("--seed", orc_seed, "seed for --compare-mc");

    // verify
    auto* ver = app.add_subcommand("verify", "run the cross-module property suite");
    bool ver_quick = false;
    std::uint64_t ver_seed = 20240817;
    ver->add_flag("--quick", ver_quick, "reduced grid, smaller ensembles");
    ver->add_option("--seed", ver_seed, "suite seed");

    // analyze
    auto* ana = app.add_subcommand("analyze", "fit exponents and normality diagnostics");
    std::string ana_in = ".", ana_out;
    std::uint64_t ana_burn = 1024;
    bool ana_svg = false;
    ana->add_option("--in-dir", ana_in, "directory with checkpoints.csv/summary.json");
    ana->add_option("--out-dir", ana_out, "output directory (default: --in-dir)");
    ana->add_option("--burn-in", ana_burn, "ignore checkpoints below this n");
    ana->add_flag("--svg", ana_svg, "write scatter SVG");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto memory = resolve_memory(sim, sim_mem);
            return cmd_simulate(sim_d1, sim_d2, memory, sim_steps, sim_replicas, sim_seed,
                                sim_checkpoints, sim_moments, sim_out, sim_workers, sim_fluct,
                                sim_svg);
        }
        if (orc->parsed()) {
            const auto memory = resolve_memory(orc, orc_mem);
            return cmd_oracle(orc_d1, orc_d2, memory, orc_n, orc_moments, orc_out, orc_compare,
                              orc_replicas, orc_seed);
        }
        if (ver->parsed()) return cmd_verify(ver_quick, ver_seed);
        if (ana->parsed())
            return cmd_analyze(ana_in, ana_out.empty() ? ana_in : ana_out, ana_burn, ana_svg);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
