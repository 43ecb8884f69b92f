#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "efla/bench.hpp"
#include "efla/harness.hpp"
#include "efla/kernels.hpp"
#include "efla/verify.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return json::parse(in);  // parse_error carries byte offset + context
}

void check_keys(const json& cfg, const std::string& sub, std::initializer_list<const char*> allowed) {
    if (!cfg.is_object()) throw std::invalid_argument("config root must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        bool known = it.key() == "subcommand";
        for (const char* a : allowed)
            if (it.key() == a) known = true;
        if (!known)
            throw std::invalid_argument("unknown config key \"" + it.key() + "\" for " + sub);
    }
    if (cfg.contains("subcommand") && cfg.at("subcommand").get<std::string>() != sub)
        throw std::invalid_argument("config targets subcommand \"" +
                                    cfg.at("subcommand").get<std::string>() + "\", not " + sub);
}

template <typename T>
T get_or(const json& cfg, const char* key, T fallback) {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

std::size_t positive_size(const json& cfg, const char* key, std::size_t fallback) {
    const std::size_t v = get_or<std::size_t>(cfg, key, fallback);
    if (v < 1) throw std::invalid_argument(std::string(key) + " must be >= 1");
    return v;
}

// Per-subcommand flag bundle; option pointers let flags override config
// only when actually given.
struct SubArgs {
    CLI::App* cmd = nullptr;
    std::string config, out, kernels;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::vector<std::string> methods;
    std::size_t chunk_size = 0;
    bool json_report = false;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_tolerance = nullptr;
    CLI::Option* o_methods = nullptr;
    CLI::Option* o_chunk = nullptr;
};

std::string resolve_out(const SubArgs& a, const json& cfg) {
    if (a.o_out->count() > 0) return a.out;
    return get_or<std::string>(cfg, "out", "");
}

int cmd_verify(const SubArgs& a, const json& cfg) {
    check_keys(cfg, "verify", {"seed", "tolerance", "out"});
    efla::verify::Options opt;
    opt.seed = get_or<std::uint64_t>(cfg, "seed", opt.seed);
    if (a.o_seed->count() > 0) opt.seed = a.seed;
    if (cfg.contains("tolerance")) opt.tolerance_cap = cfg.at("tolerance").get<double>();
    if (a.o_tolerance->count() > 0) opt.tolerance_cap = a.tolerance;
    if (!(opt.tolerance_cap > 0.0)) throw std::invalid_argument("tolerance must be > 0");

    const auto results = efla::verify::run_all(opt);
    std::size_t n_passed = 0;
    for (const auto& r : results) {
        if (r.passed()) {
            ++n_passed;
            std::printf("PASS %-17s (%d checks)\n", r.name.c_str(), r.checks);
        } else {
            std::printf("FAIL %-17s (%d checks, %zu failures)\n", r.name.c_str(), r.checks,
                        r.failures.size());
            for (const auto& f : r.failures) std::printf("     %s\n", f.c_str());
        }
    }
    std::printf("%zu/%zu suites passed\n", n_passed, results.size());

    if (a.json_report) {
        json rep;
        rep["passed"] = n_passed == results.size();
        rep["seed"] = opt.seed;
        if (std::isfinite(opt.tolerance_cap)) rep["tolerance_cap"] = opt.tolerance_cap;
        rep["suites"] = json::array();
        for (const auto& r : results)
            rep["suites"].push_back(
                {{"name", r.name}, {"checks", r.checks}, {"passed", r.passed()}, {"failures", r.failures}});
        const std::string text = rep.dump(2) + "\n";
        const std::string out = resolve_out(a, cfg);
        if (out.empty())
            std::fputs(text.c_str(), stdout);
        else
            efla::write_file(out, text);
    }
    return n_passed == results.size() ? 0 : 1;
}

int cmd_converge(const SubArgs& a, const json& cfg) {
    check_keys(cfg, "converge", {"orders", "beta", "lambda", "out"});
    const auto orders = static_cast<unsigned>(positive_size(cfg, "orders", 15));
    const double beta = get_or<double>(cfg, "beta", 1.0);
    const double lambda = get_or<double>(cfg, "lambda", 1.0);
    const std::string out = resolve_out(a, cfg);
    if (out.empty()) throw std::invalid_argument("converge requires an output path (--out)");

    const auto rows = efla::rk_convergence(orders, beta, lambda);
    efla::write_file(out, efla::to_csv(rows));
    std::printf("wrote %zu convergence rows (x = %g) to %s\n", rows.size(), beta * lambda,
                out.c_str());
    return 0;
}

int cmd_recall(const SubArgs& a, const json& cfg) {
    check_keys(cfg, "recall",
               {"seed", "methods", "scheme", "n_pairs", "n_repeats", "d_k", "d_v", "perturbation",
                "params", "scale_values", "n_seeds", "out"});
    std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 42);
    if (a.o_seed->count() > 0) seed = a.seed;
    std::vector<std::string> method_names =
        get_or<std::vector<std::string>>(cfg, "methods", {"euler", "efla"});
    if (a.o_methods->count() > 0) method_names = a.methods;
    if (method_names.empty()) throw std::invalid_argument("recall needs at least one method");
    std::vector<efla::Method> methods;
    for (const auto& name : method_names) methods.push_back(efla::Method::parse(name));

    const std::string scheme = get_or<std::string>(cfg, "scheme", "repeated");
    const std::size_t n_pairs = positive_size(cfg, "n_pairs", 8);
    const std::size_t n_repeats = positive_size(cfg, "n_repeats", 800);
    const std::size_t d_k = positive_size(cfg, "d_k", 8);
    const std::size_t d_v = positive_size(cfg, "d_v", 8);
    const std::size_t n_seeds = positive_size(cfg, "n_seeds", 3);
    const bool scale_values = get_or<bool>(cfg, "scale_values", false);

    const std::string kind = get_or<std::string>(cfg, "perturbation", "scale");
    const std::vector<double> params =
        get_or<std::vector<double>>(cfg, "params", {1.0, 2.0, 4.0, 8.0});
    std::vector<efla::PerturbationSpec> specs;
    if (kind == "none") {
        specs.push_back(efla::PerturbationSpec::none());
    } else {
        if (params.empty()) throw std::invalid_argument("perturbation sweep needs params");
        for (double p : params) {
            if (kind == "scale")
                specs.push_back(efla::PerturbationSpec::scale(p, scale_values));
            else if (kind == "dropout")
                specs.push_back(efla::PerturbationSpec::dropout(p));
            else if (kind == "gaussian")
                specs.push_back(efla::PerturbationSpec::gaussian(p));
            else
                throw std::invalid_argument("unknown perturbation \"" + kind + "\"");
        }
    }

    const std::string out = resolve_out(a, cfg);
    if (out.empty()) throw std::invalid_argument("recall requires an output path (--out)");

    std::vector<efla::TrialReport> rows;
    for (std::size_t i = 0; i < n_seeds; ++i) {
        const std::uint64_t s = seed + i;
        const efla::RecallTask task =
            scheme == "repeated" ? efla::gen_repeated_recall(s, n_repeats, d_k, d_v)
                                 : efla::gen_recall(s, n_pairs, d_k, d_v, efla::parse_scheme(scheme));
        for (const auto& m : methods)
            for (const auto& p : specs) rows.push_back(efla::eval_recall(m, task, p, s));
    }
    efla::write_file(out, efla::to_csv(rows));
    std::printf("wrote %zu recall rows to %s\n", rows.size(), out.c_str());
    return 0;
}

int cmd_bench(const SubArgs& a, const json& cfg) {
    check_keys(cfg, "bench", {"seed", "method", "l_grid", "d_k", "d_v", "chunk_size", "reps", "out"});
    std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 7);
    if (a.o_seed->count() > 0) seed = a.seed;
    std::string method_name = get_or<std::string>(cfg, "method", "efla");
    if (a.o_methods->count() > 0) {
        if (a.methods.size() != 1)
            throw std::invalid_argument("bench times a single method per run");
        method_name = a.methods.front();
    }
    const efla::Method method = efla::Method::parse(method_name);
    const auto l_grid = get_or<std::vector<std::size_t>>(cfg, "l_grid", {1024, 2048, 4096, 8192});
    if (l_grid.empty()) throw std::invalid_argument("bench needs a non-empty L grid");
    for (std::size_t l : l_grid)
        if (l < 1) throw std::invalid_argument("L grid entries must be >= 1");
    const std::size_t d_k = positive_size(cfg, "d_k", 32);
    const std::size_t d_v = positive_size(cfg, "d_v", 32);
    std::size_t chunk_size = positive_size(cfg, "chunk_size", 64);
    if (a.o_chunk->count() > 0) chunk_size = a.chunk_size;
    if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
    const auto reps = static_cast<unsigned>(positive_size(cfg, "reps", 5));

    const efla::BenchReport report =
        efla::run_scaling_bench(method, l_grid, d_k, d_v, chunk_size, reps, seed);
    for (const auto& row : report.rows)
        std::printf("%-10s L=%-7zu median %.6fs   %.4g tokens/s\n", row.path.c_str(), row.len,
                    row.median_seconds, row.tokens_per_second);
    std::printf("fitted exponent: recurrent %.4f, chunkwise %.4f (band [0.8, 1.2])\n",
                report.exponent_recurrent, report.exponent_chunkwise);
    std::printf("path agreement on smallest L: %.3g (gate 1e-9)\n", report.sanity_max_deviation);

    const std::string out = resolve_out(a, cfg);
    if (!out.empty()) efla::write_file(out, efla::to_csv(report.rows));

    bool ok = report.sanity_max_deviation <= 1e-9;
    if (l_grid.size() >= 2) {
        ok = ok && report.exponent_recurrent >= 0.8 && report.exponent_recurrent <= 1.2;
        ok = ok && report.exponent_chunkwise >= 0.8 && report.exponent_chunkwise <= 1.2;
    }
    if (!ok) std::printf("FAIL: scaling/agreement outside the asserted band\n");
    return ok ? 0 : 1;
}

void attach_common(CLI::App* cmd, SubArgs& a, bool with_seed, bool with_methods, bool with_chunk,
                   bool with_tolerance) {
    a.cmd = cmd;
    cmd->add_option("--config", a.config, "JSON config file (flat; unknown keys rejected)");
    a.o_out = cmd->add_option("--out", a.out, "output path");
    cmd->add_option("--kernels", a.kernels, "kernel lane: scalar | avx2 | auto");
    if (with_seed) a.o_seed = cmd->add_option("--seed", a.seed, "base RNG seed");
    if (with_methods)
        a.o_methods =
            cmd->add_option("--methods", a.methods, "comma-separated method list")->delimiter(',');
    if (with_chunk) a.o_chunk = cmd->add_option("--chunk-size", a.chunk_size, "chunk length C");
    if (with_tolerance)
        a.o_tolerance = cmd->add_option("--tolerance", a.tolerance,
                                        "tolerance cap; only ever tightens the pinned values");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear-attention state recurrences as rank-1 ODE integrators: "
                 "verification suites, convergence sweeps, recall experiments, scaling benchmarks"};
    app.require_subcommand(1);

    SubArgs verify_args, converge_args, recall_args, bench_args;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run all property suites");
    attach_common(verify_cmd, verify_args, true, false, false, true);
    verify_cmd->add_flag("--json", verify_args.json_report, "emit a machine-readable report");

    CLI::App* converge_cmd =
        app.add_subcommand("converge", "RK order sweep: |beta*phi1_N(x) - alpha| vs N, as CSV");
    attach_common(converge_cmd, converge_args, false, false, false, false);

    CLI::App* recall_cmd =
        app.add_subcommand("recall", "associative-recall trials under perturbation sweeps, as CSV");
    attach_common(recall_cmd, recall_args, true, true, false, false);

    CLI::App* bench_cmd =
        app.add_subcommand("bench", "recurrent vs chunkwise throughput and scaling exponents");
    attach_common(bench_cmd, bench_args, true, true, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    SubArgs* active = nullptr;
    if (verify_cmd->parsed()) active = &verify_args;
    if (converge_cmd->parsed()) active = &converge_args;
    if (recall_cmd->parsed()) active = &recall_args;
    if (bench_cmd->parsed()) active = &bench_args;

    try {
        if (!active->kernels.empty()) efla::kernels::select(active->kernels.c_str());
        const json cfg = active->config.empty() ? json::object() : load_config(active->config);
        if (active == &verify_args) return cmd_verify(verify_args, cfg);
        if (active == &converge_args) return cmd_converge(converge_args, cfg);
        if (active == &recall_args) return cmd_recall(recall_args, cfg);
        return cmd_bench(bench_args, cfg);
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
